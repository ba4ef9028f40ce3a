use std::sync::Arc;

use axum::body::Body;
use axum::http::{Request, StatusCode};
use http_body_util::BodyExt;
use imaze_cli::server::app;
use imaze_core::maze::{ChoicePoint, MaterialsBundle, MaterialsMetadata, MazeItem, NonceConfig};
use imaze_core::store::ResultStore;
use imaze_core::trials::{read_rt_rows, DistractorKind};
use serde_json::{json, Value};
use tower::ServiceExt;

fn bundle() -> MaterialsBundle {
    let choice = |index: usize, word: &str, distractor: &str, kind, critical| ChoicePoint {
        index,
        word: word.into(),
        distractor: distractor.into(),
        kind,
        region: if critical { "verb" } else { "subject" }.into(),
        critical,
    };
    let item = |condition: &str, verb: &str| MazeItem {
        suite: "SVNA".into(),
        item_id: 1,
        condition: condition.into(),
        choices: vec![
            choice(0, "The", "x-x-x", DistractorKind::Mask, false),
            choice(1, "author", "blorpen", DistractorKind::L, false),
            choice(2, verb, "trasp", DistractorKind::L, true),
        ],
    };
    MaterialsBundle {
        metadata: MaterialsMetadata {
            version: "test".into(),
            seed: 7,
            rate: 0.25,
            lexicon_hash: String::new(),
            lm: Value::Null,
            chars: Default::default(),
            nonce: NonceConfig::default(),
        },
        items: vec![item("match", "laughs"), item("mismatch", "laugh")],
    }
}

fn session(upload_id: &str, hash: &str, rt: f64) -> Value {
    let row = |i: usize, word: &str, distractor: &str, kind: &str, critical: bool, rt_ms: f64| {
        json!({
            "participant": "p-0001",
            "suite_tag": "SVNA",
            "item_id": 1,
            "condition": "match",
            "word_index": i,
            "word": word,
            "region": if critical { "verb" } else { "subject" },
            "critical": critical,
            "distractor": distractor,
            "distractor_kind": kind,
            "correct": true,
            "rt_ms": rt_ms,
        })
    };
    json!({
        "upload_id": upload_id,
        "participant": "p-0001",
        "materials_hash": hash,
        "list_id": 0,
        "complete": true,
        "trials": [
            row(0, "The", "x-x-x", "mask", false, 1000.0),
            row(1, "author", "blorpen", "L", false, 640.0),
            row(2, "laughs", "trasp", "L", true, rt),
        ],
        "client": { "refresh_hz": 60.0, "user_agent": "test" },
    })
}

struct Harness {
    _dir: tempfile::TempDir,
    store: Arc<ResultStore>,
    hash: String,
}

fn harness() -> Harness {
    let dir = tempfile::tempdir().unwrap();
    let store = Arc::new(ResultStore::open(dir.path()).unwrap());
    let hash = store.put_materials(&bundle()).unwrap();
    Harness { _dir: dir, store, hash }
}

async fn send(h: &Harness, req: Request<Body>) -> (StatusCode, String) {
    let res = app(h.store.clone(), None).oneshot(req).await.unwrap();
    let status = res.status();
    let bytes = res.into_body().collect().await.unwrap().to_bytes();
    (status, String::from_utf8(bytes.to_vec()).unwrap())
}

fn get(uri: &str) -> Request<Body> {
    Request::get(uri).body(Body::empty()).unwrap()
}

fn post(body: String) -> Request<Body> {
    Request::post("/api/results")
        .header("content-type", "application/json")
        .body(Body::from(body))
        .unwrap()
}

#[tokio::test]
async fn index_serves_placeholder_or_runner_page() {
    let h = harness();
    let (status, body) = send(&h, get("/")).await;
    assert_eq!(status, StatusCode::OK);
    assert!(body.contains("<!doctype html>"));

    let runner = tempfile::tempdir().unwrap();
    std::fs::write(runner.path().join("index.html"), "<p>runner</p>").unwrap();
    let res = app(h.store.clone(), Some(runner.path().to_path_buf()))
        .oneshot(get("/"))
        .await
        .unwrap();
    let bytes = res.into_body().collect().await.unwrap().to_bytes();
    assert_eq!(&bytes[..], b"<p>runner</p>");
}

#[tokio::test]
async fn materials_are_served_by_hash() {
    let h = harness();
    let (status, body) = send(&h, get(&format!("/api/materials/{}", h.hash))).await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(MaterialsBundle::from_json(&body).unwrap(), bundle());
    assert_eq!(imaze_core::maze::hash_bytes(body.as_bytes()), h.hash);

    let (status, body) = send(&h, get(&format!("/api/materials/{}", "0".repeat(64)))).await;
    assert_eq!(status, StatusCode::NOT_FOUND);
    assert_eq!(serde_json::from_str::<Value>(&body).unwrap()["error"], "hash_mismatch");

    let (status, _) = send(&h, get("/api/materials/not-a-hash")).await;
    assert_eq!(status, StatusCode::NOT_FOUND);
}

#[tokio::test]
async fn results_are_stored_once() {
    let h = harness();
    let (status, body) = send(&h, post(session("u-1", &h.hash, 720.0).to_string())).await;
    assert_eq!(status, StatusCode::CREATED, "{body}");
    assert_eq!(serde_json::from_str::<Value>(&body).unwrap(), json!({ "status": "stored", "rows": 3 }));

    let (status, body) = send(&h, post(session("u-1", &h.hash, 720.0).to_string())).await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(serde_json::from_str::<Value>(&body).unwrap()["status"], "already_stored");

    let (status, body) = send(&h, post(session("u-1", &h.hash, 721.0).to_string())).await;
    assert_eq!(status, StatusCode::CONFLICT);
    assert_eq!(serde_json::from_str::<Value>(&body).unwrap()["error"], "duplicate_upload");

    let log = std::fs::read(h.store.rt_log_path()).unwrap();
    let rows = read_rt_rows(&log[..]).unwrap();
    assert_eq!(rows.len(), 3);
    assert_eq!(rows[2].rt_ms, 720.0);
    assert!(rows[2].critical);
}

#[tokio::test]
async fn malformed_results_are_rejected() {
    let h = harness();
    let (status, _) = send(&h, post("{not json".into())).await;
    assert_eq!(status, StatusCode::UNPROCESSABLE_ENTITY);

    let mut wrong_word = session("u-2", &h.hash, 700.0);
    wrong_word["trials"][2]["word"] = json!("laugh");
    let (status, _) = send(&h, post(wrong_word.to_string())).await;
    assert_eq!(status, StatusCode::UNPROCESSABLE_ENTITY);

    let unknown = session("u-3", &"a".repeat(64), 700.0);
    let (status, _) = send(&h, post(unknown.to_string())).await;
    assert_eq!(status, StatusCode::NOT_FOUND);

    assert!(!h.store.rt_log_path().exists());
}

#[tokio::test]
async fn assignment_balances_lists() {
    let h = harness();
    let uri = format!("/api/assignment/{}", h.hash);
    let (status, body) = send(&h, get(&uri)).await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(serde_json::from_str::<Value>(&body).unwrap(), json!({ "list_id": 0, "lists": 2, "completed": 0 }));

    send(&h, post(session("u-4", &h.hash, 700.0).to_string())).await;
    let (_, body) = send(&h, get(&uri)).await;
    assert_eq!(serde_json::from_str::<Value>(&body).unwrap()["list_id"], 1);
}

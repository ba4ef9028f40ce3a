use std::fs;
use std::path::Path;

use imaze_core::maze::{generate_materials, CharModel, CharModelConfig, Generators, Lexicon, NonceConfig};
use imaze_core::scoring::{accuracy_score, consistency_score, read_score_report, write_score_report, RtOptions};
use imaze_core::simulate::{simulate_rt_log, SimParams};
use imaze_core::store::{ClientInfo, ResultStore, SessionRecord, UploadOutcome};
use imaze_core::suite::{load_suite, TestSuite};
use imaze_core::surprisal::{score_suites_ngram, train_ngram, Aggregation, FrequencyTable, NGramConfig, SurprisalTable};
use imaze_core::trials::{read_rt_log, read_rt_rows, write_rt_rows, DistractorKind, RTTrial};

fn fixtures() -> (Vec<TestSuite>, Vec<Vec<String>>) {
    let root = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../fixtures");
    let mut paths: Vec<_> = fs::read_dir(root.join("suites")).unwrap().map(|e| e.unwrap().path()).collect();
    paths.sort();
    let suites = paths.iter().map(|p| load_suite(&fs::read_to_string(p).unwrap()).unwrap()).collect();
    let corpus = fs::read_to_string(root.join("corpus.txt"))
        .unwrap()
        .lines()
        .map(|l| l.split_whitespace().map(str::to_string).collect())
        .collect();
    (suites, corpus)
}

#[test]
fn surprisal_table_round_trips_and_covers_every_sentence() {
    let (suites, corpus) = fixtures();
    let lm = train_ngram(&corpus, NGramConfig::default()).unwrap();
    let table = score_suites_ngram(&lm, &suites, "ngram");
    for s in &suites {
        table.check_coverage(s).unwrap();
    }
    let mut bytes = Vec::new();
    table.write_tsv(&mut bytes).unwrap();
    let back = SurprisalTable::read_tsv("ngram", &bytes[..], &suites).unwrap();
    assert_eq!(back.len(), table.len());
    for (key, entry) in table.entries() {
        let other = back.get(&key.suite, key.item_id, &key.condition).unwrap();
        assert_eq!(other.total(), entry.total());
    }

    let scores: Vec<_> = suites
        .iter()
        .map(|s| accuracy_score(s, &table, Aggregation::Sum).unwrap())
        .collect();
    let mut report = Vec::new();
    write_score_report(&scores, &mut report).unwrap();
    let rows = read_score_report(&report[..]).unwrap();
    let overall = rows.iter().filter(|r| r.prediction == "overall").count();
    assert_eq!(overall, suites.len());
}

#[test]
fn simulated_log_survives_serialization_and_scores() {
    let (suites, corpus) = fixtures();
    let lm = train_ngram(&corpus, NGramConfig::default()).unwrap();
    let table = score_suites_ngram(&lm, &suites, "ngram");
    let freq = FrequencyTable::from_corpus(&corpus).unwrap();
    let params = SimParams {
        effect_ms: 80.0,
        ..SimParams::default()
    };
    let rows = simulate_rt_log(&suites, &table, &freq, None, params, 3).unwrap();
    let mut csv = Vec::new();
    write_rt_rows(&rows, &mut csv, true).unwrap();
    assert_eq!(read_rt_rows(&csv[..]).unwrap(), rows);

    let trials: Vec<RTTrial> = read_rt_log(&csv[..], &freq).unwrap();
    let svna = suites.iter().find(|s| s.tag == "SVNA-src").unwrap();
    let score = consistency_score(svna, &trials, RtOptions::default()).unwrap();
    // A large injected ungrammaticality cost makes every agreement prediction hold.
    assert_eq!(score.overall.proportion, 1.0);
}

#[test]
fn generated_materials_are_accepted_by_the_store() {
    let (suites, corpus) = fixtures();
    let lm = train_ngram(&corpus, NGramConfig::default()).unwrap();
    let freq = FrequencyTable::from_corpus(&corpus).unwrap();
    let chars = CharModel::train(freq.iter().map(|(w, _)| w), CharModelConfig::default()).unwrap();
    let lexicon = Lexicon::from_frequency(&freq);
    let gens = Generators {
        scorer: &lm,
        lexicon: &lexicon,
        freq: &freq,
        chars: &chars,
        nonce: NonceConfig::default(),
    };
    let bundle = generate_materials(&suites[..2], &gens, 0.25, 4, serde_json::Value::Null).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let store = ResultStore::open(dir.path()).unwrap();
    let hash = store.put_materials(&bundle).unwrap();
    assert_eq!(hash, bundle.hash());

    let item = &bundle.items[0];
    let trials = item
        .choices
        .iter()
        .map(|c| imaze_core::trials::RtRow {
            participant: "p1".into(),
            suite_tag: item.suite.clone(),
            item_id: item.item_id,
            condition: item.condition.clone(),
            word_index: c.index,
            word: c.word.clone(),
            region: c.region.clone(),
            critical: c.critical,
            distractor: c.distractor.clone(),
            distractor_kind: c.kind,
            correct: true,
            rt_ms: if c.kind == DistractorKind::Mask { 1200.0 } else { 650.0 },
        })
        .collect::<Vec<_>>();
    let record = SessionRecord {
        upload_id: "session-1".into(),
        participant: "p1".into(),
        materials_hash: hash.clone(),
        list_id: Some(0),
        complete: true,
        trials,
        client: ClientInfo::default(),
    };
    let n = record.trials.len();
    assert_eq!(store.submit(&record).unwrap(), UploadOutcome::Stored { rows: n });
    let log = fs::read(store.rt_log_path()).unwrap();
    assert_eq!(read_rt_rows(&log[..]).unwrap(), record.trials);
}

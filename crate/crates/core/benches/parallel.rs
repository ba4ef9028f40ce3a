//! Rayon's default pool against a single worker on the data-parallel hot
//! paths. Built without the `parallel` feature, only the sequential backend
//! is measured.

use std::fs;
use std::path::Path;

use criterion::{criterion_group, criterion_main, Criterion};
use imaze_core::maze::{generate_materials, CharModel, CharModelConfig, Generators, Lexicon, NonceConfig};
use imaze_core::stats::{bootstrap_ci, mean};
use imaze_core::suite::{load_suite, TestSuite};
use imaze_core::surprisal::{score_suites_ngram, train_ngram, FrequencyTable, NGramConfig};

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

/// Runs `f` on a pool of `threads` workers (0 = rayon's default).
#[cfg(feature = "parallel")]
fn on_pool<R: Send>(threads: usize, f: impl FnOnce() -> R + Send) -> R {
    rayon::ThreadPoolBuilder::new().num_threads(threads).build().unwrap().install(f)
}

fn backends() -> Vec<(&'static str, usize)> {
    if cfg!(feature = "parallel") {
        vec![("sequential", 1), ("parallel", 0)]
    } else {
        vec![("sequential", 1)]
    }
}

fn run<R: Send>(threads: usize, f: impl FnOnce() -> R + Send) -> R {
    #[cfg(feature = "parallel")]
    return on_pool(threads, f);
    #[cfg(not(feature = "parallel"))]
    {
        let _ = threads;
        f()
    }
}

fn bench(c: &mut Criterion) {
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
    let values: Vec<f64> = (0..2000).map(|i| ((i * 7919) % 1000) as f64 / 10.0).collect();

    let mut group = c.benchmark_group("bootstrap_10k");
    group.sample_size(20);
    for (name, threads) in backends() {
        group.bench_function(name, |b| b.iter(|| run(threads, || bootstrap_ci(&values, mean, 10_000, 1, 0.95).unwrap())));
    }
    group.finish();

    let mut group = c.benchmark_group("score_suites");
    group.sample_size(20);
    for (name, threads) in backends() {
        group.bench_function(name, |b| b.iter(|| run(threads, || score_suites_ngram(&lm, &suites, "ngram"))));
    }
    group.finish();

    let mut group = c.benchmark_group("materials");
    group.sample_size(10);
    for (name, threads) in backends() {
        group.bench_function(name, |b| {
            b.iter(|| run(threads, || generate_materials(&suites, &gens, 0.25, 1, serde_json::Value::Null).unwrap()))
        });
    }
    group.finish();
}

criterion_group!(benches, bench);
criterion_main!(benches);

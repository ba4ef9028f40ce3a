//! Interpolated absolute-discounting n-gram model.
//!
//! For a context `h` of length `k` with shortened context `h'`:
//!
//! ```text
//! p(w | h) = max(c(h w) - D, 0) / c(h ·) + D · N1+(h ·) / c(h ·) · p(w | h')
//! ```
//!
//! falling back to `p(w | h')` when `h` was never seen. The recursion bottoms
//! out in the uniform distribution over the vocabulary, which contains every
//! training word, the end-of-sentence symbol and the unknown-word symbol (the
//! start symbol is never predicted). Every conditional therefore sums to one
//! and every word, seen or not, gets a nonzero probability.

use std::collections::{BTreeMap, HashMap};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const UNK: &str = "<unk>";
pub const BOS: &str = "<s>";
pub const EOS: &str = "</s>";

const UNK_ID: u32 = 0;
const EOS_ID: u32 = 1;
const BOS_ID: u32 = 2;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NGramConfig {
    pub order: usize,
    pub discount: f64,
    /// Lowercase tokens and strip surrounding punctuation before counting and scoring.
    pub normalize: bool,
}

impl Default for NGramConfig {
    fn default() -> Self {
        NGramConfig {
            order: 3,
            discount: 0.75,
            normalize: true,
        }
    }
}

/// Lowercases and trims leading/trailing ASCII punctuation. A token that is all
/// punctuation is returned lowercased unchanged.
pub fn normalize_word(word: &str) -> String {
    let trimmed = word.trim_matches(|c: char| c.is_ascii_punctuation());
    if trimmed.is_empty() {
        word.to_lowercase()
    } else {
        trimmed.to_lowercase()
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
struct ContextCounts {
    total: u64,
    followers: HashMap<u32, u64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct NGramModel {
    config: NGramConfig,
    vocab: Vec<String>,
    ids: HashMap<String, u32>,
    /// `levels[k]` maps a context of length `k` to its follower counts.
    levels: Vec<HashMap<Vec<u32>, ContextCounts>>,
}

/// Trains a model on tokenized sentences. Each sentence is padded with
/// `order - 1` start symbols and one end symbol.
pub fn train_ngram<S: AsRef<str>>(corpus: &[Vec<S>], config: NGramConfig) -> Result<NGramModel> {
    if config.order == 0 {
        return Err(Error::InvalidArgument("n-gram order must be at least 1".into()));
    }
    if !(config.discount > 0.0 && config.discount < 1.0) {
        return Err(Error::InvalidArgument(format!(
            "discount must lie in (0, 1), got {}",
            config.discount
        )));
    }
    if corpus.iter().all(|s| s.is_empty()) {
        return Err(Error::InvalidArgument("training corpus is empty".into()));
    }

    let norm = |w: &str| if config.normalize { normalize_word(w) } else { w.to_string() };
    let mut words: Vec<String> = corpus
        .iter()
        .flat_map(|s| s.iter().map(|w| norm(w.as_ref())))
        .filter(|w| w != UNK && w != BOS && w != EOS)
        .collect();
    words.sort();
    words.dedup();

    let mut vocab = vec![UNK.to_string(), EOS.to_string(), BOS.to_string()];
    vocab.extend(words);
    let ids: HashMap<String, u32> = vocab.iter().enumerate().map(|(i, w)| (w.clone(), i as u32)).collect();

    let n = config.order;
    let mut levels: Vec<HashMap<Vec<u32>, ContextCounts>> = vec![HashMap::new(); n];
    for sentence in corpus.iter().filter(|s| !s.is_empty()) {
        let mut padded = vec![BOS_ID; n - 1];
        padded.extend(sentence.iter().map(|w| ids.get(&norm(w.as_ref())).copied().unwrap_or(UNK_ID)));
        padded.push(EOS_ID);
        for pos in (n - 1)..padded.len() {
            let w = padded[pos];
            for (k, level) in levels.iter_mut().enumerate() {
                let ctx = padded[pos - k..pos].to_vec();
                let entry = level.entry(ctx).or_default();
                entry.total += 1;
                *entry.followers.entry(w).or_default() += 1;
            }
        }
    }
    Ok(NGramModel {
        config,
        vocab,
        ids,
        levels,
    })
}

impl NGramModel {
    pub fn config(&self) -> NGramConfig {
        self.config
    }

    pub fn order(&self) -> usize {
        self.config.order
    }

    /// Number of predictable symbols (all words, `</s>` and `<unk>`).
    pub fn vocab_size(&self) -> usize {
        self.vocab.len() - 1
    }

    /// Predictable symbols in id order.
    pub fn vocabulary(&self) -> impl Iterator<Item = &str> {
        self.vocab
            .iter()
            .enumerate()
            .filter(|(i, _)| *i as u32 != BOS_ID)
            .map(|(_, w)| w.as_str())
    }

    /// Training words (excluding the special symbols).
    pub fn words(&self) -> impl Iterator<Item = &str> {
        self.vocab[3..].iter().map(String::as_str)
    }

    fn id(&self, word: &str) -> u32 {
        if word == BOS || word == EOS || word == UNK {
            return self.ids[word];
        }
        let key = if self.config.normalize {
            normalize_word(word)
        } else {
            word.to_string()
        };
        self.ids.get(&key).copied().unwrap_or(UNK_ID)
    }

    pub fn contains(&self, word: &str) -> bool {
        self.id(word) != UNK_ID
    }

    /// Pads a word context to the model's history length.
    fn history(&self, context: &[&str]) -> Vec<u32> {
        let h = self.config.order - 1;
        let mut ids: Vec<u32> = context.iter().map(|w| self.id(w)).collect();
        if ids.len() >= h {
            ids.drain(..ids.len() - h);
            ids
        } else {
            let mut padded = vec![BOS_ID; h - ids.len()];
            padded.extend(ids);
            padded
        }
    }

    fn prob_ids(&self, history: &[u32], w: u32) -> f64 {
        let d = self.config.discount;
        let mut p = 1.0 / self.vocab_size() as f64;
        for (k, level) in self.levels.iter().enumerate() {
            let ctx = &history[history.len() - k..];
            if let Some(cc) = level.get(ctx) {
                let total = cc.total as f64;
                let c = cc.followers.get(&w).copied().unwrap_or(0) as f64;
                let types = cc.followers.len() as f64;
                p = (c - d).max(0.0) / total + d * types / total * p;
            }
        }
        p
    }

    /// `p(word | context)`. Contexts shorter than `order - 1` are padded with
    /// start symbols; longer ones are truncated to the most recent words.
    pub fn prob(&self, context: &[&str], word: &str) -> f64 {
        self.prob_ids(&self.history(context), self.id(word))
    }

    pub fn surprisal(&self, context: &[&str], word: &str) -> f64 {
        -self.prob(context, word).log2()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(&SavedModel::from(self)).expect("model serializes")
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let saved: SavedModel = serde_json::from_str(s)?;
        saved.try_into()
    }
}

/// Per-word surprisal (bits) of a sentence, each word conditioned on the
/// boundary-padded preceding words.
pub fn ngram_surprisal<S: AsRef<str>>(model: &NGramModel, sentence: &[S]) -> Vec<f64> {
    let ids: Vec<u32> = sentence.iter().map(|w| model.id(w.as_ref())).collect();
    let h = model.config.order - 1;
    let mut padded = vec![BOS_ID; h];
    padded.extend(&ids);
    (0..ids.len())
        .map(|i| -model.prob_ids(&padded[i..i + h], ids[i]).log2())
        .collect()
}

#[derive(Serialize, Deserialize)]
struct SavedModel {
    config: NGramConfig,
    vocab: Vec<String>,
    /// Per level: sorted (context ids, follower id, count).
    counts: Vec<Vec<(Vec<u32>, u32, u64)>>,
}

impl From<&NGramModel> for SavedModel {
    fn from(m: &NGramModel) -> Self {
        let counts = m
            .levels
            .iter()
            .map(|level| {
                let mut rows: Vec<(Vec<u32>, u32, u64)> = level
                    .iter()
                    .flat_map(|(ctx, cc)| cc.followers.iter().map(move |(w, c)| (ctx.clone(), *w, *c)))
                    .collect();
                rows.sort();
                rows
            })
            .collect();
        SavedModel {
            config: m.config,
            vocab: m.vocab.clone(),
            counts,
        }
    }
}

impl TryFrom<SavedModel> for NGramModel {
    type Error = Error;

    fn try_from(s: SavedModel) -> Result<Self> {
        if s.counts.len() != s.config.order || s.vocab.len() < 3 || s.vocab[0] != UNK || s.vocab[1] != EOS || s.vocab[2] != BOS {
            return Err(Error::Format("inconsistent saved n-gram model".into()));
        }
        let levels = s
            .counts
            .into_iter()
            .map(|rows| {
                let mut level: HashMap<Vec<u32>, ContextCounts> = HashMap::new();
                for (ctx, w, c) in rows {
                    let e = level.entry(ctx).or_default();
                    e.total += c;
                    e.followers.insert(w, c);
                }
                level
            })
            .collect();
        let ids = s.vocab.iter().enumerate().map(|(i, w)| (w.clone(), i as u32)).collect();
        Ok(NGramModel {
            config: s.config,
            vocab: s.vocab,
            ids,
            levels,
        })
    }
}

/// Count of each word in a corpus, after the model's normalization.
pub(crate) fn word_counts<S: AsRef<str>>(corpus: &[Vec<S>], normalize: bool) -> BTreeMap<String, u64> {
    let mut counts = BTreeMap::new();
    for w in corpus.iter().flatten() {
        let w = if normalize { normalize_word(w.as_ref()) } else { w.as_ref().to_string() };
        *counts.entry(w).or_insert(0) += 1;
    }
    counts
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sents(lines: &[&str]) -> Vec<Vec<String>> {
        lines
            .iter()
            .map(|l| l.split_whitespace().map(str::to_string).collect())
            .collect()
    }

    #[test]
    fn rejects_bad_inputs() {
        let empty: Vec<Vec<String>> = vec![];
        assert!(train_ngram(&empty, NGramConfig::default()).is_err());
        assert!(train_ngram(&[Vec::<String>::new()], NGramConfig::default()).is_err());
        let c = sents(&["a b"]);
        for d in [0.0, 1.0, -0.5, 1.5] {
            assert!(train_ngram(&c, NGramConfig { discount: d, ..Default::default() }).is_err());
        }
        assert!(train_ngram(&c, NGramConfig { order: 0, ..Default::default() }).is_err());
    }

    #[test]
    fn four_equiprobable_types_share_the_known_mass() {
        // "a b c" repeated: a, b, c and </s> each occur k times.
        let k = 5;
        let corpus = sents(&vec!["a b c"; k]);
        let cfg = NGramConfig { order: 1, discount: 0.5, normalize: false };
        let m = train_ngram(&corpus, cfg).unwrap();
        let unk = m.prob(&[], "zzz");
        // Hand evaluation: N = 4k, five predictable symbols.
        let n = (4 * k) as f64;
        let d = 0.5;
        let expected = (k as f64 - d) / n + d * 4.0 / n / 5.0;
        for w in ["a", "b", "c", EOS] {
            let p = m.prob(&[], w);
            assert!((p - expected).abs() < 1e-15);
            assert!((p - (1.0 - unk) / 4.0).abs() < 1e-15);
        }
        assert!((unk - d * 4.0 / n / 5.0).abs() < 1e-15);
    }

    #[test]
    fn unigram_surprisal_approaches_two_bits_as_counts_grow() {
        let corpus = sents(&vec!["a b c"; 100_000]);
        let m = train_ngram(&corpus, NGramConfig { order: 1, discount: 0.5, normalize: false }).unwrap();
        for s in ngram_surprisal(&m, &["a", "b", "c"]) {
            assert!((s - 2.0).abs() < 1e-5, "{s}");
        }
    }

    #[test]
    fn chain_rule_identity() {
        let corpus = sents(&["the dog ran", "the cat ran home", "a dog sat"]);
        let m = train_ngram(&corpus, NGramConfig::default()).unwrap();
        let sentence = ["the", "dog", "sat", "home", "quietly"];
        let bits = ngram_surprisal(&m, &sentence);
        let mut joint = 1.0;
        for i in 0..sentence.len() {
            joint *= m.prob(&sentence[..i], sentence[i]);
        }
        let total: f64 = bits.iter().sum();
        assert!((total + joint.log2()).abs() < 1e-9);
        assert!(bits.iter().all(|b| b.is_finite() && *b > 0.0));
    }

    #[test]
    fn conditionals_sum_to_one() {
        let corpus = sents(&["a b a b a", "b b a", "c a b"]);
        let m = train_ngram(&corpus, NGramConfig { order: 3, discount: 0.75, normalize: false }).unwrap();
        let vocab: Vec<&str> = m.vocabulary().collect();
        for ctx in [&[][..], &["a"], &["a", "b"], &["b", "b"], &["zzz", "a"], &["c", "c"]] {
            let total: f64 = vocab.iter().map(|w| m.prob(ctx, w)).sum();
            assert!((total - 1.0).abs() < 1e-12, "{ctx:?}: {total}");
        }
    }

    #[test]
    fn normalization_maps_case_and_punctuation() {
        let m = train_ngram(&sents(&["The dog ran."]), NGramConfig::default()).unwrap();
        assert!(m.contains("the"));
        assert!(m.contains("ran"));
        assert!(m.contains("RAN,"));
        assert!(!m.contains("cat"));
        assert_eq!(normalize_word("..."), "...");
    }

    #[test]
    fn save_and_load_preserve_scores() {
        let corpus = sents(&["a b a b a", "b c"]);
        let m = train_ngram(&corpus, NGramConfig::default()).unwrap();
        let back = NGramModel::from_json(&m.to_json()).unwrap();
        let s = ["a", "b", "c", "d"];
        assert_eq!(ngram_surprisal(&m, &s), ngram_surprisal(&back, &s));
        assert_eq!(m.to_json(), back.to_json());
    }
}

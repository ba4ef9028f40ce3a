use std::collections::{BTreeSet, HashSet};

use rand::Rng;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::charmodel::{letters, CharModel, END};
use crate::error::{Error, Result};
use crate::rng;
use crate::surprisal::{normalize_word, FrequencyTable, NGramModel};

/// Real words available as G-Maze distractors, with frequency quartiles, and
/// the membership set nonce words must avoid.
#[derive(Debug, Clone)]
pub struct Lexicon {
    entries: Vec<LexEntry>,
    members: HashSet<String>,
    cuts: [f64; 3],
}

#[derive(Debug, Clone)]
struct LexEntry {
    word: String,
    len: usize,
    quartile: usize,
}

impl Lexicon {
    pub fn from_frequency(freq: &FrequencyTable) -> Self {
        let cuts = freq.quartile_cuts();
        let entries: Vec<LexEntry> = freq
            .iter()
            .filter(|(w, _)| !w.is_empty() && w.chars().all(|c| c.is_alphabetic()))
            .map(|(w, lf)| LexEntry {
                word: w.to_string(),
                len: w.chars().count(),
                quartile: FrequencyTable::quartile(&cuts, lf),
            })
            .collect();
        let members = freq.iter().map(|(w, _)| letters(w)).filter(|w| !w.is_empty()).collect();
        Lexicon { entries, members, cuts }
    }

    /// Adds words that nonce generation must avoid without making them
    /// distractor candidates.
    pub fn extend_members<S: AsRef<str>>(&mut self, words: impl IntoIterator<Item = S>) {
        self.members
            .extend(words.into_iter().map(|w| letters(w.as_ref())).filter(|w| !w.is_empty()));
    }

    pub fn contains(&self, word: &str) -> bool {
        self.members.contains(&letters(word))
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    /// sha256 over the sorted membership list, one word per line.
    pub fn hash(&self) -> String {
        let sorted: BTreeSet<&str> = self.members.iter().map(String::as_str).collect();
        let mut h = Sha256::new();
        for w in sorted {
            h.update(w.as_bytes());
            h.update(b"\n");
        }
        hex::encode(h.finalize())
    }
}

/// Scores a candidate continuation of a prefix, in bits.
pub trait ContextScorer: Sync {
    fn surprisal(&self, prefix: &[&str], word: &str) -> f64;
}

impl ContextScorer for NGramModel {
    fn surprisal(&self, prefix: &[&str], word: &str) -> f64 {
        NGramModel::surprisal(self, prefix, word)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NonceConfig {
    /// Upper bound on the surprisal of each sampled character and of the end
    /// of the word, in bits.
    pub ceiling_bits: f64,
    pub max_tries: usize,
}

impl Default for NonceConfig {
    fn default() -> Self {
        NonceConfig {
            ceiling_bits: 7.0,
            max_tries: 1000,
        }
    }
}

/// Samples a pronounceable nonword with the letter count of `target`.
///
/// Letters are drawn from the character model restricted to characters under
/// the ceiling. The result keeps the target's capitalization pattern and any
/// non-letter characters in place, and is neither a lexicon member, the
/// target itself, nor in `avoid` (lowercased letters).
pub fn gen_nonce(
    target: &str,
    model: &CharModel,
    lexicon: &Lexicon,
    avoid: &HashSet<String>,
    seed: u64,
    config: NonceConfig,
) -> Result<String> {
    let target_letters = letters(target);
    let n = target_letters.len();
    if n < 2 {
        return Err(Error::InvalidArgument(format!(
            "nonce target {target:?} needs at least two letters"
        )));
    }
    let floor = (-config.ceiling_bits).exp2();
    'attempt: for attempt in 0..config.max_tries {
        let mut g = rng::stream(seed, attempt as u64);
        let mut history = model.start();
        let mut out = String::with_capacity(n);
        for _ in 0..n {
            let dist = model.distribution(&history);
            let allowed: Vec<(char, f64)> = CharModel::symbols()
                .zip(dist)
                .filter(|&(c, p)| c != END && p >= floor)
                .collect();
            let total: f64 = allowed.iter().map(|(_, p)| p).sum();
            if allowed.is_empty() {
                continue 'attempt;
            }
            let mut u = g.random_range(0.0..total);
            let mut pick = allowed[allowed.len() - 1].0;
            for &(c, p) in &allowed {
                if u < p {
                    pick = c;
                    break;
                }
                u -= p;
            }
            out.push(pick);
            history.push(pick);
        }
        if model.prob(&history, END) < floor
            || out == target_letters
            || lexicon.members.contains(&out)
            || avoid.contains(&out)
        {
            continue;
        }
        return Ok(apply_shape(target, &out));
    }
    Err(Error::Generation {
        position: 0,
        detail: format!(
            "no nonce for {target:?} within {} tries at ceiling {} bits",
            config.max_tries, config.ceiling_bits
        ),
    })
}

/// Puts the letters of `fill` into the letter slots of `target`, copying case.
fn apply_shape(target: &str, fill: &str) -> String {
    let mut fill = fill.chars();
    target
        .chars()
        .map(|c| {
            if c.is_ascii_alphabetic() {
                let f = fill.next().expect("letter counts match");
                if c.is_ascii_uppercase() {
                    f.to_ascii_uppercase()
                } else {
                    f
                }
            } else {
                c
            }
        })
        .collect()
}

/// Which constraints were dropped to find a G-Maze candidate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Relaxation {
    None,
    Length,
    LengthAndFrequency,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GDistractor {
    pub word: String,
    pub surprisal: f64,
    pub relaxation: Relaxation,
}

/// Picks the lexicon word with maximal surprisal after `prefix` among words
/// within one character of the target's length and in its frequency quartile.
/// Constraints are relaxed (length first, then frequency) when no candidate
/// remains. Exact ties are broken by a seeded draw.
pub fn gen_gmaze_distractor(
    scorer: &dyn ContextScorer,
    prefix: &[&str],
    target: &str,
    lexicon: &Lexicon,
    freq: &FrequencyTable,
    exclude: &HashSet<String>,
    seed: u64,
) -> Result<GDistractor> {
    let norm_target = normalize_word(target);
    let t_len = norm_target.chars().count();
    let t_quart = FrequencyTable::quartile(&lexicon.cuts, freq.log_freq(target));
    let open: Vec<&LexEntry> = lexicon
        .entries
        .iter()
        .filter(|e| e.word != norm_target && !exclude.contains(&e.word))
        .collect();
    let tiers: [(Relaxation, &dyn Fn(&LexEntry) -> bool); 3] = [
        (Relaxation::None, &|e| e.quartile == t_quart && e.len.abs_diff(t_len) <= 1),
        (Relaxation::Length, &|e| e.quartile == t_quart),
        (Relaxation::LengthAndFrequency, &|_| true),
    ];
    for (relaxation, keep) in tiers {
        let pool: Vec<&str> = open.iter().filter(|e| keep(e)).map(|e| e.word.as_str()).collect();
        if pool.is_empty() {
            continue;
        }
        let scored: Vec<f64> = pool.iter().map(|w| scorer.surprisal(prefix, w)).collect();
        let best = scored.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let tied: Vec<usize> = (0..pool.len()).filter(|&i| scored[i] == best).collect();
        let pick = tied[rng::stream(seed, 0).random_range(0..tied.len())];
        return Ok(GDistractor {
            word: match_case(target, pool[pick]),
            surprisal: best,
            relaxation,
        });
    }
    Err(Error::Generation {
        position: 0,
        detail: format!("no G-Maze candidate for {target:?}: lexicon exhausted"),
    })
}

/// Capitalizes `word` when `target` starts with an uppercase letter.
fn match_case(target: &str, word: &str) -> String {
    if target.chars().next().is_some_and(char::is_uppercase) {
        let mut c = word.chars();
        c.next()
            .map(|f| f.to_uppercase().chain(c).collect())
            .unwrap_or_default()
    } else {
        word.to_string()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::maze::CharModelConfig;
    use crate::surprisal::{train_ngram, NGramConfig};
    use std::collections::BTreeMap;

    fn freq(words: &[(&str, u64)]) -> FrequencyTable {
        let counts: BTreeMap<String, u64> = words.iter().map(|(w, c)| (w.to_string(), *c)).collect();
        FrequencyTable::from_counts(&counts).unwrap()
    }

    #[test]
    fn nonce_shape_and_membership() {
        let words = ["lawyer", "layer", "player", "slayer", "flower", "power", "tower", "lower", "mower"];
        let cm = CharModel::train(words, CharModelConfig::default()).unwrap();
        let lex = Lexicon::from_frequency(&freq(&words.map(|w| (w, 1))));
        let none = HashSet::new();
        let cfg = NonceConfig::default();
        let a = gen_nonce("Lawyer,", &cm, &lex, &none, 11, cfg).unwrap();
        assert_eq!(a.chars().count(), 7);
        assert!(a.starts_with(|c: char| c.is_ascii_uppercase()) && a.ends_with(','));
        assert!(!lex.contains(&a));
        assert_eq!(a, gen_nonce("Lawyer,", &cm, &lex, &none, 11, cfg).unwrap());
        assert!(gen_nonce("a", &cm, &lex, &none, 1, cfg).is_err());
        let impossible = NonceConfig {
            ceiling_bits: 0.01,
            max_tries: 5,
        };
        assert!(matches!(gen_nonce("tower", &cm, &lex, &none, 1, impossible), Err(Error::Generation { .. })));
    }

    #[test]
    fn gmaze_takes_argmax_surprisal() {
        let corpus: Vec<Vec<&str>> = vec![
            vec!["the", "dog", "ran"],
            vec!["the", "dog", "ran"],
            vec!["the", "dog", "ran"],
            vec!["a", "cat", "sat"],
            vec!["a", "mop", "fell"],
        ];
        let lm = train_ngram(&corpus, NGramConfig { order: 2, ..NGramConfig::default() }).unwrap();
        let f = freq(&[("cat", 5), ("ran", 5), ("mop", 5), ("sat", 5)]);
        let lex = Lexicon::from_frequency(&f);
        let prefix = ["the", "dog"];
        let expect = ["cat", "mop", "sat"]
            .into_iter()
            .max_by(|a, b| lm.surprisal(&prefix, a).total_cmp(&lm.surprisal(&prefix, b)))
            .unwrap();
        let d = gen_gmaze_distractor(&lm, &prefix, "ran", &lex, &f, &HashSet::new(), 4).unwrap();
        assert_ne!(d.word, "ran");
        assert!((lm.surprisal(&prefix, &d.word) - lm.surprisal(&prefix, expect)).abs() < 1e-12);
        assert_eq!(d.relaxation, Relaxation::None);
        assert_eq!(d, gen_gmaze_distractor(&lm, &prefix, "ran", &lex, &f, &HashSet::new(), 4).unwrap());

        // Only the target is left: nothing to offer.
        let lone = Lexicon::from_frequency(&freq(&[("ran", 1)]));
        assert!(gen_gmaze_distractor(&lm, &prefix, "ran", &lone, &f, &HashSet::new(), 4).is_err());
    }

    #[test]
    fn gmaze_relaxes_length_then_frequency() {
        let corpus = vec![vec!["x", "y"]];
        let lm = train_ngram(&corpus, NGramConfig::default()).unwrap();
        let f = freq(&[("at", 100), ("elephantine", 100), ("ox", 1), ("be", 1), ("hippopotamus", 1), ("kangaroos", 1)]);
        let lex = Lexicon::from_frequency(&f);
        let d = gen_gmaze_distractor(&lm, &[], "at", &lex, &f, &HashSet::new(), 1).unwrap();
        assert_eq!((d.word.as_str(), d.relaxation), ("elephantine", Relaxation::Length));
        let ex: HashSet<String> = ["elephantine".to_string()].into();
        let d = gen_gmaze_distractor(&lm, &[], "At", &lex, &f, &ex, 1).unwrap();
        assert_eq!(d.relaxation, Relaxation::LengthAndFrequency);
        assert!(d.word.starts_with(|c: char| c.is_uppercase()));
    }
}

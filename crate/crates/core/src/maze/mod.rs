//! Interpolated Maze materials: G-Maze distractors from a language model,
//! L-Maze nonce words from a character model, and the per-position policy
//! that mixes them.

mod charmodel;
mod generate;

use std::collections::HashSet;

use rand::Rng;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

pub use charmodel::{CharModel, CharModelConfig, END, START};
pub use generate::{
    gen_gmaze_distractor, gen_nonce, ContextScorer, GDistractor, Lexicon, NonceConfig, Relaxation,
};

use crate::error::{Error, Result};
use crate::suite::{RegionedSentence, TestSuite};
use crate::surprisal::FrequencyTable;
use crate::trials::DistractorKind;
use crate::{par, rng};

/// Distractor shown next to the first word of every sentence.
pub const MASK: &str = "x-x-x";

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChoicePoint {
    pub index: usize,
    pub word: String,
    pub distractor: String,
    pub kind: DistractorKind,
    pub region: String,
    pub critical: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MazeItem {
    pub suite: String,
    pub item_id: u32,
    pub condition: String,
    pub choices: Vec<ChoicePoint>,
}

/// Everything distractor generation draws on.
#[derive(Clone, Copy)]
pub struct Generators<'a> {
    pub scorer: &'a dyn ContextScorer,
    pub lexicon: &'a Lexicon,
    pub freq: &'a FrequencyTable,
    pub chars: &'a CharModel,
    pub nonce: NonceConfig,
}

/// Renders one sentence as Maze choices.
///
/// The first word gets the mask. Critical words always get nonce (L)
/// distractors; every other word independently gets one with probability
/// `rate` and a G-Maze word otherwise. Non-critical words with fewer than two
/// letters fall back to G. Distractors within the sentence are distinct.
pub fn interpolate(sentence: &RegionedSentence, rate: f64, gens: &Generators, seed: u64) -> Result<Vec<ChoicePoint>> {
    if !(rate > 0.0 && rate < 1.0) {
        return Err(Error::InvalidArgument(format!("interleaving rate must lie in (0, 1), got {rate}")));
    }
    let words = sentence.words();
    let regions = sentence.word_regions();
    let critical = sentence.word_critical();
    let mut used: HashSet<String> = HashSet::new();
    let mut choices = Vec::with_capacity(words.len());
    for (i, &word) in words.iter().enumerate() {
        let at = |e: Error| match e {
            Error::Generation { detail, .. } => Error::Generation { position: i, detail },
            Error::InvalidArgument(detail) => Error::Generation { position: i, detail },
            other => other,
        };
        let letter_count = word.chars().filter(char::is_ascii_alphabetic).count();
        let kind = if i == 0 {
            DistractorKind::Mask
        } else if critical[i] {
            DistractorKind::L
        } else {
            let draw: f64 = rng::stream_path(seed, &[i as u64, 0]).random();
            if draw < rate && letter_count >= 2 {
                DistractorKind::L
            } else {
                DistractorKind::G
            }
        };
        let distractor = match kind {
            DistractorKind::Mask => MASK.to_string(),
            DistractorKind::L => {
                let avoid: HashSet<String> = used.iter().map(|w| w.to_ascii_lowercase()).collect();
                gen_nonce(word, gens.chars, gens.lexicon, &avoid, rng::derive_seed_path(seed, &[i as u64, 1]), gens.nonce)
                    .map_err(at)?
            }
            DistractorKind::G => {
                let exclude: HashSet<String> = used.iter().map(|w| w.to_lowercase()).collect();
                gen_gmaze_distractor(
                    gens.scorer,
                    &words[..i],
                    word,
                    gens.lexicon,
                    gens.freq,
                    &exclude,
                    rng::derive_seed_path(seed, &[i as u64, 2]),
                )
                .map_err(at)?
                .word
            }
        };
        used.insert(distractor.clone());
        choices.push(ChoicePoint {
            index: i,
            word: word.to_string(),
            distractor,
            kind,
            region: regions[i].to_string(),
            critical: critical[i],
        });
    }
    Ok(choices)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MaterialsMetadata {
    pub version: String,
    pub seed: u64,
    pub rate: f64,
    pub lexicon_hash: String,
    pub lm: serde_json::Value,
    pub chars: CharModelConfig,
    pub nonce: NonceConfig,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MaterialsBundle {
    pub metadata: MaterialsMetadata,
    pub items: Vec<MazeItem>,
}

impl MaterialsBundle {
    /// Compact JSON; the bytes the hash is computed over.
    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("bundle serializes")
    }

    pub fn from_json(s: &str) -> Result<Self> {
        Ok(serde_json::from_str(s)?)
    }

    /// sha256 hex digest of [`MaterialsBundle::to_json`].
    pub fn hash(&self) -> String {
        hash_bytes(self.to_json().as_bytes())
    }

    pub fn item(&self, suite: &str, item_id: u32, condition: &str) -> Option<&MazeItem> {
        self.items
            .iter()
            .find(|m| m.suite == suite && m.item_id == item_id && m.condition == condition)
    }
}

pub fn hash_bytes(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

/// Generates every (suite, item, condition) sentence. Each sentence draws from
/// a seed derived from `seed` and its identity, so output does not depend on
/// scheduling.
pub fn generate_materials(
    suites: &[TestSuite],
    gens: &Generators,
    rate: f64,
    seed: u64,
    lm_config: serde_json::Value,
) -> Result<MaterialsBundle> {
    let jobs: Vec<(&str, u32, &str, &RegionedSentence)> = suites
        .iter()
        .flat_map(|s| {
            s.items.iter().flat_map(move |item| {
                s.conditions
                    .iter()
                    .map(move |c| (s.tag.as_str(), item.item_id, c.as_str(), &item.sentences[c]))
            })
        })
        .collect();
    let items = par::try_map_slice(&jobs, |&(suite, item_id, condition, sentence)| {
        let item_seed = rng::derive_seed_path(seed, &[rng::key_id(suite), item_id as u64, rng::key_id(condition)]);
        let choices = interpolate(sentence, rate, gens, item_seed).map_err(|e| match e {
            Error::Generation { position, detail } => Error::Generation {
                position,
                detail: format!("{suite}/{item_id}/{condition}: {detail}"),
            },
            other => other,
        })?;
        Ok::<_, Error>(MazeItem {
            suite: suite.to_string(),
            item_id,
            condition: condition.to_string(),
            choices,
        })
    })?;
    Ok(MaterialsBundle {
        metadata: MaterialsMetadata {
            version: env!("CARGO_PKG_VERSION").to_string(),
            seed,
            rate,
            lexicon_hash: gens.lexicon.hash(),
            lm: lm_config,
            chars: gens.chars.config(),
            nonce: gens.nonce,
        },
        items,
    })
}

/// Condition of the item at `position` (0-based, in suite order) for Latin
/// square list `list`.
pub fn latin_square_condition(suite: &TestSuite, position: usize, list: usize) -> &str {
    &suite.conditions[(position + list) % suite.conditions.len()]
}

/// Number of Latin-square lists needed to cover every condition of every suite.
pub fn list_count(suites: &[TestSuite]) -> usize {
    suites.iter().map(|s| s.conditions.len()).max().unwrap_or(1)
}

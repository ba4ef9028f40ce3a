//! Word-level surprisal (bits) aligned to suite sentences and regions.

mod align;
mod frequency;
mod ngram;

use std::collections::BTreeMap;
use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::suite::{RegionedSentence, TestSuite};

pub use align::{align_tokens, ingest_token_surprisals, read_token_records, write_token_records, ProviderConfig, TokenRecord, TokenRecords};
pub use frequency::{FrequencyTable, UNKNOWN_LOG2_FREQ};
pub use ngram::{ngram_surprisal, normalize_word, train_ngram, NGramConfig, NGramModel, BOS, EOS, UNK};

/// Key of one sentence: a suite tag, item id and condition.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct SentenceKey {
    pub suite: String,
    pub item_id: u32,
    pub condition: String,
}

impl SentenceKey {
    pub fn new(suite: &str, item_id: u32, condition: &str) -> Self {
        SentenceKey {
            suite: suite.to_string(),
            item_id,
            condition: condition.to_string(),
        }
    }
}

impl std::fmt::Display for SentenceKey {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}/{}/{}", self.suite, self.item_id, self.condition)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RegionSpan {
    pub label: String,
    pub start: usize,
    pub end: usize,
}

/// Per-word surprisal for one sentence, with the word → region index.
#[derive(Debug, Clone, PartialEq)]
pub struct SentenceSurprisal {
    pub words: Vec<String>,
    pub bits: Vec<f64>,
    pub regions: Vec<RegionSpan>,
}

impl SentenceSurprisal {
    pub fn new(sentence: &RegionedSentence, bits: Vec<f64>) -> Result<Self> {
        let words: Vec<String> = sentence.words().into_iter().map(str::to_string).collect();
        if words.len() != bits.len() {
            return Err(Error::InvalidArgument(format!(
                "{} surprisal values for {} words",
                bits.len(),
                words.len()
            )));
        }
        if let Some(b) = bits.iter().find(|b| !b.is_finite() || **b < 0.0) {
            return Err(Error::InvalidArgument(format!(
                "surprisal must be finite and non-negative, got {b}"
            )));
        }
        let mut regions = Vec::with_capacity(sentence.regions.len());
        let mut start = 0;
        for r in &sentence.regions {
            let end = start + r.word_count();
            regions.push(RegionSpan {
                label: r.label.clone(),
                start,
                end,
            });
            start = end;
        }
        Ok(SentenceSurprisal { words, bits, regions })
    }

    pub fn span(&self, region: &str) -> Option<&RegionSpan> {
        self.regions.iter().find(|r| r.label == region)
    }

    pub fn region_of(&self, word_index: usize) -> Option<&str> {
        self.regions
            .iter()
            .find(|r| (r.start..r.end).contains(&word_index))
            .map(|r| r.label.as_str())
    }

    pub fn total(&self) -> f64 {
        self.bits.iter().sum()
    }
}

/// How word values combine into a region value.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Aggregation {
    /// Joint surprisal of the region (chain rule).
    #[default]
    Sum,
    Mean,
}

impl Aggregation {
    /// Aggregates `values`; an empty region yields 0 under both modes.
    pub fn apply(self, values: &[f64]) -> f64 {
        if values.is_empty() {
            return 0.0;
        }
        let sum: f64 = values.iter().sum();
        match self {
            Aggregation::Sum => sum,
            Aggregation::Mean => sum / values.len() as f64,
        }
    }
}

impl std::str::FromStr for Aggregation {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "sum" => Ok(Aggregation::Sum),
            "mean" => Ok(Aggregation::Mean),
            _ => Err(Error::InvalidArgument(format!("unknown aggregation {s:?}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct SurprisalTable {
    pub provider: String,
    entries: BTreeMap<SentenceKey, SentenceSurprisal>,
}

const WORD_HEADER: [&str; 7] = [
    "suite_tag",
    "item_id",
    "condition",
    "word_index",
    "word",
    "region",
    "surprisal_bits",
];

impl SurprisalTable {
    pub fn new(provider: &str) -> Self {
        SurprisalTable {
            provider: provider.to_string(),
            entries: BTreeMap::new(),
        }
    }

    pub fn insert(&mut self, key: SentenceKey, entry: SentenceSurprisal) {
        self.entries.insert(key, entry);
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn entries(&self) -> impl Iterator<Item = (&SentenceKey, &SentenceSurprisal)> {
        self.entries.iter()
    }

    pub fn get(&self, suite: &str, item_id: u32, condition: &str) -> Result<&SentenceSurprisal> {
        // BTreeMap lookup needs an owned key; sentences are few enough.
        self.entries
            .get(&SentenceKey::new(suite, item_id, condition))
            .ok_or_else(|| {
                Error::MissingEntry(format!(
                    "{}: no surprisal for {suite}/{item_id}/{condition}",
                    self.provider
                ))
            })
    }

    pub fn word_surprisal(&self, suite: &str, item_id: u32, condition: &str, word_index: usize) -> Result<f64> {
        let entry = self.get(suite, item_id, condition)?;
        entry.bits.get(word_index).copied().ok_or_else(|| {
            Error::MissingEntry(format!(
                "{}: word {word_index} out of range for {suite}/{item_id}/{condition}",
                self.provider
            ))
        })
    }

    /// Summed surprisal of a region; 0 for empty gap regions.
    pub fn region_surprisal(&self, suite: &str, item_id: u32, condition: &str, region: &str) -> Result<f64> {
        self.region_surprisal_with(suite, item_id, condition, region, Aggregation::Sum)
    }

    pub fn region_surprisal_with(
        &self,
        suite: &str,
        item_id: u32,
        condition: &str,
        region: &str,
        aggregation: Aggregation,
    ) -> Result<f64> {
        let entry = self.get(suite, item_id, condition)?;
        let span = entry.span(region).ok_or_else(|| {
            Error::UnknownReference(format!("{suite}/{item_id}/{condition} has no region {region:?}"))
        })?;
        Ok(aggregation.apply(&entry.bits[span.start..span.end]))
    }

    /// Checks that every sentence of `suite` has an entry whose words match.
    pub fn check_coverage(&self, suite: &TestSuite) -> Result<()> {
        for item in &suite.items {
            for (condition, sentence) in &item.sentences {
                let entry = self.get(&suite.tag, item.item_id, condition)?;
                if entry.words.iter().map(String::as_str).ne(sentence.words()) {
                    return Err(Error::MissingEntry(format!(
                        "{}: words for {}/{}/{condition} do not match the suite",
                        self.provider, suite.tag, item.item_id
                    )));
                }
            }
        }
        Ok(())
    }

    /// Word-level TSV: one row per word.
    pub fn write_tsv<W: Write>(&self, w: W) -> Result<()> {
        let mut out = csv::WriterBuilder::new().delimiter(b'\t').from_writer(w);
        out.write_record(WORD_HEADER)?;
        for (key, entry) in &self.entries {
            for (i, (word, bits)) in entry.words.iter().zip(&entry.bits).enumerate() {
                out.write_record([
                    key.suite.as_str(),
                    &key.item_id.to_string(),
                    &key.condition,
                    &i.to_string(),
                    word,
                    entry.region_of(i).unwrap_or(""),
                    &format_bits(*bits),
                ])?;
            }
        }
        out.flush().map_err(|e| Error::io("<surprisal table>", e))?;
        Ok(())
    }

    /// Reads a word-level TSV, re-deriving region spans from the suites. Rows of
    /// suites not in `suites` are skipped.
    pub fn read_tsv<R: Read>(provider: &str, r: R, suites: &[TestSuite]) -> Result<Self> {
        let mut reader = csv::ReaderBuilder::new()
            .delimiter(b'\t')
            .quoting(false)
            .from_reader(r);
        let headers = reader.headers()?.clone();
        if headers.iter().ne(WORD_HEADER) {
            return Err(Error::Format(format!("unexpected word-level header {headers:?}")));
        }
        let mut bits: BTreeMap<SentenceKey, Vec<(usize, String, f64)>> = BTreeMap::new();
        for row in reader.records() {
            let row = row?;
            if !suites.iter().any(|s| s.tag == row[0]) {
                continue;
            }
            let key = SentenceKey::new(&row[0], parse_field(&row[1], "item_id")?, &row[2]);
            let idx: usize = parse_field(&row[3], "word_index")?;
            let value: f64 = parse_field(&row[6], "surprisal_bits")?;
            bits.entry(key).or_default().push((idx, row[4].to_string(), value));
        }
        let mut table = SurprisalTable::new(provider);
        for (key, mut rows) in bits {
            rows.sort_by_key(|r| r.0);
            let sentence = find_sentence(suites, &key)?;
            if rows.iter().enumerate().any(|(i, r)| r.0 != i) {
                return Err(Error::Format(format!("{key}: word indices are not contiguous")));
            }
            if rows.iter().map(|r| r.1.as_str()).ne(sentence.words()) {
                return Err(Error::Format(format!("{key}: words do not match the suite sentence")));
            }
            let entry = SentenceSurprisal::new(sentence, rows.into_iter().map(|r| r.2).collect())?;
            table.insert(key, entry);
        }
        Ok(table)
    }
}

pub(crate) fn find_sentence<'a>(suites: &'a [TestSuite], key: &SentenceKey) -> Result<&'a RegionedSentence> {
    let suite = suites
        .iter()
        .find(|s| s.tag == key.suite)
        .ok_or_else(|| Error::UnknownReference(format!("unknown suite {:?}", key.suite)))?;
    suite.item(key.item_id)?.sentence(&key.condition)
}

pub(crate) fn parse_field<T: std::str::FromStr>(s: &str, name: &str) -> Result<T> {
    s.trim()
        .parse()
        .map_err(|_| Error::Format(format!("bad {name} value {s:?}")))
}

/// Shortest representation that round-trips exactly.
pub(crate) fn format_bits(x: f64) -> String {
    format!("{x:?}")
}

/// Scores every sentence of `suites` with a reference n-gram model.
pub fn score_suites_ngram(model: &NGramModel, suites: &[TestSuite], provider: &str) -> SurprisalTable {
    let mut table = SurprisalTable::new(provider);
    for suite in suites {
        let sentences: Vec<(SentenceKey, &RegionedSentence)> = suite
            .items
            .iter()
            .flat_map(|item| {
                item.sentences
                    .iter()
                    .map(move |(c, s)| (SentenceKey::new(&suite.tag, item.item_id, c), s))
            })
            .collect();
        let scored = crate::par::map_slice(&sentences, |(_, s)| ngram_surprisal(model, &s.words()));
        for ((key, sentence), bits) in sentences.into_iter().zip(scored) {
            let entry = SentenceSurprisal::new(sentence, bits).expect("n-gram surprisal is finite and aligned");
            table.insert(key, entry);
        }
    }
    table
}

use std::collections::BTreeMap;
use std::io::{Read, Write};

use super::ngram::{normalize_word, word_counts};
use super::parse_field;
use crate::error::{Error, Result};

/// log₂(0.1 per million): the value assigned to unseen words.
pub const UNKNOWN_LOG2_FREQ: f64 = -3.321928094887362;

/// Word → log₂ frequency per million tokens of a reference corpus.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct FrequencyTable {
    values: BTreeMap<String, f64>,
}

impl FrequencyTable {
    pub fn from_counts(counts: &BTreeMap<String, u64>) -> Result<Self> {
        let total: u64 = counts.values().sum();
        if total == 0 {
            return Err(Error::InvalidArgument("frequency corpus is empty".into()));
        }
        let values = counts
            .iter()
            .filter(|(_, &c)| c > 0)
            .map(|(w, &c)| (w.clone(), (c as f64 / total as f64 * 1e6).log2()))
            .collect();
        Ok(FrequencyTable { values })
    }

    pub fn from_corpus<S: AsRef<str>>(corpus: &[Vec<S>]) -> Result<Self> {
        Self::from_counts(&word_counts(corpus, true))
    }

    pub fn from_values(values: BTreeMap<String, f64>) -> Result<Self> {
        if let Some((w, v)) = values.iter().find(|(_, v)| !v.is_finite()) {
            return Err(Error::InvalidArgument(format!("non-finite frequency {v} for {w:?}")));
        }
        Ok(FrequencyTable { values })
    }

    /// log₂ frequency per million, floored for unknown words.
    pub fn log_freq(&self, word: &str) -> f64 {
        self.values
            .get(&normalize_word(word))
            .copied()
            .unwrap_or(UNKNOWN_LOG2_FREQ)
    }

    pub fn contains(&self, word: &str) -> bool {
        self.values.contains_key(&normalize_word(word))
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, f64)> {
        self.values.iter().map(|(w, v)| (w.as_str(), *v))
    }

    /// Quartile cut points (25th, 50th, 75th percentiles) of the table's values.
    pub fn quartile_cuts(&self) -> [f64; 3] {
        let mut v: Vec<f64> = self.values.values().copied().collect();
        if v.is_empty() {
            return [UNKNOWN_LOG2_FREQ; 3];
        }
        v.sort_by(f64::total_cmp);
        let at = |q: f64| v[((v.len() - 1) as f64 * q).round() as usize];
        [at(0.25), at(0.5), at(0.75)]
    }

    /// Frequency quartile (0..=3) of a log frequency under `cuts`.
    pub fn quartile(cuts: &[f64; 3], log_freq: f64) -> usize {
        cuts.iter().filter(|&&c| log_freq > c).count()
    }

    pub fn write_tsv<W: Write>(&self, mut w: W) -> Result<()> {
        let io = |e| Error::io("<frequency table>", e);
        writeln!(w, "word\tlog2_freq_per_million").map_err(io)?;
        for (word, v) in &self.values {
            writeln!(w, "{word}\t{v:?}").map_err(io)?;
        }
        Ok(())
    }

    pub fn read_tsv<R: Read>(mut r: R) -> Result<Self> {
        let mut text = String::new();
        r.read_to_string(&mut text).map_err(|e| Error::io("<frequency table>", e))?;
        let mut lines = text.lines();
        match lines.next() {
            Some(h) if h.trim_end() == "word\tlog2_freq_per_million" => {}
            other => return Err(Error::Format(format!("unexpected frequency header {other:?}"))),
        }
        let mut values = BTreeMap::new();
        for line in lines.filter(|l| !l.trim().is_empty()) {
            let (word, v) = line
                .split_once('\t')
                .ok_or_else(|| Error::Format(format!("bad frequency row {line:?}")))?;
            values.insert(word.to_string(), parse_field(v, "log2_freq_per_million")?);
        }
        Self::from_values(values)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn per_million_and_floor() {
        let corpus = vec![vec!["The", "dog"], vec!["the", "cat."]];
        let t = FrequencyTable::from_corpus(&corpus).unwrap();
        assert!((t.log_freq("the") - (0.5e6f64).log2()).abs() < 1e-12);
        assert!((t.log_freq("CAT") - (0.25e6f64).log2()).abs() < 1e-12);
        assert_eq!(t.log_freq("giraffe"), UNKNOWN_LOG2_FREQ);
        assert!((UNKNOWN_LOG2_FREQ - 0.1f64.log2()).abs() < 1e-15);
    }

    #[test]
    fn tsv_round_trip_and_quartiles() {
        let counts: BTreeMap<String, u64> = (1..=8).map(|i| (format!("w{i}"), i)).collect();
        let t = FrequencyTable::from_counts(&counts).unwrap();
        let mut buf = Vec::new();
        t.write_tsv(&mut buf).unwrap();
        assert_eq!(FrequencyTable::read_tsv(buf.as_slice()).unwrap(), t);
        let cuts = t.quartile_cuts();
        assert!(cuts[0] <= cuts[1] && cuts[1] <= cuts[2]);
        assert_eq!(FrequencyTable::quartile(&cuts, t.log_freq("w1")), 0);
        assert_eq!(FrequencyTable::quartile(&cuts, t.log_freq("w8")), 3);
    }
}

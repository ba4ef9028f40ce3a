//! Maze reaction-time trials and the comma-separated RT log format.

use std::collections::BTreeMap;
use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::surprisal::FrequencyTable;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum DistractorKind {
    #[serde(rename = "G")]
    G,
    #[serde(rename = "L")]
    L,
    /// Opening choice with a placeholder mask; never analyzed.
    #[serde(rename = "mask", alias = "M")]
    Mask,
}

impl DistractorKind {
    pub fn as_str(self) -> &'static str {
        match self {
            DistractorKind::G => "G",
            DistractorKind::L => "L",
            DistractorKind::Mask => "mask",
        }
    }
}

/// One row of the RT log, exactly as stored.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RtRow {
    pub participant: String,
    pub suite_tag: String,
    pub item_id: u32,
    pub condition: String,
    pub word_index: usize,
    pub word: String,
    pub region: String,
    #[serde(with = "flag")]
    pub critical: bool,
    pub distractor: String,
    pub distractor_kind: DistractorKind,
    #[serde(with = "flag")]
    pub correct: bool,
    pub rt_ms: f64,
}

/// A keypress decision with its derived predictors.
#[derive(Debug, Clone, PartialEq)]
pub struct RTTrial {
    pub row: RtRow,
    /// Character count of the word.
    pub word_length: usize,
    pub log_freq: f64,
}

impl RTTrial {
    pub fn new(row: RtRow, freq: &FrequencyTable) -> Self {
        let word_length = row.word.chars().count();
        let log_freq = freq.log_freq(&row.word);
        RTTrial {
            row,
            word_length,
            log_freq,
        }
    }

    pub fn rt(&self) -> f64 {
        self.row.rt_ms
    }

    pub fn kind(&self) -> DistractorKind {
        self.row.distractor_kind
    }

    /// Correct, non-mask decision.
    pub fn is_usable(&self) -> bool {
        self.row.correct && self.row.distractor_kind != DistractorKind::Mask
    }

    pub fn key(&self) -> TrialKey {
        TrialKey {
            participant: self.row.participant.clone(),
            suite: self.row.suite_tag.clone(),
            item_id: self.row.item_id,
            condition: self.row.condition.clone(),
            word_index: self.row.word_index,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct TrialKey {
    pub participant: String,
    pub suite: String,
    pub item_id: u32,
    pub condition: String,
    pub word_index: usize,
}

/// Row-level checks shared by the log reader and the upload endpoint.
pub fn check_rows(rows: &[RtRow]) -> Result<()> {
    let mut last: BTreeMap<(&str, &str, u32, &str), usize> = BTreeMap::new();
    for (i, row) in rows.iter().enumerate() {
        if !(row.rt_ms.is_finite() && row.rt_ms > 0.0) {
            return Err(Error::Schema(format!("row {i}: rt_ms must be positive, got {}", row.rt_ms)));
        }
        if row.participant.is_empty() || row.suite_tag.is_empty() || row.condition.is_empty() {
            return Err(Error::Schema(format!("row {i}: empty identifier field")));
        }
        let k = (row.participant.as_str(), row.suite_tag.as_str(), row.item_id, row.condition.as_str());
        if let Some(&prev) = last.get(&k) {
            if row.word_index <= prev {
                return Err(Error::Schema(format!(
                    "row {i}: word_index {} not increasing after {prev} for {}/{}/{}/{}",
                    row.word_index, k.0, k.1, k.2, k.3
                )));
            }
        }
        last.insert(k, row.word_index);
    }
    Ok(())
}

pub const RT_HEADER: &str = "participant,suite_tag,item_id,condition,word_index,word,region,critical,distractor,distractor_kind,correct,rt_ms";

pub fn read_rt_rows<R: Read>(r: R) -> Result<Vec<RtRow>> {
    let mut reader = csv::Reader::from_reader(r);
    let headers = reader.headers()?.clone();
    if headers.iter().collect::<Vec<_>>().join(",") != RT_HEADER {
        return Err(Error::Format(format!("unexpected RT log header {headers:?}")));
    }
    let rows: Vec<RtRow> = reader.deserialize().collect::<std::result::Result<_, _>>()?;
    check_rows(&rows)?;
    Ok(rows)
}

pub fn read_rt_log<R: Read>(r: R, freq: &FrequencyTable) -> Result<Vec<RTTrial>> {
    Ok(read_rt_rows(r)?.into_iter().map(|row| RTTrial::new(row, freq)).collect())
}

/// Writes rows, with the header when `header` is set.
pub fn write_rt_rows<W: Write>(rows: &[RtRow], w: W, header: bool) -> Result<()> {
    let mut out = csv::WriterBuilder::new().has_headers(header).from_writer(w);
    for row in rows {
        out.serialize(row)?;
    }
    if rows.is_empty() && header {
        out.write_record(RT_HEADER.split(','))?;
    }
    out.flush().map_err(|e| Error::io("<rt log>", e))?;
    Ok(())
}

mod flag {
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &bool, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(if *v { "true" } else { "false" })
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<bool, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            B(bool),
            S(String),
            N(i64),
        }
        match Raw::deserialize(d)? {
            Raw::B(b) => Ok(b),
            Raw::N(1) => Ok(true),
            Raw::N(0) => Ok(false),
            Raw::S(s) => match s.trim().to_ascii_lowercase().as_str() {
                "true" | "1" | "yes" => Ok(true),
                "false" | "0" | "no" => Ok(false),
                other => Err(serde::de::Error::custom(format!("bad boolean {other:?}"))),
            },
            Raw::N(n) => Err(serde::de::Error::custom(format!("bad boolean {n}"))),
        }
    }
}

#[cfg(test)]
pub(crate) fn row(participant: &str, suite: &str, item: u32, cond: &str, idx: usize, word: &str, region: &str, critical: bool, kind: DistractorKind, rt: f64) -> RtRow {
    RtRow {
        participant: participant.into(),
        suite_tag: suite.into(),
        item_id: item,
        condition: cond.into(),
        word_index: idx,
        word: word.into(),
        region: region.into(),
        critical,
        distractor: "x-x-x".into(),
        distractor_kind: kind,
        correct: true,
        rt_ms: rt,
    }
}

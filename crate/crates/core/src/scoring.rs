//! Criterion evaluation, model accuracy and human consistency scores.

use std::collections::{BTreeMap, BTreeSet};
use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::stats::{pearson, wilson_ci, Correlation};
use crate::suite::{Criterion, Item, SignedTerm, TestSuite};
use crate::surprisal::{Aggregation, SurprisalTable};
use crate::trials::RTTrial;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MeasureKind {
    SurprisalBits,
    MeanRtMs,
}

impl MeasureKind {
    pub fn as_str(self) -> &'static str {
        match self {
            MeasureKind::SurprisalBits => "surprisal_bits",
            MeasureKind::MeanRtMs => "mean_rt_ms",
        }
    }
}

/// Resolves `(item, condition, region)` to a region measure.
pub trait MeasureSource: Sync {
    fn kind(&self) -> MeasureKind;
    fn value(&self, item_id: u32, condition: &str, region: &str) -> Result<f64>;
}

pub struct SurprisalMeasure<'a> {
    pub table: &'a SurprisalTable,
    pub suite: &'a str,
    pub aggregation: Aggregation,
}

impl MeasureSource for SurprisalMeasure<'_> {
    fn kind(&self) -> MeasureKind {
        MeasureKind::SurprisalBits
    }

    fn value(&self, item_id: u32, condition: &str, region: &str) -> Result<f64> {
        self.table
            .region_surprisal_with(self.suite, item_id, condition, region, self.aggregation)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct RtOptions {
    /// Per-participant combination of the word RTs in a region.
    pub aggregation: Aggregation,
    /// Trials slower than this are dropped. Off by default.
    pub max_rt: Option<f64>,
}

/// Cross-participant mean region RTs for one suite.
#[derive(Debug, Clone, PartialEq)]
pub struct RtMeasure {
    suite: String,
    cells: BTreeMap<(u32, String, String), f64>,
}

/// Per-participant region values keyed by `(item, condition, region)`, for
/// every region referenced by a prediction. Cells without data are absent.
pub type ParticipantCells = BTreeMap<(u32, String, String), Vec<f64>>;

/// Collects per-participant region RTs for the referenced cells of `suite`.
///
/// A participant contributes to a cell only when every word of the region was
/// answered correctly; an empty (gap) region counts as 0 ms for any
/// participant who saw the sentence. Participants appear in sorted order.
pub fn participant_cells(suite: &TestSuite, trials: &[RTTrial], options: RtOptions) -> Result<ParticipantCells> {
    type Seen = BTreeMap<usize, f64>;
    let mut sessions: BTreeMap<(u32, &str), BTreeMap<&str, Seen>> = BTreeMap::new();
    for t in trials.iter().filter(|t| t.row.suite_tag == suite.tag) {
        let by_participant = sessions
            .entry((t.row.item_id, t.row.condition.as_str()))
            .or_default()
            .entry(t.row.participant.as_str())
            .or_default();
        if t.is_usable() && options.max_rt.is_none_or(|m| t.rt() <= m) {
            by_participant.insert(t.row.word_index, t.rt());
        }
    }

    let referenced: BTreeSet<(&str, &str)> = suite
        .predictions
        .iter()
        .flat_map(Criterion::terms)
        .map(|t| (t.condition.as_str(), t.region.as_str()))
        .collect();

    let mut cells = BTreeMap::new();
    for item in &suite.items {
        for &(condition, region) in &referenced {
            let sentence = item.sentence(condition)?;
            let span = sentence.span(region).ok_or_else(|| {
                Error::UnknownReference(format!("{}/{}/{condition}: no region {region:?}", suite.tag, item.item_id))
            })?;
            let Some(participants) = sessions.get(&(item.item_id, condition)) else {
                continue;
            };
            let values: Vec<f64> = participants
                .values()
                .filter_map(|seen| {
                    let rts: Option<Vec<f64>> = span.clone().map(|i| seen.get(&i).copied()).collect();
                    rts.map(|v| options.aggregation.apply(&v))
                })
                .collect();
            if !values.is_empty() {
                cells.insert((item.item_id, condition.to_string(), region.to_string()), values);
            }
        }
    }
    Ok(cells)
}

impl RtMeasure {
    pub fn new(suite: &TestSuite, trials: &[RTTrial], options: RtOptions) -> Result<Self> {
        let cells = participant_cells(suite, trials, options)?
            .into_iter()
            .map(|(k, v)| (k, crate::stats::mean(&v)))
            .collect();
        Ok(RtMeasure {
            suite: suite.tag.clone(),
            cells,
        })
    }
}

impl MeasureSource for RtMeasure {
    fn kind(&self) -> MeasureKind {
        MeasureKind::MeanRtMs
    }

    fn value(&self, item_id: u32, condition: &str, region: &str) -> Result<f64> {
        self.cells
            .get(&(item_id, condition.to_string(), region.to_string()))
            .copied()
            .ok_or_else(|| {
                Error::EmptyCell(format!("{}/{item_id}/{condition}/{region}: no usable trials", self.suite))
            })
    }
}

fn side_sum(terms: &[SignedTerm], item: &Item, source: &dyn MeasureSource) -> Result<f64> {
    terms.iter().try_fold(0.0, |acc, t| {
        Ok(acc + t.sign.apply(source.value(item.item_id, &t.condition, &t.region)?))
    })
}

/// Signed difference `Σ rhs − Σ lhs`; positive when the criterion holds.
pub fn criterion_margin(criterion: &Criterion, item: &Item, source: &dyn MeasureSource) -> Result<f64> {
    Ok(side_sum(&criterion.rhs, item, source)? - side_sum(&criterion.lhs, item, source)?)
}

/// `Σ lhs < Σ rhs`, strictly.
pub fn eval_criterion(criterion: &Criterion, item: &Item, source: &dyn MeasureSource) -> Result<bool> {
    Ok(side_sum(&criterion.lhs, item, source)? < side_sum(&criterion.rhs, item, source)?)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PredictionScore {
    pub name: String,
    pub k: u64,
    pub n: u64,
    pub proportion: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    /// Items left out because a referenced cell had no data.
    pub dropped: Vec<u32>,
}

impl PredictionScore {
    fn new(name: &str, k: u64, n: u64, dropped: Vec<u32>) -> Result<Self> {
        if n == 0 {
            return Err(Error::EmptyCell(format!("prediction {name:?} has no scorable items")));
        }
        let (ci_low, ci_high) = wilson_ci(k, n, 0.95)?;
        Ok(PredictionScore {
            name: name.to_string(),
            k,
            n,
            proportion: k as f64 / n as f64,
            ci_low,
            ci_high,
            dropped,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SuiteScore {
    pub suite: String,
    pub measure_kind: MeasureKind,
    /// Sorted by prediction name.
    pub per_prediction: Vec<PredictionScore>,
    /// All (prediction, item) pairs pooled.
    pub overall: PredictionScore,
}

impl SuiteScore {
    pub fn rows(&self) -> Vec<ScoreRow> {
        self.per_prediction
            .iter()
            .chain(std::iter::once(&self.overall))
            .map(|p| ScoreRow {
                suite_tag: self.suite.clone(),
                prediction: p.name.clone(),
                k: p.k,
                n: p.n,
                proportion: p.proportion,
                ci_low: p.ci_low,
                ci_high: p.ci_high,
                measure_kind: self.measure_kind,
            })
            .collect()
    }
}

/// Scores every prediction of `suite` against `source`. Items whose cells are
/// empty are dropped from that prediction's `n`; other errors propagate.
pub fn score_suite(suite: &TestSuite, source: &dyn MeasureSource) -> Result<SuiteScore> {
    let mut per_prediction = Vec::with_capacity(suite.predictions.len());
    let (mut k_all, mut n_all) = (0, 0);
    for criterion in &suite.predictions {
        let (mut k, mut n, mut dropped) = (0, 0, Vec::new());
        for item in &suite.items {
            match eval_criterion(criterion, item, source) {
                Ok(holds) => {
                    n += 1;
                    k += holds as u64;
                }
                Err(Error::EmptyCell(_)) => dropped.push(item.item_id),
                Err(e) => return Err(e),
            }
        }
        k_all += k;
        n_all += n;
        per_prediction.push(PredictionScore::new(&criterion.name, k, n, dropped)?);
    }
    per_prediction.sort_by(|a, b| a.name.cmp(&b.name));
    Ok(SuiteScore {
        suite: suite.tag.clone(),
        measure_kind: source.kind(),
        per_prediction,
        overall: PredictionScore::new("overall", k_all, n_all, Vec::new())?,
    })
}

/// Fraction of items where the model finds the grammatical side more probable.
pub fn accuracy_score(suite: &TestSuite, table: &SurprisalTable, aggregation: Aggregation) -> Result<SuiteScore> {
    table.check_coverage(suite)?;
    let source = SurprisalMeasure {
        table,
        suite: &suite.tag,
        aggregation,
    };
    score_suite(suite, &source)
}

/// Fraction of items where the cross-participant mean RT is lower on the
/// grammatical side. Only correct, non-mask decisions are used.
pub fn consistency_score(suite: &TestSuite, trials: &[RTTrial], options: RtOptions) -> Result<SuiteScore> {
    let source = RtMeasure::new(suite, trials, options)?;
    score_suite(suite, &source)
}

/// Pearson correlation between paired per-suite proportions.
pub fn score_correlation(model: &[f64], human: &[f64]) -> Result<Correlation> {
    pearson(model, human)
}

/// One line of a score report.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoreRow {
    pub suite_tag: String,
    pub prediction: String,
    pub k: u64,
    pub n: u64,
    pub proportion: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    pub measure_kind: MeasureKind,
}

pub(crate) fn tsv_writer<W: Write>(w: W) -> csv::Writer<W> {
    csv::WriterBuilder::new().delimiter(b'\t').from_writer(w)
}

fn tsv_reader<R: Read>(r: R) -> csv::Reader<R> {
    csv::ReaderBuilder::new().delimiter(b'\t').from_reader(r)
}

pub fn write_score_report<W: Write>(scores: &[SuiteScore], w: W) -> Result<()> {
    let mut out = tsv_writer(w);
    for row in scores.iter().flat_map(SuiteScore::rows) {
        out.serialize(row)?;
    }
    out.flush().map_err(|e| Error::io("<score report>", e))
}

pub fn read_score_report<R: Read>(r: R) -> Result<Vec<ScoreRow>> {
    read_tsv_rows(r)
}

pub(crate) fn read_tsv_rows<R: Read, T: serde::de::DeserializeOwned>(r: R) -> Result<Vec<T>> {
    Ok(tsv_reader(r).deserialize().collect::<std::result::Result<_, _>>()?)
}

/// Bar-chart data: score rows grouped by provider (human rows use provider "human").
pub fn write_accuracy_plot_data<W: Write>(groups: &[(String, Vec<ScoreRow>)], w: W) -> Result<()> {
    let mut out = tsv_writer(w);
    out.write_record([
        "provider", "suite_tag", "prediction", "k", "n", "proportion", "ci_low", "ci_high", "measure_kind",
    ])?;
    for (provider, rows) in groups {
        for r in rows {
            out.write_record([
                provider.as_str(),
                &r.suite_tag,
                &r.prediction,
                &r.k.to_string(),
                &r.n.to_string(),
                &r.proportion.to_string(),
                &r.ci_low.to_string(),
                &r.ci_high.to_string(),
                r.measure_kind.as_str(),
            ])?;
        }
    }
    out.flush().map_err(|e| Error::io("<plot data>", e))
}

/// Correlates the pooled per-suite proportions of two reports over their
/// common suites, returned alongside the paired values.
pub fn correlate_reports(model: &[ScoreRow], human: &[ScoreRow]) -> Result<(Correlation, Vec<(String, f64, f64)>)> {
    let overall = |rows: &[ScoreRow]| -> BTreeMap<String, f64> {
        rows.iter()
            .filter(|r| r.prediction == "overall")
            .map(|r| (r.suite_tag.clone(), r.proportion))
            .collect()
    };
    let (m, h) = (overall(model), overall(human));
    let paired: Vec<(String, f64, f64)> = m
        .iter()
        .filter_map(|(tag, &a)| h.get(tag).map(|&b| (tag.clone(), a, b)))
        .collect();
    let xs: Vec<f64> = paired.iter().map(|p| p.1).collect();
    let ys: Vec<f64> = paired.iter().map(|p| p.2).collect();
    Ok((score_correlation(&xs, &ys)?, paired))
}

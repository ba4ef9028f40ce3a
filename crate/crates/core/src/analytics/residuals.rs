use std::collections::BTreeMap;
use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use super::fit::{trial_surprisal, LinearFit, RegionScope};
use crate::error::{Error, Result};
use crate::scoring::{read_tsv_rows, tsv_writer};
use crate::stats::{mean, welch_t_test, WelchTest};
use crate::suite::TestSuite;
use crate::surprisal::SurprisalTable;
use crate::trials::{RTTrial, TrialKey};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RegionType {
    Critical,
    NonCritical,
}

impl RegionType {
    pub fn as_str(self) -> &'static str {
        match self {
            RegionType::Critical => "critical",
            RegionType::NonCritical => "non_critical",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ResidualRecord {
    pub key: TrialKey,
    pub word: String,
    /// Observed minus fitted, in ms.
    pub residual: f64,
    pub region_type: RegionType,
    pub grammatical: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ResidualSummary {
    pub provider: String,
    pub n_critical: usize,
    pub n_non_critical: usize,
    pub mean_abs_critical: f64,
    pub mean_abs_non_critical: f64,
    pub mean_abs_critical_grammatical: f64,
    pub mean_abs_critical_ungrammatical: f64,
    /// Ungrammatical minus grammatical |residual| in critical regions.
    #[serde(skip)]
    pub welch: Option<WelchTest>,
}

/// Residuals of a fit trained on non-critical trials, evaluated on every trial
/// of the same distractor kind, with a breakdown by region type and by the
/// grammaticality of the condition.
pub fn residual_analysis(
    fit: &LinearFit,
    trials: &[RTTrial],
    table: &SurprisalTable,
    suites: &[TestSuite],
) -> Result<(Vec<ResidualRecord>, ResidualSummary)> {
    if fit.filter.scope != RegionScope::NonCritical {
        return Err(Error::InvalidArgument(
            "fit scope violation: residual analysis needs a fit trained on non-critical trials only".into(),
        ));
    }
    let by_tag: BTreeMap<&str, &TestSuite> = suites.iter().map(|s| (s.tag.as_str(), s)).collect();
    let filter = fit.filter.with_scope(RegionScope::All);
    let records: Vec<ResidualRecord> = trials
        .iter()
        .filter(|t| filter.accepts(t))
        .map(|t| {
            let suite = by_tag
                .get(t.row.suite_tag.as_str())
                .ok_or_else(|| Error::UnknownReference(format!("no suite {:?}", t.row.suite_tag)))?;
            let s = trial_surprisal(table, t)?;
            Ok(ResidualRecord {
                key: t.key(),
                word: t.row.word.clone(),
                residual: t.rt() - fit.predict(t, s),
                region_type: if t.row.critical {
                    RegionType::Critical
                } else {
                    RegionType::NonCritical
                },
                grammatical: suite.is_grammatical(&t.row.condition),
            })
        })
        .collect::<Result<_>>()?;

    let abs = |pred: &dyn Fn(&ResidualRecord) -> bool| -> Vec<f64> {
        records.iter().filter(|r| pred(r)).map(|r| r.residual.abs()).collect()
    };
    let crit = abs(&|r| r.region_type == RegionType::Critical);
    let non = abs(&|r| r.region_type == RegionType::NonCritical);
    let gram = abs(&|r| r.region_type == RegionType::Critical && r.grammatical);
    let ungram = abs(&|r| r.region_type == RegionType::Critical && !r.grammatical);
    let m = |v: &[f64]| if v.is_empty() { f64::NAN } else { mean(v) };
    let summary = ResidualSummary {
        provider: fit.provider.clone(),
        n_critical: crit.len(),
        n_non_critical: non.len(),
        mean_abs_critical: m(&crit),
        mean_abs_non_critical: m(&non),
        mean_abs_critical_grammatical: m(&gram),
        mean_abs_critical_ungrammatical: m(&ungram),
        welch: welch_t_test(&ungram, &gram).ok(),
    };
    Ok((records, summary))
}

pub fn write_residuals<W: Write>(records: &[ResidualRecord], w: W) -> Result<()> {
    let mut out = tsv_writer(w);
    out.write_record([
        "participant", "suite_tag", "item_id", "condition", "word_index", "word", "region_type", "grammatical",
        "residual_ms",
    ])?;
    for r in records {
        let k = &r.key;
        out.write_record([
            k.participant.as_str(),
            &k.suite,
            &k.item_id.to_string(),
            &k.condition,
            &k.word_index.to_string(),
            &r.word,
            r.region_type.as_str(),
            &r.grammatical.to_string(),
            &r.residual.to_string(),
        ])?;
    }
    out.flush().map_err(|e| Error::io("<residuals>", e))
}

#[derive(Deserialize)]
struct ResidualRow {
    participant: String,
    suite_tag: String,
    item_id: u32,
    condition: String,
    word_index: usize,
    word: String,
    region_type: RegionType,
    grammatical: bool,
    residual_ms: f64,
}

/// Reads a table written by [`write_residuals`].
pub fn read_residuals<R: Read>(r: R) -> Result<Vec<ResidualRecord>> {
    let rows: Vec<ResidualRow> = read_tsv_rows(r)?;
    Ok(rows
        .into_iter()
        .map(|r| ResidualRecord {
            key: TrialKey {
                participant: r.participant,
                suite: r.suite_tag,
                item_id: r.item_id,
                condition: r.condition,
                word_index: r.word_index,
            },
            word: r.word,
            residual: r.residual_ms,
            region_type: r.region_type,
            grammatical: r.grammatical,
        })
        .collect())
}

/// Two-column `statistic value` table.
pub fn write_residual_summary<W: Write>(s: &ResidualSummary, w: W) -> Result<()> {
    let mut out = tsv_writer(w);
    out.write_record(["statistic", "value"])?;
    let mut rows = vec![
        ("provider", s.provider.clone()),
        ("n_critical", s.n_critical.to_string()),
        ("n_non_critical", s.n_non_critical.to_string()),
        ("mean_abs_critical", s.mean_abs_critical.to_string()),
        ("mean_abs_non_critical", s.mean_abs_non_critical.to_string()),
        ("mean_abs_critical_grammatical", s.mean_abs_critical_grammatical.to_string()),
        ("mean_abs_critical_ungrammatical", s.mean_abs_critical_ungrammatical.to_string()),
    ];
    if let Some(w) = &s.welch {
        rows.extend([
            ("welch_difference", w.difference().to_string()),
            ("welch_t", w.t.to_string()),
            ("welch_df", w.df.to_string()),
            ("welch_p", w.p.to_string()),
        ]);
    }
    for (k, v) in rows {
        out.write_record([k, v.as_str()])?;
    }
    out.flush().map_err(|e| Error::io("<residual summary>", e))
}

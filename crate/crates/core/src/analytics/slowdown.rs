use std::collections::BTreeMap;
use std::io::{Read, Write};

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::fit::{predicted_slowdown, LinearFit};
use super::sweep::within_ci;
use crate::error::{Error, Result};
use crate::scoring::{criterion_margin, participant_cells, read_tsv_rows, tsv_writer, RtOptions, SurprisalMeasure};
use crate::stats::{mean, percentile_interval, MIN_RESAMPLES};
use crate::suite::{Criterion, Sign, TestSuite};
use crate::surprisal::{Aggregation, SurprisalTable};
use crate::trials::RTTrial;
use crate::{par, rng};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SlowdownOptions {
    pub n_boot: usize,
    pub seed: u64,
    pub level: f64,
    pub rt: RtOptions,
}

impl SlowdownOptions {
    pub fn seeded(seed: u64) -> Self {
        SlowdownOptions {
            n_boot: 2000,
            seed,
            level: 0.95,
            rt: RtOptions::default(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ObservedSlowdown {
    pub mean_ms: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    pub n_items: usize,
}

/// Per-item RT difference `Σ rhs − Σ lhs` (ungrammatical minus grammatical for
/// a two-way contrast), averaged over items.
///
/// The interval is a two-stage percentile bootstrap: items are resampled, then
/// participants are resampled independently within each cell of each drawn
/// item. Items with an empty cell are left out.
pub fn observed_slowdown(
    trials: &[RTTrial],
    suite: &TestSuite,
    prediction: &Criterion,
    options: SlowdownOptions,
) -> Result<ObservedSlowdown> {
    if options.n_boot < MIN_RESAMPLES {
        return Err(Error::InvalidArgument(format!(
            "bootstrap needs >= {MIN_RESAMPLES} resamples, got {}",
            options.n_boot
        )));
    }
    let cells = participant_cells(suite, trials, options.rt)?;
    let terms: Vec<(f64, &str, &str)> = prediction
        .rhs
        .iter()
        .map(|t| (t.sign, t))
        .chain(prediction.lhs.iter().map(|t| (flip(t.sign), t)))
        .map(|(s, t)| (s.apply(1.0), t.condition.as_str(), t.region.as_str()))
        .collect();

    // items × terms → participant values
    let items: Vec<Vec<&[f64]>> = suite
        .items
        .iter()
        .filter_map(|item| {
            terms
                .iter()
                .map(|(_, c, r)| {
                    cells
                        .get(&(item.item_id, c.to_string(), r.to_string()))
                        .map(Vec::as_slice)
                })
                .collect()
        })
        .collect();
    if items.is_empty() {
        return Err(Error::EmptyCell(format!(
            "{}/{}: no item has data in every cell",
            suite.tag, prediction.name
        )));
    }

    let diff = |cell_means: &mut dyn Iterator<Item = f64>| -> f64 {
        terms.iter().zip(cell_means).map(|((s, _, _), m)| s * m).sum()
    };
    let point: Vec<f64> = items.iter().map(|cs| diff(&mut cs.iter().map(|v| mean(v)))).collect();

    let n = items.len();
    let replicates = par::map_range(options.n_boot, |r| {
        let mut g = rng::stream(options.seed, r as u64);
        let mut total = 0.0;
        for _ in 0..n {
            let cs = &items[g.random_range(0..n)];
            let mut means = cs.iter().map(|v| {
                let k = v.len();
                (0..k).map(|_| v[g.random_range(0..k)]).sum::<f64>() / k as f64
            });
            total += diff(&mut means);
        }
        total / n as f64
    });
    let (ci_low, ci_high) = percentile_interval(replicates, options.level);
    Ok(ObservedSlowdown {
        mean_ms: mean(&point),
        ci_low,
        ci_high,
        n_items: n,
    })
}

fn flip(s: Sign) -> Sign {
    match s {
        Sign::Plus => Sign::Minus,
        Sign::Minus => Sign::Plus,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProviderPrediction {
    pub provider: String,
    pub ms_per_bit: f64,
    /// Mean over items of the signed surprisal difference.
    pub delta_bits: f64,
    pub predicted_ms: f64,
    pub within_ci: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SlowdownReport {
    pub suite: String,
    pub prediction: String,
    pub observed: ObservedSlowdown,
    pub providers: Vec<ProviderPrediction>,
}

/// Observed slowdowns for every prediction of every suite, with each
/// provider's predicted slowdown. Each (suite, prediction) pair bootstraps
/// with its own seed derived from `options.seed` and the pair's names.
pub fn slowdown_reports(
    suites: &[TestSuite],
    trials: &[RTTrial],
    providers: &[(&LinearFit, &SurprisalTable)],
    options: SlowdownOptions,
) -> Result<Vec<SlowdownReport>> {
    let pairs: Vec<(&TestSuite, &Criterion)> = suites
        .iter()
        .flat_map(|s| s.predictions.iter().map(move |c| (s, c)))
        .collect();
    par::try_map_slice(&pairs, |&(suite, criterion)| {
        let seed = rng::derive_seed_path(options.seed, &[rng::key_id(&suite.tag), rng::key_id(&criterion.name)]);
        let observed = observed_slowdown(trials, suite, criterion, SlowdownOptions { seed, ..options })?;
        let providers = providers
            .iter()
            .map(|(fit, table)| {
                let source = SurprisalMeasure {
                    table,
                    suite: &suite.tag,
                    aggregation: Aggregation::Sum,
                };
                let deltas: Vec<f64> = suite
                    .items
                    .iter()
                    .map(|item| criterion_margin(criterion, item, &source))
                    .collect::<Result<_>>()?;
                let delta_bits = mean(&deltas);
                let predicted_ms = predicted_slowdown(fit, delta_bits);
                Ok(ProviderPrediction {
                    provider: table.provider.clone(),
                    ms_per_bit: fit.ms_per_bit(),
                    delta_bits,
                    predicted_ms,
                    within_ci: within_ci(predicted_ms, &observed),
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(SlowdownReport {
            suite: suite.tag.clone(),
            prediction: criterion.name.clone(),
            observed,
            providers,
        })
    })
}

/// Long-form row: one per (suite, prediction, provider).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct SlowdownRow {
    suite_tag: String,
    prediction: String,
    observed_ms: f64,
    ci_low: f64,
    ci_high: f64,
    n_items: usize,
    provider: String,
    ms_per_bit: f64,
    delta_bits: f64,
    predicted_ms: f64,
    within_ci: bool,
}

pub fn write_slowdown_reports<W: Write>(reports: &[SlowdownReport], w: W) -> Result<()> {
    let mut out = tsv_writer(w);
    for r in reports {
        for p in &r.providers {
            out.serialize(SlowdownRow {
                suite_tag: r.suite.clone(),
                prediction: r.prediction.clone(),
                observed_ms: r.observed.mean_ms,
                ci_low: r.observed.ci_low,
                ci_high: r.observed.ci_high,
                n_items: r.observed.n_items,
                provider: p.provider.clone(),
                ms_per_bit: p.ms_per_bit,
                delta_bits: p.delta_bits,
                predicted_ms: p.predicted_ms,
                within_ci: p.within_ci,
            })?;
        }
    }
    out.flush().map_err(|e| Error::io("<slowdown report>", e))
}

pub fn read_slowdown_reports<R: Read>(r: R) -> Result<Vec<SlowdownReport>> {
    let rows: Vec<SlowdownRow> = read_tsv_rows(r)?;
    let mut grouped: BTreeMap<(String, String), SlowdownReport> = BTreeMap::new();
    let mut order = Vec::new();
    for row in rows {
        let key = (row.suite_tag.clone(), row.prediction.clone());
        let report = grouped.entry(key.clone()).or_insert_with(|| {
            order.push(key);
            SlowdownReport {
                suite: row.suite_tag.clone(),
                prediction: row.prediction.clone(),
                observed: ObservedSlowdown {
                    mean_ms: row.observed_ms,
                    ci_low: row.ci_low,
                    ci_high: row.ci_high,
                    n_items: row.n_items,
                },
                providers: Vec::new(),
            }
        });
        report.providers.push(ProviderPrediction {
            provider: row.provider,
            ms_per_bit: row.ms_per_bit,
            delta_bits: row.delta_bits,
            predicted_ms: row.predicted_ms,
            within_ci: row.within_ci,
        });
    }
    Ok(order.into_iter().map(|k| grouped.remove(&k).expect("grouped key")).collect())
}

/// Bar-chart data: a "human" bar with its interval and one bar per provider.
pub fn write_slowdown_plot_data<W: Write>(reports: &[SlowdownReport], w: W) -> Result<()> {
    let mut out = tsv_writer(w);
    out.write_record(["suite_tag", "prediction", "series", "slowdown_ms", "ci_low", "ci_high"])?;
    for r in reports {
        let o = &r.observed;
        out.write_record([
            r.suite.as_str(),
            &r.prediction,
            "human",
            &o.mean_ms.to_string(),
            &o.ci_low.to_string(),
            &o.ci_high.to_string(),
        ])?;
        for p in &r.providers {
            out.write_record([r.suite.as_str(), &r.prediction, &p.provider, &p.predicted_ms.to_string(), "", ""])?;
        }
    }
    out.flush().map_err(|e| Error::io("<plot data>", e))
}

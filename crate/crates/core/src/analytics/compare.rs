use std::io::Write;

use nalgebra::DMatrix;
use serde::Serialize;

use super::residuals::{RegionType, ResidualRecord};
use crate::error::{Error, Result};
use crate::ols::ols;
use crate::scoring::tsv_writer;
use crate::stats::{welch_t_test, WelchTest};
use crate::trials::{DistractorKind, RTTrial, TrialKey};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PairwiseComparison {
    pub a: String,
    pub b: String,
    /// Mean critical-region |residual| of `b` minus that of `a`, in ms.
    pub estimate: f64,
    pub std_error: f64,
    pub t: f64,
    pub p: f64,
    pub n: usize,
}

/// Pairwise comparisons of critical-region |residual| between providers.
///
/// Each pair is a fixed-effects regression of the stacked absolute residuals
/// on an intercept and a provider indicator. All providers must cover the
/// same trials.
pub fn compare_providers(residuals: &[(String, Vec<ResidualRecord>)]) -> Result<Vec<PairwiseComparison>> {
    if residuals.len() < 2 {
        return Err(Error::InsufficientData(format!(
            "comparison needs at least two providers, got {}",
            residuals.len()
        )));
    }
    let critical: Vec<(&str, Vec<(&TrialKey, f64)>)> = residuals
        .iter()
        .map(|(name, recs)| {
            let mut v: Vec<(&TrialKey, f64)> = recs
                .iter()
                .filter(|r| r.region_type == RegionType::Critical)
                .map(|r| (&r.key, r.residual.abs()))
                .collect();
            v.sort_by(|x, y| x.0.cmp(y.0));
            (name.as_str(), v)
        })
        .collect();
    let reference: Vec<&TrialKey> = critical[0].1.iter().map(|(k, _)| *k).collect();
    for (name, v) in &critical[1..] {
        if v.len() != reference.len() || v.iter().zip(&reference).any(|((k, _), r)| k != r) {
            return Err(Error::InvalidArgument(format!(
                "trial-set mismatch: provider {name:?} does not cover the same critical trials as {:?}",
                critical[0].0
            )));
        }
    }

    let mut out = Vec::new();
    for i in 0..critical.len() {
        for j in i + 1..critical.len() {
            let (a, va) = &critical[i];
            let (b, vb) = &critical[j];
            let n = va.len();
            let y: Vec<f64> = va.iter().chain(vb).map(|(_, r)| *r).collect();
            let x = DMatrix::from_fn(2 * n, 2, |row, col| if col == 0 || row >= n { 1.0 } else { 0.0 });
            let fit = ols(&x, &y)?;
            out.push(PairwiseComparison {
                a: a.to_string(),
                b: b.to_string(),
                estimate: fit.coefficients[1],
                std_error: fit.std_errors[1],
                t: fit.t_values[1],
                p: fit.p_values[1],
                n,
            });
        }
    }
    Ok(out)
}

pub fn write_comparisons<W: Write>(rows: &[PairwiseComparison], w: W) -> Result<()> {
    let mut out = tsv_writer(w);
    for r in rows {
        out.serialize(r)?;
    }
    out.flush().map_err(|e| Error::io("<comparisons>", e))
}

/// Welch test of L-Maze against G-Maze RTs on correct non-critical decisions.
/// The difference is `mean(L) − mean(G)`.
pub fn lmaze_gmaze_contrast(trials: &[RTTrial], max_rt: Option<f64>) -> Result<WelchTest> {
    let group = |kind: DistractorKind| -> Vec<f64> {
        trials
            .iter()
            .filter(|t| t.is_usable() && !t.row.critical && t.kind() == kind)
            .filter(|t| max_rt.is_none_or(|m| t.rt() <= m))
            .map(RTTrial::rt)
            .collect()
    };
    let (l, g) = (group(DistractorKind::L), group(DistractorKind::G));
    if l.is_empty() || g.is_empty() {
        return Err(Error::InsufficientData(format!(
            "non-critical decisions: {} L-Maze, {} G-Maze",
            l.len(),
            g.len()
        )));
    }
    welch_t_test(&l, &g)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::surprisal::FrequencyTable;
    use crate::trials::row;

    fn records(offset: f64) -> Vec<ResidualRecord> {
        (0..200)
            .map(|i| ResidualRecord {
                key: TrialKey {
                    participant: format!("p{}", i % 7),
                    suite: "S".into(),
                    item_id: i as u32,
                    condition: "c".into(),
                    word_index: 1,
                },
                word: "w".into(),
                residual: ((i * 37) % 101) as f64 - 50.0 + offset * (if i % 2 == 0 { 1.0 } else { -1.0 }),
                region_type: if i % 4 == 3 {
                    RegionType::NonCritical
                } else {
                    RegionType::Critical
                },
                grammatical: true,
            })
            .collect()
    }

    #[test]
    fn identical_sets_have_no_difference() {
        let r = records(0.0);
        let c = compare_providers(&[("a".into(), r.clone()), ("b".into(), r)]).unwrap();
        assert_eq!(c.len(), 1);
        assert!(c[0].estimate.abs() < 1e-9);
        assert!(c[0].p > 0.99);
        assert_eq!(c[0].n, 150);
    }

    #[test]
    fn shifted_magnitudes_are_detected() {
        let a = records(0.0);
        let b: Vec<ResidualRecord> = a
            .iter()
            .map(|r| ResidualRecord {
                residual: r.residual.signum() * (r.residual.abs() + 50.0),
                ..r.clone()
            })
            .collect();
        let c = compare_providers(&[("a".into(), a.clone()), ("b".into(), b)]).unwrap();
        assert!((c[0].estimate - 50.0).abs() < 1e-9);
        assert!(c[0].p < 1e-3);

        let mut short = a.clone();
        short.pop();
        short.remove(0);
        assert!(compare_providers(&[("a".into(), a.clone()), ("b".into(), short)]).is_err());
        assert!(compare_providers(&[("a".into(), a)]).is_err());
    }

    #[test]
    fn contrast_needs_both_kinds() {
        let f = FrequencyTable::default();
        let mk = |i: usize, k, rt| RTTrial::new(row("p", "S", 1, "c", i, "w", "r", false, k, rt), &f);
        let same: Vec<RTTrial> = (0..40)
            .map(|i| mk(i, if i % 2 == 0 { DistractorKind::L } else { DistractorKind::G }, 500.0 + (i / 2) as f64))
            .collect();
        let w = lmaze_gmaze_contrast(&same, None).unwrap();
        assert!(w.t.abs() < 1e-12 && (w.p - 1.0).abs() < 1e-12);
        let only_l: Vec<RTTrial> = (0..5).map(|i| mk(i, DistractorKind::L, 500.0)).collect();
        assert!(matches!(lmaze_gmaze_contrast(&only_l, None), Err(Error::InsufficientData(_))));
    }
}

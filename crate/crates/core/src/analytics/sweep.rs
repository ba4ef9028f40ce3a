use std::collections::BTreeSet;
use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use super::slowdown::{ObservedSlowdown, SlowdownReport};
use crate::error::{Error, Result};
use crate::scoring::{read_tsv_rows, tsv_writer};

/// Inclusive interval check shared by the reports and the sweep.
pub fn within_ci(predicted_ms: f64, observed: &ObservedSlowdown) -> bool {
    observed.ci_low <= predicted_ms && predicted_ms <= observed.ci_high
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepCurve {
    pub provider: String,
    /// (scalar, proportion of predictions within the human interval)
    pub points: Vec<(f64, f64)>,
}

/// For each scalar `k`, the fraction of (suite, prediction) pairs whose
/// prediction with slope `k·β_s` lies inside the observed interval.
/// Providers are listed in order of first appearance.
pub fn scalar_sweep(reports: &[SlowdownReport], scalars: &[f64]) -> Result<Vec<SweepCurve>> {
    if scalars.is_empty() {
        return Err(Error::InvalidArgument("scalar grid is empty".into()));
    }
    if let Some(k) = scalars.iter().find(|k| !(k.is_finite() && **k > 0.0)) {
        return Err(Error::InvalidArgument(format!("scalars must be positive, got {k}")));
    }
    let mut seen = BTreeSet::new();
    let providers: Vec<&str> = reports
        .iter()
        .flat_map(|r| r.providers.iter().map(|p| p.provider.as_str()))
        .filter(|p| seen.insert(*p))
        .collect();
    Ok(providers
        .into_iter()
        .map(|provider| {
            let points = scalars
                .iter()
                .map(|&k| {
                    let (mut hit, mut total) = (0usize, 0usize);
                    for r in reports {
                        for p in r.providers.iter().filter(|p| p.provider == provider) {
                            total += 1;
                            hit += within_ci(p.ms_per_bit * k * p.delta_bits, &r.observed) as usize;
                        }
                    }
                    (k, if total == 0 { 0.0 } else { hit as f64 / total as f64 })
                })
                .collect();
            SweepCurve {
                provider: provider.to_string(),
                points,
            }
        })
        .collect())
}

/// Parses `start:end` (unit steps) or `start:end:step`, both ends inclusive,
/// or a comma-separated list.
pub fn parse_scalar_grid(spec: &str) -> Result<Vec<f64>> {
    let bad = || Error::InvalidArgument(format!("bad scalar grid {spec:?}"));
    let num = |s: &str| s.trim().parse::<f64>().map_err(|_| bad());
    if !spec.contains(':') {
        return spec.split(',').map(num).collect();
    }
    let parts: Vec<&str> = spec.split(':').collect();
    let (start, end, step) = match parts[..] {
        [a, b] => (num(a)?, num(b)?, 1.0),
        [a, b, c] => (num(a)?, num(b)?, num(c)?),
        _ => return Err(bad()),
    };
    if !(step > 0.0) || end < start {
        return Err(bad());
    }
    let count = ((end - start) / step + 1e-9).floor() as usize + 1;
    Ok((0..count).map(|i| start + step * i as f64).collect())
}

pub fn write_sweep<W: Write>(curves: &[SweepCurve], w: W) -> Result<()> {
    let mut out = tsv_writer(w);
    out.write_record(["provider", "scalar", "proportion_within_ci"])?;
    for c in curves {
        for (k, p) in &c.points {
            out.write_record([c.provider.as_str(), &k.to_string(), &p.to_string()])?;
        }
    }
    out.flush().map_err(|e| Error::io("<sweep>", e))
}

#[derive(Deserialize)]
struct SweepRow {
    provider: String,
    scalar: f64,
    proportion_within_ci: f64,
}

/// Reads a table written by [`write_sweep`].
pub fn read_sweep<R: Read>(r: R) -> Result<Vec<SweepCurve>> {
    let rows: Vec<SweepRow> = read_tsv_rows(r)?;
    let mut curves: Vec<SweepCurve> = Vec::new();
    for row in rows {
        match curves.iter_mut().find(|c| c.provider == row.provider) {
            Some(c) => c.points.push((row.scalar, row.proportion_within_ci)),
            None => curves.push(SweepCurve {
                provider: row.provider,
                points: vec![(row.scalar, row.proportion_within_ci)],
            }),
        }
    }
    Ok(curves)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analytics::ProviderPrediction;

    fn report(mean: f64, half: f64, beta: f64, delta: f64) -> SlowdownReport {
        let observed = ObservedSlowdown {
            mean_ms: mean,
            ci_low: mean - half,
            ci_high: mean + half,
            n_items: 5,
        };
        let predicted_ms = beta * delta;
        SlowdownReport {
            suite: "S".into(),
            prediction: format!("p{mean}"),
            observed,
            providers: vec![ProviderPrediction {
                provider: "m".into(),
                ms_per_bit: beta,
                delta_bits: delta,
                predicted_ms,
                within_ci: within_ci(predicted_ms, &observed),
            }],
        }
    }

    #[test]
    fn grid_parsing() {
        let g = parse_scalar_grid("1:30").unwrap();
        assert_eq!(g.len(), 30);
        assert_eq!((g[0], g[29]), (1.0, 30.0));
        assert_eq!(parse_scalar_grid("0.5:2:0.5").unwrap(), vec![0.5, 1.0, 1.5, 2.0]);
        assert_eq!(parse_scalar_grid("1,4,11").unwrap(), vec![1.0, 4.0, 11.0]);
        assert!(parse_scalar_grid("3:1").is_err());
        assert!(parse_scalar_grid("a:b").is_err());
    }

    #[test]
    fn scalar_one_matches_reports_and_k_peaks() {
        // Predictions equal human mean / 4 on every test.
        let reports: Vec<SlowdownReport> =
            (1..=10).map(|i| report(40.0 * i as f64, 5.0, 2.5, 4.0 * i as f64)).collect();
        let curves = scalar_sweep(&reports, &parse_scalar_grid("1:8").unwrap()).unwrap();
        assert_eq!(curves.len(), 1);
        let direct = reports.iter().filter(|r| r.providers[0].within_ci).count() as f64 / 10.0;
        assert_eq!(curves[0].points[0].1, direct);
        assert_eq!(curves[0].points[3], (4.0, 1.0));
        let best = curves[0].points.iter().map(|p| p.1).fold(0.0, f64::max);
        assert_eq!(best, 1.0);
        assert!(scalar_sweep(&reports, &[]).is_err());
        let mut buf = Vec::new();
        write_sweep(&curves, &mut buf).unwrap();
        assert_eq!(read_sweep(buf.as_slice()).unwrap(), curves);
        assert!(scalar_sweep(&reports, &[0.0]).is_err());
    }
}

//! Statistical utilities: Wilson intervals, Pearson correlation, Welch's
//! t-test and seeded percentile bootstrap.

use rand::Rng;
use statrs::distribution::{ContinuousCDF, Normal};
use statrs::function::beta::beta_reg;

use crate::error::{Error, Result};
use crate::{par, rng};

pub fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

/// Unbiased sample variance.
pub fn variance(xs: &[f64]) -> f64 {
    let m = mean(xs);
    xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (xs.len() as f64 - 1.0)
}

/// Two-sided normal critical value for a confidence level, e.g. 1.959964 for 0.95.
pub fn z_critical(level: f64) -> f64 {
    Normal::standard().inverse_cdf(1.0 - (1.0 - level) / 2.0)
}

/// Two-sided p-value of a Student t statistic with `df` degrees of freedom.
pub fn t_two_sided_p(t: f64, df: f64) -> f64 {
    if t == 0.0 {
        return 1.0;
    }
    if !t.is_finite() {
        return f64::MIN_POSITIVE;
    }
    beta_reg(df / 2.0, 0.5, df / (df + t * t)).clamp(f64::MIN_POSITIVE, 1.0)
}

fn check_level(level: f64) -> Result<()> {
    if level > 0.0 && level < 1.0 {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!("confidence level must lie in (0, 1), got {level}")))
    }
}

/// Wilson score interval for `k` successes in `n` trials.
pub fn wilson_ci(k: u64, n: u64, level: f64) -> Result<(f64, f64)> {
    if n == 0 || k > n {
        return Err(Error::InvalidArgument(format!("binomial interval needs 0 <= k <= n, n >= 1 (k={k}, n={n})")));
    }
    check_level(level)?;
    let z = z_critical(level);
    let nf = n as f64;
    let p = k as f64 / nf;
    let z2 = z * z;
    let denom = 1.0 + z2 / nf;
    let center = (p + z2 / (2.0 * nf)) / denom;
    let half = z / denom * (p * (1.0 - p) / nf + z2 / (4.0 * nf * nf)).sqrt();
    let low = if k == 0 { 0.0 } else { (center - half).max(0.0) };
    let high = if k == n { 1.0 } else { (center + half).min(1.0) };
    Ok((low, high))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Correlation {
    pub r: f64,
    pub p: f64,
    pub n: usize,
}

/// Pearson correlation with a two-sided p-value from the t transform
/// (`n - 2` degrees of freedom).
pub fn pearson(x: &[f64], y: &[f64]) -> Result<Correlation> {
    if x.len() != y.len() {
        return Err(Error::InvalidArgument(format!("paired vectors differ in length ({} vs {})", x.len(), y.len())));
    }
    let n = x.len();
    if n < 3 {
        return Err(Error::InsufficientData(format!("correlation needs n >= 3, got {n}")));
    }
    let (mx, my) = (mean(x), mean(y));
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in x.iter().zip(y) {
        sxy += (a - mx) * (b - my);
        sxx += (a - mx).powi(2);
        syy += (b - my).powi(2);
    }
    if sxx == 0.0 || syy == 0.0 {
        return Err(Error::Degenerate("zero variance in a correlated vector".into()));
    }
    let r = (sxy / (sxx.sqrt() * syy.sqrt())).clamp(-1.0, 1.0);
    let df = (n - 2) as f64;
    let p = if r.abs() == 1.0 {
        0.0
    } else {
        let t = r * (df / (1.0 - r * r)).sqrt();
        t_two_sided_p(t, df)
    };
    Ok(Correlation { r, p, n })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WelchTest {
    pub t: f64,
    pub df: f64,
    pub p: f64,
    pub mean_a: f64,
    pub mean_b: f64,
}

impl WelchTest {
    pub fn difference(&self) -> f64 {
        self.mean_a - self.mean_b
    }
}

/// Welch's unequal-variance t-test of `mean(a) - mean(b)`.
pub fn welch_t_test(a: &[f64], b: &[f64]) -> Result<WelchTest> {
    if a.len() < 2 || b.len() < 2 {
        return Err(Error::InsufficientData(format!(
            "Welch test needs two samples of size >= 2 (got {} and {})",
            a.len(),
            b.len()
        )));
    }
    let (na, nb) = (a.len() as f64, b.len() as f64);
    let (mean_a, mean_b) = (mean(a), mean(b));
    let (va, vb) = (variance(a) / na, variance(b) / nb);
    if va == 0.0 && vb == 0.0 {
        return Err(Error::Degenerate("both samples have zero variance; t is undefined".into()));
    }
    let t = (mean_a - mean_b) / (va + vb).sqrt();
    let df = (va + vb).powi(2) / (va * va / (na - 1.0) + vb * vb / (nb - 1.0));
    Ok(WelchTest {
        t,
        df,
        p: t_two_sided_p(t, df),
        mean_a,
        mean_b,
    })
}

/// Percentile interval of a set of replicate statistics (linear interpolation
/// between order statistics).
pub fn percentile_interval(mut replicates: Vec<f64>, level: f64) -> (f64, f64) {
    replicates.sort_by(f64::total_cmp);
    let alpha = (1.0 - level) / 2.0;
    (quantile_sorted(&replicates, alpha), quantile_sorted(&replicates, 1.0 - alpha))
}

pub fn quantile_sorted(sorted: &[f64], q: f64) -> f64 {
    let pos = q * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    sorted[lo] + (sorted[hi] - sorted[lo]) * (pos - lo as f64)
}

pub const MIN_RESAMPLES: usize = 1000;

/// Percentile bootstrap interval of `statistic`.
///
/// The sample is sorted before resampling, so the result depends only on the
/// multiset of values. Replicate `r` draws from its own generator derived from
/// `(seed, r)`; results are identical with or without the `parallel` feature.
pub fn bootstrap_ci<F>(values: &[f64], statistic: F, n_boot: usize, seed: u64, level: f64) -> Result<(f64, f64)>
where
    F: Fn(&[f64]) -> f64 + Sync + Send,
{
    if values.len() < 2 {
        return Err(Error::InsufficientData(format!("bootstrap needs >= 2 values, got {}", values.len())));
    }
    if n_boot < MIN_RESAMPLES {
        return Err(Error::InvalidArgument(format!("bootstrap needs >= {MIN_RESAMPLES} resamples, got {n_boot}")));
    }
    check_level(level)?;
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len();
    let replicates = par::map_range(n_boot, |r| {
        let mut g = rng::stream(seed, r as u64);
        let sample: Vec<f64> = (0..n).map(|_| sorted[g.random_range(0..n)]).collect();
        statistic(&sample)
    });
    Ok(percentile_interval(replicates, level))
}

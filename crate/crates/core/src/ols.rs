//! Ordinary least squares via Householder QR.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::stats::t_two_sided_p;

#[derive(Debug, Clone, PartialEq)]
pub struct OlsFit {
    pub coefficients: Vec<f64>,
    pub std_errors: Vec<f64>,
    pub t_values: Vec<f64>,
    pub p_values: Vec<f64>,
    pub residuals: Vec<f64>,
    pub r_squared: f64,
    /// sqrt(RSS / (n - p)).
    pub residual_sd: f64,
    pub n: usize,
}

impl OlsFit {
    pub fn df_resid(&self) -> usize {
        self.n - self.coefficients.len()
    }
}

/// Fits `y ~ X β`. `x` must already contain an intercept column if one is wanted.
pub fn ols(x: &DMatrix<f64>, y: &[f64]) -> Result<OlsFit> {
    let (n, p) = x.shape();
    if y.len() != n {
        return Err(Error::InvalidArgument(format!("{} responses for {n} design rows", y.len())));
    }
    if n <= p {
        return Err(Error::InsufficientData(format!("{n} observations for {p} coefficients")));
    }
    let qr = x.clone().qr();
    let r = qr.r();
    let max_diag = (0..p).map(|i| r[(i, i)].abs()).fold(0.0, f64::max);
    if max_diag == 0.0 || (0..p).any(|i| r[(i, i)].abs() <= 1e-10 * max_diag) {
        return Err(Error::RankDeficient { columns: p });
    }
    let yv = DVector::from_column_slice(y);
    let qty = qr.q().transpose() * &yv;
    let beta = r
        .solve_upper_triangular(&qty)
        .ok_or(Error::RankDeficient { columns: p })?;
    let fitted = x * &beta;
    let residuals: Vec<f64> = (&yv - &fitted).iter().copied().collect();
    let rss: f64 = residuals.iter().map(|e| e * e).sum();
    let ybar = y.iter().sum::<f64>() / n as f64;
    let tss: f64 = y.iter().map(|v| (v - ybar).powi(2)).sum();
    let df = (n - p) as f64;
    let sigma2 = rss / df;

    // (RᵀR)⁻¹ = R⁻¹ R⁻ᵀ
    let r_inv = r
        .solve_upper_triangular(&DMatrix::identity(p, p))
        .ok_or(Error::RankDeficient { columns: p })?;
    let cov_diag: Vec<f64> = (0..p).map(|i| r_inv.row(i).iter().map(|v| v * v).sum::<f64>()).collect();

    let coefficients: Vec<f64> = beta.iter().copied().collect();
    let std_errors: Vec<f64> = cov_diag.iter().map(|c| (c * sigma2).sqrt()).collect();
    let t_values: Vec<f64> = coefficients.iter().zip(&std_errors).map(|(b, se)| t_ratio(*b, *se)).collect();
    let p_values = t_values.iter().map(|&t| t_two_sided_p(t, df)).collect();
    Ok(OlsFit {
        coefficients,
        std_errors,
        t_values,
        p_values,
        residuals,
        r_squared: if tss > 0.0 { 1.0 - rss / tss } else { 1.0 },
        residual_sd: sigma2.sqrt(),
        n,
    })
}

fn t_ratio(estimate: f64, se: f64) -> f64 {
    if se > 0.0 {
        estimate / se
    } else if estimate == 0.0 {
        0.0
    } else {
        estimate.signum() * f64::INFINITY
    }
}

//! One-dimensional Wasserstein-1, the `D² <= W_1` check and estimator diagnostics.

use ndarray::ArrayView2;

use crate::energy::{cdf_gap_integral, mmd_1d_sq, sorted_copy};
use crate::error::{Error, Result};

/// `D²` vs `W_1` for one pair of 1D empirical measures.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundReport {
    pub d_sq: f64,
    pub w1: f64,
    /// `d_sq / w1`; `None` when `w1 == 0`.
    pub ratio: Option<f64>,
    /// `D² <= W_1`.
    pub satisfied_weak: bool,
    /// `2 D² <= W_1`.
    pub satisfied_paper: bool,
}

/// Exact `W_1` of two 1D empirical measures: the L¹ distance of their cdfs.
pub fn wasserstein1_1d(x: &[f64], y: &[f64]) -> Result<f64> {
    if x.is_empty() || y.is_empty() {
        return Err(Error::Domain("empirical measures must be non-empty".into()));
    }
    if x.iter().chain(y).any(|v| !v.is_finite()) {
        return Err(Error::Domain("non-finite support point".into()));
    }
    Ok(cdf_gap_integral(&sorted_copy(x), &sorted_copy(y), f64::abs))
}

/// Compare `D²` and `W_1` on a 1D pair. Violations are reported, never raised.
pub fn check_w1_bound(x: &[f64], y: &[f64]) -> Result<BoundReport> {
    let d_sq = mmd_1d_sq(x, y)?;
    let w1 = wasserstein1_1d(x, y)?;
    Ok(BoundReport {
        d_sq,
        w1,
        ratio: (w1 > 0.0).then(|| d_sq / w1),
        satisfied_weak: d_sq <= w1,
        satisfied_paper: 2.0 * d_sq <= w1,
    })
}

/// `||estimate - exact||_F / ||exact||_F`.
pub fn relative_grad_error(estimate: ArrayView2<'_, f64>, exact: ArrayView2<'_, f64>) -> Result<f64> {
    if estimate.dim() != exact.dim() {
        let ((a, b), (c, d)) = (estimate.dim(), exact.dim());
        return Err(Error::ShapeMismatch(a, b, c, d));
    }
    let (num, den) = estimate
        .iter()
        .zip(exact.iter())
        .fold((0.0, 0.0), |(num, den), (e, x)| (num + (e - x) * (e - x), den + x * x));
    if den == 0.0 {
        return Err(Error::ZeroReference);
    }
    Ok((num / den).sqrt())
}

/// Least-squares slope of `ln y` against `ln x`.
pub fn fit_loglog_slope(points: &[(f64, f64)]) -> Result<f64> {
    if points.len() < 3 {
        return Err(Error::InvalidFit(format!("got {} points", points.len())));
    }
    if let Some(p) = points.iter().find(|(x, y)| !(*x > 0.0 && *y > 0.0 && x.is_finite() && y.is_finite())) {
        return Err(Error::InvalidFit(format!("non-positive point {p:?}")));
    }
    let n = points.len() as f64;
    let (lx, ly): (Vec<f64>, Vec<f64>) = points.iter().map(|(x, y)| (x.ln(), y.ln())).unzip();
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let sxx: f64 = lx.iter().map(|a| (a - mx) * (a - mx)).sum();
    if sxx == 0.0 {
        return Err(Error::InvalidFit("all x values equal".into()));
    }
    let sxy: f64 = lx.iter().zip(&ly).map(|(a, b)| (a - mx) * (b - my)).sum();
    Ok(sxy / sxx)
}

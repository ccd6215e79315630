//! Discrete MMD energies for empirical measures.
//!
//! Two families of routines live here:
//!
//! * the O(N² + NM) double sums for any [`KernelSpec`] in any dimension
//!   ([`naive_mmd_sq`], [`naive_grad`]); these are the ground truth everything
//!   else is checked against;
//! * the one-dimensional negative distance kernel, where sorting turns the
//!   double sums into rank counts: [`sorted_interaction_grad_1d`],
//!   [`sorted_potential_grad_1d`], [`grad_f1`] and the cdf form [`mmd_1d_sq`].
//!
//! With `mu = 1/N sum delta_{x_i}` and `nu = 1/M sum delta_{y_j}` the objective is
//!
//! ```text
//! F(x | y) = 1/(2N²) Σ_ij K(x_i, x_j) - 1/(NM) Σ_ij K(x_i, y_j)
//!          = D²_K(mu, nu) + const(y)
//! ```
//!
//! where `D²_K(mu, nu) = ½ ∫∫ K d(mu - nu) d(mu - nu)` keeps the ½ factor.
//!
//! ## Ties
//!
//! At coincident points the energies are not differentiable. All routines
//! pick the same subgradient: a zero contribution for every coincident pair.
//! For the sorted routines that means tied particles share the average of
//! their ranks, and a particle sitting exactly on a target point counts it
//! as half below and half above. The naive and sorted paths therefore agree
//! even in the presence of ties, and the result does not depend on how the
//! sort orders equal keys.

use ndarray::Array2;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::kernel::KernelSpec;
use crate::particles::ParticleSet;

/// Rows per rayon task in the quadratic loops.
const ROW_CHUNK: usize = 16;

/// The constant `c_{d,r}` relating the sliced 1D Riesz MMD to the
/// d-dimensional one:
/// `c_{d,r} = sqrt(pi) Γ((d+r)/2) / (Γ(d/2) Γ((r+1)/2))`.
///
/// Evaluated through log-gamma so large `d` does not overflow. For `d = 1`
/// the value is exactly 1.
pub fn riesz_constant(d: usize, r: f64) -> Result<f64> {
    if d < 1 {
        return Err(Error::Domain(format!("dimension must be >= 1, got {d}")));
    }
    if !(r > 0.0 && r < 2.0) {
        return Err(Error::Domain(format!("r must lie in (0, 2), got {r}")));
    }
    if d == 1 {
        return Ok(1.0);
    }
    let d = d as f64;
    let log_c = 0.5 * std::f64::consts::PI.ln() + libm::lgamma(0.5 * (d + r))
        - libm::lgamma(0.5 * d)
        - libm::lgamma(0.5 * (r + 1.0));
    Ok(log_c.exp())
}

#[inline]
fn dist_sq(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(u, v)| (u - v) * (u - v)).sum()
}

/// `Σ_i Σ_j K(a_i, b_j)` with deterministic reduction order.
fn kernel_sum(a: &ParticleSet, b: &ParticleSet, kernel: &KernelSpec) -> f64 {
    let (da, db) = (a.as_flat(), b.as_flat());
    let d = a.d();
    let rows: Vec<f64> = da
        .par_chunks(d)
        .with_min_len(ROW_CHUNK)
        .map(|ai| db.chunks(d).map(|bj| kernel.value_sq(dist_sq(ai, bj))).sum::<f64>())
        .collect();
    rows.iter().sum()
}

/// `Σ_i Σ_j K(a_i, a_j)` using symmetry; the diagonal is `K(0)`.
fn self_kernel_sum(a: &ParticleSet, kernel: &KernelSpec) -> f64 {
    let da = a.as_flat();
    let d = a.d();
    let n = a.n();
    let rows: Vec<f64> = (0..n)
        .into_par_iter()
        .with_min_len(ROW_CHUNK)
        .map(|i| {
            let ai = &da[i * d..(i + 1) * d];
            da[(i + 1) * d..]
                .chunks(d)
                .map(|aj| kernel.value_sq(dist_sq(ai, aj)))
                .sum::<f64>()
        })
        .collect();
    2.0 * rows.iter().sum::<f64>() + n as f64 * kernel.value_sq(0.0)
}

/// Squared MMD `D²_K(mu_N, nu_M)` of two empirical measures by direct double sums.
pub fn naive_mmd_sq(x: &ParticleSet, y: &ParticleSet, kernel: &KernelSpec) -> Result<f64> {
    x.check_same_dim(y)?;
    kernel.validate()?;
    let (n, m) = (x.n() as f64, y.n() as f64);
    let sxx = self_kernel_sum(x, kernel);
    let syy = self_kernel_sum(y, kernel);
    let sxy = kernel_sum(x, y, kernel);
    Ok(0.5 * (sxx / (n * n) + syy / (m * m)) - sxy / (n * m))
}

/// Gradient of `F(x | y)` with respect to every particle of `x`, by direct sums.
///
/// Coincident pairs contribute nothing (zero subgradient).
pub fn naive_grad(x: &ParticleSet, y: &ParticleSet, kernel: &KernelSpec) -> Result<Array2<f64>> {
    x.check_same_dim(y)?;
    kernel.validate()?;
    let d = x.d();
    let (n, m) = (x.n(), y.n());
    let w_int = 1.0 / (n as f64 * n as f64);
    let w_pot = 1.0 / (n as f64 * m as f64);
    let (dx, dy) = (x.as_flat(), y.as_flat());

    let mut grad = Array2::<f64>::zeros((n, d));
    grad.as_slice_mut()
        .expect("fresh array is contiguous")
        .par_chunks_mut(d)
        .with_min_len(ROW_CHUNK)
        .enumerate()
        .for_each(|(i, row)| {
            let xi = &dx[i * d..(i + 1) * d];
            let mut potential = vec![0.0; d];
            accumulate_pull(xi, dx, d, kernel, row);
            accumulate_pull(xi, dy, d, kernel, &mut potential);
            for (g, v) in row.iter_mut().zip(&potential) {
                *g = w_int * *g - w_pot * v;
            }
        });
    Ok(grad)
}

/// `acc += Σ_j grad_x K(xi, z_j)` over the rows of `zs`.
#[inline]
fn accumulate_pull(xi: &[f64], zs: &[f64], d: usize, kernel: &KernelSpec, acc: &mut [f64]) {
    for zj in zs.chunks(d) {
        let s = kernel.grad_coef_sq(dist_sq(xi, zj));
        if s != 0.0 {
            for ((a, u), v) in acc.iter_mut().zip(xi).zip(zj) {
                *a += s * (u - v);
            }
        }
    }
}

/// Sort key buffers reused across calls on the hot path.
#[derive(Debug, Default, Clone)]
pub(crate) struct SortScratch {
    xs: Vec<(u64, u32)>,
    ys: Vec<u64>,
    xv: Vec<f64>,
    yv: Vec<f64>,
}

/// Order-preserving map from finite `f64` to `u64`. `-0.0` and `0.0` share a key.
#[inline]
fn ordered_key(v: f64) -> u64 {
    let bits = (v + 0.0).to_bits();
    if bits >> 63 == 1 {
        !bits
    } else {
        bits | 1 << 63
    }
}

impl SortScratch {
    fn load_x(&mut self, x: &[f64]) {
        self.xs.clear();
        self.xs.extend(x.iter().enumerate().map(|(i, &v)| (ordered_key(v), i as u32)));
        self.xs.sort_unstable_by_key(|a| a.0);
    }

    fn load_y(&mut self, y: &[f64]) {
        self.ys.clear();
        self.ys.extend(y.iter().map(|&v| ordered_key(v)));
        self.ys.sort_unstable();
    }

    /// Writes the interaction gradient given sorted `xs`.
    fn interaction_into(&self, out: &mut [f64], add: bool) {
        let n = self.xs.len();
        let scale = 1.0 / (n as f64 * n as f64);
        let mut a = 0;
        while a < n {
            let mut b = a + 1;
            while b < n && self.xs[b].0 == self.xs[a].0 {
                b += 1;
            }
            // Tied block at sorted positions a..b shares the mean 1-based rank
            // (a + 1 + b) / 2, so N + 1 - 2 * rank = N - a - b.
            let g = (n as i64 - a as i64 - b as i64) as f64 * scale;
            for &(_, idx) in &self.xs[a..b] {
                let slot = &mut out[idx as usize];
                *slot = if add { *slot + g } else { g };
            }
            a = b;
        }
    }

    /// Writes the potential gradient given sorted `xs` and `ys`.
    fn potential_into(&self, out: &mut [f64], add: bool) {
        let (n, m) = (self.xs.len(), self.ys.len());
        let scale = 1.0 / (n as f64 * m as f64);
        let mut below = 0;
        let mut upto = 0;
        for &(v, idx) in &self.xs {
            while below < m && self.ys[below] < v {
                below += 1;
            }
            if upto < below {
                upto = below;
            }
            while upto < m && self.ys[upto] <= v {
                upto += 1;
            }
            // 2 * (#below + #equal / 2) - M
            let g = (below as i64 + upto as i64 - m as i64) as f64 * scale;
            let slot = &mut out[idx as usize];
            *slot = if add { *slot + g } else { g };
        }
    }

    /// `out = grad_x F_1(x | y)` for the 1D negative distance kernel.
    pub(crate) fn grad_f1_into(&mut self, x: &[f64], y: &[f64], out: &mut [f64]) {
        debug_assert_eq!(x.len(), out.len());
        self.load_x(x);
        self.load_y(y);
        self.interaction_into(out, false);
        self.potential_into(out, true);
    }

    /// Exact `D²` of two 1D empirical measures through their cdfs.
    pub(crate) fn mmd_1d_sq(&mut self, x: &[f64], y: &[f64]) -> f64 {
        for (buf, src) in [(&mut self.xv, x), (&mut self.yv, y)] {
            buf.clear();
            buf.extend(src.iter().map(|&v| v + 0.0));
            buf.sort_unstable_by(f64::total_cmp);
        }
        cdf_gap_integral(&self.xv, &self.yv, |g| g * g)
    }
}

/// `∫ phi(F_x(t) - F_y(t)) dt` for sorted samples, integrated exactly over the
/// piecewise-constant cdfs. `phi` must vanish at 0.
pub(crate) fn cdf_gap_integral(xs: &[f64], ys: &[f64], phi: impl Fn(f64) -> f64) -> f64 {
    let (n, m) = (xs.len(), ys.len());
    let denom = n as f64 * m as f64;
    let (mut i, mut j) = (0usize, 0usize);
    let mut t = f64::NEG_INFINITY;
    let mut total = 0.0;
    while i < n || j < m {
        let next = match (xs.get(i), ys.get(j)) {
            (Some(&a), Some(&b)) => a.min(b),
            (Some(&a), None) => a,
            (None, Some(&b)) => b,
            (None, None) => unreachable!(),
        };
        if i > 0 || j > 0 {
            // cdf gap (i/N - j/M) with an exact integer numerator
            let gap = (i as i64 * m as i64 - j as i64 * n as i64) as f64 / denom;
            total += phi(gap) * (next - t);
        }
        while i < n && xs[i] <= next {
            i += 1;
        }
        while j < m && ys[j] <= next {
            j += 1;
        }
        t = next;
    }
    total
}

pub(crate) fn sorted_copy(v: &[f64]) -> Vec<f64> {
    let mut s: Vec<f64> = v.iter().map(|&a| a + 0.0).collect();
    s.sort_unstable_by(f64::total_cmp);
    s
}

fn check_1d(name: &str, v: &[f64]) -> Result<()> {
    if v.is_empty() {
        return Err(Error::Domain(format!("{name} must be non-empty")));
    }
    if v.iter().any(|a| !a.is_finite()) {
        return Err(Error::Domain(format!("{name} contains non-finite values")));
    }
    Ok(())
}

/// Gradient of the interaction energy `E(x) = -1/(2N²) Σ_ij |x_i - x_j|`
/// in `O(N log N)`: entry `i` is `(N + 1 - 2 rank(i)) / N²`.
pub fn sorted_interaction_grad_1d(x: &[f64]) -> Result<Vec<f64>> {
    check_1d("x", x)?;
    let mut s = SortScratch::default();
    s.load_x(x);
    let mut out = vec![0.0; x.len()];
    s.interaction_into(&mut out, false);
    Ok(out)
}

/// Gradient of the potential energy `V(x | y) = 1/(NM) Σ_ij |x_i - y_j|`
/// in `O((N + M) log(N + M))`: entry `i` is `(2 #{y_j < x_i} - M) / (MN)`,
/// with targets equal to `x_i` counted as one half.
pub fn sorted_potential_grad_1d(x: &[f64], y: &[f64]) -> Result<Vec<f64>> {
    check_1d("x", x)?;
    check_1d("y", y)?;
    let mut s = SortScratch::default();
    s.load_x(x);
    s.load_y(y);
    let mut out = vec![0.0; x.len()];
    s.potential_into(&mut out, false);
    Ok(out)
}

/// Gradient of `F_1 = E + V` sharing one sort of `x`.
pub fn grad_f1(x: &[f64], y: &[f64]) -> Result<Vec<f64>> {
    check_1d("x", x)?;
    check_1d("y", y)?;
    let mut out = vec![0.0; x.len()];
    SortScratch::default().grad_f1_into(x, y, &mut out);
    Ok(out)
}

/// `D²` of two 1D empirical measures with the negative distance kernel,
/// computed as the squared L² distance between their cdfs.
pub fn mmd_1d_sq(x: &[f64], y: &[f64]) -> Result<f64> {
    check_1d("x", x)?;
    check_1d("y", y)?;
    Ok(cdf_gap_integral(&sorted_copy(x), &sorted_copy(y), |g| g * g))
}

/// The extended (positive definite) Riesz kernel `-|x-y|^r + |x|^r + |y|^r`.
///
/// For `r = 1` and `x, y >= 0` this is `2 min(x, y)`, twice the Brownian
/// motion covariance.
pub fn extended_kernel(x: f64, y: f64, r: f64) -> Result<f64> {
    if !(r > 0.0 && r < 2.0) {
        return Err(Error::Domain(format!("r must lie in (0, 2), got {r}")));
    }
    Ok(-(x - y).abs().powf(r) + x.abs().powf(r) + y.abs().powf(r))
}

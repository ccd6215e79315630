//! `D² <= W_1` on random 1D pairs, and sliced-gradient tails against the
//! concentration bound.

use rand::Rng;
use riesz_mmd::{
    check_w1_bound, concentration_bound, frobenius_norm, gaussian_init, mean_error_bound, naive_grad,
    sliced_grad, BoundReport, KernelSpec,
};

use crate::config::ExperimentConfig;
use crate::error::{CliError, CliResult};
use crate::output::{fmt_f64, OutputDir, BOUNDS_HEADER, BOUNDS_SUMMARY_HEADER, TAILS_HEADER};

/// Particle count of the clouds used for the tail comparison.
pub const TAIL_PARTICLES: usize = 64;

#[derive(Debug, Clone, PartialEq)]
pub struct Instance {
    pub n: usize,
    pub m: usize,
    pub report: BoundReport,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TailRow {
    pub d: usize,
    pub p: usize,
    pub t: f64,
    pub empirical: f64,
    /// Concentration bound clamped to 1.
    pub bound: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BoundsReport {
    pub instances: Vec<Instance>,
    pub tails: Vec<TailRow>,
    /// `(d, P, mean absolute error, bound)` per tail configuration.
    pub mean_errors: Vec<(usize, usize, f64, f64)>,
}

impl BoundsReport {
    pub fn weak_violations(&self) -> usize {
        self.instances.iter().filter(|i| !i.report.satisfied_weak).count()
    }

    pub fn paper_ok(&self) -> usize {
        self.instances.iter().filter(|i| i.report.satisfied_paper).count()
    }

    pub fn tail_violations(&self) -> usize {
        self.tails.iter().filter(|t| t.empirical > t.bound).count()
            + self.mean_errors.iter().filter(|e| e.2 > e.3).count()
    }

    /// Min, median and max of `D² / W_1` over instances with `W_1 > 0`.
    pub fn ratio_stats(&self) -> Option<(f64, f64, f64)> {
        let mut r: Vec<f64> = self.instances.iter().filter_map(|i| i.report.ratio).collect();
        if r.is_empty() {
            return None;
        }
        r.sort_by(f64::total_cmp);
        let k = r.len();
        let median = if k % 2 == 1 { r[k / 2] } else { 0.5 * (r[k / 2 - 1] + r[k / 2]) };
        Some((r[0], median, r[k - 1]))
    }
}

/// Random pair on random sub-intervals of `[-1, 1]` with sizes up to `(n_max, m_max)`.
fn random_pair(n_max: usize, m_max: usize, rng: &mut impl Rng) -> (Vec<f64>, Vec<f64>) {
    let n = rng.random_range(1..=n_max);
    let m = rng.random_range(1..=m_max);
    let mut side = |len: usize| {
        let (a, b): (f64, f64) = (rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
        let (lo, hi) = (a.min(b), a.max(b) + 1e-3);
        (0..len).map(|_| rng.random_range(lo..hi)).collect::<Vec<f64>>()
    };
    let x = side(n);
    (x, side(m))
}

pub fn run_bounds(cfg: &ExperimentConfig) -> CliResult<BoundsReport> {
    let root = cfg.stream();
    let mut instances = Vec::with_capacity(cfg.instances);
    for i in 0..cfg.instances {
        let mut rng = root.split(0).split(i as u64).rng();
        let (x, y) = random_pair(cfg.n, cfg.m, &mut rng);
        instances.push(Instance { n: x.len(), m: y.len(), report: check_w1_bound(&x, &y)? });
    }

    let mut tails = Vec::new();
    let mut mean_errors = Vec::new();
    for &d in &cfg.dims {
        let s = root.split(1).split(d as u64);
        let x = gaussian_init(TAIL_PARTICLES, d, 1.0, &s.split(0))?;
        let y = gaussian_init(TAIL_PARTICLES, d, 1.0, &s.split(1))?.affine(1.0, 0.5)?;
        let exact = naive_grad(&x, &y, &KernelSpec::ENERGY)?;
        for &p in &cfg.projections {
            let errs: Vec<f64> = (0..cfg.trials)
                .map(|t| {
                    let est = sliced_grad(&x, &y, p, &s.split(2).split(p as u64).split(t as u64))?;
                    Ok(frobenius_norm((&est.grads - &exact).view()))
                })
                .collect::<CliResult<_>>()?;
            let k = errs.len() as f64;
            mean_errors.push((d, p, errs.iter().sum::<f64>() / k, mean_error_bound(d, p)?));
            for &t in &cfg.t_grid {
                tails.push(TailRow {
                    d,
                    p,
                    t,
                    empirical: errs.iter().filter(|&&e| e > t).count() as f64 / k,
                    bound: concentration_bound(d, p, t)?.min(1.0),
                });
            }
        }
    }
    Ok(BoundsReport { instances, tails, mean_errors })
}

pub fn cmd_bounds(cfg: &ExperimentConfig) -> CliResult<String> {
    let out = OutputDir::create(&cfg.out, cfg.force)?;
    let report = run_bounds(cfg)?;
    let rows = report.instances.iter().enumerate().map(|(i, inst)| {
        let r = &inst.report;
        vec![
            i.to_string(),
            inst.n.to_string(),
            inst.m.to_string(),
            fmt_f64(r.d_sq),
            fmt_f64(r.w1),
            r.ratio.map(fmt_f64).unwrap_or_default(),
            r.satisfied_weak.to_string(),
            r.satisfied_paper.to_string(),
        ]
    });
    let mut written = vec![out.write_csv("bounds.csv", &BOUNDS_HEADER, rows)?];
    let stats = report.ratio_stats();
    let stat = |f: fn((f64, f64, f64)) -> f64| stats.map(|s| fmt_f64(f(s))).unwrap_or_default();
    written.push(out.write_csv(
        "bounds_summary.csv",
        &BOUNDS_SUMMARY_HEADER,
        [vec![
            report.instances.len().to_string(),
            (report.instances.len() - report.weak_violations()).to_string(),
            report.paper_ok().to_string(),
            stat(|s| s.0),
            stat(|s| s.1),
            stat(|s| s.2),
        ]],
    )?);
    let tail_rows = report.tails.iter().map(|t| {
        vec!["tail".into(), t.d.to_string(), t.p.to_string(), fmt_f64(t.t), fmt_f64(t.empirical), fmt_f64(t.bound)]
    });
    written.push(out.write_csv("tails.csv", &TAILS_HEADER, tail_rows)?);

    let mut text: String = written.iter().map(|p| format!("wrote {}\n", p.display())).collect();
    text += &format!(
        "D^2 <= W1: {}/{}\n2 D^2 <= W1: {}/{} (reported only)\n",
        report.instances.len() - report.weak_violations(),
        report.instances.len(),
        report.paper_ok(),
        report.instances.len()
    );
    if let Some((lo, med, hi)) = stats {
        text += &format!("D^2/W1 min {lo:.4} median {med:.4} max {hi:.4}\n");
    }
    text += &format!("tail and mean-error violations: {}\n", report.tail_violations());
    if report.weak_violations() > 0 || report.tail_violations() > 0 {
        return Err(CliError::CheckFailed(text));
    }
    Ok(text)
}

//! Relative error of the sliced gradient against the exact one, swept over
//! the projection count and the dimension, on Gaussian mixture data.

use std::collections::BTreeMap;

use riesz_mmd::ndarray::Array2;
use riesz_mmd::{
    concentration_bound, fit_loglog_slope, frobenius_norm, mean_error_bound, naive_grad, sliced_grad,
    GaussianMixture, KernelSpec, ParticleSet, RngStream,
};

use crate::config::ExperimentConfig;
use crate::error::CliResult;
use crate::output::{fmt_f64, OutputDir, SCALING_ABS_HEADER, SCALING_HEADER, SLOPES_HEADER, TAILS_HEADER};
use crate::svg::{Plot, Series};

/// Components of the source and target mixtures.
pub const SOURCE_COMPONENTS: usize = 2;
pub const TARGET_COMPONENTS: usize = 10;
/// Standard deviation of every mixture component.
pub const MIXTURE_STD: f64 = 0.01;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sweep {
    P,
    D,
}

impl Sweep {
    pub fn name(self) -> &'static str {
        match self {
            Sweep::P => "P",
            Sweep::D => "d",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScalingPoint {
    pub sweep: Sweep,
    pub d: usize,
    pub p: usize,
    pub mean_rel_error: f64,
    pub mean_abs_error: f64,
    /// Closed-form bound on the mean absolute error.
    pub bound: f64,
    /// `||estimate - exact||_F` per trial.
    pub abs_errors: Vec<f64>,
}

impl ScalingPoint {
    /// `(t, empirical tail frequency, clamped concentration bound)` over `t_grid`.
    pub fn tails(&self, t_grid: &[f64]) -> CliResult<Vec<(f64, f64, f64)>> {
        let k = self.abs_errors.len() as f64;
        t_grid
            .iter()
            .map(|&t| {
                let freq = self.abs_errors.iter().filter(|&&e| e > t).count() as f64 / k;
                Ok((t, freq, concentration_bound(self.d, self.p, t)?.min(1.0)))
            })
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScalingReport {
    pub points: Vec<ScalingPoint>,
    /// Log-log slope of the mean relative error against `P`.
    pub slope_p: f64,
    /// Log-log slope of the mean relative error against `d`.
    pub slope_d: f64,
}

impl ScalingReport {
    pub fn sweep(&self, s: Sweep) -> impl Iterator<Item = &ScalingPoint> {
        self.points.iter().filter(move |p| p.sweep == s)
    }
}

/// Source and target samples for dimension `d`: `n` points from a
/// two-component mixture and `m` points from a ten-component one.
pub fn mixture_instance(n: usize, m: usize, d: usize, stream: &RngStream) -> CliResult<(ParticleSet, ParticleSet)> {
    let source = GaussianMixture::random_means(SOURCE_COMPONENTS, d, MIXTURE_STD, &stream.split(0))?;
    let target = GaussianMixture::random_means(TARGET_COMPONENTS, d, MIXTURE_STD, &stream.split(1))?;
    Ok((source.sample(n, &stream.split(2))?, target.sample(m, &stream.split(3))?))
}

struct Instance {
    x: ParticleSet,
    y: ParticleSet,
    exact: Array2<f64>,
    exact_norm: f64,
    stream: RngStream,
}

fn instance(cfg: &ExperimentConfig, d: usize) -> CliResult<Instance> {
    let stream = cfg.stream().split(d as u64);
    let (x, y) = mixture_instance(cfg.n, cfg.m, d, &stream)?;
    let exact = naive_grad(&x, &y, &KernelSpec::ENERGY)?;
    let exact_norm = frobenius_norm(exact.view());
    Ok(Instance { x, y, exact, exact_norm, stream })
}

fn measure(inst: &Instance, sweep: Sweep, p: usize, trials: usize) -> CliResult<ScalingPoint> {
    let d = inst.x.d();
    let mut abs_errors = Vec::with_capacity(trials);
    for t in 0..trials {
        let stream = inst.stream.split(4).split(p as u64).split(t as u64);
        let est = sliced_grad(&inst.x, &inst.y, p, &stream)?;
        abs_errors.push(frobenius_norm((&est.grads - &inst.exact).view()));
    }
    let mean_abs_error = abs_errors.iter().sum::<f64>() / trials as f64;
    Ok(ScalingPoint {
        sweep,
        d,
        p,
        mean_rel_error: mean_abs_error / inst.exact_norm,
        mean_abs_error,
        bound: mean_error_bound(d, p)?,
        abs_errors,
    })
}

pub fn run_error_scaling(cfg: &ExperimentConfig) -> CliResult<ScalingReport> {
    let mut cache = BTreeMap::new();
    let mut points = Vec::new();
    let fixed = instance(cfg, cfg.d)?;
    for &p in &cfg.projections {
        points.push(measure(&fixed, Sweep::P, p, cfg.trials)?);
    }
    cache.insert(cfg.d, fixed);
    for &d in &cfg.dims {
        if !cache.contains_key(&d) {
            cache.insert(d, instance(cfg, d)?);
        }
        points.push(measure(&cache[&d], Sweep::D, cfg.p, cfg.trials)?);
        // exact gradients in high dimension are large; keep only the shared one
        if d != cfg.d {
            cache.remove(&d);
        }
    }
    let slope = |s: Sweep, x: fn(&ScalingPoint) -> usize| -> CliResult<f64> {
        let pts: Vec<(f64, f64)> = points
            .iter()
            .filter(|p| p.sweep == s)
            .map(|p| (x(p) as f64, p.mean_rel_error))
            .collect();
        // fewer than three sweep values leave the slope undefined
        Ok(fit_loglog_slope(&pts).unwrap_or(f64::NAN))
    };
    let slope_p = slope(Sweep::P, |p| p.p)?;
    let slope_d = slope(Sweep::D, |p| p.d)?;
    Ok(ScalingReport { points, slope_p, slope_d })
}

pub fn cmd_error_scaling(cfg: &ExperimentConfig) -> CliResult<String> {
    let out = OutputDir::create(&cfg.out, cfg.force)?;
    let report = run_error_scaling(cfg)?;
    let row = |p: &ScalingPoint, v: f64| {
        vec![p.sweep.name().to_string(), p.d.to_string(), p.p.to_string(), fmt_f64(v), fmt_f64(p.bound)]
    };
    let mut written = vec![
        out.write_csv("scaling.csv", &SCALING_HEADER, report.points.iter().map(|p| row(p, p.mean_rel_error)))?,
        out.write_csv("scaling_abs.csv", &SCALING_ABS_HEADER, report.points.iter().map(|p| row(p, p.mean_abs_error)))?,
    ];
    let fit_row = |s: Sweep, v: f64| vec![s.name().to_string(), fmt_f64(v), report.sweep(s).count().to_string()];
    written.push(out.write_csv(
        "scaling_slopes.csv",
        &SLOPES_HEADER,
        [fit_row(Sweep::P, report.slope_p), fit_row(Sweep::D, report.slope_d)],
    )?);
    let mut tails = Vec::new();
    let mut violations = 0;
    for p in &report.points {
        violations += usize::from(p.mean_abs_error > p.bound);
        for (t, freq, bound) in p.tails(&cfg.t_grid)? {
            violations += usize::from(freq > bound);
            tails.push(vec![
                p.sweep.name().to_string(),
                p.d.to_string(),
                p.p.to_string(),
                fmt_f64(t),
                fmt_f64(freq),
                fmt_f64(bound),
            ]);
        }
    }
    written.push(out.write_csv("tails.csv", &TAILS_HEADER, tails)?);

    if cfg.svg {
        for (s, name, axis) in [(Sweep::P, "scaling_P.svg", "projections P"), (Sweep::D, "scaling_d.svg", "dimension d")] {
            let x = |p: &ScalingPoint| if s == Sweep::P { p.p as f64 } else { p.d as f64 };
            let plot = Plot {
                title: format!("sliced gradient error vs {}", s.name()),
                x_label: axis.into(),
                y_label: "error".into(),
                log_x: true,
                log_y: true,
                series: vec![
                    Series::line("mean relative error", report.sweep(s).map(|p| (x(p), p.mean_rel_error)).collect()),
                    Series::line("mean absolute error", report.sweep(s).map(|p| (x(p), p.mean_abs_error)).collect()),
                    Series::line("absolute error bound", report.sweep(s).map(|p| (x(p), p.bound)).collect()),
                ],
                ..Plot::default()
            };
            written.push(out.write_text(name, &plot.render())?);
        }
    }

    let mut text = String::new();
    for p in &written {
        text += &format!("wrote {}\n", p.display());
    }
    text += &format!(
        "slope vs P: {:.4}\nslope vs d: {:.4}\nbound violations: {violations}\n",
        report.slope_p, report.slope_d
    );
    Ok(text)
}

//! Small-scale release checks with a pass/fail table.
//!
//! The 1D gradient under test is injectable so that a deliberately broken
//! implementation can be shown to fail a named check.

use std::time::Instant;

use rand::Rng;
use riesz_mmd::{
    check_w1_bound, euler_step, extended_kernel, gaussian_init, grad_f1, mmd_1d_sq, momentum_step, naive_grad,
    naive_mmd_sq, sliced_grad, sorted_interaction_grad_1d, three_circles_sampler, FlowConfig, FlowState,
    KernelSpec, ParticleSet, RngStream,
};

use crate::config::ExperimentConfig;
use crate::error::{CliError, CliResult};

/// A 1D gradient of `F_1(x | y)`.
pub type Grad1d<'a> = &'a dyn Fn(&[f64], &[f64]) -> Vec<f64>;

#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
    pub seconds: f64,
}

/// The library's sorted gradient.
pub fn library_grad(x: &[f64], y: &[f64]) -> Vec<f64> {
    grad_f1(x, y).expect("finite non-empty inputs")
}

fn p1(v: &[f64]) -> ParticleSet {
    ParticleSet::from_1d(v).expect("finite non-empty inputs")
}

fn distinct_uniform(rng: &mut impl Rng, len: usize, scale: f64) -> Vec<f64> {
    let mut seen = std::collections::HashSet::new();
    (0..len)
        .map(|_| rng.random_range(-scale..scale))
        .filter(|v: &f64| seen.insert(v.to_bits()))
        .collect()
}

fn max_rel(a: &[f64], b: &[f64]) -> f64 {
    let scale = b.iter().fold(0.0f64, |s, v| s.max(v.abs())).max(f64::MIN_POSITIVE);
    a.iter().zip(b).map(|(u, v)| (u - v).abs() / scale).fold(0.0, f64::max)
}

type Outcome = Result<String, String>;

fn verdict(worst: f64, tol: f64, what: &str) -> Outcome {
    let msg = format!("worst {what} {worst:.2e} (tol {tol:.0e})");
    if worst <= tol {
        Ok(msg)
    } else {
        Err(msg)
    }
}

fn sorted_vs_naive(root: &RngStream, grad: Grad1d) -> Outcome {
    let mut worst = 0.0f64;
    for i in 0..40 {
        let mut rng = root.split(i).rng();
        let (n, m) = (rng.random_range(1..=200), rng.random_range(1..=200));
        let x = distinct_uniform(&mut rng, n, 5.0);
        let y = distinct_uniform(&mut rng, m, 5.0);
        let exact = naive_grad(&p1(&x), &p1(&y), &KernelSpec::ENERGY).map_err(|e| e.to_string())?;
        worst = worst.max(max_rel(&grad(&x, &y), exact.as_slice().expect("standard layout")));
    }
    verdict(worst, 1e-10, "relative error")
}

fn descent_direction(root: &RngStream, grad: Grad1d) -> Outcome {
    // a small step against the gradient must lower the 1D energy
    for i in 0..20 {
        let mut rng = root.split(i).rng();
        let x = distinct_uniform(&mut rng, 30, 1.0);
        let y: Vec<f64> = (0..25).map(|_| rng.random_range(2.0..4.0)).collect();
        let g = grad(&x, &y);
        let step: Vec<f64> = x.iter().zip(&g).map(|(a, b)| a - 1e-3 * b).collect();
        let (before, after) = (mmd_1d_sq(&x, &y).unwrap(), mmd_1d_sq(&step, &y).unwrap());
        if after >= before {
            return Err(format!("instance {i}: D^2 {before:.6e} -> {after:.6e}"));
        }
    }
    Ok("20 instances descend".into())
}

fn interaction_zero_sum(root: &RngStream) -> Outcome {
    let mut worst = 0.0f64;
    for i in 0..20 {
        let mut rng = root.split(i).rng();
        let n = rng.random_range(1..=500);
        let x: Vec<f64> = (0..n).map(|_| rng.random_range(-3.0..3.0)).collect();
        let e = sorted_interaction_grad_1d(&x).unwrap();
        worst = worst.max(e.iter().sum::<f64>().abs() / n as f64);
    }
    verdict(worst, 1e-12, "|sum| / N")
}

fn cdf_vs_double_sum(root: &RngStream) -> Outcome {
    let mut worst = 0.0f64;
    for i in 0..40 {
        let mut rng = root.split(i).rng();
        let (n, m) = (rng.random_range(1..=150), rng.random_range(1..=150));
        let x: Vec<f64> = (0..n).map(|_| rng.random_range(-2.0..2.0)).collect();
        let y: Vec<f64> = (0..m).map(|_| rng.random_range(-1.0..3.0)).collect();
        let fast = mmd_1d_sq(&x, &y).unwrap();
        let slow = naive_mmd_sq(&p1(&x), &p1(&y), &KernelSpec::ENERGY).unwrap();
        worst = worst.max((fast - slow).abs() / slow.abs().max(1e-3));
    }
    verdict(worst, 1e-10, "relative error")
}

fn sliced_d1_identity(root: &RngStream) -> Outcome {
    let mut worst = 0.0f64;
    for i in 0..20 {
        let mut rng = root.split(i).rng();
        let x = distinct_uniform(&mut rng, 60, 4.0);
        let y = distinct_uniform(&mut rng, 45, 4.0);
        let p = rng.random_range(1..=7);
        let exact = naive_grad(&p1(&x), &p1(&y), &KernelSpec::ENERGY).unwrap();
        let est = sliced_grad(&p1(&x), &p1(&y), p, &root.split(100 + i)).unwrap();
        worst = worst.max(max_rel(est.grads.as_slice().unwrap(), exact.as_slice().unwrap()));
    }
    verdict(worst, 1e-14, "relative error")
}

fn finite_differences(root: &RngStream) -> Outcome {
    let kernels = [
        KernelSpec::Riesz { r: 1.0 },
        KernelSpec::Riesz { r: 1.5 },
        KernelSpec::Gaussian { sigma_sq: 0.5 },
        KernelSpec::InverseMultiquadric { c: 0.05 },
        KernelSpec::Laplace { sigma: 1.0 },
    ];
    let mut worst = 0.0f64;
    for (i, k) in kernels.iter().enumerate() {
        let s = root.split(i as u64);
        let x = gaussian_init(4, 3, 1.0, &s.split(0)).unwrap();
        let y = gaussian_init(3, 3, 1.0, &s.split(1)).unwrap();
        let g = naive_grad(&x, &y, k).unwrap();
        let h = 1e-6;
        for idx in 0..x.as_flat().len() {
            let shifted = |delta: f64| {
                let mut v = x.as_flat().to_vec();
                v[idx] += delta;
                naive_mmd_sq(&ParticleSet::from_flat(v, 3).unwrap(), &y, k).unwrap()
            };
            let fd = (shifted(h) - shifted(-h)) / (2.0 * h);
            let an = g.as_slice().unwrap()[idx];
            worst = worst.max((fd - an).abs() / an.abs().max(1e-2));
        }
    }
    verdict(worst, 1e-4, "relative error")
}

fn riesz_symmetries(root: &RngStream) -> Outcome {
    let mut worst = 0.0f64;
    for i in 0..20 {
        let s = root.split(i);
        let mut rng = s.rng();
        let r = rng.random_range(0.2..1.9);
        let (shift, scale) = (rng.random_range(-5.0..5.0), rng.random_range(0.1..5.0));
        let k = KernelSpec::Riesz { r };
        let x = gaussian_init(20, 2, 1.0, &s.split(0)).unwrap();
        let y = gaussian_init(15, 2, 1.5, &s.split(1)).unwrap();
        let base = naive_mmd_sq(&x, &y, &k).unwrap();
        let moved = naive_mmd_sq(&x.affine(1.0, shift).unwrap(), &y.affine(1.0, shift).unwrap(), &k).unwrap();
        let scaled = naive_mmd_sq(&x.affine(scale, 0.0).unwrap(), &y.affine(scale, 0.0).unwrap(), &k).unwrap();
        worst = worst
            .max((moved - base).abs() / base.abs().max(1.0))
            .max((scaled - scale.powf(r) * base).abs() / scaled.abs().max(1.0));
    }
    verdict(worst, 1e-10, "relative deviation")
}

fn extended_kernel_checks(root: &RngStream) -> Outcome {
    let mut rng = root.rng();
    let mut worst = 0.0f64;
    for _ in 0..200 {
        let (a, b) = (rng.random_range(0.0..100.0), rng.random_range(0.0..100.0));
        let k = extended_kernel(a, b, 1.0).unwrap();
        worst = worst.max((k - 2.0 * f64::min(a, b)).abs() / a.max(b).max(1.0));
    }
    for i in 0..10 {
        let mut rng = root.split(i).rng();
        let r = rng.random_range(0.2..1.9);
        let x: Vec<f64> = (0..15).map(|_| rng.random_range(-3.0..3.0)).collect();
        let y: Vec<f64> = (0..12).map(|_| rng.random_range(-3.0..3.0)).collect();
        let sum = |a: &[f64], b: &[f64]| -> f64 {
            a.iter().map(|&u| b.iter().map(|&v| extended_kernel(u, v, r).unwrap()).sum::<f64>()).sum()
        };
        let (n, m) = (x.len() as f64, y.len() as f64);
        let ext = 0.5 * (sum(&x, &x) / (n * n) + sum(&y, &y) / (m * m)) - sum(&x, &y) / (n * m);
        let plain = naive_mmd_sq(&p1(&x), &p1(&y), &KernelSpec::Riesz { r }).unwrap();
        worst = worst.max((ext - plain).abs() / 3f64.powf(r));
    }
    verdict(worst, 1e-10, "deviation")
}

fn w1_weak_bound(root: &RngStream) -> Outcome {
    for i in 0..200 {
        let mut rng = root.split(i).rng();
        let x: Vec<f64> = (0..rng.random_range(1..=64)).map(|_| rng.random_range(0.0..1.0)).collect();
        let y: Vec<f64> = (0..rng.random_range(1..=64)).map(|_| rng.random_range(0.0..1.0)).collect();
        let r = check_w1_bound(&x, &y).unwrap();
        if !r.satisfied_weak {
            return Err(format!("instance {i}: D^2 {} > W1 {}", r.d_sq, r.w1));
        }
    }
    Ok("200 instances".into())
}

fn sliced_unbiased(root: &RngStream) -> Outcome {
    let x = gaussian_init(20, 5, 1.0, &root.split(0)).unwrap();
    let y = gaussian_init(15, 5, 1.0, &root.split(1)).unwrap().affine(1.0, 0.5).unwrap();
    let exact = naive_grad(&x, &y, &KernelSpec::ENERGY).unwrap();
    let draws: Vec<_> = (0..400).map(|k| sliced_grad(&x, &y, 2, &root.split(10 + k)).unwrap().grads).collect();
    let k = draws.len() as f64;
    let mut within = 0;
    for (idx, &truth) in exact.iter().enumerate() {
        let vals: Vec<f64> = draws.iter().map(|g| g.as_slice().unwrap()[idx]).collect();
        let mean = vals.iter().sum::<f64>() / k;
        let se = (vals.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (k - 1.0) / k).sqrt();
        within += usize::from((mean - truth).abs() <= 4.0 * se);
    }
    let frac = within as f64 / exact.len() as f64;
    let msg = format!("{:.1}% of components within 4 SE", 100.0 * frac);
    if frac >= 0.99 {
        Ok(msg)
    } else {
        Err(msg)
    }
}

fn flow_determinism(root: &RngStream) -> Outcome {
    let target = three_circles_sampler(40, &root.split(0)).unwrap();
    let init = gaussian_init(40, 2, 0.01, &root.split(1)).unwrap();
    let mut cfg = FlowConfig::sliced_default();
    cfg.projections = 8;
    cfg.momentum = 0.0;
    let (mut a, mut b) = (FlowState::new(init.clone()), FlowState::new(init));
    for _ in 0..25 {
        a = euler_step(&a, &target, &cfg).map_err(|e| e.to_string())?;
        b = momentum_step(&b, &target, &cfg).map_err(|e| e.to_string())?;
        if a.positions != b.positions {
            return Err(format!("m = 0 momentum step differs from Euler at step {}", a.step));
        }
    }
    let again = momentum_step(&FlowState::new(target.clone()), &target, &cfg).unwrap();
    let once = momentum_step(&FlowState::new(target.clone()), &target, &cfg).unwrap();
    if again != once {
        return Err("repeated step not bitwise identical".into());
    }
    Ok("25 steps bitwise identical".into())
}

/// Runs every check with the given 1D gradient implementation.
pub fn run_selftest(seed: u64, grad: Grad1d) -> Vec<Check> {
    let root = RngStream::new(seed);
    let checks: Vec<(&'static str, Box<dyn Fn(&RngStream) -> Outcome + '_>)> = vec![
        ("sorted-vs-naive-gradient", Box::new(|s| sorted_vs_naive(s, grad))),
        ("gradient-descent-direction", Box::new(|s| descent_direction(s, grad))),
        ("interaction-zero-sum", Box::new(interaction_zero_sum)),
        ("cdf-vs-double-sum", Box::new(cdf_vs_double_sum)),
        ("sliced-d1-identity", Box::new(sliced_d1_identity)),
        ("finite-differences", Box::new(finite_differences)),
        ("riesz-translation-homogeneity", Box::new(riesz_symmetries)),
        ("extended-kernel", Box::new(extended_kernel_checks)),
        ("w1-weak-bound", Box::new(w1_weak_bound)),
        ("sliced-unbiased", Box::new(sliced_unbiased)),
        ("flow-determinism", Box::new(flow_determinism)),
    ];
    checks
        .into_iter()
        .enumerate()
        .map(|(i, (name, f))| {
            let t = Instant::now();
            let outcome = f(&root.split(i as u64));
            let seconds = t.elapsed().as_secs_f64();
            let (passed, detail) = match outcome {
                Ok(d) => (true, d),
                Err(d) => (false, d),
            };
            Check { name, passed, detail, seconds }
        })
        .collect()
}

pub fn render_table(checks: &[Check]) -> String {
    let width = checks.iter().map(|c| c.name.len()).max().unwrap_or(5).max(5);
    let mut s = format!("{:<width$}  result  seconds  detail\n", "check");
    for c in checks {
        s += &format!(
            "{:<width$}  {:<6}  {:>7.3}  {}\n",
            c.name,
            if c.passed { "PASS" } else { "FAIL" },
            c.seconds,
            c.detail
        );
    }
    let failed = checks.iter().filter(|c| !c.passed).count();
    s += &format!("{} checks, {} failed\n", checks.len(), failed);
    s
}

pub fn cmd_selftest(cfg: &ExperimentConfig) -> CliResult<String> {
    let checks = run_selftest(cfg.seed, &library_grad);
    let table = render_table(&checks);
    if checks.iter().any(|c| !c.passed) {
        return Err(CliError::CheckFailed(table));
    }
    Ok(table)
}

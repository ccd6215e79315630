//! Property tests for the exact energy routines against brute-force oracles.

use proptest::prelude::*;
use riesz_mmd::{
    extended_kernel, grad_f1, mmd_1d_sq, naive_grad, naive_mmd_sq, sorted_interaction_grad_1d,
    sorted_potential_grad_1d, KernelSpec, ParticleSet,
};

/// Brute-force pairwise-sign gradient of `F_1`, independent of the library.
fn sign_sum_grad(x: &[f64], y: &[f64]) -> Vec<f64> {
    let (n, m) = (x.len() as f64, y.len() as f64);
    let sign = |a: f64, b: f64| {
        if a > b {
            1.0
        } else if a < b {
            -1.0
        } else {
            0.0
        }
    };
    x.iter()
        .map(|&xi| {
            let e: f64 = x.iter().map(|&xj| sign(xi, xj)).sum();
            let v: f64 = y.iter().map(|&yj| sign(xi, yj)).sum();
            -e / (n * n) + v / (n * m)
        })
        .collect()
}

fn p1(v: &[f64]) -> ParticleSet {
    ParticleSet::from_1d(v).unwrap()
}

fn distinct(v: Vec<f64>) -> Vec<f64> {
    let mut seen = std::collections::HashSet::new();
    v.into_iter().filter(|a| seen.insert(a.to_bits())).collect()
}

fn small_vec(max: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-10.0f64..10.0, 1..max)
}

fn kernels() -> impl Strategy<Value = KernelSpec> {
    prop_oneof![
        (0.2f64..1.9).prop_map(|r| KernelSpec::Riesz { r }),
        (0.05f64..2.0).prop_map(|s| KernelSpec::Gaussian { sigma_sq: s }),
        (0.01f64..1.0).prop_map(|c| KernelSpec::InverseMultiquadric { c }),
        (0.1f64..2.0).prop_map(|s| KernelSpec::Laplace { sigma: s }),
    ]
}

/// Rows of `n` points in `d` dims whose pairwise distances are all >= 1e-2.
fn separated_points(n: usize, d: usize) -> impl Strategy<Value = Vec<Vec<f64>>> {
    prop::collection::vec(prop::collection::vec(-2.0f64..2.0, d), n).prop_filter("points too close", |rows| {
        rows.iter().enumerate().all(|(i, a)| {
            rows[i + 1..]
                .iter()
                .all(|b| a.iter().zip(b).map(|(u, v)| (u - v) * (u - v)).sum::<f64>().sqrt() >= 1e-2)
        })
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn sorted_gradient_matches_sign_sums(x in small_vec(200), y in small_vec(200)) {
        let fast = grad_f1(&x, &y).unwrap();
        let slow = sign_sum_grad(&x, &y);
        let scale = slow.iter().fold(0.0f64, |a, b| a.max(b.abs()));
        for (a, b) in fast.iter().zip(&slow) {
            prop_assert!((a - b).abs() <= 1e-10 * b.abs().max(scale) + 1e-300);
        }
    }

    #[test]
    fn sorted_gradient_matches_naive_grad(x in small_vec(120), y in small_vec(120)) {
        let x = distinct(x);
        let fast = grad_f1(&x, &y).unwrap();
        let slow = naive_grad(&p1(&x), &p1(&y), &KernelSpec::ENERGY).unwrap();
        let scale = slow.iter().fold(0.0f64, |a, b| a.max(b.abs()));
        for (a, b) in fast.iter().zip(slow.iter()) {
            prop_assert!((a - b).abs() <= 1e-10 * b.abs().max(scale) + 1e-300);
        }
    }

    #[test]
    fn gradient_is_sum_of_parts(x in small_vec(60), y in small_vec(60)) {
        let e = sorted_interaction_grad_1d(&x).unwrap();
        let v = sorted_potential_grad_1d(&x, &y).unwrap();
        let f = grad_f1(&x, &y).unwrap();
        for i in 0..x.len() {
            prop_assert_eq!(f[i], e[i] + v[i]);
        }
    }

    #[test]
    fn interaction_sums_to_zero_and_is_bounded(x in small_vec(500)) {
        let n = x.len() as f64;
        let e = sorted_interaction_grad_1d(&x).unwrap();
        prop_assert!(e.iter().sum::<f64>().abs() <= 1e-12 * n);
        let cap = (n - 1.0) / (n * n);
        prop_assert!(e.iter().all(|g| g.abs() <= cap * (1.0 + 1e-12)));
    }

    #[test]
    fn potential_is_bounded(x in small_vec(100), y in small_vec(100)) {
        let n = x.len() as f64;
        let v = sorted_potential_grad_1d(&x, &y).unwrap();
        prop_assert!(v.iter().all(|g| g.abs() <= (1.0 / n) * (1.0 + 1e-12)));
    }

    #[test]
    fn cdf_mmd_matches_double_sum(x in small_vec(150), y in small_vec(150)) {
        let fast = mmd_1d_sq(&x, &y).unwrap();
        let slow = naive_mmd_sq(&p1(&x), &p1(&y), &KernelSpec::ENERGY).unwrap();
        // the double sum cancels terms of size ~ spread; judge against that scale
        prop_assert!((fast - slow).abs() <= 1e-10 * slow.abs().max(1e-3), "{} vs {}", fast, slow);
        prop_assert!(fast >= 0.0);
    }

    #[test]
    fn riesz_mmd_is_translation_invariant(
        x in prop::collection::vec(-3.0f64..3.0, 2..40),
        y in prop::collection::vec(-3.0f64..3.0, 2..40),
        shift in -5.0f64..5.0,
        r in 0.2f64..1.9,
    ) {
        let k = KernelSpec::Riesz { r };
        let d = 2;
        let (x, y) = (trim(x, d), trim(y, d));
        let a = naive_mmd_sq(&x, &y, &k).unwrap();
        let b = naive_mmd_sq(&x.affine(1.0, shift).unwrap(), &y.affine(1.0, shift).unwrap(), &k).unwrap();
        prop_assert!((a - b).abs() <= 1e-10 * a.abs().max(1.0));
    }

    #[test]
    fn riesz_mmd_is_homogeneous(
        x in prop::collection::vec(-3.0f64..3.0, 2..40),
        y in prop::collection::vec(-3.0f64..3.0, 2..40),
        s in 0.1f64..5.0,
        r in 0.2f64..1.9,
    ) {
        let k = KernelSpec::Riesz { r };
        let (x, y) = (trim(x, 2), trim(y, 2));
        let a = naive_mmd_sq(&x, &y, &k).unwrap();
        let b = naive_mmd_sq(&x.affine(s, 0.0).unwrap(), &y.affine(s, 0.0).unwrap(), &k).unwrap();
        prop_assert!((b - s.powf(r) * a).abs() <= 1e-10 * b.abs().max(1.0));
    }

    #[test]
    fn extended_kernel_gives_same_mmd(x in small_vec(40), y in small_vec(40), r in 0.2f64..1.9) {
        // direct double sums with the extended kernel, ½ factor as for D²
        let sum = |a: &[f64], b: &[f64]| -> f64 {
            a.iter().map(|&u| b.iter().map(|&v| extended_kernel(u, v, r).unwrap()).sum::<f64>()).sum()
        };
        let (n, m) = (x.len() as f64, y.len() as f64);
        let ext = 0.5 * (sum(&x, &x) / (n * n) + sum(&y, &y) / (m * m)) - sum(&x, &y) / (n * m);
        let plain = naive_mmd_sq(&p1(&x), &p1(&y), &KernelSpec::Riesz { r }).unwrap();
        let scale = x.iter().chain(&y).fold(1.0f64, |a, b| a.max(b.abs().powf(r)));
        prop_assert!((ext - plain).abs() <= 1e-10 * scale, "{} vs {}", ext, plain);
    }

    #[test]
    fn brownian_motion_identity(a in 0.0f64..100.0, b in 0.0f64..100.0) {
        let k = extended_kernel(a, b, 1.0).unwrap();
        prop_assert!((k - 2.0 * a.min(b)).abs() <= 1e-12 * a.max(b).max(1.0));
    }

    #[test]
    fn mmd_is_symmetric(x in small_vec(30), y in small_vec(30), k in kernels()) {
        let a = naive_mmd_sq(&p1(&x), &p1(&y), &k).unwrap();
        let b = naive_mmd_sq(&p1(&y), &p1(&x), &k).unwrap();
        prop_assert!((a - b).abs() <= 1e-12 * a.abs().max(1.0));
        if matches!(k, KernelSpec::Riesz { .. }) {
            prop_assert!(a >= -1e-12);
        }
    }

    #[test]
    fn naive_grad_matches_central_differences(
        rows in separated_points(7, 3),
        k in kernels(),
    ) {
        let (xr, yr) = rows.split_at(3);
        let x = ParticleSet::from_rows(xr).unwrap();
        let y = ParticleSet::from_rows(yr).unwrap();
        let g = naive_grad(&x, &y, &k).unwrap();
        let h = 1e-6;
        let base = x.as_flat().to_vec();
        for idx in 0..base.len() {
            let mut plus = base.clone();
            let mut minus = base.clone();
            plus[idx] += h;
            minus[idx] -= h;
            let fp = naive_mmd_sq(&ParticleSet::from_flat(plus, 3).unwrap(), &y, &k).unwrap();
            let fm = naive_mmd_sq(&ParticleSet::from_flat(minus, 3).unwrap(), &y, &k).unwrap();
            let fd = (fp - fm) / (2.0 * h);
            let an = g.as_slice().unwrap()[idx];
            prop_assert!((fd - an).abs() <= 1e-4 * an.abs().max(1e-2), "{}: {} vs {}", k, fd, an);
        }
    }
}

fn trim(mut v: Vec<f64>, d: usize) -> ParticleSet {
    v.truncate(v.len() / d * d);
    ParticleSet::from_flat(v, d).unwrap()
}

fn fd_check(k: KernelSpec, x: &ParticleSet, y: &ParticleSet, tol: f64) {
    let g = naive_grad(x, y, &k).unwrap();
    let d = x.d();
    let h = 1e-6;
    let base = x.as_flat().to_vec();
    for idx in 0..base.len() {
        let mut plus = base.clone();
        let mut minus = base.clone();
        plus[idx] += h;
        minus[idx] -= h;
        let fp = naive_mmd_sq(&ParticleSet::from_flat(plus, d).unwrap(), y, &k).unwrap();
        let fm = naive_mmd_sq(&ParticleSet::from_flat(minus, d).unwrap(), y, &k).unwrap();
        let fd = (fp - fm) / (2.0 * h);
        let an = g.as_slice().unwrap()[idx];
        assert!((fd - an).abs() <= tol, "{k} coordinate {idx}: {fd} vs {an}");
    }
}

#[test]
fn gaussian_single_pair_finite_differences() {
    let x = ParticleSet::from_rows(&[vec![0.0, 0.0]]).unwrap();
    let y = ParticleSet::from_rows(&[vec![1.0, 0.0]]).unwrap();
    fd_check(KernelSpec::Gaussian { sigma_sq: 0.5 }, &x, &y, 1e-6);
}

#[test]
fn imq_small_instance_finite_differences() {
    let x = ParticleSet::from_rows(&[vec![0.1, -0.3], vec![0.4, 0.2], vec![-0.5, 0.05]]).unwrap();
    let y = ParticleSet::from_rows(&[vec![0.0, 0.1], vec![0.3, -0.2]]).unwrap();
    fd_check(KernelSpec::InverseMultiquadric { c: 0.05 }, &x, &y, 1e-6);
}

//! # riesz-mmd
//!
//! Maximum mean discrepancy with Riesz kernels `K(x, y) = -|x - y|^r`
//! (the energy distance for `r = 1`), computed fast by slicing and sorting.
//!
//! The MMD of the d-dimensional Riesz kernel equals, up to a constant
//! `c_{d,r}`, the average over random directions of the 1D Riesz MMD of the
//! projected samples. In 1D with `r = 1` both the MMD and its gradient reduce
//! to sorting, so a `P`-projection gradient estimate costs
//! `O(dP(N + M) + P(N + M) log(N + M))` instead of `O(d(N² + NM))`.
//!
//! | Module | Contents |
//! |--------|----------|
//! | [`energy`] | exact 1D sorted gradients, cdf MMD, naive d-dimensional oracles |
//! | [`sliced`] | sphere directions, stochastic gradient and value estimators, error bounds |
//! | [`flow`] | Euler and momentum particle flows |
//! | [`sampling`] | three-circles, Gaussian and Gaussian mixture samplers |
//! | [`metrics`] | 1D Wasserstein-1, `D² <= W_1` checks, relative errors, log-log fits |
//!
//! ```rust
//! use riesz_mmd::{naive_grad, sliced_grad, KernelSpec, ParticleSet, RngStream};
//!
//! let x = ParticleSet::from_rows(&[vec![0.0, 0.0], vec![1.0, 0.5]]).unwrap();
//! let y = ParticleSet::from_rows(&[vec![2.0, 1.0], vec![-1.0, 0.0], vec![0.0, 3.0]]).unwrap();
//! let exact = naive_grad(&x, &y, &KernelSpec::ENERGY).unwrap();
//! let est = sliced_grad(&x, &y, 10_000, &RngStream::new(7)).unwrap();
//! assert!((&est.grads - &exact).iter().all(|e| e.abs() < 0.05));
//! ```

pub mod energy;
pub mod error;
pub mod flow;
pub mod kernel;
pub mod metrics;
pub mod particles;
pub mod rng;
pub mod sampling;
pub mod sliced;

pub use energy::{
    extended_kernel, grad_f1, mmd_1d_sq, naive_grad, naive_mmd_sq, riesz_constant,
    sorted_interaction_grad_1d, sorted_potential_grad_1d,
};
pub use error::{Error, Result};
pub use flow::{
    euler_step, flow_gradient, kernel_grad, momentum_step, run_flow, FlowConfig, FlowState,
    GradientMode, TrajectoryLog,
};
pub use kernel::KernelSpec;
pub use metrics::{check_w1_bound, fit_loglog_slope, relative_grad_error, wasserstein1_1d, BoundReport};
pub use particles::{frobenius_norm, ParticleSet};
pub use rng::RngStream;
pub use sampling::{gaussian_init, three_circles_sampler, Circles, GaussianMixture};
pub use sliced::{
    concentration_bound, mean_error_bound, sample_directions, sliced_grad, sliced_grad_for,
    sliced_grad_with_directions, sliced_mmd_sq, GradientEstimate, ProjectionBatch,
};

pub use ndarray;

//! Explicit Euler and momentum particle flows of the discrete MMD functional.
//!
//! ```text
//! v^(k+1) = grad F_d(x^(k) | y) + m v^(k)
//! x^(k+1) = x^(k) - tau N v^(k+1),        v^(0) = 0
//! ```
//!
//! `m = 0` is the plain Euler scheme. The gradient is either the sliced
//! sorting estimator (negative distance kernel only) or the exact double sum
//! for any [`KernelSpec`]. Step `k` of a sliced flow draws its projections
//! from `seed.split(k)`.

use ndarray::Array2;

use crate::energy::{naive_grad, naive_mmd_sq};
use crate::error::{Error, Result};
use crate::kernel::KernelSpec;
use crate::particles::{frobenius_norm, ParticleSet};
use crate::rng::RngStream;
use crate::sliced::sliced_grad_for;

/// Coordinates beyond this magnitude count as divergence.
pub const DIVERGENCE_LIMIT: f64 = 1e12;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GradientMode {
    Sliced,
    Naive,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FlowConfig {
    /// Step size.
    pub tau: f64,
    /// Momentum in `[0, 1)`.
    pub momentum: f64,
    pub steps: usize,
    /// Projections per step in sliced mode.
    pub projections: usize,
    pub kernel: KernelSpec,
    pub gradient_mode: GradientMode,
    pub seed: RngStream,
    pub snapshot_every: usize,
}

impl FlowConfig {
    /// Sliced negative-distance flow with `tau = 1`, `m = 0.7`, `P = 100`.
    pub fn sliced_default() -> Self {
        Self {
            tau: 1.0,
            momentum: 0.7,
            steps: 1000,
            projections: 100,
            kernel: KernelSpec::ENERGY,
            gradient_mode: GradientMode::Sliced,
            seed: RngStream::new(0),
            snapshot_every: 100,
        }
    }

    /// Exact-gradient flow for `kernel`; smooth kernels get `tau = 0.01`.
    pub fn naive_default(kernel: KernelSpec) -> Self {
        let tau = if matches!(kernel, KernelSpec::Riesz { .. }) { 1.0 } else { 0.01 };
        Self {
            tau,
            momentum: 0.0,
            kernel,
            gradient_mode: GradientMode::Naive,
            ..Self::sliced_default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidConfig(msg));
        if !(self.tau >= 0.0 && self.tau.is_finite()) {
            return bad(format!("tau must be finite and >= 0, got {}", self.tau));
        }
        if !(0.0..1.0).contains(&self.momentum) {
            return bad(format!("momentum must lie in [0, 1), got {}", self.momentum));
        }
        if self.projections == 0 {
            return bad("projections must be >= 1".into());
        }
        if self.snapshot_every == 0 {
            return bad("snapshot_every must be >= 1".into());
        }
        self.kernel.validate()?;
        if self.gradient_mode == GradientMode::Sliced && !self.kernel.is_energy() {
            return Err(Error::UnsupportedFastPath(self.kernel.to_string()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FlowState {
    pub positions: ParticleSet,
    pub velocities: Array2<f64>,
    pub step: usize,
}

impl FlowState {
    /// Start at `positions` with zero velocity.
    pub fn new(positions: ParticleSet) -> Self {
        let velocities = Array2::zeros((positions.n(), positions.d()));
        Self {
            positions,
            velocities,
            step: 0,
        }
    }
}

/// Per-snapshot diagnostics of a flow run.
#[derive(Debug, Clone, PartialEq)]
pub struct TrajectoryLog {
    pub snapshots: Vec<(usize, ParticleSet)>,
    /// Exact `D²` to the target, evaluated with `energy_kernel`.
    pub energy_series: Vec<(usize, f64)>,
    /// Frobenius norm of the gradient used at that step.
    pub grad_norm_series: Vec<(usize, f64)>,
    pub energy_kernel: KernelSpec,
}

impl TrajectoryLog {
    pub fn final_energy(&self) -> Option<f64> {
        self.energy_series.last().map(|e| e.1)
    }
}

/// The gradient the flow uses at `state`.
pub fn flow_gradient(state: &FlowState, target: &ParticleSet, config: &FlowConfig) -> Result<Array2<f64>> {
    match config.gradient_mode {
        GradientMode::Naive => naive_grad(&state.positions, target, &config.kernel),
        GradientMode::Sliced => {
            let stream = config.seed.split(state.step as u64);
            sliced_grad_for(&config.kernel, &state.positions, target, config.projections, &stream)
                .map(|e| e.grads)
        }
    }
}

/// Exact gradient of the given kernel's `F_d`, for any family.
pub fn kernel_grad(kernel: &KernelSpec, x: &ParticleSet, y: &ParticleSet) -> Result<Array2<f64>> {
    naive_grad(x, y, kernel)
}

fn apply(state: &FlowState, grad: Array2<f64>, config: &FlowConfig) -> Result<FlowState> {
    let velocities = if config.momentum == 0.0 {
        grad
    } else {
        grad + &(config.momentum * &state.velocities)
    };
    let scale = config.tau * state.positions.n() as f64;
    let next = &state.positions.points() - &(scale * &velocities);
    let step = state.step + 1;
    if let Some(((particle, dim), &value)) = next
        .indexed_iter()
        .find(|(_, v)| !v.is_finite() || v.abs() > DIVERGENCE_LIMIT)
    {
        return Err(Error::FlowDivergence {
            step,
            particle,
            dim,
            value,
        });
    }
    Ok(FlowState {
        positions: ParticleSet::new(next)?,
        velocities,
        step,
    })
}

fn check(state: &FlowState, target: &ParticleSet, config: &FlowConfig) -> Result<()> {
    config.validate()?;
    state.positions.check_same_dim(target)?;
    if state.velocities.dim() != (state.positions.n(), state.positions.d()) {
        let (a, b) = state.velocities.dim();
        return Err(Error::ShapeMismatch(a, b, state.positions.n(), state.positions.d()));
    }
    Ok(())
}

/// One explicit Euler step `x - tau N grad F_d(x | y)`. Requires `momentum == 0`.
pub fn euler_step(state: &FlowState, target: &ParticleSet, config: &FlowConfig) -> Result<FlowState> {
    check(state, target, config)?;
    if config.momentum != 0.0 {
        return Err(Error::InvalidConfig(format!(
            "euler_step needs momentum 0, got {}",
            config.momentum
        )));
    }
    let g = flow_gradient(state, target, config)?;
    apply(state, g, config)
}

/// One momentum step: velocity update, then position update.
pub fn momentum_step(state: &FlowState, target: &ParticleSet, config: &FlowConfig) -> Result<FlowState> {
    check(state, target, config)?;
    let g = flow_gradient(state, target, config)?;
    apply(state, g, config)
}

/// Run `config.steps` momentum steps from `init`, logging every
/// `snapshot_every` steps and at the final step.
pub fn run_flow(init: &ParticleSet, target: &ParticleSet, config: &FlowConfig) -> Result<TrajectoryLog> {
    let mut state = FlowState::new(init.clone());
    check(&state, target, config)?;
    let mut log = TrajectoryLog {
        snapshots: Vec::new(),
        energy_series: Vec::new(),
        grad_norm_series: Vec::new(),
        energy_kernel: config.kernel,
    };
    let mut record = |state: &FlowState, grad: &Array2<f64>| -> Result<()> {
        let energy = naive_mmd_sq(&state.positions, target, &config.kernel)?;
        log.snapshots.push((state.step, state.positions.clone()));
        log.energy_series.push((state.step, energy));
        log.grad_norm_series.push((state.step, frobenius_norm(grad.view())));
        Ok(())
    };
    for k in 0..config.steps {
        let g = flow_gradient(&state, target, config)?;
        if k % config.snapshot_every == 0 {
            record(&state, &g)?;
        }
        state = apply(&state, g, config)?;
    }
    let g = flow_gradient(&state, target, config)?;
    record(&state, &g)?;
    drop(record);
    Ok(log)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sampling::{gaussian_init, three_circles_sampler};

    fn p1(v: &[f64]) -> ParticleSet {
        ParticleSet::from_1d(v).unwrap()
    }

    fn naive_cfg(tau: f64, momentum: f64) -> FlowConfig {
        FlowConfig {
            tau,
            momentum,
            ..FlowConfig::naive_default(KernelSpec::ENERGY)
        }
    }

    #[test]
    fn euler_single_particle() {
        let s = FlowState::new(p1(&[0.0]));
        let next = euler_step(&s, &p1(&[2.0]), &naive_cfg(0.5, 0.0)).unwrap();
        assert_eq!(next.positions.as_flat(), &[0.5]);
        assert_eq!(next.step, 1);
    }

    #[test]
    fn euler_fixed_points() {
        let x = p1(&[0.0, 1.0, 3.0]);
        let s = FlowState::new(x.clone());
        assert_eq!(euler_step(&s, &x, &naive_cfg(0.3, 0.0)).unwrap().positions, x);
        let y = p1(&[5.0, -2.0]);
        assert_eq!(euler_step(&s, &y, &naive_cfg(0.0, 0.0)).unwrap().positions, x);
        assert!(matches!(
            euler_step(&s, &y, &naive_cfg(0.1, 0.5)),
            Err(Error::InvalidConfig(_))
        ));
    }

    #[test]
    fn momentum_two_steps() {
        let cfg = naive_cfg(0.5, 0.5);
        let y = p1(&[2.0]);
        let s1 = momentum_step(&FlowState::new(p1(&[0.0])), &y, &cfg).unwrap();
        let e1 = euler_step(&FlowState::new(p1(&[0.0])), &y, &naive_cfg(0.5, 0.0)).unwrap();
        assert_eq!(s1.positions, e1.positions);
        let s2 = momentum_step(&s1, &y, &cfg).unwrap();
        assert_eq!(s2.positions.as_flat(), &[1.25]);
    }

    #[test]
    fn momentum_zero_equals_euler_bitwise() {
        let target = three_circles_sampler(40, &RngStream::new(1)).unwrap();
        let init = gaussian_init(40, 2, 0.01, &RngStream::new(2)).unwrap();
        let mut cfg = FlowConfig::sliced_default();
        cfg.momentum = 0.0;
        cfg.projections = 8;
        let (mut a, mut b) = (FlowState::new(init.clone()), FlowState::new(init));
        for _ in 0..100 {
            a = euler_step(&a, &target, &cfg).unwrap();
            b = momentum_step(&b, &target, &cfg).unwrap();
            assert_eq!(a.positions, b.positions);
        }
    }

    #[test]
    fn run_flow_logs() {
        let target = three_circles_sampler(30, &RngStream::new(1)).unwrap();
        let init = gaussian_init(30, 2, 0.01, &RngStream::new(2)).unwrap();
        let mut cfg = FlowConfig::sliced_default();
        cfg.projections = 10;
        cfg.steps = 0;
        let log = run_flow(&init, &target, &cfg).unwrap();
        assert_eq!(log.snapshots.len(), 1);
        assert_eq!(log.snapshots[0], (0, init.clone()));

        cfg.steps = 25;
        cfg.snapshot_every = 10;
        let log = run_flow(&init, &target, &cfg).unwrap();
        let steps: Vec<usize> = log.energy_series.iter().map(|e| e.0).collect();
        assert_eq!(steps, vec![0, 10, 20, 25]);
        assert_eq!(log, run_flow(&init, &target, &cfg).unwrap());

        cfg.steps = 20;
        let steps: Vec<usize> = run_flow(&init, &target, &cfg).unwrap().snapshots.iter().map(|s| s.0).collect();
        assert_eq!(steps, vec![0, 10, 20]);
    }

    #[test]
    fn divergence_is_reported() {
        let cfg = naive_cfg(1e13, 0.0);
        let err = euler_step(&FlowState::new(p1(&[0.0])), &p1(&[2.0]), &cfg).unwrap_err();
        assert!(matches!(err, Error::FlowDivergence { step: 1, particle: 0, dim: 0, .. }));
    }

    #[test]
    fn config_validation() {
        let mut cfg = FlowConfig::sliced_default();
        assert!(cfg.validate().is_ok());
        cfg.kernel = KernelSpec::Gaussian { sigma_sq: 0.1 };
        assert!(matches!(cfg.validate(), Err(Error::UnsupportedFastPath(_))));
        cfg.gradient_mode = GradientMode::Naive;
        assert!(cfg.validate().is_ok());
        cfg.momentum = 1.0;
        assert!(cfg.validate().is_err());
        assert_eq!(FlowConfig::naive_default(KernelSpec::Gaussian { sigma_sq: 0.1 }).tau, 0.01);
    }

    #[test]
    fn gaussian_kernel_grad_vanishes_on_identical_sets() {
        let x = gaussian_init(10, 3, 1.0, &RngStream::new(3)).unwrap();
        let g = kernel_grad(&KernelSpec::Gaussian { sigma_sq: 0.5 }, &x, &x).unwrap();
        assert!(g.iter().all(|v| v.abs() < 1e-15));
    }
}

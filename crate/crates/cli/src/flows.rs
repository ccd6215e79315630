//! Particle flow runs: a single configured flow and a side-by-side run of
//! several kernels at matching flow times.

use std::collections::BTreeSet;

use riesz_mmd::ndarray::Array2;
use riesz_mmd::{
    flow_gradient, frobenius_norm, gaussian_init, momentum_step, naive_mmd_sq, run_flow, FlowConfig,
    FlowState, KernelSpec, ParticleSet, TrajectoryLog,
};

use crate::config::ExperimentConfig;
use crate::error::CliResult;
use crate::output::{fmt_f64, read_particles, snapshot_header, snapshot_rows, OutputDir, ENERGY_HEADER};
use crate::svg::{Plot, Series};

/// The target sample: read from `target_file` if given, else `m` points on the circles.
pub fn flow_target(cfg: &ExperimentConfig) -> CliResult<ParticleSet> {
    match &cfg.target_file {
        Some(path) => read_particles(path),
        None => Ok(cfg.circles().sample(cfg.m, &cfg.stream().split(1))?),
    }
}

/// `n` points from a narrow centred Gaussian.
pub fn flow_init(cfg: &ExperimentConfig, d: usize) -> CliResult<ParticleSet> {
    Ok(gaussian_init(cfg.n, d, cfg.init_std, &cfg.stream().split(2))?)
}

/// Runs a flow, keeping snapshots only at `snapshot_steps` and energies every
/// `energy_every` steps plus at every snapshot.
pub fn trace_flow(
    init: &ParticleSet,
    target: &ParticleSet,
    config: &FlowConfig,
    snapshot_steps: &BTreeSet<usize>,
    energy_every: usize,
) -> CliResult<TrajectoryLog> {
    let last = snapshot_steps.last().copied().unwrap_or(0);
    let mut log = TrajectoryLog {
        snapshots: Vec::new(),
        energy_series: Vec::new(),
        grad_norm_series: Vec::new(),
        energy_kernel: config.kernel,
    };
    let mut state = FlowState::new(init.clone());
    loop {
        let k = state.step;
        let snap = snapshot_steps.contains(&k);
        if snap || k % energy_every == 0 {
            let grad: Array2<f64> = flow_gradient(&state, target, config)?;
            log.energy_series.push((k, naive_mmd_sq(&state.positions, target, &config.kernel)?));
            log.grad_norm_series.push((k, frobenius_norm(grad.view())));
            if snap {
                log.snapshots.push((k, state.positions.clone()));
            }
        }
        if k >= last {
            return Ok(log);
        }
        state = momentum_step(&state, target, config)?;
    }
}

/// Writes `flow_energy.csv`, one `flow_snapshot_<k>.csv` per snapshot and,
/// optionally, SVG frames and the energy curve.
pub fn write_trajectory(
    out: &OutputDir,
    log: &TrajectoryLog,
    target: &ParticleSet,
    svg: bool,
) -> CliResult<Vec<std::path::PathBuf>> {
    let rows = log
        .energy_series
        .iter()
        .zip(&log.grad_norm_series)
        .map(|(&(k, e), &(_, g))| vec![k.to_string(), fmt_f64(e), fmt_f64(g)]);
    let mut written = vec![out.write_csv("flow_energy.csv", &ENERGY_HEADER, rows)?];
    for (k, points) in &log.snapshots {
        written.push(out.write_csv(
            &format!("flow_snapshot_{k}.csv"),
            &snapshot_header(points.d()),
            snapshot_rows(points),
        )?);
    }
    if svg {
        let xy = |p: &ParticleSet| -> Vec<(f64, f64)> {
            p.points()
                .rows()
                .into_iter()
                .map(|r| (r[0], if r.len() > 1 { r[1] } else { 0.0 }))
                .collect()
        };
        for (k, points) in &log.snapshots {
            let plot = Plot {
                title: format!("{} flow, step {k}", log.energy_kernel),
                x_label: "dim0".into(),
                y_label: "dim1".into(),
                equal_aspect: true,
                series: vec![Series::dots("target", xy(target)), Series::dots("particles", xy(points))],
                ..Plot::default()
            };
            written.push(out.write_text(&format!("flow_snapshot_{k}.svg"), &plot.render())?);
        }
        let plot = Plot {
            title: format!("{} flow energy", log.energy_kernel),
            x_label: "step".into(),
            y_label: "D^2".into(),
            log_y: true,
            series: vec![Series::line("D^2", log.energy_series.iter().map(|&(k, e)| (k as f64, e)).collect())],
            ..Plot::default()
        };
        written.push(out.write_text("flow_energy.svg", &plot.render())?);
    }
    Ok(written)
}

pub fn cmd_flow(cfg: &ExperimentConfig) -> CliResult<String> {
    let out = OutputDir::create(&cfg.out, cfg.force)?;
    let target = flow_target(cfg)?;
    let init = flow_init(cfg, target.d())?;
    let flow = cfg.flow_config_for(cfg.kernel);
    let log = run_flow(&init, &target, &flow)?;
    let written = write_trajectory(&out, &log, &target, cfg.svg)?;
    let mut text: String = written.iter().map(|p| format!("wrote {}\n", p.display())).collect();
    let first = log.energy_series.first().map_or(f64::NAN, |e| e.1);
    text += &format!(
        "{} flow, {} steps: D^2 {:.6e} -> {:.6e}\n",
        flow.kernel,
        flow.steps,
        first,
        log.final_energy().unwrap_or(f64::NAN)
    );
    Ok(text)
}

/// Directory name for a kernel's outputs, e.g. `gaussian_0.05`.
pub fn kernel_dir(k: &KernelSpec) -> String {
    format!("{}_{}", k.family(), k.param())
}

/// Snapshot steps for flow times `times` at step size `tau`.
pub fn steps_for_times(times: &[f64], tau: f64) -> BTreeSet<usize> {
    times
        .iter()
        .map(|&t| if tau > 0.0 { (t / tau).round() as usize } else { 0 })
        .collect()
}

pub fn cmd_compare_kernels(cfg: &ExperimentConfig) -> CliResult<String> {
    let out = OutputDir::create(&cfg.out, cfg.force)?;
    let target = flow_target(cfg)?;
    let init = flow_init(cfg, target.d())?;
    let mut text = String::new();
    let mut curves = Vec::new();
    for kernel in &cfg.kernels {
        let flow = cfg.flow_config_for(*kernel);
        flow.validate()?;
        let steps = steps_for_times(&cfg.times, flow.tau);
        let log = trace_flow(&init, &target, &flow, &steps, cfg.snapshot_every)?;
        let dir = out.subdir(&kernel_dir(kernel))?;
        let written = write_trajectory(&dir, &log, &target, cfg.svg)?;
        text += &format!(
            "{kernel}: tau {}, {} steps, D^2 {:.6e} -> {:.6e}, {} files in {}\n",
            flow.tau,
            steps.last().copied().unwrap_or(0),
            log.energy_series.first().map_or(f64::NAN, |e| e.1),
            log.final_energy().unwrap_or(f64::NAN),
            written.len(),
            dir.root().display()
        );
        curves.push(Series::line(
            kernel.to_string(),
            log.energy_series.iter().map(|&(k, e)| (k as f64 * flow.tau, e)).collect(),
        ));
    }
    if cfg.svg {
        let plot = Plot {
            title: "D^2 to the target against flow time".into(),
            x_label: "time".into(),
            y_label: "D^2 (own kernel)".into(),
            log_y: true,
            series: curves,
            ..Plot::default()
        };
        let path = out.write_text("compare_energy.svg", &plot.render())?;
        text += &format!("wrote {}\n", path.display());
    }
    Ok(text)
}

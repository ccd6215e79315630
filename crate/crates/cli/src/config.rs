//! Experiment configuration: built-in defaults per subcommand, then a flat
//! `key = value` file, then command-line overrides.
//!
//! Keys are the long flag names (`snapshot-every` and `snapshot_every` are the
//! same key). Lists are comma separated; circle centers are `x,y;x,y;...`.
//! Lines starting with `#` are comments.

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use riesz_mmd::{Circles, FlowConfig, GradientMode, KernelSpec, RngStream};

use crate::error::{CliError, CliResult};

/// Seed used when none is given.
pub const DEFAULT_SEED: u64 = 0;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Bench,
    ErrorScaling,
    Flow,
    Bounds,
    CompareKernels,
    Selftest,
}

impl Command {
    pub const ALL: [Command; 6] = [
        Command::Bench,
        Command::ErrorScaling,
        Command::Flow,
        Command::Bounds,
        Command::CompareKernels,
        Command::Selftest,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Command::Bench => "bench",
            Command::ErrorScaling => "error-scaling",
            Command::Flow => "flow",
            Command::Bounds => "bounds",
            Command::CompareKernels => "compare-kernels",
            Command::Selftest => "selftest",
        }
    }
}

impl fmt::Display for Command {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Command {
    type Err = CliError;

    fn from_str(s: &str) -> CliResult<Self> {
        Command::ALL
            .into_iter()
            .find(|c| c.name() == s)
            .ok_or_else(|| CliError::Config(format!("unknown subcommand '{s}'")))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub command: Command,
    /// Source particle count (an upper bound for `bounds`).
    pub n: usize,
    /// Target particle count (an upper bound for `bounds`).
    pub m: usize,
    /// Dimension for single-dimension runs and the P sweep.
    pub d: usize,
    /// Projection count for single-P runs and the d sweep.
    pub p: usize,
    pub projections: Vec<usize>,
    pub dims: Vec<usize>,
    pub kernel: KernelSpec,
    pub kernels: Vec<KernelSpec>,
    /// Step size; `None` picks 1 for Riesz kernels and 0.01 otherwise.
    pub tau: Option<f64>,
    pub momentum: f64,
    pub steps: usize,
    pub seed: u64,
    pub out: PathBuf,
    pub snapshot_every: usize,
    /// Timing samples per benchmark point.
    pub reps: usize,
    pub trials: usize,
    pub instances: usize,
    /// Flow times at which `compare-kernels` keeps snapshots.
    pub times: Vec<f64>,
    pub t_grid: Vec<f64>,
    /// `None` uses sliced gradients for the negative distance kernel, exact ones otherwise.
    pub gradient: Option<GradientMode>,
    pub init_std: f64,
    pub centers: Vec<[f64; 2]>,
    pub radius: f64,
    pub target_file: Option<PathBuf>,
    pub svg: bool,
    pub force: bool,
}

impl ExperimentConfig {
    /// Built-in defaults for `command`.
    pub fn new(command: Command) -> Self {
        let circles = Circles::default();
        let mut cfg = Self {
            command,
            n: 500,
            m: 500,
            d: 2,
            p: 100,
            projections: vec![100],
            dims: vec![2],
            kernel: KernelSpec::ENERGY,
            kernels: vec![
                KernelSpec::Gaussian { sigma_sq: 0.05 },
                KernelSpec::InverseMultiquadric { c: 0.05 },
                KernelSpec::Laplace { sigma: 0.5 },
                KernelSpec::ENERGY,
            ],
            tau: None,
            momentum: 0.7,
            steps: 1000,
            seed: DEFAULT_SEED,
            out: PathBuf::from("out"),
            snapshot_every: 100,
            reps: 5,
            trials: 20,
            instances: 1000,
            times: vec![0.0, 2.0, 10.0, 100.0],
            t_grid: vec![0.05, 0.1, 0.2, 0.5, 1.0, 2.0, 5.0],
            gradient: None,
            init_std: 0.01,
            centers: circles.centers.clone(),
            radius: circles.radius,
            target_file: None,
            svg: false,
            force: false,
        };
        match command {
            Command::Bench => {
                (cfg.n, cfg.m, cfg.d) = (10_000, 10_000, 100);
                cfg.projections = vec![10, 100, 1000];
                cfg.reps = 3;
            }
            Command::ErrorScaling => {
                (cfg.n, cfg.m, cfg.d, cfg.p) = (1000, 1000, 100, 100);
                cfg.projections = vec![10, 32, 100, 316, 1000, 3162];
                cfg.dims = vec![10, 32, 100, 316, 1000];
            }
            Command::Bounds => {
                (cfg.n, cfg.m) = (128, 128);
                cfg.dims = vec![2, 10, 100];
                cfg.projections = vec![1, 10, 100];
                cfg.trials = 200;
            }
            Command::CompareKernels => {
                (cfg.n, cfg.m) = (200, 200);
                cfg.momentum = 0.0;
            }
            Command::Flow | Command::Selftest => {}
        }
        cfg
    }

    /// Defaults, then the optional config file, then `overrides` in order.
    pub fn resolve(command: Command, file: Option<&Path>, overrides: &[(String, String)]) -> CliResult<Self> {
        let mut cfg = Self::new(command);
        if let Some(path) = file {
            let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
            for (key, value) in parse_config_text(&text)? {
                cfg.apply(&key, &value)?;
            }
        }
        for (key, value) in overrides {
            cfg.apply(key, value)?;
        }
        cfg.validate()?;
        Ok(cfg)
    }

    /// Set one key from its text form.
    pub fn apply(&mut self, key: &str, value: &str) -> CliResult<()> {
        let key = key.trim().to_ascii_lowercase().replace('-', "_");
        let v = value.trim();
        match key.as_str() {
            "n" => self.n = parse(&key, v)?,
            "m" => self.m = parse(&key, v)?,
            "d" | "dim" => self.d = parse(&key, v)?,
            "p" => self.p = parse(&key, v)?,
            "projections" => self.projections = parse_list(&key, v)?,
            "dims" => self.dims = parse_list(&key, v)?,
            "kernel" => self.kernel = parse(&key, v)?,
            "kernels" => self.kernels = parse_list(&key, v)?,
            "tau" => self.tau = Some(parse(&key, v)?),
            "momentum" => self.momentum = parse(&key, v)?,
            "steps" => self.steps = parse(&key, v)?,
            "seed" => self.seed = parse(&key, v)?,
            "out" => self.out = PathBuf::from(v),
            "snapshot_every" => self.snapshot_every = parse(&key, v)?,
            "reps" => self.reps = parse(&key, v)?,
            "trials" => self.trials = parse(&key, v)?,
            "instances" => self.instances = parse(&key, v)?,
            "times" => self.times = parse_list(&key, v)?,
            "t_grid" => self.t_grid = parse_list(&key, v)?,
            "gradient" => {
                self.gradient = Some(match v {
                    "sliced" => GradientMode::Sliced,
                    "naive" | "exact" => GradientMode::Naive,
                    _ => return Err(bad(&key, v)),
                })
            }
            "init_std" => self.init_std = parse(&key, v)?,
            "centers" => self.centers = parse_centers(v)?,
            "radius" => self.radius = parse(&key, v)?,
            "target_file" => self.target_file = Some(PathBuf::from(v)),
            "svg" => self.svg = parse_bool(&key, v)?,
            "force" => self.force = parse_bool(&key, v)?,
            _ => return Err(CliError::Config(format!("unknown key '{key}'"))),
        }
        Ok(())
    }

    pub fn validate(&self) -> CliResult<()> {
        let fail = |msg: &str| Err(CliError::Config(msg.to_string()));
        if self.n == 0 || self.m == 0 || self.d == 0 || self.p == 0 {
            return fail("n, m, d and p must be positive");
        }
        if self.projections.is_empty() || self.projections.contains(&0) {
            return fail("projections must be a non-empty list of positive counts");
        }
        if self.dims.is_empty() || self.dims.contains(&0) {
            return fail("dims must be a non-empty list of positive dimensions");
        }
        if self.kernels.is_empty() {
            return fail("kernels must not be empty");
        }
        if self.reps == 0 || self.trials < 2 || self.instances == 0 || self.snapshot_every == 0 {
            return fail("reps, instances and snapshot-every must be positive; trials at least 2");
        }
        if self.times.iter().any(|t| !(t.is_finite() && *t >= 0.0)) {
            return fail("times must be finite and non-negative");
        }
        if self.t_grid.iter().any(|t| !(t.is_finite() && *t > 0.0)) {
            return fail("t-grid values must be positive");
        }
        if !(self.init_std.is_finite() && self.init_std > 0.0) {
            return fail("init-std must be positive");
        }
        if self.command == Command::Flow || self.command == Command::CompareKernels {
            self.circles().validate()?;
        }
        self.flow_config_for(self.kernel).validate()?;
        Ok(())
    }

    pub fn circles(&self) -> Circles {
        Circles {
            centers: self.centers.clone(),
            radius: self.radius,
        }
    }

    /// The root random stream of this run.
    pub fn stream(&self) -> RngStream {
        RngStream::new(self.seed)
    }

    /// Flow settings for `kernel`, honouring the explicit step size and gradient mode if set.
    pub fn flow_config_for(&self, kernel: KernelSpec) -> FlowConfig {
        let base = if kernel.is_energy() && self.gradient != Some(GradientMode::Naive) {
            FlowConfig::sliced_default()
        } else {
            FlowConfig::naive_default(kernel)
        };
        FlowConfig {
            tau: self.tau.unwrap_or(base.tau),
            momentum: self.momentum,
            steps: self.steps,
            projections: self.p,
            kernel,
            gradient_mode: self.gradient.unwrap_or(base.gradient_mode),
            seed: self.stream().split(3),
            snapshot_every: self.snapshot_every,
        }
    }
}

/// `key = value` pairs of a config file, in order.
pub fn parse_config_text(text: &str) -> CliResult<Vec<(String, String)>> {
    let mut out = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| CliError::Config(format!("line {}: expected key = value", lineno + 1)))?;
        out.push((k.trim().to_string(), v.trim().to_string()));
    }
    Ok(out)
}

fn bad(key: &str, value: &str) -> CliError {
    CliError::Config(format!("bad value '{value}' for {key}"))
}

fn parse<T: FromStr>(key: &str, v: &str) -> CliResult<T> {
    v.parse().map_err(|_| bad(key, v))
}

fn parse_list<T: FromStr>(key: &str, v: &str) -> CliResult<Vec<T>> {
    v.split(',').filter(|s| !s.trim().is_empty()).map(|s| parse(key, s.trim())).collect()
}

fn parse_bool(key: &str, v: &str) -> CliResult<bool> {
    match v.to_ascii_lowercase().as_str() {
        "true" | "1" | "yes" | "on" => Ok(true),
        "false" | "0" | "no" | "off" => Ok(false),
        _ => Err(bad(key, v)),
    }
}

fn parse_centers(v: &str) -> CliResult<Vec<[f64; 2]>> {
    v.split(';')
        .filter(|s| !s.trim().is_empty())
        .map(|pair| match parse_list::<f64>("centers", pair)?.as_slice() {
            &[a, b] => Ok([a, b]),
            _ => Err(bad("centers", pair)),
        })
        .collect()
}

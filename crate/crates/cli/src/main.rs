use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use riesz_mmd_cli::{init_threads_from_env, run, Command, ExperimentConfig};

/// Sliced Riesz MMD gradients, particle flows and their verification experiments.
///
/// Settings resolve in order: built-in defaults, the --config file
/// (`key = value` lines using the long flag names), then flags.
/// RIESZ_MMD_THREADS caps the worker threads.
#[derive(Parser)]
#[command(name = "riesz-mmd", version)]
struct Cli {
    #[command(subcommand)]
    command: Sub,
}

#[derive(Subcommand)]
enum Sub {
    /// Time exact vs sliced gradients; writes bench.csv.
    Bench(BenchArgs),
    /// Sliced gradient error vs P and d on mixture data; writes scaling.csv and friends.
    ErrorScaling(ScalingArgs),
    /// Run one particle flow; writes flow_energy.csv and flow_snapshot_<k>.csv.
    Flow(FlowArgs),
    /// Check D^2 <= W1 on random 1D pairs and sliced-gradient tails; writes bounds.csv.
    Bounds(BoundsArgs),
    /// Run flows for several kernels at matching flow times, one directory each.
    CompareKernels(CompareArgs),
    /// Run the small-scale verification suite and print a pass/fail table.
    Selftest(SelftestArgs),
}

#[derive(Args)]
struct Common {
    /// Flat key = value config file.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Root random seed [default: 0].
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory, created if absent.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Overwrite existing output files.
    #[arg(long)]
    force: bool,
    /// Also write SVG plots.
    #[arg(long)]
    svg: bool,
}

#[derive(Args)]
struct BenchArgs {
    #[command(flatten)]
    common: Common,
    /// Source particles [default: 10000].
    #[arg(long)]
    n: Option<usize>,
    /// Target particles [default: 10000].
    #[arg(long)]
    m: Option<usize>,
    /// Dimension [default: 100].
    #[arg(short, long)]
    d: Option<usize>,
    /// Projection counts [default: 10,100,1000].
    #[arg(long, value_delimiter = ',')]
    projections: Option<Vec<usize>>,
    /// Timing samples per point [default: 3].
    #[arg(long)]
    reps: Option<usize>,
}

#[derive(Args)]
struct ScalingArgs {
    #[command(flatten)]
    common: Common,
    /// Source particles [default: 1000].
    #[arg(long)]
    n: Option<usize>,
    /// Target particles [default: 1000].
    #[arg(long)]
    m: Option<usize>,
    /// Dimension of the P sweep [default: 100].
    #[arg(short, long)]
    d: Option<usize>,
    /// Projections of the d sweep [default: 100].
    #[arg(short, long)]
    p: Option<usize>,
    /// P sweep [default: 10,32,100,316,1000,3162].
    #[arg(long, value_delimiter = ',')]
    projections: Option<Vec<usize>>,
    /// d sweep [default: 10,32,100,316,1000].
    #[arg(long, value_delimiter = ',')]
    dims: Option<Vec<usize>>,
    /// Estimator draws per point [default: 20].
    #[arg(long)]
    trials: Option<usize>,
    /// Thresholds for the tail comparison.
    #[arg(long, value_delimiter = ',')]
    t_grid: Option<Vec<f64>>,
}

#[derive(Args)]
struct FlowShape {
    /// Flowing particles [default: 500; 200 for compare-kernels].
    #[arg(long)]
    n: Option<usize>,
    /// Target particles [default: 500; 200 for compare-kernels].
    #[arg(long)]
    m: Option<usize>,
    /// Step size [default: 1 for riesz, 0.01 otherwise].
    #[arg(long)]
    tau: Option<f64>,
    /// Momentum in [0, 1) [default: 0.7; 0 for compare-kernels].
    #[arg(long)]
    momentum: Option<f64>,
    /// Projections per step for sliced gradients [default: 100].
    #[arg(short, long)]
    p: Option<usize>,
    /// Steps between energy records [default: 100].
    #[arg(long)]
    snapshot_every: Option<usize>,
    /// Standard deviation of the initial Gaussian cloud [default: 0.01].
    #[arg(long)]
    init_std: Option<f64>,
    /// Circle centers as x,y;x,y;... [default: 0,0;2.5,0;1.25,2.2].
    #[arg(long)]
    centers: Option<String>,
    /// Circle radius [default: 1].
    #[arg(long)]
    radius: Option<f64>,
    /// Target points in the snapshot CSV schema instead of the circles.
    #[arg(long)]
    target_file: Option<PathBuf>,
}

#[derive(Args)]
struct FlowArgs {
    #[command(flatten)]
    common: Common,
    #[command(flatten)]
    shape: FlowShape,
    /// Kernel as family:param, e.g. riesz:1, gaussian:0.05, imq:0.05, laplace:0.5.
    #[arg(long)]
    kernel: Option<String>,
    /// Steps [default: 1000].
    #[arg(long)]
    steps: Option<usize>,
    /// sliced or naive [default: sliced for riesz:1, naive otherwise].
    #[arg(long)]
    gradient: Option<String>,
}

#[derive(Args)]
struct CompareArgs {
    #[command(flatten)]
    common: Common,
    #[command(flatten)]
    shape: FlowShape,
    /// Kernels [default: gaussian:0.05,imq:0.05,laplace:0.5,riesz:1].
    #[arg(long, value_delimiter = ',')]
    kernels: Option<Vec<String>>,
    /// Flow times with snapshots [default: 0,2,10,100].
    #[arg(long, value_delimiter = ',')]
    times: Option<Vec<f64>>,
}

#[derive(Args)]
struct BoundsArgs {
    #[command(flatten)]
    common: Common,
    /// Largest source size of the 1D pairs [default: 128].
    #[arg(long)]
    n: Option<usize>,
    /// Largest target size of the 1D pairs [default: 128].
    #[arg(long)]
    m: Option<usize>,
    /// Random 1D pairs [default: 1000].
    #[arg(long)]
    instances: Option<usize>,
    /// Dimensions of the tail comparison [default: 2,10,100].
    #[arg(long, value_delimiter = ',')]
    dims: Option<Vec<usize>>,
    /// Projection counts of the tail comparison [default: 1,10,100].
    #[arg(long, value_delimiter = ',')]
    projections: Option<Vec<usize>>,
    /// Estimator draws per tail configuration [default: 200].
    #[arg(long)]
    trials: Option<usize>,
    /// Tail thresholds.
    #[arg(long, value_delimiter = ',')]
    t_grid: Option<Vec<f64>>,
}

#[derive(Args)]
struct SelftestArgs {
    /// Root random seed [default: 0].
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Default)]
struct Overrides(Vec<(String, String)>);

impl Overrides {
    fn one<T: ToString>(&mut self, key: &str, v: &Option<T>) -> &mut Self {
        if let Some(v) = v {
            self.0.push((key.into(), v.to_string()));
        }
        self
    }

    fn list<T: ToString>(&mut self, key: &str, v: &Option<Vec<T>>) -> &mut Self {
        if let Some(v) = v {
            let joined: Vec<String> = v.iter().map(T::to_string).collect();
            self.0.push((key.into(), joined.join(",")));
        }
        self
    }

    fn flag(&mut self, key: &str, on: bool) -> &mut Self {
        if on {
            self.0.push((key.into(), "true".into()));
        }
        self
    }

    fn common(&mut self, c: &Common) -> &mut Self {
        let out = c.out.as_ref().map(|p| p.display().to_string());
        self.one("seed", &c.seed).one("out", &out).flag("force", c.force).flag("svg", c.svg)
    }

    fn shape(&mut self, s: &FlowShape) -> &mut Self {
        let target = s.target_file.as_ref().map(|p| p.display().to_string());
        self.one("n", &s.n)
            .one("m", &s.m)
            .one("tau", &s.tau)
            .one("momentum", &s.momentum)
            .one("p", &s.p)
            .one("snapshot_every", &s.snapshot_every)
            .one("init_std", &s.init_std)
            .one("centers", &s.centers)
            .one("radius", &s.radius)
            .one("target_file", &target)
    }
}

impl Sub {
    fn resolve(&self) -> riesz_mmd_cli::CliResult<ExperimentConfig> {
        let mut o = Overrides::default();
        let (command, config) = match self {
            Sub::Bench(a) => {
                o.common(&a.common).one("n", &a.n).one("m", &a.m).one("d", &a.d);
                o.list("projections", &a.projections).one("reps", &a.reps);
                (Command::Bench, &a.common.config)
            }
            Sub::ErrorScaling(a) => {
                o.common(&a.common).one("n", &a.n).one("m", &a.m).one("d", &a.d).one("p", &a.p);
                o.list("projections", &a.projections).list("dims", &a.dims);
                o.one("trials", &a.trials).list("t_grid", &a.t_grid);
                (Command::ErrorScaling, &a.common.config)
            }
            Sub::Flow(a) => {
                o.common(&a.common).shape(&a.shape);
                o.one("kernel", &a.kernel).one("steps", &a.steps).one("gradient", &a.gradient);
                (Command::Flow, &a.common.config)
            }
            Sub::CompareKernels(a) => {
                o.common(&a.common).shape(&a.shape).list("kernels", &a.kernels).list("times", &a.times);
                (Command::CompareKernels, &a.common.config)
            }
            Sub::Bounds(a) => {
                o.common(&a.common).one("n", &a.n).one("m", &a.m).one("instances", &a.instances);
                o.list("dims", &a.dims).list("projections", &a.projections);
                o.one("trials", &a.trials).list("t_grid", &a.t_grid);
                (Command::Bounds, &a.common.config)
            }
            Sub::Selftest(a) => {
                o.one("seed", &a.seed);
                (Command::Selftest, &None)
            }
        };
        ExperimentConfig::resolve(command, config.as_deref(), &o.0)
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = init_threads_from_env().and_then(|_| cli.command.resolve()).and_then(|cfg| run(&cfg));
    match result {
        Ok(text) => {
            print!("{text}");
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

use std::fs;
use std::path::Path;
use std::process::{Command as Proc, Output};
use std::time::Instant;

use riesz_mmd_cli::bench::run_bench;
use riesz_mmd_cli::output::{
    read_particles, snapshot_header, CsvTable, BENCH_HEADER, BOUNDS_HEADER, BOUNDS_SUMMARY_HEADER, ENERGY_HEADER,
    SCALING_ABS_HEADER, SCALING_HEADER, SLOPES_HEADER, TAILS_HEADER,
};
use riesz_mmd_cli::selftest::{library_grad, run_selftest};
use riesz_mmd_cli::{Command, ExperimentConfig};

fn bin(args: &[&str]) -> Output {
    Proc::new(env!("CARGO_BIN_EXE_riesz-mmd"))
        .args(args)
        .env("RIESZ_MMD_THREADS", "2")
        .output()
        .expect("binary runs")
}

fn ok(args: &[&str]) -> String {
    let out = bin(args);
    assert!(out.status.success(), "{args:?} failed: {}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout).unwrap()
}

fn header(path: &Path) -> Vec<String> {
    CsvTable::read(path).unwrap().header
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn config_file_then_flags() {
    let dir = tempfile::tempdir().unwrap();
    let file = dir.path().join("run.cfg");
    fs::write(&file, "# small flow\nn = 40\nm = 30\nsteps = 7\nkernel = gaussian:0.5\nmomentum=0.2\n").unwrap();
    let overrides = vec![("steps".to_string(), "9".to_string())];
    let cfg = ExperimentConfig::resolve(Command::Flow, Some(&file), &overrides).unwrap();
    assert_eq!((cfg.n, cfg.m, cfg.steps, cfg.momentum), (40, 30, 9, 0.2));
    assert_eq!(cfg.kernel, riesz_mmd::KernelSpec::Gaussian { sigma_sq: 0.5 });

    let out = dir.path().join("o");
    ok(&["flow", "--config", s(&file), "--out", s(&out), "--snapshot-every", "3"]);
    let energy = CsvTable::read(&out.join("flow_energy.csv")).unwrap();
    let steps = energy.floats("step").unwrap();
    assert_eq!(steps, vec![0.0, 3.0, 6.0, 7.0]);
    assert_eq!(read_particles(&out.join("flow_snapshot_7.csv")).unwrap().n(), 40);
}

#[test]
fn bad_config_exits_one() {
    let dir = tempfile::tempdir().unwrap();
    let file = dir.path().join("bad.cfg");
    fs::write(&file, "momentum = 1.5\n").unwrap();
    assert_eq!(bin(&["flow", "--config", s(&file), "--out", s(dir.path())]).status.code(), Some(1));
    fs::write(&file, "no equals sign\n").unwrap();
    assert_eq!(bin(&["flow", "--config", s(&file), "--out", s(dir.path())]).status.code(), Some(1));
    assert_eq!(bin(&["flow", "--kernel", "cauchy:1", "--out", s(dir.path())]).status.code(), Some(1));
}

#[test]
fn zero_steps_keeps_only_initial_state() {
    let dir = tempfile::tempdir().unwrap();
    ok(&["flow", "--steps", "0", "--n", "20", "--m", "20", "--out", s(dir.path())]);
    let mut files: Vec<String> = fs::read_dir(dir.path())
        .unwrap()
        .map(|e| e.unwrap().file_name().into_string().unwrap())
        .collect();
    files.sort();
    assert_eq!(files, ["flow_energy.csv", "flow_snapshot_0.csv"]);
    let energy = CsvTable::read(&dir.path().join("flow_energy.csv")).unwrap();
    assert_eq!(energy.header, ENERGY_HEADER);
    assert_eq!(energy.rows.len(), 1);
}

#[test]
fn existing_outputs_need_force() {
    let dir = tempfile::tempdir().unwrap();
    let args = ["flow", "--steps", "2", "--n", "10", "--m", "10", "--out", s(dir.path())];
    ok(&args);
    let before = fs::read(dir.path().join("flow_energy.csv")).unwrap();
    let out = bin(&args);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("flow_energy.csv"));

    let mut forced = args.to_vec();
    forced.extend(["--force", "--seed", "5"]);
    ok(&forced);
    assert_ne!(fs::read(dir.path().join("flow_energy.csv")).unwrap(), before);
}

#[test]
fn outputs_are_determined_by_the_seed() {
    let dir = tempfile::tempdir().unwrap();
    let run = |name: &str, seed: &str| {
        let out = dir.path().join(name);
        ok(&["flow", "--steps", "20", "--n", "50", "--m", "40", "-p", "8", "--seed", seed, "--out", s(&out)]);
        fs::read(out.join("flow_snapshot_20.csv")).unwrap()
    };
    let a = run("a", "11");
    assert_eq!(a, run("b", "11"));
    assert_ne!(a, run("c", "12"));
}

#[test]
fn snapshot_files_round_trip_as_targets() {
    let dir = tempfile::tempdir().unwrap();
    let first = dir.path().join("first");
    ok(&["flow", "--steps", "0", "--n", "25", "--m", "25", "--out", s(&first)]);
    let target = first.join("flow_snapshot_0.csv");
    assert_eq!(header(&target), snapshot_header(2));

    let second = dir.path().join("second");
    ok(&["flow", "--steps", "3", "--n", "12", "--target-file", s(&target), "--out", s(&second)]);
    let moved = read_particles(&second.join("flow_snapshot_3.csv")).unwrap();
    assert_eq!((moved.n(), moved.d()), (12, 2));
}

#[test]
fn every_csv_schema_matches() {
    let dir = tempfile::tempdir().unwrap();
    let root = dir.path();

    let b = root.join("bench");
    ok(&["bench", "--n", "16", "--m", "16", "-d", "3", "--projections", "4,8", "--reps", "1", "--out", s(&b)]);
    let bench = CsvTable::read(&b.join("bench.csv")).unwrap();
    assert_eq!(bench.header, BENCH_HEADER);
    assert_eq!(bench.rows.iter().map(|r| r[0].as_str()).collect::<Vec<_>>(), ["naive", "sliced", "sliced"]);
    assert!(bench.floats("median_seconds").unwrap().iter().all(|t| *t > 0.0));

    let e = root.join("scaling");
    ok(&[
        "error-scaling", "--n", "30", "--m", "30", "-d", "4", "-p", "8", "--projections", "4,16,64",
        "--dims", "2,8,32", "--trials", "4", "--svg", "--out", s(&e),
    ]);
    let scaling = CsvTable::read(&e.join("scaling.csv")).unwrap();
    assert_eq!(scaling.header, SCALING_HEADER);
    assert_eq!(scaling.rows.len(), 6);
    assert_eq!(header(&e.join("scaling_abs.csv")), SCALING_ABS_HEADER);
    assert_eq!(header(&e.join("scaling_slopes.csv")), SLOPES_HEADER);
    assert_eq!(header(&e.join("tails.csv")), TAILS_HEADER);
    assert!(fs::read_to_string(e.join("scaling_P.svg")).unwrap().starts_with("<svg"));

    let w = root.join("bounds");
    ok(&["bounds", "--instances", "20", "--dims", "2", "--projections", "3", "--trials", "10", "--out", s(&w)]);
    let bounds = CsvTable::read(&w.join("bounds.csv")).unwrap();
    assert_eq!(bounds.header, BOUNDS_HEADER);
    assert_eq!(bounds.rows.len(), 20);
    assert!(bounds.rows.iter().all(|r| r[6] == "true"));
    assert_eq!(header(&w.join("bounds_summary.csv")), BOUNDS_SUMMARY_HEADER);
    assert_eq!(header(&w.join("tails.csv")), TAILS_HEADER);

    let c = root.join("compare");
    ok(&[
        "compare-kernels", "--n", "20", "--m", "20", "--kernels", "gaussian:0.05,riesz:1", "--times", "0,0.05,1",
        "--snapshot-every", "10", "--svg", "--out", s(&c),
    ]);
    for (sub, last) in [("gaussian_0.05", 5), ("riesz_1", 1)] {
        let d = c.join(sub);
        assert_eq!(header(&d.join("flow_energy.csv")), ENERGY_HEADER);
        assert_eq!(header(&d.join(format!("flow_snapshot_{last}.csv"))), snapshot_header(2));
    }
    assert!(c.join("compare_energy.svg").exists());
}

#[test]
fn selftest_passes_and_reports() {
    let text = ok(&["selftest"]);
    assert!(text.contains("sorted-vs-naive-gradient"));
    assert!(!text.contains("FAIL"));
}

#[test]
fn selftest_catches_a_sign_flip() {
    let flipped = |x: &[f64], y: &[f64]| library_grad(x, y).into_iter().map(|g| -g).collect::<Vec<_>>();
    let checks = run_selftest(0, &flipped);
    let failed: Vec<&str> = checks.iter().filter(|c| !c.passed).map(|c| c.name).collect();
    assert!(failed.contains(&"sorted-vs-naive-gradient"), "{failed:?}");
    assert!(failed.contains(&"gradient-descent-direction"), "{failed:?}");
}

#[test]
fn small_bench_is_quick() {
    let mut cfg = ExperimentConfig::new(Command::Bench);
    (cfg.n, cfg.m, cfg.d, cfg.projections, cfg.reps) = (16, 16, 2, vec![10], 3);
    let t = Instant::now();
    let report = run_bench(&cfg).unwrap();
    assert!(t.elapsed().as_secs_f64() < 1.0, "took {:?}", t.elapsed());
    assert_eq!(report.rows.len(), 2);
    assert!(report.speedup(10).unwrap() > 0.0);
}

#[test]
fn flow_energy_trends_down() {
    // default Riesz flow; single stochastic steps may go up, the 100-step
    // moving average falls until it reaches the estimator's noise floor
    let dir = tempfile::tempdir().unwrap();
    ok(&["flow", "--snapshot-every", "10", "--out", s(dir.path())]);
    let energy = CsvTable::read(&dir.path().join("flow_energy.csv")).unwrap().floats("F_d").unwrap();
    assert_eq!(energy.len(), 101);
    let avg: Vec<f64> = energy[1..].windows(10).map(|w| w.iter().sum::<f64>() / 10.0).collect();
    let floor = *avg.last().unwrap();
    assert!(floor < 1e-2 * avg[0], "{:.3e} -> {floor:.3e}", avg[0]);
    let mut lowest = f64::INFINITY;
    for (k, pair) in avg.windows(2).enumerate() {
        if pair[0] > 1.5 * floor {
            assert!(pair[1] < pair[0], "step {}: {:.3e} -> {:.3e}", 10 * (k + 11), pair[0], pair[1]);
        }
        lowest = lowest.min(pair[0]);
        assert!(pair[1] <= 1.1 * lowest, "step {}: {:.3e} above floor {lowest:.3e}", 10 * (k + 11), pair[1]);
    }
}

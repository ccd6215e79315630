//! Wall-clock comparison of the exact and sliced gradients.

use std::hint::black_box;
use std::time::{Duration, Instant};

use riesz_mmd::{gaussian_init, naive_grad, sliced_grad, KernelSpec};

use crate::config::ExperimentConfig;
use crate::error::CliResult;
use crate::output::{fmt_f64, OutputDir, BENCH_HEADER};

/// Shortest sample that the timer is trusted to resolve.
pub const MIN_SAMPLE: Duration = Duration::from_millis(20);

#[derive(Debug, Clone, PartialEq)]
pub struct BenchRow {
    pub mode: &'static str,
    pub n: usize,
    pub m: usize,
    pub d: usize,
    /// Projection count; 0 for the exact gradient.
    pub p: usize,
    /// Total timed calls.
    pub reps: usize,
    pub median_seconds: f64,
}

impl BenchRow {
    fn record(&self) -> Vec<String> {
        vec![
            self.mode.to_string(),
            self.n.to_string(),
            self.m.to_string(),
            self.d.to_string(),
            self.p.to_string(),
            self.reps.to_string(),
            fmt_f64(self.median_seconds),
        ]
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BenchReport {
    pub rows: Vec<BenchRow>,
}

impl BenchReport {
    /// Exact over sliced median time at `p` projections.
    pub fn speedup(&self, p: usize) -> Option<f64> {
        let naive = self.rows.iter().find(|r| r.mode == "naive")?;
        let sliced = self.rows.iter().find(|r| r.mode == "sliced" && r.p == p)?;
        Some(naive.median_seconds / sliced.median_seconds)
    }
}

/// Median seconds per call over `samples` samples, plus the number of calls.
///
/// Calls that are too fast for the timer are batched: each sample runs enough
/// calls to last at least [`MIN_SAMPLE`].
pub fn time_median(samples: usize, mut f: impl FnMut()) -> (f64, usize) {
    let t0 = Instant::now();
    f();
    let first = t0.elapsed();
    let batch = if first >= MIN_SAMPLE {
        1
    } else {
        let per = first.as_secs_f64().max(1e-9);
        ((MIN_SAMPLE.as_secs_f64() / per).ceil() as usize).clamp(1, 1 << 24)
    };
    // a call long enough to time on its own doubles as the first sample
    let reused = usize::from(batch == 1);
    let mut times: Vec<f64> = (reused..samples.max(1))
        .map(|_| {
            let t = Instant::now();
            for _ in 0..batch {
                f();
            }
            t.elapsed().as_secs_f64() / batch as f64
        })
        .collect();
    if reused == 1 {
        times.push(first.as_secs_f64());
    }
    times.sort_by(f64::total_cmp);
    let k = times.len();
    let median = if k % 2 == 1 { times[k / 2] } else { 0.5 * (times[k / 2 - 1] + times[k / 2]) };
    (median, times.len() * batch)
}

pub fn run_bench(cfg: &ExperimentConfig) -> CliResult<BenchReport> {
    let root = cfg.stream();
    let x = gaussian_init(cfg.n, cfg.d, 1.0, &root.split(0))?;
    let y = gaussian_init(cfg.m, cfg.d, 1.0, &root.split(1))?.affine(1.0, 0.5)?;
    let mut rows = Vec::new();

    let (median, reps) = time_median(cfg.reps, || {
        black_box(naive_grad(&x, &y, &KernelSpec::ENERGY).expect("validated inputs"));
    });
    rows.push(BenchRow { mode: "naive", n: cfg.n, m: cfg.m, d: cfg.d, p: 0, reps, median_seconds: median });

    for &p in &cfg.projections {
        let stream = root.split(2).split(p as u64);
        let (median, reps) = time_median(cfg.reps, || {
            black_box(sliced_grad(&x, &y, p, &stream).expect("validated inputs"));
        });
        rows.push(BenchRow { mode: "sliced", n: cfg.n, m: cfg.m, d: cfg.d, p, reps, median_seconds: median });
    }
    Ok(BenchReport { rows })
}

pub fn cmd_bench(cfg: &ExperimentConfig) -> CliResult<String> {
    let out = OutputDir::create(&cfg.out, cfg.force)?;
    let report = run_bench(cfg)?;
    let path = out.write_csv("bench.csv", &BENCH_HEADER, report.rows.iter().map(BenchRow::record))?;
    let mut text = format!("wrote {}\n", path.display());
    for r in &report.rows {
        text += &format!("{:>6} P={:<5} median {:.6e} s over {} calls", r.mode, r.p, r.median_seconds, r.reps);
        if let Some(s) = report.speedup(r.p).filter(|_| r.mode == "sliced") {
            text += &format!("  speedup {s:.1}x");
        }
        text.push('\n');
    }
    Ok(text)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fast_calls_are_batched() {
        let mut calls = 0usize;
        let (median, reps) = time_median(3, || calls += 1);
        assert!(reps > 3, "batched into {reps} calls");
        assert_eq!(calls, reps + 1);
        assert!(median >= 0.0 && median < 1e-3);
    }

    #[test]
    fn slow_calls_are_not_batched() {
        let mut calls = 0usize;
        let (median, reps) = time_median(2, || {
            calls += 1;
            std::thread::sleep(MIN_SAMPLE)
        });
        assert_eq!((reps, calls), (2, 2));
        assert!(median >= MIN_SAMPLE.as_secs_f64());
    }
}

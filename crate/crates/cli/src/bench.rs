//! Partition-count sweep on a synthetic dataset.

use std::fmt::Write as _;
use std::time::Instant;

use hullproj::io::{generate, outside_query, GeneratorKind};
use hullproj::sketch::solve_sketched;
use hullproj::{HullError, SolverConfig};
use serde::Serialize;

/// `x*` must agree across the sweep within this distance.
pub const AGREEMENT_TOL: f64 = 1e-6;

#[derive(Debug, Clone)]
pub struct BenchOptions {
    pub generator: GeneratorKind,
    pub n: usize,
    pub d: usize,
    pub eta_sweep: Vec<usize>,
    pub repeats: usize,
    pub seed: u64,
}

#[derive(Debug, Clone, Serialize)]
pub struct BenchEntry {
    pub eta: usize,
    /// One sample per repeat, in seconds.
    pub wall_time_secs: Vec<f64>,
    pub wall_mean: f64,
    pub wall_min: f64,
    pub wall_max: f64,
    pub outer_iterations: usize,
    pub stage_iterations: Vec<usize>,
    pub cumulative_free_variables: u64,
    pub matvec_count: u64,
    pub stages_run: usize,
    pub converged: bool,
    pub distance: f64,
    /// Distance from the first entry's `x*`.
    pub x_deviation: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct BenchReport {
    pub generator: GeneratorKind,
    pub n: usize,
    pub d: usize,
    pub seed: u64,
    pub repeats: usize,
    pub query: Vec<f64>,
    pub entries: Vec<BenchEntry>,
    pub max_x_deviation: f64,
    pub agreement_tol: f64,
    pub agree: bool,
}

impl BenchReport {
    pub fn all_converged(&self) -> bool {
        self.entries.iter().all(|e| e.converged)
    }

    pub fn table(&self) -> String {
        let mut out = String::new();
        writeln!(
            out,
            "{:?} n={} d={} seed={} repeats={}",
            self.generator, self.n, self.d, self.seed, self.repeats
        )
        .unwrap();
        writeln!(
            out,
            "{:>6} {:>10} {:>10} {:>10} {:>8} {:>12} {:>10} {:>7} {:>8} {:>10}",
            "eta", "mean s", "min s", "max s", "outer", "free vars", "matvecs", "stages", "speedup", "dx"
        )
        .unwrap();
        let base = self.entries.first().map(|e| e.wall_mean).unwrap_or(0.0);
        for e in &self.entries {
            writeln!(
                out,
                "{:>6} {:>10.4} {:>10.4} {:>10.4} {:>8} {:>12} {:>10} {:>7} {:>8.2} {:>10.2e}",
                e.eta,
                e.wall_mean,
                e.wall_min,
                e.wall_max,
                e.outer_iterations,
                e.cumulative_free_variables,
                e.matvec_count,
                e.stages_run,
                base / e.wall_mean.max(f64::MIN_POSITIVE),
                e.x_deviation
            )
            .unwrap();
        }
        let verdict = if self.agree { "agree" } else { "DISAGREE" };
        writeln!(
            out,
            "x* {verdict}: max deviation {:.3e} (tolerance {:.0e})",
            self.max_x_deviation, self.agreement_tol
        )
        .unwrap();
        out
    }
}

/// Runs every partition count `repeats` times, sequentially.
pub fn run_bench(opts: &BenchOptions) -> Result<BenchReport, HullError> {
    if opts.eta_sweep.is_empty() {
        return Err(HullError::InvalidConfig("empty eta sweep".into()));
    }
    let data = generate(opts.generator, opts.n, opts.d, opts.seed)?;
    let q = outside_query(&data, opts.seed);
    let mut entries = Vec::with_capacity(opts.eta_sweep.len());
    let mut reference: Option<Vec<f64>> = None;
    let mut max_dev: f64 = 0.0;
    for &eta in &opts.eta_sweep {
        let cfg = SolverConfig::default().with_eta(eta);
        let mut samples = Vec::with_capacity(opts.repeats);
        let mut last = None;
        for _ in 0..opts.repeats.max(1) {
            let start = Instant::now();
            let sol = solve_sketched(&data, &q, &cfg)?;
            samples.push(start.elapsed().as_secs_f64());
            last = Some(sol);
        }
        let sol = last.expect("at least one repeat");
        let dev = match &reference {
            None => {
                reference = Some(sol.x_star.clone());
                0.0
            }
            Some(r) => r
                .iter()
                .zip(&sol.x_star)
                .map(|(a, b)| (a - b) * (a - b))
                .sum::<f64>()
                .sqrt(),
        };
        max_dev = max_dev.max(dev);
        let mean = samples.iter().sum::<f64>() / samples.len() as f64;
        entries.push(BenchEntry {
            eta,
            wall_mean: mean,
            wall_min: samples.iter().copied().fold(f64::INFINITY, f64::min),
            wall_max: samples.iter().copied().fold(0.0, f64::max),
            wall_time_secs: samples,
            outer_iterations: sol.stats.total_outer_iterations(),
            stage_iterations: sol.stats.outer_iterations.clone(),
            cumulative_free_variables: sol.stats.cumulative_free_variables,
            matvec_count: sol.stats.matvec_count,
            stages_run: sol.stats.stages_run,
            converged: sol.converged,
            distance: sol.distance,
            x_deviation: dev,
        });
    }
    Ok(BenchReport {
        generator: opts.generator,
        n: opts.n,
        d: opts.d,
        seed: opts.seed,
        repeats: opts.repeats,
        query: q.coords().to_vec(),
        entries,
        max_x_deviation: max_dev,
        agreement_tol: AGREEMENT_TOL,
        agree: max_dev <= AGREEMENT_TOL,
    })
}

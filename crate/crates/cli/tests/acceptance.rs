//! Acceptance criteria, one line of output each. Every criterion runs even if
//! an earlier one fails; the test fails at the end if any did.

use std::time::Instant;

use hullproj::dual::{dual_gradient, dual_objective, factorize, solve_dual, DualMultipliers};
use hullproj::gradient_projection::solve_full;
use hullproj::io::{generate, outside_query, GeneratorKind};
use hullproj::oracle::{cross_validate, random_instance, Solver, Tolerances};
use hullproj::sketch::solve_sketched;
use hullproj::{gradient, objective, Dataset, HullSolution, QueryPoint, SolverConfig};
use hullproj_cli::bench::{run_bench, BenchOptions};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp1, StandardNormal};

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

fn gaussian(rng: &mut ChaCha8Rng, n: usize, d: usize) -> Dataset {
    Dataset::new(n, d, (0..n * d).map(|_| StandardNormal.sample(rng)).collect()).unwrap()
}

fn gaussian_vec(rng: &mut ChaCha8Rng, d: usize, scale: f64) -> Vec<f64> {
    (0..d)
        .map(|_| scale * Distribution::<f64>::sample(&StandardNormal, rng))
        .collect()
}

fn oracle_equivalence() -> Outcome {
    let start = Instant::now();
    let instances: Vec<_> = (0..200).map(|k| random_instance(k, 12, 5)).collect();
    let solvers = vec![Solver::sketch(1), Solver::sketch(2), Solver::sketch(4)];
    let report = cross_validate(&instances, &solvers, Tolerances::default())
        .map_err(|d| format!("{d}\n{}", d.replay))?;
    let secs = start.elapsed().as_secs_f64();
    if secs >= 60.0 {
        return Err(format!("took {secs:.1} s"));
    }
    Ok(format!(
        "{} instances x {} solvers, max dx {:.2e}, max ddist {:.2e}, {secs:.2} s",
        report.instances,
        solvers.len(),
        report.max_x_deviation,
        report.max_distance_deviation
    ))
}

fn sketch_exactness() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mut worst: f64 = 0.0;
    for k in 0..20 {
        let data = gaussian(&mut rng, 2000, 50);
        let scale = if k % 2 == 0 { 0.5 } else { 3.0 };
        let q = QueryPoint::new(gaussian_vec(&mut rng, 50, scale)).unwrap();
        let sols: Vec<HullSolution> = [1, 4, 16]
            .iter()
            .map(|&eta| solve_sketched(&data, &q, &SolverConfig::default().with_eta(eta)).unwrap())
            .collect();
        if let Some(s) = sols.iter().find(|s| !s.converged) {
            return Err(format!("instance {k}: not converged, kkt {:?}", s.kkt));
        }
        for a in 0..sols.len() {
            for b in a + 1..sols.len() {
                worst = worst.max(dist(&sols[a].x_star, &sols[b].x_star));
            }
        }
    }
    let secs = start.elapsed().as_secs_f64();
    if worst > 1e-6 {
        return Err(format!("max pairwise dx {worst:.2e}"));
    }
    if secs >= 120.0 {
        return Err(format!("took {secs:.1} s"));
    }
    Ok(format!("20 instances, max pairwise dx {worst:.2e}, {secs:.2} s"))
}

fn square_locality() -> Outcome {
    // 4 corners plus 100 points on each edge
    let data = generate(GeneratorKind::Square, 404, 2, 3).unwrap();
    let q = QueryPoint::new(vec![0.5, 2.0]).unwrap();
    let mut worst_off: f64 = 0.0;
    let mut support = 0;
    for eta in [1, 4, 16] {
        let s = solve_sketched(&data, &q, &SolverConfig::default().with_eta(eta)).unwrap();
        if !s.converged {
            return Err(format!("eta {eta}: not converged"));
        }
        if dist(&s.x_star, &[0.5, 1.0]) > 1e-9 {
            return Err(format!("eta {eta}: x* = {:?}", s.x_star));
        }
        for (i, &w) in s.alpha.weights().iter().enumerate() {
            if data.row(i)[1] != 1.0 {
                worst_off = worst_off.max(w);
            }
        }
        support = support.max(s.support.len());
    }
    if worst_off > 1e-8 {
        return Err(format!("off-edge weight {worst_off:.2e}"));
    }
    Ok(format!("x* = (0.5, 1), max off-edge weight {worst_off:.1e}, support <= {support}"))
}

fn sparsity() -> Outcome {
    let mut sizes = Vec::new();
    let mut over = Vec::new();
    for seed in 0..50u64 {
        let data = generate(GeneratorKind::Gaussian, 10000, 20, seed).unwrap();
        let q = outside_query(&data, 1000 + seed);
        let s = solve_sketched(&data, &q, &SolverConfig::default()).unwrap();
        if !s.converged {
            return Err(format!("seed {seed}: not converged"));
        }
        if s.support.len() > 21 {
            over.push((seed, s.support.len()));
        }
        sizes.push(s.support.len());
    }
    let ok = sizes.len() - over.len();
    let line = format!(
        "{ok}/50 runs with support <= 21 (max {}, mean {:.1}); over: {over:?}",
        sizes.iter().max().unwrap(),
        sizes.iter().sum::<usize>() as f64 / sizes.len() as f64
    );
    if ok * 100 >= 95 * 50 {
        Ok(line)
    } else {
        Err(line)
    }
}

/// KKT residuals recomputed here from the gradient, independent of the solver's report.
fn kkt_ok(s: &HullSolution, data: &Dataset, q: &QueryPoint, cfg: &SolverConfig) -> Result<(), String> {
    let w = s.alpha.weights();
    let g = gradient(w, data, q).map_err(|e| e.to_string())?;
    let support: Vec<usize> = (0..w.len()).filter(|&i| w[i] > cfg.support_tol).collect();
    let lambda = support.iter().map(|&i| g[i]).sum::<f64>() / support.len() as f64;
    let stat = support.iter().map(|&i| (g[i] - lambda).abs()).fold(0.0, f64::max);
    let dual = (0..w.len())
        .filter(|&i| w[i] <= cfg.support_tol)
        .map(|i| (lambda - g[i]).max(0.0))
        .fold(0.0, f64::max);
    let primal = (w.iter().sum::<f64>() - 1.0).abs() + w.iter().fold(0.0f64, |m, &a| m.max(-a));
    let bound = cfg.kkt_tol * (1.0 + g.iter().fold(0.0f64, |m, v| m.max(v.abs())));
    if stat.max(dual).max(primal) > bound {
        return Err(format!("residuals {stat:.2e}/{dual:.2e}/{primal:.2e} > {bound:.2e}"));
    }
    Ok(())
}

fn invariants() -> Outcome {
    let mut solves = 0;
    let mut worst_infeas: f64 = 0.0;
    let mut worst_rise: f64 = 0.0;
    let mut check = |name: &str, s: &HullSolution, data: &Dataset, q: &QueryPoint, cfg: &SolverConfig| {
        if !s.converged {
            return Err(format!("{name}: not converged"));
        }
        kkt_ok(s, data, q, cfg).map_err(|e| format!("{name}: {e}"))?;
        if s.stats.max_infeasibility > cfg.feas_tol {
            return Err(format!("{name}: iterate infeasible by {:.2e}", s.stats.max_infeasibility));
        }
        for w in s.stats.objective_trace.windows(2) {
            worst_rise = worst_rise.max(w[1] - w[0]);
        }
        if worst_rise > 1e-12 {
            return Err(format!("{name}: objective rose by {worst_rise:.2e}"));
        }
        if let Some(&last) = s.stats.objective_trace.last() {
            if (last - s.objective).abs() > 1e-12 * (1.0 + s.objective) {
                return Err(format!("{name}: trace ends at {last}, objective is {}", s.objective));
            }
        }
        worst_infeas = worst_infeas.max(s.stats.max_infeasibility);
        solves += 1;
        Ok(())
    };
    for k in 0..200 {
        let inst = random_instance(k, 12, 5);
        for eta in [1, 2, 4] {
            let cfg = SolverConfig::default().with_eta(eta.min(inst.data.rows()));
            let s = solve_sketched(&inst.data, &inst.q, &cfg).unwrap();
            check(&format!("{} eta {eta}", inst.name), &s, &inst.data, &inst.q, &cfg)?;
        }
    }
    for seed in 0..10u64 {
        for kind in [GeneratorKind::Gaussian, GeneratorKind::Clustered] {
            let data = generate(kind, 3000, 15, seed).unwrap();
            let q = outside_query(&data, seed);
            for eta in [1, 8] {
                let cfg = SolverConfig::default().with_eta(eta);
                let s = solve_sketched(&data, &q, &cfg).unwrap();
                check(&format!("{kind:?} seed {seed} eta {eta}"), &s, &data, &q, &cfg)?;
            }
            let cfg = SolverConfig::default();
            let s = solve_full(&data, &q, &cfg).unwrap();
            check(&format!("{kind:?} seed {seed} full"), &s, &data, &q, &cfg)?;
        }
    }
    Ok(format!(
        "{solves} solves: KKT certified, max iterate infeasibility {worst_infeas:.1e}, max objective rise {worst_rise:.1e}"
    ))
}

fn duality() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let (mut worst_dx, mut worst_gap, mut worst_weak): (f64, f64, f64) = (0.0, 0.0, f64::NEG_INFINITY);
    for k in 0..20 {
        let data = gaussian(&mut rng, 20, 30);
        let q = QueryPoint::new(gaussian_vec(&mut rng, 30, 3.0)).unwrap();
        let cfg = SolverConfig::default();
        let primal = solve_full(&data, &q, &cfg).unwrap();
        let dual = solve_dual(&data, &q, &cfg).unwrap();
        let stats = dual.stats.dual.as_ref().unwrap();
        if !dual.converged || stats.dual_rank_deficient {
            return Err(format!("instance {k}: converged {} rank {}", dual.converged, stats.rank));
        }
        worst_dx = worst_dx.max(dist(&primal.x_star, &dual.x_star));
        worst_gap = worst_gap.max(stats.duality_gap);
        // f* is the smallest primal value, so this covers every feasible α
        for &g in &stats.dual_trace {
            worst_weak = worst_weak.max(g - primal.objective);
        }
    }
    let line = format!("20 instances: max dx {worst_dx:.2e}, max gap {worst_gap:.2e}, max g - f* {worst_weak:.2e}");
    if worst_dx <= 1e-5 && worst_gap <= 1e-6 && worst_weak <= 1e-10 {
        Ok(line)
    } else {
        Err(line)
    }
}

fn gradients() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let h = 1e-6;
    let mut primal_worst: f64 = 0.0;
    for _ in 0..100 {
        let n = rng.random_range(2..=20);
        let d = rng.random_range(1..=8);
        let data = gaussian(&mut rng, n, d);
        let q = QueryPoint::new(gaussian_vec(&mut rng, d, 2.0)).unwrap();
        let raw: Vec<f64> = (0..n).map(|_| Exp1.sample(&mut rng)).collect();
        let total: f64 = raw.iter().sum();
        let alpha: Vec<f64> = raw.iter().map(|v| v / total).collect();
        let g = gradient(&alpha, &data, &q).unwrap();
        for i in 0..n {
            let mut up = alpha.clone();
            let mut down = alpha.clone();
            up[i] += h;
            down[i] -= h;
            let fd = (objective(&up, &data, &q).unwrap() - objective(&down, &data, &q).unwrap()) / (2.0 * h);
            primal_worst = primal_worst.max((fd - g[i]).abs() / g[i].abs().max(1.0));
        }
    }
    let mut dual_worst: f64 = 0.0;
    for _ in 0..100 {
        let n = rng.random_range(2..=12);
        let d = rng.random_range(n..=n + 6);
        let data = gaussian(&mut rng, n, d);
        let q = QueryPoint::new(gaussian_vec(&mut rng, d, 2.0)).unwrap();
        let svd = factorize(&data, None);
        let lam = DualMultipliers {
            lambda1: rng.random_range(0.0..2.0),
            lambda2: (0..n).map(|_| rng.random_range(0.0..2.0)).collect(),
            lambda3: (0..n).map(|_| rng.random_range(0.0..2.0)).collect(),
        };
        let g = dual_gradient(&lam, &svd, &data, &q).unwrap().to_flat();
        let flat = lam.to_flat();
        for k in 0..flat.len() {
            let mut up = flat.clone();
            let mut down = flat.clone();
            up[k] += h;
            down[k] -= h;
            let fu = dual_objective(&DualMultipliers::from_flat(&up), &svd, &data, &q).unwrap();
            let fl = dual_objective(&DualMultipliers::from_flat(&down), &svd, &data, &q).unwrap();
            let fd = (fu - fl) / (2.0 * h);
            dual_worst = dual_worst.max((fd - g[k]).abs() / g[k].abs().max(1.0));
        }
    }
    let line = format!("100 + 100 instances: primal rel err {primal_worst:.2e}, dual rel err {dual_worst:.2e}");
    if primal_worst <= 1e-6 && dual_worst <= 1e-5 {
        Ok(line)
    } else {
        Err(line)
    }
}

fn performance() -> Outcome {
    let report = run_bench(&BenchOptions {
        generator: GeneratorKind::Clustered,
        n: 60000,
        d: 100,
        eta_sweep: vec![1, 16],
        repeats: 1,
        seed: 0,
    })
    .map_err(|e| e.to_string())?;
    eprint!("{}", report.table());
    let costs: Vec<String> = report
        .entries
        .iter()
        .map(|e| {
            format!(
                "eta {}: {:.3} s, {} free vars",
                e.eta, e.wall_mean, e.cumulative_free_variables
            )
        })
        .collect();
    let line = format!("{}; dx {:.2e}", costs.join("; "), report.max_x_deviation);
    if report.agree && report.all_converged() {
        Ok(line)
    } else {
        Err(line)
    }
}

fn interior() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let mut worst_ratio: f64 = 0.0;
    for k in 0..20 {
        let n = rng.random_range(20..=300);
        let d = rng.random_range(2..=6);
        let data = gaussian(&mut rng, n, d);
        // a random convex combination of the rows lies in the hull
        let raw: Vec<f64> = (0..n).map(|_| Exp1.sample(&mut rng)).collect();
        let total: f64 = raw.iter().sum();
        let mut c = vec![0.0; d];
        for (i, w) in raw.iter().enumerate() {
            for (cj, v) in c.iter_mut().zip(data.row(i)) {
                *cj += w / total * v;
            }
        }
        let q = QueryPoint::new(c).unwrap();
        let cfg = SolverConfig::default().with_eta(1 + k % 4);
        let s = solve_sketched(&data, &q, &cfg).unwrap();
        let tol = cfg.interior_tol_for(&data, &q);
        if !(s.interior_flag && s.distance <= tol) {
            return Err(format!("instance {k}: distance {:.2e} > {tol:.2e}", s.distance));
        }
        worst_ratio = worst_ratio.max(s.distance / tol);
    }
    Ok(format!("20 instances, max distance / interiorTol {worst_ratio:.1e}"))
}

fn main() {
    let criteria: [Criterion; 9] = [
        ("1 oracle equivalence", oracle_equivalence),
        ("2 sketch exactness", sketch_exactness),
        ("3 square-edge locality", square_locality),
        ("4 sparsity", sparsity),
        ("5 KKT and feasibility invariants", invariants),
        ("6 duality", duality),
        ("7 gradient validation", gradients),
        ("8 performance report", performance),
        ("9 interior query", interior),
    ];
    let mut failed = Vec::new();
    for (name, run) in criteria {
        match run() {
            Ok(detail) => println!("PASS criterion {name}: {detail}"),
            Err(detail) => {
                println!("FAIL criterion {name}: {detail}");
                failed.push(name);
            }
        }
    }
    if !failed.is_empty() {
        eprintln!("failed criteria: {failed:?}");
        std::process::exit(1);
    }
}

//! Independent reference solvers for small instances, and a harness that
//! compares any set of solvers against them.
//!
//! Neither oracle shares code with the gradient projection or dual solvers;
//! they only use the objective evaluation from [`crate::model`].

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::error::{HullError, Result};
use crate::model::{
    sq_dist, CoefficientVector, Dataset, HullSolution, KktReport, QueryPoint, SolveStats,
    SolverConfig, SolverKind,
};
use crate::simplex::project_onto_simplex;

/// Largest `n` accepted by [`solve_enumerate`].
pub const ENUMERATION_LIMIT: usize = 20;

fn kkt_report(alpha: &[f64], data: &Dataset, q: &QueryPoint, cfg: &SolverConfig) -> Result<KktReport> {
    let g = crate::model::gradient(alpha, data, q)?;
    let support: Vec<usize> = (0..alpha.len()).filter(|&i| alpha[i] > cfg.support_tol).collect();
    if support.is_empty() {
        return Err(HullError::EmptySupport);
    }
    let lambda_hat = support.iter().map(|&i| g[i]).sum::<f64>() / support.len() as f64;
    let stationarity_residual = support.iter().map(|&i| (g[i] - lambda_hat).abs()).fold(0.0, f64::max);
    let dual_feasibility_residual = (0..alpha.len())
        .filter(|&i| alpha[i] <= cfg.support_tol)
        .map(|i| (lambda_hat - g[i]).max(0.0))
        .fold(0.0, f64::max);
    let primal_residual = (alpha.iter().sum::<f64>() - 1.0).abs()
        + alpha.iter().fold(0.0_f64, |m, &a| m.max(-a));
    let bound = cfg.kkt_tol * (1.0 + g.iter().fold(0.0_f64, |m, v| m.max(v.abs())));
    Ok(KktReport {
        lambda_hat,
        stationarity_residual,
        dual_feasibility_residual,
        primal_residual,
        converged: stationarity_residual.max(dual_feasibility_residual).max(primal_residual) <= bound,
    })
}

/// Exhaustive search over supports.
///
/// For each nonempty subset `S` of at most `d + 1` rows, solve
/// `min ½‖q − αD‖²` with `Σ_S α = 1` and `α = 0` off `S` through its KKT
/// system, and keep the best candidate with nonnegative weights. Larger
/// subsets are affinely dependent and never needed: some optimal weight
/// vector has at most `d + 1` affinely independent rows in its support.
pub fn solve_enumerate(data: &Dataset, q: &QueryPoint) -> Result<HullSolution> {
    data.check_query(q)?;
    let n = data.rows();
    if n > ENUMERATION_LIMIT {
        return Err(HullError::TooLarge {
            n,
            limit: ENUMERATION_LIMIT,
        });
    }
    let d = data.dims();
    // rows relative to q; with Σα = 1 the objective is ½‖α(D − q)‖²
    let shifted: Vec<Vec<f64>> = (0..n)
        .map(|i| data.row(i).iter().zip(q.coords()).map(|(a, b)| a - b).collect())
        .collect();
    let gram = DMatrix::from_fn(n, n, |i, j| {
        shifted[i].iter().zip(&shifted[j]).map(|(a, b)| a * b).sum::<f64>()
    });

    let mut best: Option<(f64, Vec<f64>)> = None;
    for mask in 1u32..(1u32 << n) {
        let size = mask.count_ones() as usize;
        if size > d + 1 {
            continue;
        }
        let members: Vec<usize> = (0..n).filter(|&i| mask >> i & 1 == 1).collect();
        let m = members.len();
        let mut kkt = DMatrix::zeros(m + 1, m + 1);
        for (a, &i) in members.iter().enumerate() {
            for (b, &j) in members.iter().enumerate() {
                kkt[(a, b)] = gram[(i, j)];
            }
            kkt[(a, m)] = 1.0;
            kkt[(m, a)] = 1.0;
        }
        let mut rhs = DVector::zeros(m + 1);
        rhs[m] = 1.0;
        let Some(sol) = kkt.clone().full_piv_lu().solve(&rhs) else {
            continue;
        };
        if sol.iter().any(|v| !v.is_finite()) || (&kkt * &sol - &rhs).amax() > 1e-9 {
            continue;
        }
        let weights: Vec<f64> = sol.iter().take(m).copied().collect();
        if weights.iter().any(|&w| w < -1e-12) {
            continue;
        }
        let mut alpha = vec![0.0; n];
        let total: f64 = weights.iter().map(|w| w.max(0.0)).sum();
        for (&i, &w) in members.iter().zip(&weights) {
            alpha[i] = w.max(0.0) / total;
        }
        let f = crate::model::objective(&alpha, data, q)?;
        if best.as_ref().is_none_or(|(bf, _)| f < *bf) {
            best = Some((f, alpha));
        }
    }
    let (_, alpha) = best.ok_or(HullError::Empty("no feasible support found"))?;
    let cfg = SolverConfig::default();
    let kkt = kkt_report(&alpha, data, q, &cfg)?;
    Ok(HullSolution::assemble(
        data,
        q,
        CoefficientVector::from_raw(alpha),
        kkt,
        SolveStats::default(),
        &cfg,
    ))
}

/// `σ₁(D)²`, the Lipschitz constant of `∇f`.
pub fn lipschitz_constant(data: &Dataset) -> f64 {
    let m = DMatrix::from_row_slice(data.rows(), data.dims(), data.as_slice());
    let s = m.singular_values();
    let top = s.iter().copied().fold(0.0, f64::max);
    top * top
}

/// Projected gradient descent from the uniform weights; returns the best iterate.
pub fn solve_pgd(data: &Dataset, q: &QueryPoint, steps: usize, step_size: f64) -> Result<HullSolution> {
    data.check_query(q)?;
    let lip = lipschitz_constant(data);
    if step_size.is_nan() || step_size <= 0.0 || step_size * lip > 1.0 + 1e-12 {
        return Err(HullError::InvalidConfig(format!(
            "step size must lie in (0, 1/L] with L = {lip:e}, got {step_size:e}"
        )));
    }
    let n = data.rows();
    let mut alpha = vec![1.0 / n as f64; n];
    let mut f = crate::model::objective(&alpha, data, q)?;
    let mut best = (f, alpha.clone());
    let mut stats = SolveStats::default();
    stats.objective_trace.push(f);
    for _ in 0..steps {
        let g = crate::model::gradient(&alpha, data, q)?;
        let v: Vec<f64> = alpha.iter().zip(&g).map(|(a, gi)| a - step_size * gi).collect();
        alpha = project_onto_simplex(&v)?.into_inner();
        f = crate::model::objective(&alpha, data, q)?;
        stats.objective_trace.push(f);
        if f < best.0 {
            best = (f, alpha.clone());
        }
    }
    stats.outer_iterations.push(steps);
    let cfg = SolverConfig::default();
    let kkt = kkt_report(&best.1, data, q, &cfg)?;
    Ok(HullSolution::assemble(
        data,
        q,
        CoefficientVector::from_raw(best.1),
        kkt,
        stats,
        &cfg,
    ))
}

/// One instance for cross validation.
#[derive(Debug, Clone, PartialEq)]
pub struct Instance {
    pub name: String,
    pub data: Dataset,
    pub q: QueryPoint,
    pub seed: u64,
}

type SolveFn = dyn Fn(&Dataset, &QueryPoint) -> Result<HullSolution> + Send + Sync;

/// A named solver under test.
pub struct Solver {
    pub name: String,
    run: Box<SolveFn>,
}

impl Solver {
    pub fn new(
        name: impl Into<String>,
        run: impl Fn(&Dataset, &QueryPoint) -> Result<HullSolution> + Send + Sync + 'static,
    ) -> Self {
        Self {
            name: name.into(),
            run: Box::new(run),
        }
    }

    /// The sketch solver with `eta` pieces, clamped to the instance size.
    pub fn sketch(eta: usize) -> Self {
        Self::new(format!("sketch(eta={eta})"), move |d, q| {
            let cfg = SolverConfig::default().with_eta(eta.min(d.rows()));
            crate::sketch::solve_sketched(d, q, &cfg)
        })
    }

    pub fn full() -> Self {
        Self::new("full", |d, q| {
            crate::gradient_projection::solve_full(d, q, &SolverConfig::default())
        })
    }

    pub fn dual() -> Self {
        Self::new("dual", |d, q| {
            crate::dual::solve_dual(d, q, &SolverConfig::default().with_solver(SolverKind::Dual))
        })
    }

    pub fn enumerate() -> Self {
        Self::new("enumerate", solve_enumerate)
    }

    pub fn pgd(steps: usize) -> Self {
        Self::new(format!("pgd({steps})"), move |d, q| {
            solve_pgd(d, q, steps, 1.0 / lipschitz_constant(d))
        })
    }

    pub fn run(&self, data: &Dataset, q: &QueryPoint) -> Result<HullSolution> {
        (self.run)(data, q)
    }
}

/// Agreement thresholds between solvers.
#[derive(Debug, Clone, Copy)]
pub struct Tolerances {
    pub x_star: f64,
    pub distance: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            x_star: 1e-6,
            distance: 1e-8,
        }
    }
}

#[derive(Debug, Clone, Default, Serialize)]
pub struct CrossReport {
    pub instances: usize,
    pub comparisons: usize,
    pub max_x_deviation: f64,
    pub max_distance_deviation: f64,
}

/// The first disagreement found, with the instance serialized for replay.
#[derive(Debug, Clone)]
pub struct Disagreement {
    pub instance: String,
    pub solver: String,
    pub reason: String,
    pub replay: String,
}

impl std::fmt::Display for Disagreement {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{} on {}: {}", self.solver, self.instance, self.reason)
    }
}

/// Runs every solver on every instance and compares `x*` and distance with
/// exhaustive enumeration. Weights are never compared: they are not unique
/// when rows are duplicated or affinely dependent.
pub fn cross_validate(
    instances: &[Instance],
    solvers: &[Solver],
    tol: Tolerances,
) -> std::result::Result<CrossReport, Disagreement> {
    let mut report = CrossReport::default();
    for inst in instances {
        let fail = |solver: &str, reason: String| Disagreement {
            instance: inst.name.clone(),
            solver: solver.to_string(),
            reason,
            replay: crate::io::replay_to_string(&inst.data, &inst.q, inst.seed),
        };
        let reference =
            solve_enumerate(&inst.data, &inst.q).map_err(|e| fail("enumerate", e.to_string()))?;
        for solver in solvers {
            let sol = solver
                .run(&inst.data, &inst.q)
                .map_err(|e| fail(&solver.name, e.to_string()))?;
            let dx = sq_dist(&sol.x_star, &reference.x_star).sqrt();
            let dd = (sol.distance - reference.distance).abs();
            report.comparisons += 1;
            report.max_x_deviation = report.max_x_deviation.max(dx);
            report.max_distance_deviation = report.max_distance_deviation.max(dd);
            if !(dx <= tol.x_star && dd <= tol.distance) {
                return Err(fail(
                    &solver.name,
                    format!("x* off by {dx:e}, distance off by {dd:e}"),
                ));
            }
        }
        report.instances += 1;
    }
    Ok(report)
}

/// Segment, triangle, square, interior query and duplicate rows.
pub fn regression_corpus() -> Vec<Instance> {
    let inst = |name: &str, rows: &[&[f64]], q: &[f64]| Instance {
        name: name.to_string(),
        data: Dataset::from_rows(rows).unwrap(),
        q: QueryPoint::new(q.to_vec()).unwrap(),
        seed: 0,
    };
    vec![
        inst("segment", &[&[0.0, 0.0], &[1.0, 0.0]], &[0.5, 1.0]),
        inst("triangle", &[&[0.0, 0.0], &[2.0, 0.0], &[0.0, 2.0]], &[2.0, 2.0]),
        inst(
            "square",
            &[
                &[0.0, 0.0],
                &[1.0, 0.0],
                &[1.0, 1.0],
                &[0.0, 1.0],
                &[0.5, 0.0],
                &[1.0, 0.5],
                &[0.25, 1.0],
                &[0.75, 1.0],
                &[0.0, 0.5],
            ],
            &[0.5, 2.0],
        ),
        inst(
            "interior-query",
            &[&[0.0, 0.0], &[4.0, 0.0], &[0.0, 4.0], &[4.0, 4.0]],
            &[1.0, 2.0],
        ),
        inst(
            "duplicate-rows",
            &[&[1.0, 1.0], &[1.0, 1.0], &[3.0, 1.0], &[3.0, 1.0], &[2.0, -1.0]],
            &[2.0, 3.0],
        ),
        inst("vertex-query", &[&[0.0, 0.0], &[1.0, 0.0], &[0.0, 1.0]], &[1.0, 0.0]),
    ]
}

/// Random instance with `n ∈ [3, max_n]`, `d ∈ [2, max_d]`; the query is
/// sometimes inside the hull.
pub fn random_instance(seed: u64, max_n: usize, max_d: usize) -> Instance {
    use rand::{Rng, SeedableRng};
    use rand_distr::{Distribution, StandardNormal};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let n = rng.random_range(3..=max_n.max(3));
    let d = rng.random_range(2..=max_d.max(2));
    let rows: Vec<Vec<f64>> = (0..n)
        .map(|_| (0..d).map(|_| Distribution::<f64>::sample(&StandardNormal, &mut rng)).collect())
        .collect();
    let scale = if rng.random_bool(0.2) { 0.3 } else { 3.0 };
    let q: Vec<f64> = (0..d)
        .map(|_| scale * Distribution::<f64>::sample(&StandardNormal, &mut rng))
        .collect();
    Instance {
        name: format!("random-{seed}"),
        data: Dataset::from_rows(&rows).unwrap(),
        q: QueryPoint::new(q).unwrap(),
        seed,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn enumerate_examples() {
        let c = regression_corpus();
        let tri = solve_enumerate(&c[1].data, &c[1].q).unwrap();
        assert_relative_eq!(tri.x_star[0], 1.0, epsilon = 1e-12);
        assert_relative_eq!(tri.x_star[1], 1.0, epsilon = 1e-12);
        assert_relative_eq!(tri.distance, 2f64.sqrt(), epsilon = 1e-12);
        assert_eq!(tri.support, vec![1, 2]);

        let seg = solve_enumerate(&c[0].data, &c[0].q).unwrap();
        assert_relative_eq!(seg.x_star[0], 0.5, epsilon = 1e-12);
        assert_eq!(seg.support, vec![0, 1]);

        let v = solve_enumerate(&c[5].data, &c[5].q).unwrap();
        assert_eq!(v.distance, 0.0);
        assert_eq!(v.x_star, vec![1.0, 0.0]);
    }

    #[test]
    fn enumerate_refuses_large_instances() {
        let rows: Vec<[f64; 1]> = (0..21).map(|i| [i as f64]).collect();
        let d = Dataset::from_rows(&rows).unwrap();
        let q = QueryPoint::new(vec![-1.0]).unwrap();
        assert!(matches!(solve_enumerate(&d, &q), Err(HullError::TooLarge { n: 21, .. })));
    }

    #[test]
    fn enumerate_satisfies_variational_inequality() {
        for seed in 0..30 {
            let inst = random_instance(seed, 10, 4);
            let s = solve_enumerate(&inst.data, &inst.q).unwrap();
            let normal: Vec<f64> = inst.q.coords().iter().zip(&s.x_star).map(|(a, b)| a - b).collect();
            for i in 0..inst.data.rows() {
                let ip: f64 = inst.data.row(i).iter().zip(&s.x_star).zip(&normal)
                    .map(|((y, x), nv)| (y - x) * nv)
                    .sum();
                assert!(ip <= 1e-9, "seed {seed} row {i}: {ip}");
            }
        }
    }

    #[test]
    fn pgd_examples() {
        let c = regression_corpus();
        let seg = &c[0];
        let s = solve_pgd(&seg.data, &seg.q, 1000, 1.0 / lipschitz_constant(&seg.data)).unwrap();
        assert!((s.x_star[0] - 0.5).abs() <= 1e-6 && s.x_star[1].abs() <= 1e-6);

        let tri = &c[1];
        let step = 1.0 / lipschitz_constant(&tri.data);
        let s = solve_pgd(&tri.data, &tri.q, 10_000, step).unwrap();
        let e = solve_enumerate(&tri.data, &tri.q).unwrap();
        assert!(sq_dist(&s.x_star, &e.x_star).sqrt() <= 1e-5);

        assert!(solve_pgd(&tri.data, &tri.q, 10, 2.0 * step).is_err());
    }

    #[test]
    fn pgd_trace_is_monotone() {
        for seed in 0..10 {
            let inst = random_instance(seed, 12, 5);
            let step = 1.0 / lipschitz_constant(&inst.data);
            let s = solve_pgd(&inst.data, &inst.q, 500, step).unwrap();
            for w in s.stats.objective_trace.windows(2) {
                assert!(w[1] <= w[0] + 1e-12);
            }
        }
    }

    #[test]
    fn oracles_agree() {
        for seed in 100..130 {
            let inst = random_instance(seed, 8, 3);
            let e = solve_enumerate(&inst.data, &inst.q).unwrap();
            let step = 1.0 / lipschitz_constant(&inst.data);
            let p = solve_pgd(&inst.data, &inst.q, 20_000, step).unwrap();
            let dx = sq_dist(&e.x_star, &p.x_star).sqrt();
            assert!(dx <= 1e-5, "seed {seed}: {dx}");
        }
    }

    #[test]
    fn corrupted_solver_is_caught_with_replay() {
        let bad = Solver::new("corrupted", |d, q| {
            let mut s = crate::gradient_projection::solve_full(d, q, &SolverConfig::default())?;
            s.x_star[0] += 1e-3;
            Ok(s)
        });
        let err = cross_validate(&regression_corpus(), &[bad], Tolerances::default()).unwrap_err();
        assert_eq!(err.solver, "corrupted");
        let (data, q, _) = crate::io::parse_replay(&err.replay).unwrap();
        assert_eq!(data, regression_corpus()[0].data);
        assert_eq!(q, regression_corpus()[0].q);
    }

    #[test]
    fn corpus_passes_for_primal_solvers() {
        let solvers = [Solver::full(), Solver::sketch(1), Solver::sketch(2), Solver::sketch(4)];
        let report = cross_validate(&regression_corpus(), &solvers, Tolerances::default()).unwrap();
        assert_eq!(report.instances, regression_corpus().len());
    }
}

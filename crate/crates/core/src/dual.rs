//! Lagrange dual of the hull projection problem.
//!
//! With multipliers `λ¹` (unit sum), `λ²` (lower bounds) and `λ³` (upper
//! bounds), the Lagrangian is
//!
//! ```text
//! L(α, λ) = ½‖q − αD‖² − (α·1 − 1)λ¹ − α·λ² − (1 − α)·λ³
//! ```
//!
//! Its minimizer over `α` has the closed form
//! `α^d = qVΣ⁻¹Uᵀ + (λ¹1 + λ² − λ³)ᵀ UΣ⁻²Uᵀ` from the thin SVD `D = UΣVᵀ`,
//! with the inverses taken over the retained singular values only. The dual
//! `g(λ) = L(α^d, λ)` is maximized over `λ ≥ 0` by projected gradient ascent:
//! a Cauchy point along the projected ascent path followed by a conjugate
//! gradient step over the multipliers that are off their bound.

use nalgebra::{DMatrix, DVector};

use crate::error::{HullError, Result};
use crate::model::{
    dot, CoefficientVector, Dataset, DualStats, HullSolution, QueryPoint, SolveStats,
    SolverConfig,
};
use crate::simplex::{is_feasible, project_onto_simplex};

/// `(λ¹, λ², λ³)`, all nonnegative unless `λ¹` is explicitly freed.
#[derive(Debug, Clone, PartialEq)]
pub struct DualMultipliers {
    pub lambda1: f64,
    pub lambda2: Vec<f64>,
    pub lambda3: Vec<f64>,
}

impl DualMultipliers {
    pub fn zeros(n: usize) -> Self {
        Self {
            lambda1: 0.0,
            lambda2: vec![0.0; n],
            lambda3: vec![0.0; n],
        }
    }

    pub fn len(&self) -> usize {
        self.lambda2.len()
    }

    pub fn is_empty(&self) -> bool {
        self.lambda2.is_empty()
    }

    /// Packed as `[λ¹, λ²…, λ³…]`.
    pub fn to_flat(&self) -> Vec<f64> {
        let mut v = Vec::with_capacity(2 * self.len() + 1);
        v.push(self.lambda1);
        v.extend_from_slice(&self.lambda2);
        v.extend_from_slice(&self.lambda3);
        v
    }

    pub fn from_flat(v: &[f64]) -> Self {
        let n = (v.len() - 1) / 2;
        Self {
            lambda1: v[0],
            lambda2: v[1..=n].to_vec(),
            lambda3: v[n + 1..].to_vec(),
        }
    }

    /// `λ¹1 + λ² − λ³`
    fn combined(&self) -> Vec<f64> {
        self.lambda2
            .iter()
            .zip(&self.lambda3)
            .map(|(a, b)| self.lambda1 + a - b)
            .collect()
    }
}

/// Thin SVD truncated to the singular values above `rank_tol`.
#[derive(Debug, Clone)]
pub struct SvdFactors {
    /// `n × r`
    pub u: DMatrix<f64>,
    /// Descending, all above the rank tolerance.
    pub singular_values: Vec<f64>,
    /// `d × r`
    pub v: DMatrix<f64>,
    pub rank: usize,
    pub rank_tol: f64,
}

impl SvdFactors {
    pub fn rows(&self) -> usize {
        self.u.nrows()
    }

    /// `‖D − UΣVᵀ‖_F`
    pub fn reconstruction_error(&self, data: &Dataset) -> f64 {
        let d = DMatrix::from_row_slice(data.rows(), data.dims(), data.as_slice());
        let sigma = DMatrix::from_diagonal(&DVector::from_vec(self.singular_values.clone()));
        (d - &self.u * sigma * self.v.transpose()).norm()
    }

    /// `UΣ⁻²Uᵀ w`, the action of `(DDᵀ)⁺`.
    fn apply_inverse_gram(&self, w: &[f64]) -> Vec<f64> {
        let mut c = self.u.tr_mul(&DVector::from_column_slice(w));
        for (ck, s) in c.iter_mut().zip(&self.singular_values) {
            *ck /= s * s;
        }
        (&self.u * c).iter().copied().collect()
    }

    /// `wᵀ(DDᵀ)⁺w = ‖Σ⁻¹Uᵀw‖²`
    fn inverse_gram_norm(&self, w: &[f64]) -> f64 {
        let c = self.u.tr_mul(&DVector::from_column_slice(w));
        c.iter()
            .zip(&self.singular_values)
            .map(|(ck, s)| (ck / s) * (ck / s))
            .sum()
    }
}

/// Thin SVD of `D`. `rank_tol` defaults to `max(n, d) · ε · σ₁`.
pub fn factorize(data: &Dataset, rank_tol: Option<f64>) -> SvdFactors {
    let (n, d) = (data.rows(), data.dims());
    let m = DMatrix::from_row_slice(n, d, data.as_slice());
    let svd = m.svd(true, true);
    let u = svd.u.expect("requested U");
    let v_t = svd.v_t.expect("requested Vᵀ");
    let sigma1 = svd.singular_values.iter().copied().fold(0.0, f64::max);
    let tol = rank_tol.unwrap_or(n.max(d) as f64 * f64::EPSILON * sigma1);
    let mut keep: Vec<usize> = (0..svd.singular_values.len())
        .filter(|&k| svd.singular_values[k] > tol)
        .collect();
    keep.sort_by(|&a, &b| svd.singular_values[b].total_cmp(&svd.singular_values[a]));
    let r = keep.len();
    let u_r = DMatrix::from_fn(n, r, |i, k| u[(i, keep[k])]);
    let v_r = DMatrix::from_fn(d, r, |j, k| v_t[(keep[k], j)]);
    SvdFactors {
        u: u_r,
        singular_values: keep.iter().map(|&k| svd.singular_values[k]).collect(),
        v: v_r,
        rank: r,
        rank_tol: tol,
    }
}

fn check_dims(lambda: &DualMultipliers, svd: &SvdFactors, q: &QueryPoint) -> Result<()> {
    if svd.rank == 0 {
        return Err(HullError::ZeroRank);
    }
    if lambda.lambda2.len() != svd.rows() || lambda.lambda3.len() != svd.rows() {
        return Err(HullError::DimensionMismatch {
            expected: svd.rows(),
            got: lambda.lambda2.len().min(lambda.lambda3.len()),
        });
    }
    if q.dim() != svd.v.nrows() {
        return Err(HullError::DimensionMismatch {
            expected: svd.v.nrows(),
            got: q.dim(),
        });
    }
    Ok(())
}

/// Stationary point of `L(·, λ)`:
/// `α^d = qVΣ⁻¹Uᵀ + (λ¹1 + λ² − λ³)ᵀUΣ⁻²Uᵀ`.
pub fn recover_alpha(lambda: &DualMultipliers, svd: &SvdFactors, q: &QueryPoint) -> Result<Vec<f64>> {
    check_dims(lambda, svd, q)?;
    let w = DVector::from_vec(lambda.combined());
    let mut c = svd.v.tr_mul(&DVector::from_column_slice(q.coords()));
    let b = svd.u.tr_mul(&w);
    for k in 0..svd.rank {
        let s = svd.singular_values[k];
        c[k] = c[k] / s + b[k] / (s * s);
    }
    Ok((&svd.u * c).iter().copied().collect())
}

fn lagrangian(alpha: &[f64], lambda: &DualMultipliers, data: &Dataset, q: &QueryPoint) -> f64 {
    let x = data.view().combine(alpha);
    let fit = 0.5 * crate::model::sq_dist(&x, q.coords());
    let sum: f64 = alpha.iter().sum();
    let lower = dot(alpha, &lambda.lambda2);
    let upper: f64 = alpha.iter().zip(&lambda.lambda3).map(|(a, l)| (1.0 - a) * l).sum();
    fit - (sum - 1.0) * lambda.lambda1 - lower - upper
}

/// `g(λ) = L(α^d(λ), λ)`
pub fn dual_objective(
    lambda: &DualMultipliers,
    svd: &SvdFactors,
    data: &Dataset,
    q: &QueryPoint,
) -> Result<f64> {
    let alpha = recover_alpha(lambda, svd, q)?;
    Ok(lagrangian(&alpha, lambda, data, q))
}

/// `∇g = (1 − Σα^d, −α^d, α^d − 1)`, by the envelope property.
pub fn dual_gradient(
    lambda: &DualMultipliers,
    svd: &SvdFactors,
    data: &Dataset,
    q: &QueryPoint,
) -> Result<DualMultipliers> {
    data.check_query(q)?;
    let alpha = recover_alpha(lambda, svd, q)?;
    Ok(gradient_from_alpha(&alpha))
}

fn gradient_from_alpha(alpha: &[f64]) -> DualMultipliers {
    DualMultipliers {
        lambda1: 1.0 - alpha.iter().sum::<f64>(),
        lambda2: alpha.iter().map(|a| -a).collect(),
        lambda3: alpha.iter().map(|a| a - 1.0).collect(),
    }
}

/// The dual problem on a fixed (possibly translated) dataset.
struct DualProblem<'a> {
    data: &'a Dataset,
    q: &'a QueryPoint,
    svd: SvdFactors,
    free_lambda1: bool,
}

impl DualProblem<'_> {
    fn alpha(&self, lam: &[f64]) -> Vec<f64> {
        recover_alpha(&DualMultipliers::from_flat(lam), &self.svd, self.q).expect("checked dims")
    }

    fn value(&self, lam: &[f64]) -> f64 {
        let m = DualMultipliers::from_flat(lam);
        lagrangian(&self.alpha(lam), &m, self.data, self.q)
    }

    fn grad(&self, lam: &[f64]) -> Vec<f64> {
        gradient_from_alpha(&self.alpha(lam)).to_flat()
    }

    fn bounded(&self, k: usize) -> bool {
        k != 0 || !self.free_lambda1
    }

    /// Curvature `pᵀ(−∇²g)p = ‖Σ⁻¹Uᵀ(p¹1 + p² − p³)‖²`.
    fn curvature(&self, p: &[f64]) -> f64 {
        let w = DualMultipliers::from_flat(p).combined();
        self.svd.inverse_gram_norm(&w)
    }

    /// Hessian action `(−∇²g)p = Aᵀ(DDᵀ)⁺Ap` with `A = [1, I, −I]`.
    fn hess(&self, p: &[f64]) -> Vec<f64> {
        let w = DualMultipliers::from_flat(p).combined();
        let m = self.svd.apply_inverse_gram(&w);
        let mut out = Vec::with_capacity(p.len());
        out.push(m.iter().sum());
        out.extend(m.iter().copied());
        out.extend(m.iter().map(|v| -v));
        out
    }

    /// `g(to) − g(from)` from the quadratic model. Differencing two values of
    /// `g` loses everything below `ε|g|`, which stalls the final steps.
    fn increase(&self, from: &[f64], to: &[f64]) -> f64 {
        let step: Vec<f64> = to.iter().zip(from).map(|(a, b)| a - b).collect();
        dot(&self.grad(from), &step) - 0.5 * self.curvature(&step)
    }

    /// Maximizer along the projected ascent path `P(λ + t∇g)`.
    fn cauchy(&self, lam: &mut [f64], grad0: &[f64]) {
        let mut p: Vec<f64> = grad0
            .iter()
            .enumerate()
            .map(|(k, &gk)| {
                if self.bounded(k) && lam[k] <= 0.0 && gk < 0.0 {
                    0.0
                } else {
                    gk
                }
            })
            .collect();
        for _ in 0..=lam.len() {
            if p.iter().all(|&v| v == 0.0) {
                break;
            }
            let slope = dot(&self.grad(lam), &p);
            if slope <= 0.0 {
                break;
            }
            let curv = self.curvature(&p);
            let mut t_break = f64::INFINITY;
            let mut hits = Vec::new();
            for (k, &pk) in p.iter().enumerate() {
                if self.bounded(k) && pk < 0.0 {
                    let t = lam[k].max(0.0) / -pk;
                    if t < t_break {
                        t_break = t;
                        hits.clear();
                        hits.push(k);
                    } else if t == t_break {
                        hits.push(k);
                    }
                }
            }
            let t_star = if curv > 0.0 { slope / curv } else { f64::INFINITY };
            if t_star < t_break {
                for (l, pk) in lam.iter_mut().zip(&p) {
                    *l += t_star * pk;
                }
                break;
            }
            if !t_break.is_finite() {
                break;
            }
            for (l, pk) in lam.iter_mut().zip(&p) {
                *l += t_break * pk;
            }
            for k in hits {
                lam[k] = 0.0;
                p[k] = 0.0;
            }
        }
        for (k, l) in lam.iter_mut().enumerate() {
            if self.bounded(k) && *l < 0.0 {
                *l = 0.0;
            }
        }
    }

    /// Conjugate gradient ascent over multipliers off their bound, then a
    /// ratio test. Accepted only on strict increase of `g`.
    fn subspace(&self, lam: &mut [f64]) -> bool {
        let free: Vec<usize> = (0..lam.len())
            .filter(|&k| !self.bounded(k) || lam[k] > 0.0)
            .collect();
        if free.is_empty() {
            return false;
        }
        let total = lam.len();
        let embed = |v: &[f64]| {
            let mut full = vec![0.0; total];
            for (&k, &x) in free.iter().zip(v) {
                full[k] = x;
            }
            full
        };
        let grad = self.grad(lam);
        let mut res: Vec<f64> = free.iter().map(|&k| grad[k]).collect();
        let mut rr = dot(&res, &res);
        if rr == 0.0 {
            return false;
        }
        let stop = 1e-14 * rr.sqrt();
        let mut delta = vec![0.0; free.len()];
        let mut dir = res.clone();
        for _ in 0..free.len() + 1 {
            let dir_full = embed(&dir);
            let curv = self.curvature(&dir_full);
            if curv <= 1e-14 * dot(&dir, &dir) {
                // g is linear and increasing along dir
                let t = free
                    .iter()
                    .zip(&dir)
                    .zip(&delta)
                    .filter(|((&k, &dk), _)| self.bounded(k) && dk < 0.0)
                    .map(|((&k, &dk), &del)| (lam[k] + del).max(0.0) / -dk)
                    .fold(f64::INFINITY, f64::min);
                if t.is_finite() {
                    for (del, dk) in delta.iter_mut().zip(&dir) {
                        *del += t * dk;
                    }
                }
                break;
            }
            let step = rr / curv;
            let h = self.hess(&dir_full);
            for (i, &k) in free.iter().enumerate() {
                delta[i] += step * dir[i];
                res[i] -= step * h[k];
            }
            let rr_next = dot(&res, &res);
            if rr_next.sqrt() <= stop {
                break;
            }
            let beta = rr_next / rr;
            rr = rr_next;
            for (dk, rk) in dir.iter_mut().zip(&res) {
                *dk = rk + beta * *dk;
            }
        }

        let mut t = 1.0_f64;
        let mut blocking = Vec::new();
        for (i, &k) in free.iter().enumerate() {
            if self.bounded(k) && delta[i] < 0.0 {
                let tk = lam[k] / -delta[i];
                if tk < t {
                    t = tk;
                    blocking.clear();
                    blocking.push(k);
                } else if tk == t {
                    blocking.push(k);
                }
            }
        }
        if t <= 0.0 {
            return false;
        }
        let mut trial = lam.to_vec();
        for (i, &k) in free.iter().enumerate() {
            trial[k] = lam[k] + t * delta[i];
            if self.bounded(k) && trial[k] < 0.0 {
                trial[k] = 0.0;
            }
        }
        if t < 1.0 {
            for k in blocking {
                trial[k] = 0.0;
            }
        }
        if self.increase(lam, &trial) > 0.0 {
            lam.copy_from_slice(&trial);
            true
        } else {
            false
        }
    }
}

/// Projected gradient ascent on the dual, reported in primal terms.
///
/// When `cfg.dual_center` is set (the default) the problem is translated so
/// the query sits at the origin; `x*` is unchanged and the optimal unit-sum
/// multiplier becomes `‖q − x*‖² ≥ 0`, which the sign constraint on `λ¹`
/// requires.
pub fn solve_dual(data: &Dataset, q: &QueryPoint, cfg: &SolverConfig) -> Result<HullSolution> {
    cfg.validate()?;
    data.check_query(q)?;
    let n = data.rows();
    let (work_data, work_q) = if cfg.dual_center {
        let shifted: Vec<f64> = data
            .as_slice()
            .chunks_exact(data.dims())
            .flat_map(|row| row.iter().zip(q.coords()).map(|(a, b)| a - b))
            .collect();
        (
            Dataset::new(n, data.dims(), shifted)?,
            QueryPoint::new(vec![0.0; data.dims()])?,
        )
    } else {
        (data.clone(), q.clone())
    };
    let start = std::time::Instant::now();
    let svd = factorize(&work_data, None);
    if svd.rank == 0 {
        return Err(HullError::ZeroRank);
    }
    let problem = DualProblem {
        data: &work_data,
        q: &work_q,
        svd,
        free_lambda1: cfg.free_lambda1,
    };

    let mut lam = vec![0.0; 2 * n + 1];
    let mut dual_stats = DualStats {
        rank: problem.svd.rank,
        dual_rank_deficient: problem.svd.rank < n,
        ..DualStats::default()
    };
    let mut converged = false;
    let mut g_val = problem.value(&lam);
    dual_stats.dual_trace.push(g_val);
    let mut gap;
    let mut iterations = 0;
    loop {
        let alpha = problem.alpha(&lam);
        let clamped = project_onto_simplex(&alpha)?;
        let f = crate::model::objective(clamped.weights(), &work_data, &work_q)?;
        gap = f - g_val;
        if is_feasible(&alpha, cfg.feas_tol) && gap <= cfg.kkt_tol * (1.0 + f.abs()) {
            converged = true;
            break;
        }
        if iterations >= cfg.dual_max_iters {
            break;
        }
        let before = lam.clone();
        let grad = problem.grad(&lam);
        problem.cauchy(&mut lam, &grad);
        if problem.increase(&before, &lam) < 0.0 {
            lam.copy_from_slice(&before);
        }
        problem.subspace(&mut lam);
        iterations += 1;
        let next = problem.value(&lam);
        if cfg.debug_checks {
            let slack = 1e-12 * (1.0 + g_val.abs());
            debug_assert!(next >= g_val - slack, "dual objective decreased: {g_val} -> {next}");
        }
        if lam == before {
            break;
        }
        g_val = next;
        dual_stats.dual_trace.push(g_val);
    }

    let raw_alpha = problem.alpha(&lam);
    let alpha = project_onto_simplex(&raw_alpha)?;
    dual_stats.iterations = iterations;
    dual_stats.raw_alpha = raw_alpha;
    dual_stats.dual_objective = g_val;
    dual_stats.duality_gap = gap;
    dual_stats.lambda1 = lam[0];

    let kkt = crate::gradient_projection::kkt_check(&alpha, data, q, cfg)?;
    let stats = SolveStats {
        outer_iterations: vec![iterations],
        wall_time: vec![start.elapsed().as_secs_f64()],
        stages_run: 1,
        dual: Some(dual_stats),
        ..SolveStats::default()
    };
    // With r < n the closed form minimizes L only over the range of U, so
    // g is no longer a lower bound and the gap test alone proves nothing.
    let converged = converged && (problem.svd.rank == n || kkt.converged);
    let mut sol = HullSolution::assemble(
        data,
        q,
        CoefficientVector::from_raw(alpha.into_inner()),
        kkt,
        stats,
        cfg,
    );
    sol.converged = converged;
    Ok(sol)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn eye() -> (Dataset, QueryPoint) {
        (
            Dataset::from_rows(&[[1.0, 0.0], [0.0, 1.0]]).unwrap(),
            QueryPoint::new(vec![2.0, 0.0]).unwrap(),
        )
    }

    #[test]
    fn factorize_examples() {
        let (d, _) = eye();
        let s = factorize(&d, None);
        assert_eq!(s.rank, 2);
        assert_eq!(s.singular_values, vec![1.0, 1.0]);
        assert!(s.reconstruction_error(&d) <= 1e-15);

        let dup = Dataset::from_rows(&[[1.0, 2.0], [1.0, 2.0]]).unwrap();
        assert_eq!(factorize(&dup, None).rank, 1);

        let r = Dataset::from_rows(&[
            [0.3, -1.2, 0.5],
            [2.0, 0.1, -0.7],
            [-0.4, 0.9, 1.1],
            [1.5, 1.5, 0.2],
            [-2.2, 0.3, 0.8],
        ])
        .unwrap();
        let s = factorize(&r, None);
        assert!(s.rank <= 3);
        let fro = DMatrix::from_row_slice(5, 3, r.as_slice()).norm();
        assert!(s.reconstruction_error(&r) <= 1e-10 * fro);
        assert!(s.singular_values.windows(2).all(|w| w[0] >= w[1]));
    }

    #[test]
    fn recover_examples() {
        let (d, q) = eye();
        let s = factorize(&d, None);
        let a = recover_alpha(&DualMultipliers::zeros(2), &s, &q).unwrap();
        assert_relative_eq!(a[0], 2.0, epsilon = 1e-15);
        assert_relative_eq!(a[1], 0.0, epsilon = 1e-15);

        let zero = Dataset::from_rows(&[[0.0, 0.0], [0.0, 0.0]]).unwrap();
        let zs = factorize(&zero, None);
        assert_eq!(recover_alpha(&DualMultipliers::zeros(2), &zs, &q), Err(HullError::ZeroRank));
    }

    #[test]
    fn recover_row_space_component() {
        let d = Dataset::from_rows(&[[1.0, 0.0, 0.0], [1.0, 1.0, 0.0]]).unwrap();
        let q = QueryPoint::new(vec![3.0, -1.0, 5.0]).unwrap();
        let s = factorize(&d, None);
        let a = recover_alpha(&DualMultipliers::zeros(2), &s, &q).unwrap();
        let x = d.view().combine(&a);
        let resid = DVector::from_iterator(3, x.iter().zip(q.coords()).map(|(a, b)| a - b));
        assert!(s.v.tr_mul(&resid).norm() <= 1e-10);
    }

    #[test]
    fn dual_examples() {
        let (d, q) = eye();
        let s = factorize(&d, None);
        let lam = DualMultipliers::zeros(2);
        assert_eq!(dual_objective(&lam, &s, &d, &q).unwrap(), 0.0);
        let g = dual_gradient(&lam, &s, &d, &q).unwrap();
        assert_relative_eq!(g.lambda1, -1.0, epsilon = 1e-15);
        assert_eq!(g.lambda2, vec![-2.0, 0.0]);
        assert_eq!(g.lambda3, vec![1.0, -1.0]);
    }

    #[test]
    fn dual_matches_inf_over_grid() {
        // λ² = λ³, λ¹ = 0 on D = I: the bound terms reduce to −Σλ³.
        let (d, q) = eye();
        let s = factorize(&d, None);
        let lam = DualMultipliers {
            lambda1: 0.0,
            lambda2: vec![0.7, 0.2],
            lambda3: vec![0.7, 0.2],
        };
        let g = dual_objective(&lam, &s, &d, &q).unwrap();
        assert_relative_eq!(g, -0.9, epsilon = 1e-14);
        let mut best = f64::INFINITY;
        let steps = 800;
        for i in 0..=steps {
            for j in 0..=steps {
                let a = [-1.0 + 4.0 * i as f64 / steps as f64, -2.0 + 4.0 * j as f64 / steps as f64];
                best = best.min(lagrangian(&a, &lam, &d, &q));
            }
        }
        assert!((best - g).abs() <= 1e-12, "{best} vs {g}");
    }

    #[test]
    fn solve_eye() {
        let (d, q) = eye();
        let s = solve_dual(&d, &q, &SolverConfig::default()).unwrap();
        assert!(s.converged);
        assert_relative_eq!(s.x_star[0], 1.0, epsilon = 1e-9);
        assert_relative_eq!(s.x_star[1], 0.0, epsilon = 1e-9);
        assert_relative_eq!(s.objective, 0.5, epsilon = 1e-9);
        let ds = s.stats.dual.unwrap();
        assert!(ds.duality_gap <= 1e-6);
        assert!(!ds.dual_rank_deficient);
    }

    #[test]
    fn uncentered_with_free_multiplier_also_solves() {
        let (d, q) = eye();
        let cfg = SolverConfig {
            dual_center: false,
            free_lambda1: true,
            ..SolverConfig::default()
        };
        let s = solve_dual(&d, &q, &cfg).unwrap();
        assert!(s.converged);
        assert_relative_eq!(s.x_star[0], 1.0, epsilon = 1e-9);
    }

    #[test]
    fn rank_deficient_is_flagged() {
        let rows: Vec<[f64; 2]> = (0..8)
            .map(|i| {
                let t = i as f64 * 0.8;
                [t.cos(), t.sin()]
            })
            .collect();
        let d = Dataset::from_rows(&rows).unwrap();
        let q = QueryPoint::new(vec![3.0, 0.5]).unwrap();
        let s = solve_dual(&d, &q, &SolverConfig::default()).unwrap();
        let ds = s.stats.dual.as_ref().unwrap();
        assert!(ds.dual_rank_deficient);
        assert_eq!(ds.rank, 2);
        if s.converged {
            let p = crate::gradient_projection::solve_full(&d, &q, &SolverConfig::default()).unwrap();
            let dx = crate::model::sq_dist(&s.x_star, &p.x_star).sqrt();
            assert!(dx <= 1e-4, "{dx}");
        }
    }
}

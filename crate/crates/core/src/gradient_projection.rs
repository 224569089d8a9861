//! Gradient projection on the simplex.
//!
//! Each outer iteration finds the Cauchy point, i.e. the exact minimizer of
//! `f` along the projected-gradient path, then takes an inexact
//! conjugate-gradient step in the subspace of positive weights. Both phases
//! are accepted only when they do not increase `f`, so the objective trace is
//! monotone by construction.

use std::time::Instant;

use crate::error::{HullError, Result};
use crate::model::{
    axpy, dot, infeasible, sq_dist, CoefficientVector, Dataset, HullSolution, KktReport,
    QueryPoint, RowView, SolveStats, SolverConfig,
};
use crate::simplex::{infeasibility, is_feasible};

/// Result of a solve over a row view, before it is mapped back to dataset rows.
#[derive(Debug, Clone)]
pub(crate) struct ViewSolve {
    pub alpha: Vec<f64>,
    pub kkt: KktReport,
    pub iterations: usize,
}

pub(crate) struct Engine<'a, 's> {
    view: RowView<'a>,
    q: &'a [f64],
    stats: &'s mut SolveStats,
}

impl<'a, 's> Engine<'a, 's> {
    pub(crate) fn new(view: RowView<'a>, q: &'a QueryPoint, stats: &'s mut SolveStats) -> Self {
        Self {
            view,
            q: q.coords(),
            stats,
        }
    }

    fn residual(&self, x: &[f64]) -> Vec<f64> {
        x.iter().zip(self.q).map(|(a, b)| a - b).collect()
    }

    fn value(&self, x: &[f64]) -> f64 {
        0.5 * sq_dist(x, self.q)
    }

    /// `f(x_new) − f(x)` as `r·Δx + ½‖Δx‖²`. Differencing two values of `f`
    /// loses everything below `ε·f`.
    fn change(&self, x: &[f64], x_new: &[f64]) -> f64 {
        let step: Vec<f64> = x_new.iter().zip(x).map(|(a, b)| a - b).collect();
        dot(&self.residual(x), &step) + 0.5 * dot(&step, &step)
    }

    fn combine(&mut self, alpha: &[f64]) -> Vec<f64> {
        self.stats.matvec_count += 1;
        self.view.combine(alpha)
    }

    fn gradient_at(&mut self, x: &[f64]) -> Vec<f64> {
        self.stats.matvec_count += 1;
        self.view.dot_rows(&self.residual(x))
    }

    /// Walks the projected-gradient path from `alpha` (with gradient `g` and
    /// hull point `x`) and stops at the first local minimizer of `f`.
    pub(crate) fn cauchy(&mut self, alpha: &mut [f64], x: &mut [f64], g: &[f64]) {
        let d = self.view.dims();

        // Zero weights whose coordinate would decrease immediately have a
        // breakpoint at t = 0. Dropping them only lowers the free-set mean, so
        // the removal can be done in passes until nothing else qualifies.
        let mut free: Vec<usize> = (0..alpha.len()).collect();
        loop {
            let mean = free.iter().map(|&i| g[i]).sum::<f64>() / free.len() as f64;
            let before = free.len();
            free.retain(|&i| alpha[i] > 0.0 || g[i] <= mean);
            if free.len() == before {
                break;
            }
        }

        // p is kept explicitly mean-free: near the optimum it is pure rounding
        // noise, the exact step length along it is huge, and any residual sum
        // of order ε·‖g‖ would be multiplied into the weights.
        let mean = free.iter().map(|&i| g[i]).sum::<f64>() / free.len() as f64;
        let mut p: Vec<f64> = free.iter().map(|&i| mean - g[i]).collect();
        center(&mut p);

        let mut row_sum = vec![0.0; d];
        let mut pd = vec![0.0; d];
        for (k, &i) in free.iter().enumerate() {
            let row = self.view.row(i);
            axpy(1.0, row, &mut row_sum);
            axpy(p[k], row, &mut pd);
        }
        self.stats.matvec_count += 2;

        let mut r = self.residual(x);
        while free.len() > 1 {
            let slope = dot(&r, &pd);
            if slope >= 0.0 {
                break;
            }
            let curvature = dot(&pd, &pd);

            // first breakpoint, lowest index on ties
            let mut t_break = f64::INFINITY;
            let mut hit = usize::MAX;
            for (k, &i) in free.iter().enumerate() {
                if p[k] < 0.0 {
                    let t = alpha[i].max(0.0) / -p[k];
                    if t < t_break {
                        t_break = t;
                        hit = k;
                    }
                }
            }
            let t_min = if curvature > 0.0 {
                -slope / curvature
            } else {
                f64::INFINITY
            };
            if hit == usize::MAX || t_min < t_break {
                if t_min.is_finite() {
                    for (k, &i) in free.iter().enumerate() {
                        alpha[i] += t_min * p[k];
                    }
                    axpy(t_min, &pd, x);
                }
                break;
            }

            for (k, &i) in free.iter().enumerate() {
                alpha[i] += t_break * p[k];
            }
            axpy(t_break, &pd, x);
            axpy(t_break, &pd, &mut r);

            let j = free.remove(hit);
            let pj = p.remove(hit);
            alpha[j] = 0.0;
            let row = self.view.row(j);
            for (s, v) in row_sum.iter_mut().zip(row) {
                *s -= v;
            }
            let shift = -p.iter().sum::<f64>() / p.len() as f64;
            for pk in p.iter_mut() {
                *pk += shift;
            }
            axpy(-pj, row, &mut pd);
            axpy(shift, &row_sum, &mut pd);
        }

        for a in alpha.iter_mut() {
            if *a < 0.0 {
                *a = 0.0;
            }
        }
    }

    /// Minimization over the positive weights with the unit sum held fixed,
    /// stopping once the reduced gradient has shrunk by `rel_tol`. Returns the
    /// change in `f` if a step was taken.
    pub(crate) fn subspace(
        &mut self,
        alpha: &mut [f64],
        x: &mut Vec<f64>,
        cg_cap: usize,
        rel_tol: f64,
    ) -> Option<f64> {
        let free: Vec<usize> = (0..alpha.len()).filter(|&i| alpha[i] > 0.0).collect();
        let m = free.len();
        if m <= 1 {
            return None;
        }
        self.stats.cumulative_free_variables += m as u64;

        let r = self.residual(x);
        let g_free: Vec<f64> = free.iter().map(|&i| dot(self.view.row(i), &r)).collect();
        self.stats.matvec_count += 1;

        let mut res = g_free;
        center(&mut res);
        for v in res.iter_mut() {
            *v = -*v;
        }
        let reduced_g: Vec<f64> = res.iter().map(|v| -v).collect();
        let mut rr = dot(&res, &res);
        if rr == 0.0 {
            return None;
        }
        let stop = rel_tol * rr.sqrt();
        let row_scale = free
            .iter()
            .map(|&i| dot(self.view.row(i), self.view.row(i)))
            .sum::<f64>()
            / m as f64;

        let mut delta = vec![0.0; m];
        let mut dir = res.clone();
        for _ in 0..cg_cap {
            let u = self.view.combine_subset(&free, &dir);
            self.stats.matvec_count += 1;
            let curvature = dot(&u, &u);
            let dir_sq = dot(&dir, &dir);
            if curvature <= 1e-20 * dir_sq * row_scale.max(f64::MIN_POSITIVE) {
                // f is linear along dir and decreasing: go to the boundary
                let t = max_step(&free, alpha, &delta, &dir);
                if t.is_finite() {
                    axpy(t, &dir, &mut delta);
                }
                break;
            }
            let step = rr / curvature;
            axpy(step, &dir, &mut delta);
            let mut h_dir: Vec<f64> = free.iter().map(|&i| dot(self.view.row(i), &u)).collect();
            self.stats.matvec_count += 1;
            center(&mut h_dir);
            axpy(-step, &h_dir, &mut res);
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
        center(&mut delta);

        // exact ratio test against the lower bounds
        let mut t = 1.0;
        let mut blocking = None;
        for (k, &i) in free.iter().enumerate() {
            if delta[k] < 0.0 {
                let tk = alpha[i] / -delta[k];
                if tk < t {
                    t = tk;
                    blocking = Some(k);
                }
            }
        }
        if t <= 0.0 {
            return None;
        }

        let mut trial: Vec<f64> = alpha.to_vec();
        for (k, &i) in free.iter().enumerate() {
            trial[i] = (alpha[i] + t * delta[k]).max(0.0);
        }
        if let Some(k) = blocking {
            trial[free[k]] = 0.0;
        }
        // Near the optimum the decrease is far below the rounding error of
        // differencing two values of f, and the step's sum is only zero up to
        // rounding, which the full gradient multiplies by λ. Measure it with
        // the mean-free gradient and Δx built from the step itself.
        let step: Vec<f64> = free.iter().map(|&i| trial[i] - alpha[i]).collect();
        let dx = self.view.combine_subset(&free, &step);
        self.stats.matvec_count += 1;
        let change = dot(&reduced_g, &step) + 0.5 * dot(&dx, &dx);
        if change < 0.0 {
            let x_trial = self.combine(&trial);
            alpha.copy_from_slice(&trial);
            *x = x_trial;
            Some(change)
        } else {
            None
        }
    }

    /// KKT residuals for `alpha` given the gradient `g` at it.
    pub(crate) fn kkt(alpha: &[f64], g: &[f64], cfg: &SolverConfig) -> Result<KktReport> {
        let support: Vec<usize> = (0..alpha.len())
            .filter(|&i| alpha[i] > cfg.support_tol)
            .collect();
        if support.is_empty() {
            return Err(HullError::EmptySupport);
        }
        let lambda_hat = support.iter().map(|&i| g[i]).sum::<f64>() / support.len() as f64;
        let stationarity_residual = support
            .iter()
            .map(|&i| (g[i] - lambda_hat).abs())
            .fold(0.0, f64::max);
        let dual_feasibility_residual = (0..alpha.len())
            .filter(|&i| alpha[i] <= cfg.support_tol)
            .map(|i| (lambda_hat - g[i]).max(0.0))
            .fold(0.0, f64::max);
        let primal_residual = infeasibility(alpha);
        let g_inf = g.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
        let bound = cfg.kkt_tol * (1.0 + g_inf);
        let converged = stationarity_residual <= bound
            && dual_feasibility_residual <= bound
            && primal_residual <= bound;
        Ok(KktReport {
            lambda_hat,
            stationarity_residual,
            dual_feasibility_residual,
            primal_residual,
            converged,
        })
    }

    pub(crate) fn kkt_at(&mut self, alpha: &[f64], cfg: &SolverConfig) -> Result<KktReport> {
        let x = self.combine(alpha);
        let g = self.gradient_at(&x);
        Self::kkt(alpha, &g, cfg)
    }

    /// Outer loop: KKT test, Cauchy point, subspace step, until converged or capped.
    pub(crate) fn run(&mut self, alpha0: Vec<f64>, cfg: &SolverConfig) -> Result<ViewSolve> {
        let n = self.view.len();
        if alpha0.len() != n {
            return Err(HullError::DimensionMismatch {
                expected: n,
                got: alpha0.len(),
            });
        }
        if !is_feasible(&alpha0, cfg.feas_tol) {
            return Err(infeasible(&alpha0));
        }
        let mut alpha: Vec<f64> = alpha0.into_iter().map(|a| a.max(0.0)).collect();
        let cap = cfg.outer_cap(n);
        let cg_cap = cfg.cg_cap(self.view.dims());

        let mut x = self.combine(&alpha);
        // A later sketch stage starts at the previous optimum padded with
        // zeros, i.e. the same point, so the trace carries on from there.
        let mut f = match self.stats.objective_trace.last() {
            Some(&last) => last,
            None => self.value(&x),
        };
        let mut iterations = 0;
        let mut stalled = false;
        loop {
            let g = self.gradient_at(&x);
            let kkt = Self::kkt(&alpha, &g, cfg)?;
            if kkt.converged {
                let (alpha, kkt) = self.polish(alpha, x, kkt, cfg)?;
                return Ok(ViewSolve {
                    alpha,
                    kkt,
                    iterations,
                });
            }
            if stalled || iterations >= cap {
                return Ok(ViewSolve {
                    alpha,
                    kkt,
                    iterations,
                });
            }

            let before = alpha.clone();
            let mut x_c = x.clone();
            self.cauchy(&mut alpha, &mut x_c, &g);
            let x_exact = self.combine(&alpha);
            let mut f_next = f;
            let change = self.change(&x, &x_exact);
            if change <= 0.0 {
                x = x_exact;
                f_next += change;
            } else {
                alpha.copy_from_slice(&before);
            }
            self.track_iterate(&alpha, cfg);

            if let Some(change) = self.subspace(&mut alpha, &mut x, cg_cap, 0.1) {
                f_next += change;
            }
            self.track_iterate(&alpha, cfg);

            if cfg.debug_checks {
                let fresh = self.value(&x);
                let slack = 1e-12 + 1e-13 * f;
                debug_assert!((fresh - f_next).abs() <= slack, "objective drift: {fresh} vs {f_next}");
            }
            stalled = alpha == before;
            f = f_next;
            self.stats.objective_trace.push(f);
            iterations += 1;
        }
    }

    /// Subspace solves to full accuracy on the final support, repeated while
    /// the ratio test keeps dropping weights. The KKT test is relative to
    /// `‖g‖∞`, which leaves `x*` loose when the gradient is large or when `q`
    /// is inside the hull.
    fn polish(
        &mut self,
        mut alpha: Vec<f64>,
        mut x: Vec<f64>,
        mut kkt: KktReport,
        cfg: &SolverConfig,
    ) -> Result<(Vec<f64>, KktReport)> {
        let mut f = self.value(&x);
        let rounds = alpha.iter().filter(|&&a| a > 0.0).count();
        for _ in 0..rounds {
            let before = alpha.clone();
            let cap = alpha.iter().filter(|&&a| a > 0.0).count();
            let Some(change) = self.subspace(&mut alpha, &mut x, cap, 1e-14) else {
                break;
            };
            let g = self.gradient_at(&x);
            let polished = Self::kkt(&alpha, &g, cfg)?;
            if !polished.converged {
                alpha = before;
                break;
            }
            self.track_iterate(&alpha, cfg);
            f = self.stats.objective_trace.last().copied().unwrap_or(f) + change;
            self.stats.objective_trace.push(f);
            kkt = polished;
        }
        Ok((alpha, kkt))
    }

    fn track_iterate(&mut self, alpha: &[f64], cfg: &SolverConfig) {
        let v = infeasibility(alpha);
        if v > self.stats.max_infeasibility {
            self.stats.max_infeasibility = v;
        }
        if cfg.debug_checks {
            debug_assert!(
                is_feasible(alpha, cfg.feas_tol),
                "infeasible iterate, violation {v:e}"
            );
        }
    }
}

fn center(v: &mut [f64]) {
    let mean = v.iter().sum::<f64>() / v.len() as f64;
    for x in v.iter_mut() {
        *x -= mean;
    }
}

/// Largest `t` keeping `alpha[free] + delta + t·dir ≥ 0`.
fn max_step(free: &[usize], alpha: &[f64], delta: &[f64], dir: &[f64]) -> f64 {
    free.iter()
        .enumerate()
        .filter(|(k, _)| dir[*k] < 0.0)
        .map(|(k, &i)| ((alpha[i] + delta[k]).max(0.0)) / -dir[k])
        .fold(f64::INFINITY, f64::min)
}

fn feasible_input(alpha: &CoefficientVector, data: &Dataset, q: &QueryPoint) -> Result<()> {
    data.check_query(q)?;
    if alpha.len() != data.rows() {
        return Err(HullError::DimensionMismatch {
            expected: data.rows(),
            got: alpha.len(),
        });
    }
    if !is_feasible(alpha.weights(), SolverConfig::default().feas_tol) {
        return Err(infeasible(alpha.weights()));
    }
    Ok(())
}

/// Exact minimizer of `f` along the projected-gradient path from `alpha`.
pub fn cauchy_point(
    alpha: &CoefficientVector,
    data: &Dataset,
    q: &QueryPoint,
) -> Result<CoefficientVector> {
    feasible_input(alpha, data, q)?;
    let mut stats = SolveStats::default();
    let mut engine = Engine::new(data.view(), q, &mut stats);
    let mut a = alpha.weights().to_vec();
    let mut x = engine.combine(&a);
    let g = engine.gradient_at(&x);
    engine.cauchy(&mut a, &mut x, &g);
    Ok(CoefficientVector::from_raw(a))
}

/// One inexact subspace step from `alpha_c` over its positive weights.
pub fn subspace_minimize(
    alpha_c: &CoefficientVector,
    data: &Dataset,
    q: &QueryPoint,
    max_cg_iters: usize,
) -> Result<CoefficientVector> {
    feasible_input(alpha_c, data, q)?;
    let mut stats = SolveStats::default();
    let mut engine = Engine::new(data.view(), q, &mut stats);
    let mut a = alpha_c.weights().to_vec();
    let mut x = engine.combine(&a);
    engine.subspace(&mut a, &mut x, max_cg_iters.max(1), 0.1);
    Ok(CoefficientVector::from_raw(a))
}

pub fn kkt_check(
    alpha: &CoefficientVector,
    data: &Dataset,
    q: &QueryPoint,
    cfg: &SolverConfig,
) -> Result<KktReport> {
    data.check_query(q)?;
    let g = crate::model::gradient(alpha.weights(), data, q)?;
    Engine::kkt(alpha.weights(), &g, cfg)
}

/// Gradient projection on the whole dataset from `alpha0`.
pub fn solve(
    data: &Dataset,
    q: &QueryPoint,
    alpha0: &CoefficientVector,
    cfg: &SolverConfig,
) -> Result<HullSolution> {
    cfg.validate()?;
    data.check_query(q)?;
    let mut stats = SolveStats::default();
    let start = Instant::now();
    let out = Engine::new(data.view(), q, &mut stats).run(alpha0.weights().to_vec(), cfg)?;
    stats.outer_iterations.push(out.iterations);
    stats.wall_time.push(start.elapsed().as_secs_f64());
    stats.stages_run = 1;
    Ok(HullSolution::assemble(
        data,
        q,
        CoefficientVector::from_raw(out.alpha),
        out.kkt,
        stats,
        cfg,
    ))
}

/// Index of the row nearest `q`, lowest index on ties.
pub fn nearest_row(data: &Dataset, q: &QueryPoint) -> usize {
    let mut best = 0;
    let mut best_d = f64::INFINITY;
    for i in 0..data.rows() {
        let d = sq_dist(data.row(i), q.coords());
        if d < best_d {
            best_d = d;
            best = i;
        }
    }
    best
}

/// Fresh gradient-projection solve from the vertex at the nearest row.
pub fn solve_full(data: &Dataset, q: &QueryPoint, cfg: &SolverConfig) -> Result<HullSolution> {
    data.check_query(q)?;
    let start = CoefficientVector::vertex(data.rows(), nearest_row(data, q));
    solve(data, q, &start, cfg)
}

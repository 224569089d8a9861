//! Domain types shared by every solver, and evaluation of the objective
//! `f(α) = ½‖q − αD‖²` and its gradient against a dataset.
//!
//! Weights follow the row-vector convention: the hull point is `x = αD`,
//! i.e. a convex combination of the dataset rows.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{HullError, Result};

/// Rows above this count switch the row-wise kernels to rayon.
const PAR_ROWS: usize = 4096;

/// An immutable `n × d` matrix whose rows are sample points.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    rows: usize,
    dims: usize,
    data: Vec<f64>,
}

impl Dataset {
    /// Builds a dataset from a row-major buffer of `rows * dims` finite values.
    pub fn new(rows: usize, dims: usize, data: Vec<f64>) -> Result<Self> {
        if rows == 0 {
            return Err(HullError::Empty("dataset has no rows"));
        }
        if dims == 0 {
            return Err(HullError::Empty("dataset has no columns"));
        }
        if data.len() != rows * dims {
            return Err(HullError::DimensionMismatch {
                expected: rows * dims,
                got: data.len(),
            });
        }
        if let Some(index) = data.iter().position(|v| !v.is_finite()) {
            return Err(HullError::NonFinite { index });
        }
        Ok(Self { rows, dims, data })
    }

    pub fn from_rows<R: AsRef<[f64]>>(rows: &[R]) -> Result<Self> {
        let dims = rows.first().map(|r| r.as_ref().len()).unwrap_or(0);
        let mut data = Vec::with_capacity(rows.len() * dims);
        for row in rows {
            let row = row.as_ref();
            if row.len() != dims {
                return Err(HullError::DimensionMismatch {
                    expected: dims,
                    got: row.len(),
                });
            }
            data.extend_from_slice(row);
        }
        Self::new(rows.len(), dims, data)
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn dims(&self) -> usize {
        self.dims
    }

    #[inline]
    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.dims..(i + 1) * self.dims]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    /// A view over every row in storage order.
    pub fn view(&self) -> RowView<'_> {
        RowView {
            data: self,
            index: None,
        }
    }

    /// A view over the listed rows, in the listed order.
    pub fn subset<'a>(&'a self, index: &'a [usize]) -> RowView<'a> {
        RowView {
            data: self,
            index: Some(index),
        }
    }

    /// `max_i ‖dᵢ − q‖`, the length scale used for the interior tolerance.
    pub fn max_distance_to(&self, q: &QueryPoint) -> f64 {
        (0..self.rows)
            .map(|i| sq_dist(self.row(i), q.coords()))
            .fold(0.0, f64::max)
            .sqrt()
    }

    pub(crate) fn check_query(&self, q: &QueryPoint) -> Result<()> {
        if q.dim() != self.dims {
            return Err(HullError::DimensionMismatch {
                expected: self.dims,
                got: q.dim(),
            });
        }
        Ok(())
    }
}

/// The external point being projected onto the hull.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QueryPoint {
    coords: Vec<f64>,
}

impl QueryPoint {
    pub fn new(coords: Vec<f64>) -> Result<Self> {
        if coords.is_empty() {
            return Err(HullError::Empty("query point has no coordinates"));
        }
        if let Some(index) = coords.iter().position(|v| !v.is_finite()) {
            return Err(HullError::NonFinite { index });
        }
        Ok(Self { coords })
    }

    pub fn coords(&self) -> &[f64] {
        &self.coords
    }

    pub fn dim(&self) -> usize {
        self.coords.len()
    }
}

/// Simplex weights `α` with `α ≥ 0` and `Σα = 1`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoefficientVector {
    weights: Vec<f64>,
}

impl CoefficientVector {
    /// Validates feasibility within `feas_tol`, then clamps round-off negatives to zero.
    pub fn new(mut weights: Vec<f64>, feas_tol: f64) -> Result<Self> {
        if weights.is_empty() {
            return Err(HullError::Empty("coefficient vector"));
        }
        if let Some(index) = weights.iter().position(|v| !v.is_finite()) {
            return Err(HullError::NonFinite { index });
        }
        if !crate::simplex::is_feasible(&weights, feas_tol) {
            return Err(infeasible(&weights));
        }
        for w in weights.iter_mut() {
            if *w < 0.0 {
                *w = 0.0;
            }
        }
        Ok(Self { weights })
    }

    /// The vertex `e_i` of the simplex of dimension `n`.
    pub fn vertex(n: usize, i: usize) -> Self {
        let mut weights = vec![0.0; n];
        weights[i] = 1.0;
        Self { weights }
    }

    pub(crate) fn from_raw(weights: Vec<f64>) -> Self {
        Self { weights }
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.weights
    }
}

impl AsRef<[f64]> for CoefficientVector {
    fn as_ref(&self) -> &[f64] {
        &self.weights
    }
}

pub(crate) fn infeasible(weights: &[f64]) -> HullError {
    HullError::Infeasible {
        min_weight: weights.iter().copied().fold(f64::INFINITY, f64::min),
        sum: weights.iter().sum(),
    }
}

/// First-order optimality residuals at a candidate `α`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KktReport {
    /// Estimated multiplier of the unit-sum constraint (mean gradient over the support).
    pub lambda_hat: f64,
    /// `max_{i ∈ support} |gᵢ − λ̂|`
    pub stationarity_residual: f64,
    /// `max_{i ∉ support} (λ̂ − gᵢ)₊`
    pub dual_feasibility_residual: f64,
    /// `|Σα − 1| + max(−αᵢ, 0)`
    pub primal_residual: f64,
    pub converged: bool,
}

impl KktReport {
    pub fn max_residual(&self) -> f64 {
        self.stationarity_residual
            .max(self.dual_feasibility_residual)
            .max(self.primal_residual)
    }
}

/// Which top-level solver to run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum SolverKind {
    /// Distance-sorted, partitioned, warm-started gradient projection.
    #[default]
    Sketch,
    /// Gradient projection on the whole dataset at once.
    Full,
    /// Projected gradient ascent on the Lagrange dual.
    Dual,
}

/// Tolerances, caps and solver selection.
///
/// Fields left as `None` are resolved against the instance being solved.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolverConfig {
    pub eta: usize,
    pub kkt_tol: f64,
    pub feas_tol: f64,
    pub support_tol: f64,
    /// Defaults to `1e-9 · max_i ‖dᵢ − q‖`.
    pub interior_tol: Option<f64>,
    /// Defaults to `10 · n` for the rows being solved.
    pub max_outer_iters: Option<usize>,
    /// Defaults to `min(d, 50)`.
    pub max_cg_iters: Option<usize>,
    pub solver: SolverKind,
    pub seed: u64,
    /// Skip the remaining sketch stages once the padded iterate is optimal
    /// for the whole dataset. Off by default.
    pub early_exit: bool,
    /// Let the dual's equality multiplier take either sign.
    pub free_lambda1: bool,
    /// Translate the dual problem so the query sits at the origin.
    pub dual_center: bool,
    pub dual_max_iters: usize,
    /// Check feasibility and monotone descent on every iterate.
    pub debug_checks: bool,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            eta: 1,
            kkt_tol: 1e-8,
            feas_tol: 1e-12,
            support_tol: 1e-10,
            interior_tol: None,
            max_outer_iters: None,
            max_cg_iters: None,
            solver: SolverKind::Sketch,
            seed: 0,
            early_exit: false,
            free_lambda1: false,
            dual_center: true,
            dual_max_iters: 5000,
            debug_checks: cfg!(debug_assertions),
        }
    }
}

impl SolverConfig {
    pub fn with_eta(mut self, eta: usize) -> Self {
        self.eta = eta;
        self
    }

    pub fn with_solver(mut self, solver: SolverKind) -> Self {
        self.solver = solver;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let tols = [
            ("kkt_tol", Some(self.kkt_tol)),
            ("feas_tol", Some(self.feas_tol)),
            ("support_tol", Some(self.support_tol)),
            ("interior_tol", self.interior_tol),
        ];
        for (name, tol) in tols {
            if let Some(t) = tol {
                if !(t > 0.0 && t.is_finite()) {
                    return Err(HullError::InvalidConfig(format!(
                        "{name} must be positive and finite, got {t}"
                    )));
                }
            }
        }
        if self.eta == 0 {
            return Err(HullError::InvalidConfig("eta must be at least 1".into()));
        }
        if self.max_cg_iters == Some(0) {
            return Err(HullError::InvalidConfig(
                "max_cg_iters must be at least 1".into(),
            ));
        }
        Ok(())
    }

    pub fn outer_cap(&self, n: usize) -> usize {
        self.max_outer_iters.unwrap_or(10 * n)
    }

    pub fn cg_cap(&self, d: usize) -> usize {
        self.max_cg_iters.unwrap_or(d.min(50)).max(1)
    }

    pub fn interior_tol_for(&self, data: &Dataset, q: &QueryPoint) -> f64 {
        self.interior_tol
            .unwrap_or_else(|| 1e-9 * data.max_distance_to(q))
    }
}

/// Dual-solver diagnostics.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct DualStats {
    pub iterations: usize,
    pub rank: usize,
    pub dual_rank_deficient: bool,
    /// `α^d` recovered at the final multipliers, before simplex projection.
    pub raw_alpha: Vec<f64>,
    pub dual_objective: f64,
    pub duality_gap: f64,
    /// Dual objective at every accepted iterate.
    pub dual_trace: Vec<f64>,
    pub lambda1: f64,
}

/// Work counters for one solve.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct SolveStats {
    /// Outer iterations (one Cauchy point plus one subspace attempt) per stage.
    pub outer_iterations: Vec<usize>,
    /// Sum over subspace solves of the free-set size.
    pub cumulative_free_variables: u64,
    /// Products with the working matrix or one of its row blocks.
    pub matvec_count: u64,
    /// Wall time per stage, in seconds.
    pub wall_time: Vec<f64>,
    /// Objective after every outer iteration, all stages concatenated.
    pub objective_trace: Vec<f64>,
    /// Worst feasibility violation seen over all iterates.
    pub max_infeasibility: f64,
    /// Number of sketch stages actually run.
    pub stages_run: usize,
    pub dual: Option<DualStats>,
}

impl SolveStats {
    pub fn total_outer_iterations(&self) -> usize {
        self.outer_iterations.iter().sum()
    }

    pub fn total_wall_time(&self) -> f64 {
        self.wall_time.iter().sum()
    }
}

/// The projection of `q` onto the hull together with its certificate and work counters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HullSolution {
    pub x_star: Vec<f64>,
    pub alpha: CoefficientVector,
    /// Sorted row indices with weight above the support tolerance.
    pub support: Vec<usize>,
    /// `½‖q − x*‖²`
    pub objective: f64,
    /// `‖q − x*‖`
    pub distance: f64,
    pub kkt: KktReport,
    pub stats: SolveStats,
    /// `q` lies inside the hull or on its boundary, up to the interior tolerance.
    pub interior_flag: bool,
    pub converged: bool,
}

impl HullSolution {
    /// Builds the report for weights `alpha` given over the rows of `data`, in storage order.
    pub(crate) fn assemble(
        data: &Dataset,
        q: &QueryPoint,
        alpha: CoefficientVector,
        kkt: KktReport,
        stats: SolveStats,
        cfg: &SolverConfig,
    ) -> Self {
        let x_star = data.view().combine(alpha.weights());
        let distance = sq_dist(&x_star, q.coords()).sqrt();
        let support = alpha
            .weights()
            .iter()
            .enumerate()
            .filter(|(_, &w)| w > cfg.support_tol)
            .map(|(i, _)| i)
            .collect();
        let converged = kkt.converged;
        Self {
            x_star,
            alpha,
            support,
            objective: 0.5 * distance * distance,
            distance,
            kkt,
            stats,
            interior_flag: distance <= cfg.interior_tol_for(data, q),
            converged,
        }
    }
}

/// An ordered selection of dataset rows, the working matrix `Φ` of a solve.
#[derive(Debug, Clone, Copy)]
pub struct RowView<'a> {
    data: &'a Dataset,
    index: Option<&'a [usize]>,
}

impl<'a> RowView<'a> {
    #[inline]
    pub fn len(&self) -> usize {
        self.index.map_or(self.data.rows, <[usize]>::len)
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    #[inline]
    pub fn dims(&self) -> usize {
        self.data.dims
    }

    #[inline]
    pub fn row(&self, k: usize) -> &'a [f64] {
        match self.index {
            Some(ix) => self.data.row(ix[k]),
            None => self.data.row(k),
        }
    }

    /// Original dataset index of local row `k`.
    #[inline]
    pub fn original_index(&self, k: usize) -> usize {
        self.index.map_or(k, |ix| ix[k])
    }

    /// `x = αΦ`, skipping zero weights. Accumulates in row order.
    pub fn combine(&self, alpha: &[f64]) -> Vec<f64> {
        let mut x = vec![0.0; self.dims()];
        for (k, &a) in alpha.iter().enumerate() {
            if a != 0.0 {
                axpy(a, self.row(k), &mut x);
            }
        }
        x
    }

    /// `Σ_k coeffs[k] · Φ[rows[k]]`
    pub fn combine_subset(&self, rows: &[usize], coeffs: &[f64]) -> Vec<f64> {
        let mut x = vec![0.0; self.dims()];
        for (&k, &c) in rows.iter().zip(coeffs) {
            if c != 0.0 {
                axpy(c, self.row(k), &mut x);
            }
        }
        x
    }

    /// `gᵢ = Φᵢ · r` for every row. Each entry is an independent dot product,
    /// so the parallel path is bit-identical to the serial one.
    pub fn dot_rows(&self, r: &[f64]) -> Vec<f64> {
        let n = self.len();
        if n >= PAR_ROWS {
            (0..n).into_par_iter().map(|k| dot(self.row(k), r)).collect()
        } else {
            (0..n).map(|k| dot(self.row(k), r)).collect()
        }
    }
}

#[inline]
pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

#[inline]
pub(crate) fn axpy(a: f64, x: &[f64], y: &mut [f64]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += a * xi;
    }
}

#[inline]
pub(crate) fn sq_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

#[inline]
pub(crate) fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

fn check_alpha(alpha: &[f64], data: &Dataset, q: &QueryPoint) -> Result<()> {
    data.check_query(q)?;
    if alpha.len() != data.rows() {
        return Err(HullError::DimensionMismatch {
            expected: data.rows(),
            got: alpha.len(),
        });
    }
    if let Some(index) = alpha.iter().position(|v| !v.is_finite()) {
        return Err(HullError::NonFinite { index });
    }
    Ok(())
}

/// `½‖q − αD‖²`
pub fn objective(alpha: &[f64], data: &Dataset, q: &QueryPoint) -> Result<f64> {
    check_alpha(alpha, data, q)?;
    let x = data.view().combine(alpha);
    Ok(0.5 * sq_dist(&x, q.coords()))
}

/// `∇f(α)ᵢ = dᵢ · (αD − q)`
pub fn gradient(alpha: &[f64], data: &Dataset, q: &QueryPoint) -> Result<Vec<f64>> {
    check_alpha(alpha, data, q)?;
    let view = data.view();
    let mut r = view.combine(alpha);
    for (ri, qi) in r.iter_mut().zip(q.coords()) {
        *ri -= qi;
    }
    Ok(view.dot_rows(&r))
}

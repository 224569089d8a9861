//! Closest point on the convex hull of a dataset.
//!
//! Given an `n × d` dataset `D` and a query `q`, find weights `α` on the
//! probability simplex minimizing `½‖q − αD‖²`; the projection is `x* = αD`.
//! The main solver sorts rows by distance to `q`, splits them into pieces and
//! solves a growing sequence of problems with gradient projection, warm
//! starting each stage from the previous optimum.

pub mod dual;
pub mod error;
pub mod gradient_projection;
pub mod io;
pub mod model;
pub mod oracle;
pub mod simplex;
pub mod sketch;

pub use error::{HullError, Result};
pub use model::{
    gradient, objective, CoefficientVector, Dataset, DualStats, HullSolution, KktReport,
    QueryPoint, RowView, SolveStats, SolverConfig, SolverKind,
};

/// Solves with the method selected by `cfg.solver`.
pub fn project(data: &Dataset, q: &QueryPoint, cfg: &SolverConfig) -> Result<HullSolution> {
    match cfg.solver {
        SolverKind::Sketch => sketch::solve_sketched(data, q, cfg),
        SolverKind::Full => gradient_projection::solve_full(data, q, cfg),
        SolverKind::Dual => dual::solve_dual(data, q, cfg),
    }
}

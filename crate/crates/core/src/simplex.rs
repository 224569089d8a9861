//! Feasible-set machinery for the probability simplex `S = {α : α ≥ 0, Σα = 1}`.
//!
//! The upper bound `α ≤ 1` is never tracked: nonnegativity plus unit sum
//! imply it, so only lower bounds can become binding along a sum-zero path.

use std::cmp::Ordering;

use crate::error::{HullError, Result};
use crate::model::CoefficientVector;

/// Mask of coordinates whose lower bound `αᵢ = 0` is binding.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ActiveSet {
    active: Vec<bool>,
}

impl ActiveSet {
    pub fn none(n: usize) -> Self {
        Self {
            active: vec![false; n],
        }
    }

    pub fn from_mask(active: Vec<bool>) -> Self {
        Self { active }
    }

    /// Marks every zero weight as active.
    pub fn at_zero(alpha: &[f64]) -> Self {
        Self {
            active: alpha.iter().map(|&a| a <= 0.0).collect(),
        }
    }

    #[inline]
    pub fn is_active(&self, i: usize) -> bool {
        self.active[i]
    }

    pub fn set(&mut self, i: usize, active: bool) {
        self.active[i] = active;
    }

    pub fn len(&self) -> usize {
        self.active.len()
    }

    pub fn is_empty(&self) -> bool {
        self.active.is_empty()
    }

    pub fn inactive_count(&self) -> usize {
        self.active.iter().filter(|a| !**a).count()
    }

    pub fn mask(&self) -> &[bool] {
        &self.active
    }
}

/// Step length at which coordinate `index` reaches zero.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Breakpoint {
    pub t: f64,
    pub index: usize,
}

/// `min αᵢ ≥ −tol` and `|Σα − 1| ≤ tol`.
pub fn is_feasible(alpha: &[f64], feas_tol: f64) -> bool {
    if alpha.is_empty() || alpha.iter().any(|a| !a.is_finite()) {
        return false;
    }
    let min = alpha.iter().copied().fold(f64::INFINITY, f64::min);
    let sum: f64 = alpha.iter().sum();
    min >= -feas_tol && (sum - 1.0).abs() <= feas_tol
}

/// Size of the worst constraint violation: `|Σα − 1| + max(−αᵢ, 0)`.
pub fn infeasibility(alpha: &[f64]) -> f64 {
    let sum: f64 = alpha.iter().sum();
    let neg = alpha.iter().copied().fold(0.0_f64, |m, a| m.max(-a));
    (sum - 1.0).abs() + neg
}

/// Steepest descent direction on the face: minus the gradient with its mean
/// over inactive coordinates removed, zero on active ones.
pub fn projected_direction(g: &[f64], active: &ActiveSet) -> Result<Vec<f64>> {
    if g.len() != active.len() {
        return Err(HullError::DimensionMismatch {
            expected: active.len(),
            got: g.len(),
        });
    }
    let free = active.inactive_count();
    if free == 0 {
        return Err(HullError::AllActive);
    }
    let mean = g
        .iter()
        .enumerate()
        .filter(|(i, _)| !active.is_active(*i))
        .map(|(_, v)| v)
        .sum::<f64>()
        / free as f64;
    Ok(g.iter()
        .enumerate()
        .map(|(i, &v)| if active.is_active(i) { 0.0 } else { mean - v })
        .collect())
}

/// Lower-bound breakpoints `tᵢ = αᵢ / (−pᵢ)` for every `pᵢ < 0`, in
/// nondecreasing `t` with ties broken by index.
pub fn breakpoints(alpha: &[f64], p: &[f64]) -> Result<Vec<Breakpoint>> {
    if alpha.len() != p.len() {
        return Err(HullError::DimensionMismatch {
            expected: alpha.len(),
            got: p.len(),
        });
    }
    if let Some(index) = alpha.iter().chain(p).position(|v| !v.is_finite()) {
        return Err(HullError::NonFinite { index });
    }
    let sum: f64 = p.iter().sum();
    let scale: f64 = p.iter().map(|v| v.abs()).sum::<f64>().max(1.0);
    if sum.abs() > 1e-12 * scale {
        return Err(HullError::DirectionNotSumZero(sum));
    }
    let mut out: Vec<Breakpoint> = alpha
        .iter()
        .zip(p)
        .enumerate()
        .filter(|(_, (_, &pi))| pi < 0.0)
        .map(|(index, (&a, &pi))| Breakpoint {
            t: a.max(0.0) / -pi,
            index,
        })
        .collect();
    out.sort_by(|a, b| {
        a.t.partial_cmp(&b.t)
            .unwrap_or(Ordering::Equal)
            .then(a.index.cmp(&b.index))
    });
    Ok(out)
}

/// Euclidean projection onto the simplex by sorting and thresholding.
pub fn project_onto_simplex(v: &[f64]) -> Result<CoefficientVector> {
    if v.is_empty() {
        return Err(HullError::Empty("vector to project"));
    }
    if let Some(index) = v.iter().position(|x| !x.is_finite()) {
        return Err(HullError::NonFinite { index });
    }
    let mut sorted = v.to_vec();
    sorted.sort_by(|a, b| b.partial_cmp(a).unwrap_or(Ordering::Equal));
    let mut cumsum = 0.0;
    let mut theta = 0.0;
    for (k, &vk) in sorted.iter().enumerate() {
        cumsum += vk;
        let candidate = (cumsum - 1.0) / (k + 1) as f64;
        if vk - candidate > 0.0 {
            theta = candidate;
        }
    }
    Ok(CoefficientVector::from_raw(
        v.iter().map(|&x| (x - theta).max(0.0)).collect(),
    ))
}

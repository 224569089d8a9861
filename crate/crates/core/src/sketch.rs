//! Sketched solve: sort rows by distance to the query, split them into
//! `η` pieces, and solve on a growing prefix of pieces, warm starting every
//! stage from the previous optimum padded with zeros.

use std::time::Instant;

use rayon::prelude::*;

use crate::error::{HullError, Result};
use crate::gradient_projection::Engine;
use crate::model::{
    sq_dist, CoefficientVector, Dataset, HullSolution, QueryPoint, SolveStats, SolverConfig,
};

/// Row order and piece boundaries for a sketched solve.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PartitionPlan {
    /// Row indices by ascending distance to the query.
    pub order: Vec<usize>,
    /// `η + 1` offsets into `order`; piece `i` is `order[b[i]..b[i+1]]`.
    pub boundaries: Vec<usize>,
}

impl PartitionPlan {
    pub fn pieces(&self) -> usize {
        self.boundaries.len() - 1
    }

    pub fn piece_sizes(&self) -> Vec<usize> {
        self.boundaries.windows(2).map(|w| w[1] - w[0]).collect()
    }
}

/// Permutation sorting rows by ascending squared distance to `q`; ties keep
/// their original order.
pub fn sort_by_distance(data: &Dataset, q: &QueryPoint) -> Result<Vec<usize>> {
    data.check_query(q)?;
    let dist: Vec<f64> = (0..data.rows())
        .into_par_iter()
        .map(|i| sq_dist(data.row(i), q.coords()))
        .collect();
    let mut order: Vec<usize> = (0..data.rows()).collect();
    order.sort_by(|&a, &b| dist[a].total_cmp(&dist[b]));
    Ok(order)
}

/// Splits `order` into `eta` contiguous pieces, the first `n mod η` of them one row larger.
pub fn make_partition(n: usize, eta: usize, order: Vec<usize>) -> Result<PartitionPlan> {
    if eta == 0 || eta > n {
        return Err(HullError::InvalidConfig(format!(
            "partition count must be in 1..={n}, got {eta}"
        )));
    }
    if order.len() != n {
        return Err(HullError::DimensionMismatch {
            expected: n,
            got: order.len(),
        });
    }
    let base = n / eta;
    let extra = n % eta;
    let mut boundaries = Vec::with_capacity(eta + 1);
    let mut offset = 0;
    boundaries.push(0);
    for i in 0..eta {
        offset += base + usize::from(i < extra);
        boundaries.push(offset);
    }
    Ok(PartitionPlan { order, boundaries })
}

/// `(α, 0, …, 0)` with `added` trailing zeros.
pub fn warm_start_extend(alpha_prev: &CoefficientVector, added: usize) -> CoefficientVector {
    let mut w = Vec::with_capacity(alpha_prev.len() + added);
    w.extend_from_slice(alpha_prev.weights());
    w.resize(alpha_prev.len() + added, 0.0);
    CoefficientVector::from_raw(w)
}

/// Runs every stage and maps the final weights back to dataset row order.
pub fn solve_sketched(data: &Dataset, q: &QueryPoint, cfg: &SolverConfig) -> Result<HullSolution> {
    cfg.validate()?;
    data.check_query(q)?;
    let n = data.rows();
    let plan = make_partition(n, cfg.eta, sort_by_distance(data, q)?)?;

    let mut stats = SolveStats::default();
    let mut alpha = CoefficientVector::vertex(plan.boundaries[1], 0);
    let mut kkt = None;

    for stage in 0..plan.pieces() {
        let start = Instant::now();
        let end = plan.boundaries[stage + 1];
        if stage > 0 {
            alpha = warm_start_extend(&alpha, end - plan.boundaries[stage]);
        }
        let view = data.subset(&plan.order[..end]);
        let out = Engine::new(view, q, &mut stats).run(alpha.into_inner(), cfg)?;
        stats.outer_iterations.push(out.iterations);
        stats.stages_run += 1;
        alpha = CoefficientVector::from_raw(out.alpha);
        kkt = Some(out.kkt);

        if cfg.early_exit && end < n && kkt.as_ref().is_some_and(|k| k.converged) {
            let padded = warm_start_extend(&alpha, n - end);
            let full = data.subset(&plan.order);
            let mut probe = SolveStats::default();
            let report = Engine::new(full, q, &mut probe).kkt_at(padded.weights(), cfg)?;
            stats.matvec_count += probe.matvec_count;
            if report.converged {
                alpha = padded;
                kkt = Some(report);
                stats.wall_time.push(start.elapsed().as_secs_f64());
                break;
            }
        }
        stats.wall_time.push(start.elapsed().as_secs_f64());
    }

    let mut weights = vec![0.0; n];
    for (k, &w) in alpha.weights().iter().enumerate() {
        weights[plan.order[k]] = w;
    }
    let kkt = kkt.expect("at least one stage runs");
    Ok(HullSolution::assemble(
        data,
        q,
        CoefficientVector::from_raw(weights),
        kkt,
        stats,
        cfg,
    ))
}

//! Cross validation against exhaustive enumeration.

use hullproj::oracle::{
    cross_validate, random_instance, regression_corpus, CrossReport, Disagreement, Instance,
    Solver, Tolerances,
};
use rayon::prelude::*;

#[derive(Debug, Clone)]
pub struct VerifyOptions {
    pub instances: usize,
    pub max_n: usize,
    pub max_d: usize,
    pub seed: u64,
    pub parallel: bool,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        Self {
            instances: 200,
            max_n: 12,
            max_d: 5,
            seed: 0,
            parallel: false,
        }
    }
}

/// The fixed corpus followed by `instances` random ones.
pub fn build_instances(opts: &VerifyOptions) -> Vec<Instance> {
    let mut all = regression_corpus();
    all.extend(
        (0..opts.instances as u64)
            .map(|k| random_instance(opts.seed.wrapping_add(k), opts.max_n, opts.max_d)),
    );
    all
}

/// Sketch with one, two and four pieces, and the unsketched solve.
///
/// The dual is left out: these instances have `n > d`, where its closed form
/// is only a pseudo-inverse and it may honestly report non-convergence.
pub fn default_solvers() -> Vec<Solver> {
    vec![Solver::sketch(1), Solver::sketch(2), Solver::sketch(4), Solver::full()]
}

/// Same result as [`cross_validate`]; in parallel mode the first
/// disagreement in instance order is reported.
pub fn verify_instances(
    instances: &[Instance],
    solvers: &[Solver],
    tol: Tolerances,
    parallel: bool,
) -> Result<CrossReport, Disagreement> {
    if !parallel {
        return cross_validate(instances, solvers, tol);
    }
    let parts: Vec<_> = instances
        .par_iter()
        .map(|inst| cross_validate(std::slice::from_ref(inst), solvers, tol))
        .collect();
    let mut total = CrossReport::default();
    for part in parts {
        let r = part?;
        total.instances += r.instances;
        total.comparisons += r.comparisons;
        total.max_x_deviation = total.max_x_deviation.max(r.max_x_deviation);
        total.max_distance_deviation = total.max_distance_deviation.max(r.max_distance_deviation);
    }
    Ok(total)
}

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::{NonlinearSystem, SolverConfig};
use crate::error::{Error, Result};
use crate::fem::{norms, FeSpace};
use crate::problem::ProblemData;
use crate::reference::build_reference_flow;

#[derive(Debug, Clone, Serialize)]
pub struct UniquenessReport {
    pub starts: usize,
    pub converged: usize,
    /// Error messages of the starts that failed.
    pub failures: Vec<String>,
    /// Largest H1 distance between two converged solutions.
    pub max_distance: f64,
    /// `||f|| + ||g*|| + ||sigma*||` with the surrogate boundary norms.
    pub data_magnitude: f64,
}

/// Solve from `n_starts` random initial velocities (uniform nodal values of
/// size comparable to `W*`) and compare the limits.
pub fn uniqueness_probe(
    space: &FeSpace,
    data: &ProblemData,
    config: &SolverConfig,
    n_starts: usize,
    seed: u64,
) -> Result<UniquenessReport> {
    if n_starts < 2 {
        return Err(Error::argument(format!("uniqueness probe needs at least 2 starts, got {n_starts}")));
    }
    config.validate()?;
    let reference = build_reference_flow(space, data)?;
    let sys = NonlinearSystem::new(space, data, &reference, config, 1.0);
    let amplitude = reference.w_star.iter().fold(1.0f64, |m, x| m.max(x.abs()));
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut solutions = Vec::new();
    let mut failures = Vec::new();
    for k in 0..n_starts {
        let v0: Vec<f64> = (0..space.n_velocity()).map(|_| rng.random_range(-amplitude..=amplitude)).collect();
        match sys.solve_from(Some((v0, vec![0.0; space.n_pressure()]))) {
            Ok(s) => solutions.push(s.velocity),
            Err(e) => {
                log::info!("uniqueness start {k} failed: {e}");
                failures.push(e.to_string());
            }
        }
    }
    let mut max_distance = 0.0f64;
    for i in 0..solutions.len() {
        for j in i + 1..solutions.len() {
            let d: Vec<f64> = solutions[i].iter().zip(&solutions[j]).map(|(a, b)| a - b).collect();
            max_distance = max_distance.max(norms::velocity_h1(space, &d));
        }
    }
    let r = &reference.report;
    Ok(UniquenessReport {
        starts: n_starts,
        converged: solutions.len(),
        failures,
        max_distance,
        data_magnitude: norms::field_l2(space, &data.force) + r.g_star_surrogate + r.sigma_star_surrogate,
    })
}

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::energy::convection_form;
use crate::error::Result;
use crate::fem::quadrature::EDGE;
use crate::fem::{assembly, norms, ConvectionForm, FeSpace, SaddleSolver};
use crate::field::VectorField;
use crate::geometry::BoundaryTag;
use crate::jet::Jet2;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IdentityReport {
    pub samples: usize,
    /// Largest `|c(v; v, v) - (1/2) int_outlet |v|^2 v . nu|` in the skew
    /// form, for `||grad v|| = 1`.
    pub skew_max_gap: f64,
    /// Largest gap in the convective form, fields not normalized.
    pub convective_max_gap: f64,
    pub skew_passed: bool,
}

/// Smooth random force made of a few plane waves; mesh independent.
pub fn random_smooth_force(rng: &mut impl Rng, modes: usize) -> VectorField {
    let waves: Vec<[f64; 5]> = (0..modes)
        .map(|_| {
            [
                rng.random_range(-1.0..1.0),
                rng.random_range(-1.0..1.0),
                rng.random_range(-3.0..3.0),
                rng.random_range(-3.0..3.0),
                rng.random_range(0.0..std::f64::consts::TAU),
            ]
        })
        .collect();
    VectorField::new(move |x, y| {
        let mut f = [Jet2::constant(0.0), Jet2::constant(0.0)];
        for w in &waves {
            let s = (w[2] * x + w[3] * y + w[4]).sin();
            f[0] += w[0] * s;
            f[1] += w[1] * s;
        }
        f
    })
}

fn outlet_flux_energy(space: &FeSpace, v: &[f64]) -> f64 {
    let mut s = 0.0;
    for f in space.facets_tagged(BoundaryTag::Outlet) {
        for &(t, w) in EDGE.iter() {
            let vv = space.eval_trace(v, f, t);
            s += 0.5 * w * f.length * (vv[0] * vv[0] + vv[1] * vv[1]) * (vv[0] * f.normal[0] + vv[1] * f.normal[1]);
        }
    }
    s
}

/// Checks the integration-by-parts identity of the convection term on
/// discretely divergence-free Stokes velocities driven by random smooth
/// forces (no-slip on inlet and walls, natural outlet).
pub fn identity_tests(space: &FeSpace, samples: usize, seed: u64) -> Result<IdentityReport> {
    let fixed: Vec<(usize, f64)> =
        (0..space.n_velocity()).filter(|&d| space.is_dirichlet_dof(d)).map(|d| (d, 0.0)).collect();
    let solver = SaddleSolver::new(&assembly::stiffness(space), &assembly::divergence(space), None, &fixed)?;
    let zero_p = vec![0.0; space.n_pressure()];
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut skew = 0.0f64;
    let mut convective = 0.0f64;
    for _ in 0..samples {
        let f = random_smooth_force(&mut rng, 3);
        let (v, _) = solver.solve(&assembly::body_force_load(space, &f), &zero_p);
        let gap = |v: &[f64], form| (convection_form(space, form, v, v, v) - outlet_flux_energy(space, v)).abs();
        convective = convective.max(gap(&v, ConvectionForm::Convective));
        let h1 = norms::velocity_h1_seminorm(space, &v);
        if h1 > 0.0 {
            let unit: Vec<f64> = v.iter().map(|x| x / h1).collect();
            skew = skew.max(gap(&unit, ConvectionForm::Skew));
        }
    }
    Ok(IdentityReport { samples, skew_max_gap: skew, convective_max_gap: convective, skew_passed: skew <= 1e-12 })
}

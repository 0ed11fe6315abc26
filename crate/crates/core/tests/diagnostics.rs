use std::sync::Arc;

use nalgebra::DMatrix;
use pipeflow::diagnostics::{
    apriori_bound_check, calibrate_bound, energy_report, estimate_constants, identity_tests, infsup_constant,
    random_smooth_force, sobolev_quotient, trace_constant,
};
use pipeflow::fem::assembly::{self, negative_part};
use pipeflow::fem::quadrature::EDGE;
use pipeflow::fem::{ConvectionForm, FeSpace};
use pipeflow::field::{ScalarField, VectorField};
use pipeflow::geometry::{build_domain, BoundaryTag, DomainSpec};
use pipeflow::linalg::dense_generalized_eigen;
use pipeflow::reference::{poiseuille_inflow, random_inflow};
use pipeflow::solver::{solve, SolverConfig};
use pipeflow::{Error, ProblemData};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn space(spec: DomainSpec, h: f64) -> FeSpace {
    FeSpace::from_domain(Arc::new(build_domain(spec).unwrap()), h).unwrap()
}

fn s_bend(h: f64) -> FeSpace {
    space(DomainSpec::s_bend(1.0, 2.0, 0.7, 1.5, 0.5), h)
}

fn moderate_data(s: &FeSpace) -> ProblemData {
    let g = poiseuille_inflow(s.domain().unwrap().inlet(), 1.0, 0.05).unwrap();
    ProblemData::new(0.05, VectorField::new(|x, y| [0.2 * y, 0.1 * x.sin()]), g, ScalarField::new(|_, y| 0.1 * y))
        .unwrap()
}

#[test]
fn energy_of_rest_state_vanishes() {
    let s = s_bend(0.25);
    let d = ProblemData::at_rest(1.0).unwrap();
    let cfg = SolverConfig::default();
    let (sol, r) = solve(&s, &d, &cfg).unwrap();
    let e = energy_report(&s, &d, &r, &sol, &cfg);
    assert_eq!(e.dissipation, 0.0);
    assert_eq!(e.retained(), 0.0);
    assert_eq!(e.outlet_dissipation, 0.0);
    assert_eq!(e.backflow_energy, 0.0);
    assert_eq!(e.relative_residual, 0.0);
    assert!(e.inequality_holds);
}

#[test]
fn energy_identity_for_poiseuille() {
    let s = space(DomainSpec::straight_channel(0.5, 0.5, 1.0), 0.125);
    let g = poiseuille_inflow(s.domain().unwrap().inlet(), 1.0, 1.0).unwrap();
    let d = ProblemData::new(1.0, VectorField::zero(), g, ScalarField::zero()).unwrap();
    let cfg = SolverConfig::default();
    let (sol, r) = solve(&s, &d, &cfg).unwrap();
    let e = energy_report(&s, &d, &r, &sol, &cfg);
    assert_eq!(e.backflow_energy, 0.0);
    assert!(e.outlet_dissipation.abs() <= 1e-20, "{e:?}");
    assert!(e.identity_residual.abs() <= 1e-10, "{e:?}");
}

#[test]
fn energy_identity_on_s_bend() {
    let s = s_bend(0.15);
    let d = moderate_data(&s);
    let cfg = SolverConfig::default();
    let (sol, r) = solve(&s, &d, &cfg).unwrap();
    let e = energy_report(&s, &d, &r, &sol, &cfg);
    assert!(e.relative_residual <= 1e-10, "{e:?}");
    assert!(e.outlet_dissipation >= 0.0 && e.backflow_energy >= 0.0);
    assert!(e.inequality_holds, "{e:?}");
    assert!(e.dissipation > 0.0);
    // Independent quadrature agrees with the assembled trilinear form.
    let c = assembly::convection(&s, &sol.shifted, ConvectionForm::Skew);
    let via_matrix = -c.bilinear(&sol.shifted, &r.w_star);
    assert!((via_matrix - e.transport_convection).abs() <= 1e-12 * e.transport_convection.abs().max(1.0));
    // Backflow energy is zero exactly when u . nu >= 0 at the outlet points.
    let mut min_flux = f64::INFINITY;
    for f in s.facets_tagged(BoundaryTag::Outlet) {
        for &(t, _) in EDGE.iter() {
            let u = s.eval_trace(&sol.velocity, f, t);
            min_flux = min_flux.min(u[0] * f.normal[0] + u[1] * f.normal[1]);
        }
    }
    assert_eq!(e.backflow_energy == 0.0, min_flux >= -1e-12);
}

proptest! {
    #[test]
    fn negative_part_kernel_signs(z in -1e6..1e6f64) {
        let m = negative_part(z);
        prop_assert!(m >= 0.0);
        prop_assert!(z + m >= 0.0);
        prop_assert!(2.0 * z * z + m * z >= 0.0);
        prop_assert!((m - (z.abs() - z) / 2.0).abs() <= 1e-12 * z.abs().max(1.0));
    }
}

#[test]
fn bound_needs_calibration() {
    let s = s_bend(0.25);
    let d = ProblemData::at_rest(1.0).unwrap();
    let (sol, r) = solve(&s, &d, &SolverConfig::default()).unwrap();
    let mut c = pipeflow::diagnostics::ConstantsEstimate {
        eta: 1.0,
        s_star: 1.0,
        trace_constant: 1.0,
        infsup_constant: 1.0,
        m_star: 1.0,
        omega_star: 0.5,
        bound_constant: None,
    };
    assert!(matches!(apriori_bound_check(&s, &d, &r, &sol, &c), Err(Error::ConstantsMissing)));
    c.bound_constant = Some(3.0);
    let m = apriori_bound_check(&s, &d, &r, &sol, &c).unwrap();
    assert_eq!((m.lhs, m.data_norm, m.margin), (0.0, 0.0, 0.0));
    assert!(calibrate_bound(&s, &d, &r, &sol).is_err());
}

fn small_data(s: &FeSpace, rng: &mut ChaCha8Rng, size: f64) -> ProblemData {
    let inlet = *s.domain().unwrap().inlet();
    let g = random_inflow(&inlet, rng, size, 3);
    let f = random_smooth_force(rng, 2).scaled(size);
    let a = size * rng.random_range(-1.0..1.0);
    ProblemData::new(1.0, f, g, ScalarField::new(move |x, y| a * (1.0 + 0.5 * y + 0.0 * x))).unwrap()
}

#[test]
fn calibrated_bound_holds_on_small_data() {
    let s = s_bend(0.2);
    let cfg = SolverConfig::default();
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut constants = estimate_constants(&s, 1.0, 3, 1).unwrap();
    // A transverse shear force is among the most amplified data shapes.
    let shear = VectorField::new(|x, y| [0.05 * (3.0 * y).sin(), 0.0 * x]);
    let calib = ProblemData::new(1.0, shear, VectorField::zero(), ScalarField::zero()).unwrap();
    let (sol, r) = solve(&s, &calib, &cfg).unwrap();
    constants.bound_constant = Some(calibrate_bound(&s, &calib, &r, &sol).unwrap());
    let m = apriori_bound_check(&s, &calib, &r, &sol, &constants).unwrap();
    assert!(m.margin.abs() <= 1e-12 * m.lhs);
    for k in 0..10 {
        let d = small_data(&s, &mut rng, 0.05);
        let (sol, r) = solve(&s, &d, &cfg).unwrap();
        let m = apriori_bound_check(&s, &d, &r, &sol, &constants).unwrap();
        assert!(m.margin >= 0.0, "run {k}: {m:?}");
    }
}

/// Largest generalized eigenvalue of outlet mass against stiffness on all
/// free velocity dofs, computed densely.
fn dense_trace_oracle(s: &FeSpace) -> f64 {
    let free: Vec<usize> = (0..s.n_velocity()).filter(|&d| !s.is_dirichlet_dof(d)).collect();
    let k = assembly::stiffness(s);
    let m = assembly::boundary_mass(s, |t| t == BoundaryTag::Outlet, |_, _| 1.0);
    let n = free.len();
    let kd = DMatrix::from_fn(n, n, |i, j| k.get(free[i], free[j]));
    let md = DMatrix::from_fn(n, n, |i, j| m.get(free[i], free[j]));
    let (vals, _) = dense_generalized_eigen(&md, &kd).unwrap();
    vals[n - 1].sqrt()
}

#[test]
fn trace_constant_matches_dense_oracle() {
    let s = space(DomainSpec::s_bend(1.0, 1.0, 0.3, 1.0, 0.5), 0.3);
    let t = trace_constant(&s).unwrap();
    let oracle = dense_trace_oracle(&s);
    assert!((t - oracle).abs() <= 1e-8 * oracle, "{t} vs {oracle}");
}

#[test]
fn infsup_constant_is_stable_under_refinement() {
    let values: Vec<f64> = [0.2, 0.1, 0.05].iter().map(|&h| infsup_constant(&s_bend(h)).unwrap()).collect();
    eprintln!("inf-sup {values:?}");
    let (lo, hi) = values.iter().fold((f64::INFINITY, 0.0f64), |(a, b), v| (a.min(*v), b.max(*v)));
    assert!(lo > 0.0 && (hi - lo) / hi < 0.05, "{values:?}");
}

#[test]
fn sobolev_quotient_ascent() {
    let s = space(DomainSpec::straight_channel(0.5, 0.5, 0.5), 0.2);
    let q = sobolev_quotient(&s, 20, 9).unwrap();
    assert!(q.trace.windows(2).all(|w| w[1] >= w[0] * (1.0 - 1e-12)), "{:?}", q.trace);
    let oracle = sobolev_quotient(&s, 200, 10).unwrap();
    assert!((q.ratio - oracle.ratio).abs() <= 0.02 * oracle.ratio, "{} vs {}", q.ratio, oracle.ratio);
}

#[test]
fn constants_are_positive_deterministic_and_linear_in_viscosity() {
    let s = s_bend(0.25);
    let c = estimate_constants(&s, 0.7, 4, 3).unwrap();
    assert!(c.s_star > 0.0 && c.trace_constant > 0.0 && c.infsup_constant > 0.0 && c.m_star > 0.0);
    assert!(c.omega_star > 0.0);
    assert_eq!(c.omega_star, 0.7 * c.s_star / (2.0 * c.m_star));
    assert_eq!(c, estimate_constants(&s, 0.7, 4, 3).unwrap());
    let c2 = estimate_constants(&s, 1.4, 4, 3).unwrap();
    assert_eq!(c2.omega_star, 2.0 * c.omega_star);
    assert_eq!(c.with_eta(1.4), c2);
    assert!(estimate_constants(&s, 0.0, 4, 3).is_err());
}

#[test]
fn convection_identity() {
    let s = s_bend(0.2);
    let none = identity_tests(&s, 0, 1).unwrap();
    assert_eq!((none.skew_max_gap, none.convective_max_gap), (0.0, 0.0));
    let r = identity_tests(&s, 100, 1).unwrap();
    assert!(r.skew_passed && r.skew_max_gap <= 1e-12, "{r:?}");
    let gaps: Vec<f64> = [0.2, 0.1, 0.05].iter().map(|&h| identity_tests(&s_bend(h), 5, 2).unwrap().convective_max_gap).collect();
    eprintln!("convective gaps {gaps:?}");
    assert!(gaps[0] >= 1.8 * gaps[1] && gaps[1] >= 1.8 * gaps[2], "{gaps:?}");
}

//! Discrete reference flow `(W*, Pi*)`: carries the inflow to the outlet
//! Poiseuille profile with zero weak divergence, and extends `-sigma*`
//! harmonically from the outlet.

use rand::Rng;
use serde::Serialize;

use super::poiseuille::PoiseuilleFlow;
use crate::error::{Error, Result};
use crate::fem::quadrature::EDGE;
use crate::fem::{assembly, norms, velocity_constraints, FeSpace, NodeKind, Reduction, SaddleSolver};
use crate::field::VectorField;
use crate::geometry::{BoundaryTag, Region, Section};
use crate::jet::Jet2;
use crate::linalg::lu_factor;
use crate::problem::ProblemData;

#[derive(Debug, Clone, Serialize)]
pub struct ReferenceReport {
    pub phi_star: f64,
    pub compatibility_mismatch: f64,
    /// Max over pressure test functions of `|int q div W*|`.
    pub divergence_residual: f64,
    pub outlet_trace_error: f64,
    pub inlet_trace_error: f64,
    pub pi_trace_error: f64,
    /// Max `|nu . (grad W*) nu|` over outlet quadrature points.
    pub outlet_normal_derivative: f64,
    pub w_star_h1: f64,
    pub g_star_surrogate: f64,
    pub sigma_star_surrogate: f64,
    pub corner_conflicts: usize,
}

impl ReferenceReport {
    /// `||W*||_{H1} / ||g*||` surrogate, zero for zero inflow.
    pub fn construction_ratio(&self) -> f64 {
        if self.g_star_surrogate > 0.0 {
            self.w_star_h1 / self.g_star_surrogate
        } else {
            0.0
        }
    }
}

#[derive(Debug, Clone)]
pub struct ReferenceFlow {
    /// Velocity coefficients on the full space.
    pub w_star: Vec<f64>,
    /// P1 coefficients.
    pub pi_star: Vec<f64>,
    pub phi_star: f64,
    pub outlet_flow: PoiseuilleFlow,
    /// Inflow data with the corner rule applied, zero away from the inlet.
    pub inflow_trace: Vec<f64>,
    pub report: ReferenceReport,
}

fn inflow_trace(space: &FeSpace, inflow: &VectorField) -> (Vec<f64>, usize) {
    let c = velocity_constraints(space, &|x| inflow.value(x), None);
    let mut g = vec![0.0; space.n_velocity()];
    for (d, v) in c.dofs {
        g[d] = v;
    }
    (g, c.corner_conflicts.len())
}

/// Influx `-int_inlet g* . nu` of the quadratic interpolant of `g*` (with
/// inlet corners set to zero).
pub fn influx(space: &FeSpace, inflow: &VectorField) -> Result<f64> {
    let (g, _) = inflow_trace(space, inflow);
    checked_influx(space, &g)
}

fn checked_influx(space: &FeSpace, g: &[f64]) -> Result<f64> {
    let phi = -assembly::boundary_flux(space, g, BoundaryTag::Inlet);
    if phi < -1e-12 {
        return Err(Error::NegativeInflux { flux: phi });
    }
    Ok(phi.max(0.0))
}

/// Quintic cutoff in the outlet coordinate: 1 up to `l2/12`, 0 from `l2/4`.
pub fn cutoff(x2: f64, l2: f64) -> f64 {
    let s = ((x2 - l2 / 12.0) / (l2 / 4.0 - l2 / 12.0)).clamp(0.0, 1.0);
    1.0 - s * s * s * (10.0 - 15.0 * s + 6.0 * s * s)
}

/// Sub-space of the triangles with `keep(region)` and, per sub-node, the
/// parent node.
fn sub_space(space: &FeSpace, keep: impl Fn(Region) -> bool) -> Result<(FeSpace, Vec<usize>)> {
    let (mesh, parent) = space.mesh().submesh(keep);
    let sub = FeSpace::new(mesh)?;
    let nv = sub.n_pressure();
    let map = (0..sub.n_nodes())
        .map(|n| {
            if n < nv {
                parent[n]
            } else {
                let [a, b] = sub.edges()[n - nv];
                space.node_of_edge(parent[a], parent[b]).expect("sub-mesh edges exist in the parent")
            }
        })
        .collect();
    Ok((sub, map))
}

pub fn build_reference_flow(space: &FeSpace, data: &ProblemData) -> Result<ReferenceFlow> {
    let domain = space.domain().ok_or_else(|| Error::argument("reference flow needs the domain geometry"))?;
    let outlet: &Section = domain.outlet();
    let (n, nv) = (space.n_nodes(), space.n_pressure());
    let (g, corner_conflicts) = inflow_trace(space, &data.inflow);
    let phi_star = checked_influx(space, &g)?;
    let v2 = PoiseuilleFlow::for_section(outlet, phi_star, data.eta)?;
    let v2h = space.interpolate(&v2.velocity_field());

    // Stokes flow on the inlet, middle and first outlet third.
    let (star, star_map) = sub_space(space, |r| r != Region::Omega2)?;
    let ns = star.n_nodes();
    let mut fixed = Vec::new();
    let mut data_trace = vec![0.0; star.n_velocity()];
    for k in 0..ns {
        let kind = star.node_kind(k);
        if !kind.is_dirichlet() {
            continue;
        }
        let p = star_map[k];
        let src = if kind == NodeKind::Interface { &v2h } else { &g };
        for c in 0..2 {
            data_trace[c * ns + k] = src[c * n + p];
            fixed.push((c * ns + k, src[c * n + p]));
        }
    }
    let mismatch = assembly::boundary_integral(&star, &data_trace, |_| true, |_, u, nu| u[0] * nu[0] + u[1] * nu[1]);
    if mismatch.abs() > 1e-10 * phi_star.max(1.0) {
        return Err(Error::Compatibility { mismatch });
    }
    let k_star = assembly::stiffness(&star).scaled(data.eta);
    let solver = SaddleSolver::new(
        &k_star,
        &assembly::divergence(&star),
        Some(&assembly::pressure_mean(&star)),
        &fixed,
    )?;
    let (w0, _) = solver.solve(&vec![0.0; star.n_velocity()], &vec![0.0; star.n_pressure()]);

    // Blend into the outlet Poiseuille flow across the first outlet third.
    let mut in_star = vec![None; n];
    for (k, &p) in star_map.iter().enumerate() {
        in_star[p] = Some(k);
    }
    let mut in_sharp = vec![false; n];
    for (el, r) in space.elements().iter().zip(&space.mesh().regions) {
        if *r == Region::OmegaSharp {
            el.nodes.iter().for_each(|&k| in_sharp[k] = true);
        }
    }
    let mut z = v2h.clone();
    for p in 0..n {
        let Some(k) = in_star[p] else { continue };
        let zeta = if in_sharp[p] { cutoff(outlet.to_local(space.node_coord(p))[0], outlet.length) } else { 1.0 };
        for c in 0..2 {
            z[c * n + p] = zeta * w0[c * ns + k] + (1.0 - zeta) * v2h[c * n + p];
        }
    }

    // Remove the divergence defect inside the first outlet third.
    let b = assembly::divergence(space);
    let defect = b.mul_vec(&z);
    let (sharp, sharp_map) = sub_space(space, |r| r == Region::OmegaSharp)?;
    let nsh = sharp.n_nodes();
    let fixed: Vec<(usize, f64)> = (0..nsh)
        .filter(|&k| sharp.node_kind(k).is_dirichlet())
        .flat_map(|k| [(k, 0.0), (nsh + k, 0.0)])
        .collect();
    let d: Vec<f64> = (0..sharp.n_pressure()).map(|q| -defect[sharp_map[q]]).collect();
    let solver = SaddleSolver::new(
        &assembly::stiffness(&sharp).scaled(data.eta),
        &assembly::divergence(&sharp),
        Some(&assembly::pressure_mean(&sharp)),
        &fixed,
    )?;
    let (j0, _) = solver.solve(&vec![0.0; sharp.n_velocity()], &d);
    let mut w_star = z;
    for (k, &p) in sharp_map.iter().enumerate() {
        w_star[p] += j0[k];
        w_star[n + p] += j0[nsh + k];
    }

    // Harmonic extension of -sigma* from the outlet.
    let mut outlet_vertices = Vec::new();
    for f in space.facets_tagged(BoundaryTag::Outlet) {
        outlet_vertices.extend(f.vertices);
    }
    outlet_vertices.sort_unstable();
    outlet_vertices.dedup();
    let sig = |v: usize| -data.sigma.value(space.mesh().vertices[v]);
    let red = Reduction::new(nv, outlet_vertices.iter().map(|&v| (v, sig(v))));
    let kp = assembly::pressure_stiffness(space);
    let a = red.matrix(&kp);
    let pi_star = red.expand(&lu_factor(&a)?.solve_refined(&a, &red.rhs(&kp, &vec![0.0; nv]), 1));

    let report = ReferenceReport {
        phi_star,
        compatibility_mismatch: mismatch,
        divergence_residual: b.mul_vec(&w_star).iter().fold(0.0, |m, v| m.max(v.abs())),
        outlet_trace_error: trace_error(space, &w_star, &v2h, |k| k == NodeKind::Outlet),
        inlet_trace_error: trace_error(space, &w_star, &g, |k| matches!(k, NodeKind::Inlet | NodeKind::Wall)),
        pi_trace_error: outlet_vertices.iter().map(|&v| (pi_star[v] - sig(v)).abs()).fold(0.0, f64::max),
        outlet_normal_derivative: outlet_normal_derivative(space, &w_star),
        w_star_h1: norms::velocity_h1(space, &w_star),
        g_star_surrogate: inflow_surrogate(space, &g)?,
        sigma_star_surrogate: norms::boundary_l2(space, &data.sigma, BoundaryTag::Outlet)
            + norms::pressure_gradient_l2(space, &pi_star),
        corner_conflicts,
    };
    Ok(ReferenceFlow { w_star, pi_star, phi_star, outlet_flow: v2, inflow_trace: g, report })
}

fn trace_error(space: &FeSpace, u: &[f64], target: &[f64], kinds: impl Fn(NodeKind) -> bool) -> f64 {
    let n = space.n_nodes();
    (0..n)
        .filter(|&k| kinds(space.node_kind(k)))
        .flat_map(|k| [(u[k] - target[k]).abs(), (u[n + k] - target[n + k]).abs()])
        .fold(0.0, f64::max)
}

fn outlet_normal_derivative(space: &FeSpace, u: &[f64]) -> f64 {
    let owners = space.facet_elements();
    let mut m = 0.0f64;
    for (f, &e) in space.facets().iter().zip(&owners) {
        if f.tag != BoundaryTag::Outlet {
            continue;
        }
        for &(t, _) in EDGE.iter() {
            let l = space.barycentric(e, f.point(t));
            let (_, g) = space.eval_velocity(u, e, l);
            let nu = f.normal;
            let dn = (0..2).map(|c| nu[c] * (g[c][0] * nu[0] + g[c][1] * nu[1])).sum::<f64>();
            m = m.max(dn.abs());
        }
    }
    m
}

/// H1 norm of the componentwise discrete harmonic lift of the inlet data
/// (zero on walls, natural on the outlet).
pub fn inflow_surrogate(space: &FeSpace, g: &[f64]) -> Result<f64> {
    let n = space.n_nodes();
    let k = assembly::scalar_stiffness(space);
    let dirichlet: Vec<usize> = (0..n).filter(|&m| matches!(space.node_kind(m), NodeKind::Inlet | NodeKind::Wall)).collect();
    let red0 = Reduction::new(n, dirichlet.iter().map(|&m| (m, 0.0)));
    let a = red0.matrix(&k);
    let lu = lu_factor(&a)?;
    let mut lift = vec![0.0; 2 * n];
    for c in 0..2 {
        let red = Reduction::new(n, dirichlet.iter().map(|&m| (m, g[c * n + m])));
        let x = red.expand(&lu.solve(&red.rhs(&k, &vec![0.0; n])));
        lift[c * n..(c + 1) * n].copy_from_slice(&x);
    }
    Ok(norms::velocity_h1(space, &lift))
}

/// Random smooth inflow on an inlet section, vanishing at the corners and
/// with nonnegative influx. Mode amplitudes are uniform in
/// `[-amplitude, amplitude]`.
pub fn random_inflow(inlet: &Section, rng: &mut impl Rng, amplitude: f64, modes: usize) -> VectorField {
    let normal: Vec<f64> = (0..modes).map(|_| rng.random_range(-amplitude..=amplitude)).collect();
    let tangential: Vec<f64> = (0..modes).map(|_| rng.random_range(-amplitude..=amplitude)).collect();
    // The flux of sin(k pi s) over s in (0, 1) is (1 - cos k pi) / (k pi).
    let flux: f64 = normal.iter().enumerate().map(|(k, a)| a * (1.0 - ((k + 1) as f64 * std::f64::consts::PI).cos()) / (k + 1) as f64).sum();
    let sign = if flux < 0.0 { -1.0 } else { 1.0 };
    let (h, t) = (inlet.half_height, inlet.transform);
    VectorField::new(move |x, y| {
        let q = t.rotation;
        let ly = q[1][0] * x + q[1][1] * y + t.translation[1];
        let s = (ly + h) / (2.0 * h);
        let mut a = Jet2::constant(0.0);
        let mut b = Jet2::constant(0.0);
        for k in 0..normal.len() {
            let m = ((k + 1) as f64 * std::f64::consts::PI * s).sin();
            a += sign * normal[k] * m;
            b += tangential[k] * m;
        }
        [q[0][0] * a + q[1][0] * b, q[0][1] * a + q[1][1] * b]
    })
}

/// Parabolic inflow of flux `flux` on the inlet section.
pub fn poiseuille_inflow(inlet: &Section, flux: f64, eta: f64) -> Result<VectorField> {
    Ok(PoiseuilleFlow::for_section(inlet, flux, eta)?.velocity_field())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::ScalarField;
    use crate::geometry::{build_domain, DomainSpec};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use std::sync::Arc;

    fn space(spec: DomainSpec, h: f64) -> FeSpace {
        FeSpace::from_domain(Arc::new(build_domain(spec).unwrap()), h).unwrap()
    }

    fn data(s: &FeSpace, flux: f64, sigma: ScalarField) -> ProblemData {
        let inflow = poiseuille_inflow(s.domain().unwrap().inlet(), flux, 1.0).unwrap();
        ProblemData::new(1.0, VectorField::zero(), inflow, sigma).unwrap()
    }

    #[test]
    fn cutoff_profile() {
        let l = 3.0;
        assert_eq!(cutoff(0.0, l), 1.0);
        assert_eq!(cutoff(l / 12.0, l), 1.0);
        assert_eq!(cutoff(l / 4.0, l), 0.0);
        assert_eq!(cutoff(l, l), 0.0);
        let mut prev = 1.0;
        for k in 0..=100 {
            let z = cutoff(l * k as f64 / 100.0, l);
            assert!(z <= prev + 1e-15);
            prev = z;
        }
        let eps = 1e-6;
        let slope = (cutoff(l / 12.0 + eps, l) - 1.0) / eps;
        assert!(slope.abs() < 1e-6);
    }

    #[test]
    fn influx_examples() {
        let s = space(DomainSpec::straight_channel(1.0, 1.0, 1.0), 0.25);
        assert_eq!(influx(&s, &VectorField::zero()).unwrap(), 0.0);
        let inlet = *s.domain().unwrap().inlet();
        let g = poiseuille_inflow(&inlet, 1.0, 1.0).unwrap();
        assert!((influx(&s, &g).unwrap() - 1.0).abs() < 1e-12);
        match influx(&s, &g.scaled(-1.0)) {
            Err(Error::NegativeInflux { flux }) => assert!((flux + 1.0).abs() < 1e-12),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn straight_channel_reference_is_poiseuille() {
        let s = space(DomainSpec::straight_channel(0.5, 0.5, 1.0), 0.125);
        let r = build_reference_flow(&s, &data(&s, 1.0, ScalarField::zero())).unwrap();
        let exact = r.outlet_flow.velocity_field();
        let e = norms::error_norms(&s, &r.w_star, &vec![0.0; s.n_pressure()], &exact, &ScalarField::zero());
        assert!(e.l2_vel.hypot(e.h1_vel) < 1e-9, "{e:?}");
        assert!(r.pi_star.iter().all(|v| v.abs() < 1e-14));
    }

    #[test]
    fn zero_data_gives_zero_reference() {
        let s = space(DomainSpec::s_bend(1.0, 2.0, 0.7, 1.5, 0.5), 0.2);
        let r = build_reference_flow(&s, &ProblemData::at_rest(1.0).unwrap()).unwrap();
        assert!(r.w_star.iter().all(|v| v.abs() < 1e-14));
        assert!(r.pi_star.iter().all(|v| v.abs() < 1e-14));
        assert_eq!(r.report.construction_ratio(), 0.0);
    }

    #[test]
    fn s_bend_reference_invariants() {
        let s = space(DomainSpec::s_bend(1.0, 2.0, 0.7, 1.5, 0.5), 0.1);
        let sigma = ScalarField::new(|x, y| 0.3 + 0.1 * y + 0.05 * x);
        let r = build_reference_flow(&s, &data(&s, 1.0, sigma)).unwrap();
        let rep = &r.report;
        assert!((rep.phi_star - 1.0).abs() < 1e-12);
        assert!(rep.compatibility_mismatch.abs() < 1e-12);
        assert!(rep.outlet_trace_error <= 1e-10, "{rep:?}");
        assert!(rep.divergence_residual <= 1e-10, "{rep:?}");
        assert!(rep.inlet_trace_error <= 1e-14, "{rep:?}");
        assert!(rep.pi_trace_error <= 1e-10, "{rep:?}");
        assert!(rep.outlet_normal_derivative <= 1e-8, "{rep:?}");
        assert!(rep.construction_ratio() > 0.0 && rep.construction_ratio().is_finite());
        let out = assembly::boundary_flux(&s, &r.w_star, BoundaryTag::Outlet);
        assert!((out - 1.0).abs() < 1e-10);
    }

    #[test]
    fn zero_influx_leaves_outlet_region_at_rest() {
        let s = space(DomainSpec::s_bend(1.0, 2.0, 0.7, 1.5, 0.5), 0.2);
        let inlet = *s.domain().unwrap().inlet();
        let inflow = VectorField::new(move |x, y| {
            let q = inlet.transform.rotation;
            let t = inlet.transform.translation;
            let local_y = q[1][0] * x + q[1][1] * y + t[1];
            let m = (std::f64::consts::PI * (local_y + 0.5)).sin();
            [q[1][0] * m, q[1][1] * m]
        });
        let d = ProblemData::new(1.0, VectorField::zero(), inflow, ScalarField::zero()).unwrap();
        let r = build_reference_flow(&s, &d).unwrap();
        assert!(r.phi_star.abs() < 1e-14);
        assert!(r.w_star.iter().any(|v| v.abs() > 1e-3));
        let n = s.n_nodes();
        let mut touched = vec![false; n];
        for (el, reg) in s.elements().iter().zip(&s.mesh().regions) {
            if *reg != Region::Omega2 {
                el.nodes.iter().for_each(|&k| touched[k] = true);
            }
        }
        for k in (0..n).filter(|&k| !touched[k]) {
            assert_eq!(r.w_star[k], 0.0);
            assert_eq!(r.w_star[n + k], 0.0);
        }
    }

    #[test]
    fn construction_ratio_is_bounded_over_random_inflows() {
        let s = space(DomainSpec::s_bend(1.0, 2.0, 0.7, 1.5, 0.5), 0.2);
        let inlet = *s.domain().unwrap().inlet();
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        let ratios: Vec<f64> = (0..10)
            .map(|_| {
                let g = random_inflow(&inlet, &mut rng, 1.0, 4);
                let d = ProblemData::new(1.0, VectorField::zero(), g, ScalarField::zero()).unwrap();
                build_reference_flow(&s, &d).unwrap().report.construction_ratio()
            })
            .collect();
        let (lo, hi) = ratios.iter().fold((f64::INFINITY, 0.0f64), |(a, b), r| (a.min(*r), b.max(*r)));
        assert!(lo > 0.0 && hi / lo < 20.0, "{ratios:?}");
    }
}

use serde::Serialize;

use crate::fem::assembly::negative_part;
use crate::fem::quadrature::{EDGE, TRIANGLE};
use crate::fem::{ConvectionForm, FeSpace};
use crate::geometry::{BoundaryTag, Point};
use crate::problem::ProblemData;
use crate::reference::ReferenceFlow;
use crate::solver::{OutletCondition, SolutionFields, SolverConfig};

/// Terms of the energy balance obtained by testing the momentum equation
/// with the shifted velocity `v`. Data and nonlinear terms carry the
/// factor `lambda` of the solution.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EnergyReport {
    pub lambda: f64,
    /// `eta ||grad v||^2`.
    pub dissipation: f64,
    /// `(f, v)`.
    pub force_work: f64,
    /// `int_outlet sigma v . nu`.
    pub traction_work: f64,
    /// `-eta int grad W* : grad v`.
    pub reference_viscous: f64,
    /// `-c(W*; W*, v)`.
    pub reference_convection: f64,
    /// `-c(v; W*, v)`.
    pub transport_convection: f64,
    /// `(1/2) int_outlet (z + [z]-) |v|^2` with `z = u . nu` for DDN, and
    /// `(1/2) int_outlet z |v|^2` for DO_NOTHING.
    pub outlet_dissipation: f64,
    /// `int p div v`.
    pub pressure_divergence: f64,
    /// Left side minus right side of the balance.
    pub identity_residual: f64,
    pub relative_residual: f64,
    /// `int_outlet [u . nu]- |u|^2`.
    pub backflow_energy: f64,
    /// `eta ||grad v||^2` does not exceed the sum of the retained terms.
    pub inequality_holds: bool,
}

impl EnergyReport {
    /// Right-hand terms without the outlet dissipation.
    pub fn retained(&self) -> f64 {
        self.force_work
            + self.traction_work
            + self.reference_viscous
            + self.reference_convection
            + self.transport_convection
            + self.pressure_divergence
    }
}

fn dot(a: Point, b: Point) -> f64 {
    a[0] * b[0] + a[1] * b[1]
}

fn apply(g: &[[f64; 2]; 2], a: Point) -> Point {
    [g[0][0] * a[0] + g[0][1] * a[1], g[1][0] * a[0] + g[1][1] * a[1]]
}

/// Trilinear convection form `c(a; b, c)` by quadrature.
pub fn convection_form(space: &FeSpace, form: ConvectionForm, a: &[f64], b: &[f64], c: &[f64]) -> f64 {
    let mut s = 0.0;
    for (e, el) in space.elements().iter().enumerate() {
        for (l, w) in TRIANGLE.iter() {
            let (av, _) = space.eval_velocity(a, e, *l);
            let (bv, gb) = space.eval_velocity(b, e, *l);
            let (cv, gc) = space.eval_velocity(c, e, *l);
            let wa = w * el.area;
            s += match form {
                ConvectionForm::Convective => wa * dot(apply(&gb, av), cv),
                ConvectionForm::Skew => 0.5 * wa * (dot(apply(&gb, av), cv) - dot(apply(&gc, av), bv)),
            };
        }
    }
    if form == ConvectionForm::Skew {
        for f in space.facets() {
            for &(t, w) in EDGE.iter() {
                let (av, bv, cv) = (space.eval_trace(a, f, t), space.eval_trace(b, f, t), space.eval_trace(c, f, t));
                s += 0.5 * w * f.length * dot(av, f.normal) * dot(bv, cv);
            }
        }
    }
    s
}

/// Energy balance of a converged solution; each term is integrated
/// separately.
pub fn energy_report(
    space: &FeSpace,
    data: &ProblemData,
    reference: &ReferenceFlow,
    fields: &SolutionFields,
    config: &SolverConfig,
) -> EnergyReport {
    let lambda = fields.lambda;
    let (v, u, w) = (&fields.shifted, &fields.velocity, &reference.w_star);
    let mut dissipation = 0.0;
    let mut force = 0.0;
    let mut viscous = 0.0;
    let mut pdiv = 0.0;
    for (e, el) in space.elements().iter().enumerate() {
        for (l, q) in TRIANGLE.iter() {
            let wa = q * el.area;
            let (vv, gv) = space.eval_velocity(v, e, *l);
            let (_, gw) = space.eval_velocity(w, e, *l);
            let frc = data.force.value(el.point(*l));
            let gg = |a: &[[f64; 2]; 2], b: &[[f64; 2]; 2]| a[0][0] * b[0][0] + a[0][1] * b[0][1] + a[1][0] * b[1][0] + a[1][1] * b[1][1];
            dissipation += wa * gg(&gv, &gv);
            force += wa * dot(frc, vv);
            viscous += wa * gg(&gw, &gv);
            pdiv += wa * space.eval_pressure(&fields.pressure, e, *l) * (gv[0][0] + gv[1][1]);
        }
    }
    let mut traction = 0.0;
    let mut outlet = 0.0;
    let mut backflow = 0.0;
    for f in space.facets_tagged(BoundaryTag::Outlet) {
        for &(t, q) in EDGE.iter() {
            let wl = q * f.length;
            let (vv, uv) = (space.eval_trace(v, f, t), space.eval_trace(u, f, t));
            let z = dot(uv, f.normal);
            traction += wl * data.sigma.value(f.point(t)) * dot(vv, f.normal);
            let weight = match config.outlet {
                OutletCondition::Ddn => z + negative_part(z),
                OutletCondition::DoNothing => z,
            };
            outlet += 0.5 * wl * weight * dot(vv, vv);
            backflow += wl * negative_part(z) * dot(uv, uv);
        }
    }
    let form = config.convection;
    let mut r = EnergyReport {
        lambda,
        dissipation: data.eta * dissipation,
        force_work: lambda * force,
        traction_work: lambda * traction,
        reference_viscous: -lambda * data.eta * viscous,
        reference_convection: -lambda * convection_form(space, form, w, w, v),
        transport_convection: -lambda * convection_form(space, form, v, w, v),
        outlet_dissipation: lambda * outlet,
        pressure_divergence: pdiv,
        identity_residual: 0.0,
        relative_residual: 0.0,
        backflow_energy: backflow,
        inequality_holds: true,
    };
    let rhs = r.retained() - r.outlet_dissipation;
    r.identity_residual = r.dissipation - rhs;
    let scale = [
        r.dissipation,
        r.force_work,
        r.traction_work,
        r.reference_viscous,
        r.reference_convection,
        r.transport_convection,
        r.outlet_dissipation,
        r.pressure_divergence,
    ]
    .iter()
    .fold(0.0f64, |m, x| m.max(x.abs()));
    r.relative_residual = if scale > 0.0 { r.identity_residual.abs() / scale } else { 0.0 };
    r.inequality_holds = r.dissipation <= r.retained() + 1e-10 * scale;
    r
}

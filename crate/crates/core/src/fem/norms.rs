//! Error norms and integral norms of discrete fields.

use serde::Serialize;

use super::basis::p2_values;
use super::quadrature::{EDGE, TRIANGLE};
use super::space::FeSpace;
use crate::field::{ScalarField, VectorField};
use crate::geometry::BoundaryTag;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ErrorNorms {
    pub l2_vel: f64,
    /// Gradient seminorm of the velocity error.
    pub h1_vel: f64,
    pub l2_pres: f64,
}

/// Errors of `(u, p)` against a closed-form pair, by degree-6 quadrature.
pub fn error_norms(space: &FeSpace, u: &[f64], p: &[f64], exact_u: &VectorField, exact_p: &ScalarField) -> ErrorNorms {
    let (mut l2v, mut h1v, mut l2p) = (0.0, 0.0, 0.0);
    for (e, el) in space.elements().iter().enumerate() {
        for (l, w) in TRIANGLE.iter() {
            let x = el.point(*l);
            let wa = w * el.area;
            let (uh, gh) = space.eval_velocity(u, e, *l);
            let ue = exact_u.jet(x);
            for c in 0..2 {
                l2v += wa * (uh[c] - ue[c].v).powi(2);
                h1v += wa * ((gh[c][0] - ue[c].g[0]).powi(2) + (gh[c][1] - ue[c].g[1]).powi(2));
            }
            l2p += wa * (space.eval_pressure(p, e, *l) - exact_p.value(x)).powi(2);
        }
    }
    ErrorNorms { l2_vel: l2v.sqrt(), h1_vel: h1v.sqrt(), l2_pres: l2p.sqrt() }
}

pub fn velocity_l2(space: &FeSpace, u: &[f64]) -> f64 {
    velocity_lp(space, u, 2)
}

/// `(int |u|^p)^(1/p)` with the Euclidean pointwise norm.
pub fn velocity_lp(space: &FeSpace, u: &[f64], p: i32) -> f64 {
    let mut s = 0.0;
    for (e, el) in space.elements().iter().enumerate() {
        for (l, w) in TRIANGLE.iter() {
            let (v, _) = space.eval_velocity(u, e, *l);
            s += w * el.area * (v[0] * v[0] + v[1] * v[1]).powf(p as f64 / 2.0);
        }
    }
    s.powf(1.0 / p as f64)
}

/// `||grad u||_{L2}`.
pub fn velocity_h1_seminorm(space: &FeSpace, u: &[f64]) -> f64 {
    let mut s = 0.0;
    for (e, el) in space.elements().iter().enumerate() {
        for (l, w) in TRIANGLE.iter() {
            let (_, g) = space.eval_velocity(u, e, *l);
            s += w * el.area * (g[0][0].powi(2) + g[0][1].powi(2) + g[1][0].powi(2) + g[1][1].powi(2));
        }
    }
    s.sqrt()
}

/// Full H1 norm `sqrt(||u||^2 + ||grad u||^2)`.
pub fn velocity_h1(space: &FeSpace, u: &[f64]) -> f64 {
    velocity_l2(space, u).hypot(velocity_h1_seminorm(space, u))
}

pub fn pressure_l2(space: &FeSpace, p: &[f64]) -> f64 {
    let mut s = 0.0;
    for (e, el) in space.elements().iter().enumerate() {
        for (l, w) in TRIANGLE.iter() {
            s += w * el.area * space.eval_pressure(p, e, *l).powi(2);
        }
    }
    s.sqrt()
}

/// `||grad p||_{L2}` of a P1 field.
pub fn pressure_gradient_l2(space: &FeSpace, p: &[f64]) -> f64 {
    let mut s = 0.0;
    for (e, el) in space.elements().iter().enumerate() {
        let g = space.eval_pressure_gradient(p, e);
        s += el.area * (g[0] * g[0] + g[1] * g[1]);
    }
    s.sqrt()
}

/// `||f||_{L2}` of a closed-form scalar on the facets with `tag`.
pub fn boundary_l2(space: &FeSpace, f: &ScalarField, tag: BoundaryTag) -> f64 {
    let mut s = 0.0;
    for fc in space.facets_tagged(tag) {
        for &(t, w) in EDGE.iter() {
            s += w * fc.length * f.value(fc.point(t)).powi(2);
        }
    }
    s.sqrt()
}

/// `||f||_{L2}` of a closed-form vector field over the mesh.
pub fn field_l2(space: &FeSpace, f: &VectorField) -> f64 {
    let mut s = 0.0;
    for el in space.elements() {
        for (l, w) in TRIANGLE.iter() {
            let v = f.value(el.point(*l));
            s += w * el.area * (v[0] * v[0] + v[1] * v[1]);
        }
    }
    s.sqrt()
}

/// `(int |u|^4)` and its gradient with respect to the coefficients.
pub fn l4_power_with_gradient(space: &FeSpace, u: &[f64]) -> (f64, Vec<f64>) {
    let n = space.n_nodes();
    let mut s = 0.0;
    let mut g = vec![0.0; u.len()];
    for (e, el) in space.elements().iter().enumerate() {
        for (l, w) in TRIANGLE.iter() {
            let (v, _) = space.eval_velocity(u, e, *l);
            let r2 = v[0] * v[0] + v[1] * v[1];
            let wa = w * el.area;
            s += wa * r2 * r2;
            let phi = p2_values(*l);
            for k in 0..6 {
                g[el.nodes[k]] += wa * 4.0 * r2 * v[0] * phi[k];
                g[n + el.nodes[k]] += wa * 4.0 * r2 * v[1] * phi[k];
            }
        }
    }
    (s, g)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{build_domain, generate_mesh, DomainSpec};
    use crate::jet::Jet2;

    fn channel() -> FeSpace {
        let d = build_domain(DomainSpec::straight_channel(0.5, 1.0, 1.0)).unwrap();
        FeSpace::new(generate_mesh(&d, 0.3).unwrap()).unwrap()
    }

    #[test]
    fn exact_interpolants_have_zero_error() {
        let s = channel();
        let uf = VectorField::new(|x, y| [x * y + 1.0, y * y - x]);
        let pf = ScalarField::new(|x, y| 2.0 * x - y);
        let u = s.interpolate(&uf);
        let p = s.interpolate_p1(&pf);
        let e = error_norms(&s, &u, &p, &uf, &pf);
        assert!(e.l2_vel < 1e-13 && e.h1_vel < 1e-13 && e.l2_pres < 1e-13, "{e:?}");
    }

    #[test]
    fn norms_of_simple_fields() {
        let s = channel();
        let area: f64 = 3.0;
        let one = s.interpolate(&VectorField::constant([1.0, 0.0]));
        assert!((velocity_l2(&s, &one) - area.sqrt()).abs() < 1e-12);
        assert!((velocity_lp(&s, &one, 4) - area.powf(0.25)).abs() < 1e-12);
        let x = s.interpolate(&VectorField::new(|x, _| [x, Jet2::constant(0.0)]));
        assert!((velocity_h1_seminorm(&s, &x) - area.sqrt()).abs() < 1e-12);
        let (p4, _) = l4_power_with_gradient(&s, &one);
        assert!((p4 - area).abs() < 1e-12);
    }

    #[test]
    fn l4_gradient_matches_finite_differences() {
        let s = channel();
        let u = s.interpolate(&VectorField::new(|x, y| [(x * y).sin(), x.cos()]));
        let (_, g) = l4_power_with_gradient(&s, &u);
        for &i in &[3usize, 17, s.n_nodes() + 5] {
            let eps = 1e-6;
            let mut up = u.clone();
            up[i] += eps;
            let mut um = u.clone();
            um[i] -= eps;
            let fd = (l4_power_with_gradient(&s, &up).0 - l4_power_with_gradient(&s, &um).0) / (2.0 * eps);
            assert!((fd - g[i]).abs() < 1e-7 * (1.0 + g[i].abs()));
        }
    }
}

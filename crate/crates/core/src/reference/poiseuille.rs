//! Plane Poiseuille flow in a straight section.

use crate::error::{Error, Result};
use crate::field::{ScalarField, VectorField};
use crate::geometry::{Point, RigidTransform, Section};
use crate::jet::Jet2;

/// Poiseuille flow of flux `flux` through the section `(0, length) x
/// (-half_height, half_height)` of the local frame given by `transform`
/// (physical -> local). Pressure vanishes at local `x = length`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PoiseuilleFlow {
    pub flux: f64,
    pub half_height: f64,
    pub length: f64,
    pub eta: f64,
    pub transform: RigidTransform,
}

impl PoiseuilleFlow {
    pub fn new(flux: f64, half_height: f64, length: f64, eta: f64, transform: RigidTransform) -> Result<Self> {
        for (name, v) in [("half-height", half_height), ("length", length), ("viscosity", eta)] {
            if !(v > 0.0) {
                return Err(Error::argument(format!("Poiseuille {name} must be positive, got {v}")));
            }
        }
        if !flux.is_finite() {
            return Err(Error::argument("Poiseuille flux must be finite"));
        }
        Ok(PoiseuilleFlow { flux, half_height, length, eta, transform })
    }

    pub fn for_section(section: &Section, flux: f64, eta: f64) -> Result<Self> {
        Self::new(flux, section.half_height, section.length, eta, section.transform)
    }

    fn amplitude(&self) -> f64 {
        3.0 * self.flux / (4.0 * self.half_height.powi(3))
    }

    /// Axial pressure slope in the local frame.
    pub fn pressure_gradient(&self) -> f64 {
        -3.0 * self.eta * self.flux / (2.0 * self.half_height.powi(3))
    }

    /// Velocity in local coordinates.
    pub fn local_velocity(&self, y: Point) -> Point {
        [self.amplitude() * (self.half_height.powi(2) - y[1] * y[1]), 0.0]
    }

    pub fn local_pressure(&self, y: Point) -> f64 {
        self.pressure_gradient() * (y[0] - self.length)
    }

    pub fn velocity(&self, x: Point) -> Point {
        self.transform.vector_to_physical(self.local_velocity(self.transform.apply(x)))
    }

    pub fn pressure(&self, x: Point) -> f64 {
        self.local_pressure(self.transform.apply(x))
    }

    fn local_coords(t: &RigidTransform, x: Jet2, y: Jet2) -> [Jet2; 2] {
        let q = t.rotation;
        [
            q[0][0] * x + q[0][1] * y + t.translation[0],
            q[1][0] * x + q[1][1] * y + t.translation[1],
        ]
    }

    pub fn velocity_field(&self) -> VectorField {
        let s = *self;
        VectorField::new(move |x, y| {
            let l = Self::local_coords(&s.transform, x, y);
            let ux = s.amplitude() * (s.half_height * s.half_height - l[1] * l[1]);
            let q = s.transform.rotation;
            [q[0][0] * ux, q[0][1] * ux]
        })
    }

    pub fn pressure_field(&self) -> ScalarField {
        let s = *self;
        ScalarField::new(move |x, y| {
            let l = Self::local_coords(&s.transform, x, y);
            s.pressure_gradient() * (l[0] - s.length)
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::momentum_defect;
    use crate::fem::quadrature::EDGE;
    use proptest::prelude::*;

    #[test]
    fn closed_form_values() {
        let p = PoiseuilleFlow::new(1.0, 1.0, 2.0, 1.0, RigidTransform::identity()).unwrap();
        let v = p.velocity([1.0, 0.0]);
        assert!((v[0] - 0.75).abs() < 1e-15 && v[1] == 0.0);
        assert!((p.pressure([1.0, 0.0]) - 1.5).abs() < 1e-15);
        let z = PoiseuilleFlow::new(0.0, 1.0, 2.0, 1.0, RigidTransform::identity()).unwrap();
        assert_eq!(z.velocity([0.3, 0.2]), [0.0, 0.0]);
        assert_eq!(z.pressure([0.3, 0.2]), 0.0);
        assert!(PoiseuilleFlow::new(1.0, 0.0, 2.0, 1.0, RigidTransform::identity()).is_err());
        assert!(PoiseuilleFlow::new(1.0, 1.0, -2.0, 1.0, RigidTransform::identity()).is_err());
        assert!(PoiseuilleFlow::new(1.0, 1.0, 2.0, 0.0, RigidTransform::identity()).is_err());
    }

    #[test]
    fn cross_section_flux_is_the_prescribed_flux() {
        let p = PoiseuilleFlow::new(1.0, 1.0, 2.0, 1.0, RigidTransform::identity()).unwrap();
        for k in 0..5 {
            let x = 2.0 * k as f64 / 4.0;
            let q: f64 = EDGE.iter().map(|(t, w)| 2.0 * w * p.velocity([x, -1.0 + 2.0 * t])[0]).sum();
            assert!((q - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn stokes_residual_vanishes() {
        let p = PoiseuilleFlow::new(0.7, 0.6, 2.0, 0.3, RigidTransform::from_angle(0.4, [0.2, -1.0])).unwrap();
        let r = momentum_defect(0.3, &p.velocity_field(), &p.pressure_field(), false);
        let u = p.velocity_field();
        for x in [[0.1, 0.2], [-0.5, 0.7], [1.3, -0.2]] {
            let d = r.value(x);
            assert!(d[0].abs() < 1e-12 && d[1].abs() < 1e-12);
            assert!(u.divergence(x).abs() < 1e-13);
            let (a, b) = (u.value(x), p.velocity(x));
            assert!((a[0] - b[0]).abs() < 1e-14 && (a[1] - b[1]).abs() < 1e-14);
        }
    }

    proptest! {
        #[test]
        fn rigid_motion_equivariance(angle in -3.0..3.0f64, tx in -2.0..2.0f64, ty in -2.0..2.0f64,
                                     a2 in -3.0..3.0f64, x in -2.0..2.0f64, y in -2.0..2.0f64) {
            // Moving the domain by M maps the flow to V'(M x) = R V(x).
            let t = RigidTransform::from_angle(angle, [tx, ty]);
            let m = RigidTransform::from_angle(a2, [0.3, -0.1]);
            let p = PoiseuilleFlow::new(1.3, 0.8, 2.0, 0.5, t).unwrap();
            let moved = PoiseuilleFlow { transform: t.compose(&m.inverted()), ..p };
            let v = p.velocity([x, y]);
            let rv = m.vector_to_local(v);
            let mv = moved.velocity(m.apply([x, y]));
            prop_assert!((rv[0] - mv[0]).abs() < 1e-12 && (rv[1] - mv[1]).abs() < 1e-12);
            prop_assert!((p.pressure([x, y]) - moved.pressure(m.apply([x, y]))).abs() < 1e-12);
        }
    }
}

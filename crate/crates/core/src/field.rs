//! Analytic fields on the plane, evaluated through [`Jet2`].

use std::fmt;
use std::sync::Arc;

use crate::jet::Jet2;

type ScalarFn = dyn Fn(Jet2, Jet2) -> Jet2 + Send + Sync;
type VectorFn = dyn Fn(Jet2, Jet2) -> [Jet2; 2] + Send + Sync;

/// Scalar field `R^2 -> R`.
#[derive(Clone)]
pub struct ScalarField(Arc<ScalarFn>);

/// Vector field `R^2 -> R^2`.
#[derive(Clone)]
pub struct VectorField(Arc<VectorFn>);

impl ScalarField {
    pub fn new(f: impl Fn(Jet2, Jet2) -> Jet2 + Send + Sync + 'static) -> Self {
        ScalarField(Arc::new(f))
    }

    pub fn zero() -> Self {
        Self::constant(0.0)
    }

    pub fn constant(c: f64) -> Self {
        Self::new(move |_, _| Jet2::constant(c))
    }

    pub fn jet(&self, p: [f64; 2]) -> Jet2 {
        let (x, y) = Jet2::variables(p[0], p[1]);
        (self.0)(x, y)
    }

    pub fn value(&self, p: [f64; 2]) -> f64 {
        (self.0)(Jet2::constant(p[0]), Jet2::constant(p[1])).v
    }

    pub fn gradient(&self, p: [f64; 2]) -> [f64; 2] {
        self.jet(p).g
    }

    pub fn call(&self, x: Jet2, y: Jet2) -> Jet2 {
        (self.0)(x, y)
    }
}

impl VectorField {
    pub fn new(f: impl Fn(Jet2, Jet2) -> [Jet2; 2] + Send + Sync + 'static) -> Self {
        VectorField(Arc::new(f))
    }

    pub fn zero() -> Self {
        Self::constant([0.0, 0.0])
    }

    pub fn constant(c: [f64; 2]) -> Self {
        Self::new(move |_, _| [Jet2::constant(c[0]), Jet2::constant(c[1])])
    }

    pub fn jet(&self, p: [f64; 2]) -> [Jet2; 2] {
        let (x, y) = Jet2::variables(p[0], p[1]);
        (self.0)(x, y)
    }

    pub fn value(&self, p: [f64; 2]) -> [f64; 2] {
        let r = (self.0)(Jet2::constant(p[0]), Jet2::constant(p[1]));
        [r[0].v, r[1].v]
    }

    /// Row `i` holds the gradient of component `i`.
    pub fn jacobian(&self, p: [f64; 2]) -> [[f64; 2]; 2] {
        let j = self.jet(p);
        [j[0].g, j[1].g]
    }

    pub fn divergence(&self, p: [f64; 2]) -> f64 {
        let j = self.jet(p);
        j[0].g[0] + j[1].g[1]
    }

    pub fn call(&self, x: Jet2, y: Jet2) -> [Jet2; 2] {
        (self.0)(x, y)
    }

    pub fn add(&self, other: &VectorField) -> VectorField {
        let (a, b) = (self.clone(), other.clone());
        VectorField::new(move |x, y| {
            let (u, v) = (a.call(x, y), b.call(x, y));
            [u[0] + v[0], u[1] + v[1]]
        })
    }

    pub fn scaled(&self, s: f64) -> VectorField {
        let a = self.clone();
        VectorField::new(move |x, y| {
            let u = a.call(x, y);
            [u[0] * s, u[1] * s]
        })
    }
}

impl fmt::Debug for ScalarField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("ScalarField(..)")
    }
}

impl fmt::Debug for VectorField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("VectorField(..)")
    }
}

/// Momentum defect `-eta*Lap(u) + (u.grad)u + grad(p)` of a smooth pair.
/// Passing `convective = false` drops the convection term.
pub fn momentum_defect(
    eta: f64,
    u: &VectorField,
    p: &ScalarField,
    convective: bool,
) -> VectorField {
    let (u, p) = (u.clone(), p.clone());
    VectorField::new(move |x, y| {
        let (x, y) = Jet2::variables(x.v, y.v);
        let uj = u.call(x, y);
        let pj = p.call(x, y);
        let mut out = [Jet2::constant(0.0); 2];
        for c in 0..2 {
            // Only values are meaningful here; derivatives of the defect
            // would need third-order jets.
            let mut v = -eta * uj[c].laplacian() + pj.g[c];
            if convective {
                v += uj[0].v * uj[c].g[0] + uj[1].v * uj[c].g[1];
            }
            out[c] = Jet2::constant(v);
        }
        out
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rotation_field_is_divergence_free() {
        let f = VectorField::new(|x, y| [-y * (x * x + y * y), x * (x * x + y * y)]);
        assert!(f.divergence([0.3, 0.9]).abs() < 1e-14);
        assert_eq!(f.jacobian([1.0, 0.0])[1][0], 3.0);
    }

    #[test]
    fn defect_of_poiseuille_is_zero() {
        let u = VectorField::new(|_, y| [0.75 * (1.0 - y * y), Jet2::constant(0.0)]);
        let p = ScalarField::new(|x, _| 1.5 * (2.0 - x));
        let d = momentum_defect(1.0, &u, &p, true);
        let r = d.value([0.4, -0.3]);
        assert!(r[0].abs() < 1e-15 && r[1].abs() < 1e-15);
    }

    #[test]
    fn defect_of_shear_pair() {
        let u = VectorField::new(|x, y| [y * y, x * 0.0]);
        let p = ScalarField::new(|x, y| x * y);
        let d = momentum_defect(0.5, &u, &p, true).value([0.2, 0.7]);
        assert!((d[0] - (-1.0 + 0.7)).abs() < 1e-15 && (d[1] - 0.2).abs() < 1e-15, "{d:?}");
        let v = VectorField::new(|x, y| [x * y, x * 0.0]);
        let d = momentum_defect(1.0, &v, &ScalarField::zero(), true).value([2.0, 3.0]);
        assert!((d[0] - 18.0).abs() < 1e-13 && d[1].abs() < 1e-15, "{d:?}");
    }
}

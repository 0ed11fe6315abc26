//! Taylor–Couette field `(rho - 1/rho) e_theta` in an annulus, used to
//! validate the differential operators of the field evaluators.

use crate::field::VectorField;
use crate::geometry::Point;

pub fn taylor_couette_field() -> VectorField {
    VectorField::new(|x, y| {
        let s = 1.0 - 1.0 / (x * x + y * y);
        [-(s * y), s * x]
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CouetteResiduals {
    pub max_laplacian: f64,
    pub max_divergence: f64,
    pub max_inner_trace: f64,
}

/// Maximum `|Lap v|`, `|div v|` over `samples`, and `|v|` over points of
/// the unit circle at the sample angles.
pub fn taylor_couette_check(samples: &[Point]) -> CouetteResiduals {
    let v = taylor_couette_field();
    let mut r = CouetteResiduals { max_laplacian: 0.0, max_divergence: 0.0, max_inner_trace: 0.0 };
    for &p in samples {
        let j = v.jet(p);
        r.max_laplacian = r.max_laplacian.max(j[0].laplacian().abs()).max(j[1].laplacian().abs());
        r.max_divergence = r.max_divergence.max(v.divergence(p).abs());
        let th = p[1].atan2(p[0]);
        let w = v.value([th.cos(), th.sin()]);
        r.max_inner_trace = r.max_inner_trace.max(w[0].hypot(w[1]));
    }
    r
}

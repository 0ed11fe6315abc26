use super::GeometryError;

pub type Point = [f64; 2];

/// `T(x) = translation + rotation * x`, a proper rigid motion.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RigidTransform {
    pub rotation: [[f64; 2]; 2],
    pub translation: Point,
}

impl Default for RigidTransform {
    fn default() -> Self {
        Self::identity()
    }
}

impl RigidTransform {
    pub fn identity() -> Self {
        RigidTransform { rotation: [[1.0, 0.0], [0.0, 1.0]], translation: [0.0, 0.0] }
    }

    pub fn new(rotation: [[f64; 2]; 2], translation: Point) -> Result<Self, GeometryError> {
        let t = RigidTransform { rotation, translation };
        t.validate()?;
        Ok(t)
    }

    /// Counterclockwise rotation by `angle` followed by a translation.
    pub fn from_angle(angle: f64, translation: Point) -> Self {
        let (s, c) = angle.sin_cos();
        RigidTransform { rotation: [[c, -s], [s, c]], translation }
    }

    /// Local frame with origin `origin` whose first axis points along
    /// `angle` in physical coordinates: physical -> local.
    pub fn section_frame(origin: Point, angle: f64) -> Self {
        let (s, c) = angle.sin_cos();
        let q = [[c, s], [-s, c]];
        let t = [
            -(q[0][0] * origin[0] + q[0][1] * origin[1]),
            -(q[1][0] * origin[0] + q[1][1] * origin[1]),
        ];
        RigidTransform { rotation: q, translation: t }
    }

    pub fn validate(&self) -> Result<(), GeometryError> {
        let q = self.rotation;
        let det = q[0][0] * q[1][1] - q[0][1] * q[1][0];
        let c0 = q[0][0] * q[0][0] + q[1][0] * q[1][0];
        let c1 = q[0][1] * q[0][1] + q[1][1] * q[1][1];
        let c01 = q[0][0] * q[0][1] + q[1][0] * q[1][1];
        if (det - 1.0).abs() > 1e-12 || (c0 - 1.0).abs() > 1e-12 || (c1 - 1.0).abs() > 1e-12 || c01.abs() > 1e-12
        {
            return Err(GeometryError::new("rotation is not a proper orthogonal matrix"));
        }
        if !self.translation.iter().all(|v| v.is_finite()) {
            return Err(GeometryError::new("translation is not finite"));
        }
        Ok(())
    }

    pub fn apply(&self, x: Point) -> Point {
        let q = self.rotation;
        [
            self.translation[0] + q[0][0] * x[0] + q[0][1] * x[1],
            self.translation[1] + q[1][0] * x[0] + q[1][1] * x[1],
        ]
    }

    pub fn inverse(&self, y: Point) -> Point {
        self.vector_to_physical([y[0] - self.translation[0], y[1] - self.translation[1]])
    }

    /// `Q v`.
    pub fn vector_to_local(&self, v: Point) -> Point {
        let q = self.rotation;
        [q[0][0] * v[0] + q[0][1] * v[1], q[1][0] * v[0] + q[1][1] * v[1]]
    }

    /// `Q^T w`.
    pub fn vector_to_physical(&self, w: Point) -> Point {
        let q = self.rotation;
        [q[0][0] * w[0] + q[1][0] * w[1], q[0][1] * w[0] + q[1][1] * w[1]]
    }

    /// `self` after `inner`: `x -> self(inner(x))`.
    pub fn compose(&self, inner: &RigidTransform) -> RigidTransform {
        let (a, b) = (self.rotation, inner.rotation);
        let mut r = [[0.0; 2]; 2];
        for i in 0..2 {
            for j in 0..2 {
                r[i][j] = a[i][0] * b[0][j] + a[i][1] * b[1][j];
            }
        }
        RigidTransform { rotation: r, translation: self.apply(inner.translation) }
    }

    pub fn inverted(&self) -> RigidTransform {
        let q = self.rotation;
        let qt = [[q[0][0], q[1][0]], [q[0][1], q[1][1]]];
        let t = self.vector_to_physical(self.translation);
        RigidTransform { rotation: qt, translation: [-t[0], -t[1]] }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn quarter_turn() {
        let t = RigidTransform::from_angle(std::f64::consts::FRAC_PI_2, [1.0, 0.0]);
        let y = t.apply([1.0, 0.0]);
        assert!((y[0] - 1.0).abs() < 1e-15 && (y[1] - 1.0).abs() < 1e-15);
        assert_eq!(RigidTransform::identity().apply([0.3, 0.4]), [0.3, 0.4]);
    }

    #[test]
    fn reflection_is_rejected() {
        assert!(RigidTransform::new([[1.0, 0.0], [0.0, -1.0]], [0.0, 0.0]).is_err());
    }

    #[test]
    fn section_frame_origin_maps_to_zero() {
        let t = RigidTransform::section_frame([2.0, -1.0], 0.7);
        let o = t.apply([2.0, -1.0]);
        assert!(o[0].abs() < 1e-15 && o[1].abs() < 1e-15);
        let e1 = t.vector_to_physical([1.0, 0.0]);
        assert!((e1[0] - 0.7f64.cos()).abs() < 1e-15 && (e1[1] - 0.7f64.sin()).abs() < 1e-15);
    }

    proptest! {
        #[test]
        fn round_trip_and_isometry(
            a in -7.0f64..7.0, tx in -5.0f64..5.0, ty in -5.0f64..5.0,
            x in -10.0f64..10.0, y in -10.0f64..10.0, u in -10.0f64..10.0, v in -10.0f64..10.0,
        ) {
            let t = RigidTransform::from_angle(a, [tx, ty]);
            t.validate().unwrap();
            let p = t.inverse(t.apply([x, y]));
            prop_assert!((p[0] - x).abs() < 1e-12 && (p[1] - y).abs() < 1e-12);
            let (px, py) = (t.apply([x, y]), t.apply([u, v]));
            let d0 = ((x - u).powi(2) + (y - v).powi(2)).sqrt();
            let d1 = ((px[0] - py[0]).powi(2) + (px[1] - py[1]).powi(2)).sqrt();
            prop_assert!((d0 - d1).abs() < 1e-12);
            let w = t.inverted().apply(t.apply([x, y]));
            prop_assert!((w[0] - x).abs() < 1e-12 && (w[1] - y).abs() < 1e-12);
        }
    }
}

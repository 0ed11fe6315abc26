//! Admissible channel domains: a straight inlet section, a curved middle
//! piece bounded by two wall curves, and a straight outlet section.

use std::fmt;
use std::sync::Arc;

use super::transform::{Point, RigidTransform};
use super::GeometryError;

const TANGENCY_TOL: f64 = 1e-8;
const JUNCTION_TOL: f64 = 1e-10;

/// A straight section, `(0, length) x (-half_height, half_height)` in the
/// local frame given by `transform` (physical -> local).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Section {
    pub length: f64,
    pub half_height: f64,
    pub transform: RigidTransform,
}

impl Section {
    pub fn new(length: f64, half_height: f64, transform: RigidTransform) -> Self {
        Section { length, half_height, transform }
    }

    pub fn to_physical(&self, local: Point) -> Point {
        self.transform.inverse(local)
    }

    pub fn to_local(&self, x: Point) -> Point {
        self.transform.apply(x)
    }

    /// Section axis in physical coordinates.
    pub fn axis(&self) -> Point {
        self.transform.vector_to_physical([1.0, 0.0])
    }

    pub fn contains(&self, x: Point, tol: f64) -> bool {
        let l = self.to_local(x);
        l[0] >= -tol && l[0] <= self.length + tol && l[1].abs() <= self.half_height + tol
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HermiteKnot {
    pub point: Point,
    pub tangent: Point,
}

type CurveFn = dyn Fn(f64) -> Point + Send + Sync;

/// A C1 wall curve parametrized over `[0, 1]`, running from the inlet
/// section to the outlet section.
#[derive(Clone)]
pub enum WallCurve {
    /// Piecewise cubic Hermite through the knots, one segment per
    /// consecutive pair, each on an equal share of the parameter range.
    Hermite(Vec<HermiteKnot>),
    ClosedForm { position: Arc<CurveFn>, tangent: Arc<CurveFn> },
}

impl fmt::Debug for WallCurve {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            WallCurve::Hermite(k) => f.debug_tuple("Hermite").field(k).finish(),
            WallCurve::ClosedForm { .. } => f.write_str("ClosedForm(..)"),
        }
    }
}

impl WallCurve {
    pub fn hermite(p0: Point, t0: Point, p1: Point, t1: Point) -> Self {
        WallCurve::Hermite(vec![
            HermiteKnot { point: p0, tangent: t0 },
            HermiteKnot { point: p1, tangent: t1 },
        ])
    }

    pub fn closed_form(
        position: impl Fn(f64) -> Point + Send + Sync + 'static,
        tangent: impl Fn(f64) -> Point + Send + Sync + 'static,
    ) -> Self {
        WallCurve::ClosedForm { position: Arc::new(position), tangent: Arc::new(tangent) }
    }

    fn segment(knots: &[HermiteKnot], s: f64) -> (usize, f64) {
        let m = knots.len() - 1;
        let u = s.clamp(0.0, 1.0) * m as f64;
        let i = (u.floor() as usize).min(m - 1);
        (i, u - i as f64)
    }

    pub fn position(&self, s: f64) -> Point {
        match self {
            WallCurve::Hermite(k) => {
                let (i, t) = Self::segment(k, s);
                let (a, b) = (&k[i], &k[i + 1]);
                let (t2, t3) = (t * t, t * t * t);
                let h00 = 2.0 * t3 - 3.0 * t2 + 1.0;
                let h10 = t3 - 2.0 * t2 + t;
                let h01 = -2.0 * t3 + 3.0 * t2;
                let h11 = t3 - t2;
                [
                    h00 * a.point[0] + h10 * a.tangent[0] + h01 * b.point[0] + h11 * b.tangent[0],
                    h00 * a.point[1] + h10 * a.tangent[1] + h01 * b.point[1] + h11 * b.tangent[1],
                ]
            }
            WallCurve::ClosedForm { position, .. } => position(s),
        }
    }

    /// Derivative with respect to the curve parameter.
    pub fn tangent(&self, s: f64) -> Point {
        match self {
            WallCurve::Hermite(k) => {
                let (i, t) = Self::segment(k, s);
                let (a, b) = (&k[i], &k[i + 1]);
                let m = (k.len() - 1) as f64;
                let t2 = t * t;
                let d00 = 6.0 * t2 - 6.0 * t;
                let d10 = 3.0 * t2 - 4.0 * t + 1.0;
                let d01 = -6.0 * t2 + 6.0 * t;
                let d11 = 3.0 * t2 - 2.0 * t;
                [
                    m * (d00 * a.point[0] + d10 * a.tangent[0] + d01 * b.point[0] + d11 * b.tangent[0]),
                    m * (d00 * a.point[1] + d10 * a.tangent[1] + d01 * b.point[1] + d11 * b.tangent[1]),
                ]
            }
            WallCurve::ClosedForm { tangent, .. } => tangent(s),
        }
    }

    /// Polyline length with `n` chords.
    pub fn length(&self, n: usize) -> f64 {
        let mut len = 0.0;
        let mut p = self.position(0.0);
        for i in 1..=n {
            let q = self.position(i as f64 / n as f64);
            len += dist(p, q);
            p = q;
        }
        len
    }
}

#[derive(Debug, Clone)]
pub struct DomainSpec {
    pub inlet: Section,
    pub outlet: Section,
    /// Lower and upper wall of the middle piece; `None` when the sections
    /// abut directly.
    pub walls: Option<[WallCurve; 2]>,
}

/// A validated [`DomainSpec`].
#[derive(Debug, Clone)]
pub struct Domain {
    spec: DomainSpec,
    outlet_normal: Point,
    inlet_normal: Point,
}

impl DomainSpec {
    /// Straight channel `(0, l1 + l2) x (-h, h)` split into the two sections.
    pub fn straight_channel(inlet_length: f64, outlet_length: f64, half_height: f64) -> Self {
        DomainSpec {
            inlet: Section::new(inlet_length, half_height, RigidTransform::identity()),
            outlet: Section::new(
                outlet_length,
                half_height,
                RigidTransform::section_frame([inlet_length, 0.0], 0.0),
            ),
            walls: None,
        }
    }

    /// Horizontal inlet and outlet joined by a cubic S-shaped piece that
    /// shifts the centerline by `offset` over `bend_length`.
    pub fn s_bend(
        inlet_length: f64,
        bend_length: f64,
        offset: f64,
        outlet_length: f64,
        half_height: f64,
    ) -> Self {
        Self::horizontal_transition(
            inlet_length,
            half_height,
            bend_length,
            offset,
            outlet_length,
            half_height,
        )
    }

    /// Horizontal channel whose half-height changes from `h1` to `h2` over
    /// `transition_length`.
    pub fn expansion(
        inlet_length: f64,
        h1: f64,
        transition_length: f64,
        outlet_length: f64,
        h2: f64,
    ) -> Self {
        Self::horizontal_transition(inlet_length, h1, transition_length, 0.0, outlet_length, h2)
    }

    fn horizontal_transition(
        l1: f64,
        h1: f64,
        lm: f64,
        offset: f64,
        l2: f64,
        h2: f64,
    ) -> Self {
        let x0 = l1;
        let x1 = l1 + lm;
        let tan = [lm, 0.0];
        let lower = WallCurve::hermite([x0, -h1], tan, [x1, offset - h2], tan);
        let upper = WallCurve::hermite([x0, h1], tan, [x1, offset + h2], tan);
        DomainSpec {
            inlet: Section::new(l1, h1, RigidTransform::identity()),
            outlet: Section::new(l2, h2, RigidTransform::section_frame([x1, offset], 0.0)),
            walls: Some([lower, upper]),
        }
    }

    /// Apply a rigid motion to the whole domain: `motion` maps the old
    /// physical coordinates to the new ones.
    pub fn moved(&self, motion: &RigidTransform) -> DomainSpec {
        let inv = motion.inverted();
        let move_section = |s: &Section| Section { transform: s.transform.compose(&inv), ..*s };
        let walls = self.walls.as_ref().map(|w| {
            let moved = |c: &WallCurve| match c {
                WallCurve::Hermite(k) => WallCurve::Hermite(
                    k.iter()
                        .map(|kn| HermiteKnot {
                            point: motion.apply(kn.point),
                            tangent: motion.vector_to_local(kn.tangent),
                        })
                        .collect(),
                ),
                WallCurve::ClosedForm { position, tangent } => {
                    let (p, t, m) = (position.clone(), tangent.clone(), *motion);
                    let m2 = m;
                    WallCurve::closed_form(move |s| m.apply(p(s)), move |s| m2.vector_to_local(t(s)))
                }
            };
            [moved(&w[0]), moved(&w[1])]
        });
        DomainSpec { inlet: move_section(&self.inlet), outlet: move_section(&self.outlet), walls }
    }

    /// Junction corners `[lower, upper]` of the inlet section.
    pub fn inlet_junction(&self) -> [Point; 2] {
        let s = &self.inlet;
        [s.to_physical([s.length, -s.half_height]), s.to_physical([s.length, s.half_height])]
    }

    /// Junction corners `[lower, upper]` of the outlet section.
    pub fn outlet_junction(&self) -> [Point; 2] {
        let s = &self.outlet;
        [s.to_physical([0.0, -s.half_height]), s.to_physical([0.0, s.half_height])]
    }

    /// Closed boundary polygon, counterclockwise, with `n` chords per wall.
    pub fn boundary_polygon(&self, n: usize) -> Vec<Point> {
        let (i, o) = (&self.inlet, &self.outlet);
        let mut poly = vec![i.to_physical([0.0, -i.half_height])];
        poly.push(i.to_physical([i.length, -i.half_height]));
        if let Some(w) = &self.walls {
            for k in 1..n {
                poly.push(w[0].position(k as f64 / n as f64));
            }
        }
        poly.push(o.to_physical([0.0, -o.half_height]));
        poly.push(o.to_physical([o.length, -o.half_height]));
        poly.push(o.to_physical([o.length, o.half_height]));
        poly.push(o.to_physical([0.0, o.half_height]));
        if let Some(w) = &self.walls {
            for k in (1..n).rev() {
                poly.push(w[1].position(k as f64 / n as f64));
            }
        }
        poly.push(i.to_physical([i.length, i.half_height]));
        poly.push(i.to_physical([0.0, i.half_height]));
        dedup_consecutive(poly)
    }
}

fn dedup_consecutive(poly: Vec<Point>) -> Vec<Point> {
    let mut out: Vec<Point> = Vec::with_capacity(poly.len());
    for p in poly {
        if out.last().is_none_or(|q| dist(*q, p) > JUNCTION_TOL) {
            out.push(p);
        }
    }
    while out.len() > 1 && dist(out[0], *out.last().unwrap()) <= JUNCTION_TOL {
        out.pop();
    }
    out
}

pub(crate) fn dist(a: Point, b: Point) -> f64 {
    ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2)).sqrt()
}

fn cross(a: Point, b: Point) -> f64 {
    a[0] * b[1] - a[1] * b[0]
}

pub(crate) fn polygon_area(poly: &[Point]) -> f64 {
    let n = poly.len();
    (0..n).map(|i| cross(poly[i], poly[(i + 1) % n])).sum::<f64>() * 0.5
}

fn segments_intersect(p1: Point, p2: Point, q1: Point, q2: Point) -> bool {
    let d = |a: Point, b: Point, c: Point| cross([b[0] - a[0], b[1] - a[1]], [c[0] - a[0], c[1] - a[1]]);
    let (d1, d2) = (d(q1, q2, p1), d(q1, q2, p2));
    let (d3, d4) = (d(p1, p2, q1), d(p1, p2, q2));
    let scale = dist(p1, p2).max(dist(q1, q2));
    let eps = 1e-14 * scale * scale;
    if ((d1 > eps && d2 < -eps) || (d1 < -eps && d2 > eps)) && ((d3 > eps && d4 < -eps) || (d3 < -eps && d4 > eps))
    {
        return true;
    }
    // Collinear overlaps.
    let on = |a: Point, b: Point, c: Point, dv: f64| {
        dv.abs() <= eps
            && c[0] >= a[0].min(b[0]) - 1e-14
            && c[0] <= a[0].max(b[0]) + 1e-14
            && c[1] >= a[1].min(b[1]) - 1e-14
            && c[1] <= a[1].max(b[1]) + 1e-14
    };
    on(q1, q2, p1, d1) || on(q1, q2, p2, d2) || on(p1, p2, q1, d3) || on(p1, p2, q2, d4)
}

fn angle_between(a: Point, b: Point) -> f64 {
    cross(a, b).atan2(a[0] * b[0] + a[1] * b[1]).abs()
}

pub fn build_domain(spec: DomainSpec) -> Result<Domain, GeometryError> {
    for (name, s) in [("inlet", &spec.inlet), ("outlet", &spec.outlet)] {
        if !(s.length > 0.0 && s.half_height > 0.0) || !s.length.is_finite() || !s.half_height.is_finite() {
            return Err(GeometryError::new(format!(
                "{name} section needs positive length and half-height"
            )));
        }
        s.transform.validate()?;
    }
    let [il, iu] = spec.inlet_junction();
    let [ol, ou] = spec.outlet_junction();
    let (ai, ao) = (spec.inlet.axis(), spec.outlet.axis());
    match &spec.walls {
        None => {
            if dist(il, ol) > JUNCTION_TOL || dist(iu, ou) > JUNCTION_TOL {
                return Err(GeometryError::new("sections do not abut and no wall curves are given"));
            }
            if angle_between(ai, ao) > TANGENCY_TOL {
                return Err(GeometryError::new("abutting sections have different axes"));
            }
        }
        Some(walls) => {
            for (w, start, end, name) in [(&walls[0], il, ol, "lower"), (&walls[1], iu, ou, "upper")] {
                if let WallCurve::Hermite(k) = w {
                    if k.len() < 2 {
                        return Err(GeometryError::new(format!("{name} wall needs at least two knots")));
                    }
                }
                if dist(w.position(0.0), start) > JUNCTION_TOL || dist(w.position(1.0), end) > JUNCTION_TOL {
                    return Err(GeometryError::new(format!(
                        "{name} wall does not connect the section corners"
                    )));
                }
                let (t0, t1) = (w.tangent(0.0), w.tangent(1.0));
                if angle_between(t0, ai) >= TANGENCY_TOL || angle_between(t1, ao) >= TANGENCY_TOL {
                    return Err(GeometryError::new(format!(
                        "{name} wall is not tangent to the section axis at a junction"
                    )));
                }
            }
        }
    }
    let poly = spec.boundary_polygon(256);
    let n = poly.len();
    for i in 0..n {
        for j in i + 2..n {
            if i == 0 && j == n - 1 {
                continue;
            }
            if segments_intersect(poly[i], poly[(i + 1) % n], poly[j], poly[(j + 1) % n]) {
                return Err(GeometryError::new("boundary is not a simple closed curve"));
            }
        }
    }
    if polygon_area(&poly) <= 0.0 {
        return Err(GeometryError::new("boundary is clockwise; lower and upper walls are swapped"));
    }
    let outlet_normal = ao;
    let inlet_normal = [-ai[0], -ai[1]];
    Ok(Domain { spec, outlet_normal, inlet_normal })
}

impl Domain {
    pub fn spec(&self) -> &DomainSpec {
        &self.spec
    }

    pub fn inlet(&self) -> &Section {
        &self.spec.inlet
    }

    pub fn outlet(&self) -> &Section {
        &self.spec.outlet
    }

    /// Constant outward unit normal on the outlet.
    pub fn outlet_normal(&self) -> Point {
        self.outlet_normal
    }

    pub fn inlet_normal(&self) -> Point {
        self.inlet_normal
    }

    pub fn area_estimate(&self) -> f64 {
        polygon_area(&self.spec.boundary_polygon(2048))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn straight_channel_is_valid() {
        let d = build_domain(DomainSpec::straight_channel(1.0, 1.0, 1.0)).unwrap();
        assert_eq!(d.outlet_normal(), [1.0, 0.0]);
        assert_eq!(d.inlet_normal(), [-1.0, 0.0]);
        assert!((d.area_estimate() - 4.0).abs() < 1e-12);
    }

    #[test]
    fn s_bend_is_valid_and_tangent() {
        let d = build_domain(DomainSpec::s_bend(1.0, 2.0, 1.0, 1.5, 0.5)).unwrap();
        let w = &d.spec().walls.as_ref().unwrap()[0];
        // Derivatives sampled just inside the junctions approach the axis.
        let t = w.tangent(1e-9);
        assert!(t[1].abs() / t[0] < 1e-6);
        assert_eq!(d.outlet_normal(), [1.0, 0.0]);
    }

    #[test]
    fn self_intersecting_walls_are_rejected() {
        // Lower wall swings above the upper wall and back.
        let mut spec = DomainSpec::s_bend(1.0, 2.0, 0.0, 1.0, 0.5);
        let lower = WallCurve::Hermite(vec![
            HermiteKnot { point: [1.0, -0.5], tangent: [1.0, 0.0] },
            HermiteKnot { point: [2.0, 1.5], tangent: [1.0, 0.0] },
            HermiteKnot { point: [3.0, -0.5], tangent: [1.0, 0.0] },
        ]);
        spec.walls.as_mut().unwrap()[0] = lower;
        assert!(build_domain(spec).is_err());
    }

    #[test]
    fn kinked_junction_is_rejected() {
        let mut spec = DomainSpec::s_bend(1.0, 2.0, 0.5, 1.0, 0.5);
        spec.walls.as_mut().unwrap()[0] =
            WallCurve::hermite([1.0, -0.5], [2.0, 0.1], [3.0, 0.0], [2.0, 0.0]);
        assert!(build_domain(spec).is_err());
    }

    #[test]
    fn rotated_domain_keeps_normal_consistent() {
        let m = RigidTransform::from_angle(0.6, [0.3, -2.0]);
        let d = build_domain(DomainSpec::s_bend(1.0, 2.0, 1.0, 1.0, 0.5).moved(&m)).unwrap();
        let n = d.outlet_normal();
        assert!((n[0] - 0.6f64.cos()).abs() < 1e-14 && (n[1] - 0.6f64.sin()).abs() < 1e-14);
    }

    #[test]
    fn closed_form_walls() {
        // Quarter-annulus-like bend built from closed-form quintic blends.
        let blend = |s: f64| s * s * s * (10.0 - 15.0 * s + 6.0 * s * s);
        let dblend = |s: f64| 30.0 * s * s * (1.0 - s) * (1.0 - s);
        let lower = WallCurve::closed_form(
            move |s| [1.0 + 2.0 * s, -0.5 + 0.8 * blend(s)],
            move |s| [2.0, 0.8 * dblend(s)],
        );
        let upper = WallCurve::closed_form(
            move |s| [1.0 + 2.0 * s, 0.5 + 0.8 * blend(s)],
            move |s| [2.0, 0.8 * dblend(s)],
        );
        let spec = DomainSpec {
            inlet: Section::new(1.0, 0.5, RigidTransform::identity()),
            outlet: Section::new(1.0, 0.5, RigidTransform::section_frame([3.0, 0.8], 0.0)),
            walls: Some([lower, upper]),
        };
        assert!(build_domain(spec).is_ok());
    }
}

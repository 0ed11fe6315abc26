//! Triangle meshes and structured channel meshing.

use std::collections::HashMap;

use super::domain::{dist, Domain, Section};
use super::transform::Point;
use super::MeshError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum BoundaryTag {
    Inlet,
    Wall,
    Outlet,
    /// Cut line of an extracted sub-mesh.
    Interface,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Region {
    Omega0,
    Omega1,
    Omega2,
    OmegaSharp,
}

impl Region {
    pub fn code(self) -> u8 {
        match self {
            Region::Omega0 => 0,
            Region::Omega1 => 1,
            Region::Omega2 => 2,
            Region::OmegaSharp => 3,
        }
    }

    pub fn from_code(c: u8) -> Option<Region> {
        Some(match c {
            0 => Region::Omega0,
            1 => Region::Omega1,
            2 => Region::Omega2,
            3 => Region::OmegaSharp,
            _ => return None,
        })
    }
}

/// Boundary edge oriented with the domain on its left.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundaryEdge {
    pub vertices: [usize; 2],
    pub tag: BoundaryTag,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Mesh {
    pub vertices: Vec<Point>,
    /// Counterclockwise vertex triples.
    pub triangles: Vec<[usize; 3]>,
    pub boundary_edges: Vec<BoundaryEdge>,
    pub regions: Vec<Region>,
}

impl Mesh {
    pub fn num_vertices(&self) -> usize {
        self.vertices.len()
    }

    pub fn num_triangles(&self) -> usize {
        self.triangles.len()
    }

    pub fn signed_area(&self, t: usize) -> f64 {
        let [a, b, c] = self.triangles[t].map(|i| self.vertices[i]);
        0.5 * ((b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0]))
    }

    pub fn area(&self) -> f64 {
        (0..self.num_triangles()).map(|t| self.signed_area(t)).sum()
    }

    pub fn centroid(&self, t: usize) -> Point {
        let [a, b, c] = self.triangles[t].map(|i| self.vertices[i]);
        [(a[0] + b[0] + c[0]) / 3.0, (a[1] + b[1] + c[1]) / 3.0]
    }

    /// Smallest interior angle of triangle `t`, in degrees.
    pub fn min_angle(&self, t: usize) -> f64 {
        let p = self.triangles[t].map(|i| self.vertices[i]);
        let mut m = f64::INFINITY;
        for k in 0..3 {
            let (a, b, c) = (p[k], p[(k + 1) % 3], p[(k + 2) % 3]);
            let u = [b[0] - a[0], b[1] - a[1]];
            let v = [c[0] - a[0], c[1] - a[1]];
            let ang = (u[0] * v[1] - u[1] * v[0]).atan2(u[0] * v[0] + u[1] * v[1]).abs();
            m = m.min(ang.to_degrees());
        }
        m
    }

    pub fn min_angle_overall(&self) -> f64 {
        (0..self.num_triangles()).map(|t| self.min_angle(t)).fold(f64::INFINITY, f64::min)
    }

    pub fn max_edge_length(&self) -> f64 {
        let mut m = 0.0f64;
        for t in &self.triangles {
            for k in 0..3 {
                m = m.max(dist(self.vertices[t[k]], self.vertices[t[(k + 1) % 3]]));
            }
        }
        m
    }

    pub fn edge_length(&self, e: &BoundaryEdge) -> f64 {
        dist(self.vertices[e.vertices[0]], self.vertices[e.vertices[1]])
    }

    /// Outward unit normal of a boundary edge.
    pub fn edge_normal(&self, e: &BoundaryEdge) -> Point {
        let (a, b) = (self.vertices[e.vertices[0]], self.vertices[e.vertices[1]]);
        let l = dist(a, b);
        [(b[1] - a[1]) / l, -(b[0] - a[0]) / l]
    }

    pub fn tag_length(&self, tag: BoundaryTag) -> f64 {
        self.boundary_edges.iter().filter(|e| e.tag == tag).map(|e| self.edge_length(e)).sum()
    }

    /// Vertices shared by an edge tagged `a` and an edge tagged `b`.
    pub fn corner_vertices(&self, a: BoundaryTag, b: BoundaryTag) -> Vec<usize> {
        let mut has = HashMap::<usize, (bool, bool)>::new();
        for e in &self.boundary_edges {
            for &v in &e.vertices {
                let entry = has.entry(v).or_default();
                entry.0 |= e.tag == a;
                entry.1 |= e.tag == b;
            }
        }
        let mut v: Vec<usize> = has.into_iter().filter(|(_, f)| f.0 && f.1).map(|(v, _)| v).collect();
        v.sort_unstable();
        v
    }

    /// Area enclosed by the boundary edges (Green's theorem).
    pub fn boundary_enclosed_area(&self) -> f64 {
        self.boundary_edges
            .iter()
            .map(|e| {
                let (a, b) = (self.vertices[e.vertices[0]], self.vertices[e.vertices[1]]);
                0.5 * (a[0] * b[1] - a[1] * b[0])
            })
            .sum()
    }

    /// Check the structural invariants.
    pub fn validate(&self) -> Result<(), MeshError> {
        for (t, tri) in self.triangles.iter().enumerate() {
            if tri.iter().any(|&v| v >= self.vertices.len()) {
                return Err(MeshError::Invalid(format!("triangle {t} references a missing vertex")));
            }
            if self.signed_area(t) <= 0.0 {
                return Err(MeshError::Invalid(format!("triangle {t} is not counterclockwise")));
            }
        }
        if self.regions.len() != self.triangles.len() {
            return Err(MeshError::Invalid("region label count mismatch".into()));
        }
        let mut count: HashMap<(usize, usize), usize> = HashMap::new();
        for tri in &self.triangles {
            for k in 0..3 {
                let (a, b) = (tri[k], tri[(k + 1) % 3]);
                *count.entry((a.min(b), a.max(b))).or_default() += 1;
            }
        }
        let mut boundary: HashMap<(usize, usize), usize> = HashMap::new();
        for e in &self.boundary_edges {
            let [a, b] = e.vertices;
            *boundary.entry((a.min(b), a.max(b))).or_default() += 1;
        }
        for (k, &c) in &count {
            if c > 2 {
                return Err(MeshError::Invalid(format!("edge {k:?} shared by {c} triangles")));
            }
            let tagged = boundary.get(k).copied().unwrap_or(0);
            if (c == 1) != (tagged == 1) || tagged > 1 {
                return Err(MeshError::Invalid(format!("edge {k:?} has inconsistent boundary tags")));
            }
        }
        if boundary.len() != self.boundary_edges.len() || boundary.keys().any(|k| !count.contains_key(k)) {
            return Err(MeshError::Invalid("boundary edge not in any triangle".into()));
        }
        Ok(())
    }

    /// Keep the triangles whose region satisfies `keep`. Returns the
    /// sub-mesh and, for each of its vertices, the parent vertex index.
    pub fn submesh(&self, keep: impl Fn(Region) -> bool) -> (Mesh, Vec<usize>) {
        let mut map = vec![usize::MAX; self.vertices.len()];
        let mut parent = Vec::new();
        let mut triangles = Vec::new();
        let mut regions = Vec::new();
        for (t, tri) in self.triangles.iter().enumerate() {
            if !keep(self.regions[t]) {
                continue;
            }
            let mut nt = [0; 3];
            for k in 0..3 {
                let v = tri[k];
                if map[v] == usize::MAX {
                    map[v] = parent.len();
                    parent.push(v);
                }
                nt[k] = map[v];
            }
            triangles.push(nt);
            regions.push(self.regions[t]);
        }
        let tags: HashMap<(usize, usize), BoundaryTag> = self
            .boundary_edges
            .iter()
            .map(|e| {
                let [a, b] = e.vertices;
                ((a.min(b), a.max(b)), e.tag)
            })
            .collect();
        let mut count: HashMap<(usize, usize), usize> = HashMap::new();
        for tri in &triangles {
            for k in 0..3 {
                let (a, b) = (tri[k], tri[(k + 1) % 3]);
                *count.entry((a.min(b), a.max(b))).or_default() += 1;
            }
        }
        let mut boundary_edges = Vec::new();
        for tri in &triangles {
            for k in 0..3 {
                let (a, b) = (tri[k], tri[(k + 1) % 3]);
                if count[&(a.min(b), a.max(b))] == 1 {
                    let (pa, pb) = (parent[a], parent[b]);
                    let tag = tags.get(&(pa.min(pb), pa.max(pb))).copied().unwrap_or(BoundaryTag::Interface);
                    boundary_edges.push(BoundaryEdge { vertices: [a, b], tag });
                }
            }
        }
        let vertices = parent.iter().map(|&p| self.vertices[p]).collect();
        (Mesh { vertices, triangles, boundary_edges, regions }, parent)
    }
}

/// Structured mesh of a validated domain.
///
/// Columns are placed along the channel: the inlet section, the middle
/// piece, the first third of the outlet section and the rest, so that mesh
/// lines fall on the outlet stations `x2 = 0` and `x2 = l2/3`. Each column
/// is a straight cut between the two walls divided into equal rows, and each
/// quadrilateral is split along its shorter diagonal.
pub fn generate_mesh(domain: &Domain, target_h: f64) -> Result<Mesh, MeshError> {
    let spec = domain.spec();
    let (inl, out) = (&spec.inlet, &spec.outlet);
    if !(target_h > 0.0) || target_h >= inl.half_height.min(out.half_height) {
        return Err(MeshError::Invalid(format!(
            "target_h = {target_h} must be positive and below the smallest half-height"
        )));
    }
    let pieces = |len: f64| ((len / target_h) - 1e-9).ceil().max(1.0) as usize;

    #[derive(Clone, Copy, PartialEq)]
    enum Piece {
        Inlet,
        Middle,
        Sharp,
        Outlet,
    }
    let mut cols: Vec<(Point, Point, Piece)> = Vec::new();
    let section_col = |s: &Section, x: f64| (s.to_physical([x, -s.half_height]), s.to_physical([x, s.half_height]));

    let n1 = pieces(inl.length);
    for i in 0..=n1 {
        let (a, b) = section_col(inl, inl.length * i as f64 / n1 as f64);
        cols.push((a, b, Piece::Inlet));
    }
    if let Some(w) = &spec.walls {
        let len = w[0].length(512).max(w[1].length(512));
        let n0 = pieces(len);
        // Equal parameter spacing; refine if chords exceed the target.
        let mut n = n0;
        loop {
            let max_chord = (0..n)
                .flat_map(|i| {
                    let (s0, s1) = (i as f64 / n as f64, (i + 1) as f64 / n as f64);
                    [dist(w[0].position(s0), w[0].position(s1)), dist(w[1].position(s0), w[1].position(s1))]
                })
                .fold(0.0, f64::max);
            if max_chord <= target_h * (1.0 + 1e-9) || n > 64 * n0 {
                break;
            }
            n += 1;
        }
        for i in 1..n {
            let s = i as f64 / n as f64;
            cols.push((w[0].position(s), w[1].position(s), Piece::Middle));
        }
    }
    let third = out.length / 3.0;
    let ns = pieces(third);
    let nr = pieces(out.length - third);
    for i in 0..=ns {
        let (a, b) = section_col(out, third * i as f64 / ns as f64);
        // Column 0 coincides with the last inlet column when there is no middle piece.
        if i == 0 && spec.walls.is_none() {
            continue;
        }
        cols.push((a, b, Piece::Sharp));
    }
    for i in 1..=nr {
        let (a, b) = section_col(out, third + (out.length - third) * i as f64 / nr as f64);
        cols.push((a, b, Piece::Outlet));
    }

    let max_width = cols.iter().map(|c| dist(c.0, c.1)).fold(0.0, f64::max);
    let ny = pieces(max_width);
    let nx = cols.len() - 1;
    let idx = |i: usize, k: usize| i * (ny + 1) + k;
    let mut vertices = Vec::with_capacity((nx + 1) * (ny + 1));
    for &(a, b, _) in &cols {
        for k in 0..=ny {
            let t = k as f64 / ny as f64;
            vertices.push([a[0] + t * (b[0] - a[0]), a[1] + t * (b[1] - a[1])]);
        }
    }
    // A quad column takes the piece of its right-hand line, except that the
    // quad ending on the outlet junction still belongs to the middle piece.
    let region_of = |i: usize| -> Region {
        match cols[i + 1].2 {
            Piece::Inlet => Region::Omega1,
            Piece::Middle => Region::Omega0,
            Piece::Sharp if cols[i].2 == Piece::Sharp || spec.walls.is_none() => Region::OmegaSharp,
            Piece::Sharp => Region::Omega0,
            Piece::Outlet => Region::Omega2,
        }
    };
    let movable: Vec<bool> = (0..=nx)
        .map(|i| cols[i].2 == Piece::Middle)
        .collect();

    let mut mesh = Mesh { vertices, triangles: vec![], boundary_edges: vec![], regions: vec![] };
    let triangulate = |mesh: &mut Mesh| {
        mesh.triangles.clear();
        mesh.regions.clear();
        for i in 0..nx {
            let r = region_of(i);
            for k in 0..ny {
                let (a, b, c, d) = (idx(i, k), idx(i + 1, k), idx(i + 1, k + 1), idx(i, k + 1));
                let v = &mesh.vertices;
                if dist(v[a], v[c]) <= dist(v[b], v[d]) * (1.0 + 1e-12) {
                    mesh.triangles.push([a, b, c]);
                    mesh.triangles.push([a, c, d]);
                } else {
                    mesh.triangles.push([a, b, d]);
                    mesh.triangles.push([b, c, d]);
                }
                mesh.regions.push(r);
                mesh.regions.push(r);
            }
        }
    };
    triangulate(&mut mesh);

    const QUALITY_FLOOR: f64 = 15.0;
    const MAX_PASSES: usize = 50;
    let mut passes = 0;
    while mesh.min_angle_overall() <= QUALITY_FLOOR || (0..mesh.num_triangles()).any(|t| mesh.signed_area(t) <= 0.0) {
        if passes == MAX_PASSES || !movable.iter().any(|&m| m) {
            return Err(MeshError::QualityFloor { min_angle: mesh.min_angle_overall(), passes });
        }
        let old = mesh.vertices.clone();
        for i in 1..nx {
            if !movable[i] {
                continue;
            }
            for k in 1..ny {
                let nb = [idx(i - 1, k), idx(i + 1, k), idx(i, k - 1), idx(i, k + 1)];
                let mut p = [0.0, 0.0];
                for &n in &nb {
                    p[0] += 0.25 * old[n][0];
                    p[1] += 0.25 * old[n][1];
                }
                mesh.vertices[idx(i, k)] = p;
            }
        }
        triangulate(&mut mesh);
        passes += 1;
    }

    for k in 0..ny {
        mesh.boundary_edges.push(BoundaryEdge { vertices: [idx(0, k + 1), idx(0, k)], tag: BoundaryTag::Inlet });
        mesh.boundary_edges.push(BoundaryEdge { vertices: [idx(nx, k), idx(nx, k + 1)], tag: BoundaryTag::Outlet });
    }
    for i in 0..nx {
        mesh.boundary_edges.push(BoundaryEdge { vertices: [idx(i, 0), idx(i + 1, 0)], tag: BoundaryTag::Wall });
        mesh.boundary_edges.push(BoundaryEdge { vertices: [idx(i + 1, ny), idx(i, ny)], tag: BoundaryTag::Wall });
    }
    mesh.validate()?;
    Ok(mesh)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{build_domain, DomainSpec};

    fn channel(l1: f64, l2: f64, h: f64, th: f64) -> Mesh {
        let d = build_domain(DomainSpec::straight_channel(l1, l2, h)).unwrap();
        generate_mesh(&d, th).unwrap()
    }

    #[test]
    fn unit_square_counts_and_tags() {
        let m = channel(0.5, 0.5, 0.5, 0.25);
        // 2 inlet, 1 sharp and 2 outlet columns by 4 rows.
        assert_eq!(m.num_triangles(), 40);
        assert!((m.tag_length(BoundaryTag::Inlet) - 1.0).abs() < 1e-10);
        assert!((m.tag_length(BoundaryTag::Outlet) - 1.0).abs() < 1e-10);
        assert_eq!(m.corner_vertices(BoundaryTag::Inlet, BoundaryTag::Wall).len(), 2);
        assert_eq!(m.corner_vertices(BoundaryTag::Outlet, BoundaryTag::Wall).len(), 2);
        assert!((m.area() - m.boundary_enclosed_area()).abs() < 1e-12);
        assert!((m.area() - 1.0).abs() < 1e-12);
        let tags: std::collections::BTreeSet<_> = m.boundary_edges.iter().map(|e| e.tag).collect();
        assert_eq!(tags.len(), 3);
    }

    #[test]
    fn halving_doubles_inlet_edges() {
        let count = |m: &Mesh| m.boundary_edges.iter().filter(|e| e.tag == BoundaryTag::Inlet).count();
        let a = channel(1.0, 1.5, 0.5, 0.2);
        let b = channel(1.0, 1.5, 0.5, 0.1);
        assert_eq!(2 * count(&a), count(&b));
    }

    #[test]
    fn regions_follow_the_outlet_stations() {
        let d = build_domain(DomainSpec::s_bend(1.0, 2.0, 1.0, 1.5, 0.5)).unwrap();
        let m = generate_mesh(&d, 0.1).unwrap();
        let out = d.outlet();
        for t in 0..m.num_triangles() {
            let c = m.centroid(t);
            let l = out.to_local(c);
            let inside_outlet = out.contains(c, 1e-12);
            match m.regions[t] {
                Region::OmegaSharp => assert!(inside_outlet && l[0] < out.length / 3.0),
                Region::Omega2 => assert!(inside_outlet && l[0] > out.length / 3.0),
                Region::Omega1 => assert!(d.inlet().contains(c, 1e-12)),
                Region::Omega0 => assert!(!inside_outlet && !d.inlet().contains(c, 1e-12)),
            }
        }
        assert!(m.max_edge_length() <= 0.2);
        assert!((m.area() - m.boundary_enclosed_area()).abs() < 1e-12);
    }

    #[test]
    fn s_bend_quality() {
        let d = build_domain(DomainSpec::s_bend(1.0, 2.0, 1.0, 1.5, 0.5)).unwrap();
        let m = generate_mesh(&d, 0.05).unwrap();
        assert!(m.min_angle_overall() > 15.0);
        assert!(m.max_edge_length() <= 0.1);
        assert!((m.tag_length(BoundaryTag::Outlet) - 1.0).abs() < 1e-10);
    }

    #[test]
    fn submesh_marks_cut_edges() {
        let m = channel(1.0, 1.5, 0.5, 0.125);
        let (s, parent) = m.submesh(|r| r == Region::OmegaSharp);
        s.validate().unwrap();
        assert!((s.area() - 0.5).abs() < 1e-12);
        assert!((s.tag_length(BoundaryTag::Interface) - 2.0).abs() < 1e-12);
        assert_eq!(s.tag_length(BoundaryTag::Inlet), 0.0);
        for (i, &p) in parent.iter().enumerate() {
            assert_eq!(s.vertices[i], m.vertices[p]);
        }
    }

    #[test]
    fn rejects_oversized_target() {
        let d = build_domain(DomainSpec::straight_channel(1.0, 1.0, 0.5)).unwrap();
        assert!(generate_mesh(&d, 0.5).is_err());
    }
}

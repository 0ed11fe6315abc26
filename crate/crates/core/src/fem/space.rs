//! Taylor–Hood P2/P1 space on a triangle mesh.
//!
//! Velocity nodes are the mesh vertices followed by the edge midpoints, with
//! edges numbered in sorted vertex-pair order. Velocity degrees of freedom
//! are blocked by component: `dof(c, n) = c * n_nodes + n`. Pressure degrees
//! of freedom are the vertices.

use std::collections::HashMap;
use std::sync::Arc;

use super::basis::{p2_gradients, p2_values, P2_EDGES};
use crate::field::{ScalarField, VectorField};
use crate::geometry::{generate_mesh, BoundaryTag, Domain, Mesh, MeshError, Point};

/// Boundary classification of a velocity node. When a node lies on several
/// boundary parts the later variant wins, so inlet corners are wall nodes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum NodeKind {
    Interior,
    Outlet,
    Interface,
    Inlet,
    Wall,
}

impl NodeKind {
    pub fn is_dirichlet(self) -> bool {
        matches!(self, NodeKind::Inlet | NodeKind::Wall | NodeKind::Interface)
    }

    fn of_tag(tag: BoundaryTag) -> NodeKind {
        match tag {
            BoundaryTag::Inlet => NodeKind::Inlet,
            BoundaryTag::Wall => NodeKind::Wall,
            BoundaryTag::Outlet => NodeKind::Outlet,
            BoundaryTag::Interface => NodeKind::Interface,
        }
    }
}

#[derive(Debug, Clone)]
pub struct Element {
    pub nodes: [usize; 6],
    pub vertices: [Point; 3],
    pub area: f64,
    pub grad_lambda: [[f64; 2]; 3],
}

impl Element {
    pub fn point(&self, l: [f64; 3]) -> Point {
        let v = &self.vertices;
        [
            l[0] * v[0][0] + l[1] * v[1][0] + l[2] * v[2][0],
            l[0] * v[0][1] + l[1] * v[1][1] + l[2] * v[2][1],
        ]
    }

    pub fn gradients(&self, l: [f64; 3]) -> [[f64; 2]; 6] {
        p2_gradients(l, &self.grad_lambda)
    }
}

/// A boundary edge with its quadratic trace nodes `[start, end, midpoint]`.
#[derive(Debug, Clone)]
pub struct Facet {
    pub nodes: [usize; 3],
    pub vertices: [usize; 2],
    pub tag: BoundaryTag,
    pub normal: Point,
    pub length: f64,
    pub endpoints: [Point; 2],
}

impl Facet {
    pub fn point(&self, t: f64) -> Point {
        let [a, b] = self.endpoints;
        [a[0] + t * (b[0] - a[0]), a[1] + t * (b[1] - a[1])]
    }
}

#[derive(Debug, Clone)]
pub struct FeSpace {
    mesh: Mesh,
    domain: Option<Arc<Domain>>,
    edges: Vec<[usize; 2]>,
    edge_lookup: HashMap<(usize, usize), usize>,
    elements: Vec<Element>,
    facets: Vec<Facet>,
    node_kind: Vec<NodeKind>,
    node_on_inlet: Vec<bool>,
    node_coords: Vec<Point>,
}

impl FeSpace {
    pub fn new(mesh: Mesh) -> Result<Self, MeshError> {
        mesh.validate()?;
        let nv = mesh.num_vertices();
        let mut edges: Vec<[usize; 2]> = mesh
            .triangles
            .iter()
            .flat_map(|t| P2_EDGES.iter().map(move |&[a, b]| [t[a].min(t[b]), t[a].max(t[b])]))
            .collect();
        edges.sort_unstable();
        edges.dedup();
        let edge_lookup: HashMap<(usize, usize), usize> =
            edges.iter().enumerate().map(|(i, e)| ((e[0], e[1]), i)).collect();
        let node_of = |a: usize, b: usize| nv + edge_lookup[&(a.min(b), a.max(b))];

        let elements = mesh
            .triangles
            .iter()
            .map(|t| {
                let p = t.map(|i| mesh.vertices[i]);
                let det = (p[1][0] - p[0][0]) * (p[2][1] - p[0][1]) - (p[1][1] - p[0][1]) * (p[2][0] - p[0][0]);
                let grad_lambda = [
                    [(p[1][1] - p[2][1]) / det, (p[2][0] - p[1][0]) / det],
                    [(p[2][1] - p[0][1]) / det, (p[0][0] - p[2][0]) / det],
                    [(p[0][1] - p[1][1]) / det, (p[1][0] - p[0][0]) / det],
                ];
                let mut nodes = [t[0], t[1], t[2], 0, 0, 0];
                for (k, &[a, b]) in P2_EDGES.iter().enumerate() {
                    nodes[3 + k] = node_of(t[a], t[b]);
                }
                Element { nodes, vertices: p, area: 0.5 * det, grad_lambda }
            })
            .collect();

        let n_nodes = nv + edges.len();
        let mut node_coords: Vec<Point> = mesh.vertices.clone();
        node_coords.extend(edges.iter().map(|&[a, b]| {
            let (p, q) = (mesh.vertices[a], mesh.vertices[b]);
            [0.5 * (p[0] + q[0]), 0.5 * (p[1] + q[1])]
        }));
        let mut node_kind = vec![NodeKind::Interior; n_nodes];
        let mut node_on_inlet = vec![false; n_nodes];
        let facets: Vec<Facet> = mesh
            .boundary_edges
            .iter()
            .map(|e| {
                let [a, b] = e.vertices;
                let nodes = [a, b, node_of(a, b)];
                let kind = NodeKind::of_tag(e.tag);
                for &n in &nodes {
                    node_kind[n] = node_kind[n].max(kind);
                    node_on_inlet[n] |= e.tag == BoundaryTag::Inlet;
                }
                Facet {
                    nodes,
                    vertices: [a, b],
                    tag: e.tag,
                    normal: mesh.edge_normal(e),
                    length: mesh.edge_length(e),
                    endpoints: [mesh.vertices[a], mesh.vertices[b]],
                }
            })
            .collect();
        Ok(FeSpace { mesh, domain: None, edges, edge_lookup, elements, facets, node_kind, node_on_inlet, node_coords })
    }

    pub fn with_domain(mesh: Mesh, domain: Arc<Domain>) -> Result<Self, MeshError> {
        let mut s = Self::new(mesh)?;
        s.domain = Some(domain);
        Ok(s)
    }

    /// Mesh the domain at `target_h` and build the space on it.
    pub fn from_domain(domain: Arc<Domain>, target_h: f64) -> Result<Self, MeshError> {
        let mesh = generate_mesh(&domain, target_h)?;
        Self::with_domain(mesh, domain)
    }

    pub fn mesh(&self) -> &Mesh {
        &self.mesh
    }

    pub fn domain(&self) -> Option<&Arc<Domain>> {
        self.domain.as_ref()
    }

    pub fn elements(&self) -> &[Element] {
        &self.elements
    }

    pub fn facets(&self) -> &[Facet] {
        &self.facets
    }

    pub fn facets_tagged(&self, tag: BoundaryTag) -> impl Iterator<Item = &Facet> {
        self.facets.iter().filter(move |f| f.tag == tag)
    }

    pub fn edges(&self) -> &[[usize; 2]] {
        &self.edges
    }

    pub fn n_nodes(&self) -> usize {
        self.node_coords.len()
    }

    pub fn n_velocity(&self) -> usize {
        2 * self.n_nodes()
    }

    pub fn n_pressure(&self) -> usize {
        self.mesh.num_vertices()
    }

    #[inline]
    pub fn vel_dof(&self, component: usize, node: usize) -> usize {
        component * self.node_coords.len() + node
    }

    pub fn node_coord(&self, n: usize) -> Point {
        self.node_coords[n]
    }

    pub fn node_coords(&self) -> &[Point] {
        &self.node_coords
    }

    pub fn node_kind(&self, n: usize) -> NodeKind {
        self.node_kind[n]
    }

    /// Whether the node touches an inlet edge (including the corners).
    pub fn node_on_inlet(&self, n: usize) -> bool {
        self.node_on_inlet[n]
    }

    pub fn is_dirichlet_dof(&self, dof: usize) -> bool {
        dof < self.n_velocity() && self.node_kind[dof % self.n_nodes()].is_dirichlet()
    }

    pub fn node_of_edge(&self, a: usize, b: usize) -> Option<usize> {
        self.edge_lookup.get(&(a.min(b), a.max(b))).map(|e| self.mesh.num_vertices() + e)
    }

    /// Nodal interpolant of a vector field.
    pub fn interpolate(&self, f: &VectorField) -> Vec<f64> {
        let n = self.n_nodes();
        let mut v = vec![0.0; 2 * n];
        for (i, p) in self.node_coords.iter().enumerate() {
            let val = f.value(*p);
            v[i] = val[0];
            v[n + i] = val[1];
        }
        v
    }

    pub fn interpolate_p1(&self, f: &ScalarField) -> Vec<f64> {
        self.mesh.vertices.iter().map(|p| f.value(*p)).collect()
    }

    pub fn interpolate_p2(&self, f: &ScalarField) -> Vec<f64> {
        self.node_coords.iter().map(|p| f.value(*p)).collect()
    }

    /// Velocity value and gradient (`g[c][d] = d u_c / d x_d`) at a
    /// barycentric point of element `e`.
    pub fn eval_velocity(&self, u: &[f64], e: usize, l: [f64; 3]) -> (Point, [[f64; 2]; 2]) {
        let el = &self.elements[e];
        let phi = p2_values(l);
        let g = el.gradients(l);
        let n = self.n_nodes();
        let mut val = [0.0; 2];
        let mut grad = [[0.0; 2]; 2];
        for k in 0..6 {
            let nd = el.nodes[k];
            for c in 0..2 {
                let coef = u[c * n + nd];
                val[c] += coef * phi[k];
                grad[c][0] += coef * g[k][0];
                grad[c][1] += coef * g[k][1];
            }
        }
        (val, grad)
    }

    pub fn eval_pressure(&self, p: &[f64], e: usize, l: [f64; 3]) -> f64 {
        let el = &self.elements[e];
        (0..3).map(|k| l[k] * p[el.nodes[k]]).sum()
    }

    pub fn eval_pressure_gradient(&self, p: &[f64], e: usize) -> Point {
        let el = &self.elements[e];
        let mut g = [0.0; 2];
        for k in 0..3 {
            g[0] += p[el.nodes[k]] * el.grad_lambda[k][0];
            g[1] += p[el.nodes[k]] * el.grad_lambda[k][1];
        }
        g
    }

    /// Velocity trace on a facet at parameter `t`.
    pub fn eval_trace(&self, u: &[f64], f: &Facet, t: f64) -> Point {
        let w = super::basis::p2_edge_values(t);
        let n = self.n_nodes();
        let mut val = [0.0; 2];
        for k in 0..3 {
            val[0] += w[k] * u[f.nodes[k]];
            val[1] += w[k] * u[n + f.nodes[k]];
        }
        val
    }

    /// Barycentric coordinates of `x` with respect to element `e`.
    pub fn barycentric(&self, e: usize, x: Point) -> [f64; 3] {
        let el = &self.elements[e];
        let v0 = el.vertices[0];
        let d = [x[0] - v0[0], x[1] - v0[1]];
        let l1 = el.grad_lambda[1][0] * d[0] + el.grad_lambda[1][1] * d[1];
        let l2 = el.grad_lambda[2][0] * d[0] + el.grad_lambda[2][1] * d[1];
        [1.0 - l1 - l2, l1, l2]
    }

    /// Locate the element containing `x` (linear scan) and return its
    /// barycentric coordinates.
    pub fn locate(&self, x: Point) -> Option<(usize, [f64; 3])> {
        let mut best: Option<(usize, [f64; 3], f64)> = None;
        for e in 0..self.elements.len() {
            let l = self.barycentric(e, x);
            let worst = l.iter().cloned().fold(f64::INFINITY, f64::min);
            if best.as_ref().is_none_or(|b| worst > b.2) {
                best = Some((e, l, worst));
            }
        }
        best.filter(|b| b.2 > -1e-10).map(|b| (b.0, b.1))
    }

    /// Element adjacent to each facet, in facet order.
    pub fn facet_elements(&self) -> Vec<usize> {
        let mut owner: HashMap<(usize, usize), usize> = HashMap::new();
        for (e, el) in self.elements.iter().enumerate() {
            for &[a, b] in P2_EDGES.iter() {
                let (p, q) = (el.nodes[a], el.nodes[b]);
                owner.insert((p.min(q), p.max(q)), e);
            }
        }
        self.facets
            .iter()
            .map(|f| {
                let [a, b] = f.vertices;
                owner[&(a.min(b), a.max(b))]
            })
            .collect()
    }
}

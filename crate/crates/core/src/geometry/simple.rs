//! Meshes of simple shapes, all boundary edges tagged as walls.

use super::mesh::{BoundaryEdge, BoundaryTag, Mesh, Region};
use super::MeshError;

/// Structured mesh of `[x0, x1] x [y0, y1]` with `nx * ny` cells, each cut
/// along its rising diagonal.
pub fn rectangle_mesh(x0: f64, x1: f64, y0: f64, y1: f64, nx: usize, ny: usize) -> Result<Mesh, MeshError> {
    if nx == 0 || ny == 0 || !(x1 > x0) || !(y1 > y0) {
        return Err(MeshError::Invalid("rectangle needs positive size and cell counts".into()));
    }
    let idx = |i: usize, j: usize| j * (nx + 1) + i;
    let mut vertices = Vec::with_capacity((nx + 1) * (ny + 1));
    for j in 0..=ny {
        for i in 0..=nx {
            vertices.push([
                x0 + (x1 - x0) * i as f64 / nx as f64,
                y0 + (y1 - y0) * j as f64 / ny as f64,
            ]);
        }
    }
    let mut triangles = Vec::with_capacity(2 * nx * ny);
    for j in 0..ny {
        for i in 0..nx {
            let (a, b, c, d) = (idx(i, j), idx(i + 1, j), idx(i + 1, j + 1), idx(i, j + 1));
            triangles.push([a, b, c]);
            triangles.push([a, c, d]);
        }
    }
    let mut boundary = Vec::new();
    for i in 0..nx {
        boundary.push([idx(i, 0), idx(i + 1, 0)]);
        boundary.push([idx(i + 1, ny), idx(i, ny)]);
    }
    for j in 0..ny {
        boundary.push([idx(nx, j), idx(nx, j + 1)]);
        boundary.push([idx(0, j + 1), idx(0, j)]);
    }
    finish(vertices, triangles, boundary)
}

/// Polygonal disk of radius `r`: `rings` concentric rings, ring `k` holding
/// `6k` equally spaced vertices.
pub fn disk_mesh(r: f64, rings: usize) -> Result<Mesh, MeshError> {
    if rings == 0 || !(r > 0.0) {
        return Err(MeshError::Invalid("disk needs a positive radius and ring count".into()));
    }
    let tau = std::f64::consts::TAU;
    let mut vertices = vec![[0.0, 0.0]];
    let mut starts = vec![0usize];
    for k in 1..=rings {
        starts.push(vertices.len());
        let m = 6 * k;
        let rad = r * k as f64 / rings as f64;
        for j in 0..m {
            let a = tau * j as f64 / m as f64;
            vertices.push([rad * a.cos(), rad * a.sin()]);
        }
    }
    let mut triangles = Vec::new();
    for k in 1..=rings {
        let (m_in, m_out) = (if k == 1 { 1 } else { 6 * (k - 1) }, 6 * k);
        let inner = |i: usize| starts[k - 1] + i % m_in;
        let outer = |j: usize| starts[k] + j % m_out;
        if k == 1 {
            for j in 0..m_out {
                triangles.push([0, outer(j), outer(j + 1)]);
            }
            continue;
        }
        let (mut i, mut j) = (0, 0);
        while i < m_in || j < m_out {
            let next_in = (i + 1) as f64 / m_in as f64;
            let next_out = (j + 1) as f64 / m_out as f64;
            if j < m_out && (i == m_in || next_out <= next_in) {
                triangles.push([inner(i), outer(j), outer(j + 1)]);
                j += 1;
            } else {
                triangles.push([inner(i), outer(j), inner(i + 1)]);
                i += 1;
            }
        }
    }
    let m = 6 * rings;
    let boundary = (0..m).map(|j| [starts[rings] + j, starts[rings] + (j + 1) % m]).collect();
    finish(vertices, triangles, boundary)
}

fn finish(vertices: Vec<[f64; 2]>, triangles: Vec<[usize; 3]>, boundary: Vec<[usize; 2]>) -> Result<Mesh, MeshError> {
    let regions = vec![Region::Omega0; triangles.len()];
    let boundary_edges = boundary.into_iter().map(|v| BoundaryEdge { vertices: v, tag: BoundaryTag::Wall }).collect();
    let mesh = Mesh { vertices, triangles, boundary_edges, regions };
    mesh.validate()?;
    Ok(mesh)
}

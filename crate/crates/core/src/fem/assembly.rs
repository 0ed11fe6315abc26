//! Assembly of the bilinear, trilinear and boundary forms.
//!
//! Vector operators act on the component-blocked velocity layout of
//! [`FeSpace`]; `divergence` maps velocities to pressure test functions.

use super::basis::{p2_edge_values, p2_values};
use super::quadrature::{EDGE, TRIANGLE};
use super::space::{Element, Facet, FeSpace};
use crate::field::{ScalarField, VectorField};
use crate::geometry::{BoundaryTag, Point};
use crate::linalg::SparseMatrix;
use crate::parallel::map_chunks;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ConvectionForm {
    Convective,
    #[default]
    Skew,
}

/// Negative part `[z]- = (|z| - z) / 2`.
#[inline]
pub fn negative_part(z: f64) -> f64 {
    0.5 * (z.abs() - z)
}

type Entries = Vec<(usize, usize, f64)>;

fn over_elements<F>(space: &FeSpace, nrows: usize, ncols: usize, kernel: F) -> SparseMatrix
where
    F: Fn(&Element, &mut Entries) + Sync,
{
    let els = space.elements();
    let entries = map_chunks(els.len(), |r| {
        let mut out = Vec::with_capacity(r.len() * 72);
        for e in &els[r] {
            kernel(e, &mut out);
        }
        out
    });
    SparseMatrix::from_triplets(nrows, ncols, &entries).expect("element dofs are in range")
}

fn over_facets<F>(space: &FeSpace, keep: impl Fn(BoundaryTag) -> bool, kernel: F) -> SparseMatrix
where
    F: Fn(&Facet, &mut Entries),
{
    let n = space.n_velocity();
    let mut out = Vec::new();
    for f in space.facets().iter().filter(|f| keep(f.tag)) {
        kernel(f, &mut out);
    }
    SparseMatrix::from_triplets(n, n, &out).expect("facet dofs are in range")
}

fn push_both_components(out: &mut Entries, n: usize, nodes: &[usize], local: &[[f64; 6]], k: usize) {
    for c in 0..2 {
        for i in 0..k {
            for j in 0..k {
                out.push((c * n + nodes[i], c * n + nodes[j], local[i][j]));
            }
        }
    }
}

/// Velocity coefficients interpolated at a barycentric point.
fn local_value(space: &FeSpace, u: &[f64], el: &Element, phi: &[f64; 6]) -> Point {
    let n = space.n_nodes();
    let mut v = [0.0; 2];
    for k in 0..6 {
        v[0] += phi[k] * u[el.nodes[k]];
        v[1] += phi[k] * u[n + el.nodes[k]];
    }
    v
}

fn local_gradient(space: &FeSpace, u: &[f64], el: &Element, g: &[[f64; 2]; 6]) -> [[f64; 2]; 2] {
    let n = space.n_nodes();
    let mut out = [[0.0; 2]; 2];
    for k in 0..6 {
        for c in 0..2 {
            let coef = u[c * n + el.nodes[k]];
            out[c][0] += coef * g[k][0];
            out[c][1] += coef * g[k][1];
        }
    }
    out
}

fn trace_value(space: &FeSpace, u: &[f64], f: &Facet, w: &[f64; 3]) -> Point {
    let n = space.n_nodes();
    let mut v = [0.0; 2];
    for k in 0..3 {
        v[0] += w[k] * u[f.nodes[k]];
        v[1] += w[k] * u[n + f.nodes[k]];
    }
    v
}

/// Scalar P2 Laplacian `int grad(phi_i) . grad(phi_j)`.
pub fn scalar_stiffness(space: &FeSpace) -> SparseMatrix {
    let n = space.n_nodes();
    over_elements(space, n, n, |el, out| {
        let k = local_stiffness(el);
        for i in 0..6 {
            for j in 0..6 {
                out.push((el.nodes[i], el.nodes[j], k[i][j]));
            }
        }
    })
}

fn local_stiffness(el: &Element) -> [[f64; 6]; 6] {
    let mut k = [[0.0; 6]; 6];
    for (l, w) in TRIANGLE.iter() {
        let g = el.gradients(*l);
        let wa = w * el.area;
        for i in 0..6 {
            for j in 0..6 {
                k[i][j] += wa * (g[i][0] * g[j][0] + g[i][1] * g[j][1]);
            }
        }
    }
    k
}

fn local_mass(el: &Element) -> [[f64; 6]; 6] {
    let mut m = [[0.0; 6]; 6];
    for (l, w) in TRIANGLE.iter() {
        let phi = p2_values(*l);
        let wa = w * el.area;
        for i in 0..6 {
            for j in 0..6 {
                m[i][j] += wa * phi[i] * phi[j];
            }
        }
    }
    m
}

/// Vector Laplacian `int grad(u) : grad(v)`, without the viscosity.
pub fn stiffness(space: &FeSpace) -> SparseMatrix {
    let n = space.n_nodes();
    over_elements(space, 2 * n, 2 * n, |el, out| {
        push_both_components(out, n, &el.nodes, &local_stiffness(el), 6)
    })
}

pub fn scalar_mass(space: &FeSpace) -> SparseMatrix {
    let n = space.n_nodes();
    over_elements(space, n, n, |el, out| {
        let m = local_mass(el);
        for i in 0..6 {
            for j in 0..6 {
                out.push((el.nodes[i], el.nodes[j], m[i][j]));
            }
        }
    })
}

/// Vector L2 mass.
pub fn velocity_mass(space: &FeSpace) -> SparseMatrix {
    let n = space.n_nodes();
    over_elements(space, 2 * n, 2 * n, |el, out| push_both_components(out, n, &el.nodes, &local_mass(el), 6))
}

/// P1 mass matrix on the vertices.
pub fn pressure_mass(space: &FeSpace) -> SparseMatrix {
    let nv = space.n_pressure();
    over_elements(space, nv, nv, |el, out| {
        for i in 0..3 {
            for j in 0..3 {
                let m = if i == j { el.area / 6.0 } else { el.area / 12.0 };
                out.push((el.nodes[i], el.nodes[j], m));
            }
        }
    })
}

/// P1 Laplacian on the vertices.
pub fn pressure_stiffness(space: &FeSpace) -> SparseMatrix {
    let nv = space.n_pressure();
    over_elements(space, nv, nv, |el, out| {
        let g = el.grad_lambda;
        for i in 0..3 {
            for j in 0..3 {
                out.push((el.nodes[i], el.nodes[j], el.area * (g[i][0] * g[j][0] + g[i][1] * g[j][1])));
            }
        }
    })
}

/// `int psi_q` for each pressure basis function.
pub fn pressure_mean(space: &FeSpace) -> Vec<f64> {
    let mut m = vec![0.0; space.n_pressure()];
    for el in space.elements() {
        for k in 0..3 {
            m[el.nodes[k]] += el.area / 3.0;
        }
    }
    m
}

/// `B[q, (c, n)] = int psi_q d_c phi_n`.
pub fn divergence(space: &FeSpace) -> SparseMatrix {
    let n = space.n_nodes();
    over_elements(space, space.n_pressure(), 2 * n, |el, out| {
        let mut b = [[[0.0; 6]; 3]; 2];
        for (l, w) in TRIANGLE.iter() {
            let g = el.gradients(*l);
            let wa = w * el.area;
            for q in 0..3 {
                for j in 0..6 {
                    b[0][q][j] += wa * l[q] * g[j][0];
                    b[1][q][j] += wa * l[q] * g[j][1];
                }
            }
        }
        for (c, bc) in b.iter().enumerate() {
            for q in 0..3 {
                for j in 0..6 {
                    out.push((el.nodes[q], c * n + el.nodes[j], bc[q][j]));
                }
            }
        }
    })
}

/// Boundary mass `int_{tagged} weight(x) phi_i phi_j` on both components.
pub fn boundary_mass(
    space: &FeSpace,
    keep: impl Fn(BoundaryTag) -> bool,
    weight: impl Fn(&Facet, f64) -> f64,
) -> SparseMatrix {
    let n = space.n_nodes();
    over_facets(space, keep, |f, out| {
        let mut m = [[0.0; 6]; 6];
        for &(t, w) in EDGE.iter() {
            let phi = p2_edge_values(t);
            let s = w * f.length * weight(f, t);
            for i in 0..3 {
                for j in 0..3 {
                    m[i][j] += s * phi[i] * phi[j];
                }
            }
        }
        push_both_components(out, n, &f.nodes, &m, 3);
    })
}

/// Convection operator `C(a)` with `<C(a) v, phi> = int (a . grad v) . phi`
/// for the convective form. The skew form is
/// `(C - C^T) / 2 + (1/2) int_{boundary} (a . nu) v . phi`.
pub fn convection(space: &FeSpace, a: &[f64], form: ConvectionForm) -> SparseMatrix {
    let n = space.n_nodes();
    let volume = over_elements(space, 2 * n, 2 * n, |el, out| {
        let mut c = [[0.0; 6]; 6];
        for (l, w) in TRIANGLE.iter() {
            let phi = p2_values(*l);
            let g = el.gradients(*l);
            let av = local_value(space, a, el, &phi);
            let wa = w * el.area;
            for i in 0..6 {
                for j in 0..6 {
                    c[i][j] += wa * (av[0] * g[j][0] + av[1] * g[j][1]) * phi[i];
                }
            }
        }
        if form == ConvectionForm::Skew {
            let orig = c;
            for i in 0..6 {
                for j in 0..6 {
                    c[i][j] = 0.5 * (orig[i][j] - orig[j][i]);
                }
            }
        }
        push_both_components(out, n, &el.nodes, &c, 6);
    });
    match form {
        ConvectionForm::Convective => volume,
        ConvectionForm::Skew => {
            let bd = boundary_mass(space, |_| true, |f, t| {
                let av = trace_value(space, a, f, &p2_edge_values(t));
                0.5 * (av[0] * f.normal[0] + av[1] * f.normal[1])
            });
            volume.linear_combination(1.0, &bd, 1.0)
        }
    }
}

/// Derivative of `a -> C(a) u` (fixed `u`) as a matrix acting on `a`.
pub fn convection_linearization(space: &FeSpace, u: &[f64], form: ConvectionForm) -> SparseMatrix {
    let n = space.n_nodes();
    let volume = over_elements(space, 2 * n, 2 * n, |el, out| {
        // d[c][d][i][j]: row (c, i), column (d, j).
        let mut d = [[[[0.0; 6]; 6]; 2]; 2];
        for (l, w) in TRIANGLE.iter() {
            let phi = p2_values(*l);
            let g = el.gradients(*l);
            let uv = local_value(space, u, el, &phi);
            let gu = local_gradient(space, u, el, &g);
            let wa = w * el.area;
            for c in 0..2 {
                for dd in 0..2 {
                    for i in 0..6 {
                        for j in 0..6 {
                            let conv = phi[j] * gu[c][dd] * phi[i];
                            d[c][dd][i][j] += wa
                                * match form {
                                    ConvectionForm::Convective => conv,
                                    ConvectionForm::Skew => 0.5 * conv - 0.5 * phi[j] * g[i][dd] * uv[c],
                                };
                        }
                    }
                }
            }
        }
        for c in 0..2 {
            for dd in 0..2 {
                for i in 0..6 {
                    for j in 0..6 {
                        out.push((c * n + el.nodes[i], dd * n + el.nodes[j], d[c][dd][i][j]));
                    }
                }
            }
        }
    });
    if form == ConvectionForm::Convective {
        return volume;
    }
    let bd = over_facets(space, |_| true, |f, out| {
        let mut d = [[[[0.0; 3]; 3]; 2]; 2];
        for &(t, w) in EDGE.iter() {
            let phi = p2_edge_values(t);
            let uv = trace_value(space, u, f, &phi);
            let s = 0.5 * w * f.length;
            for c in 0..2 {
                for dd in 0..2 {
                    for i in 0..3 {
                        for j in 0..3 {
                            d[c][dd][i][j] += s * phi[j] * f.normal[dd] * uv[c] * phi[i];
                        }
                    }
                }
            }
        }
        for c in 0..2 {
            for dd in 0..2 {
                for i in 0..3 {
                    for j in 0..3 {
                        out.push((c * n + f.nodes[i], dd * n + f.nodes[j], d[c][dd][i][j]));
                    }
                }
            }
        }
    });
    volume.linear_combination(1.0, &bd, 1.0)
}

/// Outlet term `(1/2) int_{outlet} [w . nu]- (u - W*) . phi`, returned as
/// the matrix acting on `u` and the load `matrix * wstar`.
pub fn ddn_boundary(space: &FeSpace, w: &[f64], wstar: &[f64]) -> (SparseMatrix, Vec<f64>) {
    let m = boundary_mass(space, |t| t == BoundaryTag::Outlet, |f, t| {
        let wv = trace_value(space, w, f, &p2_edge_values(t));
        0.5 * negative_part(wv[0] * f.normal[0] + wv[1] * f.normal[1])
    });
    let load = m.mul_vec(wstar);
    (m, load)
}

/// Derivative of `w -> (1/2) int [w . nu]- v . phi` (fixed `v`).
pub fn ddn_linearization(space: &FeSpace, w: &[f64], v: &[f64]) -> SparseMatrix {
    let n = space.n_nodes();
    over_facets(space, |t| t == BoundaryTag::Outlet, |f, out| {
        let mut d = [[[[0.0; 3]; 3]; 2]; 2];
        for &(t, wq) in EDGE.iter() {
            let phi = p2_edge_values(t);
            let wv = trace_value(space, w, f, &phi);
            let z = wv[0] * f.normal[0] + wv[1] * f.normal[1];
            if z >= 0.0 {
                continue;
            }
            let vv = trace_value(space, v, f, &phi);
            let s = -0.5 * wq * f.length;
            for c in 0..2 {
                for dd in 0..2 {
                    for i in 0..3 {
                        for j in 0..3 {
                            d[c][dd][i][j] += s * f.normal[dd] * phi[j] * vv[c] * phi[i];
                        }
                    }
                }
            }
        }
        for c in 0..2 {
            for dd in 0..2 {
                for i in 0..3 {
                    for j in 0..3 {
                        out.push((c * n + f.nodes[i], dd * n + f.nodes[j], d[c][dd][i][j]));
                    }
                }
            }
        }
    })
}

/// Load `int_{outlet} sigma (phi . nu)`.
pub fn outlet_traction_load(space: &FeSpace, sigma: &ScalarField) -> Vec<f64> {
    let n = space.n_nodes();
    let mut b = vec![0.0; 2 * n];
    for f in space.facets_tagged(BoundaryTag::Outlet) {
        for &(t, w) in EDGE.iter() {
            let phi = p2_edge_values(t);
            let s = w * f.length * sigma.value(f.point(t));
            for k in 0..3 {
                b[f.nodes[k]] += s * phi[k] * f.normal[0];
                b[n + f.nodes[k]] += s * phi[k] * f.normal[1];
            }
        }
    }
    b
}

/// Load `int f . phi`.
pub fn body_force_load(space: &FeSpace, force: &VectorField) -> Vec<f64> {
    let n = space.n_nodes();
    let els = space.elements();
    let locals = map_chunks(els.len(), |r| {
        els[r]
            .iter()
            .map(|el| {
                let mut loc = [[0.0; 6]; 2];
                for (l, w) in TRIANGLE.iter() {
                    let phi = p2_values(*l);
                    let fv = force.value(el.point(*l));
                    for k in 0..6 {
                        loc[0][k] += w * el.area * fv[0] * phi[k];
                        loc[1][k] += w * el.area * fv[1] * phi[k];
                    }
                }
                loc
            })
            .collect()
    });
    let mut b = vec![0.0; 2 * n];
    for (el, loc) in els.iter().zip(locals) {
        for k in 0..6 {
            b[el.nodes[k]] += loc[0][k];
            b[n + el.nodes[k]] += loc[1][k];
        }
    }
    b
}

/// `int_{tag} u . nu`.
pub fn boundary_flux(space: &FeSpace, u: &[f64], tag: BoundaryTag) -> f64 {
    let mut s = 0.0;
    for f in space.facets_tagged(tag) {
        for &(t, w) in EDGE.iter() {
            let uv = trace_value(space, u, f, &p2_edge_values(t));
            s += w * f.length * (uv[0] * f.normal[0] + uv[1] * f.normal[1]);
        }
    }
    s
}

/// Integral over the facets accepted by `keep` of `g(x, u(x), nu)`.
pub fn boundary_integral(
    space: &FeSpace,
    u: &[f64],
    keep: impl Fn(BoundaryTag) -> bool,
    g: impl Fn(Point, Point, Point) -> f64,
) -> f64 {
    let mut s = 0.0;
    for f in space.facets().iter().filter(|f| keep(f.tag)) {
        for &(t, w) in EDGE.iter() {
            let uv = trace_value(space, u, f, &p2_edge_values(t));
            s += w * f.length * g(f.point(t), uv, f.normal);
        }
    }
    s
}

/// Volume integral of `g(x, u, grad u)` for a velocity field.
pub fn volume_integral(space: &FeSpace, u: &[f64], g: impl Fn(Point, Point, [[f64; 2]; 2]) -> f64 + Sync) -> f64 {
    let els = space.elements();
    let parts = map_chunks(els.len(), |r| {
        els[r]
            .iter()
            .map(|el| {
                TRIANGLE
                    .iter()
                    .map(|(l, w)| {
                        let phi = p2_values(*l);
                        let gr = el.gradients(*l);
                        w * el.area * g(el.point(*l), local_value(space, u, el, &phi), local_gradient(space, u, el, &gr))
                    })
                    .sum::<f64>()
            })
            .collect()
    });
    parts.iter().sum()
}

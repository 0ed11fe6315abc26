//! Torsion problem `-Lap u = 1` in a cross-section, `u = 0` on its boundary,
//! and the axial Poiseuille profile of a pipe with that cross-section.

use crate::error::Result;
use crate::fem::quadrature::TRIANGLE;
use crate::fem::{assembly, FeSpace, Reduction};
use crate::geometry::{Mesh, Point};
use crate::linalg::lu_factor;

#[derive(Debug, Clone)]
pub struct TorsionSolution {
    pub space: FeSpace,
    /// P2 nodal values.
    pub values: Vec<f64>,
    /// `int u` over the cross-section.
    pub rho: f64,
}

impl TorsionSolution {
    pub fn min_value(&self) -> f64 {
        self.values.iter().cloned().fold(f64::INFINITY, f64::min)
    }

    /// P2 interpolant at `x`, or `None` outside the mesh.
    pub fn value_at(&self, x: Point) -> Option<f64> {
        let (e, l) = self.space.locate(x)?;
        let phi = crate::fem::basis::p2_values(l);
        let el = &self.space.elements()[e];
        Some((0..6).map(|k| phi[k] * self.values[el.nodes[k]]).sum())
    }
}

/// P2 solve of the torsion problem; every boundary edge of `mesh` is
/// treated as Dirichlet.
pub fn torsion_solve(mesh: Mesh) -> Result<TorsionSolution> {
    let space = FeSpace::new(mesh)?;
    let k = assembly::scalar_stiffness(&space);
    let mut load = vec![0.0; space.n_nodes()];
    for el in space.elements() {
        for (l, w) in TRIANGLE.iter() {
            let phi = crate::fem::basis::p2_values(*l);
            for i in 0..6 {
                load[el.nodes[i]] += w * el.area * phi[i];
            }
        }
    }
    let fixed = (0..space.n_nodes()).filter(|&n| space.node_kind(n).is_dirichlet()).map(|n| (n, 0.0));
    let red = Reduction::new(space.n_nodes(), fixed);
    let a = red.matrix(&k);
    let values = red.expand(&lu_factor(&a)?.solve_refined(&a, &red.rhs(&k, &load), 1));
    let rho = values.iter().zip(&load).map(|(u, b)| u * b).sum();
    Ok(TorsionSolution { space, values, rho })
}

/// Axial profile `(flux / rho) u(x, y)` of three-dimensional Poiseuille
/// flow through a pipe with the torsion cross-section.
#[derive(Debug, Clone)]
pub struct PipeProfile<'a> {
    pub torsion: &'a TorsionSolution,
    pub flux: f64,
    pub eta: f64,
}

impl PipeProfile<'_> {
    pub fn axial_velocity(&self, x: Point) -> Option<f64> {
        Some(self.flux / self.torsion.rho * self.torsion.value_at(x)?)
    }

    /// Nodal values of the axial velocity.
    pub fn nodal(&self) -> Vec<f64> {
        self.torsion.values.iter().map(|u| self.flux / self.torsion.rho * u).collect()
    }

    /// Axial pressure slope `-eta flux / rho`.
    pub fn pressure_gradient(&self) -> f64 {
        -self.eta * self.flux / self.torsion.rho
    }

    /// Flux of the profile through the cross-section by quadrature.
    pub fn flux_by_quadrature(&self) -> f64 {
        let s = &self.torsion.space;
        let v = self.nodal();
        let mut q = 0.0;
        for el in s.elements() {
            for (l, w) in TRIANGLE.iter() {
                let phi = crate::fem::basis::p2_values(*l);
                q += w * el.area * (0..6).map(|k| phi[k] * v[el.nodes[k]]).sum::<f64>();
            }
        }
        q
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{disk_mesh, rectangle_mesh};
    use crate::linalg::Triplets;

    #[test]
    fn unit_disk_matches_radial_solution() {
        let t = torsion_solve(disk_mesh(1.0, 20).unwrap()).unwrap();
        assert!((t.value_at([0.0, 0.0]).unwrap() - 0.25).abs() < 2e-3);
        assert!((t.rho - std::f64::consts::PI / 8.0).abs() < 2e-3, "rho {}", t.rho);
        assert!(t.min_value() >= -1e-12);
        let profile = PipeProfile { torsion: &t, flux: 1.0, eta: 1.0 };
        assert!((profile.axial_velocity([0.0, 0.0]).unwrap() - 2.0 / std::f64::consts::PI).abs() < 5e-3);
        assert!((profile.flux_by_quadrature() - 1.0).abs() < 1e-8);
        assert!((profile.pressure_gradient() + 1.0 / t.rho).abs() < 1e-15);
        let zero = PipeProfile { torsion: &t, flux: 0.0, eta: 1.0 };
        assert!(zero.nodal().iter().all(|v| *v == 0.0));
    }

    /// Five-point finite differences for `-Lap u = 1` on `(-1, 1)^2` with
    /// `n` interior points per side; returns the centre value.
    fn fd_centre(n: usize) -> f64 {
        let h = 2.0 / (n + 1) as f64;
        let id = |i: usize, j: usize| j * n + i;
        let mut t = Triplets::new(n * n, n * n);
        for j in 0..n {
            for i in 0..n {
                t.push(id(i, j), id(i, j), 4.0);
                if i > 0 {
                    t.push(id(i, j), id(i - 1, j), -1.0);
                }
                if i + 1 < n {
                    t.push(id(i, j), id(i + 1, j), -1.0);
                }
                if j > 0 {
                    t.push(id(i, j), id(i, j - 1), -1.0);
                }
                if j + 1 < n {
                    t.push(id(i, j), id(i, j + 1), -1.0);
                }
            }
        }
        let a = t.build().unwrap();
        let u = lu_factor(&a).unwrap().solve(&vec![h * h; n * n]);
        u[id(n / 2, n / 2)]
    }

    #[test]
    fn square_matches_finite_difference_oracle() {
        // Richardson extrapolation of two O(h^2) grids.
        let (c1, c2) = (fd_centre(63), fd_centre(127));
        let oracle = (4.0 * c2 - c1) / 3.0;
        assert!((oracle - 0.2947).abs() < 1e-4, "oracle {oracle}");
        let t = torsion_solve(rectangle_mesh(-1.0, 1.0, -1.0, 1.0, 16, 16).unwrap()).unwrap();
        assert!((t.value_at([0.0, 0.0]).unwrap() - oracle).abs() < 1e-3);
        assert!(t.min_value() >= -1e-12);
    }
}

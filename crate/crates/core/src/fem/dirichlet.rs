//! Symmetric elimination of prescribed degrees of freedom.

use super::space::{FeSpace, NodeKind};
use crate::geometry::Point;
use crate::linalg::SparseMatrix;

/// Map between a full unknown vector and its free part, with prescribed
/// values on the fixed entries.
#[derive(Debug, Clone)]
pub struct Reduction {
    full_to_free: Vec<Option<usize>>,
    free_to_full: Vec<usize>,
    values: Vec<f64>,
}

impl Reduction {
    /// `fixed` lists `(index, value)`; later entries overwrite earlier ones.
    pub fn new(n_full: usize, fixed: impl IntoIterator<Item = (usize, f64)>) -> Self {
        let mut values = vec![0.0; n_full];
        let mut is_fixed = vec![false; n_full];
        for (i, v) in fixed {
            is_fixed[i] = true;
            values[i] = v;
        }
        let mut full_to_free = vec![None; n_full];
        let mut free_to_full = Vec::new();
        for i in 0..n_full {
            if !is_fixed[i] {
                full_to_free[i] = Some(free_to_full.len());
                free_to_full.push(i);
            }
        }
        Reduction { full_to_free, free_to_full, values }
    }

    pub fn n_full(&self) -> usize {
        self.full_to_free.len()
    }

    pub fn n_free(&self) -> usize {
        self.free_to_full.len()
    }

    pub fn is_fixed(&self, i: usize) -> bool {
        self.full_to_free[i].is_none()
    }

    pub fn free_index(&self, i: usize) -> Option<usize> {
        self.full_to_free[i]
    }

    pub fn free_to_full(&self) -> &[usize] {
        &self.free_to_full
    }

    /// Prescribed values (zero on free entries).
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Same fixed set with all prescribed values set to zero.
    pub fn homogeneous(&self) -> Reduction {
        Reduction {
            full_to_free: self.full_to_free.clone(),
            free_to_full: self.free_to_full.clone(),
            values: vec![0.0; self.values.len()],
        }
    }

    pub fn matrix(&self, a: &SparseMatrix) -> SparseMatrix {
        a.submatrix(&self.full_to_free, self.n_free(), &self.full_to_free, self.n_free())
    }

    /// Free part of `b - A g`, where `g` carries the prescribed values.
    pub fn rhs(&self, a: &SparseMatrix, b: &[f64]) -> Vec<f64> {
        let lift = a.mul_vec(&self.values);
        self.free_to_full.iter().map(|&i| b[i] - lift[i]).collect()
    }

    pub fn restrict(&self, x: &[f64]) -> Vec<f64> {
        self.free_to_full.iter().map(|&i| x[i]).collect()
    }

    /// Full vector from free values plus the prescribed data.
    pub fn expand(&self, free: &[f64]) -> Vec<f64> {
        let mut x = self.values.clone();
        for (k, &i) in self.free_to_full.iter().enumerate() {
            x[i] = free[k];
        }
        x
    }
}

/// Prescribed velocity values for the Dirichlet nodes of a space.
#[derive(Debug, Clone)]
pub struct VelocityConstraints {
    /// `(dof, value)` pairs, both components of every Dirichlet node.
    pub dofs: Vec<(usize, f64)>,
    /// Inlet corner nodes where the inflow data was nonzero and got
    /// overridden by the wall value.
    pub corner_conflicts: Vec<usize>,
}

/// Collect Dirichlet data: `inlet(x)` on inlet nodes, zero on walls and
/// `interface(node)` on cut-line nodes (zero if `None`). Nodes shared by
/// the inlet and a wall take the wall value.
pub fn velocity_constraints(
    space: &FeSpace,
    inlet: &dyn Fn(Point) -> Point,
    interface: Option<&dyn Fn(usize) -> Point>,
) -> VelocityConstraints {
    let mut dofs = Vec::new();
    let mut corner_conflicts = Vec::new();
    for node in 0..space.n_nodes() {
        let x = space.node_coord(node);
        let value = match space.node_kind(node) {
            NodeKind::Interior | NodeKind::Outlet => continue,
            NodeKind::Wall => {
                if space.node_on_inlet(node) {
                    let g = inlet(x);
                    if g[0].abs().max(g[1].abs()) > 1e-12 {
                        corner_conflicts.push(node);
                    }
                }
                [0.0, 0.0]
            }
            NodeKind::Inlet => inlet(x),
            NodeKind::Interface => interface.map_or([0.0, 0.0], |f| f(node)),
        };
        dofs.push((space.vel_dof(0, node), value[0]));
        dofs.push((space.vel_dof(1, node), value[1]));
    }
    for &n in &corner_conflicts {
        let x = space.node_coord(n);
        log::warn!("inflow data nonzero at inlet corner ({:.6}, {:.6}); using the wall value 0", x[0], x[1]);
    }
    VelocityConstraints { dofs, corner_conflicts }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{build_domain, generate_mesh, DomainSpec};
    use crate::linalg::{lu_factor, Triplets};

    #[test]
    fn reduction_solves_constrained_system() {
        // 1D Laplacian on 5 nodes with u0 = 1, u4 = 3: solution is linear.
        let n = 5;
        let mut t = Triplets::new(n, n);
        for i in 0..n {
            t.push(i, i, 2.0);
            if i > 0 {
                t.push(i, i - 1, -1.0);
            }
            if i + 1 < n {
                t.push(i, i + 1, -1.0);
            }
        }
        let a = t.build().unwrap();
        let r = Reduction::new(n, [(0, 1.0), (4, 3.0)]);
        let ar = r.matrix(&a);
        assert!(ar.is_symmetric(0.0));
        let x = lu_factor(&ar).unwrap().solve(&r.rhs(&a, &vec![0.0; n]));
        let full = r.expand(&x);
        for (i, v) in full.iter().enumerate() {
            assert!((v - (1.0 + 0.5 * i as f64)).abs() < 1e-14);
        }
    }

    #[test]
    fn zero_data_gives_homogeneous_reduction() {
        let r = Reduction::new(4, [(1, 0.0)]);
        assert!(r.values().iter().all(|v| *v == 0.0));
        assert_eq!(r.n_free(), 3);
    }

    #[test]
    fn corner_nodes_take_wall_value() {
        let d = build_domain(DomainSpec::straight_channel(0.5, 0.5, 0.5)).unwrap();
        let s = FeSpace::new(generate_mesh(&d, 0.25).unwrap()).unwrap();
        let c = velocity_constraints(&s, &|_| [1.0, 0.0], None);
        assert_eq!(c.corner_conflicts.len(), 2);
        for &n in &c.corner_conflicts {
            let v = c.dofs.iter().find(|(d, _)| *d == s.vel_dof(0, n)).unwrap().1;
            assert_eq!(v, 0.0);
        }
        let inlet_nodes = c.dofs.iter().filter(|(d, v)| *d < s.n_nodes() && *v == 1.0).count();
        assert!(inlet_nodes > 0);
    }
}

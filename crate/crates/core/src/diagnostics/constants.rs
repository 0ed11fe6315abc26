use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::fem::{assembly, norms, FeSpace, SaddleSolver};
use crate::field::{ScalarField, VectorField};
use crate::geometry::BoundaryTag;
use crate::linalg::{dense_generalized_eigen, lu_factor, min_schur_eigenvalue, rayleigh_maximize, QuotientMaximum, QuotientProblem};
use crate::problem::ProblemData;
use crate::reference::{build_reference_flow, random_inflow};

/// Mesh-dependent surrogates of the constants in the small-data theory.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConstantsEstimate {
    pub eta: f64,
    /// Reciprocal of `max ||v||_{L4}^2 / ||grad v||^2` over discretely
    /// divergence-free velocities vanishing on inlet and walls.
    pub s_star: f64,
    /// `max ||v||_{L2(outlet)} / ||grad v||` over the same boundary conditions.
    pub trace_constant: f64,
    /// Discrete inf-sup constant of the divergence coupling.
    pub infsup_constant: f64,
    /// Largest reference-flow construction ratio over random inflows.
    pub m_star: f64,
    /// `eta s_star / (2 m_star)`.
    pub omega_star: f64,
    /// Constant of the a-priori bound, once calibrated.
    pub bound_constant: Option<f64>,
}

impl ConstantsEstimate {
    pub fn omega(eta: f64, s_star: f64, m_star: f64) -> f64 {
        eta * s_star / (2.0 * m_star)
    }

    /// Same estimate for another viscosity.
    pub fn with_eta(&self, eta: f64) -> Self {
        ConstantsEstimate { eta, omega_star: Self::omega(eta, self.s_star, self.m_star), ..self.clone() }
    }
}

fn dirichlet_map(space: &FeSpace) -> (Vec<Option<usize>>, usize) {
    let mut map = vec![None; space.n_velocity()];
    let mut k = 0;
    for (d, m) in map.iter_mut().enumerate() {
        if !space.is_dirichlet_dof(d) {
            *m = Some(k);
            k += 1;
        }
    }
    (map, k)
}

fn zero_dirichlet(space: &FeSpace) -> Vec<(usize, f64)> {
    (0..space.n_velocity()).filter(|&d| space.is_dirichlet_dof(d)).map(|d| (d, 0.0)).collect()
}

/// Ascent for the `L4` / `H1` quotient over discretely divergence-free
/// fields, `restarts` seeded random starts.
pub fn sobolev_quotient(space: &FeSpace, restarts: usize, seed: u64) -> Result<QuotientMaximum> {
    let k = assembly::stiffness(space);
    let b = assembly::divergence(space);
    let solver = SaddleSolver::new(&k, &b, None, &zero_dirichlet(space))?;
    let np = space.n_pressure();
    let zero_p = vec![0.0; np];
    let energy = |v: &[f64]| k.bilinear(v, v);
    let functional = |v: &[f64]| norms::l4_power_with_gradient(space, v);
    let riesz = |g: &[f64]| {
        let mut g = g.to_vec();
        for (d, x) in g.iter_mut().enumerate() {
            if space.is_dirichlet_dof(d) {
                *x = 0.0;
            }
        }
        solver.solve(&g, &zero_p).0
    };
    let sample = |rng: &mut ChaCha8Rng| {
        let f: Vec<f64> = (0..space.n_velocity()).map(|_| rng.random_range(-1.0..1.0)).collect();
        riesz(&f)
    };
    let p = QuotientProblem { energy: &energy, functional: &functional, riesz: &riesz, sample: &sample };
    Ok(rayleigh_maximize(&p, restarts, seed, 1e-10, 500)?)
}

/// Largest eigenvalue of outlet mass against the stiffness on velocities
/// vanishing on inlet and walls, via the Schur complement on outlet dofs.
pub fn trace_constant(space: &FeSpace) -> Result<f64> {
    let n = space.n_nodes();
    let k = assembly::scalar_stiffness(space);
    let m = assembly::boundary_mass(space, |t| t == BoundaryTag::Outlet, |_, _| 1.0);
    let outlet: Vec<usize> = (0..n).filter(|&a| !space.node_kind(a).is_dirichlet() && m.get(a, a) != 0.0).collect();
    if outlet.is_empty() {
        return Err(Error::argument("space has no free outlet nodes"));
    }
    let mut is_outlet = vec![None; n];
    outlet.iter().enumerate().for_each(|(i, &a)| is_outlet[a] = Some(i));
    let mut inner_map = vec![None; n];
    let mut ni = 0;
    for a in 0..n {
        if is_outlet[a].is_none() && !space.node_kind(a).is_dirichlet() {
            inner_map[a] = Some(ni);
            ni += 1;
        }
    }
    let no = outlet.len();
    let k_ii = k.submatrix(&inner_map, ni, &inner_map, ni);
    let k_io = k.submatrix(&inner_map, ni, &is_outlet, no);
    let k_oo = k.submatrix(&is_outlet, no, &is_outlet, no);
    let lu = lu_factor(&k_ii)?;
    let mut schur = DMatrix::from_fn(no, no, |i, j| k_oo.get(i, j));
    for j in 0..no {
        let col: Vec<f64> = (0..ni).map(|i| k_io.get(i, j)).collect();
        let x = lu.solve(&col);
        let kx = k_io.mul_vec_transposed(&x);
        for i in 0..no {
            schur[(i, j)] -= kx[i];
        }
    }
    // Both velocity components give the scalar problem.
    let mo = DMatrix::from_fn(no, no, |i, j| m.get(outlet[i], outlet[j]));
    let (vals, _) = dense_generalized_eigen(&schur, &mo)?;
    Ok((1.0 / vals[0]).sqrt())
}

/// `inf_q sup_v (q, div v) / (||q|| ||grad v||)` on the discrete spaces.
pub fn infsup_constant(space: &FeSpace) -> Result<f64> {
    let (map, nf) = dirichlet_map(space);
    let np = space.n_pressure();
    let pmap: Vec<Option<usize>> = (0..np).map(Some).collect();
    let b = assembly::divergence(space).submatrix(&pmap, np, &map, nf);
    let k = assembly::stiffness(space).submatrix(&map, nf, &map, nf);
    let mp = assembly::pressure_mass(space);
    Ok(min_schur_eigenvalue(&b, &k, &mp, 1e-10)?.max(0.0).sqrt())
}

/// Largest ratio `||W*||_{H1} / ||g*||` over `samples` random inflows.
pub fn construction_constant(space: &FeSpace, samples: usize, seed: u64) -> Result<f64> {
    let inlet = *space.domain().ok_or_else(|| Error::argument("construction constant needs the domain"))?.inlet();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut m = 0.0f64;
    for _ in 0..samples.max(1) {
        let g = random_inflow(&inlet, &mut rng, 1.0, 4);
        let data = ProblemData::new(1.0, VectorField::zero(), g, ScalarField::zero())?;
        m = m.max(build_reference_flow(space, &data)?.report.construction_ratio());
    }
    Ok(m)
}

pub fn estimate_constants(space: &FeSpace, eta: f64, samples: usize, seed: u64) -> Result<ConstantsEstimate> {
    if !(eta > 0.0) {
        return Err(Error::argument(format!("viscosity must be positive, got {eta}")));
    }
    let q = sobolev_quotient(space, 20, seed)?;
    let s_star = 1.0 / q.ratio;
    let m_star = construction_constant(space, samples, seed)?;
    Ok(ConstantsEstimate {
        eta,
        s_star,
        trace_constant: trace_constant(space)?,
        infsup_constant: infsup_constant(space)?,
        m_star,
        omega_star: ConstantsEstimate::omega(eta, s_star, m_star),
        bound_constant: None,
    })
}

use super::{Linearization, OutletCondition, SolutionFields, SolverConfig};
use crate::error::{Error, IterationRecord, Result};
use crate::fem::{assembly, FeSpace, SaddleSolver};
use crate::linalg::{norm2, SparseMatrix};
use crate::problem::ProblemData;
use crate::reference::ReferenceFlow;

const MAX_BACKTRACKS: usize = 8;
const MAX_INCREASES: usize = 5;

/// Momentum and continuity blocks of the discrete residual. Momentum
/// entries on Dirichlet dofs are zero.
#[derive(Debug, Clone, PartialEq)]
pub struct Residual {
    pub momentum: Vec<f64>,
    pub continuity: Vec<f64>,
}

impl Residual {
    pub fn norm(&self) -> f64 {
        norm2(&self.momentum).hypot(norm2(&self.continuity))
    }
}

/// The lambda-weighted problem
///
/// ```text
/// eta K v + lambda [C(a) a + M(a) v] - B^T q = lambda (f + s - eta K W* + B^T Pi*)
///                                       -B v = lambda B W*
/// ```
///
/// with `a = v + W*`, `C` the convection operator and `M` the outlet
/// backflow mass `(1/2) int [a . nu]- v . phi` (absent for DO_NOTHING).
pub struct NonlinearSystem<'a> {
    space: &'a FeSpace,
    config: SolverConfig,
    lambda: f64,
    viscous: SparseMatrix,
    div: SparseMatrix,
    w_star: &'a [f64],
    pi_star: &'a [f64],
    load: Vec<f64>,
    div_load: Vec<f64>,
    fixed: Vec<(usize, f64)>,
    dirichlet: Vec<bool>,
}

impl<'a> NonlinearSystem<'a> {
    pub fn new(
        space: &'a FeSpace,
        data: &ProblemData,
        reference: &'a ReferenceFlow,
        config: &SolverConfig,
        lambda: f64,
    ) -> Self {
        let viscous = assembly::stiffness(space).scaled(data.eta);
        let div = assembly::divergence(space);
        let w = &reference.w_star;
        let mut load = assembly::body_force_load(space, &data.force);
        let traction = assembly::outlet_traction_load(space, &data.sigma);
        let kw = viscous.mul_vec(w);
        let bp = div.mul_vec_transposed(&reference.pi_star);
        for i in 0..load.len() {
            load[i] = lambda * (load[i] + traction[i] - kw[i] + bp[i]);
        }
        let div_load = div.mul_vec(w).iter().map(|x| lambda * x).collect();
        let dirichlet: Vec<bool> = (0..space.n_velocity()).map(|d| space.is_dirichlet_dof(d)).collect();
        let fixed = (0..space.n_velocity()).filter(|&d| dirichlet[d]).map(|d| (d, 0.0)).collect();
        NonlinearSystem {
            space,
            config: config.clone(),
            lambda,
            viscous,
            div,
            w_star: w,
            pi_star: &reference.pi_star,
            load,
            div_load,
            fixed,
            dirichlet,
        }
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    fn transport(&self, v: &[f64]) -> Vec<f64> {
        v.iter().zip(self.w_star).map(|(a, b)| a + b).collect()
    }

    fn ddn(&self) -> bool {
        self.config.outlet == OutletCondition::Ddn
    }

    pub fn residual(&self, v: &[f64], q: &[f64]) -> Residual {
        let a = self.transport(v);
        let mut r = self.viscous.mul_vec(v);
        let ca = assembly::convection(self.space, &a, self.config.convection).mul_vec(&a);
        let bq = self.div.mul_vec_transposed(q);
        for i in 0..r.len() {
            r[i] += self.lambda * ca[i] - bq[i] - self.load[i];
        }
        if self.ddn() {
            let (m, _) = assembly::ddn_boundary(self.space, &a, self.w_star);
            let mv = m.mul_vec(v);
            r.iter_mut().zip(&mv).for_each(|(x, y)| *x += self.lambda * y);
        }
        for (x, &fixed) in r.iter_mut().zip(&self.dirichlet) {
            if fixed {
                *x = 0.0;
            }
        }
        let continuity = self.div.mul_vec(v).iter().zip(&self.div_load).map(|(bv, d)| -bv - d).collect();
        Residual { momentum: r, continuity }
    }

    /// Velocity block of the Jacobian of [`Self::residual`].
    pub fn jacobian(&self, v: &[f64]) -> SparseMatrix {
        let a = self.transport(v);
        let form = self.config.convection;
        let conv = assembly::convection(self.space, &a, form)
            .linear_combination(1.0, &assembly::convection_linearization(self.space, &a, form), 1.0);
        let mut j = self.viscous.linear_combination(1.0, &conv, self.lambda);
        if self.ddn() {
            let (m, _) = assembly::ddn_boundary(self.space, &a, self.w_star);
            let dm = m.linear_combination(1.0, &assembly::ddn_linearization(self.space, &a, v), 1.0);
            j = j.linear_combination(1.0, &dm, self.lambda);
        }
        j
    }

    /// Oseen step with transport and backflow weight frozen at `v`.
    pub fn picard_step(&self, v: &[f64]) -> Result<(Vec<f64>, Vec<f64>)> {
        let a = self.transport(v);
        let c = assembly::convection(self.space, &a, self.config.convection);
        let mut m = self.viscous.linear_combination(1.0, &c, self.lambda);
        if self.ddn() {
            let (d, _) = assembly::ddn_boundary(self.space, &a, self.w_star);
            m = m.linear_combination(1.0, &d, self.lambda);
        }
        let cw = c.mul_vec(self.w_star);
        let f: Vec<f64> = self.load.iter().zip(&cw).map(|(l, x)| l - self.lambda * x).collect();
        let d: Vec<f64> = self.div_load.iter().map(|x| -x).collect();
        let solver = SaddleSolver::new(&m, &self.div, None, &self.fixed)?;
        Ok(solver.solve(&f, &d))
    }

    /// Newton correction `(dv, dq)` at `(v, q)`.
    pub fn newton_direction(&self, v: &[f64], r: &Residual) -> Result<(Vec<f64>, Vec<f64>)> {
        let solver = SaddleSolver::new(&self.jacobian(v), &self.div, None, &self.fixed)?;
        let f: Vec<f64> = r.momentum.iter().map(|x| -x).collect();
        Ok(solver.solve(&f, &r.continuity))
    }

    /// Damped Newton step; returns the new state and its residual norm.
    pub fn newton_step(&self, v: &[f64], q: &[f64]) -> Result<(Vec<f64>, Vec<f64>, f64)> {
        let r = self.residual(v, q);
        let r0 = r.norm();
        let (dv, dq) = self.newton_direction(v, &r)?;
        let mut t = 1.0;
        for _ in 0..=MAX_BACKTRACKS {
            let vt: Vec<f64> = v.iter().zip(&dv).map(|(a, b)| a + t * b).collect();
            let qt: Vec<f64> = q.iter().zip(&dq).map(|(a, b)| a + t * b).collect();
            let rt = self.residual(&vt, &qt).norm();
            if rt < r0 {
                return Ok((vt, qt, rt));
            }
            t *= 0.5;
        }
        Err(Error::LineSearchFailure { residual: r0 })
    }

    /// Norm of the residual at the zero state, the reference for the
    /// relative tolerance.
    pub fn data_norm(&self) -> f64 {
        let n = self.space.n_velocity();
        self.residual(&vec![0.0; n], &vec![0.0; self.space.n_pressure()]).norm()
    }

    fn converged(&self, r: f64, scale: f64) -> bool {
        r <= self.config.rel_tol * scale || r <= self.config.abs_tol
    }

    pub fn fields(&self, v: Vec<f64>, q: Vec<f64>, history: Vec<IterationRecord>) -> SolutionFields {
        SolutionFields {
            velocity: self.transport(&v),
            pressure: q.iter().zip(self.pi_star).map(|(a, b)| a + self.lambda * b).collect(),
            shifted: v,
            shifted_pressure: q,
            lambda: self.lambda,
            history,
        }
    }

    /// Iterate from `start` (zero when `None`) until the residual meets the
    /// tolerance.
    pub fn solve_from(&self, start: Option<(Vec<f64>, Vec<f64>)>) -> Result<SolutionFields> {
        let (mut v, mut q) =
            start.unwrap_or_else(|| (vec![0.0; self.space.n_velocity()], vec![0.0; self.space.n_pressure()]));
        for (x, &fixed) in v.iter_mut().zip(&self.dirichlet) {
            if fixed {
                *x = 0.0;
            }
        }
        let scale = self.data_norm();
        let mut rn = self.residual(&v, &q).norm();
        let mut history = vec![IterationRecord { iteration: 0, residual: rn, step_norm: 0.0 }];
        let mut newton = self.config.linearization == Linearization::Newton;
        let mut increases = 0;
        loop {
            if !rn.is_finite() {
                return Err(Error::Diverged { reason: "non-finite residual".into(), trace: history });
            }
            if self.converged(rn, scale) {
                return Ok(self.fields(v, q, history));
            }
            let it = history.len();
            if it > self.config.max_iterations {
                return Err(Error::Diverged {
                    reason: format!("no convergence within {} iterations", self.config.max_iterations),
                    trace: history,
                });
            }
            if self.config.linearization == Linearization::PicardThenNewton && rn <= self.config.switch_tol * scale {
                newton = true;
            }
            let (vn, qn, r_new) = if newton {
                self.newton_step(&v, &q)?
            } else {
                let (vn, qn) = self.picard_step(&v)?;
                let r = self.residual(&vn, &qn).norm();
                (vn, qn, r)
            };
            let step = v.iter().zip(&vn).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt();
            increases = if r_new > rn { increases + 1 } else { 0 };
            v = vn;
            q = qn;
            rn = r_new;
            history.push(IterationRecord { iteration: it, residual: rn, step_norm: step });
            log::debug!("lambda {:.4} iteration {it}: residual {rn:.3e}, step {step:.3e}", self.lambda);
            if increases >= MAX_INCREASES {
                return Err(Error::Diverged {
                    reason: format!("residual increased for {MAX_INCREASES} consecutive iterations"),
                    trace: history,
                });
            }
        }
    }
}

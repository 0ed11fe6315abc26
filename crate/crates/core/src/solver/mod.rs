//! Nonlinear solvers for the steady problem in the shifted unknown
//! `v = u - W*`.

mod continuation;
mod system;
mod uniqueness;

pub use continuation::{continuation_solve, ContinuationState, StepRecord};
pub use system::{NonlinearSystem, Residual};
pub use uniqueness::{uniqueness_probe, UniquenessReport};

use serde::Serialize;

use crate::error::{Error, IterationRecord, Result};
use crate::fem::{assembly, velocity_constraints, ConvectionForm, FeSpace, SaddleSolver};
use crate::problem::ProblemData;
use crate::reference::{build_reference_flow, ReferenceFlow};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Linearization {
    Picard,
    Newton,
    PicardThenNewton,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum OutletCondition {
    Ddn,
    DoNothing,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolverConfig {
    pub linearization: Linearization,
    pub outlet: OutletCondition,
    pub convection: ConvectionForm,
    /// Relative residual tolerance.
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub max_iterations: usize,
    /// Relative residual at which PICARD_THEN_NEWTON hands over to Newton.
    pub switch_tol: f64,
    /// Solve through the lambda homotopy instead of directly at lambda = 1.
    pub continuation: bool,
    pub initial_step: f64,
    pub min_step: f64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            linearization: Linearization::PicardThenNewton,
            outlet: OutletCondition::Ddn,
            convection: ConvectionForm::Skew,
            rel_tol: 1e-10,
            abs_tol: 1e-13,
            max_iterations: 100,
            switch_tol: 1e-3,
            continuation: false,
            initial_step: 0.25,
            min_step: 1e-3,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        let positive = [("rel_tol", self.rel_tol), ("abs_tol", self.abs_tol), ("switch_tol", self.switch_tol)];
        for (name, v) in positive {
            if !(v > 0.0) {
                return Err(Error::argument(format!("{name} must be positive, got {v}")));
            }
        }
        if self.max_iterations == 0 {
            return Err(Error::argument("max_iterations must be at least 1"));
        }
        if !(self.initial_step > 0.0 && self.initial_step <= 1.0) {
            return Err(Error::argument(format!("initial_step must lie in (0, 1], got {}", self.initial_step)));
        }
        if !(self.min_step > 0.0 && self.min_step <= self.initial_step) {
            return Err(Error::argument(format!("min_step must lie in (0, initial_step], got {}", self.min_step)));
        }
        Ok(())
    }
}

/// Discrete velocity and pressure with solver metadata.
#[derive(Debug, Clone)]
pub struct SolutionFields {
    /// Total velocity `u = v + W*`.
    pub velocity: Vec<f64>,
    /// Pressure `q + lambda Pi*` (P1).
    pub pressure: Vec<f64>,
    /// Shifted velocity `v`.
    pub shifted: Vec<f64>,
    /// Pressure unknown of the shifted system.
    pub shifted_pressure: Vec<f64>,
    pub lambda: f64,
    pub history: Vec<IterationRecord>,
}

impl SolutionFields {
    pub fn iterations(&self) -> usize {
        self.history.len().saturating_sub(1)
    }

    pub fn final_residual(&self) -> f64 {
        self.history.last().map_or(0.0, |r| r.residual)
    }
}

/// Linear Stokes problem in the total variables with the natural traction
/// condition on the outlet.
pub fn stokes_solve(space: &FeSpace, data: &ProblemData) -> Result<SolutionFields> {
    let c = velocity_constraints(space, &|x| data.inflow.value(x), None);
    let a = assembly::stiffness(space).scaled(data.eta);
    let b = assembly::divergence(space);
    let mut f = assembly::body_force_load(space, &data.force);
    let s = assembly::outlet_traction_load(space, &data.sigma);
    f.iter_mut().zip(&s).for_each(|(x, y)| *x += y);
    let solver = SaddleSolver::new(&a, &b, None, &c.dofs)?;
    let (u, p) = solver.solve(&f, &vec![0.0; space.n_pressure()]);
    Ok(SolutionFields {
        shifted: u.clone(),
        shifted_pressure: p.clone(),
        velocity: u,
        pressure: p,
        lambda: 1.0,
        history: Vec::new(),
    })
}

/// Reference flow plus a solve at `lambda = 1`, directly or through the
/// continuation path depending on `config`.
pub fn solve(space: &FeSpace, data: &ProblemData, config: &SolverConfig) -> Result<(SolutionFields, ReferenceFlow)> {
    config.validate()?;
    let reference = build_reference_flow(space, data)?;
    let sol = if config.continuation {
        let state = continuation::run(space, data, &reference, config)?;
        state.solutions.last().cloned().expect("continuation ends at lambda = 1")
    } else {
        let sys = NonlinearSystem::new(space, data, &reference, config, 1.0);
        sys.solve_from(None)?
    };
    Ok((sol, reference))
}

use serde::Serialize;

use super::{NonlinearSystem, SolutionFields, SolverConfig};
use crate::error::{Error, Result};
use crate::fem::{norms, FeSpace};
use crate::problem::ProblemData;
use crate::reference::{build_reference_flow, ReferenceFlow};

/// One attempted continuation step.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StepRecord {
    pub lambda: f64,
    pub step: f64,
    pub accepted: bool,
    pub iterations: usize,
}

#[derive(Debug, Clone)]
pub struct ContinuationState {
    /// Accepted parameter values, starting at 0 and ending at 1.
    pub lambdas: Vec<f64>,
    pub solutions: Vec<SolutionFields>,
    /// `||grad v||` at each accepted value.
    pub gradient_norms: Vec<f64>,
    pub log: Vec<StepRecord>,
    pub reference: ReferenceFlow,
}

impl ContinuationState {
    pub fn last(&self) -> &SolutionFields {
        self.solutions.last().expect("state holds the lambda = 0 solution")
    }
}

pub fn continuation_solve(space: &FeSpace, data: &ProblemData, config: &SolverConfig) -> Result<ContinuationState> {
    config.validate()?;
    let reference = build_reference_flow(space, data)?;
    run(space, data, &reference, config)
}

pub(super) fn run(
    space: &FeSpace,
    data: &ProblemData,
    reference: &ReferenceFlow,
    config: &SolverConfig,
) -> Result<ContinuationState> {
    let start = NonlinearSystem::new(space, data, reference, config, 0.0).solve_from(None)?;
    let mut state = ContinuationState {
        lambdas: vec![0.0],
        gradient_norms: vec![norms::velocity_h1_seminorm(space, &start.shifted)],
        solutions: vec![start],
        log: vec![StepRecord { lambda: 0.0, step: 0.0, accepted: true, iterations: 0 }],
        reference: reference.clone(),
    };
    let mut lambda = 0.0;
    let mut step = config.initial_step;
    while lambda < 1.0 {
        let target = if lambda + step >= 1.0 { 1.0 } else { lambda + step };
        let prev = state.last();
        let init = (prev.shifted.clone(), prev.shifted_pressure.clone());
        let sys = NonlinearSystem::new(space, data, reference, config, target);
        match sys.solve_from(Some(init)) {
            Ok(sol) => {
                let taken = target - lambda;
                state.log.push(StepRecord { lambda: target, step: taken, accepted: true, iterations: sol.iterations() });
                state.gradient_norms.push(norms::velocity_h1_seminorm(space, &sol.shifted));
                state.lambdas.push(target);
                state.solutions.push(sol);
                lambda = target;
                step *= 1.5;
            }
            Err(e @ (Error::Diverged { .. } | Error::LineSearchFailure { .. })) => {
                let iterations = match &e {
                    Error::Diverged { trace, .. } => trace.len().saturating_sub(1),
                    _ => 0,
                };
                log::info!("continuation step to lambda = {target} rejected: {e}");
                state.log.push(StepRecord { lambda: target, step: target - lambda, accepted: false, iterations });
                step *= 0.5;
                if step < config.min_step {
                    return Err(Error::ContinuationStalled { lambda, step });
                }
            }
            Err(e) => return Err(e),
        }
    }
    Ok(state)
}

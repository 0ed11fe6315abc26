//! Physical data of a flow problem.

use crate::error::{Error, Result};
use crate::field::{ScalarField, VectorField};

#[derive(Debug, Clone)]
pub struct ProblemData {
    /// Kinematic viscosity.
    pub eta: f64,
    pub force: VectorField,
    /// Inflow velocity on the inlet.
    pub inflow: VectorField,
    /// Scalar traction on the outlet.
    pub sigma: ScalarField,
}

impl ProblemData {
    pub fn new(eta: f64, force: VectorField, inflow: VectorField, sigma: ScalarField) -> Result<Self> {
        if !(eta > 0.0) || !eta.is_finite() {
            return Err(Error::argument(format!("viscosity must be positive, got {eta}")));
        }
        Ok(ProblemData { eta, force, inflow, sigma })
    }

    /// No force, no inflow, no traction.
    pub fn at_rest(eta: f64) -> Result<Self> {
        Self::new(eta, VectorField::zero(), VectorField::zero(), ScalarField::zero())
    }

    /// All data multiplied by `s`.
    pub fn scaled(&self, s: f64) -> ProblemData {
        let sigma = self.sigma.clone();
        ProblemData {
            eta: self.eta,
            force: self.force.scaled(s),
            inflow: self.inflow.scaled(s),
            sigma: ScalarField::new(move |x, y| s * sigma.call(x, y)),
        }
    }
}

use serde::Serialize;

use super::ConstantsEstimate;
use crate::error::{Error, Result};
use crate::fem::{norms, FeSpace};
use crate::problem::ProblemData;
use crate::reference::ReferenceFlow;
use crate::solver::SolutionFields;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundMargin {
    /// `||grad (u - W*)||`.
    pub lhs: f64,
    /// `||f|| + ||sigma*|| + ||g*|| + ||g*||^2` with surrogate boundary norms.
    pub data_norm: f64,
    pub bound_constant: f64,
    /// `bound_constant * data_norm - lhs`.
    pub margin: f64,
}

fn terms(space: &FeSpace, data: &ProblemData, reference: &ReferenceFlow, fields: &SolutionFields) -> (f64, f64) {
    let r = &reference.report;
    let g = r.g_star_surrogate;
    let data_norm = norms::field_l2(space, &data.force) + r.sigma_star_surrogate + g + g * g;
    let v: Vec<f64> = fields.velocity.iter().zip(&reference.w_star).map(|(u, w)| u - w).collect();
    (norms::velocity_h1_seminorm(space, &v), data_norm)
}

/// Constant that makes the bound an equality on this run.
pub fn calibrate_bound(space: &FeSpace, data: &ProblemData, reference: &ReferenceFlow, fields: &SolutionFields) -> Result<f64> {
    let (lhs, data_norm) = terms(space, data, reference, fields);
    if !(data_norm > 0.0) {
        return Err(Error::argument("cannot calibrate the bound on zero data"));
    }
    Ok(lhs / data_norm)
}

pub fn apriori_bound_check(
    space: &FeSpace,
    data: &ProblemData,
    reference: &ReferenceFlow,
    fields: &SolutionFields,
    constants: &ConstantsEstimate,
) -> Result<BoundMargin> {
    let c = constants.bound_constant.ok_or(Error::ConstantsMissing)?;
    let (lhs, data_norm) = terms(space, data, reference, fields);
    Ok(BoundMargin { lhs, data_norm, bound_constant: c, margin: c * data_norm - lhs })
}

//! Post-solve checks: energy balance, a-priori bound, constants and the
//! convection identity.

mod bound;
mod constants;
mod energy;
mod identity;

pub use bound::{apriori_bound_check, calibrate_bound, BoundMargin};
pub use constants::{
    construction_constant, estimate_constants, infsup_constant, sobolev_quotient, trace_constant, ConstantsEstimate,
};
pub use energy::{convection_form, energy_report, EnergyReport};
pub use identity::{identity_tests, random_smooth_force, IdentityReport};

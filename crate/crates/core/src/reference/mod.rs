//! Poiseuille flows, the torsion problem and the discrete reference flow.

pub mod couette;
pub mod flow;
pub mod poiseuille;
pub mod torsion;

pub use couette::{taylor_couette_check, taylor_couette_field, CouetteResiduals};
pub use flow::{build_reference_flow, cutoff, influx, poiseuille_inflow, random_inflow, ReferenceFlow, ReferenceReport};
pub use poiseuille::PoiseuilleFlow;
pub use torsion::{torsion_solve, PipeProfile, TorsionSolution};

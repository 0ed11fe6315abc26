//! Taylor–Hood finite elements: spaces, assembly, constraints and norms.

pub mod assembly;
pub mod basis;
pub mod dirichlet;
pub mod norms;
pub mod quadrature;
pub mod saddle;
pub mod space;

pub use assembly::ConvectionForm;
pub use dirichlet::{velocity_constraints, Reduction, VelocityConstraints};
pub use norms::ErrorNorms;
pub use saddle::{saddle_matrix, SaddleSolver};
pub use space::{Element, Facet, FeSpace, NodeKind};

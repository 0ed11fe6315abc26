pub mod error;
pub mod fem;
pub mod field;
pub mod geometry;
pub mod jet;
pub mod linalg;
pub mod parallel;
pub mod problem;
pub mod reference;

pub use error::{Error, Result};
pub use problem::ProblemData;
pub mod solver;
pub mod diagnostics;
pub mod io;

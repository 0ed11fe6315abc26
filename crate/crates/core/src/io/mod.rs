//! Case files, expressions and output formats.

pub mod config;
pub mod expr;
pub mod manifest;
pub mod table;
pub mod vtk;

pub use config::{CaseConfig, DomainConfig, ExactConfig, Force, Inflow, Traction, MeshConfig, OutputConfig, PhysicsConfig, Shape};
pub use expr::{Expr, ExprError};
pub use manifest::{sha256_hex, write_atomic, FileEntry, MeshStats, RunDir, RunManifest, MANIFEST_NAME};
pub use table::{float_column, read_table, Cell, Table};
pub use vtk::write_vtk;

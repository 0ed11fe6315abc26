//! Admissible channel geometry, rigid section frames and meshing.

pub mod domain;
pub mod mesh;
pub mod mesh_file;
pub mod simple;
pub mod transform;

pub use domain::{build_domain, Domain, DomainSpec, HermiteKnot, Section, WallCurve};
pub use mesh::{generate_mesh, BoundaryEdge, BoundaryTag, Mesh, Region};
pub use mesh_file::{read_mesh, write_mesh};
pub use simple::{disk_mesh, rectangle_mesh};
pub use transform::{Point, RigidTransform};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
#[error("invalid geometry: {reason}")]
pub struct GeometryError {
    pub reason: String,
}

impl GeometryError {
    pub fn new(reason: impl Into<String>) -> Self {
        GeometryError { reason: reason.into() }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum MeshError {
    #[error("minimum angle {min_angle:.2} deg after {passes} smoothing passes")]
    QualityFloor { min_angle: f64, passes: usize },
    #[error("invalid mesh: {0}")]
    Invalid(String),
    #[error("mesh file line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

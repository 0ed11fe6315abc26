//! Legacy ASCII VTK output.

use std::io::Write;

use crate::fem::FeSpace;

/// Unstructured grid of the vertex mesh with the velocity and pressure at
/// the vertices.
pub fn write_vtk(space: &FeSpace, velocity: &[f64], pressure: &[f64], mut w: impl Write) -> std::io::Result<()> {
    let mesh = space.mesh();
    let nv = mesh.num_vertices();
    let nt = mesh.num_triangles();
    let n = space.n_nodes();
    writeln!(w, "# vtk DataFile Version 3.0")?;
    writeln!(w, "pipeflow solution")?;
    writeln!(w, "ASCII")?;
    writeln!(w, "DATASET UNSTRUCTURED_GRID")?;
    writeln!(w, "POINTS {nv} double")?;
    for p in &mesh.vertices {
        writeln!(w, "{:.16e} {:.16e} 0", p[0], p[1])?;
    }
    writeln!(w, "CELLS {nt} {}", 4 * nt)?;
    for t in &mesh.triangles {
        writeln!(w, "3 {} {} {}", t[0], t[1], t[2])?;
    }
    writeln!(w, "CELL_TYPES {nt}")?;
    for _ in 0..nt {
        writeln!(w, "5")?;
    }
    writeln!(w, "POINT_DATA {nv}")?;
    writeln!(w, "VECTORS velocity double")?;
    for i in 0..nv {
        writeln!(w, "{:.16e} {:.16e} 0", velocity[i], velocity[n + i])?;
    }
    writeln!(w, "SCALARS pressure double 1")?;
    writeln!(w, "LOOKUP_TABLE default")?;
    for p in &pressure[..nv] {
        writeln!(w, "{p:.16e}")?;
    }
    Ok(())
}

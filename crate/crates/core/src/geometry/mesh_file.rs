//! Plain-text mesh format.
//!
//! ```text
//! nv nt nb
//! x y            (nv lines)
//! i j k label    (nt lines, label 0..3 = OMEGA0, OMEGA1, OMEGA2, OMEGA_SHARP)
//! i j tag        (nb lines, tag I, W or O)
//! ```

use std::io::{BufRead, Write};

use super::mesh::{BoundaryEdge, BoundaryTag, Mesh, Region};
use super::MeshError;

pub fn write_mesh(mesh: &Mesh, mut w: impl Write) -> Result<(), MeshError> {
    writeln!(w, "{} {} {}", mesh.vertices.len(), mesh.triangles.len(), mesh.boundary_edges.len())?;
    for v in &mesh.vertices {
        writeln!(w, "{:.16e} {:.16e}", v[0], v[1])?;
    }
    for (t, r) in mesh.triangles.iter().zip(&mesh.regions) {
        writeln!(w, "{} {} {} {}", t[0], t[1], t[2], r.code())?;
    }
    for e in &mesh.boundary_edges {
        let tag = match e.tag {
            BoundaryTag::Inlet => 'I',
            BoundaryTag::Wall => 'W',
            BoundaryTag::Outlet => 'O',
            BoundaryTag::Interface => {
                return Err(MeshError::Invalid("interface edges cannot be written".into()))
            }
        };
        writeln!(w, "{} {} {}", e.vertices[0], e.vertices[1], tag)?;
    }
    Ok(())
}

pub fn read_mesh(r: impl BufRead) -> Result<Mesh, MeshError> {
    let mut lines = r.lines().enumerate().filter_map(|(i, l)| match l {
        Ok(s) if s.trim().is_empty() => None,
        other => Some((i + 1, other)),
    });
    let mut next = |what: &str| -> Result<(usize, Vec<String>), MeshError> {
        match lines.next() {
            Some((n, Ok(s))) => Ok((n, s.split_whitespace().map(str::to_owned).collect())),
            Some((_, Err(e))) => Err(e.into()),
            None => Err(MeshError::Parse { line: 0, message: format!("unexpected end of file, expected {what}") }),
        }
    };
    fn field<T: std::str::FromStr>(line: usize, f: &[String], i: usize) -> Result<T, MeshError> {
        f.get(i)
            .ok_or_else(|| MeshError::Parse { line, message: format!("missing field {}", i + 1) })?
            .parse()
            .map_err(|_| MeshError::Parse { line, message: format!("bad field {}: {:?}", i + 1, f[i]) })
    }
    let expect_len = |line: usize, f: &[String], n: usize| {
        if f.len() == n {
            Ok(())
        } else {
            Err(MeshError::Parse { line, message: format!("expected {n} fields, found {}", f.len()) })
        }
    };

    let (ln, head) = next("header")?;
    expect_len(ln, &head, 3)?;
    let (nv, nt, nb): (usize, usize, usize) = (field(ln, &head, 0)?, field(ln, &head, 1)?, field(ln, &head, 2)?);
    let mut mesh = Mesh {
        vertices: Vec::with_capacity(nv),
        triangles: Vec::with_capacity(nt),
        boundary_edges: Vec::with_capacity(nb),
        regions: Vec::with_capacity(nt),
    };
    for _ in 0..nv {
        let (ln, f) = next("vertex")?;
        expect_len(ln, &f, 2)?;
        mesh.vertices.push([field(ln, &f, 0)?, field(ln, &f, 1)?]);
    }
    let check = |ln: usize, v: usize| {
        if v < nv {
            Ok(v)
        } else {
            Err(MeshError::Parse { line: ln, message: format!("vertex index {v} out of range") })
        }
    };
    for _ in 0..nt {
        let (ln, f) = next("triangle")?;
        expect_len(ln, &f, 4)?;
        let t = [check(ln, field(ln, &f, 0)?)?, check(ln, field(ln, &f, 1)?)?, check(ln, field(ln, &f, 2)?)?];
        let code: u8 = field(ln, &f, 3)?;
        let r = Region::from_code(code)
            .ok_or_else(|| MeshError::Parse { line: ln, message: format!("unknown region label {code}") })?;
        mesh.triangles.push(t);
        mesh.regions.push(r);
    }
    for _ in 0..nb {
        let (ln, f) = next("boundary edge")?;
        expect_len(ln, &f, 3)?;
        let tag = match f[2].as_str() {
            "I" => BoundaryTag::Inlet,
            "W" => BoundaryTag::Wall,
            "O" => BoundaryTag::Outlet,
            other => {
                return Err(MeshError::Parse { line: ln, message: format!("unknown boundary tag {other:?}") })
            }
        };
        mesh.boundary_edges.push(BoundaryEdge {
            vertices: [check(ln, field(ln, &f, 0)?)?, check(ln, field(ln, &f, 1)?)?],
            tag,
        });
    }
    if let Some((ln, _)) = lines.next() {
        return Err(MeshError::Parse { line: ln, message: "trailing content".into() });
    }
    mesh.validate()?;
    Ok(mesh)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{build_domain, generate_mesh, DomainSpec};

    #[test]
    fn round_trip_is_exact() {
        let d = build_domain(DomainSpec::s_bend(1.0, 2.0, 0.7, 1.0, 0.5)).unwrap();
        let m = generate_mesh(&d, 0.2).unwrap();
        let mut buf = Vec::new();
        write_mesh(&m, &mut buf).unwrap();
        let back = read_mesh(&buf[..]).unwrap();
        assert_eq!(m, back);
    }

    #[test]
    fn reports_line_of_bad_tag() {
        let text = "3 1 3\n0 0\n1 0\n0 1\n0 1 2 1\n0 1 W\n1 2 Q\n2 0 I\n";
        match read_mesh(text.as_bytes()) {
            Err(MeshError::Parse { line, .. }) => assert_eq!(line, 7),
            other => panic!("{other:?}"),
        }
    }
}

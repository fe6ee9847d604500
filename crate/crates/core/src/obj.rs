//! Wavefront OBJ reading and writing (`v`, `vt`, `f` records only).

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use crate::error::{Error, Result};
use crate::mesh::Mesh;

/// Raw contents of an OBJ file before topology validation.
#[derive(Debug, Clone, Default)]
pub struct ObjData {
    pub positions: Vec<[f64; 3]>,
    pub texcoords: Vec<[f64; 2]>,
    pub faces: Vec<Vec<usize>>,
    /// Texture index per face corner, when every corner of the face has one.
    pub face_texcoords: Vec<Option<Vec<usize>>>,
}

fn parse_index(tok: &str, count: usize, line: usize) -> Result<usize> {
    let i: i64 = tok.parse().map_err(|_| Error::Parse {
        line,
        msg: format!("bad index `{tok}`"),
    })?;
    let idx = if i > 0 {
        i - 1
    } else if i < 0 {
        count as i64 + i
    } else {
        -1
    };
    if idx < 0 {
        return Err(Error::Parse {
            line,
            msg: format!("index `{tok}` out of range"),
        });
    }
    Ok(idx as usize)
}

fn parse_floats<const N: usize>(toks: &[&str], line: usize) -> Result<[f64; N]> {
    let mut out = [0.0; N];
    if toks.len() < N {
        return Err(Error::Parse {
            line,
            msg: format!("expected {N} coordinates"),
        });
    }
    for (o, t) in out.iter_mut().zip(toks) {
        *o = t.parse().map_err(|_| Error::Parse {
            line,
            msg: format!("bad number `{t}`"),
        })?;
    }
    Ok(out)
}

pub fn parse_obj(text: &str) -> Result<ObjData> {
    let mut data = ObjData::default();
    for (lineno, raw) in text.lines().enumerate() {
        let line = lineno + 1;
        let content = raw.split('#').next().unwrap_or("");
        let toks: Vec<&str> = content.split_whitespace().collect();
        let Some((&tag, rest)) = toks.split_first() else {
            continue;
        };
        match tag {
            "v" => data.positions.push(parse_floats::<3>(rest, line)?),
            "vt" => data.texcoords.push(parse_floats::<2>(rest, line)?),
            "f" => {
                let mut face = Vec::with_capacity(rest.len());
                let mut tex = Vec::with_capacity(rest.len());
                for t in rest {
                    let mut parts = t.split('/');
                    let vi = parts.next().unwrap_or("");
                    face.push(parse_index(vi, data.positions.len(), line)?);
                    match parts.next() {
                        Some(ti) if !ti.is_empty() => {
                            tex.push(parse_index(ti, data.texcoords.len(), line)?)
                        }
                        _ => {}
                    }
                }
                let has_tex = tex.len() == face.len();
                data.faces.push(face);
                data.face_texcoords.push(has_tex.then_some(tex));
            }
            _ => {}
        }
    }
    Ok(data)
}

pub fn mesh_from_obj_str(text: &str) -> Result<Mesh> {
    let data = parse_obj(text)?;
    if data.faces.is_empty() || data.positions.is_empty() {
        return Err(Error::EmptyMesh);
    }
    let mesh = Mesh::from_faces(data.positions.len(), &data.faces, Some(data.positions))?;
    for e in 0..mesh.num_edges() {
        if mesh.edge_length(e).is_some_and(|l| l <= 0.0) {
            return Err(Error::ZeroLengthEdge { edge: e });
        }
    }
    Ok(mesh)
}

pub fn load_mesh(path: impl AsRef<Path>) -> Result<Mesh> {
    mesh_from_obj_str(&fs::read_to_string(path)?)
}

/// Serializes the mesh. Vertices without an embedding are written at the origin.
/// When `corner_uv` is given it must hold one coordinate per halfedge; one
/// `vt` record is written per face corner.
pub fn mesh_to_obj_string(mesh: &Mesh, corner_uv: Option<&[[f64; 2]]>) -> String {
    let mut s = String::new();
    for v in 0..mesh.num_vertices() {
        let p = mesh.positions().map_or([0.0; 3], |p| p[v]);
        let _ = writeln!(s, "v {:.17e} {:.17e} {:.17e}", p[0], p[1], p[2]);
    }
    if let Some(uv) = corner_uv {
        for t in uv {
            let _ = writeln!(s, "vt {:.17e} {:.17e}", t[0], t[1]);
        }
    }
    for f in 0..mesh.num_faces() {
        s.push('f');
        for h in mesh.face_halfedges(f) {
            let v = mesh.origin(h) + 1;
            if corner_uv.is_some() {
                let _ = write!(s, " {}/{}", v, h + 1);
            } else {
                let _ = write!(s, " {v}");
            }
        }
        s.push('\n');
    }
    s
}

pub fn save_mesh(mesh: &Mesh, path: impl AsRef<Path>) -> Result<()> {
    fs::write(path, mesh_to_obj_string(mesh, None))?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    const CUBE: &str = "\
v 0 0 0
v 1 0 0
v 1 1 0
v 0 1 0
v 0 0 1
v 1 0 1
v 1 1 1
v 0 1 1
f 1 4 3 2
f 5 6 7 8
f 1 2 6 5
f 2 3 7 6
f 3 4 8 7
f 4 1 5 8
";

    #[test]
    fn loads_cube() {
        let m = mesh_from_obj_str(CUBE).unwrap();
        assert_eq!((m.num_vertices(), m.num_edges(), m.num_faces()), (8, 12, 6));
        assert_eq!(m.euler_characteristic(), 2);
    }

    #[test]
    fn slash_and_negative_indices() {
        let text = "v 0 0 0\nv 1 0 0\nv 0 1 0\nvt 0 0\nvt 1 0\nvt 0 1\nf -3/1 -2/2 -1/3\n";
        let d = parse_obj(text).unwrap();
        assert_eq!(d.faces, vec![vec![0, 1, 2]]);
        assert_eq!(d.face_texcoords[0], Some(vec![0, 1, 2]));
    }

    #[test]
    fn pentagon_rejected() {
        let text = "v 0 0 0\nv 1 0 0\nv 2 1 0\nv 1 2 0\nv 0 1 0\nf 1 2 3 4 5\n";
        assert!(matches!(
            mesh_from_obj_str(text),
            Err(Error::UnsupportedFaceDegree { degree: 5, .. })
        ));
    }

    #[test]
    fn empty_rejected() {
        assert!(matches!(
            mesh_from_obj_str("# nothing\n"),
            Err(Error::EmptyMesh)
        ));
    }

    #[test]
    fn round_trip() {
        let m = mesh_from_obj_str(CUBE).unwrap();
        let again = mesh_from_obj_str(&mesh_to_obj_string(&m, None)).unwrap();
        assert_eq!(m.faces(), again.faces());
        for (a, b) in m
            .positions()
            .unwrap()
            .iter()
            .zip(again.positions().unwrap())
        {
            for k in 0..3 {
                assert!((a[k] - b[k]).abs() < 1e-12);
            }
        }
    }
}

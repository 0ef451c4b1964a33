use std::fmt::Write as _;
use std::path::Path;

use super::{read_file, RawPoints, SampleSet};
use crate::{Error, Result, TriangleMesh, Vec3};

struct ObjData {
    vertices: Vec<Vec3>,
    normals: Vec<Vec3>,
    faces: Vec<[u32; 3]>,
}

fn parse_vec3(path: &Path, lineno: usize, fields: &[&str]) -> Result<Vec3> {
    if fields.len() < 3 {
        return Err(Error::parse(path, lineno, "expected 3 coordinates"));
    }
    let mut v = [0.0; 3];
    for (slot, f) in v.iter_mut().zip(fields) {
        *slot = f
            .parse()
            .map_err(|e: std::num::ParseFloatError| Error::parse(path, lineno, e.to_string()))?;
    }
    Ok(Vec3::from(v))
}

/// Resolves a face corner like `7`, `7/2`, `7//3` or `-1` into a 0-based
/// vertex index.
fn parse_corner(path: &Path, lineno: usize, token: &str, vertex_count: usize) -> Result<u32> {
    let head = token.split('/').next().unwrap_or("");
    let raw: i64 = head
        .parse()
        .map_err(|_| Error::parse(path, lineno, format!("bad face index '{token}'")))?;
    let idx = if raw > 0 {
        raw - 1
    } else if raw < 0 {
        vertex_count as i64 + raw
    } else {
        -1
    };
    if idx < 0 || idx as usize >= vertex_count {
        return Err(Error::parse(
            path,
            lineno,
            format!("face index {raw} out of range"),
        ));
    }
    Ok(idx as u32)
}

fn parse(path: &Path) -> Result<ObjData> {
    let bytes = read_file(path)?;
    let text = std::str::from_utf8(&bytes).map_err(|_| Error::parse(path, 0, "not UTF-8 text"))?;
    let mut data = ObjData {
        vertices: Vec::new(),
        normals: Vec::new(),
        faces: Vec::new(),
    };
    for (n, line) in text.lines().enumerate() {
        let lineno = n + 1;
        let line = line.split('#').next().unwrap_or("").trim();
        let mut tokens = line.split_whitespace();
        let Some(tag) = tokens.next() else { continue };
        let rest: Vec<&str> = tokens.collect();
        match tag {
            "v" => data.vertices.push(parse_vec3(path, lineno, &rest)?),
            "vn" => data.normals.push(parse_vec3(path, lineno, &rest)?),
            "f" => {
                if rest.len() < 3 {
                    return Err(Error::parse(path, lineno, "face needs at least 3 corners"));
                }
                let corners = rest
                    .iter()
                    .map(|t| parse_corner(path, lineno, t, data.vertices.len()))
                    .collect::<Result<Vec<_>>>()?;
                // fan-triangulate polygons
                for w in 1..corners.len() - 1 {
                    data.faces.push([corners[0], corners[w], corners[w + 1]]);
                }
            }
            "vt" | "vp" | "o" | "g" | "s" | "l" | "p" | "mtllib" | "usemtl" => {}
            other => {
                return Err(Error::parse(path, lineno, format!("unknown record '{other}'")));
            }
        }
    }
    Ok(data)
}

pub(crate) fn read_points(path: &Path) -> Result<RawPoints> {
    let data = parse(path)?;
    let normals = if data.normals.is_empty() {
        None
    } else if data.normals.len() == data.vertices.len() {
        Some(data.normals)
    } else {
        return Err(Error::parse(
            path,
            0,
            format!(
                "{} vertices but {} normals",
                data.vertices.len(),
                data.normals.len()
            ),
        ));
    };
    Ok(RawPoints {
        points: data.vertices,
        normals,
    })
}

pub(crate) fn read_mesh(path: &Path) -> Result<TriangleMesh> {
    let data = parse(path)?;
    let mut mesh = TriangleMesh::new(data.vertices, data.faces);
    if !data.normals.is_empty() && data.normals.len() == mesh.vertices.len() {
        mesh.normals = Some(data.normals);
    }
    Ok(mesh)
}

pub(crate) fn write_points(samples: &SampleSet, path: &Path) -> Result<()> {
    let mut out = String::with_capacity(samples.len() * 64);
    for s in samples.iter() {
        let _ = writeln!(out, "v {} {} {}", s.point.x, s.point.y, s.point.z);
        let _ = writeln!(out, "vn {} {} {}", s.normal.x, s.normal.y, s.normal.z);
    }
    std::fs::write(path, out).map_err(|e| Error::io(path, e))
}

pub(crate) fn write_mesh(mesh: &TriangleMesh, path: &Path) -> Result<()> {
    let mut out = String::with_capacity(mesh.vertices.len() * 48 + mesh.triangles.len() * 24);
    for v in &mesh.vertices {
        let _ = writeln!(out, "v {} {} {}", v.x, v.y, v.z);
    }
    if let Some(normals) = &mesh.normals {
        for n in normals {
            let _ = writeln!(out, "vn {} {} {}", n.x, n.y, n.z);
        }
        for t in &mesh.triangles {
            let _ = writeln!(
                out,
                "f {a}//{a} {b}//{b} {c}//{c}",
                a = t[0] + 1,
                b = t[1] + 1,
                c = t[2] + 1
            );
        }
    } else {
        for t in &mesh.triangles {
            let _ = writeln!(out, "f {} {} {}", t[0] + 1, t[1] + 1, t[2] + 1);
        }
    }
    std::fs::write(path, out).map_err(|e| Error::io(path, e))
}

use std::io::Write;
use std::path::Path;

use super::{read_file, RawPoints, SampleSet};
use crate::{Error, Result, TriangleMesh, Vec3};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Encoding {
    Ascii,
    BinaryLittleEndian,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum ScalarType {
    I8,
    U8,
    I16,
    U16,
    I32,
    U32,
    F32,
    F64,
}

impl ScalarType {
    fn parse(name: &str) -> Option<Self> {
        Some(match name {
            "char" | "int8" => ScalarType::I8,
            "uchar" | "uint8" => ScalarType::U8,
            "short" | "int16" => ScalarType::I16,
            "ushort" | "uint16" => ScalarType::U16,
            "int" | "int32" => ScalarType::I32,
            "uint" | "uint32" => ScalarType::U32,
            "float" | "float32" => ScalarType::F32,
            "double" | "float64" => ScalarType::F64,
            _ => return None,
        })
    }

    fn size(self) -> usize {
        match self {
            ScalarType::I8 | ScalarType::U8 => 1,
            ScalarType::I16 | ScalarType::U16 => 2,
            ScalarType::I32 | ScalarType::U32 | ScalarType::F32 => 4,
            ScalarType::F64 => 8,
        }
    }

    fn decode_le(self, b: &[u8]) -> f64 {
        match self {
            ScalarType::I8 => b[0] as i8 as f64,
            ScalarType::U8 => b[0] as f64,
            ScalarType::I16 => i16::from_le_bytes([b[0], b[1]]) as f64,
            ScalarType::U16 => u16::from_le_bytes([b[0], b[1]]) as f64,
            ScalarType::I32 => i32::from_le_bytes(b[..4].try_into().unwrap()) as f64,
            ScalarType::U32 => u32::from_le_bytes(b[..4].try_into().unwrap()) as f64,
            ScalarType::F32 => f32::from_le_bytes(b[..4].try_into().unwrap()) as f64,
            ScalarType::F64 => f64::from_le_bytes(b[..8].try_into().unwrap()),
        }
    }
}

#[derive(Debug, Clone)]
enum PropertyKind {
    Scalar(ScalarType),
    List { count: ScalarType, item: ScalarType },
}

#[derive(Debug, Clone)]
struct Property {
    name: String,
    kind: PropertyKind,
}

#[derive(Debug, Clone)]
struct Element {
    name: String,
    count: usize,
    properties: Vec<Property>,
}

impl Element {
    fn scalar_slot(&self, name: &str) -> Option<usize> {
        self.properties
            .iter()
            .position(|p| p.name == name && matches!(p.kind, PropertyKind::Scalar(_)))
    }
}

struct Header {
    encoding: Encoding,
    elements: Vec<Element>,
    body_offset: usize,
    /// Number of text lines in the header, for ASCII line numbers.
    header_lines: usize,
}

fn parse_header(path: &Path, bytes: &[u8]) -> Result<Header> {
    let mut offset = 0;
    let mut lines = 0;
    let mut encoding = None;
    let mut elements: Vec<Element> = Vec::new();
    loop {
        let end = bytes[offset..]
            .iter()
            .position(|&b| b == b'\n')
            .ok_or_else(|| Error::parse(path, lines + 1, "unterminated PLY header"))?;
        let line = std::str::from_utf8(&bytes[offset..offset + end])
            .map_err(|_| Error::parse(path, lines + 1, "header is not text"))?
            .trim();
        offset += end + 1;
        lines += 1;
        let tokens: Vec<&str> = line.split_whitespace().collect();
        let bad = |msg: &str| Error::parse(path, lines, format!("{msg}: '{line}'"));
        if lines == 1 {
            if line != "ply" {
                return Err(bad("missing 'ply' magic"));
            }
            continue;
        }
        match tokens.first().copied() {
            Some("format") => {
                encoding = Some(match tokens.get(1).copied() {
                    Some("ascii") => Encoding::Ascii,
                    Some("binary_little_endian") => Encoding::BinaryLittleEndian,
                    _ => return Err(bad("unsupported PLY format")),
                });
            }
            Some("element") => {
                let (Some(name), Some(count)) = (tokens.get(1), tokens.get(2)) else {
                    return Err(bad("malformed element line"));
                };
                elements.push(Element {
                    name: name.to_string(),
                    count: count.parse().map_err(|_| bad("bad element count"))?,
                    properties: Vec::new(),
                });
            }
            Some("property") => {
                let element = elements
                    .last_mut()
                    .ok_or_else(|| bad("property before element"))?;
                let property = if tokens.get(1) == Some(&"list") {
                    if tokens.len() != 5 {
                        return Err(bad("malformed list property"));
                    }
                    Property {
                        name: tokens[4].to_string(),
                        kind: PropertyKind::List {
                            count: ScalarType::parse(tokens[2]).ok_or_else(|| bad("bad type"))?,
                            item: ScalarType::parse(tokens[3]).ok_or_else(|| bad("bad type"))?,
                        },
                    }
                } else {
                    if tokens.len() != 3 {
                        return Err(bad("malformed property"));
                    }
                    Property {
                        name: tokens[2].to_string(),
                        kind: PropertyKind::Scalar(
                            ScalarType::parse(tokens[1]).ok_or_else(|| bad("bad type"))?,
                        ),
                    }
                };
                element.properties.push(property);
            }
            Some("comment") | Some("obj_info") | None => {}
            Some("end_header") => break,
            Some(_) => return Err(bad("unknown header line")),
        }
    }
    let encoding = encoding.ok_or_else(|| Error::parse(path, lines, "missing format line"))?;
    Ok(Header {
        encoding,
        elements,
        body_offset: offset,
        header_lines: lines,
    })
}

/// One decoded element instance: scalar properties in declaration order and
/// list properties collected separately.
#[derive(Default)]
struct Record {
    scalars: Vec<f64>,
    lists: Vec<Vec<f64>>,
}

/// Sequential reader over the PLY body in either encoding.
struct BodyReader<'a> {
    path: &'a Path,
    encoding: Encoding,
    bytes: &'a [u8],
    pos: usize,
    line: usize,
    tokens: std::vec::IntoIter<&'a str>,
}

impl<'a> BodyReader<'a> {
    fn new(path: &'a Path, header: &Header, bytes: &'a [u8]) -> Self {
        BodyReader {
            path,
            encoding: header.encoding,
            bytes,
            pos: header.body_offset,
            line: header.header_lines,
            tokens: Vec::new().into_iter(),
        }
    }

    /// In ASCII each element instance occupies one line.
    fn begin_record(&mut self) -> Result<()> {
        if self.encoding == Encoding::BinaryLittleEndian {
            return Ok(());
        }
        loop {
            if self.pos >= self.bytes.len() {
                return Err(Error::parse(self.path, self.line + 1, "unexpected end of file"));
            }
            let end = self.bytes[self.pos..]
                .iter()
                .position(|&b| b == b'\n')
                .map_or(self.bytes.len(), |e| self.pos + e);
            let text = std::str::from_utf8(&self.bytes[self.pos..end])
                .map_err(|_| Error::parse(self.path, self.line + 1, "not text"))?;
            self.pos = end + 1;
            self.line += 1;
            let toks: Vec<&'a str> = text.split_whitespace().collect();
            if !toks.is_empty() {
                self.tokens = toks.into_iter();
                return Ok(());
            }
        }
    }

    fn end_record(&mut self) -> Result<()> {
        if self.encoding == Encoding::Ascii && self.tokens.next().is_some() {
            return Err(Error::parse(self.path, self.line, "trailing values in record"));
        }
        Ok(())
    }

    fn scalar(&mut self, ty: ScalarType, record: usize) -> Result<f64> {
        match self.encoding {
            Encoding::Ascii => {
                let tok = self
                    .tokens
                    .next()
                    .ok_or_else(|| Error::parse(self.path, self.line, "too few values in record"))?;
                tok.parse::<f64>()
                    .map_err(|_| Error::parse(self.path, self.line, format!("bad number '{tok}'")))
            }
            Encoding::BinaryLittleEndian => {
                let n = ty.size();
                if self.pos + n > self.bytes.len() {
                    return Err(Error::parse(self.path, record, "unexpected end of binary data"));
                }
                let v = ty.decode_le(&self.bytes[self.pos..self.pos + n]);
                self.pos += n;
                Ok(v)
            }
        }
    }

    fn record(&mut self, element: &Element, record: usize) -> Result<Record> {
        self.begin_record()?;
        let mut out = Record::default();
        for p in &element.properties {
            match p.kind {
                PropertyKind::Scalar(ty) => out.scalars.push(self.scalar(ty, record)?),
                PropertyKind::List { count, item } => {
                    let n = self.scalar(count, record)?;
                    if n < 0.0 || n.fract() != 0.0 {
                        return Err(Error::parse(self.path, record, "bad list length"));
                    }
                    let items = (0..n as usize)
                        .map(|_| self.scalar(item, record))
                        .collect::<Result<Vec<_>>>()?;
                    out.lists.push(items);
                }
            }
        }
        self.end_record()?;
        Ok(out)
    }
}

struct PlyContents {
    points: Vec<Vec3>,
    normals: Option<Vec<Vec3>>,
    faces: Vec<[u32; 3]>,
}

fn read(path: &Path, want_faces: bool) -> Result<PlyContents> {
    let bytes = read_file(path)?;
    let header = parse_header(path, &bytes)?;
    let mut reader = BodyReader::new(path, &header, &bytes);
    let mut contents = PlyContents {
        points: Vec::new(),
        normals: None,
        faces: Vec::new(),
    };
    let mut seen_vertex = false;
    for element in &header.elements {
        match element.name.as_str() {
            "vertex" => {
                seen_vertex = true;
                let slot = |n: &str| {
                    element.scalar_slot(n).ok_or_else(|| {
                        Error::parse(path, 0, format!("vertex element lacks property '{n}'"))
                    })
                };
                let xyz = [slot("x")?, slot("y")?, slot("z")?];
                let nxyz = match (
                    element.scalar_slot("nx"),
                    element.scalar_slot("ny"),
                    element.scalar_slot("nz"),
                ) {
                    (Some(a), Some(b), Some(c)) => Some([a, b, c]),
                    _ => None,
                };
                let mut normals = Vec::new();
                contents.points.reserve(element.count);
                for r in 0..element.count {
                    let rec = reader.record(element, r)?;
                    contents
                        .points
                        .push(Vec3::new(rec.scalars[xyz[0]], rec.scalars[xyz[1]], rec.scalars[xyz[2]]));
                    if let Some(n) = nxyz {
                        normals.push(Vec3::new(rec.scalars[n[0]], rec.scalars[n[1]], rec.scalars[n[2]]));
                    }
                }
                if nxyz.is_some() {
                    contents.normals = Some(normals);
                }
            }
            "face" if want_faces => {
                let list = element
                    .properties
                    .iter()
                    .filter(|p| matches!(p.kind, PropertyKind::List { .. }))
                    .position(|p| p.name == "vertex_indices" || p.name == "vertex_index")
                    .ok_or_else(|| Error::parse(path, 0, "face element lacks vertex_indices"))?;
                for r in 0..element.count {
                    let rec = reader.record(element, r)?;
                    let idx = &rec.lists[list];
                    if idx.len() < 3 {
                        return Err(Error::parse(path, r, "face with fewer than 3 vertices"));
                    }
                    for w in 1..idx.len() - 1 {
                        contents.faces.push([idx[0] as u32, idx[w] as u32, idx[w + 1] as u32]);
                    }
                }
            }
            _ => {
                if seen_vertex && !want_faces {
                    // Nothing after the vertices is needed for point input.
                    break;
                }
                for r in 0..element.count {
                    reader.record(element, r)?;
                }
            }
        }
    }
    if !seen_vertex {
        return Err(Error::parse(path, 0, "no vertex element"));
    }
    Ok(contents)
}

pub(crate) fn read_points(path: &Path) -> Result<RawPoints> {
    let c = read(path, false)?;
    Ok(RawPoints {
        points: c.points,
        normals: c.normals,
    })
}

pub(crate) fn read_mesh(path: &Path) -> Result<TriangleMesh> {
    let c = read(path, true)?;
    let mut mesh = TriangleMesh::new(c.points, c.faces);
    mesh.normals = c.normals;
    Ok(mesh)
}

fn write_bytes(path: &Path, f: impl FnOnce(&mut Vec<u8>) -> std::io::Result<()>) -> Result<()> {
    let mut buf = Vec::new();
    f(&mut buf).map_err(|e| Error::io(path, e))?;
    std::fs::write(path, buf).map_err(|e| Error::io(path, e))
}

fn put_vec3(buf: &mut Vec<u8>, v: &Vec3) {
    for c in v.iter() {
        buf.extend_from_slice(&c.to_le_bytes());
    }
}

pub(crate) fn write_points(samples: &SampleSet, path: &Path) -> Result<()> {
    write_bytes(path, |buf| {
        write!(
            buf,
            "ply\nformat binary_little_endian 1.0\nelement vertex {}\n\
property double x\nproperty double y\nproperty double z\n\
property double nx\nproperty double ny\nproperty double nz\nend_header\n",
            samples.len()
        )?;
        for s in samples.iter() {
            put_vec3(buf, &s.point);
            put_vec3(buf, &s.normal);
        }
        Ok(())
    })
}

pub(crate) fn write_mesh(mesh: &TriangleMesh, path: &Path) -> Result<()> {
    write_bytes(path, |buf| {
        write!(
            buf,
            "ply\nformat binary_little_endian 1.0\nelement vertex {}\n\
property double x\nproperty double y\nproperty double z\n",
            mesh.vertices.len()
        )?;
        if mesh.normals.is_some() {
            buf.extend_from_slice(b"property double nx\nproperty double ny\nproperty double nz\n");
        }
        write!(
            buf,
            "element face {}\nproperty list uchar int vertex_indices\nend_header\n",
            mesh.triangles.len()
        )?;
        for (i, v) in mesh.vertices.iter().enumerate() {
            put_vec3(buf, v);
            if let Some(n) = &mesh.normals {
                put_vec3(buf, &n[i]);
            }
        }
        for t in &mesh.triangles {
            buf.push(3);
            for &i in t {
                buf.extend_from_slice(&(i as i32).to_le_bytes());
            }
        }
        Ok(())
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::io::{load_mesh, load_samples, save_samples, LoadOptions, MeshFormat, PointFormat};
    use crate::Sample;
    use proptest::prelude::*;

    #[test]
    fn binary_float32_with_extra_properties_and_elements() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("b.ply");
        let mut buf = b"ply\nformat binary_little_endian 1.0\nelement vertex 2\n\
property float x\nproperty float y\nproperty float z\nproperty uchar red\n\
property float nx\nproperty float ny\nproperty float nz\n\
element face 1\nproperty list uchar int vertex_indices\nend_header\n"
            .to_vec();
        for (p, n) in [([1.0f32, 2.0, 3.0], [0.0f32, 0.0, 1.0]), ([4.0, 5.0, 6.0], [1.0, 0.0, 0.0])] {
            for c in p {
                buf.extend_from_slice(&c.to_le_bytes());
            }
            buf.push(200);
            for c in n {
                buf.extend_from_slice(&c.to_le_bytes());
            }
        }
        buf.push(3);
        for i in [0i32, 1, 1] {
            buf.extend_from_slice(&i.to_le_bytes());
        }
        std::fs::write(&path, buf).unwrap();
        let s = load_samples(&path, PointFormat::Ply, &LoadOptions::default())
            .unwrap()
            .samples;
        assert_eq!(s.len(), 2);
        assert_eq!(s.samples[1].point, Vec3::new(4.0, 5.0, 6.0));
        assert_eq!(s.samples[1].normal, Vec3::x());
    }

    #[test]
    fn truncated_binary_is_a_parse_error() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("t.ply");
        let mut buf = b"ply\nformat binary_little_endian 1.0\nelement vertex 2\n\
property double x\nproperty double y\nproperty double z\nend_header\n"
            .to_vec();
        buf.extend_from_slice(&[0u8; 30]);
        std::fs::write(&path, buf).unwrap();
        let opts = LoadOptions {
            constant_normal: Some(Vec3::z()),
            ..Default::default()
        };
        assert!(matches!(
            load_samples(&path, PointFormat::Ply, &opts),
            Err(Error::Parse { record: 1, .. })
        ));
    }

    #[test]
    fn garbage_is_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("g.ply");
        std::fs::write(&path, b"this is not a mesh\n").unwrap();
        assert!(matches!(load_mesh(&path, MeshFormat::Ply), Err(Error::Parse { .. })));
    }

    #[test]
    fn ascii_mesh_with_quad() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("q.ply");
        std::fs::write(
            &path,
            "ply\nformat ascii 1.0\nelement vertex 4\nproperty float x\nproperty float y\nproperty float z\n\
element face 1\nproperty list uchar int vertex_indices\nend_header\n\
0 0 0\n1 0 0\n1 1 0\n0 1 0\n4 0 1 2 3\n",
        )
        .unwrap();
        let m = load_mesh(&path, MeshFormat::Ply).unwrap();
        assert_eq!(m.triangles, vec![[0, 1, 2], [0, 2, 3]]);
    }

    fn finite() -> impl Strategy<Value = f64> {
        prop_oneof![
            any::<f64>().prop_filter("finite", |v| v.is_finite()),
            -1e3f64..1e3,
        ]
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(32))]
        #[test]
        fn sample_round_trip_is_bitwise(raw in prop::collection::vec(prop::array::uniform6(finite()), 1..40)) {
            let set: SampleSet = raw
                .iter()
                .map(|r| Sample::new(Vec3::new(r[0], r[1], r[2]), Vec3::new(r[3], r[4], 1.0 + r[5].abs().min(1e300))))
                .collect();
            let dir = tempfile::tempdir().unwrap();
            for (name, fmt) in [("s.ply", PointFormat::Ply), ("s.xyz", PointFormat::XyzNormal), ("s.obj", PointFormat::Obj)] {
                let path = dir.path().join(name);
                save_samples(&set, &path, fmt).unwrap();
                let back = load_samples(&path, fmt, &LoadOptions::default()).unwrap().samples;
                prop_assert_eq!(back.len(), set.len());
                for (a, b) in back.iter().zip(set.iter()) {
                    for c in 0..3 {
                        prop_assert_eq!(a.point[c].to_bits(), b.point[c].to_bits());
                        prop_assert_eq!(a.normal[c].to_bits(), b.normal[c].to_bits());
                    }
                }
            }
        }
    }
}

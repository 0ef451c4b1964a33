//! Oriented point sets and triangle meshes on disk.
//!
//! Supported formats:
//!
//! - PLY, ASCII or binary little-endian. Vertex properties `x y z` and
//!   optionally `nx ny nz` (float or double); other properties and elements
//!   are skipped. Meshes use a `face` element with a `vertex_indices` list.
//! - xyz-normal text: six whitespace-separated floats per line, `#` starts a
//!   comment.
//! - OBJ: `v`, `vn` and `f` records with 1-based indices.

mod domain;
mod obj;
mod ply;
mod xyz;

use std::path::Path;

pub use domain::{fit_domain, to_grid, to_world, DomainTransform, DEFAULT_MARGIN_CELLS};

use crate::{Error, Result, TriangleMesh, Vec3};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Sample {
    pub point: Vec3,
    /// Orientation estimate; not necessarily unit length.
    pub normal: Vec3,
}

impl Sample {
    pub fn new(point: Vec3, normal: Vec3) -> Self {
        Sample { point, normal }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum CoordinateSpace {
    #[default]
    World,
    Grid,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct SampleSet {
    pub samples: Vec<Sample>,
    pub space: CoordinateSpace,
}

impl SampleSet {
    pub fn new(samples: Vec<Sample>, space: CoordinateSpace) -> Self {
        SampleSet { samples, space }
    }

    pub fn world(samples: Vec<Sample>) -> Self {
        Self::new(samples, CoordinateSpace::World)
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn iter(&self) -> std::slice::Iter<'_, Sample> {
        self.samples.iter()
    }

    pub fn points(&self) -> impl Iterator<Item = &Vec3> + '_ {
        self.samples.iter().map(|s| &s.point)
    }

    /// Axis-aligned bounds `(min, max)`, or `None` when empty.
    pub fn bounds(&self) -> Option<(Vec3, Vec3)> {
        let first = self.samples.first()?.point;
        Some(self.points().fold((first, first), |(lo, hi), p| {
            (lo.inf(p), hi.sup(p))
        }))
    }

    pub fn centroid(&self) -> Option<Vec3> {
        if self.is_empty() {
            return None;
        }
        let sum: Vec3 = self.points().sum();
        Some(sum / self.len() as f64)
    }

    /// Scales every nonzero normal to unit length.
    pub fn normalize_normals(&mut self) {
        for s in &mut self.samples {
            let n = s.normal.norm();
            if n > 0.0 {
                s.normal /= n;
            }
        }
    }
}

impl FromIterator<Sample> for SampleSet {
    fn from_iter<I: IntoIterator<Item = Sample>>(iter: I) -> Self {
        SampleSet::world(iter.into_iter().collect())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PointFormat {
    Ply,
    XyzNormal,
    Obj,
}

impl PointFormat {
    pub fn from_path(path: &Path) -> Option<Self> {
        let ext = path.extension()?.to_str()?.to_ascii_lowercase();
        match ext.as_str() {
            "ply" => Some(PointFormat::Ply),
            "xyz" | "xyzn" | "pts" | "txt" => Some(PointFormat::XyzNormal),
            "obj" => Some(PointFormat::Obj),
            _ => None,
        }
    }

    pub fn parse(name: &str) -> Option<Self> {
        match name.to_ascii_lowercase().as_str() {
            "ply" => Some(PointFormat::Ply),
            "xyz" | "xyzn" | "xyz-normal" => Some(PointFormat::XyzNormal),
            "obj" => Some(PointFormat::Obj),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MeshFormat {
    Ply,
    Obj,
}

impl MeshFormat {
    pub fn from_path(path: &Path) -> Option<Self> {
        let ext = path.extension()?.to_str()?.to_ascii_lowercase();
        match ext.as_str() {
            "ply" => Some(MeshFormat::Ply),
            "obj" => Some(MeshFormat::Obj),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, Default)]
pub struct LoadOptions {
    /// Replaces every normal in the file (and makes normals optional).
    pub constant_normal: Option<Vec3>,
    /// Rescale normals to unit length after loading.
    pub normalize: bool,
}

/// Samples read from a file together with what was dropped on the way.
#[derive(Debug, Clone)]
pub struct LoadedSamples {
    pub samples: SampleSet,
    /// Record indices (0-based, file order) of samples whose normal had zero
    /// length.
    pub zero_normal_records: Vec<usize>,
}

/// Raw point records before normal validation.
pub(crate) struct RawPoints {
    pub points: Vec<Vec3>,
    pub normals: Option<Vec<Vec3>>,
}

pub fn load_samples(path: &Path, format: PointFormat, opts: &LoadOptions) -> Result<LoadedSamples> {
    let raw = match format {
        PointFormat::Ply => ply::read_points(path)?,
        PointFormat::XyzNormal => xyz::read_points(path)?,
        PointFormat::Obj => obj::read_points(path)?,
    };
    let normals = match (opts.constant_normal, raw.normals) {
        (Some(n), _) => {
            if n.norm() == 0.0 || !n.iter().all(|v| v.is_finite()) {
                return Err(Error::InvalidParameter(
                    "constant normal override must be finite and nonzero".into(),
                ));
            }
            vec![n; raw.points.len()]
        }
        (None, Some(n)) => n,
        (None, None) => {
            return Err(Error::MissingNormals {
                path: path.to_path_buf(),
            })
        }
    };

    let mut samples = Vec::with_capacity(raw.points.len());
    let mut zero_normal_records = Vec::new();
    for (record, (p, n)) in raw.points.into_iter().zip(normals).enumerate() {
        if !p.iter().chain(n.iter()).all(|v| v.is_finite()) {
            return Err(Error::parse(path, record, "non-finite coordinate"));
        }
        if n.norm_squared() == 0.0 {
            zero_normal_records.push(record);
            continue;
        }
        samples.push(Sample::new(p, n));
    }
    if !zero_normal_records.is_empty() {
        tracing::warn!(
            path = %path.display(),
            rejected = zero_normal_records.len(),
            first_record = zero_normal_records[0],
            "samples with zero-length normals rejected"
        );
    }
    if samples.is_empty() {
        return Err(Error::EmptyInput {
            path: path.to_path_buf(),
        });
    }
    let mut samples = SampleSet::world(samples);
    if opts.normalize {
        samples.normalize_normals();
    }
    Ok(LoadedSamples {
        samples,
        zero_normal_records,
    })
}

/// Writes a sample set. PLY output is binary little-endian with double
/// precision properties; text formats use shortest round-trip formatting, so
/// every format reloads bit-for-bit.
pub fn save_samples(samples: &SampleSet, path: &Path, format: PointFormat) -> Result<()> {
    match format {
        PointFormat::Ply => ply::write_points(samples, path),
        PointFormat::XyzNormal => xyz::write_points(samples, path),
        PointFormat::Obj => obj::write_points(samples, path),
    }
}

pub fn save_mesh(mesh: &TriangleMesh, path: &Path, format: MeshFormat) -> Result<()> {
    mesh.validate()?;
    match format {
        MeshFormat::Ply => ply::write_mesh(mesh, path),
        MeshFormat::Obj => obj::write_mesh(mesh, path),
    }
}

pub fn load_mesh(path: &Path, format: MeshFormat) -> Result<TriangleMesh> {
    let mesh = match format {
        MeshFormat::Ply => ply::read_mesh(path)?,
        MeshFormat::Obj => obj::read_mesh(path)?,
    };
    mesh.validate()?;
    Ok(mesh)
}

pub(crate) fn read_file(path: &Path) -> Result<Vec<u8>> {
    std::fs::read(path).map_err(|e| Error::io(path, e))
}

use std::path::PathBuf;

use thiserror::Error;

use crate::solver::EnergyModel;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{}: record {record}: {message}", path.display())]
    Parse {
        path: PathBuf,
        record: usize,
        message: String,
    },

    #[error("{}: no usable samples", path.display())]
    EmptyInput { path: PathBuf },

    #[error("{}: normals missing and no constant orientation supplied", path.display())]
    MissingNormals { path: PathBuf },

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("grid of {dims:?} cannot hold a {margin}-cell margin (needs at least 2 interior cells per axis)")]
    DomainTooSmall { dims: [usize; 3], margin: usize },

    #[error("point ({}, {}, {}) lies outside grid {dims:?}", point[0], point[1], point[2])]
    OutsideGrid { point: [f64; 3], dims: [usize; 3] },

    #[error("grid dimensions {left:?} and {right:?} are incompatible")]
    DimMismatch { left: [usize; 3], right: [usize; 3] },

    #[error("grid {dims:?} too small: {reason}")]
    GridTooSmall { dims: [usize; 3], reason: String },

    #[error("energy model {0} has no quadratic form")]
    NonQuadratic(EnergyModel),

    #[error("non-finite value at voxel ({}, {}, {})", voxel[0], voxel[1], voxel[2])]
    NonFinite { voxel: [usize; 3] },

    #[error("sample set is empty")]
    EmptySamples,

    #[error("mesh has no triangles")]
    EmptyMesh,

    #[error("mesh index {index} out of range for {vertex_count} vertices")]
    BadIndex { index: usize, vertex_count: usize },
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn parse(path: impl Into<PathBuf>, record: usize, message: impl Into<String>) -> Self {
        Error::Parse {
            path: path.into(),
            record,
            message: message.into(),
        }
    }

    /// Coarse failure class, used for CLI diagnostics and FFI status codes.
    pub fn class(&self) -> ErrorClass {
        match self {
            Error::Io { .. } => ErrorClass::Io,
            Error::Parse { .. } | Error::EmptyInput { .. } | Error::MissingNormals { .. } => {
                ErrorClass::Input
            }
            Error::Config(_)
            | Error::InvalidParameter(_)
            | Error::DomainTooSmall { .. }
            | Error::GridTooSmall { .. } => {
                ErrorClass::Config
            }
            Error::NonFinite { .. } | Error::NonQuadratic(_) => ErrorClass::Solver,
            _ => ErrorClass::Invalid,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorClass {
    Io,
    Input,
    Config,
    Solver,
    Invalid,
}

impl ErrorClass {
    pub fn as_str(self) -> &'static str {
        match self {
            ErrorClass::Io => "io",
            ErrorClass::Input => "input",
            ErrorClass::Config => "config",
            ErrorClass::Solver => "solver",
            ErrorClass::Invalid => "invalid",
        }
    }
}

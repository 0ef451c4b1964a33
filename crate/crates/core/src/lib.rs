//! Surface reconstruction from coarsely oriented point sets.
//!
//! The reconstruction finds a scalar field on a regular grid whose gradient
//! best aligns with a smoothed field of the input orientations while a
//! higher-order smoothness energy keeps the field regular. The surface is
//! the level set of that field through the input samples, extracted with
//! marching cubes.
//!
//! Pipeline stages live in separate modules:
//!
//! - [`io`]: oriented point sets and meshes on disk, world/grid mapping
//! - [`volume`]: scalar and vector grids, trilinear sampling, pyramids
//! - [`field`]: normal splatting, box smoothing, divergence
//! - [`solver`]: smoothness operators and the multi-scale Gauss-Seidel solver
//! - [`mesh`]: isovalue selection and marching cubes
//! - [`metrics`]: fit and curvature statistics
//! - [`synthetic`]: deterministic test shapes and corruptions
//! - [`pipeline`]: the end-to-end reconstruction

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod config;
pub mod error;
pub mod field;
pub mod io;
pub mod mesh;
pub mod metrics;
pub mod pipeline;
pub mod solver;
pub mod synthetic;
pub mod volume;

pub use error::{Error, Result};
pub use io::{CoordinateSpace, DomainTransform, Sample, SampleSet};
pub use mesh::TriangleMesh;
pub use solver::{EnergyModel, SolverParams};
pub use volume::{Dims, ScalarGrid, VectorGrid};

/// 3-vector used for points, normals and field values.
pub type Vec3 = nalgebra::Vector3<f64>;

//! End-to-end reconstruction.

use std::time::{Duration, Instant};

use crate::field::{build_divergence, DEFAULT_SMOOTHING_PASSES};
use crate::io::{fit_domain, to_grid, CoordinateSpace, DomainTransform, SampleSet, DEFAULT_MARGIN_CELLS};
use crate::mesh::{marching_cubes_grid, select_isovalue, vertex_normals};
use crate::solver::{multiscale_solve_with, MultiscaleOutcome, SweepObserver};
use crate::volume::sample_trilinear;
use crate::{Dims, EnergyModel, Error, Result, ScalarGrid, SolverParams, TriangleMesh, Vec3};

#[derive(Debug, Clone, PartialEq)]
pub struct ReconstructionParams {
    pub dims: Dims,
    pub model: EnergyModel,
    pub solver: SolverParams,
    pub smoothing_passes: usize,
    pub margin_cells: usize,
    /// Attach per-vertex normals from the field gradient.
    pub vertex_normals: bool,
    /// Keep surface pieces that lie entirely outside the bounding box of
    /// the samples. These come from the zero exterior at the grid faces.
    pub keep_exterior_components: bool,
}

impl Default for ReconstructionParams {
    fn default() -> Self {
        ReconstructionParams {
            dims: Dims::cube(64),
            model: EnergyModel::SecondOrderMixed,
            solver: SolverParams::default(),
            smoothing_passes: DEFAULT_SMOOTHING_PASSES,
            margin_cells: DEFAULT_MARGIN_CELLS,
            vertex_normals: false,
            keep_exterior_components: false,
        }
    }
}

/// Wall time per stage.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Timings {
    pub divergence: Duration,
    pub solve: Duration,
    pub extraction: Duration,
}

#[derive(Debug, Clone)]
pub struct Reconstruction {
    /// World-space surface.
    pub mesh: TriangleMesh,
    pub transform: DomainTransform,
    /// Solved field, larger inside.
    pub field: ScalarGrid,
    pub isovalue: f64,
    /// Pieces removed for lying outside the sample bounding box.
    pub dropped_components: usize,
    pub solve: MultiscaleOutcome,
    /// The solution was negated to make the inside larger.
    pub negated: bool,
    pub timings: Timings,
}

/// Offset, in cells, at which the field is probed on either side of each
/// sample to decide which side is inside.
const ORIENTATION_PROBE: f64 = 1.5;

/// Sum over samples of `f(p + d n) - f(p - d n)`. Negative when the field
/// is larger on the inner side.
fn outward_slope(f: &ScalarGrid, samples: &SampleSet) -> f64 {
    let dims = f.dims();
    let mut sum = 0.0;
    for s in samples.iter() {
        let len = s.normal.norm();
        if len == 0.0 {
            continue;
        }
        let d = s.normal * (ORIENTATION_PROBE / len);
        let (out, inn) = (s.point + d, s.point - d);
        if dims.contains_point(&out) && dims.contains_point(&inn) {
            sum += sample_trilinear(f, &out).unwrap_or(0.0) - sample_trilinear(f, &inn).unwrap_or(0.0);
        }
    }
    sum
}

pub fn reconstruct(samples: &SampleSet, params: &ReconstructionParams) -> Result<Reconstruction> {
    reconstruct_with(samples, params, &mut ())
}

/// Fits the grid, builds the divergence, solves coarse to fine, picks the
/// isovalue and extracts the surface.
pub fn reconstruct_with(
    samples: &SampleSet,
    params: &ReconstructionParams,
    observer: &mut dyn SweepObserver,
) -> Result<Reconstruction> {
    params.solver.validate()?;
    if samples.is_empty() {
        return Err(Error::EmptySamples);
    }
    let transform = match samples.space {
        CoordinateSpace::World => fit_domain(samples, params.dims, params.margin_cells)?,
        CoordinateSpace::Grid => DomainTransform::identity(params.dims),
    };
    let grid_samples = to_grid(samples, &transform);

    let t0 = Instant::now();
    let b = build_divergence(&grid_samples, params.dims, params.smoothing_passes)?;
    let t1 = Instant::now();
    let mut solve = multiscale_solve_with(&b, params.model, &params.solver, Some(&grid_samples), observer)?;
    // The problem is odd in b, so negating the solution is the same as
    // solving with flipped orientations.
    let negated = outward_slope(&solve.x, &grid_samples) > 0.0;
    if negated {
        solve.x = solve.x.map(|v| -v);
    }
    let t2 = Instant::now();

    let isovalue = select_isovalue(&solve.x, &grid_samples)?;
    let mut mesh = marching_cubes_grid(&solve.x, isovalue);
    let mut dropped_components = 0;
    if !params.keep_exterior_components {
        let (lo, hi) = grid_samples.bounds().expect("nonempty");
        let inside = |v: &Vec3| (0..3).all(|a| v[a] >= lo[a] - 1.0 && v[a] <= hi[a] + 1.0);
        let before = mesh.components();
        mesh = mesh.retain_components(|vs| vs.iter().any(|&v| inside(&mesh.vertices[v])));
        dropped_components = before - mesh.components();
        if dropped_components > 0 {
            tracing::info!(dropped_components, "removed surface pieces outside the samples' bounding box");
        }
    }
    if params.vertex_normals {
        mesh.normals = Some(vertex_normals(&solve.x, &mesh.vertices)?);
    }
    mesh.map_vertices(|v| transform.point_to_world(v));
    let t3 = Instant::now();

    Ok(Reconstruction {
        mesh,
        transform,
        field: solve.x.clone(),
        isovalue,
        dropped_components,
        solve,
        negated,
        timings: Timings {
            divergence: t1 - t0,
            solve: t2 - t1,
            extraction: t3 - t2,
        },
    })
}

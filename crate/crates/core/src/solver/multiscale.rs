use super::gauss_seidel::solve_quadratic;
use super::operator::SmoothnessOperator;
use super::tv::{tv_energy, tv_solve_with};
use super::{EnergyModel, NarrowBand, SolverParams, SweepObserver};
use crate::io::SampleSet;
use crate::volume::{downsample_sum, upsample_trilinear};
use crate::{Dims, Error, Result, ScalarGrid};

/// Summary of one pyramid level.
#[derive(Debug, Clone, PartialEq)]
pub struct LevelReport {
    /// 0 is the finest level.
    pub level: usize,
    pub dims: Dims,
    /// Lambda after per-level scaling.
    pub lambda: f64,
    pub sweeps: usize,
    pub final_delta: f64,
    /// Reweighting rounds, total variation only.
    pub outer_iterations: Option<usize>,
    /// Energy at this level with its scaled lambda.
    pub energy: f64,
    /// Voxels allowed to change; all of them without a narrow band.
    pub active_voxels: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MultiscaleOutcome {
    pub x: ScalarGrid,
    /// Coarsest first.
    pub levels: Vec<LevelReport>,
}

impl MultiscaleOutcome {
    pub fn finest(&self) -> &LevelReport {
        self.levels.last().expect("at least one level")
    }
}

/// Coarse-to-fine solve from a zero initialization on the coarsest grid.
pub fn multiscale_solve(b_fine: &ScalarGrid, model: EnergyModel, params: &SolverParams) -> Result<ScalarGrid> {
    Ok(multiscale_solve_with(b_fine, model, params, None, &mut ())?.x)
}

/// [`multiscale_solve`] with progress reporting. `samples` (grid
/// coordinates of the finest level) are needed only for the narrow band.
pub fn multiscale_solve_with(
    b_fine: &ScalarGrid,
    model: EnergyModel,
    params: &SolverParams,
    samples: Option<&SampleSet>,
    observer: &mut dyn SweepObserver,
) -> Result<MultiscaleOutcome> {
    params.validate()?;
    let levels = params.levels;
    let dims = b_fine.dims();
    let min = (1usize << (levels - 1)) * 4;
    if dims.0.iter().any(|&n| n < min) {
        return Err(Error::GridTooSmall {
            dims: dims.0,
            reason: format!("{levels} levels need at least {min} vertices per axis"),
        });
    }
    if params.narrow_band_radius.is_some() && samples.is_none() && levels > 1 {
        return Err(Error::InvalidParameter("a narrow band needs the sample positions".into()));
    }

    let mut pyramid = vec![b_fine.clone()];
    for _ in 1..levels {
        let next = downsample_sum(pyramid.last().expect("nonempty"))?;
        pyramid.push(next);
    }

    let mut reports = Vec::with_capacity(levels);
    let mut x: Option<ScalarGrid> = None;
    for level in (0..levels).rev() {
        let b = &pyramid[level];
        let dims = b.dims();
        let lambda = params.lambda * model.lambda_scale_per_halving().powi(level as i32);
        let x0 = match &x {
            None => ScalarGrid::zeros(dims),
            Some(coarse) => upsample_trilinear(coarse, dims)?,
        };
        let band = match (params.narrow_band_radius, samples) {
            (Some(r), Some(s)) if level + 1 < levels => {
                // Vertex 0 of level l covers fine vertices 0 .. 2^l - 1.
                let h = (1usize << level) as f64;
                let shift = crate::Vec3::repeat((h - 1.0) / 2.0);
                Some(NarrowBand::around_points(s.points().map(|p| (p - shift) / h), dims, r))
            }
            _ => None,
        };
        let active = band.as_ref().map_or(dims.len(), NarrowBand::count);
        let report = if model.is_quadratic() {
            let op = SmoothnessOperator::new(model, dims)?;
            let out = solve_quadratic(&op, b, lambda, params, &x0, band.as_ref(), observer, level, None)?;
            let energy = lambda * op.quadratic_energy(&out.x)? + out.x.dot(b)?;
            let r = LevelReport {
                level,
                dims,
                lambda,
                sweeps: out.sweeps,
                final_delta: out.final_delta,
                outer_iterations: None,
                energy,
                active_voxels: active,
            };
            x = Some(out.x);
            r
        } else {
            let out = tv_solve_with(b, params, lambda, &x0, band.as_ref(), observer, level)?;
            let energy = lambda * tv_energy(&out.x, 0.0) + out.x.dot(b)?;
            let r = LevelReport {
                level,
                dims,
                lambda,
                sweeps: out.sweeps,
                final_delta: out.final_delta,
                outer_iterations: Some(out.outer_iterations),
                energy,
                active_voxels: active,
            };
            x = Some(out.x);
            r
        };
        tracing::debug!(
            level,
            sweeps = report.sweeps,
            delta = report.final_delta,
            energy = report.energy,
            "level solved"
        );
        reports.push(report);
    }
    Ok(MultiscaleOutcome {
        x: x.expect("at least one level"),
        levels: reports,
    })
}

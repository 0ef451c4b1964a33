use super::operator::SmoothnessOperator;
use super::{EnergyModel, NarrowBand, SolverParams, SweepObserver, SweepRecord};
use crate::volume::check_same_dims;
use crate::{Error, Result, ScalarGrid};

/// Result of a Gauss-Seidel solve.
#[derive(Debug, Clone, PartialEq)]
pub struct GsOutcome {
    pub x: ScalarGrid,
    pub sweeps: usize,
    /// Max-norm change of the last sweep.
    pub final_delta: f64,
}

/// Lexicographic Gauss-Seidel on `A x = -b / (2 lambda)` from `x0`.
pub fn gauss_seidel_solve(
    b: &ScalarGrid,
    model: EnergyModel,
    params: &SolverParams,
    x0: &ScalarGrid,
) -> Result<GsOutcome> {
    gauss_seidel_solve_with(b, model, params, x0, None, &mut ())
}

/// [`gauss_seidel_solve`] with an optional frozen region and a progress
/// observer.
pub fn gauss_seidel_solve_with(
    b: &ScalarGrid,
    model: EnergyModel,
    params: &SolverParams,
    x0: &ScalarGrid,
    band: Option<&NarrowBand>,
    observer: &mut dyn SweepObserver,
) -> Result<GsOutcome> {
    params.validate()?;
    let op = SmoothnessOperator::new(model, b.dims())?;
    solve_quadratic(&op, b, params.lambda, params, x0, band, observer, 0, None)
}

/// Shared sweep loop for the quadratic models and the reweighted membrane
/// problems of total variation.
#[allow(clippy::too_many_arguments)]
pub(crate) fn solve_quadratic(
    op: &SmoothnessOperator,
    b: &ScalarGrid,
    lambda: f64,
    params: &SolverParams,
    x0: &ScalarGrid,
    band: Option<&NarrowBand>,
    observer: &mut dyn SweepObserver,
    level: usize,
    outer: Option<usize>,
) -> Result<GsOutcome> {
    let dims = b.dims();
    check_same_dims(op.dims(), dims)?;
    check_same_dims(dims, x0.dims())?;
    if let Some(band) = band {
        check_same_dims(dims, band.dims())?;
    }
    if let Some(voxel) = b.first_non_finite().or_else(|| x0.first_non_finite()) {
        return Err(Error::NonFinite { voxel });
    }

    let scale = -1.0 / (2.0 * lambda);
    let rhs: Vec<f64> = b.values().iter().map(|v| v * scale).collect();
    let mask = band.map(NarrowBand::mask);
    let mut x = x0.clone();
    let mut sweeps = 0;
    let mut delta = 0.0;
    while sweeps < params.max_sweeps {
        delta = sweep(op, x.values_mut(), &rhs, params.clamp, mask)?;
        sweeps += 1;
        let energy = if observer.wants_energy() {
            Some(lambda * op.quadratic_energy(&x)? + x.dot(b)?)
        } else {
            None
        };
        observer.on_sweep(&SweepRecord {
            level,
            outer,
            sweep: sweeps,
            delta,
            energy,
        });
        if delta <= params.tol {
            break;
        }
    }
    if delta > params.tol {
        tracing::warn!(level, sweeps, delta, tol = params.tol, "sweep limit reached before tolerance");
    }
    Ok(GsOutcome {
        x,
        sweeps,
        final_delta: delta,
    })
}

/// One in-place sweep; returns the largest absolute change.
fn sweep(
    op: &SmoothnessOperator,
    x: &mut [f64],
    rhs: &[f64],
    clamp: bool,
    mask: Option<&[bool]>,
) -> Result<f64> {
    let dims = op.dims();
    let mut delta = 0.0f64;
    let mut idx = 0;
    for k in 0..dims.nz() {
        for j in 0..dims.ny() {
            for i in 0..dims.nx() {
                if mask.is_none_or(|m| m[idx]) {
                    let (ax, diag) = op.row(x, idx, [i, j, k]);
                    let old = x[idx];
                    let mut new = old + (rhs[idx] - ax) / diag;
                    if !new.is_finite() {
                        return Err(Error::NonFinite { voxel: [i, j, k] });
                    }
                    if clamp {
                        new = new.clamp(-1.0, 1.0);
                    }
                    x[idx] = new;
                    delta = delta.max((new - old).abs());
                }
                idx += 1;
            }
        }
    }
    Ok(delta)
}

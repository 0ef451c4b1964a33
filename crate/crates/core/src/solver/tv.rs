//! Total variation by iterative reweighting.
//!
//! The gradient magnitude is smoothed to `sqrt(|g|^2 + eps^2)`. Each round
//! bounds it from above at the current iterate by the quadratic
//! `|g|^2 / (2 a) + a / 2` with `a = sqrt(|g0|^2 + eps^2)` and solves the
//! resulting weighted membrane problem with Gauss-Seidel. Since the bound
//! touches the energy at the current iterate and Gauss-Seidel never
//! increases the bound, the smoothed energy cannot increase between rounds.

use super::gauss_seidel::solve_quadratic;
use super::operator::{gradient_norms_squared, SmoothnessOperator};
use super::{NarrowBand, SolverParams, SweepObserver};
use crate::volume::check_same_dims;
use crate::{Result, ScalarGrid};

/// `sum_v sqrt(|grad x|_v^2 + eps^2)` with forward differences and zero
/// padding. `eps = 0` gives the plain total variation.
pub fn tv_energy(x: &ScalarGrid, eps: f64) -> f64 {
    let e2 = eps * eps;
    gradient_norms_squared(x).iter().map(|g| (g + e2).sqrt()).sum()
}

#[derive(Debug, Clone, PartialEq)]
pub struct TvOutcome {
    pub x: ScalarGrid,
    /// Reweighting rounds performed.
    pub outer_iterations: usize,
    /// Gauss-Seidel sweeps over all rounds.
    pub sweeps: usize,
    /// Smoothed energy `lambda * tv_eps(x) + x^T b`, before the first round
    /// and after each round.
    pub energies: Vec<f64>,
    pub final_delta: f64,
}

pub fn tv_solve(b: &ScalarGrid, params: &SolverParams, x0: &ScalarGrid) -> Result<TvOutcome> {
    tv_solve_with(b, params, params.lambda, x0, None, &mut (), 0)
}

pub fn tv_solve_with(
    b: &ScalarGrid,
    params: &SolverParams,
    lambda: f64,
    x0: &ScalarGrid,
    band: Option<&NarrowBand>,
    observer: &mut dyn SweepObserver,
    level: usize,
) -> Result<TvOutcome> {
    params.validate()?;
    check_same_dims(b.dims(), x0.dims())?;
    let eps = params.tv_epsilon;
    let energy = |x: &ScalarGrid| -> Result<f64> { Ok(lambda * tv_energy(x, eps) + x.dot(b)?) };

    let mut x = x0.clone();
    let mut energies = vec![energy(&x)?];
    let mut sweeps = 0;
    let mut outer = 0;
    let mut delta = 0.0;
    while outer < params.tv_max_outer {
        let weights = gradient_norms_squared(&x)
            .into_iter()
            .map(|g| 0.5 / (g + eps * eps).sqrt())
            .collect();
        let op = SmoothnessOperator::weighted_membrane(b.dims(), weights)?;
        let inner = solve_quadratic(&op, b, lambda, params, &x, band, observer, level, Some(outer))?;
        sweeps += inner.sweeps;
        outer += 1;
        delta = inner.x.max_abs_diff(&x)?;
        x = inner.x;
        let e = energy(&x)?;
        let prev = *energies.last().expect("seeded with the initial energy");
        debug_assert!(
            e <= prev + 1e-9 * prev.abs().max(1.0),
            "reweighting increased the energy: {prev} -> {e}"
        );
        energies.push(e);
        observer.on_outer(level, outer, e, delta);
        tracing::debug!(level, outer, energy = e, delta, "tv round");
        if delta <= params.tol {
            break;
        }
    }
    Ok(TvOutcome {
        x,
        outer_iterations: outer,
        sweeps,
        energies,
        final_delta: delta,
    })
}

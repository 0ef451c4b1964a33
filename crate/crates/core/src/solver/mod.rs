//! Energy minimization on the grid.
//!
//! The discrete energy is `E(x) = lambda * E_s(x) + x^T b`, where `b` is the
//! divergence of the smoothed orientation field and `E_s` is one of four
//! smoothness terms. For the quadratic terms `E_s = x^T A x` and the minimizer
//! solves `A x = -b / (2 lambda)`.

mod gauss_seidel;
mod multiscale;
mod operator;
mod tv;

use std::fmt;
use std::str::FromStr;

pub use gauss_seidel::{gauss_seidel_solve, gauss_seidel_solve_with, GsOutcome};
pub use multiscale::{multiscale_solve, multiscale_solve_with, LevelReport, MultiscaleOutcome};
pub use operator::SmoothnessOperator;
pub use tv::{tv_energy, tv_solve, tv_solve_with, TvOutcome};

use crate::io::{CoordinateSpace, SampleSet};
use crate::volume::check_same_dims;
use crate::{Dims, Error, Result, ScalarGrid};

/// Smoothness term of the energy.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum EnergyModel {
    /// Squared gradient magnitude.
    Membrane,
    /// Gradient magnitude. Not quadratic; minimized by reweighting.
    TotalVariation,
    /// Squared pure second derivatives.
    SecondOrder,
    /// Squared pure and mixed second derivatives (Hessian Frobenius norm).
    SecondOrderMixed,
}

impl EnergyModel {
    pub const ALL: [EnergyModel; 4] = [
        EnergyModel::Membrane,
        EnergyModel::TotalVariation,
        EnergyModel::SecondOrder,
        EnergyModel::SecondOrderMixed,
    ];

    /// Numbering used on the command line: 1 to 4.
    pub fn index(self) -> u8 {
        match self {
            EnergyModel::Membrane => 1,
            EnergyModel::TotalVariation => 2,
            EnergyModel::SecondOrder => 3,
            EnergyModel::SecondOrderMixed => 4,
        }
    }

    pub fn from_index(i: u8) -> Option<Self> {
        Self::ALL.into_iter().find(|m| m.index() == i)
    }

    pub fn name(self) -> &'static str {
        match self {
            EnergyModel::Membrane => "membrane",
            EnergyModel::TotalVariation => "total-variation",
            EnergyModel::SecondOrder => "second-order",
            EnergyModel::SecondOrderMixed => "second-order-mixed",
        }
    }

    pub fn is_quadratic(self) -> bool {
        self != EnergyModel::TotalVariation
    }

    /// Factor applied to lambda per halving of the grid. With cell size `H`
    /// and unit-step stencils, a squared derivative of order `k` integrates
    /// to `H^(3 - 2k)` times the stencil sum, while the data term is already
    /// consistent because the divergence is downsampled by summation.
    pub(crate) fn lambda_scale_per_halving(self) -> f64 {
        match self {
            EnergyModel::Membrane => 2.0,
            EnergyModel::TotalVariation => 4.0,
            EnergyModel::SecondOrder | EnergyModel::SecondOrderMixed => 0.5,
        }
    }
}

impl fmt::Display for EnergyModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}) {}", self.index(), self.name())
    }
}

impl FromStr for EnergyModel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let t = s.trim();
        if let Ok(i) = t.parse::<u8>() {
            return Self::from_index(i)
                .ok_or_else(|| Error::Config(format!("energy model must be 1-4, got {i}")));
        }
        Self::ALL
            .into_iter()
            .find(|m| m.name().eq_ignore_ascii_case(t))
            .ok_or_else(|| Error::Config(format!("unknown energy model '{t}'")))
    }
}

/// Solver settings shared by every model.
#[derive(Debug, Clone, PartialEq)]
pub struct SolverParams {
    pub lambda: f64,
    /// Stop when the max-norm of a sweep's change falls to this value.
    pub tol: f64,
    /// Sweep cap per level (per reweighting round for total variation).
    pub max_sweeps: usize,
    /// Project every update onto `[-1, 1]`.
    pub clamp: bool,
    pub levels: usize,
    /// Only update voxels within this many cells of a sample.
    pub narrow_band_radius: Option<f64>,
    /// Gradient regularization for total variation.
    pub tv_epsilon: f64,
    /// Reweighting rounds for total variation.
    pub tv_max_outer: usize,
}

impl Default for SolverParams {
    fn default() -> Self {
        SolverParams {
            lambda: 0.2,
            tol: 1e-6,
            max_sweeps: 2000,
            clamp: true,
            levels: 3,
            narrow_band_radius: None,
            tv_epsilon: 1e-4,
            tv_max_outer: 30,
        }
    }
}

impl SolverParams {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::InvalidParameter(m.into()));
        if !(self.lambda > 0.0 && self.lambda.is_finite()) {
            return bad("lambda must be positive");
        }
        if !(self.tol > 0.0) {
            return bad("tol must be positive");
        }
        if self.max_sweeps == 0 {
            return bad("max_sweeps must be at least 1");
        }
        if self.levels == 0 {
            return bad("levels must be at least 1");
        }
        if let Some(r) = self.narrow_band_radius {
            if !(r >= 0.0) {
                return bad("narrow band radius must be nonnegative");
            }
        }
        if !(self.tv_epsilon > 0.0) {
            return bad("tv_epsilon must be positive");
        }
        if self.tv_max_outer == 0 {
            return bad("tv_max_outer must be at least 1");
        }
        Ok(())
    }
}

/// Per-sweep progress record.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepRecord {
    /// Pyramid level, 0 being the finest.
    pub level: usize,
    /// Reweighting round for total variation.
    pub outer: Option<usize>,
    /// 1-based sweep number within the current solve.
    pub sweep: usize,
    pub delta: f64,
    /// Energy after the sweep, when the observer asked for it.
    pub energy: Option<f64>,
}

/// Receives solver progress.
pub trait SweepObserver {
    /// Computing the energy costs about one sweep; only done on request.
    fn wants_energy(&self) -> bool {
        false
    }
    fn on_sweep(&mut self, record: &SweepRecord);
    fn on_outer(&mut self, _level: usize, _outer: usize, _energy: f64, _delta: f64) {}
}

impl SweepObserver for () {
    fn on_sweep(&mut self, _record: &SweepRecord) {}
}

/// Keeps every record; used by tests and the CLI's verbose log.
#[derive(Debug, Default, Clone)]
pub struct RecordingObserver {
    pub with_energy: bool,
    pub sweeps: Vec<SweepRecord>,
    pub outers: Vec<(usize, usize, f64, f64)>,
}

impl SweepObserver for RecordingObserver {
    fn wants_energy(&self) -> bool {
        self.with_energy
    }
    fn on_sweep(&mut self, record: &SweepRecord) {
        self.sweeps.push(*record);
    }
    fn on_outer(&mut self, level: usize, outer: usize, energy: f64, delta: f64) {
        self.outers.push((level, outer, energy, delta));
    }
}

/// Applies the model's operator. Fails for total variation.
pub fn apply_smoothness_operator(x: &ScalarGrid, model: EnergyModel) -> Result<ScalarGrid> {
    SmoothnessOperator::new(model, x.dims())?.apply(x)
}

/// The smoothness term alone: `x^T A x`, or the total variation.
pub fn smoothness_energy(x: &ScalarGrid, model: EnergyModel) -> Result<f64> {
    match model {
        EnergyModel::TotalVariation => Ok(tv_energy(x, 0.0)),
        _ => SmoothnessOperator::new(model, x.dims())?.quadratic_energy(x),
    }
}

/// `lambda * E_s(x) + x^T b`.
pub fn energy_value(x: &ScalarGrid, b: &ScalarGrid, params: &SolverParams, model: EnergyModel) -> Result<f64> {
    check_same_dims(x.dims(), b.dims())?;
    Ok(params.lambda * smoothness_energy(x, model)? + x.dot(b)?)
}

/// Voxels within `radius` cells of any sample.
#[derive(Debug, Clone, PartialEq)]
pub struct NarrowBand {
    dims: Dims,
    mask: Vec<bool>,
}

impl NarrowBand {
    /// `samples` must be in grid coordinates of `dims`.
    pub fn around(samples: &SampleSet, dims: Dims, radius: f64) -> Self {
        debug_assert_eq!(samples.space, CoordinateSpace::Grid);
        Self::around_points(samples.points().copied(), dims, radius)
    }

    pub(crate) fn around_points(points: impl Iterator<Item = crate::Vec3>, dims: Dims, radius: f64) -> Self {
        let mut mask = vec![false; dims.len()];
        let r2 = radius * radius;
        for p in points {
            let lo = |a: usize| ((p[a] - radius).ceil().max(0.0)) as usize;
            let hi = |a: usize| ((p[a] + radius).floor().min(dims.0[a] as f64 - 1.0)).max(-1.0) as isize;
            for k in lo(2) as isize..=hi(2) {
                for j in lo(1) as isize..=hi(1) {
                    for i in lo(0) as isize..=hi(0) {
                        let d = crate::Vec3::new(i as f64, j as f64, k as f64) - p;
                        if d.norm_squared() <= r2 {
                            mask[dims.index(i as usize, j as usize, k as usize)] = true;
                        }
                    }
                }
            }
        }
        NarrowBand { dims, mask }
    }

    pub fn dims(&self) -> Dims {
        self.dims
    }

    pub fn contains(&self, idx: usize) -> bool {
        self.mask[idx]
    }

    pub fn count(&self) -> usize {
        self.mask.iter().filter(|&&m| m).count()
    }

    pub(crate) fn mask(&self) -> &[bool] {
        &self.mask
    }
}

//! Run configuration for the command-line driver.
//!
//! A configuration starts from [`ReconConfig::default`], is updated from a
//! plain `key = value` file and then from command-line flags. Both sources
//! go through [`ReconConfig::set`], so they accept the same keys and
//! spellings. [`ReconConfig::echo`] writes every key back in the file
//! format; feeding the echo to [`ReconConfig::apply_text`] reproduces the
//! configuration exactly.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use crate::io::{LoadOptions, DEFAULT_MARGIN_CELLS};
use crate::pipeline::ReconstructionParams;
use crate::{Dims, EnergyModel, Error, Result, SolverParams, Vec3};

/// Every key understood by [`ReconConfig::set`], in echo order.
pub const KEYS: [&str; 19] = [
    "input",
    "output",
    "grid",
    "energy",
    "lambda",
    "levels",
    "tol",
    "max_sweeps",
    "clamp",
    "narrow_band",
    "tv_epsilon",
    "tv_max_outer",
    "passes",
    "margin",
    "normalize_normals",
    "const_normal",
    "keep_exterior",
    "verbose",
    "seed",
];

#[derive(Debug, Clone, PartialEq)]
pub struct ReconConfig {
    /// Point file to reconstruct. No default.
    pub input: Option<PathBuf>,
    /// Mesh file to write. No default.
    pub output: Option<PathBuf>,
    /// Finest grid, vertices per axis. Default 64³.
    pub grid: Dims,
    /// Default: second order with mixed derivatives.
    pub energy: EnergyModel,
    /// Default 0.2.
    pub lambda: f64,
    /// Pyramid levels. Default 3.
    pub levels: usize,
    /// Largest per-sweep change at which a level stops. Default 1e-6.
    pub tol: f64,
    /// Default 2000.
    pub max_sweeps: usize,
    /// Keep the field in [-1, 1]. Default on.
    pub clamp: bool,
    /// Restrict fine levels to voxels within this many cells of a sample.
    /// Default off.
    pub narrow_band: Option<f64>,
    /// Gradient smoothing for total variation. Default 1e-4.
    pub tv_epsilon: f64,
    /// Reweighting rounds for total variation. Default 30.
    pub tv_max_outer: usize,
    /// Box filter passes over the splatted normals. Default 3.
    pub passes: usize,
    /// Empty cells between the samples and the grid faces. Default 6.
    pub margin: usize,
    /// Rescale input normals to unit length. Default off.
    pub normalize_normals: bool,
    /// Replace every input normal with this vector. Default off.
    pub const_normal: Option<Vec3>,
    /// Keep surface pieces outside the samples' bounding box. Default off.
    pub keep_exterior: bool,
    /// Per-sweep logging. Default off.
    pub verbose: bool,
    /// Seed for the synthetic generators. Default 0.
    pub seed: u64,
}

impl Default for ReconConfig {
    fn default() -> Self {
        let solver = SolverParams::default();
        let recon = ReconstructionParams::default();
        ReconConfig {
            input: None,
            output: None,
            grid: recon.dims,
            energy: recon.model,
            lambda: solver.lambda,
            levels: solver.levels,
            tol: solver.tol,
            max_sweeps: solver.max_sweeps,
            clamp: solver.clamp,
            narrow_band: solver.narrow_band_radius,
            tv_epsilon: solver.tv_epsilon,
            tv_max_outer: solver.tv_max_outer,
            passes: recon.smoothing_passes,
            margin: DEFAULT_MARGIN_CELLS,
            normalize_normals: false,
            const_normal: None,
            keep_exterior: recon.keep_exterior_components,
            verbose: false,
            seed: 0,
        }
    }
}

fn bad(key: &str, value: &str, expected: &str) -> Error {
    Error::Config(format!("{key} = {value:?}: expected {expected}"))
}

fn number<T: FromStr>(key: &str, value: &str, expected: &str) -> Result<T> {
    value.parse().map_err(|_| bad(key, value, expected))
}

fn boolean(key: &str, value: &str) -> Result<bool> {
    match value.to_ascii_lowercase().as_str() {
        "true" | "yes" | "on" | "1" => Ok(true),
        "false" | "no" | "off" | "0" => Ok(false),
        _ => Err(bad(key, value, "true or false")),
    }
}

fn is_none(value: &str) -> bool {
    matches!(value.to_ascii_lowercase().as_str(), "none" | "off" | "")
}

/// Parses `x,y,z` (spaces allowed).
pub fn parse_vec3(value: &str) -> Option<Vec3> {
    let parts: Vec<f64> = value
        .split(',')
        .map(|s| s.trim().parse().ok())
        .collect::<Option<_>>()?;
    match parts[..] {
        [x, y, z] if parts.iter().all(|v| v.is_finite()) => Some(Vec3::new(x, y, z)),
        _ => None,
    }
}

/// Parses `64`, `64,48,32` or `64x48x32`.
pub fn parse_grid(value: &str) -> Option<Dims> {
    let parts: Vec<usize> = value
        .split([',', 'x', 'X'])
        .map(|s| s.trim().parse().ok())
        .collect::<Option<_>>()?;
    match parts[..] {
        [n] => Some(Dims::cube(n)),
        [x, y, z] => Some(Dims::new(x, y, z)),
        _ => None,
    }
}

fn format_vec3(v: &Vec3) -> String {
    format!("{},{},{}", v.x, v.y, v.z)
}

impl ReconConfig {
    /// Sets one key from its text form.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let value = value.trim();
        match key {
            "input" => self.input = (!is_none(value)).then(|| PathBuf::from(value)),
            "output" => self.output = (!is_none(value)).then(|| PathBuf::from(value)),
            "grid" => self.grid = parse_grid(value).ok_or_else(|| bad(key, value, "N or NX,NY,NZ"))?,
            "energy" => {
                self.energy = value
                    .parse()
                    .map_err(|_| bad(key, value, "1-4 or a model name"))?
            }
            "lambda" => self.lambda = number(key, value, "a positive number")?,
            "levels" => self.levels = number(key, value, "a positive integer")?,
            "tol" => self.tol = number(key, value, "a positive number")?,
            "max_sweeps" => self.max_sweeps = number(key, value, "a positive integer")?,
            "clamp" => self.clamp = boolean(key, value)?,
            "narrow_band" => {
                self.narrow_band = if is_none(value) {
                    None
                } else {
                    Some(number(key, value, "a radius in cells or none")?)
                }
            }
            "tv_epsilon" => self.tv_epsilon = number(key, value, "a positive number")?,
            "tv_max_outer" => self.tv_max_outer = number(key, value, "a positive integer")?,
            "passes" => self.passes = number(key, value, "a nonnegative integer")?,
            "margin" => self.margin = number(key, value, "a nonnegative integer")?,
            "normalize_normals" => self.normalize_normals = boolean(key, value)?,
            "const_normal" => {
                self.const_normal = if is_none(value) {
                    None
                } else {
                    Some(parse_vec3(value).ok_or_else(|| bad(key, value, "x,y,z or none"))?)
                }
            }
            "keep_exterior" => self.keep_exterior = boolean(key, value)?,
            "verbose" => self.verbose = boolean(key, value)?,
            "seed" => self.seed = number(key, value, "an unsigned integer")?,
            _ => return Err(Error::Config(format!("unknown key {key:?}"))),
        }
        Ok(())
    }

    /// Applies `key = value` lines. Blank lines and `#` comments are
    /// skipped; later lines win.
    pub fn apply_text(&mut self, text: &str) -> Result<()> {
        for (n, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| Error::Config(format!("line {}: expected key = value", n + 1)))?;
            self.set(key.trim(), value)
                .map_err(|e| Error::Config(format!("line {}: {}", n + 1, strip_prefix(&e))))?;
        }
        Ok(())
    }

    pub fn apply_file(&mut self, path: &Path) -> Result<()> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        self.apply_text(&text)
            .map_err(|e| Error::Config(format!("{}: {}", path.display(), strip_prefix(&e))))
    }

    /// Every key with its effective value, one `key = value` line each.
    pub fn echo(&self) -> String {
        let path = |p: &Option<PathBuf>| p.as_ref().map_or("none".to_string(), |p| p.display().to_string());
        let mut out = String::new();
        for key in KEYS {
            let value = match key {
                "input" => path(&self.input),
                "output" => path(&self.output),
                "grid" => format!("{},{},{}", self.grid.nx(), self.grid.ny(), self.grid.nz()),
                "energy" => self.energy.index().to_string(),
                "lambda" => self.lambda.to_string(),
                "levels" => self.levels.to_string(),
                "tol" => self.tol.to_string(),
                "max_sweeps" => self.max_sweeps.to_string(),
                "clamp" => self.clamp.to_string(),
                "narrow_band" => self.narrow_band.map_or("none".into(), |r| r.to_string()),
                "tv_epsilon" => self.tv_epsilon.to_string(),
                "tv_max_outer" => self.tv_max_outer.to_string(),
                "passes" => self.passes.to_string(),
                "margin" => self.margin.to_string(),
                "normalize_normals" => self.normalize_normals.to_string(),
                "const_normal" => self.const_normal.as_ref().map_or("none".into(), format_vec3),
                "keep_exterior" => self.keep_exterior.to_string(),
                "verbose" => self.verbose.to_string(),
                "seed" => self.seed.to_string(),
                _ => unreachable!("every key is echoed"),
            };
            let _ = writeln!(out, "{key} = {value}");
        }
        out
    }

    pub fn solver_params(&self) -> SolverParams {
        SolverParams {
            lambda: self.lambda,
            tol: self.tol,
            max_sweeps: self.max_sweeps,
            clamp: self.clamp,
            levels: self.levels,
            narrow_band_radius: self.narrow_band,
            tv_epsilon: self.tv_epsilon,
            tv_max_outer: self.tv_max_outer,
        }
    }

    pub fn reconstruction_params(&self) -> ReconstructionParams {
        ReconstructionParams {
            dims: self.grid,
            model: self.energy,
            solver: self.solver_params(),
            smoothing_passes: self.passes,
            margin_cells: self.margin,
            vertex_normals: false,
            keep_exterior_components: self.keep_exterior,
        }
    }

    pub fn load_options(&self) -> LoadOptions {
        LoadOptions {
            constant_normal: self.const_normal,
            normalize: self.normalize_normals,
        }
    }

    /// Checks value ranges without touching the file system.
    pub fn validate(&self) -> Result<()> {
        let to_config = |e: Error| match e {
            Error::InvalidParameter(m) => Error::Config(m),
            other => other,
        };
        self.solver_params().validate().map_err(to_config)?;
        if self.grid.0.contains(&0) {
            return Err(Error::Config("grid dimensions must be positive".into()));
        }
        if let Some(n) = self.const_normal {
            if n.norm() == 0.0 {
                return Err(Error::Config("const_normal must be nonzero".into()));
            }
        }
        Ok(())
    }
}

fn strip_prefix(e: &Error) -> String {
    match e {
        Error::Config(m) => m.clone(),
        other => other.to_string(),
    }
}

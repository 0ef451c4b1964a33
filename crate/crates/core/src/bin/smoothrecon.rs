use std::io::IsTerminal;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use smoothrecon::config::{parse_vec3, ReconConfig};
use smoothrecon::error::ErrorClass;
use smoothrecon::io::{load_mesh, load_samples, save_mesh, save_samples, LoadOptions, MeshFormat, PointFormat};
use smoothrecon::pipeline::reconstruct_with;
use smoothrecon::solver::{SweepObserver, SweepRecord};
use smoothrecon::synthetic::{
    coarsen_orientation, corrupt, sample_primitive, Corruption, DensitySplit, Hole, OrientationMode, Shape,
};
use smoothrecon::{metrics, Error, Result, Vec3};

#[derive(Parser)]
#[command(name = "smoothrecon", version, about = "Surface reconstruction with higher-order smoothness")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Reconstruct a mesh from an oriented point set.
    Reconstruct(ReconstructArgs),
    /// Print fit and curvature statistics of a mesh against a point set.
    Metrics(MetricsArgs),
    /// Write a synthetic oriented point set.
    Synth(SynthArgs),
}

#[derive(Args)]
struct ReconstructArgs {
    /// key = value file; flags given here override it.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long, short)]
    input: Option<PathBuf>,
    #[arg(long, short)]
    output: Option<PathBuf>,
    /// Vertices per axis: N or NX,NY,NZ.
    #[arg(long)]
    grid: Option<String>,
    /// Smoothness model, 1-4 or its name.
    #[arg(long)]
    energy: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    lambda: Option<f64>,
    #[arg(long)]
    levels: Option<usize>,
    #[arg(long, allow_hyphen_values = true)]
    tol: Option<f64>,
    #[arg(long)]
    max_sweeps: Option<usize>,
    #[arg(long, overrides_with = "no_clamp")]
    clamp: bool,
    #[arg(long, overrides_with = "clamp")]
    no_clamp: bool,
    /// Fine-level band radius in cells, or "none".
    #[arg(long, allow_hyphen_values = true)]
    narrow_band: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    tv_epsilon: Option<f64>,
    #[arg(long)]
    tv_max_outer: Option<usize>,
    #[arg(long)]
    passes: Option<usize>,
    #[arg(long)]
    margin: Option<usize>,
    #[arg(long)]
    normalize_normals: bool,
    /// Replace every normal with x,y,z.
    #[arg(long, allow_hyphen_values = true)]
    const_normal: Option<String>,
    /// Keep surface pieces outside the samples' bounding box.
    #[arg(long)]
    keep_exterior: bool,
    /// Log every sweep.
    #[arg(long, short)]
    verbose: bool,
}

#[derive(Args)]
struct MetricsArgs {
    /// Oriented or plain point file (normals are not used).
    #[arg(long)]
    points: PathBuf,
    #[arg(long)]
    mesh: PathBuf,
    /// Row label; defaults to the mesh file name.
    #[arg(long)]
    label: Option<String>,
    /// Tab-separated output instead of the aligned table.
    #[arg(long)]
    tsv: bool,
    #[arg(long, short)]
    verbose: bool,
}

#[derive(Args)]
struct SynthArgs {
    /// sphere, cylinder, box, torus, bumpy or scene.
    #[arg(long, default_value = "sphere")]
    shape: String,
    /// Radius (sphere, cylinder, bumpy) or major radius (torus).
    #[arg(long, default_value_t = 1.0)]
    r: f64,
    /// Cylinder height.
    #[arg(long, default_value_t = 2.0)]
    height: f64,
    /// Box edge lengths x,y,z.
    #[arg(long, default_value = "1,1,1")]
    size: String,
    /// Torus tube radius.
    #[arg(long, default_value_t = 0.3)]
    minor: f64,
    /// Bump height.
    #[arg(long, default_value_t = 0.06)]
    amplitude: f64,
    /// Bump frequency.
    #[arg(long, default_value_t = 5.0)]
    frequency: f64,
    #[arg(long, default_value_t = 20_000)]
    n: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Gaussian position noise, world units.
    #[arg(long, default_value_t = 0.0)]
    noise: f64,
    /// Fraction of points replaced by ambient outliers.
    #[arg(long, default_value_t = 0.0)]
    outliers: f64,
    /// Removed regions: cap:AXIS:ANGLE (e.g. cap:+z:30deg) or ball:X,Y,Z:R.
    #[arg(long, allow_hyphen_values = true)]
    holes: Vec<String>,
    /// AXIS=OFFSET:KEEP, e.g. x=0:0.02 keeps 2% of the points with x > 0.
    #[arg(long, allow_hyphen_values = true)]
    density_split: Option<String>,
    /// constant:X,Y,Z, halfspace:AXIS[:OFFSET] or view:X,Y,Z.
    #[arg(long, allow_hyphen_values = true)]
    orientation: Option<String>,
    #[arg(long, short)]
    output: PathBuf,
    #[arg(long, short)]
    verbose: bool,
}

fn init_logging(verbose: bool) {
    let default = if verbose { "debug" } else { "info" };
    let filter = tracing_subscriber::EnvFilter::try_from_default_env()
        .unwrap_or_else(|_| tracing_subscriber::EnvFilter::new(default));
    let _ = tracing_subscriber::fmt()
        .with_env_filter(filter)
        .with_writer(std::io::stderr)
        .with_ansi(std::io::stderr().is_terminal())
        .with_target(false)
        .without_time()
        .try_init();
}

fn exit_code(class: ErrorClass) -> u8 {
    match class {
        ErrorClass::Config => 2,
        ErrorClass::Io | ErrorClass::Input => 3,
        ErrorClass::Solver => 4,
        ErrorClass::Invalid => 1,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let verbose = match &cli.command {
        Command::Reconstruct(a) => a.verbose,
        Command::Metrics(a) => a.verbose,
        Command::Synth(a) => a.verbose,
    };
    init_logging(verbose);
    let result = match cli.command {
        Command::Reconstruct(a) => cmd_reconstruct(a),
        Command::Metrics(a) => cmd_metrics(a),
        Command::Synth(a) => cmd_synth(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            let class = e.class();
            eprintln!("error ({}): {e}", class.as_str());
            ExitCode::from(exit_code(class))
        }
    }
}

fn point_format(path: &Path) -> Result<PointFormat> {
    PointFormat::from_path(path).ok_or_else(|| {
        Error::Config(format!(
            "{}: unknown point format (use .ply, .xyz or .obj)",
            path.display()
        ))
    })
}

fn mesh_format(path: &Path) -> Result<MeshFormat> {
    MeshFormat::from_path(path)
        .ok_or_else(|| Error::Config(format!("{}: unknown mesh format (use .ply or .obj)", path.display())))
}

fn build_config(a: &ReconstructArgs) -> Result<ReconConfig> {
    let mut c = ReconConfig::default();
    if let Some(path) = &a.config {
        c.apply_file(path)?;
    }
    let mut flags: Vec<(&str, String)> = Vec::new();
    let mut put = |key, value: Option<String>| {
        if let Some(v) = value {
            flags.push((key, v));
        }
    };
    put("input", a.input.as_ref().map(|p| p.display().to_string()));
    put("output", a.output.as_ref().map(|p| p.display().to_string()));
    put("grid", a.grid.clone());
    put("energy", a.energy.clone());
    put("lambda", a.lambda.map(|v| v.to_string()));
    put("levels", a.levels.map(|v| v.to_string()));
    put("tol", a.tol.map(|v| v.to_string()));
    put("max_sweeps", a.max_sweeps.map(|v| v.to_string()));
    put("clamp", a.clamp.then(|| "true".into()));
    put("clamp", a.no_clamp.then(|| "false".into()));
    put("narrow_band", a.narrow_band.clone());
    put("tv_epsilon", a.tv_epsilon.map(|v| v.to_string()));
    put("tv_max_outer", a.tv_max_outer.map(|v| v.to_string()));
    put("passes", a.passes.map(|v| v.to_string()));
    put("margin", a.margin.map(|v| v.to_string()));
    put("normalize_normals", a.normalize_normals.then(|| "true".into()));
    put("const_normal", a.const_normal.clone());
    put("keep_exterior", a.keep_exterior.then(|| "true".into()));
    put("verbose", a.verbose.then(|| "true".into()));
    for (key, value) in flags {
        c.set(key, &value)
            .map_err(|e| Error::Config(format!("--{}: {e}", key.replace('_', "-"))))?;
    }
    c.validate()?;
    Ok(c)
}

/// Logs sweeps at debug level and reweighting rounds at info level.
struct LogObserver;

impl SweepObserver for LogObserver {
    fn on_sweep(&mut self, r: &SweepRecord) {
        match r.outer {
            Some(outer) => tracing::debug!(level = r.level, outer, sweep = r.sweep, delta = r.delta, "sweep"),
            None => tracing::debug!(level = r.level, sweep = r.sweep, delta = r.delta, "sweep"),
        }
    }

    fn on_outer(&mut self, level: usize, outer: usize, energy: f64, delta: f64) {
        tracing::info!(level, outer, energy, delta, "irls outer iteration");
    }
}

fn cmd_reconstruct(a: ReconstructArgs) -> Result<()> {
    let start = Instant::now();
    let c = build_config(&a)?;
    let input = c
        .input
        .clone()
        .ok_or_else(|| Error::Config("no input file (--input or input = ...)".into()))?;
    let output = c
        .output
        .clone()
        .ok_or_else(|| Error::Config("no output file (--output or output = ...)".into()))?;
    let in_format = point_format(&input)?;
    let out_format = mesh_format(&output)?;
    for line in c.echo().lines() {
        tracing::info!("config: {line}");
    }

    let loaded = load_samples(&input, in_format, &c.load_options())?;
    tracing::info!(path = %input.display(), samples = loaded.samples.len(), "loaded");
    let r = reconstruct_with(&loaded.samples, &c.reconstruction_params(), &mut LogObserver)?;
    for l in &r.solve.levels {
        let [nx, ny, nz] = l.dims.0;
        match l.outer_iterations {
            Some(outer) => tracing::info!(
                level = l.level,
                grid = %format!("{nx}x{ny}x{nz}"),
                lambda = l.lambda,
                outer,
                sweeps = l.sweeps,
                delta = l.final_delta,
                energy = l.energy,
                active = l.active_voxels,
                "level converged"
            ),
            None => tracing::info!(
                level = l.level,
                grid = %format!("{nx}x{ny}x{nz}"),
                lambda = l.lambda,
                sweeps = l.sweeps,
                delta = l.final_delta,
                energy = l.energy,
                active = l.active_voxels,
                "level converged"
            ),
        }
    }
    if r.mesh.is_empty() {
        return Err(Error::EmptyMesh);
    }
    save_mesh(&r.mesh, &output, out_format)?;
    tracing::info!(
        isovalue = r.isovalue,
        triangles = r.mesh.triangles.len(),
        vertices = r.mesh.vertices.len(),
        negated = r.negated,
        divergence_s = r.timings.divergence.as_secs_f64(),
        solve_s = r.timings.solve.as_secs_f64(),
        extraction_s = r.timings.extraction.as_secs_f64(),
        wall_s = start.elapsed().as_secs_f64(),
        path = %output.display(),
        "wrote mesh"
    );
    Ok(())
}

fn cmd_metrics(a: MetricsArgs) -> Result<()> {
    let opts = LoadOptions {
        // Points without normals are fine here.
        constant_normal: Some(Vec3::z()),
        normalize: false,
    };
    let samples = load_samples(&a.points, point_format(&a.points)?, &opts)?.samples;
    let mesh = load_mesh(&a.mesh, mesh_format(&a.mesh)?)?;
    let label = a.label.unwrap_or_else(|| {
        a.mesh
            .file_name()
            .map_or_else(|| a.mesh.display().to_string(), |n| n.to_string_lossy().into_owned())
    });
    let report = metrics::report(&[(label.as_str(), &mesh, &samples)])?;
    if a.tsv {
        print!("{}", report.to_tsv());
    } else {
        print!("{}", report.to_text());
    }
    Ok(())
}

fn axis_vector(s: &str) -> Option<Vec3> {
    let (sign, name) = match s.as_bytes().first()? {
        b'+' => (1.0, &s[1..]),
        b'-' => (-1.0, &s[1..]),
        _ => (1.0, s),
    };
    let v = match name {
        "x" | "X" => Vec3::x(),
        "y" | "Y" => Vec3::y(),
        "z" | "Z" => Vec3::z(),
        _ => return parse_vec3(s),
    };
    Some(v * sign)
}

fn angle(s: &str) -> Option<f64> {
    if let Some(d) = s.strip_suffix("deg") {
        d.trim().parse::<f64>().ok().map(f64::to_radians)
    } else if let Some(r) = s.strip_suffix("rad") {
        r.trim().parse().ok()
    } else {
        s.trim().parse::<f64>().ok().map(f64::to_radians)
    }
}

fn parse_hole(s: &str) -> Result<Hole> {
    let bad = || Error::Config(format!("--holes {s:?}: expected cap:AXIS:ANGLE or ball:X,Y,Z:R"));
    let parts: Vec<&str> = s.split(':').collect();
    match parts[..] {
        ["cap", axis, a] => Ok(Hole::Cap {
            axis: axis_vector(axis).ok_or_else(bad)?,
            half_angle: angle(a).ok_or_else(bad)?,
        }),
        ["ball", c, r] => Ok(Hole::Ball {
            center: parse_vec3(c).ok_or_else(bad)?,
            radius: r.parse().map_err(|_| bad())?,
        }),
        _ => Err(bad()),
    }
}

fn parse_density_split(s: &str) -> Result<DensitySplit> {
    let bad = || Error::Config(format!("--density-split {s:?}: expected AXIS=OFFSET:KEEP"));
    let (axis, rest) = s.split_once('=').ok_or_else(bad)?;
    let (offset, keep) = rest.split_once(':').ok_or_else(bad)?;
    Ok(DensitySplit {
        normal: axis_vector(axis).ok_or_else(bad)?,
        offset: offset.parse().map_err(|_| bad())?,
        keep_fraction: keep.parse().map_err(|_| bad())?,
    })
}

fn parse_orientation(s: &str) -> Result<OrientationMode> {
    let bad = || {
        Error::Config(format!(
            "--orientation {s:?}: expected constant:X,Y,Z, halfspace:AXIS[:OFFSET] or view:X,Y,Z"
        ))
    };
    let parts: Vec<&str> = s.split(':').collect();
    match parts[..] {
        ["constant", v] => Ok(OrientationMode::Constant(axis_vector(v).ok_or_else(bad)?)),
        ["view", eye] => Ok(OrientationMode::ViewDirection {
            eye: parse_vec3(eye).ok_or_else(bad)?,
        }),
        ["halfspace", axis] | ["halfspace", axis, _] => {
            let n = axis_vector(axis).ok_or_else(bad)?;
            let offset = match parts.get(2) {
                Some(o) => o.parse().map_err(|_| bad())?,
                None => 0.0,
            };
            Ok(OrientationMode::PerHalfSpace {
                split_normal: n,
                offset,
                positive: n,
                negative: -n,
            })
        }
        _ => Err(bad()),
    }
}

fn parse_shape(a: &SynthArgs) -> Result<Shape> {
    let shape = match a.shape.to_ascii_lowercase().as_str() {
        "sphere" => Shape::Sphere { radius: a.r },
        "cylinder" => Shape::Cylinder {
            radius: a.r,
            height: a.height,
        },
        "box" => Shape::Box {
            size: parse_vec3(&a.size)
                .ok_or_else(|| Error::Config(format!("--size {:?}: expected X,Y,Z", a.size)))?,
        },
        "torus" => Shape::Torus {
            major: a.r,
            minor: a.minor,
        },
        "bumpy" | "bumpy-sphere" => Shape::BumpySphere {
            radius: a.r,
            amplitude: a.amplitude,
            frequency: a.frequency,
        },
        "scene" => Shape::Scene,
        other => return Err(Error::Config(format!("unknown shape {other:?}"))),
    };
    Ok(shape)
}

fn cmd_synth(a: SynthArgs) -> Result<()> {
    let format = point_format(&a.output)?;
    let shape = parse_shape(&a)?;
    let corruption = Corruption {
        noise_sigma: a.noise,
        outlier_fraction: a.outliers,
        outlier_radius: 0.0,
        holes: a.holes.iter().map(|h| parse_hole(h)).collect::<Result<_>>()?,
        density_split: a.density_split.as_deref().map(parse_density_split).transpose()?,
        seed: a.seed.wrapping_add(1),
    };
    let orientation = a.orientation.as_deref().map(parse_orientation).transpose()?;

    let mut samples = sample_primitive(shape, a.n, a.seed)?;
    samples = corrupt(&samples, &corruption)?;
    if let Some(mode) = orientation {
        samples = coarsen_orientation(&samples, mode)?;
    }
    save_samples(&samples, &a.output, format)?;
    tracing::info!(shape = ?shape, points = samples.len(), seed = a.seed, path = %a.output.display(), "wrote samples");
    Ok(())
}

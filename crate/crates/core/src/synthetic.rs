//! Deterministic synthetic point sets and corruptions.
//!
//! Every generator is a pure function of its parameters and seed, using a
//! ChaCha stream so fixtures are identical across platforms.

use std::f64::consts::{PI, TAU};

use rand::seq::index;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal, StandardNormal};

use crate::{Error, Result, Sample, SampleSet, TriangleMesh, Vec3};

/// Shapes centered at the origin. Cylinders run along z.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Shape {
    Sphere { radius: f64 },
    /// Closed cylinder with flat caps.
    Cylinder { radius: f64, height: f64 },
    /// Axis-aligned box with the given edge lengths.
    Box { size: Vec3 },
    Torus { major: f64, minor: f64 },
    /// Level set `|p| = r + a sin(f x) sin(f y) sin(f z)`. Directions are
    /// uniform; the surface measure is only approximately so.
    BumpySphere { radius: f64, amplitude: f64, frequency: f64 },
    /// Overlapping sphere, box and cylinder; only the union's outer surface
    /// is sampled.
    Scene,
}

fn unit_vector(rng: &mut ChaCha8Rng) -> Vec3 {
    loop {
        let v = Vec3::new(
            StandardNormal.sample(rng),
            StandardNormal.sample(rng),
            StandardNormal.sample(rng),
        );
        let n = v.norm();
        if n > 1e-12 {
            return v / n;
        }
    }
}

fn positive(name: &str, v: f64) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!("{name} must be positive, got {v}")))
    }
}

/// A translated primitive with an inside test.
#[derive(Debug, Clone, Copy)]
struct Placed {
    shape: Shape,
    center: Vec3,
}

impl Placed {
    fn area(&self) -> f64 {
        match self.shape {
            Shape::Sphere { radius } => 4.0 * PI * radius * radius,
            Shape::Cylinder { radius, height } => TAU * radius * height + TAU * radius * radius,
            Shape::Box { size } => 2.0 * (size.x * size.y + size.y * size.z + size.x * size.z),
            _ => unreachable!("scene parts are simple primitives"),
        }
    }

    fn strictly_inside(&self, p: &Vec3) -> bool {
        let q = p - self.center;
        match self.shape {
            Shape::Sphere { radius } => q.norm() < radius,
            Shape::Cylinder { radius, height } => q.xy().norm() < radius && q.z.abs() < height / 2.0,
            Shape::Box { size } => (0..3).all(|a| q[a].abs() < size[a] / 2.0),
            _ => unreachable!("scene parts are simple primitives"),
        }
    }

    fn sample(&self, rng: &mut ChaCha8Rng) -> Sample {
        let s = sample_simple(self.shape, rng);
        Sample::new(s.point + self.center, s.normal)
    }
}

fn scene_parts() -> [Placed; 3] {
    [
        Placed {
            shape: Shape::Sphere { radius: 0.6 },
            center: Vec3::new(-0.55, 0.0, 0.0),
        },
        Placed {
            shape: Shape::Box {
                size: Vec3::new(0.9, 0.8, 0.7),
            },
            center: Vec3::new(0.35, 0.0, -0.1),
        },
        Placed {
            shape: Shape::Cylinder {
                radius: 0.25,
                height: 0.9,
            },
            center: Vec3::new(0.35, 0.0, 0.45),
        },
    ]
}

fn sample_simple(shape: Shape, rng: &mut ChaCha8Rng) -> Sample {
    match shape {
        Shape::Sphere { radius } => {
            let n = unit_vector(rng);
            Sample::new(n * radius, n)
        }
        Shape::Cylinder { radius, height } => {
            let side = TAU * radius * height;
            let cap = PI * radius * radius;
            let pick = rng.random_range(0.0..side + 2.0 * cap);
            let theta = rng.random_range(0.0..TAU);
            if pick < side {
                let n = Vec3::new(theta.cos(), theta.sin(), 0.0);
                let z = rng.random_range(-height / 2.0..height / 2.0);
                Sample::new(n * radius + Vec3::z() * z, n)
            } else {
                let r = radius * rng.random::<f64>().sqrt();
                let up = pick < side + cap;
                let z = if up { height / 2.0 } else { -height / 2.0 };
                let n = if up { Vec3::z() } else { -Vec3::z() };
                Sample::new(Vec3::new(r * theta.cos(), r * theta.sin(), z), n)
            }
        }
        Shape::Box { size } => {
            let areas = [size.y * size.z, size.x * size.z, size.x * size.y];
            let total = areas.iter().sum::<f64>() * 2.0;
            let mut pick = rng.random_range(0.0..total);
            let mut face = 0;
            while face < 5 && pick >= areas[face / 2] {
                pick -= areas[face / 2];
                face += 1;
            }
            let axis = face / 2;
            let sign = if face % 2 == 0 { 1.0 } else { -1.0 };
            let mut p = Vec3::zeros();
            for a in 0..3 {
                p[a] = if a == axis {
                    sign * size[a] / 2.0
                } else {
                    rng.random_range(-size[a] / 2.0..size[a] / 2.0)
                };
            }
            let mut n = Vec3::zeros();
            n[axis] = sign;
            Sample::new(p, n)
        }
        Shape::Torus { major, minor } => loop {
            let theta = rng.random_range(0.0..TAU);
            let phi = rng.random_range(0.0..TAU);
            // Accept proportionally to the local area element.
            if rng.random::<f64>() * (major + minor) <= major + minor * theta.cos() {
                let n = Vec3::new(theta.cos() * phi.cos(), theta.cos() * phi.sin(), theta.sin());
                let ring = Vec3::new(phi.cos(), phi.sin(), 0.0) * major;
                return Sample::new(ring + n * minor, n);
            }
        },
        Shape::BumpySphere {
            radius,
            amplitude,
            frequency,
        } => {
            let d = unit_vector(rng);
            let bump = |p: &Vec3| (frequency * p.x).sin() * (frequency * p.y).sin() * (frequency * p.z).sin();
            // Newton on g(r) = r - radius - a * bump(r d).
            let mut r = radius;
            for _ in 0..50 {
                let p = d * r;
                let grad = bump_gradient(&p, frequency);
                let g = r - radius - amplitude * bump(&p);
                let dg = 1.0 - amplitude * grad.dot(&d);
                let step = g / dg;
                r -= step;
                if step.abs() < 1e-15 * radius {
                    break;
                }
            }
            let p = d * r;
            let n = (d - bump_gradient(&p, frequency) * amplitude).normalize();
            Sample::new(p, n)
        }
        Shape::Scene => unreachable!("handled by the caller"),
    }
}

fn bump_gradient(p: &Vec3, f: f64) -> Vec3 {
    let (sx, sy, sz) = ((f * p.x).sin(), (f * p.y).sin(), (f * p.z).sin());
    let (cx, cy, cz) = ((f * p.x).cos(), (f * p.y).cos(), (f * p.z).cos());
    Vec3::new(cx * sy * sz, sx * cy * sz, sx * sy * cz) * f
}

impl Shape {
    pub fn validate(&self) -> Result<()> {
        match *self {
            Shape::Sphere { radius } => positive("radius", radius),
            Shape::Cylinder { radius, height } => positive("radius", radius).and(positive("height", height)),
            Shape::Box { size } => (0..3).try_for_each(|a| positive("box size", size[a])),
            Shape::Torus { major, minor } => {
                positive("major radius", major)?;
                positive("minor radius", minor)?;
                if minor >= major {
                    return Err(Error::InvalidParameter("torus minor radius must be below the major radius".into()));
                }
                Ok(())
            }
            Shape::BumpySphere {
                radius,
                amplitude,
                frequency,
            } => {
                positive("radius", radius)?;
                positive("frequency", frequency)?;
                if !(amplitude >= 0.0 && amplitude * frequency < 0.5 && amplitude < 0.5 * radius) {
                    return Err(Error::InvalidParameter(
                        "bump amplitude must be nonnegative with amplitude * frequency < 0.5".into(),
                    ));
                }
                Ok(())
            }
            Shape::Scene => Ok(()),
        }
    }

    /// Signed implicit function, negative inside, for orientation checks.
    pub fn implicit(&self, p: &Vec3) -> f64 {
        match *self {
            Shape::Sphere { radius } => p.norm() - radius,
            Shape::Cylinder { radius, height } => (p.xy().norm() - radius).max(p.z.abs() - height / 2.0),
            Shape::Box { size } => (0..3).map(|a| p[a].abs() - size[a] / 2.0).fold(f64::MIN, f64::max),
            Shape::Torus { major, minor } => Vec3::new(p.xy().norm() - major, p.z, 0.0).norm() - minor,
            Shape::BumpySphere {
                radius,
                amplitude,
                frequency,
            } => p.norm() - radius - amplitude * (frequency * p.x).sin() * (frequency * p.y).sin() * (frequency * p.z).sin(),
            Shape::Scene => scene_parts()
                .iter()
                .map(|part| part.shape.implicit(&(p - part.center)))
                .fold(f64::MAX, f64::min),
        }
    }
}

/// `n` surface samples with exact outward normals.
pub fn sample_primitive(shape: Shape, n: usize, seed: u64) -> Result<SampleSet> {
    if n == 0 {
        return Err(Error::InvalidParameter("sample count must be at least 1".into()));
    }
    shape.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let samples = if shape == Shape::Scene {
        let parts = scene_parts();
        let areas: Vec<f64> = parts.iter().map(Placed::area).collect();
        let total: f64 = areas.iter().sum();
        let mut out = Vec::with_capacity(n);
        while out.len() < n {
            let mut pick = rng.random_range(0.0..total);
            let mut i = 0;
            while i + 1 < parts.len() && pick >= areas[i] {
                pick -= areas[i];
                i += 1;
            }
            let s = parts[i].sample(&mut rng);
            if parts
                .iter()
                .enumerate()
                .all(|(j, other)| j == i || !other.strictly_inside(&s.point))
            {
                out.push(s);
            }
        }
        out
    } else {
        (0..n).map(|_| sample_simple(shape, &mut rng)).collect()
    };
    Ok(SampleSet::world(samples))
}

/// Region removed from a point set.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Hole {
    /// Points whose direction from the bounding-box center lies within
    /// `half_angle` radians of `axis`.
    Cap { axis: Vec3, half_angle: f64 },
    Ball { center: Vec3, radius: f64 },
}

/// Keeps only `keep_fraction` of the points with `normal . p > offset`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DensitySplit {
    pub normal: Vec3,
    pub offset: f64,
    pub keep_fraction: f64,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Corruption {
    /// Standard deviation of isotropic positional noise, world units.
    pub noise_sigma: f64,
    /// Fraction of points replaced by ambient outliers.
    pub outlier_fraction: f64,
    /// Outlier ball radius as a multiple of the bounding sphere radius.
    /// Zero means 1.5.
    pub outlier_radius: f64,
    pub holes: Vec<Hole>,
    pub density_split: Option<DensitySplit>,
    pub seed: u64,
}

impl Corruption {
    fn is_identity(&self) -> bool {
        self.noise_sigma == 0.0 && self.outlier_fraction == 0.0 && self.holes.is_empty() && self.density_split.is_none()
    }
}

fn bounding_ball(samples: &SampleSet) -> (Vec3, f64) {
    let (lo, hi) = samples.bounds().expect("nonempty");
    ((lo + hi) * 0.5, (hi - lo).norm() * 0.5)
}

/// Removes hole regions, thins one side of the density plane, adds noise,
/// then swaps a fraction of points for uniform outliers in an inflated
/// bounding ball with random unit normals.
pub fn corrupt(samples: &SampleSet, c: &Corruption) -> Result<SampleSet> {
    let fraction_ok = |v: f64| (0.0..=1.0).contains(&v);
    if !fraction_ok(c.outlier_fraction) {
        return Err(Error::InvalidParameter("outlier fraction must lie in [0, 1]".into()));
    }
    if !(c.noise_sigma >= 0.0 && c.noise_sigma.is_finite()) {
        return Err(Error::InvalidParameter("noise sigma must be nonnegative".into()));
    }
    if let Some(d) = &c.density_split {
        if !fraction_ok(d.keep_fraction) {
            return Err(Error::InvalidParameter("keep fraction must lie in [0, 1]".into()));
        }
        if d.normal.norm() == 0.0 {
            return Err(Error::InvalidParameter("density split normal is zero".into()));
        }
    }
    if samples.is_empty() {
        return Err(Error::EmptySamples);
    }
    if c.is_identity() {
        return Ok(samples.clone());
    }

    let mut rng = ChaCha8Rng::seed_from_u64(c.seed);
    let (center, radius) = bounding_ball(samples);
    let in_hole = |p: &Vec3| {
        c.holes.iter().any(|h| match *h {
            Hole::Cap { axis, half_angle } => {
                let d = p - center;
                d.norm() > 0.0 && d.angle(&axis) <= half_angle
            }
            Hole::Ball { center, radius } => (p - center).norm() <= radius,
        })
    };
    let mut kept: Vec<Sample> = Vec::with_capacity(samples.len());
    for s in samples.iter() {
        if in_hole(&s.point) {
            continue;
        }
        if let Some(d) = &c.density_split {
            if d.normal.dot(&s.point) > d.offset && rng.random::<f64>() >= d.keep_fraction {
                continue;
            }
        }
        kept.push(*s);
    }
    if kept.is_empty() {
        return Err(Error::InvalidParameter("corruption removed every point".into()));
    }

    if c.noise_sigma > 0.0 {
        let normal = Normal::new(0.0, c.noise_sigma).expect("sigma checked above");
        for s in &mut kept {
            s.point += Vec3::new(normal.sample(&mut rng), normal.sample(&mut rng), normal.sample(&mut rng));
        }
    }

    let count = (c.outlier_fraction * kept.len() as f64).round() as usize;
    if count > 0 {
        let factor = if c.outlier_radius > 0.0 { c.outlier_radius } else { 1.5 };
        let r = radius.max(f64::MIN_POSITIVE) * factor;
        let mut chosen = index::sample(&mut rng, kept.len(), count).into_vec();
        chosen.sort_unstable();
        for i in chosen {
            let dir = unit_vector(&mut rng);
            let dist = r * rng.random::<f64>().cbrt();
            kept[i] = Sample::new(center + dir * dist, unit_vector(&mut rng));
        }
    }
    Ok(SampleSet::world(kept))
}

/// How coarse orientations replace the exact normals.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum OrientationMode {
    Constant(Vec3),
    /// `positive` for points with `split_normal . p >= offset`, else `negative`.
    PerHalfSpace {
        split_normal: Vec3,
        offset: f64,
        positive: Vec3,
        negative: Vec3,
    },
    /// Unit vector from each point toward `eye`.
    ViewDirection { eye: Vec3 },
}

pub fn coarsen_orientation(samples: &SampleSet, mode: OrientationMode) -> Result<SampleSet> {
    let unit = |v: Vec3, what: &str| -> Result<Vec3> {
        let n = v.norm();
        if n > 0.0 && n.is_finite() {
            Ok(v / n)
        } else {
            Err(Error::InvalidParameter(format!("{what} direction is zero")))
        }
    };
    let mut out = samples.clone();
    match mode {
        OrientationMode::Constant(d) => {
            let d = unit(d, "constant")?;
            out.samples.iter_mut().for_each(|s| s.normal = d);
        }
        OrientationMode::PerHalfSpace {
            split_normal,
            offset,
            positive,
            negative,
        } => {
            let split = unit(split_normal, "split")?;
            let (pos, neg) = (unit(positive, "positive")?, unit(negative, "negative")?);
            for s in &mut out.samples {
                s.normal = if split.dot(&s.point) >= offset { pos } else { neg };
            }
        }
        OrientationMode::ViewDirection { eye } => {
            for s in &mut out.samples {
                s.normal = unit(eye - s.point, "view")?;
            }
        }
    }
    Ok(out)
}

/// Icosahedron subdivided `subdivisions` times and projected to a sphere.
pub fn icosphere(radius: f64, subdivisions: usize) -> TriangleMesh {
    let t = (1.0 + 5f64.sqrt()) / 2.0;
    let mut vertices: Vec<Vec3> = [
        [-1.0, t, 0.0],
        [1.0, t, 0.0],
        [-1.0, -t, 0.0],
        [1.0, -t, 0.0],
        [0.0, -1.0, t],
        [0.0, 1.0, t],
        [0.0, -1.0, -t],
        [0.0, 1.0, -t],
        [t, 0.0, -1.0],
        [t, 0.0, 1.0],
        [-t, 0.0, -1.0],
        [-t, 0.0, 1.0],
    ]
    .iter()
    .map(|v| Vec3::from(*v).normalize())
    .collect();
    let mut triangles: Vec<[u32; 3]> = vec![
        [0, 11, 5],
        [0, 5, 1],
        [0, 1, 7],
        [0, 7, 10],
        [0, 10, 11],
        [1, 5, 9],
        [5, 11, 4],
        [11, 10, 2],
        [10, 7, 6],
        [7, 1, 8],
        [3, 9, 4],
        [3, 4, 2],
        [3, 2, 6],
        [3, 6, 8],
        [3, 8, 9],
        [4, 9, 5],
        [2, 4, 11],
        [6, 2, 10],
        [8, 6, 7],
        [9, 8, 1],
    ];
    for _ in 0..subdivisions {
        let mut midpoints = std::collections::HashMap::new();
        let mut mid = |a: u32, b: u32, vertices: &mut Vec<Vec3>| -> u32 {
            *midpoints.entry((a.min(b), a.max(b))).or_insert_with(|| {
                vertices.push(((vertices[a as usize] + vertices[b as usize]) * 0.5).normalize());
                vertices.len() as u32 - 1
            })
        };
        let mut next = Vec::with_capacity(triangles.len() * 4);
        for [a, b, c] in triangles {
            let ab = mid(a, b, &mut vertices);
            let bc = mid(b, c, &mut vertices);
            let ca = mid(c, a, &mut vertices);
            next.extend([[a, ab, ca], [b, bc, ab], [c, ca, bc], [ab, bc, ca]]);
        }
        triangles = next;
    }
    for v in &mut vertices {
        *v *= radius;
    }
    TriangleMesh::new(vertices, triangles)
}

/// Open tube along z with `segments` around and `rings` intervals along.
pub fn cylinder_mesh(radius: f64, height: f64, segments: usize, rings: usize) -> TriangleMesh {
    let mut vertices = Vec::with_capacity(segments * (rings + 1));
    for r in 0..=rings {
        let z = height * (r as f64 / rings as f64 - 0.5);
        for s in 0..segments {
            let a = TAU * s as f64 / segments as f64;
            vertices.push(Vec3::new(radius * a.cos(), radius * a.sin(), z));
        }
    }
    let mut triangles = Vec::with_capacity(segments * rings * 2);
    for r in 0..rings {
        for s in 0..segments {
            let a = (r * segments + s) as u32;
            let b = (r * segments + (s + 1) % segments) as u32;
            let c = a + segments as u32;
            let d = b + segments as u32;
            triangles.push([a, b, d]);
            triangles.push([a, d, c]);
        }
    }
    TriangleMesh::new(vertices, triangles)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sphere_points_and_normals() {
        let s = sample_primitive(Shape::Sphere { radius: 1.0 }, 1000, 1).unwrap();
        assert_eq!(s.len(), 1000);
        for p in s.iter() {
            assert!((p.point.norm() - 1.0).abs() < 1e-12);
            assert!((p.normal - p.point).norm() < 1e-12);
        }
    }

    #[test]
    fn determinism() {
        for shape in [
            Shape::Sphere { radius: 2.0 },
            Shape::Torus { major: 1.0, minor: 0.3 },
            Shape::Scene,
        ] {
            let a = sample_primitive(shape, 500, 9).unwrap();
            let b = sample_primitive(shape, 500, 9).unwrap();
            let c = sample_primitive(shape, 500, 10).unwrap();
            assert_eq!(a, b);
            assert_ne!(a, c);
        }
    }

    #[test]
    fn box_faces_follow_area() {
        let size = Vec3::new(1.0, 2.0, 3.0);
        let n = 6000;
        let s = sample_primitive(Shape::Box { size }, n, 4).unwrap();
        let mut counts = [0usize; 6];
        for p in s.iter() {
            let axis = p.normal.iamax();
            let face = axis * 2 + usize::from(p.normal[axis] < 0.0);
            counts[face] += 1;
            assert!((p.point[axis].abs() - size[axis] / 2.0).abs() < 1e-12);
        }
        let areas = [size.y * size.z, size.x * size.z, size.x * size.y];
        let total = 2.0 * areas.iter().sum::<f64>();
        for (f, &c) in counts.iter().enumerate() {
            let p = areas[f / 2] / total;
            let mean = n as f64 * p;
            let sd = (n as f64 * p * (1.0 - p)).sqrt();
            assert!((c as f64 - mean).abs() <= 3.0 * sd, "face {f}: {c} vs {mean}");
        }
    }

    #[test]
    fn normals_point_outward_for_every_shape() {
        for shape in [
            Shape::Sphere { radius: 0.7 },
            Shape::Cylinder { radius: 0.5, height: 2.0 },
            Shape::Box { size: Vec3::new(1.0, 0.5, 2.0) },
            Shape::Torus { major: 1.0, minor: 0.25 },
            Shape::BumpySphere { radius: 1.0, amplitude: 0.05, frequency: 4.0 },
            Shape::Scene,
        ] {
            let s = sample_primitive(shape, 2000, 3).unwrap();
            for p in s.iter() {
                assert!(shape.implicit(&p.point).abs() < 1e-9, "{shape:?} {:?}", p.point);
                // Finite-difference gradient of the implicit function.
                let h = 1e-6;
                let g = Vec3::new(
                    shape.implicit(&(p.point + Vec3::x() * h)) - shape.implicit(&(p.point - Vec3::x() * h)),
                    shape.implicit(&(p.point + Vec3::y() * h)) - shape.implicit(&(p.point - Vec3::y() * h)),
                    shape.implicit(&(p.point + Vec3::z() * h)) - shape.implicit(&(p.point - Vec3::z() * h)),
                );
                assert!(p.normal.dot(&g) > 0.0, "{shape:?}");
                assert!((p.normal.norm() - 1.0).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn invalid_shapes() {
        assert!(sample_primitive(Shape::Sphere { radius: -1.0 }, 10, 0).is_err());
        assert!(sample_primitive(Shape::Torus { major: 1.0, minor: 2.0 }, 10, 0).is_err());
        assert!(sample_primitive(Shape::Sphere { radius: 1.0 }, 0, 0).is_err());
    }

    #[test]
    fn identity_corruption_is_bitwise() {
        let s = sample_primitive(Shape::Torus { major: 1.0, minor: 0.4 }, 300, 2).unwrap();
        let out = corrupt(&s, &Corruption { seed: 99, ..Default::default() }).unwrap();
        assert_eq!(out, s);
    }

    #[test]
    fn density_split_ratio() {
        let n = 100_000;
        let s = sample_primitive(Shape::Sphere { radius: 1.0 }, n, 5).unwrap();
        let c = Corruption {
            density_split: Some(DensitySplit {
                normal: Vec3::x(),
                offset: 0.0,
                keep_fraction: 0.02,
            }),
            seed: 6,
            ..Default::default()
        };
        let out = corrupt(&s, &c).unwrap();
        let pos_before = s.points().filter(|p| p.x > 0.0).count() as f64;
        let neg = out.points().filter(|p| p.x <= 0.0).count();
        let pos = out.points().filter(|p| p.x > 0.0).count() as f64;
        assert_eq!(neg, s.points().filter(|p| p.x <= 0.0).count());
        let mean = pos_before * 0.02;
        let sd = (pos_before * 0.02 * 0.98).sqrt();
        assert!((pos - mean).abs() <= 3.0 * sd, "{pos} vs {mean}");
    }

    #[test]
    fn cap_hole_removes_exactly_the_cap() {
        let s = sample_primitive(Shape::Sphere { radius: 1.0 }, 5000, 8).unwrap();
        let half = 30f64.to_radians();
        let c = Corruption {
            holes: vec![Hole::Cap { axis: Vec3::z(), half_angle: half }],
            ..Default::default()
        };
        let out = corrupt(&s, &c).unwrap();
        let center = bounding_ball(&s).0;
        let inside = |p: &Vec3| (p - center).angle(&Vec3::z()) <= half;
        assert!(out.points().all(|p| !inside(p)));
        let expected: Vec<Sample> = s.iter().filter(|p| !inside(&p.point)).copied().collect();
        assert_eq!(out.samples, expected);
    }

    #[test]
    fn noise_and_outliers() {
        let s = sample_primitive(Shape::Sphere { radius: 1.0 }, 2000, 8).unwrap();
        let c = Corruption {
            noise_sigma: 0.01,
            outlier_fraction: 0.02,
            seed: 1,
            ..Default::default()
        };
        let out = corrupt(&s, &c).unwrap();
        assert_eq!(out.len(), 2000);
        let far = out.points().filter(|p| (p.norm() - 1.0).abs() > 0.06).count();
        assert!(far > 20 && far <= 40, "{far}");
        assert_eq!(out, corrupt(&s, &c).unwrap());
        let err = corrupt(
            &s,
            &Corruption {
                holes: vec![Hole::Ball { center: Vec3::zeros(), radius: 5.0 }],
                ..Default::default()
            },
        );
        assert!(err.is_err());
        assert!(corrupt(&s, &Corruption { outlier_fraction: 1.5, ..Default::default() }).is_err());
    }

    #[test]
    fn orientation_modes() {
        let s = sample_primitive(Shape::Sphere { radius: 1.0 }, 400, 2).unwrap();
        let c = coarsen_orientation(&s, OrientationMode::Constant(Vec3::new(0.0, 0.0, 3.0))).unwrap();
        assert!(c.iter().all(|p| p.normal == Vec3::z()));
        let h = coarsen_orientation(
            &s,
            OrientationMode::PerHalfSpace {
                split_normal: Vec3::x(),
                offset: 0.0,
                positive: Vec3::x(),
                negative: -Vec3::x(),
            },
        )
        .unwrap();
        let mut distinct: Vec<Vec3> = Vec::new();
        for p in h.iter() {
            if !distinct.contains(&p.normal) {
                distinct.push(p.normal);
            }
        }
        assert_eq!(distinct.len(), 2);
        let eye = Vec3::new(0.0, 0.0, 5.0);
        let v = coarsen_orientation(&s, OrientationMode::ViewDirection { eye }).unwrap();
        for (a, b) in v.iter().zip(s.iter()) {
            assert_eq!(a.point, b.point);
            assert!((a.normal - (eye - b.point).normalize()).norm() < 1e-15);
        }
        assert!(coarsen_orientation(&s, OrientationMode::Constant(Vec3::zeros())).is_err());
    }

    #[test]
    fn helper_meshes_are_well_formed() {
        let m = icosphere(2.0, 3);
        assert_eq!(m.triangles.len(), 20 * 64);
        let t = m.topology();
        assert!(t.is_watertight() && t.consistently_oriented);
        assert_eq!(t.euler_characteristic(), 2);
        assert!(m.signed_volume() > 0.0);
        assert!(m.vertices.iter().all(|v| (v.norm() - 2.0).abs() < 1e-12));
        let c = cylinder_mesh(1.0, 2.0, 16, 4);
        assert_eq!(c.topology().boundary_edges, 32);
    }
}

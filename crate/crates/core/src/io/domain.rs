use super::{CoordinateSpace, SampleSet};
use crate::{Dims, Error, Result, Vec3};

/// Default empty border, in cells, between the samples and the grid edge.
/// Twice the support radius of the three-pass box filter.
pub const DEFAULT_MARGIN_CELLS: usize = 6;

/// Isotropic similarity between world coordinates and grid coordinates
/// (grid spacing 1): `grid = (world - origin) / scale`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DomainTransform {
    pub origin: Vec3,
    /// World units per grid cell.
    pub scale: f64,
    pub dims: Dims,
}

impl DomainTransform {
    pub fn point_to_grid(&self, p: &Vec3) -> Vec3 {
        (p - self.origin) / self.scale
    }

    pub fn point_to_world(&self, q: &Vec3) -> Vec3 {
        self.origin + q * self.scale
    }

    pub fn identity(dims: Dims) -> Self {
        DomainTransform {
            origin: Vec3::zeros(),
            scale: 1.0,
            dims,
        }
    }
}

/// Chooses an isotropic transform that centers the samples in the grid and
/// leaves `margin_cells` empty cells on every side.
///
/// Zero-extent axes are inflated to the largest extent so planar, linear and
/// single-point inputs still get a finite scale.
pub fn fit_domain(samples: &SampleSet, dims: Dims, margin_cells: usize) -> Result<DomainTransform> {
    let (lo, hi) = samples.bounds().ok_or(Error::EmptySamples)?;
    let spans = dims.0.map(|n| n as f64 - 1.0 - 2.0 * margin_cells as f64);
    if spans.iter().any(|&s| s < 2.0) {
        return Err(Error::DomainTooSmall {
            dims: dims.0,
            margin: margin_cells,
        });
    }
    let extent = hi - lo;
    let mut largest = extent.max();
    if largest <= 0.0 {
        largest = 1.0;
    }
    let mut scale = 0.0f64;
    for a in 0..3 {
        let e = if extent[a] <= largest * 1e-12 {
            largest
        } else {
            extent[a]
        };
        scale = scale.max(e / spans[a]);
    }
    // Keep rounding in the forward map from pushing points onto the margin.
    scale *= 1.0 + 1e-12;
    let center = (lo + hi) * 0.5;
    let grid_center = Vec3::from(dims.0.map(|n| (n as f64 - 1.0) * 0.5));
    Ok(DomainTransform {
        origin: center - grid_center * scale,
        scale,
        dims,
    })
}

/// Maps sample positions into grid coordinates. Normals are direction-only
/// and pass through unchanged.
pub fn to_grid(samples: &SampleSet, t: &DomainTransform) -> SampleSet {
    if samples.space == CoordinateSpace::Grid {
        return samples.clone();
    }
    let mut out = samples.clone();
    for s in &mut out.samples {
        s.point = t.point_to_grid(&s.point);
    }
    out.space = CoordinateSpace::Grid;
    out
}

pub fn to_world(samples: &SampleSet, t: &DomainTransform) -> SampleSet {
    if samples.space == CoordinateSpace::World {
        return samples.clone();
    }
    let mut out = samples.clone();
    for s in &mut out.samples {
        s.point = t.point_to_world(&s.point);
    }
    out.space = CoordinateSpace::World;
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::Sample;
    use approx::assert_relative_eq;
    use nalgebra::{Rotation3, Unit};
    use proptest::prelude::*;

    fn set(points: &[Vec3]) -> SampleSet {
        points.iter().map(|&p| Sample::new(p, Vec3::z())).collect()
    }

    fn cube_corners() -> Vec<Vec3> {
        let mut v = Vec::new();
        for c in 0..8 {
            v.push(Vec3::new((c & 1) as f64, (c >> 1 & 1) as f64, (c >> 2 & 1) as f64));
        }
        v
    }

    #[test]
    fn unit_cube_in_64_cubed() {
        let s = set(&cube_corners());
        let t = fit_domain(&s, Dims::cube(64), 6).unwrap();
        assert_relative_eq!(t.scale, 1.0 / 51.0, max_relative = 1e-11);
        let g = to_grid(&s, &t);
        let (lo, hi) = g.bounds().unwrap();
        for a in 0..3 {
            assert_relative_eq!(lo[a], 6.0, epsilon = 1e-9);
            assert_relative_eq!(hi[a], 57.0, epsilon = 1e-9);
            assert_relative_eq!((lo[a] + hi[a]) / 2.0, 31.5, epsilon = 1e-12);
        }
    }

    #[test]
    fn single_point_goes_to_center() {
        let s = set(&[Vec3::new(3.0, -2.0, 7.0); 4]);
        let t = fit_domain(&s, Dims::new(16, 20, 24), 3).unwrap();
        assert!(t.scale.is_finite() && t.scale > 0.0);
        let q = t.point_to_grid(&Vec3::new(3.0, -2.0, 7.0));
        assert_relative_eq!(q, Vec3::new(7.5, 9.5, 11.5), epsilon = 1e-12);
    }

    #[test]
    fn planar_input_inflates_flat_axis() {
        let s = set(&[Vec3::new(0.0, 0.0, 1.0), Vec3::new(2.0, 1.0, 1.0)]);
        let t = fit_domain(&s, Dims::cube(32), 6).unwrap();
        // x extent 2 fits 19 cells; the flat z axis is inflated to 2 as well.
        assert_relative_eq!(t.scale, 2.0 / 19.0, max_relative = 1e-11);
    }

    #[test]
    fn already_fitted_points_are_near_identity() {
        let s = set(&[Vec3::new(6.0, 6.0, 6.0), Vec3::new(57.0, 57.0, 57.0)]);
        let t = fit_domain(&s, Dims::cube(64), 6).unwrap();
        assert_relative_eq!(t.scale, 1.0, max_relative = 1e-11);
        assert_relative_eq!(t.origin, Vec3::zeros(), epsilon = 1e-9);
    }

    #[test]
    fn too_small_for_margin() {
        let s = set(&cube_corners());
        assert!(matches!(
            fit_domain(&s, Dims::cube(14), 6),
            Err(Error::DomainTooSmall { .. })
        ));
        assert!(fit_domain(&s, Dims::cube(15), 6).is_ok());
        assert!(matches!(
            fit_domain(&SampleSet::default(), Dims::cube(32), 2),
            Err(Error::EmptySamples)
        ));
    }

    #[test]
    fn transform_definition() {
        let t = DomainTransform {
            origin: Vec3::new(1.0, 2.0, 3.0),
            scale: 0.25,
            dims: Dims::cube(32),
        };
        assert_eq!(t.point_to_grid(&t.origin), Vec3::zeros());
        let p = t.origin + Vec3::new(10.0, 10.0, 10.0) * t.scale;
        assert_relative_eq!(t.point_to_grid(&p), Vec3::new(10.0, 10.0, 10.0), epsilon = 1e-12);
    }

    fn cloud(raw: &[[f64; 3]]) -> Vec<Vec3> {
        raw.iter().map(|r| Vec3::new(r[0], r[1], r[2])).collect()
    }

    proptest! {
        #[test]
        fn containment_and_round_trip(raw in prop::collection::vec(prop::array::uniform3(-100.0f64..100.0), 1..60)) {
            let s = set(&cloud(&raw));
            let dims = Dims::new(40, 33, 50);
            let margin = 6;
            let t = fit_domain(&s, dims, margin).unwrap();
            let g = to_grid(&s, &t);
            for p in g.points() {
                for a in 0..3 {
                    prop_assert!(p[a] >= margin as f64);
                    prop_assert!(p[a] <= (dims.0[a] - 1 - margin) as f64);
                }
            }
            let back = to_world(&g, &t);
            for (a, b) in back.points().zip(s.points()) {
                prop_assert!((a - b).norm() <= 1e-12 * b.norm().max(t.scale * 64.0));
            }
        }

        #[test]
        fn similarity_equivariance(
            raw in prop::collection::vec(prop::array::uniform3(-10.0f64..10.0), 2..40),
            shift in prop::array::uniform3(-50.0f64..50.0),
            log_s in -3.0f64..3.0,
        ) {
            // General rotations change the bounding box; lattice quarter-turns
            // are covered separately below.
            let pts = cloud(&raw);
            let s = 10f64.powf(log_s);
            let moved: Vec<Vec3> = pts.iter().map(|p| p * s + Vec3::from(shift)).collect();
            let dims = Dims::cube(48);
            let a = to_grid(&set(&pts), &fit_domain(&set(&pts), dims, 6).unwrap());
            let b = to_grid(&set(&moved), &fit_domain(&set(&moved), dims, 6).unwrap());
            for (p, q) in a.points().zip(b.points()) {
                prop_assert!((p - q).norm() < 1e-10);
            }
        }
    }

    #[test]
    fn quarter_turn_equivariance() {
        let pts = cube_corners()
            .into_iter()
            .chain([Vec3::new(0.3, 0.1, 0.9), Vec3::new(0.7, 0.2, 0.4)])
            .collect::<Vec<_>>();
        let rot = Rotation3::from_axis_angle(&Unit::new_normalize(Vec3::z()), std::f64::consts::FRAC_PI_2);
        let rotated: Vec<Vec3> = pts.iter().map(|p| rot * p).collect();
        let dims = Dims::cube(40);
        let a = to_grid(&set(&pts), &fit_domain(&set(&pts), dims, 6).unwrap());
        let b = to_grid(&set(&rotated), &fit_domain(&set(&rotated), dims, 6).unwrap());
        let c = Vec3::from([19.5; 3]);
        for (p, q) in a.points().zip(b.points()) {
            let expected = rot * (p - c) + c;
            assert!((expected - q).norm() < 1e-10);
        }
    }
}

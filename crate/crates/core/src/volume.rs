//! Regular-grid containers and resampling.
//!
//! All grids share an x-fastest linear layout: voxel `(i, j, k)` lives at
//! `i + nx * (j + ny * k)`. Grid coordinates are in cell units with the
//! vertex `(0, 0, 0)` at the origin.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use crate::{Error, Result, Vec3};

/// Grid resolution `(nx, ny, nz)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Dims(pub [usize; 3]);

impl Dims {
    pub fn new(nx: usize, ny: usize, nz: usize) -> Self {
        Dims([nx, ny, nz])
    }

    pub fn cube(n: usize) -> Self {
        Dims([n, n, n])
    }

    #[inline]
    pub fn nx(&self) -> usize {
        self.0[0]
    }

    #[inline]
    pub fn ny(&self) -> usize {
        self.0[1]
    }

    #[inline]
    pub fn nz(&self) -> usize {
        self.0[2]
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.0[0] * self.0[1] * self.0[2]
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    #[inline]
    pub fn index(&self, i: usize, j: usize, k: usize) -> usize {
        i + self.0[0] * (j + self.0[1] * k)
    }

    #[inline]
    pub fn coords(&self, idx: usize) -> [usize; 3] {
        let i = idx % self.0[0];
        let rest = idx / self.0[0];
        [i, rest % self.0[1], rest / self.0[1]]
    }

    /// Linear index of a signed coordinate, or `None` when it falls outside.
    #[inline]
    pub fn checked_index(&self, c: [isize; 3]) -> Option<usize> {
        if c.iter()
            .zip(self.0.iter())
            .all(|(&v, &n)| v >= 0 && (v as usize) < n)
        {
            Some(self.index(c[0] as usize, c[1] as usize, c[2] as usize))
        } else {
            None
        }
    }

    /// Linear-index stride along `axis`.
    #[inline]
    pub fn stride(&self, axis: usize) -> usize {
        match axis {
            0 => 1,
            1 => self.0[0],
            _ => self.0[0] * self.0[1],
        }
    }

    /// Dimensions of the next coarser pyramid level.
    pub fn halved(&self) -> Dims {
        Dims(self.0.map(|n| n.div_ceil(2)))
    }

    pub fn contains_point(&self, p: &Vec3) -> bool {
        (0..3).all(|a| p[a] >= 0.0 && p[a] <= (self.0[a] - 1) as f64)
    }
}

impl From<[usize; 3]> for Dims {
    fn from(d: [usize; 3]) -> Self {
        Dims(d)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScalarGrid {
    dims: Dims,
    values: Vec<f64>,
}

impl ScalarGrid {
    pub fn zeros(dims: Dims) -> Self {
        Self::filled(dims, 0.0)
    }

    pub fn filled(dims: Dims, value: f64) -> Self {
        ScalarGrid {
            dims,
            values: vec![value; dims.len()],
        }
    }

    pub fn from_values(dims: Dims, values: Vec<f64>) -> Result<Self> {
        if values.len() != dims.len() {
            return Err(Error::InvalidParameter(format!(
                "{} values supplied for a {:?} grid",
                values.len(),
                dims.0
            )));
        }
        Ok(ScalarGrid { dims, values })
    }

    /// Grid whose value at `(i, j, k)` is `f(i, j, k)`.
    pub fn from_fn(dims: Dims, mut f: impl FnMut(usize, usize, usize) -> f64) -> Self {
        let mut values = Vec::with_capacity(dims.len());
        for k in 0..dims.nz() {
            for j in 0..dims.ny() {
                for i in 0..dims.nx() {
                    values.push(f(i, j, k));
                }
            }
        }
        ScalarGrid { dims, values }
    }

    pub fn dims(&self) -> Dims {
        self.dims
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize, k: usize) -> f64 {
        self.values[self.dims.index(i, j, k)]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, k: usize, v: f64) {
        let idx = self.dims.index(i, j, k);
        self.values[idx] = v;
    }

    pub fn sum(&self) -> f64 {
        self.values.iter().sum()
    }

    pub fn dot(&self, other: &ScalarGrid) -> Result<f64> {
        check_same_dims(self.dims, other.dims)?;
        Ok(self
            .values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| a * b)
            .sum())
    }

    pub fn max_abs_diff(&self, other: &ScalarGrid) -> Result<f64> {
        check_same_dims(self.dims, other.dims)?;
        Ok(self
            .values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max))
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> ScalarGrid {
        ScalarGrid {
            dims: self.dims,
            values: self.values.iter().map(|&v| f(v)).collect(),
        }
    }

    /// First voxel holding a NaN or infinity.
    pub fn first_non_finite(&self) -> Option<[usize; 3]> {
        self.values
            .iter()
            .position(|v| !v.is_finite())
            .map(|idx| self.dims.coords(idx))
    }

    /// Writes the grid as three little-endian `u32` dimensions followed by
    /// the values as little-endian `f32`, x fastest.
    pub fn write_raw_f32(&self, path: &Path) -> Result<()> {
        let file = File::create(path).map_err(|e| Error::io(path, e))?;
        let mut w = BufWriter::new(file);
        let mut write = || -> std::io::Result<()> {
            for n in self.dims.0 {
                w.write_all(&(n as u32).to_le_bytes())?;
            }
            for &v in &self.values {
                w.write_all(&(v as f32).to_le_bytes())?;
            }
            w.flush()
        };
        write().map_err(|e| Error::io(path, e))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct VectorGrid {
    dims: Dims,
    values: Vec<Vec3>,
}

impl VectorGrid {
    pub fn zeros(dims: Dims) -> Self {
        VectorGrid {
            dims,
            values: vec![Vec3::zeros(); dims.len()],
        }
    }

    pub fn from_fn(dims: Dims, mut f: impl FnMut(usize, usize, usize) -> Vec3) -> Self {
        let mut values = Vec::with_capacity(dims.len());
        for k in 0..dims.nz() {
            for j in 0..dims.ny() {
                for i in 0..dims.nx() {
                    values.push(f(i, j, k));
                }
            }
        }
        VectorGrid { dims, values }
    }

    pub fn dims(&self) -> Dims {
        self.dims
    }

    pub fn values(&self) -> &[Vec3] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [Vec3] {
        &mut self.values
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize, k: usize) -> Vec3 {
        self.values[self.dims.index(i, j, k)]
    }

    pub fn sum(&self) -> Vec3 {
        self.values.iter().sum()
    }
}

pub(crate) fn check_same_dims(a: Dims, b: Dims) -> Result<()> {
    if a == b {
        Ok(())
    } else {
        Err(Error::DimMismatch {
            left: a.0,
            right: b.0,
        })
    }
}

/// Linear indices and weights of the eight cell corners surrounding `p`.
///
/// Corner `c` (bits x, y, z) sits at `base + (c & 1, c >> 1 & 1, c >> 2 & 1)`.
/// Points on the upper boundary fall into the last cell. An axis with a
/// single vertex puts all of its weight on that vertex.
pub fn trilinear_weights(p: &Vec3, dims: Dims) -> Result<[(usize, f64); 8]> {
    if !p.iter().all(|v| v.is_finite()) || !dims.contains_point(p) {
        return Err(Error::OutsideGrid {
            point: [p.x, p.y, p.z],
            dims: dims.0,
        });
    }
    let mut base = [0usize; 3];
    let mut frac = [0.0f64; 3];
    let mut step = [0usize; 3];
    for a in 0..3 {
        let n = dims.0[a];
        if n == 1 {
            continue;
        }
        let b = (p[a].floor() as usize).min(n - 2);
        base[a] = b;
        frac[a] = p[a] - b as f64;
        step[a] = dims.stride(a);
    }
    let origin = dims.index(base[0], base[1], base[2]);
    let mut out = [(0usize, 0.0f64); 8];
    for (c, slot) in out.iter_mut().enumerate() {
        let mut w = 1.0;
        let mut idx = origin;
        for a in 0..3 {
            if c >> a & 1 == 1 {
                w *= frac[a];
                idx += step[a];
            } else {
                w *= 1.0 - frac[a];
            }
        }
        *slot = (idx, w);
    }
    Ok(out)
}

/// Trilinear interpolation of `g` at grid coordinate `p`.
pub fn sample_trilinear(g: &ScalarGrid, p: &Vec3) -> Result<f64> {
    let weights = trilinear_weights(p, g.dims)?;
    Ok(weights.iter().map(|&(idx, w)| w * g.values[idx]).sum())
}

/// Halves each axis by summing 2x2x2 blocks; partial blocks at odd
/// boundaries sum the cells that exist.
pub fn downsample_sum(g: &ScalarGrid) -> Result<ScalarGrid> {
    let dims = g.dims;
    if dims.0.iter().any(|&n| n < 2) {
        return Err(Error::GridTooSmall {
            dims: dims.0,
            reason: "downsampling needs at least 2 cells per axis".into(),
        });
    }
    let coarse = dims.halved();
    let mut out = ScalarGrid::zeros(coarse);
    for k in 0..dims.nz() {
        for j in 0..dims.ny() {
            let row = coarse.index(0, j / 2, k / 2);
            let src = dims.index(0, j, k);
            for i in 0..dims.nx() {
                out.values[row + i / 2] += g.values[src + i];
            }
        }
    }
    Ok(out)
}

/// Interpolates a coarse pyramid level onto the next finer level.
///
/// Coarse vertex `I` aggregates fine vertices `2I` and `2I + 1`, so it sits
/// at fine coordinate `2I + 1/2`; fine vertex `i` therefore reads the coarse
/// grid at `(i - 1/2) / 2`, clamped to the coarse extent.
pub fn upsample_trilinear(g: &ScalarGrid, target: Dims) -> Result<ScalarGrid> {
    if target.halved() != g.dims {
        return Err(Error::DimMismatch {
            left: g.dims.0,
            right: target.0,
        });
    }
    let limits = g.dims.0.map(|n| (n - 1) as f64);
    let mut out = ScalarGrid::zeros(target);
    let mut idx = 0;
    for k in 0..target.nz() {
        for j in 0..target.ny() {
            for i in 0..target.nx() {
                let p = Vec3::new(
                    ((i as f64 - 0.5) * 0.5).clamp(0.0, limits[0]),
                    ((j as f64 - 0.5) * 0.5).clamp(0.0, limits[1]),
                    ((k as f64 - 0.5) * 0.5).clamp(0.0, limits[2]),
                );
                out.values[idx] = sample_trilinear(g, &p)?;
                idx += 1;
            }
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn weights_on_vertex() {
        let dims = Dims::cube(8);
        let w = trilinear_weights(&Vec3::new(3.0, 4.0, 5.0), dims).unwrap();
        let target = dims.index(3, 4, 5);
        for (idx, wt) in w {
            if idx == target {
                assert_eq!(wt, 1.0);
            } else {
                assert_eq!(wt, 0.0);
            }
        }
    }

    #[test]
    fn weights_at_cell_center() {
        let w = trilinear_weights(&Vec3::new(2.5, 2.5, 2.5), Dims::cube(6)).unwrap();
        assert!(w.iter().all(|&(_, wt)| wt == 0.125));
    }

    #[test]
    fn upper_boundary_clamps_into_last_cell() {
        let dims = Dims::new(4, 5, 6);
        let w = trilinear_weights(&Vec3::new(3.0, 4.0, 5.0), dims).unwrap();
        let hit: Vec<_> = w.iter().filter(|(_, wt)| *wt > 0.0).collect();
        assert_eq!(hit.len(), 1);
        assert_eq!(hit[0].0, dims.index(3, 4, 5));
    }

    #[test]
    fn outside_point_is_rejected() {
        let dims = Dims::cube(4);
        assert!(matches!(
            trilinear_weights(&Vec3::new(3.0001, 1.0, 1.0), dims),
            Err(Error::OutsideGrid { .. })
        ));
        assert!(trilinear_weights(&Vec3::new(-1e-9, 1.0, 1.0), dims).is_err());
        assert!(trilinear_weights(&Vec3::new(f64::NAN, 1.0, 1.0), dims).is_err());
    }

    #[test]
    fn weights_reproduce_coordinates() {
        let dims = Dims::new(7, 9, 5);
        let gx = ScalarGrid::from_fn(dims, |i, _, _| i as f64);
        let gy = ScalarGrid::from_fn(dims, |_, j, _| j as f64);
        let gz = ScalarGrid::from_fn(dims, |_, _, k| k as f64);
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..200 {
            let p = Vec3::new(
                rng.random_range(0.0..6.0),
                rng.random_range(0.0..8.0),
                rng.random_range(0.0..4.0),
            );
            assert_relative_eq!(sample_trilinear(&gx, &p).unwrap(), p.x, epsilon = 1e-12);
            assert_relative_eq!(sample_trilinear(&gy, &p).unwrap(), p.y, epsilon = 1e-12);
            assert_relative_eq!(sample_trilinear(&gz, &p).unwrap(), p.z, epsilon = 1e-12);
        }
    }

    #[test]
    fn partition_of_unity_million_points() {
        let dims = Dims::new(11, 13, 17);
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let mut worst = 0.0f64;
        for _ in 0..1_000_000 {
            let p = Vec3::new(
                rng.random_range(0.0..=10.0),
                rng.random_range(0.0..=12.0),
                rng.random_range(0.0..=16.0),
            );
            let s: f64 = trilinear_weights(&p, dims).unwrap().iter().map(|w| w.1).sum();
            worst = worst.max((s - 1.0).abs());
        }
        assert!(worst < 1e-14, "max deviation {worst}");
    }

    #[test]
    fn sample_constant_and_ramp() {
        let dims = Dims::cube(5);
        let c = ScalarGrid::filled(dims, 3.25);
        assert_relative_eq!(
            sample_trilinear(&c, &Vec3::new(1.3, 2.7, 0.1)).unwrap(),
            3.25,
            epsilon = 1e-15
        );
        let ramp = ScalarGrid::from_fn(dims, |i, _, _| i as f64);
        assert_eq!(sample_trilinear(&ramp, &Vec3::new(2.5, 0.0, 0.0)).unwrap(), 2.5);
    }

    #[test]
    fn sample_on_vertex_returns_vertex_value() {
        let dims = Dims::cube(6);
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let g = ScalarGrid::from_fn(dims, |_, _, _| rng.random_range(-1.0..1.0));
        assert_eq!(
            sample_trilinear(&g, &Vec3::new(2.0, 5.0, 1.0)).unwrap(),
            g.get(2, 5, 1)
        );
    }

    #[test]
    fn trilinear_polynomials_reproduced() {
        let dims = Dims::new(6, 7, 8);
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let c: Vec<f64> = (0..8).map(|_| rng.random_range(-2.0..2.0)).collect();
        let poly = |x: f64, y: f64, z: f64| {
            c[0] + c[1] * x + c[2] * y + c[3] * z + c[4] * x * y + c[5] * x * z + c[6] * y * z
                + c[7] * x * y * z
        };
        let g = ScalarGrid::from_fn(dims, |i, j, k| poly(i as f64, j as f64, k as f64));
        for _ in 0..500 {
            let p = Vec3::new(
                rng.random_range(0.0..5.0),
                rng.random_range(0.0..6.0),
                rng.random_range(0.0..7.0),
            );
            let exact = poly(p.x, p.y, p.z);
            let got = sample_trilinear(&g, &p).unwrap();
            assert!((got - exact).abs() <= 1e-12 * exact.abs().max(1.0));
        }
    }

    #[test]
    fn downsample_examples() {
        let ones = ScalarGrid::filled(Dims::cube(2), 1.0);
        let d = downsample_sum(&ones).unwrap();
        assert_eq!(d.dims(), Dims::cube(1));
        assert_eq!(d.values(), &[8.0]);

        let mut g = ScalarGrid::zeros(Dims::cube(4));
        g.set(0, 0, 0, 5.0);
        let d = downsample_sum(&g).unwrap();
        assert_eq!(d.dims(), Dims::cube(2));
        assert_eq!(d.get(0, 0, 0), 5.0);
        assert_eq!(d.sum(), 5.0);
    }

    #[test]
    fn downsample_odd_dims_sums_partial_blocks() {
        let g = ScalarGrid::filled(Dims::new(3, 5, 2), 1.0);
        let d = downsample_sum(&g).unwrap();
        assert_eq!(d.dims(), Dims::new(2, 3, 1));
        assert_eq!(d.get(0, 0, 0), 8.0);
        assert_eq!(d.get(1, 0, 0), 4.0);
        assert_eq!(d.get(1, 2, 0), 2.0);
        assert_eq!(d.sum(), 30.0);
    }

    #[test]
    fn downsample_rejects_thin_axis() {
        assert!(downsample_sum(&ScalarGrid::zeros(Dims::new(4, 1, 4))).is_err());
    }

    #[test]
    fn downsample_conserves_integer_totals_exactly() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let g = ScalarGrid::from_fn(Dims::new(9, 8, 7), |_, _, _| rng.random_range(-50..50) as f64);
        assert_eq!(downsample_sum(&g).unwrap().sum(), g.sum());
    }

    #[test]
    fn upsample_constant_and_ramp() {
        let c = ScalarGrid::filled(Dims::new(3, 4, 5), -2.5);
        let up = upsample_trilinear(&c, Dims::new(6, 7, 9)).unwrap();
        assert!(up.values().iter().all(|&v| (v + 2.5).abs() < 1e-15));

        let ramp = ScalarGrid::from_values(Dims::new(2, 1, 1), vec![0.0, 1.0]).unwrap();
        let up = upsample_trilinear(&ramp, Dims::new(3, 1, 1)).unwrap();
        assert_eq!(up.values(), &[0.0, 0.25, 0.75]);
        let up = upsample_trilinear(&ramp, Dims::new(4, 2, 2)).unwrap();
        assert_eq!(up.get(3, 1, 1), 1.0);
        assert_eq!(up.get(1, 0, 1), 0.25);
        assert_eq!(up.get(2, 0, 1), 0.75);
    }

    #[test]
    fn upsample_rejects_incompatible_dims() {
        let g = ScalarGrid::zeros(Dims::cube(4));
        assert!(upsample_trilinear(&g, Dims::cube(10)).is_err());
    }

    #[test]
    fn pyramid_round_trip_of_constant() {
        let fine = Dims::new(8, 6, 10);
        let g = ScalarGrid::filled(fine, 0.7);
        let coarse = downsample_sum(&g).unwrap().map(|v| v / 8.0);
        let back = upsample_trilinear(&coarse, fine).unwrap();
        assert!(back.max_abs_diff(&g).unwrap() < 1e-15);
    }

    #[test]
    fn raw_dump_layout() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("g.raw");
        let g = ScalarGrid::from_fn(Dims::new(2, 3, 1), |i, j, _| (i + 10 * j) as f64);
        g.write_raw_f32(&path).unwrap();
        let bytes = std::fs::read(&path).unwrap();
        assert_eq!(bytes.len(), 12 + 6 * 4);
        assert_eq!(u32::from_le_bytes(bytes[4..8].try_into().unwrap()), 3);
        let last = f32::from_le_bytes(bytes[32..36].try_into().unwrap());
        assert_eq!(last, 21.0);
    }

    proptest! {
        #[test]
        fn downsample_conserves_float_totals(seed in any::<u64>(), nx in 2usize..9, ny in 2usize..9, nz in 2usize..9) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let g = ScalarGrid::from_fn(Dims::new(nx, ny, nz), |_, _, _| rng.random_range(0.0..1.0));
            let total = g.sum();
            let d = downsample_sum(&g).unwrap().sum();
            prop_assert!((d - total).abs() <= 1e-12 * total.abs().max(1.0));
        }
    }
}

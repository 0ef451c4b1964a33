//! The orientation field and its divergence.
//!
//! Sample normals are splatted onto the grid with trilinear weights, blurred
//! by repeated normalized 3-tap box filters (an approximation of a Gaussian),
//! and differentiated with central differences. The resulting divergence is
//! the linear term of the reconstruction energy.

use crate::io::{CoordinateSpace, SampleSet};
use crate::volume::trilinear_weights;
use crate::{Dims, Error, Result, ScalarGrid, VectorGrid};

/// Box filter passes used by default.
pub const DEFAULT_SMOOTHING_PASSES: usize = 3;

/// Accumulates every sample normal onto its eight surrounding grid vertices.
pub fn splat_normals(samples: &SampleSet, dims: Dims) -> Result<VectorGrid> {
    debug_assert_eq!(samples.space, CoordinateSpace::Grid);
    let mut grid = VectorGrid::zeros(dims);
    let values = grid.values_mut();
    for s in samples.iter() {
        for (idx, w) in trilinear_weights(&s.point, dims)? {
            values[idx] += s.normal * w;
        }
    }
    Ok(grid)
}

/// One normalized `[1, 1, 1] / 3` pass along `axis` with zero padding.
fn box_pass(src: &[crate::Vec3], dst: &mut [crate::Vec3], dims: Dims, axis: usize) {
    let n = dims.0[axis];
    let stride = dims.stride(axis);
    let third = 1.0 / 3.0;
    for (idx, out) in dst.iter_mut().enumerate() {
        let c = dims.coords(idx)[axis];
        let mut acc = src[idx];
        if c > 0 {
            acc += src[idx - stride];
        }
        if c + 1 < n {
            acc += src[idx + stride];
        }
        *out = acc * third;
    }
}

/// Separable box blur repeated `passes` times per axis.
pub fn box_smooth(g: &VectorGrid, passes: usize) -> Result<VectorGrid> {
    if passes == 0 {
        return Err(Error::InvalidParameter("smoothing passes must be at least 1".into()));
    }
    let dims = g.dims();
    let mut cur = g.clone();
    let mut tmp = VectorGrid::zeros(dims);
    for _ in 0..passes {
        for axis in 0..3 {
            box_pass(cur.values(), tmp.values_mut(), dims, axis);
            std::mem::swap(&mut cur, &mut tmp);
        }
    }
    Ok(cur)
}

/// Central-difference divergence with spacing 1; one-sided differences on
/// the boundary faces.
pub fn divergence(g: &VectorGrid) -> Result<ScalarGrid> {
    let dims = g.dims();
    if dims.0.iter().any(|&n| n < 3) {
        return Err(Error::GridTooSmall {
            dims: dims.0,
            reason: "divergence needs at least 3 vertices per axis".into(),
        });
    }
    let v = g.values();
    let mut out = ScalarGrid::zeros(dims);
    for (idx, o) in out.values_mut().iter_mut().enumerate() {
        let c = dims.coords(idx);
        let mut div = 0.0;
        for axis in 0..3 {
            let s = dims.stride(axis);
            let n = dims.0[axis];
            div += if c[axis] == 0 {
                v[idx + s][axis] - v[idx][axis]
            } else if c[axis] == n - 1 {
                v[idx][axis] - v[idx - s][axis]
            } else {
                0.5 * (v[idx + s][axis] - v[idx - s][axis])
            };
        }
        *o = div;
    }
    Ok(out)
}

/// Divergence of the smoothed splatted orientation field.
pub fn build_divergence(samples: &SampleSet, dims: Dims, passes: usize) -> Result<ScalarGrid> {
    let splat = splat_normals(samples, dims)?;
    divergence(&box_smooth(&splat, passes)?)
}

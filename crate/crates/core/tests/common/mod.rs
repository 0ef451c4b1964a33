//! Reference implementations used by several test targets.
#![allow(dead_code)]

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use smoothrecon::{Dims, EnergyModel, ScalarGrid};

/// One finite-difference row type: weight and taps `(offset, coefficient)`.
pub struct RefStencil {
    pub weight: f64,
    pub taps: Vec<([isize; 3], f64)>,
}

fn unit(axis: usize, s: isize) -> [isize; 3] {
    let mut o = [0; 3];
    o[axis] = s;
    o
}

/// Derivative rows written out by hand for each quadratic model.
pub fn ref_stencils(model: EnergyModel) -> Vec<RefStencil> {
    let mut out = Vec::new();
    match model {
        EnergyModel::Membrane => {
            for a in 0..3 {
                out.push(RefStencil { weight: 1.0, taps: vec![(unit(a, 1), 1.0), ([0, 0, 0], -1.0)] });
            }
        }
        EnergyModel::SecondOrder | EnergyModel::SecondOrderMixed => {
            for a in 0..3 {
                out.push(RefStencil {
                    weight: 1.0,
                    taps: vec![(unit(a, -1), 1.0), ([0, 0, 0], -2.0), (unit(a, 1), 1.0)],
                });
            }
            if model == EnergyModel::SecondOrderMixed {
                for (a, b) in [(0, 1), (0, 2), (1, 2)] {
                    let mut taps = Vec::new();
                    for (sa, sb, c) in [(1, 1, 0.25), (1, -1, -0.25), (-1, 1, -0.25), (-1, -1, 0.25)] {
                        let mut o = [0; 3];
                        o[a] = sa;
                        o[b] = sb;
                        taps.push((o, c));
                    }
                    out.push(RefStencil { weight: 2.0, taps });
                }
            }
        }
        EnergyModel::TotalVariation => panic!("no quadratic form"),
    }
    out
}

fn shifted(dims: Dims, v: [usize; 3], o: [isize; 3]) -> Option<usize> {
    dims.checked_index([v[0] as isize + o[0], v[1] as isize + o[1], v[2] as isize + o[2]])
}

/// `sum_v sum_s w_s (D_s x)_v^2` with taps outside the grid read as zero.
pub fn literal_smoothness(x: &ScalarGrid, model: EnergyModel) -> f64 {
    let dims = x.dims();
    let mut e = 0.0;
    for s in ref_stencils(model) {
        for idx in 0..dims.len() {
            let v = dims.coords(idx);
            let d: f64 = s
                .taps
                .iter()
                .filter_map(|&(o, c)| shifted(dims, v, o).map(|j| c * x.values()[j]))
                .sum();
            e += s.weight * d * d;
        }
    }
    e
}

/// Dense `A = sum_s w_s D_s^T D_s`.
pub fn dense_operator(dims: Dims, model: EnergyModel) -> DMatrix<f64> {
    let n = dims.len();
    let mut a = DMatrix::zeros(n, n);
    for s in ref_stencils(model) {
        for idx in 0..n {
            let v = dims.coords(idx);
            let row: Vec<(usize, f64)> =
                s.taps.iter().filter_map(|&(o, c)| shifted(dims, v, o).map(|j| (j, c))).collect();
            for &(i, ci) in &row {
                for &(j, cj) in &row {
                    a[(i, j)] += s.weight * ci * cj;
                }
            }
        }
    }
    a
}

/// Solves `A x = -b / (2 lambda)` by LU.
pub fn dense_minimizer(b: &ScalarGrid, model: EnergyModel, lambda: f64) -> Vec<f64> {
    let a = dense_operator(b.dims(), model);
    let rhs = DVector::from_iterator(b.values().len(), b.values().iter().map(|v| -v / (2.0 * lambda)));
    a.lu().solve(&rhs).expect("nonsingular").iter().copied().collect()
}

pub fn random_grid(dims: Dims, seed: u64) -> ScalarGrid {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    ScalarGrid::from_fn(dims, |_, _, _| rng.random_range(-1.0..1.0))
}

/// [`literal_smoothness`] summed only over voxels at least `margin` cells
/// from every face.
pub fn interior_smoothness(x: &ScalarGrid, model: EnergyModel, margin: usize) -> f64 {
    let dims = x.dims();
    let mut e = 0.0;
    for s in ref_stencils(model) {
        for idx in 0..dims.len() {
            let v = dims.coords(idx);
            if (0..3).any(|a| v[a] < margin || v[a] + margin >= dims.0[a]) {
                continue;
            }
            let d: f64 = s.taps.iter().map(|&(o, c)| c * x.values()[shifted(dims, v, o).unwrap()]).sum();
            e += s.weight * d * d;
        }
    }
    e
}

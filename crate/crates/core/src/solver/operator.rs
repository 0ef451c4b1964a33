//! Matrix-free smoothness operators.
//!
//! Every smoothness energy here is a weighted sum of squared finite
//! differences, `E_s(x) = sum_r w_r sum_v rho_v (D_r x)_v^2`, where each
//! difference operator `D_r` is a small stencil evaluated at every grid
//! vertex `v` with values outside the grid read as zero. The matching
//! symmetric operator is `A = sum_r w_r D_r^T diag(rho) D_r`, so that
//! `E_s = x^T A x`.

use super::EnergyModel;
use crate::{Dims, Error, Result, ScalarGrid};

/// One finite-difference operator: taps `(offset, coefficient)` and the
/// weight its squared output carries in the energy.
#[derive(Debug, Clone)]
pub(crate) struct DiffStencil {
    pub weight: f64,
    pub taps: Vec<([isize; 3], f64)>,
}

fn unit(axis: usize, s: isize) -> [isize; 3] {
    let mut o = [0; 3];
    o[axis] = s;
    o
}

/// Forward first differences `f(v + e_d) - f(v)`.
fn first_differences() -> Vec<DiffStencil> {
    (0..3)
        .map(|d| DiffStencil {
            weight: 1.0,
            taps: vec![([0, 0, 0], -1.0), (unit(d, 1), 1.0)],
        })
        .collect()
}

/// Pure second differences `f(v - e_d) - 2 f(v) + f(v + e_d)`.
fn pure_second_differences() -> Vec<DiffStencil> {
    (0..3)
        .map(|d| DiffStencil {
            weight: 1.0,
            taps: vec![(unit(d, -1), 1.0), ([0, 0, 0], -2.0), (unit(d, 1), 1.0)],
        })
        .collect()
}

/// Mixed central differences for the xy, xz and yz pairs, each entering the
/// energy twice.
fn mixed_second_differences() -> Vec<DiffStencil> {
    [(0, 1), (0, 2), (1, 2)]
        .into_iter()
        .map(|(a, b)| {
            let at = |sa: isize, sb: isize| {
                let mut o = [0; 3];
                o[a] = sa;
                o[b] = sb;
                o
            };
            DiffStencil {
                weight: 2.0,
                taps: vec![
                    (at(1, 1), 0.25),
                    (at(1, -1), -0.25),
                    (at(-1, 1), -0.25),
                    (at(-1, -1), 0.25),
                ],
            }
        })
        .collect()
}

pub(crate) fn stencils_for(model: EnergyModel) -> Result<Vec<DiffStencil>> {
    Ok(match model {
        EnergyModel::Membrane => first_differences(),
        EnergyModel::SecondOrder => pure_second_differences(),
        EnergyModel::SecondOrderMixed => {
            let mut s = pure_second_differences();
            s.extend(mixed_second_differences());
            s
        }
        EnergyModel::TotalVariation => return Err(Error::NonQuadratic(model)),
    })
}

#[inline]
fn offset(c: [usize; 3], o: [isize; 3]) -> [isize; 3] {
    [
        c[0] as isize + o[0],
        c[1] as isize + o[1],
        c[2] as isize + o[2],
    ]
}

#[inline]
fn sub(c: [usize; 3], o: [isize; 3]) -> [isize; 3] {
    [
        c[0] as isize - o[0],
        c[1] as isize - o[1],
        c[2] as isize - o[2],
    ]
}

/// One row of `A` as linear offsets from the row's voxel.
#[derive(Debug, Clone, Default)]
struct RowStencil {
    taps: Vec<(isize, f64)>,
    diag: f64,
}

/// Distance class of a coordinate: its distances to both faces, capped at 2.
/// Rows of unweighted operators depend only on the class of each axis.
fn position_class(c: usize, n: usize) -> (usize, usize) {
    (c.min(2), (n - 1 - c).min(2))
}

/// The symmetric positive definite operator of a quadratic smoothness
/// energy on a fixed grid, applied without assembling a matrix.
#[derive(Debug, Clone)]
pub struct SmoothnessOperator {
    dims: Dims,
    stencils: Vec<DiffStencil>,
    /// Per-vertex weight on every difference row; `None` means 1.
    row_weights: Option<Vec<f64>>,
    /// Row stencils per combination of axis classes (unweighted only).
    rows: Vec<RowStencil>,
    /// Class id of every coordinate, per axis.
    axis_class: [Vec<u8>; 3],
    class_counts: [usize; 3],
}

impl SmoothnessOperator {
    pub fn new(model: EnergyModel, dims: Dims) -> Result<Self> {
        Ok(Self::from_stencils(dims, stencils_for(model)?, None))
    }

    /// Membrane operator with a weight on every difference row, used by the
    /// reweighted total-variation iterations.
    pub fn weighted_membrane(dims: Dims, row_weights: Vec<f64>) -> Result<Self> {
        if row_weights.len() != dims.len() {
            return Err(Error::InvalidParameter("row weight count must match the grid".into()));
        }
        Ok(Self::from_stencils(dims, first_differences(), Some(row_weights)))
    }

    pub(crate) fn from_stencils(dims: Dims, stencils: Vec<DiffStencil>, row_weights: Option<Vec<f64>>) -> Self {
        let reach = stencils
            .iter()
            .flat_map(|s| s.taps.iter())
            .flat_map(|(o, _)| o.iter())
            .map(|v| v.unsigned_abs())
            .max()
            .unwrap_or(0);
        debug_assert!(reach <= 1, "position classes assume taps within one cell");

        let mut axis_class: [Vec<u8>; 3] = Default::default();
        let mut representatives: [Vec<usize>; 3] = Default::default();
        for a in 0..3 {
            let n = dims.0[a];
            let mut seen: Vec<(usize, usize)> = Vec::new();
            for c in 0..n {
                let key = position_class(c, n);
                let id = match seen.iter().position(|k| *k == key) {
                    Some(id) => id,
                    None => {
                        seen.push(key);
                        representatives[a].push(c);
                        seen.len() - 1
                    }
                };
                axis_class[a].push(id as u8);
            }
        }
        let class_counts = representatives.clone().map(|r| r.len());

        let mut op = SmoothnessOperator {
            dims,
            stencils,
            row_weights: None,
            rows: Vec::new(),
            axis_class,
            class_counts,
        };
        if row_weights.is_none() {
            for &ck in &representatives[2] {
                for &cj in &representatives[1] {
                    for &ci in &representatives[0] {
                        op.rows.push(op.assemble_row([ci, cj, ck]));
                    }
                }
            }
        }
        op.row_weights = row_weights;
        op
    }

    /// Row of `A` at voxel `c` from the difference stencils.
    fn assemble_row(&self, c: [usize; 3]) -> RowStencil {
        let mut taps: Vec<([isize; 3], f64)> = Vec::new();
        for st in &self.stencils {
            for &(o, coef) in &st.taps {
                let v = sub(c, o);
                if self.dims.checked_index(v).is_none() {
                    continue;
                }
                for &(o2, c2) in &st.taps {
                    let w = [v[0] + o2[0], v[1] + o2[1], v[2] + o2[2]];
                    if self.dims.checked_index(w).is_none() {
                        continue;
                    }
                    let rel = [w[0] - c[0] as isize, w[1] - c[1] as isize, w[2] - c[2] as isize];
                    let value = st.weight * coef * c2;
                    match taps.iter_mut().find(|(r, _)| *r == rel) {
                        Some(slot) => slot.1 += value,
                        None => taps.push((rel, value)),
                    }
                }
            }
        }
        taps.retain(|(_, v)| *v != 0.0);
        let diag = taps.iter().find(|(r, _)| *r == [0, 0, 0]).map_or(0.0, |(_, v)| *v);
        let (s1, s2) = (self.dims.stride(1) as isize, self.dims.stride(2) as isize);
        RowStencil {
            taps: taps.iter().map(|(r, v)| (r[0] + r[1] * s1 + r[2] * s2, *v)).collect(),
            diag,
        }
    }

    pub fn dims(&self) -> Dims {
        self.dims
    }

    #[inline]
    fn row_weight(&self, idx: usize) -> f64 {
        self.row_weights.as_ref().map_or(1.0, |w| w[idx])
    }

    /// `(D x)_v` with zero padding.
    #[inline]
    fn difference(&self, st: &DiffStencil, x: &[f64], v: [usize; 3]) -> f64 {
        st.taps
            .iter()
            .filter_map(|&(o, c)| self.dims.checked_index(offset(v, o)).map(|q| c * x[q]))
            .sum()
    }

    #[inline]
    fn row_stencil(&self, c: [usize; 3]) -> &RowStencil {
        let [n0, n1, _] = self.class_counts;
        let id = self.axis_class[0][c[0]] as usize
            + n0 * (self.axis_class[1][c[1]] as usize + n1 * self.axis_class[2][c[2]] as usize);
        &self.rows[id]
    }

    /// `((A x)_u, A_uu)` at one voxel.
    #[inline]
    pub(crate) fn row(&self, x: &[f64], idx: usize, c: [usize; 3]) -> (f64, f64) {
        if self.row_weights.is_none() {
            let r = self.row_stencil(c);
            let base = idx as isize;
            let ax = r.taps.iter().map(|&(o, coef)| coef * x[(base + o) as usize]).sum();
            return (ax, r.diag);
        }
        let mut ax = 0.0;
        let mut diag = 0.0;
        for st in &self.stencils {
            for &(o, coef) in &st.taps {
                let Some(v) = self.dims.checked_index(sub(c, o)) else {
                    continue;
                };
                let w = st.weight * self.row_weight(v);
                ax += w * coef * self.difference(st, x, self.dims.coords(v));
                diag += w * coef * coef;
            }
        }
        (ax, diag)
    }

    /// Diagonal entry `A_uu`.
    pub fn diagonal(&self, idx: usize) -> f64 {
        let c = self.dims.coords(idx);
        if self.row_weights.is_none() {
            return self.row_stencil(c).diag;
        }
        let mut diag = 0.0;
        for st in &self.stencils {
            for &(o, coef) in &st.taps {
                if let Some(v) = self.dims.checked_index(sub(c, o)) {
                    diag += st.weight * self.row_weight(v) * coef * coef;
                }
            }
        }
        diag
    }

    pub fn apply(&self, x: &ScalarGrid) -> Result<ScalarGrid> {
        crate::volume::check_same_dims(self.dims, x.dims())?;
        let xs = x.values();
        let mut out = ScalarGrid::zeros(self.dims);
        let ys = out.values_mut();
        for st in &self.stencils {
            for v in 0..self.dims.len() {
                let cv = self.dims.coords(v);
                let d = self.difference(st, xs, cv);
                if d == 0.0 {
                    continue;
                }
                let w = st.weight * self.row_weight(v) * d;
                for &(o, coef) in &st.taps {
                    if let Some(u) = self.dims.checked_index(offset(cv, o)) {
                        ys[u] += w * coef;
                    }
                }
            }
        }
        Ok(out)
    }

    /// `x^T A x`, evaluated as the weighted sum of squared differences.
    pub fn quadratic_energy(&self, x: &ScalarGrid) -> Result<f64> {
        crate::volume::check_same_dims(self.dims, x.dims())?;
        let xs = x.values();
        let mut e = 0.0;
        for st in &self.stencils {
            for v in 0..self.dims.len() {
                let d = self.difference(st, xs, self.dims.coords(v));
                e += st.weight * self.row_weight(v) * d * d;
            }
        }
        Ok(e)
    }
}

/// Squared forward-difference gradient magnitude at every vertex, zero
/// padded, matching the membrane difference rows.
pub(crate) fn gradient_norms_squared(x: &ScalarGrid) -> Vec<f64> {
    let dims = x.dims();
    let xs = x.values();
    (0..dims.len())
        .map(|v| {
            let c = dims.coords(v);
            (0..3)
                .map(|a| {
                    let next = if c[a] + 1 < dims.0[a] {
                        xs[v + dims.stride(a)]
                    } else {
                        0.0
                    };
                    let g = next - xs[v];
                    g * g
                })
                .sum()
        })
        .collect()
}

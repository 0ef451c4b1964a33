use super::tables::{CORNERS, EDGES, TRI_TABLE};
use super::TriangleMesh;
use crate::io::DomainTransform;
use crate::volume::sample_trilinear;
use crate::{Result, ScalarGrid, Vec3, VectorGrid};

/// Extracts the `gamma` level set of `f` with vertices in world space.
///
/// Values at or above `gamma` count as inside; triangles are wound so their
/// normals point toward smaller values.
pub fn marching_cubes(f: &ScalarGrid, gamma: f64, t: &DomainTransform) -> TriangleMesh {
    let mut mesh = marching_cubes_grid(f, gamma);
    mesh.map_vertices(|v| t.point_to_world(v));
    mesh
}

/// [`marching_cubes`] in grid coordinates.
pub fn marching_cubes_grid(f: &ScalarGrid, gamma: f64) -> TriangleMesh {
    let dims = f.dims();
    let values = f.values();
    let [nx, ny, nz] = dims.0;
    if nx < 2 || ny < 2 || nz < 2 {
        return TriangleMesh::default();
    }
    let corner_offsets = CORNERS.map(|c| c[0] + c[1] * dims.stride(1) + c[2] * dims.stride(2));

    // Edge key: linear index of the edge's lower vertex times 3 plus its axis.
    let edge_key = |base: usize, e: usize| -> u64 {
        let [a, b] = EDGES[e];
        let (lo, hi) = if corner_offsets[a] < corner_offsets[b] { (a, b) } else { (b, a) };
        let axis = (0..3).find(|&d| CORNERS[lo][d] != CORNERS[hi][d]).expect("edge spans one axis");
        (base + corner_offsets[lo]) as u64 * 3 + axis as u64
    };

    let mut tri_keys: Vec<[u64; 3]> = Vec::new();
    for k in 0..nz - 1 {
        for j in 0..ny - 1 {
            for i in 0..nx - 1 {
                let base = dims.index(i, j, k);
                let mut case = 0usize;
                for (c, off) in corner_offsets.iter().enumerate() {
                    if values[base + off] < gamma {
                        case |= 1 << c;
                    }
                }
                if case == 0 || case == 255 {
                    continue;
                }
                for tri in TRI_TABLE[case].chunks_exact(3) {
                    if tri[0] < 0 {
                        break;
                    }
                    tri_keys.push([tri[0], tri[1], tri[2]].map(|e| edge_key(base, e as usize)));
                }
            }
        }
    }

    let mut keys: Vec<u64> = tri_keys.iter().flatten().copied().collect();
    keys.sort_unstable();
    keys.dedup();
    let vertices = keys
        .iter()
        .map(|&key| {
            let lo = (key / 3) as usize;
            let axis = (key % 3) as usize;
            let hi = lo + dims.stride(axis);
            let (fa, fb) = (values[lo], values[hi]);
            let t = (gamma - fa) / (fb - fa);
            let c = dims.coords(lo);
            let mut p = Vec3::new(c[0] as f64, c[1] as f64, c[2] as f64);
            p[axis] += t;
            p
        })
        .collect();
    let index_of = |key: u64| keys.binary_search(&key).expect("key collected above") as u32;
    let triangles = tri_keys.iter().map(|t| t.map(index_of)).collect();
    TriangleMesh::new(vertices, triangles)
}

/// Outward unit normals at grid-space points: the negated central-difference
/// gradient of `f`, interpolated trilinearly. One-sided differences are used
/// on the grid faces.
pub fn vertex_normals(f: &ScalarGrid, points: &[Vec3]) -> Result<Vec<Vec3>> {
    let dims = f.dims();
    let grad = VectorGrid::from_fn(dims, |i, j, k| {
        let c = [i, j, k];
        let mut g = Vec3::zeros();
        for a in 0..3 {
            let n = dims.0[a];
            if n < 2 {
                continue;
            }
            let at = |d: usize| {
                let mut q = c;
                q[a] = d;
                f.get(q[0], q[1], q[2])
            };
            g[a] = if c[a] == 0 {
                at(1) - at(0)
            } else if c[a] == n - 1 {
                at(n - 1) - at(n - 2)
            } else {
                0.5 * (at(c[a] + 1) - at(c[a] - 1))
            };
        }
        g
    });
    let comps: [ScalarGrid; 3] = std::array::from_fn(|a| {
        ScalarGrid::from_values(dims, grad.values().iter().map(|g| g[a]).collect()).expect("same dims")
    });
    points
        .iter()
        .map(|p| {
            let g = Vec3::new(
                sample_trilinear(&comps[0], p)?,
                sample_trilinear(&comps[1], p)?,
                sample_trilinear(&comps[2], p)?,
            );
            let n = -g;
            let len = n.norm();
            Ok(if len > 0.0 { n / len } else { n })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::Dims;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::collections::BTreeSet;

    fn sphere_sdf(n: usize, r: f64) -> ScalarGrid {
        let c = (n as f64 - 1.0) / 2.0;
        ScalarGrid::from_fn(Dims::cube(n), |i, j, k| {
            r - Vec3::new(i as f64 - c, j as f64 - c, k as f64 - c).norm()
        })
    }

    #[test]
    fn flat_field_is_empty() {
        let m = marching_cubes_grid(&ScalarGrid::zeros(Dims::cube(5)), 0.5);
        assert!(m.vertices.is_empty() && m.triangles.is_empty());
    }

    #[test]
    fn single_corner_case() {
        // Corner 0 of one cell above gamma, the rest below.
        let mut f = ScalarGrid::filled(Dims::cube(2), 0.0);
        f.set(0, 0, 0, 1.0);
        let m = marching_cubes_grid(&f, 0.25);
        assert_eq!(m.triangles.len(), 1);
        let mut pts: Vec<[f64; 3]> = m.vertices.iter().map(|v| [v.x, v.y, v.z]).collect();
        pts.sort_by(|a, b| a.partial_cmp(b).unwrap());
        assert_eq!(pts, vec![[0.0, 0.0, 0.75], [0.0, 0.75, 0.0], [0.75, 0.0, 0.0]]);
        // Faces away from the inside corner.
        let n = m.face_normal(0);
        assert!(n.dot(&Vec3::new(1.0, 1.0, 1.0)) > 0.0);
    }

    #[test]
    fn sphere_is_watertight_and_accurate() {
        let f = sphere_sdf(32, 10.0);
        let m = marching_cubes_grid(&f, 0.0);
        let t = m.topology();
        assert!(t.is_watertight());
        assert!(t.consistently_oriented);
        assert_eq!(t.euler_characteristic(), 2);
        let c = Vec3::from([15.5; 3]);
        for v in &m.vertices {
            assert!(((v - c).norm() - 10.0).abs() < 0.05);
        }
        assert!(m.signed_volume() > 0.0);
        let volume = 4.0 / 3.0 * std::f64::consts::PI * 1000.0;
        assert!((m.signed_volume() - volume).abs() / volume < 0.02);
    }

    #[test]
    fn world_mapping_applies_transform() {
        let f = sphere_sdf(12, 3.0);
        let t = DomainTransform {
            origin: Vec3::new(1.0, 2.0, 3.0),
            scale: 0.5,
            dims: f.dims(),
        };
        let g = marching_cubes_grid(&f, 0.0);
        let w = marching_cubes(&f, 0.0, &t);
        assert_eq!(g.triangles, w.triangles);
        for (a, b) in g.vertices.iter().zip(&w.vertices) {
            assert_eq!(t.point_to_world(a), *b);
        }
    }

    #[test]
    fn vertices_sit_at_interpolated_crossings() {
        let dims = Dims::cube(7);
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let f = ScalarGrid::from_fn(dims, |_, _, _| rng.random_range(-1.0..1.0));
        let gamma = 0.1;
        let m = marching_cubes_grid(&f, gamma);
        assert!(!m.triangles.is_empty());
        for v in &m.vertices {
            let base = v.map(|x| x.floor());
            let axis = (0..3).find(|&a| v[a] != base[a]).unwrap_or(0);
            let lo = [base.x as usize, base.y as usize, base.z as usize];
            let mut hi = lo;
            hi[axis] += 1;
            let fa = f.get(lo[0], lo[1], lo[2]);
            let fb = f.get(hi[0], hi[1], hi[2]);
            assert!((fa < gamma) != (fb < gamma));
            assert!((v[axis] - base[axis] - (gamma - fa) / (fb - fa)).abs() < 1e-12);
        }
    }

    #[test]
    fn normals_point_outward_on_sphere() {
        let f = sphere_sdf(20, 6.0);
        let m = marching_cubes_grid(&f, 0.0);
        let n = vertex_normals(&f, &m.vertices).unwrap();
        let c = Vec3::from([9.5; 3]);
        for (v, n) in m.vertices.iter().zip(&n) {
            assert!(n.dot(&(v - c).normalize()) > 0.99);
            assert!((n.norm() - 1.0).abs() < 1e-12);
        }
    }

    fn vertex_set(m: &TriangleMesh) -> Vec<[f64; 3]> {
        let mut v: Vec<[f64; 3]> = m.vertices.iter().map(|p| [p.x, p.y, p.z]).collect();
        v.sort_by(|a, b| a.partial_cmp(b).unwrap());
        v
    }

    fn canonical(t: [u32; 3]) -> [u32; 3] {
        let r = (0..3).min_by_key(|&i| t[i]).unwrap();
        [t[r], t[(r + 1) % 3], t[(r + 2) % 3]]
    }

    #[test]
    fn sign_flip_reverses_winding_on_sphere() {
        let f = sphere_sdf(24, 7.3);
        let a = marching_cubes_grid(&f, 0.0);
        let b = marching_cubes_grid(&f.map(|v| -v), -0.0);
        assert_eq!(a.vertices, b.vertices);
        let fa: BTreeSet<[u32; 3]> = a.triangles.iter().map(|&t| canonical(t)).collect();
        let fb: BTreeSet<[u32; 3]> = b.triangles.iter().map(|&t| canonical([t[0], t[2], t[1]])).collect();
        assert_eq!(fa, fb);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(32))]
        #[test]
        fn shift_and_flip_symmetries(seed in any::<u64>(), gamma in -0.5f64..0.5) {
            let dims = Dims::cube(6);
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let f = ScalarGrid::from_fn(dims, |_, _, _| rng.random_range(-1.0..1.0));
            let a = marching_cubes_grid(&f, gamma);
            let shifted = marching_cubes_grid(&f.map(|v| v - gamma), 0.0);
            prop_assert_eq!(a.vertices.len(), shifted.vertices.len());
            prop_assert_eq!(&a.triangles, &shifted.triangles);
            for (p, q) in a.vertices.iter().zip(&shifted.vertices) {
                prop_assert!((p - q).norm() < 1e-12);
            }
            let flipped = marching_cubes_grid(&f.map(|v| -v), -gamma);
            let (va, vf) = (vertex_set(&a), vertex_set(&flipped));
            prop_assert_eq!(va.len(), vf.len());
            for (p, q) in va.iter().zip(&vf) {
                for d in 0..3 {
                    prop_assert!((p[d] - q[d]).abs() < 1e-12);
                }
            }
            // Orientation flips: every consistently wound closed piece
            // changes the sign of its enclosed volume.
            let inner = |m: &TriangleMesh| -> f64 {
                (0..m.triangles.len()).map(|t| {
                    let [p, q, r] = m.corners(t);
                    let c = Vec3::from([2.5; 3]);
                    (p - c).dot(&(q - c).cross(&(r - c)))
                }).sum()
            };
            if a.topology().is_watertight() {
                prop_assert!((inner(&a) + inner(&flipped)).abs() < 1e-9 * inner(&a).abs().max(1.0));
            }
        }
    }
}

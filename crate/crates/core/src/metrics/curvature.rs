//! Discrete curvature: angle deficit for Gaussian curvature and the
//! cotangent Laplacian for mean curvature, both over one third of the
//! incident triangle area.

use std::f64::consts::PI;

use crate::{Result, TriangleMesh, Vec3};

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct CurvatureStats {
    /// Mean of `|H|` over interior vertices.
    pub avg_mean: f64,
    pub max_mean: f64,
    /// Mean of `K` (signed).
    pub avg_gauss: f64,
    /// Largest `|K|`.
    pub max_gauss: f64,
    /// Vertices that contributed.
    pub vertices: usize,
    /// Used vertices on a boundary or non-manifold edge, left out.
    pub excluded_vertices: usize,
    pub degenerate_triangles: usize,
}

/// Per-vertex `(|H|, K)`; `None` for excluded vertices.
#[derive(Debug, Clone, Default)]
pub struct VertexCurvature {
    pub values: Vec<Option<(f64, f64)>>,
    pub degenerate_triangles: usize,
    pub excluded_vertices: usize,
}

fn is_degenerate(tri: &[Vec3; 3]) -> bool {
    let n = (tri[1] - tri[0]).cross(&(tri[2] - tri[0])).norm();
    let scale = (tri[1] - tri[0])
        .norm_squared()
        .max((tri[2] - tri[0]).norm_squared())
        .max((tri[2] - tri[1]).norm_squared());
    !(n > 1e-14 * scale) || scale == 0.0
}

pub fn vertex_curvatures(mesh: &TriangleMesh) -> Result<VertexCurvature> {
    mesh.validate()?;
    let n = mesh.vertices.len();
    let mut area = vec![0.0; n];
    let mut angle = vec![0.0; n];
    let mut lap = vec![Vec3::zeros(); n];
    let mut used = vec![false; n];
    let mut excluded = vec![false; n];
    for (&(a, b), &count) in &mesh.edge_incidence() {
        if count != 2 {
            excluded[a as usize] = true;
            excluded[b as usize] = true;
        }
    }

    let mut degenerate = 0;
    for t in 0..mesh.triangles.len() {
        let idx = mesh.triangles[t].map(|i| i as usize);
        for &i in &idx {
            used[i] = true;
        }
        let p = mesh.corners(t);
        if is_degenerate(&p) {
            degenerate += 1;
            continue;
        }
        let third = (p[1] - p[0]).cross(&(p[2] - p[0])).norm() / 6.0;
        for c in 0..3 {
            let (i, j, k) = (c, (c + 1) % 3, (c + 2) % 3);
            let u = p[j] - p[i];
            let v = p[k] - p[i];
            let cross = u.cross(&v).norm();
            let dot = u.dot(&v);
            area[idx[i]] += third;
            angle[idx[i]] += cross.atan2(dot);
            // The angle at i is opposite edge jk.
            let cot = dot / cross;
            lap[idx[j]] += (p[k] - p[j]) * cot;
            lap[idx[k]] += (p[j] - p[k]) * cot;
        }
    }

    let mut excluded_count = 0;
    let values = (0..n)
        .map(|v| {
            if !used[v] {
                return None;
            }
            if excluded[v] || area[v] <= 0.0 {
                excluded_count += 1;
                return None;
            }
            let h = lap[v].norm() / (4.0 * area[v]);
            let k = (2.0 * PI - angle[v]) / area[v];
            Some((h, k))
        })
        .collect();
    Ok(VertexCurvature {
        values,
        degenerate_triangles: degenerate,
        excluded_vertices: excluded_count,
    })
}

pub fn curvature_stats(mesh: &TriangleMesh) -> Result<CurvatureStats> {
    let vc = vertex_curvatures(mesh)?;
    let mut s = CurvatureStats {
        excluded_vertices: vc.excluded_vertices,
        degenerate_triangles: vc.degenerate_triangles,
        ..Default::default()
    };
    for (h, k) in vc.values.iter().flatten() {
        s.vertices += 1;
        s.avg_mean += h;
        s.avg_gauss += k;
        s.max_mean = s.max_mean.max(*h);
        s.max_gauss = s.max_gauss.max(k.abs());
    }
    if s.vertices > 0 {
        s.avg_mean /= s.vertices as f64;
        s.avg_gauss /= s.vertices as f64;
    }
    Ok(s)
}

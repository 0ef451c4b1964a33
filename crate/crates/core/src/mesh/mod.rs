//! Indexed triangle meshes, isovalue selection and surface extraction.

mod marching_cubes;
mod tables;

use std::collections::HashMap;

pub use marching_cubes::{marching_cubes, marching_cubes_grid, vertex_normals};

use crate::io::{CoordinateSpace, DomainTransform, SampleSet};
use crate::volume::sample_trilinear;
use crate::{Error, Result, ScalarGrid, Vec3};

/// Indexed triangle mesh.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct TriangleMesh {
    pub vertices: Vec<Vec3>,
    pub triangles: Vec<[u32; 3]>,
    pub normals: Option<Vec<Vec3>>,
}

impl TriangleMesh {
    pub fn new(vertices: Vec<Vec3>, triangles: Vec<[u32; 3]>) -> Self {
        TriangleMesh {
            vertices,
            triangles,
            normals: None,
        }
    }

    pub fn is_empty(&self) -> bool {
        self.triangles.is_empty()
    }

    /// Checks index ranges, repeated corners and the normal count.
    pub fn validate(&self) -> Result<()> {
        let n = self.vertices.len();
        for t in &self.triangles {
            for &i in t {
                if i as usize >= n {
                    return Err(Error::BadIndex {
                        index: i as usize,
                        vertex_count: n,
                    });
                }
            }
            if t[0] == t[1] || t[1] == t[2] || t[0] == t[2] {
                return Err(Error::InvalidParameter(format!("triangle {t:?} repeats a vertex")));
            }
        }
        if let Some(normals) = &self.normals {
            if normals.len() != n {
                return Err(Error::InvalidParameter(format!(
                    "{} normals for {n} vertices",
                    normals.len()
                )));
            }
        }
        Ok(())
    }

    pub fn corners(&self, t: usize) -> [Vec3; 3] {
        self.triangles[t].map(|i| self.vertices[i as usize])
    }

    /// Unnormalized face normal `(b - a) x (c - a)`, twice the area.
    pub fn face_normal(&self, t: usize) -> Vec3 {
        let [a, b, c] = self.corners(t);
        (b - a).cross(&(c - a))
    }

    pub fn area(&self) -> f64 {
        (0..self.triangles.len()).map(|t| self.face_normal(t).norm() * 0.5).sum()
    }

    /// Signed enclosed volume; positive for closed meshes wound outward.
    pub fn signed_volume(&self) -> f64 {
        (0..self.triangles.len())
            .map(|t| {
                let [a, b, c] = self.corners(t);
                a.dot(&b.cross(&c)) / 6.0
            })
            .sum()
    }

    pub fn map_vertices(&mut self, f: impl Fn(&Vec3) -> Vec3) {
        for v in &mut self.vertices {
            *v = f(v);
        }
    }

    /// Undirected edges with the number of triangles using each.
    pub fn edge_incidence(&self) -> HashMap<(u32, u32), usize> {
        let mut edges = HashMap::with_capacity(self.triangles.len() * 3 / 2);
        for t in &self.triangles {
            for e in 0..3 {
                let (a, b) = (t[e], t[(e + 1) % 3]);
                *edges.entry((a.min(b), a.max(b))).or_insert(0) += 1;
            }
        }
        edges
    }

    pub fn topology(&self) -> Topology {
        let edges = self.edge_incidence();
        let boundary_edges = edges.values().filter(|&&c| c == 1).count();
        let nonmanifold_edges = edges.values().filter(|&&c| c > 2).count();
        let mut directed = HashMap::with_capacity(self.triangles.len() * 3);
        for t in &self.triangles {
            for e in 0..3 {
                *directed.entry((t[e], t[(e + 1) % 3])).or_insert(0usize) += 1;
            }
        }
        let consistently_oriented = directed.values().all(|&c| c == 1)
            && directed
                .keys()
                .all(|&(a, b)| edges.get(&(a.min(b), a.max(b))) != Some(&2) || directed.contains_key(&(b, a)));
        let used = self.used_vertices();
        let vertices = used.iter().filter(|&&u| u).count();
        Topology {
            vertices,
            edges: edges.len(),
            faces: self.triangles.len(),
            boundary_edges,
            nonmanifold_edges,
            components: self.components(),
            consistently_oriented,
        }
    }

    fn used_vertices(&self) -> Vec<bool> {
        let mut used = vec![false; self.vertices.len()];
        for t in &self.triangles {
            for &i in t {
                used[i as usize] = true;
            }
        }
        used
    }

    /// Connected components of triangles sharing a vertex.
    pub fn components(&self) -> usize {
        self.component_labels().1
    }

    /// Per-vertex component label in `0..count`, in order of first
    /// appearance; unused vertices get `u32::MAX`. Returns the labels and
    /// the count.
    pub fn component_labels(&self) -> (Vec<u32>, usize) {
        let mut parent: Vec<u32> = (0..self.vertices.len() as u32).collect();
        fn find(p: &mut [u32], mut x: u32) -> u32 {
            while p[x as usize] != x {
                p[x as usize] = p[p[x as usize] as usize];
                x = p[x as usize];
            }
            x
        }
        for t in &self.triangles {
            let r0 = find(&mut parent, t[0]);
            for &i in &t[1..] {
                let r = find(&mut parent, i);
                parent[r as usize] = r0;
            }
        }
        let used = self.used_vertices();
        let mut label_of_root: HashMap<u32, u32> = HashMap::new();
        let mut labels = vec![u32::MAX; self.vertices.len()];
        for v in 0..self.vertices.len() as u32 {
            if used[v as usize] {
                let r = find(&mut parent, v);
                let next = label_of_root.len() as u32;
                labels[v as usize] = *label_of_root.entry(r).or_insert(next);
            }
        }
        (labels, label_of_root.len())
    }

    /// Keeps the components for which `keep(vertices of component)` holds,
    /// dropping their unused vertices. Vertex order is preserved.
    pub fn retain_components(&self, mut keep: impl FnMut(&[usize]) -> bool) -> TriangleMesh {
        let (labels, count) = self.component_labels();
        let mut members: Vec<Vec<usize>> = vec![Vec::new(); count];
        for (v, &l) in labels.iter().enumerate() {
            if l != u32::MAX {
                members[l as usize].push(v);
            }
        }
        let kept: Vec<bool> = members.iter().map(|m| keep(m)).collect();
        let mut remap = vec![u32::MAX; self.vertices.len()];
        let mut vertices = Vec::new();
        let mut normals = self.normals.as_ref().map(|_| Vec::new());
        for (v, &l) in labels.iter().enumerate() {
            if l != u32::MAX && kept[l as usize] {
                remap[v] = vertices.len() as u32;
                vertices.push(self.vertices[v]);
                if let (Some(out), Some(src)) = (normals.as_mut(), self.normals.as_ref()) {
                    out.push(src[v]);
                }
            }
        }
        let triangles = self
            .triangles
            .iter()
            .filter(|t| kept[labels[t[0] as usize] as usize])
            .map(|t| t.map(|i| remap[i as usize]))
            .collect();
        TriangleMesh {
            vertices,
            triangles,
            normals,
        }
    }
}

/// Structural summary of a mesh; counts only vertices used by triangles.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Topology {
    pub vertices: usize,
    pub edges: usize,
    pub faces: usize,
    pub boundary_edges: usize,
    pub nonmanifold_edges: usize,
    pub components: usize,
    pub consistently_oriented: bool,
}

impl Topology {
    pub fn euler_characteristic(&self) -> i64 {
        self.vertices as i64 - self.edges as i64 + self.faces as i64
    }

    /// Every edge shared by exactly two triangles.
    pub fn is_watertight(&self) -> bool {
        self.faces > 0 && self.boundary_edges == 0 && self.nonmanifold_edges == 0
    }

    /// Total genus of a closed mesh, `None` if it is not watertight.
    pub fn genus(&self) -> Option<i64> {
        if !self.is_watertight() {
            return None;
        }
        Some((2 * self.components as i64 - self.euler_characteristic()) / 2)
    }
}

/// Mean of the trilinearly interpolated field over the sample positions.
pub fn select_isovalue(f: &ScalarGrid, samples: &SampleSet) -> Result<f64> {
    debug_assert_eq!(samples.space, CoordinateSpace::Grid);
    if samples.is_empty() {
        return Err(Error::EmptySamples);
    }
    let mut sum = 0.0;
    for p in samples.points() {
        sum += sample_trilinear(f, p)?;
    }
    Ok(sum / samples.len() as f64)
}

/// Maps grid-space vertices to world space.
pub fn mesh_to_world(mesh: &mut TriangleMesh, t: &DomainTransform) {
    mesh.map_vertices(|v| t.point_to_world(v));
}

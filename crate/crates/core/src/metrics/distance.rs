//! Exact point-to-mesh distance with a bounding volume hierarchy.

use crate::{Error, Result, TriangleMesh, Vec3};

/// Closest point on triangle `abc` to `p` (Ericson, Real-Time Collision
/// Detection, 5.1.5).
pub fn closest_point_on_triangle(p: &Vec3, a: &Vec3, b: &Vec3, c: &Vec3) -> Vec3 {
    let ab = b - a;
    let ac = c - a;
    let ap = p - a;
    let d1 = ab.dot(&ap);
    let d2 = ac.dot(&ap);
    if d1 <= 0.0 && d2 <= 0.0 {
        return *a;
    }
    let bp = p - b;
    let d3 = ab.dot(&bp);
    let d4 = ac.dot(&bp);
    if d3 >= 0.0 && d4 <= d3 {
        return *b;
    }
    let vc = d1 * d4 - d3 * d2;
    if vc <= 0.0 && d1 >= 0.0 && d3 <= 0.0 {
        let v = d1 / (d1 - d3);
        return a + ab * v;
    }
    let cp = p - c;
    let d5 = ab.dot(&cp);
    let d6 = ac.dot(&cp);
    if d6 >= 0.0 && d5 <= d6 {
        return *c;
    }
    let vb = d5 * d2 - d1 * d6;
    if vb <= 0.0 && d2 >= 0.0 && d6 <= 0.0 {
        let w = d2 / (d2 - d6);
        return a + ac * w;
    }
    let va = d3 * d6 - d5 * d4;
    if va <= 0.0 && (d4 - d3) >= 0.0 && (d5 - d6) >= 0.0 {
        let w = (d4 - d3) / ((d4 - d3) + (d5 - d6));
        return b + (c - b) * w;
    }
    let denom = 1.0 / (va + vb + vc);
    let v = vb * denom;
    let w = vc * denom;
    a + ab * v + ac * w
}

pub fn point_triangle_distance_squared(p: &Vec3, tri: &[Vec3; 3]) -> f64 {
    (p - closest_point_on_triangle(p, &tri[0], &tri[1], &tri[2])).norm_squared()
}

#[derive(Debug, Clone, Copy)]
struct Aabb {
    lo: Vec3,
    hi: Vec3,
}

impl Aabb {
    fn empty() -> Self {
        Aabb {
            lo: Vec3::repeat(f64::INFINITY),
            hi: Vec3::repeat(f64::NEG_INFINITY),
        }
    }

    fn grow(&mut self, p: &Vec3) {
        self.lo = self.lo.inf(p);
        self.hi = self.hi.sup(p);
    }

    fn distance_squared(&self, p: &Vec3) -> f64 {
        let d = (self.lo - p).sup(&(p - self.hi)).sup(&Vec3::zeros());
        d.norm_squared()
    }
}

#[derive(Debug, Clone)]
enum Node {
    Leaf { bounds: Aabb, start: usize, end: usize },
    Inner { bounds: Aabb, left: usize, right: usize },
}

impl Node {
    fn bounds(&self) -> &Aabb {
        match self {
            Node::Leaf { bounds, .. } | Node::Inner { bounds, .. } => bounds,
        }
    }
}

const LEAF_SIZE: usize = 4;

/// Median-split hierarchy over a mesh's triangles.
#[derive(Debug, Clone)]
pub struct TriangleBvh {
    triangles: Vec<[Vec3; 3]>,
    order: Vec<usize>,
    nodes: Vec<Node>,
}

impl TriangleBvh {
    pub fn new(mesh: &TriangleMesh) -> Result<Self> {
        if mesh.triangles.is_empty() {
            return Err(Error::EmptyMesh);
        }
        mesh.validate()?;
        let triangles: Vec<[Vec3; 3]> = (0..mesh.triangles.len()).map(|t| mesh.corners(t)).collect();
        let centroids: Vec<Vec3> = triangles.iter().map(|t| (t[0] + t[1] + t[2]) / 3.0).collect();
        let mut bvh = TriangleBvh {
            order: (0..triangles.len()).collect(),
            triangles,
            nodes: Vec::new(),
        };
        bvh.build(&centroids, 0, bvh.order.len());
        Ok(bvh)
    }

    fn build(&mut self, centroids: &[Vec3], start: usize, end: usize) -> usize {
        let mut bounds = Aabb::empty();
        let mut cbounds = Aabb::empty();
        for &t in &self.order[start..end] {
            for v in &self.triangles[t] {
                bounds.grow(v);
            }
            cbounds.grow(&centroids[t]);
        }
        let id = self.nodes.len();
        if end - start <= LEAF_SIZE {
            self.nodes.push(Node::Leaf { bounds, start, end });
            return id;
        }
        self.nodes.push(Node::Leaf { bounds, start, end });
        let ext = cbounds.hi - cbounds.lo;
        let axis = ext.imax();
        let mid = start + (end - start) / 2;
        self.order[start..end].select_nth_unstable_by(mid - start, |&a, &b| {
            centroids[a][axis].total_cmp(&centroids[b][axis]).then(a.cmp(&b))
        });
        let left = self.build(centroids, start, mid);
        let right = self.build(centroids, mid, end);
        self.nodes[id] = Node::Inner { bounds, left, right };
        id
    }

    /// Squared distance from `p` to the nearest triangle.
    pub fn nearest_distance_squared(&self, p: &Vec3) -> f64 {
        let mut best = f64::INFINITY;
        let mut stack = vec![0usize];
        while let Some(n) = stack.pop() {
            let node = &self.nodes[n];
            if node.bounds().distance_squared(p) >= best {
                continue;
            }
            match *node {
                Node::Leaf { start, end, .. } => {
                    for &t in &self.order[start..end] {
                        best = best.min(point_triangle_distance_squared(p, &self.triangles[t]));
                    }
                }
                Node::Inner { left, right, .. } => {
                    let dl = self.nodes[left].bounds().distance_squared(p);
                    let dr = self.nodes[right].bounds().distance_squared(p);
                    // Visit the nearer child first.
                    if dl < dr {
                        stack.push(right);
                        stack.push(left);
                    } else {
                        stack.push(left);
                        stack.push(right);
                    }
                }
            }
        }
        best
    }
}

/// Root mean square distance from the points to the mesh surface.
pub fn rms_distance<'a>(points: impl IntoIterator<Item = &'a Vec3>, mesh: &TriangleMesh) -> Result<f64> {
    let bvh = TriangleBvh::new(mesh)?;
    let mut sum = 0.0;
    let mut n = 0usize;
    for p in points {
        sum += bvh.nearest_distance_squared(p);
        n += 1;
    }
    if n == 0 {
        return Err(Error::EmptySamples);
    }
    Ok((sum / n as f64).sqrt())
}

/// All-pairs reference for [`rms_distance`].
pub fn rms_distance_brute_force<'a>(points: impl IntoIterator<Item = &'a Vec3>, mesh: &TriangleMesh) -> Result<f64> {
    if mesh.triangles.is_empty() {
        return Err(Error::EmptyMesh);
    }
    let tris: Vec<[Vec3; 3]> = (0..mesh.triangles.len()).map(|t| mesh.corners(t)).collect();
    let mut sum = 0.0;
    let mut n = 0usize;
    for p in points {
        sum += tris
            .iter()
            .map(|t| point_triangle_distance_squared(p, t))
            .fold(f64::INFINITY, f64::min);
        n += 1;
    }
    if n == 0 {
        return Err(Error::EmptySamples);
    }
    Ok((sum / n as f64).sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    /// Closest point by dense barycentric search, for cross-checking.
    fn sampled_distance(p: &Vec3, t: &[Vec3; 3]) -> f64 {
        let n = 400;
        let mut best = f64::INFINITY;
        for i in 0..=n {
            for j in 0..=n - i {
                let (u, v) = (i as f64 / n as f64, j as f64 / n as f64);
                let q = t[0] + (t[1] - t[0]) * u + (t[2] - t[0]) * v;
                best = best.min((p - q).norm());
            }
        }
        best
    }

    #[test]
    fn regions_of_the_triangle() {
        let t = [Vec3::zeros(), Vec3::new(2.0, 0.0, 0.0), Vec3::new(0.0, 2.0, 0.0)];
        let cases = [
            (Vec3::new(0.5, 0.5, 3.0), 3.0),
            (Vec3::new(-1.0, -1.0, 0.0), 2f64.sqrt()),
            (Vec3::new(1.0, -2.0, 0.0), 2.0),
            (Vec3::new(2.0, 2.0, 0.0), 2f64.sqrt()),
            (Vec3::new(3.0, 0.0, 4.0), 17f64.sqrt()),
        ];
        for (p, d) in &cases {
            assert!((point_triangle_distance_squared(p, &t).sqrt() - d).abs() < 1e-12, "{p:?}");
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]
        #[test]
        fn matches_dense_search(raw in prop::array::uniform12(-2.0f64..2.0)) {
            let t = [
                Vec3::new(raw[0], raw[1], raw[2]),
                Vec3::new(raw[3], raw[4], raw[5]),
                Vec3::new(raw[6], raw[7], raw[8]),
            ];
            let p = Vec3::new(raw[9], raw[10], raw[11]);
            let exact = point_triangle_distance_squared(&p, &t).sqrt();
            let sampled = sampled_distance(&p, &t);
            // The dense search only overestimates, by at most the lattice step.
            let step = (t[1] - t[0]).norm().max((t[2] - t[0]).norm()) / 400.0;
            prop_assert!(exact <= sampled + 1e-12);
            prop_assert!(sampled - exact <= 2.0 * step + 1e-12);
        }
    }

    fn random_mesh(rng: &mut ChaCha8Rng, n: usize) -> TriangleMesh {
        let mut vertices = Vec::new();
        let mut triangles = Vec::new();
        for t in 0..n {
            let c = Vec3::new(rng.random_range(-5.0..5.0), rng.random_range(-5.0..5.0), rng.random_range(-5.0..5.0));
            for _ in 0..3 {
                vertices.push(c + Vec3::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)));
            }
            let b = 3 * t as u32;
            triangles.push([b, b + 1, b + 2]);
        }
        TriangleMesh::new(vertices, triangles)
    }

    #[test]
    fn accelerated_equals_brute_force() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        for _ in 0..5 {
            let mesh = random_mesh(&mut rng, 200);
            let pts: Vec<Vec3> = (0..500)
                .map(|_| Vec3::new(rng.random_range(-7.0..7.0), rng.random_range(-7.0..7.0), rng.random_range(-7.0..7.0)))
                .collect();
            let fast = rms_distance(&pts, &mesh).unwrap();
            let slow = rms_distance_brute_force(&pts, &mesh).unwrap();
            assert!((fast - slow).abs() <= 1e-9 * slow, "{fast} vs {slow}");
        }
    }

    #[test]
    fn points_on_vertices_have_zero_distance() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let mesh = random_mesh(&mut rng, 30);
        assert_eq!(rms_distance(&mesh.vertices, &mesh).unwrap(), 0.0);
    }

    #[test]
    fn empty_inputs() {
        let mesh = TriangleMesh::default();
        assert!(matches!(rms_distance(&[Vec3::zeros()], &mesh), Err(Error::EmptyMesh)));
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let mesh = random_mesh(&mut rng, 3);
        assert!(matches!(rms_distance(&[], &mesh), Err(Error::EmptySamples)));
    }
}

use crate::surfacegen::TriMesh;
use crate::Vec3;

use super::geometry::{
    aabb_distance_sq, closest_point_barycentric, from_barycentric, ray_aabb, ray_triangle,
};

const LEAF_SIZE: usize = 4;

#[derive(Clone, Debug)]
struct Node {
    lo: Vec3,
    hi: Vec3,
    /// Leaf when `count > 0`: triangles `order[start..start + count]`.
    start: usize,
    count: usize,
    left: usize,
    right: usize,
}

/// Axis-aligned bounding volume hierarchy over a mesh's triangles.
#[derive(Clone, Debug)]
pub struct Bvh {
    nodes: Vec<Node>,
    order: Vec<usize>,
}

/// Closest triangle found by a nearest-point query.
#[derive(Clone, Copy, Debug)]
pub struct Closest {
    pub triangle: usize,
    pub barycentric: [f64; 3],
    pub point: Vec3,
    pub distance_sq: f64,
}

/// First triangle crossed by a ray.
#[derive(Clone, Copy, Debug)]
pub struct RayHit {
    pub t: f64,
    pub triangle: usize,
    pub barycentric: [f64; 3],
}

impl Bvh {
    pub fn build(mesh: &TriMesh) -> Self {
        let n = mesh.triangles.len();
        let mut order: Vec<usize> = (0..n).collect();
        let bounds: Vec<(Vec3, Vec3)> = (0..n)
            .map(|t| {
                let [a, b, c] = mesh.corners(t);
                (a.inf(&b).inf(&c), a.sup(&b).sup(&c))
            })
            .collect();
        let centroids: Vec<Vec3> = bounds.iter().map(|(lo, hi)| (lo + hi) * 0.5).collect();
        let mut nodes = Vec::with_capacity(2 * n / LEAF_SIZE + 1);
        if n > 0 {
            Self::build_node(&mut nodes, &mut order, 0, n, &bounds, &centroids);
        }
        Self { nodes, order }
    }

    fn build_node(
        nodes: &mut Vec<Node>,
        order: &mut [usize],
        start: usize,
        end: usize,
        bounds: &[(Vec3, Vec3)],
        centroids: &[Vec3],
    ) -> usize {
        let mut lo = Vec3::repeat(f64::INFINITY);
        let mut hi = Vec3::repeat(f64::NEG_INFINITY);
        let mut clo = Vec3::repeat(f64::INFINITY);
        let mut chi = Vec3::repeat(f64::NEG_INFINITY);
        for &t in &order[start..end] {
            lo = lo.inf(&bounds[t].0);
            hi = hi.sup(&bounds[t].1);
            clo = clo.inf(&centroids[t]);
            chi = chi.sup(&centroids[t]);
        }
        let id = nodes.len();
        nodes.push(Node {
            lo,
            hi,
            start,
            count: end - start,
            left: 0,
            right: 0,
        });
        if end - start <= LEAF_SIZE {
            return id;
        }
        let axis = (chi - clo).imax();
        let mid = (start + end) / 2;
        order[start..end].select_nth_unstable_by(mid - start, |&a, &b| {
            centroids[a][axis]
                .total_cmp(&centroids[b][axis])
                .then(a.cmp(&b))
        });
        let left = Self::build_node(nodes, order, start, mid, bounds, centroids);
        let right = Self::build_node(nodes, order, mid, end, bounds, centroids);
        let node = &mut nodes[id];
        node.count = 0;
        node.left = left;
        node.right = right;
        id
    }

    /// Exact closest point over all triangles. Ties go to the lowest triangle index.
    pub fn closest(&self, mesh: &TriMesh, p: &Vec3) -> Option<Closest> {
        if self.nodes.is_empty() {
            return None;
        }
        let mut best: Option<Closest> = None;
        let mut best_d = f64::INFINITY;
        let mut stack = Vec::with_capacity(64);
        stack.push(0usize);
        while let Some(id) = stack.pop() {
            let node = &self.nodes[id];
            if aabb_distance_sq(p, &node.lo, &node.hi) > best_d {
                continue;
            }
            if node.count > 0 {
                for &t in &self.order[node.start..node.start + node.count] {
                    let [a, b, c] = mesh.corners(t);
                    let w = closest_point_barycentric(p, &a, &b, &c);
                    let q = from_barycentric(&w, &a, &b, &c);
                    let d = (q - p).norm_squared();
                    let better = match best {
                        None => true,
                        Some(ref cur) => d < best_d || (d == best_d && t < cur.triangle),
                    };
                    if better {
                        best_d = d;
                        best = Some(Closest {
                            triangle: t,
                            barycentric: w,
                            point: q,
                            distance_sq: d,
                        });
                    }
                }
            } else {
                let (l, r) = (node.left, node.right);
                let dl = aabb_distance_sq(p, &self.nodes[l].lo, &self.nodes[l].hi);
                let dr = aabb_distance_sq(p, &self.nodes[r].lo, &self.nodes[r].hi);
                // Visit the nearer child first.
                if dl <= dr {
                    stack.push(r);
                    stack.push(l);
                } else {
                    stack.push(l);
                    stack.push(r);
                }
            }
        }
        best
    }

    /// Nearest crossing with `t` in `[t_min, t_max]` along `origin + t·dir`.
    pub fn raycast(
        &self,
        mesh: &TriMesh,
        origin: &Vec3,
        dir: &Vec3,
        t_min: f64,
        t_max: f64,
    ) -> Option<RayHit> {
        if self.nodes.is_empty() {
            return None;
        }
        let inv = Vec3::new(1.0 / dir.x, 1.0 / dir.y, 1.0 / dir.z);
        let mut best: Option<RayHit> = None;
        let mut best_t = t_max;
        let mut stack = Vec::with_capacity(64);
        stack.push(0usize);
        while let Some(id) = stack.pop() {
            let node = &self.nodes[id];
            if ray_aabb(origin, &inv, &node.lo, &node.hi, best_t).is_none() {
                continue;
            }
            if node.count > 0 {
                for &t in &self.order[node.start..node.start + node.count] {
                    let [a, b, c] = mesh.corners(t);
                    if let Some((s, w)) = ray_triangle(origin, dir, &a, &b, &c) {
                        if s < t_min || s > best_t {
                            continue;
                        }
                        let better = match best {
                            None => true,
                            Some(ref cur) => s < cur.t || (s == cur.t && t < cur.triangle),
                        };
                        if better {
                            best_t = s;
                            best = Some(RayHit {
                                t: s,
                                triangle: t,
                                barycentric: w,
                            });
                        }
                    }
                }
            } else {
                stack.push(node.right);
                stack.push(node.left);
            }
        }
        best
    }
}

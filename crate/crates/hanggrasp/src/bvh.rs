//! Bounding volume hierarchy for first-hit ray queries on triangle meshes.

use nalgebra::{Point3, Vector3};

use crate::mesh::TriangleMesh;

/// Self-intersection offset: hits closer than this along the ray are ignored.
pub const RAY_EPSILON: f64 = 1e-6;

/// A ray/mesh intersection.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RayHit {
    pub point: Point3<f64>,
    pub distance: f64,
    pub face: usize,
}

#[derive(Debug, Clone, Copy)]
struct Aabb {
    min: Point3<f64>,
    max: Point3<f64>,
}

impl Aabb {
    fn empty() -> Self {
        Self {
            min: Point3::new(f64::INFINITY, f64::INFINITY, f64::INFINITY),
            max: Point3::new(f64::NEG_INFINITY, f64::NEG_INFINITY, f64::NEG_INFINITY),
        }
    }

    fn grow(&mut self, p: &Point3<f64>) {
        for k in 0..3 {
            self.min[k] = self.min[k].min(p[k]);
            self.max[k] = self.max[k].max(p[k]);
        }
    }

    /// Slab test; returns entry distance or None. `inv_dir` holds 1/d per axis.
    fn hit(&self, origin: &Point3<f64>, inv_dir: &Vector3<f64>, t_max: f64) -> Option<f64> {
        let mut t0 = 0.0f64;
        let mut t1 = t_max;
        for k in 0..3 {
            let a = (self.min[k] - origin[k]) * inv_dir[k];
            let b = (self.max[k] - origin[k]) * inv_dir[k];
            let (near, far) = if a <= b { (a, b) } else { (b, a) };
            t0 = t0.max(near);
            t1 = t1.min(far);
            if t0 > t1 {
                return None;
            }
        }
        Some(t0)
    }
}

enum Node {
    Leaf {
        aabb: Aabb,
        faces: Vec<usize>,
    },
    Inner {
        aabb: Aabb,
        left: usize,
        right: usize,
    },
}

/// Immutable acceleration structure; shareable across threads.
pub struct Bvh {
    nodes: Vec<Node>,
    root: usize,
    tris: Vec<[Point3<f64>; 3]>,
}

const LEAF_SIZE: usize = 4;

impl Bvh {
    pub fn build(mesh: &TriangleMesh) -> Self {
        let tris: Vec<[Point3<f64>; 3]> = mesh
            .faces
            .iter()
            .map(|f| [mesh.vertices[f[0]], mesh.vertices[f[1]], mesh.vertices[f[2]]])
            .collect();
        let centroids: Vec<Point3<f64>> = tris
            .iter()
            .map(|t| Point3::from((t[0].coords + t[1].coords + t[2].coords) / 3.0))
            .collect();
        let mut nodes = Vec::new();
        let mut indices: Vec<usize> = (0..tris.len()).collect();
        let root = Self::build_node(&tris, &centroids, &mut indices, &mut nodes);
        Self { nodes, root, tris }
    }

    fn node_aabb(tris: &[[Point3<f64>; 3]], faces: &[usize]) -> Aabb {
        let mut aabb = Aabb::empty();
        for &f in faces {
            for p in &tris[f] {
                aabb.grow(p);
            }
        }
        aabb
    }

    fn build_node(
        tris: &[[Point3<f64>; 3]],
        centroids: &[Point3<f64>],
        faces: &mut [usize],
        nodes: &mut Vec<Node>,
    ) -> usize {
        let aabb = Self::node_aabb(tris, faces);
        if faces.len() <= LEAF_SIZE {
            nodes.push(Node::Leaf {
                aabb,
                faces: faces.to_vec(),
            });
            return nodes.len() - 1;
        }
        // Median split on the widest centroid axis.
        let mut cmin = Point3::new(f64::INFINITY, f64::INFINITY, f64::INFINITY);
        let mut cmax = Point3::new(f64::NEG_INFINITY, f64::NEG_INFINITY, f64::NEG_INFINITY);
        for &f in faces.iter() {
            for k in 0..3 {
                cmin[k] = cmin[k].min(centroids[f][k]);
                cmax[k] = cmax[k].max(centroids[f][k]);
            }
        }
        let extent = cmax - cmin;
        let axis = if extent.x >= extent.y && extent.x >= extent.z {
            0
        } else if extent.y >= extent.z {
            1
        } else {
            2
        };
        if extent[axis] <= 0.0 {
            nodes.push(Node::Leaf {
                aabb,
                faces: faces.to_vec(),
            });
            return nodes.len() - 1;
        }
        let mid = faces.len() / 2;
        faces.sort_unstable_by(|&a, &b| {
            centroids[a][axis]
                .partial_cmp(&centroids[b][axis])
                .unwrap()
                .then(a.cmp(&b))
        });
        let (lo, hi) = faces.split_at_mut(mid);
        let left = Self::build_node(tris, centroids, lo, nodes);
        let right = Self::build_node(tris, centroids, hi, nodes);
        nodes.push(Node::Inner { aabb, left, right });
        nodes.len() - 1
    }

    /// Nearest intersection with distance > RAY_EPSILON, or None.
    ///
    /// Ties on distance resolve to the lowest face index, so the answer
    /// matches a brute-force scan exactly.
    pub fn first_hit(&self, origin: &Point3<f64>, direction: &Vector3<f64>) -> Option<RayHit> {
        let inv_dir = Vector3::new(1.0 / direction.x, 1.0 / direction.y, 1.0 / direction.z);
        let mut best: Option<(f64, usize)> = None;
        let mut stack = vec![self.root];
        while let Some(idx) = stack.pop() {
            let t_max = best.map_or(f64::INFINITY, |(t, _)| t);
            match &self.nodes[idx] {
                Node::Leaf { aabb, faces } => {
                    if aabb.hit(origin, &inv_dir, t_max).is_none() {
                        continue;
                    }
                    for &f in faces {
                        if let Some(t) = ray_triangle(origin, direction, &self.tris[f]) {
                            let better = match best {
                                None => true,
                                Some((bt, bf)) => t < bt || (t == bt && f < bf),
                            };
                            if better {
                                best = Some((t, f));
                            }
                        }
                    }
                }
                Node::Inner { aabb, left, right } => {
                    if aabb.hit(origin, &inv_dir, t_max).is_none() {
                        continue;
                    }
                    stack.push(*left);
                    stack.push(*right);
                }
            }
        }
        best.map(|(distance, face)| RayHit {
            point: origin + direction * distance,
            distance,
            face,
        })
    }
}

/// Möller–Trumbore intersection; returns the ray parameter when it exceeds
/// RAY_EPSILON. Shared by the BVH and the brute-force oracle path.
pub fn ray_triangle(
    origin: &Point3<f64>,
    direction: &Vector3<f64>,
    tri: &[Point3<f64>; 3],
) -> Option<f64> {
    let e1 = tri[1] - tri[0];
    let e2 = tri[2] - tri[0];
    let pvec = direction.cross(&e2);
    let det = e1.dot(&pvec);
    if det.abs() < 1e-14 {
        return None;
    }
    let inv_det = 1.0 / det;
    let tvec = origin - tri[0];
    let u = tvec.dot(&pvec) * inv_det;
    if !(0.0..=1.0).contains(&u) {
        return None;
    }
    let qvec = tvec.cross(&e1);
    let v = direction.dot(&qvec) * inv_det;
    if v < 0.0 || u + v > 1.0 {
        return None;
    }
    let t = e2.dot(&qvec) * inv_det;
    if t > RAY_EPSILON {
        Some(t)
    } else {
        None
    }
}

/// First hit against a mesh via its BVH; the spec-level query primitive.
pub fn ray_first_hit(bvh: &Bvh, origin: &Point3<f64>, direction: &Vector3<f64>) -> Option<RayHit> {
    bvh.first_hit(origin, direction)
}

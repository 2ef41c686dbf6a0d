//! Oriented surface point clouds and deterministic Poisson-disk sampling.

use std::collections::HashMap;

use nalgebra::{Point3, Vector3};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::mesh::TriangleMesh;
use crate::transform::RigidTransform;

/// Points sampled on a mesh surface with outward unit normals.
#[derive(Debug, Clone, Default)]
pub struct SurfaceCloud {
    pub points: Vec<Point3<f64>>,
    pub normals: Vec<Vector3<f64>>,
}

impl SurfaceCloud {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Distance to the nearest cloud point (linear scan).
    pub fn nearest_distance(&self, p: &Point3<f64>) -> f64 {
        self.points
            .iter()
            .map(|q| (q - p).norm())
            .fold(f64::INFINITY, f64::min)
    }

    pub fn transformed(&self, t: &RigidTransform) -> SurfaceCloud {
        SurfaceCloud {
            points: self.points.iter().map(|p| t.apply_point(p)).collect(),
            normals: self.normals.iter().map(|n| t.apply_vector(n)).collect(),
        }
    }
}

fn cell_of(p: &Point3<f64>, cell: f64) -> (i64, i64, i64) {
    (
        (p.x / cell).floor() as i64,
        (p.y / cell).floor() as i64,
        (p.z / cell).floor() as i64,
    )
}

/// Dart-throwing Poisson-disk sampler over the mesh surface.
///
/// The rejection radius is sized from the disk radius implied by the target
/// count and the mesh area, leaving enough packing headroom that the target
/// is reachable. Deterministic for a fixed seed.
pub fn poisson_disk_sample(
    mesh: &TriangleMesh,
    target_count: usize,
    seed: u64,
) -> Result<SurfaceCloud> {
    if target_count < 4 {
        return Err(Error::SampleTargetTooSmall(target_count));
    }
    let area = mesh.total_area();
    let r_est = (area / (std::f64::consts::PI * target_count as f64)).sqrt();
    if !(r_est > 1e-9) {
        return Err(Error::SampleTargetTooLarge {
            target: target_count,
            area,
        });
    }
    let r_rej = 0.75 * r_est;
    let r_rej_sq = r_rej * r_rej;

    // Cumulative areas for area-weighted triangle selection.
    let mut cumulative = Vec::with_capacity(mesh.faces.len());
    let mut acc = 0.0;
    for i in 0..mesh.faces.len() {
        acc += mesh.face_area(i);
        cumulative.push(acc);
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut grid: HashMap<(i64, i64, i64), Vec<usize>> = HashMap::new();
    let mut cloud = SurfaceCloud::default();
    let budget = 400 * target_count;
    for _ in 0..budget {
        if cloud.len() == target_count {
            break;
        }
        let pick = rng.gen_range(0.0..acc);
        let face = cumulative.partition_point(|&c| c <= pick).min(mesh.faces.len() - 1);
        let f = mesh.faces[face];
        let (r1, r2): (f64, f64) = (rng.gen(), rng.gen());
        let s = r1.sqrt();
        let a = mesh.vertices[f[0]].coords;
        let b = mesh.vertices[f[1]].coords;
        let c = mesh.vertices[f[2]].coords;
        let p = Point3::from(a * (1.0 - s) + b * (s * (1.0 - r2)) + c * (s * r2));

        let (ci, cj, ck) = cell_of(&p, r_rej);
        let mut ok = true;
        'check: for di in -1..=1 {
            for dj in -1..=1 {
                for dk in -1..=1 {
                    if let Some(bucket) = grid.get(&(ci + di, cj + dj, ck + dk)) {
                        for &idx in bucket {
                            if (cloud.points[idx] - p).norm_squared() < r_rej_sq {
                                ok = false;
                                break 'check;
                            }
                        }
                    }
                }
            }
        }
        if ok {
            grid.entry((ci, cj, ck)).or_default().push(cloud.len());
            cloud.points.push(p);
            cloud.normals.push(mesh.face_normals[face]);
        }
    }
    Ok(cloud)
}

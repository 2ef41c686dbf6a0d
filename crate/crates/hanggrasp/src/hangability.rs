//! Detection of structures that afford hanging: contact clustering, hanging
//! position and direction, through-hole filtering.

use nalgebra::{Point3, Vector3};
use serde::{Deserialize, Serialize};

use crate::bvh::Bvh;
use crate::cloud::{poisson_disk_sample, SurfaceCloud};
use crate::error::{Error, Result};
use crate::mesh::{MeshStats, TriangleMesh};

/// One hangable structure.
#[derive(Debug, Clone)]
pub struct HangRecord {
    /// Hanging position: the free-space maximum inside the structure.
    pub c: Point3<f64>,
    /// Hanging direction: normal of the best ray-fan plane, canonicalized to
    /// point upward.
    pub v: Vector3<f64>,
    /// First-hit points of the in-plane rays that struck the object.
    pub contacts: Vec<Point3<f64>>,
    /// Fraction of in-plane rays hitting the object.
    pub m: f64,
    /// Mean direction of the missing rays; absent when m = 1.
    pub a: Option<Vector3<f64>>,
    /// Cluster representative that seeded this record.
    pub source_contact: Point3<f64>,
    /// Free-space radius achieved at `c` (nearest-cloud-point distance).
    pub clearance: f64,
}

/// Resolution and threshold knobs for hangability detection.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(default)]
pub struct HangConfig {
    /// Poisson-disk sample target for the surface cloud.
    pub sample_count: usize,
    /// Max angle (degrees) between a point normal and the direction to the
    /// center of mass for the point to count as a contact candidate.
    pub normal_cone_deg: f64,
    /// Single-linkage distance for contact clustering, also the merge radius
    /// for near-duplicate records (meters).
    pub cluster_radius: f64,
    /// Samples along the contact-to-CoM segment for the free-space search.
    pub segment_samples: usize,
    /// Candidate plane normals on the hemisphere.
    pub plane_count: usize,
    /// Rays per candidate plane.
    pub rays_per_plane: usize,
    /// Minimum completeness m to keep a record.
    pub min_m: f64,
    /// Minimum free-space clearance to keep a record (meters).
    pub min_clearance: f64,
}

impl Default for HangConfig {
    fn default() -> Self {
        Self {
            // Note on sample_count: the collision threshold downstream
            // rejects poses with >= 10 cloud points inside the closed
            // gripper, so the usable density is bounded for desk-scale
            // parts; 800 keeps thin structures graspable while still
            // resolving 1 cm clustering.
            sample_count: 800,
            normal_cone_deg: 30.0,
            cluster_radius: 0.01,
            segment_samples: 50,
            plane_count: 200,
            rays_per_plane: 72,
            min_m: 0.5,
            min_clearance: 0.005,
        }
    }
}

impl HangConfig {
    pub fn validate(&self) -> Result<()> {
        let check = |ok: bool, field: &str, detail: String| -> Result<()> {
            if ok {
                Ok(())
            } else {
                Err(Error::InvalidConfig {
                    field: format!("hang.{field}"),
                    detail,
                })
            }
        };
        check(self.sample_count >= 4, "sample_count", format!("need >= 4, got {}", self.sample_count))?;
        check(
            self.normal_cone_deg > 0.0 && self.normal_cone_deg < 90.0,
            "normal_cone_deg",
            format!("need (0, 90), got {}", self.normal_cone_deg),
        )?;
        check(self.cluster_radius > 0.0, "cluster_radius", format!("must be positive, got {}", self.cluster_radius))?;
        check(self.segment_samples > 0, "segment_samples", "must be positive".into())?;
        check(self.plane_count > 0, "plane_count", "must be positive".into())?;
        check(self.rays_per_plane > 0, "rays_per_plane", "must be positive".into())?;
        check(
            (0.0..=1.0).contains(&self.min_m),
            "min_m",
            format!("need [0, 1], got {}", self.min_m),
        )?;
        check(self.min_clearance > 0.0, "min_clearance", format!("must be positive, got {}", self.min_clearance))
    }
}

/// A group of candidate contact points.
#[derive(Debug, Clone)]
pub struct ContactCluster {
    pub representative: Point3<f64>,
    pub members: Vec<usize>,
}

fn lex_less(a: &Point3<f64>, b: &Point3<f64>) -> std::cmp::Ordering {
    a.x.total_cmp(&b.x)
        .then(a.y.total_cmp(&b.y))
        .then(a.z.total_cmp(&b.z))
}

/// Cloud points whose normals aim at the center of mass, grouped by
/// single-linkage clustering.
pub fn find_candidate_contacts(
    cloud: &SurfaceCloud,
    stats: &MeshStats,
    cfg: &HangConfig,
) -> Vec<ContactCluster> {
    let cos_cone = cfg.normal_cone_deg.to_radians().cos();
    let mut candidates: Vec<usize> = Vec::new();
    for (i, (p, n)) in cloud.points.iter().zip(&cloud.normals).enumerate() {
        let to_com = stats.com - p;
        let len = to_com.norm();
        if len < 1e-12 {
            continue;
        }
        if n.dot(&to_com) / len >= cos_cone {
            candidates.push(i);
        }
    }
    // Single-linkage union-find over the candidate subset.
    let k = candidates.len();
    let mut parent: Vec<usize> = (0..k).collect();
    fn find(parent: &mut Vec<usize>, i: usize) -> usize {
        let mut root = i;
        while parent[root] != root {
            root = parent[root];
        }
        let mut cur = i;
        while parent[cur] != root {
            let next = parent[cur];
            parent[cur] = root;
            cur = next;
        }
        root
    }
    let link_sq = cfg.cluster_radius * cfg.cluster_radius;
    for a in 0..k {
        for b in a + 1..k {
            if (cloud.points[candidates[a]] - cloud.points[candidates[b]]).norm_squared() <= link_sq
            {
                let ra = find(&mut parent, a);
                let rb = find(&mut parent, b);
                if ra != rb {
                    parent[ra] = rb;
                }
            }
        }
    }
    let mut groups: std::collections::HashMap<usize, Vec<usize>> = std::collections::HashMap::new();
    for a in 0..k {
        let root = find(&mut parent, a);
        groups.entry(root).or_default().push(candidates[a]);
    }
    let mut clusters: Vec<ContactCluster> = groups
        .into_values()
        .map(|members| {
            let centroid = Point3::from(
                members
                    .iter()
                    .fold(Vector3::zeros(), |acc, &i| acc + cloud.points[i].coords)
                    / members.len() as f64,
            );
            let rep = members
                .iter()
                .copied()
                .min_by(|&a, &b| {
                    (cloud.points[a] - centroid)
                        .norm()
                        .total_cmp(&(cloud.points[b] - centroid).norm())
                        .then(a.cmp(&b))
                })
                .expect("non-empty cluster");
            ContactCluster {
                representative: cloud.points[rep],
                members,
            }
        })
        .collect();
    clusters.sort_by(|a, b| lex_less(&a.representative, &b.representative));
    clusters
}

/// Picks the free-space maximum on the open segment from the contact to the
/// center of mass. Clearance is the distance to the nearest cloud point.
pub fn select_hang_position(
    contact: &Point3<f64>,
    stats: &MeshStats,
    cloud: &SurfaceCloud,
    cfg: &HangConfig,
) -> Result<(Point3<f64>, f64)> {
    let seg = stats.com - contact;
    if seg.norm() < 1e-9 {
        return Err(Error::DegenerateSegment);
    }
    let n = cfg.segment_samples;
    let mut best_point = *contact;
    let mut best_clearance = f64::NEG_INFINITY;
    for i in 1..=n {
        let t = i as f64 / (n + 1) as f64;
        let x = contact + seg * t;
        let clearance = cloud.nearest_distance(&x);
        // Strict improvement keeps ties at the contact end.
        if clearance > best_clearance {
            best_clearance = clearance;
            best_point = x;
        }
    }
    Ok((best_point, best_clearance))
}

/// Deterministic hemisphere directions (Fibonacci spiral), most polar first.
pub fn hemisphere_directions(count: usize) -> Vec<Vector3<f64>> {
    let golden = std::f64::consts::PI * (3.0 - 5.0f64.sqrt());
    (0..count)
        .map(|i| {
            let z = 1.0 - (i as f64 + 0.5) / count as f64;
            let rho = (1.0 - z * z).sqrt();
            let phi = golden * i as f64;
            Vector3::new(rho * phi.cos(), rho * phi.sin(), z)
        })
        .collect()
}

/// Orthonormal in-plane basis for a plane normal; deterministic.
fn plane_basis(n: &Vector3<f64>) -> (Vector3<f64>, Vector3<f64>) {
    let axes = [Vector3::x(), Vector3::y(), Vector3::z()];
    let pick = axes
        .iter()
        .min_by(|a, b| a.dot(n).abs().total_cmp(&b.dot(n).abs()))
        .unwrap();
    let b1 = (pick - n * pick.dot(n)).normalize();
    let b2 = n.cross(&b1);
    (b1, b2)
}

/// Outcome of scanning candidate planes around a hanging position.
#[derive(Debug, Clone)]
pub struct DirectionScan {
    pub v: Vector3<f64>,
    pub m: f64,
    pub a: Option<Vector3<f64>>,
    pub contacts: Vec<Point3<f64>>,
}

/// Finds the plane whose in-plane ray fan from `c` hits the object most
/// completely; its normal is the hanging direction.
pub fn detect_hang_direction(
    c: &Point3<f64>,
    bvh: &Bvh,
    cfg: &HangConfig,
) -> Result<DirectionScan> {
    let normals = hemisphere_directions(cfg.plane_count);
    let rays = cfg.rays_per_plane;
    let mut best: Option<(usize, usize)> = None; // (hits, plane index)
    for (idx, n) in normals.iter().enumerate() {
        let (b1, b2) = plane_basis(n);
        let mut hits = 0usize;
        for k in 0..rays {
            let ang = 2.0 * std::f64::consts::PI * k as f64 / rays as f64;
            let dir = b1 * ang.cos() + b2 * ang.sin();
            if bvh.first_hit(c, &dir).is_some() {
                hits += 1;
            }
        }
        let better = match best {
            None => hits > 0,
            Some((bh, _)) => hits > bh,
        };
        if better {
            best = Some((hits, idx));
        }
    }
    let (hits, idx) = best.ok_or(Error::NoSurroundingStructure)?;
    let n = normals[idx];
    let (b1, b2) = plane_basis(&n);
    let mut contacts = Vec::with_capacity(hits);
    let mut miss_sum = Vector3::zeros();
    let mut first_miss: Option<Vector3<f64>> = None;
    for k in 0..rays {
        let ang = 2.0 * std::f64::consts::PI * k as f64 / rays as f64;
        let dir = b1 * ang.cos() + b2 * ang.sin();
        match bvh.first_hit(c, &dir) {
            Some(hit) => contacts.push(hit.point),
            None => {
                miss_sum += dir;
                first_miss.get_or_insert(dir);
            }
        }
    }
    let m = hits as f64 / rays as f64;
    let a = if m < 1.0 {
        let norm = miss_sum.norm();
        if norm > 1e-9 {
            Some(miss_sum / norm)
        } else {
            // Opposed gaps cancel; fall back to the first missing ray.
            first_miss
        }
    } else {
        None
    };
    Ok(DirectionScan {
        v: canonicalize_direction(n),
        m,
        a,
        contacts,
    })
}

/// Upward-preferring sign canonicalization of an unsigned direction.
pub fn canonicalize_direction(v: Vector3<f64>) -> Vector3<f64> {
    if v.z > 0.0 {
        v
    } else if v.z < 0.0 {
        -v
    } else if v.x > 0.0 {
        v
    } else if v.x < 0.0 {
        -v
    } else if v.y >= 0.0 {
        v
    } else {
        -v
    }
}

/// True iff both axial rays from the hanging position escape the object:
/// the structure is a through hole along v.
pub fn through_hole_filter(c: &Point3<f64>, v: &Vector3<f64>, bvh: &Bvh) -> bool {
    bvh.first_hit(c, v).is_none() && bvh.first_hit(c, &-*v).is_none()
}

/// Full hangability detection over a prepared cloud and ray structure.
pub fn detect_hangability_with_cloud(
    bvh: &Bvh,
    cloud: &SurfaceCloud,
    stats: &MeshStats,
    cfg: &HangConfig,
) -> Vec<HangRecord> {
    let clusters = find_candidate_contacts(cloud, stats, cfg);
    let mut records: Vec<HangRecord> = Vec::new();
    for cluster in &clusters {
        let Ok((c, clearance)) = select_hang_position(&cluster.representative, stats, cloud, cfg)
        else {
            continue;
        };
        if clearance < cfg.min_clearance {
            continue;
        }
        let Ok(scan) = detect_hang_direction(&c, bvh, cfg) else {
            continue;
        };
        if scan.m < cfg.min_m {
            continue;
        }
        if !through_hole_filter(&c, &scan.v, bvh) {
            continue;
        }
        records.push(HangRecord {
            c,
            v: scan.v,
            contacts: scan.contacts,
            m: scan.m,
            a: scan.a,
            source_contact: cluster.representative,
            clearance,
        });
    }
    // Near-duplicate merge: same position and direction, keep the better m,
    // then the better clearance.
    let mut merged: Vec<HangRecord> = Vec::new();
    for rec in records {
        if let Some(existing) = merged.iter_mut().find(|r| {
            (r.c - rec.c).norm() < cfg.cluster_radius && r.v.dot(&rec.v).abs() > 0.99
        }) {
            if rec.m > existing.m || (rec.m == existing.m && rec.clearance > existing.clearance) {
                *existing = rec;
            }
        } else {
            merged.push(rec);
        }
    }
    merged.sort_by(|a, b| {
        b.m.total_cmp(&a.m)
            .then(b.clearance.total_cmp(&a.clearance))
            .then(lex_less(&a.c, &b.c))
    });
    merged
}

/// Hangability detection straight from a mesh: samples the cloud, builds the
/// ray structure and runs the full composition.
pub fn detect_hangability(
    mesh: &TriangleMesh,
    cfg: &HangConfig,
    seed: u64,
) -> Result<Vec<HangRecord>> {
    cfg.validate()?;
    let cloud = poisson_disk_sample(mesh, cfg.sample_count, seed)?;
    let bvh = Bvh::build(mesh);
    let stats = mesh.stats();
    Ok(detect_hangability_with_cloud(&bvh, &cloud, &stats, cfg))
}

//! Grasp candidate synthesis for hangable structures: the parallel family
//! (rod threads the hole) and the vertical family (straight finger along the
//! hanging direction), plus collision pruning against the sampled cloud.

use nalgebra::{Matrix3, Point3, Vector3};
use serde::{Deserialize, Serialize};

use crate::cloud::SurfaceCloud;
use crate::error::{Error, Result};
use crate::gripper::{self, GripperModel};
use crate::hangability::HangRecord;
use crate::scoring::ScoreBreakdown;
use crate::transform::RigidTransform;

/// Grasp family.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GraspKind {
    Parallel,
    Vertical,
}

/// Orientation signs enumerated for one candidate. For the parallel family
/// `s1` flips the rod axis and `s2` the approach axis; for the vertical
/// family `s1` flips the finger axis and `s2` the rod axis.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SignChoices {
    pub s1: i8,
    pub s2: i8,
}

impl SignChoices {
    /// Enumeration order: (+,+), (+,−), (−,+), (−,−).
    pub const ALL: [SignChoices; 4] = [
        SignChoices { s1: 1, s2: 1 },
        SignChoices { s1: 1, s2: -1 },
        SignChoices { s1: -1, s2: 1 },
        SignChoices { s1: -1, s2: -1 },
    ];

    fn index(&self) -> usize {
        match (self.s1, self.s2) {
            (1, 1) => 0,
            (1, -1) => 1,
            (-1, 1) => 2,
            _ => 3,
        }
    }
}

/// A 6D grasp pose with its provenance.
#[derive(Debug, Clone)]
pub struct GraspCandidate {
    /// Gripper frame → world.
    pub pose: RigidTransform,
    pub kind: GraspKind,
    /// Index of the source hang record.
    pub hang_index: usize,
    /// The ray contact this candidate was built from.
    pub contact: Point3<f64>,
    /// Index of `contact` within the record's contact list.
    pub contact_index: usize,
    pub signs: SignChoices,
    /// Fingertip matching point; vertical family only.
    pub q_m: Option<Point3<f64>>,
    /// Cloud points inside the closed gripper at this pose.
    pub n_collisions: usize,
    pub score: Option<ScoreBreakdown>,
}

/// Placement offsets and thresholds for candidate generation.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(default)]
pub struct GenConfig {
    /// Approach offset from the contact toward the hanging position (meters).
    pub d1: f64,
    /// Fingertip standoff along the hanging direction (meters).
    pub d2: f64,
    /// Cosine threshold for substituting the ground normal as finger axis.
    pub p_theta: f64,
    /// Collision rejection threshold: keep only N_c < p_c.
    pub p_c: usize,
    pub ground_normal: Vector3<f64>,
    pub gravity_dir: Vector3<f64>,
}

impl Default for GenConfig {
    fn default() -> Self {
        Self {
            d1: 0.01,
            d2: 0.0,
            p_theta: 0.95,
            p_c: 10,
            ground_normal: Vector3::new(0.0, 0.0, 1.0),
            gravity_dir: Vector3::new(0.0, 0.0, -1.0),
        }
    }
}

impl GenConfig {
    pub fn validate(&self) -> Result<()> {
        let check = |ok: bool, field: &str, detail: String| -> Result<()> {
            if ok {
                Ok(())
            } else {
                Err(Error::InvalidConfig {
                    field: format!("gen.{field}"),
                    detail,
                })
            }
        };
        check(self.d1 > 0.0, "d1", format!("must be positive, got {}", self.d1))?;
        check(self.d2 >= 0.0, "d2", format!("must be non-negative, got {}", self.d2))?;
        check(
            self.p_theta > 0.0 && self.p_theta <= 1.0,
            "p_theta",
            format!("need (0, 1], got {}", self.p_theta),
        )?;
        check(
            (self.ground_normal.norm() - 1.0).abs() < 1e-6,
            "ground_normal",
            "must be a unit vector".into(),
        )?;
        check(
            (self.gravity_dir.norm() - 1.0).abs() < 1e-6,
            "gravity_dir",
            "must be a unit vector".into(),
        )
    }
}

fn orthonormalize_against(u: &Vector3<f64>, axis: &Vector3<f64>) -> Option<Vector3<f64>> {
    let proj = u - axis * u.dot(axis);
    let n = proj.norm();
    if n < 1e-9 {
        None
    } else {
        Some(proj / n)
    }
}

/// Parallel family: the rod axis runs along the hanging direction and the
/// rod midpoint sits at the hanging position, approaching from each contact.
pub fn gen_parallel(
    hang: &HangRecord,
    hang_index: usize,
    model: &GripperModel,
) -> Result<Vec<GraspCandidate>> {
    if hang.contacts.is_empty() {
        return Err(Error::EmptyContacts);
    }
    let frame = gripper::key_points(model);
    let v = hang.v;
    let mut out = Vec::new();
    for (ci, h) in hang.contacts.iter().enumerate() {
        let to_c = hang.c - h;
        let n = to_c.norm();
        if n < 1e-12 {
            continue;
        }
        let Some(u) = orthonormalize_against(&(to_c / n), &v) else {
            continue;
        };
        for signs in SignChoices::ALL {
            let x = v * signs.s1 as f64;
            let z = u * signs.s2 as f64;
            let y = z.cross(&x);
            let rotation = Matrix3::from_columns(&[x, y, z]);
            let translation = hang.c.coords - rotation * frame.p_m.coords;
            out.push(GraspCandidate {
                pose: RigidTransform::new(rotation, translation),
                kind: GraspKind::Parallel,
                hang_index,
                contact: *h,
                contact_index: ci,
                signs,
                q_m: None,
                n_collisions: 0,
                score: None,
            });
        }
    }
    Ok(out)
}

/// Approach point just inside the structure from the contact toward the
/// hanging position.
pub fn approach_point(h: &Point3<f64>, c: &Point3<f64>, d1: f64) -> Result<Point3<f64>> {
    let seg = c - h;
    let n = seg.norm();
    if n < 1e-12 {
        return Err(Error::DegenerateSegment);
    }
    Ok(h + seg * (d1 / n))
}

/// Caged point farthest along the hanging direction; first index wins ties.
pub fn farthest_along(
    points: &[Point3<f64>],
    q1: &Point3<f64>,
    v: &Vector3<f64>,
) -> Option<Point3<f64>> {
    points
        .iter()
        .copied()
        .reduce(|best, q| if (q - q1).dot(v) > (best - q1).dot(v) { q } else { best })
}

/// Fingertip matching point: project the farthest caged point onto the line
/// through q1 along v, then stand off by d2.
pub fn matching_point(
    q_f: &Point3<f64>,
    q1: &Point3<f64>,
    v: &Vector3<f64>,
    d2: f64,
) -> Point3<f64> {
    let q2 = q1 + v * (q_f - q1).dot(v);
    q2 + v * d2
}

/// Where the straight fingertip must land for a vertical candidate: slice
/// the cloud with the gripper plane at the trial pose whose finger line runs
/// through q1 along `axis`, take the caged point farthest along v, project
/// and stand off.
#[allow(clippy::too_many_arguments)]
pub fn compute_vertical_placement(
    h: &Point3<f64>,
    c: &Point3<f64>,
    v: &Vector3<f64>,
    axis: &Vector3<f64>,
    cloud: &SurfaceCloud,
    model: &GripperModel,
    pose_rot: &Matrix3<f64>,
    cfg: &GenConfig,
) -> Result<Point3<f64>> {
    let q1 = approach_point(h, c, cfg.d1)?;
    let frame = gripper::key_points(model);
    // Trial pose: straight-finger root at q1, so the finger line passes
    // through q1 with direction `axis` (= pose_rot * z by construction).
    let trial = RigidTransform::new(*pose_rot, q1.coords - pose_rot * frame.p4.coords);
    debug_assert!((pose_rot * Vector3::z() - axis).norm() < 1e-9);
    let caged = gripper::slice_caged_points(model, &trial, cloud);
    let q_f = farthest_along(&caged, &q1, v).ok_or(Error::EmptyCagedSet)?;
    Ok(matching_point(&q_f, &q1, v, cfg.d2))
}

/// Vertical family: straight finger along the hanging direction (or the
/// ground normal when nearly parallel to it), fingertip at the matching
/// point, rod aimed from the structure toward the contact side.
pub fn gen_vertical(
    hang: &HangRecord,
    hang_index: usize,
    model: &GripperModel,
    cloud: &SurfaceCloud,
    cfg: &GenConfig,
) -> Result<Vec<GraspCandidate>> {
    if hang.contacts.is_empty() {
        return Err(Error::EmptyContacts);
    }
    let frame = gripper::key_points(model);
    let f = if hang.v.dot(&cfg.ground_normal).abs() > cfg.p_theta {
        cfg.ground_normal
    } else {
        hang.v
    };
    let mut out = Vec::new();
    for (ci, h) in hang.contacts.iter().enumerate() {
        let to_c = hang.c - h;
        if to_c.norm() < 1e-12 {
            continue;
        }
        let Some(u) = orthonormalize_against(&to_c.normalize(), &f) else {
            continue;
        };
        for signs in SignChoices::ALL {
            let z = f * signs.s1 as f64;
            // The rod points from the L-finger tip inward (−x locally), so
            // x = −(s2 · u).
            let x = -(u * signs.s2 as f64);
            let y = z.cross(&x);
            let rotation = Matrix3::from_columns(&[x, y, z]);
            let axis = z;
            let Ok(q_m) =
                compute_vertical_placement(h, &hang.c, &hang.v, &axis, cloud, model, &rotation, cfg)
            else {
                continue;
            };
            let translation = q_m.coords - rotation * frame.p2.coords;
            out.push(GraspCandidate {
                pose: RigidTransform::new(rotation, translation),
                kind: GraspKind::Vertical,
                hang_index,
                contact: *h,
                contact_index: ci,
                signs,
                q_m: Some(q_m),
                n_collisions: 0,
                score: None,
            });
        }
    }
    Ok(out)
}

/// Counts cloud points inside the closed gripper at the candidate pose.
/// Keep iff the count stays under the threshold.
pub fn check_collision(
    cand: &GraspCandidate,
    cloud: &SurfaceCloud,
    model: &GripperModel,
    cfg: &GenConfig,
) -> (bool, usize) {
    let capsules: Vec<_> = gripper::collision_volume(model)
        .iter()
        .map(|c| c.transformed(&cand.pose))
        .collect();
    let n_c = cloud
        .points
        .iter()
        .filter(|p| gripper::volume_contains(&capsules, p))
        .count();
    (n_c < cfg.p_c, n_c)
}

/// Both families over all hang records, collision-pruned, in deterministic
/// order.
pub fn generate_grasps(
    hangs: &[HangRecord],
    cloud: &SurfaceCloud,
    model: &GripperModel,
    cfg: &GenConfig,
) -> Result<Vec<GraspCandidate>> {
    cfg.validate()?;
    model.validate()?;
    let mut all = Vec::new();
    for (i, hang) in hangs.iter().enumerate() {
        if hang.contacts.is_empty() {
            continue;
        }
        all.extend(gen_parallel(hang, i, model)?);
        all.extend(gen_vertical(hang, i, model, cloud, cfg)?);
    }
    let mut kept = Vec::new();
    for mut cand in all {
        let (keep, n_c) = check_collision(&cand, cloud, model, cfg);
        if keep {
            cand.n_collisions = n_c;
            kept.push(cand);
        }
    }
    kept.sort_by_key(|c| (c.hang_index, c.kind, c.contact_index, c.signs.index()));
    Ok(kept)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cloud::poisson_disk_sample;
    use crate::hangability::{detect_hangability, HangConfig};
    use crate::synthetics;
    use approx::assert_relative_eq;

    fn torus_scene() -> (Vec<HangRecord>, SurfaceCloud, GripperModel, GenConfig) {
        let mesh = synthetics::torus_mesh(0.05, 0.01, 64, Vector3::zeros());
        let hangs = detect_hangability(&mesh, &HangConfig::default(), 7).unwrap();
        let cloud = poisson_disk_sample(&mesh, 800, 7).unwrap();
        (hangs, cloud, GripperModel::default(), GenConfig::default())
    }

    #[test]
    fn approach_point_micro_example() {
        let q1 = approach_point(&Point3::origin(), &Point3::new(0.0, 0.0, 0.02), 0.01).unwrap();
        assert_eq!(q1, Point3::new(0.0, 0.0, 0.01));
    }

    #[test]
    fn farthest_point_micro_example() {
        let q = vec![Point3::new(0.0, 0.0, 0.03), Point3::new(0.0, 0.0, 0.05)];
        let q_f = farthest_along(&q, &Point3::new(0.0, 0.0, 0.01), &Vector3::z()).unwrap();
        assert_eq!(q_f, Point3::new(0.0, 0.0, 0.05));
    }

    #[test]
    fn matching_point_micro_example() {
        let q_m = matching_point(
            &Point3::new(0.0, 0.0, 0.05),
            &Point3::new(0.0, 0.0, 0.01),
            &Vector3::z(),
            0.005,
        );
        assert_relative_eq!(q_m, Point3::new(0.0, 0.0, 0.055), epsilon = 1e-15);
    }

    #[test]
    fn approach_rejects_coincident_points() {
        let p = Point3::new(0.1, 0.2, 0.3);
        assert!(matches!(
            approach_point(&p, &p, 0.01),
            Err(Error::DegenerateSegment)
        ));
    }

    #[test]
    fn parallel_candidates_satisfy_contracts() {
        let (hangs, _, model, _) = torus_scene();
        let cands = gen_parallel(&hangs[0], 0, &model).unwrap();
        assert_eq!(cands.len(), 4 * hangs[0].contacts.len());
        let frame = gripper::key_points(&model);
        for cand in &cands {
            assert!(cand.pose.is_valid_rotation(1e-9));
            let p_m_world = cand.pose.apply_point(&frame.p_m);
            assert!((p_m_world - hangs[0].c).norm() < 1e-9);
            let rod = cand.pose.rotation * Vector3::x();
            assert!(rod.cross(&hangs[0].v).norm() < 1e-6);
        }
    }

    #[test]
    fn vertical_candidates_satisfy_contracts() {
        let (hangs, cloud, model, cfg) = torus_scene();
        let cands = gen_vertical(&hangs[0], 0, &model, &cloud, &cfg).unwrap();
        assert!(!cands.is_empty());
        let frame = gripper::key_points(&model);
        // Torus axis is z, ground normal is z: |v·g| > 0.95 so the finger
        // axis is the ground normal.
        for cand in &cands {
            assert!(cand.pose.is_valid_rotation(1e-9));
            let q_m = cand.q_m.unwrap();
            let p2_world = cand.pose.apply_point(&frame.p2);
            assert!((p2_world - q_m).norm() < 1e-9);
            let fin = cand.pose.apply_point(&frame.p2) - cand.pose.apply_point(&frame.p4);
            assert!(fin.cross(&cfg.ground_normal).norm() < 1e-6 * fin.norm());
        }
    }

    #[test]
    fn ground_substitution_threshold() {
        let cfg = GenConfig::default();
        let steep = Vector3::new(0.0, 0.0, 1.0);
        assert!(steep.dot(&cfg.ground_normal).abs() > cfg.p_theta);
        let tilted = Vector3::new(1.0, 0.0, 1.0).normalize();
        assert!(tilted.dot(&cfg.ground_normal).abs() < cfg.p_theta);
    }

    #[test]
    fn collision_empty_cloud_keeps() {
        let (hangs, _, model, cfg) = torus_scene();
        let cand = gen_parallel(&hangs[0], 0, &model).unwrap().remove(0);
        let (keep, n_c) = check_collision(&cand, &SurfaceCloud::default(), &model, &cfg);
        assert!(keep);
        assert_eq!(n_c, 0);
    }

    #[test]
    fn collision_threshold_is_strict() {
        let (hangs, _, model, cfg) = torus_scene();
        let cand = gen_parallel(&hangs[0], 0, &model).unwrap().remove(0);
        // Points on the straight-finger segment of the posed closed gripper.
        let frame = gripper::key_points(&model.closed());
        let mut cloud = SurfaceCloud::default();
        for i in 0..10 {
            let t = i as f64 / 9.0;
            let local = Point3::from(frame.p4.coords * (1.0 - t) + frame.p2.coords * t);
            cloud.points.push(cand.pose.apply_point(&local));
            cloud.normals.push(Vector3::z());
        }
        let (keep, n_c) = check_collision(&cand, &cloud, &model, &cfg);
        assert_eq!(n_c, 10);
        assert!(!keep, "10 < 10 must fail");
    }

    #[test]
    fn torus_keeps_a_parallel_candidate() {
        let (hangs, cloud, model, cfg) = torus_scene();
        let g = generate_grasps(&hangs, &cloud, &model, &cfg).unwrap();
        assert!(g.iter().any(|c| c.kind == GraspKind::Parallel), "no parallel candidate survived");
        for c in &g {
            assert!(c.n_collisions < cfg.p_c);
        }
    }

    #[test]
    fn generated_order_is_deterministic_and_sorted() {
        let (hangs, cloud, model, cfg) = torus_scene();
        let a = generate_grasps(&hangs, &cloud, &model, &cfg).unwrap();
        let b = generate_grasps(&hangs, &cloud, &model, &cfg).unwrap();
        assert_eq!(a.len(), b.len());
        for (x, y) in a.iter().zip(&b) {
            assert_eq!(x.pose.rotation, y.pose.rotation);
            assert_eq!(x.pose.translation, y.pose.translation);
        }
        for w in a.windows(2) {
            let ka = (w[0].hang_index, w[0].kind, w[0].contact_index, w[0].signs.index());
            let kb = (w[1].hang_index, w[1].kind, w[1].contact_index, w[1].signs.index());
            assert!(ka <= kb);
        }
    }

    #[test]
    fn empty_hangs_give_empty_set() {
        let cloud = SurfaceCloud::default();
        let g = generate_grasps(&[], &cloud, &GripperModel::default(), &GenConfig::default())
            .unwrap();
        assert!(g.is_empty());
    }

    #[test]
    fn rigid_equivariance_of_candidates() {
        let (hangs, cloud, model, cfg) = torus_scene();
        let angle: f64 = 0.7;
        let (s, c) = angle.sin_cos();
        let t = RigidTransform::new(
            Matrix3::new(c, -s, 0.0, s, c, 0.0, 0.0, 0.0, 1.0),
            Vector3::new(0.03, -0.02, 0.05),
        );
        // Transform the scene: records, cloud, and co-rotated frame vectors.
        let moved_hangs: Vec<HangRecord> = hangs
            .iter()
            .map(|h| HangRecord {
                c: t.apply_point(&h.c),
                v: t.apply_vector(&h.v),
                contacts: h.contacts.iter().map(|p| t.apply_point(p)).collect(),
                m: h.m,
                a: h.a.map(|a| t.apply_vector(&a)),
                source_contact: t.apply_point(&h.source_contact),
                clearance: h.clearance,
            })
            .collect();
        let moved_cloud = cloud.transformed(&t);
        let moved_cfg = GenConfig {
            ground_normal: t.apply_vector(&cfg.ground_normal),
            gravity_dir: t.apply_vector(&cfg.gravity_dir),
            ..cfg
        };
        let base = generate_grasps(&hangs, &cloud, &model, &cfg).unwrap();
        let moved = generate_grasps(&moved_hangs, &moved_cloud, &model, &moved_cfg).unwrap();
        assert_eq!(base.len(), moved.len());
        for (a, b) in base.iter().zip(&moved) {
            assert_eq!(a.kind, b.kind);
            assert_eq!(a.contact_index, b.contact_index);
            let expected = t.compose(&a.pose);
            assert!((expected.rotation - b.pose.rotation).norm() < 1e-9);
            assert!((expected.translation - b.pose.translation).norm() < 1e-9);
        }
    }

    #[test]
    fn vertical_placement_on_constructed_scene() {
        // Straight finger along +z with the structure directly above the
        // contact: the caged set is a vertical stack of points.
        let model = GripperModel::default();
        let cfg = GenConfig {
            d2: 0.005,
            ..GenConfig::default()
        };
        let h = Point3::new(0.0, 0.0, 0.0);
        let c = Point3::new(0.0, 0.0, 0.02);
        let v = Vector3::z();
        let rot = Matrix3::identity();
        let mut cloud = SurfaceCloud::default();
        // Points relative to the trial pose: finger root sits at q1 =
        // (0,0,0.01), so world z in [0.01, 0.09] maps into the rectangle.
        for k in 0..5 {
            cloud
                .points
                .push(Point3::new(0.0, 0.0, 0.02 + 0.01 * k as f64));
            cloud.normals.push(Vector3::z());
        }
        // Far point outside the slab must not win.
        cloud.points.push(Point3::new(0.0, 0.05, 0.2));
        cloud.normals.push(Vector3::z());
        let q_m =
            compute_vertical_placement(&h, &c, &v, &Vector3::z(), &cloud, &model, &rot, &cfg)
                .unwrap();
        // Highest caged point is z = 0.06; q2 = (0,0,0.06); + d2.
        assert_relative_eq!(q_m, Point3::new(0.0, 0.0, 0.065), epsilon = 1e-12);
    }

    #[test]
    fn vertical_placement_rejects_empty_cage() {
        let model = GripperModel::default();
        let cfg = GenConfig::default();
        let err = compute_vertical_placement(
            &Point3::origin(),
            &Point3::new(0.0, 0.0, 0.02),
            &Vector3::z(),
            &Vector3::z(),
            &SurfaceCloud::default(),
            &model,
            &Matrix3::identity(),
            &cfg,
        );
        assert!(matches!(err, Err(Error::EmptyCagedSet)));
    }

    #[test]
    fn collision_count_matches_brute_force() {
        let (hangs, cloud, model, cfg) = torus_scene();
        let cands = gen_parallel(&hangs[0], 0, &model).unwrap();
        for cand in cands.iter().step_by(17) {
            let (_, fast) = check_collision(cand, &cloud, &model, &cfg);
            let capsules = gripper::collision_volume(&model);
            let slow = cloud
                .points
                .iter()
                .filter(|p| {
                    let local = cand.pose.to_local(p);
                    capsules.iter().any(|c| c.distance(&local) <= c.radius)
                })
                .count();
            assert_eq!(fast, slow);
        }
    }

    #[test]
    fn arc_torus_vertical_uses_record_direction() {
        // A hanging direction tilted 45° from the ground normal keeps the
        // record's own direction as finger axis.
        let mesh = synthetics::torus_mesh(0.05, 0.01, 64, Vector3::zeros());
        let hangs = detect_hangability(&mesh, &HangConfig::default(), 7).unwrap();
        let cloud = poisson_disk_sample(&mesh, 800, 7).unwrap();
        let model = GripperModel::default();
        let cfg = GenConfig {
            ground_normal: Vector3::new(1.0, 0.0, 1.0).normalize(),
            ..GenConfig::default()
        };
        let cands = gen_vertical(&hangs[0], 0, &model, &cloud, &cfg).unwrap();
        let frame = gripper::key_points(&model);
        for cand in &cands {
            let fin = cand.pose.apply_point(&frame.p2) - cand.pose.apply_point(&frame.p4);
            assert!(fin.cross(&hangs[0].v).norm() < 1e-6 * fin.norm());
        }
    }
}

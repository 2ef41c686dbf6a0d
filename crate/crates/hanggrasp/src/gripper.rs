//! Parametric hook-augmented parallel-jaw gripper: key points, closed-loop
//! collision capsules, and the gripper-plane slicing query.

use nalgebra::{Point3, Vector3};
use serde::{Deserialize, Serialize};

use crate::cloud::SurfaceCloud;
use crate::error::{Error, Result};
use crate::mesh::TriangleMesh;
use crate::transform::RigidTransform;

/// Gripper dimensions in meters. The local frame: origin at the palm center,
/// z toward the fingertips, x from the straight-finger jaw toward the
/// L-finger jaw.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(default)]
pub struct GripperModel {
    /// Finger length.
    pub l_f: f64,
    /// Maximum opening width.
    pub l_w: f64,
    /// Horizontal rod length.
    pub l_h: f64,
    /// Hand depth, wrist to palm.
    pub l_b: f64,
    /// Collision thickness of fingers and rod.
    pub rod_radius: f64,
    /// Current jaw separation, in [0, l_w].
    pub opening: f64,
    /// Half thickness of the slicing slab for caged-point queries.
    pub slab_half_thickness: f64,
}

impl Default for GripperModel {
    fn default() -> Self {
        Self {
            l_f: 0.08,
            l_w: 0.08,
            l_h: 0.03,
            l_b: 0.06,
            rod_radius: 0.005,
            opening: 0.08,
            slab_half_thickness: 0.008,
        }
    }
}

impl GripperModel {
    pub fn validate(&self) -> Result<()> {
        let check = |ok: bool, field: &str, detail: String| -> Result<()> {
            if ok {
                Ok(())
            } else {
                Err(Error::InvalidConfig {
                    field: format!("gripper.{field}"),
                    detail,
                })
            }
        };
        check(self.l_f > 0.0, "l_f", format!("must be positive, got {}", self.l_f))?;
        check(self.l_b > 0.0, "l_b", format!("must be positive, got {}", self.l_b))?;
        check(
            self.l_h > 0.0 && self.l_h < self.l_w,
            "l_h",
            format!("need 0 < l_h < l_w, got l_h={} l_w={}", self.l_h, self.l_w),
        )?;
        check(
            self.rod_radius > 0.0,
            "rod_radius",
            format!("must be positive, got {}", self.rod_radius),
        )?;
        check(
            (0.0..=self.l_w).contains(&self.opening),
            "opening",
            format!("need 0 <= opening <= l_w, got {}", self.opening),
        )?;
        check(
            self.slab_half_thickness > 0.0,
            "slab_half_thickness",
            format!("must be positive, got {}", self.slab_half_thickness),
        )
    }

    /// Same gripper at the closed configuration: the rod tip meets the
    /// straight-finger line, forming the caging loop.
    pub fn closed(&self) -> GripperModel {
        GripperModel {
            opening: self.l_h,
            ..*self
        }
    }

    pub fn at_opening(&self, opening: f64) -> GripperModel {
        GripperModel { opening, ..*self }
    }
}

/// Canonical key points of the gripper in its local frame.
#[derive(Debug, Clone, Copy)]
pub struct GripperFrame {
    /// Rod endpoint.
    pub p1: Point3<f64>,
    /// Straight-finger tip.
    pub p2: Point3<f64>,
    /// L-finger elbow.
    pub p3: Point3<f64>,
    /// Straight-finger root.
    pub p4: Point3<f64>,
    /// L-finger root.
    pub p5: Point3<f64>,
    /// Wrist point.
    pub p6: Point3<f64>,
    /// Palm center.
    pub p7: Point3<f64>,
    /// Midpoint of the rod endpoint and the straight-finger tip.
    pub p_m: Point3<f64>,
    /// Wrist-ward axis, p7 -> p6.
    pub n1: Vector3<f64>,
    /// Rod axis sense, p3 -> p1.
    pub n2: Vector3<f64>,
}

/// Key points at the model's current opening.
pub fn key_points(model: &GripperModel) -> GripperFrame {
    let w = model.opening;
    let p4 = Point3::new(-w / 2.0, 0.0, 0.0);
    let p2 = Point3::new(-w / 2.0, 0.0, model.l_f);
    let p5 = Point3::new(w / 2.0, 0.0, 0.0);
    let p3 = Point3::new(w / 2.0, 0.0, model.l_f);
    let p1 = Point3::new(w / 2.0 - model.l_h, 0.0, model.l_f);
    let p6 = Point3::new(0.0, 0.0, -model.l_b);
    let p7 = Point3::origin();
    let p_m = Point3::from((p1.coords + p2.coords) / 2.0);
    GripperFrame {
        p1,
        p2,
        p3,
        p4,
        p5,
        p6,
        p7,
        p_m,
        n1: Vector3::new(0.0, 0.0, -1.0),
        n2: Vector3::new(-1.0, 0.0, 0.0),
    }
}

/// Capsule: segment plus radius.
#[derive(Debug, Clone, Copy)]
pub struct Capsule {
    pub a: Point3<f64>,
    pub b: Point3<f64>,
    pub radius: f64,
}

impl Capsule {
    pub fn distance(&self, p: &Point3<f64>) -> f64 {
        let ab = self.b - self.a;
        let denom = ab.norm_squared();
        let t = if denom > 0.0 {
            ((p - self.a).dot(&ab) / denom).clamp(0.0, 1.0)
        } else {
            0.0
        };
        (p - (self.a + ab * t)).norm()
    }

    pub fn contains(&self, p: &Point3<f64>) -> bool {
        self.distance(p) <= self.radius
    }

    pub fn transformed(&self, pose: &RigidTransform) -> Capsule {
        Capsule {
            a: pose.apply_point(&self.a),
            b: pose.apply_point(&self.b),
            radius: self.radius,
        }
    }
}

/// Collision solid of the gripper in its local frame, evaluated at the
/// CLOSED configuration: finger, rod and palm capsules of `rod_radius`, plus
/// a wrist stub capsule of radius l_w / 4.
pub fn collision_volume(model: &GripperModel) -> Vec<Capsule> {
    let f = key_points(&model.closed());
    let r = model.rod_radius;
    vec![
        Capsule { a: f.p4, b: f.p2, radius: r },
        Capsule { a: f.p5, b: f.p3, radius: r },
        Capsule { a: f.p3, b: f.p1, radius: r },
        Capsule { a: f.p4, b: f.p5, radius: r },
        Capsule {
            a: f.p7,
            b: f.p6,
            radius: model.l_w / 4.0,
        },
    ]
}

/// True when the point lies inside any capsule of the closed gripper posed in
/// the world.
pub fn volume_contains(capsules: &[Capsule], p: &Point3<f64>) -> bool {
    capsules.iter().any(|c| c.contains(p))
}

/// Cloud points inside the slab rectangle bounded by the two fingers at full
/// opening, the palm line and the fingertip line, in gripper-local
/// coordinates of `pose`.
pub fn slice_caged_points(
    model: &GripperModel,
    pose: &RigidTransform,
    cloud: &SurfaceCloud,
) -> Vec<Point3<f64>> {
    let half_w = model.l_w / 2.0;
    let slab = model.slab_half_thickness;
    cloud
        .points
        .iter()
        .filter(|p| {
            let q = pose.to_local(p);
            q.y.abs() <= slab && (-half_w..=half_w).contains(&q.x) && (0.0..=model.l_f).contains(&q.z)
        })
        .copied()
        .collect()
}

/// Coarse capsule tessellation for visualization export.
pub fn capsule_mesh(capsule: &Capsule, res: usize) -> TriangleMesh {
    let axis = capsule.b - capsule.a;
    let len = axis.norm();
    let r = capsule.radius;
    let rings = (res / 4).max(3);
    // Profile of a capsule standing on the z axis, then posed along the
    // segment.
    let mut profile = Vec::new();
    profile.push((0.0, -r));
    for k in 1..rings {
        let t = std::f64::consts::FRAC_PI_2 * k as f64 / rings as f64;
        profile.push((r * t.sin(), -r * t.cos()));
    }
    profile.push((r, 0.0));
    profile.push((r, len));
    for k in 1..rings {
        let t = std::f64::consts::FRAC_PI_2 * k as f64 / rings as f64;
        profile.push((r * t.cos(), len + r * t.sin()));
    }
    profile.push((0.0, len + r));
    let local = crate::synthetics::revolve(&profile, res, Vector3::zeros());
    let z = if len > 1e-12 {
        axis / len
    } else {
        Vector3::new(0.0, 0.0, 1.0)
    };
    let pick = if z.x.abs() < 0.9 {
        Vector3::new(1.0, 0.0, 0.0)
    } else {
        Vector3::new(0.0, 1.0, 0.0)
    };
    let x = (pick - z * pick.dot(&z)).normalize();
    let y = z.cross(&x);
    let pose = RigidTransform::from_axes(x, y, z, capsule.a.coords);
    local.transformed(&pose)
}

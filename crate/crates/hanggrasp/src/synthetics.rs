//! Parametric watertight test meshes with analytic ground truth.

use std::collections::HashMap;

use nalgebra::{Matrix3, Point3, Vector3};
use serde::{Deserialize, Serialize};

use crate::bvh::Bvh;
use crate::error::{Error, Result};
use crate::mesh::TriangleMesh;
use crate::transform::RigidTransform;

/// Analytic truth for one hangable opening of a synthetic shape.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct HoleTruth {
    pub center: [f64; 3],
    pub axis: [f64; 3],
    pub expected_m: f64,
    pub gap_bisector: Option<[f64; 3]>,
}

/// Analytic ground truth emitted next to each generated mesh.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GroundTruth {
    pub com: Option<[f64; 3]>,
    pub watertight: bool,
    pub holes: Vec<HoleTruth>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ShapeKind {
    Torus,
    ArcTorus,
    Mug,
    Hanger,
    PlateWithHoles,
    Sphere,
    Box,
    Cylinder,
}

/// Dimensioned request for one synthetic shape. Unused fields are ignored by
/// kinds that do not need them.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ShapeSpec {
    pub kind: ShapeKind,
    /// Ring radius for torus-like shapes (meters).
    pub major_radius: f64,
    /// Tube radius for torus-like shapes (meters).
    pub minor_radius: f64,
    /// Swept angle for the arc torus, degrees in (0, 360).
    pub sweep_deg: f64,
    /// Box edge lengths (meters).
    pub size: [f64; 3],
    /// Sphere / cylinder radius (meters).
    pub radius: f64,
    /// Cylinder height (meters).
    pub height: f64,
    /// Tessellation density (segments around a full revolution).
    pub resolution: usize,
    pub seed: u64,
}

impl ShapeSpec {
    pub fn new(kind: ShapeKind) -> Self {
        Self {
            kind,
            major_radius: 0.05,
            minor_radius: 0.01,
            sweep_deg: 270.0,
            size: [0.08, 0.08, 0.08],
            radius: 0.05,
            height: 0.1,
            resolution: 64,
            seed: 0,
        }
    }
}

fn check_positive(value: f64, field: &str) -> Result<()> {
    if value > 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidConfig {
            field: field.to_string(),
            detail: format!("must be positive, got {value}"),
        })
    }
}

/// Builds the requested shape and its analytic ground truth.
pub fn build_shape(spec: &ShapeSpec) -> Result<(TriangleMesh, GroundTruth)> {
    if spec.resolution < 8 {
        return Err(Error::ResolutionTooLow(spec.resolution));
    }
    let res = spec.resolution;
    let (mesh, truth) = match spec.kind {
        ShapeKind::Torus => {
            check_positive(spec.major_radius, "major_radius")?;
            check_positive(spec.minor_radius, "minor_radius")?;
            let mesh = torus_mesh(spec.major_radius, spec.minor_radius, res, Vector3::zeros());
            let truth = GroundTruth {
                com: Some([0.0, 0.0, 0.0]),
                watertight: true,
                holes: vec![HoleTruth {
                    center: [0.0, 0.0, 0.0],
                    axis: [0.0, 0.0, 1.0],
                    expected_m: 1.0,
                    gap_bisector: None,
                }],
            };
            (mesh, truth)
        }
        ShapeKind::ArcTorus => {
            check_positive(spec.major_radius, "major_radius")?;
            check_positive(spec.minor_radius, "minor_radius")?;
            if !(spec.sweep_deg > 0.0 && spec.sweep_deg < 360.0) {
                return Err(Error::InvalidConfig {
                    field: "sweep_deg".into(),
                    detail: format!("must be in (0, 360), got {}", spec.sweep_deg),
                });
            }
            let sweep = spec.sweep_deg.to_radians();
            let mesh = arc_torus_mesh(spec.major_radius, spec.minor_radius, sweep, res);
            // The arc is centered on +x; the gap bisector points along -x.
            let truth = GroundTruth {
                com: None,
                watertight: true,
                holes: vec![HoleTruth {
                    center: [0.0, 0.0, 0.0],
                    axis: [0.0, 0.0, 1.0],
                    expected_m: spec.sweep_deg / 360.0,
                    gap_bisector: Some([-1.0, 0.0, 0.0]),
                }],
            };
            (mesh, truth)
        }
        ShapeKind::Sphere => {
            check_positive(spec.radius, "radius")?;
            let mesh = sphere_mesh(spec.radius, res, Vector3::zeros());
            let truth = GroundTruth {
                com: Some([0.0, 0.0, 0.0]),
                watertight: true,
                holes: vec![],
            };
            (mesh, truth)
        }
        ShapeKind::Box => {
            for (i, s) in spec.size.iter().enumerate() {
                check_positive(*s, &format!("size[{i}]"))?;
            }
            let mesh = box_mesh(
                Vector3::new(spec.size[0], spec.size[1], spec.size[2]),
                Point3::origin(),
            );
            let truth = GroundTruth {
                com: Some([0.0, 0.0, 0.0]),
                watertight: true,
                holes: vec![],
            };
            (mesh, truth)
        }
        ShapeKind::Cylinder => {
            check_positive(spec.radius, "radius")?;
            check_positive(spec.height, "height")?;
            let mesh = cylinder_mesh(spec.radius, spec.height, res, Vector3::zeros());
            let truth = GroundTruth {
                com: Some([0.0, 0.0, 0.0]),
                watertight: true,
                holes: vec![],
            };
            (mesh, truth)
        }
        ShapeKind::PlateWithHoles => {
            let mesh = plate_with_holes_mesh();
            let truth = GroundTruth {
                com: Some([0.0, 0.0, 0.0]),
                watertight: true,
                holes: vec![
                    HoleTruth {
                        center: [-0.06, 0.0, 0.0],
                        axis: [0.0, 0.0, 1.0],
                        expected_m: 1.0,
                        gap_bisector: None,
                    },
                    HoleTruth {
                        center: [0.06, 0.0, 0.0],
                        axis: [0.0, 0.0, 1.0],
                        expected_m: 1.0,
                        gap_bisector: None,
                    },
                ],
            };
            (mesh, truth)
        }
        ShapeKind::Mug => {
            let mesh = mug_mesh(res);
            let truth = GroundTruth {
                com: None,
                watertight: true,
                holes: vec![HoleTruth {
                    center: [0.044, 0.0, 0.05],
                    axis: [0.0, 1.0, 0.0],
                    expected_m: 1.0,
                    gap_bisector: None,
                }],
            };
            (mesh, truth)
        }
        ShapeKind::Hanger => {
            let mesh = hanger_mesh(res);
            let truth = GroundTruth {
                com: None,
                watertight: true,
                holes: vec![HoleTruth {
                    center: [0.0, 0.0, 0.05],
                    axis: [0.0, 1.0, 0.0],
                    expected_m: 300.0 / 360.0,
                    gap_bisector: Some([0.0, 0.0, -1.0]),
                }],
            };
            (mesh, truth)
        }
    };
    if !mesh.is_watertight() {
        return Err(Error::ResolutionTooLow(spec.resolution));
    }
    Ok((mesh, truth))
}

/// Keeps only faces visible from `viewpoint` (occlusion included), mimicking
/// a single-viewpoint scan. The result is generally not watertight.
pub fn partial_scan(mesh: &TriangleMesh, viewpoint: &Point3<f64>) -> Result<TriangleMesh> {
    let bvh = Bvh::build(mesh);
    let mut faces = Vec::new();
    for (i, f) in mesh.faces.iter().enumerate() {
        let centroid = mesh.face_centroid(i);
        let dir = (centroid - viewpoint).normalize();
        if let Some(hit) = bvh.first_hit(viewpoint, &dir) {
            if hit.face == i {
                faces.push(*f);
            }
        }
    }
    TriangleMesh::new(mesh.vertices.clone(), faces)
}

/// Axis-aligned box.
pub fn box_mesh(size: Vector3<f64>, center: Point3<f64>) -> TriangleMesh {
    let h = size / 2.0;
    let mut vertices = Vec::with_capacity(8);
    for &z in &[-h.z, h.z] {
        for &y in &[-h.y, h.y] {
            for &x in &[-h.x, h.x] {
                vertices.push(center + Vector3::new(x, y, z));
            }
        }
    }
    // Index layout: bit0 = x, bit1 = y, bit2 = z.
    let quads = [
        [0, 2, 3, 1], // bottom (z-)
        [4, 5, 7, 6], // top (z+)
        [0, 1, 5, 4], // y-
        [2, 6, 7, 3], // y+
        [0, 4, 6, 2], // x-
        [1, 3, 7, 5], // x+
    ];
    let mut faces = Vec::with_capacity(12);
    for q in quads {
        faces.push([q[0], q[1], q[2]]);
        faces.push([q[0], q[2], q[3]]);
    }
    TriangleMesh::new(vertices, faces).expect("box is valid")
}

/// Revolves an open profile polyline (radial, z), running from the axis to
/// the axis, around the z axis. Produces a closed consistently-wound surface.
pub(crate) fn revolve(profile: &[(f64, f64)], res: usize, center: Vector3<f64>) -> TriangleMesh {
    assert!(profile.len() >= 3);
    assert!(profile.first().unwrap().0.abs() < 1e-12);
    assert!(profile.last().unwrap().0.abs() < 1e-12);
    let mut vertices: Vec<Point3<f64>> = Vec::new();
    // ring_start[k] = index of first vertex of ring k; poles store one vertex.
    let mut ring_start = Vec::with_capacity(profile.len());
    let mut is_pole = Vec::with_capacity(profile.len());
    for &(rho, z) in profile {
        ring_start.push(vertices.len());
        if rho.abs() < 1e-12 {
            is_pole.push(true);
            vertices.push(Point3::from(center + Vector3::new(0.0, 0.0, z)));
        } else {
            is_pole.push(false);
            for i in 0..res {
                let theta = 2.0 * std::f64::consts::PI * i as f64 / res as f64;
                vertices.push(Point3::from(
                    center + Vector3::new(rho * theta.cos(), rho * theta.sin(), z),
                ));
            }
        }
    }
    let mut faces = Vec::new();
    for k in 0..profile.len() - 1 {
        let (a0, b0) = (ring_start[k], ring_start[k + 1]);
        match (is_pole[k], is_pole[k + 1]) {
            (true, true) => {}
            (true, false) => {
                for i in 0..res {
                    let j = (i + 1) % res;
                    faces.push([a0, b0 + i, b0 + j]);
                }
            }
            (false, true) => {
                for i in 0..res {
                    let j = (i + 1) % res;
                    faces.push([a0 + i, b0, a0 + j]);
                }
            }
            (false, false) => {
                for i in 0..res {
                    let j = (i + 1) % res;
                    faces.push([a0 + i, b0 + i, b0 + j]);
                    faces.push([a0 + i, b0 + j, a0 + j]);
                }
            }
        }
    }
    TriangleMesh::new(vertices, faces).expect("revolved profile is valid")
}

/// UV sphere.
pub fn sphere_mesh(radius: f64, res: usize, center: Vector3<f64>) -> TriangleMesh {
    let rings = (res / 2).max(4);
    let mut profile = Vec::with_capacity(rings + 1);
    for k in 0..=rings {
        let theta = std::f64::consts::PI * k as f64 / rings as f64;
        profile.push((radius * theta.sin(), -radius * theta.cos()));
    }
    // Force exact axis endpoints.
    profile[0].0 = 0.0;
    profile.last_mut().unwrap().0 = 0.0;
    revolve(&profile, res, center)
}

/// Solid closed cylinder centered on the origin, axis z.
pub fn cylinder_mesh(radius: f64, height: f64, res: usize, center: Vector3<f64>) -> TriangleMesh {
    let h = height / 2.0;
    revolve(&[(0.0, -h), (radius, -h), (radius, h), (0.0, h)], res, center)
}

/// Open-top hollow cup (blind pocket), axis z, base at z = 0.
pub fn cup_mesh(
    outer_r: f64,
    inner_r: f64,
    height: f64,
    bottom: f64,
    res: usize,
    center: Vector3<f64>,
) -> TriangleMesh {
    revolve(
        &[
            (0.0, 0.0),
            (outer_r, 0.0),
            (outer_r, height),
            (inner_r, height),
            (inner_r, bottom),
            (0.0, bottom),
        ],
        res,
        center,
    )
}

/// Full torus around the z axis.
pub fn torus_mesh(major: f64, minor: f64, res: usize, center: Vector3<f64>) -> TriangleMesh {
    let n_major = res.max(8);
    let n_minor = (res / 2).max(8);
    let mut vertices = Vec::with_capacity(n_major * n_minor);
    for i in 0..n_major {
        let theta = 2.0 * std::f64::consts::PI * i as f64 / n_major as f64;
        for j in 0..n_minor {
            let alpha = 2.0 * std::f64::consts::PI * j as f64 / n_minor as f64;
            let rho = major + minor * alpha.cos();
            vertices.push(Point3::from(
                center
                    + Vector3::new(rho * theta.cos(), rho * theta.sin(), minor * alpha.sin()),
            ));
        }
    }
    let mut faces = Vec::new();
    for i in 0..n_major {
        let i1 = (i + 1) % n_major;
        for j in 0..n_minor {
            let j1 = (j + 1) % n_minor;
            let a = i * n_minor + j;
            let b = i1 * n_minor + j;
            let c = i1 * n_minor + j1;
            let d = i * n_minor + j1;
            faces.push([a, b, c]);
            faces.push([a, c, d]);
        }
    }
    TriangleMesh::new(vertices, faces).expect("torus is valid")
}

/// Torus arc swept over `sweep` radians, centered on the +x direction, with
/// flat disk caps at both ends. The gap bisector is -x.
pub fn arc_torus_mesh(major: f64, minor: f64, sweep: f64, res: usize) -> TriangleMesh {
    let n_major = ((res as f64 * sweep / (2.0 * std::f64::consts::PI)).ceil() as usize).max(4);
    let n_minor = (res / 2).max(8);
    let mut vertices = Vec::new();
    for i in 0..=n_major {
        let theta = -sweep / 2.0 + sweep * i as f64 / n_major as f64;
        for j in 0..n_minor {
            let alpha = 2.0 * std::f64::consts::PI * j as f64 / n_minor as f64;
            let rho = major + minor * alpha.cos();
            vertices.push(Point3::new(
                rho * theta.cos(),
                rho * theta.sin(),
                minor * alpha.sin(),
            ));
        }
    }
    let mut faces = Vec::new();
    for i in 0..n_major {
        for j in 0..n_minor {
            let j1 = (j + 1) % n_minor;
            let a = i * n_minor + j;
            let b = (i + 1) * n_minor + j;
            let c = (i + 1) * n_minor + j1;
            let d = i * n_minor + j1;
            faces.push([a, b, c]);
            faces.push([a, c, d]);
        }
    }
    // End caps: fans around the ring centers.
    let theta0 = -sweep / 2.0;
    let theta1 = sweep / 2.0;
    let c0 = vertices.len();
    vertices.push(Point3::new(major * theta0.cos(), major * theta0.sin(), 0.0));
    let c1 = vertices.len();
    vertices.push(Point3::new(major * theta1.cos(), major * theta1.sin(), 0.0));
    for j in 0..n_minor {
        let j1 = (j + 1) % n_minor;
        faces.push([c0, j, j1]);
        faces.push([c1, n_major * n_minor + j1, n_major * n_minor + j]);
    }
    TriangleMesh::new(vertices, faces).expect("arc torus is valid")
}

/// Concatenates meshes as one triangle soup. Components stay edge-manifold,
/// so the union of watertight parts still reports watertight.
pub fn merge_meshes(parts: &[TriangleMesh]) -> TriangleMesh {
    let mut vertices = Vec::new();
    let mut faces = Vec::new();
    for part in parts {
        let off = vertices.len();
        vertices.extend(part.vertices.iter().copied());
        faces.extend(part.faces.iter().map(|f| [f[0] + off, f[1] + off, f[2] + off]));
    }
    TriangleMesh::new(vertices, faces).expect("merged parts are valid")
}

/// 24 x 12 x 1 cm plate with two 4 x 4 cm through holes at x = +-6 cm,
/// assembled from closed boxes.
pub fn plate_with_holes_mesh() -> TriangleMesh {
    // Extruded grid: cells on a 5x3 partition of the plate, with the two
    // middle cells of the hole columns removed. Extrusion (instead of gluing
    // boxes) keeps the surface free of interior faces, which matters for
    // surface sampling.
    let h = 0.005;
    let xs = [-0.12, -0.08, -0.04, 0.04, 0.08, 0.12];
    let ys = [-0.06, -0.02, 0.02, 0.06];
    let is_hole = |i: usize, j: usize| j == 1 && (i == 1 || i == 3);
    let kept = |i: isize, j: isize| {
        (0..5).contains(&i) && (0..3).contains(&j) && !is_hole(i as usize, j as usize)
    };

    let mut vertices: Vec<Point3<f64>> = Vec::new();
    let mut index: HashMap<([u64; 2], bool), usize> = HashMap::new();
    let mut faces: Vec<[usize; 3]> = Vec::new();
    let mut vid = |vertices: &mut Vec<Point3<f64>>, x: f64, y: f64, top: bool| -> usize {
        *index
            .entry(([x.to_bits(), y.to_bits()], top))
            .or_insert_with(|| {
                vertices.push(Point3::new(x, y, if top { h } else { -h }));
                vertices.len() - 1
            })
    };
    let quad = |faces: &mut Vec<[usize; 3]>, a: usize, b: usize, c: usize, d: usize| {
        faces.push([a, b, c]);
        faces.push([a, c, d]);
    };

    for i in 0..5 {
        for j in 0..3 {
            if is_hole(i, j) {
                continue;
            }
            let (x0, x1, y0, y1) = (xs[i], xs[i + 1], ys[j], ys[j + 1]);
            let [a, b, c, d] = [(x0, y0), (x1, y0), (x1, y1), (x0, y1)];
            let top: Vec<usize> = [a, b, c, d]
                .iter()
                .map(|&(x, y)| vid(&mut vertices, x, y, true))
                .collect();
            let bot: Vec<usize> = [a, b, c, d]
                .iter()
                .map(|&(x, y)| vid(&mut vertices, x, y, false))
                .collect();
            quad(&mut faces, top[0], top[1], top[2], top[3]);
            quad(&mut faces, bot[0], bot[3], bot[2], bot[1]);
        }
    }
    // Vertical walls along x grid lines: emitted wherever exactly one of the
    // two adjacent cells is solid, wound so the normal faces the empty side.
    for i in 0..=5 {
        for j in 0..3 {
            let left = kept(i as isize - 1, j as isize);
            let right = kept(i as isize, j as isize);
            if left == right {
                continue;
            }
            let x = xs[i];
            let (y0, y1) = (ys[j], ys[j + 1]);
            let b0 = vid(&mut vertices, x, y0, false);
            let b1 = vid(&mut vertices, x, y1, false);
            let t0 = vid(&mut vertices, x, y0, true);
            let t1 = vid(&mut vertices, x, y1, true);
            if left {
                // solid on -x side: outward normal +x
                quad(&mut faces, b0, b1, t1, t0);
            } else {
                quad(&mut faces, b1, b0, t0, t1);
            }
        }
    }
    // Vertical walls along y grid lines.
    for j in 0..=3 {
        for i in 0..5 {
            let below = kept(i as isize, j as isize - 1);
            let above = kept(i as isize, j as isize);
            if below == above {
                continue;
            }
            let y = ys[j];
            let (x0, x1) = (xs[i], xs[i + 1]);
            let b0 = vid(&mut vertices, x0, y, false);
            let b1 = vid(&mut vertices, x1, y, false);
            let t0 = vid(&mut vertices, x0, y, true);
            let t1 = vid(&mut vertices, x1, y, true);
            if below {
                // solid on -y side: outward normal +y
                quad(&mut faces, b1, b0, t0, t1);
            } else {
                quad(&mut faces, b0, b1, t1, t0);
            }
        }
    }
    TriangleMesh::new(vertices, faces).expect("plate grid is valid")
}

fn rot_x(angle: f64) -> Matrix3<f64> {
    let (s, c) = angle.sin_cos();
    Matrix3::new(1.0, 0.0, 0.0, 0.0, c, -s, 0.0, s, c)
}

fn rot_z(angle: f64) -> Matrix3<f64> {
    let (s, c) = angle.sin_cos();
    Matrix3::new(c, -s, 0.0, s, c, 0.0, 0.0, 0.0, 1.0)
}

/// Hollow cup with a torus handle on the +x side, handle plane x-z. The cup
/// is deliberately narrow so the handle hole, not the cavity, is the point
/// of largest free space on any contact-to-com segment.
pub fn mug_mesh(res: usize) -> TriangleMesh {
    let body = cup_mesh(0.018, 0.010, 0.1, 0.006, res, Vector3::zeros());
    let handle = torus_mesh(0.028, 0.004, res, Vector3::zeros()).transformed(&RigidTransform::new(
        rot_x(std::f64::consts::FRAC_PI_2),
        Vector3::new(0.044, 0.0, 0.05),
    ));
    merge_meshes(&[body, handle])
}

/// Horizontal bar with a 300-degree hook arc above it, hook plane x-z,
/// gap opening downward toward the bar.
pub fn hanger_mesh(res: usize) -> TriangleMesh {
    let bar = box_mesh(Vector3::new(0.3, 0.01, 0.02), Point3::origin());
    let hook = arc_torus_mesh(0.02, 0.004, 300f64.to_radians(), res).transformed(
        &RigidTransform::new(
            rot_x(std::f64::consts::FRAC_PI_2) * rot_z(-std::f64::consts::FRAC_PI_2),
            Vector3::new(0.0, 0.0, 0.05),
        ),
    );
    merge_meshes(&[bar, hook])
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn torus_spec_is_watertight_with_truth() {
        let (mesh, truth) = build_shape(&ShapeSpec::new(ShapeKind::Torus)).unwrap();
        assert!(mesh.is_watertight());
        let stats = mesh.stats();
        assert!((stats.com - Point3::origin()).norm() < 1e-9);
        assert_eq!(truth.holes.len(), 1);
        assert_eq!(truth.holes[0].axis, [0.0, 0.0, 1.0]);
    }

    #[test]
    fn arc_torus_records_gap_bisector() {
        let mut spec = ShapeSpec::new(ShapeKind::ArcTorus);
        spec.sweep_deg = 270.0;
        let (mesh, truth) = build_shape(&spec).unwrap();
        assert!(mesh.is_watertight());
        assert_eq!(truth.holes[0].gap_bisector, Some([-1.0, 0.0, 0.0]));
        assert!((truth.holes[0].expected_m - 0.75).abs() < 1e-12);
    }

    #[test]
    fn sphere_has_no_holes() {
        let (mesh, truth) = build_shape(&ShapeSpec::new(ShapeKind::Sphere)).unwrap();
        assert!(mesh.is_watertight());
        assert!(truth.holes.is_empty());
    }

    #[test]
    fn all_kinds_build_watertight() {
        for kind in [
            ShapeKind::Torus,
            ShapeKind::ArcTorus,
            ShapeKind::Mug,
            ShapeKind::Hanger,
            ShapeKind::PlateWithHoles,
            ShapeKind::Sphere,
            ShapeKind::Box,
            ShapeKind::Cylinder,
        ] {
            let (mesh, _) = build_shape(&ShapeSpec::new(kind)).unwrap();
            assert!(mesh.is_watertight(), "{kind:?} not watertight");
        }
    }

    #[test]
    fn invalid_sweep_rejected() {
        let mut spec = ShapeSpec::new(ShapeKind::ArcTorus);
        spec.sweep_deg = 360.0;
        assert!(build_shape(&spec).is_err());
    }

    #[test]
    fn partial_scan_drops_occluded_faces() {
        let (mesh, _) = build_shape(&ShapeSpec::new(ShapeKind::Mug)).unwrap();
        let partial = partial_scan(&mesh, &Point3::new(-0.5, 0.0, 0.05)).unwrap();
        assert!(partial.faces.len() < mesh.faces.len() / 2 + mesh.faces.len() / 4);
        assert!(!partial.is_watertight());
    }
}

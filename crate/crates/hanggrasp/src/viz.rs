//! Offline visualization export: posed gripper solids, the ray fans of each
//! hang record as colored line sets, and point markers.

use std::io::Write as _;
use std::path::{Path, PathBuf};

use nalgebra::{Point3, Vector3};

use crate::error::{Error, Result};
use crate::gripper::{self, GripperModel};
use crate::mesh::{save_obj, TriangleMesh};
use crate::pipeline::Report;
use crate::synthetics::merge_meshes;

const HIT_COLOR: [u8; 3] = [40, 200, 40];
const MISS_COLOR: [u8; 3] = [220, 50, 50];
const CENTER_COLOR: [u8; 3] = [255, 255, 255];
/// Length of the drawn miss ray (meters).
const MISS_RAY_LENGTH: f64 = 0.06;
/// Marker octahedron radius (meters).
const MARKER_RADIUS: f64 = 0.002;

fn io_err(e: std::io::Error) -> Error {
    Error::Io(e)
}

/// Writes all hang-record ray fans as one colored line set (PLY with edge
/// elements): hit rays run from the hanging position to their contact, miss
/// rays run along the open direction.
pub fn write_ray_set(report: &Report, path: &Path) -> Result<()> {
    let mut vertices: Vec<([f64; 3], [u8; 3])> = Vec::new();
    let mut edges: Vec<(usize, usize)> = Vec::new();
    for hang in &report.hangs {
        let c_idx = vertices.len();
        vertices.push((hang.c, CENTER_COLOR));
        for contact in &hang.contacts {
            let idx = vertices.len();
            vertices.push((*contact, HIT_COLOR));
            edges.push((c_idx, idx));
        }
        if let Some(a) = hang.a {
            let tip = [
                hang.c[0] + a[0] * MISS_RAY_LENGTH,
                hang.c[1] + a[1] * MISS_RAY_LENGTH,
                hang.c[2] + a[2] * MISS_RAY_LENGTH,
            ];
            let idx = vertices.len();
            vertices.push((tip, MISS_COLOR));
            edges.push((c_idx, idx));
        }
    }
    let file = std::fs::File::create(path).map_err(io_err)?;
    let mut w = std::io::BufWriter::new(file);
    writeln!(w, "ply").map_err(io_err)?;
    writeln!(w, "format ascii 1.0").map_err(io_err)?;
    writeln!(w, "element vertex {}", vertices.len()).map_err(io_err)?;
    for axis in ["x", "y", "z"] {
        writeln!(w, "property double {axis}").map_err(io_err)?;
    }
    for channel in ["red", "green", "blue"] {
        writeln!(w, "property uchar {channel}").map_err(io_err)?;
    }
    writeln!(w, "element edge {}", edges.len()).map_err(io_err)?;
    writeln!(w, "property int vertex1").map_err(io_err)?;
    writeln!(w, "property int vertex2").map_err(io_err)?;
    writeln!(w, "end_header").map_err(io_err)?;
    for (p, rgb) in &vertices {
        writeln!(w, "{} {} {} {} {} {}", p[0], p[1], p[2], rgb[0], rgb[1], rgb[2])
            .map_err(io_err)?;
    }
    for (a, b) in &edges {
        writeln!(w, "{a} {b}").map_err(io_err)?;
    }
    Ok(())
}

fn octahedron(center: &[f64; 3], radius: f64) -> TriangleMesh {
    let c = Point3::new(center[0], center[1], center[2]);
    let vertices = vec![
        c + Vector3::new(radius, 0.0, 0.0),
        c + Vector3::new(-radius, 0.0, 0.0),
        c + Vector3::new(0.0, radius, 0.0),
        c + Vector3::new(0.0, -radius, 0.0),
        c + Vector3::new(0.0, 0.0, radius),
        c + Vector3::new(0.0, 0.0, -radius),
    ];
    let faces = vec![
        [0, 2, 4],
        [2, 1, 4],
        [1, 3, 4],
        [3, 0, 4],
        [2, 0, 5],
        [1, 2, 5],
        [3, 1, 5],
        [0, 3, 5],
    ];
    TriangleMesh::new(vertices, faces).expect("octahedron is valid")
}

/// Writes octahedron markers at every hanging position, ray contact, and
/// fingertip matching point.
pub fn write_markers(report: &Report, path: &Path) -> Result<()> {
    let mut parts = Vec::new();
    for hang in &report.hangs {
        parts.push(octahedron(&hang.c, MARKER_RADIUS));
        for contact in &hang.contacts {
            parts.push(octahedron(contact, MARKER_RADIUS));
        }
    }
    for grasp in &report.grasps {
        if let Some(q_m) = grasp.q_m {
            parts.push(octahedron(&q_m, MARKER_RADIUS));
        }
    }
    if parts.is_empty() {
        // Nothing to mark; still emit a valid (empty-object) file.
        std::fs::write(path, "# no markers\n").map_err(io_err)?;
        return Ok(());
    }
    save_obj(&merge_meshes(&parts), path)
}

/// Posed closed-gripper solid for one ranked grasp.
pub fn grasp_solid(report_grasp: &crate::pipeline::GraspJson, model: &GripperModel) -> TriangleMesh {
    let pose = report_grasp.pose();
    let parts: Vec<TriangleMesh> = gripper::collision_volume(model)
        .iter()
        .map(|capsule| gripper::capsule_mesh(&capsule.transformed(&pose), 24))
        .collect();
    merge_meshes(&parts)
}

/// Writes everything for one report into `out_dir`: `rays.ply`,
/// `markers.obj`, and one `grasp_NN.obj` per ranked pose. Returns the paths
/// written.
pub fn export_viz(report: &Report, model: &GripperModel, out_dir: &Path) -> Result<Vec<PathBuf>> {
    std::fs::create_dir_all(out_dir).map_err(io_err)?;
    let mut written = Vec::new();
    let rays = out_dir.join("rays.ply");
    write_ray_set(report, &rays)?;
    written.push(rays);
    let markers = out_dir.join("markers.obj");
    write_markers(report, &markers)?;
    written.push(markers);
    for grasp in &report.grasps {
        let path = out_dir.join(format!("grasp_{:02}.obj", grasp.rank));
        save_obj(&grasp_solid(grasp, model), &path)?;
        written.push(path);
    }
    Ok(written)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pipeline::{build_report, run_detect, PipelineConfig};
    use crate::synthetics;

    fn torus_report() -> (Report, PipelineConfig) {
        let mesh = synthetics::torus_mesh(0.05, 0.01, 48, Vector3::zeros());
        let mut cfg = PipelineConfig::default();
        cfg.apply_profile();
        let run = run_detect(&mesh, &cfg).unwrap();
        (build_report("torus", &cfg, &run), cfg)
    }

    #[test]
    fn export_writes_expected_files() {
        let (report, cfg) = torus_report();
        let dir = tempfile::tempdir().unwrap();
        let written = export_viz(&report, &cfg.gripper, dir.path()).unwrap();
        // rays + markers + one obj per grasp
        assert_eq!(written.len(), 2 + report.grasps.len());
        for path in &written {
            assert!(path.exists());
            assert!(std::fs::metadata(path).unwrap().len() > 0);
        }
    }

    #[test]
    fn ray_file_counts_match_report() {
        let (report, _) = torus_report();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("rays.ply");
        write_ray_set(&report, &path).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        let expect_vertices: usize = report
            .hangs
            .iter()
            .map(|h| 1 + h.contacts.len() + usize::from(h.a.is_some()))
            .sum();
        assert!(text.contains(&format!("element vertex {expect_vertices}")));
        let expect_edges: usize = report
            .hangs
            .iter()
            .map(|h| h.contacts.len() + usize::from(h.a.is_some()))
            .sum();
        assert!(text.contains(&format!("element edge {expect_edges}")));
    }

    #[test]
    fn empty_report_still_exports() {
        let report = Report {
            mesh: "empty".into(),
            config_hash: "0".repeat(64),
            com: [0.0; 3],
            hangs: vec![],
            grasps: vec![],
        };
        let dir = tempfile::tempdir().unwrap();
        let written = export_viz(&report, &GripperModel::default(), dir.path()).unwrap();
        assert_eq!(written.len(), 2);
    }

    #[test]
    fn grasp_solid_is_nonempty_and_posed() {
        let (report, cfg) = torus_report();
        let solid = grasp_solid(&report.grasps[0], &cfg.gripper);
        assert!(!solid.faces.is_empty());
        // The solid must sit near the structure, not at the origin of the
        // gripper frame.
        let pose = report.grasps[0].pose();
        let centroid: Vector3<f64> = solid
            .vertices
            .iter()
            .fold(Vector3::zeros(), |acc, p| acc + p.coords)
            / solid.vertices.len() as f64;
        let palm = pose.apply_point(&Point3::origin());
        assert!((centroid - palm.coords).norm() < 0.2);
    }
}

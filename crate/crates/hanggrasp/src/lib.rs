//! Detection of hangable structures on triangle meshes and synthesis of
//! ranked 6D grasp poses for a hook-augmented parallel-jaw gripper.
//!
//! The pipeline: load a mesh, sample an oriented surface cloud, find through
//! holes that can carry the object, build parallel and vertical grasp
//! candidates around them, prune by collision counting, and rank by a
//! direction/completeness score.

pub mod bvh;
pub mod cloud;
pub mod error;
pub mod grasp;
pub mod gripper;
pub mod hangability;
pub mod mesh;
pub mod pipeline;
pub mod scoring;
pub mod synthetics;
pub mod transform;
pub mod viz;

pub use bvh::{ray_first_hit, Bvh, RayHit};
pub use cloud::{poisson_disk_sample, SurfaceCloud};
pub use error::{Error, Result};
pub use grasp::{generate_grasps, GenConfig, GraspCandidate, GraspKind, SignChoices};
pub use gripper::{collision_volume, key_points, GripperFrame, GripperModel};
pub use hangability::{detect_hangability, HangConfig, HangRecord};
pub use mesh::{load_mesh, MeshStats, TriangleMesh};
pub use scoring::{rank_top_k, score_candidates, ScoreBreakdown, ScoreConfig};
pub use pipeline::{run_detect, run_hang, PipelineConfig, Profile, Report};
pub use transform::RigidTransform;

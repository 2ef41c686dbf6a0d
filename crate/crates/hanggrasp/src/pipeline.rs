//! End-to-end orchestration: configuration, the detect/hang runs, and the
//! JSON report schema.

use std::path::Path;

use nalgebra::{Matrix3, Point3, Vector3};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::bvh::Bvh;
use crate::cloud::{poisson_disk_sample, SurfaceCloud};
use crate::error::{Error, Result};
use crate::grasp::{generate_grasps, GenConfig, GraspCandidate, GraspKind};
use crate::gripper::GripperModel;
use crate::hangability::{detect_hangability_with_cloud, HangConfig, HangRecord};
use crate::mesh::{MeshStats, TriangleMesh};
use crate::scoring::{rank_top_k, score_candidates, ScoreBreakdown, ScoreConfig};
use crate::transform::RigidTransform;

/// Viewpoint profile: `full` assumes a complete scan (no fingertip
/// standoff); `single` adds standoff to tolerate unseen geometry.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Profile {
    Full,
    Single,
}

impl Profile {
    pub fn d2(&self) -> f64 {
        match self {
            Profile::Full => 0.0,
            Profile::Single => 0.005,
        }
    }
}

impl std::str::FromStr for Profile {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "full" => Ok(Profile::Full),
            "single" => Ok(Profile::Single),
            other => Err(Error::InvalidConfig {
                field: "run.profile".into(),
                detail: format!("unknown profile {other:?}, expected \"full\" or \"single\""),
            }),
        }
    }
}

/// Run-level knobs.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(default)]
pub struct RunConfig {
    pub top_k: usize,
    pub seed: u64,
    pub profile: Profile,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            top_k: 10,
            seed: 0,
            profile: Profile::Full,
        }
    }
}

/// Whole-pipeline configuration; TOML sections `hang`, `gen`, `score`,
/// `gripper`, `run`.
#[derive(Debug, Clone, Copy, Default, Serialize, Deserialize)]
#[serde(default)]
pub struct PipelineConfig {
    pub hang: HangConfig,
    pub gen: GenConfig,
    pub score: ScoreConfig,
    pub gripper: GripperModel,
    pub run: RunConfig,
}

impl PipelineConfig {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let cfg: PipelineConfig = toml::from_str(text)?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|source| Error::UnreadableFile {
            path: path.to_path_buf(),
            source,
        })?;
        Self::from_toml_str(&text)
    }

    /// The profile owns the fingertip standoff.
    pub fn apply_profile(&mut self) {
        self.gen.d2 = self.run.profile.d2();
    }

    pub fn validate(&self) -> Result<()> {
        self.hang.validate()?;
        self.gen.validate()?;
        self.score.validate()?;
        self.gripper.validate()?;
        if self.run.top_k == 0 {
            return Err(Error::InvalidConfig {
                field: "run.top_k".into(),
                detail: "must be positive".into(),
            });
        }
        Ok(())
    }

    /// Stable digest of the resolved configuration.
    pub fn config_hash(&self) -> String {
        let canonical = serde_json::to_string(self).expect("config serializes");
        let digest = Sha256::digest(canonical.as_bytes());
        let mut out = String::with_capacity(2 * digest.len());
        for byte in digest {
            out.push_str(&format!("{byte:02x}"));
        }
        out
    }
}

fn pt(p: &Point3<f64>) -> [f64; 3] {
    [p.x, p.y, p.z]
}

fn vec3(v: &Vector3<f64>) -> [f64; 3] {
    [v.x, v.y, v.z]
}

fn rot9(r: &Matrix3<f64>) -> [f64; 9] {
    [
        r[(0, 0)],
        r[(0, 1)],
        r[(0, 2)],
        r[(1, 0)],
        r[(1, 1)],
        r[(1, 2)],
        r[(2, 0)],
        r[(2, 1)],
        r[(2, 2)],
    ]
}

/// A hang record in the output schema.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct HangJson {
    pub c: [f64; 3],
    pub v: [f64; 3],
    pub m: f64,
    pub a: Option<[f64; 3]>,
    pub contacts: Vec<[f64; 3]>,
}

impl HangJson {
    pub fn from_record(rec: &HangRecord) -> Self {
        Self {
            c: pt(&rec.c),
            v: vec3(&rec.v),
            m: rec.m,
            a: rec.a.as_ref().map(vec3),
            contacts: rec.contacts.iter().map(pt).collect(),
        }
    }
}

/// Score fields in the output schema.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct ScoreJson {
    pub alpha: f64,
    pub s_alpha: f64,
    pub beta: Option<f64>,
    pub s_beta: f64,
    pub m: f64,
    pub s_total: f64,
}

impl From<ScoreBreakdown> for ScoreJson {
    fn from(s: ScoreBreakdown) -> Self {
        Self {
            alpha: s.alpha,
            s_alpha: s.s_alpha,
            beta: s.beta,
            s_beta: s.s_beta,
            m: s.m,
            s_total: s.s_total,
        }
    }
}

/// A ranked grasp in the output schema. Rotation is row-major.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GraspJson {
    pub rank: usize,
    pub kind: GraspKind,
    pub hang_index: usize,
    pub contact: [f64; 3],
    pub rotation: [f64; 9],
    pub translation: [f64; 3],
    pub q_m: Option<[f64; 3]>,
    pub n_collisions: usize,
    pub score: ScoreJson,
}

impl GraspJson {
    pub fn from_candidate(rank: usize, cand: &GraspCandidate) -> Self {
        Self {
            rank,
            kind: cand.kind,
            hang_index: cand.hang_index,
            contact: pt(&cand.contact),
            rotation: rot9(&cand.pose.rotation),
            translation: vec3(&cand.pose.translation),
            q_m: cand.q_m.as_ref().map(pt),
            n_collisions: cand.n_collisions,
            score: cand
                .score
                .map(ScoreJson::from)
                .unwrap_or(ScoreJson {
                    alpha: 0.0,
                    s_alpha: 0.0,
                    beta: None,
                    s_beta: 0.0,
                    m: 0.0,
                    s_total: 0.0,
                }),
        }
    }

    pub fn pose(&self) -> RigidTransform {
        let r = &self.rotation;
        RigidTransform::new(
            Matrix3::new(r[0], r[1], r[2], r[3], r[4], r[5], r[6], r[7], r[8]),
            Vector3::new(self.translation[0], self.translation[1], self.translation[2]),
        )
    }
}

/// Top-level output document.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Report {
    pub mesh: String,
    pub config_hash: String,
    pub com: [f64; 3],
    pub hangs: Vec<HangJson>,
    pub grasps: Vec<GraspJson>,
}

/// Intermediate pipeline state, exposed for tests and visualization.
pub struct PipelineRun {
    pub stats: MeshStats,
    pub cloud: SurfaceCloud,
    pub hangs: Vec<HangRecord>,
    pub ranked: Vec<GraspCandidate>,
}

/// Hangability stage only.
pub fn run_hang(mesh: &TriangleMesh, cfg: &PipelineConfig) -> Result<(MeshStats, Vec<HangRecord>)> {
    cfg.validate()?;
    let cloud = poisson_disk_sample(mesh, cfg.hang.sample_count, cfg.run.seed)?;
    let bvh = Bvh::build(mesh);
    let stats = mesh.stats();
    let hangs = detect_hangability_with_cloud(&bvh, &cloud, &stats, &cfg.hang);
    Ok((stats, hangs))
}

/// Full pipeline: hangability, both grasp families, pruning, scoring and
/// ranking.
pub fn run_detect(mesh: &TriangleMesh, cfg: &PipelineConfig) -> Result<PipelineRun> {
    cfg.validate()?;
    let cloud = poisson_disk_sample(mesh, cfg.hang.sample_count, cfg.run.seed)?;
    let bvh = Bvh::build(mesh);
    let stats = mesh.stats();
    let hangs = detect_hangability_with_cloud(&bvh, &cloud, &stats, &cfg.hang);
    let mut cands = generate_grasps(&hangs, &cloud, &cfg.gripper, &cfg.gen)?;
    score_candidates(&mut cands, &hangs, &cfg.gripper, &cfg.score);
    let ranked = rank_top_k(&cands, cfg.run.top_k);
    Ok(PipelineRun {
        stats,
        cloud,
        hangs,
        ranked,
    })
}

/// Builds the output document for a completed run.
pub fn build_report(mesh_name: &str, cfg: &PipelineConfig, run: &PipelineRun) -> Report {
    Report {
        mesh: mesh_name.to_string(),
        config_hash: cfg.config_hash(),
        com: pt(&run.stats.com),
        hangs: run.hangs.iter().map(HangJson::from_record).collect(),
        grasps: run
            .ranked
            .iter()
            .enumerate()
            .map(|(i, c)| GraspJson::from_candidate(i + 1, c))
            .collect(),
    }
}

/// Hang-only document: same schema with an empty grasp list.
pub fn build_hang_report(
    mesh_name: &str,
    cfg: &PipelineConfig,
    stats: &MeshStats,
    hangs: &[HangRecord],
) -> Report {
    Report {
        mesh: mesh_name.to_string(),
        config_hash: cfg.config_hash(),
        com: pt(&stats.com),
        hangs: hangs.iter().map(HangJson::from_record).collect(),
        grasps: Vec::new(),
    }
}

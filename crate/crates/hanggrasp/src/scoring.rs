//! Candidate scoring and ranking: direction score, free-space completeness
//! score, and their product.

use nalgebra::Vector3;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grasp::{GraspCandidate, GraspKind};
use crate::gripper::{key_points, GripperModel};
use crate::hangability::HangRecord;

/// Score components for one candidate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScoreBreakdown {
    /// Angle between the posed wrist-ward axis and the anti-gravity
    /// direction, radians.
    pub alpha: f64,
    pub s_alpha: f64,
    /// Angle between the open direction and the posed escape axis; absent
    /// when the structure surrounds the hanging position completely.
    pub beta: Option<f64>,
    pub s_beta: f64,
    /// Completeness of the source record.
    pub m: f64,
    pub s_total: f64,
}

/// Weights and the world up direction.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(default)]
pub struct ScoreConfig {
    pub gamma_alpha: f64,
    pub gamma_beta: f64,
    pub anti_gravity: Vector3<f64>,
}

impl Default for ScoreConfig {
    fn default() -> Self {
        Self {
            gamma_alpha: 0.04,
            gamma_beta: 2.0,
            anti_gravity: Vector3::new(0.0, 0.0, 1.0),
        }
    }
}

impl ScoreConfig {
    pub fn validate(&self) -> Result<()> {
        let check = |ok: bool, field: &str, detail: String| -> Result<()> {
            if ok {
                Ok(())
            } else {
                Err(Error::InvalidConfig {
                    field: format!("score.{field}"),
                    detail,
                })
            }
        };
        check(
            self.gamma_alpha > 0.0,
            "gamma_alpha",
            format!("must be positive, got {}", self.gamma_alpha),
        )?;
        check(
            self.gamma_beta > 0.0,
            "gamma_beta",
            format!("must be positive, got {}", self.gamma_beta),
        )?;
        check(
            (self.anti_gravity.norm() - 1.0).abs() < 1e-6,
            "anti_gravity",
            "must be a unit vector".into(),
        )
    }
}

fn angle_between(a: &Vector3<f64>, b: &Vector3<f64>) -> f64 {
    a.dot(b).clamp(-1.0, 1.0).acos()
}

/// Gaussian falloff of the angle `alpha` with width `gamma`.
pub fn angle_score(alpha: f64, gamma: f64) -> f64 {
    (-alpha * alpha / gamma).exp()
}

/// How well the wrist points up: alpha and its score.
pub fn score_direction(
    cand: &GraspCandidate,
    model: &GripperModel,
    cfg: &ScoreConfig,
) -> (f64, f64) {
    let frame = key_points(model);
    let wrist_world = cand.pose.rotation * frame.n1;
    let alpha = angle_between(&wrist_world, &cfg.anti_gravity);
    (alpha, angle_score(alpha, cfg.gamma_alpha))
}

/// How well the candidate's escape axis matches the structure's open
/// direction. Full completeness scores 1 with no angle.
pub fn score_completeness(
    cand: &GraspCandidate,
    hang: &HangRecord,
    model: &GripperModel,
    cfg: &ScoreConfig,
) -> (Option<f64>, f64) {
    if hang.m >= 1.0 {
        return (None, 1.0);
    }
    let a = hang
        .a
        .expect("partial record carries its open direction");
    let frame = key_points(model);
    let axis = match cand.kind {
        GraspKind::Parallel => frame.n1,
        GraspKind::Vertical => frame.n2,
    };
    let beta = angle_between(&a, &(cand.pose.rotation * axis));
    (Some(beta), angle_score(beta, cfg.gamma_beta))
}

/// Full breakdown: completeness times both angle scores.
pub fn score_total(
    cand: &GraspCandidate,
    hang: &HangRecord,
    model: &GripperModel,
    cfg: &ScoreConfig,
) -> ScoreBreakdown {
    let (alpha, s_alpha) = score_direction(cand, model, cfg);
    let (beta, s_beta) = score_completeness(cand, hang, model, cfg);
    ScoreBreakdown {
        alpha,
        s_alpha,
        beta,
        s_beta,
        m: hang.m,
        s_total: hang.m * s_beta * s_alpha,
    }
}

/// Scores every candidate in place against its source record.
pub fn score_candidates(
    cands: &mut [GraspCandidate],
    hangs: &[HangRecord],
    model: &GripperModel,
    cfg: &ScoreConfig,
) {
    for cand in cands.iter_mut() {
        let hang = &hangs[cand.hang_index];
        cand.score = Some(score_total(cand, hang, model, cfg));
    }
}

/// Best k candidates by total score, descending, with a deterministic
/// tie-break on provenance.
pub fn rank_top_k(cands: &[GraspCandidate], k: usize) -> Vec<GraspCandidate> {
    let mut ranked: Vec<GraspCandidate> = cands.to_vec();
    ranked.sort_by(|a, b| {
        let sa = a.score.map(|s| s.s_total).unwrap_or(f64::NEG_INFINITY);
        let sb = b.score.map(|s| s.s_total).unwrap_or(f64::NEG_INFINITY);
        sb.total_cmp(&sa)
            .then_with(|| a.kind.cmp(&b.kind))
            .then_with(|| a.hang_index.cmp(&b.hang_index))
            .then_with(|| a.contact_index.cmp(&b.contact_index))
            .then_with(|| (a.signs.s1, a.signs.s2).cmp(&(b.signs.s1, b.signs.s2)).reverse())
    });
    ranked.truncate(k);
    ranked
}

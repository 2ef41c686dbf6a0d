//! Full pipeline on a ring: detect the hole, generate both grasp families,
//! and print the ranked poses.

use hanggrasp::pipeline::{run_detect, PipelineConfig};
use hanggrasp::synthetics;
use nalgebra::Vector3;

fn main() {
    let mesh = synthetics::torus_mesh(0.05, 0.01, 64, Vector3::zeros());
    let cfg = PipelineConfig::default();
    let run = run_detect(&mesh, &cfg).expect("pipeline");

    println!("hang records: {}", run.hangs.len());
    for (i, rec) in run.hangs.iter().enumerate() {
        println!(
            "  [{i}] c = ({:+.4}, {:+.4}, {:+.4})  v = ({:+.3}, {:+.3}, {:+.3})  m = {:.2}  clearance = {:.3}",
            rec.c.x, rec.c.y, rec.c.z, rec.v.x, rec.v.y, rec.v.z, rec.m, rec.clearance
        );
    }
    println!("ranked grasps: {}", run.ranked.len());
    for (rank, cand) in run.ranked.iter().enumerate() {
        let s = cand.score.expect("scored");
        println!(
            "  #{:<2} {:?} at ({:+.4}, {:+.4}, {:+.4})  s_total = {:.4}  alpha = {:.3}  n_c = {}",
            rank + 1,
            cand.kind,
            cand.pose.translation.x,
            cand.pose.translation.y,
            cand.pose.translation.z,
            s.s_total,
            s.alpha,
            cand.n_collisions
        );
    }
}

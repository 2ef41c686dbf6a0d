//! Score components of the ranked grasps on a tilted ring: how wrist
//! direction and surround completeness combine into the total.

use hanggrasp::pipeline::{run_detect, PipelineConfig};
use hanggrasp::synthetics;
use hanggrasp::RigidTransform;
use nalgebra::{Matrix3, Vector3};

fn main() {
    // Tilt the ring 30 degrees about x so no pose is perfectly upright.
    let angle: f64 = 30f64.to_radians();
    let (s, c) = angle.sin_cos();
    let tilt = Matrix3::new(1.0, 0.0, 0.0, 0.0, c, -s, 0.0, s, c);
    let mesh = synthetics::torus_mesh(0.05, 0.01, 64, Vector3::zeros())
        .transformed(&RigidTransform::new(tilt, Vector3::zeros()));

    let run = run_detect(&mesh, &PipelineConfig::default()).expect("pipeline");
    println!("{:<4} {:<9} {:>8} {:>8} {:>8} {:>8}", "rank", "kind", "alpha", "s_alpha", "m", "s_total");
    for (i, cand) in run.ranked.iter().enumerate() {
        let s = cand.score.expect("scored");
        println!(
            "{:<4} {:<9} {:>8.3} {:>8.4} {:>8.2} {:>8.4}",
            i + 1,
            format!("{:?}", cand.kind),
            s.alpha,
            s.s_alpha,
            s.m,
            s.s_total
        );
    }
}

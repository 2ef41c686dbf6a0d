//! Exports visualization artifacts (contact rays, markers, posed gripper
//! solids) for a mug detection run into ./viz_out.

use hanggrasp::pipeline::{build_report, run_detect, PipelineConfig};
use hanggrasp::synthetics;
use hanggrasp::viz::export_viz;

fn main() {
    let mesh = synthetics::mug_mesh(48);
    let cfg = PipelineConfig::default();
    let run = run_detect(&mesh, &cfg).expect("pipeline");
    let report = build_report("mug", &cfg, &run);
    let out = std::path::Path::new("viz_out");
    let files = export_viz(&report, &cfg.gripper, out).expect("export");
    for f in &files {
        println!("wrote {}", f.display());
    }
}

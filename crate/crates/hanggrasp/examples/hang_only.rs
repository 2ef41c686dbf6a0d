//! Hangability stage on a plate with two through holes: one record per hole.

use hanggrasp::hangability::{detect_hangability, HangConfig};
use hanggrasp::synthetics;

fn main() {
    let mesh = synthetics::plate_with_holes_mesh();
    let cfg = HangConfig {
        sample_count: 2400,
        ..HangConfig::default()
    };
    let records = detect_hangability(&mesh, &cfg, 7).expect("detection");
    println!("records: {}", records.len());
    for rec in &records {
        println!(
            "  c = ({:+.4}, {:+.4}, {:+.4})  v = ({:+.3}, {:+.3}, {:+.3})  m = {:.2}  contacts = {}",
            rec.c.x, rec.c.y, rec.c.z, rec.v.x, rec.v.y, rec.v.z, rec.m,
            rec.contacts.len()
        );
    }
}

//! Surround completeness on an open arc: a 270-degree ring covers three
//! quarters of the scan, and the open direction points out of the gap.

use hanggrasp::hangability::{detect_hang_direction, HangConfig};
use hanggrasp::synthetics;
use hanggrasp::Bvh;
use nalgebra::Point3;

fn main() {
    for sweep_deg in [360.0, 300.0, 270.0, 200.0] {
        let mesh = synthetics::arc_torus_mesh(0.05, 0.005, f64::to_radians(sweep_deg), 64);
        let bvh = Bvh::build(&mesh);
        let scan = detect_hang_direction(&Point3::origin(), &bvh, &HangConfig::default())
            .expect("direction");
        match scan.a {
            Some(a) => println!(
                "sweep {sweep_deg:>5.0} deg  m = {:.3}  open direction = ({:+.2}, {:+.2}, {:+.2})",
                scan.m, a.x, a.y, a.z
            ),
            None => println!("sweep {sweep_deg:>5.0} deg  m = {:.3}  fully surrounded", scan.m),
        }
    }
}

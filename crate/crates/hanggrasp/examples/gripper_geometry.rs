//! Key points and collision capsules of the hook-augmented gripper.

use hanggrasp::gripper::{collision_volume, key_points, GripperModel};

fn main() {
    let model = GripperModel::default();
    for opening in [model.l_h, model.l_w] {
        let f = key_points(&model.at_opening(opening));
        println!("opening = {opening} m");
        for (name, p) in [
            ("p1 rod tip", f.p1),
            ("p2 straight tip", f.p2),
            ("p3 elbow", f.p3),
            ("p4 straight root", f.p4),
            ("p5 hook root", f.p5),
            ("p6 wrist", f.p6),
            ("p7 palm", f.p7),
            ("p_m rod midpoint", f.p_m),
        ] {
            println!("  {name:<18} ({:+.3}, {:+.3}, {:+.3})", p.x, p.y, p.z);
        }
    }
    println!("collision capsules (closed configuration):");
    for cap in collision_volume(&model) {
        println!(
            "  ({:+.3}, {:+.3}, {:+.3}) -> ({:+.3}, {:+.3}, {:+.3})  r = {:.3}",
            cap.a.x, cap.a.y, cap.a.z, cap.b.x, cap.b.y, cap.b.z, cap.radius
        );
    }
}

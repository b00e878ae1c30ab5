use lane_pilot::guidance::{update_state, ControllerState, GuidanceParams};
use lane_pilot::pipeline::{perceive, PerceptionParams};
use lane_pilot::sim::{render_frame, CameraModel, Pose, Track};

fn steering(frame: &lane_pilot::imaging::Frame) -> f64 {
    let p = perceive(frame, &PerceptionParams::default()).unwrap();
    let (_, cmd) = update_state(&ControllerState::default(), p.angle_deg, &GuidanceParams::default());
    cmd.angle_deg
}

fn main() {
    let track = Track::default_loop();
    let camera = CameraModel::default();
    let path = track.centerline();
    let mut worst: f64 = 0.0;
    let mut detected = 0;
    for k in 0..50 {
        // Poses spread around the loop with varied lateral/heading error.
        let s = path.total_len() * (k as f64 + 0.31) / 50.0;
        let (x, y) = path.point_at(s);
        let h = path.heading_at(s);
        let lat = ((k * 7) % 11) as f64 / 11.0 * 0.16 - 0.08;
        let dth = ((k * 5) % 13) as f64 / 13.0 * 0.5 - 0.25;
        let pose = Pose::new(x - lat * h.sin(), y + lat * h.cos(), h + dth);
        let frame = render_frame(&track, &pose, &camera);
        let a = steering(&frame);
        let b = steering(&frame.mirrored());
        let diff = (a + b).abs();
        if a != 0.0 || b != 0.0 { detected += 1; }
        if diff > worst { worst = diff; }
        if diff > 0.5 {
            println!("pose {k}: steering {a:.3} mirrored {b:.3} diff {diff:.3}");
        }
    }
    println!("worst |steer(mirror)+steer| = {worst:.4} deg over 50 poses ({detected} with detections)");
}

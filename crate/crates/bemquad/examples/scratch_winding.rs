//! Scratch: winding-number ground truth along a corner-grazing ray.
use bemquad::element::CurvedTriangle;
use bemquad::geometry::build_reference_frame;
use nalgebra::{Vector2, Vector3};

fn main() {
    let curved = CurvedTriangle::new([
        [0.0, 0.0, 0.0],
        [1.2, 0.0, 0.1],
        [0.45, 1.1, -0.05],
        [0.62, -0.08, 0.12],
        [0.92, 0.62, 0.15],
        [0.32, 0.50, 0.02],
    ])
    .unwrap();
    let proj = build_reference_frame(&curved, Vector3::zeros()).unwrap();
    let t = 7.096758372647312f64;

    let mut boundary: Vec<Vector2<f64>> = Vec::new();
    for edge in 0..3 {
        for k in 0..60_000 {
            boundary.push(proj.edge_planar(edge, k as f64 / 60_000.0));
        }
    }
    for r in [5e-9f64, 1e-6, 1e-4, 0.5, 1.0, 1.119, 1.121, 2.0] {
        let p = Vector2::new(r * t.cos(), r * t.sin());
        let mut winding = 0.0f64;
        for i in 0..boundary.len() {
            let a = boundary[i] - p;
            let b = boundary[(i + 1) % boundary.len()] - p;
            winding += (a.x * b.y - a.y * b.x).atan2(a.dot(&b));
        }
        println!("r={r:.3e}: winding {:.3}", winding / std::f64::consts::TAU);
    }
}

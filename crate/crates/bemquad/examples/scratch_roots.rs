//! Scratch: raw ray-edge quadratic roots near a corner/tangent cluster.
use bemquad::element::CurvedTriangle;
use bemquad::geometry::{build_reference_frame, solve_quadratic_real};
use nalgebra::Vector3;

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
    let field = Vector3::new(0.4, 0.3, 0.0);
    let proj = build_reference_frame(&curved, field).unwrap();

    for k in 0..=40 {
        let t = 1.51000 + k as f64 * 2.5e-5;
        let (s, c) = t.sin_cos();
        print!("θ {t:.6}:");
        for edge in [1usize, 2] {
            let [a, b, cc] = proj.edge_coefficients(edge);
            let qa = s * a.x - c * a.y;
            let qb = s * b.x - c * b.y;
            let qc = s * cc.x - c * cc.y;
            let roots = solve_quadratic_real(qa, qb, qc);
            print!("  e{edge}:");
            for &g in roots.as_slice() {
                // radius for each root
                let p = proj.edge_planar(edge, g);
                let r = if c.abs() >= s.abs() { p.x / c } else { p.y / s };
                print!(" ({g:.6}, r {r:.4})");
            }
        }
        println!();
    }
}

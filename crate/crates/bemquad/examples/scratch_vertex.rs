//! Scratch: on-vertex odd-parity failure diagnosis.
use bemquad::element::CurvedTriangle;
use bemquad::geometry::{
    build_reference_frame, edge_tangency_angles, locate_origin, origin_tangents,
    ray_edge_intersections,
};
use bemquad::quadrature::angle_breakpoints;
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
    let field = Vector3::new(0.0, 0.0, 0.0);
    let proj = build_reference_frame(&curved, field).unwrap();
    let loc = locate_origin(&proj);
    println!("loc {loc:?}  snap {:.3e}", proj.snap_tol());
    println!("breaks {:?}", angle_breakpoints(&proj, &loc).unwrap());
    for edge in 0..3 {
        println!(
            "edge {edge}: tangencies {:?} origin_tangents {:?}",
            edge_tangency_angles(&proj, edge),
            origin_tangents(&proj, edge)
        );
    }
    for t in [
        7.096758372647312f64,
        7.096758372647312f64 - std::f64::consts::TAU,
        0.813573067,
        0.8135730670,
    ] {
        print!("θ {t:.12}:");
        for edge in 0..3 {
            for h in ray_edge_intersections(&proj, edge, t, proj.snap_tol()) {
                print!(" (e{} g={:.12} r={:.6e})", h.edge, h.gamma, h.r);
            }
        }
        println!();
        let (s_t, c_t) = t.sin_cos();
        for edge in 0..3 {
            let [a, b, c] = proj.edge_coefficients(edge);
            let qa = s_t * a.x - c_t * a.y;
            let qb = s_t * b.x - c_t * b.y;
            let qc = s_t * c.x - c_t * c.y;
            let disc: f64 = qb * qb - 4.0 * qa * qc;
            print!("   e{edge} qa={qa:.3e} qb={qb:.3e} qc={qc:.3e} disc={disc:.3e} raw roots:");
            if qa != 0.0 && disc >= 0.0 {
                let q = -0.5 * (qb + qb.signum() * disc.sqrt());
                for g in [q / qa, c_t.mul_add(0.0, qc) / q] {
                    let p = proj.edge_planar(edge, g);
                    let r = if c_t.abs() >= s_t.abs() { p.x / c_t } else { p.y / s_t };
                    print!(" (g={g:.12} r={r:.3e})");
                }
            }
            println!();
        }
    }
}

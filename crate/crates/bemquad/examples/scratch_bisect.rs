//! Scratch: selection emulation for the outside-origin case.
use bemquad::element::{newton_invert, CurvedTriangle, ReferenceCoords};
use bemquad::geometry::{build_reference_frame, locate_origin};
use bemquad::quadrature::{angle_breakpoints, gauss_legendre, radial_limits};
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
    let field = Vector3::new(3.0, 2.0, 0.5);
    let proj = build_reference_frame(&curved, field).unwrap();
    let loc = locate_origin(&proj);
    let breaks = angle_breakpoints(&proj, &loc).unwrap();
    println!("breaks {breaks:?}");

    let value = |lo: f64, hi: f64, k: usize, m_fixed: Option<usize>, dr: f64| -> f64 {
        let tg = gauss_legendre(k, lo, hi);
        let mut acc = 0.0;
        for (t, wt) in tg.iter() {
            let radii = radial_limits(&proj, t, &loc).unwrap();
            for pair in radii.chunks_exact(2) {
                if pair[1] - pair[0] < 1e-14 {
                    continue;
                }
                let m = m_fixed.unwrap_or_else(|| {
                    (((pair[1] - pair[0]) / dr).round() as i64).clamp(16, 64) as usize
                });
                let rg = gauss_legendre(m, pair[0], pair[1]);
                for (r, wr) in rg.iter() {
                    let target = nalgebra::Vector2::new(r * t.cos(), r * t.sin());
                    let inv = newton_invert(&proj, target, ReferenceCoords::CENTROID).unwrap();
                    acc += r * wr * wt / proj.planar_jacobian_det(inv.coords);
                }
            }
        }
        acc
    };

    let corners = [proj.planar_node(0), proj.planar_node(1), proj.planar_node(2)];
    let mut maxphi = 0.0f64;
    let mut maxlen = 0.0f64;
    for i in 0..3 {
        let u = corners[(i + 1) % 3] - corners[i];
        let v = corners[(i + 2) % 3] - corners[i];
        maxphi = maxphi.max((u.dot(&v) / (u.norm() * v.norm())).clamp(-1.0, 1.0).acos());
        maxlen = maxlen.max(u.norm());
    }
    for n in [32.0f64, 48.0] {
        let dtheta = maxphi / n;
        let dr = maxlen / n;
        let mut total = 0.0;
        for w in breaks.windows(2) {
            let k = (((w[1] - w[0]) / dtheta).round() as i64).clamp(16, 64) as usize;
            let acc = value(w[0], w[1], k, None, dr);
            let reference = value(w[0], w[1], 64, Some(48), dr);
            println!(
                "n={n}: [{:.4},{:.4}] K={k} err vs ref {:+.3e}",
                w[0],
                w[1],
                acc - reference
            );
            total += acc;
        }
        println!("n={n}: total - 1/2 = {:+.6e}", total - 0.5);
    }
}

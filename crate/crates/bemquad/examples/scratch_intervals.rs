//! Scratch: per-interval weight-sum convergence for a curved element.
use bemquad::element::CurvedTriangle;
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
    let field = Vector3::new(0.4, 0.3, 0.0);
    let proj = build_reference_frame(&curved, field).unwrap();
    let loc = locate_origin(&proj);
    println!("location: {loc:?}");
    let breaks = angle_breakpoints(&proj, &loc).unwrap();
    println!("breakpoints: {breaks:?}");

    // Sum over the interval of the integrand F(θ) = Σ pairs ∫ r/J2 dr using
    // dense Newton inversion at radial Gauss points.
    let interval_value = |lo: f64, hi: f64, k: usize, m: usize| -> f64 {
        let tg = gauss_legendre(k, lo, hi);
        let mut acc = 0.0;
        for (t, wt) in tg.iter() {
            let radii = radial_limits(&proj, t, &loc).unwrap();
            for pair in radii.chunks_exact(2) {
                let rg = gauss_legendre(m, pair[0], pair[1]);
                for (r, wr) in rg.iter() {
                    let target = nalgebra::Vector2::new(r * t.cos(), r * t.sin());
                    let inv = bemquad::element::newton_invert(
                        &proj,
                        target,
                        bemquad::element::ReferenceCoords::CENTROID,
                    )
                    .unwrap();
                    let j2 = proj.planar_jacobian_det(inv.coords);
                    acc += r * wr * wt / j2;
                }
            }
        }
        acc
    };

    let mut total_ref = 0.0;
    for w in breaks.windows(2) {
        let (lo, hi) = (w[0], w[1]);
        if hi - lo < 1e-10 {
            continue;
        }
        let coarse = interval_value(lo, hi, 12, 12);
        let fine = interval_value(lo, hi, 48, 48);
        let finer = interval_value(lo, hi, 64, 64);
        total_ref += finer;
        println!(
            "[{lo:.6}, {hi:.6}] width {:.4}: v12 {coarse:.12e}  v48 {fine:.12e}  v64 {finer:.12e}  d(48,64) {:.2e}",
            hi - lo,
            (fine - finer).abs()
        );
    }
    println!("total at 64: {total_ref:.15}  err {:.3e}", (total_ref - 0.5).abs());

    // Scan hit counts across the misbehaving interval.
    let (lo, hi) = (1.5106f64, 3.7862f64);
    let mut last = usize::MAX;
    for k in 0..200_000 {
        let t = lo + (hi - lo) * k as f64 / 200_000.0;
        let radii = radial_limits(&proj, t, &loc).unwrap();
        if radii.len() != last {
            println!("θ = {t:.9}: radial count -> {}", radii.len());
            last = radii.len();
        }
    }
    // Tangency residual along each edge for the transition angles found.
    for edge in 0..3 {
        let tg = bemquad::geometry::origin_tangents(&proj, edge);
        println!("edge {edge} tangents: {tg:?}");
    }

    for t in [1.5103f64, 1.5107, 1.52, 1.6, 2.0, 3.0, 3.7] {
        let mut desc = String::new();
        for edge in 0..3 {
            for h in bemquad::geometry::ray_edge_intersections(&proj, edge, t, 0.0) {
                desc += &format!(" (e{} g{:.4} r{:.6})", h.edge, h.gamma, h.r);
            }
        }
        println!("θ {t:.5}:{desc}");
    }

    // Smoothness scan of F(θ) via 5-point 4th finite differences.
    let f_of = |t: f64| -> f64 {
        let radii = radial_limits(&proj, t, &loc).unwrap();
        let mut acc = 0.0;
        for pair in radii.chunks_exact(2) {
            let rg = gauss_legendre(40, pair[0], pair[1]);
            for (r, wr) in rg.iter() {
                let target = nalgebra::Vector2::new(r * t.cos(), r * t.sin());
                let inv = bemquad::element::newton_invert(
                    &proj,
                    target,
                    bemquad::element::ReferenceCoords::CENTROID,
                )
                .unwrap();
                acc += r * wr / proj.planar_jacobian_det(inv.coords);
            }
        }
        acc
    };
    let (lo, hi) = (1.5106f64, 3.7861f64);
    let n = 400;
    let h = (hi - lo) / n as f64;
    let mut worst = (0.0f64, 0.0f64);
    for k in 2..n - 2 {
        let t = lo + k as f64 * h;
        let d4 = f_of(t - 2.0 * h) - 4.0 * f_of(t - h) + 6.0 * f_of(t) - 4.0 * f_of(t + h)
            + f_of(t + 2.0 * h);
        if d4.abs() > worst.0 {
            worst = (d4.abs(), t);
        }
    }
    println!("max |Δ⁴F| = {:.3e} at θ = {:.6}", worst.0, worst.1);

    // Fine structure around the worst point.
    let t0 = 1.5220f64;
    let hh = 2e-4;
    for k in -12i32..=12 {
        let t = t0 + k as f64 * hh;
        let radii = radial_limits(&proj, t, &loc).unwrap();
        let hits = bemquad::geometry::ray_edge_intersections(&proj, 2, t, 0.0);
        let g = hits.first().map(|h| h.gamma).unwrap_or(f64::NAN);
        let fpp = (f_of(t + hh) - 2.0 * f_of(t) + f_of(t - hh)) / (hh * hh);
        println!(
            "θ {t:.6}: r_out {:.9} γ {:.6} F {:.12} F'' {:.5e}",
            radii.last().unwrap(),
            g,
            f_of(t),
            fpp
        );
    }
}

#[allow(dead_code)]
fn unused() {}

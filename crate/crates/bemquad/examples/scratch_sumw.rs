//! Scratch: weight-sum error vs selection density (dev aid, not shipped).
use bemquad::element::CurvedTriangle;
use bemquad::quadrature::{build_rule, RuleSelection};
use nalgebra::Vector3;

fn main() {
    let flat = CurvedTriangle::new([
        [0.0, 0.0, 0.0],
        [1.0, 0.0, 0.0],
        [0.0, 1.0, 0.0],
        [0.5, 0.0, 0.0],
        [0.5, 0.5, 0.0],
        [0.0, 0.5, 0.0],
    ])
    .unwrap();
    let curved = CurvedTriangle::new([
        [0.0, 0.0, 0.0],
        [1.2, 0.0, 0.1],
        [0.45, 1.1, -0.05],
        [0.62, -0.08, 0.12],
        [0.92, 0.62, 0.15],
        [0.32, 0.50, 0.02],
    ])
    .unwrap();

    for (name, tri, field) in [
        ("flat centroid", &flat, Vector3::new(1.0 / 3.0, 1.0 / 3.0, 0.8)),
        ("flat inside", &flat, Vector3::new(0.25, 0.25, 0.5)),
        ("curved inside", &curved, Vector3::new(0.4, 0.3, 0.0)),
        ("curved vertex", &curved, Vector3::new(0.0, 0.0, 0.0)),
        ("curved outside", &curved, Vector3::new(3.0, 2.0, 0.5)),
        ("curved below", &curved, Vector3::new(0.5, 0.2, -0.6)),
    ] {
        print!("{name:16}");
        for (n, kmin) in [(8u32, 4usize), (16, 8), (24, 12), (32, 16), (48, 16)] {
            let sel = RuleSelection {
                n_theta: n,
                n_r: n,
                k_min: kmin,
                m_min: kmin,
                ..RuleSelection::default()
            };
            match build_rule(tri, field, &sel) {
                Ok(rule) => print!("  {:9.2e}", (rule.weight_sum() - 0.5).abs()),
                Err(e) => print!("  ERR:{e}"),
            }
        }
        println!();
    }
}

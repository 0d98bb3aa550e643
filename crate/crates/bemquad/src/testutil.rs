//! Shared fixtures for the unit tests.

use nalgebra::{Matrix3, Vector3};
use rand::rngs::StdRng;
use rand::Rng;
use std::f64::consts::TAU;

use crate::element::CurvedTriangle;

/// Unit right triangle mapped identically onto the reference triangle.
pub(crate) fn flat_reference_triangle() -> CurvedTriangle {
    CurvedTriangle::new([
        [0.0, 0.0, 0.0],
        [1.0, 0.0, 0.0],
        [0.0, 1.0, 0.0],
        [0.5, 0.0, 0.0],
        [0.5, 0.5, 0.0],
        [0.0, 0.5, 0.0],
    ])
    .unwrap()
}

/// Mildly curved element reused across modules.
pub(crate) fn curved_element() -> CurvedTriangle {
    CurvedTriangle::new([
        [0.0, 0.0, 0.0],
        [1.2, 0.0, 0.1],
        [0.45, 1.1, -0.05],
        [0.62, -0.08, 0.12],
        [0.92, 0.62, 0.15],
        [0.32, 0.50, 0.02],
    ])
    .unwrap()
}

/// Random well-conditioned curved element: healthy planar corner triangle,
/// midnodes perturbed from the chord midpoints, rigidly moved.
pub(crate) fn random_mild_element(rng: &mut StdRng) -> CurvedTriangle {
    loop {
        let corners = [
            Vector3::new(0.0, 0.0, 0.0),
            Vector3::new(rng.gen_range(0.8..1.5), rng.gen_range(-0.2..0.2), 0.0),
            Vector3::new(rng.gen_range(0.1..0.9), rng.gen_range(0.7..1.4), 0.0),
        ];
        let mut nodes = [Vector3::zeros(); 6];
        nodes[..3].copy_from_slice(&corners);
        for e in 0..3 {
            let chord = corners[(e + 1) % 3] - corners[e];
            let mid = 0.5 * (corners[e] + corners[(e + 1) % 3]);
            let len = chord.norm();
            // In-plane offsets stay under len/8 so the planar projection
            // cannot fold; out-of-plane curvature is freer.
            nodes[e + 3] = mid
                + Vector3::new(
                    rng.gen_range(-0.08..0.08),
                    rng.gen_range(-0.08..0.08),
                    rng.gen_range(-0.15..0.15),
                ) * len;
        }
        let rot = random_rotation(rng);
        let shift = Vector3::new(
            rng.gen_range(-2.0..2.0),
            rng.gen_range(-2.0..2.0),
            rng.gen_range(-2.0..2.0),
        );
        let moved = nodes.map(|n| rot * n + shift);
        if let Ok(tri) = CurvedTriangle::from_vectors(moved) {
            return tri;
        }
    }
}

pub(crate) fn random_rotation(rng: &mut StdRng) -> Matrix3<f64> {
    let axis = Vector3::new(
        rng.gen_range(-1.0..1.0),
        rng.gen_range(-1.0..1.0),
        rng.gen_range(-1.0..1.0),
    )
    .normalize();
    let angle = rng.gen_range(0.0..TAU);
    nalgebra::Rotation3::from_axis_angle(&nalgebra::Unit::new_normalize(axis), angle).into_inner()
}

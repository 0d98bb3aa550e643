//! Planar geometric predicates in the element reference frame.
//!
//! The frame is fixed by the plane through the element's three corners: the
//! axes are rotated and shifted so the corners lie in z = 0 and the field
//! point sits on the z axis. All ray, tangent and classification queries then
//! reduce to low-degree polynomial root finding on the projected edge curves,
//! which are quadratics in the edge parameter γ.

use arrayvec::ArrayVec;
use nalgebra::{Matrix2, Matrix3, Vector2, Vector3};
use std::f64::consts::TAU;
use thiserror::Error;

use crate::element::{
    shape_functions, shape_gradients, CurvedTriangle, EdgeParam, ReferenceCoords,
};

/// Relative snap tolerance for vertex/edge classification of the origin.
pub const SNAP_REL: f64 = 1e-9;
/// γ values this close to 0 or 1 are treated as corner hits and excluded.
const GAMMA_END_TOL: f64 = 1e-12;

#[derive(Debug, Error)]
pub enum GeometryError {
    #[error("element corners are collinear; reference plane is undefined")]
    CollinearCorners,
    #[error("zero tangent vector on edge {edge} at gamma = {gamma}")]
    ZeroTangent { edge: usize, gamma: f64 },
}

/// Real roots of a low-degree polynomial.
///
/// `All` flags the identically-zero polynomial, where every value is a root;
/// callers treat it as a degenerate configuration.
#[derive(Debug, Clone, PartialEq)]
pub enum PolyRoots {
    All,
    Roots(ArrayVec<f64, 3>),
}

impl PolyRoots {
    fn none() -> Self {
        PolyRoots::Roots(ArrayVec::new())
    }

    fn one(r: f64) -> Self {
        let mut v = ArrayVec::new();
        v.push(r);
        PolyRoots::Roots(v)
    }

    pub fn as_slice(&self) -> &[f64] {
        match self {
            PolyRoots::All => &[],
            PolyRoots::Roots(v) => v.as_slice(),
        }
    }
}

/// Real roots of aγ² + bγ + c, in the numerically stable form.
///
/// Near-tangent discriminants (|disc| < 1e-12 b²) are snapped to zero and the
/// double root is reported once.
pub fn solve_quadratic_real(a: f64, b: f64, c: f64) -> PolyRoots {
    if a == 0.0 {
        if b == 0.0 {
            return if c == 0.0 { PolyRoots::All } else { PolyRoots::none() };
        }
        return PolyRoots::one(-c / b);
    }
    let mut disc = b * b - 4.0 * a * c;
    if disc.abs() < 1e-12 * b * b {
        disc = 0.0;
    }
    if disc < 0.0 {
        return PolyRoots::none();
    }
    if disc == 0.0 {
        return PolyRoots::one(-b / (2.0 * a));
    }
    let q = -0.5 * (b + b.signum() * disc.sqrt());
    let mut v = ArrayVec::new();
    if q == 0.0 {
        // b and c both effectively zero: double root at the origin.
        return PolyRoots::one(0.0);
    }
    v.push(q / a);
    v.push(c / q);
    v.sort_by(|x, y| x.partial_cmp(y).unwrap());
    PolyRoots::Roots(v)
}

/// Real roots of aγ³ + bγ² + cγ + d.
///
/// One root is isolated with a safeguarded Newton iteration, the remaining
/// quadratic comes from deflation, and every root is polished on the
/// original cubic. Leading-coefficient degeneracies fall back to the
/// quadratic and linear solvers.
pub fn solve_cubic_real(a: f64, b: f64, c: f64, d: f64) -> PolyRoots {
    let scale = a.abs().max(b.abs()).max(c.abs()).max(d.abs());
    if scale == 0.0 {
        return PolyRoots::All;
    }
    if a.abs() < 1e-14 * scale {
        return solve_quadratic_real(b, c, d);
    }
    // Monic form t^3 + p t^2 + q t + s.
    let (p, q, s) = (b / a, c / a, d / a);
    let eval = |t: f64| ((t + p) * t + q) * t + s;
    let deriv = |t: f64| (3.0 * t + 2.0 * p) * t + q;

    // Bracket a real root using the Cauchy bound, then bisect + Newton.
    let bound = 1.0 + p.abs().max(q.abs()).max(s.abs());
    let (mut lo, mut hi) = (-bound, bound);
    debug_assert!(eval(lo) <= 0.0 && eval(hi) >= 0.0);
    let mut t = -p / 3.0; // inflection point
    for _ in 0..200 {
        let f = eval(t);
        if f == 0.0 {
            break;
        }
        if f < 0.0 {
            lo = t;
        } else {
            hi = t;
        }
        let df = deriv(t);
        let newton = if df != 0.0 { t - f / df } else { t };
        t = if newton > lo && newton < hi {
            newton
        } else {
            0.5 * (lo + hi)
        };
        if (hi - lo).abs() <= 4.0 * f64::EPSILON * t.abs().max(1.0) {
            break;
        }
    }

    // Deflate: t^3 + p t^2 + q t + s = (t - r)(t^2 + b1 t + b0) + rem.
    let b1 = p + t;
    let b0 = q + t * b1;
    let mut roots: ArrayVec<f64, 3> = ArrayVec::new();
    roots.push(t);
    if let PolyRoots::Roots(qr) = solve_quadratic_real(1.0, b1, b0) {
        for r in qr {
            roots.push(r);
        }
    }
    // Polish on the original cubic and deduplicate multiple roots.
    for r in roots.iter_mut() {
        for _ in 0..2 {
            let df = deriv(*r);
            if df != 0.0 {
                *r -= eval(*r) / df;
            }
        }
    }
    roots.sort_by(|x, y| x.partial_cmp(y).unwrap());
    let mut out: ArrayVec<f64, 3> = ArrayVec::new();
    for &r in &roots {
        let dup = out
            .last()
            .is_some_and(|&prev| (r - prev).abs() <= 1e-8 * r.abs().max(1.0));
        if !dup {
            out.push(r);
        }
    }
    PolyRoots::Roots(out)
}

/// A curved triangle expressed in the reference frame of a field point.
#[derive(Debug, Clone)]
pub struct ProjectedTriangle {
    planar: [Vector2<f64>; 6],
    z_field: f64,
    rotation: Matrix3<f64>,
    origin_world: Vector3<f64>,
    source: CurvedTriangle,
    scale: f64,
    /// Per-edge planar quadratic coefficients: point(γ) = Aγ² + Bγ + C.
    edge_poly: [[Vector2<f64>; 3]; 3],
}

impl ProjectedTriangle {
    pub fn source(&self) -> &CurvedTriangle {
        &self.source
    }

    /// Signed distance of the field point above the corner plane.
    pub fn z_field(&self) -> f64 {
        self.z_field
    }

    pub fn rotation(&self) -> &Matrix3<f64> {
        &self.rotation
    }

    /// Projection of the field point onto the corner plane, in world frame.
    pub fn origin_world(&self) -> Vector3<f64> {
        self.origin_world
    }

    /// Largest planar node distance from the planar node mean.
    pub fn scale(&self) -> f64 {
        self.scale
    }

    pub fn snap_tol(&self) -> f64 {
        SNAP_REL * self.scale
    }

    pub fn planar_node(&self, i: usize) -> Vector2<f64> {
        self.planar[i]
    }

    pub fn planar_nodes(&self) -> &[Vector2<f64>; 6] {
        &self.planar
    }

    /// World position mapped into the reference frame.
    pub fn to_reference(&self, world: Vector3<f64>) -> Vector3<f64> {
        self.rotation * (world - self.origin_world)
    }

    /// Reference-frame position mapped back to the world frame.
    pub fn from_reference(&self, local: Vector3<f64>) -> Vector3<f64> {
        self.rotation.transpose() * local + self.origin_world
    }

    /// Planar component of the interpolated surface position.
    pub fn planar_point(&self, c: ReferenceCoords) -> Vector2<f64> {
        let l = shape_functions(c);
        let mut p = Vector2::zeros();
        for i in 0..6 {
            p += l[i] * self.planar[i];
        }
        p
    }

    /// Jacobian of the planar projection map at (ξ, η).
    pub fn planar_jacobian(&self, c: ReferenceCoords) -> Matrix2<f64> {
        let g = shape_gradients(c);
        let mut m = Matrix2::zeros();
        for i in 0..6 {
            m[(0, 0)] += g[i][0] * self.planar[i].x;
            m[(1, 0)] += g[i][0] * self.planar[i].y;
            m[(0, 1)] += g[i][1] * self.planar[i].x;
            m[(1, 1)] += g[i][1] * self.planar[i].y;
        }
        m
    }

    /// |det| of the planar projection Jacobian.
    pub fn planar_jacobian_det(&self, c: ReferenceCoords) -> f64 {
        let m = self.planar_jacobian(c);
        (m[(0, 0)] * m[(1, 1)] - m[(0, 1)] * m[(1, 0)]).abs()
    }

    /// Quadratic coefficients [A, B, C] of the projected edge curve.
    pub fn edge_coefficients(&self, edge: usize) -> &[Vector2<f64>; 3] {
        &self.edge_poly[edge]
    }

    /// Point on the projected edge curve.
    pub fn edge_planar(&self, edge: usize, gamma: f64) -> Vector2<f64> {
        let [a, b, c] = self.edge_poly[edge];
        (a * gamma + b) * gamma + c
    }

    /// Tangent dp/dγ of the projected edge curve.
    pub fn edge_planar_deriv(&self, edge: usize, gamma: f64) -> Vector2<f64> {
        let [a, b, _] = self.edge_poly[edge];
        a * (2.0 * gamma) + b
    }
}

/// Rotate and shift the problem axes so the element corners lie in z = 0 and
/// the field point at (0, 0, z).
pub fn build_reference_frame(
    tri: &CurvedTriangle,
    field: Vector3<f64>,
) -> Result<ProjectedTriangle, GeometryError> {
    let c0 = tri.node(0);
    let e01 = tri.node(1) - c0;
    let e02 = tri.node(2) - c0;
    let normal = e01.cross(&e02);
    if normal.norm() <= 1e-14 * tri.node_spread().powi(2) {
        return Err(GeometryError::CollinearCorners);
    }
    let n = normal.normalize();
    let z_field = (field - c0).dot(&n);
    let origin_world = field - z_field * n;

    // Minimal rotation taking the plane normal to +z, so an element already
    // in a z = const plane keeps its world orientation.
    let rotation = match nalgebra::Rotation3::rotation_between(&n, &Vector3::z()) {
        Some(r) => r.into_inner(),
        // Antiparallel normal: half-turn about x.
        None => Matrix3::new(1.0, 0.0, 0.0, 0.0, -1.0, 0.0, 0.0, 0.0, -1.0),
    };

    let mut planar = [Vector2::zeros(); 6];
    for i in 0..6 {
        let local = rotation * (tri.node(i) - origin_world);
        planar[i] = Vector2::new(local.x, local.y);
    }
    let mean = planar.iter().sum::<Vector2<f64>>() / 6.0;
    let scale = planar
        .iter()
        .map(|p| (p - mean).norm())
        .fold(0.0, f64::max);

    let mut edge_poly = [[Vector2::zeros(); 3]; 3];
    for edge in 0..3 {
        let (pi, pj, pm) = (planar[edge], planar[(edge + 1) % 3], planar[edge + 3]);
        edge_poly[edge] = [
            2.0 * pi + 2.0 * pj - 4.0 * pm,
            -3.0 * pi - pj + 4.0 * pm,
            pi,
        ];
    }

    Ok(ProjectedTriangle {
        planar,
        z_field,
        rotation,
        origin_world,
        source: tri.clone(),
        scale,
        edge_poly,
    })
}

/// Wrap an angle into [0, 2π), snapping values within 1e-12 of 2π to 0.
pub fn wrap_angle(theta: f64) -> f64 {
    let mut t = theta.rem_euclid(TAU);
    if (TAU - t).abs() < 1e-12 {
        t = 0.0;
    }
    t
}

/// Intersection of a ray through the origin with a projected edge.
#[derive(Debug, Clone, Copy)]
pub struct RayHit {
    pub edge: usize,
    pub gamma: f64,
    pub r: f64,
}

/// Intersections of the ray at angle θ with the projected edge curve.
///
/// Roots are kept for γ strictly inside (0, 1), excluding corners, and only
/// positive radii are accepted so each geometric crossing is counted once.
/// The radius comes from whichever direction cosine is larger in magnitude.
/// `r_min` discards hits at radii at or below it; boundary-origin callers
/// use it to suppress the origin's own edge position.
pub fn ray_edge_intersections(
    proj: &ProjectedTriangle,
    edge: usize,
    theta: f64,
    r_min: f64,
) -> ArrayVec<RayHit, 2> {
    let (sin_t, cos_t) = theta.sin_cos();
    let [a, b, c] = proj.edge_poly[edge];
    let qa = sin_t * a.x - cos_t * a.y;
    let qb = sin_t * b.x - cos_t * b.y;
    let qc = sin_t * c.x - cos_t * c.y;

    let roots = solve_quadratic_real(qa, qb, qc);
    let slice = roots.as_slice();
    let mut candidates: ArrayVec<f64, 2> = ArrayVec::new();
    if qa != 0.0 && slice.len() == 1 {
        // The solver collapsed a near-tangent pair. Crossing parity needs
        // the true pair: resolve it from the raw discriminant when it is
        // positive (the roots may straddle a corner), otherwise keep the
        // grazing touch as an entry/exit pair at one radius — the γ and r
        // filters then decide what survives, and a zero-length radial span
        // integrates to nothing.
        let disc = qb * qb - 4.0 * qa * qc;
        if disc > 0.0 {
            let q = -0.5 * (qb + qb.signum() * disc.sqrt());
            if q != 0.0 {
                candidates.push(q / qa);
                candidates.push(qc / q);
            } else {
                candidates.push(slice[0]);
                candidates.push(slice[0]);
            }
        } else {
            candidates.push(slice[0]);
            candidates.push(slice[0]);
        }
    } else {
        candidates.extend(slice.iter().copied());
    }

    let mut hits = ArrayVec::new();
    for gamma in candidates {
        if gamma <= GAMMA_END_TOL || gamma >= 1.0 - GAMMA_END_TOL {
            continue;
        }
        let p = proj.edge_planar(edge, gamma);
        let r = if cos_t.abs() >= sin_t.abs() {
            p.x / cos_t
        } else {
            p.y / sin_t
        };
        if r > r_min {
            hits.push(RayHit { edge, gamma, r });
        }
    }
    hits.sort_by(|u, v| u.r.partial_cmp(&v.r).unwrap());
    hits
}

/// Edge parameters γ in (0, 1) where the edge tangent line passes through the
/// origin.
///
/// The condition x(γ) y'(γ) − y(γ) x'(γ) = 0 reduces to
/// (A×B)γ² + 2(A×C)γ + (B×C) = 0 in the planar quadratic coefficients; the
/// cubic's leading term vanishes identically. Straight edges make the
/// polynomial constant or identically zero and yield no tangent points: the
/// corner rays already break the integral there. Roots where the tangency
/// point coincides with the origin, or where the parameterization is
/// stationary, are dropped.
pub fn origin_tangents(proj: &ProjectedTriangle, edge: usize) -> ArrayVec<f64, 3> {
    let [a, b, c] = proj.edge_poly[edge];
    let cross = |u: Vector2<f64>, v: Vector2<f64>| u.x * v.y - u.y * v.x;
    let roots = solve_cubic_real(0.0, cross(a, b), 2.0 * cross(a, c), cross(b, c));

    let snap = proj.snap_tol();
    let mut out = ArrayVec::new();
    for &gamma in roots.as_slice() {
        if gamma <= GAMMA_END_TOL || gamma >= 1.0 - GAMMA_END_TOL {
            continue;
        }
        let p = proj.edge_planar(edge, gamma);
        let v = proj.edge_planar_deriv(edge, gamma);
        if p.norm() < snap || v.norm() < 1e-12 * proj.scale {
            continue;
        }
        // Tangent line through the origin: |p × v| / |v| is the distance.
        if cross(p, v).abs() / v.norm() <= 1e-7 * proj.scale {
            out.push(gamma);
        }
    }
    out
}

/// Angles where the ray–edge intersection quadratic has a double root, i.e.
/// where intersection pairs are born or annihilate.
///
/// These are the square-root branch points of the radial limits as functions
/// of θ. They matter beyond the in-arc tangent breakpoints: a coalescence
/// whose double point sits just outside the arc still degrades quadrature
/// convergence on nearby intervals, so callers grade their subdivision
/// towards every returned angle. The double-root parameter is kept with each
/// angle; only near-arc coalescences (γ within `GAMMA_NEAR` of [0, 1]) are
/// reported, and both antipodal ray angles are included.
pub fn edge_tangency_angles(proj: &ProjectedTriangle, edge: usize) -> ArrayVec<(f64, f64), 4> {
    const GAMMA_NEAR: f64 = 0.5;
    let [a, b, c] = proj.edge_poly[edge];
    let mut out = ArrayVec::new();

    if a.norm() < 1e-12 * proj.scale {
        // Straight parameterization: the single root has no branch points.
        return out;
    }
    // Ray coefficients are q(γ; θ) = sinθ·x(γ) − cosθ·y(γ); the discriminant
    // qb² − 4 qa qc is a homogeneous quadratic form in (sinθ, cosθ).
    let p_ss = b.x * b.x - 4.0 * a.x * c.x;
    let p_sc = -2.0 * b.x * b.y + 4.0 * (a.x * c.y + a.y * c.x);
    let p_cc = b.y * b.y - 4.0 * a.y * c.y;
    let scale2 = proj.scale * proj.scale;
    // Zeros of p_ss t² + p_sc t + p_cc in t = tanθ, plus the t → ∞ case
    // (cosθ = 0) when the leading coefficient vanishes.
    let roots = solve_quadratic_real(p_ss, p_sc, p_cc);
    let mut zeros: ArrayVec<f64, 3> = ArrayVec::new();
    match roots {
        PolyRoots::All => return out,
        PolyRoots::Roots(ref r) => {
            for &t in r.iter() {
                zeros.push(t.atan());
            }
            if p_ss.abs() < 1e-12 * scale2 {
                zeros.push(std::f64::consts::FRAC_PI_2);
            }
        }
    }
    for theta in zeros {
        let (sin_t, cos_t) = theta.sin_cos();
        let qa = sin_t * a.x - cos_t * a.y;
        let qb = sin_t * b.x - cos_t * b.y;
        if qa.abs() < 1e-14 * proj.scale {
            continue;
        }
        let gamma_d = -qb / (2.0 * qa);
        if (-GAMMA_NEAR..=1.0 + GAMMA_NEAR).contains(&gamma_d) {
            let _ = out.try_push((wrap_angle(theta), gamma_d));
            let _ = out.try_push((wrap_angle(theta + std::f64::consts::PI), gamma_d));
        }
    }
    out
}

/// Angle ψ of the tangent to an edge at γ, and the opposite direction ψ + π.
pub fn tangent_angle(proj: &ProjectedTriangle, e: EdgeParam) -> Result<(f64, f64), GeometryError> {
    let v = proj.edge_planar_deriv(e.edge, e.gamma);
    if v.norm() < 1e-14 * proj.scale {
        return Err(GeometryError::ZeroTangent {
            edge: e.edge,
            gamma: e.gamma,
        });
    }
    let psi = wrap_angle(v.y.atan2(v.x));
    Ok((psi, wrap_angle(psi + std::f64::consts::PI)))
}

/// Classification of the origin against the projected element.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum OriginLocation {
    /// Origin strictly inside; carries its reference coordinates.
    Inside(ReferenceCoords),
    OnVertex(usize),
    OnEdge(EdgeParam),
    /// `newton_failed` marks the conservative fallback when inversion of a
    /// far point diverges.
    Outside { newton_failed: bool },
}

impl OriginLocation {
    pub fn tag(&self) -> &'static str {
        match self {
            OriginLocation::Inside(_) => "inside",
            OriginLocation::OnVertex(_) => "on-vertex",
            OriginLocation::OnEdge(_) => "on-edge",
            OriginLocation::Outside { .. } => "outside",
        }
    }
}

/// Decide whether the origin lies inside, outside or on the boundary of the
/// projected element.
///
/// A bounding box over all six planar nodes gives the fast exit; vertex and
/// edge snapping use the scale-relative tolerance; the remaining cases are
/// settled by Newton inversion from the centroid.
pub fn locate_origin(proj: &ProjectedTriangle) -> OriginLocation {
    let snap = proj.snap_tol();

    let (mut lo, mut hi) = (proj.planar[0], proj.planar[0]);
    for p in &proj.planar[1..] {
        lo = lo.inf(p);
        hi = hi.sup(p);
    }
    if lo.x - snap > 0.0 || lo.y - snap > 0.0 || hi.x + snap < 0.0 || hi.y + snap < 0.0 {
        return OriginLocation::Outside { newton_failed: false };
    }

    for corner in 0..3 {
        if proj.planar[corner].norm() <= snap {
            return OriginLocation::OnVertex(corner);
        }
    }

    for edge in 0..3 {
        if let Some(gamma) = closest_edge_param(proj, edge, snap) {
            return OriginLocation::OnEdge(EdgeParam::new(edge, gamma));
        }
    }

    match crate::element::newton_invert(proj, Vector2::zeros(), ReferenceCoords::CENTROID) {
        Ok(inv) => {
            if inv.coords.in_triangle(0.0) {
                OriginLocation::Inside(inv.coords)
            } else {
                OriginLocation::Outside { newton_failed: false }
            }
        }
        Err(_) => OriginLocation::Outside { newton_failed: true },
    }
}

/// γ of the closest point of the projected edge to the origin, if that
/// closest distance is within `snap` and γ lies strictly inside (0, 1).
fn closest_edge_param(proj: &ProjectedTriangle, edge: usize, snap: f64) -> Option<f64> {
    let [a, b, c] = proj.edge_poly[edge];
    // d/dγ |p(γ)|² = 2 p·p' = 2 (2|A|²γ³ + 3A·Bγ² + (|B|² + 2A·C)γ + B·C).
    let roots = solve_cubic_real(
        2.0 * a.dot(&a),
        3.0 * a.dot(&b),
        b.dot(&b) + 2.0 * a.dot(&c),
        b.dot(&c),
    );
    let mut best: Option<(f64, f64)> = None;
    for &gamma in roots.as_slice() {
        if gamma <= GAMMA_END_TOL || gamma >= 1.0 - GAMMA_END_TOL {
            continue;
        }
        let d = proj.edge_planar(edge, gamma).norm();
        if best.is_none_or(|(bd, _)| d < bd) {
            best = Some((d, gamma));
        }
    }
    match best {
        Some((d, gamma)) if d <= snap => Some(gamma),
        _ => None,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::element::{edge_point, interpolate};
    use crate::testutil::{flat_reference_triangle, random_mild_element};
    use approx::assert_relative_eq;
    use proptest::prelude::*;
    use rand::rngs::StdRng;
    use rand::{Rng, SeedableRng};

    #[test]
    fn quadratic_factored_and_degenerate_cases() {
        assert_eq!(solve_quadratic_real(1.0, -3.0, 2.0).as_slice(), &[1.0, 2.0]);
        assert_eq!(solve_quadratic_real(0.0, 2.0, -1.0).as_slice(), &[0.5]);
        assert_eq!(solve_quadratic_real(1.0, 0.0, 1.0).as_slice(), &[] as &[f64]);
        assert_eq!(solve_quadratic_real(0.0, 0.0, 0.0), PolyRoots::All);
        assert_eq!(solve_quadratic_real(0.0, 0.0, 3.0).as_slice(), &[] as &[f64]);
    }

    #[test]
    fn quadratic_double_root_reported_once() {
        let roots = solve_quadratic_real(1.0, -2.0, 1.0 - 1e-15);
        assert_eq!(roots.as_slice().len(), 1);
        assert_relative_eq!(roots.as_slice()[0], 1.0, epsilon = 1e-7);
    }

    #[test]
    fn cubic_factored_and_degenerate_cases() {
        let r = solve_cubic_real(1.0, -6.0, 11.0, -6.0);
        let rs = r.as_slice();
        assert_eq!(rs.len(), 3);
        assert_relative_eq!(rs[0], 1.0, epsilon = 1e-10);
        assert_relative_eq!(rs[1], 2.0, epsilon = 1e-10);
        assert_relative_eq!(rs[2], 3.0, epsilon = 1e-10);

        let r = solve_cubic_real(1.0, 0.0, 0.0, 0.0);
        assert_eq!(r.as_slice(), &[0.0]);

        let r = solve_cubic_real(0.0, 1.0, -3.0, 2.0);
        assert_eq!(r.as_slice(), &[1.0, 2.0]);
    }

    proptest! {
        #[test]
        fn quadratic_roots_have_small_residuals(
            a in -10.0f64..10.0, b in -10.0f64..10.0, c in -10.0f64..10.0,
        ) {
            let scale = a.abs().max(b.abs()).max(c.abs()).max(1e-30);
            for &r in solve_quadratic_real(a, b, c).as_slice() {
                let res = (a * r * r + b * r + c).abs();
                prop_assert!(res < 1e-10 * scale * r.abs().max(1.0).powi(2));
            }
        }

        #[test]
        fn cubic_roots_have_small_residuals(
            a in -10.0f64..10.0, b in -10.0f64..10.0,
            c in -10.0f64..10.0, d in -10.0f64..10.0,
        ) {
            let scale = a.abs().max(b.abs()).max(c.abs()).max(d.abs()).max(1e-30);
            for &r in solve_cubic_real(a, b, c, d).as_slice() {
                let res = (((a * r + b) * r + c) * r + d).abs();
                prop_assert!(res < 1e-9 * scale * r.abs().max(1.0).powi(3));
            }
        }
    }

    #[test]
    fn reference_frame_of_flat_triangle_is_identity_like() {
        let tri = flat_reference_triangle();
        let proj = build_reference_frame(&tri, Vector3::new(0.0, 0.0, 1.0)).unwrap();
        assert_relative_eq!(proj.z_field(), 1.0, epsilon = 1e-14);
        assert_relative_eq!(proj.origin_world(), Vector3::zeros(), epsilon = 1e-14);
        for i in 0..6 {
            assert_relative_eq!(
                proj.planar_node(i),
                Vector2::new(tri.node(i).x, tri.node(i).y),
                epsilon = 1e-14
            );
        }
    }

    #[test]
    fn reference_frame_is_rigidly_invariant() {
        let tri = flat_reference_triangle();
        let shift = Vector3::new(5.0, 5.0, 5.0);
        let moved =
            CurvedTriangle::from_vectors(tri.nodes().map(|n| n + shift)).unwrap();
        let proj = build_reference_frame(&moved, Vector3::new(0.0, 0.0, 1.0) + shift).unwrap();
        for i in 0..6 {
            assert_relative_eq!(
                proj.planar_node(i),
                Vector2::new(tri.node(i).x, tri.node(i).y),
                epsilon = 1e-12
            );
        }
    }

    #[test]
    fn reference_frame_round_trips_and_is_orthonormal() {
        let mut rng = StdRng::seed_from_u64(5);
        for _ in 0..50 {
            let tri = random_mild_element(&mut rng);
            let field = Vector3::new(
                rng.gen_range(-3.0..3.0),
                rng.gen_range(-3.0..3.0),
                rng.gen_range(-3.0..3.0),
            );
            let proj = build_reference_frame(&tri, field).unwrap();
            let r = proj.rotation();
            assert_relative_eq!(r * r.transpose(), Matrix3::identity(), epsilon = 1e-12);
            assert_relative_eq!(r.determinant(), 1.0, epsilon = 1e-12);

            // Field point maps onto the z axis.
            let f_local = proj.to_reference(field);
            assert!(f_local.x.abs() < 1e-12 * proj.scale().max(1.0));
            assert!(f_local.y.abs() < 1e-12 * proj.scale().max(1.0));

            // Corners map into z = 0, and the transform round-trips.
            for i in 0..3 {
                let local = proj.to_reference(tri.node(i));
                assert!(local.z.abs() < 1e-12 * proj.scale().max(1.0));
                assert_relative_eq!(proj.from_reference(local), tri.node(i), epsilon = 1e-10);
            }
        }
    }

    #[test]
    fn planar_edge_curve_matches_projected_edge_points() {
        let mut rng = StdRng::seed_from_u64(11);
        let tri = random_mild_element(&mut rng);
        let proj = build_reference_frame(&tri, Vector3::new(0.1, 0.2, 1.0)).unwrap();
        for edge in 0..3 {
            for &gamma in &[0.0, 0.21, 0.5, 0.77, 1.0] {
                let world = edge_point(&tri, EdgeParam::new(edge, gamma));
                let local = proj.to_reference(world);
                assert_relative_eq!(
                    proj.edge_planar(edge, gamma),
                    Vector2::new(local.x, local.y),
                    epsilon = 1e-12
                );
            }
        }
    }

    /// Straight edge from (1,0) to (0,1) with midnode at the chord midpoint,
    /// stood up as edge 0 of a flat element whose other corner is far away.
    fn diagonal_edge_element() -> CurvedTriangle {
        CurvedTriangle::new([
            [1.0, 0.0, 0.0],
            [0.0, 1.0, 0.0],
            [-1.0, -1.0, 0.0],
            [0.5, 0.5, 0.0],
            [-0.5, 0.0, 0.0],
            [0.0, -0.5, 0.0],
        ])
        .unwrap()
    }

    #[test]
    fn ray_hits_straight_edge_at_expected_point() {
        let tri = diagonal_edge_element();
        let proj = build_reference_frame(&tri, Vector3::new(0.0, 0.0, 0.5)).unwrap();
        let theta = std::f64::consts::FRAC_PI_4;
        let hits = ray_edge_intersections(&proj, 0, theta, 0.0);
        assert_eq!(hits.len(), 1);
        assert_relative_eq!(hits[0].gamma, 0.5, epsilon = 1e-12);
        assert_relative_eq!(hits[0].r, std::f64::consts::SQRT_2 / 2.0, epsilon = 1e-12);

        // Opposite direction: r < 0 rejected.
        let hits = ray_edge_intersections(&proj, 0, theta + std::f64::consts::PI, 0.0);
        assert!(hits.is_empty());
    }

    #[test]
    fn ray_hits_concave_edge_twice_sorted() {
        // Concave edge bulging towards the origin; a ray grazing the bulge
        // crosses it twice. Oracle: dense γ sampling with sign-change
        // bracketing of sinθ·x(γ) − cosθ·y(γ).
        let tri = CurvedTriangle::new([
            [2.0, -1.5, 0.0],
            [2.0, 1.5, 0.0],
            [4.5, 0.0, 0.0],
            [1.2, 0.0, 0.0], // midnode pulled towards the origin
            [3.25, 0.75, 0.0],
            [3.25, -0.75, 0.0],
        ])
        .unwrap();
        let proj = build_reference_frame(&tri, Vector3::new(0.0, 0.0, 0.7)).unwrap();
        let theta = 0.35f64;
        let hits = ray_edge_intersections(&proj, 0, theta, 0.0);
        assert_eq!(hits.len(), 2);
        assert!(hits[0].r < hits[1].r);

        // Bracketing oracle on the same edge.
        let (s, c) = theta.sin_cos();
        let f = |g: f64| {
            let p = proj.edge_planar(0, g);
            s * p.x - c * p.y
        };
        let mut oracle = Vec::new();
        let n = 20_000;
        for k in 0..n {
            let g0 = k as f64 / n as f64;
            let g1 = (k + 1) as f64 / n as f64;
            if f(g0) * f(g1) < 0.0 {
                oracle.push(0.5 * (g0 + g1));
            }
        }
        assert_eq!(oracle.len(), 2);
        for (hit, g_oracle) in hits.iter().zip(&oracle) {
            assert!((hit.gamma - g_oracle).abs() < 1e-4);
        }
    }

    #[test]
    fn ray_hits_satisfy_polar_consistency() {
        let mut rng = StdRng::seed_from_u64(23);
        for _ in 0..100 {
            let tri = random_mild_element(&mut rng);
            let field = Vector3::new(
                rng.gen_range(-1.0..1.5),
                rng.gen_range(-1.0..1.5),
                rng.gen_range(-1.0..1.0),
            );
            let proj = build_reference_frame(&tri, field).unwrap();
            let theta = rng.gen_range(0.0..TAU);
            for edge in 0..3 {
                for hit in ray_edge_intersections(&proj, edge, theta, 0.0) {
                    let p = proj.edge_planar(edge, hit.gamma);
                    let expect = Vector2::new(hit.r * theta.cos(), hit.r * theta.sin());
                    assert!(
                        (p - expect).norm() < 1e-9 * proj.scale(),
                        "hit not on ray: |Δ| = {:.3e}",
                        (p - expect).norm()
                    );
                }
            }
        }
    }

    #[test]
    fn straight_edge_has_no_origin_tangents() {
        let tri = diagonal_edge_element();
        let proj = build_reference_frame(&tri, Vector3::new(0.0, 0.0, 1.0)).unwrap();
        assert!(origin_tangents(&proj, 0).is_empty());
    }

    /// Oracle for tangent points: dense sampling of the signed distance of
    /// the origin from the moving tangent line, bracketing sign changes.
    fn tangent_oracle(proj: &ProjectedTriangle, edge: usize) -> Vec<f64> {
        let f = |g: f64| {
            let p = proj.edge_planar(edge, g);
            let v = proj.edge_planar_deriv(edge, g);
            p.x * v.y - p.y * v.x
        };
        let mut out = Vec::new();
        let n = 40_000;
        for k in 0..n {
            let g0 = (k as f64 + 0.5) / (n as f64 + 1.0);
            let g1 = (k as f64 + 1.5) / (n as f64 + 1.0);
            if f(g0) * f(g1) < 0.0 {
                out.push(0.5 * (g0 + g1));
            }
        }
        out
    }

    #[test]
    fn convex_edge_tangent_found_and_verified() {
        // Parabolic edge with the origin on its concave side: one tangent.
        let tri = CurvedTriangle::new([
            [-1.0, 1.0, 0.0],
            [1.0, 1.2, 0.0],
            [0.0, 3.0, 0.0],
            [0.1, 0.6, 0.0], // bulge towards the origin
            [0.5, 2.1, 0.0],
            [-0.5, 2.0, 0.0],
        ])
        .unwrap();
        let proj = build_reference_frame(&tri, Vector3::new(0.0, 0.0, 0.4)).unwrap();
        let tangents = origin_tangents(&proj, 0);
        let oracle = tangent_oracle(&proj, 0);
        assert_eq!(tangents.len(), oracle.len());
        assert!(!tangents.is_empty());
        for (t, o) in tangents.iter().zip(&oracle) {
            assert!((t - o).abs() < 1e-4, "tangent {t} vs oracle {o}");
        }
    }

    #[test]
    fn far_convex_side_has_no_tangents() {
        let tri = CurvedTriangle::new([
            [-1.0, 1.0, 0.0],
            [1.0, 1.2, 0.0],
            [0.0, 3.0, 0.0],
            [0.1, 1.7, 0.0], // bulge away from the origin
            [0.5, 2.1, 0.0],
            [-0.5, 2.0, 0.0],
        ])
        .unwrap();
        let proj = build_reference_frame(&tri, Vector3::new(0.0, 0.0, 0.4)).unwrap();
        let tangents = origin_tangents(&proj, 0);
        assert_eq!(tangents.len(), tangent_oracle(&proj, 0).len());
    }

    #[test]
    fn tangent_angles_of_straight_and_curved_edges() {
        // Horizontal straight edge.
        let tri = flat_reference_triangle();
        let proj = build_reference_frame(&tri, Vector3::new(0.3, 0.2, 1.0)).unwrap();
        let (psi, psi_pi) = tangent_angle(&proj, EdgeParam::new(0, 0.4)).unwrap();
        assert!(psi.abs() < 1e-12 || (psi - std::f64::consts::PI).abs() < 1e-12);
        assert_relative_eq!(
            (psi_pi - psi).abs(),
            std::f64::consts::PI,
            epsilon = 1e-12
        );

        // 45-degree edge through the diagonal element.
        let tri = diagonal_edge_element();
        let proj = build_reference_frame(&tri, Vector3::new(0.0, 0.0, 1.0)).unwrap();
        let (psi, _) = tangent_angle(&proj, EdgeParam::new(0, 0.5)).unwrap();
        let slope = wrap_angle(psi);
        let ok = (slope - 3.0 * std::f64::consts::FRAC_PI_4).abs() < 1e-12
            || (slope - 7.0 * std::f64::consts::FRAC_PI_4).abs() < 1e-12;
        assert!(ok, "psi = {slope}");
    }

    #[test]
    fn tangent_angle_matches_finite_difference_direction() {
        let mut rng = StdRng::seed_from_u64(31);
        for _ in 0..100 {
            let tri = random_mild_element(&mut rng);
            let proj = build_reference_frame(&tri, Vector3::new(0.0, 0.0, 1.0)).unwrap();
            let edge = rng.gen_range(0..3);
            let gamma = rng.gen_range(0.1..0.9);
            let (psi, _) = tangent_angle(&proj, EdgeParam::new(edge, gamma)).unwrap();
            let h = 1e-7;
            let d = proj.edge_planar(edge, gamma + h) - proj.edge_planar(edge, gamma - h);
            let fd = wrap_angle(d.y.atan2(d.x));
            let diff = (psi - fd).abs();
            let diff = diff.min((diff - TAU).abs()).min((diff - std::f64::consts::PI).abs());
            assert!(diff < 1e-6, "psi {psi} vs fd {fd}");
        }
    }

    #[test]
    fn origin_classification_basic_cases() {
        let tri = flat_reference_triangle();

        let at = |x: f64, y: f64| {
            let proj = build_reference_frame(&tri, Vector3::new(x, y, 0.8)).unwrap();
            locate_origin(&proj)
        };

        assert!(matches!(at(1.0 / 3.0, 1.0 / 3.0), OriginLocation::Inside(_)));
        assert!(matches!(at(1.0, 0.0), OriginLocation::OnVertex(1)));
        assert!(matches!(at(2.0, 2.0), OriginLocation::Outside { .. }));
        match at(0.37, 0.0) {
            OriginLocation::OnEdge(e) => {
                assert_eq!(e.edge, 0);
                assert_relative_eq!(e.gamma, 0.37, epsilon = 1e-9);
            }
            other => panic!("expected on-edge, got {other:?}"),
        }
    }

    #[test]
    fn origin_on_curved_edge_round_trips() {
        let mut rng = StdRng::seed_from_u64(77);
        for _ in 0..50 {
            let tri = random_mild_element(&mut rng);
            let edge = rng.gen_range(0..3);
            let gamma = rng.gen_range(0.15..0.85);
            let anchor = edge_point(&tri, EdgeParam::new(edge, gamma));
            // Field point off the corner plane whose projection is the edge point.
            let frame = build_reference_frame(&tri, anchor).unwrap();
            let n = frame.rotation().row(2).transpose();
            let field = anchor + 0.6 * n;
            let proj = build_reference_frame(&tri, field).unwrap();
            match locate_origin(&proj) {
                OriginLocation::OnEdge(e) => {
                    assert_eq!(e.edge, edge);
                    assert!((e.gamma - gamma).abs() < 1e-6, "gamma {} vs {gamma}", e.gamma);
                    let back = interpolate(&tri, crate::element::edge_to_area(e));
                    assert!((back - anchor).norm() <= 10.0 * proj.snap_tol());
                }
                other => panic!("expected on-edge, got {other:?}"),
            }
        }
    }

    #[test]
    fn root_counts_match_bracketing_oracle() {
        let mut rng = StdRng::seed_from_u64(101);
        let mut checked = 0;
        for _ in 0..10_000 {
            let a = rng.gen_range(-5.0..5.0);
            let b = rng.gen_range(-5.0..5.0);
            let c = rng.gen_range(-5.0..5.0);
            let d = rng.gen_range(-5.0..5.0);
            let eval = |x: f64| ((a * x + b) * x + c) * x + d;
            let mut oracle = Vec::new();
            let n = 2000;
            for k in 0..n {
                let x0 = -10.0 + 20.0 * k as f64 / n as f64;
                let x1 = -10.0 + 20.0 * (k + 1) as f64 / n as f64;
                if eval(x0) * eval(x1) < 0.0 {
                    oracle.push(0.5 * (x0 + x1));
                }
            }
            let roots: Vec<f64> = solve_cubic_real(a, b, c, d)
                .as_slice()
                .iter()
                .copied()
                .filter(|r| (-10.0..10.0).contains(r))
                .collect();
            // Generic random coefficients: simple roots, counts agree.
            assert_eq!(roots.len(), oracle.len(), "a={a} b={b} c={c} d={d}");
            for (r, o) in roots.iter().zip(&oracle) {
                assert!((r - o).abs() < 0.02);
            }
            checked += 1;
        }
        assert_eq!(checked, 10_000);
    }
}

//! Polar-transform quadrature rules for curved triangular panels.
//!
//! A rule is built in two stages. First the range of integration in θ is
//! broken at every angle where the radial limit structure can change: rays to
//! the corners, tangents through the origin, and, for an origin on the
//! boundary, the tangents to the edge at the origin. Second, each angular
//! interval gets a Gauss rule, every ray gets its entry/exit radii, each
//! radial span gets a Gauss rule, and every planar point is pulled back to
//! reference coordinates with Newton's method. The weight of a point is
//! r wʳ wᶿ / J₂ with J₂ the Jacobian of the planar projection map, so the
//! finished rule integrates f·J over the reference triangle and its weights
//! sum to the triangle's area, 1/2.

use arrayvec::ArrayVec;
use nalgebra::{Vector2, Vector3};
use once_cell::sync::Lazy;
use std::collections::HashMap;
use std::f64::consts::SQRT_2;
use std::io::{self, BufRead, Write};
use std::sync::{Arc, RwLock};
use thiserror::Error;

use crate::element::{
    edge_to_area, interpolate, newton_invert, surface_jacobian, CurvedTriangle, EdgeParam,
    ElementError, Inversion, ReferenceCoords, NODE_COORDS,
};
use crate::geometry::{
    build_reference_frame, locate_origin, origin_tangents, ray_edge_intersections, tangent_angle,
    wrap_angle, GeometryError, OriginLocation, ProjectedTriangle, RayHit,
};

/// Angular breakpoints closer than this are merged; narrower intervals are
/// skipped outright.
const MIN_INTERVAL: f64 = 1e-10;

#[derive(Debug, Error)]
pub enum QuadratureError {
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error("Newton inversion failed at planar point ({x:.6e}, {y:.6e})")]
    NewtonFailure { x: f64, y: f64 },
    #[error("odd radial intersection count at theta = {theta}; tangency or precision failure")]
    OddRadialCount { theta: f64 },
    #[error("projection Jacobian below tolerance at (xi, eta) = ({xi}, {eta}); element folds in projection")]
    DegenerateProjection { xi: f64, eta: f64 },
    #[error(transparent)]
    Element(#[from] ElementError),
    #[error("malformed rule file: {0}")]
    Parse(String),
    #[error(transparent)]
    Io(#[from] io::Error),
}

/// Parameters governing adaptive rule sizing.
#[derive(Debug, Clone)]
pub struct RuleSelection {
    /// Divisor of the largest corner angle fixing the θ point separation.
    pub n_theta: u32,
    /// Divisor of the longest corner chord fixing the r point separation.
    pub n_r: u32,
    pub k_min: usize,
    pub k_max: usize,
    pub m_min: usize,
    pub m_max: usize,
    /// Rules are built by the polar transform for σ below this, by the
    /// symmetric far-field rule otherwise.
    pub sigma_threshold: f64,
    /// Scaling factor s of the element bounding radius ρ = s·max|yᵢ − ȳ|.
    pub bounding_scale: f64,
    /// Fixed (K, M) override used for point-distribution plots.
    pub fixed_counts: Option<(usize, usize)>,
}

impl Default for RuleSelection {
    fn default() -> Self {
        Self {
            n_theta: 8,
            n_r: 8,
            k_min: 4,
            k_max: 64,
            m_min: 4,
            m_max: 64,
            sigma_threshold: 1.0,
            bounding_scale: SQRT_2,
            fixed_counts: None,
        }
    }
}

impl RuleSelection {
    fn theta_count(&self, width: f64, dtheta: f64) -> usize {
        match self.fixed_counts {
            Some((k, _)) => k,
            None => clamp_count(width / dtheta, self.k_min, self.k_max),
        }
    }

    fn radial_count(&self, span: f64, dr: f64) -> usize {
        match self.fixed_counts {
            Some((_, m)) => m,
            None => clamp_count(span / dr, self.m_min, self.m_max),
        }
    }
}

/// Nearest-natural-number rounding clamped into [lo, hi].
fn clamp_count(ratio: f64, lo: usize, hi: usize) -> usize {
    let n = ratio.round();
    if n < lo as f64 {
        lo
    } else if n > hi as f64 {
        hi
    } else {
        n as usize
    }
}

/// A 1-D Gauss–Legendre rule mapped to the interval (a, b).
#[derive(Debug, Clone)]
pub struct GaussRule1D {
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl GaussRule1D {
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.nodes.iter().copied().zip(self.weights.iter().copied())
    }
}

static GAUSS_CACHE: Lazy<RwLock<HashMap<usize, Arc<(Vec<f64>, Vec<f64>)>>>> =
    Lazy::new(|| RwLock::new(HashMap::new()));

/// Nodes and weights on [-1, 1], computed by Newton iteration on the
/// Legendre recurrence and memoized per order.
fn gauss_base(k: usize) -> Arc<(Vec<f64>, Vec<f64>)> {
    if let Some(hit) = GAUSS_CACHE.read().unwrap().get(&k) {
        return hit.clone();
    }
    let mut nodes = vec![0.0; k];
    let mut weights = vec![0.0; k];
    let n = k as f64;
    for i in 0..k {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n + 0.5)).cos();
        let mut pp = 0.0;
        for _ in 0..100 {
            let mut p0 = 1.0;
            let mut p1 = x;
            for j in 2..=k {
                let jf = j as f64;
                let p2 = ((2.0 * jf - 1.0) * x * p1 - (jf - 1.0) * p0) / jf;
                p0 = p1;
                p1 = p2;
            }
            let p = if k == 1 { x } else { p1 };
            let pm = if k == 1 { 1.0 } else { p0 };
            pp = if k == 1 {
                1.0
            } else {
                n * (x * p - pm) / (x * x - 1.0)
            };
            let dx = p / pp;
            x -= dx;
            if dx.abs() <= 1e-15 * x.abs().max(1.0) {
                break;
            }
        }
        nodes[k - 1 - i] = x;
        weights[k - 1 - i] = 2.0 / ((1.0 - x * x) * pp * pp);
    }
    let entry = Arc::new((nodes, weights));
    GAUSS_CACHE.write().unwrap().insert(k, entry.clone());
    entry
}

/// K-point Gauss–Legendre rule on (a, b). The endpoints are never nodes.
pub fn gauss_legendre(k: usize, a: f64, b: f64) -> GaussRule1D {
    assert!(k >= 1, "rule order must be at least 1");
    assert!(a < b, "empty interval ({a}, {b})");
    let base = gauss_base(k);
    let mid = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    GaussRule1D {
        nodes: base.0.iter().map(|x| mid + half * x).collect(),
        weights: base.1.iter().map(|w| w * half).collect(),
    }
}

/// A single abscissa of a triangle rule.
#[derive(Debug, Clone, Copy)]
pub struct RulePoint {
    pub xi: f64,
    pub eta: f64,
    pub weight: f64,
}

/// Construction metadata of a polar rule.
#[derive(Debug, Clone)]
pub struct PolarMeta {
    pub location: OriginLocation,
    pub breakpoints: Vec<f64>,
    pub sigma: f64,
}

#[derive(Debug, Clone)]
pub enum RuleMeta {
    Polar(PolarMeta),
    Symmetric,
}

/// A quadrature rule on the reference triangle, applied via
/// Σ f(ξₙ, ηₙ) J(ξₙ, ηₙ) wₙ.
#[derive(Debug, Clone)]
pub struct QuadratureRule {
    pub points: Vec<RulePoint>,
    pub meta: RuleMeta,
}

impl QuadratureRule {
    pub fn weight_sum(&self) -> f64 {
        self.points.iter().map(|p| p.weight).sum()
    }
}

/// Near/far-field selector σ.
///
/// ρ is the bounding-sphere radius s·max|yᵢ − ȳ|; σ is 0 on the element,
/// ρₓ/ρ beyond the bounding sphere, and z/ρ (plane distance over ρ) in the
/// near zone.
pub fn sigma(tri: &CurvedTriangle, field: Vector3<f64>) -> f64 {
    sigma_scaled(tri, field, SQRT_2)
}

pub fn sigma_scaled(tri: &CurvedTriangle, field: Vector3<f64>, s: f64) -> f64 {
    let mean = tri.node_mean();
    let rho = s * tri.node_spread();
    let rho_x = (field - mean).norm();
    // Interpolation cannot reach past ~1.5 max|y_i - mean|, so points beyond
    // 2ρ are never on the element and skip the inversion test.
    if rho_x > 2.0 * rho {
        return rho_x / rho;
    }
    if on_element(tri, field, rho) {
        return 0.0;
    }
    if rho_x > rho {
        return rho_x / rho;
    }
    let c0 = tri.node(0);
    let n = (tri.node(1) - c0).cross(&(tri.node(2) - c0)).normalize();
    (field - c0).dot(&n).abs() / rho
}

/// Whether the field point lies on the element surface, to 1e-9·ρ.
fn on_element(tri: &CurvedTriangle, field: Vector3<f64>, rho: f64) -> bool {
    let Ok(proj) = build_reference_frame(tri, field) else {
        return false;
    };
    let Ok(inv) = newton_invert(&proj, Vector2::zeros(), ReferenceCoords::CENTROID) else {
        return false;
    };
    inv.coords.in_triangle(1e-9)
        && (interpolate(tri, inv.coords) - field).norm() <= 1e-9 * rho
}

/// Angular breakpoints for the polar rule: corner rays, origin tangents and,
/// for boundary origins, the edge tangents at the origin; wrapped to [0, 2π),
/// sorted, deduplicated and closed with θ₁ + 2π.
pub fn angle_breakpoints(
    proj: &ProjectedTriangle,
    loc: &OriginLocation,
) -> Result<Vec<f64>, QuadratureError> {
    let snap = proj.snap_tol();
    let mut angles: Vec<f64> = Vec::with_capacity(8);

    for corner in 0..3 {
        let p = proj.planar_node(corner);
        if p.norm() > snap {
            angles.push(wrap_angle(p.y.atan2(p.x)));
        }
    }
    for edge in 0..3 {
        for gamma in origin_tangents(proj, edge) {
            let p = proj.edge_planar(edge, gamma);
            angles.push(wrap_angle(p.y.atan2(p.x)));
        }
    }
    match loc {
        OriginLocation::OnEdge(e) => {
            let (psi, psi_pi) = tangent_angle(proj, *e)?;
            angles.push(psi);
            angles.push(psi_pi);
        }
        OriginLocation::OnVertex(k) => {
            // The corner is the γ=0 end of edge k and the γ=1 end of the
            // preceding edge.
            for e in [EdgeParam::new(*k, 0.0), EdgeParam::new((k + 2) % 3, 1.0)] {
                let (psi, psi_pi) = tangent_angle(proj, e)?;
                angles.push(psi);
                angles.push(psi_pi);
            }
        }
        _ => {}
    }

    angles.sort_by(|a, b| a.partial_cmp(b).unwrap());
    angles.dedup_by(|a, b| (*a - *b).abs() < MIN_INTERVAL);
    // The first and last entry can be the same ray across the 0/2π wrap.
    if angles.len() > 1 {
        let first = angles[0];
        let last = *angles.last().unwrap();
        if first + std::f64::consts::TAU - last < MIN_INTERVAL {
            angles.pop();
        }
    }
    // Closing the circle makes every wedge an interval between consecutive
    // breakpoints; wedges outside the element contribute empty radial lists.
    if let Some(&first) = angles.first() {
        angles.push(first + std::f64::consts::TAU);
    }
    Ok(angles)
}

/// All edge intersections of the ray at θ, merged across edges, ascending
/// in r.
fn collect_hits(proj: &ProjectedTriangle, theta: f64, r_min: f64) -> ArrayVec<RayHit, 6> {
    let mut hits: ArrayVec<RayHit, 6> = ArrayVec::new();
    for edge in 0..3 {
        for h in ray_edge_intersections(proj, edge, theta, r_min) {
            hits.push(h);
        }
    }
    hits.sort_by(|u, v| u.r.partial_cmp(&v.r).unwrap());
    hits
}

/// Radii where the ray at θ crosses the element boundary, with r = 0
/// prepended when the ray starts inside the domain, so consecutive pairs
/// bound the radial integrals.
pub fn radial_limits(
    proj: &ProjectedTriangle,
    theta: f64,
    loc: &OriginLocation,
) -> Result<Vec<f64>, QuadratureError> {
    let r_min = boundary_r_min(proj, loc);
    let hits = collect_hits(proj, theta, r_min);
    let prepend = match loc {
        OriginLocation::Inside(_) => true,
        OriginLocation::Outside { .. } => false,
        // On the boundary the ray enters the domain directly exactly when it
        // crosses the remaining boundary an odd number of times.
        _ => hits.len() % 2 == 1,
    };
    let mut radii = Vec::with_capacity(hits.len() + 1);
    if prepend {
        radii.push(0.0);
    }
    radii.extend(hits.iter().map(|h| h.r));
    if radii.len() % 2 != 0 {
        return Err(QuadratureError::OddRadialCount { theta });
    }
    Ok(radii)
}

fn boundary_r_min(proj: &ProjectedTriangle, loc: &OriginLocation) -> f64 {
    match loc {
        OriginLocation::OnVertex(_) | OriginLocation::OnEdge(_) => proj.snap_tol(),
        _ => 0.0,
    }
}

/// Point separations Δθ and Δr from the projected corner triangle.
fn spacings(proj: &ProjectedTriangle, sel: &RuleSelection) -> (f64, f64) {
    let c = [
        proj.planar_node(0),
        proj.planar_node(1),
        proj.planar_node(2),
    ];
    let mut max_angle: f64 = 0.0;
    let mut max_len: f64 = 0.0;
    for i in 0..3 {
        let u = c[(i + 1) % 3] - c[i];
        let v = c[(i + 2) % 3] - c[i];
        let angle = (u.dot(&v) / (u.norm() * v.norm())).clamp(-1.0, 1.0).acos();
        max_angle = max_angle.max(angle);
        max_len = max_len.max(u.norm());
    }
    (max_angle / sel.n_theta as f64, max_len / sel.n_r as f64)
}

/// Build the polar quadrature rule for an element and field point.
pub fn build_rule(
    tri: &CurvedTriangle,
    field: Vector3<f64>,
    sel: &RuleSelection,
) -> Result<QuadratureRule, QuadratureError> {
    let proj = build_reference_frame(tri, field)?;
    build_rule_projected(&proj, sel)
}

/// Rule construction on a prepared reference frame.
pub fn build_rule_projected(
    proj: &ProjectedTriangle,
    sel: &RuleSelection,
) -> Result<QuadratureRule, QuadratureError> {
    let loc = locate_origin(proj);
    let breaks = angle_breakpoints(proj, &loc)?;
    let (dtheta, dr) = spacings(proj, sel);
    let r_min = boundary_r_min(proj, &loc);
    let origin_seed = match loc {
        OriginLocation::Inside(c) => Some(c),
        OriginLocation::OnVertex(k) => Some(NODE_COORDS[k]),
        OriginLocation::OnEdge(e) => Some(edge_to_area(e)),
        OriginLocation::Outside { .. } => None,
    };

    // Angles where radial limits have square-root branch points. Intervals
    // whose endpoints sit on or near one are subdivided geometrically
    // towards that endpoint, otherwise Gauss convergence in θ degrades to
    // algebraic and the weight sum misses its tolerance.
    let mut singular_angles = Vec::new();
    for edge in 0..3 {
        for (theta, _gamma) in crate::geometry::edge_tangency_angles(proj, edge) {
            singular_angles.push(theta);
        }
    }

    let mut points = Vec::new();
    for w in breaks.windows(2) {
        let (lo, hi) = (w[0], w[1]);
        let width = hi - lo;
        if width < MIN_INTERVAL {
            continue;
        }
        let prepend = match loc {
            OriginLocation::Inside(_) => true,
            OriginLocation::Outside { .. } => false,
            _ => {
                let probe = collect_hits(proj, 0.5 * (lo + hi), r_min);
                probe.len() % 2 == 1
            }
        };
        for (plo, phi, graded) in graded_pieces(lo, hi, &singular_angles) {
            let k = match sel.fixed_counts {
                Some((k, _)) => k,
                // Graded pieces keep enough points for the fixed convergence
                // ratio of the geometric subdivision.
                None if graded => clamp_count((phi - plo) / dtheta, sel.k_min.max(14), sel.k_max),
                None => sel.theta_count(phi - plo, dtheta),
            };
            let theta_rule = gauss_legendre(k, plo, phi);
            for (theta_k, w_theta) in theta_rule.iter() {
                // Retry nudges point away from the nearer interval end, so a
                // tangential endpoint is never crossed into the neighbouring
                // radial structure.
                let nudge = if theta_k - lo < hi - theta_k {
                    1e-9 * width
                } else {
                    -1e-9 * width
                };
                let limits = radial_breaks_with_retry(proj, theta_k, nudge, r_min, prepend)?;
                integrate_ray(
                    proj,
                    sel,
                    theta_k,
                    w_theta,
                    &limits,
                    origin_seed,
                    dr,
                    &mut points,
                )?;
            }
        }
    }

    let field = proj.from_reference(Vector3::new(0.0, 0.0, proj.z_field()));
    let sigma_val = sigma_scaled(proj.source(), field, sel.bounding_scale);
    Ok(QuadratureRule {
        points,
        meta: RuleMeta::Polar(PolarMeta {
            location: loc,
            breakpoints: breaks,
            sigma: sigma_val,
        }),
    })
}

/// Split (lo, hi) into integration pieces, grading geometrically towards any
/// endpoint that lies on or near a radial-limit branch point. The bool marks
/// graded pieces.
fn graded_pieces(lo: f64, hi: f64, singular: &[f64]) -> Vec<(f64, f64, bool)> {
    const NEAR: f64 = 0.15;
    const RATIO: f64 = 3.0;
    // Stops the subdivision before θ nodes reach the zone where near-born
    // intersection pairs fall below the boundary-origin radius filter; the
    // innermost piece then integrates the remaining √-type variation with an
    // error of order (floor width)^{3/2}.
    const FLOOR_REL: f64 = 1e-9;

    let width = hi - lo;
    let dist = |x: f64| -> f64 {
        singular
            .iter()
            .map(|&s| {
                let d = (x - s).abs().rem_euclid(std::f64::consts::TAU);
                d.min(std::f64::consts::TAU - d)
            })
            .fold(f64::INFINITY, f64::min)
    };
    let d_lo = dist(lo);
    let d_hi = dist(hi);
    let near_lo = d_lo < NEAR * width;
    let near_hi = d_hi < NEAR * width;

    match (near_lo, near_hi) {
        (false, false) => vec![(lo, hi, false)],
        (true, false) => grade_towards(lo, hi, d_lo, RATIO, FLOOR_REL, true),
        (false, true) => grade_towards(lo, hi, d_hi, RATIO, FLOOR_REL, false),
        (true, true) => {
            let mid = 0.5 * (lo + hi);
            let mut v = grade_towards(lo, mid, d_lo, RATIO, FLOOR_REL, true);
            v.extend(grade_towards(mid, hi, d_hi, RATIO, FLOOR_REL, false));
            v
        }
    }
}

/// Geometric subdivision of (lo, hi) shrinking towards `lo` when
/// `towards_lo`, else towards `hi`; stops once pieces reach the singularity
/// distance or the relative floor.
fn grade_towards(
    lo: f64,
    hi: f64,
    sing_dist: f64,
    ratio: f64,
    floor_rel: f64,
    towards_lo: bool,
) -> Vec<(f64, f64, bool)> {
    let width = hi - lo;
    let floor = (floor_rel * width).max(sing_dist.min(width));
    let mut cuts = vec![width];
    let mut w = width / ratio;
    while w > floor && cuts.len() < 64 {
        cuts.push(w);
        w /= ratio;
    }
    cuts.push(0.0);
    let mut out = Vec::with_capacity(cuts.len());
    for pair in cuts.windows(2) {
        let (outer, inner) = (pair[0], pair[1]);
        let piece = if towards_lo {
            (lo + inner, lo + outer, true)
        } else {
            (hi - outer, hi - inner, true)
        };
        out.push(piece);
    }
    if !towards_lo {
        out.reverse();
    }
    out
}

/// Radial limits with seed coordinates; retries once with an angle nudged
/// into the interval on an odd crossing count.
///
/// Rays grazing a tangency can carry a phantom near-origin hit whose
/// discriminant is pure cancellation noise; if the parity is still odd after
/// the retry and the smallest hit radius is negligible, that hit is dropped.
/// Either reading of such a hit changes the integral at the 1e-12 level.
fn radial_breaks_with_retry(
    proj: &ProjectedTriangle,
    theta: f64,
    nudge: f64,
    r_min: f64,
    prepend: bool,
) -> Result<Vec<(f64, Option<EdgeParam>)>, QuadratureError> {
    for attempt in 0..3 {
        let t = theta + f64::from(attempt.min(1)) * nudge;
        let mut hits = collect_hits(proj, t, r_min);
        if attempt == 2 {
            let healable = (hits.len() + usize::from(prepend)) % 2 != 0
                && hits
                    .first()
                    .is_some_and(|h| h.r < 1e-6 * proj.scale());
            if !healable {
                break;
            }
            hits.remove(0);
        }
        let count = hits.len() + usize::from(prepend);
        if count % 2 != 0 {
            continue;
        }
        let mut limits = Vec::with_capacity(count);
        if prepend {
            limits.push((0.0, None));
        }
        limits.extend(
            hits.iter()
                .map(|h| (h.r, Some(EdgeParam::new(h.edge, h.gamma)))),
        );
        return Ok(limits);
    }
    Err(QuadratureError::OddRadialCount { theta })
}

/// Lay Gauss points along one ray and append the pulled-back rule points.
#[allow(clippy::too_many_arguments)]
fn integrate_ray(
    proj: &ProjectedTriangle,
    sel: &RuleSelection,
    theta: f64,
    w_theta: f64,
    limits: &[(f64, Option<EdgeParam>)],
    origin_seed: Option<ReferenceCoords>,
    dr: f64,
    points: &mut Vec<RulePoint>,
) -> Result<(), QuadratureError> {
    let (sin_t, cos_t) = theta.sin_cos();
    for pair in limits.chunks_exact(2) {
        let (r_lo, lo_seed) = pair[0];
        let (r_hi, _) = pair[1];
        let span = r_hi - r_lo;
        if span <= 1e-12 * proj.scale().max(f64::MIN_POSITIVE) {
            continue;
        }
        // The paper's seeding: the hit's edge parameter converts to (ξ, η)
        // for the first point, then each result seeds the next point out.
        let mut seed = lo_seed
            .map(edge_to_area)
            .or(origin_seed)
            .unwrap_or(ReferenceCoords::CENTROID);
        let m = sel.radial_count(span, dr);
        let radial_rule = gauss_legendre(m, r_lo, r_hi);
        for (r_m, w_r) in radial_rule.iter() {
            let target = Vector2::new(r_m * cos_t, r_m * sin_t);
            let inv = invert_with_fallback(proj, target, seed)?;
            let j2 = proj.planar_jacobian_det(inv.coords);
            if j2 < 1e-14 {
                return Err(QuadratureError::DegenerateProjection {
                    xi: inv.coords.xi,
                    eta: inv.coords.eta,
                });
            }
            points.push(RulePoint {
                xi: inv.coords.xi,
                eta: inv.coords.eta,
                weight: r_m * w_r * w_theta / j2,
            });
            seed = inv.coords;
        }
    }
    Ok(())
}

fn invert_with_fallback(
    proj: &ProjectedTriangle,
    target: Vector2<f64>,
    seed: ReferenceCoords,
) -> Result<Inversion, QuadratureError> {
    newton_invert(proj, target, seed)
        .or_else(|_| newton_invert(proj, target, ReferenceCoords::CENTROID))
        .map_err(|_| QuadratureError::NewtonFailure {
            x: target.x,
            y: target.y,
        })
}

/// Apply a rule to an integrand on reference coordinates: Σ f·J·w with J the
/// surface Jacobian. The element must be non-degenerate wherever the rule has
/// points.
pub fn apply_rule<F: Fn(ReferenceCoords) -> f64>(
    rule: &QuadratureRule,
    tri: &CurvedTriangle,
    f: F,
) -> f64 {
    let mut acc = 0.0;
    for p in &rule.points {
        let c = ReferenceCoords::new(p.xi, p.eta);
        let (j, _) = surface_jacobian(tri, c).expect("non-degenerate element");
        acc += f(c) * j * p.weight;
    }
    acc
}

/// Fully symmetric 25-point rule on the reference triangle, exact through
/// polynomial degree 10, with positive weights and strictly interior points.
/// Used for far-field panels where the polar transform is unnecessary.
pub fn fallback_rule() -> QuadratureRule {
    QuadratureRule {
        points: SYMMETRIC_25
            .iter()
            .map(|&[xi, eta, weight]| RulePoint { xi, eta, weight })
            .collect(),
        meta: RuleMeta::Symmetric,
    }
}

/// Degree-10 symmetric rule: centroid orbit, two 3-point orbits and three
/// 6-point orbits. Weights sum to 1/2.
const SYMMETRIC_25: [[f64; 3]; 25] = [
    [0.023308867510000190714, 0.023308867510000190714, 0.0041119093452320977593],
    [0.023308867510000190714, 0.95338226497999961857, 0.0041119093452320977593],
    [0.95338226497999961857, 0.023308867510000190714, 0.0041119093452320977593],
    [0.035632559587503481321, 0.14329537042686714531, 0.015443328442281994391],
    [0.035632559587503481321, 0.82107206998562937337, 0.015443328442281994391],
    [0.14329537042686714531, 0.035632559587503481321, 0.015443328442281994391],
    [0.14329537042686714531, 0.82107206998562937337, 0.015443328442281994391],
    [0.82107206998562937337, 0.035632559587503481321, 0.015443328442281994391],
    [0.82107206998562937337, 0.14329537042686714531, 0.015443328442281994391],
    [0.029946031954170886503, 0.35874014186443146458, 0.018679928117152638413],
    [0.029946031954170886503, 0.61131382618139764892, 0.018679928117152638413],
    [0.35874014186443146458, 0.029946031954170886503, 0.018679928117152638413],
    [0.35874014186443146458, 0.61131382618139764892, 0.018679928117152638413],
    [0.61131382618139764892, 0.029946031954170886503, 0.018679928117152638413],
    [0.61131382618139764892, 0.35874014186443146458, 0.018679928117152638413],
    [0.14792562620953443735, 0.22376697357697300623, 0.022715296148085009004],
    [0.14792562620953443735, 0.62830740021349255642, 0.022715296148085009004],
    [0.22376697357697300623, 0.14792562620953443735, 0.022715296148085009004],
    [0.22376697357697300623, 0.62830740021349255642, 0.022715296148085009004],
    [0.62830740021349255642, 0.14792562620953443735, 0.022715296148085009004],
    [0.62830740021349255642, 0.22376697357697300623, 0.022715296148085009004],
    [0.14982757879581885406, 0.42508621060209057297, 0.03556190111618866732],
    [0.42508621060209057297, 0.14982757879581885406, 0.03556190111618866732],
    [0.42508621060209057297, 0.42508621060209057297, 0.03556190111618866732],
    [0.33333333333333333333, 0.33333333333333333333, 0.039947252370619853916],
];

/// Serialize a rule as plain text: `#` headers carrying the element nodes,
/// field point, σ and breakpoint angles, then one `ξ η w` triple per line at
/// 17 significant digits.
pub fn write_rule<W: Write>(
    out: &mut W,
    rule: &QuadratureRule,
    tri: &CurvedTriangle,
    field: Vector3<f64>,
) -> io::Result<()> {
    write!(out, "# nodes:")?;
    for n in tri.nodes() {
        write!(out, " {:.16e} {:.16e} {:.16e}", n.x, n.y, n.z)?;
    }
    writeln!(out)?;
    writeln!(out, "# field: {:.16e} {:.16e} {:.16e}", field.x, field.y, field.z)?;
    match &rule.meta {
        RuleMeta::Polar(meta) => {
            writeln!(out, "# sigma: {:.16e}", meta.sigma)?;
            writeln!(out, "# origin: {}", meta.location.tag())?;
            write!(out, "# breakpoints:")?;
            for b in &meta.breakpoints {
                write!(out, " {:.16e}", b)?;
            }
            writeln!(out)?;
        }
        RuleMeta::Symmetric => writeln!(out, "# origin: far-field")?,
    }
    writeln!(out, "# sum-w: {:.16e}", rule.weight_sum())?;
    for p in &rule.points {
        writeln!(out, "{:.16e} {:.16e} {:.16e}", p.xi, p.eta, p.weight)?;
    }
    Ok(())
}

/// A rule file read back from disk.
#[derive(Debug, Clone, Default)]
pub struct ParsedRule {
    pub points: Vec<RulePoint>,
    pub nodes: Option<[[f64; 3]; 6]>,
    pub field: Option<[f64; 3]>,
    pub sigma: Option<f64>,
    pub breakpoints: Vec<f64>,
}

impl ParsedRule {
    pub fn weight_sum(&self) -> f64 {
        self.points.iter().map(|p| p.weight).sum()
    }
}

pub fn read_rule<R: BufRead>(input: R) -> Result<ParsedRule, QuadratureError> {
    let mut parsed = ParsedRule::default();
    for line in input.lines() {
        let line = line?;
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        if let Some(rest) = line.strip_prefix('#') {
            let rest = rest.trim();
            if let Some(vals) = rest.strip_prefix("nodes:") {
                let nums = parse_floats(vals)?;
                if nums.len() != 18 {
                    return Err(QuadratureError::Parse(format!(
                        "expected 18 node coordinates, got {}",
                        nums.len()
                    )));
                }
                let mut nodes = [[0.0; 3]; 6];
                for (i, chunk) in nums.chunks_exact(3).enumerate() {
                    nodes[i] = [chunk[0], chunk[1], chunk[2]];
                }
                parsed.nodes = Some(nodes);
            } else if let Some(vals) = rest.strip_prefix("field:") {
                let nums = parse_floats(vals)?;
                if nums.len() != 3 {
                    return Err(QuadratureError::Parse("field needs 3 values".into()));
                }
                parsed.field = Some([nums[0], nums[1], nums[2]]);
            } else if let Some(vals) = rest.strip_prefix("sigma:") {
                parsed.sigma = parse_floats(vals)?.first().copied();
            } else if let Some(vals) = rest.strip_prefix("breakpoints:") {
                parsed.breakpoints = parse_floats(vals)?;
            }
            continue;
        }
        let nums = parse_floats(line)?;
        if nums.len() != 3 {
            return Err(QuadratureError::Parse(format!(
                "expected `xi eta w` triple, got {line:?}"
            )));
        }
        parsed.points.push(RulePoint {
            xi: nums[0],
            eta: nums[1],
            weight: nums[2],
        });
    }
    Ok(parsed)
}

fn parse_floats(s: &str) -> Result<Vec<f64>, QuadratureError> {
    s.split_whitespace()
        .map(|tok| {
            tok.parse::<f64>()
                .map_err(|e| QuadratureError::Parse(format!("bad float {tok:?}: {e}")))
        })
        .collect()
}

/// Exact integral of ξ^a η^b over the reference triangle: a! b!/(a+b+2)!.
pub fn monomial_integral(a: u32, b: u32) -> f64 {
    fn fact(n: u32) -> f64 {
        (1..=n).map(|k| k as f64).product()
    }
    fact(a) * fact(b) / fact(a + b + 2)
}

//! Second-order (six-node) triangle interpolation.
//!
//! Nodes are ordered corners first (1, 2, 3) then edge midnodes: node 4 on
//! edge 1-2, node 5 on edge 2-3, node 6 on edge 3-1. In code all indices are
//! zero-based, so edge `k` runs from corner `k` to corner `(k + 1) % 3` with
//! midnode `k + 3`, and the edge parameter γ increases anti-clockwise.

use nalgebra::{Vector2, Vector3};
use thiserror::Error;

use crate::geometry::ProjectedTriangle;

/// Convergence tolerance on the planar residual norm for Newton inversion.
pub const TOL_NEWTON: f64 = 1e-12;
/// Iteration cap for Newton inversion.
pub const MAX_NEWTON_ITER: usize = 30;
/// Step-halving cap per Newton iteration when the residual fails to decrease.
const MAX_HALVINGS: usize = 6;

#[derive(Debug, Error)]
pub enum ElementError {
    #[error("element nodes must all be finite")]
    NonFiniteNode,
    #[error("element corners are collinear; reference plane is undefined")]
    CollinearCorners,
    #[error("degenerate surface tangents at (xi, eta) = ({xi}, {eta})")]
    DegenerateTangent { xi: f64, eta: f64 },
    #[error("Newton inversion stalled: residual {residual:.3e} after {iterations} iterations")]
    NewtonDiverged { residual: f64, iterations: usize },
    #[error("singular planar Jacobian during Newton inversion")]
    SingularJacobian,
}

/// Coordinates on the reference triangle 0 ≤ ξ ≤ 1, 0 ≤ η ≤ 1 − ξ.
///
/// The bounds are only meaningful for points on the element; intermediate
/// Newton iterates may leave the triangle.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReferenceCoords {
    pub xi: f64,
    pub eta: f64,
}

impl ReferenceCoords {
    pub const CENTROID: ReferenceCoords = ReferenceCoords::new(1.0 / 3.0, 1.0 / 3.0);

    pub const fn new(xi: f64, eta: f64) -> Self {
        Self { xi, eta }
    }

    /// True when the point lies in the closed reference triangle, allowing
    /// `slack` outside each bounding inequality.
    pub fn in_triangle(&self, slack: f64) -> bool {
        self.xi >= -slack && self.eta >= -slack && self.xi + self.eta <= 1.0 + slack
    }
}

/// Reference coordinates of the six canonical nodes, in node order.
pub const NODE_COORDS: [ReferenceCoords; 6] = [
    ReferenceCoords::new(0.0, 0.0),
    ReferenceCoords::new(1.0, 0.0),
    ReferenceCoords::new(0.0, 1.0),
    ReferenceCoords::new(0.5, 0.0),
    ReferenceCoords::new(0.5, 0.5),
    ReferenceCoords::new(0.0, 0.5),
];

/// A position on one edge of the element: `edge` in 0..3, γ in [0, 1].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EdgeParam {
    pub edge: usize,
    pub gamma: f64,
}

impl EdgeParam {
    pub const fn new(edge: usize, gamma: f64) -> Self {
        Self { edge, gamma }
    }
}

/// An isoparametric second-order triangle given by its six nodes.
#[derive(Debug, Clone)]
pub struct CurvedTriangle {
    nodes: [Vector3<f64>; 6],
}

impl CurvedTriangle {
    pub fn new(nodes: [[f64; 3]; 6]) -> Result<Self, ElementError> {
        Self::from_vectors(nodes.map(Vector3::from))
    }

    pub fn from_vectors(nodes: [Vector3<f64>; 6]) -> Result<Self, ElementError> {
        if nodes.iter().any(|n| !n.iter().all(|v| v.is_finite())) {
            return Err(ElementError::NonFiniteNode);
        }
        let tri = Self { nodes };
        let cross = (tri.nodes[1] - tri.nodes[0]).cross(&(tri.nodes[2] - tri.nodes[0]));
        if cross.norm() <= 1e-14 * tri.node_spread().powi(2) {
            return Err(ElementError::CollinearCorners);
        }
        Ok(tri)
    }

    pub fn node(&self, i: usize) -> Vector3<f64> {
        self.nodes[i]
    }

    pub fn nodes(&self) -> &[Vector3<f64>; 6] {
        &self.nodes
    }

    /// Mean of the six nodes (the ȳ of the near-field criterion).
    pub fn node_mean(&self) -> Vector3<f64> {
        self.nodes.iter().sum::<Vector3<f64>>() / 6.0
    }

    /// Largest node distance from the node mean.
    pub fn node_spread(&self) -> f64 {
        let mean = self.node_mean();
        self.nodes
            .iter()
            .map(|n| (n - mean).norm())
            .fold(0.0, f64::max)
    }

    /// Start corner, end corner and midnode of edge `k`.
    pub fn edge_nodes(&self, edge: usize) -> (Vector3<f64>, Vector3<f64>, Vector3<f64>) {
        (
            self.nodes[edge],
            self.nodes[(edge + 1) % 3],
            self.nodes[edge + 3],
        )
    }
}

/// The six shape functions L₁..L₆ at (ξ, η).
pub fn shape_functions(c: ReferenceCoords) -> [f64; 6] {
    let (xi, eta) = (c.xi, c.eta);
    let zeta = 1.0 - xi - eta;
    [
        2.0 * zeta * (zeta - 0.5),
        2.0 * xi * (xi - 0.5),
        2.0 * eta * (eta - 0.5),
        4.0 * xi * zeta,
        4.0 * xi * eta,
        4.0 * eta * zeta,
    ]
}

/// Analytic gradients (∂L/∂ξ, ∂L/∂η) of the six shape functions.
pub fn shape_gradients(c: ReferenceCoords) -> [[f64; 2]; 6] {
    let (xi, eta) = (c.xi, c.eta);
    let u = xi + eta;
    [
        [4.0 * u - 3.0, 4.0 * u - 3.0],
        [4.0 * xi - 1.0, 0.0],
        [0.0, 4.0 * eta - 1.0],
        [4.0 - 8.0 * xi - 4.0 * eta, -4.0 * xi],
        [4.0 * eta, 4.0 * xi],
        [-4.0 * eta, 4.0 - 4.0 * xi - 8.0 * eta],
    ]
}

/// Interpolated position Σ Lᵢ yᵢ on the element.
pub fn interpolate(tri: &CurvedTriangle, c: ReferenceCoords) -> Vector3<f64> {
    let l = shape_functions(c);
    let mut y = Vector3::zeros();
    for i in 0..6 {
        y += l[i] * tri.nodes[i];
    }
    y
}

/// Surface Jacobian |∂y/∂ξ × ∂y/∂η| and the unit normal fixed by node order.
pub fn surface_jacobian(
    tri: &CurvedTriangle,
    c: ReferenceCoords,
) -> Result<(f64, Vector3<f64>), ElementError> {
    let g = shape_gradients(c);
    let mut t_xi = Vector3::zeros();
    let mut t_eta = Vector3::zeros();
    for i in 0..6 {
        t_xi += g[i][0] * tri.nodes[i];
        t_eta += g[i][1] * tri.nodes[i];
    }
    let cross = t_xi.cross(&t_eta);
    let j = cross.norm();
    if j <= 1e-14 * tri.node_spread().powi(2) {
        return Err(ElementError::DegenerateTangent { xi: c.xi, eta: c.eta });
    }
    Ok((j, cross / j))
}

/// Edge shape functions J₁, J₂, J₃ at γ.
pub fn edge_shape(gamma: f64) -> [f64; 3] {
    [
        2.0 * gamma * gamma - 3.0 * gamma + 1.0,
        2.0 * gamma * gamma - gamma,
        -4.0 * gamma * gamma + 4.0 * gamma,
    ]
}

/// Derivatives dJ/dγ of the edge shape functions.
pub fn edge_shape_deriv(gamma: f64) -> [f64; 3] {
    [4.0 * gamma - 3.0, 4.0 * gamma - 1.0, -8.0 * gamma + 4.0]
}

/// Position on edge `e.edge` at parameter γ.
pub fn edge_point(tri: &CurvedTriangle, e: EdgeParam) -> Vector3<f64> {
    let (start, end, mid) = tri.edge_nodes(e.edge);
    let j = edge_shape(e.gamma);
    start * j[0] + end * j[1] + mid * j[2]
}

/// Map an edge position to reference coordinates: (γ,0), (1−γ,γ) or (0,1−γ).
pub fn edge_to_area(e: EdgeParam) -> ReferenceCoords {
    let g = e.gamma;
    match e.edge {
        0 => ReferenceCoords::new(g, 0.0),
        1 => ReferenceCoords::new(1.0 - g, g),
        2 => ReferenceCoords::new(0.0, 1.0 - g),
        _ => panic!("edge index out of range: {}", e.edge),
    }
}

/// Result of a converged Newton inversion.
#[derive(Debug, Clone, Copy)]
pub struct Inversion {
    pub coords: ReferenceCoords,
    pub residual: f64,
    pub iterations: usize,
}

/// Invert the planar projection map: find (ξ, η) with proj(ξ, η) = `target`.
///
/// Damped Newton on the 2×2 system; iterates are not clamped to the
/// reference triangle, and containment is the caller's concern.
pub fn newton_invert(
    proj: &ProjectedTriangle,
    target: Vector2<f64>,
    guess: ReferenceCoords,
) -> Result<Inversion, ElementError> {
    newton_invert_tol(proj, target, guess, TOL_NEWTON)
}

pub fn newton_invert_tol(
    proj: &ProjectedTriangle,
    target: Vector2<f64>,
    guess: ReferenceCoords,
    tol: f64,
) -> Result<Inversion, ElementError> {
    let mut c = guess;
    let mut res = proj.planar_point(c) - target;
    let mut res_norm = res.norm();
    for it in 0..MAX_NEWTON_ITER {
        if res_norm <= tol {
            return Ok(Inversion {
                coords: c,
                residual: res_norm,
                iterations: it,
            });
        }
        let j = proj.planar_jacobian(c);
        let det = j[(0, 0)] * j[(1, 1)] - j[(0, 1)] * j[(1, 0)];
        if det.abs() < 1e-300 {
            return Err(ElementError::SingularJacobian);
        }
        let dx = (j[(1, 1)] * res.x - j[(0, 1)] * res.y) / det;
        let dy = (j[(0, 0)] * res.y - j[(1, 0)] * res.x) / det;

        let mut step = 1.0;
        let mut accepted = false;
        for _ in 0..=MAX_HALVINGS {
            let trial = ReferenceCoords::new(c.xi - step * dx, c.eta - step * dy);
            let trial_res = proj.planar_point(trial) - target;
            let trial_norm = trial_res.norm();
            if trial_norm < res_norm || trial_norm <= tol {
                c = trial;
                res = trial_res;
                res_norm = trial_norm;
                accepted = true;
                break;
            }
            step *= 0.5;
        }
        if !accepted {
            // Take the smallest step anyway; a later iteration may recover.
            c = ReferenceCoords::new(c.xi - step * dx, c.eta - step * dy);
            res = proj.planar_point(c) - target;
            res_norm = res.norm();
        }
    }
    if res_norm <= tol {
        return Ok(Inversion {
            coords: c,
            residual: res_norm,
            iterations: MAX_NEWTON_ITER,
        });
    }
    Err(ElementError::NewtonDiverged {
        residual: res_norm,
        iterations: MAX_NEWTON_ITER,
    })
}

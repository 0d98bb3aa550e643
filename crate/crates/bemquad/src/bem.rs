//! Collocation boundary element solver for the Laplace equation.
//!
//! The surface potential and its normal derivative are related through the
//! boundary integral identity discretized at the mesh nodes. Panel integrals
//! carry the six shape functions against the Green's function (single layer)
//! and its normal derivative (double layer), switching between the polar
//! rule and the symmetric far-field rule on the σ criterion.
//!
//! Sign conventions: `n` is the outward body normal and
//! dG/dn = n·(x−y)/4πR³, so the double-layer row sum over a closed surface
//! is −1 for x inside, −1/2 on a smooth boundary point and 0 outside. With
//! the corner constant c = 1 + ∮ ∂G/∂n dS this makes (C + A)φ = Bq the
//! interior identity, with constants in its null space. A point source
//! placed inside the body generates data harmonic in the *exterior* domain,
//! whose boundary trace instead satisfies (C + A − I)φ = Bq; that is the
//! system the Neumann solve inverts, and it has no null space.

use nalgebra::{DMatrix, DVector, Vector3};
use rayon::prelude::*;
use thiserror::Error;

use crate::element::{
    interpolate, shape_functions, surface_jacobian, CurvedTriangle, ElementError, ReferenceCoords,
};
use crate::mesh::{node_normal, SurfaceMesh};
use crate::quadrature::{
    build_rule, fallback_rule, sigma_scaled, QuadratureError, QuadratureRule, RuleSelection,
};

#[derive(Debug, Error)]
pub enum BemError {
    #[error("field point coincides with a surface quadrature point")]
    CoincidentPoint,
    #[error("point source lies on the surface (node {node})")]
    SourceOnSurface { node: usize },
    #[error("system is ill-conditioned (pivot ratio {estimate:.3e})")]
    IllConditioned { estimate: f64 },
    #[error("singular system matrix")]
    SingularMatrix,
    #[error("vector length {got} does not match node count {want}")]
    DimensionMismatch { got: usize, want: usize },
    #[error(transparent)]
    Quadrature(#[from] QuadratureError),
    #[error(transparent)]
    Element(#[from] ElementError),
}

/// Green's function G = 1/4πR and its normal derivative
/// dG/dn = n·(x−y)/4πR³ at the surface point y with unit normal n.
pub fn green(
    x: Vector3<f64>,
    y: Vector3<f64>,
    n: Vector3<f64>,
) -> Result<(f64, f64), BemError> {
    let d = x - y;
    let r = d.norm();
    if r < 1e-300 {
        return Err(BemError::CoincidentPoint);
    }
    let g = 1.0 / (4.0 * std::f64::consts::PI * r);
    let dgdn = n.dot(&d) / (4.0 * std::f64::consts::PI * r * r * r);
    Ok((g, dgdn))
}

/// Single- and double-layer integrals of the six shape functions over a
/// panel: ∫ Lᵢ G J dη dξ and ∫ Lᵢ ∂G/∂n J dη dξ.
///
/// The polar rule is used for σ below the selection threshold, the symmetric
/// far-field rule otherwise.
pub fn panel_integrals(
    tri: &CurvedTriangle,
    x: Vector3<f64>,
    sel: &RuleSelection,
) -> Result<([f64; 6], [f64; 6]), BemError> {
    let s = sigma_scaled(tri, x, sel.bounding_scale);
    if s < sel.sigma_threshold {
        let rule = build_rule(tri, x, sel)?;
        panel_integrals_with_rule(tri, x, &rule)
    } else {
        panel_integrals_with_rule(tri, x, &fallback_rule())
    }
}

/// Panel integrals with a caller-supplied rule.
pub fn panel_integrals_with_rule(
    tri: &CurvedTriangle,
    x: Vector3<f64>,
    rule: &QuadratureRule,
) -> Result<([f64; 6], [f64; 6]), BemError> {
    let mut single = [0.0; 6];
    let mut double = [0.0; 6];
    for p in &rule.points {
        let c = ReferenceCoords::new(p.xi, p.eta);
        let (j, n) = surface_jacobian(tri, c)?;
        let y = interpolate(tri, c);
        let (g, dgdn) = green(x, y, n)?;
        let l = shape_functions(c);
        for i in 0..6 {
            single[i] += l[i] * g * j * p.weight;
            double[i] += l[i] * dgdn * j * p.weight;
        }
    }
    Ok((single, double))
}

/// The corner constant c = 1 + ∮ ∂G/∂n dS at a mesh node, from the
/// double-layer row sums; 1/2 at smooth surface points.
pub fn corner_constant(
    mesh: &SurfaceMesh,
    node: usize,
    sel: &RuleSelection,
) -> Result<f64, BemError> {
    let x = mesh.node(node);
    let mut acc = 0.0;
    for e in 0..mesh.element_count() {
        let tri = mesh.element(e);
        let (_, double) = panel_integrals(&tri, x, sel)?;
        acc += double.iter().sum::<f64>();
    }
    Ok(1.0 + acc)
}

/// Assembled dense collocation system.
#[derive(Debug, Clone)]
pub struct BoundaryProblem {
    pub mesh: SurfaceMesh,
    pub selection: RuleSelection,
    /// Single-layer matrix B, multiplying the normal-derivative DOFs.
    pub single_layer: DMatrix<f64>,
    /// Double-layer matrix A, multiplying the potential DOFs.
    pub double_layer: DMatrix<f64>,
    /// Corner constants c from the double-layer row sums.
    pub corner_constants: DVector<f64>,
}

/// Assemble the dense single- and double-layer matrices by collocation at
/// every mesh node. Rows are independent and computed in parallel; the
/// result is deterministic.
pub fn assemble(mesh: &SurfaceMesh, sel: &RuleSelection) -> Result<BoundaryProblem, BemError> {
    let n = mesh.node_count();
    let elements: Vec<CurvedTriangle> = (0..mesh.element_count()).map(|e| mesh.element(e)).collect();

    let rows: Vec<Result<(Vec<f64>, Vec<f64>), BemError>> = (0..n)
        .into_par_iter()
        .map(|i| {
            let x = mesh.node(i);
            let mut b_row = vec![0.0; n];
            let mut a_row = vec![0.0; n];
            for (e, tri) in elements.iter().enumerate() {
                let conn = mesh.connectivity(e);
                let (single, double) = panel_integrals(tri, x, sel)?;
                for m in 0..6 {
                    b_row[conn[m]] += single[m];
                    a_row[conn[m]] += double[m];
                }
            }
            Ok((b_row, a_row))
        })
        .collect();

    let mut single_layer = DMatrix::zeros(n, n);
    let mut double_layer = DMatrix::zeros(n, n);
    let mut corner = DVector::zeros(n);
    for (i, row) in rows.into_iter().enumerate() {
        let (b_row, a_row) = row?;
        corner[i] = 1.0 + a_row.iter().sum::<f64>();
        for jcol in 0..n {
            single_layer[(i, jcol)] = b_row[jcol];
            double_layer[(i, jcol)] = a_row[jcol];
        }
    }

    Ok(BoundaryProblem {
        mesh: mesh.clone(),
        selection: sel.clone(),
        single_layer,
        double_layer,
        corner_constants: corner,
    })
}

impl BoundaryProblem {
    /// Interior identity operator C + A; constants lie in its null space on
    /// a closed surface.
    pub fn interior_operator(&self) -> DMatrix<f64> {
        let mut m = self.double_layer.clone();
        for i in 0..m.nrows() {
            m[(i, i)] += self.corner_constants[i];
        }
        m
    }

    /// Exterior boundary operator C + A − I, inverted by the Neumann solve.
    pub fn exterior_operator(&self) -> DMatrix<f64> {
        let mut m = self.double_layer.clone();
        for i in 0..m.nrows() {
            m[(i, i)] += self.corner_constants[i] - 1.0;
        }
        m
    }
}

/// A point potential source of given strength.
#[derive(Debug, Clone, Copy)]
pub struct PointSource {
    pub position: Vector3<f64>,
    pub strength: f64,
}

/// Neumann data and exact nodal potentials of a point source:
/// φ = s/4πR and q = −s(x−src)·n/4πR³ with node normals averaged over the
/// adjacent elements.
pub fn neumann_bc(
    mesh: &SurfaceMesh,
    src: &PointSource,
) -> Result<(DVector<f64>, DVector<f64>), BemError> {
    let n = mesh.node_count();
    let mut q = DVector::zeros(n);
    let mut phi = DVector::zeros(n);
    let scale = mesh
        .nodes()
        .iter()
        .map(|p| (p - src.position).norm())
        .fold(f64::INFINITY, f64::min)
        .max(1e-30);
    for i in 0..n {
        let d = mesh.node(i) - src.position;
        let r = d.norm();
        if r < 1e-12 * scale.max(1.0) {
            return Err(BemError::SourceOnSurface { node: i });
        }
        let normal = node_normal(mesh, i);
        phi[i] = src.strength / (4.0 * std::f64::consts::PI * r);
        q[i] = -src.strength * d.dot(&normal) / (4.0 * std::f64::consts::PI * r * r * r);
    }
    Ok((q, phi))
}

/// Outcome of the dense direct solve.
#[derive(Debug, Clone)]
pub struct Solution {
    pub potential: DVector<f64>,
    /// Relative residual ‖Mφ − Bq‖/‖Bq‖ of the solved system.
    pub residual: f64,
    /// Pivot-ratio proxy for the condition number.
    pub condition_estimate: f64,
}

/// Solve the exterior Neumann problem (C + A − I)φ = Bq by LU.
pub fn solve_neumann(prob: &BoundaryProblem, q: &DVector<f64>) -> Result<Solution, BemError> {
    let n = prob.mesh.node_count();
    if q.len() != n {
        return Err(BemError::DimensionMismatch { got: q.len(), want: n });
    }
    let m = prob.exterior_operator();
    let rhs = &prob.single_layer * q;

    let lu = m.clone().lu();
    let u_diag: Vec<f64> = (0..n).map(|i| lu.u()[(i, i)].abs()).collect();
    let max_pivot = u_diag.iter().cloned().fold(0.0, f64::max);
    let min_pivot = u_diag.iter().cloned().fold(f64::INFINITY, f64::min);
    if min_pivot == 0.0 {
        return Err(BemError::SingularMatrix);
    }
    let estimate = max_pivot / min_pivot;
    if estimate > 1e12 {
        return Err(BemError::IllConditioned { estimate });
    }
    let potential = lu.solve(&rhs).ok_or(BemError::SingularMatrix)?;
    let residual = (&m * &potential - &rhs).norm() / rhs.norm().max(1e-300);
    Ok(Solution {
        potential,
        residual,
        condition_estimate: estimate,
    })
}

/// Root-mean-square difference of two nodal vectors.
pub fn rms_error(a: &DVector<f64>, b: &DVector<f64>) -> f64 {
    assert_eq!(a.len(), b.len(), "rms_error needs equal lengths");
    ((a - b).norm_squared() / a.len() as f64).sqrt()
}

/// Evaluate the exterior representation φ(x) = ∮ φ ∂G/∂n − G q dS at a point
/// off the surface, from solved nodal data.
pub fn evaluate_potential(
    mesh: &SurfaceMesh,
    sel: &RuleSelection,
    phi: &DVector<f64>,
    q: &DVector<f64>,
    x: Vector3<f64>,
) -> Result<f64, BemError> {
    let n = mesh.node_count();
    if phi.len() != n || q.len() != n {
        return Err(BemError::DimensionMismatch {
            got: phi.len().min(q.len()),
            want: n,
        });
    }
    let mut acc = 0.0;
    for e in 0..mesh.element_count() {
        let tri = mesh.element(e);
        let conn = mesh.connectivity(e);
        let (single, double) = panel_integrals(&tri, x, sel)?;
        for m in 0..6 {
            acc += double[m] * phi[conn[m]] - single[m] * q[conn[m]];
        }
    }
    Ok(acc)
}

//! Quadrature rules for curved six-node triangular boundary elements, built
//! by transforming the panel integral to polar coordinates about the
//! projection of the field point, plus a collocation boundary element solver
//! for the Laplace equation used to exercise the rules end to end.
//!
//! The crate is organised around the pipeline used by the solver:
//!
//! * [`element`] — second-order triangle interpolation: shape functions,
//!   edge parameterization, Jacobians, and Newton inversion of the planar
//!   projection map.
//! * [`geometry`] — planar predicates in the element reference frame:
//!   the projection transform, ray–edge intersection, tangents through the
//!   origin, and origin classification.
//! * [`quadrature`] — the two-stage polar rule construction, adaptive rule
//!   sizing, 1-D Gauss rules, and the far-field symmetric triangle rule.
//! * [`mesh`] — second-order surface meshes: GMSH ingestion, a programmatic
//!   sphere mesher, and the flat-facet split used for convergence
//!   comparisons.
//! * [`bem`] — Green's function, panel integrals, corner constants, dense
//!   system assembly, and the Neumann solve.

pub mod bem;
pub mod element;
pub mod geometry;
pub mod mesh;
pub mod quadrature;

#[cfg(test)]
pub(crate) mod testutil;

pub use element::{CurvedTriangle, EdgeParam, ReferenceCoords};
pub use geometry::{build_reference_frame, OriginLocation, ProjectedTriangle};
pub use mesh::SurfaceMesh;
pub use quadrature::{build_rule, fallback_rule, sigma, QuadratureRule, RuleSelection};

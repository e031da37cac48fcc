//! Polynomial bases, quadrature and L2 projections on mesh entities.

mod basis;
mod projection;
mod quadrature;

pub use basis::{dimension, Frame, MonomialBasis};
pub use projection::{gram_matrix, l2_project, l2_project_scalar, PolyCoeffs};
pub use quadrature::{
    cell_rule, edge_rule, face_rule, gauss_jacobi, quad_rule, segment_rule, tetrahedron_rule, triangle_rule, Entity,
    QuadRule, MAX_ORDER,
};

//! The discrete displacement space: DOF numbering with fracture-side
//! multiplicity, local reconstructions and the interpolator.

mod dofmap;
mod interpolate;
mod operators;

pub use dofmap::{BlockKind, DofMap};
pub use interpolate::{interpolate, interpolate_skeleton, jump, mean_jump, Continuous, SidedField};
pub use operators::{
    cell_operators, edge_weights, face_operators, CellOperators, FaceOperators, OperatorOptions, Operators, QUAD_ORDER,
};

use crate::mesh::{classify_fracture_sides, FractureNetwork, PolyMesh};

/// Side classification and DOF numbering in one step.
pub fn build_dofmap(mesh: &PolyMesh, fracture: &FractureNetwork) -> DofMap {
    DofMap::new(mesh, classify_fracture_sides(mesh, fracture), fracture)
}

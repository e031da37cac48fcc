//! Fixtures shared by the benchmarks.

use ddr_core::assembly::{apply_dirichlet, assemble, dirichlet_full, ReducedSystem};
use ddr_core::verification::{case_tresca, Discretization, ManufacturedCase, MeshFamily};

pub fn tresca() -> ManufacturedCase {
    case_tresca().expect("built-in case")
}

/// Tresca geometry on the perturbed hexahedral family with `n` cells per direction.
pub fn hexacut(n: usize) -> Discretization {
    let case = tresca();
    let family = MeshFamily::Hexacut {
        seed: 1,
        magnitude: ddr_core::verification::DEFAULT_HEXACUT_MAGNITUDE,
    };
    let (mesh, fracture) = family.build(n, case.domain, &case.fracture_planes()).expect("mesh");
    Discretization::new(mesh, fracture).expect("operators")
}

pub fn reduced_system(case: &ManufacturedCase, d: &Discretization) -> ReducedSystem {
    let sys = assemble(&d.mesh, &d.dofmap, &d.ops, &case.material, &d.fracture, &case.body_force_field()).expect("assembly");
    let data = dirichlet_full(&d.mesh, &d.dofmap, &case.displacement_field()).expect("boundary data");
    apply_dirichlet(&sys, &data)
}

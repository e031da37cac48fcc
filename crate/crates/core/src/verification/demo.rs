use super::study::{Discretization, MeshFamily};
use crate::assembly::{apply_dirichlet, assemble, dirichlet_on, MaterialParams, ReducedSystem};
use crate::contact::{admissibility_violation, complementarity_violation, newton_solve, ContactSolution, NewtonConfig};
use crate::ddr::Continuous;
use crate::error::Result;
use crate::mesh::{Axis, BoxDomain, FracturePlane, Point3};

/// Fractures `x = 1/2` and `y = 1/2` crossing in the unit cube, immersed
/// in the band `FRACTURE_BAND` of heights (so `n` must be a multiple of 4). The cube is clamped at `z = 0`,
/// displaced at `z = 1` and traction free on its lateral faces.
pub const FRACTURE_BAND: (f64, f64) = (0.25, 0.75);

#[derive(Debug, Clone)]
pub struct CrossDemo {
    pub family: MeshFamily,
    pub n: usize,
    pub material: MaterialParams,
    pub threshold: f64,
    pub top_displacement: Point3,
    pub beta: f64,
}

impl Default for CrossDemo {
    fn default() -> Self {
        Self {
            family: MeshFamily::Cartesian,
            n: 4,
            material: MaterialParams::from_young_poisson(4e9, 0.2).expect("valid material"),
            threshold: 4e6,
            top_displacement: Point3::new(0.0015, -0.0015, -0.002),
            beta: 1e6,
        }
    }
}

#[derive(Debug, Clone)]
pub struct DemoOutcome {
    pub disc: Discretization,
    pub system: ReducedSystem,
    pub solution: ContactSolution,
    pub histogram: [usize; 4],
    pub admissibility: f64,
    pub complementarity: f64,
}

impl CrossDemo {
    pub fn planes(&self) -> Vec<FracturePlane> {
        vec![
            FracturePlane::bounded(Axis::X, 0.5, [(0.0, 1.0), FRACTURE_BAND], self.threshold),
            FracturePlane::bounded(Axis::Y, 0.5, [(0.0, 1.0), FRACTURE_BAND], self.threshold),
        ]
    }

    pub fn run(&self, config: &NewtonConfig) -> Result<DemoOutcome> {
        let domain = BoxDomain::new([0.0; 3], [1.0; 3]);
        let (mesh, fracture) = self.family.build(self.n, domain, &self.planes())?;
        let disc = Discretization::new(mesh, fracture)?;
        let zero = Continuous(|_: &Point3| Point3::zeros());
        let sys = assemble(&disc.mesh, &disc.dofmap, &disc.ops, &self.material, &disc.fracture, &zero)?;
        let top = self.top_displacement;
        let g = Continuous(move |x: &Point3| if x.z > 0.5 { top } else { Point3::zeros() });
        let mesh = &disc.mesh;
        let data = dirichlet_on(mesh, &disc.dofmap, &g, |f| {
            let z = mesh.faces[f].barycenter.z;
            mesh.faces[f].normal.z.abs() > 1.0 - 1e-12 && (z.abs() < 1e-12 || (z - 1.0).abs() < 1e-12)
        })?;
        let system = apply_dirichlet(&sys, &data);
        let config = config.clone().with_beta(self.beta);
        let solution = newton_solve(&system, &config, None)?;
        let scale = self.threshold.max(1.0);
        let admissibility = admissibility_violation(&system, &solution.lambda) / scale;
        let complementarity = complementarity_violation(&system, &solution.u_free, &solution.lambda) / scale;
        Ok(DemoOutcome {
            histogram: solution.state_histogram(),
            disc,
            system,
            solution,
            admissibility,
            complementarity,
        })
    }
}

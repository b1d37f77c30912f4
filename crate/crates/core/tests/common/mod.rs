#![allow(dead_code)]

use std::f64::consts::PI;

use rte_pml::angular::{build_basis, coupling_matrices, AngularBasis, ScatteringKernel, SphereQuadrature};
use rte_pml::assembly::{project_source, BlockOperator};
use rte_pml::mesh::{build_mesh, GeometrySpec, Mesh2D, Shape};
use rte_pml::pml::{extend_coefficients, layer_absorption, Material, Medium, TransportCoefficients};

pub struct Case {
    pub mesh: Mesh2D,
    pub basis: AngularBasis,
    pub coeffs: TransportCoefficients,
    pub op: BlockOperator,
    pub q_plus: Vec<f64>,
    pub q_minus: Vec<f64>,
}

pub fn disk_spec() -> GeometrySpec {
    GeometrySpec::concentric_disks(1.0, 1.2).unwrap()
}

/// Square `[0,1]²` around `[0.25,0.75]²`; 32 triangles at `h = 0.25`.
pub fn small_square() -> (GeometrySpec, Mesh2D) {
    let spec = GeometrySpec::new(Shape::rectangle(0.25, 0.25, 0.75, 0.75), Shape::rectangle(0.0, 0.0, 1.0, 1.0)).unwrap();
    let mesh = build_mesh(&spec, 0.25).unwrap();
    (spec, mesh)
}

pub fn disk_medium() -> Medium<'static> {
    Medium::homogeneous(Material::new(10.1, ScatteringKernel::isotropic(10.0 / (4.0 * PI)).unwrap()), |p| {
        (-5.0 * ((p[0] - 0.75).powi(2) + p[1] * p[1])).exp()
    })
}

pub fn case(mesh: Mesh2D, spec: &GeometrySpec, medium: &Medium, order: usize, a: f64) -> Case {
    let basis = build_basis(order).unwrap();
    let couplings = coupling_matrices(&basis, &SphereQuadrature::for_order(order).unwrap()).unwrap();
    let coeffs = extend_coefficients(&mesh, spec, medium, a).unwrap();
    let op = BlockOperator::assemble(&mesh, &coeffs, &basis, &couplings).unwrap();
    let (q_plus, q_minus) = project_source(&mesh, &basis, coeffs.source());
    Case { mesh, basis, coeffs, op, q_plus, q_minus }
}

pub fn disk_case(h: f64, order: usize, target: f64) -> Case {
    let spec = disk_spec();
    let a = layer_absorption(target, spec.layer_thickness()).unwrap();
    case(build_mesh(&spec, h).unwrap(), &spec, &disk_medium(), order, a)
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn random_vec(rng: &mut impl rand::Rng, n: usize) -> Vec<f64> {
    (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect()
}

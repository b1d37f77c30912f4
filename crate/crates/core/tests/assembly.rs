mod common;

use std::f64::consts::PI;

use common::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rte_pml::angular::ScatteringKernel;
use rte_pml::assembly::*;
use rte_pml::mesh::Region;
use rte_pml::pml::{Material, Medium};

#[test]
fn blocks_are_symmetric_and_definite() {
    let (spec, mesh) = small_square();
    let c = case(mesh, &spec, &disk_medium(), 3, 2.0);
    let (m, r, _, cdiag) = c.op.explicit_blocks();
    assert!(m.is_symmetric(0.0));
    assert!(r.is_symmetric(0.0));
    assert!(cdiag.iter().all(|&v| v > 0.0));
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut y = vec![0.0; m.rows()];
    for _ in 0..100 {
        let x = random_vec(&mut rng, m.rows());
        m.mul_vec(&x, &mut y);
        assert!(dot(&x, &y) > 0.0);
        r.mul_vec(&x, &mut y);
        assert!(dot(&x, &y) >= -1e-14);
        let z = random_vec(&mut rng, cdiag.len());
        assert!(z.iter().zip(&cdiag).map(|(a, c)| a * a * c).sum::<f64>() > 0.0);
    }
}

#[test]
fn kronecker_transport_matches_explicit_assembly() {
    let spec = disk_spec();
    let mesh = rte_pml::mesh::build_mesh(&spec, 1.0).unwrap();
    assert!(mesh.n_triangles() <= 50);
    let c = case(mesh, &spec, &disk_medium(), 3, 2.0);
    let (_, _, b, _) = c.op.explicit_blocks();
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let x = random_vec(&mut rng, c.op.even_len());
    let (mut y1, mut y2) = (vec![0.0; c.op.odd_len()], vec![0.0; c.op.odd_len()]);
    c.op.apply_b(&x, &mut y1);
    b.mul_vec(&x, &mut y2);
    for (a, e) in y1.iter().zip(&y2) {
        assert!((a - e).abs() < 1e-12);
    }
    let y = random_vec(&mut rng, c.op.odd_len());
    let (mut x1, mut x2) = (vec![0.0; c.op.even_len()], vec![0.0; c.op.even_len()]);
    c.op.apply_bt(&y, &mut x1);
    b.transpose().mul_vec(&y, &mut x2);
    for (a, e) in x1.iter().zip(&x2) {
        assert!((a - e).abs() < 1e-12);
    }
}

#[test]
fn transport_adjointness_and_constants() {
    let c = disk_case(0.16, 5, 0.25);
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for _ in 0..5 {
        let x = random_vec(&mut rng, c.op.even_len());
        let y = random_vec(&mut rng, c.op.odd_len());
        let (mut bx, mut bty) = (vec![0.0; y.len()], vec![0.0; x.len()]);
        c.op.apply_b(&x, &mut bx);
        c.op.apply_bt(&y, &mut bty);
        let (l, r) = (dot(&bx, &y), dot(&x, &bty));
        assert!((l - r).abs() <= 1e-12 * l.abs().max(1.0), "{l} vs {r}");
    }
    let np = c.basis.n_plus();
    let mut x = vec![0.0; c.op.even_len()];
    for v in 0..c.op.n_vertices() {
        for k in 0..np {
            x[v * np + k] = (k + 1) as f64;
        }
    }
    let mut bx = vec![0.0; c.op.odd_len()];
    c.op.apply_b(&x, &mut bx);
    assert!(bx.iter().all(|v| v.abs() < 1e-12));
}

#[test]
fn mass_of_constants_integrates_the_collision_weight() {
    let c = disk_case(0.16, 5, 0.25);
    let np = c.basis.n_plus();
    for (l, block, range) in &c.op.mass.blocks {
        let ones = vec![1.0; c.op.n_vertices()];
        let mut y = vec![0.0; ones.len()];
        block.mul_vec(&ones, &mut y);
        let expected: f64 = (0..c.mesh.n_triangles()).map(|t| c.mesh.area(t) * c.coeffs.collision(t, *l)).sum();
        assert!((y.iter().sum::<f64>() - expected).abs() < 1e-10 * expected);
        assert!(range.end <= np);
    }
    let interior = (0..c.mesh.n_triangles()).find(|&t| c.mesh.tags()[t] == Region::Interior).unwrap();
    assert!((c.coeffs.collision(interior, 0) - 0.1).abs() < 1e-12);
    assert!((c.coeffs.collision(interior, 2) - 10.1).abs() < 1e-12);
}

#[test]
fn boundary_mass_measures_the_perimeter() {
    let c = disk_case(0.08, 3, 0.25);
    let ones = vec![1.0; c.op.n_vertices()];
    let mut y = vec![0.0; ones.len()];
    c.op.boundary.mul_vec(&ones, &mut y);
    let perimeter: f64 = c.mesh.boundary_edges().iter().map(|e| e.length).sum();
    assert!((y.iter().sum::<f64>() - perimeter).abs() < 1e-12);
    assert!((perimeter - 2.0 * PI * 1.2).abs() < 0.01);

    let on_boundary: std::collections::HashSet<usize> = c.mesh.boundary_edges().iter().flat_map(|e| e.vertices).collect();
    let x: Vec<f64> = (0..c.op.n_vertices()).map(|v| if on_boundary.contains(&v) { 0.0 } else { 1.0 }).collect();
    c.op.boundary.mul_vec(&x, &mut y);
    assert!(y.iter().all(|&v| v == 0.0));
    for v in 0..c.op.n_vertices() {
        if !on_boundary.contains(&v) {
            assert_eq!(c.op.boundary.row(v).0.len(), 0);
        }
    }

    // the replicated block acts identically on every mode
    let np = c.basis.n_plus();
    let mut xe = vec![0.0; c.op.even_len()];
    for v in 0..c.op.n_vertices() {
        xe[v * np] = v as f64;
        xe[v * np + np - 1] = v as f64;
    }
    let mut ye = vec![0.0; xe.len()];
    c.op.apply_boundary(&xe, &mut ye);
    for v in 0..c.op.n_vertices() {
        assert_eq!(ye[v * np].to_bits(), ye[v * np + np - 1].to_bits());
    }
}

#[test]
fn odd_diagonal_examples() {
    let c = disk_case(0.16, 5, 0.5);
    let nm = c.basis.n_minus();
    for t in 0..c.mesh.n_triangles() {
        let per_area = c.op.odd_diag[t * nm] / c.mesh.area(t);
        let expected = if c.mesh.tags()[t] == Region::Interior { 10.1 } else { 3.4657 };
        assert!((per_area - expected).abs() < 1e-4, "{per_area}");
    }
    assert_eq!(c.op.odd_diag.len(), c.mesh.n_triangles() * nm);
}

#[test]
fn sparsity_matches_the_stencil() {
    let c = disk_case(0.08, 5, 0.25);
    let (m, r, b, _) = c.op.explicit_blocks();
    let star = c.mesh.vertex_star();
    let max_degree = (0..c.mesh.n_vertices()).map(|v| star.triangles(v).len()).max().unwrap();
    assert!(m.nnz() <= c.op.even_len() * (max_degree + 1));
    assert!(b.nnz() <= c.mesh.n_triangles() * 3 * 4 * c.basis.n_minus());
    let boundary_rows = (0..r.rows()).filter(|&i| !r.row(i).0.is_empty()).count();
    let on_boundary: std::collections::HashSet<usize> = c.mesh.boundary_edges().iter().flat_map(|e| e.vertices).collect();
    assert_eq!(boundary_rows, on_boundary.len() * c.basis.n_plus());
}

#[test]
fn source_projection() {
    let (spec, mesh) = small_square();
    let medium = Medium::homogeneous(Material::new(1.0, ScatteringKernel::zero()), |_| 1.0);
    let c = case(mesh, &spec, &medium, 3, 1.0);
    // the layer carries no source, so the load integrates q over the interior
    let np = c.basis.n_plus();
    let total: f64 = c.q_plus.chunks(np).map(|v| v[0]).sum();
    assert!((total - (4.0 * PI).sqrt() * 0.25).abs() < 1e-12);
    assert!(c.q_plus.chunks(np).all(|v| v[1..].iter().all(|&x| x == 0.0)));
    assert!(c.q_minus.iter().all(|&x| x == 0.0));

    let zero = vec![0.0; c.mesh.n_triangles()];
    let (qp, qm) = project_source(&c.mesh, &c.basis, &zero);
    assert!(qp.iter().chain(&qm).all(|&x| x == 0.0));

    let e1 = disk_case(0.16, 3, 0.25);
    assert!(e1.q_minus.iter().all(|&x| x == 0.0));
    assert!(e1.q_plus.iter().any(|&x| x > 0.0));
}

#[test]
fn field_embedding_keeps_modes() {
    let coarse = rte_pml::angular::build_basis(3).unwrap();
    let fine = rte_pml::angular::build_basis(5).unwrap();
    let mut f = Field::zeros(2, 1, &coarse);
    f.even[coarse.n_plus() + 4] = 2.0;
    f.odd[coarse.odd_position(3, -1).unwrap()] = 5.0;
    let g = f.embed(&coarse, &fine).unwrap();
    let m = coarse.even_modes()[4];
    assert_eq!(g.even[fine.n_plus() + fine.even_position(m.l, m.m).unwrap()], 2.0);
    assert_eq!(g.odd[fine.odd_position(3, -1).unwrap()], 5.0);
    assert_eq!(g.even.iter().sum::<f64>(), 2.0);
    assert!(g.embed(&fine, &coarse).is_err());
    assert_eq!(f.angular_mean(), vec![0.0, 0.0]);
}

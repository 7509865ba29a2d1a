mod common;

use common::*;
use nhlab::eigensolver::{eigenpairs, eigenvalues};
use nhlab::{model, CMatrix, ModelSpec};
use rand_core::SeedableRng;
use rand_xoshiro::SplitMix64;

fn to_matrix(rows: &Rows) -> CMatrix {
    CMatrix::from_rows(rows).unwrap()
}

#[test]
fn random_matrices_match_characteristic_polynomial_roots() {
    let mut rng = SplitMix64::seed_from_u64(20240611);
    let mut worst: f64 = 0.0;
    for trial in 0..60 {
        let n = 1 + trial % 12;
        let rows = random_rows(&mut rng, n);
        let ours = eigenvalues(&to_matrix(&rows)).unwrap().values;
        let oracle = eigenvalues_oracle(&rows);
        let d = hausdorff(&ours, &oracle);
        worst = worst.max(d);
        assert!(d <= 1e-8, "trial {trial}, n = {n}: distance {d:e}");
    }
    println!("worst oracle distance {worst:e}");
}

#[test]
fn oracle_recovers_known_eigenvalues() {
    // Upper triangular: the diagonal is the spectrum.
    let mut rng = SplitMix64::seed_from_u64(3);
    let n = 7;
    let mut rows = random_rows(&mut rng, n);
    for i in 0..n {
        for j in 0..i {
            rows[i][j] = c(0.0, 0.0);
        }
    }
    let diag: Vec<_> = (0..n).map(|i| rows[i][i]).collect();
    assert!(hausdorff(&eigenvalues_oracle(&rows), &diag) < 1e-12);
}

#[test]
fn similarity_invariance() {
    let mut rng = SplitMix64::seed_from_u64(99);
    for n in [2, 5, 9, 16] {
        let a = random_rows(&mut rng, n);
        // Well conditioned: identity plus a small perturbation.
        let mut p = random_rows(&mut rng, n);
        for (i, row) in p.iter_mut().enumerate() {
            row.iter_mut().for_each(|x| *x *= 0.2);
            row[i] += c(1.0, 0.0);
        }
        let b = matmul(&matmul(&inverse(&p), &a), &p);
        let ea = eigenvalues(&to_matrix(&a)).unwrap().values;
        let eb = eigenvalues(&to_matrix(&b)).unwrap().values;
        assert!(hausdorff(&ea, &eb) <= 1e-8, "n = {n}");
    }
}

#[test]
fn trace_and_determinant_identities() {
    let mut rng = SplitMix64::seed_from_u64(5);
    for n in 1..=16 {
        let rows = random_rows(&mut rng, n);
        let m = to_matrix(&rows);
        let vals = eigenvalues(&m).unwrap().values;
        let sum: num_complex::Complex64 = vals.iter().sum();
        let prod: num_complex::Complex64 = vals.iter().product();
        assert!((sum - trace(&rows)).norm() <= 1e-8 * n as f64 * m.frobenius_norm(), "trace, n = {n}");
        let d = det(&rows);
        assert!((prod - d).norm() <= 1e-6 * d.norm(), "det, n = {n}");
    }
}

#[test]
fn residual_contract_on_lattice_models() {
    for spec in [
        ModelSpec::exp(2.0, 10).unwrap(),
        ModelSpec::exp(3.0, 10).unwrap().with_boundary(nhlab::Boundary::Open).with_len(50),
        ModelSpec::tan(0.5, 10).unwrap(),
        ModelSpec::hatano_nelson(40, 0.4, 1).unwrap(),
    ] {
        let s = eigenpairs(&model::build(&spec).unwrap().densify()).unwrap();
        let res = s.residuals.as_ref().unwrap();
        for (i, r) in res.iter().enumerate() {
            assert!(*r <= 1e-8 || s.defective.contains(&i), "{:?} pair {i}: {r:e}", spec.kind);
        }
        for v in s.vectors.as_ref().unwrap() {
            assert!((nhlab::linalg::norm2(v) - 1.0).abs() <= 1e-12);
        }
    }
}

#[test]
fn densified_models_match_entrywise_construction() {
    for (v, m, periodic) in [(0.5, 7, true), (3.0, 6, false)] {
        let mut spec = ModelSpec::exp(v, m).unwrap();
        if !periodic {
            spec = spec.with_boundary(nhlab::Boundary::Open);
        }
        let ours = model::build(&spec).unwrap().densify();
        let rows = exp_ring_rows(v, spec.p, spec.q, spec.theta, periodic, spec.len);
        for (i, row) in rows.iter().enumerate() {
            for (j, x) in row.iter().enumerate() {
                assert!((ours[(i, j)] - x).norm() < 1e-13, "({i}, {j})");
            }
        }
    }
}

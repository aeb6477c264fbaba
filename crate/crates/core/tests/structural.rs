//! Structural laws of the fiber matrices: factorization, rank of the
//! gradient factor, cycle-space kernel, and invariance of the spectrum
//! under re-indexing.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};
use std::f64::consts::PI;

use perigraph::fixtures;
use perigraph::floquet::{
    fiber_matrix, gradient_matrix, unitary_equivalence_residual, Flavor, Quasimomentum,
};
use perigraph::graph::FundamentalGraph;
use perigraph::linalg::max_sorted_deviation;

fn random_theta(rng: &mut StdRng, d: usize) -> Quasimomentum {
    Quasimomentum::new((0..d).map(|_| rng.gen_range(-PI..PI)).collect())
}

fn random_shifts(rng: &mut StdRng, g: &FundamentalGraph) -> Vec<Vec<i64>> {
    (0..g.vertex_count())
        .map(|_| {
            (0..g.dimension())
                .map(|_| rng.gen_range(-5i64..=5))
                .collect()
        })
        .collect()
}

#[test]
fn factorization_residual_at_random_points() {
    let mut rng = StdRng::seed_from_u64(11);
    for (name, g) in fixtures::standard_set() {
        for flavor in [Flavor::Normalized, Flavor::Combinatorial] {
            for _ in 0..100 {
                let theta = random_theta(&mut rng, g.dimension());
                let fiber = fiber_matrix(&g, &theta, flavor).unwrap();
                let grad = gradient_matrix(&g, &theta, flavor).unwrap();
                let residual = (grad.matrix().adjoint() * grad.matrix() - fiber.matrix()).norm();
                assert!(residual <= 1e-12, "{name} {flavor}: residual {residual}");
            }
        }
    }
}

#[test]
fn factorization_holds_for_arbitrary_indexings() {
    // The factorization does not rely on tree edges carrying zero
    // indices; any valid re-indexing satisfies it too.
    let mut rng = StdRng::seed_from_u64(13);
    for (name, g) in fixtures::standard_set() {
        let shifted = g.normalize_indices(&random_shifts(&mut rng, &g));
        for _ in 0..20 {
            let theta = random_theta(&mut rng, g.dimension());
            let fiber = fiber_matrix(&shifted, &theta, Flavor::Normalized).unwrap();
            let grad = gradient_matrix(&shifted, &theta, Flavor::Normalized).unwrap();
            let residual = (grad.matrix().adjoint() * grad.matrix() - fiber.matrix()).norm();
            assert!(residual <= 1e-12, "{name} re-indexed: residual {residual}");
        }
    }
}

#[test]
fn hermiticity_at_random_points() {
    let mut rng = StdRng::seed_from_u64(17);
    for (name, g) in fixtures::standard_set() {
        for _ in 0..50 {
            let theta = random_theta(&mut rng, g.dimension());
            let fiber = fiber_matrix(&g, &theta, Flavor::Normalized).unwrap();
            let deviation = (fiber.matrix() - fiber.matrix().adjoint()).norm();
            assert!(deviation <= 1e-12, "{name}: {deviation}");
        }
    }
}

#[test]
fn gradient_rank_law() {
    let mut rng = StdRng::seed_from_u64(19);
    for (name, g) in fixtures::standard_set() {
        let nu = g.vertex_count();
        let at_zero =
            gradient_matrix(&g, &Quasimomentum::zero(g.dimension()), Flavor::Normalized).unwrap();
        assert_eq!(at_zero.rank(), nu - 1, "{name} at zero");
        for _ in 0..100 {
            let theta = random_theta(&mut rng, g.dimension());
            if theta.is_zero() {
                continue;
            }
            let grad = gradient_matrix(&g, &theta, Flavor::Normalized).unwrap();
            assert_eq!(grad.rank(), nu, "{name} at {:?}", theta.components());
        }
    }
}

#[test]
fn cycle_kernel_dimension_and_annihilation() {
    for (name, g) in fixtures::standard_set() {
        let basis = g.cycle_kernel_basis();
        let expected = g.edge_count() - g.vertex_count() + 1;
        assert_eq!(basis.len(), expected, "{name}: kernel dimension");
        let grad =
            gradient_matrix(&g, &Quasimomentum::zero(g.dimension()), Flavor::Normalized).unwrap();
        for cycle in &basis {
            let xi = DVector::from_fn(g.edge_count(), |e, _| Complex64::new(cycle[e], 0.0));
            let norm = (grad.matrix().adjoint() * xi).norm();
            assert!(norm <= 1e-12, "{name}: annihilation residual {norm}");
        }
        // Linear independence.
        let stacked = DMatrix::from_fn(basis.len(), g.edge_count(), |i, j| basis[i][j]);
        assert_eq!(stacked.svd(false, false).rank(1e-9), expected, "{name}");
    }
}

#[test]
fn eigenvalues_invariant_under_random_reindexing() {
    let mut rng = StdRng::seed_from_u64(23);
    for (name, g) in fixtures::standard_set() {
        let shifted = g.normalize_indices(&random_shifts(&mut rng, &g));
        let mut worst = 0.0f64;
        for _ in 0..100 {
            let theta = random_theta(&mut rng, g.dimension());
            let a = fiber_matrix(&g, &theta, Flavor::Normalized)
                .unwrap()
                .eigenvalues();
            let b = fiber_matrix(&shifted, &theta, Flavor::Normalized)
                .unwrap()
                .eigenvalues();
            worst = worst.max(max_sorted_deviation(&a, &b));
        }
        assert!(worst <= 1e-12, "{name}: deviation {worst}");
    }
}

#[test]
fn conjugation_residual_under_reindexing() {
    let mut rng = StdRng::seed_from_u64(29);
    for (name, g) in fixtures::standard_set() {
        let shifts = random_shifts(&mut rng, &g);
        for _ in 0..100 {
            let theta = random_theta(&mut rng, g.dimension());
            let residual =
                unitary_equivalence_residual(&g, &shifts, &theta, Flavor::Normalized).unwrap();
            assert!(residual <= 1e-12, "{name}: residual {residual}");
        }
    }
}

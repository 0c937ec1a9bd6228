//! Additivity, continuity, and data processing for the monotones.

use asymcat::testkit::{random_density_matrix, random_hamiltonian, rng};
use asymcat::{
    qfi, qfi_continuity_bound, random_covariant_channel, relative_entropy, renyi_free_energy,
    tensor_state, trace_norm, validate_state, Hamiltonian,
};
use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::Rng;

#[test]
fn qfi_is_additive_on_products() {
    let mut r = rng(300);
    for _ in 0..60 {
        let d_h1 = r.random_range(2..=3usize);
        let h1 = random_hamiltonian(&mut r, d_h1, 3, 2);
        let d_h2 = r.random_range(2..=3usize);
        let h2 = random_hamiltonian(&mut r, d_h2, 3, 2);
        let a = random_density_matrix(&mut r, &h1);
        let b = random_density_matrix(&mut r, &h2);
        let joint = tensor_state(&a, &b);
        let gap = (qfi(&joint) - qfi(&a) - qfi(&b)).abs();
        assert!(gap < 1e-7, "additivity violated by {gap}");
    }
}

#[test]
fn qfi_obeys_the_continuity_bound() {
    let mut r = rng(301);
    for _ in 0..60 {
        let d_h = r.random_range(2..=4usize);
        let h = random_hamiltonian(&mut r, d_h, 3, 2);
        let a = random_density_matrix(&mut r, &h);
        let b = random_density_matrix(&mut r, &h);
        let eps = trace_norm(&(a.entries() - b.entries()));
        let bound = qfi_continuity_bound(a.hamiltonian(), eps);
        let diff = (qfi(&a) - qfi(&b)).abs();
        assert!(
            diff <= bound + 1e-7,
            "continuity violated: diff {diff}, bound {bound}"
        );
    }
}

#[test]
fn qfi_vanishes_exactly_on_commuting_states() {
    let mut r = rng(302);
    let h = Hamiltonian::from_integers(&[0, 1, 3]);
    for _ in 0..30 {
        let mut m = DMatrix::<Complex64>::zeros(3, 3);
        let mut weights: Vec<f64> = (0..3).map(|_| r.random_range(0.1..1.0)).collect();
        let total: f64 = weights.iter().sum();
        for w in &mut weights {
            *w /= total;
        }
        for (k, w) in weights.iter().enumerate() {
            m[(k, k)] = Complex64::new(*w, 0.0);
        }
        let diag = validate_state(&m, &h, 1e-9).unwrap();
        assert!(qfi(&diag) < 1e-9);

        // A small coherence between distinct levels makes it strictly
        // positive.
        let mut pert = m.clone();
        pert[(0, 1)] = Complex64::new(1e-3, 0.0);
        pert[(1, 0)] = Complex64::new(1e-3, 0.0);
        let coherent = validate_state(&pert, &h, 1e-9).unwrap();
        assert!(qfi(&coherent) > 1e-8);
    }
}

#[test]
fn relative_entropy_contracts_under_channels() {
    let mut r = rng(303);
    for seed in 0..40u64 {
        let d_h = r.random_range(2..=3usize);
        let h = random_hamiltonian(&mut r, d_h, 2, 1);
        let ch = random_covariant_channel(&h, seed + 9000).unwrap();
        let a = random_density_matrix(&mut r, &h);
        let b = random_density_matrix(&mut r, &h);
        let before = relative_entropy(&a, &b).unwrap();
        let after = relative_entropy(&ch.apply(&a).unwrap(), &ch.apply(&b).unwrap()).unwrap();
        assert!(
            after <= before + 1e-7,
            "data processing violated: {before} -> {after}"
        );
    }
}

#[test]
fn relative_entropy_is_nonnegative_and_faithful() {
    let mut r = rng(304);
    for _ in 0..40 {
        let h = random_hamiltonian(&mut r, 3, 2, 1);
        let a = random_density_matrix(&mut r, &h);
        let b = random_density_matrix(&mut r, &h);
        assert!(relative_entropy(&a, &b).unwrap() >= -1e-12);
        assert!(relative_entropy(&a, &a).unwrap().abs() < 1e-9);
    }
}

#[test]
fn renyi_family_is_additive_on_products() {
    let mut r = rng(305);
    let alphas = [
        -2.0,
        -0.5,
        0.0,
        0.5,
        1.0,
        2.0,
        3.0,
        f64::INFINITY,
        f64::NEG_INFINITY,
    ];
    for _ in 0..20 {
        let h1 = Hamiltonian::from_integers(&[0, 1]);
        let h2 = Hamiltonian::from_integers(&[0, 2]);
        let p1 = random_diag(&mut r, &h1);
        let p2 = random_diag(&mut r, &h2);
        let g1 = random_diag(&mut r, &h1);
        let g2 = random_diag(&mut r, &h2);
        let pj = tensor_state(&p1, &p2);
        let gj = tensor_state(&g1, &g2);
        for &alpha in &alphas {
            let joint = renyi_free_energy(&pj, &gj, alpha).unwrap();
            let split = renyi_free_energy(&p1, &g1, alpha).unwrap()
                + renyi_free_energy(&p2, &g2, alpha).unwrap();
            assert!(
                (joint - split).abs() < 1e-8,
                "alpha {alpha}: joint {joint} vs split {split}"
            );
        }
    }
}

fn random_diag(r: &mut rand_chacha::ChaCha8Rng, h: &Hamiltonian) -> asymcat::DensityMatrix {
    let d = h.dimension();
    let mut weights: Vec<f64> = (0..d).map(|_| r.random_range(0.1..1.0)).collect();
    let total: f64 = weights.iter().sum();
    for w in &mut weights {
        *w /= total;
    }
    let mut m = DMatrix::<Complex64>::zeros(d, d);
    for (k, w) in weights.iter().enumerate() {
        m[(k, k)] = Complex64::new(*w, 0.0);
    }
    validate_state(&m, h, 1e-9).unwrap()
}

//! Structural properties of covariant channels, thermal operations,
//! and the feasibility oracle on images of covariant channels.

use asymcat::coherence::available_coherences;
use asymcat::testkit::{
    kraus_to_choi, random_density_matrix, random_energy_preserving_unitary, random_hamiltonian,
    rng,
};
use asymcat::{
    covariant_convertible, is_covariant, is_gibbs_preserving, qfi, random_covariant_channel,
    tensor_channels, thermal_operation, time_evolve, trace_norm, Channel, FeasibilityStatus,
    Hamiltonian,
};
use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::Rng;

type CMatrix = DMatrix<Complex64>;

#[test]
fn covariant_channels_never_increase_qfi() {
    let mut r = rng(100);
    for seed in 0..60u64 {
        let dim = r.random_range(2..=4usize);
        let h = random_hamiltonian(&mut r, dim, 3, 2);
        let ch = random_covariant_channel(&h, seed).unwrap();
        let rho = random_density_matrix(&mut r, &h);
        let out = ch.apply(&rho).unwrap();
        assert!(
            qfi(&out) <= qfi(&rho) + 1e-7,
            "qfi grew: {} -> {}",
            qfi(&rho),
            qfi(&out)
        );
    }
}

#[test]
fn covariant_channels_never_enlarge_mode_support() {
    let mut r = rng(101);
    for seed in 200..230u64 {
        let h = random_hamiltonian(&mut r, 3, 3, 1);
        let ch = random_covariant_channel(&h, seed).unwrap();
        // A state with an exactly absent mode: coherence only between
        // levels 0 and 1.
        let rho = asymcat::plus_state(0, 1, &h).unwrap();
        let out = ch.apply(&rho).unwrap();
        let modes_in = available_coherences(&rho, 1e-9);
        let modes_out = available_coherences(&out, 1e-9);
        assert!(
            modes_out.is_subset_of(&modes_in),
            "modes grew: {modes_in} -> {modes_out}"
        );
    }
}

#[test]
fn covariance_check_agrees_with_sampled_time_translation() {
    let mut r = rng(102);
    let h = random_hamiltonian(&mut r, 3, 2, 2);
    let ch = random_covariant_channel(&h, 9).unwrap();
    assert!(is_covariant(&ch, 1e-9));
    let rho = random_density_matrix(&mut r, &h);
    for k in 0..100 {
        let t = (k as f64) * 0.177 - 8.0;
        let lhs = time_evolve(&ch.apply(&rho).unwrap(), t);
        let rhs = ch.apply(&time_evolve(&rho, t)).unwrap();
        assert!(trace_norm(&(lhs.entries() - rhs.entries())) < 1e-7);
    }
}

#[test]
fn thermal_operations_are_covariant_and_gibbs_preserving() {
    let mut r = rng(103);
    let betas = [0.0, 0.37, 1.0, 2.5, f64::INFINITY];
    for i in 0..30usize {
        let ds = r.random_range(2..=3usize);
        let da = r.random_range(2..=3usize);
        let h_sys = random_hamiltonian(&mut r, ds, 2, 1);
        let h_anc = random_hamiltonian(&mut r, da, 2, 1);
        let joint = asymcat::tensor_hamiltonian(&h_sys, &h_anc);
        let u = random_energy_preserving_unitary(&mut r, &joint);
        let beta = betas[i % betas.len()];
        let ch = thermal_operation(&h_sys, &h_anc, beta, &u).unwrap();
        assert!(is_covariant(&ch, 1e-9), "instance {i} not covariant");
        assert!(
            is_gibbs_preserving(&ch, beta, 1e-9).unwrap(),
            "instance {i} not Gibbs preserving"
        );
    }
}

#[test]
fn choi_convention_round_trips_through_kraus_form() {
    let mut r = rng(104);
    let d = 3usize;
    let h = Hamiltonian::from_integers(&[0, 1, 2]);
    // Random isometry V: C^d -> C^d ⊗ C^k gives Kraus blocks.
    let k = 2usize;
    let g = CMatrix::from_fn(d * k, d, |_, _| {
        Complex64::new(r.random_range(-1.0..1.0), r.random_range(-1.0..1.0))
    });
    let qr = g.qr();
    let v = qr.q();
    let kraus: Vec<CMatrix> = (0..k)
        .map(|b| CMatrix::from_fn(d, d, |row, col| v[(b * d + row, col)]))
        .collect();
    let choi = kraus_to_choi(&kraus, d, d);
    let ch = Channel::new(choi, h.clone(), h.clone()).unwrap();
    for _ in 0..5 {
        let rho = random_density_matrix(&mut r, &h);
        let direct: CMatrix = kraus
            .iter()
            .map(|op| op * rho.entries() * op.adjoint())
            .sum();
        let via = ch.apply(&rho).unwrap();
        assert!(trace_norm(&(via.entries() - &direct)) < 1e-10);
    }
}

#[test]
fn unitary_channel_matches_its_kraus_choi() {
    let mut r = rng(105);
    let h = Hamiltonian::from_integers(&[0, 1, 1]);
    let u = random_energy_preserving_unitary(&mut r, &h);
    let via_unitary = Channel::from_unitary(&u, &h, &h).unwrap();
    let via_kraus = Channel::new(kraus_to_choi(&[u.clone()], 3, 3), h.clone(), h.clone()).unwrap();
    assert!(trace_norm(&(via_unitary.choi() - via_kraus.choi())) < 1e-12);
    assert!(is_covariant(&via_unitary, 1e-9));
}

#[test]
fn tensor_of_channels_acts_factor_wise() {
    let mut r = rng(106);
    let h = Hamiltonian::from_integers(&[0, 1]);
    let a = Channel::dephasing(&h);
    let b = Channel::identity(&h);
    let prod = tensor_channels(&a, &b).unwrap();
    let rho = random_density_matrix(&mut r, &h);
    let tau = random_density_matrix(&mut r, &h);
    let joint = asymcat::tensor_state(&rho, &tau);
    let out = prod.apply(&joint).unwrap();
    let expected = asymcat::tensor_state(&a.apply(&rho).unwrap(), &b.apply(&tau).unwrap());
    assert!(trace_norm(&(out.entries() - expected.entries())) < 1e-10);
}

#[test]
fn images_of_covariant_channels_are_feasible_targets() {
    let mut r = rng(107);
    for seed in 500..510u64 {
        let dim = r.random_range(2..=3usize);
        let h = random_hamiltonian(&mut r, dim, 2, 1);
        let ch = random_covariant_channel(&h, seed).unwrap();
        let rho = random_density_matrix(&mut r, &h);
        let sigma = ch.apply(&rho).unwrap();
        let verdict = covariant_convertible(&rho, &sigma, 1e-7, 20_000);
        assert_eq!(
            verdict.status(),
            FeasibilityStatus::Feasible,
            "seed {seed}: {:?} residual {}",
            verdict.status(),
            verdict.residual()
        );
        assert!(verdict.residual() < 1e-7);
        if let Some(w) = verdict.witness() {
            let moved = w.apply(&rho).unwrap();
            assert!(trace_norm(&(moved.entries() - sigma.entries())) < 1e-6);
        }
    }
}

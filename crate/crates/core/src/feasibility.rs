//! Single-shot covariant convertibility as a convex feasibility problem.
//!
//! Question: does a covariant channel Λ with Λ(ρ) = σ exist? Monotone
//! pre-checks give sound infeasibility certificates (coherence modes
//! cannot be created; quantum Fisher information cannot increase).
//! Otherwise the Choi operator is searched by Dykstra-corrected
//! alternating projections between the PSD cone and the affine set
//! encoding trace preservation and Λ(ρ) = σ, with covariance built
//! into the parametrization: only entries inside the exact mode blocks
//! are free, everything else is pinned to zero.

use nalgebra::{DMatrix, DVector};

use crate::channels::{mode_blocks, psd_project_blocks, Channel};
use crate::coherence::{available_coherences, DEFAULT_COHERENCE_TOL};
use crate::linalg::{cplx, CMatrix};
use crate::monotones::qfi;
use crate::state::DensityMatrix;

/// Default convergence tolerance of the feasibility solver.
pub const DEFAULT_FEASIBILITY_TOL: f64 = 1e-7;
/// Default iteration budget of the feasibility solver.
pub const DEFAULT_FEASIBILITY_MAX_ITER: usize = 20_000;

/// Reason attached to a feasibility outcome.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Certificate {
    /// The target has coherence at an energy difference absent from
    /// the input; no covariant channel can create it.
    ModeSupport,
    /// The target's quantum Fisher information exceeds the input's;
    /// covariant channels cannot increase it.
    QfiDecrease,
    /// The solver found a Choi operator meeting all constraints
    /// within tolerance.
    SolverResidual,
}

impl Certificate {
    pub fn as_str(&self) -> &'static str {
        match self {
            Certificate::ModeSupport => "mode-support",
            Certificate::QfiDecrease => "qfi-decrease",
            Certificate::SolverResidual => "solver-residual",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FeasibilityStatus {
    Feasible,
    Infeasible,
    Undetermined,
}

impl FeasibilityStatus {
    pub fn as_str(&self) -> &'static str {
        match self {
            FeasibilityStatus::Feasible => "feasible",
            FeasibilityStatus::Infeasible => "infeasible",
            FeasibilityStatus::Undetermined => "undetermined",
        }
    }
}

/// Outcome of a convertibility query. Infeasible verdicts always carry
/// a certificate; feasible verdicts carry a residual below the
/// tolerance they were run at, and a witness channel when it passes
/// full channel validation.
#[derive(Debug, Clone)]
pub struct FeasibilityVerdict {
    status: FeasibilityStatus,
    certificate: Option<Certificate>,
    residual: f64,
    iterations: usize,
    tol: f64,
    witness: Option<Channel>,
}

impl FeasibilityVerdict {
    fn feasible(residual: f64, iterations: usize, tol: f64, witness: Option<Channel>) -> Self {
        debug_assert!(residual < tol);
        Self {
            status: FeasibilityStatus::Feasible,
            certificate: Some(Certificate::SolverResidual),
            residual,
            iterations,
            tol,
            witness,
        }
    }

    fn infeasible(certificate: Certificate, tol: f64) -> Self {
        debug_assert!(!matches!(certificate, Certificate::SolverResidual));
        Self {
            status: FeasibilityStatus::Infeasible,
            certificate: Some(certificate),
            residual: 0.0,
            iterations: 0,
            tol,
            witness: None,
        }
    }

    fn undetermined(residual: f64, iterations: usize, tol: f64) -> Self {
        Self {
            status: FeasibilityStatus::Undetermined,
            certificate: None,
            residual,
            iterations,
            tol,
            witness: None,
        }
    }

    pub fn status(&self) -> FeasibilityStatus {
        self.status
    }

    pub fn certificate(&self) -> Option<Certificate> {
        self.certificate
    }

    /// Euclidean norm of the affine constraint violation (trace
    /// preservation and Λ(ρ) = σ) at the last PSD-projected iterate.
    pub fn residual(&self) -> f64 {
        self.residual
    }

    pub fn iterations(&self) -> usize {
        self.iterations
    }

    /// Tolerance the query was run at.
    pub fn tol(&self) -> f64 {
        self.tol
    }

    /// Reconstructed channel for feasible verdicts, when it passes
    /// channel validation.
    pub fn witness(&self) -> Option<&Channel> {
        self.witness.as_ref()
    }
}

/// Real coordinates for Hermitian matrices supported on given index
/// blocks. Off-diagonal coordinates carry a √2 weight so the Euclidean
/// norm equals the Frobenius norm and orthogonal projections in
/// coordinate space are orthogonal projections of matrices.
struct BlockCoordinates {
    dim: usize,
    coords: Vec<Coord>,
}

enum Coord {
    Diag(usize),
    OffRe(usize, usize),
    OffIm(usize, usize),
}

const SQRT2: f64 = std::f64::consts::SQRT_2;

impl BlockCoordinates {
    fn new(dim: usize, blocks: &[Vec<usize>]) -> Self {
        let mut coords = Vec::new();
        for block in blocks {
            for (pos, &a) in block.iter().enumerate() {
                coords.push(Coord::Diag(a));
                for &b in &block[pos + 1..] {
                    let (lo, hi) = if a < b { (a, b) } else { (b, a) };
                    coords.push(Coord::OffRe(lo, hi));
                    coords.push(Coord::OffIm(lo, hi));
                }
            }
        }
        Self { dim, coords }
    }

    fn len(&self) -> usize {
        self.coords.len()
    }

    fn decode(&self, x: &DVector<f64>) -> CMatrix {
        let mut j = CMatrix::zeros(self.dim, self.dim);
        for (p, coord) in self.coords.iter().enumerate() {
            match *coord {
                Coord::Diag(a) => j[(a, a)] = cplx(x[p], 0.0),
                Coord::OffRe(a, b) => {
                    let v = x[p] / SQRT2;
                    j[(a, b)] += cplx(v, 0.0);
                    j[(b, a)] += cplx(v, 0.0);
                }
                Coord::OffIm(a, b) => {
                    let v = x[p] / SQRT2;
                    j[(a, b)] += cplx(0.0, v);
                    j[(b, a)] += cplx(0.0, -v);
                }
            }
        }
        j
    }

    fn encode(&self, j: &CMatrix) -> DVector<f64> {
        let mut x = DVector::zeros(self.coords.len());
        for (p, coord) in self.coords.iter().enumerate() {
            x[p] = match *coord {
                Coord::Diag(a) => j[(a, a)].re,
                Coord::OffRe(a, b) => SQRT2 * j[(a, b)].re,
                Coord::OffIm(a, b) => SQRT2 * j[(a, b)].im,
            };
        }
        x
    }
}

/// One real-valued affine constraint row: a linear functional of the
/// Choi given by index pairs with complex coefficients, compared
/// against a real target, taking either the real or imaginary part.
struct ConstraintRow {
    terms: Vec<(usize, usize, num_complex::Complex64)>,
    imaginary_part: bool,
    target: f64,
}

impl ConstraintRow {
    fn eval(&self, j: &CMatrix) -> f64 {
        let mut acc = cplx(0.0, 0.0);
        for &(a, b, w) in &self.terms {
            acc += w * j[(a, b)];
        }
        if self.imaginary_part {
            acc.im
        } else {
            acc.re
        }
    }
}

fn build_rows(rho: &DensityMatrix, sigma: &DensityMatrix) -> Vec<ConstraintRow> {
    let d_in = rho.dimension();
    let d_out = sigma.dimension();
    let e_in = rho.hamiltonian().energies();
    let mut rows = Vec::new();

    // Trace preservation: Σ_k J[(i,k),(j,k)] = δ_ij. Rows with
    // E_i ≠ E_j involve only pinned-zero entries and are skipped.
    for i in 0..d_in {
        for j in i..d_in {
            if e_in[i] != e_in[j] {
                continue;
            }
            let terms: Vec<_> = (0..d_out)
                .map(|k| (i * d_out + k, j * d_out + k, cplx(1.0, 0.0)))
                .collect();
            rows.push(ConstraintRow {
                terms: terms.clone(),
                imaginary_part: false,
                target: if i == j { 1.0 } else { 0.0 },
            });
            if i != j {
                rows.push(ConstraintRow {
                    terms,
                    imaginary_part: true,
                    target: 0.0,
                });
            }
        }
    }

    // Channel action: Σ_{i,j} ρ[i,j] J[(i,k),(j,l)] = σ[k,l].
    for k in 0..d_out {
        for l in k..d_out {
            let mut terms = Vec::new();
            for i in 0..d_in {
                for j in 0..d_in {
                    let w = rho.entry(i, j);
                    if w.re == 0.0 && w.im == 0.0 {
                        continue;
                    }
                    terms.push((i * d_out + k, j * d_out + l, w));
                }
            }
            let target = sigma.entry(k, l);
            rows.push(ConstraintRow {
                terms: terms.clone(),
                imaginary_part: false,
                target: target.re,
            });
            if k != l {
                rows.push(ConstraintRow {
                    terms,
                    imaginary_part: true,
                    target: target.im,
                });
            }
        }
    }
    rows
}

/// Decides whether a covariant channel mapping ρ to σ exists.
///
/// Pre-checks (sound, certificate-bearing): target coherence modes must
/// be available in the input, and the target QFI must not exceed the
/// input QFI by more than `tol`. Past those, the solver searches the
/// intersection of the PSD cone with the affine constraint set;
/// `feasible` requires the constraint violation to drop below `tol`
/// within `max_iter` sweeps, otherwise the verdict is `undetermined`.
pub fn covariant_convertible(
    rho: &DensityMatrix,
    sigma: &DensityMatrix,
    tol: f64,
    max_iter: usize,
) -> FeasibilityVerdict {
    assert!(tol > 0.0 && tol.is_finite(), "tolerance must be positive");

    let coherence_in = available_coherences(rho, DEFAULT_COHERENCE_TOL);
    let coherence_out = available_coherences(sigma, DEFAULT_COHERENCE_TOL);
    if !coherence_out.is_subset_of(&coherence_in) {
        return FeasibilityVerdict::infeasible(Certificate::ModeSupport, tol);
    }
    if qfi(sigma) > qfi(rho) + tol {
        return FeasibilityVerdict::infeasible(Certificate::QfiDecrease, tol);
    }

    let d_in = rho.dimension();
    let d_out = sigma.dimension();
    let blocks = mode_blocks(rho.hamiltonian(), sigma.hamiltonian());
    let coords = BlockCoordinates::new(d_in * d_out, &blocks);
    let rows = build_rows(rho, sigma);

    // Constraint matrix in block coordinates via its columns.
    let n_rows = rows.len();
    let n_cols = coords.len();
    let mut a = DMatrix::<f64>::zeros(n_rows, n_cols);
    for p in 0..n_cols {
        let mut unit = DVector::zeros(n_cols);
        unit[p] = 1.0;
        let j_p = coords.decode(&unit);
        for (r, row) in rows.iter().enumerate() {
            a[(r, p)] = row.eval(&j_p);
        }
    }
    let b = DVector::from_iterator(n_rows, rows.iter().map(|r| r.target));
    let pinv = a
        .clone()
        .svd(true, true)
        .pseudo_inverse(1e-12)
        .expect("SVD of the constraint matrix failed");

    // Witness-quality convergence target: small enough that the
    // reconstructed channel meets validation tolerances, never above
    // the declared tol.
    let target = (tol / (4.0 * (d_out as f64).sqrt())).min(2.5e-10);

    let start = crate::linalg::kron(
        &CMatrix::identity(d_in, d_in),
        &CMatrix::identity(d_out, d_out),
    )
    .scale(1.0 / d_out as f64);
    let mut x = coords.encode(&start);
    let mut correction = DVector::zeros(n_cols);

    let mut best_violation = f64::INFINITY;
    let mut best_psd_point: Option<CMatrix> = None;
    let mut iterations = 0usize;

    for it in 1..=max_iter {
        iterations = it;
        let pre = &x + &correction;
        let j_pre = coords.decode(&pre);
        let j_psd = psd_project_blocks(&j_pre, &blocks);
        let y = coords.encode(&j_psd);
        correction = pre - &y;

        let violation = (&a * &y - &b).norm();
        if violation < best_violation {
            best_violation = violation;
            best_psd_point = Some(j_psd);
        }
        if violation < target {
            break;
        }
        x = &y - &pinv * (&a * &y - &b);
    }

    if best_violation < tol {
        let witness = best_psd_point.and_then(|j| {
            Channel::new(j, rho.hamiltonian().clone(), sigma.hamiltonian().clone()).ok()
        });
        FeasibilityVerdict::feasible(best_violation, iterations, tol, witness)
    } else {
        FeasibilityVerdict::undetermined(best_violation, iterations, tol)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channels::is_covariant;
    use crate::hamiltonian::Hamiltonian;
    use crate::linalg::trace_norm;
    use crate::state::{maximally_mixed, plus_state, tensor_state, validate_state};

    fn qubit_h() -> Hamiltonian {
        Hamiltonian::from_integers(&[0, 1])
    }

    #[test]
    fn dephasing_target_is_feasible_with_working_witness() {
        let h = qubit_h();
        let plus = plus_state(0, 1, &h).unwrap();
        let mixed = maximally_mixed(&h);
        let verdict = covariant_convertible(&plus, &mixed, 1e-7, 20_000);
        assert_eq!(verdict.status(), FeasibilityStatus::Feasible);
        assert_eq!(verdict.certificate(), Some(Certificate::SolverResidual));
        assert!(verdict.residual() < 1e-7);
        let witness = verdict.witness().expect("witness channel");
        assert!(is_covariant(witness, 1e-9));
        let moved = witness.apply(&plus).unwrap();
        assert!(trace_norm(&(moved.entries() - mixed.entries())) < 1e-7);
    }

    #[test]
    fn coherence_creation_is_infeasible_by_mode_support() {
        let h = qubit_h();
        let incoherent = maximally_mixed(&h);
        let plus = plus_state(0, 1, &h).unwrap();
        let verdict = covariant_convertible(&incoherent, &plus, 1e-7, 1000);
        assert_eq!(verdict.status(), FeasibilityStatus::Infeasible);
        assert_eq!(verdict.certificate(), Some(Certificate::ModeSupport));
    }

    #[test]
    fn mode_growth_across_dimensions_is_infeasible_by_mode_support() {
        let h = qubit_h();
        let plus = plus_state(0, 1, &h).unwrap();
        let two = tensor_state(&plus, &plus);
        let verdict = covariant_convertible(&plus, &two, 1e-7, 1000);
        assert_eq!(verdict.status(), FeasibilityStatus::Infeasible);
        assert_eq!(verdict.certificate(), Some(Certificate::ModeSupport));
    }

    #[test]
    fn qfi_increase_with_equal_modes_is_infeasible_by_qfi() {
        let h = qubit_h();
        let plus = plus_state(0, 1, &h).unwrap();
        let damped = validate_state(
            &(plus.entries().scale(0.5) + maximally_mixed(&h).entries().scale(0.5)),
            &h,
            1e-9,
        )
        .unwrap();
        let verdict = covariant_convertible(&damped, &plus, 1e-7, 1000);
        assert_eq!(verdict.status(), FeasibilityStatus::Infeasible);
        assert_eq!(verdict.certificate(), Some(Certificate::QfiDecrease));
    }

    #[test]
    fn identity_conversion_is_feasible() {
        let h = Hamiltonian::from_integers(&[0, 1, 3]);
        let psi = crate::state::pure_state(
            &[cplx(0.5, 0.2), cplx(0.4, -0.1), cplx(0.7, 0.0)],
            &h,
        )
        .unwrap();
        let verdict = covariant_convertible(&psi, &psi, 1e-7, 20_000);
        assert_eq!(verdict.status(), FeasibilityStatus::Feasible);
        assert!(verdict.residual() < 1e-7);
    }

    #[test]
    fn starved_iteration_budget_returns_undetermined() {
        let h = qubit_h();
        let plus = plus_state(0, 1, &h).unwrap();
        let target = validate_state(
            &(plus.entries().scale(0.6) + plus.dephased().entries().scale(0.4)),
            &h,
            1e-9,
        )
        .unwrap();
        let verdict = covariant_convertible(&plus, &target, 1e-7, 2);
        assert_eq!(verdict.status(), FeasibilityStatus::Undetermined);
        assert!(verdict.residual() >= 1e-7);
        assert!(verdict.certificate().is_none());
    }
}

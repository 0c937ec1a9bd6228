//! Density matrices bound to a Hamiltonian.

use crate::error::{Error, Result};
use crate::hamiltonian::{tensor_hamiltonian, Hamiltonian};
use crate::linalg::{
    cplx, eigh, hermitian_part, hermiticity_deviation, kron, partial_trace_raw, CMatrix, ONE,
};

/// Default numerical tolerance for state validation.
pub const DEFAULT_TOL: f64 = 1e-9;

/// A validated quantum state: Hermitian, positive semidefinite,
/// unit-trace complex matrix attached to a Hamiltonian.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    entries: CMatrix,
    hamiltonian: Hamiltonian,
    tolerance: f64,
}

impl DensityMatrix {
    pub fn entries(&self) -> &CMatrix {
        &self.entries
    }

    pub fn hamiltonian(&self) -> &Hamiltonian {
        &self.hamiltonian
    }

    /// Tolerance the state was validated at.
    pub fn tolerance(&self) -> f64 {
        self.tolerance
    }

    pub fn dimension(&self) -> usize {
        self.hamiltonian.dimension()
    }

    pub fn entry(&self, i: usize, j: usize) -> num_complex::Complex64 {
        self.entries[(i, j)]
    }

    /// Diagonal state with the same populations (coherences removed in
    /// the energy eigenbasis).
    pub fn dephased(&self) -> DensityMatrix {
        let d = self.dimension();
        let mut m = CMatrix::zeros(d, d);
        for k in 0..d {
            m[(k, k)] = cplx(self.entries[(k, k)].re, 0.0);
        }
        DensityMatrix {
            entries: m,
            hamiltonian: self.hamiltonian.clone(),
            tolerance: self.tolerance,
        }
    }

    /// Constructs a state from entries known to satisfy the invariants
    /// exactly (unit vectors, convex mixtures of valid states, ...).
    /// Internal shortcut; external input goes through [`validate_state`].
    pub(crate) fn from_valid_parts(
        entries: CMatrix,
        hamiltonian: Hamiltonian,
        tolerance: f64,
    ) -> Self {
        debug_assert_eq!(entries.nrows(), hamiltonian.dimension());
        Self {
            entries,
            hamiltonian,
            tolerance,
        }
    }
}

/// Checks Hermiticity, positivity, and unit trace of `matrix` within
/// `tol`, and returns the validated state. The stored matrix is the
/// Hermitian part (M + M^dag)/2 of the input.
pub fn validate_state(matrix: &CMatrix, h: &Hamiltonian, tol: f64) -> Result<DensityMatrix> {
    if tol < 0.0 || !tol.is_finite() {
        return Err(Error::InvalidParameter {
            name: "tol",
            reason: "must be a nonnegative finite number".to_string(),
        });
    }
    if !matrix.is_square() {
        return Err(Error::NotSquare {
            context: "state validation",
            rows: matrix.nrows(),
            cols: matrix.ncols(),
        });
    }
    if matrix.nrows() != h.dimension() {
        return Err(Error::DimensionMismatch {
            context: "state validation",
            expected: h.dimension(),
            actual: matrix.nrows(),
        });
    }
    let dev = hermiticity_deviation(matrix);
    if dev > tol {
        return Err(Error::NotHermitian {
            deviation: dev,
            tol,
        });
    }
    let sym = hermitian_part(matrix);
    let (eigenvalues, _) = eigh(&sym);
    let min_eig = eigenvalues.first().copied().unwrap_or(0.0);
    if min_eig < -tol {
        return Err(Error::NotPositiveSemidefinite {
            min_eigenvalue: min_eig,
            tol,
        });
    }
    let trace = sym.trace().re;
    if (trace - 1.0).abs() > tol {
        return Err(Error::TraceNotOne {
            trace,
            deviation: (trace - 1.0).abs(),
            tol,
        });
    }
    Ok(DensityMatrix {
        entries: sym,
        hamiltonian: h.clone(),
        tolerance: tol,
    })
}

/// Kronecker product of two states on the joint Hamiltonian
/// H₁ ⊗ I + I ⊗ H₂.
pub fn tensor_state(a: &DensityMatrix, b: &DensityMatrix) -> DensityMatrix {
    DensityMatrix {
        entries: kron(a.entries(), b.entries()),
        hamiltonian: tensor_hamiltonian(a.hamiltonian(), b.hamiltonian()),
        tolerance: a.tolerance.max(b.tolerance),
    }
}

/// n-fold tensor power of a state.
pub fn tensor_power(rho: &DensityMatrix, n: usize) -> Result<DensityMatrix> {
    if n == 0 {
        return Err(Error::InvalidParameter {
            name: "n",
            reason: "tensor power requires n >= 1".to_string(),
        });
    }
    let mut acc = rho.clone();
    for _ in 1..n {
        acc = tensor_state(&acc, rho);
    }
    Ok(acc)
}

/// Marginal of `rho` on the factors listed in `keep` (strictly
/// increasing indices into `factors`). The declared factorization must
/// reproduce the state's Hamiltonian exactly.
pub fn partial_trace(
    rho: &DensityMatrix,
    factors: &[Hamiltonian],
    keep: &[usize],
) -> Result<DensityMatrix> {
    if factors.is_empty() {
        return Err(Error::BadFactorization {
            reason: "factor list is empty".to_string(),
        });
    }
    let mut joint = factors[0].clone();
    for f in &factors[1..] {
        joint = tensor_hamiltonian(&joint, f);
    }
    if &joint != rho.hamiltonian() {
        return Err(Error::BadFactorization {
            reason: format!(
                "tensor product of factors is {}, state Hamiltonian is {}",
                joint,
                rho.hamiltonian()
            ),
        });
    }
    if keep.is_empty() {
        return Err(Error::InvalidParameter {
            name: "keep",
            reason: "at least one factor must be kept".to_string(),
        });
    }
    if !keep.windows(2).all(|w| w[0] < w[1]) {
        return Err(Error::InvalidParameter {
            name: "keep",
            reason: "indices must be strictly increasing".to_string(),
        });
    }
    for &k in keep {
        if k >= factors.len() {
            return Err(Error::IndexOutOfRange {
                context: "kept factor",
                index: k,
                len: factors.len(),
            });
        }
    }
    let dims: Vec<usize> = factors.iter().map(|f| f.dimension()).collect();
    let entries = partial_trace_raw(rho.entries(), &dims, keep);
    let mut kept_h = factors[keep[0]].clone();
    for &k in &keep[1..] {
        kept_h = tensor_hamiltonian(&kept_h, &factors[k]);
    }
    Ok(DensityMatrix {
        entries,
        hamiltonian: kept_h,
        tolerance: rho.tolerance,
    })
}

/// Free time evolution e^{-iHt} ρ e^{iHt} under the state's Hamiltonian.
pub fn time_evolve(rho: &DensityMatrix, t: f64) -> DensityMatrix {
    let u = rho.hamiltonian().phase_unitary(t);
    let entries = &u * rho.entries() * u.adjoint();
    DensityMatrix {
        entries,
        hamiltonian: rho.hamiltonian().clone(),
        tolerance: rho.tolerance,
    }
}

/// Projector onto (|i⟩ + |j⟩)/√2 embedded in the dimension of `h`.
pub fn plus_state(i: usize, j: usize, h: &Hamiltonian) -> Result<DensityMatrix> {
    let d = h.dimension();
    for &k in &[i, j] {
        if k >= d {
            return Err(Error::IndexOutOfRange {
                context: "level index",
                index: k,
                len: d,
            });
        }
    }
    if i == j {
        return Err(Error::InvalidParameter {
            name: "levels",
            reason: format!("indices must differ, got ({i}, {j})"),
        });
    }
    let mut m = CMatrix::zeros(d, d);
    let half = cplx(0.5, 0.0);
    m[(i, i)] = half;
    m[(i, j)] = half;
    m[(j, i)] = half;
    m[(j, j)] = half;
    Ok(DensityMatrix {
        entries: m,
        hamiltonian: h.clone(),
        tolerance: DEFAULT_TOL,
    })
}

/// Pure state from an amplitude vector; the vector is normalized.
pub fn pure_state(amplitudes: &[num_complex::Complex64], h: &Hamiltonian) -> Result<DensityMatrix> {
    if amplitudes.len() != h.dimension() {
        return Err(Error::DimensionMismatch {
            context: "pure state amplitudes",
            expected: h.dimension(),
            actual: amplitudes.len(),
        });
    }
    let norm_sq: f64 = amplitudes.iter().map(|z| z.norm_sqr()).sum();
    if norm_sq <= 0.0 {
        return Err(Error::InvalidParameter {
            name: "amplitudes",
            reason: "zero vector cannot be normalized".to_string(),
        });
    }
    let scale = norm_sq.sqrt();
    let d = h.dimension();
    let mut m = CMatrix::zeros(d, d);
    for r in 0..d {
        for c in 0..d {
            m[(r, c)] = (amplitudes[r] / scale) * (amplitudes[c] / scale).conj() * ONE;
        }
    }
    Ok(DensityMatrix {
        entries: m,
        hamiltonian: h.clone(),
        tolerance: DEFAULT_TOL,
    })
}

/// Maximally mixed state I/d on `h`.
pub fn maximally_mixed(h: &Hamiltonian) -> DensityMatrix {
    let d = h.dimension();
    DensityMatrix {
        entries: CMatrix::identity(d, d).scale(1.0 / d as f64),
        hamiltonian: h.clone(),
        tolerance: DEFAULT_TOL,
    }
}

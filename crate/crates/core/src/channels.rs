//! Quantum channels as Choi operators, covariance and Gibbs checks,
//! and thermal-operation construction.
//!
//! Choi convention: the input index is the slow (first) tensor factor,
//! so `J[(i·d_out + k), (j·d_out + l)] = ⟨k| Λ(|i⟩⟨j|) |l⟩`. With this
//! convention a channel is completely positive iff J is PSD and trace
//! preserving iff the partial trace of J over the output factor is the
//! identity on the input.
//!
//! Covariance structure: a channel commutes with free time evolution
//! iff `J[(i,k),(j,l)] = 0` whenever `E_i − E_j ≠ E'_k − E'_l`, i.e.
//! iff J is block diagonal when composite indices `(i,k)` are grouped
//! by the exact rational label `E_i − E'_k`. Rational energies make
//! this a finite exact check, equivalent to covariance at all times.

use num_rational::BigRational;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::gibbs::{gibbs_state, GibbsContext};
use crate::hamiltonian::{tensor_hamiltonian, Hamiltonian};
use crate::linalg::{
    cplx, eigh, hermitian_part, hermiticity_deviation, kron, max_abs, partial_trace_raw,
    trace_norm, CMatrix, ONE,
};
use crate::state::{DensityMatrix, DEFAULT_TOL};

/// Validation tolerance for channel invariants (PSD, trace preserving).
pub const CHANNEL_TOL: f64 = 1e-9;

/// A completely positive trace-preserving map stored as a Choi
/// operator with explicit input and output Hamiltonians.
#[derive(Debug, Clone, PartialEq)]
pub struct Channel {
    choi: CMatrix,
    h_in: Hamiltonian,
    h_out: Hamiltonian,
}

impl Channel {
    /// Validates PSD (within 1e-9), trace preservation (within 1e-9),
    /// and dimensions, then stores the Hermitian part of the Choi.
    pub fn new(choi: CMatrix, h_in: Hamiltonian, h_out: Hamiltonian) -> Result<Self> {
        let d_in = h_in.dimension();
        let d_out = h_out.dimension();
        if !choi.is_square() {
            return Err(Error::NotSquare {
                context: "Choi operator",
                rows: choi.nrows(),
                cols: choi.ncols(),
            });
        }
        if choi.nrows() != d_in * d_out {
            return Err(Error::DimensionMismatch {
                context: "Choi operator",
                expected: d_in * d_out,
                actual: choi.nrows(),
            });
        }
        let dev = hermiticity_deviation(&choi);
        if dev > CHANNEL_TOL {
            return Err(Error::NotHermitian {
                deviation: dev,
                tol: CHANNEL_TOL,
            });
        }
        let sym = hermitian_part(&choi);
        let (eigenvalues, _) = eigh(&sym);
        let min_eig = eigenvalues.first().copied().unwrap_or(0.0);
        if min_eig < -CHANNEL_TOL {
            return Err(Error::NotPositiveSemidefinite {
                min_eigenvalue: min_eig,
                tol: CHANNEL_TOL,
            });
        }
        let marginal = partial_trace_raw(&sym, &[d_in, d_out], &[0]);
        let tp_dev = max_abs(&(&marginal - CMatrix::identity(d_in, d_in)));
        if tp_dev > CHANNEL_TOL {
            return Err(Error::InvalidParameter {
                name: "choi",
                reason: format!(
                    "not trace preserving: max |Tr_out J - I| = {tp_dev:.3e} exceeds {CHANNEL_TOL:.3e}"
                ),
            });
        }
        Ok(Self {
            choi: sym,
            h_in,
            h_out,
        })
    }

    pub fn choi(&self) -> &CMatrix {
        &self.choi
    }

    pub fn h_in(&self) -> &Hamiltonian {
        &self.h_in
    }

    pub fn h_out(&self) -> &Hamiltonian {
        &self.h_out
    }

    pub fn d_in(&self) -> usize {
        self.h_in.dimension()
    }

    pub fn d_out(&self) -> usize {
        self.h_out.dimension()
    }

    /// Raw Choi action on a matrix of input dimension; no validation.
    pub fn apply_matrix(&self, m: &CMatrix) -> CMatrix {
        apply_choi(&self.choi, self.d_in(), self.d_out(), m)
    }

    /// Applies the channel to a state. The state must carry the
    /// channel's input Hamiltonian.
    pub fn apply(&self, rho: &DensityMatrix) -> Result<DensityMatrix> {
        if rho.hamiltonian() != &self.h_in {
            if rho.dimension() != self.d_in() {
                return Err(Error::DimensionMismatch {
                    context: "channel input",
                    expected: self.d_in(),
                    actual: rho.dimension(),
                });
            }
            return Err(Error::HamiltonianMismatch {
                context: "channel input",
            });
        }
        let out = hermitian_part(&self.apply_matrix(rho.entries()));
        Ok(DensityMatrix::from_valid_parts(
            out,
            self.h_out.clone(),
            rho.tolerance().max(DEFAULT_TOL),
        ))
    }

    /// The identity channel on `h`.
    pub fn identity(h: &Hamiltonian) -> Channel {
        let d = h.dimension();
        let mut j = CMatrix::zeros(d * d, d * d);
        for i in 0..d {
            for k in 0..d {
                j[(i * d + i, k * d + k)] = ONE;
            }
        }
        Channel {
            choi: j,
            h_in: h.clone(),
            h_out: h.clone(),
        }
    }

    /// Full dephasing in the energy eigenbasis of `h`.
    pub fn dephasing(h: &Hamiltonian) -> Channel {
        let d = h.dimension();
        let mut j = CMatrix::zeros(d * d, d * d);
        for i in 0..d {
            j[(i * d + i, i * d + i)] = ONE;
        }
        Channel {
            choi: j,
            h_in: h.clone(),
            h_out: h.clone(),
        }
    }

    /// Convex mixture (1-s)·id + s·dephasing. Requires s ∈ [0, 1].
    pub fn partial_dephasing(h: &Hamiltonian, s: f64) -> Result<Channel> {
        if !(0.0..=1.0).contains(&s) {
            return Err(Error::InvalidParameter {
                name: "s",
                reason: format!("mixing weight must be in [0, 1], got {s}"),
            });
        }
        let id = Channel::identity(h);
        let de = Channel::dephasing(h);
        Ok(Channel {
            choi: id.choi.scale(1.0 - s) + de.choi.scale(s),
            h_in: h.clone(),
            h_out: h.clone(),
        })
    }

    /// The constant channel X ↦ Tr(X)·target.
    pub fn replace(h_in: &Hamiltonian, target: &DensityMatrix) -> Channel {
        let d_in = h_in.dimension();
        Channel {
            choi: kron(&CMatrix::identity(d_in, d_in), target.entries()),
            h_in: h_in.clone(),
            h_out: target.hamiltonian().clone(),
        }
    }

    /// Unitary conjugation X ↦ U X U^dag as a channel from `h_in` to
    /// `h_out` (equal dimensions).
    pub fn from_unitary(u: &CMatrix, h_in: &Hamiltonian, h_out: &Hamiltonian) -> Result<Channel> {
        let d = h_in.dimension();
        if h_out.dimension() != d || u.nrows() != d || u.ncols() != d {
            return Err(Error::DimensionMismatch {
                context: "unitary channel",
                expected: d,
                actual: u.nrows().max(u.ncols()).max(h_out.dimension()),
            });
        }
        let dev = max_abs(&(u.adjoint() * u - CMatrix::identity(d, d)));
        if dev > CHANNEL_TOL {
            return Err(Error::NotUnitary {
                deviation: dev,
                tol: CHANNEL_TOL,
            });
        }
        let mut j = CMatrix::zeros(d * d, d * d);
        for i in 0..d {
            for j_in in 0..d {
                for k in 0..d {
                    for l in 0..d {
                        j[(i * d + k, j_in * d + l)] = u[(k, i)] * u[(l, j_in)].conj();
                    }
                }
            }
        }
        Channel {
            choi: j,
            h_in: h_in.clone(),
            h_out: h_out.clone(),
        }
        .validated()
    }

    fn validated(self) -> Result<Channel> {
        Channel::new(self.choi, self.h_in, self.h_out)
    }
}

/// Raw Choi action: out[k,l] = Σ_{i,j} m[i,j] · J[(i,k),(j,l)].
pub fn apply_choi(choi: &CMatrix, d_in: usize, d_out: usize, m: &CMatrix) -> CMatrix {
    assert_eq!(m.nrows(), d_in, "input does not match Choi input dimension");
    let mut out = CMatrix::zeros(d_out, d_out);
    for i in 0..d_in {
        for j in 0..d_in {
            let w = m[(i, j)];
            if w.re == 0.0 && w.im == 0.0 {
                continue;
            }
            let block = choi.view((i * d_out, j * d_out), (d_out, d_out));
            for k in 0..d_out {
                for l in 0..d_out {
                    out[(k, l)] += w * block[(k, l)];
                }
            }
        }
    }
    out
}

/// Applies a channel to a state (free-function form of [`Channel::apply`]).
pub fn apply(ch: &Channel, rho: &DensityMatrix) -> Result<DensityMatrix> {
    ch.apply(rho)
}

/// Tensor product of two channels, acting factor-wise on a joint
/// system with the summed Hamiltonian.
pub fn tensor_channels(a: &Channel, b: &Channel) -> Result<Channel> {
    let (dia, doa) = (a.d_in(), a.d_out());
    let (dib, dob) = (b.d_in(), b.d_out());
    let d_out = doa * dob;
    let mut choi = CMatrix::zeros(dia * dib * d_out, dia * dib * d_out);
    for ia in 0..dia {
        for ka in 0..doa {
            for ja in 0..dia {
                for la in 0..doa {
                    let wa = a.choi()[(ia * doa + ka, ja * doa + la)];
                    if wa.re == 0.0 && wa.im == 0.0 {
                        continue;
                    }
                    for ib in 0..dib {
                        for kb in 0..dob {
                            for jb in 0..dib {
                                for lb in 0..dob {
                                    let wb = b.choi()[(ib * dob + kb, jb * dob + lb)];
                                    let row = (ia * dib + ib) * d_out + (ka * dob + kb);
                                    let col = (ja * dib + jb) * d_out + (la * dob + lb);
                                    choi[(row, col)] += wa * wb;
                                }
                            }
                        }
                    }
                }
            }
        }
    }
    Channel::new(
        choi,
        tensor_hamiltonian(a.h_in(), b.h_in()),
        tensor_hamiltonian(a.h_out(), b.h_out()),
    )
}

/// Exact rational labels E_i − E'_k for composite Choi indices
/// (i·d_out + k). Two composite indices can be connected by a
/// covariant channel's Choi only when their labels agree.
pub(crate) fn composite_mode_labels(h_in: &Hamiltonian, h_out: &Hamiltonian) -> Vec<BigRational> {
    let mut labels = Vec::with_capacity(h_in.dimension() * h_out.dimension());
    for ei in h_in.energies() {
        for ek in h_out.energies() {
            labels.push(ei - ek);
        }
    }
    labels
}

/// Groups composite Choi indices into blocks of equal mode label.
pub(crate) fn mode_blocks(h_in: &Hamiltonian, h_out: &Hamiltonian) -> Vec<Vec<usize>> {
    let labels = composite_mode_labels(h_in, h_out);
    let mut blocks: Vec<(BigRational, Vec<usize>)> = Vec::new();
    for (idx, label) in labels.iter().enumerate() {
        match blocks.iter_mut().find(|(l, _)| l == label) {
            Some((_, v)) => v.push(idx),
            None => blocks.push((label.clone(), vec![idx])),
        }
    }
    blocks.into_iter().map(|(_, v)| v).collect()
}

/// Projects a Hermitian matrix onto the PSD cone block by block; the
/// blocks are index groups outside of which entries are left untouched.
pub(crate) fn psd_project_blocks(m: &CMatrix, blocks: &[Vec<usize>]) -> CMatrix {
    let mut out = m.clone();
    for block in blocks {
        let n = block.len();
        if n == 1 {
            let idx = block[0];
            out[(idx, idx)] = cplx(m[(idx, idx)].re.max(0.0), 0.0);
            continue;
        }
        let mut sub = CMatrix::zeros(n, n);
        for (r, &a) in block.iter().enumerate() {
            for (c, &b) in block.iter().enumerate() {
                sub[(r, c)] = m[(a, b)];
            }
        }
        let (vals, vecs) = eigh(&sub);
        let mut rebuilt = CMatrix::zeros(n, n);
        for (idx, &v) in vals.iter().enumerate() {
            if v <= 0.0 {
                continue;
            }
            let col = vecs.column(idx);
            for r in 0..n {
                for c in 0..n {
                    rebuilt[(r, c)] += col[r] * col[c].conj() * cplx(v, 0.0);
                }
            }
        }
        for (r, &a) in block.iter().enumerate() {
            for (c, &b) in block.iter().enumerate() {
                out[(a, b)] = rebuilt[(r, c)];
            }
        }
    }
    out
}

/// Largest magnitude among Choi entries connecting composite indices
/// with different mode labels. Zero exactly when the channel commutes
/// with e^{-iHt} conjugation at all times t.
pub fn covariance_violation(ch: &Channel) -> f64 {
    let labels = composite_mode_labels(&ch.h_in, &ch.h_out);
    let n = labels.len();
    let mut worst = 0.0f64;
    for a in 0..n {
        for b in 0..n {
            if labels[a] != labels[b] {
                worst = worst.max(ch.choi[(a, b)].norm());
            }
        }
    }
    worst
}

/// Exact finite covariance check: every Choi entry connecting composite
/// indices with different mode labels must be bounded by `tol`. This is
/// equivalent to commuting with e^{-iHt} conjugation at all times t.
pub fn is_covariant(ch: &Channel, tol: f64) -> bool {
    covariance_violation(ch) <= tol
}

/// Trace distance between the pushed-forward input Gibbs state and the
/// output Gibbs state at inverse temperature `beta`.
pub fn gibbs_violation(ch: &Channel, beta: f64) -> Result<f64> {
    let gamma_in = gibbs_state(&GibbsContext::new(beta, ch.h_in.clone())?);
    let gamma_out = gibbs_state(&GibbsContext::new(beta, ch.h_out.clone())?);
    let moved = ch.apply_matrix(gamma_in.entries());
    Ok(trace_norm(&(moved - gamma_out.entries())))
}

/// Checks Λ(γ_in) = γ_out in trace norm at inverse temperature `beta`.
pub fn is_gibbs_preserving(ch: &Channel, beta: f64, tol: f64) -> Result<bool> {
    Ok(gibbs_violation(ch, beta)? < tol)
}

/// Verifies that `u` is unitary (within `tol`, else an error) and
/// returns whether it commutes with `h`: ‖[U, H]‖₁ < tol.
pub fn energy_preserving_unitary_check(u: &CMatrix, h: &Hamiltonian, tol: f64) -> Result<bool> {
    let d = h.dimension();
    if !u.is_square() || u.nrows() != d {
        return Err(Error::DimensionMismatch {
            context: "unitary check",
            expected: d,
            actual: u.nrows(),
        });
    }
    let dev = max_abs(&(u.adjoint() * u - CMatrix::identity(d, d)));
    if dev > tol {
        return Err(Error::NotUnitary {
            deviation: dev,
            tol,
        });
    }
    let hm = h.matrix();
    let comm = u * &hm - &hm * u;
    Ok(trace_norm(&comm) < tol)
}

/// Builds the thermal operation ρ ↦ Tr_anc U (ρ ⊗ γ_anc) U^dag for an
/// energy-preserving unitary on the joint system. The result is both
/// covariant and Gibbs preserving by construction.
pub fn thermal_operation(
    h_sys: &Hamiltonian,
    h_anc: &Hamiltonian,
    beta: f64,
    u: &CMatrix,
) -> Result<Channel> {
    let joint = tensor_hamiltonian(h_sys, h_anc);
    if !energy_preserving_unitary_check(u, &joint, CHANNEL_TOL)? {
        let hm = joint.matrix();
        let comm = u * &hm - &hm * u;
        return Err(Error::NonCommuting {
            context: "thermal operation unitary",
            norm: trace_norm(&comm),
            tol: CHANNEL_TOL,
        });
    }
    let gamma = gibbs_state(&GibbsContext::new(beta, h_anc.clone())?);
    let d_s = h_sys.dimension();
    let d_a = h_anc.dimension();
    let dims = [d_s, d_a];
    let mut choi = CMatrix::zeros(d_s * d_s, d_s * d_s);
    for i in 0..d_s {
        for j in 0..d_s {
            let mut unit = CMatrix::zeros(d_s, d_s);
            unit[(i, j)] = ONE;
            let joint_in = kron(&unit, gamma.entries());
            let moved = u * joint_in * u.adjoint();
            let reduced = partial_trace_raw(&moved, &dims, &[0]);
            for k in 0..d_s {
                for l in 0..d_s {
                    choi[(i * d_s + k, j * d_s + l)] = reduced[(k, l)];
                }
            }
        }
    }
    Channel::new(choi, h_sys.clone(), h_sys.clone())
}

/// Deterministic pseudo-random covariant channel on `h`.
///
/// A random PSD Choi is pinched onto the covariant block structure
/// (exactly preserving it thereafter) and alternately projected onto
/// the PSD cone and the trace-preserving affine set until both hold to
/// high accuracy.
pub fn random_covariant_channel(h: &Hamiltonian, seed: u64) -> Result<Channel> {
    use rand::SeedableRng;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let d = h.dimension();
    let n = d * d;
    let mut g = CMatrix::zeros(n, n);
    for r in 0..n {
        for c in 0..n {
            let re: f64 = rng.sample(StandardNormal);
            let im: f64 = rng.sample(StandardNormal);
            g[(r, c)] = cplx(re, im);
        }
    }
    let mut j = &g * g.adjoint();

    let labels = composite_mode_labels(h, h);
    for a in 0..n {
        for b in 0..n {
            if labels[a] != labels[b] {
                j[(a, b)] = cplx(0.0, 0.0);
            }
        }
    }
    let tr = j.trace().re;
    if tr > 0.0 {
        j = j.scale(d as f64 / tr);
    }

    let blocks = mode_blocks(h, h);
    let identity_in = CMatrix::identity(d, d);
    let tp_project = |j: &CMatrix| -> CMatrix {
        let marginal = partial_trace_raw(j, &[d, d], &[0]);
        let correction = (&identity_in - marginal).scale(1.0 / d as f64);
        j + kron(&correction, &identity_in)
    };

    const MAX_SWEEPS: usize = 2000;
    let mut converged = false;
    let mut tp_dev = f64::INFINITY;
    for _ in 0..MAX_SWEEPS {
        j = psd_project_blocks(&j, &blocks);
        let marginal = partial_trace_raw(&j, &[d, d], &[0]);
        tp_dev = max_abs(&(&marginal - &identity_in));
        if tp_dev < 1e-12 {
            converged = true;
            break;
        }
        j = tp_project(&j);
    }
    if !converged {
        return Err(Error::ConvergenceFailure {
            context: "random covariant channel projection",
            residual: tp_dev,
            iterations: MAX_SWEEPS,
        });
    }
    j = tp_project(&j);
    Channel::new(j, h.clone(), h.clone())
}

//! Asymmetry and free-energy monotones.

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::gibbs::{gibbs_state, GibbsContext};
use crate::hamiltonian::Hamiltonian;
use crate::linalg::{eigh, trace_norm, SPECTRAL_CUTOFF};
use crate::state::DensityMatrix;

/// Eigenvalues below this are treated as zero in logarithms.
const LOG_CUTOFF: f64 = 1e-12;
/// Probability mass on the reference state's kernel above which the
/// support condition is declared violated.
const SUPPORT_MASS_TOL: f64 = 1e-9;
/// Commutator trace-norm bound for the commuting-pair precondition.
const COMMUTE_TOL: f64 = 1e-9;

/// Quantum Fisher information of ρ with respect to its Hamiltonian:
/// 2 Σ_{k,l} (λ_k − λ_l)² / (λ_k + λ_l) · |⟨ψ_k|H|ψ_l⟩|².
///
/// Pairs with λ_k + λ_l below 1e-12 are skipped. Zero exactly when ρ
/// commutes with H; degenerate eigenvalue pairs contribute zero, so the
/// value is independent of the basis chosen inside degenerate spaces.
pub fn qfi(rho: &DensityMatrix) -> f64 {
    let (vals, vecs) = eigh(rho.entries());
    let h_elems = vecs.adjoint() * rho.hamiltonian().matrix() * &vecs;
    let d = vals.len();
    let mut acc = 0.0_f64;
    for k in 0..d {
        for l in 0..d {
            let sum = vals[k] + vals[l];
            if sum < SPECTRAL_CUTOFF {
                continue;
            }
            let diff = vals[k] - vals[l];
            if diff == 0.0 {
                continue;
            }
            acc += diff * diff / sum * h_elems[(k, l)].norm_sqr();
        }
    }
    (2.0 * acc).max(0.0)
}

/// Quantum relative entropy S(ρ‖γ) = Tr ρ (ln ρ − ln γ) in nats.
/// Returns +∞ when the support of ρ is not contained in the support
/// of γ. Errors only on dimension mismatch.
pub fn relative_entropy(rho: &DensityMatrix, gamma: &DensityMatrix) -> Result<f64> {
    if rho.dimension() != gamma.dimension() {
        return Err(Error::DimensionMismatch {
            context: "relative entropy",
            expected: rho.dimension(),
            actual: gamma.dimension(),
        });
    }
    let (p_vals, _) = eigh(rho.entries());
    let tr_rho_ln_rho: f64 = p_vals
        .iter()
        .filter(|&&p| p > LOG_CUTOFF)
        .map(|&p| p * p.ln())
        .sum();

    let (g_vals, g_vecs) = eigh(gamma.entries());
    let rho_in_g = g_vecs.adjoint() * rho.entries() * &g_vecs;
    let mut kernel_mass = 0.0_f64;
    let mut tr_rho_ln_gamma = 0.0_f64;
    for (j, &g) in g_vals.iter().enumerate() {
        let w = rho_in_g[(j, j)].re.max(0.0);
        if g > LOG_CUTOFF {
            tr_rho_ln_gamma += w * g.ln();
        } else {
            kernel_mass += w;
        }
    }
    if kernel_mass > SUPPORT_MASS_TOL {
        return Ok(f64::INFINITY);
    }
    let s = tr_rho_ln_rho - tr_rho_ln_gamma;
    Ok(if s < 0.0 && s > -1e-6 { 0.0 } else { s })
}

/// Classical probability pairs of two commuting states in a common
/// eigenbasis. Fails unless the commutator's trace norm is below 1e-9.
fn commuting_eigenvalue_pairs(
    rho: &DensityMatrix,
    gamma: &DensityMatrix,
) -> Result<Vec<(f64, f64)>> {
    if rho.dimension() != gamma.dimension() {
        return Err(Error::DimensionMismatch {
            context: "free energy",
            expected: rho.dimension(),
            actual: gamma.dimension(),
        });
    }
    let comm = rho.entries() * gamma.entries() - gamma.entries() * rho.entries();
    let comm_norm = trace_norm(&comm);
    if comm_norm > COMMUTE_TOL {
        return Err(Error::NonCommuting {
            context: "free energy",
            norm: comm_norm,
            tol: COMMUTE_TOL,
        });
    }
    // Diagonalize γ, rotate ρ into that basis, then rediagonalize ρ
    // inside each (near-)degenerate eigenspace of γ. Off-block entries
    // of the rotated ρ are bounded by the commutator norm and dropped.
    let (g_vals, g_vecs) = eigh(gamma.entries());
    let rho_g = g_vecs.adjoint() * rho.entries() * &g_vecs;
    let d = g_vals.len();
    let mut pairs = Vec::with_capacity(d);
    let mut start = 0usize;
    while start < d {
        let mut end = start + 1;
        while end < d && (g_vals[end] - g_vals[end - 1]).abs() <= 1e-9 {
            end += 1;
        }
        let block = rho_g.view((start, start), (end - start, end - start)).into_owned();
        let (block_vals, _) = eigh(&block);
        for (off, &p) in block_vals.iter().enumerate() {
            pairs.push((p.max(0.0), g_vals[start + off].max(0.0)));
        }
        start = end;
    }
    Ok(pairs)
}

/// Rényi free energy S_α(ρ‖γ) = sgn(α)/(α−1) · ln Tr ρ^α γ^{1−α} for a
/// commuting pair, in nats.
///
/// Limit conventions: α = 1 is the relative entropy; α = 0 returns
/// −ln of the γ-weight on the support of ρ; α = ±∞ return the
/// max-relative-entropy limits ln max p/g and ln max g/p respectively.
/// Zero eigenvalue pairs (p, g) = (0, 0) never contribute.
pub fn renyi_free_energy(rho: &DensityMatrix, gamma: &DensityMatrix, alpha: f64) -> Result<f64> {
    if alpha.is_nan() {
        return Err(Error::InvalidParameter {
            name: "alpha",
            reason: "must not be NaN".to_string(),
        });
    }
    let pairs = commuting_eigenvalue_pairs(rho, gamma)?;

    if alpha == 1.0 {
        let mut kernel_mass = 0.0;
        let mut s = 0.0;
        for &(p, g) in &pairs {
            if p <= LOG_CUTOFF {
                continue;
            }
            if g <= LOG_CUTOFF {
                kernel_mass += p;
            } else {
                s += p * (p.ln() - g.ln());
            }
        }
        if kernel_mass > SUPPORT_MASS_TOL {
            return Ok(f64::INFINITY);
        }
        return Ok(if s < 0.0 && s > -1e-6 { 0.0 } else { s });
    }
    if alpha == f64::INFINITY {
        let mut best = 0.0_f64;
        for &(p, g) in &pairs {
            if p <= LOG_CUTOFF {
                continue;
            }
            if g <= LOG_CUTOFF {
                return Ok(f64::INFINITY);
            }
            best = best.max(p / g);
        }
        return Ok(if best > 0.0 { best.ln().max(0.0) } else { 0.0 });
    }
    if alpha == f64::NEG_INFINITY {
        let mut best = 0.0_f64;
        for &(p, g) in &pairs {
            if g <= LOG_CUTOFF {
                continue;
            }
            if p <= LOG_CUTOFF {
                return Ok(f64::INFINITY);
            }
            best = best.max(g / p);
        }
        return Ok(if best > 0.0 { best.ln().max(0.0) } else { 0.0 });
    }
    if alpha == 0.0 {
        let weight: f64 = pairs
            .iter()
            .filter(|&&(p, _)| p > LOG_CUTOFF)
            .map(|&(_, g)| g)
            .sum();
        return Ok(if weight > 0.0 {
            (-weight.ln()).max(0.0)
        } else {
            f64::INFINITY
        });
    }

    let mut sum = 0.0_f64;
    for &(p, g) in &pairs {
        let p_zero = p <= LOG_CUTOFF;
        let g_zero = g <= LOG_CUTOFF;
        if p_zero && g_zero {
            continue;
        }
        if alpha > 1.0 && g_zero && !p_zero {
            return Ok(f64::INFINITY);
        }
        if alpha < 0.0 && p_zero && !g_zero {
            return Ok(f64::INFINITY);
        }
        if p_zero || g_zero {
            continue;
        }
        sum += p.powf(alpha) * g.powf(1.0 - alpha);
    }
    if sum <= 0.0 {
        return Ok(f64::INFINITY);
    }
    let value = alpha.signum() / (alpha - 1.0) * sum.ln();
    Ok(if value < 0.0 && value > -1e-9 { 0.0 } else { value })
}

/// Upper bound 32 ‖H‖∞² √eps on the QFI difference of two states at
/// trace distance eps.
pub fn qfi_continuity_bound(h: &Hamiltonian, eps: f64) -> f64 {
    assert!(eps >= 0.0, "trace-distance argument must be nonnegative");
    let norm = h.inf_norm_f64();
    32.0 * norm * norm * eps.sqrt()
}

/// Bundle of monotone values for one state against the Gibbs state of
/// its own Hamiltonian at inverse temperature β.
#[derive(Debug, Clone)]
pub struct MonotoneReport {
    pub qfi: f64,
    pub relative_entropy: f64,
    pub renyi_values: BTreeMap<String, f64>,
    pub beta: f64,
}

/// Evaluates QFI, relative entropy to the Gibbs state, and (for states
/// commuting with H) the requested Rényi orders.
pub fn monotone_report(rho: &DensityMatrix, beta: f64, alphas: &[f64]) -> Result<MonotoneReport> {
    let ctx = GibbsContext::new(beta, rho.hamiltonian().clone())?;
    let gamma = gibbs_state(&ctx);
    let mut renyi_values = BTreeMap::new();
    for &alpha in alphas {
        if let Ok(v) = renyi_free_energy(rho, &gamma, alpha) {
            renyi_values.insert(format!("{alpha}"), v);
        }
    }
    Ok(MonotoneReport {
        qfi: qfi(rho),
        relative_entropy: relative_entropy(rho, &gamma)?,
        renyi_values,
        beta,
    })
}

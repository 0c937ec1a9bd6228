//! Catalytic convertibility verdicts and catalyst instance checking.
//!
//! The decidable criteria: inclusion of reachable coherence lattices
//! certifies that a conversion is achievable with approximate
//! catalysis, and coherence cannot be created from an incoherent
//! state (so incoherent → coherent is forbidden outright). Everything
//! else is reported as unknown rather than guessed.
//!
//! Catalyst search is out of scope; supplied instances (channel,
//! catalyst, target) are verified against the approximate and
//! correlated catalysis conditions, and a quantitative obstruction
//! bounds the achievable accuracy of any catalyst with a bounded
//! Hamiltonian.

use crate::channels::Channel;
use crate::coherence::{
    available_coherences, lattice_subset, reachable_lattice, DEFAULT_COHERENCE_TOL,
};
use crate::error::{Error, Result};
use crate::gibbs::{gibbs_state, GibbsContext};
use crate::linalg::trace_norm;
use crate::monotones::{qfi, relative_entropy};
use crate::state::{partial_trace, tensor_state, DensityMatrix};

/// Tolerance at which the exact catalyst-return condition μ_C = τ is
/// enforced, deliberately separate from the user-facing eps.
pub const CATALYST_MARGINAL_TOL: f64 = 1e-9;

/// Slack for the free-energy comparison in the conjectured criterion.
const FREE_ENERGY_SLACK: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VerdictStatus {
    Convertible,
    Forbidden,
    Unknown,
}

impl VerdictStatus {
    pub fn as_str(&self) -> &'static str {
        match self {
            VerdictStatus::Convertible => "convertible",
            VerdictStatus::Forbidden => "forbidden",
            VerdictStatus::Unknown => "unknown",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VerdictReason {
    /// The target's reachable coherence lattice is contained in the
    /// input's, which certifies convertibility under approximate
    /// catalysis.
    LatticeInclusion,
    /// The input is incoherent and the target is not; no catalytic
    /// protocol can create coherence.
    NoBroadcasting,
    /// Neither decidable criterion applies.
    InsufficientCriteria,
}

impl VerdictReason {
    pub fn as_str(&self) -> &'static str {
        match self {
            VerdictReason::LatticeInclusion => "lattice-inclusion",
            VerdictReason::NoBroadcasting => "no-broadcasting",
            VerdictReason::InsufficientCriteria => "insufficient-criteria",
        }
    }
}

/// Three-valued convertibility verdict. Constructors keep status and
/// reason paired: convertible is always justified by lattice
/// inclusion, forbidden always by no-broadcasting.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CatalysisVerdict {
    status: VerdictStatus,
    reason: VerdictReason,
}

impl CatalysisVerdict {
    fn convertible() -> Self {
        Self {
            status: VerdictStatus::Convertible,
            reason: VerdictReason::LatticeInclusion,
        }
    }

    fn forbidden() -> Self {
        Self {
            status: VerdictStatus::Forbidden,
            reason: VerdictReason::NoBroadcasting,
        }
    }

    fn unknown() -> Self {
        Self {
            status: VerdictStatus::Unknown,
            reason: VerdictReason::InsufficientCriteria,
        }
    }

    pub fn status(&self) -> VerdictStatus {
        self.status
    }

    pub fn reason(&self) -> VerdictReason {
        self.reason
    }
}

impl std::fmt::Display for CatalysisVerdict {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{} ({})", self.status.as_str(), self.reason.as_str())
    }
}

/// Decides convertibility of ρ into σ under approximate catalysis
/// from the decidable coherence criteria alone.
///
/// Convertible when the reachable lattice of σ is contained in that
/// of ρ; forbidden when ρ is incoherent but σ is not; unknown
/// otherwise. `tol` is the entry-magnitude threshold used to read off
/// the available coherences.
pub fn convertibility_verdict(
    rho: &DensityMatrix,
    sigma: &DensityMatrix,
    tol: f64,
) -> CatalysisVerdict {
    let coh_in = available_coherences(rho, tol);
    let coh_out = available_coherences(sigma, tol);
    let lat_in = reachable_lattice(&coh_in);
    let lat_out = reachable_lattice(&coh_out);
    if lattice_subset(&lat_out, &lat_in) {
        return CatalysisVerdict::convertible();
    }
    if coh_in.is_trivial() && !coh_out.is_trivial() {
        return CatalysisVerdict::forbidden();
    }
    CatalysisVerdict::unknown()
}

/// Evaluates the conjectured exact criterion for catalytic
/// convertibility at inverse temperature `beta`: the free-energy
/// inequality S(ρ‖γ) ≥ S(σ‖γ) together with reachable-lattice
/// inclusion. The result is a conjectural indicator, not a proven
/// verdict; callers surfacing it should label it as such.
pub fn conjectured_convertible(
    rho: &DensityMatrix,
    sigma: &DensityMatrix,
    beta: f64,
) -> Result<bool> {
    let gamma_in = gibbs_state(&GibbsContext::new(beta, rho.hamiltonian().clone())?);
    let gamma_out = gibbs_state(&GibbsContext::new(beta, sigma.hamiltonian().clone())?);
    let s_in = relative_entropy(rho, &gamma_in)?;
    let s_out = relative_entropy(sigma, &gamma_out)?;
    let free_energy_ok = s_in >= s_out - FREE_ENERGY_SLACK;
    let lat_in = reachable_lattice(&available_coherences(rho, DEFAULT_COHERENCE_TOL));
    let lat_out = reachable_lattice(&available_coherences(sigma, DEFAULT_COHERENCE_TOL));
    Ok(free_energy_ok && lattice_subset(&lat_out, &lat_in))
}

/// Quantitative no-go data for catalysts with a bounded Hamiltonian.
#[derive(Debug, Clone, PartialEq)]
pub struct ObstructionReport {
    /// Quantum Fisher information of the input state.
    pub qfi_in: f64,
    /// Quantum Fisher information of the target state.
    pub qfi_out: f64,
    /// Sup-norm of the input system Hamiltonian.
    pub h_norm: f64,
    /// Assumed bound on the catalyst Hamiltonian's sup-norm.
    pub m_bound: f64,
    /// When the target QFI exceeds the input QFI: a lower bound on the
    /// marginal error any approximate-catalysis protocol with such a
    /// bounded catalyst must incur. Absent means no obstruction from
    /// this criterion.
    pub eps_star: Option<f64>,
}

/// Computes the bounded-catalyst obstruction for converting ρ into σ.
///
/// A QFI gain of Δ with system norm h and catalyst bound M forces any
/// approximate-catalysis error to satisfy 32√ε·(h + M)² ≥ Δ, i.e.
/// ε ≥ (Δ / (32 (h + M)²))².
pub fn bounded_catalyst_obstruction(
    rho: &DensityMatrix,
    sigma: &DensityMatrix,
    m_bound: f64,
) -> Result<ObstructionReport> {
    if !(m_bound > 0.0) || !m_bound.is_finite() {
        return Err(Error::InvalidParameter {
            name: "m_bound",
            reason: "catalyst Hamiltonian bound must be a positive finite number".to_string(),
        });
    }
    let qfi_in = qfi(rho);
    let qfi_out = qfi(sigma);
    let h_norm = rho.hamiltonian().inf_norm_f64();
    let eps_star = if qfi_out > qfi_in {
        let denom = 32.0 * (h_norm + m_bound).powi(2);
        Some(((qfi_out - qfi_in) / denom).powi(2))
    } else {
        None
    };
    Ok(ObstructionReport {
        qfi_in,
        qfi_out,
        h_norm,
        m_bound,
        eps_star,
    })
}

struct CatalysisInstance {
    joint_out: DensityMatrix,
    out_factors: [crate::hamiltonian::Hamiltonian; 2],
}

fn run_instance(
    lam: &Channel,
    rho: &DensityMatrix,
    tau: &DensityMatrix,
    sigma: &DensityMatrix,
    eps: f64,
) -> Result<CatalysisInstance> {
    if !(eps > 0.0) || !eps.is_finite() {
        return Err(Error::InvalidParameter {
            name: "eps",
            reason: "catalysis accuracy must be a positive finite number".to_string(),
        });
    }
    let expected_out = crate::hamiltonian::tensor_hamiltonian(sigma.hamiltonian(), tau.hamiltonian());
    if lam.h_out() != &expected_out {
        return Err(Error::HamiltonianMismatch {
            context: "channel output must be the target system joined with the catalyst",
        });
    }
    let joint_in = tensor_state(rho, tau);
    let joint_out = lam.apply(&joint_in)?;
    Ok(CatalysisInstance {
        joint_out,
        out_factors: [sigma.hamiltonian().clone(), tau.hamiltonian().clone()],
    })
}

fn catalyst_returned(inst: &CatalysisInstance, tau: &DensityMatrix) -> Result<bool> {
    let mu_c = partial_trace(&inst.joint_out, &inst.out_factors, &[1])?;
    Ok(trace_norm(&(mu_c.entries() - tau.entries())) < CATALYST_MARGINAL_TOL)
}

/// Verifies an approximate-catalysis instance: the channel must return
/// the catalyst marginal exactly (within 1e-9) and bring the full
/// system+catalyst output within `eps` of σ⊗τ in trace norm.
pub fn check_approx_catalysis_instance(
    lam: &Channel,
    rho: &DensityMatrix,
    tau: &DensityMatrix,
    sigma: &DensityMatrix,
    eps: f64,
) -> Result<bool> {
    let inst = run_instance(lam, rho, tau, sigma, eps)?;
    if !catalyst_returned(&inst, tau)? {
        return Ok(false);
    }
    let product = tensor_state(sigma, tau);
    Ok(trace_norm(&(inst.joint_out.entries() - product.entries())) < eps)
}

/// Verifies a correlated-catalysis instance: the catalyst marginal
/// must return exactly (within 1e-9) while only the system marginal
/// has to be within `eps` of σ; correlations with the catalyst are
/// allowed to survive.
pub fn check_correlated_catalysis_instance(
    lam: &Channel,
    rho: &DensityMatrix,
    tau: &DensityMatrix,
    sigma: &DensityMatrix,
    eps: f64,
) -> Result<bool> {
    let inst = run_instance(lam, rho, tau, sigma, eps)?;
    if !catalyst_returned(&inst, tau)? {
        return Ok(false);
    }
    let mu_s = partial_trace(&inst.joint_out, &inst.out_factors, &[0])?;
    Ok(trace_norm(&(mu_s.entries() - sigma.entries())) < eps)
}

//! Exact coherence bookkeeping, asymmetry and free-energy monotones,
//! covariance/thermality checks, and catalytic-conversion verdicts for
//! finite-dimensional quantum systems with rational energy levels.
//!
//! Energies and energy differences are exact rationals throughout, so
//! mode structure and lattice questions are decided exactly; state
//! entries and spectral quantities are floating point.

pub mod channels;
pub mod catalysis;
pub mod coherence;
pub mod error;
pub mod feasibility;
pub mod gibbs;
pub mod hamiltonian;
pub mod linalg;
pub mod modes;
pub mod monotones;
pub mod protocol;
pub mod rational;
pub mod state;

#[cfg(feature = "testkit")]
pub mod testkit;

pub use error::{Error, Result};
pub use hamiltonian::{tensor_hamiltonian, Hamiltonian};
pub use linalg::{trace_norm, CMatrix, CVector};
pub use state::{
    maximally_mixed, partial_trace, plus_state, pure_state, tensor_power, tensor_state,
    time_evolve, validate_state, DensityMatrix, DEFAULT_TOL,
};
pub use gibbs::{gibbs_state, GibbsContext};
pub use modes::{mode_decompose, mode_decompose_matrix, ModeDecomposition};
pub use coherence::{
    available_coherences, lattice_member, lattice_subset, reachable_lattice, CoherenceSet,
    Lattice, DEFAULT_COHERENCE_TOL,
};
pub use monotones::{
    monotone_report, qfi, qfi_continuity_bound, relative_entropy, renyi_free_energy,
    MonotoneReport,
};
pub use channels::{
    apply_choi, covariance_violation, energy_preserving_unitary_check, gibbs_violation,
    is_covariant, is_gibbs_preserving, random_covariant_channel, tensor_channels,
    thermal_operation, Channel, CHANNEL_TOL,
};
pub use feasibility::{
    covariant_convertible, Certificate, FeasibilityStatus, FeasibilityVerdict,
    DEFAULT_FEASIBILITY_MAX_ITER, DEFAULT_FEASIBILITY_TOL,
};
pub use protocol::{
    budget_for_target, compose_marginal_protocols, compose_params, simulate_marginal_protocol,
    BudgetSplit, MarginalChannel, ProtocolParams, ProtocolSpec, SIMULATION_DIM_CAP,
};
pub use catalysis::{
    bounded_catalyst_obstruction, check_approx_catalysis_instance,
    check_correlated_catalysis_instance, conjectured_convertible, convertibility_verdict,
    CatalysisVerdict, ObstructionReport, VerdictReason, VerdictStatus, CATALYST_MARGINAL_TOL,
};

//! Many-copy conversion protocols with per-marginal error guarantees.
//!
//! A protocol consumes n copies of an input state, produces m copies
//! of a target, and promises each single-copy output marginal lies
//! within trace-norm eps of the target, with copy survival rate
//! m/n ≥ 1 − delta. Two such protocols compose: running the first on
//! blocks of copies, regrouping, then running the second yields
//! parameters (n₁n₂, m₁m₂, n₂ε₁ + ε₂, 1 − (1−δ₁)(1−δ₂)).
//!
//! Channels over copy blocks are kept as a structural tree rather than
//! a dense Choi on the full n-copy space, so composed parameter
//! bookkeeping stays exact at any size while simulation is capped by
//! the dimension of the full input space.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::channels::Channel;
use crate::error::{Error, Result};
use crate::hamiltonian::Hamiltonian;
use crate::linalg::{hermitian_part, permute_factors, trace_norm, CMatrix};
use crate::rational::rational_to_f64;
use crate::state::{partial_trace, tensor_power, DensityMatrix};

/// Largest full input-space dimension `simulate_marginal_protocol`
/// will materialize.
pub const SIMULATION_DIM_CAP: usize = 4096;

fn ratio(n: u64, d: u64) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

/// Exact numeric parameters (n, m, eps, delta) of a marginal protocol.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ProtocolParams {
    n: u64,
    m: u64,
    eps: BigRational,
    delta: BigRational,
}

impl ProtocolParams {
    /// Validates n ≥ 1, 1 ≤ m ≤ n, eps ≥ 0, delta ∈ [0, 1], and the
    /// rate guarantee m/n ≥ 1 − delta.
    pub fn new(n: u64, m: u64, eps: BigRational, delta: BigRational) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidParameter {
                name: "n".into(),
                reason: "protocol must consume at least one copy".into(),
            });
        }
        if m == 0 || m > n {
            return Err(Error::InvalidParameter {
                name: "m".into(),
                reason: format!("output copy count must satisfy 1 <= m <= n, got m={m}, n={n}"),
            });
        }
        if eps.is_negative() {
            return Err(Error::InvalidParameter {
                name: "eps".into(),
                reason: "marginal error must be nonnegative".into(),
            });
        }
        if delta.is_negative() || delta > BigRational::one() {
            return Err(Error::InvalidParameter {
                name: "delta".into(),
                reason: "copy loss rate must lie in [0, 1]".into(),
            });
        }
        if ratio(m, n) < BigRational::one() - &delta {
            return Err(Error::InvalidParameter {
                name: "delta".into(),
                reason: format!("rate guarantee violated: m/n = {m}/{n} < 1 - delta"),
            });
        }
        Ok(Self { n, m, eps, delta })
    }

    pub fn n(&self) -> u64 {
        self.n
    }

    pub fn m(&self) -> u64 {
        self.m
    }

    pub fn eps(&self) -> &BigRational {
        &self.eps
    }

    pub fn delta(&self) -> &BigRational {
        &self.delta
    }

    pub fn eps_f64(&self) -> f64 {
        rational_to_f64(&self.eps)
    }

    pub fn delta_f64(&self) -> f64 {
        rational_to_f64(&self.delta)
    }

    /// Copy survival rate m/n.
    pub fn rate(&self) -> BigRational {
        ratio(self.m, self.n)
    }
}

/// Exact parameter arithmetic for running `first` blockwise and then
/// `second` on the regrouped outputs.
pub fn compose_params(first: &ProtocolParams, second: &ProtocolParams) -> Result<ProtocolParams> {
    let n = first.n.checked_mul(second.n).ok_or_else(|| Error::InvalidParameter {
        name: "n".into(),
        reason: "composed copy count overflows u64".into(),
    })?;
    let m = first.m.checked_mul(second.m).ok_or_else(|| Error::InvalidParameter {
        name: "m".into(),
        reason: "composed copy count overflows u64".into(),
    })?;
    let eps = ratio(second.n, 1) * &first.eps + &second.eps;
    let one = BigRational::one();
    let delta = &one - (&one - &first.delta) * (&one - &second.delta);
    ProtocolParams::new(n, m, eps, delta)
}

/// Error budget split for hitting (eps, delta) overall when the
/// second stage consumes n₂ copies per block.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BudgetSplit {
    pub eps1: BigRational,
    pub eps2: BigRational,
    pub delta1: BigRational,
    pub delta2: BigRational,
}

/// Splits a target (eps, delta) between two stages so their
/// composition meets it: ε₁ = ε/(2n₂), ε₂ = ε/2, δ₁ = δ₂ = δ/2.
pub fn budget_for_target(eps: &BigRational, delta: &BigRational, n2: u64) -> Result<BudgetSplit> {
    if eps.is_negative() {
        return Err(Error::InvalidParameter {
            name: "eps".into(),
            reason: "target error must be nonnegative".into(),
        });
    }
    if delta.is_negative() || delta > &BigRational::one() {
        return Err(Error::InvalidParameter {
            name: "delta".into(),
            reason: "target loss rate must lie in [0, 1]".into(),
        });
    }
    if n2 == 0 {
        return Err(Error::InvalidParameter {
            name: "n2".into(),
            reason: "second stage must consume at least one copy".into(),
        });
    }
    let half = ratio(1, 2);
    Ok(BudgetSplit {
        eps1: eps * &half / ratio(n2, 1),
        eps2: eps * &half,
        delta1: delta * &half,
        delta2: delta * half,
    })
}

#[derive(Debug, Clone)]
enum MarginalKind {
    Block(Box<Channel>),
    Composed {
        first: Box<MarginalChannel>,
        second: Box<MarginalChannel>,
    },
}

/// A channel from n copies of one system to m copies of another, kept
/// structurally: either a dense block channel or the composition of
/// two marginal channels via blockwise application and regrouping.
#[derive(Debug, Clone)]
pub struct MarginalChannel {
    kind: MarginalKind,
    n: usize,
    m: usize,
    h_copy_in: Hamiltonian,
    h_copy_out: Hamiltonian,
}

impl MarginalChannel {
    /// Wraps a dense channel acting on n input copies and producing
    /// m output copies. The channel's endpoint Hamiltonians must be
    /// the exact tensor powers of the per-copy ones.
    pub fn block(
        channel: Channel,
        h_copy_in: Hamiltonian,
        h_copy_out: Hamiltonian,
        n: usize,
        m: usize,
    ) -> Result<Self> {
        if n == 0 || m == 0 || m > n {
            return Err(Error::InvalidParameter {
                name: "m".into(),
                reason: format!("copy counts must satisfy 1 <= m <= n, got m={m}, n={n}"),
            });
        }
        if channel.h_in() != &h_copy_in.tensor_power(n)? {
            return Err(Error::HamiltonianMismatch {
                context: "block channel input is not the declared copy tensor power".into(),
            });
        }
        if channel.h_out() != &h_copy_out.tensor_power(m)? {
            return Err(Error::HamiltonianMismatch {
                context: "block channel output is not the declared copy tensor power".into(),
            });
        }
        Ok(Self {
            kind: MarginalKind::Block(Box::new(channel)),
            n,
            m,
            h_copy_in,
            h_copy_out,
        })
    }

    /// The do-nothing protocol channel on one copy.
    pub fn identity(h: &Hamiltonian) -> Self {
        Self {
            kind: MarginalKind::Block(Box::new(Channel::identity(h))),
            n: 1,
            m: 1,
            h_copy_in: h.clone(),
            h_copy_out: h.clone(),
        }
    }

    /// Blockwise-then-regroup composition: `first` runs on each of
    /// second.n blocks of first.n copies, its m₁-copy outputs are
    /// regrouped into m₁ blocks of second.n copies, and `second` runs
    /// on each of those.
    pub fn composed(first: MarginalChannel, second: MarginalChannel) -> Result<Self> {
        if first.h_copy_out != second.h_copy_in {
            return Err(Error::HamiltonianMismatch {
                context: "composition requires the first stage's output copies to feed the second stage".into(),
            });
        }
        let n = first
            .n
            .checked_mul(second.n)
            .ok_or_else(|| Error::InvalidParameter {
                name: "n".into(),
                reason: "composed copy count overflows usize".into(),
            })?;
        let m = first
            .m
            .checked_mul(second.m)
            .ok_or_else(|| Error::InvalidParameter {
                name: "m".into(),
                reason: "composed copy count overflows usize".into(),
            })?;
        let h_copy_in = first.h_copy_in.clone();
        let h_copy_out = second.h_copy_out.clone();
        Ok(Self {
            kind: MarginalKind::Composed {
                first: Box::new(first),
                second: Box::new(second),
            },
            n,
            m,
            h_copy_in,
            h_copy_out,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn h_copy_in(&self) -> &Hamiltonian {
        &self.h_copy_in
    }

    pub fn h_copy_out(&self) -> &Hamiltonian {
        &self.h_copy_out
    }

    /// Applies the channel to a state on exactly n copies of the
    /// per-copy input system.
    pub fn apply_to_copies(&self, state: &DensityMatrix) -> Result<DensityMatrix> {
        if state.hamiltonian() != &self.h_copy_in.tensor_power(self.n)? {
            return Err(Error::HamiltonianMismatch {
                context: "protocol input is not the expected copy tensor power".into(),
            });
        }
        let dims = vec![self.h_copy_in.dimension(); self.n];
        let (out, out_dims) = self.apply_at(state.entries().clone(), dims, 0);
        debug_assert_eq!(out_dims, vec![self.h_copy_out.dimension(); self.m]);
        let h_out = self.h_copy_out.tensor_power(self.m)?;
        Ok(DensityMatrix::from_valid_parts(
            hermitian_part(&out),
            h_out,
            state.tolerance(),
        ))
    }

    /// Applies this channel to the factor window starting at `start`
    /// (the window spans this channel's n copies), returning the new
    /// global matrix and factor dimension list.
    fn apply_at(&self, state: CMatrix, dims: Vec<usize>, start: usize) -> (CMatrix, Vec<usize>) {
        match &self.kind {
            MarginalKind::Block(channel) => {
                let out_dims = vec![self.h_copy_out.dimension(); self.m];
                apply_choi_to_window(
                    &state,
                    &dims,
                    start,
                    self.n,
                    channel.choi(),
                    channel.d_out(),
                    &out_dims,
                )
            }
            MarginalKind::Composed { first, second } => {
                let m1 = first.m;
                let n2 = second.n;
                // First stage, blockwise. Applying at a fixed position
                // shrinks the window, so successive blocks start at
                // stride m1 over already-processed ground.
                let mut cur = state;
                let mut cur_dims = dims;
                for b in 0..n2 {
                    let (next, next_dims) = first.apply_at(cur, cur_dims, start + b * m1);
                    cur = next;
                    cur_dims = next_dims;
                }
                // Regroup: the window now holds n2 blocks of m1 copies
                // (block b, member i at start + b*m1 + i); the second
                // stage needs m1 blocks of n2 copies (member i, block
                // b at start + i*n2 + b).
                let window = m1 * n2;
                let mut perm: Vec<usize> = (0..cur_dims.len()).collect();
                for i in 0..m1 {
                    for b in 0..n2 {
                        perm[start + i * n2 + b] = start + b * m1 + i;
                    }
                }
                let regrouped = permute_factors(&cur, &cur_dims, &perm);
                let mut regrouped_dims = cur_dims.clone();
                for (j, slot) in regrouped_dims[start..start + window].iter_mut().enumerate() {
                    *slot = cur_dims[perm[start + j]];
                }
                // Second stage, blockwise over the regrouped blocks.
                let m2 = second.m;
                let mut cur = regrouped;
                let mut cur_dims = regrouped_dims;
                for i in 0..m1 {
                    let (next, next_dims) = second.apply_at(cur, cur_dims, start + i * m2);
                    cur = next;
                    cur_dims = next_dims;
                }
                (cur, cur_dims)
            }
        }
    }
}

/// Contracts a Choi operator against a contiguous factor window of a
/// multi-factor matrix, leaving the surrounding factors untouched.
fn apply_choi_to_window(
    state: &CMatrix,
    dims: &[usize],
    start: usize,
    count: usize,
    choi: &CMatrix,
    d_out: usize,
    out_dims: &[usize],
) -> (CMatrix, Vec<usize>) {
    let d_left: usize = dims[..start].iter().product();
    let d_mid: usize = dims[start..start + count].iter().product();
    let d_right: usize = dims[start + count..].iter().product();
    debug_assert_eq!(d_left * d_mid * d_right, state.nrows());
    debug_assert_eq!(choi.nrows(), d_mid * d_out);

    let total_out = d_left * d_out * d_right;
    let mut out = CMatrix::zeros(total_out, total_out);
    for b in 0..d_mid {
        for bp in 0..d_mid {
            for k in 0..d_out {
                for l in 0..d_out {
                    let w = choi[(b * d_out + k, bp * d_out + l)];
                    if w.re == 0.0 && w.im == 0.0 {
                        continue;
                    }
                    for a in 0..d_left {
                        let in_row_base = (a * d_mid + b) * d_right;
                        let out_row_base = (a * d_out + k) * d_right;
                        for ap in 0..d_left {
                            let in_col_base = (ap * d_mid + bp) * d_right;
                            let out_col_base = (ap * d_out + l) * d_right;
                            for c in 0..d_right {
                                for cp in 0..d_right {
                                    out[(out_row_base + c, out_col_base + cp)] +=
                                        w * state[(in_row_base + c, in_col_base + cp)];
                                }
                            }
                        }
                    }
                }
            }
        }
    }
    let mut new_dims = Vec::with_capacity(dims.len() - count + out_dims.len());
    new_dims.extend_from_slice(&dims[..start]);
    new_dims.extend_from_slice(out_dims);
    new_dims.extend_from_slice(&dims[start + count..]);
    (out, new_dims)
}

/// A marginal protocol: the channel, its declared exact parameters,
/// and the per-copy target state.
#[derive(Debug, Clone)]
pub struct ProtocolSpec {
    channel: MarginalChannel,
    params: ProtocolParams,
    target: DensityMatrix,
}

impl ProtocolSpec {
    /// Bundles a channel with declared error parameters and a target.
    /// The target must live on the channel's per-copy output system.
    pub fn new(
        channel: MarginalChannel,
        eps: BigRational,
        delta: BigRational,
        target: DensityMatrix,
    ) -> Result<Self> {
        if target.hamiltonian() != channel.h_copy_out() {
            return Err(Error::HamiltonianMismatch {
                context: "protocol target must live on the per-copy output system".into(),
            });
        }
        let params = ProtocolParams::new(channel.n() as u64, channel.m() as u64, eps, delta)?;
        Ok(Self {
            channel,
            params,
            target,
        })
    }

    /// The do-nothing protocol: one copy in, the same copy out,
    /// eps = delta = 0.
    pub fn identity(target: DensityMatrix) -> Self {
        let channel = MarginalChannel::identity(target.hamiltonian());
        let params = ProtocolParams::new(1, 1, BigRational::zero(), BigRational::zero())
            .expect("identity parameters are valid");
        Self {
            channel,
            params,
            target,
        }
    }

    pub fn channel(&self) -> &MarginalChannel {
        &self.channel
    }

    pub fn params(&self) -> &ProtocolParams {
        &self.params
    }

    pub fn target(&self) -> &DensityMatrix {
        &self.target
    }
}

/// Composes two marginal protocols. The first stage's target must be
/// the second stage's per-copy input, and parameters compose exactly:
/// n = n₁n₂, m = m₁m₂, eps = n₂ε₁ + ε₂, delta = 1 − (1−δ₁)(1−δ₂).
pub fn compose_marginal_protocols(
    first: &ProtocolSpec,
    second: &ProtocolSpec,
) -> Result<ProtocolSpec> {
    if first.target.hamiltonian() != second.channel.h_copy_in() {
        return Err(Error::HamiltonianMismatch {
            context: "first stage's target system must match the second stage's input copies"
                .into(),
        });
    }
    let channel = MarginalChannel::composed(first.channel.clone(), second.channel.clone())?;
    let params = compose_params(&first.params, &second.params)?;
    Ok(ProtocolSpec {
        channel,
        params,
        target: second.target.clone(),
    })
}

/// Runs a protocol on n copies of `input` and returns the trace-norm
/// distance of each output copy's marginal from the target.
///
/// Materializes the full n-copy input, so the input-space dimension
/// is capped at `SIMULATION_DIM_CAP`.
pub fn simulate_marginal_protocol(spec: &ProtocolSpec, input: &DensityMatrix) -> Result<Vec<f64>> {
    if input.hamiltonian() != spec.channel.h_copy_in() {
        return Err(Error::HamiltonianMismatch {
            context: "simulation input must live on the per-copy input system".into(),
        });
    }
    let n = spec.channel.n();
    let d = input.dimension();
    let required = d.checked_pow(n as u32).ok_or(Error::DimensionCapExceeded {
        required: usize::MAX,
        cap: SIMULATION_DIM_CAP,
    })?;
    if required > SIMULATION_DIM_CAP {
        return Err(Error::DimensionCapExceeded {
            required,
            cap: SIMULATION_DIM_CAP,
        });
    }
    let many = tensor_power(input, n)?;
    let out = spec.channel.apply_to_copies(&many)?;
    let m = spec.channel.m();
    let factors = vec![spec.channel.h_copy_out().clone(); m];
    let mut errors = Vec::with_capacity(m);
    for copy in 0..m {
        let marginal = partial_trace(&out, &factors, &[copy])?;
        errors.push(trace_norm(
            &(marginal.entries() - spec.target.entries()),
        ));
    }
    Ok(errors)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channels::Channel;
    use crate::linalg::cplx;
    use crate::state::{maximally_mixed, plus_state};

    fn qubit_h() -> Hamiltonian {
        Hamiltonian::from_integers(&[0, 1])
    }

    fn rat(n: i64, d: i64) -> BigRational {
        BigRational::new(BigInt::from(n), BigInt::from(d))
    }

    fn dephase_protocol(s_num: i64, s_den: i64, declared_eps: BigRational) -> ProtocolSpec {
        let h = qubit_h();
        let strength = s_num as f64 / s_den as f64;
        let channel = Channel::partial_dephasing(&h, strength).unwrap();
        let marginal = MarginalChannel::block(channel, h.clone(), h.clone(), 1, 1).unwrap();
        let target = plus_state(0, 1, &h).unwrap();
        ProtocolSpec::new(marginal, declared_eps, BigRational::zero(), target).unwrap()
    }

    #[test]
    fn params_validate_rate_guarantee() {
        assert!(ProtocolParams::new(4, 3, rat(1, 10), rat(1, 4)).is_ok());
        let err = ProtocolParams::new(4, 2, rat(1, 10), rat(1, 4)).unwrap_err();
        assert!(matches!(err, Error::InvalidParameter { .. }));
        assert!(ProtocolParams::new(4, 0, rat(0, 1), rat(0, 1)).is_err());
        assert!(ProtocolParams::new(0, 1, rat(0, 1), rat(0, 1)).is_err());
        assert!(ProtocolParams::new(1, 1, rat(-1, 10), rat(0, 1)).is_err());
        assert!(ProtocolParams::new(1, 1, rat(0, 1), rat(3, 2)).is_err());
    }

    #[test]
    fn compose_params_is_exact_and_associative() {
        let p1 = ProtocolParams::new(10, 9, rat(1, 100), rat(1, 10)).unwrap();
        let p2 = ProtocolParams::new(20, 18, rat(1, 50), rat(1, 10)).unwrap();
        let p3 = ProtocolParams::new(3, 3, rat(1, 200), rat(0, 1)).unwrap();
        let c12 = compose_params(&p1, &p2).unwrap();
        assert_eq!(c12.n(), 200);
        assert_eq!(c12.m(), 162);
        assert_eq!(c12.eps(), &(rat(20, 100) + rat(1, 50)));
        assert_eq!(c12.delta(), &(rat(1, 1) - rat(9, 10) * rat(9, 10)));
        let left = compose_params(&c12, &p3).unwrap();
        let right = compose_params(&p1, &compose_params(&p2, &p3).unwrap()).unwrap();
        assert_eq!(left, right);
    }

    #[test]
    fn budget_split_composes_within_target() {
        let eps = rat(11, 50);
        let delta = rat(1, 5);
        let n2 = 20u64;
        let split = budget_for_target(&eps, &delta, n2).unwrap();
        let composed_eps = ratio(n2, 1) * &split.eps1 + &split.eps2;
        assert!(composed_eps <= eps);
        let one = BigRational::one();
        let composed_delta = &one - (&one - &split.delta1) * (&one - &split.delta2);
        assert!(composed_delta <= delta);
    }

    #[test]
    fn identity_protocol_reports_zero_error() {
        let h = qubit_h();
        let plus = plus_state(0, 1, &h).unwrap();
        let spec = ProtocolSpec::identity(plus.clone());
        let errors = simulate_marginal_protocol(&spec, &plus).unwrap();
        assert_eq!(errors.len(), 1);
        assert!(errors[0] < 1e-12);
    }

    #[test]
    fn composition_with_identity_preserves_params_and_errors() {
        let p1 = dephase_protocol(1, 10, rat(1, 10));
        let id = ProtocolSpec::identity(p1.target().clone());
        let composed = compose_marginal_protocols(&p1, &id).unwrap();
        assert_eq!(composed.params().n(), 1);
        assert_eq!(composed.params().m(), 1);
        assert_eq!(composed.params().eps(), p1.params().eps());
        assert_eq!(composed.params().delta(), p1.params().delta());
        let h = qubit_h();
        let plus = plus_state(0, 1, &h).unwrap();
        let e_alone = simulate_marginal_protocol(&p1, &plus).unwrap();
        let e_composed = simulate_marginal_protocol(&composed, &plus).unwrap();
        assert!((e_alone[0] - e_composed[0]).abs() < 1e-12);
    }

    #[test]
    fn dephasing_stage_error_matches_strength() {
        let p = dephase_protocol(1, 10, rat(1, 10));
        let h = qubit_h();
        let plus = plus_state(0, 1, &h).unwrap();
        let errors = simulate_marginal_protocol(&p, &plus).unwrap();
        // |+> loses exactly s of its off-diagonal pair under strength-s
        // dephasing, so the trace distance is exactly s.
        assert!((errors[0] - 0.1).abs() < 1e-12);
    }

    #[test]
    fn composed_dephasings_meet_composed_budget() {
        let p1 = dephase_protocol(1, 20, rat(1, 20));
        let p2 = dephase_protocol(1, 25, rat(1, 25));
        let composed = compose_marginal_protocols(&p1, &p2).unwrap();
        assert_eq!(composed.params().eps(), &(rat(1, 20) + rat(1, 25)));
        let h = qubit_h();
        let plus = plus_state(0, 1, &h).unwrap();
        let errors = simulate_marginal_protocol(&composed, &plus).unwrap();
        // Sequential dephasings multiply the coherence loss factors:
        // measured error is s1 + s2 - s1*s2, strictly inside the
        // composed budget n2*eps1 + eps2.
        let expected = 0.05 + 0.04 - 0.05 * 0.04;
        assert!((errors[0] - expected).abs() < 1e-12);
        assert!(errors[0] <= composed.params().eps_f64());
    }

    #[test]
    fn blockwise_composition_rearranges_copies_correctly() {
        // First stage: 2 copies -> 1 copy by tracing out the second.
        // Second stage: identity on 1 copy. Composed over n2 = 2
        // blocks: 4 copies in, 2 out, output copy i is the marginal of
        // input copy 2i.
        let h = qubit_h();
        let h2 = h.tensor_power(2).unwrap();
        let d = 2usize;
        let mut choi = CMatrix::zeros(8, 8);
        // Tracing the second factor: J[(i1 i2, k), (j1 j2, l)] =
        // delta_{i1 k} delta_{j1 l} delta_{i2 j2}.
        for i1 in 0..d {
            for i2 in 0..d {
                for j1 in 0..d {
                    let row = (i1 * d + i2) * d + i1;
                    let col = (j1 * d + i2) * d + j1;
                    choi[(row, col)] += cplx(1.0, 0.0);
                }
            }
        }
        let trace_out = Channel::new(choi, h2.clone(), h.clone()).unwrap();
        let first = MarginalChannel::block(trace_out, h.clone(), h.clone(), 2, 1).unwrap();
        let second = MarginalChannel::identity(&h);
        let composed = MarginalChannel::composed(first, second).unwrap();
        assert_eq!(composed.n(), 2);
        assert_eq!(composed.m(), 1);

        let plus = plus_state(0, 1, &h).unwrap();
        let mixed = maximally_mixed(&h);
        let joint = crate::state::tensor_state(&plus, &mixed);
        let out = composed.apply_to_copies(&joint).unwrap();
        assert!(trace_norm(&(out.entries() - plus.entries())) < 1e-12);
    }

    #[test]
    fn two_block_regrouping_routes_marginals() {
        // Stage one keeps the first copy of each pair; run over two
        // blocks and then dephase both survivors. Inputs
        // (plus, mixed, mixed, mixed): survivors are copies 0 and 2.
        let h = qubit_h();
        let h2 = h.tensor_power(2).unwrap();
        let d = 2usize;
        let mut choi = CMatrix::zeros(8, 8);
        for i1 in 0..d {
            for i2 in 0..d {
                for j1 in 0..d {
                    let row = (i1 * d + i2) * d + i1;
                    let col = (j1 * d + i2) * d + j1;
                    choi[(row, col)] += cplx(1.0, 0.0);
                }
            }
        }
        let keep_first = Channel::new(choi, h2.clone(), h.clone()).unwrap();
        let first = MarginalChannel::block(keep_first, h.clone(), h.clone(), 2, 1).unwrap();

        let mut deph_choi = CMatrix::zeros(16, 16);
        for i in 0..4usize {
            deph_choi[(i * 4 + i, i * 4 + i)] += cplx(1.0, 0.0);
        }
        let deph_two = Channel::new(deph_choi, h2.clone(), h2.clone()).unwrap();
        let second = MarginalChannel::block(deph_two, h.clone(), h.clone(), 2, 2).unwrap();

        let composed = MarginalChannel::composed(first, second).unwrap();
        assert_eq!(composed.n(), 4);
        assert_eq!(composed.m(), 2);

        let plus = plus_state(0, 1, &h).unwrap();
        let mixed = maximally_mixed(&h);
        let mut joint = crate::state::tensor_state(&plus, &mixed);
        joint = crate::state::tensor_state(&joint, &mixed);
        joint = crate::state::tensor_state(&joint, &mixed);
        let out = composed.apply_to_copies(&joint).unwrap();

        let factors = vec![h.clone(), h.clone()];
        let first_marginal = partial_trace(&out, &factors, &[0]).unwrap();
        let second_marginal = partial_trace(&out, &factors, &[1]).unwrap();
        // Copy 0 came from the dephased plus state, copy 1 from a
        // dephased maximally mixed state; both are diagonal 1/2, 1/2.
        assert!(trace_norm(&(first_marginal.entries() - mixed.entries())) < 1e-12);
        assert!(trace_norm(&(second_marginal.entries() - mixed.entries())) < 1e-12);
    }

    #[test]
    fn simulation_respects_dimension_cap() {
        // Compose 2-to-1 trace-out stages until n = 16; the composed
        // channel stays structural, but simulating it would need a
        // 2^16-dimensional input and must be refused up front.
        let h = qubit_h();
        let h2 = h.tensor_power(2).unwrap();
        let d = 2usize;
        let mut choi = CMatrix::zeros(8, 8);
        for i1 in 0..d {
            for i2 in 0..d {
                for j1 in 0..d {
                    let row = (i1 * d + i2) * d + i1;
                    let col = (j1 * d + i2) * d + j1;
                    choi[(row, col)] += cplx(1.0, 0.0);
                }
            }
        }
        let keep_first = Channel::new(choi, h2, h.clone()).unwrap();
        let stage = MarginalChannel::block(keep_first, h.clone(), h.clone(), 2, 1).unwrap();
        let mut chan = stage.clone();
        for _ in 0..3 {
            chan = MarginalChannel::composed(chan, stage.clone()).unwrap();
        }
        assert_eq!(chan.n(), 16);
        assert_eq!(chan.m(), 1);
        let plus = plus_state(0, 1, &h).unwrap();
        let spec = ProtocolSpec::new(chan, BigRational::zero(), rat(15, 16), plus.clone()).unwrap();
        let err = simulate_marginal_protocol(&spec, &plus).unwrap_err();
        assert!(matches!(err, Error::DimensionCapExceeded { required, cap }
            if required == 65_536 && cap == SIMULATION_DIM_CAP));
    }

    #[test]
    fn mismatched_composition_is_rejected() {
        let h = qubit_h();
        let other = Hamiltonian::from_integers(&[0, 2]);
        let p1 = ProtocolSpec::identity(plus_state(0, 1, &h).unwrap());
        let p2 = ProtocolSpec::identity(maximally_mixed(&other));
        let err = compose_marginal_protocols(&p1, &p2).unwrap_err();
        assert!(matches!(err, Error::HamiltonianMismatch { .. }));
    }
}

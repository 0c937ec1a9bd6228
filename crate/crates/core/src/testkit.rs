//! Seeded random generators and independent reference implementations
//! used by the test suites. Enabled with the `testkit` feature.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{ToPrimitive, Zero};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::hamiltonian::Hamiltonian;
use crate::linalg::{cplx, CMatrix};
use crate::rational::denominator_lcm;
use crate::state::{validate_state, DensityMatrix};

/// Deterministic RNG for reproducible test data.
pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Uniform rational with numerator in [-max_num, max_num] and
/// denominator in [1, max_den].
pub fn random_rational(rng: &mut ChaCha8Rng, max_num: i64, max_den: i64) -> BigRational {
    let num = rng.random_range(-max_num..=max_num);
    let den = rng.random_range(1..=max_den);
    BigRational::new(BigInt::from(num), BigInt::from(den))
}

/// Random Hamiltonian with small rational energies. Small ranges make
/// exact degeneracies and commensurate gaps common on purpose.
pub fn random_hamiltonian(
    rng: &mut ChaCha8Rng,
    dim: usize,
    max_num: i64,
    max_den: i64,
) -> Hamiltonian {
    let energies: Vec<BigRational> = (0..dim)
        .map(|_| {
            let num = rng.random_range(0..=max_num);
            let den = rng.random_range(1..=max_den);
            BigRational::new(BigInt::from(num), BigInt::from(den))
        })
        .collect();
    Hamiltonian::new(energies).expect("nonempty energy list")
}

fn ginibre(rng: &mut ChaCha8Rng, rows: usize, cols: usize) -> CMatrix {
    CMatrix::from_fn(rows, cols, |_, _| {
        cplx(rng.sample(StandardNormal), rng.sample(StandardNormal))
    })
}

/// Full-rank random density matrix (normalized Wishart sample).
pub fn random_density_matrix(rng: &mut ChaCha8Rng, h: &Hamiltonian) -> DensityMatrix {
    let d = h.dimension();
    let g = ginibre(rng, d, d);
    let mut m = &g * g.adjoint();
    let trace = m.trace().re;
    m /= cplx(trace, 0.0);
    validate_state(&m, h, 1e-9).expect("Wishart sample is a valid state")
}

/// Random pure state density matrix.
pub fn random_pure_state(rng: &mut ChaCha8Rng, h: &Hamiltonian) -> DensityMatrix {
    let d = h.dimension();
    let amps: Vec<num_complex::Complex64> = (0..d)
        .map(|_| cplx(rng.sample(StandardNormal), rng.sample(StandardNormal)))
        .collect();
    crate::state::pure_state(&amps, h).expect("Gaussian amplitudes are nonzero")
}

/// Random diagonal (incoherent) state.
pub fn random_incoherent_state(rng: &mut ChaCha8Rng, h: &Hamiltonian) -> DensityMatrix {
    let d = h.dimension();
    let mut weights: Vec<f64> = (0..d).map(|_| rng.random_range(0.05..1.0)).collect();
    let total: f64 = weights.iter().sum();
    for w in &mut weights {
        *w /= total;
    }
    let mut m = CMatrix::zeros(d, d);
    for (k, w) in weights.iter().enumerate() {
        m[(k, k)] = cplx(*w, 0.0);
    }
    validate_state(&m, h, 1e-9).expect("normalized diagonal state")
}

/// Haar-distributed unitary via QR of a Ginibre sample with the
/// standard phase correction.
pub fn haar_unitary(rng: &mut ChaCha8Rng, d: usize) -> CMatrix {
    let g = ginibre(rng, d, d);
    let qr = g.qr();
    let r = qr.r();
    let mut q = qr.q();
    for k in 0..d {
        let rkk = r[(k, k)];
        let norm = rkk.norm();
        let phase = if norm > 0.0 { rkk / norm } else { cplx(1.0, 0.0) };
        for row in 0..d {
            q[(row, k)] *= phase;
        }
    }
    q
}

/// Random unitary commuting with the Hamiltonian exactly: Haar blocks
/// on each degenerate level group, zeros elsewhere.
pub fn random_energy_preserving_unitary(rng: &mut ChaCha8Rng, h: &Hamiltonian) -> CMatrix {
    let d = h.dimension();
    let mut u = CMatrix::zeros(d, d);
    for group in h.degenerate_groups() {
        let block = haar_unitary(rng, group.len());
        for (r, &a) in group.iter().enumerate() {
            for (c, &b) in group.iter().enumerate() {
                u[(a, b)] = block[(r, c)];
            }
        }
    }
    u
}

/// Choi operator of a map given by Kraus operators (d_out × d_in
/// each): J[(i,k),(j,l)] = Σ_K K[k,i]·conj(K[l,j]).
pub fn kraus_to_choi(kraus: &[CMatrix], d_in: usize, d_out: usize) -> CMatrix {
    let n = d_in * d_out;
    let mut choi = CMatrix::zeros(n, n);
    for k_op in kraus {
        assert_eq!(k_op.nrows(), d_out);
        assert_eq!(k_op.ncols(), d_in);
        for i in 0..d_in {
            for k in 0..d_out {
                for j in 0..d_in {
                    for l in 0..d_out {
                        choi[(i * d_out + k, j * d_out + l)] +=
                            k_op[(k, i)] * k_op[(l, j)].conj();
                    }
                }
            }
        }
    }
    choi
}

/// Reference lattice membership by brute-force search: is `x` an
/// integer combination of the generators with all but one coefficient
/// in [-bound, bound] and the last solved by divisibility? Exhaustive
/// over that box, exact in integer arithmetic after clearing
/// denominators. Intended for small generator sets (cost grows as
/// (2·bound+1)^(k−1)).
pub fn lattice_member_by_enumeration(
    generators: &[BigRational],
    x: &BigRational,
    bound: i64,
) -> bool {
    let nonzero: Vec<BigRational> = generators
        .iter()
        .filter(|g| !g.is_zero())
        .cloned()
        .collect();
    if nonzero.is_empty() {
        return x.is_zero();
    }
    let mut all = nonzero.clone();
    all.push(x.clone());
    let lcm = denominator_lcm(&all);
    let scale = |r: &BigRational| -> i128 {
        let scaled = r * BigRational::from_integer(lcm.clone());
        debug_assert!(scaled.is_integer());
        scaled
            .to_integer()
            .to_i128()
            .expect("scaled lattice value fits in i128")
    };
    let gens: Vec<i128> = nonzero.iter().map(&scale).collect();
    let target = scale(x);
    let k = gens.len();
    let last = gens[k - 1];
    let mut coeffs = vec![-bound; k - 1];
    loop {
        let partial: i128 = coeffs
            .iter()
            .zip(&gens)
            .map(|(c, g)| i128::from(*c) * g)
            .sum();
        if (target - partial) % last == 0 {
            return true;
        }
        let mut idx = 0;
        loop {
            if idx == k - 1 {
                return false;
            }
            coeffs[idx] += 1;
            if coeffs[idx] <= bound {
                break;
            }
            coeffs[idx] = -bound;
            idx += 1;
        }
    }
}

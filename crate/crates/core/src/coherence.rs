//! Available coherences I(ρ) and the reachable lattice J(ρ).
//!
//! I(ρ) is the set of energy differences at which ρ has a nonzero
//! matrix element. With rational energies, the additive group generated
//! by I(ρ) is a cyclic lattice gℤ, where g is the gcd of the
//! differences; membership and inclusion questions are then exact
//! integer arithmetic.

use std::collections::BTreeSet;

use num_rational::BigRational;
use num_traits::{Signed, Zero};

use crate::rational::{format_rational, rational_gcd};
use crate::state::DensityMatrix;

/// Default threshold for declaring a matrix entry nonzero.
pub const DEFAULT_COHERENCE_TOL: f64 = 1e-9;

/// The set of energy differences at which a state has coherence,
/// together with the threshold used to decide "nonzero entry".
///
/// Diagonal pairs are included, so 0 is a member for every state; it
/// never affects the generated lattice.
#[derive(Debug, Clone, PartialEq)]
pub struct CoherenceSet {
    deltas: BTreeSet<BigRational>,
    source_tolerance: f64,
}

impl CoherenceSet {
    pub fn from_deltas(
        deltas: impl IntoIterator<Item = BigRational>,
        source_tolerance: f64,
    ) -> Self {
        Self {
            deltas: deltas.into_iter().collect(),
            source_tolerance,
        }
    }

    pub fn deltas(&self) -> &BTreeSet<BigRational> {
        &self.deltas
    }

    pub fn source_tolerance(&self) -> f64 {
        self.source_tolerance
    }

    pub fn contains(&self, delta: &BigRational) -> bool {
        self.deltas.contains(delta)
    }

    /// True when the set carries no coherence between distinct
    /// energies, i.e. deltas ⊆ {0}.
    pub fn is_trivial(&self) -> bool {
        self.deltas.iter().all(|d| d.is_zero())
    }

    pub fn is_subset_of(&self, other: &CoherenceSet) -> bool {
        self.deltas.is_subset(&other.deltas)
    }

    /// Deltas in ascending order.
    pub fn sorted(&self) -> Vec<BigRational> {
        self.deltas.iter().cloned().collect()
    }
}

impl std::fmt::Display for CoherenceSet {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{{")?;
        for (k, d) in self.deltas.iter().enumerate() {
            if k > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{}", format_rational(d))?;
        }
        write!(f, "}}")
    }
}

/// The integer lattice gℤ ⊆ ℚ. `g = 0` encodes the trivial lattice {0}.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Lattice {
    generator: BigRational,
}

impl Lattice {
    pub fn new(generator: BigRational) -> Self {
        Self {
            generator: generator.abs(),
        }
    }

    pub fn trivial() -> Self {
        Self {
            generator: BigRational::zero(),
        }
    }

    /// Nonnegative generator g; the lattice is gℤ.
    pub fn generator(&self) -> &BigRational {
        &self.generator
    }

    pub fn is_trivial(&self) -> bool {
        self.generator.is_zero()
    }
}

impl std::fmt::Display for Lattice {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        if self.is_trivial() {
            write!(f, "{{0}}")
        } else {
            write!(f, "{}Z", format_rational(&self.generator))
        }
    }
}

/// All energy differences E_i - E_j with |⟨i|ρ|j⟩| > tol.
pub fn available_coherences(rho: &DensityMatrix, tol: f64) -> CoherenceSet {
    let d = rho.dimension();
    let energies = rho.hamiltonian().energies();
    let mut deltas = BTreeSet::new();
    for i in 0..d {
        for j in 0..d {
            if rho.entry(i, j).norm() > tol {
                deltas.insert(energies[i].clone() - energies[j].clone());
            }
        }
    }
    CoherenceSet {
        deltas,
        source_tolerance: tol,
    }
}

/// The additive group generated by a coherence set: gℤ with g the gcd
/// of the nonzero deltas (g = 0 when there are none).
pub fn reachable_lattice(s: &CoherenceSet) -> Lattice {
    let deltas: Vec<BigRational> = s.deltas.iter().cloned().collect();
    Lattice::new(rational_gcd(&deltas))
}

/// Exact membership x ∈ gℤ.
pub fn lattice_member(l: &Lattice, x: &BigRational) -> bool {
    if l.is_trivial() {
        x.is_zero()
    } else {
        (x / &l.generator).is_integer()
    }
}

/// Exact inclusion aℤ ⊆ bℤ.
pub fn lattice_subset(a: &Lattice, b: &Lattice) -> bool {
    if a.is_trivial() {
        return true;
    }
    if b.is_trivial() {
        return false;
    }
    (&a.generator / &b.generator).is_integer()
}

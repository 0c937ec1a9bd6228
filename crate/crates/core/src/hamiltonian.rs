//! Diagonal Hamiltonians with exact rational energies.

use std::fmt;

use num_rational::BigRational;
use num_traits::{Signed, Zero};

use crate::error::{Error, Result};
use crate::linalg::{cplx, CMatrix};
use crate::rational::{format_rational, parse_rational, rational_to_f64};

/// A finite-dimensional Hamiltonian, diagonal in the computational
/// basis, with exact rational energy levels (units with k_B = ħ = 1).
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Hamiltonian {
    energies: Vec<BigRational>,
}

impl Hamiltonian {
    /// Builds a Hamiltonian from its energy list. Errors on an empty list.
    pub fn new(energies: Vec<BigRational>) -> Result<Self> {
        if energies.is_empty() {
            return Err(Error::InvalidParameter {
                name: "energies",
                reason: "at least one energy level is required".to_string(),
            });
        }
        Ok(Self { energies })
    }

    /// Parses a Hamiltonian from rational strings such as `"3/2"`.
    pub fn parse(energies: &[impl AsRef<str>]) -> Result<Self> {
        let parsed = energies
            .iter()
            .map(|s| parse_rational(s.as_ref()))
            .collect::<Result<Vec<_>>>()?;
        Self::new(parsed)
    }

    /// Convenience constructor from integer energies.
    pub fn from_integers(energies: &[i64]) -> Self {
        Self {
            energies: energies
                .iter()
                .map(|&e| BigRational::from_integer(e.into()))
                .collect(),
        }
    }

    pub fn dimension(&self) -> usize {
        self.energies.len()
    }

    pub fn energies(&self) -> &[BigRational] {
        &self.energies
    }

    pub fn energy(&self, level: usize) -> Result<&BigRational> {
        self.energies.get(level).ok_or(Error::IndexOutOfRange {
            context: "energy level",
            index: level,
            len: self.energies.len(),
        })
    }

    /// Exact energy difference E_i - E_j.
    pub fn delta(&self, i: usize, j: usize) -> Result<BigRational> {
        Ok(self.energy(i)? - self.energy(j)?)
    }

    /// Operator infinity norm, max |E_k|, as an exact rational.
    pub fn inf_norm(&self) -> BigRational {
        self.energies
            .iter()
            .map(|e| e.abs())
            .max()
            .unwrap_or_else(BigRational::zero)
    }

    /// max |E_k| as f64.
    pub fn inf_norm_f64(&self) -> f64 {
        rational_to_f64(&self.inf_norm())
    }

    /// Smallest energy level, exact.
    pub fn min_energy(&self) -> BigRational {
        self.energies.iter().min().cloned().unwrap_or_default()
    }

    /// Energies as f64 values.
    pub fn energies_f64(&self) -> Vec<f64> {
        self.energies.iter().map(rational_to_f64).collect()
    }

    /// The Hamiltonian as a diagonal complex matrix.
    pub fn matrix(&self) -> CMatrix {
        let d = self.dimension();
        let mut m = CMatrix::zeros(d, d);
        for (k, e) in self.energies_f64().into_iter().enumerate() {
            m[(k, k)] = cplx(e, 0.0);
        }
        m
    }

    /// Diagonal unitary exp(-i H t).
    pub fn phase_unitary(&self, t: f64) -> CMatrix {
        let d = self.dimension();
        let mut u = CMatrix::zeros(d, d);
        for (k, e) in self.energies_f64().into_iter().enumerate() {
            let phase = -e * t;
            u[(k, k)] = cplx(phase.cos(), phase.sin());
        }
        u
    }

    /// Groups level indices by exact energy; each group is one
    /// degenerate eigenspace. Order of groups follows first occurrence.
    pub fn degenerate_groups(&self) -> Vec<Vec<usize>> {
        let mut groups: Vec<(BigRational, Vec<usize>)> = Vec::new();
        for (k, e) in self.energies.iter().enumerate() {
            match groups.iter_mut().find(|(g, _)| g == e) {
                Some((_, idx)) => idx.push(k),
                None => groups.push((e.clone(), vec![k])),
            }
        }
        groups.into_iter().map(|(_, idx)| idx).collect()
    }

    /// n-fold tensor power, H ⊗ I ⊗ ... + ... (joint energies are sums).
    pub fn tensor_power(&self, n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidParameter {
                name: "n",
                reason: "tensor power requires n >= 1".to_string(),
            });
        }
        let mut acc = self.clone();
        for _ in 1..n {
            acc = tensor_hamiltonian(&acc, self);
        }
        Ok(acc)
    }
}

impl fmt::Display for Hamiltonian {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "diag(")?;
        for (k, e) in self.energies.iter().enumerate() {
            if k > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{}", format_rational(e))?;
        }
        write!(f, ")")
    }
}

/// Joint Hamiltonian of two non-interacting systems,
/// H₁ ⊗ I + I ⊗ H₂: energies are all pairwise sums E_i + E'_j in
/// row-major order.
pub fn tensor_hamiltonian(h1: &Hamiltonian, h2: &Hamiltonian) -> Hamiltonian {
    let mut energies = Vec::with_capacity(h1.dimension() * h2.dimension());
    for a in h1.energies() {
        for b in h2.energies() {
            energies.push(a + b);
        }
    }
    Hamiltonian { energies }
}

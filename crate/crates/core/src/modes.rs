//! Mode decomposition: splitting a matrix by energy difference.
//!
//! Entry (i, j) of an operator on a system with energies E belongs to
//! the mode Δ = E_i - E_j. Channels commuting with free time evolution
//! map each mode into itself, so this decomposition underlies both the
//! covariance check and the coherence bookkeeping.

use std::collections::BTreeMap;

use num_rational::BigRational;

use crate::hamiltonian::Hamiltonian;
use crate::linalg::CMatrix;
use crate::state::DensityMatrix;

/// A matrix split into components by energy difference. Components sum
/// to the original matrix exactly (entries are partitioned, not
/// approximated); all-zero components are omitted.
#[derive(Debug, Clone)]
pub struct ModeDecomposition {
    components: BTreeMap<BigRational, CMatrix>,
    hamiltonian: Hamiltonian,
}

impl ModeDecomposition {
    pub fn hamiltonian(&self) -> &Hamiltonian {
        &self.hamiltonian
    }

    /// All modes with a nonzero component, ascending.
    pub fn modes(&self) -> impl Iterator<Item = &BigRational> {
        self.components.keys()
    }

    pub fn component(&self, delta: &BigRational) -> Option<&CMatrix> {
        self.components.get(delta)
    }

    pub fn components(&self) -> &BTreeMap<BigRational, CMatrix> {
        &self.components
    }

    /// Sum of all components.
    pub fn reconstruct(&self) -> CMatrix {
        let d = self.hamiltonian.dimension();
        let mut out = CMatrix::zeros(d, d);
        for c in self.components.values() {
            out += c;
        }
        out
    }
}

/// Splits an arbitrary matrix into modes of the given Hamiltonian.
pub fn mode_decompose_matrix(m: &CMatrix, h: &Hamiltonian) -> ModeDecomposition {
    let d = h.dimension();
    assert_eq!(m.nrows(), d, "matrix does not match Hamiltonian dimension");
    assert!(m.is_square(), "mode decomposition requires a square matrix");
    let mut components: BTreeMap<BigRational, CMatrix> = BTreeMap::new();
    for i in 0..d {
        for j in 0..d {
            let z = m[(i, j)];
            if z.re == 0.0 && z.im == 0.0 {
                continue;
            }
            let delta = h.energies()[i].clone() - h.energies()[j].clone();
            components
                .entry(delta)
                .or_insert_with(|| CMatrix::zeros(d, d))[(i, j)] = z;
        }
    }
    ModeDecomposition {
        components,
        hamiltonian: h.clone(),
    }
}

/// Splits a state by energy difference under its own Hamiltonian.
pub fn mode_decompose(rho: &DensityMatrix) -> ModeDecomposition {
    mode_decompose_matrix(rho.entries(), rho.hamiltonian())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::max_abs;
    use crate::rational::parse_rational;
    use crate::state::{plus_state, tensor_state};

    #[test]
    fn incoherent_state_has_single_zero_mode() {
        let h = Hamiltonian::from_integers(&[0, 1]);
        let rho = plus_state(0, 1, &h).unwrap().dephased();
        let dec = mode_decompose(&rho);
        let modes: Vec<_> = dec.modes().cloned().collect();
        assert_eq!(modes, vec![parse_rational("0").unwrap()]);
    }

    #[test]
    fn plus_state_occupies_three_modes() {
        let h = Hamiltonian::from_integers(&[0, 1]);
        let rho = plus_state(0, 1, &h).unwrap();
        let dec = mode_decompose(&rho);
        let modes: Vec<String> = dec
            .modes()
            .map(crate::rational::format_rational)
            .collect();
        assert_eq!(modes, vec!["-1", "0", "1"]);
        let up = dec.component(&parse_rational("1").unwrap()).unwrap();
        assert_eq!(up[(1, 0)], crate::linalg::cplx(0.5, 0.0));
        assert_eq!(up[(0, 1)], crate::linalg::cplx(0.0, 0.0));
    }

    #[test]
    fn components_reconstruct_the_state_exactly() {
        let h = Hamiltonian::parse(&["0", "1/2", "1/2", "1"]).unwrap();
        let qubit = Hamiltonian::parse(&["0", "1/2"]).unwrap();
        let rho = tensor_state(
            &plus_state(0, 1, &qubit).unwrap(),
            &plus_state(0, 1, &qubit).unwrap(),
        );
        assert_eq!(rho.hamiltonian(), &h);
        let dec = mode_decompose(&rho);
        assert!(max_abs(&(dec.reconstruct() - rho.entries())) == 0.0);
    }

    #[test]
    fn opposite_modes_are_mutual_adjoints() {
        let h = Hamiltonian::from_integers(&[0, 2, 5]);
        let psi = crate::state::pure_state(
            &[
                crate::linalg::cplx(0.7, 0.1),
                crate::linalg::cplx(-0.2, 0.4),
                crate::linalg::cplx(0.5, 0.0),
            ],
            &h,
        )
        .unwrap();
        let dec = mode_decompose(&psi);
        for (delta, comp) in dec.components() {
            let neg = -delta.clone();
            let partner = dec.component(&neg).expect("missing mirrored mode");
            assert!(max_abs(&(comp.adjoint() - partner)) < 1e-15);
        }
    }

    #[test]
    fn degenerate_levels_contribute_to_the_zero_mode() {
        let h = Hamiltonian::from_integers(&[1, 1]);
        let rho = plus_state(0, 1, &h).unwrap();
        let dec = mode_decompose(&rho);
        let modes: Vec<_> = dec.modes().cloned().collect();
        assert_eq!(modes, vec![parse_rational("0").unwrap()]);
        assert!(max_abs(&(dec.reconstruct() - rho.entries())) == 0.0);
    }
}

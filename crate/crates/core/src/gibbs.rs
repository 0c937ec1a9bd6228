//! Thermal (Gibbs) states.

use num_rational::BigRational;

use crate::error::{Error, Result};
use crate::hamiltonian::Hamiltonian;
use crate::linalg::{cplx, CMatrix};
use crate::rational::rational_to_f64;
use crate::state::{DensityMatrix, DEFAULT_TOL};

/// Inverse temperature paired with a Hamiltonian. `beta` may be
/// `f64::INFINITY` for the zero-temperature limit.
#[derive(Debug, Clone, PartialEq)]
pub struct GibbsContext {
    beta: f64,
    hamiltonian: Hamiltonian,
}

impl GibbsContext {
    pub fn new(beta: f64, hamiltonian: Hamiltonian) -> Result<Self> {
        if beta.is_nan() || beta < 0.0 {
            return Err(Error::InvalidParameter {
                name: "beta",
                reason: format!("inverse temperature must be >= 0, got {beta}"),
            });
        }
        Ok(Self { beta, hamiltonian })
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn hamiltonian(&self) -> &Hamiltonian {
        &self.hamiltonian
    }
}

/// Gibbs state e^{-βH} / Tr e^{-βH}. At β = +∞ this is the uniform
/// mixture over the minimal-energy levels.
pub fn gibbs_state(ctx: &GibbsContext) -> DensityMatrix {
    let h = &ctx.hamiltonian;
    let d = h.dimension();
    let mut m = CMatrix::zeros(d, d);
    if ctx.beta.is_infinite() {
        let min: BigRational = h.min_energy();
        let ground: Vec<usize> = (0..d).filter(|&k| h.energies()[k] == min).collect();
        let w = 1.0 / ground.len() as f64;
        for k in ground {
            m[(k, k)] = cplx(w, 0.0);
        }
    } else {
        // Energies are shifted by the minimum before exponentiation so
        // large β·E cannot overflow; the shift cancels on normalization.
        let min = rational_to_f64(&h.min_energy());
        let weights: Vec<f64> = h
            .energies_f64()
            .iter()
            .map(|&e| (-ctx.beta * (e - min)).exp())
            .collect();
        let z: f64 = weights.iter().sum();
        for (k, w) in weights.into_iter().enumerate() {
            m[(k, k)] = cplx(w / z, 0.0);
        }
    }
    DensityMatrix::from_valid_parts(m, h.clone(), DEFAULT_TOL)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{max_abs, trace_norm};

    #[test]
    fn infinite_temperature_is_maximally_mixed() {
        let h = Hamiltonian::from_integers(&[0, 1]);
        let gamma = gibbs_state(&GibbsContext::new(0.0, h).unwrap());
        assert!(max_abs(&(gamma.entries() - CMatrix::identity(2, 2).scale(0.5))) < 1e-15);
    }

    #[test]
    fn zero_temperature_projects_on_ground_space() {
        let h = Hamiltonian::from_integers(&[0, 1]);
        let gamma = gibbs_state(&GibbsContext::new(f64::INFINITY, h).unwrap());
        assert_eq!(gamma.entry(0, 0), cplx(1.0, 0.0));
        assert_eq!(gamma.entry(1, 1), cplx(0.0, 0.0));

        let degenerate = Hamiltonian::from_integers(&[2, 2, 5]);
        let gamma = gibbs_state(&GibbsContext::new(f64::INFINITY, degenerate).unwrap());
        assert_eq!(gamma.entry(0, 0), cplx(0.5, 0.0));
        assert_eq!(gamma.entry(1, 1), cplx(0.5, 0.0));
    }

    #[test]
    fn qubit_weights_at_beta_ln2() {
        let h = Hamiltonian::from_integers(&[0, 1]);
        let gamma = gibbs_state(&GibbsContext::new(2.0_f64.ln(), h).unwrap());
        assert!((gamma.entry(0, 0).re - 2.0 / 3.0).abs() < 1e-15);
        assert!((gamma.entry(1, 1).re - 1.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn gibbs_state_commutes_with_hamiltonian() {
        let h = Hamiltonian::parse(&["0", "1/3", "7/2"]).unwrap();
        let gamma = gibbs_state(&GibbsContext::new(1.7, h.clone()).unwrap());
        let hm = h.matrix();
        let comm = gamma.entries() * &hm - &hm * gamma.entries();
        assert!(trace_norm(&comm) < 1e-12);
        assert!((trace_norm(gamma.entries()) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn large_beta_with_large_energies_stays_finite() {
        let h = Hamiltonian::from_integers(&[1000, 2000]);
        let gamma = gibbs_state(&GibbsContext::new(500.0, h).unwrap());
        assert!((gamma.entry(0, 0).re - 1.0).abs() < 1e-12);
        assert!(gamma.entries().iter().all(|z| z.re.is_finite()));
    }

    #[test]
    fn rejects_negative_beta() {
        let h = Hamiltonian::from_integers(&[0, 1]);
        assert!(GibbsContext::new(-0.5, h.clone()).is_err());
        assert!(GibbsContext::new(f64::NAN, h).is_err());
    }
}

//! Exact diagonalization of the device together with finite reservoirs.

use ndarray::Array1;

use crate::linalg::eigh;
use crate::models::{bond_current_operator, build_total, current_operator, System, TotalLayout};
use crate::observables::{occupation, thermal_expectation};
use crate::specfn::softplus;
use crate::{CMatrix, NhError, Result, Temperature};

pub const DEFAULT_DIM_CAP: usize = 2000;

/// Eigenpairs of the Hermitian total Hamiltonian.
#[derive(Debug, Clone)]
pub struct HermitianSpectrum {
    /// Ascending.
    pub eigenvalues: Array1<f64>,
    pub vectors: CMatrix,
    pub doubling: usize,
    pub layout: TotalLayout,
}

impl HermitianSpectrum {
    pub fn of(sys: &System) -> Result<Self> {
        Self::with_cap(sys, DEFAULT_DIM_CAP)
    }

    pub fn with_cap(sys: &System, cap: usize) -> Result<Self> {
        let dim = sys.total_dim();
        if dim > cap {
            return Err(NhError::DimCap { dim, cap });
        }
        let (eigenvalues, vectors) = eigh(&build_total(sys)?)?;
        Ok(HermitianSpectrum { eigenvalues, vectors, doubling: sys.model.doubling(), layout: TotalLayout::of(sys) })
    }

    /// `Σ w(ε_n) ⟨ψ_n|O|ψ_n⟩ / doubling` for an operator in the total basis.
    pub fn expect(&self, op: &CMatrix, temp: Temperature) -> f64 {
        thermal_expectation(&self.eigenvalues, &self.vectors, op, temp, self.doubling)
    }

    /// `E_0 = Σ_{ε ≤ 0} ε / doubling`.
    pub fn ground_energy(&self) -> f64 {
        self.eigenvalues.iter().filter(|&&e| e <= 0.0).sum::<f64>() / self.doubling as f64
    }

    /// Grand potential, equal to `ground_energy` as β → ∞.
    pub fn free_energy(&self, beta: f64) -> f64 {
        let s: f64 = if self.doubling == 2 {
            self.eigenvalues.iter().map(|&e| log_2cosh(beta * e / 2.0)).sum::<f64>() / 2.0
        } else {
            self.eigenvalues.iter().map(|&e| softplus(-beta * e)).sum()
        };
        -s / beta
    }

    /// Thermal weights of the eigenvalues.
    pub fn occupations(&self, temp: Temperature) -> Vec<f64> {
        self.eigenvalues.iter().map(|&e| occupation(e, temp)).collect()
    }
}

fn log_2cosh(x: f64) -> f64 {
    x.abs() + (-2.0 * x.abs()).exp().ln_1p()
}

/// Device current on bond `bond`, embedded in the total basis.
pub fn exact_current_at_bond(sys: &System, bond: usize, temp: Temperature) -> Result<f64> {
    let hs = HermitianSpectrum::of(sys)?;
    let op = hs.layout.embed(&bond_current_operator(&sys.model, bond)?);
    Ok(hs.expect(&op, temp))
}

/// Device current on the default bond.
pub fn exact_current(sys: &System, temp: Temperature) -> Result<f64> {
    let hs = HermitianSpectrum::of(sys)?;
    let op = hs.layout.embed(&current_operator(&sys.model, sys.model.default_bond())?);
    Ok(hs.expect(&op, temp))
}

/// Current through the tunnel bond of reservoir `r`.
pub fn tunnel_current(sys: &System, r: usize, temp: Temperature) -> Result<f64> {
    let hs = HermitianSpectrum::of(sys)?;
    Ok(hs.expect(&crate::models::tunnel_current_operator(sys, r)?, temp))
}

fn check_step(delta_phi: f64) -> Result<()> {
    if delta_phi > 0.0 && delta_phi.is_finite() {
        Ok(())
    } else {
        Err(NhError::Spec(format!("delta_phi must be positive, got {delta_phi}")))
    }
}

/// `doubling · dE_0/dφ` by a central difference.
pub fn exact_ground_energy_current(sys: &System, phi: f64, delta_phi: f64) -> Result<f64> {
    check_step(delta_phi)?;
    let ep = HermitianSpectrum::of(&sys.with_phi(phi + delta_phi))?.ground_energy();
    let em = HermitianSpectrum::of(&sys.with_phi(phi - delta_phi))?.ground_energy();
    Ok(sys.model.doubling() as f64 * (ep - em) / (2.0 * delta_phi))
}

/// `doubling · dF/dφ` by a central difference.
pub fn exact_free_energy_current(sys: &System, phi: f64, beta: f64, delta_phi: f64) -> Result<f64> {
    check_step(delta_phi)?;
    if !(beta > 0.0 && beta.is_finite()) {
        return Err(NhError::Spec(format!("beta must be positive, got {beta}")));
    }
    let fp = HermitianSpectrum::of(&sys.with_phi(phi + delta_phi))?.free_energy(beta);
    let fm = HermitianSpectrum::of(&sys.with_phi(phi - delta_phi))?.free_energy(beta);
    Ok(sys.model.doubling() as f64 * (fp - fm) / (2.0 * delta_phi))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::{ModelSpec, ReservoirSpec, RingSpec, SnsSpec};
    use crate::observables::isolated_current;

    fn res(n: usize, kappa: f64, g: f64, attach: usize) -> ReservoirSpec {
        ReservoirSpec { n_sites: n, t: -1.0, g, attach, kappa }
    }

    fn sns(phi: f64, n_e: usize, kappa: f64) -> System {
        System::new(
            ModelSpec::Sns(SnsSpec { n_left: 4, n_mid: 4, n_right: 4, t: -1.0, delta: 1.0, mu: -1.1, phi }),
            vec![res(n_e, kappa, -1.1, 0), res(n_e, kappa, -1.1, 11)],
        )
    }

    fn ring(phi: f64, kappa: f64) -> System {
        let hop = vec![-0.859915, -0.884918, -0.918446, -0.846311, -1.19937, -0.984676];
        System::new(
            ModelSpec::Ring(RingSpec { n: 6, t: -1.0, mu: -1.0, hoppings: hop, phi }),
            vec![res(41, kappa, 0.0, 5)],
        )
    }

    #[test]
    fn orthonormal_and_particle_hole_paired() {
        let hs = HermitianSpectrum::of(&sns(1.3, 31, -0.4)).unwrap();
        let v = &hs.vectors;
        let g = crate::linalg::dagger(v).dot(v) - CMatrix::eye(v.ncols());
        assert!(crate::linalg::max_abs(&g) < 1e-10);
        let e = &hs.eigenvalues;
        let d = e.len();
        for n in 0..d {
            assert!((e[n] + e[d - 1 - n]).abs() < 1e-10);
        }
    }

    #[test]
    fn decoupled_equals_isolated() {
        for sys in [sns(2.1, 21, 0.0), ring(0.7, 0.0)] {
            let a = exact_current(&sys, Temperature::Zero).unwrap();
            let b = isolated_current(&sys.model, Temperature::Zero).unwrap();
            assert!((a - b).abs() < 1e-12, "{a} vs {b}");
        }
    }

    #[test]
    fn no_leakage_and_uniform_current() {
        for temp in [Temperature::Zero, Temperature::Beta(5.0)] {
            let sys = ring(1.9, -1.0);
            for b in 0..6 {
                let i = exact_current_at_bond(&sys, b, temp).unwrap();
                let i0 = exact_current(&sys, temp).unwrap();
                assert!((i - i0).abs() < 1e-10);
            }
            assert!(tunnel_current(&sys, 0, temp).unwrap().abs() < 1e-10);
            let sys = sns(1.9, 31, -0.4);
            let i0 = exact_current(&sys, temp).unwrap();
            for b in sys.model.current_bonds() {
                assert!((exact_current_at_bond(&sys, b, temp).unwrap() - i0).abs() < 1e-10);
            }
            for r in 0..2 {
                assert!(tunnel_current(&sys, r, temp).unwrap().abs() < 1e-10);
            }
        }
    }

    #[test]
    fn energy_derivatives_match_operator_current() {
        for sys in [sns(1.2, 31, -0.4), ring(2.4, -1.0)] {
            let phi = sys.model.phi();
            let op = exact_current(&sys, Temperature::Zero).unwrap();
            let de = exact_ground_energy_current(&sys, phi, 1e-4).unwrap();
            assert!((op - de).abs() < 1e-6, "{op} vs {de}");
            let th = exact_current(&sys, Temperature::Beta(4.0)).unwrap();
            let df = exact_free_energy_current(&sys, phi, 4.0, 1e-4).unwrap();
            assert!((th - df).abs() < 1e-6, "{th} vs {df}");
            let cold = exact_free_energy_current(&sys, phi, 1e4, 1e-4).unwrap();
            assert!((cold - de).abs() < 1e-4);
        }
    }

    #[test]
    fn dimension_cap() {
        let sys = sns(0.0, 101, -0.4);
        assert_eq!(sys.total_dim(), 428);
        assert!(matches!(HermitianSpectrum::with_cap(&sys, 400), Err(NhError::DimCap { dim: 428, cap: 400 })));
    }

    #[test]
    fn phase_independent_system_has_zero_current() {
        let sys = System::new(
            ModelSpec::Sns(SnsSpec { n_left: 2, n_mid: 3, n_right: 2, t: -1.0, delta: 0.0, mu: 0.3, phi: 0.7 }),
            vec![res(11, -0.5, 0.2, 0)],
        );
        assert!(exact_ground_energy_current(&sys, 0.7, 1e-4).unwrap().abs() < 1e-10);
    }
}

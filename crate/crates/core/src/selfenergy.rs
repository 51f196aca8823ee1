//! Reservoir edge Green's function, wide-band self-energy and the
//! non-Hermitian effective Hamiltonian.

use serde::{Deserialize, Serialize};

use crate::models::{build_system, ReservoirSpec, System};
use crate::{CMatrix, NhError, Result, C64};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Branch {
    Retarded,
    Advanced,
}

/// Green's function on the end site of a semi-infinite chain, inside the band.
pub fn edge_green(omega: f64, t: f64, g: f64, branch: Branch) -> Result<C64> {
    if !(t < 0.0) || !omega.is_finite() || !g.is_finite() {
        return Err(NhError::Spec(format!("edge_green needs finite inputs and t < 0, got t = {t}")));
    }
    let x = (omega - g) / 2.0;
    if x.abs() > t.abs() {
        return Err(NhError::Band { omega, t, g });
    }
    let root = (t * t - x * x).sqrt();
    let im = match branch {
        Branch::Retarded => -root,
        Branch::Advanced => root,
    };
    Ok(C64::new(x, im) / (t * t))
}

/// Self-energy of one reservoir on its attach site.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SelfEnergyBlock {
    pub particle: C64,
    /// Hole-sector value, present for BdG systems.
    pub hole: Option<C64>,
    pub site: usize,
}

/// Wide-band self-energy `Σ(0) = -κ²/t² (τ_z g/2 + i sqrt(t² - (g/2)²))`.
pub fn self_energy_wideband(res: &ReservoirSpec, doubling: usize) -> Result<SelfEnergyBlock> {
    if (res.g / 2.0).abs() >= res.t.abs() {
        return Err(NhError::Band { omega: 0.0, t: res.t, g: res.g });
    }
    let scale = -res.kappa * res.kappa / (res.t * res.t);
    let root = (res.t * res.t - res.g * res.g / 4.0).sqrt();
    let particle = scale * C64::new(res.g / 2.0, root);
    let hole = (doubling == 2).then(|| scale * C64::new(-res.g / 2.0, root));
    Ok(SelfEnergyBlock { particle, hole, site: res.attach })
}

/// Energy-dependent self-energy, for checks against the wide-band value.
pub fn self_energy_at(res: &ReservoirSpec, omega: f64, doubling: usize) -> Result<SelfEnergyBlock> {
    let k2 = res.kappa * res.kappa;
    let particle = k2 * edge_green(omega, res.t, res.g, Branch::Retarded)?;
    let hole = if doubling == 2 {
        Some(-k2 * edge_green(-omega, res.t, res.g, Branch::Advanced)?)
    } else {
        None
    };
    Ok(SelfEnergyBlock { particle, hole, site: res.attach })
}

/// `H_sys + Σ(0)` with the system it was built from.
#[derive(Debug, Clone)]
pub struct EffectiveHamiltonian {
    pub matrix: CMatrix,
    pub doubling: usize,
    pub n_sites: usize,
    pub system: System,
}

impl EffectiveHamiltonian {
    pub fn phi(&self) -> f64 {
        self.system.model.phi()
    }
}

pub fn effective_hamiltonian(sys: &System) -> Result<EffectiveHamiltonian> {
    sys.validate()?;
    let n = sys.model.n_sites();
    let doubling = sys.model.doubling();
    let mut h = build_system(&sys.model)?;
    for res in &sys.reservoirs {
        let b = self_energy_wideband(res, doubling)?;
        h[[b.site, b.site]] += b.particle;
        if let Some(hole) = b.hole {
            h[[n + b.site, n + b.site]] += hole;
        }
    }
    Ok(EffectiveHamiltonian { matrix: h, doubling, n_sites: n, system: sys.clone() })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{dagger, eig, eigh, max_abs};
    use crate::models::{ModelSpec, RingSpec, SnsSpec};

    fn res(kappa: f64, g: f64, attach: usize) -> ReservoirSpec {
        ReservoirSpec { n_sites: 101, t: -1.0, g, attach, kappa }
    }

    #[test]
    fn edge_green_values() {
        let z = edge_green(0.0, -1.0, 0.0, Branch::Retarded).unwrap();
        assert!((z - C64::new(0.0, -1.0)).norm() < 1e-15);
        let z = edge_green(0.0, -1.0, -1.1, Branch::Retarded).unwrap();
        assert!((z - C64::new(0.55, -(1.0f64 - 0.3025).sqrt())).norm() < 1e-15);
        assert!((z.im + 0.835_165).abs() < 1e-6);
        for (w, t, g) in [(0.3, -1.0, 0.2), (-1.7, -0.9, 0.0), (0.0, -2.0, 1.5)] {
            let r = edge_green(w, t, g, Branch::Retarded).unwrap();
            let a = edge_green(w, t, g, Branch::Advanced).unwrap();
            assert_eq!(r, a.conj());
        }
        assert!(matches!(edge_green(2.5, -1.0, 0.0, Branch::Retarded), Err(NhError::Band { .. })));
    }

    #[test]
    fn wideband_values() {
        let b = self_energy_wideband(&res(-1.0, 0.0, 0), 1).unwrap();
        assert!((b.particle - C64::new(0.0, -1.0)).norm() < 1e-15);
        assert!(b.hole.is_none());
        let b = self_energy_wideband(&res(-0.4, -1.1, 0), 2).unwrap();
        assert!((b.particle.re - 0.088).abs() < 1e-15);
        assert!((b.particle.im + 0.133_626_4).abs() < 1e-7);
        assert_eq!(b.hole.unwrap(), -b.particle.conj());
        let z = self_energy_wideband(&res(0.0, -1.1, 0), 2).unwrap();
        assert_eq!(z.particle.norm() + z.hole.unwrap().norm(), 0.0);
        assert!(matches!(
            self_energy_wideband(&ReservoirSpec { g: 2.0, ..res(-1.0, 0.0, 0) }, 1),
            Err(NhError::Band { .. })
        ));
    }

    #[test]
    fn kappa_squared_scaling_and_frequency_consistency() {
        let a = self_energy_wideband(&res(-0.3, 0.4, 0), 2).unwrap();
        let b = self_energy_wideband(&res(-0.6, 0.4, 0), 2).unwrap();
        assert_eq!(b.particle / a.particle, C64::new(4.0, 0.0));
        let w = self_energy_at(&res(-0.3, 0.4, 0), 0.0, 2).unwrap();
        assert!((w.particle - a.particle).norm() < 1e-14);
        assert!((w.hole.unwrap() - a.hole.unwrap()).norm() < 1e-14);
    }

    fn fig_sns(phi: f64, kappa: f64) -> System {
        System::new(
            ModelSpec::Sns(SnsSpec { n_left: 4, n_mid: 4, n_right: 4, t: -1.0, delta: 1.0, mu: -1.1, phi }),
            vec![res(kappa, -1.1, 0), res(kappa, -1.1, 11)],
        )
    }

    #[test]
    fn ring_effective_hamiltonian() {
        let model = ModelSpec::Ring(RingSpec { n: 6, t: -1.0, mu: -1.0, hoppings: vec![-1.0; 6], phi: 0.4 });
        let sys = System::new(model.clone(), vec![res(-1.0, 0.0, 0)]);
        let h = effective_hamiltonian(&sys).unwrap().matrix;
        let mut expect = build_system(&model).unwrap();
        expect[[0, 0]] += C64::new(0.0, -1.0);
        assert!(max_abs(&(&h - &expect)) < 1e-15);
    }

    #[test]
    fn sns_effective_hamiltonian_symmetries() {
        let heff = effective_hamiltonian(&fig_sns(1.1, -0.4)).unwrap();
        let h = &heff.matrix;
        let n = 12;
        // -τx H* τx
        let mut ph = h.clone();
        for a in 0..2 * n {
            for b in 0..2 * n {
                ph[[a, b]] = -h[[(a + n) % (2 * n), (b + n) % (2 * n)]].conj();
            }
        }
        assert!(max_abs(&(h - &ph)) < 1e-12);
        // dissipative part negative semidefinite
        let anti = (h - &dagger(h)).mapv(|z| z * C64::new(0.0, -0.5));
        let (w, _) = eigh(&anti).unwrap();
        assert!(w.iter().all(|&x| x <= 1e-12));
        let (e, _) = eig(h).unwrap();
        assert!(e.iter().all(|z| z.im <= 1e-10));
        for z in e.iter() {
            let partner = e.iter().map(|y| (y + z.conj()).norm()).fold(f64::INFINITY, f64::min);
            assert!(partner < 1e-9);
        }
    }

    #[test]
    fn decoupled_effective_hamiltonian_is_hermitian() {
        let sys = fig_sns(0.8, 0.0);
        let h = effective_hamiltonian(&sys).unwrap().matrix;
        assert_eq!(h, build_system(&sys.model).unwrap());
    }
}

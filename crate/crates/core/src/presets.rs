//! Named parameter sets for the published figures.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::models::{ModelSpec, ReservoirSpec, RingSpec, SnsSpec, System};
use crate::{NhError, Result};

/// Hoppings of the disordered six-site ring.
pub const RING_HOPPINGS: [f64; 6] = [-0.859915, -0.884918, -0.918446, -0.846311, -1.19937, -0.984676];

/// Reservoir length used by the published runs.
pub const N_E: usize = 101;

/// Uniform grid including both end points.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Grid {
    pub start: f64,
    pub stop: f64,
    pub count: usize,
}

impl Grid {
    pub fn new(start: f64, stop: f64, count: usize) -> Self {
        Grid { start, stop, count }
    }

    pub fn validate(&self, name: &str) -> Result<()> {
        if self.count < 2 {
            return Err(NhError::Spec(format!("{name}.count must be at least 2, got {}", self.count)));
        }
        if !(self.stop > self.start) || !self.start.is_finite() || !self.stop.is_finite() {
            return Err(NhError::Spec(format!("{name}.stop must exceed {name}.start")));
        }
        Ok(())
    }

    pub fn step(&self) -> f64 {
        (self.stop - self.start) / (self.count - 1) as f64
    }

    pub fn points(&self) -> Vec<f64> {
        let h = self.step();
        (0..self.count)
            .map(|k| if k + 1 == self.count { self.stop } else { self.start + h * k as f64 })
            .collect()
    }
}

/// Which observables a preset is meant for.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PresetKind {
    Spectrum,
    Currents,
    SiteResolved,
    KappaScan,
    SusceptibilityNh,
    SusceptibilityExact,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Preset {
    pub name: &'static str,
    pub summary: &'static str,
    pub kind: PresetKind,
    pub system: System,
    pub phi: Grid,
    pub beta: Option<f64>,
    pub omega: Option<Grid>,
    pub eta: Option<f64>,
    /// Tunnel amplitudes for a coupling scan.
    pub kappas: Vec<f64>,
}

pub fn sns_model(phi: f64) -> ModelSpec {
    ModelSpec::Sns(SnsSpec { n_left: 4, n_mid: 4, n_right: 4, t: -1.0, delta: 1.0, mu: -1.1, phi })
}

pub fn ring_model(phi: f64) -> ModelSpec {
    ModelSpec::Ring(RingSpec { n: 6, t: -1.0, mu: -1.0, hoppings: RING_HOPPINGS.to_vec(), phi })
}

/// SNS junction with a wire on each end.
pub fn sns_system(n_e: usize, kappa: f64) -> System {
    let res = |attach| ReservoirSpec { n_sites: n_e, t: -1.0, g: -1.1, attach, kappa };
    System::new(sns_model(0.0), vec![res(0), res(11)])
}

/// Ring with one wire on its last site.
pub fn ring_system(n_e: usize, kappa: f64) -> System {
    System::new(ring_model(0.0), vec![ReservoirSpec { n_sites: n_e, t: -1.0, g: 0.0, attach: 5, kappa }])
}

pub fn phi_grid() -> Grid {
    Grid::new(0.0, 2.0 * PI, 201)
}

fn scan() -> Vec<f64> {
    (1..=10).map(|k| -0.1 * k as f64).collect()
}

fn base(name: &'static str, summary: &'static str, kind: PresetKind, system: System) -> Preset {
    Preset { name, summary, kind, system, phi: phi_grid(), beta: None, omega: None, eta: None, kappas: Vec::new() }
}

pub fn all() -> Vec<Preset> {
    let sns = sns_system(N_E, -0.4);
    let ring = ring_system(N_E, -1.0);
    let map_phi = Grid::new(0.0, 2.0 * PI, 101);
    let sns_omega = Grid::new(-2.0, 2.0, 201);
    let ring_omega = Grid::new(-4.0, 4.0, 401);
    use PresetKind::*;
    vec![
        base("fig1c", "SNS junction: biorthogonal spectrum and exceptional points", Spectrum, sns.clone()),
        base("fig1d", "disordered ring: biorthogonal spectrum and exceptional points", Spectrum, ring.clone()),
        base("fig2a", "SNS junction: trace, LR, RR, isolated and exact currents", Currents, sns.clone()),
        base("fig2b", "disordered ring: trace, LR, RR, isolated and exact currents", Currents, ring.clone()),
        Preset { beta: Some(10.0), ..base("fig3a", "SNS junction at beta = 10", Currents, sns.clone()) },
        Preset { beta: Some(10.0), ..base("fig3b", "disordered ring at beta = 10", Currents, ring.clone()) },
        Preset {
            phi: map_phi,
            omega: Some(sns_omega),
            ..base("fig4a", "SNS junction: non-Hermitian susceptibility map", SusceptibilityNh, sns.clone())
        },
        Preset {
            phi: map_phi,
            omega: Some(ring_omega),
            ..base("fig4b", "disordered ring: non-Hermitian susceptibility map", SusceptibilityNh, ring.clone())
        },
        base("figS1", "SNS junction: spectrum branches with phase rigidity", Spectrum, sns.clone()),
        base("figS2", "SNS junction: bond-resolved RR and operator currents", SiteResolved, sns.clone()),
        Preset { kappas: scan(), ..base("figS3a", "SNS junction: current against coupling strength", KappaScan, sns.clone()) },
        Preset { kappas: scan(), ..base("figS3b", "disordered ring: current against coupling strength", KappaScan, ring.clone()) },
        Preset {
            phi: map_phi,
            omega: Some(sns_omega),
            eta: Some(0.03),
            ..base("figS4a", "SNS junction: exact susceptibility map", SusceptibilityExact, sns)
        },
        Preset {
            phi: map_phi,
            omega: Some(ring_omega),
            eta: Some(0.03),
            ..base("figS4b", "disordered ring: exact susceptibility map", SusceptibilityExact, ring)
        },
    ]
}

pub fn by_name(name: &str) -> Option<Preset> {
    all().into_iter().find(|p| p.name.eq_ignore_ascii_case(name))
}

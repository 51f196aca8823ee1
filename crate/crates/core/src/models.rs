//! Tight-binding matrices: SNS junction, flux-threaded ring, reservoir
//! chains, the tunnel-coupled total system and bond current operators.

use std::ops::RangeInclusive;

use ndarray::s;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::linalg::zeros;
use crate::{CMatrix, NhError, Result, C64};

/// Superconductor / normal / superconductor chain.
///
/// Bond `j` joins sites `j` and `j + 1`. Pairing `Δ` sits on bonds inside the
/// left segment (phase 0) and inside the right segment (phase `φ`); the
/// bonds `n_left - 1 ..= n_left + n_mid - 1`, which include the two interface
/// bonds, carry no pairing. `μ` is a uniform on-site potential.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SnsSpec {
    pub n_left: usize,
    pub n_mid: usize,
    pub n_right: usize,
    pub t: f64,
    pub delta: f64,
    pub mu: f64,
    #[serde(default)]
    pub phi: f64,
}

/// Ring of `n` sites; bond `n - 1` closes the ring and carries the flux phase.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RingSpec {
    pub n: usize,
    /// Reference hopping, used for units and for generated disorder.
    pub t: f64,
    pub mu: f64,
    /// Bond hoppings `t_j`, one per bond.
    #[serde(default)]
    pub hoppings: Vec<f64>,
    #[serde(default)]
    pub phi: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ModelSpec {
    Sns(SnsSpec),
    Ring(RingSpec),
}

/// Semi-infinite wire truncated to `n_sites`, attached through its last site.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ReservoirSpec {
    pub n_sites: usize,
    pub t: f64,
    pub g: f64,
    /// Device site the wire couples to.
    pub attach: usize,
    pub kappa: f64,
}

fn spec_err<T>(msg: impl Into<String>) -> Result<T> {
    Err(NhError::Spec(msg.into()))
}

fn check_real(name: &str, x: f64) -> Result<()> {
    if x.is_finite() {
        Ok(())
    } else {
        spec_err(format!("{name} must be finite, got {x}"))
    }
}

/// Disordered ring hoppings `t_j = t * U(0.7, 1.3)`.
pub fn random_ring_hoppings(n: usize, t: f64, seed: u64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n).map(|_| t * rng.random_range(0.7..1.3)).collect()
}

impl ModelSpec {
    pub fn validate(&self) -> Result<()> {
        match self {
            ModelSpec::Sns(s) => {
                if s.n_left < 1 || s.n_mid < 1 || s.n_right < 1 {
                    return spec_err("sns segment sizes must all be at least 1");
                }
                check_real("t", s.t)?;
                check_real("delta", s.delta)?;
                check_real("mu", s.mu)?;
                check_real("phi", s.phi)?;
                if s.t >= 0.0 {
                    return spec_err(format!("t must be negative, got {}", s.t));
                }
                if s.delta < 0.0 {
                    return spec_err(format!("delta must be non-negative, got {}", s.delta));
                }
            }
            ModelSpec::Ring(r) => {
                if r.n < 3 {
                    return spec_err(format!("ring needs at least 3 sites, got {}", r.n));
                }
                check_real("t", r.t)?;
                check_real("mu", r.mu)?;
                check_real("phi", r.phi)?;
                if r.t >= 0.0 {
                    return spec_err(format!("t must be negative, got {}", r.t));
                }
                if r.hoppings.len() != r.n {
                    return spec_err(format!(
                        "ring has {} sites but {} hoppings",
                        r.n,
                        r.hoppings.len()
                    ));
                }
                if let Some(j) = r.hoppings.iter().position(|&h| h == 0.0 || !h.is_finite()) {
                    return spec_err(format!("hopping {j} must be finite and nonzero"));
                }
            }
        }
        Ok(())
    }

    pub fn n_sites(&self) -> usize {
        match self {
            ModelSpec::Sns(s) => s.n_left + s.n_mid + s.n_right,
            ModelSpec::Ring(r) => r.n,
        }
    }

    /// 2 for BdG, 1 for a normal system.
    pub fn doubling(&self) -> usize {
        match self {
            ModelSpec::Sns(_) => 2,
            ModelSpec::Ring(_) => 1,
        }
    }

    pub fn dim(&self) -> usize {
        self.doubling() * self.n_sites()
    }

    pub fn t(&self) -> f64 {
        match self {
            ModelSpec::Sns(s) => s.t,
            ModelSpec::Ring(r) => r.t,
        }
    }

    pub fn phi(&self) -> f64 {
        match self {
            ModelSpec::Sns(s) => s.phi,
            ModelSpec::Ring(r) => r.phi,
        }
    }

    pub fn with_phi(&self, phi: f64) -> ModelSpec {
        let mut m = self.clone();
        match &mut m {
            ModelSpec::Sns(s) => s.phi = phi,
            ModelSpec::Ring(r) => r.phi = phi,
        }
        m
    }

    /// Number of bonds.
    pub fn n_bonds(&self) -> usize {
        match self {
            ModelSpec::Sns(s) => s.n_left + s.n_mid + s.n_right - 1,
            ModelSpec::Ring(r) => r.n,
        }
    }

    /// Sites joined by bond `j`.
    pub fn bond_sites(&self, j: usize) -> (usize, usize) {
        (j, (j + 1) % self.n_sites())
    }

    /// Hopping on bond `j`.
    pub fn hopping(&self, j: usize) -> f64 {
        match self {
            ModelSpec::Sns(s) => s.t,
            ModelSpec::Ring(r) => r.hoppings[j],
        }
    }

    /// Peierls phase on bond `j`.
    pub fn bond_phase(&self, j: usize) -> f64 {
        match self {
            ModelSpec::Sns(_) => 0.0,
            ModelSpec::Ring(r) => {
                if j + 1 == r.n {
                    r.phi
                } else {
                    0.0
                }
            }
        }
    }

    /// Bonds on which a current operator may be measured: the unpaired bonds
    /// of an SNS junction, every bond of a ring.
    pub fn current_bonds(&self) -> RangeInclusive<usize> {
        match self {
            ModelSpec::Sns(s) => (s.n_left - 1)..=(s.n_left + s.n_mid - 1),
            ModelSpec::Ring(r) => 0..=(r.n - 1),
        }
    }

    /// First bond of the unpaired segment for SNS, bond 0 for a ring.
    pub fn default_bond(&self) -> usize {
        *self.current_bonds().start()
    }
}

impl ReservoirSpec {
    pub fn validate(&self, n_sys: usize) -> Result<()> {
        if self.n_sites < 1 {
            return spec_err("reservoir needs at least one site");
        }
        check_real("reservoir t", self.t)?;
        check_real("reservoir g", self.g)?;
        check_real("kappa", self.kappa)?;
        if self.t >= 0.0 {
            return spec_err(format!("reservoir t must be negative, got {}", self.t));
        }
        if self.kappa > 0.0 {
            return spec_err(format!("kappa must be negative or zero, got {}", self.kappa));
        }
        if (self.g / 2.0).abs() >= self.t.abs() {
            return spec_err(format!(
                "|g/2| must be below |t| (g = {}, t = {})",
                self.g, self.t
            ));
        }
        if self.attach >= n_sys {
            return spec_err(format!(
                "attach site {} outside the device (0..{})",
                self.attach, n_sys
            ));
        }
        Ok(())
    }
}

/// Device plus the reservoirs it is coupled to.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct System {
    pub model: ModelSpec,
    #[serde(default)]
    pub reservoirs: Vec<ReservoirSpec>,
}

impl System {
    pub fn new(model: ModelSpec, reservoirs: Vec<ReservoirSpec>) -> Self {
        System { model, reservoirs }
    }

    pub fn validate(&self) -> Result<()> {
        self.model.validate()?;
        let n = self.model.n_sites();
        for (i, r) in self.reservoirs.iter().enumerate() {
            r.validate(n)?;
            if self.reservoirs[..i].iter().any(|o| o.attach == r.attach) {
                return spec_err(format!("two reservoirs attach to site {}", r.attach));
            }
        }
        Ok(())
    }

    pub fn with_phi(&self, phi: f64) -> System {
        System { model: self.model.with_phi(phi), reservoirs: self.reservoirs.clone() }
    }

    /// Same device with every tunnel amplitude replaced.
    pub fn with_kappa(&self, kappa: f64) -> System {
        let mut s = self.clone();
        for r in &mut s.reservoirs {
            r.kappa = kappa;
        }
        s
    }

    pub fn isolated(&self) -> System {
        System { model: self.model.clone(), reservoirs: Vec::new() }
    }

    /// Sites per particle sector of the total system.
    pub fn total_sites(&self) -> usize {
        self.model.n_sites() + self.reservoirs.iter().map(|r| r.n_sites).sum::<usize>()
    }

    pub fn total_dim(&self) -> usize {
        self.model.doubling() * self.total_sites()
    }
}

fn build_chain_particle(m: &ModelSpec) -> CMatrix {
    let n = m.n_sites();
    let mut h = zeros(n);
    for j in 0..m.n_bonds() {
        let (a, b) = m.bond_sites(j);
        let v = C64::from_polar(m.hopping(j), -m.bond_phase(j));
        h[[a, b]] += v;
        h[[b, a]] += v.conj();
    }
    let mu = match m {
        ModelSpec::Sns(s) => s.mu,
        ModelSpec::Ring(r) => r.mu,
    };
    for i in 0..n {
        h[[i, i]] += mu;
    }
    h
}

fn sns_pairing(s: &SnsSpec) -> CMatrix {
    let n = s.n_left + s.n_mid + s.n_right;
    let mut d = zeros(n);
    let right_pair = C64::from_polar(s.delta, -s.phi);
    for j in 0..n - 1 {
        let v = if j + 2 <= s.n_left {
            C64::new(s.delta, 0.0)
        } else if j >= s.n_left + s.n_mid {
            right_pair
        } else {
            continue;
        };
        d[[j, j + 1]] = v;
        d[[j + 1, j]] = -v;
    }
    d
}

fn bdg(h: &CMatrix, d: &CMatrix) -> CMatrix {
    let n = h.nrows();
    let mut out = zeros(2 * n);
    out.slice_mut(s![..n, ..n]).assign(h);
    out.slice_mut(s![..n, n..]).assign(d);
    out.slice_mut(s![n.., ..n]).assign(&d.t().mapv(|z| z.conj()));
    out.slice_mut(s![n.., n..]).assign(&h.mapv(|z| -z.conj()));
    out
}

/// BdG matrix of the SNS junction in the basis `(c, c†)`.
pub fn build_sns(spec: &ModelSpec) -> Result<CMatrix> {
    spec.validate()?;
    match spec {
        ModelSpec::Sns(s) => Ok(bdg(&build_chain_particle(spec), &sns_pairing(s))),
        _ => spec_err("build_sns needs an sns model"),
    }
}

/// Flux-threaded ring.
pub fn build_ring(spec: &ModelSpec) -> Result<CMatrix> {
    spec.validate()?;
    match spec {
        ModelSpec::Ring(_) => Ok(build_chain_particle(spec)),
        _ => spec_err("build_ring needs a ring model"),
    }
}

/// Device Hamiltonian of either kind.
pub fn build_system(spec: &ModelSpec) -> Result<CMatrix> {
    match spec {
        ModelSpec::Sns(_) => build_sns(spec),
        ModelSpec::Ring(_) => build_ring(spec),
    }
}

/// Open chain with hopping `t` and on-site energy `g`.
pub fn build_reservoir(res: &ReservoirSpec) -> Result<CMatrix> {
    if res.n_sites < 1 {
        return spec_err("reservoir needs at least one site");
    }
    let n = res.n_sites;
    let mut h = zeros(n);
    for i in 0..n {
        h[[i, i]] = C64::new(res.g, 0.0);
        if i + 1 < n {
            h[[i, i + 1]] = C64::new(res.t, 0.0);
            h[[i + 1, i]] = C64::new(res.t, 0.0);
        }
    }
    Ok(h)
}

/// Index bookkeeping for the total basis: per sector, device sites first,
/// then each reservoir in order. BdG adds a hole sector of the same size.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TotalLayout {
    pub n_sys: usize,
    pub half: usize,
    pub doubling: usize,
}

impl TotalLayout {
    pub fn of(sys: &System) -> Self {
        TotalLayout {
            n_sys: sys.model.n_sites(),
            half: sys.total_sites(),
            doubling: sys.model.doubling(),
        }
    }

    pub fn dim(&self) -> usize {
        self.doubling * self.half
    }

    /// Total-basis index of a device-basis index.
    pub fn map(&self, i: usize) -> usize {
        if i < self.n_sys {
            i
        } else {
            i - self.n_sys + self.half
        }
    }

    /// Embed a device operator into the total basis.
    pub fn embed(&self, op: &CMatrix) -> CMatrix {
        let mut out = zeros(self.dim());
        for ((a, b), v) in op.indexed_iter() {
            if *v != C64::new(0.0, 0.0) {
                out[[self.map(a), self.map(b)]] = *v;
            }
        }
        out
    }

    /// First index of reservoir `r` in the particle sector.
    pub fn reservoir_offset(&self, sys: &System, r: usize) -> usize {
        self.n_sys + sys.reservoirs[..r].iter().map(|x| x.n_sites).sum::<usize>()
    }
}

/// Hermitian matrix of device, reservoirs and tunnelling. For BdG the
/// reservoir and tunnel blocks enter the hole sector with a minus sign.
pub fn build_total(sys: &System) -> Result<CMatrix> {
    sys.validate()?;
    let lay = TotalLayout::of(sys);
    let n = lay.n_sys;
    let m = lay.half;
    let hsys = build_system(&sys.model)?;
    let mut h = zeros(m);
    h.slice_mut(s![..n, ..n]).assign(&hsys.slice(s![..n, ..n]));
    for (r, res) in sys.reservoirs.iter().enumerate() {
        let off = lay.reservoir_offset(sys, r);
        let hr = build_reservoir(res)?;
        h.slice_mut(s![off..off + res.n_sites, off..off + res.n_sites]).assign(&hr);
        let last = off + res.n_sites - 1;
        h[[last, res.attach]] = C64::new(res.kappa, 0.0);
        h[[res.attach, last]] = C64::new(res.kappa, 0.0);
    }
    match &sys.model {
        ModelSpec::Ring(_) => Ok(h),
        ModelSpec::Sns(_) => {
            let mut d = zeros(m);
            d.slice_mut(s![..n, ..n]).assign(&hsys.slice(s![..n, n..]));
            Ok(bdg(&h, &d))
        }
    }
}

fn bond_current_block(n: usize, a: usize, b: usize, t: f64, phase: f64) -> CMatrix {
    let mut k = zeros(n);
    let v = C64::new(0.0, -1.0) * C64::from_polar(t, -phase);
    k[[a, b]] = v;
    k[[b, a]] = v.conj();
    k
}

fn double(k: &CMatrix, doubling: usize) -> CMatrix {
    if doubling == 1 {
        return k.clone();
    }
    let n = k.nrows();
    let mut out = zeros(2 * n);
    out.slice_mut(s![..n, ..n]).assign(k);
    out.slice_mut(s![n.., n..]).assign(&k.mapv(|z| -z.conj()));
    out
}

/// First-quantized current on bond `j`, `J_j = -i t_j (c†_j c_{j+1} - h.c.)`,
/// normalised so that `J_j = C† 𝓙 C / doubling`.
pub fn current_operator(spec: &ModelSpec, j: usize) -> Result<CMatrix> {
    spec.validate()?;
    if !spec.current_bonds().contains(&j) {
        return spec_err(format!(
            "bond {j} is not a valid current bond (allowed {:?})",
            spec.current_bonds()
        ));
    }
    let (a, b) = spec.bond_sites(j);
    let k = bond_current_block(spec.n_sites(), a, b, spec.hopping(j), spec.bond_phase(j));
    Ok(double(&k, spec.doubling()))
}

/// Current on any device bond, including paired SNS bonds where it is not conserved.
pub fn bond_current_operator(spec: &ModelSpec, j: usize) -> Result<CMatrix> {
    spec.validate()?;
    if j >= spec.n_bonds() {
        return spec_err(format!("bond {j} out of range"));
    }
    let (a, b) = spec.bond_sites(j);
    let k = bond_current_block(spec.n_sites(), a, b, spec.hopping(j), spec.bond_phase(j));
    Ok(double(&k, spec.doubling()))
}

/// Current from device site into reservoir `r` through its tunnel bond, in the total basis.
pub fn tunnel_current_operator(sys: &System, r: usize) -> Result<CMatrix> {
    sys.validate()?;
    let res = sys.reservoirs.get(r).ok_or_else(|| NhError::Spec(format!("no reservoir {r}")))?;
    let lay = TotalLayout::of(sys);
    let last = lay.reservoir_offset(sys, r) + res.n_sites - 1;
    let k = bond_current_block(lay.half, res.attach, last, res.kappa, 0.0);
    Ok(double(&k, lay.doubling))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{dagger, eigh, max_abs};

    pub(crate) fn sns(phi: f64, delta: f64) -> ModelSpec {
        ModelSpec::Sns(SnsSpec { n_left: 4, n_mid: 4, n_right: 4, t: -1.0, delta, mu: -1.1, phi })
    }

    #[test]
    fn sns_is_hermitian_and_particle_hole_symmetric() {
        let h = build_sns(&sns(0.0, 1.0)).unwrap();
        assert_eq!(h.dim(), (24, 24));
        assert!(max_abs(&(&h - &dagger(&h))) <= 1e-14);
        let (w, _) = eigh(&h).unwrap();
        for i in 0..24 {
            assert!((w[i] + w[23 - i]).abs() < 1e-12);
        }
    }

    #[test]
    fn sns_without_pairing_is_block_diagonal() {
        let h = build_sns(&sns(0.7, 0.0)).unwrap();
        assert!(h.slice(s![..12, 12..]).iter().all(|z| z.norm() == 0.0));
        for i in 0..12usize {
            for j in 0..12 {
                let expect = if i == j {
                    -1.1
                } else if i.abs_diff(j) == 1 {
                    -1.0
                } else {
                    0.0
                };
                assert_eq!(h[[i, j]], C64::new(expect, 0.0));
            }
        }
    }

    #[test]
    fn sns_pairing_placement() {
        let h = build_sns(&sns(0.4, 1.0)).unwrap();
        let paired: Vec<usize> = (0..11).filter(|&j| h[[j, 12 + j + 1]].norm() > 0.0).collect();
        assert_eq!(paired, vec![0, 1, 2, 8, 9, 10]);
        assert!((h[[9, 12 + 10]] - C64::from_polar(1.0, -0.4)).norm() < 1e-15);
        assert_eq!(h[[1, 12]], C64::new(-1.0, 0.0));
    }

    #[test]
    fn sns_phase_pi_equals_minus_pi() {
        let (a, _) = eigh(&build_sns(&sns(std::f64::consts::PI, 1.0)).unwrap()).unwrap();
        let (b, _) = eigh(&build_sns(&sns(-std::f64::consts::PI, 1.0)).unwrap()).unwrap();
        assert!((&a - &b).iter().all(|x| x.abs() < 1e-12));
    }

    pub(crate) const FOOTNOTE_T: [f64; 6] =
        [-0.859915, -0.884918, -0.918446, -0.846311, -1.19937, -0.984676];

    pub(crate) fn ring(phi: f64, hop: Vec<f64>, mu: f64) -> ModelSpec {
        ModelSpec::Ring(RingSpec { n: hop.len(), t: -1.0, mu, hoppings: hop, phi })
    }

    #[test]
    fn ring_trace_and_hermiticity() {
        let h = build_ring(&ring(0.0, FOOTNOTE_T.to_vec(), -1.0)).unwrap();
        assert!(max_abs(&(&h - &dagger(&h))) <= 1e-14);
        let tr: C64 = h.diag().iter().sum();
        assert!((tr - C64::new(-6.0, 0.0)).norm() < 1e-12);
    }

    #[test]
    fn uniform_ring_spectrum_closed_form() {
        let n = 6;
        let phi = 0.83;
        let (w, _) = eigh(&build_ring(&ring(phi, vec![-1.0; n], 0.0)).unwrap()).unwrap();
        let mut expect: Vec<f64> = (0..n)
            .map(|k| -2.0 * ((2.0 * std::f64::consts::PI * k as f64 + phi) / n as f64).cos())
            .collect();
        expect.sort_by(f64::total_cmp);
        for (a, b) in w.iter().zip(expect) {
            assert!((a - b).abs() < 1e-10);
        }
    }

    #[test]
    fn ring_flux_period() {
        let a = build_ring(&ring(0.3, FOOTNOTE_T.to_vec(), -1.0)).unwrap();
        let b = build_ring(&ring(0.3 + 2.0 * std::f64::consts::PI, FOOTNOTE_T.to_vec(), -1.0))
            .unwrap();
        assert!(max_abs(&(&a - &b)) < 1e-15);
    }

    #[test]
    fn ring_rejects_wrong_hopping_count() {
        let mut m = ring(0.0, vec![-1.0; 5], 0.0);
        if let ModelSpec::Ring(r) = &mut m {
            r.n = 6;
        }
        assert!(matches!(build_ring(&m), Err(NhError::Spec(_))));
    }

    #[test]
    fn reservoir_spectra() {
        let res = |n, g| ReservoirSpec { n_sites: n, t: -1.0, g, attach: 0, kappa: -1.0 };
        let (w, _) = eigh(&build_reservoir(&res(2, 0.0)).unwrap()).unwrap();
        assert!((w[0] + 1.0).abs() < 1e-15 && (w[1] - 1.0).abs() < 1e-15);
        let (w, _) = eigh(&build_reservoir(&res(101, 0.0)).unwrap()).unwrap();
        let mut expect: Vec<f64> = (1..=101)
            .map(|k| -2.0 * (k as f64 * std::f64::consts::PI / 102.0).cos())
            .collect();
        expect.sort_by(f64::total_cmp);
        for (a, b) in w.iter().zip(&expect) {
            assert!((a - b).abs() < 1e-10);
        }
        let (ws, _) = eigh(&build_reservoir(&res(101, -1.1)).unwrap()).unwrap();
        for (a, b) in ws.iter().zip(w.iter()) {
            assert!((a - (b - 1.1)).abs() < 1e-12);
        }
    }

    fn fig_sns_system(kappa: f64) -> System {
        let res = |attach| ReservoirSpec { n_sites: 101, t: -1.0, g: -1.1, attach, kappa };
        System::new(sns(1.3, 1.0), vec![res(0), res(11)])
    }

    #[test]
    fn total_dimensions_and_symmetry() {
        let ring_sys = System::new(
            ring(0.5, FOOTNOTE_T.to_vec(), -1.0),
            vec![ReservoirSpec { n_sites: 101, t: -1.0, g: 0.0, attach: 5, kappa: -1.0 }],
        );
        let h = build_total(&ring_sys).unwrap();
        assert_eq!(h.nrows(), 107);
        assert!(max_abs(&(&h - &dagger(&h))) <= 1e-14);

        let h = build_total(&fig_sns_system(-0.4)).unwrap();
        assert_eq!(h.nrows(), 428);
        assert!(max_abs(&(&h - &dagger(&h))) <= 1e-14);
        let (w, _) = eigh(&h).unwrap();
        for i in 0..428 {
            assert!((w[i] + w[427 - i]).abs() < 1e-10);
        }
    }

    #[test]
    fn decoupled_total_contains_device_spectrum() {
        let sys = fig_sns_system(0.0);
        let (wt, _) = eigh(&build_total(&sys).unwrap()).unwrap();
        let (ws, _) = eigh(&build_sns(&sys.model).unwrap()).unwrap();
        let (wr, _) = eigh(&build_reservoir(&sys.reservoirs[0]).unwrap()).unwrap();
        let mut union: Vec<f64> = ws.to_vec();
        for _ in 0..2 {
            union.extend(wr.iter());
            union.extend(wr.iter().map(|x| -x));
        }
        union.sort_by(f64::total_cmp);
        for (a, b) in wt.iter().zip(&union) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn duplicate_attach_rejected() {
        let mut sys = fig_sns_system(-0.4);
        sys.reservoirs[1].attach = 0;
        assert!(matches!(build_total(&sys), Err(NhError::Spec(_))));
    }

    #[test]
    fn current_operators_are_hermitian_and_traceless() {
        for m in [sns(0.9, 1.0), ring(0.9, FOOTNOTE_T.to_vec(), -1.0)] {
            for j in m.current_bonds() {
                let op = current_operator(&m, j).unwrap();
                assert!(max_abs(&(&op - &dagger(&op))) <= 1e-15);
                let tr: C64 = op.diag().iter().sum();
                assert!(tr.norm() == 0.0);
            }
        }
        assert!(current_operator(&sns(0.0, 1.0), 2).is_err());
        assert!(current_operator(&sns(0.0, 1.0), 8).is_err());
        assert_eq!(sns(0.0, 1.0).default_bond(), 3);
    }

    #[test]
    fn ring_closing_bond_current_is_phase_derivative() {
        let m = ring(0.7, FOOTNOTE_T.to_vec(), -1.0);
        let d = 1e-6;
        let hp = build_ring(&m.with_phi(0.7 + d)).unwrap();
        let hm = build_ring(&m.with_phi(0.7 - d)).unwrap();
        let deriv = (hp - hm).mapv(|z| z / (2.0 * d));
        let op = current_operator(&m, 5).unwrap();
        assert!(max_abs(&(&deriv - &op)) < 1e-9);
    }

    #[test]
    fn builders_are_deterministic() {
        let sys = fig_sns_system(-0.4);
        assert_eq!(build_total(&sys).unwrap(), build_total(&sys).unwrap());
        assert_eq!(random_ring_hoppings(6, -1.0, 7), random_ring_hoppings(6, -1.0, 7));
        assert!(random_ring_hoppings(50, -1.0, 3).iter().all(|h| (-1.3..=-0.7).contains(h)));
    }
}

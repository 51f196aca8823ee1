//! Equilibrium correlators and persistent currents from the biorthogonal spectrum.

use std::f64::consts::PI;

use ndarray::Array1;

use crate::biortho::{eigenvalues, BiorthogonalSpectrum};
use crate::linalg::{eigh, sandwich};
use crate::models::{bond_current_operator, build_system, current_operator, ModelSpec, System};
use crate::selfenergy::effective_hamiltonian;
use crate::specfn::{f_eff_beta, f_eff_zero, fermi_dirac, log_gamma, log_lower, step_occupation};
use crate::{CMatrix, NhError, Result, Temperature, C64};

/// Eigenvalues this close to zero drop out of `Σ ε ln ε`.
pub const ZERO_MODE_TOL: f64 = 1e-12;

/// Default finite-difference step in φ.
pub const DEFAULT_DELTA_PHI: f64 = 1e-4;

/// Non-Hermitian distribution at zero or finite temperature.
pub fn f_eff(eps: C64, temp: Temperature) -> Result<C64> {
    match temp {
        Temperature::Zero => f_eff_zero(eps),
        Temperature::Beta(b) => f_eff_beta(eps, b),
    }
}

fn distribution(spec: &BiorthogonalSpectrum, temp: Temperature) -> Result<Vec<C64>> {
    spec.eigenvalues.iter().map(|&e| f_eff(e, temp)).collect()
}

/// `⟨C†_a C_b⟩` over the full (doubled, for BdG) basis.
///
/// For BdG the block `a = N + i` holds the anomalous correlators `⟨c_i c_b⟩`.
pub fn correlator_matrix(spec: &BiorthogonalSpectrum, temp: Temperature) -> Result<CMatrix> {
    let f = distribution(spec, temp)?;
    let d = spec.dim();
    let mut lf = spec.left.mapv(|z| z.conj());
    let mut rf = spec.right.mapv(|z| z.conj());
    for n in 0..d {
        let fn_ = f[n];
        lf.column_mut(n).mapv_inplace(|z| z * fn_);
        rf.column_mut(n).mapv_inplace(|z| z * fn_.conj());
    }
    let a = lf.dot(&spec.right.t());
    let b = rf.dot(&spec.left.t());
    Ok((a - b).mapv(|z| z / C64::new(0.0, 2.0)))
}

/// Per-mode `⟨L_n|O|R_n⟩`.
pub fn mode_expectations_lr(spec: &BiorthogonalSpectrum, op: &CMatrix) -> Vec<C64> {
    (0..spec.dim()).map(|n| sandwich(spec.left_vec(n), op, spec.right_vec(n))).collect()
}

/// `⟨O⟩ = Im Σ_n ⟨L_n|O|R_n⟩ f_eff(ε_n) / doubling`.
pub fn expect_quadratic(spec: &BiorthogonalSpectrum, op: &CMatrix, temp: Temperature) -> Result<f64> {
    let f = distribution(spec, temp)?;
    let s: C64 = mode_expectations_lr(spec, op).iter().zip(&f).map(|(x, f)| x * f).sum();
    Ok(s.im / spec.doubling as f64)
}

/// Expectation with `f_eff + c1` in the `L†OR` term and `(f_eff + c2)*` in its conjugate partner.
pub fn expect_quadratic_shifted(
    spec: &BiorthogonalSpectrum,
    op: &CMatrix,
    temp: Temperature,
    c1: C64,
    c2: C64,
) -> Result<C64> {
    let f = distribution(spec, temp)?;
    let mut s = C64::new(0.0, 0.0);
    for n in 0..spec.dim() {
        let lr = sandwich(spec.left_vec(n), op, spec.right_vec(n));
        let rl = sandwich(spec.right_vec(n), op, spec.left_vec(n));
        s += lr * (f[n] + c1) - rl * (f[n] + c2).conj();
    }
    Ok(s / C64::new(0.0, 2.0) / spec.doubling as f64)
}

fn trace_h_log_h(e: &[C64]) -> Result<C64> {
    let mut s = C64::new(0.0, 0.0);
    for &z in e {
        if z.norm() < ZERO_MODE_TOL {
            continue;
        }
        s += z * log_lower(z)?;
    }
    Ok(s)
}

fn check_step(delta_phi: f64) -> Result<()> {
    if delta_phi > 0.0 && delta_phi.is_finite() {
        Ok(())
    } else {
        Err(NhError::Spec(format!("delta_phi must be positive, got {delta_phi}")))
    }
}

fn spectrum_at(sys: &System, phi: f64) -> Result<Vec<C64>> {
    eigenvalues(&effective_hamiltonian(&sys.with_phi(phi))?.matrix)
}

/// `I = -(1/π) d/dφ Im Σ_n ε_n ln ε_n` by a central difference.
pub fn persistent_current_trace(sys: &System, phi: f64, delta_phi: f64) -> Result<f64> {
    check_step(delta_phi)?;
    let sp = trace_h_log_h(&spectrum_at(sys, phi + delta_phi)?)?.im;
    let sm = trace_h_log_h(&spectrum_at(sys, phi - delta_phi)?)?.im;
    Ok(-(sp - sm) / (2.0 * delta_phi) / PI)
}

/// `(i/π) d/dφ Σ_n ε_n ln ε_n`; equals the current for particle-hole symmetric spectra.
pub fn supercurrent_trace_shortcut(sys: &System, phi: f64, delta_phi: f64) -> Result<C64> {
    check_step(delta_phi)?;
    let sp = trace_h_log_h(&spectrum_at(sys, phi + delta_phi)?)?;
    let sm = trace_h_log_h(&spectrum_at(sys, phi - delta_phi)?)?;
    Ok(C64::new(0.0, 1.0 / PI) * (sp - sm) / (2.0 * delta_phi))
}

fn log_gamma_trace(e: &[C64], beta: f64) -> Result<f64> {
    let mut s = 0.0;
    for &z in e {
        let zc = C64::new(z.re, z.im.min(0.0));
        s += log_gamma(C64::new(0.5, 0.0) + C64::i() * zc * (beta / (2.0 * PI)))?.re;
    }
    Ok(2.0 * s / beta)
}

/// `I = (2/β) d/dφ Re Σ_n ln Γ(1/2 + iβε_n/2π)` by a central difference.
pub fn persistent_current_finite_t(sys: &System, phi: f64, beta: f64, delta_phi: f64) -> Result<f64> {
    check_step(delta_phi)?;
    if !(beta > 0.0 && beta.is_finite()) {
        return Err(NhError::Spec(format!("beta must be positive, got {beta}")));
    }
    let rp = log_gamma_trace(&spectrum_at(sys, phi + delta_phi)?, beta)?;
    let rm = log_gamma_trace(&spectrum_at(sys, phi - delta_phi)?, beta)?;
    Ok((rp - rm) / (2.0 * delta_phi))
}

/// Trace-formula current at either temperature.
pub fn persistent_current(sys: &System, phi: f64, temp: Temperature, delta_phi: f64) -> Result<f64> {
    match temp {
        Temperature::Zero => persistent_current_trace(sys, phi, delta_phi),
        Temperature::Beta(b) => persistent_current_finite_t(sys, phi, b, delta_phi),
    }
}

/// `Σ_{Re ε ≤ 0} ⟨L|𝓙|R⟩ / doubling`; complex in general.
pub fn current_lr(spec: &BiorthogonalSpectrum, j_op: &CMatrix) -> C64 {
    let mut s = C64::new(0.0, 0.0);
    for n in 0..spec.dim() {
        if spec.eigenvalues[n].re <= 0.0 {
            s += sandwich(spec.left_vec(n), j_op, spec.right_vec(n));
        }
    }
    s / spec.doubling as f64
}

/// `Σ_{Re ε ≤ 0} ⟨R|𝓙|R⟩ / (‖R‖² doubling)`.
pub fn current_rr(spec: &BiorthogonalSpectrum, j_op: &CMatrix) -> f64 {
    let mut s = 0.0;
    for n in 0..spec.dim() {
        if spec.eigenvalues[n].re <= 0.0 {
            let r = spec.right_vec(n);
            let nn: f64 = r.iter().map(|z| z.norm_sqr()).sum();
            s += sandwich(r, j_op, r).re / nn;
        }
    }
    s / spec.doubling as f64
}

/// Right-right current on each requested bond.
pub fn current_rr_site_resolved(
    spec: &BiorthogonalSpectrum,
    model: &ModelSpec,
    bonds: &[usize],
) -> Result<Vec<f64>> {
    bonds.iter().map(|&j| Ok(current_rr(spec, &bond_current_operator(model, j)?))).collect()
}

/// Operator-form current on each requested bond.
pub fn current_operator_site_resolved(
    spec: &BiorthogonalSpectrum,
    model: &ModelSpec,
    bonds: &[usize],
    temp: Temperature,
) -> Result<Vec<f64>> {
    bonds
        .iter()
        .map(|&j| expect_quadratic(spec, &bond_current_operator(model, j)?, temp))
        .collect()
}

/// Occupation weight of a Hermitian level.
pub fn occupation(e: f64, temp: Temperature) -> f64 {
    match temp {
        Temperature::Zero => step_occupation(e),
        Temperature::Beta(b) => fermi_dirac(e, b),
    }
}

/// Weighted sum `Σ_n w(ε_n) ⟨ψ_n|O|ψ_n⟩ / doubling` over a Hermitian eigenbasis.
pub(crate) fn thermal_expectation(
    w: &Array1<f64>,
    v: &CMatrix,
    op: &CMatrix,
    temp: Temperature,
    doubling: usize,
) -> f64 {
    let nz: Vec<(usize, usize, C64)> =
        op.indexed_iter().filter(|(_, z)| **z != C64::new(0.0, 0.0)).map(|((a, b), z)| (a, b, *z)).collect();
    let mut s = 0.0;
    for n in 0..w.len() {
        let occ = occupation(w[n], temp);
        if occ == 0.0 {
            continue;
        }
        let x: C64 = nz.iter().map(|&(a, b, z)| v[[a, n]].conj() * z * v[[b, n]]).sum();
        s += occ * x.re;
    }
    s / doubling as f64
}

/// Current of the isolated Hermitian device on bond `bond`.
pub fn isolated_current_at(model: &ModelSpec, bond: usize, temp: Temperature) -> Result<f64> {
    let (w, v) = eigh(&build_system(model)?)?;
    let op = current_operator(model, bond)?;
    Ok(thermal_expectation(&w, &v, &op, temp, model.doubling()))
}

/// Current of the isolated Hermitian device on its default bond.
pub fn isolated_current(model: &ModelSpec, temp: Temperature) -> Result<f64> {
    isolated_current_at(model, model.default_bond(), temp)
}

//! Imaginary part of the bond-current susceptibility at zero temperature.

use std::f64::consts::PI;

use ndarray::{Array1, Array2};
use serde::{Deserialize, Serialize};

use crate::biortho::{biorthogonal_eig, BiorthogonalSpectrum};
use crate::models::{ModelSpec, System};
use crate::oracle::HermitianSpectrum;
use crate::selfenergy::effective_hamiltonian;
use crate::specfn::{log_side, step_occupation, Side};
use crate::{CMatrix, NhError, Result, C64};

/// Default Lorentzian half-width of the exact map.
pub const DEFAULT_ETA: f64 = 0.03;

const DEGENERATE_TOL: f64 = 1e-10;

/// `(ln x - ln y) / (x - y)` with each logarithm continued from its own side.
fn log_quotient(x: C64, sx: Side, y: C64, sy: Side) -> Result<C64> {
    let d = x - y;
    if d.norm() < DEGENERATE_TOL {
        let m = (x + y) * 0.5;
        if m.norm() == 0.0 {
            return Err(NhError::Domain(m));
        }
        return Ok(m.inv());
    }
    Ok((log_side(x, sx)? - log_side(y, sy)?) / d)
}

/// The four frequency kernels for the mode pair `(n, m)`.
fn kernels(en: C64, em: C64, omega: f64) -> Result<[C64; 4]> {
    use Side::{Lower, Upper};
    let w = C64::new(omega, 0.0);
    Ok([
        -log_quotient(-en, Upper, -em + w, Upper)?,
        log_quotient(en, Lower, em.conj() - w, Upper)?,
        -log_quotient(-en.conj(), Lower, -em.conj() + w, Lower)?,
        log_quotient(en.conj(), Upper, em - w, Lower)?,
    ])
}

/// Mode-resolved coefficients `R_i L*_j` and `L_i R*_j`.
fn coefficients(spec: &BiorthogonalSpectrum, i: usize, j: usize) -> (Array1<C64>, Array1<C64>) {
    let d = spec.dim();
    let a = Array1::from_shape_fn(d, |n| spec.right[[i, n]] * spec.left[[j, n]].conj());
    let at = Array1::from_shape_fn(d, |n| spec.left[[i, n]] * spec.right[[j, n]].conj());
    (a, at)
}

fn outer(a: &Array1<C64>, b: &Array1<C64>) -> CMatrix {
    Array2::from_shape_fn((a.len(), b.len()), |(n, m)| a[n] * b[m])
}

/// Weighted sum of index quadruples, contracted mode by mode.
struct Contraction {
    /// Coefficient matrices for the four kernels.
    x: [CMatrix; 4],
}

impl Contraction {
    fn new(spec: &BiorthogonalSpectrum, terms: &[(f64, usize, usize, usize, usize)]) -> Self {
        let d = spec.dim();
        let mut x = [CMatrix::zeros((d, d)), CMatrix::zeros((d, d)), CMatrix::zeros((d, d)), CMatrix::zeros((d, d))];
        for &(sg, i, j, k, l) in terms {
            let (a, at) = coefficients(spec, i, j);
            let (b, bt) = coefficients(spec, k, l);
            x[0].scaled_add(C64::new(sg, 0.0), &outer(&a, &b));
            x[1].scaled_add(C64::new(-sg, 0.0), &outer(&a, &bt));
            x[2].scaled_add(C64::new(sg, 0.0), &outer(&at, &bt));
            x[3].scaled_add(C64::new(-sg, 0.0), &outer(&at, &b));
        }
        Contraction { x }
    }

    fn eval(&self, e: &[C64], omega: f64) -> Result<C64> {
        let d = e.len();
        let mut s = C64::new(0.0, 0.0);
        for n in 0..d {
            for m in 0..d {
                let k = kernels(e[n], e[m], omega)?;
                for (kk, xx) in k.iter().zip(&self.x) {
                    s += kk * xx[[n, m]];
                }
            }
        }
        Ok(-s / (4.0 * PI * PI))
    }
}

/// `P_ijkl(ω) = ∫ dω' ⟨i|ρ(ω')|j⟩ ⟨k|ρ(ω' + ω)|l⟩ Θ(-ω')` for the non-Hermitian spectral function.
pub fn p_integral(spec: &BiorthogonalSpectrum, i: usize, j: usize, k: usize, l: usize, omega: f64) -> Result<C64> {
    let d = spec.dim();
    if [i, j, k, l].iter().any(|&x| x >= d) {
        return Err(NhError::Spec(format!("index out of range for dimension {d}")));
    }
    Contraction::new(spec, &[(1.0, i, j, k, l)]).eval(&spec.eigenvalues, omega)
}

fn check_bond(model: &ModelSpec, bond: usize) -> Result<()> {
    if !model.current_bonds().contains(&bond) || model.bond_phase(bond) != 0.0 {
        return Err(NhError::Spec(format!("bond {bond} must be an unpaired bond without flux phase")));
    }
    Ok(())
}

/// Index quadruples entering the bond-`j` current-current correlator.
fn bond_terms(model: &ModelSpec, j: usize) -> Vec<(f64, usize, usize, usize, usize)> {
    let (a, b) = model.bond_sites(j);
    let mut t = vec![(1.0, b, a, b, a), (-1.0, a, a, b, b), (1.0, a, b, a, b), (-1.0, b, b, a, a)];
    if model.doubling() == 2 {
        let n = model.n_sites();
        t.extend([
            (1.0, n + b, a, b, n + a),
            (-1.0, n + a, a, b, n + b),
            (1.0, n + a, b, a, n + b),
            (-1.0, n + b, b, a, n + a),
        ]);
    }
    t
}

/// `Im Π(ω) = π t_j² Re[ℙ(ω) - ℙ(-ω)]` on bond `bond` for each frequency.
pub fn im_susceptibility_nh(
    spec: &BiorthogonalSpectrum,
    model: &ModelSpec,
    bond: usize,
    omegas: &[f64],
) -> Result<Vec<f64>> {
    check_bond(model, bond)?;
    let c = Contraction::new(spec, &bond_terms(model, bond));
    let e = &spec.eigenvalues;
    let t2 = model.hopping(bond).powi(2);
    omegas
        .iter()
        .map(|&w| {
            if w == 0.0 {
                return Ok(0.0);
            }
            Ok(PI * t2 * (c.eval(e, w)? - c.eval(e, -w)?).re)
        })
        .collect()
}

/// Non-Hermitian map row at the system's current phase.
pub fn susceptibility_nh_row(sys: &System, bond: usize, omegas: &[f64]) -> Result<Vec<f64>> {
    let spec = biorthogonal_eig(&effective_hamiltonian(sys)?)?;
    im_susceptibility_nh(&spec, &sys.model, bond, omegas)
}

/// Exact map row from the Hermitian total system with Lorentzian width `eta`.
pub fn susceptibility_exact_row(sys: &System, bond: usize, omegas: &[f64], eta: f64) -> Result<Vec<f64>> {
    check_bond(&sys.model, bond)?;
    if !(eta > 0.0 && eta.is_finite()) {
        return Err(NhError::Spec(format!("eta must be positive, got {eta}")));
    }
    let hs = HermitianSpectrum::of(sys)?;
    let (a, b) = sys.model.bond_sites(bond);
    let half = hs.layout.half;
    let bdg = hs.doubling == 2;
    let modes: Vec<usize> = (0..hs.eigenvalues.len()).filter(|&n| !bdg || hs.eigenvalues[n] > 0.0).collect();
    let d = modes.len();
    let en: Vec<f64> = modes.iter().map(|&n| hs.eigenvalues[n]).collect();
    let f: Vec<f64> = en.iter().map(|&e| step_occupation(e)).collect();
    let u = |site: usize, n: usize| hs.vectors[[site, modes[n]]];
    let v = |site: usize, n: usize| if bdg { hs.vectors[[half + site, modes[n]]] } else { C64::new(0.0, 0.0) };
    let i = C64::i();
    let am = Array2::from_shape_fn((d, d), |(n, m)| {
        i * (u(a, n).conj() * u(b, m) - u(b, n).conj() * u(a, m)) - i * (v(b, n).conj() * v(a, m) - v(a, n).conj() * v(b, m))
    });
    let bm = Array2::from_shape_fn((d, d), |(n, m)| i * (v(a, n) * u(b, m) - v(b, n) * u(a, m)));
    let t2 = sys.model.hopping(bond).powi(2);
    // (weight, pole shift) pairs: Im Σ w / (ω + shift + iη)
    let mut poles: Vec<(C64, f64)> = Vec::new();
    for n in 0..d {
        for m in 0..d {
            let w1 = am[[n, m]] * am[[m, n]] * (f[n] - f[m]);
            if w1 != C64::new(0.0, 0.0) {
                poles.push((w1, en[n] - en[m]));
            }
            if bdg {
                let occ = f[m] + f[n] - 1.0;
                let w2 = bm[[n, m]] * (bm[[m, n]].conj() - bm[[n, m]].conj()) * occ;
                let w3 = bm[[m, n]].conj() * (bm[[n, m]] - bm[[m, n]]) * -occ;
                poles.push((w2, -en[n] - en[m]));
                poles.push((w3, en[n] + en[m]));
            }
        }
    }
    let ie = C64::new(0.0, eta);
    Ok(omegas
        .iter()
        .map(|&w| {
            let s: C64 = poles.iter().map(|&(c, x)| c / (w + x + ie)).sum();
            t2 * s.im
        })
        .collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SusceptibilityMethod {
    NhAnalytic,
    HermitianExact,
}

impl SusceptibilityMethod {
    pub fn name(self) -> &'static str {
        match self {
            SusceptibilityMethod::NhAnalytic => "nh_analytic",
            SusceptibilityMethod::HermitianExact => "hermitian_exact",
        }
    }
}

/// `Im Π(φ, ω)` on a grid, rows indexed by φ.
#[derive(Debug, Clone, PartialEq)]
pub struct SusceptibilityMap {
    pub phi_grid: Vec<f64>,
    pub omega_grid: Vec<f64>,
    pub values: Array2<f64>,
    pub method: SusceptibilityMethod,
    pub eta: Option<f64>,
    pub bond: usize,
}

impl SusceptibilityMap {
    pub fn from_rows(
        phi_grid: Vec<f64>,
        omega_grid: Vec<f64>,
        rows: Vec<Vec<f64>>,
        method: SusceptibilityMethod,
        eta: Option<f64>,
        bond: usize,
    ) -> Self {
        let nw = omega_grid.len();
        let mut values = Array2::zeros((phi_grid.len(), nw));
        for (p, r) in rows.iter().enumerate() {
            values.row_mut(p).assign(&Array1::from(r.clone()));
        }
        SusceptibilityMap { phi_grid, omega_grid, values, method, eta, bond }
    }

    /// Largest absolute entry.
    pub fn scale(&self) -> f64 {
        self.values.iter().fold(0.0, |a, x| a.max(x.abs()))
    }

    /// Values divided by `scale`.
    pub fn normalized(&self) -> Array2<f64> {
        let s = self.scale();
        if s == 0.0 {
            self.values.clone()
        } else {
            self.values.mapv(|x| x / s)
        }
    }

    /// Worst violation of `Im Π(φ, -ω) = -Im Π(φ, ω)` on a grid symmetric about zero.
    pub fn odd_residual(&self) -> f64 {
        let nw = self.omega_grid.len();
        let mut r = 0.0f64;
        for row in self.values.rows() {
            for k in 0..nw {
                r = r.max((row[k] + row[nw - 1 - k]).abs());
            }
        }
        r
    }
}

/// Map from the effective Hamiltonian at each φ.
pub fn susceptibility_map_nh(sys: &System, phis: &[f64], omegas: &[f64], bond: usize) -> Result<SusceptibilityMap> {
    let rows = phis
        .iter()
        .map(|&p| susceptibility_nh_row(&sys.with_phi(p), bond, omegas))
        .collect::<Result<Vec<_>>>()?;
    Ok(SusceptibilityMap::from_rows(phis.to_vec(), omegas.to_vec(), rows, SusceptibilityMethod::NhAnalytic, None, bond))
}

/// Map from exact diagonalization at each φ.
pub fn susceptibility_map_exact(
    sys: &System,
    phis: &[f64],
    omegas: &[f64],
    bond: usize,
    eta: f64,
) -> Result<SusceptibilityMap> {
    let rows = phis
        .iter()
        .map(|&p| susceptibility_exact_row(&sys.with_phi(p), bond, omegas, eta))
        .collect::<Result<Vec<_>>>()?;
    Ok(SusceptibilityMap::from_rows(
        phis.to_vec(),
        omegas.to_vec(),
        rows,
        SusceptibilityMethod::HermitianExact,
        Some(eta),
        bond,
    ))
}

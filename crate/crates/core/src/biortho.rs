//! Biorthogonal eigendecomposition, exceptional-point detection and branch tracking.

use ndarray::Array2;
use ndarray_linalg::Inverse;
use serde::{Deserialize, Serialize};

use crate::linalg::{column, dagger, eig, inner, max_abs, norm};
use crate::selfenergy::{effective_hamiltonian, EffectiveHamiltonian};
use crate::{CMatrix, NhError, Result, C64};

/// Overlaps `|⟨L|R⟩|` (unit vectors) below this mark a numerically defective matrix.
pub const RIGIDITY_FLOOR: f64 = 1e-10;

const CLUSTER_TOL: f64 = 1e-9;
const MATCH_TOL: f64 = 1e-6;

/// Eigenvalues with matched left/right eigenvectors, `⟨L_n|R_m⟩ = δ_nm`.
#[derive(Debug, Clone)]
pub struct BiorthogonalSpectrum {
    pub eigenvalues: Vec<C64>,
    /// Right eigenvectors as columns.
    pub right: CMatrix,
    /// Left eigenvectors (eigenvectors of `H†`) as columns.
    pub left: CMatrix,
    /// `|⟨L|R⟩| / (‖L‖ ‖R‖)` before normalisation.
    pub phase_rigidity: Vec<f64>,
    pub doubling: usize,
}

impl BiorthogonalSpectrum {
    pub fn dim(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn right_vec(&self, n: usize) -> ndarray::ArrayView1<'_, C64> {
        column(&self.right, n)
    }

    pub fn left_vec(&self, n: usize) -> ndarray::ArrayView1<'_, C64> {
        column(&self.left, n)
    }

    /// `Σ_n ε_n |R_n⟩⟨L_n|`
    pub fn reconstruct(&self) -> CMatrix {
        let d = self.dim();
        let mut scaled = self.right.clone();
        for n in 0..d {
            let e = self.eigenvalues[n];
            scaled.column_mut(n).mapv_inplace(|z| z * e);
        }
        scaled.dot(&dagger(&self.left))
    }

    /// `max |⟨L_n|R_m⟩ - δ_nm|`
    pub fn biorthogonality_residual(&self) -> f64 {
        let g = dagger(&self.left).dot(&self.right);
        let d = self.dim();
        max_abs(&(g - Array2::<C64>::eye(d)))
    }

    /// Index pair of the two closest eigenvalues and their distance.
    pub fn closest_pair(&self) -> Option<(usize, usize, f64)> {
        closest_pair(&self.eigenvalues)
    }
}

pub fn closest_pair(e: &[C64]) -> Option<(usize, usize, f64)> {
    let mut best: Option<(usize, usize, f64)> = None;
    for a in 0..e.len() {
        for b in a + 1..e.len() {
            let d = (e[a] - e[b]).norm();
            if best.is_none_or(|(_, _, bd)| d < bd) {
                best = Some((a, b, d));
            }
        }
    }
    best
}

fn cmp_eig(a: &C64, b: &C64) -> std::cmp::Ordering {
    a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im))
}

fn clusters(e: &[C64], tol: f64) -> Vec<Vec<usize>> {
    let n = e.len();
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(p: &mut [usize], i: usize) -> usize {
        let mut r = i;
        while p[r] != r {
            r = p[r];
        }
        p[i] = r;
        r
    }
    for a in 0..n {
        for b in a + 1..n {
            if (e[a] - e[b]).norm() <= tol {
                let ra = find(&mut parent, a);
                let rb = find(&mut parent, b);
                parent[ra.max(rb)] = ra.min(rb);
            }
        }
    }
    let mut groups: Vec<Vec<usize>> = Vec::new();
    let mut root_of = vec![usize::MAX; n];
    for i in 0..n {
        let r = find(&mut parent, i);
        if root_of[r] == usize::MAX {
            root_of[r] = groups.len();
            groups.push(Vec::new());
        }
        groups[root_of[r]].push(i);
    }
    groups
}

/// One-to-one pairing of right index -> left index by descending overlap,
/// restricted to eigenvalue-compatible pairs where possible.
fn match_left(lam: &[C64], mu: &[C64], overlap: &CMatrix, tol: f64) -> Vec<usize> {
    let d = lam.len();
    let mut cand: Vec<(f64, usize, usize)> = Vec::with_capacity(d * d);
    for n in 0..d {
        for m in 0..d {
            cand.push((overlap[[m, n]].norm(), n, m));
        }
    }
    cand.sort_by(|a, b| b.0.total_cmp(&a.0).then(a.1.cmp(&b.1)).then(a.2.cmp(&b.2)));
    let mut left_of = vec![usize::MAX; d];
    let mut used = vec![false; d];
    for pass in 0..2 {
        for &(_, n, m) in &cand {
            if left_of[n] != usize::MAX || used[m] {
                continue;
            }
            if pass == 0 && (lam[n] - mu[m].conj()).norm() > tol {
                continue;
            }
            left_of[n] = m;
            used[m] = true;
        }
    }
    left_of
}

/// Biorthogonal eigendecomposition of a dense matrix.
pub fn biorthogonal_eig_matrix(h: &CMatrix, doubling: usize) -> Result<BiorthogonalSpectrum> {
    let d = h.nrows();
    if d == 0 || h.ncols() != d {
        return Err(NhError::Spec("matrix must be square and nonempty".into()));
    }
    if h.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(NhError::Spec("matrix has non-finite entries".into()));
    }
    let scale = max_abs(h).max(1.0);
    let (lam, v) = eig(h)?;
    let (mu, w) = eig(&dagger(h))?;
    let lam: Vec<C64> = lam.to_vec();
    let mu: Vec<C64> = mu.to_vec();

    let overlap = dagger(&w).dot(&v);
    let left_of = match_left(&lam, &mu, &overlap, MATCH_TOL * scale);

    let mut right = CMatrix::zeros((d, d));
    let mut left = CMatrix::zeros((d, d));
    let mut rigidity = vec![0.0; d];

    for group in clusters(&lam, CLUSTER_TOL * scale) {
        if group.len() == 1 {
            let n = group[0];
            let vr = column(&v, n);
            let wl = column(&w, left_of[n]);
            let nr = norm(vr);
            let nl = norm(wl);
            let o = inner(wl, vr);
            let r = o.norm() / (nr * nl);
            if !(r >= RIGIDITY_FLOOR) {
                return Err(NhError::Defective { mode: n, overlap: r });
            }
            rigidity[n] = r;
            let sq = o.sqrt();
            right.column_mut(n).assign(&vr.mapv(|z| z / sq));
            left.column_mut(n).assign(&wl.mapv(|z| z / sq.conj()));
            continue;
        }
        let k = group.len();
        let mut vc = CMatrix::zeros((d, k));
        let mut wc = CMatrix::zeros((d, k));
        for (c, &n) in group.iter().enumerate() {
            vc.column_mut(c).assign(&column(&v, n));
            wc.column_mut(c).assign(&column(&w, left_of[n]));
        }
        let m = dagger(&wc).dot(&vc);
        let minv = m.inv().map_err(|_| NhError::Defective { mode: group[0], overlap: 0.0 })?;
        let lc = wc.dot(&dagger(&minv));
        for (c, &n) in group.iter().enumerate() {
            let vr = vc.column(c);
            let ll = lc.column(c);
            let nr = norm(vr);
            let nl = norm(ll);
            let r = 1.0 / (nr * nl);
            if !(r >= RIGIDITY_FLOOR) {
                return Err(NhError::Defective { mode: n, overlap: r });
            }
            rigidity[n] = r;
            let bal = (nl / nr).sqrt();
            right.column_mut(n).assign(&vr.mapv(|z| z * bal));
            left.column_mut(n).assign(&ll.mapv(|z| z / bal));
        }
    }

    let mut order: Vec<usize> = (0..d).collect();
    order.sort_by(|&a, &b| cmp_eig(&lam[a], &lam[b]).then(a.cmp(&b)));
    let mut r_sorted = CMatrix::zeros((d, d));
    let mut l_sorted = CMatrix::zeros((d, d));
    for (to, &from) in order.iter().enumerate() {
        r_sorted.column_mut(to).assign(&right.column(from));
        l_sorted.column_mut(to).assign(&left.column(from));
    }
    Ok(BiorthogonalSpectrum {
        eigenvalues: order.iter().map(|&i| lam[i]).collect(),
        right: r_sorted,
        left: l_sorted,
        phase_rigidity: order.iter().map(|&i| rigidity[i]).collect(),
        doubling,
    })
}

pub fn biorthogonal_eig(h: &EffectiveHamiltonian) -> Result<BiorthogonalSpectrum> {
    biorthogonal_eig_matrix(&h.matrix, h.doubling)
}

/// Eigenvalues only, sorted by (Re, Im).
pub fn eigenvalues(h: &CMatrix) -> Result<Vec<C64>> {
    let (lam, _) = eig(h)?;
    let mut e = lam.to_vec();
    e.sort_by(cmp_eig);
    Ok(e)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EpScanOptions {
    /// Absolute eigenvalue-distance threshold.
    pub gap_tol: f64,
    pub rigidity_tol: f64,
    /// Bracket width to refine each candidate to; `None` keeps grid brackets.
    pub refine_width: Option<f64>,
}

impl EpScanOptions {
    /// Thresholds `1e-3 |t|` and rigidity 0.1, refinement to `1e-9`.
    pub fn for_hopping(t: f64) -> Self {
        EpScanOptions { gap_tol: 1e-3 * t.abs(), rigidity_tol: 0.1, refine_width: Some(1e-9) }
    }
}

/// Located exceptional point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EpInterval {
    pub phi_lo: f64,
    pub phi_hi: f64,
    /// Indices of the coalescing pair in the sorted spectrum at `phi_at`.
    pub modes: (usize, usize),
    pub phi_at: f64,
    pub gap: f64,
    pub rigidity: f64,
    /// Mean of the coalescing pair.
    pub eigenvalue: C64,
}

impl EpInterval {
    pub fn center(&self) -> f64 {
        0.5 * (self.phi_lo + self.phi_hi)
    }
}

struct PairProbe {
    gap: f64,
    disc: f64,
}

fn probe(h0: &EffectiveHamiltonian, phi: f64) -> Result<PairProbe> {
    let h = effective_hamiltonian(&h0.system.with_phi(phi))?;
    let e = eigenvalues(&h.matrix)?;
    let (a, b, gap) = closest_pair(&e).ok_or_else(|| NhError::Spec("need two modes".into()))?;
    let dd = e[a] - e[b];
    Ok(PairProbe { gap, disc: (dd * dd).re })
}

fn pair_diagnostics(h0: &EffectiveHamiltonian, phi: f64) -> Result<((usize, usize), f64, f64, C64)> {
    let h = effective_hamiltonian(&h0.system.with_phi(phi))?;
    let e = eigenvalues(&h.matrix)?;
    let (a, b, gap) = closest_pair(&e).ok_or_else(|| NhError::Spec("need two modes".into()))?;
    let rig = match biorthogonal_eig(&h) {
        Ok(sp) => sp.phase_rigidity[a].min(sp.phase_rigidity[b]),
        Err(NhError::Defective { overlap, .. }) => overlap,
        Err(e) => return Err(e),
    };
    Ok(((a, b), gap, rig, 0.5 * (e[a] + e[b])))
}

fn refine(h0: &EffectiveHamiltonian, mut a: f64, mut b: f64, width: f64) -> Result<(f64, f64, f64)> {
    let pa = probe(h0, a)?;
    let pb = probe(h0, b)?;
    if pa.disc * pb.disc < 0.0 {
        // the squared splitting changes sign across an exceptional point
        let mut sa = pa.disc;
        let mut ga = pa.gap;
        let mut gb = pb.gap;
        while b - a > width {
            let m = 0.5 * (a + b);
            let pm = probe(h0, m)?;
            if pm.disc * sa <= 0.0 {
                b = m;
                gb = pm.gap;
            } else {
                a = m;
                sa = pm.disc;
                ga = pm.gap;
            }
        }
        let at = if ga <= gb { a } else { b };
        return Ok((a, b, at));
    }
    let inv_phi = 0.5 * (5f64.sqrt() - 1.0);
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let mut fc = probe(h0, c)?.gap;
    let mut fd = probe(h0, d)?.gap;
    while b - a > width {
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = probe(h0, c)?.gap;
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = probe(h0, d)?.gap;
        }
    }
    let at = if fc < fd { c } else { d };
    Ok((a, b, at))
}

/// Locate exceptional points along a φ sweep.
///
/// Candidates are interior local minima of the smallest eigenvalue distance;
/// each is optionally refined and kept when both the distance and the pair's
/// phase rigidity fall below the thresholds.
pub fn ep_scan(sweep: &[EffectiveHamiltonian], opts: &EpScanOptions) -> Result<Vec<EpInterval>> {
    let n = sweep.len();
    let mut gaps = Vec::with_capacity(n);
    for h in sweep {
        let e = eigenvalues(&h.matrix)?;
        gaps.push(closest_pair(&e).map(|p| p.2).unwrap_or(f64::INFINITY));
    }
    let mut out: Vec<EpInterval> = Vec::new();
    for i in 1..n.saturating_sub(1) {
        if !(gaps[i] < gaps[i - 1] && gaps[i] <= gaps[i + 1]) {
            continue;
        }
        let (lo, hi, at) = match opts.refine_width {
            Some(w) => refine(&sweep[i], sweep[i - 1].phi(), sweep[i + 1].phi(), w)?,
            None => (sweep[i - 1].phi(), sweep[i + 1].phi(), sweep[i].phi()),
        };
        let (modes, gap, rigidity, eigenvalue) = pair_diagnostics(&sweep[i], at)?;
        if gap < opts.gap_tol && rigidity < opts.rigidity_tol {
            let ep = EpInterval { phi_lo: lo, phi_hi: hi, modes, phi_at: at, gap, rigidity, eigenvalue };
            if !out.iter().any(|o| (o.phi_at - at).abs() < 1e-7) {
                out.push(ep);
            }
        }
    }
    Ok(out)
}

/// Branch-ordered eigenvalues along a sweep.
#[derive(Debug, Clone)]
pub struct Branches {
    /// `values[k][b]`: branch `b` at grid point `k`.
    pub values: Vec<Vec<C64>>,
    /// `index[k][b]`: position of branch `b` in the sorted spectrum at point `k`.
    pub index: Vec<Vec<usize>>,
    /// Branch identity not determined by continuity (an EP lies in the preceding step).
    pub unresolved: Vec<Vec<bool>>,
    pub warnings: Vec<AmbiguityWarning>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AmbiguityWarning {
    pub point: usize,
    pub branch: usize,
    /// Difference between the two cheapest candidate costs.
    pub margin: f64,
}

/// Minimal-cost perfect assignment (rows to columns) for a square cost matrix.
fn assign(cost: &Array2<f64>) -> Vec<usize> {
    let n = cost.nrows();
    let inf = f64::INFINITY;
    let mut u = vec![0.0; n + 1];
    let mut v = vec![0.0; n + 1];
    let mut p = vec![0usize; n + 1];
    let mut way = vec![0usize; n + 1];
    for i in 1..=n {
        p[0] = i;
        let mut j0 = 0;
        let mut minv = vec![inf; n + 1];
        let mut used = vec![false; n + 1];
        loop {
            used[j0] = true;
            let i0 = p[j0];
            let mut delta = inf;
            let mut j1 = 0;
            for j in 1..=n {
                if !used[j] {
                    let cur = cost[[i0 - 1, j - 1]] - u[i0] - v[j];
                    if cur < minv[j] {
                        minv[j] = cur;
                        way[j] = j0;
                    }
                    if minv[j] < delta {
                        delta = minv[j];
                        j1 = j;
                    }
                }
            }
            for j in 0..=n {
                if used[j] {
                    u[p[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
            if p[j0] == 0 {
                break;
            }
        }
        loop {
            let j1 = way[j0];
            p[j0] = p[j1];
            j0 = j1;
            if j0 == 0 {
                break;
            }
        }
    }
    let mut row_to_col = vec![0; n];
    for j in 1..=n {
        if p[j] > 0 {
            row_to_col[p[j] - 1] = j - 1;
        }
    }
    row_to_col
}

/// Follow eigenvalue branches across consecutive grid points using linear
/// extrapolation and a minimal total-distance assignment.
pub fn track_branches(phis: &[f64], sweep: &[Vec<C64>], eps: &[EpInterval]) -> Result<Branches> {
    if phis.len() != sweep.len() {
        return Err(NhError::Spec("grid and sweep lengths differ".into()));
    }
    let npts = sweep.len();
    if npts == 0 {
        return Ok(Branches { values: vec![], index: vec![], unresolved: vec![], warnings: vec![] });
    }
    let d = sweep[0].len();
    if sweep.iter().any(|e| e.len() != d) {
        return Err(NhError::Spec("spectra along the sweep differ in size".into()));
    }
    let mut values = vec![sweep[0].clone()];
    let mut index = vec![(0..d).collect::<Vec<_>>()];
    let mut unresolved = vec![vec![false; d]];
    let mut warnings = Vec::new();
    for k in 1..npts {
        let prev = &values[k - 1];
        let pred: Vec<C64> = if k >= 2 {
            (0..d).map(|b| 2.0 * prev[b] - values[k - 2][b]).collect()
        } else {
            prev.clone()
        };
        let next = &sweep[k];
        let cost = Array2::from_shape_fn((d, d), |(b, m)| (pred[b] - next[m]).norm());
        let a = assign(&cost);
        for b in 0..d {
            let mut row: Vec<f64> = cost.row(b).to_vec();
            row.sort_by(f64::total_cmp);
            if d > 1 && row[1] - row[0] < 1e-12 {
                warnings.push(AmbiguityWarning { point: k, branch: b, margin: row[1] - row[0] });
            }
        }
        let vals: Vec<C64> = (0..d).map(|b| next[a[b]]).collect();
        let mut flags = vec![false; d];
        let (lo, hi) = (phis[k - 1].min(phis[k]), phis[k - 1].max(phis[k]));
        for ep in eps {
            if ep.phi_hi >= lo && ep.phi_lo <= hi {
                let mut near: Vec<(f64, usize)> =
                    (0..d).map(|b| ((vals[b] - ep.eigenvalue).norm(), b)).collect();
                near.sort_by(|x, y| x.0.total_cmp(&y.0));
                for &(_, b) in near.iter().take(2) {
                    flags[b] = true;
                }
            }
        }
        values.push(vals);
        index.push(a);
        unresolved.push(flags);
    }
    Ok(Branches { values, index, unresolved, warnings })
}

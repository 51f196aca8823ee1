use ndarray::{Array1, Array2, ArrayView1, Axis, ShapeBuilder};
use ndarray_linalg::Eig;

use crate::{CMatrix, NhError, Result, C64};

pub(crate) fn dagger(m: &CMatrix) -> CMatrix {
    m.t().mapv(|z| z.conj())
}

pub(crate) fn zeros(n: usize) -> CMatrix {
    Array2::zeros((n, n))
}

/// ⟨a|b⟩ = Σ a_i* b_i
pub(crate) fn inner(a: ArrayView1<C64>, b: ArrayView1<C64>) -> C64 {
    a.iter().zip(b.iter()).map(|(x, y)| x.conj() * y).sum()
}

pub(crate) fn norm(a: ArrayView1<C64>) -> f64 {
    a.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt()
}

/// ⟨a|M|b⟩ for a dense operator.
pub(crate) fn sandwich(a: ArrayView1<C64>, m: &CMatrix, b: ArrayView1<C64>) -> C64 {
    inner(a, m.dot(&b).view())
}

pub(crate) fn max_abs(m: &CMatrix) -> f64 {
    m.iter().fold(0.0, |acc, z| acc.max(z.norm()))
}

pub(crate) fn eig(m: &CMatrix) -> Result<(Array1<C64>, CMatrix)> {
    Ok(m.eig()?)
}

/// Eigenvalues ascending, orthonormal eigenvectors as columns (LAPACK `zheevd`).
pub(crate) fn eigh(m: &CMatrix) -> Result<(Array1<f64>, CMatrix)> {
    let n = m.nrows();
    if n == 0 {
        return Ok((Array1::zeros(0), Array2::zeros((0, 0))));
    }
    let ni = n as i32;
    let mut a: Vec<C64> = m.t().iter().copied().collect();
    let mut w = vec![0.0; n];
    let mut info = 0;
    let (mut work, mut rwork, mut iwork) = (vec![C64::new(0.0, 0.0)], vec![0.0], vec![0]);
    // SAFETY: buffers sized per the workspace query; `a` is n x n column-major.
    unsafe {
        lapack::zheevd(b'V', b'U', ni, &mut a, ni, &mut w, &mut work, -1, &mut rwork, -1, &mut iwork, -1, &mut info);
    }
    if info != 0 {
        return Err(NhError::Linalg(format!("zheevd workspace query failed: info = {info}")));
    }
    let (lw, lrw, liw) = (work[0].re as usize, rwork[0] as usize, iwork[0] as usize);
    work = vec![C64::new(0.0, 0.0); lw.max(1)];
    rwork = vec![0.0; lrw.max(1)];
    iwork = vec![0; liw.max(1)];
    unsafe {
        lapack::zheevd(
            b'V', b'U', ni, &mut a, ni, &mut w, &mut work, lw as i32, &mut rwork, lrw as i32, &mut iwork,
            liw as i32, &mut info,
        );
    }
    if info != 0 {
        return Err(NhError::Linalg(format!("zheevd failed: info = {info}")));
    }
    let v = Array2::from_shape_vec((n, n).f(), a).map_err(|e| NhError::Linalg(e.to_string()))?;
    Ok((Array1::from(w), v))
}

pub(crate) fn column(m: &CMatrix, n: usize) -> ArrayView1<'_, C64> {
    m.index_axis(Axis(1), n)
}

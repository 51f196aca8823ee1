//! Persistent currents and current susceptibilities of dissipative
//! tight-binding systems.
//!
//! Two device models are supported: a phase-biased superconductor /
//! normal / superconductor junction in the Bogoliubov-de Gennes basis, and a
//! normal ring threaded by a flux. Each device can be tunnel-coupled to
//! semi-infinite wires, which are either traced out into a wide-band
//! self-energy (giving a non-Hermitian effective Hamiltonian) or kept as
//! finite chains for exact diagonalization.
//!
//! Indices are 0-based throughout. BdG matrices use the basis
//! `(c_0 .. c_{N-1}, c†_0 .. c†_{N-1})`.

pub mod biortho;
pub mod presets;
pub mod error;
pub mod models;
pub mod observables;
pub mod oracle;
pub mod selfenergy;
pub mod specfn;
pub mod susceptibility;

mod linalg;

pub use error::{NhError, Result};
pub use num_complex::Complex64 as C64;

/// Dense complex matrix.
pub type CMatrix = ndarray::Array2<C64>;

/// Temperature of the equilibrium state.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Temperature {
    Zero,
    /// Inverse temperature β in units of 1/|t|.
    Beta(f64),
}

impl Temperature {
    pub fn from_beta(beta: Option<f64>) -> Self {
        match beta {
            Some(b) => Temperature::Beta(b),
            None => Temperature::Zero,
        }
    }
}

extern "C" {
    fn openblas_set_num_threads(n: std::os::raw::c_int);
}

/// Size of the OpenBLAS thread pool. Use 1 when sweeping in parallel.
pub fn set_blas_threads(n: usize) {
    let n = n.clamp(1, i32::MAX as usize) as std::os::raw::c_int;
    // SAFETY: plain setter exported by the linked OpenBLAS.
    unsafe { openblas_set_num_threads(n) }
}

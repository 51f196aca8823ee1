//! Complex special functions and the non-Hermitian Fermi-Dirac distribution.

use std::f64::consts::PI;

use crate::{NhError, Result, C64};

/// Euler-Mascheroni constant.
pub const EULER_GAMMA: f64 = 0.577_215_664_901_532_860_61;

/// Imaginary parts in `(0, TOL_IM]` are treated as numerical noise on a real eigenvalue.
pub const TOL_IM: f64 = 1e-9;

const LN_SQRT_2PI: f64 = 0.918_938_533_204_672_741_78;

// B_{2k} / (2k (2k - 1)), k = 1..11
const STIRLING: [f64; 11] = [
    1.0 / 12.0,
    -1.0 / 360.0,
    1.0 / 1260.0,
    -1.0 / 1680.0,
    1.0 / 1188.0,
    -691.0 / 360_360.0,
    1.0 / 156.0,
    -3617.0 / 122_400.0,
    43867.0 / 244_188.0,
    -174_611.0 / 125_400.0,
    77683.0 / 5796.0,
];

// B_{2k} / (2k), k = 1..11
const DIGAMMA_ASYM: [f64; 11] = [
    1.0 / 12.0,
    -1.0 / 120.0,
    1.0 / 252.0,
    -1.0 / 240.0,
    1.0 / 132.0,
    -691.0 / 32760.0,
    1.0 / 12.0,
    -3617.0 / 8160.0,
    43867.0 / 14364.0,
    -174_611.0 / 6600.0,
    77683.0 / 276.0,
];

// zeta(k), k = 2..39
const ZETA: [f64; 38] = [
    1.644_934_066_848_226_436_5,
    1.202_056_903_159_594_285_4,
    1.082_323_233_711_138_191_5,
    1.036_927_755_143_369_926_3,
    1.017_343_061_984_449_139_7,
    1.008_349_277_381_922_826_8,
    1.004_077_356_197_944_339_4,
    1.002_008_392_826_082_214_4,
    1.000_994_575_127_818_085_3,
    1.000_494_188_604_119_464_6,
    1.000_246_086_553_308_048_3,
    1.000_122_713_347_578_489_1,
    1.000_061_248_135_058_704_8,
    1.000_030_588_236_307_020_5,
    1.000_015_282_259_408_651_9,
    1.000_007_637_197_637_899_8,
    1.000_003_817_293_264_999_8,
    1.000_001_908_212_716_553_9,
    1.000_000_953_962_033_872_8,
    1.000_000_476_932_986_787_8,
    1.000_000_238_450_502_727_7,
    1.000_000_119_219_925_965_3,
    1.000_000_059_608_189_051_3,
    1.000_000_029_803_503_514_7,
    1.000_000_014_901_554_828_4,
    1.000_000_007_450_711_789_8,
    1.000_000_003_725_334_024_8,
    1.000_000_001_862_659_723_5,
    1.000_000_000_931_327_432_4,
    1.000_000_000_465_662_906_5,
    1.000_000_000_232_831_183_4,
    1.000_000_000_116_415_501_7,
    1.000_000_000_058_207_720_9,
    1.000_000_000_029_103_850_4,
    1.000_000_000_014_551_921_9,
    1.000_000_000_007_275_959_8,
    1.000_000_000_003_637_979_5,
    1.000_000_000_001_818_989_7,
];

/// Positive zero of the digamma function.
const DIGAMMA_ROOT: f64 = 1.461_632_144_968_362_341_26;

// psi^{(k)}(x0) / k!, k = 1..25
const DIGAMMA_ROOT_TAYLOR: [f64; 25] = [
    0.967_672_245_447_621_170_43,
    -0.442_763_168_983_592_106_09,
    0.258_499_760_955_651_010_62,
    -0.163_942_705_442_406_527_5,
    0.107_824_050_691_262_365_76,
    -0.072_199_561_256_454_710_926,
    0.048_804_288_164_143_107_225,
    -0.033_161_126_474_847_359_292,
    0.022_597_648_232_218_104_66,
    -0.015_424_765_904_948_959_139,
    0.010_538_791_616_612_175_388,
    -0.007_204_534_386_356_868_241,
    0.004_926_781_395_729_853_446_4,
    -0.003_369_801_655_439_328_082_8,
    0.002_305_126_326_734_927_836_9,
    -0.001_576_936_771_430_197_259_3,
    0.001_078_825_201_916_296_580_7,
    -0.000_738_070_938_996_005_129_57,
    0.000_504_953_265_834_602_035_18,
    -0.000_345_468_025_106_307_699_56,
    0.000_236_356_015_640_270_527_92,
    -0.000_161_706_220_919_748_034_49,
    0.000_110_633_727_687_474_109_04,
    -0.000_075_691_795_821_950_659_192,
    0.000_051_785_757_952_220_808_69,
];

const SERIES_RADIUS: f64 = 0.25;
const ASYMPTOTIC_MIN: f64 = 15.0;

fn check_finite(z: C64) -> Result<()> {
    if z.re.is_finite() && z.im.is_finite() {
        Ok(())
    } else {
        Err(NhError::Domain(z))
    }
}

/// Logarithm with the argument restricted to `[-π, 0]`.
///
/// Imaginary parts in `(0, TOL_IM]` are clamped to zero; the negative real axis maps to `-π`.
pub fn log_lower(z: C64) -> Result<C64> {
    log_lower_tol(z, TOL_IM)
}

pub fn log_lower_tol(z: C64, tol_im: f64) -> Result<C64> {
    check_finite(z)?;
    if z.im > tol_im {
        return Err(NhError::Passivity(z));
    }
    log_side(z, Side::Lower)
}

/// Half-plane a quantity is taken to approach the real axis from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    /// arg in `[0, π]`
    Upper,
    /// arg in `[-π, 0]`
    Lower,
}

/// Logarithm continued from one half-plane onto the real axis.
///
/// Off the real axis on the matching side this is the principal logarithm.
/// A point on the wrong side (a rounding residue) is projected onto the axis.
pub fn log_side(z: C64, side: Side) -> Result<C64> {
    check_finite(z)?;
    let im = match side {
        Side::Lower => z.im.min(0.0),
        Side::Upper => z.im.max(0.0),
    };
    let r = z.re.hypot(im);
    if r == 0.0 {
        return Err(NhError::Domain(z));
    }
    let arg = if im == 0.0 {
        if z.re < 0.0 {
            match side {
                Side::Lower => -PI,
                Side::Upper => PI,
            }
        } else {
            0.0
        }
    } else {
        im.atan2(z.re)
    };
    Ok(C64::new(r.ln(), arg))
}

/// `ln(1 + x)` accurate for small complex `x`.
pub fn ln_1p(x: C64) -> C64 {
    let re = 0.5 * (2.0 * x.re + x.re * x.re + x.im * x.im).ln_1p();
    let im = x.im.atan2(1.0 + x.re);
    C64::new(re, im)
}

fn is_nonpositive_integer(z: C64) -> bool {
    z.im == 0.0 && z.re <= 0.0 && z.re == z.re.round()
}

// ln Γ(1 + x) for |x| < 1
fn log_gamma_1p_series(x: C64) -> C64 {
    let mut sum = C64::new(-EULER_GAMMA, 0.0) * x;
    let mut pow = x;
    for (i, zeta) in ZETA.iter().enumerate() {
        let k = (i + 2) as f64;
        pow *= x;
        let sign = if i % 2 == 0 { 1.0 } else { -1.0 };
        sum += pow * (sign * zeta / k);
    }
    sum
}

/// Principal-branch log-gamma.
///
/// Satisfies `ln Γ(z + 1) = ln Γ(z) + ln z` with the principal logarithm, so
/// the imaginary part is continuous away from the negative real axis.
pub fn log_gamma(z: C64) -> Result<C64> {
    check_finite(z)?;
    if is_nonpositive_integer(z) {
        return Err(NhError::Pole(z));
    }
    let x1 = z - 1.0;
    if x1.norm() < SERIES_RADIUS {
        return Ok(log_gamma_1p_series(x1));
    }
    let x2 = z - 2.0;
    if x2.norm() < SERIES_RADIUS {
        return Ok(ln_1p(x2) + log_gamma_1p_series(x2));
    }

    let mut w = z;
    let mut shift = C64::new(0.0, 0.0);
    while w.re < 0.5 || w.norm() < ASYMPTOTIC_MIN {
        shift += w.ln();
        w += 1.0;
    }
    let inv = w.inv();
    let inv2 = inv * inv;
    let mut series = C64::new(0.0, 0.0);
    let mut p = inv;
    for c in STIRLING {
        series += p * c;
        p *= inv2;
    }
    Ok((w - 0.5) * w.ln() - w + LN_SQRT_2PI + series - shift)
}

fn cot_pi(z: C64) -> C64 {
    let a = 2.0 * PI * z.re;
    let b = 2.0 * PI * z.im;
    if b.abs() > 700.0 {
        return C64::new(0.0, -b.signum());
    }
    let den = b.cosh() - a.cos();
    C64::new(a.sin() / den, -b.sinh() / den)
}

/// Digamma function Ψ(z) = d ln Γ(z) / dz.
pub fn digamma(z: C64) -> Result<C64> {
    check_finite(z)?;
    if is_nonpositive_integer(z) {
        return Err(NhError::Pole(z));
    }
    if z.re < 0.5 {
        return Ok(digamma(1.0 - z)? - PI * cot_pi(z));
    }
    let dx = z - DIGAMMA_ROOT;
    if dx.norm() < SERIES_RADIUS {
        let mut sum = C64::new(0.0, 0.0);
        for c in DIGAMMA_ROOT_TAYLOR.iter().rev() {
            sum = (sum + c) * dx;
        }
        return Ok(sum);
    }
    let mut w = z;
    let mut shift = C64::new(0.0, 0.0);
    while w.norm() < ASYMPTOTIC_MIN {
        shift += w.inv();
        w += 1.0;
    }
    let inv = w.inv();
    let inv2 = inv * inv;
    let mut series = C64::new(0.0, 0.0);
    let mut p = inv2;
    for c in DIGAMMA_ASYM {
        series += p * c;
        p *= inv2;
    }
    Ok(w.ln() - 0.5 * inv - series - shift)
}

/// Zero-temperature non-Hermitian distribution `-(1/π) ln ε`.
pub fn f_eff_zero(eps: C64) -> Result<C64> {
    Ok(-log_lower(eps)? / PI)
}

/// Finite-temperature non-Hermitian distribution `-(1/π)[Ψ(1/2 + iβε/2π) - iπ/2]`.
pub fn f_eff_beta(eps: C64, beta: f64) -> Result<C64> {
    check_finite(eps)?;
    if !(beta > 0.0 && beta.is_finite()) {
        return Err(NhError::Spec(format!("beta must be positive, got {beta}")));
    }
    if eps.im > TOL_IM {
        return Err(NhError::Passivity(eps));
    }
    let e = C64::new(eps.re, eps.im.min(0.0));
    let arg = C64::new(0.5, 0.0) + C64::i() * e * (beta / (2.0 * PI));
    Ok(-(digamma(arg)? - C64::new(0.0, PI / 2.0)) / PI)
}

/// Conventional Fermi-Dirac occupation, evaluated without overflow.
pub fn fermi_dirac(e: f64, beta: f64) -> f64 {
    let x = beta * e;
    if x > 0.0 {
        let y = (-x).exp();
        y / (1.0 + y)
    } else {
        1.0 / (1.0 + x.exp())
    }
}

/// Zero-temperature step with weight 1 at exactly zero energy.
pub fn step_occupation(e: f64) -> f64 {
    if e <= 0.0 {
        1.0
    } else {
        0.0
    }
}

/// `ln(1 + e^x)` without overflow.
pub fn softplus(x: f64) -> f64 {
    x.max(0.0) + (-x.abs()).exp().ln_1p()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn rel(a: C64, b: C64) -> f64 {
        (a - b).norm() / b.norm().max(1e-300)
    }

    // arbitrary-precision reference values: (re z, im z, re f, im f)
    include!("../tests/data/special_values.rs");

    #[test]
    fn log_lower_branch() {
        let l = log_lower(c(-1.0, 0.0)).unwrap();
        assert_eq!(l, c(0.0, -PI));
        assert_eq!(log_lower(c(1.0, 0.0)).unwrap(), c(0.0, 0.0));
        let l = log_lower(c(0.0, -1.0)).unwrap();
        assert!((l - c(0.0, -PI / 2.0)).norm() < 1e-15);
        // clamped noise stays on the lower branch
        assert_eq!(log_lower(c(-2.0, 5e-10)).unwrap().im, -PI);
    }

    #[test]
    fn log_lower_errors() {
        assert!(matches!(log_lower(c(0.0, 0.0)), Err(NhError::Domain(_))));
        assert!(matches!(log_lower(c(1.0, 1e-6)), Err(NhError::Passivity(_))));
    }

    #[test]
    fn log_side_upper_matches_principal_off_axis() {
        let z = c(-0.3, 0.7);
        assert!((log_side(z, Side::Upper).unwrap() - z.ln()).norm() < 1e-15);
        assert_eq!(log_side(c(-1.0, 0.0), Side::Upper).unwrap().im, PI);
    }

    #[test]
    fn log_gamma_trivial_values() {
        assert!(log_gamma(c(1.0, 0.0)).unwrap().norm() < 1e-16);
        assert!(log_gamma(c(2.0, 0.0)).unwrap().norm() < 1e-16);
        let half = log_gamma(c(0.5, 0.0)).unwrap();
        assert!((half - c(0.5 * PI.ln(), 0.0)).norm() < 1e-14);
    }

    #[test]
    fn log_gamma_against_reference() {
        for (a, b, re, im) in LOG_GAMMA_REF {
            let got = log_gamma(c(a, b)).unwrap();
            assert!(rel(got, c(re, im)) < 1e-12, "z = ({a}, {b}): {got} vs ({re}, {im})");
        }
    }

    #[test]
    fn log_gamma_near_unit_zeros_is_relatively_accurate() {
        // ln Γ(1 + x) ≈ -γ x and ln Γ(2 + x) ≈ (1 - γ) x
        let x = c(2f64.powi(-30), -(2f64.powi(-29)));
        assert!(rel(log_gamma(1.0 + x).unwrap(), -EULER_GAMMA * x) < 1e-8);
        assert!(rel(log_gamma(2.0 + x).unwrap(), (1.0 - EULER_GAMMA) * x) < 1e-8);
    }

    #[test]
    fn gamma_poles() {
        for n in [0.0, -1.0, -7.0] {
            assert!(matches!(log_gamma(c(n, 0.0)), Err(NhError::Pole(_))));
            assert!(matches!(digamma(c(n, 0.0)), Err(NhError::Pole(_))));
        }
    }

    #[test]
    fn digamma_trivial_values() {
        let one = digamma(c(1.0, 0.0)).unwrap();
        assert!((one - c(-EULER_GAMMA, 0.0)).norm() < 1e-15);
        let half = digamma(c(0.5, 0.0)).unwrap();
        let expect = -EULER_GAMMA - 2.0 * 2f64.ln();
        assert!((half.re - expect).abs() < 1e-14 && half.im == 0.0);
        assert!(digamma(c(DIGAMMA_ROOT, 0.0)).unwrap().norm() < 1e-16);
    }

    #[test]
    fn digamma_against_reference() {
        for (a, b, re, im) in DIGAMMA_REF {
            let got = digamma(c(a, b)).unwrap();
            assert!(rel(got, c(re, im)) < 1e-12, "z = ({a}, {b}): {got} vs ({re}, {im})");
        }
    }

    #[test]
    fn digamma_reflection() {
        let z = c(0.5, 0.7);
        let lhs = digamma(1.0 - z).unwrap() - digamma(z).unwrap();
        assert!((lhs - PI * cot_pi(z)).norm() < 1e-10);
    }

    #[test]
    fn f_eff_zero_values() {
        assert!((f_eff_zero(c(-1.0, 0.0)).unwrap() - c(0.0, 1.0)).norm() < 1e-15);
        assert!(f_eff_zero(c(1.0, 0.0)).unwrap().norm() < 1e-15);
        assert!((f_eff_zero(c(0.0, -1.0)).unwrap() - c(0.0, 0.5)).norm() < 1e-15);
    }

    #[test]
    fn f_eff_beta_values() {
        for beta in [0.1, 3.0, 200.0] {
            assert!((f_eff_beta(c(0.0, 0.0), beta).unwrap().im - 0.5).abs() < 1e-14);
        }
        let f = f_eff_beta(c(0.3, -1e-12), 40.0).unwrap();
        assert!((f.im - 1.0 / (12f64.exp() + 1.0)).abs() < 1e-6);
        let e = c(-0.5, -0.2);
        let hot = f_eff_beta(e, 1e4).unwrap();
        let cold = f_eff_zero(e).unwrap();
        assert!((hot.im - cold.im).abs() < 1e-6);
    }

    #[test]
    fn fermi_dirac_is_overflow_safe() {
        assert_eq!(fermi_dirac(1.0, 1e6), 0.0);
        assert_eq!(fermi_dirac(-1.0, 1e6), 1.0);
        assert!((fermi_dirac(0.0, 3.0) - 0.5).abs() < 1e-16);
        assert!((softplus(1000.0) - 1000.0).abs() < 1e-12);
        assert!((softplus(0.0) - 2f64.ln()).abs() < 1e-16);
    }
}

//! Archimedean gamma factors built on a complex log-gamma kernel.
//!
//! Conventions: `gamma_r(s) = pi^{-s/2} Gamma(s/2)`,
//! `gamma_c(s) = 2 (2 pi)^{-s} Gamma(s)`, so the duplication identity
//! `gamma_c(s) = gamma_r(s) gamma_r(s+1)` holds. A rank-one block with index
//! `k`, twist exponent `m` and character `chi = sgn^delta |.|^u` contributes
//! `gamma_c(s + u + m/2 + k/2)`.

use crate::spectral_params::{InducedParams, RealCharacter};
use num_complex::Complex64;
use serde::Serialize;
use std::f64::consts::PI;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LFactorError {
    #[error("gamma factor has a pole at {0}")]
    PoleAt(Complex64),
}

/// Lanczos coefficients, g = 7, 9 terms. Relative accuracy ~1e-13 on the
/// right half plane; reflection extends the reach to Re z >= -20.
/// Stated at full published precision; the last digits round away in f64.
#[allow(clippy::excessive_precision)]
const LANCZOS: [f64; 9] = [
    0.999_999_999_999_809_93,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_13,
    -176.615_029_162_140_59,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_571_6e-6,
    1.505_632_735_149_311_6e-7,
];

fn is_nonpositive_integer(z: Complex64) -> bool {
    z.im == 0.0 && z.re <= 0.0 && z.re.fract() == 0.0
}

/// Principal-branch log Gamma.
///
/// Real positive arguments give real values; the branch cut sits on the
/// negative real axis with values there taken as limits from above.
pub fn log_gamma(z: Complex64) -> Result<Complex64, LFactorError> {
    if is_nonpositive_integer(z) {
        return Err(LFactorError::PoleAt(z));
    }
    Ok(log_gamma_inner(z))
}

fn log_gamma_inner(z: Complex64) -> Complex64 {
    if z.im < 0.0 {
        return log_gamma_inner(z.conj()).conj();
    }
    if z.re < 0.5 {
        // Reflection; log_sin_pi_upper keeps the principal branch on the
        // upper half plane, so the identity holds without unwinding terms.
        let pi_c = Complex64::new(PI, 0.0);
        return pi_c.ln() - log_sin_pi_upper(z) - log_gamma_inner(Complex64::new(1.0, 0.0) - z);
    }
    lanczos_log(z)
}

/// log sin(pi z) for Im z >= 0, on the branch consistent with principal
/// log Gamma: -i pi z + Log(i (1 - e^{2 pi i z}) / 2).
fn log_sin_pi_upper(z: Complex64) -> Complex64 {
    let i = Complex64::i();
    let q = (2.0 * PI * i * z).exp(); // |q| <= 1 on the upper half plane
    -i * PI * z + (Complex64::new(0.0, 0.5) * (1.0 - q)).ln()
}

fn lanczos_log(z: Complex64) -> Complex64 {
    let zm1 = z - 1.0;
    let mut a = Complex64::new(LANCZOS[0], 0.0);
    for (i, &c) in LANCZOS.iter().enumerate().skip(1) {
        a += c / (zm1 + i as f64);
    }
    let t = zm1 + 7.5; // g + 1/2
    (zm1 + 0.5) * t.ln() - t + 0.5 * (2.0 * PI).ln() + a.ln()
}

/// Gamma via the log kernel.
pub fn gamma(z: Complex64) -> Result<Complex64, LFactorError> {
    Ok(log_gamma(z)?.exp())
}

/// `pi^{-s/2} Gamma(s/2)`; poles at s in {0, -2, -4, ...}.
pub fn gamma_r(s: Complex64) -> Result<Complex64, LFactorError> {
    let lg = log_gamma(s / 2.0).map_err(|_| LFactorError::PoleAt(s))?;
    Ok((lg - s / 2.0 * PI.ln()).exp())
}

/// `2 (2 pi)^{-s} Gamma(s)`; poles at s in {0, -1, -2, ...}.
pub fn gamma_c(s: Complex64) -> Result<Complex64, LFactorError> {
    let lg = log_gamma(s)?;
    Ok((lg - s * (2.0 * PI).ln() + 2.0f64.ln()).exp())
}

/// A gamma-factor value together with the arguments that produced it, so the
/// product can be recomputed and audited.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LFactorValue {
    #[serde(with = "crate::serde_c64")]
    pub value: Complex64,
    #[serde(with = "crate::serde_c64")]
    pub s: Complex64,
    /// Arguments z_j with value = prod_j gamma_c(z_j).
    #[serde(with = "crate::serde_c64_vec")]
    pub factors: Vec<Complex64>,
}

impl LFactorValue {
    /// Recompute the product from the stored arguments.
    pub fn recompute(&self) -> Result<Complex64, LFactorError> {
        let mut acc = Complex64::new(1.0, 0.0);
        for &z in &self.factors {
            acc *= gamma_c(z)?;
        }
        Ok(acc)
    }
}

/// Single-block factor `gamma_c(s + u + m/2 + k/2)` for block index `k`,
/// twist exponent `m`, character `chi = sgn^delta |.|^u`.
pub fn l_factor_sigma(
    k: i64,
    m: i64,
    chi: &RealCharacter,
    s: Complex64,
) -> Result<LFactorValue, LFactorError> {
    let z = s + chi.power + 0.5 * (m as f64) + 0.5 * (k as f64);
    let value = gamma_c(z)?;
    Ok(LFactorValue {
        value,
        s,
        factors: vec![z],
    })
}

/// Product over all blocks of `l_factor_sigma(l_j, m, chi, s)`.
pub fn l_factor_pi(
    params: &InducedParams,
    chi: &RealCharacter,
    s: Complex64,
) -> Result<LFactorValue, LFactorError> {
    let mut value = Complex64::new(1.0, 0.0);
    let mut factors = Vec::with_capacity(params.l.len());
    for &lj in &params.l {
        let f = l_factor_sigma(lj, params.m, chi, s)?;
        value *= f.value;
        factors.extend(f.factors);
    }
    Ok(LFactorValue { value, s, factors })
}

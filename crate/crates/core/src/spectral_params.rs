//! Spectral parameters: pure highest weights of even length 2n, the derived
//! block data (twist exponent `m`, discrete-series indices `l`, minimal
//! K-type weight `N = l + 1`) and the real multiplicative characters
//! attached to them.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Errors for parameter validation and character evaluation.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum SpectralError {
    #[error("weight vector must have positive even length, got {0}")]
    BadLength(usize),
    #[error("weight vector is not weakly decreasing at position {0}")]
    NotDecreasing(usize),
    #[error("purity violated at pair {index}: {found} != {expected}")]
    PurityViolation {
        index: usize,
        found: i64,
        expected: i64,
    },
    #[error("weight entries must share one parity, mismatch at position {0}")]
    MixedParity(usize),
    #[error("block index must be >= 1, got {0}")]
    NonPositiveIndex(i64),
    #[error("character evaluated at 0")]
    ZeroArgument,
    #[error("character sign exponent must be 0 or 1, got {0}")]
    BadSignExponent(u8),
}

/// Weakly decreasing integer vector of even length `2n`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "Vec<i64>", into = "Vec<i64>")]
pub struct HighestWeight {
    nu: Vec<i64>,
}

impl HighestWeight {
    pub fn new(nu: Vec<i64>) -> Result<Self, SpectralError> {
        if nu.is_empty() || !nu.len().is_multiple_of(2) {
            return Err(SpectralError::BadLength(nu.len()));
        }
        for i in 1..nu.len() {
            if nu[i] > nu[i - 1] {
                return Err(SpectralError::NotDecreasing(i));
            }
        }
        Ok(Self { nu })
    }

    /// n, where the vector has length 2n.
    pub fn half_rank(&self) -> usize {
        self.nu.len() / 2
    }

    pub fn entries(&self) -> &[i64] {
        &self.nu
    }
}

impl TryFrom<Vec<i64>> for HighestWeight {
    type Error = SpectralError;
    fn try_from(v: Vec<i64>) -> Result<Self, Self::Error> {
        Self::new(v)
    }
}

impl From<HighestWeight> for Vec<i64> {
    fn from(w: HighestWeight) -> Self {
        w.nu
    }
}

/// Character `a -> sgn(a)^sign_exponent * |a|^power` of the nonzero reals.
///
/// Serializes as `{"sign": 0|1, "power": [re, im]}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "CharacterRepr", into = "CharacterRepr")]
pub struct RealCharacter {
    pub sign_exponent: u8,
    pub power: Complex64,
}

#[derive(Serialize, Deserialize)]
struct CharacterRepr {
    sign: u8,
    power: [f64; 2],
}

impl TryFrom<CharacterRepr> for RealCharacter {
    type Error = SpectralError;
    fn try_from(r: CharacterRepr) -> Result<Self, Self::Error> {
        if r.sign > 1 {
            return Err(SpectralError::BadSignExponent(r.sign));
        }
        Ok(RealCharacter {
            sign_exponent: r.sign,
            power: Complex64::new(r.power[0], r.power[1]),
        })
    }
}

impl From<RealCharacter> for CharacterRepr {
    fn from(c: RealCharacter) -> Self {
        CharacterRepr {
            sign: c.sign_exponent,
            power: [c.power.re, c.power.im],
        }
    }
}

impl RealCharacter {
    pub fn new(sign_exponent: u8, power: Complex64) -> Self {
        assert!(sign_exponent <= 1, "sign exponent must be 0 or 1");
        Self {
            sign_exponent,
            power,
        }
    }

    /// The trivial character.
    pub fn trivial() -> Self {
        Self::new(0, Complex64::new(0.0, 0.0))
    }

    /// The sign character `a -> sgn(a)`.
    pub fn sign() -> Self {
        Self::new(1, Complex64::new(0.0, 0.0))
    }

    /// Evaluate at a nonzero real.
    pub fn eval(&self, a: f64) -> Result<Complex64, SpectralError> {
        if a == 0.0 {
            return Err(SpectralError::ZeroArgument);
        }
        let sign = if self.sign_exponent == 1 && a < 0.0 {
            -1.0
        } else {
            1.0
        };
        Ok(sign * (self.power * a.abs().ln()).exp())
    }

    /// Value at -1: the restriction to the sign component.
    pub fn value_at_minus_one(&self) -> f64 {
        if self.sign_exponent == 1 {
            -1.0
        } else {
            1.0
        }
    }

    /// Value at a unit `eps` in {-1, +1}; the |.|^power part drops out.
    pub fn eval_unit(&self, eps: f64) -> f64 {
        debug_assert!(eps == 1.0 || eps == -1.0);
        if eps < 0.0 {
            self.value_at_minus_one()
        } else {
            1.0
        }
    }

    pub fn mul(&self, other: &RealCharacter) -> RealCharacter {
        RealCharacter::new(
            (self.sign_exponent + other.sign_exponent) % 2,
            self.power + other.power,
        )
    }

    pub fn inverse(&self) -> RealCharacter {
        RealCharacter::new(self.sign_exponent, -self.power)
    }
}

/// Check the purity constraint `nu_i + nu_{2n+1-i} = m` and return `m`.
pub fn check_purity(nu: &HighestWeight) -> Result<i64, SpectralError> {
    let v = nu.entries();
    let len = v.len();
    let m = v[0] + v[len - 1];
    for i in 0..len / 2 {
        let found = v[i] + v[len - 1 - i];
        if found != m {
            return Err(SpectralError::PurityViolation {
                index: i,
                found,
                expected: m,
            });
        }
    }
    Ok(m)
}

/// Discrete-series indices `l_i = nu_i - nu_{2n+1-i} + (2n+1-2i)` for i = 1..n.
///
/// For a pure weight the result is strictly decreasing with gaps >= 2, all
/// entries positive and of parity opposite to `m`; those invariants are
/// asserted here.
pub fn l_vector(nu: &HighestWeight) -> Result<Vec<i64>, SpectralError> {
    let m = check_purity(nu)?;
    let v = nu.entries();
    let two_n = v.len() as i64;
    let n = nu.half_rank();
    let l: Vec<i64> = (1..=n as i64)
        .map(|i| v[(i - 1) as usize] - v[(two_n - i) as usize] + (two_n + 1 - 2 * i))
        .collect();
    for (i, &li) in l.iter().enumerate() {
        assert!(li >= 1, "l must be positive, got {li} at {i}");
        assert_ne!(
            li.rem_euclid(2),
            m.rem_euclid(2),
            "l and m must have opposite parity"
        );
        if i > 0 {
            assert!(l[i - 1] - li >= 2, "l must decrease by at least 2");
        }
    }
    Ok(l)
}

/// Central character of a single block: trivial for odd index, sign for even.
pub fn discrete_series_central_char(k: i64) -> Result<RealCharacter, SpectralError> {
    if k < 1 {
        return Err(SpectralError::NonPositiveIndex(k));
    }
    Ok(if k % 2 == 1 {
        RealCharacter::trivial()
    } else {
        RealCharacter::sign()
    })
}

/// True when the weight parity matches the unit character: even first entry
/// needs the trivial character, odd needs sign. Errors on mixed parity.
pub fn parity_compatible(weights: &[i64], omega0_sign: u8) -> Result<bool, SpectralError> {
    assert!(!weights.is_empty());
    let parity = weights[0].rem_euclid(2);
    for (i, &w) in weights.iter().enumerate() {
        if w.rem_euclid(2) != parity {
            return Err(SpectralError::MixedParity(i));
        }
    }
    Ok(if parity == 0 {
        omega0_sign == 0
    } else {
        omega0_sign == 1
    })
}

/// Dimension `n^2 + n - 1` of the invariant-form space attached to rank n.
pub fn modular_symbol_dimension(n: u64) -> u64 {
    n * n + n - 1
}

/// Derived induction data for a pure highest weight.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct InducedParams {
    pub n: usize,
    /// Purity weight: every block carries the twist |.|^{m/2}.
    pub m: i64,
    /// Discrete-series indices, strictly decreasing, gaps >= 2.
    pub l: Vec<i64>,
    /// Minimal K-type highest weight `N = l + 1`.
    pub weights: Vec<i64>,
    /// Common central character of the blocks.
    pub omega: RealCharacter,
    /// Restriction of `omega` to {-1,+1}: 0 = trivial, 1 = sign.
    pub omega0_sign: u8,
}

impl InducedParams {
    pub fn from_weight(nu: &HighestWeight) -> Result<Self, SpectralError> {
        let m = check_purity(nu)?;
        let l = l_vector(nu)?;
        let n = nu.half_rank();
        let weights: Vec<i64> = l.iter().map(|&li| li + 1).collect();
        let omega = RealCharacter::new((m.rem_euclid(2)) as u8, Complex64::new(m as f64, 0.0));
        let omega0_sign = omega.sign_exponent;
        // The weight parity always matches omega0 for pure data.
        debug_assert_eq!(parity_compatible(&weights, omega0_sign), Ok(true));
        Ok(Self {
            n,
            m,
            l,
            weights,
            omega,
            omega0_sign,
        })
    }

    /// `(omega, omega_pi)`: block central character and its n-th power, the
    /// central character of the full induced representation.
    pub fn central_characters(&self) -> (RealCharacter, RealCharacter) {
        let mn = self.m * self.n as i64;
        let omega_pi =
            RealCharacter::new((mn.rem_euclid(2)) as u8, Complex64::new(mn as f64, 0.0));
        (self.omega, omega_pi)
    }
}

/// JSON-facing parameter bundle: `{"nu": [...], "chi": {"sign": 0|1, "power": [re, im]}}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParameterInput {
    pub nu: Vec<i64>,
    pub chi: RealCharacter,
}

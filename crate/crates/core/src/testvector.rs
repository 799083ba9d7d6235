//! The minimal K-type scalar function on O(2n) and its expansion into a
//! 2^n-component section.
//!
//! Everything is built from the isotropic frame `u_j = e_{2j-1} - i e_{2j}`:
//! the projected Gram minors (one per exterior power), two determinant
//! factors that carry the right O(n) x O(n) sign characters, and products of
//! these matched to a prescribed left torus weight vector.

use crate::matrix_core::{weyl_element, KPoint};
use crate::spectral_params::{parity_compatible, InducedParams, SpectralError};
use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::Serialize;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum TestVectorError {
    #[error("weight vector and parity data are incompatible")]
    ParityMismatch,
    #[error(transparent)]
    Spectral(#[from] SpectralError),
    #[error("weight entries must be nonnegative and decreasing, got {0:?}")]
    BadWeights(Vec<i64>),
    #[error("declared weight {declared:?} does not match factor content {actual:?}")]
    WeightBookkeeping { declared: Vec<i64>, actual: Vec<i64> },
    #[error("sign pattern has wrong length or entries")]
    BadSignPattern,
    #[error("section value at the base point deviates from the sign pattern by {0:.3e}")]
    BasePointMismatch(f64),
}

/// The isotropic frame `u_j = e_{2j-1} - i e_{2j}` in C^{2n}.
#[derive(Debug, Clone)]
pub struct IsotropicFrame {
    n: usize,
}

impl IsotropicFrame {
    pub fn new(n: usize) -> Self {
        assert!(n >= 1);
        Self { n }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// The column vector u_j (1-indexed).
    pub fn vector(&self, j: usize) -> DVector<Complex64> {
        assert!((1..=self.n).contains(&j));
        let mut v = DVector::zeros(2 * self.n);
        v[2 * j - 2] = Complex64::new(1.0, 0.0);
        v[2 * j - 1] = Complex64::new(0.0, -1.0);
        v
    }

    /// The dual pairing matrix rows: row j is u_j^T (plain transpose).
    pub fn dual_rows(&self) -> DMatrix<Complex64> {
        DMatrix::from_fn(self.n, 2 * self.n, |r, c| {
            if c == 2 * r {
                Complex64::new(1.0, 0.0)
            } else if c == 2 * r + 1 {
                Complex64::new(0.0, -1.0)
            } else {
                Complex64::new(0.0, 0.0)
            }
        })
    }
}

/// `B = U x`: row j is `u_j^T x`, as complex combinations of the rows of x.
fn dual_frame_times(x: &DMatrix<f64>) -> DMatrix<Complex64> {
    let n = x.nrows() / 2;
    DMatrix::from_fn(n, x.ncols(), |r, c| {
        Complex64::new(x[(2 * r, c)], -x[(2 * r + 1, c)])
    })
}

/// Leading principal minors of `C C^T` where C is the left n x n block of
/// `U x` (plain transpose, not conjugate). Minor j is the degree-2j
/// fundamental invariant.
fn projected_gram_minors(x: &DMatrix<f64>, upto: usize) -> Vec<Complex64> {
    let b = dual_frame_times(x);
    let n = b.nrows();
    let c = b.view((0, 0), (n, n));
    let gram = c * c.transpose();
    (1..=upto)
        .map(|j| gram.view((0, 0), (j, j)).clone_owned().determinant())
        .collect()
}

/// The minor `det[(u_i^T x) P (x^T u_k)]_{i,k <= j}` with P the projection
/// onto the first n coordinates.
pub fn fundamental_minor(j: usize, x: &KPoint) -> Complex64 {
    let n = x.dim() / 2;
    assert!((1..=n).contains(&j));
    projected_gram_minors(x.matrix(), j)[j - 1]
}

/// `det(U x E_1)` where E_1 spans the first n coordinates. Picks up
/// `det(k_1)` under right translation by `diag(k_1, k_2)`.
pub fn det_left(x: &KPoint) -> Complex64 {
    let b = dual_frame_times(x.matrix());
    let n = b.nrows();
    b.view((0, 0), (n, n)).clone_owned().determinant()
}

/// `i^n det(U x E_2)` where E_2 spans the last n coordinates. Picks up
/// `det(k_2)` under right translation by `diag(k_1, k_2)`.
pub fn det_right(x: &KPoint) -> Complex64 {
    let b = dual_frame_times(x.matrix());
    let n = b.nrows();
    let d = b.view((0, n), (n, n)).clone_owned().determinant();
    Complex64::i().powu(n as u32) * d
}

/// Product of fundamental minors matched to an even weight vector `nprime`:
/// exponent of minor j is `(nprime_j - nprime_{j+1}) / 2` (with
/// `nprime_{n+1} = 0`).
pub fn weight_builder(nprime: &[i64], x: &KPoint) -> Result<Complex64, TestVectorError> {
    let exps = exponents_from_even_weights(nprime)?;
    let minors = projected_gram_minors(x.matrix(), nprime.len());
    let mut acc = Complex64::new(1.0, 0.0);
    for (j, &e) in exps.iter().enumerate() {
        if e > 0 {
            acc *= minors[j].powu(e);
        }
    }
    Ok(acc)
}

fn exponents_from_even_weights(nprime: &[i64]) -> Result<Vec<u32>, TestVectorError> {
    let bad = || TestVectorError::BadWeights(nprime.to_vec());
    if nprime.is_empty() {
        return Err(bad());
    }
    let n = nprime.len();
    let mut exps = Vec::with_capacity(n);
    for j in 0..n {
        let next = if j + 1 < n { nprime[j + 1] } else { 0 };
        let diff = nprime[j] - next;
        if nprime[j] < 0 || diff < 0 || diff % 2 != 0 {
            return Err(bad());
        }
        exps.push((diff / 2) as u32);
    }
    Ok(exps)
}

/// Which of the four parity cases a scalar function was built in.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum PhiCase {
    EvenTrivial,
    EvenSign,
    OddTrivial,
    OddSign,
}

/// A scalar function on O(2n): a product of fundamental-minor powers and
/// optional left/right determinant factors, with a declared left torus
/// weight vector.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScalarKFunction {
    pub n: usize,
    /// Exponent of fundamental minor j (0-based entry j).
    pub exponents: Vec<u32>,
    pub use_det_left: bool,
    pub use_det_right: bool,
    /// Declared left torus weight vector N.
    pub weights: Vec<i64>,
    pub case: PhiCase,
}

impl ScalarKFunction {
    /// Validate that the declared weight equals the factor content:
    /// `N_i = 2 * sum_{j >= i} exponents_j + use_det_left + use_det_right`.
    pub fn new(
        n: usize,
        exponents: Vec<u32>,
        use_det_left: bool,
        use_det_right: bool,
        weights: Vec<i64>,
        case: PhiCase,
    ) -> Result<Self, TestVectorError> {
        assert!(n >= 1 && exponents.len() == n && weights.len() == n);
        let dets = use_det_left as i64 + use_det_right as i64;
        let actual: Vec<i64> = (0..n)
            .map(|i| 2 * exponents[i..].iter().map(|&e| e as i64).sum::<i64>() + dets)
            .collect();
        if actual != weights {
            return Err(TestVectorError::WeightBookkeeping {
                declared: weights,
                actual,
            });
        }
        Ok(Self {
            n,
            exponents,
            use_det_left,
            use_det_right,
            weights,
            case,
        })
    }

    pub fn eval(&self, x: &KPoint) -> Complex64 {
        debug_assert_eq!(x.dim(), 2 * self.n);
        self.eval_raw(x.matrix())
    }

    /// Evaluation on a raw matrix; used internally for sign-flipped copies.
    pub(crate) fn eval_raw(&self, x: &DMatrix<f64>) -> Complex64 {
        let b = dual_frame_times(x);
        let n = self.n;
        let c = b.view((0, 0), (n, n)).clone_owned();
        let mut acc = Complex64::new(1.0, 0.0);
        let top = self.exponents.iter().rposition(|&e| e > 0).map(|j| j + 1);
        if let Some(top) = top {
            let gram = &c * c.transpose();
            for j in 1..=top {
                let e = self.exponents[j - 1];
                if e > 0 {
                    let minor = gram.view((0, 0), (j, j)).clone_owned().determinant();
                    acc *= minor.powu(e);
                }
            }
        }
        if self.use_det_left {
            acc *= c.determinant();
        }
        if self.use_det_right {
            let d = b.view((0, n), (n, n)).clone_owned().determinant();
            acc *= Complex64::i().powu(n as u32) * d;
        }
        acc
    }
}

/// Build the scalar function for the given parameters and unit character
/// `chi0` (0 = trivial, 1 = sign). Four cases by the parity of N and chi0:
/// even/trivial uses the plain weight product at N; even/sign shifts to
/// N - 2 and adds both determinant factors; odd pairs one determinant factor
/// with the shift to N - 1.
pub fn build_phi(params: &InducedParams, chi0_sign: u8) -> Result<ScalarKFunction, TestVectorError> {
    let nvec = &params.weights;
    if !parity_compatible(nvec, params.omega0_sign)? {
        return Err(TestVectorError::ParityMismatch);
    }
    let even = nvec[0] % 2 == 0;
    let (shift, use_lt, use_rt, case) = match (even, chi0_sign) {
        (true, 0) => (0, false, false, PhiCase::EvenTrivial),
        (true, _) => (2, true, true, PhiCase::EvenSign),
        (false, 0) => (1, false, true, PhiCase::OddTrivial),
        (false, _) => (1, true, false, PhiCase::OddSign),
    };
    let nprime: Vec<i64> = nvec.iter().map(|&x| x - shift).collect();
    let exponents = exponents_from_even_weights(&nprime)?;
    ScalarKFunction::new(params.n, exponents, use_lt, use_rt, nvec.clone(), case)
}

/// All 2^n sign patterns of length n, ordered by bitmask (bit j set means
/// entry j is -1).
pub fn sign_patterns(n: usize) -> Vec<Vec<i8>> {
    (0..1usize << n)
        .map(|mask| {
            (0..n)
                .map(|j| if mask >> j & 1 == 1 { -1 } else { 1 })
                .collect()
        })
        .collect()
}

/// The 2^n-component section spanned by translates of the scalar function
/// under the component group: component eta is `k -> phi(c(eta) k)`.
#[derive(Debug, Clone)]
pub struct TestVectorSection {
    base: ScalarKFunction,
    chi0_sign: u8,
}

impl TestVectorSection {
    pub fn expand(base: ScalarKFunction, chi0_sign: u8) -> Self {
        assert!(chi0_sign <= 1);
        Self { base, chi0_sign }
    }

    pub fn n(&self) -> usize {
        self.base.n
    }

    pub fn base(&self) -> &ScalarKFunction {
        &self.base
    }

    pub fn chi0_sign(&self) -> u8 {
        self.chi0_sign
    }

    /// Component at sign pattern `eta`: `phi(c(eta) k)`. The flip `c(eta) k`
    /// negates rows 2j-1 exactly, so the component rule
    /// `f_eta(c(eps) k) = f_{eps eta}(k)` holds bit-for-bit.
    pub fn component(&self, eta: &[i8], k: &KPoint) -> Result<Complex64, TestVectorError> {
        if eta.len() != self.base.n || eta.iter().any(|&e| e != 1 && e != -1) {
            return Err(TestVectorError::BadSignPattern);
        }
        Ok(self.base.eval_raw(&flip_rows(k.matrix(), eta)))
    }

    /// All components at `k`, ordered like [`sign_patterns`].
    pub fn components_at(&self, k: &KPoint) -> Vec<Complex64> {
        sign_patterns(self.base.n)
            .iter()
            .map(|eta| self.base.eval_raw(&flip_rows(k.matrix(), eta)))
            .collect()
    }

    /// Predicted component value at the interleaving permutation:
    /// `prod_j chi0(eta_j)`.
    pub fn expected_base_coefficient(&self, eta: &[i8]) -> f64 {
        if self.chi0_sign == 0 {
            1.0
        } else {
            let negs = eta.iter().filter(|&&e| e == -1).count();
            if negs % 2 == 0 {
                1.0
            } else {
                -1.0
            }
        }
    }

    /// Components at the interleaving permutation, paired with patterns.
    pub fn at_base_point(&self) -> Vec<(Vec<i8>, Complex64)> {
        let w = weyl_element(self.base.n);
        sign_patterns(self.base.n)
            .into_iter()
            .map(|eta| {
                let v = self.base.eval_raw(&flip_rows(w.matrix(), &eta));
                (eta, v)
            })
            .collect()
    }

    /// Max deviation of the base-point components from the predicted sign
    /// pattern; errors above `tol`.
    pub fn verify_base_pattern(&self, tol: f64) -> Result<f64, TestVectorError> {
        let mut max_dev = 0.0f64;
        for (eta, v) in self.at_base_point() {
            let want = Complex64::new(self.expected_base_coefficient(&eta), 0.0);
            max_dev = max_dev.max((v - want).norm());
        }
        if max_dev <= tol {
            Ok(max_dev)
        } else {
            Err(TestVectorError::BasePointMismatch(max_dev))
        }
    }
}

/// `c(eta) x`: negate row 2j-2 (0-based) of each block with eta_j = -1.
fn flip_rows(x: &DMatrix<f64>, eta: &[i8]) -> DMatrix<f64> {
    let mut y = x.clone();
    for (j, &e) in eta.iter().enumerate() {
        if e == -1 {
            for c in 0..y.ncols() {
                y[(2 * j, c)] = -y[(2 * j, c)];
            }
        }
    }
    y
}

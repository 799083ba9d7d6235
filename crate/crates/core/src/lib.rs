//! Numerical construction and verification of distinguished vectors in a
//! family of induced representations built from discrete-series blocks, and
//! of the twisted linear functional whose value on them is a product of
//! complex gamma factors.
//!
//! The crate is organized bottom-up:
//!
//! - [`numeric`]: compensated summation and a two-sample distribution test;
//! - [`spectral_params`]: parameter validation — purity, block indices,
//!   minimal-type weights, central characters;
//! - [`lfactors`]: the complex gamma factor via a Lanczos log-gamma, and the
//!   per-block / full products;
//! - [`matrix_core`]: orthogonal-group points, torus / component / base
//!   elements, Haar samplers, and a lower-unipotent Iwasawa factorization;
//! - [`testvector`]: the scalar minimal-type function (fundamental minors,
//!   determinant factors) and its expansion into a sign-indexed section;
//! - [`linear_functional`]: radial Whittaker factors, the half-line Mellin
//!   quadrature, the closed-form functional value, and a Monte-Carlo
//!   evaluation over the compact factor;
//! - [`verifier`]: equivariance, highest-weight, dimension, factorization,
//!   and sampler audit suites with machine-readable reports.

pub mod lfactors;
pub mod linear_functional;
pub mod matrix_core;
pub mod numeric;
pub mod spectral_params;
pub mod testvector;
pub mod verifier;

pub use lfactors::{gamma, gamma_c, gamma_r, l_factor_pi, l_factor_sigma, LFactorError, LFactorValue};
pub use linear_functional::{
    hecke_integral, lambda_exact, lambda_montecarlo, normalized_ratio, whittaker_minimal, Combo,
    LinearFunctionalError, McEstimate, QuadratureSpec, TwistPair, WeightSign,
};
pub use matrix_core::{
    component_element, haar_orthogonal, haar_sample_k, haar_sample_kh, iwasawa_lower,
    torus_element, weyl_element, IwasawaFactors, KPoint, KhPair, MatrixError,
};
pub use spectral_params::{
    parity_compatible, HighestWeight, InducedParams, ParameterInput, RealCharacter, SpectralError,
};
pub use testvector::{
    build_phi, sign_patterns, PhiCase, ScalarKFunction, TestVectorError, TestVectorSection,
};
pub use verifier::{
    check_highest_weight, estimate_ktype_dimension, haar_suite, iwasawa_suite, run_all,
    weyl_dimension, HwReport, RankEstimate, RootVectorBasis, SuiteReport, VerifierError,
};

/// Serde adapter: `Complex64` as a two-element `[re, im]` array.
pub mod serde_c64 {
    use num_complex::Complex64;
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    pub fn serialize<S: Serializer>(v: &Complex64, s: S) -> Result<S::Ok, S::Error> {
        [v.re, v.im].serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Complex64, D::Error> {
        let [re, im] = <[f64; 2]>::deserialize(d)?;
        Ok(Complex64::new(re, im))
    }
}

/// Serde adapter: `Vec<Complex64>` as a sequence of `[re, im]` arrays.
pub mod serde_c64_vec {
    use num_complex::Complex64;
    use serde::ser::SerializeSeq;
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &[Complex64], s: S) -> Result<S::Ok, S::Error> {
        let mut seq = s.serialize_seq(Some(v.len()))?;
        for z in v {
            seq.serialize_element(&[z.re, z.im])?;
        }
        seq.end()
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<Complex64>, D::Error> {
        let pairs = Vec::<[f64; 2]>::deserialize(d)?;
        Ok(pairs
            .into_iter()
            .map(|[re, im]| Complex64::new(re, im))
            .collect())
    }
}

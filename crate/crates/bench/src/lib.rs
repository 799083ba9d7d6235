//! Shared fixtures for the benchmark targets: canonical parameter sets and
//! pre-seeded sample points so every bench measures the kernel, not setup.

use num_complex::Complex64;
use rand_chacha::ChaCha8Rng;
use testvector_core::{
    build_phi, haar_sample_k, HighestWeight, InducedParams, KPoint, QuadratureSpec,
    RealCharacter, ScalarKFunction,
};

/// Seed used by every benchmark fixture.
pub const BENCH_SEED: u64 = 0x5eed;

/// Derived parameters for an inducing weight; panics on invalid input
/// (benchmark fixtures are static and known-good).
pub fn params(nu: &[i64]) -> InducedParams {
    InducedParams::from_weight(&HighestWeight::new(nu.to_vec()).expect("valid weight"))
        .expect("pure weight")
}

/// The scalar minimal-type function for a weight and character sign.
pub fn phi(nu: &[i64], chi_sign: u8) -> ScalarKFunction {
    build_phi(&params(nu), chi_sign).expect("constructible")
}

/// `count` Haar-distributed evaluation points, deterministically seeded.
pub fn sample_points(n: usize, count: usize) -> Vec<KPoint> {
    use rand::SeedableRng;
    let mut rng = ChaCha8Rng::seed_from_u64(BENCH_SEED);
    (0..count).map(|_| haar_sample_k(n, &mut rng)).collect()
}

/// A mildly off-axis evaluation point inside the convergence region.
pub fn eval_point() -> Complex64 {
    Complex64::new(0.9, 0.4)
}

/// A unitary twisting character with a small imaginary power.
pub fn twist() -> RealCharacter {
    RealCharacter::new(1, Complex64::new(0.3, 0.1))
}

/// Quadrature window sized like the defaults the CLI uses.
pub fn quadrature() -> QuadratureSpec {
    QuadratureSpec {
        nodes: 4000,
        t_min: -30.0,
        t_max: 10.0,
        tol: 1e-8,
    }
}

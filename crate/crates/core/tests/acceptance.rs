//! Acceptance suite: eight pinned criteria. Each test prints one
//! `[PASS]`/`[FAIL]` line (visible with `--nocapture` or on failure) with
//! its elapsed time, and asserts both the numerical tolerance and a
//! wall-clock budget. Tolerances are fixed here and are not to be loosened;
//! if a criterion cannot be met the implementation is wrong.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::time::{Duration, Instant};
use testvector_core::{
    build_phi, check_highest_weight, estimate_ktype_dimension, gamma_c, haar_sample_k, haar_suite,
    hecke_integral, iwasawa_suite, lambda_exact, lambda_montecarlo, normalized_ratio, run_all,
    weyl_dimension, weyl_element, Combo, HighestWeight, InducedParams, KPoint, QuadratureSpec,
    RealCharacter,
};

fn c64(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn params(nu: &[i64]) -> InducedParams {
    InducedParams::from_weight(&HighestWeight::new(nu.to_vec()).unwrap()).unwrap()
}

/// Print the one-line verdict and enforce tolerance + budget.
fn conclude(criterion: &str, pass: bool, t0: Instant, budget: Duration, detail: &str) {
    let elapsed = t0.elapsed();
    let ok = pass && elapsed <= budget;
    println!(
        "[{}] {criterion}: {detail} (elapsed {elapsed:.2?}, budget {budget:.0?})",
        if ok { "PASS" } else { "FAIL" }
    );
    assert!(
        ok,
        "{criterion}: pass={pass}, elapsed {elapsed:.2?} vs budget {budget:.2?}; {detail}"
    );
}

/// Parameter matrix used across criteria: three pure weight vectors per
/// rank, exercising zero, repeated, and negative entries.
fn weight_matrix() -> Vec<Vec<i64>> {
    vec![
        vec![0, 0],
        vec![1, 0],
        vec![2, -2],
        vec![0, 0, 0, 0],
        vec![2, 1, 1, 0],
        vec![3, 1, 1, -1],
        vec![0; 6],
        vec![1, 1, 1, 0, 0, 0],
        vec![2, 1, 1, 1, 1, 0],
        vec![0; 8],
        vec![1, 1, 1, 1, 0, 0, 0, 0],
        vec![2, 2, 1, 1, 1, 1, 0, 0],
    ]
}

#[test]
fn criterion_1_base_point_normalization() {
    // phi(base point) = 1 to 1e-12 for every rank in {1,2,3,4}, three
    // weight vectors each, and both unit twists.
    let t0 = Instant::now();
    let mut max_dev = 0.0f64;
    let mut cases = 0usize;
    for nu in weight_matrix() {
        let p = params(&nu);
        let w = weyl_element(p.n);
        for chi0 in [0u8, 1] {
            let v = build_phi(&p, chi0).unwrap().eval(&w);
            max_dev = max_dev.max((v - c64(1.0, 0.0)).norm());
            cases += 1;
        }
    }
    conclude(
        "criterion 1 (base-point normalization)",
        max_dev <= 1e-12,
        t0,
        Duration::from_secs(1),
        &format!("{cases} cases, max |phi(w) - 1| = {max_dev:.2e} <= 1e-12"),
    );
}

#[test]
fn criterion_2_equivariance_suites() {
    // Torus, component, right-block, and base-pattern suites at 1000 trials
    // and tolerance 1e-9 (component rule bit-exact) for ranks 1..3, both
    // unit twists.
    let t0 = Instant::now();
    let mut failures = Vec::new();
    let mut tightest: Option<(String, f64, f64)> = None;
    for nu in [vec![1, 0], vec![2, 1, 1, 0], vec![2, 1, 1, 1, 1, 0]] {
        let p = params(&nu);
        for chi0 in [0u8, 1] {
            let reports = run_all(&p, chi0, 2026).unwrap();
            for r in reports.iter().filter(|r| {
                matches!(
                    r.suite.as_str(),
                    "base_pattern" | "torus" | "component" | "right_blocks"
                )
            }) {
                if !r.pass {
                    failures.push(format!(
                        "nu={nu:?} chi0={chi0} {}: dev {:.3e} > tol {:.3e}",
                        r.suite, r.max_deviation, r.tolerance
                    ));
                }
                if r.tolerance > 0.0 {
                    let frac = r.max_deviation / r.tolerance;
                    if tightest.as_ref().map(|(_, d, t)| frac > d / t).unwrap_or(true) {
                        tightest = Some((r.suite.clone(), r.max_deviation, r.tolerance));
                    }
                }
            }
        }
    }
    let (suite, dev, tol) = tightest.unwrap();
    let detail = if failures.is_empty() {
        format!("ranks 1-3 x both twists; tightest margin in '{suite}': {dev:.2e} vs {tol:.1e}")
    } else {
        failures.join("; ")
    };
    conclude(
        "criterion 2 (equivariance suites)",
        failures.is_empty(),
        t0,
        Duration::from_secs(30),
        &detail,
    );
}

#[test]
fn criterion_3_highest_weight_evidence() {
    // Raising directions annihilate the function and torus directions act
    // by i N_j, to 1e-6 relative at step 1e-5; the residual must shrink at
    // second order as the step halves.
    let t0 = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(303);
    let mut max_res = 0.0f64;
    for nu in [vec![1, 0], vec![2, 1, 1, 0], vec![1, 1, 1, 0, 0, 0]] {
        let p = params(&nu);
        for chi0 in [0u8, 1] {
            let phi = build_phi(&p, chi0).unwrap();
            let points: Vec<KPoint> = (0..6).map(|_| haar_sample_k(p.n, &mut rng)).collect();
            let hw = check_highest_weight(&phi, &p.weights, &points, 1e-5);
            max_res = max_res.max(hw.raising_residual).max(hw.torus_residual);
        }
    }
    // Convergence order on one representative case.
    let p = params(&[2, 1, 1, 0]);
    let phi = build_phi(&p, 0).unwrap();
    let points: Vec<KPoint> = (0..3).map(|_| haar_sample_k(p.n, &mut rng)).collect();
    let res: Vec<f64> = [1e-3, 5e-4, 2.5e-4]
        .iter()
        .map(|&h| check_highest_weight(&phi, &p.weights, &points, h).raising_residual)
        .collect();
    let orders_ok = res.windows(2).all(|w| (2.5..6.0).contains(&(w[0] / w[1])));
    conclude(
        "criterion 3 (highest-weight evidence)",
        max_res <= 1e-6 && orders_ok,
        t0,
        Duration::from_secs(60),
        &format!(
            "max residual {max_res:.2e} <= 1e-6; step-halving ratios {:?} ~ 4",
            res.windows(2).map(|w| w[0] / w[1]).collect::<Vec<_>>()
        ),
    );
}

#[test]
fn criterion_4_span_dimension() {
    // Numerical rank of the span of translates equals the exact dimension
    // formula: rank 1 weight (2) -> 2, rank 2 weight (6,2) -> 90.
    let t0 = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(404);
    let mut detail = String::new();
    let mut pass = true;
    for (nu, expected) in [(vec![0i64, 0], 2u64), (vec![2, 1, 1, 0], 90)] {
        let p = params(&nu);
        assert_eq!(weyl_dimension(&p.weights).unwrap(), expected);
        let phi = build_phi(&p, 0).unwrap();
        let side = 2 * expected as usize + 8;
        let est = estimate_ktype_dimension(&phi, side, side, &mut rng).unwrap();
        pass &= est.rank as u64 == expected && !est.flagged;
        detail.push_str(&format!(
            "N={:?}: rank {} vs {expected}, gap {:.1e}; ",
            p.weights, est.rank, est.gap
        ));
    }
    conclude(
        "criterion 4 (span dimension)",
        pass,
        t0,
        Duration::from_secs(300),
        detail.trim_end_matches("; "),
    );
}

#[test]
fn criterion_5_block_ratio_constancy() {
    // The combined-ray block integral divided by the gamma factor is the
    // same constant (1) at every s: spread and offset both <= 1e-5.
    let t0 = Instant::now();
    let chi = RealCharacter::trivial();
    let spec = QuadratureSpec::default();
    let s_points = [
        c64(0.9, 0.0),
        c64(1.4, 0.0),
        c64(1.1, 0.7),
        c64(2.0, -0.5),
        c64(1.7, 1.3),
    ];
    let mut spread = 0.0f64;
    let mut offset = 0.0f64;
    for k in [1i64, 2, 5] {
        let ratios: Vec<Complex64> = s_points
            .iter()
            .map(|&s| {
                let z = s + 0.5 * k as f64;
                hecke_integral(k, 0, &chi, s, Combo::Symmetrized, &spec).unwrap() / gamma_c(z).unwrap()
            })
            .collect();
        for r in &ratios {
            offset = offset.max((r - c64(1.0, 0.0)).norm());
        }
        for a in &ratios {
            for b in &ratios {
                spread = spread.max((a - b).norm());
            }
        }
    }
    conclude(
        "criterion 5 (block-ratio constancy)",
        spread <= 1e-5 && offset <= 1e-5,
        t0,
        Duration::from_secs(10),
        &format!("k in {{1,2,5}}, 5 points: spread {spread:.2e}, offset {offset:.2e} <= 1e-5"),
    );
}

#[test]
fn criterion_6_functional_equals_gamma_product() {
    // (a) The closed-form functional over the gamma-factor product is 1 to
    // 1e-10 at 20 seeded-random s for ranks 1 and 2, both twist signs.
    // (b) The Monte-Carlo evaluation at 1e5 samples agrees with the closed
    // form within 3 standard errors.
    let t0 = Instant::now();
    let spec = QuadratureSpec::default();
    let mut rng = ChaCha8Rng::seed_from_u64(606);
    let mut max_ratio_dev = 0.0f64;
    for nu in [vec![0i64, 0], vec![2, 1, 1, 0]] {
        let p = params(&nu);
        for sign in [0u8, 1] {
            let chi = RealCharacter::new(sign, c64(0.3, 0.25));
            for _ in 0..20 {
                let s = c64(rng.gen_range(0.6..2.1), rng.gen_range(-2.0..2.0));
                let r = normalized_ratio(&p, &chi, s, &spec).unwrap();
                max_ratio_dev = max_ratio_dev.max((r - c64(1.0, 0.0)).norm());
            }
        }
    }
    let mut mc_detail = String::new();
    let mut mc_pass = true;
    for nu in [vec![0i64, 0], vec![2, 1, 1, 0]] {
        let p = params(&nu);
        for sign in [0u8, 1] {
            let chi = RealCharacter::new(sign, c64(0.3, 0.1));
            let s = c64(0.9, 0.5);
            let exact = lambda_exact(&p, &chi, s, &spec).unwrap();
            let mc = lambda_montecarlo(&p, &chi, s, 100_000, 1906, &spec).unwrap();
            let dev = (mc.value - exact).norm();
            mc_pass &= dev <= 3.0 * mc.stderr;
            mc_detail.push_str(&format!("n={} sign={sign}: |mc-exact|/stderr={:.2}; ", p.n, dev / mc.stderr));
        }
    }
    conclude(
        "criterion 6 (functional = gamma product)",
        max_ratio_dev <= 1e-10 && mc_pass,
        t0,
        Duration::from_secs(300),
        &format!(
            "80 ratio points max |r-1| = {max_ratio_dev:.2e} <= 1e-10; MC {mc_detail}"
        ),
    );
}

#[test]
fn criterion_7_factorization() {
    // The lower-unipotent factorization on >= 1e4 random inputs across all
    // block shapes (m1, m2) in {1,2,3}^2: reconstruction, torus
    // normalization, orthogonality, unipotence, and the closed-form bounds
    // all within 1e-10.
    let t0 = Instant::now();
    let shapes: Vec<(usize, usize)> = (1..=3).flat_map(|a| (1..=3).map(move |b| (a, b))).collect();
    let report = iwasawa_suite(&shapes, 1112, 707);
    conclude(
        "criterion 7 (factorization)",
        report.pass && report.trials >= 10_000,
        t0,
        Duration::from_secs(10),
        &format!(
            "{} trials, max deviation {:.2e} <= {:.1e}",
            report.trials, report.max_deviation, report.tolerance
        ),
    );
}

#[test]
fn criterion_8_sampler_audit() {
    // Orthogonality residual <= 1e-10, determinant-sign balance within 3
    // sigma of 1/2, and the entry distribution passes a two-sample test
    // (p > 0.001) against an exact reference sampler, in dimensions 2 and 4.
    let t0 = Instant::now();
    let mut detail = String::new();
    let mut pass = true;
    for dim in [2usize, 4] {
        let reports = haar_suite(dim, 3000, 808);
        for r in &reports {
            pass &= r.pass;
            detail.push_str(&format!(
                "dim {dim} {}: {:.2e}{}; ",
                r.suite,
                r.max_deviation,
                if r.pass { "" } else { " FAILED" }
            ));
        }
    }
    conclude(
        "criterion 8 (sampler audit)",
        pass,
        t0,
        Duration::from_secs(30),
        detail.trim_end_matches("; "),
    );
}

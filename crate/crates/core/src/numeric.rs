//! Small shared numeric helpers: cascade summation and a two-sample
//! Kolmogorov-Smirnov test.

use num_complex::Complex64;

/// Pairwise (cascade) summation of complex values.
///
/// Rounding error grows like O(log n) instead of the O(n) of a running sum,
/// which matters for the long quadrature and Monte-Carlo reductions.
pub fn pairwise_sum(xs: &[Complex64]) -> Complex64 {
    if xs.len() <= 32 {
        let mut acc = Complex64::new(0.0, 0.0);
        for x in xs {
            acc += x;
        }
        return acc;
    }
    let mid = xs.len() / 2;
    pairwise_sum(&xs[..mid]) + pairwise_sum(&xs[mid..])
}

/// Pairwise summation of real values.
pub fn pairwise_sum_f64(xs: &[f64]) -> f64 {
    if xs.len() <= 32 {
        return xs.iter().sum();
    }
    let mid = xs.len() / 2;
    pairwise_sum_f64(&xs[..mid]) + pairwise_sum_f64(&xs[mid..])
}

/// Two-sample Kolmogorov-Smirnov test.
///
/// Returns `(statistic, p_value)` where the p-value uses the asymptotic
/// Kolmogorov distribution with the finite-sample correction
/// `lambda = (sqrt(ne) + 0.12 + 0.11/sqrt(ne)) * d` (Numerical Recipes).
pub fn ks_two_sample(a: &[f64], b: &[f64]) -> (f64, f64) {
    assert!(!a.is_empty() && !b.is_empty(), "empty sample");
    let mut a = a.to_vec();
    let mut b = b.to_vec();
    a.sort_by(|x, y| x.partial_cmp(y).expect("NaN in KS sample"));
    b.sort_by(|x, y| x.partial_cmp(y).expect("NaN in KS sample"));

    let (na, nb) = (a.len(), b.len());
    let (mut ia, mut ib) = (0usize, 0usize);
    let mut d: f64 = 0.0;
    while ia < na && ib < nb {
        let (x, y) = (a[ia], b[ib]);
        if x <= y {
            ia += 1;
        }
        if y <= x {
            ib += 1;
        }
        let gap = (ia as f64 / na as f64 - ib as f64 / nb as f64).abs();
        d = d.max(gap);
    }

    let ne = (na as f64 * nb as f64) / (na as f64 + nb as f64);
    let lambda = (ne.sqrt() + 0.12 + 0.11 / ne.sqrt()) * d;
    (d, ks_survival(lambda))
}

/// Kolmogorov survival function Q(lambda) = 2 sum_{k>=1} (-1)^{k-1} exp(-2 k^2 lambda^2).
fn ks_survival(lambda: f64) -> f64 {
    if lambda < 1e-8 {
        return 1.0;
    }
    let mut sum = 0.0;
    let mut sign = 1.0;
    for k in 1..=100 {
        let term = (-2.0 * (k as f64).powi(2) * lambda * lambda).exp();
        sum += sign * term;
        sign = -sign;
        if term < 1e-17 {
            break;
        }
    }
    (2.0 * sum).clamp(0.0, 1.0)
}

//! Orthogonal-group machinery: distinguished elements (interleaving
//! permutation, torus blocks, component flips), Haar sampling by QR with
//! sign correction, and the Iwasawa factorization of a lower unipotent block
//! matrix together with its determinant bounds.

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_distr::StandardNormal;
use thiserror::Error;

/// Max-norm tolerance for the orthogonality residual of a [`KPoint`].
pub const ORTHO_TOL: f64 = 1e-10;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MatrixError {
    #[error("matrix is not square: {0}x{1}")]
    NotSquare(usize, usize),
    #[error("matrix is not orthogonal (residual {0:.3e})")]
    NotOrthogonal(f64),
    #[error("component entries must be +1 or -1")]
    BadComponentEntry,
}

/// A validated element of an orthogonal group O(m).
#[derive(Debug, Clone, PartialEq)]
pub struct KPoint {
    m: DMatrix<f64>,
}

impl KPoint {
    /// Validate orthogonality (`|x^T x - I|_max <= 1e-10`) and wrap.
    pub fn new(m: DMatrix<f64>) -> Result<Self, MatrixError> {
        if m.nrows() != m.ncols() {
            return Err(MatrixError::NotSquare(m.nrows(), m.ncols()));
        }
        let res = orthogonality_residual(&m);
        if !res.is_finite() || res > ORTHO_TOL {
            return Err(MatrixError::NotOrthogonal(res));
        }
        Ok(Self { m })
    }

    pub fn dim(&self) -> usize {
        self.m.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.m
    }

    pub fn into_matrix(self) -> DMatrix<f64> {
        self.m
    }

    /// Sign of the determinant (+1.0 or -1.0).
    pub fn det_sign(&self) -> f64 {
        self.m.determinant().signum()
    }

    /// Group product; revalidates the (cheaply drifting) residual.
    pub fn mul(&self, other: &KPoint) -> KPoint {
        KPoint::new(&self.m * &other.m).expect("product of orthogonal matrices")
    }

    /// Inverse = transpose.
    pub fn inverse(&self) -> KPoint {
        KPoint {
            m: self.m.transpose(),
        }
    }
}

fn orthogonality_residual(m: &DMatrix<f64>) -> f64 {
    let g = m.transpose() * m;
    let mut res = 0.0f64;
    for i in 0..g.nrows() {
        for j in 0..g.ncols() {
            let target = if i == j { 1.0 } else { 0.0 };
            res = res.max((g[(i, j)] - target).abs());
        }
    }
    res
}

/// The interleaving permutation with columns
/// `(e_1, e_3, ..., e_{2n-1}, e_2, e_4, ..., e_{2n})`.
pub fn weyl_element(n: usize) -> KPoint {
    assert!(n >= 1);
    let dim = 2 * n;
    let mut m = DMatrix::zeros(dim, dim);
    for j in 0..n {
        m[(2 * j, j)] = 1.0; // column j is e_{2j+1}
        m[(2 * j + 1, n + j)] = 1.0; // column n+j is e_{2j+2}
    }
    KPoint { m }
}

/// Block rotation `diag(r(theta_1), ..., r(theta_n))` with
/// `r(theta) = [[cos, sin], [-sin, cos]]`.
pub fn torus_element(thetas: &[f64]) -> KPoint {
    assert!(!thetas.is_empty());
    let dim = 2 * thetas.len();
    let mut m = DMatrix::zeros(dim, dim);
    for (j, &t) in thetas.iter().enumerate() {
        let (s, c) = t.sin_cos();
        m[(2 * j, 2 * j)] = c;
        m[(2 * j, 2 * j + 1)] = s;
        m[(2 * j + 1, 2 * j)] = -s;
        m[(2 * j + 1, 2 * j + 1)] = c;
    }
    KPoint { m }
}

/// Component representative: block `diag(-1, 1)` where `eps_j = -1`, identity
/// block where `eps_j = +1`.
pub fn component_element(eps: &[i8]) -> Result<KPoint, MatrixError> {
    assert!(!eps.is_empty());
    let dim = 2 * eps.len();
    let mut m = DMatrix::identity(dim, dim);
    for (j, &e) in eps.iter().enumerate() {
        match e {
            1 => {}
            -1 => m[(2 * j, 2 * j)] = -1.0,
            _ => return Err(MatrixError::BadComponentEntry),
        }
    }
    Ok(KPoint { m })
}

/// Haar sample on O(dim): QR of an iid standard normal matrix with the
/// R-diagonal signs absorbed into Q. Hits both components with equal mass.
pub fn haar_orthogonal<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> KPoint {
    assert!(dim >= 1);
    let g = DMatrix::from_fn(dim, dim, |_, _| rng.sample::<f64, _>(StandardNormal));
    let qr = g.qr();
    let mut q = qr.q();
    let r = qr.r();
    for j in 0..dim {
        if r[(j, j)] < 0.0 {
            for i in 0..dim {
                q[(i, j)] = -q[(i, j)];
            }
        }
    }
    KPoint::new(q).expect("QR factor is orthogonal")
}

/// Haar sample on O(2n).
pub fn haar_sample_k<R: Rng + ?Sized>(n: usize, rng: &mut R) -> KPoint {
    haar_orthogonal(2 * n, rng)
}

/// Independent Haar pair on O(n) x O(n), block-embedded in O(2n) on demand.
#[derive(Debug, Clone)]
pub struct KhPair {
    pub left: KPoint,
    pub right: KPoint,
}

impl KhPair {
    /// `diag(left, right)` as an element of O(2n).
    pub fn embedded(&self) -> KPoint {
        let n = self.left.dim();
        let mut m = DMatrix::zeros(2 * n, 2 * n);
        m.view_mut((0, 0), (n, n)).copy_from(self.left.matrix());
        m.view_mut((n, n), (n, n)).copy_from(self.right.matrix());
        KPoint { m }
    }
}

/// Haar sample on the block subgroup O(n) x O(n).
pub fn haar_sample_kh<R: Rng + ?Sized>(n: usize, rng: &mut R) -> KhPair {
    KhPair {
        left: haar_orthogonal(n, rng),
        right: haar_orthogonal(n, rng),
    }
}

/// Result of factoring `[[I, 0], [x, I]] = u * diag(t) * k` with `u` upper
/// unipotent, `t` positive, `k` orthogonal.
#[derive(Debug, Clone)]
pub struct IwasawaFactors {
    pub u: DMatrix<f64>,
    pub t: DVector<f64>,
    pub k: DMatrix<f64>,
    pub m1: usize,
    pub m2: usize,
}

impl IwasawaFactors {
    pub fn reconstruct(&self) -> DMatrix<f64> {
        let dim = self.t.len();
        let mut ut = self.u.clone();
        for j in 0..dim {
            for i in 0..dim {
                ut[(i, j)] *= self.t[j];
            }
        }
        ut * &self.k
    }

    /// Product of the torus entries in the lower block.
    pub fn det_a2(&self) -> f64 {
        (self.m1..self.m1 + self.m2).map(|i| self.t[i]).product()
    }
}

/// The lower unipotent block matrix `[[I_{m1}, 0], [x, I_{m2}]]` for x of
/// shape m2 x m1.
pub fn lower_unipotent(x: &DMatrix<f64>) -> DMatrix<f64> {
    let (m2, m1) = (x.nrows(), x.ncols());
    let dim = m1 + m2;
    let mut bar = DMatrix::identity(dim, dim);
    bar.view_mut((m1, 0), (m2, m1)).copy_from(x);
    bar
}

/// Iwasawa factorization of `[[I, 0], [x, I]]` by Gram-Schmidt on the rows
/// from the bottom up (an RQ-type factorization). The torus entries multiply
/// to 1 and the factors reconstruct the input to ~1e-14.
pub fn iwasawa_lower(x: &DMatrix<f64>) -> IwasawaFactors {
    let (m2, m1) = (x.nrows(), x.ncols());
    let dim = m1 + m2;
    let bar = lower_unipotent(x);

    // Orthonormalize rows bottom-up; two passes of modified Gram-Schmidt
    // keep the residual at machine level.
    let mut q = DMatrix::<f64>::zeros(dim, dim);
    for i in (0..dim).rev() {
        let mut v = bar.row(i).transpose();
        for _pass in 0..2 {
            for j in (i + 1..dim).rev() {
                let qj = q.row(j).transpose();
                let coeff = v.dot(&qj);
                v -= coeff * qj;
            }
        }
        let norm = v.norm();
        q.row_mut(i).copy_from(&(v / norm).transpose());
    }

    // bar = R * q with R upper triangular; split R = u * diag(t).
    let r = &bar * q.transpose();
    let t = DVector::from_fn(dim, |i, _| r[(i, i)]);
    let mut u = DMatrix::identity(dim, dim);
    for i in 0..dim {
        for j in i + 1..dim {
            u[(i, j)] = r[(i, j)] / t[j];
        }
    }
    IwasawaFactors {
        u,
        t,
        k: q,
        m1,
        m2,
    }
}

/// `(det_a2, lower, upper)` where
/// `lower = (1 + sum_j |x_j|^2)^{1/2}` and `upper = prod_j (1 + |x_j|^2)^{1/2}`
/// over the rows x_j of x. Asserts the sandwich `lower <= det_a2 <= upper`
/// up to 1e-9 slack.
pub fn det_a2_and_bounds(x: &DMatrix<f64>) -> (f64, f64, f64) {
    let fac = iwasawa_lower(x);
    let det_a2 = fac.det_a2();
    let mut sum = 0.0;
    let mut prod = 1.0;
    for i in 0..x.nrows() {
        let r2 = x.row(i).norm_squared();
        sum += r2;
        prod *= 1.0 + r2;
    }
    let lower = (1.0 + sum).sqrt();
    let upper = prod.sqrt();
    assert!(
        lower - 1e-9 <= det_a2 && det_a2 <= upper + 1e-9,
        "sandwich violated: {lower} <= {det_a2} <= {upper}"
    );
    (det_a2, lower, upper)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn weyl_element_small_cases() {
        // n = 1: the identity.
        assert_eq!(weyl_element(1).matrix(), &DMatrix::identity(2, 2));
        // n = 2: swaps e_2 and e_3.
        let w = weyl_element(2);
        let expect = DMatrix::from_row_slice(
            4,
            4,
            &[
                1.0, 0.0, 0.0, 0.0, //
                0.0, 0.0, 1.0, 0.0, //
                0.0, 1.0, 0.0, 0.0, //
                0.0, 0.0, 0.0, 1.0,
            ],
        );
        assert_eq!(w.matrix(), &expect);
        // Orthogonal for all small n.
        for n in 1..=5 {
            let w = weyl_element(n);
            assert_eq!(w.dim(), 2 * n);
            assert!(orthogonality_residual(w.matrix()) == 0.0);
        }
    }

    #[test]
    fn torus_element_cases() {
        let id = torus_element(&[0.0, 0.0]);
        assert_eq!(id.matrix(), &DMatrix::identity(4, 4));
        let pi_rot = torus_element(&[std::f64::consts::PI]);
        assert!((pi_rot.matrix()[(0, 0)] + 1.0).abs() < 1e-12);
        assert!((pi_rot.matrix()[(1, 1)] + 1.0).abs() < 1e-12);
        // Additivity: k(a) k(b) = k(a+b).
        let a = torus_element(&[0.3, -1.1]);
        let b = torus_element(&[0.5, 0.7]);
        let ab = torus_element(&[0.8, -0.4]);
        assert!((a.mul(&b).matrix() - ab.matrix()).abs().max() < 1e-12);
    }

    #[test]
    fn component_element_cases() {
        let c = component_element(&[-1]).unwrap();
        let expect = DMatrix::from_row_slice(2, 2, &[-1.0, 0.0, 0.0, 1.0]);
        assert_eq!(c.matrix(), &expect);
        // Involution.
        let c2 = component_element(&[-1, 1, -1]).unwrap();
        assert_eq!(c2.mul(&c2).matrix(), &DMatrix::identity(6, 6));
        assert!(matches!(
            component_element(&[0]),
            Err(MatrixError::BadComponentEntry)
        ));
    }

    #[test]
    fn haar_samples_are_orthogonal_and_balanced() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        let mut neg = 0usize;
        let trials = 2000;
        for _ in 0..trials {
            let k = haar_sample_k(2, &mut rng);
            assert!(orthogonality_residual(k.matrix()) <= 1e-12);
            if k.det_sign() < 0.0 {
                neg += 1;
            }
        }
        // 3 sigma for a fair coin over 2000 draws is ~0.0335.
        let frac = neg as f64 / trials as f64;
        assert!((frac - 0.5).abs() < 0.034, "det-sign fraction {frac}");
    }

    #[test]
    fn haar_entry_mean_is_centered() {
        let mut rng = ChaCha8Rng::seed_from_u64(22);
        let trials = 20_000;
        let mut sum = 0.0;
        for _ in 0..trials {
            sum += haar_sample_k(2, &mut rng).matrix()[(0, 0)];
        }
        let mean = sum / trials as f64;
        // Var(x_11) = 1/4 on O(4); 3 sigma of the mean.
        let bound = 3.0 * 0.5 / (trials as f64).sqrt();
        assert!(mean.abs() < bound, "mean {mean}, bound {bound}");
    }

    #[test]
    fn kh_pair_embeds_block_diagonally() {
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        let pair = haar_sample_kh(3, &mut rng);
        let e = pair.embedded();
        assert_eq!(e.dim(), 6);
        for i in 0..3 {
            for j in 3..6 {
                assert_eq!(e.matrix()[(i, j)], 0.0);
                assert_eq!(e.matrix()[(j, i)], 0.0);
            }
        }
        assert!(orthogonality_residual(e.matrix()) <= 1e-12);
    }

    #[test]
    fn iwasawa_zero_input_is_trivial() {
        let x = DMatrix::zeros(2, 2);
        let f = iwasawa_lower(&x);
        assert!((f.u.clone() - DMatrix::identity(4, 4)).abs().max() < 1e-14);
        assert!((f.k.clone() - DMatrix::identity(4, 4)).abs().max() < 1e-14);
        assert!(f.t.iter().all(|&t| (t - 1.0).abs() < 1e-14));
    }

    #[test]
    fn iwasawa_scalar_closed_form() {
        // m1 = m2 = 1, x = 3: t = (1/sqrt(10), sqrt(10)).
        let x = DMatrix::from_row_slice(1, 1, &[3.0]);
        let f = iwasawa_lower(&x);
        let s10 = 10.0f64.sqrt();
        assert!((f.t[0] - 1.0 / s10).abs() < 1e-12);
        assert!((f.t[1] - s10).abs() < 1e-12);
        let (det_a2, lower, upper) = det_a2_and_bounds(&x);
        assert!((det_a2 - s10).abs() < 1e-12);
        assert!((lower - s10).abs() < 1e-12);
        assert!((upper - s10).abs() < 1e-12);
    }

    /// Wedge-norm oracle: t_i ... t_m equals the norm of the wedge of rows
    /// i..m of the input, computed via a Gram determinant.
    fn wedge_norm(bar: &DMatrix<f64>, from: usize) -> f64 {
        let rows = bar.nrows() - from;
        let mut gram = DMatrix::zeros(rows, rows);
        for a in 0..rows {
            for b in 0..rows {
                gram[(a, b)] = bar.row(from + a).dot(&bar.row(from + b));
            }
        }
        gram.determinant().sqrt()
    }

    #[test]
    fn iwasawa_t_matches_wedge_norm_oracle_3x3() {
        let mut rng = ChaCha8Rng::seed_from_u64(24);
        for &(m1, m2) in &[(1usize, 2usize), (2, 1)] {
            for _ in 0..200 {
                let x = DMatrix::from_fn(m2, m1, |_, _| rng.gen_range(-4.0..4.0));
                let bar = lower_unipotent(&x);
                let f = iwasawa_lower(&x);
                let dim = m1 + m2;
                for i in 0..dim {
                    let tail: f64 = (i..dim).map(|j| f.t[j]).product();
                    let oracle = wedge_norm(&bar, i);
                    assert!(
                        (tail - oracle).abs() <= 1e-10 * oracle.max(1.0),
                        "rows {i}..: {tail} vs oracle {oracle}"
                    );
                }
            }
        }
    }

    proptest! {
        #[test]
        fn iwasawa_reconstructs_and_t_positive(
            m1 in 1usize..=3,
            m2 in 1usize..=3,
            seed in 0u64..1000,
        ) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let x = DMatrix::from_fn(m2, m1, |_, _| rng.gen_range(-5.0..5.0));
            let f = iwasawa_lower(&x);
            let res = (f.reconstruct() - lower_unipotent(&x)).abs().max();
            prop_assert!(res <= 1e-10, "reconstruction residual {res}");
            prop_assert!(f.t.iter().all(|&t| t > 0.0));
            let prod: f64 = f.t.iter().product();
            prop_assert!((prod - 1.0).abs() <= 1e-10, "prod t = {prod}");
            prop_assert!(orthogonality_residual(&f.k) <= 1e-12);
            // Unipotent upper factor.
            for i in 0..f.u.nrows() {
                prop_assert!((f.u[(i, i)] - 1.0).abs() < 1e-14);
                for j in 0..i {
                    prop_assert!(f.u[(i, j)].abs() < 1e-14);
                }
            }
        }

        #[test]
        fn det_a2_sandwich(
            m1 in 1usize..=3,
            m2 in 1usize..=3,
            seed in 0u64..500,
        ) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0xabcdef);
            let x = DMatrix::from_fn(m2, m1, |_, _| rng.gen_range(-5.0..5.0));
            let (det_a2, lower, upper) = det_a2_and_bounds(&x);
            prop_assert!(lower - 1e-9 <= det_a2 && det_a2 <= upper + 1e-9);
            if m2 >= 2 {
                // Strict sandwich is generic for more than one row.
                prop_assert!(det_a2 < upper + 1e-9);
            }
        }
    }
}

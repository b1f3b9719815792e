//! Random-matrix and factorisation primitives shared by the samplers.

use nalgebra::{DMatrix, DVector};
use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{Result, SvarError};

/// Square (and occasionally rectangular) real matrix used for Z, Q, R, Σ_tr and A₀.
pub type Matrix = DMatrix<f64>;
pub type Vector = DVector<f64>;

/// Smallest admissible |R_jj| before a QR factorisation is declared rank deficient.
pub const RANK_TOLERANCE: f64 = 1e-12;

/// Reproducible random stream identified by `(seed, stream_id)`.
///
/// Backed by ChaCha8, whose 64-bit stream selector gives independent
/// sequences for the same seed without any coordination between workers.
#[derive(Clone, Debug)]
pub struct RngStream {
    seed: u64,
    stream_id: u64,
    inner: ChaCha8Rng,
}

impl RngStream {
    pub fn new(seed: u64, stream_id: u64) -> Self {
        let mut inner = ChaCha8Rng::seed_from_u64(seed);
        inner.set_stream(stream_id);
        Self {
            seed,
            stream_id,
            inner,
        }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn stream_id(&self) -> u64 {
        self.stream_id
    }

    /// A sibling stream derived from this one's seed.
    pub fn fork(&self, stream_id: u64) -> Self {
        Self::new(self.seed, stream_id)
    }
}

impl RngCore for RngStream {
    fn next_u32(&mut self) -> u32 {
        self.inner.next_u32()
    }

    fn next_u64(&mut self) -> u64 {
        self.inner.next_u64()
    }

    fn fill_bytes(&mut self, dst: &mut [u8]) {
        self.inner.fill_bytes(dst)
    }
}

/// n×n matrix of i.i.d. standard normals, filled row by row.
pub fn draw_standard_matrix_normal<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Matrix {
    let mut z = Matrix::zeros(n, n);
    fill_standard_normal(&mut z, rng);
    z
}

/// Overwrite `z` with standard normals in row-major order.
pub fn fill_standard_normal<R: Rng + ?Sized>(z: &mut Matrix, rng: &mut R) {
    for i in 0..z.nrows() {
        for j in 0..z.ncols() {
            z[(i, j)] = rng.sample(StandardNormal);
        }
    }
}

/// Householder QR with the sign convention diag(R) ≥ 0.
///
/// Under this convention Q is a function of Z alone, and Q(Z) is Haar
/// distributed on O(n) when Z has i.i.d. standard normal entries.
pub fn qr_positive_diag(z: &Matrix) -> Result<(Matrix, Matrix)> {
    let n = z.nrows();
    assert_eq!(n, z.ncols(), "qr_positive_diag expects a square matrix");
    let mut r = z.clone();
    let mut q = Matrix::identity(n, n);
    let mut reflectors: Vec<(usize, Vec<f64>)> = Vec::with_capacity(n.saturating_sub(1));

    for k in 0..n.saturating_sub(1) {
        let norm = (k..n).map(|i| r[(i, k)] * r[(i, k)]).sum::<f64>().sqrt();
        if norm == 0.0 {
            continue;
        }
        let alpha = if r[(k, k)] > 0.0 { -norm } else { norm };
        let mut v: Vec<f64> = (k..n).map(|i| r[(i, k)]).collect();
        v[0] -= alpha;
        let vnorm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if vnorm == 0.0 {
            continue;
        }
        v.iter_mut().for_each(|x| *x /= vnorm);
        apply_reflector(&mut r, k, &v, k);
        for i in k + 1..n {
            r[(i, k)] = 0.0;
        }
        reflectors.push((k, v));
    }
    for (k, v) in reflectors.iter().rev() {
        apply_reflector(&mut q, *k, v, 0);
    }

    let mut min_diag = f64::INFINITY;
    for j in 0..n {
        let d = r[(j, j)];
        if d < 0.0 {
            for i in 0..n {
                q[(i, j)] = -q[(i, j)];
            }
            for c in j..n {
                r[(j, c)] = -r[(j, c)];
            }
        }
        min_diag = min_diag.min(d.abs());
    }
    if !(min_diag >= RANK_TOLERANCE) {
        return Err(SvarError::RankDeficient { min_diag });
    }
    Ok((q, r))
}

/// The orthonormal factor Q(Z).
pub fn orthonormal_factor(z: &Matrix) -> Result<Matrix> {
    qr_positive_diag(z).map(|(q, _)| q)
}

// a[k.., col0..] -= 2 v (vᵀ a[k.., col0..])
fn apply_reflector(a: &mut Matrix, k: usize, v: &[f64], col0: usize) {
    let n = a.nrows();
    for c in col0..a.ncols() {
        let dot: f64 = (k..n).map(|i| v[i - k] * a[(i, c)]).sum();
        if dot != 0.0 {
            for i in k..n {
                a[(i, c)] -= 2.0 * v[i - k] * dot;
            }
        }
    }
}

/// Lower-triangular L with L Lᵀ = S and a positive diagonal.
pub fn cholesky_lower(s: &Matrix) -> Result<Matrix> {
    if !s.is_square() || s.iter().any(|x| !x.is_finite()) {
        return Err(SvarError::NotPositiveDefinite);
    }
    let scale = s.amax().max(1.0);
    if (s - s.transpose()).amax() > 1e-10 * scale {
        return Err(SvarError::NotPositiveDefinite);
    }
    let chol = nalgebra::Cholesky::new(s.clone()).ok_or(SvarError::NotPositiveDefinite)?;
    let l = chol.unpack();
    if (0..l.nrows()).any(|i| !(l[(i, i)] > 0.0)) {
        return Err(SvarError::NotPositiveDefinite);
    }
    Ok(l)
}

/// Solve L x = b for lower-triangular L.
pub fn solve_lower(l: &Matrix, b: &[f64]) -> Vector {
    let n = l.nrows();
    let mut x = Vector::zeros(n);
    for i in 0..n {
        let mut acc = b[i];
        for k in 0..i {
            acc -= l[(i, k)] * x[k];
        }
        x[i] = acc / l[(i, i)];
    }
    x
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn qr_of_identity() {
        let (q, r) = qr_positive_diag(&Matrix::identity(2, 2)).unwrap();
        assert_eq!(q, Matrix::identity(2, 2));
        assert_eq!(r, Matrix::identity(2, 2));
    }

    #[test]
    fn qr_forces_nonnegative_diagonal() {
        let z = Matrix::from_row_slice(2, 2, &[-1.0, 0.0, 0.0, 1.0]);
        let (q, r) = qr_positive_diag(&z).unwrap();
        assert!((q - Matrix::from_row_slice(2, 2, &[-1.0, 0.0, 0.0, 1.0])).amax() < 1e-15);
        assert!((r - Matrix::identity(2, 2)).amax() < 1e-15);
    }

    #[test]
    fn qr_reconstructs_random_matrices() {
        let mut rng = RngStream::new(7, 0);
        for n in 1..=6 {
            for _ in 0..200 {
                let z = draw_standard_matrix_normal(n, &mut rng);
                let (q, r) = qr_positive_diag(&z).unwrap();
                let orth = (q.transpose() * &q - Matrix::identity(n, n)).amax();
                assert!(orth < 1e-10, "QᵀQ deviates by {orth}");
                assert!((&q * &r - &z).amax() < 1e-8 * z.amax());
                for i in 0..n {
                    assert!(r[(i, i)] >= 0.0);
                    for j in 0..i {
                        assert_eq!(r[(i, j)], 0.0);
                    }
                }
            }
        }
    }

    #[test]
    fn qr_rejects_rank_deficient() {
        let z = Matrix::from_row_slice(2, 2, &[1.0, 2.0, 2.0, 4.0]);
        assert!(matches!(
            qr_positive_diag(&z),
            Err(SvarError::RankDeficient { .. })
        ));
        assert!(qr_positive_diag(&Matrix::zeros(3, 3)).is_err());
    }

    #[test]
    fn cholesky_cases() {
        let l = cholesky_lower(&Matrix::identity(3, 3)).unwrap();
        assert_eq!(l, Matrix::identity(3, 3));

        let s = Matrix::from_row_slice(2, 2, &[1.0, -0.5, -0.5, 1.25]);
        let l = cholesky_lower(&s).unwrap();
        let expected = Matrix::from_row_slice(2, 2, &[1.0, 0.0, -0.5, 1.0]);
        assert!((l - expected).amax() < 1e-15);

        let bad = Matrix::from_row_slice(2, 2, &[1.0, 2.0, 2.0, 1.0]);
        assert!(matches!(
            cholesky_lower(&bad),
            Err(SvarError::NotPositiveDefinite)
        ));
    }

    #[test]
    fn streams_are_reproducible_and_distinct() {
        let a = draw_standard_matrix_normal(2, &mut RngStream::new(42, 3));
        let b = draw_standard_matrix_normal(2, &mut RngStream::new(42, 3));
        let c = draw_standard_matrix_normal(2, &mut RngStream::new(42, 4));
        assert_eq!(a, b);
        assert_ne!(a, c);
    }

    #[test]
    fn lower_solve_matches_inverse() {
        let l = Matrix::from_row_slice(3, 3, &[2.0, 0.0, 0.0, 1.0, 3.0, 0.0, -1.0, 0.5, 1.5]);
        let b = [1.0, -2.0, 0.25];
        let x = solve_lower(&l, &b);
        let back = &l * &x;
        for i in 0..3 {
            assert!((back[i] - b[i]).abs() < 1e-14);
        }
    }
}

//! Hermitian matrices with enforced symmetry.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::eig::hermitian_eig;
use crate::linalg::matrix::{kron, CVector, ComplexMatrix};

/// Hermitian matrix; `M = Mᴴ` holds exactly after construction.
///
/// Construction symmetrizes via `(M + Mᴴ)/2`, so skew parts introduced by
/// round-off are discarded at the boundary.
#[derive(Clone, Debug, PartialEq)]
pub struct HermitianMatrix {
    inner: ComplexMatrix,
}

impl HermitianMatrix {
    /// Symmetrizing constructor: stores `(m + mᴴ)/2`.
    pub fn new(m: &ComplexMatrix) -> Self {
        assert_eq!(m.rows(), m.cols(), "Hermitian matrix must be square");
        let sym = m.add(&m.adjoint()).scale_re(0.5);
        Self { inner: sym }
    }

    pub fn zeros(dim: usize) -> Self {
        Self {
            inner: ComplexMatrix::zeros(dim, dim),
        }
    }

    pub fn identity(dim: usize) -> Self {
        Self {
            inner: ComplexMatrix::identity(dim),
        }
    }

    pub fn diag_real(d: &[f64]) -> Self {
        let mut m = ComplexMatrix::zeros(d.len(), d.len());
        for (i, &v) in d.iter().enumerate() {
            m.set(i, i, Complex64::new(v, 0.0));
        }
        Self { inner: m }
    }

    /// Rank-one Hermitian form `conj(q) qᵀ`, i.e. the matrix `E` with
    /// `aᴴ E a = |qᵀ a|²`.
    pub fn outer_conj(q: &[Complex64]) -> Self {
        let n = q.len();
        let mut m = ComplexMatrix::zeros(n, n);
        for c in 0..n {
            for r in 0..n {
                m.set(r, c, q[r].conj() * q[c]);
            }
        }
        Self { inner: m }
    }

    /// Rank-one Hermitian form `v vᴴ`.
    pub fn outer(v: &[Complex64]) -> Self {
        let n = v.len();
        let mut m = ComplexMatrix::zeros(n, n);
        for c in 0..n {
            for r in 0..n {
                m.set(r, c, v[r] * v[c].conj());
            }
        }
        Self { inner: m }
    }

    pub fn dim(&self) -> usize {
        self.inner.rows()
    }

    #[inline]
    pub fn get(&self, r: usize, c: usize) -> Complex64 {
        self.inner.get(r, c)
    }

    pub fn as_matrix(&self) -> &ComplexMatrix {
        &self.inner
    }

    pub fn into_matrix(self) -> ComplexMatrix {
        self.inner
    }

    pub fn add(&self, other: &Self) -> Self {
        Self {
            inner: self.inner.add(&other.inner),
        }
    }

    pub fn sub(&self, other: &Self) -> Self {
        Self {
            inner: self.inner.sub(&other.inner),
        }
    }

    pub fn scale(&self, s: f64) -> Self {
        Self {
            inner: self.inner.scale_re(s),
        }
    }

    /// Adds `s · I`.
    pub fn shift(&self, s: f64) -> Self {
        let mut m = self.inner.clone();
        for i in 0..self.dim() {
            m.add_assign_at(i, i, Complex64::new(s, 0.0));
        }
        Self { inner: m }
    }

    pub fn trace(&self) -> f64 {
        self.inner.trace().re
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.inner.frobenius_norm()
    }

    /// Real inner product `tr(A B)` of two Hermitian matrices.
    pub fn inner_product(&self, other: &Self) -> f64 {
        debug_assert_eq!(self.dim(), other.dim());
        // tr(AB) = sum_{rc} A_{rc} B_{cr} = sum conj pairs -> real
        let n = self.dim();
        let mut acc = 0.0;
        for c in 0..n {
            for r in 0..n {
                let a = self.inner.get(r, c);
                let b = other.inner.get(c, r);
                acc += a.re * b.re - a.im * b.im;
            }
        }
        acc
    }

    /// Real quadratic form `aᴴ M a`.
    pub fn quad_form(&self, a: &[Complex64]) -> f64 {
        debug_assert_eq!(self.dim(), a.len());
        let mv = self.inner.matvec(a);
        a.iter().zip(&mv).map(|(x, y)| (x.conj() * y).re).sum()
    }

    pub fn matvec(&self, v: &[Complex64]) -> CVector {
        self.inner.matvec(v)
    }

    /// Transpose (equals the conjugate for a Hermitian matrix).
    pub fn transpose(&self) -> Self {
        Self {
            inner: self.inner.transpose(),
        }
    }

    /// Kronecker product of two Hermitian matrices is Hermitian.
    pub fn kron(&self, other: &Self) -> Self {
        Self {
            inner: kron(&self.inner, &other.inner),
        }
    }

    /// Eigendecomposition with eigenvalues sorted in descending order.
    /// Columns of the returned matrix are the matching orthonormal
    /// eigenvectors.
    pub fn eig(&self) -> Result<(Vec<f64>, ComplexMatrix)> {
        hermitian_eig(&self.inner)
    }

    pub fn min_eigenvalue(&self) -> Result<f64> {
        let (vals, _) = self.eig()?;
        Ok(*vals.last().expect("dim >= 1"))
    }

    /// PSD square root: `S` Hermitian PSD with `S·S = M` (to round-off).
    ///
    /// Eigenvalues in `[-1e-12·‖M‖_F, 0)` are clipped to zero; anything more
    /// negative is rejected.
    pub fn psd_sqrt(&self) -> Result<Self> {
        let (vals, vecs) = self.eig()?;
        let tol = 1e-12 * self.frobenius_norm().max(1e-300);
        let mut sq = Vec::with_capacity(vals.len());
        for &v in &vals {
            if v < -tol {
                return Err(Error::NotPsd { min_eig: v });
            }
            sq.push(v.max(0.0).sqrt());
        }
        Ok(Self::from_eig(&sq, &vecs))
    }

    /// Reassembles `V diag(vals) Vᴴ`.
    pub fn from_eig(vals: &[f64], vecs: &ComplexMatrix) -> Self {
        let n = vecs.rows();
        let mut m = ComplexMatrix::zeros(n, n);
        for (k, &lam) in vals.iter().enumerate() {
            if lam == 0.0 {
                continue;
            }
            let col = vecs.column(k);
            for c in 0..n {
                let vc = col[c].conj() * lam;
                for r in 0..n {
                    m.add_assign_at(r, c, col[r] * vc);
                }
            }
        }
        Self::new(&m)
    }

    /// Lower-triangular Cholesky factor of a positive definite matrix.
    pub fn cholesky(&self) -> Result<CholeskyFactor> {
        CholeskyFactor::decompose(self)
    }
}

/// Lower-triangular factor `L` with `L Lᴴ = M`.
#[derive(Clone, Debug)]
pub struct CholeskyFactor {
    l: ComplexMatrix,
}

impl CholeskyFactor {
    fn decompose(m: &HermitianMatrix) -> Result<Self> {
        let n = m.dim();
        let mut l = ComplexMatrix::zeros(n, n);
        for j in 0..n {
            let mut d = m.get(j, j).re;
            for k in 0..j {
                d -= l.get(j, k).norm_sqr();
            }
            if d <= 0.0 || !d.is_finite() {
                return Err(Error::NotPd { pivot: j });
            }
            let dj = d.sqrt();
            l.set(j, j, Complex64::new(dj, 0.0));
            for i in (j + 1)..n {
                let mut s = m.get(i, j);
                for k in 0..j {
                    s -= l.get(i, k) * l.get(j, k).conj();
                }
                l.set(i, j, s / dj);
            }
        }
        Ok(Self { l })
    }

    pub fn lower(&self) -> &ComplexMatrix {
        &self.l
    }

    /// Solves `L x = b`.
    pub fn solve_lower(&self, b: &[Complex64]) -> CVector {
        let n = self.l.rows();
        let mut x = b.to_vec();
        for i in 0..n {
            for k in 0..i {
                let lik = self.l.get(i, k);
                x[i] = x[i] - lik * x[k];
            }
            x[i] /= self.l.get(i, i);
        }
        x
    }

    /// Solves `Lᴴ x = b`.
    pub fn solve_upper(&self, b: &[Complex64]) -> CVector {
        let n = self.l.rows();
        let mut x = b.to_vec();
        for i in (0..n).rev() {
            for k in (i + 1)..n {
                let lki = self.l.get(k, i).conj();
                x[i] = x[i] - lki * x[k];
            }
            x[i] /= self.l.get(i, i);
        }
        x
    }

    /// Solves `M x = b` via the two triangular solves.
    pub fn solve(&self, b: &[Complex64]) -> CVector {
        self.solve_upper(&self.solve_lower(b))
    }

    /// Explicit inverse of `M`, returned Hermitian.
    pub fn inverse(&self) -> HermitianMatrix {
        let n = self.l.rows();
        let mut inv = ComplexMatrix::zeros(n, n);
        let mut e = vec![Complex64::ZERO; n];
        for c in 0..n {
            e[c] = Complex64::ONE;
            inv.set_column(c, &self.solve(&e));
            e[c] = Complex64::ZERO;
        }
        HermitianMatrix::new(&inv)
    }

    /// Congruence `L⁻¹ A L⁻ᴴ` for a Hermitian `A`; used by step-length
    /// computations.
    pub fn whiten(&self, a: &HermitianMatrix) -> HermitianMatrix {
        let n = self.l.rows();
        // First L^{-1} A  (column by column), then ( . ) L^{-H} via solving on rows.
        let mut t = ComplexMatrix::zeros(n, n);
        for c in 0..n {
            t.set_column(c, &self.solve_lower(a.as_matrix().column(c)));
        }
        // B = T L^{-H}  =>  B L^H = T  =>  (L conj(B^T))... solve per row:
        // row r of B satisfies L^H-solve applied to conj of row? Cheaper: B = (L^{-1} T^H)^H.
        let th = t.adjoint();
        let mut bh = ComplexMatrix::zeros(n, n);
        for c in 0..n {
            bh.set_column(c, &self.solve_lower(th.column(c)));
        }
        HermitianMatrix::new(&bh.adjoint())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::matrix::norm2;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn random_hermitian(n: usize, seed: u64) -> HermitianMatrix {
        // Simple deterministic fill; symmetrized by the constructor.
        let mut state = seed.wrapping_mul(0x9E3779B97F4A7C15).wrapping_add(1);
        let mut next = move || {
            state ^= state << 13;
            state ^= state >> 7;
            state ^= state << 17;
            (state >> 11) as f64 / (1u64 << 53) as f64 - 0.5
        };
        let m = ComplexMatrix::from_fn(n, n, |_, _| c(next(), next()));
        HermitianMatrix::new(&m)
    }

    #[test]
    fn construction_symmetrizes() {
        let m = ComplexMatrix::from_rows(&[
            vec![c(1.0, 0.5), c(2.0, 1.0)],
            vec![c(0.0, 0.0), c(3.0, -0.5)],
        ]);
        let h = HermitianMatrix::new(&m);
        for r in 0..2 {
            for c_ in 0..2 {
                let a = h.get(r, c_);
                let b = h.get(c_, r).conj();
                assert_eq!(a, b);
            }
        }
        assert_eq!(h.get(0, 0).im, 0.0);
    }

    #[test]
    fn quad_form_matches_outer_conj() {
        let q = vec![c(1.0, 2.0), c(-0.5, 0.3), c(0.0, 1.5)];
        let e = HermitianMatrix::outer_conj(&q);
        let a = vec![c(0.2, -0.7), c(1.0, 0.1), c(-0.3, 0.4)];
        let direct = a
            .iter()
            .zip(&q)
            .map(|(ai, qi)| qi * ai)
            .sum::<Complex64>()
            .norm_sqr();
        assert!((e.quad_form(&a) - direct).abs() < 1e-12 * direct.max(1.0));
    }

    #[test]
    fn psd_sqrt_diagonal() {
        let m = HermitianMatrix::diag_real(&[4.0, 9.0]);
        let s = m.psd_sqrt().unwrap();
        assert!((s.get(0, 0).re - 2.0).abs() < 1e-12);
        assert!((s.get(1, 1).re - 3.0).abs() < 1e-12);
        let i = HermitianMatrix::identity(3).psd_sqrt().unwrap();
        assert!((i.sub(&HermitianMatrix::identity(3))).frobenius_norm() < 1e-12);
    }

    #[test]
    fn psd_sqrt_random_roundtrip() {
        let h = random_hermitian(4, 7);
        // Make it PSD by squaring.
        let m = HermitianMatrix::new(&h.as_matrix().matmul(h.as_matrix()));
        let s = m.psd_sqrt().unwrap();
        let back = HermitianMatrix::new(&s.as_matrix().matmul(s.as_matrix()));
        let rel = back.sub(&m).frobenius_norm() / m.frobenius_norm();
        assert!(rel <= 1e-10, "rel={rel}");
    }

    #[test]
    fn psd_sqrt_rejects_indefinite() {
        let m = HermitianMatrix::diag_real(&[1.0, -0.5]);
        assert!(matches!(m.psd_sqrt(), Err(Error::NotPsd { .. })));
    }

    #[test]
    fn cholesky_solves() {
        let h = random_hermitian(5, 3);
        let m = HermitianMatrix::new(&h.as_matrix().matmul(h.as_matrix())).shift(1.0);
        let f = m.cholesky().unwrap();
        let b: Vec<_> = (0..5).map(|i| c(i as f64, -(i as f64) * 0.5)).collect();
        let x = f.solve(&b);
        let r = m.matvec(&x);
        let err: f64 = r.iter().zip(&b).map(|(a, bb)| (a - bb).norm()).sum();
        assert!(err < 1e-9 * norm2(&b).max(1.0), "err={err}");

        let inv = f.inverse();
        let prod = inv.as_matrix().matmul(m.as_matrix());
        let eye = ComplexMatrix::identity(5);
        assert!(prod.sub(&eye).frobenius_norm() < 1e-9);
    }

    #[test]
    fn whiten_congruence() {
        let h = random_hermitian(4, 11);
        let m = HermitianMatrix::new(&h.as_matrix().matmul(h.as_matrix())).shift(0.5);
        let f = m.cholesky().unwrap();
        let a = random_hermitian(4, 21);
        let w = f.whiten(&a);
        // L W L^H should reproduce A.
        let l = f.lower();
        let back = l.matmul(w.as_matrix()).matmul(&l.adjoint());
        assert!(back.sub(a.as_matrix()).frobenius_norm() < 1e-9);
    }
}

//! Dense complex matrices and vectors.
//!
//! Storage is column-major throughout the crate, so `vectorize` (column
//! stacking) is a plain copy of the backing buffer and `kron`/`vectorize`
//! interact through the identity `vec(A B C) = (Cᵀ ⊗ A) vec(B)`.

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Complex column vector.
pub type CVector = Vec<Complex64>;

/// Dense complex matrix, column-major.
#[derive(Clone, PartialEq)]
pub struct ComplexMatrix {
    rows: usize,
    cols: usize,
    data: Vec<Complex64>,
}

impl std::fmt::Debug for ComplexMatrix {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        writeln!(f, "ComplexMatrix {}x{} [", self.rows, self.cols)?;
        for r in 0..self.rows.min(8) {
            write!(f, "  ")?;
            for c in 0..self.cols.min(8) {
                let z = self.get(r, c);
                write!(f, "{:+.4}{:+.4}i ", z.re, z.im)?;
            }
            writeln!(f)?;
        }
        write!(f, "]")
    }
}

impl ComplexMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![Complex64::ZERO; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.set(i, i, Complex64::ONE);
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> Complex64) -> Self {
        let mut m = Self::zeros(rows, cols);
        for c in 0..cols {
            for r in 0..rows {
                m.set(r, c, f(r, c));
            }
        }
        m
    }

    /// Builds from row-major real/imag pairs; handy in tests.
    pub fn from_rows(rows: &[Vec<Complex64>]) -> Self {
        let nr = rows.len();
        let nc = if nr == 0 { 0 } else { rows[0].len() };
        Self::from_fn(nr, nc, |r, c| rows[r][c])
    }

    /// Column-major backing data, length `rows * cols`.
    pub fn data(&self) -> &[Complex64] {
        &self.data
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn get(&self, r: usize, c: usize) -> Complex64 {
        debug_assert!(r < self.rows && c < self.cols);
        self.data[c * self.rows + r]
    }

    #[inline]
    pub fn set(&mut self, r: usize, c: usize, v: Complex64) {
        debug_assert!(r < self.rows && c < self.cols);
        self.data[c * self.rows + r] = v;
    }

    #[inline]
    pub fn add_assign_at(&mut self, r: usize, c: usize, v: Complex64) {
        self.data[c * self.rows + r] += v;
    }

    pub fn column(&self, c: usize) -> &[Complex64] {
        &self.data[c * self.rows..(c + 1) * self.rows]
    }

    pub fn set_column(&mut self, c: usize, v: &[Complex64]) {
        debug_assert_eq!(v.len(), self.rows);
        self.data[c * self.rows..(c + 1) * self.rows].copy_from_slice(v);
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |r, c| self.get(c, r))
    }

    pub fn conj(&self) -> Self {
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|z| z.conj()).collect(),
        }
    }

    /// Conjugate transpose.
    pub fn adjoint(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |r, c| self.get(c, r).conj())
    }

    pub fn add(&self, other: &Self) -> Self {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self
                .data
                .iter()
                .zip(&other.data)
                .map(|(a, b)| a + b)
                .collect(),
        }
    }

    pub fn sub(&self, other: &Self) -> Self {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self
                .data
                .iter()
                .zip(&other.data)
                .map(|(a, b)| a - b)
                .collect(),
        }
    }

    pub fn scale(&self, s: Complex64) -> Self {
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|z| z * s).collect(),
        }
    }

    pub fn scale_re(&self, s: f64) -> Self {
        self.scale(Complex64::new(s, 0.0))
    }

    pub fn matmul(&self, other: &Self) -> Self {
        assert_eq!(self.cols, other.rows, "matmul dimension mismatch");
        let mut out = Self::zeros(self.rows, other.cols);
        for c in 0..other.cols {
            for k in 0..self.cols {
                let b = other.get(k, c);
                if b == Complex64::ZERO {
                    continue;
                }
                let a_col = &self.data[k * self.rows..(k + 1) * self.rows];
                let o_col = &mut out.data[c * self.rows..(c + 1) * self.rows];
                for r in 0..self.rows {
                    o_col[r] += a_col[r] * b;
                }
            }
        }
        out
    }

    pub fn matvec(&self, v: &[Complex64]) -> CVector {
        assert_eq!(self.cols, v.len(), "matvec dimension mismatch");
        let mut out = vec![Complex64::ZERO; self.rows];
        for (k, &vk) in v.iter().enumerate() {
            if vk == Complex64::ZERO {
                continue;
            }
            let col = self.column(k);
            for r in 0..self.rows {
                out[r] += col[r] * vk;
            }
        }
        out
    }

    pub fn trace(&self) -> Complex64 {
        (0..self.rows.min(self.cols)).map(|i| self.get(i, i)).sum()
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn is_finite(&self) -> bool {
        self.data
            .iter()
            .all(|z| z.re.is_finite() && z.im.is_finite())
    }

    /// Column-stacking `vec(A)`.
    pub fn vectorize(&self) -> CVector {
        self.data.clone()
    }

    /// Inverse of [`ComplexMatrix::vectorize`]: reshapes a column vector into
    /// a `rows x cols` matrix.
    pub fn unvectorize(v: &[Complex64], rows: usize, cols: usize) -> Result<Self> {
        if v.len() != rows * cols {
            return Err(Error::ShapeMismatch {
                expected: rows * cols,
                got: v.len(),
                context: "unvectorize",
            });
        }
        Ok(Self {
            rows,
            cols,
            data: v.to_vec(),
        })
    }
}

/// Kronecker product `a ⊗ b`.
pub fn kron(a: &ComplexMatrix, b: &ComplexMatrix) -> ComplexMatrix {
    let (ra, ca) = (a.rows(), a.cols());
    let (rb, cb) = (b.rows(), b.cols());
    let mut out = ComplexMatrix::zeros(ra * rb, ca * cb);
    for ca_i in 0..ca {
        for ra_i in 0..ra {
            let av = a.get(ra_i, ca_i);
            if av == Complex64::ZERO {
                continue;
            }
            for cb_i in 0..cb {
                for rb_i in 0..rb {
                    out.set(ra_i * rb + rb_i, ca_i * cb + cb_i, av * b.get(rb_i, cb_i));
                }
            }
        }
    }
    out
}

/// Kronecker product of two column vectors, `a ⊗ b`.
pub fn kron_vec(a: &[Complex64], b: &[Complex64]) -> CVector {
    let mut out = Vec::with_capacity(a.len() * b.len());
    for &ai in a {
        for &bi in b {
            out.push(ai * bi);
        }
    }
    out
}

/// `uᴴ v`.
pub fn dot_conj(u: &[Complex64], v: &[Complex64]) -> Complex64 {
    u.iter().zip(v).map(|(a, b)| a.conj() * b).sum()
}

/// `uᵀ v` (no conjugation).
pub fn dot_t(u: &[Complex64], v: &[Complex64]) -> Complex64 {
    u.iter().zip(v).map(|(a, b)| a * b).sum()
}

pub fn norm2(v: &[Complex64]) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

pub fn norm2_sqr(v: &[Complex64]) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum::<f64>()
}

/// Element-wise (Hadamard) product.
pub fn hadamard(u: &[Complex64], v: &[Complex64]) -> CVector {
    assert_eq!(u.len(), v.len());
    u.iter().zip(v).map(|(a, b)| a * b).collect()
}

pub fn scale_vec(v: &[Complex64], s: Complex64) -> CVector {
    v.iter().map(|z| z * s).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn vectorize_is_column_major() {
        // [[1,3],[2,4]] stacks to (1,2,3,4)
        let m = ComplexMatrix::from_rows(&[
            vec![c(1.0, 0.0), c(3.0, 0.0)],
            vec![c(2.0, 0.0), c(4.0, 0.0)],
        ]);
        let v = m.vectorize();
        assert_eq!(v, vec![c(1.0, 0.0), c(2.0, 0.0), c(3.0, 0.0), c(4.0, 0.0)]);
    }

    #[test]
    fn unvectorize_roundtrip() {
        let m = ComplexMatrix::from_fn(4, 4, |r, c_| c(r as f64, c_ as f64));
        let back = ComplexMatrix::unvectorize(&m.vectorize(), 4, 4).unwrap();
        assert_eq!(m, back);
        assert!(ComplexMatrix::unvectorize(&m.vectorize(), 3, 4).is_err());
    }

    #[test]
    fn vectorize_preserves_frobenius_norm() {
        let m = ComplexMatrix::from_fn(3, 5, |r, c_| c(0.3 * r as f64 - 1.0, 0.7 * c_ as f64));
        assert!((norm2(&m.vectorize()) - m.frobenius_norm()).abs() < 1e-14);
    }

    #[test]
    fn kron_identities() {
        let i2 = ComplexMatrix::identity(2);
        let k = kron(&i2, &i2);
        assert_eq!(k, ComplexMatrix::identity(4));

        let two = ComplexMatrix::from_rows(&[vec![c(2.0, 0.0)]]);
        let swap = ComplexMatrix::from_rows(&[
            vec![c(0.0, 0.0), c(1.0, 0.0)],
            vec![c(1.0, 0.0), c(0.0, 0.0)],
        ]);
        let k2 = kron(&two, &swap);
        assert_eq!(k2.get(0, 1), c(2.0, 0.0));
        assert_eq!(k2.get(1, 0), c(2.0, 0.0));
        assert_eq!(k2.get(0, 0), c(0.0, 0.0));
    }

    #[test]
    fn vec_of_product_matches_kron_form() {
        // vec(A B C) = (Cᵀ ⊗ A) vec(B) on random-ish 3x3 inputs
        let a = ComplexMatrix::from_fn(3, 3, |r, c_| c(1.0 + r as f64 * 0.37, c_ as f64 * 0.91));
        let b = ComplexMatrix::from_fn(3, 3, |r, c_| {
            c(r as f64 - c_ as f64, 0.13 * (r + c_) as f64)
        });
        let cm = ComplexMatrix::from_fn(3, 3, |r, c_| c(0.5 * c_ as f64, 1.0 - 0.2 * r as f64));

        let lhs = a.matmul(&b).matmul(&cm).vectorize();
        let rhs = kron(&cm.transpose(), &a).matvec(&b.vectorize());
        let err: f64 = lhs.iter().zip(&rhs).map(|(x, y)| (x - y).norm()).sum();
        let scale: f64 = lhs.iter().map(|x| x.norm()).sum();
        assert!(err <= 1e-12 * scale.max(1.0), "err={err}");
    }

    #[test]
    fn adjoint_and_matmul() {
        let m = ComplexMatrix::from_rows(&[vec![c(1.0, 2.0), c(3.0, -1.0)]]);
        let a = m.adjoint();
        assert_eq!(a.rows(), 2);
        assert_eq!(a.get(0, 0), c(1.0, -2.0));
        let p = m.matmul(&a);
        assert!((p.get(0, 0).re - (5.0 + 10.0)).abs() < 1e-14);
        assert!(p.get(0, 0).im.abs() < 1e-14);
    }
}

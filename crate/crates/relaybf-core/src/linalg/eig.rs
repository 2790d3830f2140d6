//! Hermitian eigendecomposition.
//!
//! Householder reduction to tridiagonal form, followed by a diagonal phase
//! scaling that makes the off-diagonal real, followed by the implicit-shift
//! QL iteration (tql2 lineage) with eigenvector accumulation. Iteration is
//! capped at 30 sweeps per eigenvalue.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::matrix::ComplexMatrix;

const MAX_SWEEPS: usize = 30;

/// Decomposes a Hermitian `m` into `(eigenvalues, eigenvectors)` with
/// eigenvalues sorted descending and eigenvectors as orthonormal columns.
pub(crate) fn hermitian_eig(m: &ComplexMatrix) -> Result<(Vec<f64>, ComplexMatrix)> {
    let n = m.rows();
    assert_eq!(n, m.cols());
    assert!(n >= 1, "dim >= 1 required");

    if n == 1 {
        let mut v = ComplexMatrix::zeros(1, 1);
        v.set(0, 0, Complex64::ONE);
        return Ok((vec![m.get(0, 0).re], v));
    }

    let mut a = m.clone();
    let mut q = ComplexMatrix::identity(n);
    householder_tridiagonalize(&mut a, &mut q);

    // Real tridiagonal (d, e) and the phase scaling that realifies e.
    let mut d: Vec<f64> = (0..n).map(|i| a.get(i, i).re).collect();
    let mut e = vec![0.0f64; n];
    let mut phase = vec![Complex64::ONE; n];
    for i in 0..n - 1 {
        let sub = a.get(i + 1, i);
        let mag = sub.norm();
        e[i] = mag;
        phase[i + 1] = if mag > 0.0 {
            phase[i] * (sub / mag)
        } else {
            phase[i]
        };
    }
    for (i, ph) in phase.iter().enumerate() {
        let col: Vec<Complex64> = q.column(i).iter().map(|z| z * ph).collect();
        q.set_column(i, &col);
    }

    ql_implicit(&mut d, &mut e, &mut q)?;

    // Sort descending, permuting eigenvector columns along.
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| d[j].partial_cmp(&d[i]).expect("finite eigenvalues"));
    let vals: Vec<f64> = order.iter().map(|&i| d[i]).collect();
    let mut vecs = ComplexMatrix::zeros(n, n);
    for (dst, &src) in order.iter().enumerate() {
        vecs.set_column(dst, q.column(src));
    }
    Ok((vals, vecs))
}

fn householder_tridiagonalize(a: &mut ComplexMatrix, q: &mut ComplexMatrix) {
    let n = a.rows();
    for k in 0..n.saturating_sub(2) {
        let nk = n - k - 1;
        let mut x = vec![Complex64::ZERO; nk];
        for i in 0..nk {
            x[i] = a.get(k + 1 + i, k);
        }
        let xnorm = x.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if xnorm == 0.0 {
            continue;
        }
        let ph = if x[0] == Complex64::ZERO {
            Complex64::ONE
        } else {
            x[0] / x[0].norm()
        };
        let alpha = -ph * xnorm;
        let mut v = x;
        v[0] -= alpha;
        let vnorm2: f64 = v.iter().map(|z| z.norm_sqr()).sum();
        if vnorm2 <= f64::MIN_POSITIVE {
            continue;
        }
        let tau = 2.0 / vnorm2;

        // Rank-two update of the trailing block: S <- S - v w^H - w v^H
        // with p = tau S v and w = p - (tau/2)(v^H p) v.
        let mut p = vec![Complex64::ZERO; nk];
        for c in 0..nk {
            let vc = v[c];
            if vc == Complex64::ZERO {
                continue;
            }
            for r in 0..nk {
                p[r] += a.get(k + 1 + r, k + 1 + c) * vc;
            }
        }
        for pi in p.iter_mut() {
            *pi *= tau;
        }
        let vhp: Complex64 = v.iter().zip(&p).map(|(vi, pi)| vi.conj() * pi).sum();
        let kappa = vhp * (tau / 2.0);
        let w: Vec<Complex64> = p.iter().zip(&v).map(|(pi, vi)| pi - kappa * vi).collect();
        for c in 0..nk {
            for r in 0..nk {
                let upd = v[r] * w[c].conj() + w[r] * v[c].conj();
                let cur = a.get(k + 1 + r, k + 1 + c);
                a.set(k + 1 + r, k + 1 + c, cur - upd);
            }
        }

        a.set(k + 1, k, alpha);
        a.set(k, k + 1, alpha.conj());
        for i in 1..nk {
            a.set(k + 1 + i, k, Complex64::ZERO);
            a.set(k, k + 1 + i, Complex64::ZERO);
        }

        // Q <- Q (I - tau v v^H) restricted to columns k+1..n.
        let mut t = vec![Complex64::ZERO; n];
        for j in 0..nk {
            let vj = v[j];
            if vj == Complex64::ZERO {
                continue;
            }
            let col = q.column(k + 1 + j);
            for r in 0..n {
                t[r] += col[r] * vj;
            }
        }
        for j in 0..nk {
            let f = v[j].conj() * tau;
            let base = k + 1 + j;
            let col: Vec<Complex64> = q
                .column(base)
                .iter()
                .zip(&t)
                .map(|(qc, tc)| qc - tc * f)
                .collect();
            q.set_column(base, &col);
        }
    }
}

/// Implicit-shift QL on a real symmetric tridiagonal `(d, e)`, rotating the
/// complex columns of `v` along. `e[i]` couples entries `i` and `i+1`.
fn ql_implicit(d: &mut [f64], e: &mut [f64], v: &mut ComplexMatrix) -> Result<()> {
    let n = d.len();
    let eps = f64::EPSILON;
    let mut f = 0.0f64;
    let mut tst1 = 0.0f64;
    e[n - 1] = 0.0;

    for l in 0..n {
        tst1 = tst1.max(d[l].abs() + e[l].abs());
        let mut m = l;
        while m < n {
            if e[m].abs() <= eps * tst1 {
                break;
            }
            m += 1;
        }
        if m > l {
            let mut sweeps = 0;
            loop {
                sweeps += 1;
                if sweeps > MAX_SWEEPS {
                    return Err(Error::EigDidNotConverge {
                        dim: n,
                        iterations: MAX_SWEEPS * n,
                    });
                }

                // Wilkinson-style shift.
                let g = d[l];
                let mut p = (d[l + 1] - g) / (2.0 * e[l]);
                let mut r = p.hypot(1.0);
                if p < 0.0 {
                    r = -r;
                }
                d[l] = e[l] / (p + r);
                d[l + 1] = e[l] * (p + r);
                let dl1 = d[l + 1];
                let mut h = g - d[l];
                for item in d.iter_mut().take(n).skip(l + 2) {
                    *item -= h;
                }
                f += h;

                // Implicit QL sweep.
                p = d[m];
                let mut c = 1.0f64;
                let mut c2 = c;
                let mut c3 = c;
                let el1 = e[l + 1];
                let mut s = 0.0f64;
                let mut s2 = 0.0f64;
                for i in (l..m).rev() {
                    c3 = c2;
                    c2 = c;
                    s2 = s;
                    let gg = c * e[i];
                    h = c * p;
                    r = p.hypot(e[i]);
                    e[i + 1] = s * r;
                    s = e[i] / r;
                    c = p / r;
                    p = c * d[i] - s * gg;
                    d[i + 1] = h + s * (c * gg + s * d[i]);

                    for k in 0..v.rows() {
                        let hk = v.get(k, i + 1);
                        let vk = v.get(k, i);
                        v.set(k, i + 1, vk * s + hk * c);
                        v.set(k, i, vk * c - hk * s);
                    }
                }
                p = -s * s2 * c3 * el1 * e[l] / dl1;
                e[l] = s * p;
                d[l] = c * p;

                if e[l].abs() <= eps * tst1 {
                    break;
                }
            }
        }
        d[l] += f;
        e[l] = 0.0;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::hermitian::HermitianMatrix;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn random_hermitian(n: usize, seed: u64) -> HermitianMatrix {
        let mut state = seed.wrapping_mul(0x9E3779B97F4A7C15) | 1;
        let mut next = move || {
            state ^= state << 13;
            state ^= state >> 7;
            state ^= state << 17;
            (state >> 11) as f64 / (1u64 << 53) as f64 - 0.5
        };
        let m = ComplexMatrix::from_fn(n, n, |_, _| c(next(), next()));
        HermitianMatrix::new(&m)
    }

    fn reconstruction_residual(h: &HermitianMatrix) -> f64 {
        let (vals, vecs) = h.eig().unwrap();
        let back = HermitianMatrix::from_eig(&vals, &vecs);
        back.sub(h).frobenius_norm() / h.frobenius_norm().max(1e-300)
    }

    #[test]
    fn identity_has_unit_eigenvalues() {
        let (vals, _) = HermitianMatrix::identity(3).eig().unwrap();
        for v in vals {
            assert!((v - 1.0).abs() < 1e-14);
        }
    }

    #[test]
    fn diagonal_sorted_descending() {
        let (vals, vecs) = HermitianMatrix::diag_real(&[1.0, 2.0]).eig().unwrap();
        assert!((vals[0] - 2.0).abs() < 1e-14);
        assert!((vals[1] - 1.0).abs() < 1e-14);
        // Eigenvectors are the basis vectors, up to phase.
        assert!(vecs.get(1, 0).norm() > 0.99);
        assert!(vecs.get(0, 1).norm() > 0.99);
    }

    #[test]
    fn random_reconstruction_small() {
        for seed in 0..20 {
            let h = random_hermitian(4, seed + 1);
            let rel = reconstruction_residual(&h);
            assert!(rel <= 1e-10, "seed {seed}: rel={rel}");
        }
    }

    #[test]
    fn random_reconstruction_up_to_dim_64() {
        for &n in &[2usize, 3, 5, 8, 13, 16, 32, 64] {
            let h = random_hermitian(n, n as u64 * 31 + 7);
            let rel = reconstruction_residual(&h);
            assert!(rel <= 1e-10, "n={n}: rel={rel}");
        }
    }

    #[test]
    fn eigenvectors_orthonormal() {
        let h = random_hermitian(8, 99);
        let (_, vecs) = h.eig().unwrap();
        let gram = vecs.adjoint().matmul(&vecs);
        let res = gram.sub(&ComplexMatrix::identity(8)).frobenius_norm();
        assert!(res < 1e-10, "res={res}");
    }

    #[test]
    fn eigenvalue_equation_holds() {
        let h = random_hermitian(6, 5);
        let (vals, vecs) = h.eig().unwrap();
        for k in 0..6 {
            let col = vecs.column(k).to_vec();
            let mv = h.matvec(&col);
            let err: f64 = mv
                .iter()
                .zip(&col)
                .map(|(a, b)| (a - b * vals[k]).norm())
                .sum();
            assert!(err < 1e-9, "k={k} err={err}");
        }
    }

    #[test]
    fn repeated_eigenvalues() {
        // 2I plus a rank-one bump.
        let v = [c(0.6, 0.0), c(0.0, 0.8)];
        let bump = HermitianMatrix::outer(&v);
        let m = HermitianMatrix::identity(2).scale(2.0).add(&bump);
        let (vals, _) = m.eig().unwrap();
        assert!((vals[0] - 3.0).abs() < 1e-12);
        assert!((vals[1] - 2.0).abs() < 1e-12);
    }
}

//! Rank-one recovery from SDP relaxation solutions: eigenvector extraction
//! and Gaussian randomized rounding.

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::linalg::{CVector, HermitianMatrix};
use crate::model::complex_gaussian_vector;

#[derive(Clone, Debug)]
pub struct RankOneExtraction {
    /// `√λ₁ · v₁`; satisfies `a aᴴ ≈ X` when accepted.
    pub vector: CVector,
    /// Whether `λ₂/λ₁ ≤ ratio_tol`.
    pub accepted: bool,
    /// The eigenvalue ratio `λ₂/λ₁`.
    pub ratio: f64,
}

/// Extracts the dominant scaled eigenvector of a PSD matrix and reports how
/// close `X` is to rank one.
pub fn extract_rank_one(x: &HermitianMatrix, ratio_tol: f64) -> Result<RankOneExtraction> {
    let (vals, vecs) = x.eig()?;
    let lam1 = vals[0];
    if !(lam1 > 0.0) {
        return Err(Error::ZeroMatrix);
    }
    let ratio = if vals.len() > 1 {
        (vals[1].max(0.0)) / lam1
    } else {
        0.0
    };
    let scale = lam1.sqrt();
    let vector = vecs.column(0).iter().map(|z| z * scale).collect();
    Ok(RankOneExtraction {
        vector,
        accepted: ratio <= ratio_tol,
        ratio,
    })
}

#[derive(Clone, Debug)]
pub struct RoundedCandidate {
    pub vector: CVector,
    pub objective: f64,
}

/// Gaussian randomized rounding: draws candidates `a ~ CN(0, X)` via
/// `X^{1/2}·ξ`, rescales each so every power constraint holds with the
/// binding one tight, and returns the candidate maximizing the caller's
/// objective. The scaled dominant eigenvector is always candidate 0, so the
/// result is never worse than plain extraction.
pub fn gaussian_rounding(
    x: &HermitianMatrix,
    power: &[(HermitianMatrix, f64)],
    objective: impl Fn(&[Complex64]) -> f64,
    samples: usize,
    seed: u64,
) -> Result<RoundedCandidate> {
    assert!(!power.is_empty(), "need at least one power constraint");
    let (vals, vecs) = x.eig()?;
    if !(vals[0] > 0.0) {
        return Err(Error::ZeroMatrix);
    }
    // Solver round-off can leave slightly negative eigenvalues; clip.
    let sqrt_vals: Vec<f64> = vals.iter().map(|&v| v.max(0.0).sqrt()).collect();
    let n = x.dim();

    let rescale = |a: &CVector| -> Option<CVector> {
        let mut factor = f64::INFINITY;
        for (form, budget) in power {
            let q = form.quad_form(a);
            if q > 0.0 {
                factor = factor.min((budget / q).sqrt());
            }
        }
        if !factor.is_finite() {
            return None;
        }
        Some(a.iter().map(|z| z * factor).collect())
    };

    let mut best: Option<RoundedCandidate> = None;
    let mut consider = |a: CVector| {
        // Feasibility recheck; a rescaled candidate cannot violate, but a
        // degenerate all-zero draw is skipped here.
        for (form, budget) in power {
            if form.quad_form(&a) > budget * (1.0 + 1e-9) {
                return;
            }
        }
        let value = objective(&a);
        if best.as_ref().map_or(true, |b| value > b.objective) {
            best = Some(RoundedCandidate {
                vector: a,
                objective: value,
            });
        }
    };

    let eigvec: CVector = vecs.column(0).iter().map(|z| z * sqrt_vals[0]).collect();
    if let Some(a) = rescale(&eigvec) {
        consider(a);
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..samples {
        let xi = complex_gaussian_vector(&mut rng, n);
        // a = V diag(sqrt_vals) xi  ~ CN(0, X)
        let mut a = vec![Complex64::ZERO; n];
        for (k, (&sv, xk)) in sqrt_vals.iter().zip(&xi).enumerate() {
            if sv == 0.0 {
                continue;
            }
            let coef = sv * xk;
            let col = vecs.column(k);
            for r in 0..n {
                a[r] += col[r] * coef;
            }
        }
        if let Some(a) = rescale(&a) {
            consider(a);
        }
    }

    best.ok_or(Error::ZeroMatrix)
}

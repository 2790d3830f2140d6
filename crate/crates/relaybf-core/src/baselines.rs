//! Simple comparison beamformers for the benchmark harness.
//!
//! These are deliberately lightweight stand-ins, not reconstructions of any
//! published scheme: each returns a power-feasible relay matrix with the
//! budget binding, which is all the dominance comparisons need.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::{ComplexMatrix, HermitianMatrix};
use crate::model::SystemInstance;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BaselineKind {
    /// The scaled identity used to seed the iterative solvers.
    ScaledIdentity,
    /// Best single receive/transmit antenna by min weighted SINR.
    AntennaSelection,
    /// Channel-inverting relay that nulls cross-pair interference;
    /// requires at least as many relay antennas as users.
    ZeroForcing,
    /// Regularized inversion with loading `N₀/p̄` on both Gram matrices.
    MmseRelay,
}

impl BaselineKind {
    pub const ALL: [BaselineKind; 4] = [
        BaselineKind::ScaledIdentity,
        BaselineKind::AntennaSelection,
        BaselineKind::ZeroForcing,
        BaselineKind::MmseRelay,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            BaselineKind::ScaledIdentity => "identity",
            BaselineKind::AntennaSelection => "antenna",
            BaselineKind::ZeroForcing => "zf",
            BaselineKind::MmseRelay => "mmse",
        }
    }
}

impl std::str::FromStr for BaselineKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "identity" => Ok(BaselineKind::ScaledIdentity),
            "antenna" => Ok(BaselineKind::AntennaSelection),
            "zf" => Ok(BaselineKind::ZeroForcing),
            "mmse" => Ok(BaselineKind::MmseRelay),
            other => Err(Error::Config(format!("unknown baseline scheme '{other}'"))),
        }
    }
}

/// Scales `a` so the relay power budget binds exactly.
fn scale_to_budget(inst: &SystemInstance, a: &ComplexMatrix) -> Result<ComplexMatrix> {
    let p = inst.relay_power_of_beamformer(a);
    if !(p > 0.0) {
        return Err(Error::Domain("baseline produced a zero beamformer".into()));
    }
    Ok(a.scale_re((inst.power_budget / p).sqrt()))
}

/// The stacked channel matrix `[h_1 … h_2K]` (`M × 2K`).
fn channel_matrix(inst: &SystemInstance) -> ComplexMatrix {
    let m = inst.antennas();
    let users = inst.users();
    ComplexMatrix::from_fn(m, users, |r, c| inst.channels[c][r])
}

/// The pair-swap permutation as a matrix.
fn pair_swap(users: usize) -> ComplexMatrix {
    let mut p = ComplexMatrix::zeros(users, users);
    for i in 0..users {
        p.set(i, i ^ 1, Complex64::ONE);
    }
    p
}

fn min_weighted_sinr(inst: &SystemInstance, a: &ComplexMatrix) -> f64 {
    inst.sinr_of_beamformer(a)
        .iter()
        .zip(&inst.sinr_targets)
        .map(|(s, g)| s / g)
        .fold(f64::INFINITY, f64::min)
}

/// Computes the baseline relay matrix; always power-feasible with the
/// budget binding.
pub fn baseline_beamformer(kind: BaselineKind, inst: &SystemInstance) -> Result<ComplexMatrix> {
    let m = inst.antennas();
    let users = inst.users();
    match kind {
        BaselineKind::ScaledIdentity => Ok(inst.scaled_identity()),
        BaselineKind::AntennaSelection => {
            let mut best: Option<(f64, ComplexMatrix)> = None;
            for ant in 0..m {
                let mut a = ComplexMatrix::zeros(m, m);
                a.set(ant, ant, Complex64::ONE);
                let a = scale_to_budget(inst, &a)?;
                let v = min_weighted_sinr(inst, &a);
                if best.as_ref().map_or(true, |(bv, _)| v > *bv) {
                    best = Some((v, a));
                }
            }
            Ok(best.expect("at least one antenna").1)
        }
        BaselineKind::ZeroForcing | BaselineKind::MmseRelay => {
            if m < users {
                return Err(Error::Config(format!(
                    "channel inversion needs at least {users} relay antennas, have {m}"
                )));
            }
            let h = channel_matrix(inst);
            let loading = match kind {
                BaselineKind::MmseRelay => {
                    let n0 = inst.relay_noise.trace() / m as f64;
                    let p_mean =
                        inst.user_powers.iter().sum::<f64>() / inst.user_powers.len() as f64;
                    n0 / p_mean
                }
                _ => 0.0,
            };
            // A ∝ H* (HᵀH* + δI)⁻¹ Π (HᴴH + δI)⁻¹ Hᴴ.
            let left_gram = HermitianMatrix::new(&h.transpose().matmul(&h.conj())).shift(loading);
            let right_gram = HermitianMatrix::new(&h.adjoint().matmul(&h)).shift(loading);
            let li = left_gram.cholesky().map_err(|_| Error::Singular)?.inverse();
            let ri = right_gram
                .cholesky()
                .map_err(|_| Error::Singular)?
                .inverse();
            let core = li
                .as_matrix()
                .matmul(&pair_swap(users))
                .matmul(ri.as_matrix());
            let a = h.conj().matmul(&core).matmul(&h.adjoint());
            scale_to_budget(inst, &a)
        }
    }
}

//! Dense semidefinite programming over Hermitian matrices.
//!
//! Problems have a single `n × n` Hermitian PSD variable `X`, an optional
//! free scalar `τ` entering the objective and constraints linearly (the
//! epigraph variable of max-min subproblems), and a list of linear trace
//! constraints with `≤ / ≥ / =` senses:
//!
//! ```text
//! min  tr(C·X) + c_τ·τ
//! s.t. tr(A_j·X) + g_j·τ  (sense_j)  b_j,   X ⪰ 0.
//! ```
//!
//! The solver is an infeasible-start primal-dual interior-point method in
//! complex arithmetic (HKM scaling, Mehrotra predictor-corrector).
//! Rank-one recovery utilities: [`extract_rank_one`], [`gaussian_rounding`].

mod ipm;
mod rounding;

pub use rounding::{extract_rank_one, gaussian_rounding, RankOneExtraction, RoundedCandidate};

use crate::linalg::HermitianMatrix;

/// Constraint sense.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Sense {
    Le,
    Ge,
    Eq,
}

/// One linear constraint `tr(A·X) + g·τ (sense) b`.
#[derive(Clone, Debug)]
pub struct SdpConstraint {
    pub matrix: HermitianMatrix,
    pub tau_coeff: f64,
    pub sense: Sense,
    pub rhs: f64,
}

/// A standard-form dense Hermitian SDP.
#[derive(Clone, Debug)]
pub struct SdpProblem {
    dim: usize,
    pub objective: HermitianMatrix,
    /// Objective coefficient of the free scalar; only meaningful with
    /// `has_tau`.
    pub tau_objective: f64,
    pub has_tau: bool,
    pub constraints: Vec<SdpConstraint>,
}

impl SdpProblem {
    /// Problem without the free scalar.
    pub fn new(objective: HermitianMatrix) -> Self {
        Self {
            dim: objective.dim(),
            objective,
            tau_objective: 0.0,
            has_tau: false,
            constraints: Vec::new(),
        }
    }

    /// Problem with the free epigraph scalar `τ` and objective
    /// `tr(C·X) + tau_objective·τ`.
    pub fn with_tau(objective: HermitianMatrix, tau_objective: f64) -> Self {
        Self {
            dim: objective.dim(),
            objective,
            tau_objective,
            has_tau: true,
            constraints: Vec::new(),
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn push(&mut self, matrix: HermitianMatrix, sense: Sense, rhs: f64) {
        assert_eq!(matrix.dim(), self.dim, "constraint dimension mismatch");
        self.constraints.push(SdpConstraint {
            matrix,
            tau_coeff: 0.0,
            sense,
            rhs,
        });
    }

    pub fn push_with_tau(
        &mut self,
        matrix: HermitianMatrix,
        tau_coeff: f64,
        sense: Sense,
        rhs: f64,
    ) {
        assert_eq!(matrix.dim(), self.dim, "constraint dimension mismatch");
        assert!(self.has_tau, "problem was built without a free scalar");
        self.constraints.push(SdpConstraint {
            matrix,
            tau_coeff,
            sense,
            rhs,
        });
    }

    /// Plain-text dump of `(C, A_j, b_j)` for cross-checking against
    /// external solvers. One matrix per block, entries as `re im` pairs in
    /// row-major order; senses spelled out.
    pub fn dump_text(&self) -> String {
        use std::fmt::Write;
        let mut s = String::new();
        let _ = writeln!(
            s,
            "sdp dim={} constraints={} tau={}",
            self.dim,
            self.constraints.len(),
            self.has_tau
        );
        let dump_mat = |s: &mut String, name: &str, m: &HermitianMatrix| {
            let _ = writeln!(s, "{name}");
            for r in 0..m.dim() {
                let row: Vec<String> = (0..m.dim())
                    .map(|c| {
                        let z = m.get(r, c);
                        format!("{:.17e} {:.17e}", z.re, z.im)
                    })
                    .collect();
                let _ = writeln!(s, "{}", row.join("  "));
            }
        };
        dump_mat(&mut s, "objective", &self.objective);
        if self.has_tau {
            let _ = writeln!(s, "tau_objective {:.17e}", self.tau_objective);
        }
        for (j, con) in self.constraints.iter().enumerate() {
            let sense = match con.sense {
                Sense::Le => "<=",
                Sense::Ge => ">=",
                Sense::Eq => "=",
            };
            let _ = writeln!(
                s,
                "constraint {j} sense {sense} rhs {:.17e} tau {:.17e}",
                con.rhs, con.tau_coeff
            );
            dump_mat(&mut s, "matrix", &con.matrix);
        }
        s
    }

    /// Solves with the interior-point method.
    pub fn solve(&self, options: &SdpOptions) -> SdpSolution {
        ipm::solve(self, options)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SdpStatus {
    Optimal,
    Infeasible,
    Unbounded,
    MaxIter,
}

#[derive(Clone, Debug)]
pub struct SdpOptions {
    /// Relative tolerance on duality gap and scaled residuals.
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for SdpOptions {
    fn default() -> Self {
        Self {
            tol: 1e-7,
            max_iter: 100,
        }
    }
}

impl SdpOptions {
    pub fn with_tol(tol: f64) -> Self {
        Self {
            tol,
            ..Self::default()
        }
    }
}

/// Solver output. `status` is always meaningful; `x`, `tau`, objectives and
/// duals describe the final (best) iterate even on non-optimal exits.
#[derive(Clone, Debug)]
pub struct SdpSolution {
    pub x: HermitianMatrix,
    pub tau: Option<f64>,
    /// Dual multiplier per constraint.
    pub dual: Vec<f64>,
    pub status: SdpStatus,
    pub primal_objective: f64,
    pub dual_objective: f64,
    /// Relative duality gap at exit.
    pub gap: f64,
    pub iterations: usize,
}

impl SdpSolution {
    /// Errs unless the solve reached `Optimal`.
    pub fn ensure_optimal(self, context: &str) -> crate::Result<SdpSolution> {
        if self.status == SdpStatus::Optimal {
            Ok(self)
        } else {
            Err(crate::Error::SdpFailed {
                status: self.status,
                iterations: self.iterations,
                context: context.to_string(),
            })
        }
    }
}

/// Convenience free function mirroring [`SdpProblem::solve`].
pub fn solve_sdp(problem: &SdpProblem, options: &SdpOptions) -> SdpSolution {
    problem.solve(options)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dump_text_carries_full_problem() {
        let mut p = SdpProblem::with_tau(HermitianMatrix::diag_real(&[1.0, 2.0]), -1.0);
        p.push_with_tau(HermitianMatrix::identity(2), -1.0, Sense::Ge, 0.5);
        p.push(HermitianMatrix::diag_real(&[1.0, 0.0]), Sense::Le, 3.0);
        let dump = p.dump_text();
        assert!(dump.starts_with("sdp dim=2 constraints=2 tau=true"));
        assert!(dump.contains("objective"));
        assert!(dump.contains("constraint 0 sense >= rhs"));
        assert!(dump.contains("constraint 1 sense <= rhs"));
        // Entries are re/im pairs with full precision.
        assert!(dump.contains("2.00000000000000000e0"));
    }
}

//! Max-min fractional programming over the lifted SDP variable.
//!
//! The central object is a max-min ratio problem
//!
//! ```text
//! max_{X ⪰ 0, power-feasible}  min_i  num_i(X) / (w_i · den_i(X))
//! ```
//!
//! solved by a Dinkelbach-type iteration: each step fixes the current ratio
//! `λ` and solves one parametric SDP `max τ s.t. num_i(X) − λ w_i den_i(X) ≥ τ`.
//! The iteration converges Q-superlinearly and every intermediate `λ` is a
//! lower bound, so the trace is strictly increasing.
//!
//! Two ratio modes cover the use sites: plain SINR balancing, and the
//! `1 + SINR` variant used by projection subproblems of the monotonic
//! optimizer. The same module houses single-SDP power minimization under
//! SINR targets and the two bisection equivalences tying the max-min and
//! power-minimization forms together.

use crate::error::{Error, Result};
use crate::linalg::{CVector, HermitianMatrix};
use crate::model::QuadraticForms;
use crate::sdp::{
    gaussian_rounding, RoundedCandidate, SdpOptions, SdpProblem, SdpSolution, SdpStatus, Sense,
};

/// How the per-user ratio is formed from the quadratic forms.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RatioMode {
    /// `SINR_i / w_i`, the classic balancing objective (weights are the
    /// SINR targets).
    Sinr,
    /// `(1 + SINR_i) / w_i`, the projection objective (weights are the ray
    /// coordinates).
    OnePlusSinr,
}

/// One relay power constraint `tr(form · X) ≤ budget`.
#[derive(Clone, Debug)]
pub struct PowerConstraint {
    pub form: HermitianMatrix,
    pub budget: f64,
}

/// A max-min ratio problem instance.
#[derive(Clone, Debug)]
pub struct MaxMinSpec {
    pub forms: QuadraticForms,
    /// Denominator weights, strictly positive: SINR targets `γ_i` in
    /// [`RatioMode::Sinr`], ray coordinates `z_i` in
    /// [`RatioMode::OnePlusSinr`].
    pub weights: Vec<f64>,
    pub mode: RatioMode,
    pub power: Vec<PowerConstraint>,
    /// Feasible starting point for the Dinkelbach iteration.
    pub initial_x: HermitianMatrix,
}

impl MaxMinSpec {
    /// SINR balancing under a single total power budget with the
    /// scaled-identity beamformer as the starting point.
    pub fn sinr_balancing(forms: QuadraticForms, targets: &[f64], budget: f64) -> Self {
        let initial_x = scaled_identity_lift(&forms, budget);
        Self {
            weights: targets.to_vec(),
            mode: RatioMode::Sinr,
            power: vec![PowerConstraint {
                form: forms.e0.clone(),
                budget,
            }],
            forms,
            initial_x,
        }
    }

    /// SINR balancing under an explicit power constraint list (collaborative
    /// and block-precoder problems).
    pub fn sinr_balancing_multi(
        forms: QuadraticForms,
        targets: &[f64],
        power: Vec<PowerConstraint>,
        initial_x: HermitianMatrix,
    ) -> Self {
        Self {
            weights: targets.to_vec(),
            mode: RatioMode::Sinr,
            power,
            forms,
            initial_x,
        }
    }

    /// Projection subproblem along the ray through `z` (see the monotonic
    /// optimizer), optionally warm-started from a feasible `X`.
    pub fn projection(
        forms: QuadraticForms,
        z: &[f64],
        power: Vec<PowerConstraint>,
        warm: Option<HermitianMatrix>,
    ) -> Self {
        let initial_x = warm.unwrap_or_else(|| feasible_identity_lift(&forms, &power));
        Self {
            weights: z.to_vec(),
            mode: RatioMode::OnePlusSinr,
            power,
            forms,
            initial_x,
        }
    }

    pub fn users(&self) -> usize {
        self.forms.users()
    }

    /// `(numerator, numerator offset)` of user `i` in the current mode.
    fn numerator(&self, i: usize) -> (HermitianMatrix, f64) {
        let u = &self.forms.users[i];
        match self.mode {
            RatioMode::Sinr => (u.e1.clone(), 0.0),
            RatioMode::OnePlusSinr => (u.e1.add(&u.e2), u.sigma2),
        }
    }

    /// Ratio of user `i` at `X`.
    pub fn ratio_of_x(&self, x: &HermitianMatrix, i: usize) -> f64 {
        let u = &self.forms.users[i];
        let den = u.e2.inner_product(x) + u.sigma2;
        let num = match self.mode {
            RatioMode::Sinr => u.e1.inner_product(x),
            RatioMode::OnePlusSinr => u.e1.inner_product(x) + den,
        };
        num / (self.weights[i] * den)
    }

    /// Ratio of user `i` at the rank-one point `a aᴴ`.
    pub fn ratio_of_vec(&self, a: &[num_complex::Complex64], i: usize) -> f64 {
        let u = &self.forms.users[i];
        let den = u.e2.quad_form(a) + u.sigma2;
        let num = match self.mode {
            RatioMode::Sinr => u.e1.quad_form(a),
            RatioMode::OnePlusSinr => u.e1.quad_form(a) + den,
        };
        num / (self.weights[i] * den)
    }

    pub fn min_ratio_of_x(&self, x: &HermitianMatrix) -> f64 {
        (0..self.users())
            .map(|i| self.ratio_of_x(x, i))
            .fold(f64::INFINITY, f64::min)
    }

    pub fn min_ratio_of_vec(&self, a: &[num_complex::Complex64]) -> f64 {
        (0..self.users())
            .map(|i| self.ratio_of_vec(a, i))
            .fold(f64::INFINITY, f64::min)
    }

    /// Largest weighted denominator at `x`. The parametric optimum `τ`
    /// divided by this bounds the next λ step, so the convergence test is
    /// relative to it.
    fn denominator_scale(&self, x: &HermitianMatrix) -> f64 {
        self.weights
            .iter()
            .zip(&self.forms.users)
            .map(|(w, u)| w * (u.e2.inner_product(x) + u.sigma2))
            .fold(0.0f64, f64::max)
    }
}

/// Rank-one lift of the scaled identity beamformer meeting `budget` with
/// equality; the Dinkelbach starting point for SINR balancing.
fn scaled_identity_lift(forms: &QuadraticForms, budget: f64) -> HermitianMatrix {
    let dim = forms.dim();
    let m = (dim as f64).sqrt().round() as usize;
    if m * m == dim {
        let eye = crate::linalg::ComplexMatrix::identity(m).vectorize();
        let q = forms.e0.quad_form(&eye);
        if q > 0.0 {
            return HermitianMatrix::outer(&eye).scale(budget / q);
        }
    }
    HermitianMatrix::identity(dim).scale(budget / forms.e0.trace().max(f64::MIN_POSITIVE))
}

/// A feasible multiple of the identity under all power constraints.
fn feasible_identity_lift(forms: &QuadraticForms, power: &[PowerConstraint]) -> HermitianMatrix {
    let dim = forms.dim();
    let scale = power
        .iter()
        .map(|p| p.budget / p.form.trace().max(f64::MIN_POSITIVE))
        .fold(f64::INFINITY, f64::min);
    HermitianMatrix::identity(dim).scale(scale)
}

/// Assembles the parametric epigraph SDP
/// `max τ s.t. tr((N_i − λ w_i D_i) X) ≥ τ + λ w_i d_i − n_i, power, X ⪰ 0`.
///
/// Constraint rows are scaled by a common factor so the solver sees O(1)
/// data at any SNR; the returned scale multiplies the solved `τ` back to
/// problem units.
pub fn parametric_sdp(spec: &MaxMinSpec, lambda: f64) -> (SdpProblem, f64) {
    let users = spec.users();
    let dim = spec.forms.dim();
    let mut rows = Vec::with_capacity(users);
    let mut row_scale = 0.0f64;
    for i in 0..users {
        let (num, num_off) = spec.numerator(i);
        let w = spec.weights[i];
        let den = &spec.forms.users[i].e2;
        let mat = num.sub(&den.scale(lambda * w));
        let rhs = lambda * w * spec.forms.users[i].sigma2 - num_off;
        row_scale = row_scale.max(mat.frobenius_norm()).max(rhs.abs());
        rows.push((mat, rhs));
    }
    let row_scale = row_scale.max(1e-300);

    let mut p = SdpProblem::with_tau(HermitianMatrix::zeros(dim), -1.0);
    for (mat, rhs) in rows {
        p.push_with_tau(mat.scale(1.0 / row_scale), -1.0, Sense::Ge, rhs / row_scale);
    }
    for pc in &spec.power {
        let s = pc.budget.abs().max(pc.form.frobenius_norm()).max(1e-300);
        p.push(pc.form.scale(1.0 / s), Sense::Le, pc.budget / s);
    }
    (p, row_scale)
}

#[derive(Clone, Debug)]
pub struct DinkelbachOptions {
    /// Relative stop tolerance on the parametric optimum.
    pub stop_tol: f64,
    pub max_iter: usize,
    pub sdp: SdpOptions,
}

impl Default for DinkelbachOptions {
    fn default() -> Self {
        Self {
            stop_tol: 1e-6,
            max_iter: 60,
            sdp: SdpOptions::default(),
        }
    }
}

impl DinkelbachOptions {
    pub fn with_stop_tol(stop_tol: f64) -> Self {
        Self {
            stop_tol,
            ..Self::default()
        }
    }
}

#[derive(Clone, Debug)]
pub struct DinkelbachResult {
    /// Achieved min ratio at `x` (the relaxation optimum within tolerance).
    pub lambda: f64,
    pub x: HermitianMatrix,
    pub iterations: usize,
    /// Strictly increasing sequence of parametric ratios.
    pub lambda_trace: Vec<f64>,
    /// Feasible rank-one candidate, when rounding was requested.
    pub rounded: Option<RoundedCandidate>,
}

impl DinkelbachResult {
    /// Attaches the Gaussian-rounded feasible candidate.
    pub fn with_rounding(mut self, spec: &MaxMinSpec, samples: usize, seed: u64) -> Result<Self> {
        self.rounded = Some(round_maxmin(spec, &self.x, samples, seed)?);
        Ok(self)
    }
}

/// Dinkelbach-type iteration for the max-min ratio relaxation.
///
/// Starts from `spec.initial_x`, alternates ratio evaluation and the
/// parametric SDP, and stops once the parametric optimum falls below
/// `stop_tol · (1 + λ) · max_i(w_i σ_i²)`, the numerical stand-in for the
/// exact `≤ 0` test.
pub fn dinkelbach_maxmin(
    spec: &MaxMinSpec,
    options: &DinkelbachOptions,
) -> Result<DinkelbachResult> {
    let mut x = spec.initial_x.clone();
    let mut trace = Vec::new();

    for iter in 1..=options.max_iter {
        let lambda = spec.min_ratio_of_x(&x);
        trace.push(lambda);

        let (problem, tau_scale) = parametric_sdp(spec, lambda);
        let sol = problem
            .solve(&options.sdp)
            .ensure_optimal(&format!("dinkelbach iteration {iter}"))?;
        let tau = sol.tau.expect("epigraph variable") * tau_scale;
        x = sol.x;

        let scale = spec.denominator_scale(&x).max(f64::MIN_POSITIVE);
        let lambda_next = spec.min_ratio_of_x(&x);
        let converged = tau <= options.stop_tol * (1.0 + lambda.abs()) * scale
            || (iter >= 2 && lambda_next - lambda <= options.stop_tol * (1.0 + lambda.abs()));
        if converged {
            return Ok(DinkelbachResult {
                lambda: lambda_next.max(lambda),
                x,
                iterations: iter,
                lambda_trace: trace,
                rounded: None,
            });
        }
    }
    Err(Error::Domain(format!(
        "dinkelbach did not converge in {} iterations",
        options.max_iter
    )))
}

/// Gaussian rounding of a relaxation solution against the problem's own
/// objective (min weighted ratio); the result is feasible for every power
/// constraint.
pub fn round_maxmin(
    spec: &MaxMinSpec,
    x: &HermitianMatrix,
    samples: usize,
    seed: u64,
) -> Result<RoundedCandidate> {
    let power: Vec<(HermitianMatrix, f64)> = spec
        .power
        .iter()
        .map(|p| (p.form.clone(), p.budget))
        .collect();
    gaussian_rounding(x, &power, |a| spec.min_ratio_of_vec(a), samples, seed)
}

/// Power minimization under SINR targets scaled by `lambda`:
/// `min tr(E₀X) s.t. SINR_i(X) ≥ λ γ_i`, one SDP.
///
/// A trace-normalized phase-I SDP decides feasibility first, so
/// unattainable targets surface as [`Error::InfeasibleTargets`] rather than
/// a diverging solve.
pub fn power_min(
    forms: &QuadraticForms,
    targets: &[f64],
    lambda: f64,
    options: &SdpOptions,
) -> Result<(f64, HermitianMatrix)> {
    assert_eq!(targets.len(), forms.users());
    let users = forms.users();
    let dim = forms.dim();

    let rows: Vec<(HermitianMatrix, f64)> = (0..users)
        .map(|i| {
            let u = &forms.users[i];
            let t = lambda * targets[i];
            (u.e1.sub(&u.e2.scale(t)), t * u.sigma2)
        })
        .collect();

    // Phase I: max τ s.t. tr(F̂_i X) ≥ τ, tr(X) = 1 with unit-normalized
    // F̂_i. Positive part of each constraint is scale-invariant, so the
    // targets are attainable at some power iff the optimum is positive.
    let mut phase1 = SdpProblem::with_tau(HermitianMatrix::zeros(dim), -1.0);
    for (mat, _) in &rows {
        let s = mat.frobenius_norm().max(1e-300);
        phase1.push_with_tau(mat.scale(1.0 / s), -1.0, Sense::Ge, 0.0);
    }
    phase1.push(HermitianMatrix::identity(dim), Sense::Eq, 1.0);
    // A sign test only; never needs tolerances beyond the solver's sweet
    // spot even when the caller wants a very accurate main solve.
    let phase1_options = SdpOptions {
        tol: options.tol.max(1e-8),
        ..options.clone()
    };
    let p1 = phase1
        .solve(&phase1_options)
        .ensure_optimal("power_min phase I")?;
    if p1.tau.expect("epigraph variable") <= 1e-9 {
        return Err(Error::InfeasibleTargets);
    }

    // Scale the variable by the phase-I feasible point so the main solve
    // sees an O(1) solution whatever the SNR: X = t·X' with t the smallest
    // multiple of the (unit-trace) phase-I point meeting all targets.
    let x_hat = p1.x;
    let t = rows
        .iter()
        .map(|(mat, rhs)| rhs / mat.inner_product(&x_hat).max(1e-300))
        .fold(0.0f64, f64::max)
        .max(1e-300);

    let obj_scale = forms.e0.frobenius_norm().max(1e-300);
    let mut main = SdpProblem::new(forms.e0.scale(1.0 / obj_scale));
    for (mat, rhs) in &rows {
        let s = mat.frobenius_norm().max((rhs / t).abs()).max(1e-300);
        main.push(mat.scale(1.0 / s), Sense::Ge, rhs / (t * s));
    }
    let sol = main.solve(options);
    match sol.status {
        SdpStatus::Optimal => {
            let x = sol.x.scale(t);
            Ok((forms.e0.inner_product(&x), x))
        }
        SdpStatus::Infeasible => Err(Error::InfeasibleTargets),
        _ => Err(Error::SdpFailed {
            status: sol.status,
            iterations: sol.iterations,
            context: "power_min".into(),
        }),
    }
}

/// Output of a bisection solve, with the solve count for convergence
/// comparisons.
#[derive(Clone, Debug)]
pub struct BisectionResult {
    pub value: f64,
    pub iterations: usize,
}

/// Upper bound on the max-min ratio from the generalized eigenvalue bound
/// `f_i(X) ≤ λ_max(E₀^{-1/2} E1_i E₀^{-1/2}) · tr(E₀X)`.
pub fn maxmin_upper_bound(forms: &QuadraticForms, targets: &[f64], budget: f64) -> Result<f64> {
    let e0_sqrt = forms.e0.psd_sqrt()?;
    let chol = e0_sqrt.shift(1e-12 * e0_sqrt.trace().max(1.0)).cholesky()?;
    let mut bound = f64::INFINITY;
    for (i, u) in forms.users.iter().enumerate() {
        let w = chol.whiten(&u.e1);
        let lam_max = w.eig()?.0[0].max(0.0);
        bound = bound.min(budget * lam_max / (targets[i] * u.sigma2));
    }
    Ok(bound)
}

/// Max-min SINR via bisection over `λ` on the monotone power curve
/// `P_R(λ)`, the alternative route to [`dinkelbach_maxmin`].
///
/// Each probe asks whether the minimum power at ratio `λ` fits the budget.
/// That predicate is evaluated through the equivalent, much better
/// conditioned parametric test `τ*(λ) ≥ 0` (the minimum power exceeds the
/// budget exactly when the budget-constrained parametric optimum goes
/// negative), so one probe is one SDP solve either way.
pub fn maxmin_via_powermin(
    forms: &QuadraticForms,
    targets: &[f64],
    budget: f64,
    bisect_tol: f64,
    options: &SdpOptions,
) -> Result<BisectionResult> {
    let spec = MaxMinSpec::sinr_balancing(forms.clone(), targets, budget);
    let mut lo = 0.0f64;
    let mut hi = maxmin_upper_bound(forms, targets, budget)?;
    if !hi.is_finite() || hi <= 0.0 {
        return Err(Error::BracketFailure(format!("bad upper bound {hi}")));
    }
    let mut iterations = 0;
    while hi - lo > bisect_tol * (1.0 + lo) {
        iterations += 1;
        if iterations > 200 {
            return Err(Error::BracketFailure("bisection stalled".into()));
        }
        let mid = 0.5 * (lo + hi);
        let (tau, _) = parametric_solve(&spec, mid, options)?;
        if tau >= 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(BisectionResult {
        value: 0.5 * (lo + hi),
        iterations,
    })
}

/// Minimum power for the given targets via bisection over the budget on the
/// monotone curve `λ̃(P)`, the alternative route to [`power_min`]: searches
/// for the budget whose balanced optimum is exactly 1.
pub fn powermin_via_maxmin(
    forms: &QuadraticForms,
    targets: &[f64],
    bisect_tol: f64,
    options: &DinkelbachOptions,
) -> Result<BisectionResult> {
    let lambda_at = |p: f64| -> Result<f64> {
        let spec = MaxMinSpec::sinr_balancing(forms.clone(), targets, p);
        Ok(dinkelbach_maxmin(&spec, options)?.lambda)
    };

    let mut hi = forms
        .users
        .iter()
        .map(|u| u.sigma2)
        .fold(0.0f64, f64::max)
        .max(1.0);
    let mut expansions = 0;
    while lambda_at(hi)? < 1.0 {
        hi *= 2.0;
        expansions += 1;
        if expansions > 60 {
            return Err(Error::BracketFailure(
                "targets appear unattainable at any power".into(),
            ));
        }
    }
    let mut lo = hi;
    while lambda_at(lo)? >= 1.0 {
        lo *= 0.5;
        expansions += 1;
        if lo < 1e-12 || expansions > 120 {
            break;
        }
    }

    let mut iterations = expansions;
    while hi - lo > bisect_tol * hi {
        iterations += 1;
        if iterations > 300 {
            return Err(Error::BracketFailure("bisection stalled".into()));
        }
        let mid = 0.5 * (lo + hi);
        if lambda_at(mid)? >= 1.0 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(BisectionResult {
        value: 0.5 * (lo + hi),
        iterations,
    })
}

/// Lifts a vector candidate back to a beamforming matrix when the
/// problem's lifted dimension is a vectorized `M × M` matrix.
pub fn devectorize_beamformer(a: &CVector) -> Result<crate::linalg::ComplexMatrix> {
    let m = (a.len() as f64).sqrt().round() as usize;
    crate::linalg::ComplexMatrix::unvectorize(a, m, m)
}

/// Parametric solve at a fixed `λ`, exposing `(τ*, solution)`; a single
/// step of the Dinkelbach iteration.
pub fn parametric_solve(
    spec: &MaxMinSpec,
    lambda: f64,
    options: &SdpOptions,
) -> Result<(f64, SdpSolution)> {
    let (problem, tau_scale) = parametric_sdp(spec, lambda);
    let sol = problem.solve(options).ensure_optimal("parametric solve")?;
    let tau = sol.tau.expect("epigraph variable") * tau_scale;
    Ok((tau, sol))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::SystemInstance;
    use num_complex::Complex64;

    fn scalar_instance() -> SystemInstance {
        SystemInstance::new(
            vec![vec![Complex64::ONE], vec![Complex64::ONE]],
            vec![1.0, 1.0],
            HermitianMatrix::identity(1),
            vec![1.0, 1.0],
            3.0,
            vec![1.0, 1.0],
        )
        .unwrap()
    }

    /// Grid-search oracle for the scalar instance: SINR(t) with t = |a|²,
    /// maximized over the feasible range t ∈ (0, P/(p₁+p₂+σ_R²)].
    fn scalar_oracle_lambda(budget: f64, gamma: f64) -> f64 {
        let t_max = budget / 3.0;
        let mut best = 0.0f64;
        let n = 20_000;
        for k in 1..=n {
            let t = t_max * k as f64 / n as f64;
            let sinr = t / (t + 1.0);
            best = best.max(sinr / gamma);
        }
        best
    }

    #[test]
    fn parametric_sdp_shape() {
        let inst = SystemInstance::with_snr(2, 2, 3.0, 5);
        let forms = inst.build_forms();
        let spec = MaxMinSpec::sinr_balancing(forms, &inst.sinr_targets, inst.power_budget);
        let (p, _) = parametric_sdp(&spec, 0.7);
        assert_eq!(p.constraints.len(), 4 + 1);
    }

    #[test]
    fn parametric_sdp_at_lambda_zero_uses_signal_forms() {
        let inst = SystemInstance::with_snr(1, 2, 0.0, 9);
        let forms = inst.build_forms();
        let e1 = forms.users[0].e1.clone();
        let spec = MaxMinSpec::sinr_balancing(forms, &inst.sinr_targets, inst.power_budget);
        let (p, scale) = parametric_sdp(&spec, 0.0);
        let rebuilt = p.constraints[0].matrix.scale(scale);
        assert!(rebuilt.sub(&e1).frobenius_norm() <= 1e-12 * e1.frobenius_norm());
        assert_eq!(p.constraints[0].rhs, 0.0);
    }

    #[test]
    fn scalar_dinkelbach_matches_grid_oracle() {
        let inst = scalar_instance();
        let spec =
            MaxMinSpec::sinr_balancing(inst.build_forms(), &inst.sinr_targets, inst.power_budget);
        let res = dinkelbach_maxmin(&spec, &DinkelbachOptions::default()).unwrap();
        // Oracle: optimum 0.5 at |a|² = 1 (frozen from the grid search).
        let oracle = scalar_oracle_lambda(3.0, 1.0);
        assert!((oracle - 0.5).abs() < 1e-4, "oracle sanity: {oracle}");
        assert!((res.lambda - 0.5).abs() <= 1e-6, "lambda={}", res.lambda);
        for w in res.lambda_trace.windows(2) {
            assert!(w[1] > w[0], "trace not increasing: {:?}", res.lambda_trace);
        }
    }

    #[test]
    fn scalar_power_min_inverts_the_maxmin() {
        let inst = scalar_instance();
        let forms = inst.build_forms();
        let (p, _) = power_min(&forms, &[0.5, 0.5], 1.0, &SdpOptions::with_tol(1e-9)).unwrap();
        assert!((p - 3.0).abs() <= 1e-4, "p={p}");
    }

    #[test]
    fn power_min_vanishes_with_targets() {
        let inst = scalar_instance();
        let forms = inst.build_forms();
        let (p, _) = power_min(&forms, &[1e-9, 1e-9], 1.0, &SdpOptions::default()).unwrap();
        assert!(p.abs() <= 1e-6, "p={p}");
    }

    #[test]
    fn power_min_detects_infeasible_targets() {
        // SINR_i < 1 for any beamformer in the scalar instance, so a target
        // of 2 is unattainable at any power.
        let inst = scalar_instance();
        let forms = inst.build_forms();
        let err = power_min(&forms, &[2.0, 2.0], 1.0, &SdpOptions::default()).unwrap_err();
        assert!(matches!(err, Error::InfeasibleTargets), "{err}");
    }

    #[test]
    fn bisection_route_agrees_on_scalar_case() {
        let inst = scalar_instance();
        let forms = inst.build_forms();
        let r =
            maxmin_via_powermin(&forms, &[1.0, 1.0], 3.0, 1e-5, &SdpOptions::default()).unwrap();
        assert!((r.value - 0.5).abs() <= 1e-3, "lambda={}", r.value);

        let r2 = powermin_via_maxmin(
            &forms,
            &[0.5, 0.5],
            1e-5,
            &DinkelbachOptions::with_stop_tol(1e-7),
        )
        .unwrap();
        assert!((r2.value - 3.0).abs() <= 1e-2, "power={}", r2.value);
    }

    #[test]
    fn budget_scaling_raises_lambda() {
        let inst = SystemInstance::with_snr(1, 2, 5.0, 3);
        let forms = inst.build_forms();
        let mut prev = -1.0;
        for mult in [1.0, 2.0, 4.0, 8.0] {
            let spec = MaxMinSpec::sinr_balancing(
                forms.clone(),
                &inst.sinr_targets,
                inst.power_budget * mult,
            );
            let res = dinkelbach_maxmin(&spec, &DinkelbachOptions::default()).unwrap();
            assert!(res.lambda > prev, "not increasing at x{mult}");
            prev = res.lambda;
        }
    }

    #[test]
    fn rank_one_certified_for_single_pair() {
        let inst = SystemInstance::with_snr(1, 2, 8.0, 11);
        let spec =
            MaxMinSpec::sinr_balancing(inst.build_forms(), &inst.sinr_targets, inst.power_budget);
        let res = dinkelbach_maxmin(&spec, &DinkelbachOptions::default()).unwrap();
        let ext = crate::sdp::extract_rank_one(&res.x, 1e-6).unwrap();
        assert!(ext.accepted, "ratio={}", ext.ratio);
        // The rounded candidate from a rank-one X achieves the relaxation value.
        let rounded = round_maxmin(&spec, &res.x, 50, 1).unwrap();
        assert!((rounded.objective - res.lambda).abs() <= 1e-6 * (1.0 + res.lambda));
    }

    #[test]
    fn relaxation_upper_bounds_rounded_value() {
        let inst = SystemInstance::with_snr(2, 3, 6.0, 17);
        let spec =
            MaxMinSpec::sinr_balancing(inst.build_forms(), &inst.sinr_targets, inst.power_budget);
        let res = dinkelbach_maxmin(&spec, &DinkelbachOptions::default()).unwrap();
        let rounded = round_maxmin(&spec, &res.x, 200, 3).unwrap();
        assert!(
            rounded.objective <= res.lambda * (1.0 + 1e-7),
            "rounded {} > relaxed {}",
            rounded.objective,
            res.lambda
        );
        let p = spec.forms.power_of_vec(&rounded.vector);
        assert!(p <= inst.power_budget * (1.0 + 1e-9));
    }
}

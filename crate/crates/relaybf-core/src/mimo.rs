//! Multi-pair MIMO relaying: users with multiple antennas, jointly
//! optimizing transmit precoders `u_i`, the relay matrix `A`, and receive
//! combiners `v_i` by alternating optimization.
//!
//! Each stage is solved with the others fixed and can always return the
//! incumbent, so the feasible min weighted SINR never decreases:
//!
//! 1. combiners: closed-form MMSE `v_i = R_i⁻¹ α_{i,π(i)}`, the SINR-optimal
//!    receive filter;
//! 2. relay matrix: with effective channels `h_j = H_j u_j` and
//!    `g_i = H_i* v_i`, the problem has the single-antenna max-min shape and
//!    reuses the Dinkelbach/SDP machinery over `vec(A)`;
//! 3. precoders: lifting each `u_i` to `X_i = u_i u_iᴴ` turns the stage into
//!    a max-min fractional program over the block-diagonal aggregate with
//!    per-block trace budgets `tr(X_i) ≤ p_i`.
//!
//! Rounded candidates that happen to land below the incumbent are
//! discarded, which is what makes the alternation monotone in practice
//! even when a relaxation step is not tight.

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::Result;
use crate::fractional::{
    dinkelbach_maxmin, round_maxmin, DinkelbachOptions, MaxMinSpec, PowerConstraint, RatioMode,
};
use crate::linalg::{dot_conj, norm2, norm2_sqr, CVector, ComplexMatrix, HermitianMatrix};
use crate::model::{
    build_forms_general, complex_gaussian_vector, generate_mimo_channels, partner_unchecked,
    QuadraticForms, UserForms,
};

/// A multi-pair MIMO TWR instance.
#[derive(Clone, Debug)]
pub struct MimoInstance {
    /// Uplink channel matrices `H_i`, each `M × M_i`.
    pub channels: Vec<ComplexMatrix>,
    /// Per-user transmit power budgets `p_i` (cap on `‖u_i‖²`).
    pub user_powers: Vec<f64>,
    /// Per-user receive noise covariances `Λ_i` (`M_i × M_i`, PD).
    pub user_noises: Vec<HermitianMatrix>,
    /// Relay noise covariance (`M × M`).
    pub relay_noise: HermitianMatrix,
    pub power_budget: f64,
    pub sinr_targets: Vec<f64>,
}

impl MimoInstance {
    /// Standard simulation instance: Rayleigh `H_i`, white unit noise,
    /// equal powers `p = 10^(snr/10)`, relay budget `p`.
    pub fn with_snr(
        pairs: usize,
        antennas: usize,
        user_antennas: &[usize],
        snr_db: f64,
        seed: u64,
    ) -> Self {
        let users = 2 * pairs;
        assert_eq!(user_antennas.len(), users);
        let p = 10f64.powf(snr_db / 10.0);
        Self {
            channels: generate_mimo_channels(seed, antennas, user_antennas),
            user_powers: vec![p; users],
            user_noises: user_antennas
                .iter()
                .map(|&mi| HermitianMatrix::identity(mi))
                .collect(),
            relay_noise: HermitianMatrix::identity(antennas),
            power_budget: p,
            sinr_targets: vec![1.0; users],
        }
    }

    pub fn users(&self) -> usize {
        self.channels.len()
    }

    pub fn relay_antennas(&self) -> usize {
        self.relay_noise.dim()
    }
}

/// Current transceiver configuration.
#[derive(Clone, Debug)]
pub struct BeamformingState {
    pub relay: ComplexMatrix,
    pub precoders: Vec<CVector>,
    pub combiners: Vec<CVector>,
}

impl BeamformingState {
    /// Relay transmit power with the current precoders.
    pub fn relay_power(&self, inst: &MimoInstance) -> f64 {
        let mut acc = 0.0;
        for (h, u) in inst.channels.iter().zip(&self.precoders) {
            acc += norm2_sqr(&self.relay.matvec(&h.matvec(u)));
        }
        let ah = self.relay.adjoint();
        for c in 0..self.relay.rows() {
            acc += inst.relay_noise.quad_form(ah.column(c));
        }
        acc
    }
}

/// Per-user SINR of the full state; a zero combiner yields SINR 0.
pub fn sinr_mimo(inst: &MimoInstance, state: &BeamformingState) -> Vec<f64> {
    let users = inst.users();
    (0..users)
        .map(|i| {
            let v = &state.combiners[i];
            if norm2_sqr(v) == 0.0 {
                return 0.0;
            }
            let j = partner_unchecked(i);
            // α_{i,l} = H_iᵀ A H_l u_l, combined with v_i.
            let left = inst.channels[i].transpose().matmul(&state.relay);
            let signal = combined_gain(inst, state, &left, i, j).norm_sqr();
            let mut den = inst.user_noises[i].quad_form(v);
            for l in 0..users {
                if l == i || l == j {
                    continue;
                }
                den += combined_gain(inst, state, &left, i, l).norm_sqr();
            }
            // Forwarded relay noise: ‖Λ_R^{1/2} Aᴴ H_i* v_i‖².
            let g = inst.channels[i].conj().matvec(v);
            den += inst
                .relay_noise
                .quad_form(&state.relay.adjoint().matvec(&g));
            signal / den
        })
        .collect()
}

/// `v_iᴴ H_iᵀ A H_l u_l`, with `H_iᵀ A` precomputed as `left`.
fn combined_gain(
    inst: &MimoInstance,
    state: &BeamformingState,
    left: &ComplexMatrix,
    i: usize,
    l: usize,
) -> Complex64 {
    let alpha = left.matmul(&inst.channels[l]).matvec(&state.precoders[l]);
    dot_conj(&state.combiners[i], &alpha)
}

/// Weighted min SINR `min_i SINR_i / γ_i`, the quantity the alternation is
/// monotone in.
pub fn min_weighted_sinr(inst: &MimoInstance, state: &BeamformingState) -> f64 {
    sinr_mimo(inst, state)
        .iter()
        .zip(&inst.sinr_targets)
        .map(|(s, g)| s / g)
        .fold(f64::INFINITY, f64::min)
}

/// MMSE receive combiners for fixed relay matrix and precoders:
/// `v_i = R_i⁻¹ α_{i,π(i)}` with `R_i` the receive covariance including all
/// interferers, forwarded relay noise, and `Λ_i`. Each user's SINR is
/// maximized by its own combiner, so no SINR decreases.
pub fn mmse_combiners(
    inst: &MimoInstance,
    relay: &ComplexMatrix,
    precoders: &[CVector],
) -> Result<Vec<CVector>> {
    let users = inst.users();
    let mut out = Vec::with_capacity(users);
    for i in 0..users {
        let left = inst.channels[i].transpose().matmul(relay);
        let mut r = inst.user_noises[i].clone();
        let mut alphas: Vec<CVector> = Vec::with_capacity(users);
        for l in 0..users {
            let alpha = left.matmul(&inst.channels[l]).matvec(&precoders[l]);
            alphas.push(alpha);
        }
        for (l, alpha) in alphas.iter().enumerate() {
            if l != i {
                r = r.add(&HermitianMatrix::outer(alpha));
            }
        }
        // H_iᵀ A Λ_R Aᴴ H_i* term.
        let am = left
            .matmul(inst.relay_noise.as_matrix())
            .matmul(&left.adjoint());
        r = r.add(&HermitianMatrix::new(&am));
        let chol = r.cholesky().map_err(|e| e.in_stage("combiner"))?;
        let v = chol.solve(&alphas[partner_unchecked(i)]);
        // SINR is invariant to combiner scale; unit norm keeps the effective
        // noise offsets of the downstream solvers well conditioned.
        let n = norm2(&v);
        if n > 0.0 {
            out.push(v.iter().map(|z| z / n).collect());
        } else {
            out.push(v);
        }
    }
    Ok(out)
}

/// The relay-matrix stage: max-min SINR over `A` with precoders and
/// combiners fixed. Returns the updated state (incumbent kept when the
/// rounded candidate is worse) and the relaxation value.
pub fn relay_subproblem(
    inst: &MimoInstance,
    state: &BeamformingState,
    options: &DinkelbachOptions,
    rounding_samples: usize,
    seed: u64,
) -> Result<(BeamformingState, f64)> {
    let users = inst.users();
    // Effective single-antenna channels: transmit h_l = H_l u_l, receive
    // r_i = H_i conj(v_i) (so that r_iᵀ A h_l = v_iᴴ H_iᵀ A H_l u_l).
    let transmit: Vec<CVector> = inst
        .channels
        .iter()
        .zip(&state.precoders)
        .map(|(h, u)| h.matvec(u))
        .collect();
    let receive: Vec<CVector> = inst
        .channels
        .iter()
        .zip(&state.combiners)
        .map(|(h, v)| h.matvec(&v.iter().map(|z| z.conj()).collect::<Vec<_>>()))
        .collect();
    let offsets: Vec<f64> = (0..users)
        .map(|i| inst.user_noises[i].quad_form(&state.combiners[i]))
        .collect();
    let forms = build_forms_general(
        &receive,
        &transmit,
        &vec![1.0; users],
        &inst.relay_noise,
        &offsets,
    );
    let spec = MaxMinSpec::sinr_balancing(forms, &inst.sinr_targets, inst.power_budget);
    let res = dinkelbach_maxmin(&spec, options).map_err(|e| e.in_stage("relay"))?;
    let rounded =
        round_maxmin(&spec, &res.x, rounding_samples, seed).map_err(|e| e.in_stage("relay"))?;

    let incumbent_value = min_weighted_sinr(inst, state);
    if rounded.objective <= incumbent_value {
        return Ok((state.clone(), res.lambda));
    }
    let m = inst.relay_antennas();
    let relay = ComplexMatrix::unvectorize(&rounded.vector, m, m)?;
    Ok((
        BeamformingState {
            relay,
            precoders: state.precoders.clone(),
            combiners: state.combiners.clone(),
        },
        res.lambda,
    ))
}

/// Builds the block-lifted forms of the precoder stage: coefficients
/// `β_{i,j} = H_jᴴ Aᴴ H_i* v_i` give `SINR_i` as a ratio of block traces,
/// and each block carries `tr(X_j) ≤ p_j`.
fn transmit_forms(
    inst: &MimoInstance,
    state: &BeamformingState,
) -> (QuadraticForms, Vec<PowerConstraint>, Vec<usize>) {
    let users = inst.users();
    let sizes: Vec<usize> = inst.channels.iter().map(|h| h.cols()).collect();
    let total: usize = sizes.iter().sum();
    let offsets: Vec<usize> = sizes
        .iter()
        .scan(0, |acc, &s| {
            let o = *acc;
            *acc += s;
            Some(o)
        })
        .collect();

    let embed = |block: &HermitianMatrix, j: usize| -> HermitianMatrix {
        let mut big = ComplexMatrix::zeros(total, total);
        for c in 0..sizes[j] {
            for r in 0..sizes[j] {
                big.set(offsets[j] + r, offsets[j] + c, block.get(r, c));
            }
        }
        HermitianMatrix::new(&big)
    };

    let mut user_forms = Vec::with_capacity(users);
    for i in 0..users {
        let pi = partner_unchecked(i);
        let gi = inst.channels[i].conj().matvec(&state.combiners[i]);
        let ahg = state.relay.adjoint().matvec(&gi);
        // β_{i,j} = H_jᴴ (Aᴴ g_i)
        let betas: Vec<CVector> = (0..users)
            .map(|j| inst.channels[j].adjoint().matvec(&ahg))
            .collect();
        let e1 = embed(&HermitianMatrix::outer(&betas[pi]), pi);
        let mut e2 = HermitianMatrix::zeros(total);
        for (j, beta) in betas.iter().enumerate() {
            if j == i || j == pi {
                continue;
            }
            e2 = e2.add(&embed(&HermitianMatrix::outer(beta), j));
        }
        let d_i =
            inst.relay_noise.quad_form(&ahg) + inst.user_noises[i].quad_form(&state.combiners[i]);
        user_forms.push(UserForms {
            e1,
            e2,
            sigma2: d_i,
        });
    }

    let power: Vec<PowerConstraint> = (0..users)
        .map(|j| {
            let mut diag = vec![0.0; total];
            for r in 0..sizes[j] {
                diag[offsets[j] + r] = 1.0;
            }
            PowerConstraint {
                form: HermitianMatrix::diag_real(&diag),
                budget: inst.user_powers[j],
            }
        })
        .collect();

    let e0_diag = vec![1.0; total];
    (
        QuadraticForms {
            e0: HermitianMatrix::diag_real(&e0_diag),
            users: user_forms,
        },
        power,
        offsets,
    )
}

/// The precoder stage: block-diagonal Dinkelbach over `X_i = u_i u_iᴴ`
/// with `tr(X_i) ≤ p_i`, recovered per block by eigenvector extraction and
/// joint Gaussian rounding. Returns the updated state (incumbent kept if
/// better) and the stage's relaxation value.
pub fn transmit_subproblem(
    inst: &MimoInstance,
    state: &BeamformingState,
    options: &DinkelbachOptions,
    rounding_samples: usize,
    seed: u64,
) -> Result<(BeamformingState, f64)> {
    let users = inst.users();
    let (forms, power, offsets) = transmit_forms(inst, state);
    let sizes: Vec<usize> = inst.channels.iter().map(|h| h.cols()).collect();
    let total: usize = sizes.iter().sum();

    // Incumbent lift: block-diagonal aggregate of u_i u_iᴴ.
    let mut init = ComplexMatrix::zeros(total, total);
    for (j, u) in state.precoders.iter().enumerate() {
        for c in 0..sizes[j] {
            for r in 0..sizes[j] {
                init.set(offsets[j] + r, offsets[j] + c, u[r] * u[c].conj());
            }
        }
    }
    let spec = MaxMinSpec {
        weights: inst.sinr_targets.clone(),
        mode: RatioMode::Sinr,
        power,
        forms,
        initial_x: HermitianMatrix::new(&init),
    };
    let res = dinkelbach_maxmin(&spec, options).map_err(|e| e.in_stage("transmit"))?;

    // Per-block recovery: eigenvector candidate plus joint Gaussian draws,
    // each block capped at (or scaled to) its own power budget.
    let extract_blocks = |x: &HermitianMatrix| -> Result<Vec<HermitianMatrix>> {
        (0..users)
            .map(|j| {
                let mut b = ComplexMatrix::zeros(sizes[j], sizes[j]);
                for c in 0..sizes[j] {
                    for r in 0..sizes[j] {
                        b.set(r, c, x.get(offsets[j] + r, offsets[j] + c));
                    }
                }
                Ok(HermitianMatrix::new(&b))
            })
            .collect()
    };
    let blocks = extract_blocks(&res.x)?;
    let decomps: Vec<(Vec<f64>, ComplexMatrix)> =
        blocks.iter().map(|b| b.eig()).collect::<Result<_>>()?;

    let assemble = |parts: &[CVector]| -> CVector {
        let mut a = vec![Complex64::ZERO; total];
        for (j, u) in parts.iter().enumerate() {
            a[offsets[j]..offsets[j] + sizes[j]].copy_from_slice(u);
        }
        a
    };
    let cap_block = |u: &CVector, j: usize, to_full: bool| -> CVector {
        let n = norm2(u);
        if n == 0.0 {
            return u.clone();
        }
        let target = inst.user_powers[j].sqrt();
        let s = if to_full {
            target / n
        } else {
            (target / n).min(1.0)
        };
        u.iter().map(|z| z * s).collect()
    };

    let mut best_value = f64::NEG_INFINITY;
    let mut best_parts: Option<Vec<CVector>> = None;
    let mut consider = |parts: Vec<CVector>, spec: &MaxMinSpec| {
        let a = assemble(&parts);
        let value = spec.min_ratio_of_vec(&a);
        if value > best_value {
            best_value = value;
            best_parts = Some(parts);
        }
    };

    // Candidate 0: per-block dominant eigenvectors at extracted scale.
    let eig_parts: Vec<CVector> = decomps
        .iter()
        .enumerate()
        .map(|(j, (vals, vecs))| {
            let s = vals[0].max(0.0).sqrt();
            let u: CVector = vecs.column(0).iter().map(|z| z * s).collect();
            cap_block(&u, j, false)
        })
        .collect();
    consider(eig_parts.clone(), &spec);
    consider(
        eig_parts
            .iter()
            .enumerate()
            .map(|(j, u)| cap_block(u, j, true))
            .collect(),
        &spec,
    );

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..rounding_samples {
        let parts: Vec<CVector> = decomps
            .iter()
            .enumerate()
            .map(|(j, (vals, vecs))| {
                let xi = complex_gaussian_vector(&mut rng, sizes[j]);
                let mut u = vec![Complex64::ZERO; sizes[j]];
                for (k, (&lam, xk)) in vals.iter().zip(&xi).enumerate() {
                    if lam <= 0.0 {
                        continue;
                    }
                    let coef = lam.sqrt() * xk;
                    let col = vecs.column(k);
                    for r in 0..sizes[j] {
                        u[r] += col[r] * coef;
                    }
                }
                cap_block(&u, j, false)
            })
            .collect();
        let full: Vec<CVector> = parts
            .iter()
            .enumerate()
            .map(|(j, u)| cap_block(u, j, true))
            .collect();
        consider(parts, &spec);
        consider(full, &spec);
    }

    let incumbent_value = min_weighted_sinr(inst, state);
    let parts = best_parts.expect("at least the eigenvector candidate");
    if best_value <= incumbent_value {
        return Ok((state.clone(), res.lambda));
    }
    Ok((
        BeamformingState {
            relay: state.relay.clone(),
            precoders: parts,
            combiners: state.combiners.clone(),
        },
        res.lambda,
    ))
}

#[doc(hidden)]
pub fn debug_transmit_forms(
    inst: &MimoInstance,
    state: &BeamformingState,
) -> (QuadraticForms, Vec<(HermitianMatrix, f64)>) {
    let (forms, power, _) = transmit_forms(inst, state);
    (
        forms,
        power.into_iter().map(|p| (p.form, p.budget)).collect(),
    )
}

#[derive(Clone, Debug)]
pub struct AlternatingOptions {
    /// Stop once the outer objective moves less than this.
    pub epsilon: f64,
    pub max_outer: usize,
    pub dinkelbach: DinkelbachOptions,
    pub rounding_samples: usize,
    pub seed: u64,
}

impl Default for AlternatingOptions {
    fn default() -> Self {
        Self {
            epsilon: 1e-3,
            max_outer: 30,
            dinkelbach: DinkelbachOptions::with_stop_tol(1e-5),
            rounding_samples: 100,
            seed: 0,
        }
    }
}

#[derive(Clone, Debug)]
pub struct AlternatingResult {
    pub state: BeamformingState,
    /// Feasible min weighted SINR after each outer iteration; nondecreasing.
    pub lambda_trace: Vec<f64>,
    pub outer_iterations: usize,
    pub converged: bool,
}

/// Initial state: strongest-direction precoders at full power, a
/// budget-tight scaled-identity relay, MMSE combiners.
pub fn initial_state(inst: &MimoInstance) -> Result<BeamformingState> {
    let users = inst.users();
    let mut precoders = Vec::with_capacity(users);
    for i in 0..users {
        let h = &inst.channels[i];
        let gram = HermitianMatrix::new(&h.adjoint().matmul(h));
        let (_, vecs) = gram.eig()?;
        let p = inst.user_powers[i].sqrt();
        precoders.push(vecs.column(0).iter().map(|z| z * p).collect::<CVector>());
    }
    let mut denom = inst.relay_noise.trace();
    for (h, u) in inst.channels.iter().zip(&precoders) {
        denom += norm2_sqr(&h.matvec(u));
    }
    let m = inst.relay_antennas();
    let relay = ComplexMatrix::identity(m).scale_re((inst.power_budget / denom).sqrt());
    let combiners = mmse_combiners(inst, &relay, &precoders)?;
    Ok(BeamformingState {
        relay,
        precoders,
        combiners,
    })
}

/// Alternating optimization: combiners, relay matrix, precoders, until the
/// feasible objective stalls within `epsilon` or the iteration cap.
pub fn alternate(inst: &MimoInstance, options: &AlternatingOptions) -> Result<AlternatingResult> {
    let mut state = initial_state(inst)?;
    let mut trace = Vec::new();
    let mut prev = min_weighted_sinr(inst, &state);
    let mut converged = false;
    let mut outer = 0;

    while outer < options.max_outer {
        outer += 1;

        let combiners = mmse_combiners(inst, &state.relay, &state.precoders)?;
        let candidate = BeamformingState {
            combiners,
            ..state.clone()
        };
        if min_weighted_sinr(inst, &candidate) >= min_weighted_sinr(inst, &state) {
            state = candidate;
        }

        let (next, _) = relay_subproblem(
            inst,
            &state,
            &options.dinkelbach,
            options.rounding_samples,
            options.seed ^ (outer as u64) << 1,
        )?;
        state = next;

        let (next, _) = transmit_subproblem(
            inst,
            &state,
            &options.dinkelbach,
            options.rounding_samples,
            options.seed ^ ((outer as u64) << 1 | 1),
        )?;
        state = next;

        let lambda = min_weighted_sinr(inst, &state);
        trace.push(lambda);
        if (lambda - prev).abs() < options.epsilon {
            converged = true;
            break;
        }
        prev = lambda;
    }

    Ok(AlternatingResult {
        state,
        lambda_trace: trace,
        outer_iterations: outer,
        converged,
    })
}

//! Collaborative relaying: `M` single-antenna relays applying complex
//! gains `ã_m` to their own received signal, so the joint beamformer is
//! the diagonal matrix `diag(ã)`.
//!
//! Diagonality shrinks the lifted variable from `M² × M²` to `M × M`
//! (`X = ã ãᴴ`): the bilinear coupling `h_iᵀ diag(ã) h_j` collapses to
//! `(h_i ⊙ h_j)ᵀ ã`. Each relay carries its own power constraint
//! `tr(E_{0,m} X) ≤ P̌_m` with `E_{0,m} = c_m e_m e_mᵀ`, where
//! `c_m = Σ_i p_i |h_{i,m}|² + σ²_{R_m}` is the per-relay forwarded power
//! per unit gain; a total-budget mode with the single constraint
//! `Σ_m c_m |ã_m|² ≤ P̌` is also provided for comparisons.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::fractional::{
    dinkelbach_maxmin, DinkelbachOptions, DinkelbachResult, MaxMinSpec, PowerConstraint, RatioMode,
};
use crate::linalg::{hadamard, norm2_sqr, CVector, ComplexMatrix, HermitianMatrix};
use crate::model::{partner_unchecked, QuadraticForms, SystemInstance, UserForms};
use crate::monotonic::TwrRegion;

/// Per-relay power constraints or one shared budget.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PowerMode {
    /// `M` constraints `p_{R_m}(ã) ≤ P̌_m`.
    Individual,
    /// One constraint `Σ_m p_{R_m}(ã) ≤ Σ_m P̌_m`.
    Total,
}

/// A collaborative TWR instance.
#[derive(Clone, Debug)]
pub struct CollabInstance {
    /// `h_i`, length `M`: entry `m` is the channel from user `i` to relay `m`.
    pub channels: Vec<CVector>,
    pub user_powers: Vec<f64>,
    /// Noise variance at each relay.
    pub relay_noises: Vec<f64>,
    pub user_noise: Vec<f64>,
    /// Per-relay power budgets.
    pub budgets: Vec<f64>,
    pub sinr_targets: Vec<f64>,
}

impl CollabInstance {
    /// Standard simulation instance mirroring
    /// [`SystemInstance::with_snr`], with the total relay power `p` split
    /// evenly over the `relays` individual budgets.
    pub fn with_snr(pairs: usize, relays: usize, snr_db: f64, seed: u64) -> Self {
        let users = 2 * pairs;
        let p = 10f64.powf(snr_db / 10.0);
        Self {
            channels: crate::model::generate_channels(seed, pairs, relays),
            user_powers: vec![p; users],
            relay_noises: vec![1.0; relays],
            user_noise: vec![1.0; users],
            budgets: vec![p / relays as f64; relays],
            sinr_targets: vec![1.0; users],
        }
    }

    pub fn users(&self) -> usize {
        self.channels.len()
    }

    pub fn relays(&self) -> usize {
        self.relay_noises.len()
    }

    /// Forwarded power of relay `m` per unit gain magnitude squared.
    pub fn power_factor(&self, m: usize) -> f64 {
        self.channels
            .iter()
            .zip(&self.user_powers)
            .map(|(h, &p)| p * h[m].norm_sqr())
            .sum::<f64>()
            + self.relay_noises[m]
    }

    /// The equivalent single-relay view: `Λ_R = diag(σ²_{R_m})` and the
    /// summed budget. SINRs of `diag(ã)` evaluated through this instance
    /// are the ground truth for the lifted forms.
    pub fn as_system_instance(&self) -> Result<SystemInstance> {
        SystemInstance::new(
            self.channels.clone(),
            self.user_powers.clone(),
            HermitianMatrix::diag_real(&self.relay_noises),
            self.user_noise.clone(),
            self.budgets.iter().sum(),
            self.sinr_targets.clone(),
        )
    }

    /// Gains at which every relay transmits at its full individual budget.
    pub fn full_power_gains(&self) -> CVector {
        (0..self.relays())
            .map(|m| Complex64::new((self.budgets[m] / self.power_factor(m)).sqrt(), 0.0))
            .collect()
    }
}

pub fn diag_beamformer(gains: &[Complex64]) -> ComplexMatrix {
    let m = gains.len();
    let mut a = ComplexMatrix::zeros(m, m);
    for (i, &g) in gains.iter().enumerate() {
        a.set(i, i, g);
    }
    a
}

/// Builds the `M`-dimensional lifted forms plus the per-relay power
/// constraint list.
pub fn build_collab_forms(inst: &CollabInstance) -> (QuadraticForms, Vec<PowerConstraint>) {
    let users = inst.users();
    let relays = inst.relays();

    let factors: Vec<f64> = (0..relays).map(|m| inst.power_factor(m)).collect();
    let e0 = HermitianMatrix::diag_real(&factors);
    let power = (0..relays)
        .map(|m| {
            let mut d = vec![0.0; relays];
            d[m] = factors[m];
            PowerConstraint {
                form: HermitianMatrix::diag_real(&d),
                budget: inst.budgets[m],
            }
        })
        .collect();

    let user_forms = (0..users)
        .map(|i| {
            let j = partner_unchecked(i);
            let q_signal = hadamard(&inst.channels[i], &inst.channels[j]);
            let e1 = HermitianMatrix::outer_conj(&q_signal).scale(inst.user_powers[j]);

            // Forwarded relay noise: Σ_m σ²_{R_m} |h_{i,m}|² |ã_m|².
            let noise_diag: Vec<f64> = (0..relays)
                .map(|m| inst.relay_noises[m] * inst.channels[i][m].norm_sqr())
                .collect();
            let mut e2 = HermitianMatrix::diag_real(&noise_diag);
            for l in 0..users {
                if l == i || l == j {
                    continue;
                }
                let q = hadamard(&inst.channels[i], &inst.channels[l]);
                e2 = e2.add(&HermitianMatrix::outer_conj(&q).scale(inst.user_powers[l]));
            }
            UserForms {
                e1,
                e2,
                sigma2: inst.user_noise[i],
            }
        })
        .collect();

    (
        QuadraticForms {
            e0,
            users: user_forms,
        },
        power,
    )
}

/// Power constraints in the requested mode.
fn power_constraints(inst: &CollabInstance, mode: PowerMode) -> Vec<PowerConstraint> {
    let (forms, individual) = build_collab_forms(inst);
    match mode {
        PowerMode::Individual => individual,
        PowerMode::Total => vec![PowerConstraint {
            form: forms.e0,
            budget: inst.budgets.iter().sum(),
        }],
    }
}

/// Max-min SINR spec over the diagonal lift.
pub fn collab_spec(inst: &CollabInstance, mode: PowerMode) -> MaxMinSpec {
    let (forms, _) = build_collab_forms(inst);
    let power = power_constraints(inst, mode);
    // Start from every relay at full power (scaled down for the total mode
    // only through the constraint itself, which full_power_gains satisfies
    // with equality in aggregate).
    let initial_x = HermitianMatrix::outer(&inst.full_power_gains());
    MaxMinSpec {
        weights: inst.sinr_targets.clone(),
        mode: RatioMode::Sinr,
        power,
        forms,
        initial_x,
    }
}

/// Dinkelbach max-min SINR for collaborative relaying.
pub fn collab_maxmin(
    inst: &CollabInstance,
    mode: PowerMode,
    options: &DinkelbachOptions,
) -> Result<DinkelbachResult> {
    dinkelbach_maxmin(&collab_spec(inst, mode), options)
}

/// The collaborative achievable region for utility maximization.
///
/// The box bound adapts the Cauchy–Schwarz argument to the ⊙-channels:
/// `|(h_i ⊙ h_j)ᵀ ã|² ≤ ‖h_i ⊙ h_j‖² · ‖ã‖²` and the power constraints cap
/// `‖ã‖²` by `Σ_m P̌_m / c_m` (individual) or `P̌ / min_m c_m` (total), so
/// `d_i = 1 + p_π(i) · ‖h_i ⊙ h_π(i)‖² · S / σ_i²` with `S` that cap.
pub fn collab_region(
    inst: &CollabInstance,
    mode: PowerMode,
    dinkelbach: DinkelbachOptions,
) -> Result<TwrRegion> {
    let (forms, _) = build_collab_forms(inst);
    let power = power_constraints(inst, mode);
    let gain_cap = match mode {
        PowerMode::Individual => (0..inst.relays())
            .map(|m| inst.budgets[m] / inst.power_factor(m))
            .sum::<f64>(),
        PowerMode::Total => {
            let min_factor = (0..inst.relays())
                .map(|m| inst.power_factor(m))
                .fold(f64::INFINITY, f64::min);
            inst.budgets.iter().sum::<f64>() / min_factor
        }
    };
    let users = inst.users();
    let total_budget: f64 = inst.budgets.iter().sum();
    let initial: Vec<f64> = (0..users)
        .map(|i| {
            let j = partner_unchecked(i);
            let q = hadamard(&inst.channels[i], &inst.channels[j]);
            let through_gains = inst.user_powers[j] * norm2_sqr(&q) * gain_cap;
            // Forwarded-signal-power route: the partner's signal component
            // through the relays is capped by the summed budgets.
            let through_signal = total_budget * norm2_sqr(&inst.channels[i]);
            1.0 + through_gains.min(through_signal) / inst.user_noise[i]
        })
        .collect();
    if initial.iter().any(|d| !d.is_finite()) {
        return Err(Error::Domain("collaborative box bound overflowed".into()));
    }
    Ok(TwrRegion::from_parts(forms, power, initial, dinkelbach))
}

/// Utility maximization over the collaborative region: polyblock outer
/// approximation with the diagonal lift's projections.
pub fn collab_utility_maximize(
    inst: &CollabInstance,
    mode: PowerMode,
    utility: &crate::monotonic::Utility,
    dinkelbach: DinkelbachOptions,
    options: &crate::monotonic::PolyblockOptions,
) -> Result<crate::monotonic::PolyblockResult> {
    let region = collab_region(inst, mode, dinkelbach)?;
    crate::monotonic::polyblock_maximize(&region, utility, options)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::complex_gaussian_vector;
    use crate::monotonic::{polyblock_maximize, PolyblockOptions, Utility};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn random_gains(seed: u64, m: usize) -> CVector {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        complex_gaussian_vector(&mut rng, m)
    }

    #[test]
    fn scalar_relay_degenerates_to_twr_forms() {
        let inst = CollabInstance::with_snr(1, 1, 0.0, 3);
        let (forms, power) = build_collab_forms(&inst);
        let sys = inst.as_system_instance().unwrap().build_forms();
        assert_eq!(forms.dim(), 1);
        assert_eq!(power.len(), 1);
        assert!((forms.e0.get(0, 0).re - sys.e0.get(0, 0).re).abs() < 1e-12);
        for (a, b) in forms.users.iter().zip(&sys.users) {
            assert!(a.e1.sub(&b.e1).frobenius_norm() < 1e-12);
            assert!(a.e2.sub(&b.e2).frobenius_norm() < 1e-12);
        }
    }

    #[test]
    fn diagonal_lift_matches_direct_evaluation() {
        for seed in 0..100u64 {
            let inst = CollabInstance::with_snr(1 + (seed % 2) as usize, 3, 4.0, seed);
            let sys = inst.as_system_instance().unwrap();
            let (forms, power) = build_collab_forms(&inst);
            let gains = random_gains(seed ^ 0xA5, inst.relays());
            let a = diag_beamformer(&gains);

            let direct = sys.sinr_of_beamformer(&a);
            let lifted = forms.sinr_of_vec(&gains);
            for (x, y) in lifted.iter().zip(&direct) {
                assert!((x - y).abs() <= 1e-10 * (1.0 + y.abs()), "seed={seed}");
            }

            // Per-relay powers sum to the joint relay power.
            let total_direct = sys.relay_power_of_beamformer(&a);
            let total_lifted: f64 = power.iter().map(|p| p.form.quad_form(&gains)).sum();
            assert!((total_direct - total_lifted).abs() <= 1e-10 * total_direct);
        }
    }

    #[test]
    fn per_relay_power_form_shape() {
        let inst = CollabInstance::with_snr(2, 4, 6.0, 9);
        let (_, power) = build_collab_forms(&inst);
        for (m, pc) in power.iter().enumerate() {
            let mut nonzero = 0;
            for r in 0..4 {
                for c in 0..4 {
                    let v = pc.form.get(r, c);
                    if v.norm() > 0.0 {
                        nonzero += 1;
                        assert_eq!((r, c), (m, m));
                        assert!((v.re - inst.power_factor(m)).abs() < 1e-12);
                    }
                }
            }
            assert_eq!(nonzero, 1);
        }
    }

    #[test]
    fn scalar_collab_matches_twr_maxmin() {
        // M=1 with the full budget equals the K=1 single-antenna system.
        let mut inst = CollabInstance::with_snr(1, 1, 3.0, 21);
        inst.budgets = vec![2.5];
        let res =
            collab_maxmin(&inst, PowerMode::Individual, &DinkelbachOptions::default()).unwrap();
        let sys = inst.as_system_instance().unwrap();
        let spec = MaxMinSpec::sinr_balancing(sys.build_forms(), &sys.sinr_targets, 2.5);
        let twr = dinkelbach_maxmin(&spec, &DinkelbachOptions::default()).unwrap();
        assert!((res.lambda - twr.lambda).abs() <= 1e-6 * (1.0 + twr.lambda));
    }

    #[test]
    fn permutation_symmetry_with_equal_channels() {
        // Identical channel entries across relays and equal budgets make
        // the optimum invariant under relay permutation.
        let m = 3;
        let base = random_gains(5, 2);
        let inst = CollabInstance {
            channels: vec![vec![base[0]; m], vec![base[1]; m]],
            user_powers: vec![2.0, 2.0],
            relay_noises: vec![1.0; m],
            user_noise: vec![1.0, 1.0],
            budgets: vec![1.5; m],
            sinr_targets: vec![1.0, 1.0],
        };
        let res =
            collab_maxmin(&inst, PowerMode::Individual, &DinkelbachOptions::default()).unwrap();
        let mags: Vec<f64> = (0..m).map(|i| res.x.get(i, i).re.sqrt()).collect();
        for w in mags.windows(2) {
            assert!((w[0] - w[1]).abs() <= 1e-6 * (1.0 + w[0]), "{mags:?}");
        }
    }

    #[test]
    fn some_relay_budget_binds_at_the_optimum() {
        // Scaling all gains up raises every SINR, so an optimum with slack
        // in every power constraint would be improvable.
        let inst = CollabInstance::with_snr(2, 3, 5.0, 77);
        let res =
            collab_maxmin(&inst, PowerMode::Individual, &DinkelbachOptions::default()).unwrap();
        let (_, power) = build_collab_forms(&inst);
        let max_usage = power
            .iter()
            .map(|pc| pc.form.inner_product(&res.x) / pc.budget)
            .fold(0.0f64, f64::max);
        assert!(
            max_usage >= 1.0 - 1e-5,
            "no binding constraint: {max_usage}"
        );
        assert!(max_usage <= 1.0 + 1e-5, "budget violated: {max_usage}");
    }

    #[test]
    fn halved_budgets_lower_lambda() {
        let inst = CollabInstance::with_snr(2, 3, 8.0, 33);
        let full =
            collab_maxmin(&inst, PowerMode::Individual, &DinkelbachOptions::default()).unwrap();
        let mut halved = inst.clone();
        for b in halved.budgets.iter_mut() {
            *b *= 0.5;
        }
        let half = collab_maxmin(
            &halved,
            PowerMode::Individual,
            &DinkelbachOptions::default(),
        )
        .unwrap();
        assert!(half.lambda < full.lambda);
    }

    #[test]
    fn total_budget_dominates_individual_budgets() {
        let inst = CollabInstance::with_snr(1, 3, 6.0, 12);
        let utility = Utility::weighted_sum_rate(&[0.2, 0.8], 2).unwrap();
        let opts = PolyblockOptions::with_epsilon(0.02);
        let dink = DinkelbachOptions::with_stop_tol(1e-4);
        let ind = polyblock_maximize(
            &collab_region(&inst, PowerMode::Individual, dink.clone()).unwrap(),
            &utility,
            &opts,
        )
        .unwrap();
        let tot = polyblock_maximize(
            &collab_region(&inst, PowerMode::Total, dink).unwrap(),
            &utility,
            &opts,
        )
        .unwrap();
        // Feasible-set inclusion, allowing ε slack on both solves.
        assert!(
            tot.cbv >= ind.cbv - 0.02 * ind.cbv.abs() - 1e-9,
            "total {} < individual {}",
            tot.cbv,
            ind.cbv
        );
    }
}

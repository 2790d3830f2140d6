//! Two-way relaying system model.
//!
//! `K` user pairs exchange data through an `M`-antenna amplify-and-forward
//! relay. User `2k` and user `2k+1` (zero-based) are partners. In the first
//! phase all users transmit simultaneously; in the second phase the relay
//! forwards `A·y_R`. Each user cancels its own echoed signal before
//! detection, so self-interference does not appear in the SINR.
//!
//! Beyond direct beamformer-space evaluation, this module builds the lifted
//! quadratic forms over `X = vec(A) vec(A)ᴴ`: every SINR becomes a ratio of
//! affine trace functions `f_i(X)/g_i(X)` and the relay power becomes
//! `tr(E₀X)`, which is what the SDP machinery consumes.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::linalg::{dot_t, kron_vec, norm2_sqr, CVector, ComplexMatrix, HermitianMatrix};

/// Partner index of user `i` (zero-based): `0↔1`, `2↔3`, ...
pub fn partner(i: usize, users: usize) -> Result<usize> {
    if i >= users {
        return Err(Error::IndexOutOfRange {
            index: i,
            limit: users,
        });
    }
    Ok(i ^ 1)
}

#[inline]
pub(crate) fn partner_unchecked(i: usize) -> usize {
    i ^ 1
}

/// A single-antenna-user TWR instance.
#[derive(Clone, Debug)]
pub struct SystemInstance {
    /// Uplink channel vectors `h_i`, one length-`M` vector per user.
    pub channels: Vec<CVector>,
    /// Transmit power `p_i` of each user (linear scale).
    pub user_powers: Vec<f64>,
    /// Relay noise covariance `Λ_R` (`M × M`, PSD).
    pub relay_noise: HermitianMatrix,
    /// Receive noise variance `σ_i²` of each user.
    pub user_noise: Vec<f64>,
    /// Total relay power budget.
    pub power_budget: f64,
    /// SINR targets `γ_i`.
    pub sinr_targets: Vec<f64>,
}

impl SystemInstance {
    pub fn new(
        channels: Vec<CVector>,
        user_powers: Vec<f64>,
        relay_noise: HermitianMatrix,
        user_noise: Vec<f64>,
        power_budget: f64,
        sinr_targets: Vec<f64>,
    ) -> Result<Self> {
        let users = channels.len();
        if users == 0 || users % 2 != 0 {
            return Err(Error::Config(format!(
                "need an even, positive number of users, got {users}"
            )));
        }
        let m = relay_noise.dim();
        for h in &channels {
            if h.len() != m {
                return Err(Error::ShapeMismatch {
                    expected: m,
                    got: h.len(),
                    context: "channel vector length",
                });
            }
        }
        for (name, v) in [
            ("user_powers", &user_powers),
            ("user_noise", &user_noise),
            ("sinr_targets", &sinr_targets),
        ] {
            if v.len() != users {
                return Err(Error::ShapeMismatch {
                    expected: users,
                    got: v.len(),
                    context: "per-user parameter length",
                });
            }
            if v.iter().any(|&x| !(x > 0.0) || !x.is_finite()) {
                return Err(Error::Config(format!("{name} must be strictly positive")));
            }
        }
        if !(power_budget > 0.0) {
            return Err(Error::Config("power budget must be positive".into()));
        }
        Ok(Self {
            channels,
            user_powers,
            relay_noise,
            user_noise,
            power_budget,
            sinr_targets,
        })
    }

    /// Standard simulation instance: unit-variance Rayleigh channels, white
    /// noise with `N₀ = 1`, equal user powers `p = 10^(snr_db/10)`, relay
    /// budget equal to `p`, unit SINR targets.
    pub fn with_snr(pairs: usize, antennas: usize, snr_db: f64, seed: u64) -> Self {
        let users = 2 * pairs;
        let p = 10f64.powf(snr_db / 10.0);
        let channels = generate_channels(seed, pairs, antennas);
        Self {
            channels,
            user_powers: vec![p; users],
            relay_noise: HermitianMatrix::identity(antennas),
            user_noise: vec![1.0; users],
            power_budget: p,
            sinr_targets: vec![1.0; users],
        }
    }

    pub fn pairs(&self) -> usize {
        self.channels.len() / 2
    }

    pub fn users(&self) -> usize {
        self.channels.len()
    }

    pub fn antennas(&self) -> usize {
        self.relay_noise.dim()
    }

    /// SINR of every user for relay beamformer `A`, self-interference
    /// excluded.
    pub fn sinr_of_beamformer(&self, a: &ComplexMatrix) -> Vec<f64> {
        let users = self.users();
        let mut out = Vec::with_capacity(users);
        for i in 0..users {
            let j = partner_unchecked(i);
            // h_iᵀ A precomputed once per receiving user.
            let hta = a.transpose().matvec(&self.channels[i]);
            let signal = self.user_powers[j] * dot_t(&hta, &self.channels[j]).norm_sqr();
            let mut denom = self.user_noise[i];
            for l in 0..users {
                if l == i || l == j {
                    continue;
                }
                denom += self.user_powers[l] * dot_t(&hta, &self.channels[l]).norm_sqr();
            }
            // Forwarded relay noise: h_iᵀ A Λ_R Aᴴ h_i*.
            denom += self.relay_noise.quad_form(
                &a.adjoint().matvec(
                    &self.channels[i]
                        .iter()
                        .map(|z| z.conj())
                        .collect::<Vec<_>>(),
                ),
            );
            out.push(signal / denom);
        }
        out
    }

    /// Relay transmit power `Σ p_i ‖A h_i‖² + tr(A Λ_R Aᴴ)`.
    pub fn relay_power_of_beamformer(&self, a: &ComplexMatrix) -> f64 {
        let mut acc = 0.0;
        for (h, &p) in self.channels.iter().zip(&self.user_powers) {
            acc += p * norm2_sqr(&a.matvec(h));
        }
        let ah = a.adjoint();
        for c in 0..a.rows() {
            acc += self.relay_noise.quad_form(ah.column(c));
        }
        acc
    }

    /// Scaled-identity beamformer that meets the power budget with equality.
    pub fn scaled_identity(&self) -> ComplexMatrix {
        let m = self.antennas();
        let mut denom = self.relay_noise.trace();
        for (h, &p) in self.channels.iter().zip(&self.user_powers) {
            denom += p * norm2_sqr(h);
        }
        ComplexMatrix::identity(m).scale_re((self.power_budget / denom).sqrt())
    }

    /// Lifted quadratic forms for this instance.
    pub fn build_forms(&self) -> QuadraticForms {
        build_forms_general(
            &self.channels,
            &self.channels,
            &self.user_powers,
            &self.relay_noise,
            &self.user_noise,
        )
    }
}

/// Seeded i.i.d. CN(0,1) channel vectors, `2·pairs` of them, length
/// `antennas` each. The generator is ChaCha8; identical seeds give
/// bit-identical channels.
pub fn generate_channels(seed: u64, pairs: usize, antennas: usize) -> Vec<CVector> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..2 * pairs)
        .map(|_| complex_gaussian_vector(&mut rng, antennas))
        .collect()
}

/// Seeded i.i.d. CN(0,1) channel matrices `H_i` of size
/// `antennas × user_antennas[i]` for multi-antenna users.
pub fn generate_mimo_channels(
    seed: u64,
    antennas: usize,
    user_antennas: &[usize],
) -> Vec<ComplexMatrix> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    user_antennas
        .iter()
        .map(|&mi| {
            let cols: Vec<CVector> = (0..mi)
                .map(|_| complex_gaussian_vector(&mut rng, antennas))
                .collect();
            ComplexMatrix::from_fn(antennas, mi, |r, c| cols[c][r])
        })
        .collect()
}

pub(crate) fn complex_gaussian_vector(rng: &mut impl Rng, len: usize) -> CVector {
    (0..len)
        .map(|_| {
            let re: f64 = rng.sample(StandardNormal);
            let im: f64 = rng.sample(StandardNormal);
            Complex64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
        })
        .collect()
}

/// Per-user lifted forms: signal `E1`, interference-plus-relay-noise `E2`,
/// receiver noise offset `σ²`.
#[derive(Clone, Debug)]
pub struct UserForms {
    pub e1: HermitianMatrix,
    pub e2: HermitianMatrix,
    pub sigma2: f64,
}

/// The full set of lifted forms: relay power form `E₀` plus one
/// [`UserForms`] per user. For a candidate beamformer vector `a` the SINR of
/// user `i` is `aᴴE1ᵢa / (aᴴE2ᵢa + σᵢ²)`, and for the lifted variable `X`
/// it is `tr(E1ᵢX) / (tr(E2ᵢX) + σᵢ²)`.
#[derive(Clone, Debug)]
pub struct QuadraticForms {
    pub e0: HermitianMatrix,
    pub users: Vec<UserForms>,
}

impl QuadraticForms {
    pub fn dim(&self) -> usize {
        self.e0.dim()
    }

    pub fn users(&self) -> usize {
        self.users.len()
    }

    pub fn sinr_of_x(&self, x: &HermitianMatrix) -> Vec<f64> {
        self.users
            .iter()
            .map(|u| u.e1.inner_product(x) / (u.e2.inner_product(x) + u.sigma2))
            .collect()
    }

    pub fn sinr_of_vec(&self, a: &[Complex64]) -> Vec<f64> {
        self.users
            .iter()
            .map(|u| u.e1.quad_form(a) / (u.e2.quad_form(a) + u.sigma2))
            .collect()
    }

    pub fn power_of_x(&self, x: &HermitianMatrix) -> f64 {
        self.e0.inner_product(x)
    }

    pub fn power_of_vec(&self, a: &[Complex64]) -> f64 {
        self.e0.quad_form(a)
    }
}

/// Builds lifted forms for the generic bilinear SINR pattern
/// `|r_iᵀ A t_j|²` with per-stream powers, relay noise `Λ_R`, and per-user
/// noise offsets. The single-antenna model uses `r_i = t_i = h_i`; the
/// MIMO relay subproblem substitutes effective receive/transmit vectors.
///
/// Under the column-major `vec` convention, `r_iᵀ A t_j = q_{ij}ᵀ vec(A)`
/// with `q_{ij} = t_j ⊗ r_i`, and the forwarded-noise form works out to
/// `Λ_Rᵀ ⊗ (r_i* r_iᵀ)`; the transpose (rather than `Λ_R` itself) is what
/// makes `aᴴNa` equal the direct evaluation for complex-valued `Λ_R`.
pub fn build_forms_general(
    receive: &[CVector],
    transmit: &[CVector],
    powers: &[f64],
    relay_noise: &HermitianMatrix,
    noise_offsets: &[f64],
) -> QuadraticForms {
    let users = receive.len();
    assert_eq!(users, transmit.len());
    assert_eq!(users, powers.len());
    assert_eq!(users, noise_offsets.len());
    let m = relay_noise.dim();

    // E0 = Θᵀ ⊗ I with Θ = Σ p_j t_j t_jᴴ + Λ_R.
    let mut theta = relay_noise.clone();
    for (t, &p) in transmit.iter().zip(powers) {
        theta = theta.add(&HermitianMatrix::outer(t).scale(p));
    }
    let e0 = theta.transpose().kron(&HermitianMatrix::identity(m));

    let user_forms = (0..users)
        .map(|i| {
            let j = partner_unchecked(i);
            let q_signal = kron_vec(&transmit[j], &receive[i]);
            let e1 = HermitianMatrix::outer_conj(&q_signal).scale(powers[j]);

            let mut e2 = relay_noise
                .transpose()
                .kron(&HermitianMatrix::outer_conj(&receive[i]));
            for l in 0..users {
                if l == i || l == j {
                    continue;
                }
                let q = kron_vec(&transmit[l], &receive[i]);
                e2 = e2.add(&HermitianMatrix::outer_conj(&q).scale(powers[l]));
            }
            UserForms {
                e1,
                e2,
                sigma2: noise_offsets[i],
            }
        })
        .collect();

    QuadraticForms {
        e0,
        users: user_forms,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::norm2;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    /// Term-by-term scalar-loop SINR evaluation, independent of the matrix
    /// kernel; the oracle for `sinr_of_beamformer`.
    fn sinr_direct(inst: &SystemInstance, a: &ComplexMatrix) -> Vec<f64> {
        let users = inst.users();
        let m = inst.antennas();
        let bilinear = |hi: &[Complex64], hj: &[Complex64]| -> Complex64 {
            let mut acc = Complex64::ZERO;
            for r in 0..m {
                for cc in 0..m {
                    acc += hi[r] * a.get(r, cc) * hj[cc];
                }
            }
            acc
        };
        (0..users)
            .map(|i| {
                let j = i ^ 1;
                let sig =
                    inst.user_powers[j] * bilinear(&inst.channels[i], &inst.channels[j]).norm_sqr();
                let mut den = inst.user_noise[i];
                for l in 0..users {
                    if l != i && l != j {
                        den += inst.user_powers[l]
                            * bilinear(&inst.channels[i], &inst.channels[l]).norm_sqr();
                    }
                }
                // h_iᵀ A Λ_R Aᴴ h_i* accumulated entry by entry.
                for r in 0..m {
                    for cc in 0..m {
                        let mut left = Complex64::ZERO;
                        let mut right = Complex64::ZERO;
                        for s in 0..m {
                            left += inst.channels[i][s] * a.get(s, r);
                            right += (inst.channels[i][s] * a.get(s, cc)).conj();
                        }
                        den += (left * inst.relay_noise.get(r, cc) * right).re;
                    }
                }
                sig / den
            })
            .collect()
    }

    fn random_instance(seed: u64, pairs: usize, antennas: usize) -> SystemInstance {
        SystemInstance::with_snr(pairs, antennas, 6.0, seed)
    }

    fn random_beamformer(seed: u64, m: usize) -> ComplexMatrix {
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0xBEEF);
        let cols: Vec<CVector> = (0..m)
            .map(|_| complex_gaussian_vector(&mut rng, m))
            .collect();
        ComplexMatrix::from_fn(m, m, |r, cc| cols[cc][r])
    }

    #[test]
    fn partner_is_an_involution() {
        for users in [2usize, 4, 6] {
            for i in 0..users {
                let p = partner(i, users).unwrap();
                assert_eq!(partner(p, users).unwrap(), i);
                assert_eq!(p, if i % 2 == 0 { i + 1 } else { i - 1 });
            }
            assert!(partner(users, users).is_err());
        }
        assert_eq!(partner(0, 2).unwrap(), 1);
        assert_eq!(partner(1, 2).unwrap(), 0);
    }

    #[test]
    fn channels_are_deterministic() {
        let a = generate_channels(42, 2, 3);
        let b = generate_channels(42, 2, 3);
        assert_eq!(a, b);
        let c_ = generate_channels(43, 2, 3);
        assert_ne!(a, c_);
        assert_eq!(a.len(), 4);
        assert_eq!(a[0].len(), 3);
    }

    #[test]
    fn channel_shape_k1_m2() {
        let h = generate_channels(7, 1, 2);
        assert_eq!(h.len(), 2);
        assert!(h.iter().all(|v| v.len() == 2));
    }

    #[test]
    fn channel_unit_variance() {
        // Law of large numbers: mean |h|^2 over 1e5 draws within 1 +/- 0.02.
        let n = 100_000;
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let mut acc = 0.0;
        for _ in 0..n {
            acc += norm2_sqr(&complex_gaussian_vector(&mut rng, 1));
        }
        let mean = acc / n as f64;
        assert!((mean - 1.0).abs() <= 0.02, "mean={mean}");
    }

    #[test]
    fn scalar_sinr_case() {
        // K=1, M=1, unit everything, A=1: SINR = 1/(1+1).
        let inst = SystemInstance::new(
            vec![vec![c(1.0, 0.0)], vec![c(1.0, 0.0)]],
            vec![1.0, 1.0],
            HermitianMatrix::identity(1),
            vec![1.0, 1.0],
            3.0,
            vec![1.0, 1.0],
        )
        .unwrap();
        let a = ComplexMatrix::identity(1);
        let s = inst.sinr_of_beamformer(&a);
        assert!((s[0] - 0.5).abs() < 1e-15);
        assert!((s[1] - 0.5).abs() < 1e-15);

        let zero = ComplexMatrix::zeros(1, 1);
        assert_eq!(inst.sinr_of_beamformer(&zero), vec![0.0, 0.0]);
    }

    #[test]
    fn sinr_matches_independent_direct_evaluation() {
        let inst = random_instance(5, 2, 2);
        let a = random_beamformer(5, 2);
        let fast = inst.sinr_of_beamformer(&a);
        let slow = sinr_direct(&inst, &a);
        for (x, y) in fast.iter().zip(&slow) {
            assert!((x - y).abs() <= 1e-12 * (1.0 + y.abs()), "{x} vs {y}");
        }
    }

    #[test]
    fn relay_power_closed_forms() {
        let inst = random_instance(9, 1, 3);
        assert_eq!(
            inst.relay_power_of_beamformer(&ComplexMatrix::zeros(3, 3)),
            0.0
        );

        // A = I, Λ_R = N0 I: power = Σ p_i ‖h_i‖² + M·N0.
        let expect: f64 = inst
            .channels
            .iter()
            .zip(&inst.user_powers)
            .map(|(h, &p)| p * norm2_sqr(h))
            .sum::<f64>()
            + 3.0;
        let got = inst.relay_power_of_beamformer(&ComplexMatrix::identity(3));
        assert!((got - expect).abs() < 1e-10 * expect);

        let a0 = inst.scaled_identity();
        let p0 = inst.relay_power_of_beamformer(&a0);
        assert!((p0 - inst.power_budget).abs() < 1e-10 * inst.power_budget);
    }

    #[test]
    fn x_space_matches_a_space_on_random_instances() {
        for seed in 0..100u64 {
            let pairs = 1 + (seed % 2) as usize;
            let m = 2 + (seed % 3) as usize;
            let inst = random_instance(seed, pairs, m);
            let forms = inst.build_forms();
            let a = random_beamformer(seed, m);
            let av = a.vectorize();

            let sinr_a = inst.sinr_of_beamformer(&a);
            let sinr_x = forms.sinr_of_vec(&av);
            for (x, y) in sinr_x.iter().zip(&sinr_a) {
                assert!(
                    (x - y).abs() <= 1e-10 * (1.0 + y.abs()),
                    "seed={seed}: {x} vs {y}"
                );
            }

            let p_a = inst.relay_power_of_beamformer(&a);
            let p_x = forms.power_of_vec(&av);
            assert!(
                (p_a - p_x).abs() <= 1e-10 * p_a,
                "seed={seed}: {p_a} vs {p_x}"
            );
        }
    }

    #[test]
    fn x_space_equivalence_with_general_hermitian_relay_noise() {
        // Non-diagonal PSD Λ_R exercises the conjugation pattern of the
        // forwarded-noise form.
        let mut inst = random_instance(3, 1, 2);
        let g = ComplexMatrix::from_rows(&[
            vec![c(1.0, 0.2), c(0.3, -0.4)],
            vec![c(0.1, 0.5), c(0.8, 0.0)],
        ]);
        inst.relay_noise = HermitianMatrix::new(&g.matmul(&g.adjoint())).shift(0.1);
        let forms = inst.build_forms();
        let a = random_beamformer(17, 2);
        let av = a.vectorize();
        let sinr_a = inst.sinr_of_beamformer(&a);
        let sinr_x = forms.sinr_of_vec(&av);
        for (x, y) in sinr_x.iter().zip(&sinr_a) {
            assert!((x - y).abs() <= 1e-10 * (1.0 + y.abs()), "{x} vs {y}");
        }
        let p_a = inst.relay_power_of_beamformer(&a);
        assert!((forms.power_of_vec(&av) - p_a).abs() <= 1e-10 * p_a);
    }

    #[test]
    fn scalar_forms_degenerate_case() {
        // M=1: E0 is the 1x1 matrix p1 + p2 + Λ_R.
        let inst = SystemInstance::new(
            vec![vec![c(1.0, 0.0)], vec![c(1.0, 0.0)]],
            vec![2.0, 3.0],
            HermitianMatrix::diag_real(&[0.5]),
            vec![1.0, 1.0],
            1.0,
            vec![1.0, 1.0],
        )
        .unwrap();
        let forms = inst.build_forms();
        assert_eq!(forms.dim(), 1);
        assert!((forms.e0.get(0, 0).re - 5.5).abs() < 1e-14);
    }

    #[test]
    fn signal_forms_are_rank_one() {
        let inst = random_instance(11, 2, 3);
        let forms = inst.build_forms();
        for u in &forms.users {
            let (vals, _) = u.e1.eig().unwrap();
            assert!(vals[0] > 0.0);
            assert!(vals[1].abs() <= 1e-9 * vals[0], "second eig {}", vals[1]);
        }
    }

    #[test]
    fn scaling_up_beamformer_raises_every_sinr() {
        let inst = random_instance(23, 2, 2);
        let a = random_beamformer(23, 2);
        let base = inst.sinr_of_beamformer(&a);
        let scaled = inst.sinr_of_beamformer(&a.scale_re(1.5));
        for (lo, hi) in base.iter().zip(&scaled) {
            assert!(hi > lo, "{hi} <= {lo}");
        }
    }

    #[test]
    fn vectorize_norm_identity() {
        let a = random_beamformer(2, 3);
        assert!((norm2(&a.vectorize()) - a.frobenius_norm()).abs() < 1e-14);
    }
}

//! Shared instance builders for the criterion benchmarks.

use relaybf_core::fractional::MaxMinSpec;
use relaybf_core::linalg::HermitianMatrix;
use relaybf_core::model::SystemInstance;
use relaybf_core::sdp::SdpProblem;

/// A mid-size Hermitian matrix with a deterministic fill.
pub fn bench_hermitian(n: usize) -> HermitianMatrix {
    let m = relaybf_core::linalg::ComplexMatrix::from_fn(n, n, |r, c| {
        num_complex::Complex64::new(
            ((r * 31 + c * 17) % 13) as f64 / 13.0 - 0.5,
            ((r * 7 + c * 29) % 11) as f64 / 11.0 - 0.5,
        )
    });
    HermitianMatrix::new(&m)
}

/// The parametric epigraph SDP of a two-pair instance.
pub fn bench_sdp(antennas: usize) -> SdpProblem {
    let (p, _) = relaybf_core::fractional::parametric_sdp(&bench_spec(antennas), 0.5);
    p
}

/// A two-pair max-min spec at 10 dB.
pub fn bench_spec(antennas: usize) -> MaxMinSpec {
    let inst = SystemInstance::with_snr(2, antennas, 10.0, 42);
    MaxMinSpec::sinr_balancing(inst.build_forms(), &inst.sinr_targets, inst.power_budget)
}

/// Trivially exercised so the crate has a test target.
pub fn smoke() -> usize {
    bench_sdp(2).constraints.len()
}

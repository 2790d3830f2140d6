//! Solves one max-min SINR instance end to end and prints the balanced
//! SINRs of the recovered beamformer.
//!
//! ```sh
//! cargo run --release -p relaybf-core --example maxmin
//! ```

use relaybf_core::fractional::{
    devectorize_beamformer, dinkelbach_maxmin, round_maxmin, DinkelbachOptions, MaxMinSpec,
};
use relaybf_core::model::SystemInstance;

fn main() -> relaybf_core::Result<()> {
    let inst = SystemInstance::with_snr(2, 4, 10.0, 7);
    let spec =
        MaxMinSpec::sinr_balancing(inst.build_forms(), &inst.sinr_targets, inst.power_budget);

    let relaxed = dinkelbach_maxmin(&spec, &DinkelbachOptions::default())?;
    println!(
        "relaxation: lambda = {:.6} after {} iterations (trace {:?})",
        relaxed.lambda,
        relaxed.iterations,
        relaxed
            .lambda_trace
            .iter()
            .map(|l| (l * 1e4).round() / 1e4)
            .collect::<Vec<_>>()
    );

    let rounded = round_maxmin(&spec, &relaxed.x, 200, 1)?;
    let beamformer = devectorize_beamformer(&rounded.vector)?;
    println!("rounded feasible min SINR ratio = {:.6}", rounded.objective);
    println!(
        "per-user SINRs: {:?}",
        inst.sinr_of_beamformer(&beamformer)
            .iter()
            .map(|s| (s * 1e4).round() / 1e4)
            .collect::<Vec<_>>()
    );
    println!(
        "relay power {:.4} of budget {:.4}",
        inst.relay_power_of_beamformer(&beamformer),
        inst.power_budget
    );
    Ok(())
}

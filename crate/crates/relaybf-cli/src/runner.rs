//! Monte-Carlo benchmark runner.
//!
//! A run sweeps `(trial, snr)` cells; every scheme inside a cell sees the
//! same channel realization (paired comparison), and all seeding is derived
//! from `(master seed, snr index, trial)`, so a run is deterministic given
//! its config. Solver failures are logged to stderr and the run continues.
//!
//! CSV layout (`# schema: relaybf-csv/1`):
//! `trial,snr_db,scheme,metric,value,iterations,rank1_accepted,relaxation_gap`.
//! Wall-clock time is deliberately kept out of the CSV (it would break
//! byte-for-byte determinism) and shows up in the stdout summary instead.

use std::collections::BTreeMap;
use std::io::Write;
use std::time::Instant;

use anyhow::{Context, Result};

use relaybf_core::baselines::{baseline_beamformer, BaselineKind};
use relaybf_core::collab::{collab_region, CollabInstance, PowerMode};
use relaybf_core::fractional::{
    dinkelbach_maxmin, power_min, round_maxmin, DinkelbachOptions, MaxMinSpec,
};
use relaybf_core::mimo::{alternate, AlternatingOptions, MimoInstance};
use relaybf_core::model::SystemInstance;
use relaybf_core::monotonic::{
    polyblock_maximize, Modulation, PolyblockOptions, TwrRegion, Utility,
};
use relaybf_core::sdp::{extract_rank_one, SdpOptions};

use crate::config::{Mode, RunConfig, UtilityKind};

pub const CSV_SCHEMA: &str = "relaybf-csv/1";
pub const TRACE_SCHEMA: &str = "relaybf-trace/1";

#[derive(Clone, Debug)]
pub struct ResultRecord {
    pub trial: usize,
    pub snr_db: f64,
    pub scheme: String,
    pub metric: String,
    pub value: f64,
    pub iterations: Option<usize>,
    pub runtime_ms: f64,
    pub rank1_accepted: Option<bool>,
    pub relaxation_gap: Option<f64>,
}

/// Splitmix-style seed derivation; stable across runs and platforms.
pub fn cell_seed(master: u64, snr_idx: usize, trial: usize) -> u64 {
    let mut z = master
        .wrapping_add(0x9E37_79B9_7F4A_7C15u64.wrapping_mul(1 + snr_idx as u64))
        .wrapping_add(0xBF58_476D_1CE4_E5B9u64.wrapping_mul(1 + trial as u64));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

fn build_utility(kind: UtilityKind, weights: &[f64], users: usize) -> Result<Utility> {
    Ok(match kind {
        UtilityKind::Wsr => Utility::weighted_sum_rate(weights, users)?,
        UtilityKind::Mse => Utility::neg_weighted_sum_mse(weights, users)?,
        UtilityKind::SerQpsk => Utility::neg_weighted_sum_ser(weights, Modulation::Qpsk, users)?,
        UtilityKind::SerBpsk => Utility::neg_weighted_sum_ser(weights, Modulation::Bpsk, users)?,
    })
}

fn dinkelbach_options(cfg: &RunConfig) -> DinkelbachOptions {
    DinkelbachOptions {
        stop_tol: cfg.tol,
        max_iter: 60,
        sdp: SdpOptions::default(),
    }
}

/// Looser settings for the projection subproblems inside the polyblock
/// loop; their accuracy only needs to track the outer ε.
fn projection_options(cfg: &RunConfig) -> DinkelbachOptions {
    DinkelbachOptions {
        stop_tol: (cfg.eps * 1e-2).max(cfg.tol).min(1e-3),
        max_iter: 60,
        sdp: SdpOptions::default(),
    }
}

fn polyblock_options(cfg: &RunConfig) -> PolyblockOptions {
    PolyblockOptions {
        epsilon: cfg.eps,
        // Single-pair regions certify quickly; larger ones run to a
        // projection budget and report best-so-far plus the bound.
        max_projections: if cfg.pairs == 1 { 5000 } else { 400 },
        vertex_cap: 100_000,
    }
}

fn default_schemes(mode: Mode) -> Vec<String> {
    let all = |extra: &[&str]| -> Vec<String> {
        extra
            .iter()
            .map(|s| s.to_string())
            .chain(BaselineKind::ALL.iter().map(|b| b.name().to_string()))
            .collect()
    };
    match mode {
        Mode::MaxMin => all(&["maxmin"]),
        Mode::PowerMin => vec!["powermin".into()],
        Mode::Wsr | Mode::Utility => all(&["mp", "maxmin"]),
        Mode::Sweep => all(&["mp", "maxmin"]),
        Mode::Collab => vec![
            "mp-individual".into(),
            "mp-total".into(),
            "maxmin-individual".into(),
        ],
        Mode::Mimo => vec!["alternating".into()],
    }
}

fn utility_of_beamformer(
    inst: &SystemInstance,
    utility: &Utility,
    a: &relaybf_core::linalg::ComplexMatrix,
) -> Result<f64> {
    let z: Vec<f64> = inst
        .sinr_of_beamformer(a)
        .iter()
        .map(|s| 1.0 + s.max(0.0))
        .collect();
    Ok(utility.eval(&z)?)
}

fn min_weighted_sinr(inst: &SystemInstance, a: &relaybf_core::linalg::ComplexMatrix) -> f64 {
    inst.sinr_of_beamformer(a)
        .iter()
        .zip(&inst.sinr_targets)
        .map(|(s, g)| s / g)
        .fold(f64::INFINITY, f64::min)
}

/// One Monte-Carlo cell of the single-relay modes.
fn run_cell_single_relay(
    cfg: &RunConfig,
    schemes: &[String],
    trial: usize,
    snr_idx: usize,
    out: &mut Vec<ResultRecord>,
) -> Result<()> {
    let snr = cfg.snr_db[snr_idx];
    let seed = cell_seed(cfg.seed, snr_idx, trial);
    let mut inst = SystemInstance::with_snr(cfg.pairs, cfg.antennas, snr, seed);
    inst.sinr_targets = cfg.targets_or_default();
    let users = cfg.users();
    let weights = cfg.weights_or_default();
    let utility = build_utility(cfg.utility, &weights, users)?;
    let want_utility = matches!(cfg.mode, Mode::Wsr | Mode::Utility | Mode::Sweep);
    let want_maxmin_metric = matches!(cfg.mode, Mode::MaxMin | Mode::Sweep);
    let metric = cfg.utility.metric_name();

    let push = |scheme: &str,
                metric: &str,
                value: f64,
                iterations: Option<usize>,
                runtime_ms: f64,
                rank1: Option<bool>,
                gap: Option<f64>,
                out: &mut Vec<ResultRecord>| {
        out.push(ResultRecord {
            trial,
            snr_db: snr,
            scheme: scheme.to_string(),
            metric: metric.to_string(),
            value,
            iterations,
            runtime_ms,
            rank1_accepted: rank1,
            relaxation_gap: gap,
        });
    };

    for scheme in schemes {
        let t0 = Instant::now();
        match scheme.as_str() {
            "powermin" => {
                let forms = inst.build_forms();
                match power_min(&forms, &inst.sinr_targets, 1.0, &SdpOptions::default()) {
                    Ok((p, x)) => {
                        let rank1 = extract_rank_one(&x, 1e-6).map(|e| e.accepted).ok();
                        push(scheme, "relay_power", p, None, ms(t0), rank1, None, out);
                    }
                    Err(e) => log_failure(trial, snr, scheme, &e),
                }
            }
            "maxmin" => {
                let spec = MaxMinSpec::sinr_balancing(
                    inst.build_forms(),
                    &inst.sinr_targets,
                    inst.power_budget,
                );
                match dinkelbach_maxmin(&spec, &dinkelbach_options(cfg))
                    .and_then(|r| r.with_rounding(&spec, 200, seed ^ 0x51))
                {
                    Ok(res) => {
                        let ext = extract_rank_one(&res.x, 1e-6);
                        let rounded = res.rounded.clone().expect("rounding attached");
                        let elapsed = ms(t0);
                        if want_maxmin_metric {
                            push(
                                scheme,
                                "min_sinr_ub",
                                res.lambda,
                                Some(res.iterations),
                                elapsed,
                                ext.as_ref().map(|e| e.accepted).ok(),
                                Some(res.lambda - rounded.objective),
                                out,
                            );
                            push(
                                scheme,
                                "min_sinr",
                                rounded.objective,
                                Some(res.iterations),
                                elapsed,
                                None,
                                None,
                                out,
                            );
                        }
                        if want_utility {
                            let a =
                                relaybf_core::fractional::devectorize_beamformer(&rounded.vector)?;
                            let v = utility_of_beamformer(&inst, &utility, &a)?;
                            push(
                                scheme,
                                metric,
                                v,
                                Some(res.iterations),
                                elapsed,
                                None,
                                None,
                                out,
                            );
                        }
                    }
                    Err(e) => log_failure(trial, snr, scheme, &e),
                }
            }
            "mp" => {
                let region = TwrRegion::new(&inst, projection_options(cfg))?;
                match polyblock_maximize(&region, &utility, &polyblock_options(cfg)) {
                    Ok(res) => {
                        let elapsed = ms(t0);
                        let feasible = match res.witness.as_ref() {
                            Some(x) => {
                                let rounded = region.round(&utility, x, 200, seed ^ 0x77)?;
                                rounded.objective
                            }
                            None => res.cbv,
                        };
                        push(
                            scheme,
                            &format!("{metric}_ub"),
                            res.cbv,
                            Some(res.iterations),
                            elapsed,
                            None,
                            Some(res.cbv - feasible),
                            out,
                        );
                        push(
                            scheme,
                            metric,
                            feasible,
                            Some(res.iterations),
                            elapsed,
                            None,
                            None,
                            out,
                        );
                    }
                    Err(e) => log_failure(trial, snr, scheme, &e),
                }
            }
            name => {
                let kind: BaselineKind = match name.parse() {
                    Ok(k) => k,
                    Err(e) => {
                        anyhow::bail!("scheme '{name}': {e}");
                    }
                };
                match baseline_beamformer(kind, &inst) {
                    Ok(a) => {
                        let elapsed = ms(t0);
                        if want_maxmin_metric {
                            push(
                                scheme,
                                "min_sinr",
                                min_weighted_sinr(&inst, &a),
                                None,
                                elapsed,
                                None,
                                None,
                                out,
                            );
                        }
                        if want_utility {
                            let v = utility_of_beamformer(&inst, &utility, &a)?;
                            push(scheme, metric, v, None, elapsed, None, None, out);
                        }
                    }
                    Err(e) => log_failure(trial, snr, scheme, &e),
                }
            }
        }
    }
    Ok(())
}

fn run_cell_collab(
    cfg: &RunConfig,
    schemes: &[String],
    trial: usize,
    snr_idx: usize,
    out: &mut Vec<ResultRecord>,
) -> Result<()> {
    let snr = cfg.snr_db[snr_idx];
    let seed = cell_seed(cfg.seed, snr_idx, trial);
    let mut inst = CollabInstance::with_snr(cfg.pairs, cfg.antennas, snr, seed);
    inst.sinr_targets = cfg.targets_or_default();
    let weights = cfg.weights_or_default();
    let utility = build_utility(cfg.utility, &weights, cfg.users())?;
    let metric = cfg.utility.metric_name();

    for scheme in schemes {
        let t0 = Instant::now();
        let (mode, is_mp) = match scheme.as_str() {
            "mp-individual" => (PowerMode::Individual, true),
            "mp-total" => (PowerMode::Total, true),
            "maxmin-individual" => (PowerMode::Individual, false),
            other => anyhow::bail!("scheme '{other}' is not a collaborative scheme"),
        };
        let result: std::result::Result<(f64, f64, usize), relaybf_core::Error> = if is_mp {
            collab_region(&inst, mode, projection_options(cfg)).and_then(|region| {
                let res = polyblock_maximize(&region, &utility, &polyblock_options(cfg))?;
                let feasible = match res.witness.as_ref() {
                    Some(x) => region.round(&utility, x, 200, seed ^ 0x33)?.objective,
                    None => res.cbv,
                };
                Ok((res.cbv, feasible, res.iterations))
            })
        } else {
            relaybf_core::collab::collab_maxmin(&inst, mode, &dinkelbach_options(cfg)).and_then(
                |res| {
                    let spec = relaybf_core::collab::collab_spec(&inst, mode);
                    let rounded = round_maxmin(&spec, &res.x, 200, seed ^ 0x39)?;
                    let region = collab_region(&inst, mode, projection_options(cfg))?;
                    let value = region.utility_of_vec(&utility, &rounded.vector)?;
                    Ok((value, value, res.iterations))
                },
            )
        };
        match result {
            Ok((ub, feasible, iterations)) => {
                let elapsed = ms(t0);
                if is_mp {
                    out.push(ResultRecord {
                        trial,
                        snr_db: snr,
                        scheme: scheme.clone(),
                        metric: format!("{metric}_ub"),
                        value: ub,
                        iterations: Some(iterations),
                        runtime_ms: elapsed,
                        rank1_accepted: None,
                        relaxation_gap: Some(ub - feasible),
                    });
                }
                out.push(ResultRecord {
                    trial,
                    snr_db: snr,
                    scheme: scheme.clone(),
                    metric: metric.to_string(),
                    value: feasible,
                    iterations: Some(iterations),
                    runtime_ms: elapsed,
                    rank1_accepted: None,
                    relaxation_gap: None,
                });
            }
            Err(e) => log_failure(trial, snr, scheme, &e),
        }
    }
    Ok(())
}

fn run_cell_mimo(
    cfg: &RunConfig,
    trial: usize,
    snr_idx: usize,
    out: &mut Vec<ResultRecord>,
) -> Result<()> {
    let snr = cfg.snr_db[snr_idx];
    let seed = cell_seed(cfg.seed, snr_idx, trial);
    let user_antennas = cfg.user_antennas_or_default();
    let mut inst = MimoInstance::with_snr(cfg.pairs, cfg.antennas, &user_antennas, snr, seed);
    inst.sinr_targets = cfg.targets_or_default();
    let t0 = Instant::now();
    let opts = AlternatingOptions {
        epsilon: cfg.eps,
        max_outer: 30,
        dinkelbach: DinkelbachOptions {
            stop_tol: cfg.tol.max(1e-6),
            max_iter: 60,
            sdp: SdpOptions::default(),
        },
        rounding_samples: 100,
        seed: seed ^ 0x99,
    };
    match alternate(&inst, &opts) {
        Ok(res) => {
            out.push(ResultRecord {
                trial,
                snr_db: snr,
                scheme: "alternating".into(),
                metric: "min_sinr".into(),
                value: *res.lambda_trace.last().unwrap_or(&0.0),
                iterations: Some(res.outer_iterations),
                runtime_ms: ms(t0),
                rank1_accepted: None,
                relaxation_gap: None,
            });
        }
        Err(e) => log_failure(trial, snr, "alternating", &e),
    }
    Ok(())
}

fn ms(t0: Instant) -> f64 {
    t0.elapsed().as_secs_f64() * 1e3
}

fn log_failure(trial: usize, snr: f64, scheme: &str, err: &dyn std::fmt::Display) {
    eprintln!("warning: trial {trial} snr {snr} scheme {scheme}: {err}");
}

/// Executes the run and returns all records in deterministic
/// (snr, trial, scheme) order.
pub fn run(cfg: &RunConfig) -> Result<Vec<ResultRecord>> {
    let schemes = if cfg.schemes.is_empty() {
        default_schemes(cfg.mode)
    } else {
        cfg.schemes.clone()
    };
    let mut out = Vec::new();
    for snr_idx in 0..cfg.snr_db.len() {
        for trial in 0..cfg.trials {
            match cfg.mode {
                Mode::Collab => run_cell_collab(cfg, &schemes, trial, snr_idx, &mut out)?,
                Mode::Mimo => run_cell_mimo(cfg, trial, snr_idx, &mut out)?,
                _ => run_cell_single_relay(cfg, &schemes, trial, snr_idx, &mut out)?,
            }
        }
    }
    Ok(out)
}

/// Serializes records to the versioned CSV layout.
pub fn to_csv(records: &[ResultRecord]) -> String {
    let mut s = String::new();
    s.push_str(&format!("# schema: {CSV_SCHEMA}\n"));
    s.push_str("trial,snr_db,scheme,metric,value,iterations,rank1_accepted,relaxation_gap\n");
    for r in records {
        let iters = r.iterations.map(|i| i.to_string()).unwrap_or_default();
        let rank1 = r.rank1_accepted.map(|b| b.to_string()).unwrap_or_default();
        let gap = r.relaxation_gap.map(fmt_f64).unwrap_or_default();
        s.push_str(&format!(
            "{},{},{},{},{},{},{},{}\n",
            r.trial,
            fmt_f64(r.snr_db),
            r.scheme,
            r.metric,
            fmt_f64(r.value),
            iters,
            rank1,
            gap
        ));
    }
    s
}

fn fmt_f64(v: f64) -> String {
    if v == v.trunc() && v.abs() < 1e15 {
        format!("{v:.1}")
    } else {
        format!("{v:.12e}")
    }
}

/// Mean-value summary per (snr, scheme, metric), printed as the run's
/// stdout table.
pub fn summarize(records: &[ResultRecord]) -> String {
    let mut groups: BTreeMap<(String, String, String), (f64, f64, usize)> = BTreeMap::new();
    for r in records {
        let key = (fmt_f64(r.snr_db), r.scheme.clone(), r.metric.clone());
        let e = groups.entry(key).or_insert((0.0, 0.0, 0));
        e.0 += r.value;
        e.1 += r.runtime_ms;
        e.2 += 1;
    }
    let mut s = String::new();
    s.push_str(&format!(
        "{:>8}  {:<18} {:<14} {:>14} {:>7} {:>12}\n",
        "snr_db", "scheme", "metric", "mean", "n", "mean_ms"
    ));
    for ((snr, scheme, metric), (sum, rt, n)) in groups {
        s.push_str(&format!(
            "{:>8}  {:<18} {:<14} {:>14.6} {:>7} {:>12.2}\n",
            snr,
            scheme,
            metric,
            sum / n as f64,
            n,
            rt / n as f64
        ));
    }
    s
}

/// Per-iteration convergence traces in the versioned trace CSV layout:
/// the Dinkelbach λ path for max-min runs, (CBV, UB, |vertex set|) for
/// polyblock runs, the per-outer λ_u path for the alternating optimizer.
pub fn convergence_trace(cfg: &RunConfig) -> Result<String> {
    let mut s = String::new();
    s.push_str(&format!("# schema: {TRACE_SCHEMA}\n"));
    s.push_str("trial,snr_db,algorithm,iteration,primary,upper,vertices\n");
    let weights = cfg.weights_or_default();

    for snr_idx in 0..cfg.snr_db.len() {
        let snr = cfg.snr_db[snr_idx];
        for trial in 0..cfg.trials {
            let seed = cell_seed(cfg.seed, snr_idx, trial);
            match cfg.mode {
                Mode::MaxMin | Mode::PowerMin => {
                    let mut inst = SystemInstance::with_snr(cfg.pairs, cfg.antennas, snr, seed);
                    inst.sinr_targets = cfg.targets_or_default();
                    let spec = MaxMinSpec::sinr_balancing(
                        inst.build_forms(),
                        &inst.sinr_targets,
                        inst.power_budget,
                    );
                    let res = dinkelbach_maxmin(&spec, &dinkelbach_options(cfg))?;
                    for (i, lam) in res.lambda_trace.iter().enumerate() {
                        s.push_str(&format!(
                            "{},{},dinkelbach,{},{},,\n",
                            trial,
                            fmt_f64(snr),
                            i + 1,
                            fmt_f64(*lam)
                        ));
                    }
                }
                Mode::Wsr | Mode::Utility | Mode::Sweep | Mode::Collab => {
                    let utility = build_utility(cfg.utility, &weights, cfg.users())?;
                    let trace = if cfg.mode == Mode::Collab {
                        let inst = CollabInstance::with_snr(cfg.pairs, cfg.antennas, snr, seed);
                        let region =
                            collab_region(&inst, PowerMode::Individual, projection_options(cfg))?;
                        polyblock_maximize(&region, &utility, &polyblock_options(cfg))?.trace
                    } else {
                        let inst = SystemInstance::with_snr(cfg.pairs, cfg.antennas, snr, seed);
                        let region = TwrRegion::new(&inst, projection_options(cfg))?;
                        polyblock_maximize(&region, &utility, &polyblock_options(cfg))?.trace
                    };
                    for row in trace {
                        s.push_str(&format!(
                            "{},{},polyblock,{},{},{},{}\n",
                            trial,
                            fmt_f64(snr),
                            row.iteration,
                            fmt_f64(row.cbv),
                            fmt_f64(row.upper_bound),
                            row.vertices
                        ));
                    }
                }
                Mode::Mimo => {
                    let user_antennas = cfg.user_antennas_or_default();
                    let inst =
                        MimoInstance::with_snr(cfg.pairs, cfg.antennas, &user_antennas, snr, seed);
                    let opts = AlternatingOptions {
                        epsilon: cfg.eps,
                        max_outer: 30,
                        seed: seed ^ 0x99,
                        ..AlternatingOptions::default()
                    };
                    let res = alternate(&inst, &opts)?;
                    for (i, lam) in res.lambda_trace.iter().enumerate() {
                        s.push_str(&format!(
                            "{},{},alternating,{},{},,\n",
                            trial,
                            fmt_f64(snr),
                            i + 1,
                            fmt_f64(*lam)
                        ));
                    }
                }
            }
        }
    }
    Ok(s)
}

pub fn write_output(path: &std::path::Path, contents: &str) -> Result<()> {
    let mut f =
        std::fs::File::create(path).with_context(|| format!("creating {}", path.display()))?;
    f.write_all(contents.as_bytes())
        .with_context(|| format!("writing {}", path.display()))?;
    Ok(())
}

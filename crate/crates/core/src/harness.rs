//! Monte Carlo experiment engine: NMSE sweeps, iteration statistics, FLOP
//! estimates and runtime, with reproducible per-run random streams.
//!
//! Every (sweep point, run) pair draws from its own counter-derived stream of
//! a seeded ChaCha generator, and per-run records are collected in run order
//! before aggregation, so results are identical at any parallelism level.
//! Wall-clock runtime is the one field that is measured, not derived.

use std::time::Instant;

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::config::{ChannelModel, SystemConfig};
use crate::error::{Error, Result};
use crate::estimators::{
    align_pair_to_truth_lti, align_pair_to_truth_sti, align_to_truth_lti, align_to_truth_sti,
    baseline_lti, baseline_sti, check_identifiability, clairvoyant_for, hosvd_sti, tals_lti,
    tals_sti, Algorithm, ClairvoyantResult,
};
use crate::model::{
    design_ris_patterns, gen_channels, gen_imperfections, synthesize_rx, Imperfection,
    ImperfectionKind, RisPatterns,
};
use crate::types::{CMat, CVec};

/// Mean-square error of an estimate normalized by the energy of the truth.
pub fn nmse(truth: &CMat, estimate: &CMat) -> Result<f64> {
    if truth.shape() != estimate.shape() {
        return Err(Error::dims(format!(
            "nmse: shapes differ ({:?} vs {:?})",
            truth.shape(),
            estimate.shape()
        )));
    }
    let denom = truth.norm_squared();
    if denom == 0.0 {
        return Err(Error::InvalidConfig(
            "nmse: zero-norm reference".to_string(),
        ));
    }
    Ok((truth - estimate).norm_squared() / denom)
}

fn nmse_vec(truth: &CVec, estimate: &CVec) -> Result<f64> {
    let t = CMat::from_column_slice(truth.len(), 1, truth.as_slice());
    let e = CMat::from_column_slice(estimate.len(), 1, estimate.as_slice());
    nmse(&t, &e)
}

/// Asymptotic per-invocation cost with unit constants; meaningful only for
/// relative comparisons. The iterative solvers pay three pseudo-inverses per
/// sweep; the closed-form solver pays one rank-one HOSVD per RIS element.
/// The genie bound is a single sweep and the blind baseline lacks the
/// imperfection update.
pub fn flops_estimate(cfg: &SystemConfig, algorithm: Algorithm, iterations: usize) -> f64 {
    let (n, k, m, l, p) = (
        cfg.n as f64,
        cfg.k as f64,
        cfg.m as f64,
        cfg.l as f64,
        cfg.p as f64,
    );
    let iters = iterations as f64;
    match algorithm {
        Algorithm::TalsLti => iters * n * n * k * (m + l + m * l),
        Algorithm::TalsSti => iters * n * n * k * (p * m + p * l + m * l),
        Algorithm::HosvdSti => n * m * l * p,
        Algorithm::Clairvoyant => {
            if cfg.p == 1 {
                n * n * k * (m + l + m * l)
            } else {
                n * n * k * (p * m + p * l + m * l)
            }
        }
        Algorithm::Baseline => {
            if cfg.p == 1 {
                iters * n * n * k * (m + l)
            } else {
                iters * n * n * k * (p * m + p * l)
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepAxis {
    SnrDb,
    N,
    RB,
    K,
}

impl SweepAxis {
    pub fn name(&self) -> &'static str {
        match self {
            SweepAxis::SnrDb => "snr_db",
            SweepAxis::N => "n",
            SweepAxis::RB => "r_b",
            SweepAxis::K => "k",
        }
    }
}

impl std::fmt::Display for SweepAxis {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for SweepAxis {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "snr_db" => Ok(SweepAxis::SnrDb),
            "n" => Ok(SweepAxis::N),
            "r_b" => Ok(SweepAxis::RB),
            "k" => Ok(SweepAxis::K),
            other => Err(Error::InvalidConfig(format!(
                "unknown sweep axis '{other}' (expected snr_db, n, r_b or k)"
            ))),
        }
    }
}

/// One experiment: a base scenario, the swept axis and the estimators to run
/// at each point.
#[derive(Debug, Clone)]
pub struct ExperimentSpec {
    pub base: SystemConfig,
    pub sweep_axis: SweepAxis,
    pub sweep_values: Vec<f64>,
    pub algorithms: Vec<Algorithm>,
    /// Monte Carlo runs per point.
    pub runs: usize,
}

impl ExperimentSpec {
    pub fn validate(&self) -> Result<()> {
        self.base.validate()?;
        if self.sweep_values.is_empty() {
            return Err(Error::InvalidConfig("sweep_values is empty".to_string()));
        }
        let increasing = self.sweep_values.windows(2).all(|w| w[1] > w[0]);
        let decreasing = self.sweep_values.windows(2).all(|w| w[1] < w[0]);
        if self.sweep_values.len() > 1 && !increasing && !decreasing {
            return Err(Error::InvalidConfig(
                "sweep_values must be strictly monotone".to_string(),
            ));
        }
        if self.algorithms.is_empty() {
            return Err(Error::InvalidConfig("no algorithms selected".to_string()));
        }
        if self.runs == 0 {
            return Err(Error::InvalidConfig("runs must be >= 1".to_string()));
        }
        for algo in &self.algorithms {
            let needs_sti = matches!(algo, Algorithm::TalsSti | Algorithm::HosvdSti);
            if matches!(algo, Algorithm::TalsLti) && self.base.p != 1 {
                return Err(Error::InvalidConfig(
                    "tals_lti requires p = 1 (the long-term model)".to_string(),
                ));
            }
            if needs_sti && self.base.p < 1 {
                return Err(Error::InvalidConfig("p must be >= 1".to_string()));
            }
        }
        Ok(())
    }

    /// Scenario at one sweep point.
    pub fn config_at(&self, value: f64) -> Result<SystemConfig> {
        let mut cfg = self.base.clone();
        match self.sweep_axis {
            SweepAxis::SnrDb => cfg.snr_db = value,
            SweepAxis::RB => cfg.r_b = value,
            SweepAxis::N => {
                if value < 1.0 || value.fract() != 0.0 {
                    return Err(Error::InvalidConfig(format!(
                        "sweep value {value} is not a valid RIS element count"
                    )));
                }
                cfg.n = value as usize;
            }
            SweepAxis::K => {
                if value < 1.0 || value.fract() != 0.0 {
                    return Err(Error::InvalidConfig(format!(
                        "sweep value {value} is not a valid time-block count"
                    )));
                }
                cfg.k = value as usize;
            }
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

/// Aggregated statistics for one (sweep point, algorithm) cell.
#[derive(Debug, Clone, PartialEq)]
pub struct ResultRow {
    pub sweep_axis: SweepAxis,
    pub sweep_value: f64,
    pub algorithm: Algorithm,
    pub nmse_h: f64,
    pub nmse_g: f64,
    pub nmse_e: f64,
    pub mean_iterations: f64,
    pub flops: f64,
    pub runtime_s: f64,
    pub runs: usize,
    pub non_converged: usize,
}

/// A (point, algorithm) cell whose identifiability bound failed.
#[derive(Debug, Clone, PartialEq)]
pub struct SkippedPoint {
    pub sweep_value: f64,
    pub algorithm: Algorithm,
    pub required_k: usize,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct AggregateResult {
    pub rows: Vec<ResultRow>,
    pub skipped: Vec<SkippedPoint>,
}

// Stream layout for the counter-derived RNGs: data streams and per-algorithm
// estimator streams never collide.
const PURPOSE_DATA: u64 = 0;

fn stream_rng(seed: u64, purpose: u64, point: usize, run: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream((purpose << 48) | ((point as u64) << 32) | run as u64);
    rng
}

fn algo_purpose(algorithm: Algorithm) -> u64 {
    1 + Algorithm::ALL
        .iter()
        .position(|a| *a == algorithm)
        .expect("algorithm listed") as u64
}

struct RunRecord {
    nmse_h: f64,
    nmse_g: f64,
    nmse_e: f64,
    iterations: usize,
    runtime_s: f64,
    converged: bool,
}

fn truth_e_vec(imp: &Imperfection) -> &CVec {
    match imp {
        Imperfection::Lti { e, .. } => e,
        _ => unreachable!("lti truth requested for sti imperfection"),
    }
}

fn truth_e_mat(imp: &Imperfection) -> &CMat {
    match imp {
        Imperfection::Sti { e, .. } => e,
        _ => unreachable!("sti truth requested for lti imperfection"),
    }
}

fn run_single(
    cfg: &SystemConfig,
    patterns: &RisPatterns,
    algorithms: &[Algorithm],
    point: usize,
    run: usize,
) -> Result<Vec<RunRecord>> {
    let mut data_rng = stream_rng(cfg.seed, PURPOSE_DATA, point, run);
    let channels = gen_channels(cfg, &mut data_rng);
    let kind = if cfg.p == 1 {
        ImperfectionKind::Lti
    } else {
        ImperfectionKind::Sti
    };
    let imp = gen_imperfections(cfg, kind, &mut data_rng);
    let rx = synthesize_rx(cfg, &channels, patterns, &imp, &mut data_rng)?;

    let mut records = Vec::with_capacity(algorithms.len());
    for &algo in algorithms {
        let mut est_rng = stream_rng(cfg.seed, algo_purpose(algo), point, run);
        let record = match algo {
            Algorithm::TalsLti => {
                let start = Instant::now();
                let mut est = tals_lti(&rx.y, &patterns.s, cfg, &mut est_rng)?;
                let dt = start.elapsed().as_secs_f64();
                align_to_truth_lti(&mut est, &channels);
                RunRecord {
                    nmse_h: nmse(&channels.h, &est.h_hat)?,
                    nmse_g: nmse(&channels.g, &est.g_hat)?,
                    nmse_e: nmse_vec(truth_e_vec(&imp), &est.e_hat)?,
                    iterations: est.iterations,
                    runtime_s: dt,
                    converged: est.converged,
                }
            }
            Algorithm::TalsSti => {
                let start = Instant::now();
                let mut est = tals_sti(&rx.y, &patterns.s, cfg, &mut est_rng)?;
                let dt = start.elapsed().as_secs_f64();
                align_to_truth_sti(&mut est, &channels);
                RunRecord {
                    nmse_h: nmse(&channels.h, &est.h_hat)?,
                    nmse_g: nmse(&channels.g, &est.g_hat)?,
                    nmse_e: nmse(truth_e_mat(&imp), &est.e_mat_hat)?,
                    iterations: est.iterations,
                    runtime_s: dt,
                    converged: est.converged,
                }
            }
            Algorithm::HosvdSti => {
                let start = Instant::now();
                let mut est = hosvd_sti(&rx.y, &patterns.s, cfg)?;
                let dt = start.elapsed().as_secs_f64();
                align_to_truth_sti(&mut est, &channels);
                RunRecord {
                    nmse_h: nmse(&channels.h, &est.h_hat)?,
                    nmse_g: nmse(&channels.g, &est.g_hat)?,
                    nmse_e: nmse(truth_e_mat(&imp), &est.e_mat_hat)?,
                    iterations: est.iterations,
                    runtime_s: dt,
                    converged: est.converged,
                }
            }
            Algorithm::Clairvoyant => {
                let start = Instant::now();
                let res = clairvoyant_for(&rx.y, &patterns.s, &channels, &imp, cfg)?;
                let dt = start.elapsed().as_secs_f64();
                match res {
                    ClairvoyantResult::Lti(mut est) => {
                        align_to_truth_lti(&mut est, &channels);
                        RunRecord {
                            nmse_h: nmse(&channels.h, &est.h_hat)?,
                            nmse_g: nmse(&channels.g, &est.g_hat)?,
                            nmse_e: nmse_vec(truth_e_vec(&imp), &est.e_hat)?,
                            iterations: est.iterations,
                            runtime_s: dt,
                            converged: est.converged,
                        }
                    }
                    ClairvoyantResult::Sti(mut est) => {
                        align_to_truth_sti(&mut est, &channels);
                        RunRecord {
                            nmse_h: nmse(&channels.h, &est.h_hat)?,
                            nmse_g: nmse(&channels.g, &est.g_hat)?,
                            nmse_e: nmse(truth_e_mat(&imp), &est.e_mat_hat)?,
                            iterations: est.iterations,
                            runtime_s: dt,
                            converged: est.converged,
                        }
                    }
                }
            }
            Algorithm::Baseline => {
                // The imperfection-blind baseline owns only a two-factor
                // ambiguity class, so it gets the paired normalization: any
                // model mismatch stays visible in its channel estimates.
                if cfg.p == 1 {
                    let start = Instant::now();
                    let mut est = baseline_lti(&rx.y, &patterns.s, cfg, &mut est_rng)?;
                    let dt = start.elapsed().as_secs_f64();
                    align_pair_to_truth_lti(&mut est, &channels);
                    RunRecord {
                        nmse_h: nmse(&channels.h, &est.h_hat)?,
                        nmse_g: nmse(&channels.g, &est.g_hat)?,
                        nmse_e: nmse_vec(truth_e_vec(&imp), &est.e_hat)?,
                        iterations: est.iterations,
                        runtime_s: dt,
                        converged: est.converged,
                    }
                } else {
                    let start = Instant::now();
                    let mut est = baseline_sti(&rx.y, &patterns.s, cfg, &mut est_rng)?;
                    let dt = start.elapsed().as_secs_f64();
                    align_pair_to_truth_sti(&mut est, &channels);
                    RunRecord {
                        nmse_h: nmse(&channels.h, &est.h_hat)?,
                        nmse_g: nmse(&channels.g, &est.g_hat)?,
                        nmse_e: nmse(truth_e_mat(&imp), &est.e_mat_hat)?,
                        iterations: est.iterations,
                        runtime_s: dt,
                        converged: est.converged,
                    }
                }
            }
        };
        records.push(record);
    }
    Ok(records)
}

/// Executes the experiment. Channels, imperfection realizations and noise are
/// regenerated per run; the deterministic pattern matrix is rebuilt only when
/// the swept axis changes its shape. Points failing an algorithm's
/// identifiability bound are skipped for that algorithm and reported.
pub fn run_monte_carlo(spec: &ExperimentSpec) -> Result<AggregateResult> {
    spec.validate()?;
    let mut out = AggregateResult::default();

    for (point, &value) in spec.sweep_values.iter().enumerate() {
        let cfg = spec.config_at(value)?;
        let patterns = design_ris_patterns(&cfg);

        let mut active = Vec::new();
        for &algo in &spec.algorithms {
            let id = check_identifiability(&cfg, algo);
            if id.ok {
                active.push(algo);
            } else {
                out.skipped.push(SkippedPoint {
                    sweep_value: value,
                    algorithm: algo,
                    required_k: id.required_k,
                });
            }
        }
        if active.is_empty() {
            continue;
        }

        // Per-run records, collected in run order so sums are independent of
        // the worker count.
        let per_run: Result<Vec<Vec<RunRecord>>> = (0..spec.runs)
            .into_par_iter()
            .map(|run| run_single(&cfg, &patterns, &active, point, run))
            .collect();
        let per_run = per_run?;

        for (ai, &algo) in active.iter().enumerate() {
            let runs = spec.runs as f64;
            let mut row = ResultRow {
                sweep_axis: spec.sweep_axis,
                sweep_value: value,
                algorithm: algo,
                nmse_h: 0.0,
                nmse_g: 0.0,
                nmse_e: 0.0,
                mean_iterations: 0.0,
                flops: 0.0,
                runtime_s: 0.0,
                runs: spec.runs,
                non_converged: 0,
            };
            for records in &per_run {
                let r = &records[ai];
                row.nmse_h += r.nmse_h / runs;
                row.nmse_g += r.nmse_g / runs;
                row.nmse_e += r.nmse_e / runs;
                row.mean_iterations += r.iterations as f64 / runs;
                row.flops += flops_estimate(&cfg, algo, r.iterations) / runs;
                row.runtime_s += r.runtime_s / runs;
                if !r.converged {
                    row.non_converged += 1;
                }
            }
            out.rows.push(row);
        }
    }
    Ok(out)
}

fn desk(full: usize, desk: usize, desk_scale: bool) -> usize {
    if desk_scale {
        desk
    } else {
        full
    }
}

/// Named experiment presets mirroring the benchmark figures, each with a
/// desk-scale variant that shrinks the RIS size, block count and run count
/// while keeping every selected estimator identifiable.
pub fn preset(name: &str, desk_scale: bool) -> Option<ExperimentSpec> {
    let d = desk_scale;
    let snr_grid: Vec<f64> = if d {
        vec![0.0, 10.0, 20.0, 30.0]
    } else {
        vec![0.0, 5.0, 10.0, 15.0, 20.0, 25.0, 30.0]
    };
    let base = SystemConfig {
        m: 3,
        l: 2,
        r_b: 0.5,
        seed: 1,
        ..SystemConfig::default()
    };
    let spec = match name {
        // Long-term model, Rayleigh fading: NMSE against SNR.
        "fig4" => ExperimentSpec {
            base: SystemConfig {
                n: desk(20, 8, d),
                k: 20,
                p: 1,
                omega: desk(3000, 200, d),
                ..base
            },
            sweep_axis: SweepAxis::SnrDb,
            sweep_values: snr_grid,
            algorithms: vec![
                Algorithm::TalsLti,
                Algorithm::Clairvoyant,
                Algorithm::Baseline,
            ],
            runs: desk(3000, 200, d),
        },
        // Long-term model: FLOP count against the RIS size.
        "fig5" => ExperimentSpec {
            base: SystemConfig {
                n: desk(20, 16, d),
                k: 20,
                p: 1,
                snr_db: 20.0,
                omega: desk(100, 200, d),
                ..base
            },
            sweep_axis: SweepAxis::N,
            sweep_values: if d {
                vec![4.0, 8.0, 12.0, 16.0]
            } else {
                vec![20.0, 30.0, 40.0]
            },
            algorithms: vec![Algorithm::TalsLti, Algorithm::Baseline],
            runs: desk(100, 200, d),
        },
        // Short-term model, mmWave: NMSE against SNR.
        "fig6" => ExperimentSpec {
            base: SystemConfig {
                n: desk(50, 12, d),
                k: desk(50, 16, d),
                p: desk(5, 4, d),
                channel_model: ChannelModel::Mmwave,
                omega: desk(3000, 200, d),
                ..base
            },
            sweep_axis: SweepAxis::SnrDb,
            sweep_values: snr_grid,
            algorithms: vec![
                Algorithm::TalsSti,
                Algorithm::HosvdSti,
                Algorithm::Clairvoyant,
                Algorithm::Baseline,
            ],
            runs: desk(3000, 200, d),
        },
        // Short-term model: FLOP count against the RIS size.
        "fig7" => ExperimentSpec {
            base: SystemConfig {
                n: 10,
                k: desk(50, 16, d),
                p: desk(5, 4, d),
                snr_db: 20.0,
                omega: desk(100, 200, d),
                ..base
            },
            sweep_axis: SweepAxis::N,
            sweep_values: if d {
                vec![4.0, 8.0, 12.0, 16.0]
            } else {
                vec![10.0, 20.0, 30.0, 40.0, 50.0]
            },
            algorithms: vec![Algorithm::TalsSti, Algorithm::HosvdSti],
            runs: desk(100, 200, d),
        },
        // Short-term model: iteration count against SNR.
        "fig8" => ExperimentSpec {
            base: SystemConfig {
                n: desk(50, 12, d),
                k: desk(50, 16, d),
                p: desk(5, 4, d),
                omega: desk(3000, 200, d),
                ..base
            },
            sweep_axis: SweepAxis::SnrDb,
            sweep_values: snr_grid,
            algorithms: vec![Algorithm::TalsSti],
            runs: desk(3000, 200, d),
        },
        // Short-term model: average runtime against SNR.
        "fig9" => ExperimentSpec {
            base: SystemConfig {
                n: desk(50, 12, d),
                k: desk(50, 16, d),
                p: desk(5, 4, d),
                omega: desk(3000, 200, d),
                ..base
            },
            sweep_axis: SweepAxis::SnrDb,
            sweep_values: snr_grid,
            algorithms: vec![Algorithm::TalsSti, Algorithm::HosvdSti],
            runs: desk(3000, 200, d),
        },
        // Short-term model: NMSE against the RIS size at fixed SNR.
        "fig10" => ExperimentSpec {
            base: SystemConfig {
                n: 10,
                k: desk(50, 16, d),
                p: desk(5, 4, d),
                snr_db: 20.0,
                omega: desk(3000, 200, d),
                ..base
            },
            sweep_axis: SweepAxis::N,
            sweep_values: if d {
                vec![4.0, 8.0, 12.0, 16.0]
            } else {
                vec![10.0, 20.0, 30.0, 40.0, 50.0]
            },
            algorithms: vec![
                Algorithm::TalsSti,
                Algorithm::HosvdSti,
                Algorithm::Clairvoyant,
                Algorithm::Baseline,
            ],
            runs: desk(3000, 200, d),
        },
        // Short-term model: NMSE against the impairment occurrence
        // probability at fixed SNR.
        "fig11" => ExperimentSpec {
            base: SystemConfig {
                n: desk(50, 12, d),
                k: desk(50, 16, d),
                p: desk(5, 4, d),
                snr_db: 20.0,
                omega: desk(3000, 200, d),
                ..base
            },
            sweep_axis: SweepAxis::RB,
            sweep_values: if d {
                vec![0.2, 0.5, 0.8]
            } else {
                vec![0.2, 0.35, 0.5, 0.65, 0.8]
            },
            algorithms: vec![
                Algorithm::TalsSti,
                Algorithm::HosvdSti,
                Algorithm::Clairvoyant,
                Algorithm::Baseline,
            ],
            runs: desk(3000, 200, d),
        },
        _ => return None,
    };
    Some(spec)
}

pub fn preset_names() -> &'static [&'static str] {
    &[
        "fig4", "fig5", "fig6", "fig7", "fig8", "fig9", "fig10", "fig11",
    ]
}

/// All presets, full-scale or desk-scale.
pub fn sweep_presets(desk_scale: bool) -> Vec<(String, ExperimentSpec)> {
    preset_names()
        .iter()
        .map(|name| {
            (
                name.to_string(),
                preset(name, desk_scale).expect("listed preset exists"),
            )
        })
        .collect()
}

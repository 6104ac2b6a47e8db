//! Deterministic Monte Carlo campaigns over an AWGN channel.
//!
//! Every frame transmits the all-(+1) codeword. The channel noise of frame
//! `f` at a given SNR is drawn from its own ChaCha stream keyed by the
//! master seed, the SNR and `f`, and the decoder's perturbations from a
//! sibling stream. Decoders compared under one seed therefore see identical
//! channel samples, and results do not depend on how frames are scheduled
//! across workers.
//!
//! Frames are decoded in fixed-size batches in parallel, then accumulated
//! strictly in frame order; the campaign stops at the exact frame that
//! reaches the error target.

use std::fmt::Write as _;
use std::path::PathBuf;
use std::time::{Duration, Instant};

use rand::SeedableRng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::analysis::{convergence_error, f_max};
use crate::bipolar::BipolarVector;
use crate::channel::{ebn0_to_sigma, transmit};
use crate::code::ParityCheckCode;
use crate::decoder::{DecodeResult, FrameRng};
use crate::strategy::{DecoderSpec, Parameter, PreparedDecoder, StrategyError};

/// Frames decoded per parallel batch. Fixed so that the set of decoded
/// frames never depends on the worker count.
pub const BATCH_FRAMES: u64 = 64;

/// Two-sided 95% normal quantile.
const Z95: f64 = 1.959_963_984_540_054;

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error(transparent)]
    Decoder(#[from] StrategyError),
    #[error("the SNR list is empty")]
    NoSnrPoints,
    #[error("frame budget must be at least 1")]
    ZeroFrames,
    #[error("no parameter override for {ebn0_db} dB although the schedule lists overrides")]
    MissingOverride { ebn0_db: f64 },
    #[error("saturation magnitude {0} must be positive")]
    InvalidSaturation(f64),
    #[error("sweep grid is empty")]
    EmptyGrid,
    #[error("failed to build worker pool: {0}")]
    Pool(String),
    #[error(transparent)]
    Analysis(#[from] crate::analysis::AnalysisError),
}

/// Parameter values that replace the decoder's at one SNR point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SnrOverride {
    pub ebn0_db: f64,
    #[serde(default)]
    pub theta: Option<f64>,
    #[serde(default)]
    pub lambda: Option<f64>,
    #[serde(default)]
    pub eta: Option<f64>,
}

impl SnrOverride {
    fn apply(&self, spec: &DecoderSpec) -> Result<DecoderSpec, StrategyError> {
        let mut out = spec.clone();
        for (p, v) in [
            (Parameter::Theta, self.theta),
            (Parameter::Lambda, self.lambda),
            (Parameter::Eta, self.eta),
        ] {
            if let Some(v) = v {
                out = out.with_parameter(p, v)?;
            }
        }
        Ok(out)
    }
}

fn default_error_target() -> Option<u64> {
    Some(100)
}

fn default_y_max() -> f64 {
    2.5
}

/// A simulation campaign, read from JSON.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CampaignConfig {
    /// Alist file of the code; absent selects the bundled 504x1008 code.
    /// The command-line tool resolves relative paths against the directory
    /// of the config file.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub code: Option<PathBuf>,
    pub decoder: DecoderSpec,
    pub ebn0_db: Vec<f64>,
    /// Per-SNR parameter schedule. When non-empty, every SNR point needs
    /// an entry.
    #[serde(default)]
    pub overrides: Vec<SnrOverride>,
    /// Frame budget per SNR point.
    pub max_frames: u64,
    /// Stop an SNR point after this many frame errors; `null` disables.
    #[serde(default = "default_error_target")]
    pub target_frame_errors: Option<u64>,
    #[serde(default)]
    pub seed: u64,
    /// Saturation magnitude of the floating-point bit-flip decoders.
    #[serde(default = "default_y_max")]
    pub y_max: f64,
    /// Output path for results, used by the command-line tool.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<PathBuf>,
}

impl CampaignConfig {
    pub fn new(decoder: DecoderSpec, ebn0_db: Vec<f64>, max_frames: u64, seed: u64) -> Self {
        Self {
            code: None,
            decoder,
            ebn0_db,
            overrides: Vec::new(),
            max_frames,
            target_frame_errors: default_error_target(),
            seed,
            y_max: default_y_max(),
            output: None,
        }
    }

    pub fn validate(&self) -> Result<(), HarnessError> {
        if self.ebn0_db.is_empty() {
            return Err(HarnessError::NoSnrPoints);
        }
        if self.max_frames == 0 {
            return Err(HarnessError::ZeroFrames);
        }
        if !(self.y_max > 0.0) {
            return Err(HarnessError::InvalidSaturation(self.y_max));
        }
        for &snr in &self.ebn0_db {
            self.decoder_at(snr)?.validate()?;
        }
        Ok(())
    }

    /// The decoder with any override for `ebn0_db` applied.
    pub fn decoder_at(&self, ebn0_db: f64) -> Result<DecoderSpec, HarnessError> {
        if self.overrides.is_empty() {
            return Ok(self.decoder.clone());
        }
        let o = self
            .overrides
            .iter()
            .find(|o| (o.ebn0_db - ebn0_db).abs() < 1e-9)
            .ok_or(HarnessError::MissingOverride { ebn0_db })?;
        Ok(o.apply(&self.decoder)?)
    }
}

/// Wilson score interval at 95% for `successes` out of `trials`.
pub fn wilson_interval(successes: u64, trials: u64) -> (f64, f64) {
    if trials == 0 {
        return (0.0, 1.0);
    }
    let n = trials as f64;
    let p = successes as f64 / n;
    let z2 = Z95 * Z95;
    let denom = 1.0 + z2 / n;
    let center = (p + z2 / (2.0 * n)) / denom;
    let half = Z95 / denom * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt();
    // the bounds are exactly 0 and 1 at the extremes
    let lo = if successes == 0 {
        0.0
    } else {
        (center - half).max(0.0)
    };
    let hi = if successes == trials {
        1.0
    } else {
        (center + half).min(1.0)
    };
    (lo, hi)
}

/// Accumulated results at one SNR point.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SnrStats {
    pub ebn0_db: f64,
    pub sigma: f64,
    pub frames: u64,
    pub bit_errors: u64,
    pub frame_errors: u64,
    pub ber: f64,
    pub fer: f64,
    pub total_iterations: u64,
    pub avg_iters: f64,
    /// Frames that ran into the smoothing window.
    pub smoothing_engaged: u64,
    pub smooth_frac: f64,
    /// 95% Wilson interval of the BER over all transmitted bits.
    pub ber_ci: (f64, f64),
    /// 95% Wilson interval of the FER.
    pub fer_ci: (f64, f64),
    /// Elapsed time; not serialized, so outputs stay reproducible.
    #[serde(skip)]
    pub wall_time: Duration,
}

/// Equality ignores wall time.
impl PartialEq for SnrStats {
    fn eq(&self, other: &Self) -> bool {
        let (a, b) = (self, other);
        (
            a.ebn0_db,
            a.sigma,
            a.frames,
            a.bit_errors,
            a.frame_errors,
            a.total_iterations,
            a.smoothing_engaged,
        ) == (
            b.ebn0_db,
            b.sigma,
            b.frames,
            b.bit_errors,
            b.frame_errors,
            b.total_iterations,
            b.smoothing_engaged,
        ) && (a.ber, a.fer, a.avg_iters, a.smooth_frac, a.ber_ci, a.fer_ci)
            == (b.ber, b.fer, b.avg_iters, b.smooth_frac, b.ber_ci, b.fer_ci)
    }
}

/// Results of a campaign.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CampaignStats {
    pub decoder: DecoderSpec,
    pub n: usize,
    pub seed: u64,
    pub points: Vec<SnrStats>,
}

impl CampaignStats {
    /// One row per SNR point: `ebn0_db, frames, bit_errors, frame_errors,
    /// ber, fer, avg_iters, smooth_frac, ci_low, ci_high` (BER interval).
    pub fn to_csv(&self) -> String {
        let mut out = String::from(
            "ebn0_db,frames,bit_errors,frame_errors,ber,fer,avg_iters,smooth_frac,ci_low,ci_high\n",
        );
        for p in &self.points {
            writeln!(
                out,
                "{},{},{},{},{:e},{:e},{},{},{:e},{:e}",
                p.ebn0_db,
                p.frames,
                p.bit_errors,
                p.frame_errors,
                p.ber,
                p.fer,
                p.avg_iters,
                p.smooth_frac,
                p.ber_ci.0,
                p.ber_ci.1
            )
            .unwrap();
        }
        out
    }
}

/// Random streams of one frame.
pub struct FrameStreams {
    pub channel: FrameRng,
    pub decoder: FrameRng,
}

/// Channel and decoder streams for frame `frame` at `ebn0_db`.
pub fn frame_streams(seed: u64, ebn0_db: f64, frame: u64) -> FrameStreams {
    // SNR in milli-dB, offset into 16 bits
    let snr_key = (((ebn0_db * 1000.0).round() as i64 + 32_768) as u64) & 0xFFFF;
    let base = (snr_key << 48) | (frame << 1);
    let mut channel = FrameRng::seed_from_u64(seed);
    channel.set_stream(base);
    let mut decoder = FrameRng::seed_from_u64(seed);
    decoder.set_stream(base | 1);
    FrameStreams { channel, decoder }
}

/// Channel samples of frame `frame`: the all-(+1) word plus noise.
pub fn frame_samples(n: usize, sigma: f64, streams: &mut FrameStreams) -> Vec<f64> {
    transmit(&BipolarVector::ones(n), sigma, &mut streams.channel)
}

#[derive(Debug, Clone, Copy)]
struct FrameOutcome {
    bit_errors: u64,
    iterations: u64,
    smoothing_engaged: bool,
}

fn bit_errors(r: &DecodeResult) -> u64 {
    r.decisions.weight() as u64
}

fn run_point(
    decoder: &PreparedDecoder<'_>,
    n: usize,
    ebn0_db: f64,
    sigma: f64,
    config: &CampaignConfig,
) -> SnrStats {
    let start = Instant::now();
    let mut stats = SnrStats {
        ebn0_db,
        sigma,
        frames: 0,
        bit_errors: 0,
        frame_errors: 0,
        ber: 0.0,
        fer: 0.0,
        total_iterations: 0,
        avg_iters: 0.0,
        smoothing_engaged: 0,
        smooth_frac: 0.0,
        ber_ci: (0.0, 1.0),
        fer_ci: (0.0, 1.0),
        wall_time: Duration::ZERO,
    };
    let target = config.target_frame_errors.unwrap_or(u64::MAX);
    let mut next = 0u64;
    'outer: while next < config.max_frames {
        let end = (next + BATCH_FRAMES).min(config.max_frames);
        let outcomes: Vec<FrameOutcome> = (next..end)
            .into_par_iter()
            .map(|f| {
                let mut streams = frame_streams(config.seed, ebn0_db, f);
                let y = frame_samples(n, sigma, &mut streams);
                let r = decoder.decode(&y, sigma, config.y_max, &mut streams.decoder, false);
                FrameOutcome {
                    bit_errors: bit_errors(&r),
                    iterations: r.iterations as u64,
                    smoothing_engaged: r.smoothing_engaged,
                }
            })
            .collect();
        for o in outcomes {
            stats.frames += 1;
            stats.bit_errors += o.bit_errors;
            stats.frame_errors += u64::from(o.bit_errors > 0);
            stats.total_iterations += o.iterations;
            stats.smoothing_engaged += u64::from(o.smoothing_engaged);
            if stats.frame_errors >= target {
                break 'outer;
            }
        }
        next = end;
    }
    let frames = stats.frames as f64;
    let bits = stats.frames * n as u64;
    stats.ber = stats.bit_errors as f64 / bits as f64;
    stats.fer = stats.frame_errors as f64 / frames;
    stats.avg_iters = stats.total_iterations as f64 / frames;
    stats.smooth_frac = stats.smoothing_engaged as f64 / frames;
    stats.ber_ci = wilson_interval(stats.bit_errors, bits);
    stats.fer_ci = wilson_interval(stats.frame_errors, stats.frames);
    stats.wall_time = start.elapsed();
    stats
}

fn with_workers<T: Send>(
    workers: Option<usize>,
    job: impl FnOnce() -> T + Send,
) -> Result<T, HarnessError> {
    match workers {
        None => Ok(job()),
        Some(w) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(w.max(1))
                .build()
                .map_err(|e| HarnessError::Pool(e.to_string()))?;
            Ok(pool.install(job))
        }
    }
}

/// Runs every SNR point of `config` on `code`. `workers` sets the number of
/// parallel frame workers; `None` uses the global pool.
pub fn run_campaign(
    code: &ParityCheckCode,
    config: &CampaignConfig,
    workers: Option<usize>,
) -> Result<CampaignStats, HarnessError> {
    config.validate()?;
    let rate = code.rate_f64();
    let mut points = Vec::with_capacity(config.ebn0_db.len());
    for &snr in &config.ebn0_db {
        let spec = config.decoder_at(snr)?;
        let decoder = spec.prepare(code)?;
        let sigma = ebn0_to_sigma(snr, rate);
        points.push(with_workers(workers, || {
            run_point(&decoder, code.n(), snr, sigma, config)
        })?);
    }
    Ok(CampaignStats {
        decoder: config.decoder.clone(),
        n: code.n(),
        seed: config.seed,
        points,
    })
}

/// One campaign per grid value of `parameter`, all with the same seed. The
/// swept value takes precedence over schedule overrides.
pub fn run_sweep(
    code: &ParityCheckCode,
    config: &CampaignConfig,
    parameter: Parameter,
    grid: &[f64],
    workers: Option<usize>,
) -> Result<Vec<(f64, CampaignStats)>, HarnessError> {
    if grid.is_empty() {
        return Err(HarnessError::EmptyGrid);
    }
    grid.iter()
        .map(|&value| {
            let mut cfg = config.clone();
            cfg.decoder = cfg.decoder.with_parameter(parameter, value)?;
            for o in &mut cfg.overrides {
                match parameter {
                    Parameter::Theta => o.theta = None,
                    Parameter::Lambda => o.lambda = None,
                    Parameter::Eta => o.eta = None,
                }
            }
            Ok((value, run_campaign(code, &cfg, workers)?))
        })
        .collect()
}

/// Sweep results as CSV: the swept value followed by the campaign columns.
pub fn sweep_to_csv(parameter: Parameter, results: &[(f64, CampaignStats)]) -> String {
    let mut out = String::new();
    for (idx, (value, stats)) in results.iter().enumerate() {
        let csv = stats.to_csv();
        let mut lines = csv.lines();
        let header = lines.next().unwrap_or_default();
        if idx == 0 {
            writeln!(out, "{},{header}", parameter.name()).unwrap();
        }
        for line in lines {
            writeln!(out, "{value},{line}").unwrap();
        }
    }
    out
}

/// Convergence error of one decoder over a set of frames.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceReport {
    pub decoder: DecoderSpec,
    pub frames: usize,
    /// Mean of `f(x(T)) - f_max`.
    pub epsilon: f64,
    /// Frames that did not end on the transmitted codeword.
    pub frame_errors: usize,
}

/// Decodes the same `frames` channel frames with every decoder and reports
/// the convergence error of each.
pub fn run_convergence(
    code: &ParityCheckCode,
    decoders: &[DecoderSpec],
    ebn0_db: f64,
    frames: u64,
    seed: u64,
    y_max: f64,
    workers: Option<usize>,
) -> Result<Vec<ConvergenceReport>, HarnessError> {
    if frames == 0 {
        return Err(HarnessError::ZeroFrames);
    }
    let sigma = ebn0_to_sigma(ebn0_db, code.rate_f64());
    let ones = BipolarVector::ones(code.n());
    decoders
        .iter()
        .map(|spec| {
            let dec = spec.prepare(code)?;
            let per_frame: Vec<(f64, f64, bool)> = with_workers(workers, || {
                (0..frames)
                    .into_par_iter()
                    .map(|f| {
                        let mut streams = frame_streams(seed, ebn0_db, f);
                        let y = frame_samples(code.n(), sigma, &mut streams);
                        let r = dec.decode(&y, sigma, y_max, &mut streams.decoder, false);
                        let seen = dec.observed_samples(&y, y_max);
                        (
                            r.final_objective,
                            f_max(code.m(), &ones, &seen),
                            r.decisions.weight() > 0,
                        )
                    })
                    .collect()
            })?;
            let finals: Vec<f64> = per_frame.iter().map(|p| p.0).collect();
            let maxes: Vec<f64> = per_frame.iter().map(|p| p.1).collect();
            Ok(ConvergenceReport {
                decoder: spec.clone(),
                frames: per_frame.len(),
                epsilon: convergence_error(&finals, &maxes)?,
                frame_errors: per_frame.iter().filter(|p| p.2).count(),
            })
        })
        .collect()
}

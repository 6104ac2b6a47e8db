//! Noisy GDBF: perturbation sources, parameters, the quantized threshold
//! adaptation table and the quantized M-NGDBF datapath.
//!
//! The floating-point noisy strategies reuse the steppers in [`crate::gdbf`]
//! with a [`PerturbationSource`] attached.

use std::fmt::Write as _;

use num_rational::Ratio;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::channel::QuantizerSpec;
use crate::code::ParityCheckCode;
use crate::decoder::{objective_with_syndrome, DecoderState, FrameRng, Stepper};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum NgdbfError {
    #[error("initial threshold {0} must be negative")]
    NonNegativeTheta(f64),
    #[error("adaptation parameter {0} is outside (0, 1]")]
    InvalidLambda(f64),
    #[error("noise scale {0} is outside [0, 1]")]
    InvalidEta(f64),
    #[error("syndrome weight {0} must be positive")]
    InvalidWeight(f64),
    #[error("smoothing window {window} exceeds the iteration limit {max_iterations}")]
    WindowTooLong {
        window: usize,
        max_iterations: usize,
    },
    #[error("iteration limit must be at least 1")]
    ZeroIterations,
}

/// How per-symbol perturbations are generated each iteration.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum NoisePolicy {
    /// `n` fresh Gaussian draws per iteration.
    #[default]
    PerSymbolIndependent,
    /// One Gaussian draw per iteration shifted along a chain of `n` cells;
    /// the chain is filled with `n` draws on first use.
    ShiftChain,
    /// I.i.d. uniform draws with the same variance as the Gaussian.
    Uniform,
}

/// Per-frame generator of the perturbations `q_k(t)`.
#[derive(Debug, Clone)]
pub struct PerturbationSource {
    policy: NoisePolicy,
    std: f64,
    chain: Vec<f64>,
    head: usize,
    primed: bool,
}

impl PerturbationSource {
    /// Source for `n` symbols with standard deviation `eta * sigma_channel`.
    pub fn new(n: usize, sigma_channel: f64, eta: f64, policy: NoisePolicy) -> Self {
        Self {
            policy,
            std: eta * sigma_channel,
            chain: if policy == NoisePolicy::ShiftChain {
                vec![0.0; n]
            } else {
                Vec::new()
            },
            head: 0,
            primed: false,
        }
    }

    pub fn std(&self) -> f64 {
        self.std
    }

    pub fn policy(&self) -> NoisePolicy {
        self.policy
    }

    /// Writes this iteration's perturbations into `out`.
    pub fn fill<R: Rng + ?Sized>(&mut self, rng: &mut R, out: &mut [f64]) {
        match self.policy {
            NoisePolicy::PerSymbolIndependent => {
                for q in out.iter_mut() {
                    let z: f64 = rng.sample(StandardNormal);
                    *q = self.std * z;
                }
            }
            NoisePolicy::Uniform => {
                let a = 3f64.sqrt() * self.std;
                for q in out.iter_mut() {
                    *q = a * (2.0 * rng.random::<f64>() - 1.0);
                }
            }
            NoisePolicy::ShiftChain => {
                let n = self.chain.len();
                assert_eq!(out.len(), n, "perturbation buffer length must equal n");
                if n == 0 {
                    return;
                }
                if self.primed {
                    self.head = (self.head + n - 1) % n;
                    let z: f64 = rng.sample(StandardNormal);
                    self.chain[self.head] = self.std * z;
                } else {
                    for c in self.chain.iter_mut() {
                        let z: f64 = rng.sample(StandardNormal);
                        *c = self.std * z;
                    }
                    self.primed = true;
                }
                let (back, front) = self.chain.split_at(self.head);
                out[..front.len()].copy_from_slice(front);
                out[front.len()..].copy_from_slice(back);
            }
        }
    }
}

/// `E_k = x_k y_k + w sum_{i in M(k)} s_i + q_k`.
pub fn inversion_ngdbf(x_k: i8, y_k: f64, syndromes: &[i8], w: f64, q_k: f64) -> f64 {
    let sum: i32 = syndromes.iter().map(|&s| i32::from(s)).sum();
    f64::from(x_k) * y_k + w * f64::from(sum) + q_k
}

fn default_w() -> f64 {
    0.75
}

fn default_lambda() -> f64 {
    1.0
}

/// Parameters of the adaptive multi-bit noisy decoders.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NgdbfParams {
    /// Initial threshold, negative.
    pub theta: f64,
    /// Threshold adaptation factor in `(0, 1]`; 1 disables adaptation.
    #[serde(default = "default_lambda")]
    pub lambda: f64,
    /// Perturbation standard deviation relative to the channel's.
    pub eta: f64,
    /// Syndrome weight.
    #[serde(default = "default_w")]
    pub w: f64,
    /// Number of final iterations accumulated for output smoothing.
    #[serde(default)]
    pub smoothing_window: Option<usize>,
    /// Perturbation policy; decoders pick their own default when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub noise_policy: Option<NoisePolicy>,
    pub max_iterations: usize,
}

impl NgdbfParams {
    /// Checks the parameter ranges. `eta = 0` is accepted and yields the
    /// noiseless decoder.
    pub fn validate(&self) -> Result<(), NgdbfError> {
        if !(self.theta < 0.0) {
            return Err(NgdbfError::NonNegativeTheta(self.theta));
        }
        if !(self.lambda > 0.0 && self.lambda <= 1.0) {
            return Err(NgdbfError::InvalidLambda(self.lambda));
        }
        if !(0.0..=1.0).contains(&self.eta) {
            return Err(NgdbfError::InvalidEta(self.eta));
        }
        if !(self.w > 0.0 && self.w.is_finite()) {
            return Err(NgdbfError::InvalidWeight(self.w));
        }
        if self.max_iterations == 0 {
            return Err(NgdbfError::ZeroIterations);
        }
        if let Some(window) = self.smoothing_window {
            if window > self.max_iterations {
                return Err(NgdbfError::WindowTooLong {
                    window,
                    max_iterations: self.max_iterations,
                });
            }
        }
        Ok(())
    }

    /// Perturbation source for one frame, or `None` when `eta = 0`.
    /// `fallback` applies when no policy is configured.
    pub fn perturbation(
        &self,
        n: usize,
        sigma_channel: f64,
        fallback: NoisePolicy,
    ) -> Option<PerturbationSource> {
        let policy = self.noise_policy.unwrap_or(fallback);
        (self.eta > 0.0).then(|| PerturbationSource::new(n, sigma_channel, self.eta, policy))
    }
}

/// A quantized threshold and the non-flip count at which it takes effect.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AdaptationEvent {
    /// Threshold level in half-step units.
    pub theta_units: i32,
    /// Threshold level as a real value.
    pub theta: f64,
    pub tau: u32,
}

/// Precomputed threshold schedule `theta_k(u) = g(theta lambda^u)`.
///
/// Events are ordered by `tau`; the first has `tau = 0` and thresholds rise
/// strictly toward zero.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AdaptationTable {
    events: Vec<AdaptationEvent>,
}

impl AdaptationTable {
    pub fn events(&self) -> &[AdaptationEvent] {
        &self.events
    }

    /// Index of the event active after `u` non-flip iterations.
    pub fn event_at(&self, u: u32) -> usize {
        self.events.partition_point(|e| e.tau <= u) - 1
    }

    /// Threshold (half-step units) active after `u` non-flip iterations.
    pub fn threshold_units(&self, u: u32) -> i32 {
        self.events[self.event_at(u)].theta_units
    }

    /// CSV with columns `i,theta_level,tau`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("i,theta_level,tau\n");
        for (i, e) in self.events.iter().enumerate() {
            writeln!(out, "{i},{},{}", e.theta, e.tau).unwrap();
        }
        out
    }
}

/// Scans `u = 0..=t_max` and records every change of `g(theta lambda^u)`.
pub fn build_adaptation_table(
    theta: f64,
    lambda: f64,
    quantizer: &QuantizerSpec,
    t_max: u32,
) -> Result<AdaptationTable, NgdbfError> {
    if !(theta < 0.0) {
        return Err(NgdbfError::NonNegativeTheta(theta));
    }
    if !(lambda > 0.0 && lambda <= 1.0) {
        return Err(NgdbfError::InvalidLambda(lambda));
    }
    let mut events: Vec<AdaptationEvent> = Vec::new();
    let mut level = theta;
    for u in 0..=t_max {
        let units = quantizer.quantize_units(level);
        if events.last().is_none_or(|e| e.theta_units != units) {
            events.push(AdaptationEvent {
                theta_units: units,
                theta: quantizer.units_to_value(units),
                tau: u,
            });
        }
        level *= lambda;
    }
    Ok(AdaptationTable { events })
}

/// Arithmetic used for the quantized inversion comparison.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Datapath {
    /// `x y + w S + q` compared against `theta`.
    #[default]
    Direct,
    /// Every term divided by `w`, so the syndrome sum enters unweighted.
    PreScaled,
}

/// `sign(E - theta)` of the direct quantized inversion, `sign(0) = +1`.
/// All quantities are in half-step units.
#[inline]
pub fn flip_decision_direct(
    x_k: i8,
    y_units: i32,
    syndrome_sum: i32,
    w_units: i32,
    q_units: i32,
    theta_units: i32,
) -> i8 {
    let e = i32::from(x_k) * y_units + w_units * syndrome_sum + q_units;
    if e - theta_units >= 0 {
        1
    } else {
        -1
    }
}

/// `sign(E/w - theta/w)` with every term pre-scaled by `1/w`, evaluated in
/// exact rational arithmetic.
pub fn flip_decision_prescaled(
    x_k: i8,
    y_units: i32,
    syndrome_sum: i32,
    w_units: i32,
    q_units: i32,
    theta_units: i32,
) -> i8 {
    let w = i64::from(w_units);
    let y = Ratio::new(i64::from(y_units), w);
    let q = Ratio::new(i64::from(q_units), w);
    let theta = Ratio::new(i64::from(theta_units), w);
    let e = y * i64::from(x_k) + Ratio::from_integer(i64::from(syndrome_sum)) + q;
    if e >= theta {
        1
    } else {
        -1
    }
}

/// Quantized adaptive M-NGDBF.
///
/// Each symbol keeps a non-flip counter `u_k`; its threshold is looked up in
/// the adaptation table. `delta_k >= 0` increments `u_k`, otherwise the bit
/// flips.
#[derive(Debug, Clone)]
pub struct QuantizedStepper {
    quantizer: QuantizerSpec,
    y_units: Vec<i32>,
    y_values: Vec<f64>,
    w_units: i32,
    table: AdaptationTable,
    datapath: Datapath,
    noise: Option<PerturbationSource>,
    window: Option<usize>,
    q: Vec<f64>,
    flips: Vec<usize>,
}

impl QuantizedStepper {
    /// `y` holds raw channel samples; they are quantized here.
    pub fn new(
        y: &[f64],
        quantizer: QuantizerSpec,
        w: f64,
        table: AdaptationTable,
        datapath: Datapath,
        noise: Option<PerturbationSource>,
        window: Option<usize>,
    ) -> Result<Self, NgdbfError> {
        if !(w > 0.0) {
            return Err(NgdbfError::InvalidWeight(w));
        }
        let w_units = quantizer.quantize_units(w);
        let y_units: Vec<i32> = y.iter().map(|&v| quantizer.quantize_units(v)).collect();
        let y_values = y_units
            .iter()
            .map(|&u| quantizer.units_to_value(u))
            .collect();
        Ok(Self {
            quantizer,
            q: if noise.is_some() {
                vec![0.0; y.len()]
            } else {
                Vec::new()
            },
            y_units,
            y_values,
            w_units,
            table,
            datapath,
            noise,
            window,
            flips: Vec::new(),
        })
    }

    /// Quantized samples as real values, for initializing decisions.
    pub fn quantized_samples(&self) -> &[f64] {
        &self.y_values
    }

    /// Symbols flipped by the most recent step.
    pub fn last_flips(&self) -> &[usize] {
        &self.flips
    }
}

impl Stepper for QuantizedStepper {
    fn step(&mut self, code: &ParityCheckCode, state: &mut DecoderState, rng: &mut FrameRng) {
        if let Some(src) = self.noise.as_mut() {
            src.fill(rng, &mut self.q);
        }
        let decide = match self.datapath {
            Datapath::Direct => flip_decision_direct,
            Datapath::PreScaled => flip_decision_prescaled,
        };
        self.flips.clear();
        for k in 0..state.n() {
            let q_units = if self.q.is_empty() {
                0
            } else {
                self.quantizer.quantize_units(self.q[k])
            };
            let theta_units = self.table.threshold_units(state.u[k]);
            let delta = decide(
                state.x[k],
                self.y_units[k],
                state.syndrome_sum(code, k),
                self.w_units,
                q_units,
                theta_units,
            );
            if delta >= 0 {
                state.u[k] += 1;
            } else {
                self.flips.push(k);
            }
        }
        state.flip_all(code, &self.flips);
    }

    fn objective(&self, state: &DecoderState) -> f64 {
        objective_with_syndrome(&state.x, &state.s, &self.y_values)
    }

    fn smoothing_window(&self) -> Option<usize> {
        self.window
    }
}

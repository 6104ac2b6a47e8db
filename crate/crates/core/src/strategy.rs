//! Configurable decoder variants and per-frame dispatch.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::channel::{saturate, QuantizerSpec};
use crate::code::ParityCheckCode;
use crate::decoder::{decode, DecodeResult, DecoderState, FrameRng};
use crate::gdbf::{AdaptiveThresholdStepper, ModeSwitchStepper, SingleBitStepper};
use crate::minsum::MinSumDecoder;
use crate::ngdbf::{
    build_adaptation_table, AdaptationTable, Datapath, NgdbfError, NgdbfParams, NoisePolicy,
    QuantizedStepper,
};

/// Default smoothing window of SM-NGDBF.
pub const DEFAULT_SMOOTHING_WINDOW: usize = 64;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum StrategyError {
    #[error(transparent)]
    Params(#[from] NgdbfError),
    #[error("iteration limit must be at least 1")]
    ZeroIterations,
    #[error("threshold {0} must be negative")]
    NonNegativeTheta(f64),
    #[error("adaptation parameter {0} is outside (0, 1]")]
    InvalidLambda(f64),
    #[error("noise scale {0} is outside [0, 1]")]
    InvalidEta(f64),
    #[error("syndrome weight {0} must be positive")]
    InvalidWeight(f64),
    #[error("decoder `{decoder}` has no parameter `{parameter}`")]
    NoSuchParameter {
        decoder: &'static str,
        parameter: &'static str,
    },
}

fn yes() -> bool {
    true
}

fn default_w() -> f64 {
    0.75
}

/// A decoder and its parameters, tagged by `kind` in JSON.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum DecoderSpec {
    /// Single-bit GDBF.
    SGdbf { max_iterations: usize },
    /// Multi-bit GDBF with a fixed threshold, optionally mode switching.
    MGdbf {
        theta: f64,
        #[serde(default = "yes")]
        mode_switch: bool,
        max_iterations: usize,
    },
    /// Multi-bit GDBF with per-symbol adaptive thresholds.
    AtGdbf {
        theta: f64,
        lambda: f64,
        max_iterations: usize,
    },
    /// Single-bit noisy GDBF.
    SNgdbf {
        #[serde(default = "default_w")]
        w: f64,
        eta: f64,
        #[serde(default)]
        noise_policy: NoisePolicy,
        max_iterations: usize,
    },
    /// Adaptive multi-bit noisy GDBF.
    MNgdbf {
        #[serde(flatten)]
        params: NgdbfParams,
    },
    /// Adaptive multi-bit noisy GDBF with output smoothing.
    SmNgdbf {
        #[serde(flatten)]
        params: NgdbfParams,
    },
    /// Adaptive multi-bit noisy GDBF on quantized samples.
    QuantizedMNgdbf {
        #[serde(flatten)]
        params: NgdbfParams,
        quantizer: QuantizerSpec,
        #[serde(default)]
        datapath: Datapath,
    },
    /// Strict flooding min-sum.
    MinSum { max_iterations: usize },
}

/// A tunable decoder parameter.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Parameter {
    Theta,
    Lambda,
    Eta,
}

impl Parameter {
    pub fn name(self) -> &'static str {
        match self {
            Parameter::Theta => "theta",
            Parameter::Lambda => "lambda",
            Parameter::Eta => "eta",
        }
    }
}

impl DecoderSpec {
    pub fn name(&self) -> &'static str {
        match self {
            DecoderSpec::SGdbf { .. } => "s-gdbf",
            DecoderSpec::MGdbf { .. } => "m-gdbf",
            DecoderSpec::AtGdbf { .. } => "at-gdbf",
            DecoderSpec::SNgdbf { .. } => "s-ngdbf",
            DecoderSpec::MNgdbf { .. } => "m-ngdbf",
            DecoderSpec::SmNgdbf { .. } => "sm-ngdbf",
            DecoderSpec::QuantizedMNgdbf { .. } => "quantized-m-ngdbf",
            DecoderSpec::MinSum { .. } => "min-sum",
        }
    }

    pub fn max_iterations(&self) -> usize {
        match self {
            DecoderSpec::SGdbf { max_iterations }
            | DecoderSpec::MGdbf { max_iterations, .. }
            | DecoderSpec::AtGdbf { max_iterations, .. }
            | DecoderSpec::SNgdbf { max_iterations, .. }
            | DecoderSpec::MinSum { max_iterations } => *max_iterations,
            DecoderSpec::MNgdbf { params }
            | DecoderSpec::SmNgdbf { params }
            | DecoderSpec::QuantizedMNgdbf { params, .. } => params.max_iterations,
        }
    }

    /// Length of the output smoothing window, if any.
    pub fn smoothing_window(&self) -> Option<usize> {
        match self {
            DecoderSpec::MNgdbf { params } | DecoderSpec::QuantizedMNgdbf { params, .. } => {
                params.smoothing_window
            }
            DecoderSpec::SmNgdbf { params } => Some(
                params
                    .smoothing_window
                    .unwrap_or(DEFAULT_SMOOTHING_WINDOW)
                    .min(params.max_iterations),
            ),
            _ => None,
        }
    }

    pub fn validate(&self) -> Result<(), StrategyError> {
        if self.max_iterations() == 0 {
            return Err(StrategyError::ZeroIterations);
        }
        match self {
            DecoderSpec::SGdbf { .. } | DecoderSpec::MinSum { .. } => {}
            DecoderSpec::MGdbf { theta, .. } => {
                if !(*theta < 0.0) {
                    return Err(StrategyError::NonNegativeTheta(*theta));
                }
            }
            DecoderSpec::AtGdbf { theta, lambda, .. } => {
                if !(*theta < 0.0) {
                    return Err(StrategyError::NonNegativeTheta(*theta));
                }
                if !(*lambda > 0.0 && *lambda <= 1.0) {
                    return Err(StrategyError::InvalidLambda(*lambda));
                }
            }
            DecoderSpec::SNgdbf { w, eta, .. } => {
                if !(0.0..=1.0).contains(eta) {
                    return Err(StrategyError::InvalidEta(*eta));
                }
                if !(*w > 0.0 && w.is_finite()) {
                    return Err(StrategyError::InvalidWeight(*w));
                }
            }
            DecoderSpec::MNgdbf { params } | DecoderSpec::QuantizedMNgdbf { params, .. } => {
                params.validate()?
            }
            DecoderSpec::SmNgdbf { params } => NgdbfParams {
                smoothing_window: self.smoothing_window(),
                ..*params
            }
            .validate()?,
        }
        Ok(())
    }

    /// Returns a copy with `parameter` set to `value`.
    pub fn with_parameter(&self, parameter: Parameter, value: f64) -> Result<Self, StrategyError> {
        let mut out = self.clone();
        let slot: Option<&mut f64> = match (&mut out, parameter) {
            (DecoderSpec::MGdbf { theta, .. }, Parameter::Theta)
            | (DecoderSpec::AtGdbf { theta, .. }, Parameter::Theta) => Some(theta),
            (DecoderSpec::AtGdbf { lambda, .. }, Parameter::Lambda) => Some(lambda),
            (DecoderSpec::SNgdbf { eta, .. }, Parameter::Eta) => Some(eta),
            (DecoderSpec::MNgdbf { params }, p)
            | (DecoderSpec::SmNgdbf { params }, p)
            | (DecoderSpec::QuantizedMNgdbf { params, .. }, p) => Some(match p {
                Parameter::Theta => &mut params.theta,
                Parameter::Lambda => &mut params.lambda,
                Parameter::Eta => &mut params.eta,
            }),
            _ => None,
        };
        match slot {
            Some(v) => {
                *v = value;
                Ok(out)
            }
            None => Err(StrategyError::NoSuchParameter {
                decoder: self.name(),
                parameter: parameter.name(),
            }),
        }
    }

    /// Validates the spec and precomputes per-campaign data.
    pub fn prepare<'a>(
        &self,
        code: &'a ParityCheckCode,
    ) -> Result<PreparedDecoder<'a>, StrategyError> {
        self.validate()?;
        let table = match self {
            DecoderSpec::QuantizedMNgdbf {
                params, quantizer, ..
            } => Some(build_adaptation_table(
                params.theta,
                params.lambda,
                quantizer,
                params.max_iterations as u32,
            )?),
            _ => None,
        };
        let minsum = matches!(self, DecoderSpec::MinSum { .. }).then(|| MinSumDecoder::new(code));
        Ok(PreparedDecoder {
            spec: self.clone(),
            code,
            table,
            minsum,
        })
    }
}

/// A validated decoder bound to a code, ready to decode frames.
#[derive(Debug, Clone)]
pub struct PreparedDecoder<'a> {
    spec: DecoderSpec,
    code: &'a ParityCheckCode,
    table: Option<AdaptationTable>,
    minsum: Option<MinSumDecoder<'a>>,
}

impl PreparedDecoder<'_> {
    pub fn spec(&self) -> &DecoderSpec {
        &self.spec
    }

    /// The samples this decoder's objective is evaluated on: raw for
    /// min-sum, quantized for the quantized decoder, otherwise saturated at
    /// `y_max`.
    pub fn observed_samples(&self, y: &[f64], y_max: f64) -> Vec<f64> {
        match &self.spec {
            DecoderSpec::MinSum { .. } => y.to_vec(),
            DecoderSpec::QuantizedMNgdbf { quantizer, .. } => {
                y.iter().map(|&v| quantizer.quantize(v)).collect()
            }
            _ => y.iter().map(|&v| saturate(v, y_max)).collect(),
        }
    }

    /// Decodes one frame of raw channel samples.
    ///
    /// `sigma` is the channel noise deviation that scales perturbations;
    /// `y_max` saturates the samples of floating-point bit-flip decoders.
    pub fn decode(
        &self,
        y: &[f64],
        sigma: f64,
        y_max: f64,
        rng: &mut FrameRng,
        trace: bool,
    ) -> DecodeResult {
        let code = self.code;
        let n = code.n();
        let t_max = self.spec.max_iterations();
        if let Some(ms) = &self.minsum {
            return ms.decode(y, t_max, trace);
        }
        let ys = self.observed_samples(y, y_max);
        match &self.spec {
            DecoderSpec::SGdbf { .. } => {
                let state = DecoderState::from_samples(code, &ys, 0.0);
                decode(
                    code,
                    &mut SingleBitStepper::gdbf(ys),
                    state,
                    t_max,
                    rng,
                    trace,
                )
            }
            DecoderSpec::MGdbf {
                theta, mode_switch, ..
            } => {
                let state = DecoderState::from_samples(code, &ys, *theta);
                let mut stepper = ModeSwitchStepper::new(ys, *theta, *mode_switch);
                decode(code, &mut stepper, state, t_max, rng, trace)
            }
            DecoderSpec::AtGdbf { theta, lambda, .. } => {
                let state = DecoderState::from_samples(code, &ys, *theta);
                decode(
                    code,
                    &mut AdaptiveThresholdStepper::gdbf(ys, *lambda),
                    state,
                    t_max,
                    rng,
                    trace,
                )
            }
            DecoderSpec::SNgdbf {
                w,
                eta,
                noise_policy,
                ..
            } => {
                let state = DecoderState::from_samples(code, &ys, 0.0);
                let noise = (*eta > 0.0)
                    .then(|| crate::ngdbf::PerturbationSource::new(n, sigma, *eta, *noise_policy));
                decode(
                    code,
                    &mut SingleBitStepper::noisy(ys, *w, noise),
                    state,
                    t_max,
                    rng,
                    trace,
                )
            }
            DecoderSpec::MNgdbf { params } | DecoderSpec::SmNgdbf { params } => {
                let state = DecoderState::from_samples(code, &ys, params.theta);
                let noise = params.perturbation(n, sigma, NoisePolicy::PerSymbolIndependent);
                let mut stepper = AdaptiveThresholdStepper::noisy(
                    ys,
                    params.w,
                    params.lambda,
                    noise,
                    self.spec.smoothing_window(),
                );
                decode(code, &mut stepper, state, t_max, rng, trace)
            }
            DecoderSpec::QuantizedMNgdbf {
                params,
                quantizer,
                datapath,
            } => {
                let table = self
                    .table
                    .clone()
                    .expect("table is built for quantized decoders");
                let noise = params.perturbation(n, sigma, NoisePolicy::ShiftChain);
                let mut stepper = QuantizedStepper::new(
                    y,
                    *quantizer,
                    params.w,
                    table,
                    *datapath,
                    noise,
                    params.smoothing_window,
                )
                .expect("weight validated");
                let state =
                    DecoderState::from_samples(code, stepper.quantized_samples(), params.theta);
                decode(code, &mut stepper, state, t_max, rng, trace)
            }
            DecoderSpec::MinSum { .. } => unreachable!("handled above"),
        }
    }
}

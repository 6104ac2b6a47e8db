//! The decode loop shared by every bit-flipping strategy.
//!
//! A strategy only supplies the per-iteration transition ([`Stepper`]); the
//! loop owns the stopping rule, iteration accounting, output smoothing and
//! objective tracing.

use serde::{Deserialize, Serialize};

use crate::bipolar::{sign, BipolarVector};
use crate::code::ParityCheckCode;

/// Per-frame random stream. Every frame gets its own, derived from the
/// campaign seed, so results do not depend on scheduling.
pub type FrameRng = rand_chacha::ChaCha8Rng;

/// Mutable decoding state of one frame.
#[derive(Debug, Clone, PartialEq)]
pub struct DecoderState {
    /// Current decisions x(t).
    pub x: Vec<i8>,
    /// Syndrome of `x`, kept in sync after every step.
    pub s: Vec<i8>,
    /// Number of unsatisfied checks in `s`.
    pub unsatisfied: usize,
    /// Iterations executed so far.
    pub t: usize,
    /// Per-symbol inversion thresholds (floating-point datapath).
    pub thetas: Vec<f64>,
    /// Per-symbol non-flip counters.
    pub u: Vec<u32>,
    /// Per-symbol smoothing accumulators.
    pub smooth: Vec<i32>,
    /// Multi-bit mode flag; once cleared it stays cleared.
    pub multi_mode: bool,
    /// Objective of the previous iterate, used by mode switching.
    pub prev_objective: f64,
}

impl DecoderState {
    /// Hard decisions from channel samples, `sign(0) = +1`.
    pub fn from_samples(code: &ParityCheckCode, samples: &[f64], theta: f64) -> Self {
        Self::from_decisions(code, samples.iter().map(|&y| sign(y)).collect(), theta)
    }

    pub fn from_decisions(code: &ParityCheckCode, x: Vec<i8>, theta: f64) -> Self {
        assert_eq!(x.len(), code.n(), "sample vector length must equal n");
        let mut s = vec![1i8; code.m()];
        code.syndrome_into(&x, &mut s);
        let unsatisfied = s.iter().filter(|&&v| v < 0).count();
        let n = x.len();
        Self {
            x,
            s,
            unsatisfied,
            t: 0,
            thetas: vec![theta; n],
            u: vec![0; n],
            smooth: vec![0; n],
            multi_mode: true,
            prev_objective: f64::NAN,
        }
    }

    pub fn n(&self) -> usize {
        self.x.len()
    }

    /// Sum of the syndromes adjacent to symbol `k`.
    #[inline]
    pub fn syndrome_sum(&self, code: &ParityCheckCode, k: usize) -> i32 {
        code.checks_of(k)
            .iter()
            .map(|&i| i32::from(self.s[i]))
            .sum()
    }

    /// Flips symbol `k` and negates its adjacent syndromes.
    #[inline]
    pub fn flip(&mut self, code: &ParityCheckCode, k: usize) {
        self.x[k] = -self.x[k];
        for &i in code.checks_of(k) {
            self.s[i] = -self.s[i];
            if self.s[i] < 0 {
                self.unsatisfied += 1;
            } else {
                self.unsatisfied -= 1;
            }
        }
    }

    /// Flips a set of symbols chosen from the same pre-step snapshot.
    /// Syndrome negations commute, so applying them one by one is exact.
    pub fn flip_all(&mut self, code: &ParityCheckCode, ks: &[usize]) {
        for &k in ks {
            self.flip(code, k);
        }
    }

    pub fn is_codeword(&self) -> bool {
        self.unsatisfied == 0
    }

    /// Accumulates the current decisions into the smoothing counters.
    pub fn update_smoothing(&mut self) {
        for (acc, &xk) in self.smooth.iter_mut().zip(&self.x) {
            *acc += i32::from(xk);
        }
    }

    /// `sign(X_k)` per symbol, falling back to `x_k` when `X_k = 0`.
    pub fn terminal_smoothed_decision(&self) -> BipolarVector {
        BipolarVector::from_trusted(
            self.smooth
                .iter()
                .zip(&self.x)
                .map(|(&acc, &xk)| match acc.signum() {
                    0 => xk,
                    s => s as i8,
                })
                .collect(),
        )
    }
}

/// `f(x) = sum_k x_k y_k + sum_i s_i`.
pub fn objective(code: &ParityCheckCode, x: &[i8], y: &[f64]) -> f64 {
    assert_eq!(x.len(), y.len());
    let correlation: f64 = x.iter().zip(y).map(|(&xk, &yk)| f64::from(xk) * yk).sum();
    let mut s = vec![1i8; code.m()];
    code.syndrome_into(x, &mut s);
    correlation + s.iter().map(|&v| f64::from(v)).sum::<f64>()
}

/// Objective from an already known syndrome vector.
pub(crate) fn objective_with_syndrome(x: &[i8], s: &[i8], y: &[f64]) -> f64 {
    let correlation: f64 = x.iter().zip(y).map(|(&xk, &yk)| f64::from(xk) * yk).sum();
    correlation + s.iter().map(|&v| f64::from(v)).sum::<f64>()
}

/// Outcome of decoding one frame.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecodeResult {
    /// The stopping rule was met within the iteration limit.
    pub success: bool,
    /// Number of executed iterations.
    pub iterations: usize,
    /// Output decisions: `x` on success, otherwise the strategy's terminal
    /// decision (smoothed for smoothing strategies).
    pub decisions: BipolarVector,
    /// Objective of the raw decisions `x` when decoding stopped.
    pub final_objective: f64,
    /// `f(x(t))` for `t = 0..=iterations`, when tracing was requested.
    pub objective_trace: Option<Vec<f64>>,
    /// The smoothing window was reached.
    pub smoothing_engaged: bool,
}

/// One iteration of a bit-flipping strategy.
pub trait Stepper {
    /// Performs the transition `x(t) -> x(t+1)`. Must keep `state.s`
    /// consistent with `state.x` (use [`DecoderState::flip`]).
    fn step(&mut self, code: &ParityCheckCode, state: &mut DecoderState, rng: &mut FrameRng);

    /// Objective of the current decisions on the samples this strategy sees.
    fn objective(&self, state: &DecoderState) -> f64;

    /// Length of the output smoothing window, if smoothing is used.
    fn smoothing_window(&self) -> Option<usize> {
        None
    }
}

/// Runs `stepper` until the stopping rule holds or `max_iterations` steps
/// have been executed.
///
/// The stopping rule is evaluated before every step, so a frame whose
/// initial decisions already form a codeword returns after zero iterations.
/// Smoothing counters accumulate `x(t)` for `t > T - W`.
pub fn decode(
    code: &ParityCheckCode,
    stepper: &mut dyn Stepper,
    mut state: DecoderState,
    max_iterations: usize,
    rng: &mut FrameRng,
    trace: bool,
) -> DecodeResult {
    assert!(max_iterations >= 1, "iteration limit must be at least 1");
    let window = stepper.smoothing_window().map(|w| w.min(max_iterations));
    let smoothing_start = window.map(|w| max_iterations - w);
    let mut objective_trace = trace.then(|| vec![stepper.objective(&state)]);

    while !state.is_codeword() && state.t < max_iterations {
        stepper.step(code, &mut state, rng);
        state.t += 1;
        if smoothing_start.is_some_and(|start| state.t > start) {
            state.update_smoothing();
        }
        if let Some(tr) = objective_trace.as_mut() {
            tr.push(stepper.objective(&state));
        }
    }

    let success = state.is_codeword();
    let smoothing_engaged = smoothing_start.is_some_and(|start| state.t > start);
    let final_objective = match &objective_trace {
        Some(tr) => *tr.last().unwrap(),
        None => stepper.objective(&state),
    };
    let decisions = if !success && window.is_some() {
        state.terminal_smoothed_decision()
    } else {
        BipolarVector::from_trusted(state.x.clone())
    };
    DecodeResult {
        success,
        iterations: state.t,
        decisions,
        final_objective,
        objective_trace,
        smoothing_engaged,
    }
}

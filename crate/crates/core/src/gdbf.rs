//! Gradient-descent bit flipping on floating-point samples.
//!
//! The steppers here cover S-GDBF, mode-switching M-GDBF and AT-GDBF. With a
//! [`PerturbationSource`] and a syndrome weight they also run the noisy
//! variants (S-NGDBF, M-NGDBF, SM-NGDBF); the flip rules are identical.
//!
//! Every iteration computes all inversion values from the syndromes as they
//! stood at the start of the iteration, then applies the flips.

use crate::code::ParityCheckCode;
use crate::decoder::{objective_with_syndrome, DecoderState, FrameRng, Stepper};
use crate::ngdbf::PerturbationSource;

/// `E_k = x_k y_k + sum_{i in M(k)} s_i`.
pub fn inversion_gdbf(x_k: i8, y_k: f64, syndromes: &[i8]) -> f64 {
    let sum: i32 = syndromes.iter().map(|&s| i32::from(s)).sum();
    f64::from(x_k) * y_k + f64::from(sum)
}

/// Index of the smallest value; ties go to the lowest index.
pub fn argmin_lowest(values: &[f64]) -> usize {
    let mut best = 0;
    for (k, &v) in values.iter().enumerate().skip(1) {
        if v < values[best] {
            best = k;
        }
    }
    best
}

/// Weighted, optionally perturbed inversion values for every symbol:
/// `E_k = x_k y_k + w S_k + q_k`.
fn fill_inversions(
    code: &ParityCheckCode,
    state: &DecoderState,
    y: &[f64],
    w: f64,
    noise: Option<&[f64]>,
    out: &mut [f64],
) {
    for (k, e) in out.iter_mut().enumerate() {
        let s = f64::from(state.syndrome_sum(code, k));
        *e = f64::from(state.x[k]) * y[k] + w * s;
    }
    if let Some(q) = noise {
        for (e, &qk) in out.iter_mut().zip(q) {
            *e += qk;
        }
    }
}

/// Shared inversion machinery: samples, weight, optional perturbation.
#[derive(Debug, Clone)]
struct Inversion {
    y: Vec<f64>,
    w: f64,
    noise: Option<PerturbationSource>,
    q: Vec<f64>,
    e: Vec<f64>,
}

impl Inversion {
    fn new(y: Vec<f64>, w: f64, noise: Option<PerturbationSource>) -> Self {
        let n = y.len();
        Self {
            y,
            w,
            q: if noise.is_some() {
                vec![0.0; n]
            } else {
                Vec::new()
            },
            noise,
            e: vec![0.0; n],
        }
    }

    fn compute(&mut self, code: &ParityCheckCode, state: &DecoderState, rng: &mut FrameRng) {
        let q = match self.noise.as_mut() {
            Some(src) => {
                src.fill(rng, &mut self.q);
                Some(self.q.as_slice())
            }
            None => None,
        };
        fill_inversions(code, state, &self.y, self.w, q, &mut self.e);
    }
}

/// Single-bit flipping: flip the global minimizer of `E_k`.
///
/// With `w = 1` and no perturbation this is S-GDBF; otherwise S-NGDBF.
#[derive(Debug, Clone)]
pub struct SingleBitStepper {
    inv: Inversion,
}

impl SingleBitStepper {
    pub fn gdbf(y: Vec<f64>) -> Self {
        Self {
            inv: Inversion::new(y, 1.0, None),
        }
    }

    pub fn noisy(y: Vec<f64>, w: f64, noise: Option<PerturbationSource>) -> Self {
        Self {
            inv: Inversion::new(y, w, noise),
        }
    }

    /// Inversion values computed by the most recent step.
    pub fn last_inversions(&self) -> &[f64] {
        &self.inv.e
    }
}

impl Stepper for SingleBitStepper {
    fn step(&mut self, code: &ParityCheckCode, state: &mut DecoderState, rng: &mut FrameRng) {
        self.inv.compute(code, state, rng);
        let k = argmin_lowest(&self.inv.e);
        state.flip(code, k);
    }

    fn objective(&self, state: &DecoderState) -> f64 {
        objective_with_syndrome(&state.x, &state.s, &self.inv.y)
    }
}

/// Multi-bit GDBF with optional mode switching.
///
/// While in multi-bit mode every symbol with `E_k < theta` flips. With
/// switching enabled, the first iteration that lowers the objective drops
/// the decoder into single-bit mode for the rest of the frame.
#[derive(Debug, Clone)]
pub struct ModeSwitchStepper {
    inv: Inversion,
    theta: f64,
    switching: bool,
    flips: Vec<usize>,
}

impl ModeSwitchStepper {
    pub fn new(y: Vec<f64>, theta: f64, switching: bool) -> Self {
        Self {
            inv: Inversion::new(y, 1.0, None),
            theta,
            switching,
            flips: Vec::new(),
        }
    }
}

impl Stepper for ModeSwitchStepper {
    fn step(&mut self, code: &ParityCheckCode, state: &mut DecoderState, rng: &mut FrameRng) {
        if state.prev_objective.is_nan() {
            state.prev_objective = self.objective(state);
        }
        self.inv.compute(code, state, rng);
        if state.multi_mode {
            self.flips.clear();
            self.flips.extend(
                self.inv
                    .e
                    .iter()
                    .enumerate()
                    .filter(|(_, &e)| e < self.theta)
                    .map(|(k, _)| k),
            );
            state.flip_all(code, &self.flips);
        } else {
            let k = argmin_lowest(&self.inv.e);
            state.flip(code, k);
        }
        let f = self.objective(state);
        if self.switching && f < state.prev_objective {
            state.multi_mode = false;
        }
        state.prev_objective = f;
    }

    fn objective(&self, state: &DecoderState) -> f64 {
        objective_with_syndrome(&state.x, &state.s, &self.inv.y)
    }
}

/// Multi-bit flipping with per-symbol adaptive thresholds.
///
/// For each symbol: if `E_k < theta_k` the bit flips and `theta_k` is kept,
/// otherwise `theta_k <- lambda * theta_k`. Noiseless with `w = 1` this is
/// AT-GDBF; with a perturbation source it is M-NGDBF, and with a smoothing
/// window SM-NGDBF.
#[derive(Debug, Clone)]
pub struct AdaptiveThresholdStepper {
    inv: Inversion,
    lambda: f64,
    window: Option<usize>,
    flips: Vec<usize>,
}

impl AdaptiveThresholdStepper {
    pub fn gdbf(y: Vec<f64>, lambda: f64) -> Self {
        Self::noisy(y, 1.0, lambda, None, None)
    }

    pub fn noisy(
        y: Vec<f64>,
        w: f64,
        lambda: f64,
        noise: Option<PerturbationSource>,
        window: Option<usize>,
    ) -> Self {
        Self {
            inv: Inversion::new(y, w, noise),
            lambda,
            window,
            flips: Vec::new(),
        }
    }

    /// Symbols flipped by the most recent step.
    pub fn last_flips(&self) -> &[usize] {
        &self.flips
    }
}

impl Stepper for AdaptiveThresholdStepper {
    fn step(&mut self, code: &ParityCheckCode, state: &mut DecoderState, rng: &mut FrameRng) {
        self.inv.compute(code, state, rng);
        self.flips.clear();
        for (k, (&e, theta)) in self.inv.e.iter().zip(state.thetas.iter_mut()).enumerate() {
            if e < *theta {
                self.flips.push(k);
            } else {
                *theta *= self.lambda;
            }
        }
        state.flip_all(code, &self.flips);
    }

    fn objective(&self, state: &DecoderState) -> f64 {
        objective_with_syndrome(&state.x, &state.s, &self.inv.y)
    }

    fn smoothing_window(&self) -> Option<usize> {
        self.window
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::decoder::tests::tiny;
    use crate::decoder::{decode, objective};
    use rand::{Rng, SeedableRng};

    #[test]
    fn inversion_examples() {
        assert!((inversion_gdbf(1, 0.8, &[1, 1, 1]) - 3.8).abs() < 1e-12);
        assert!((inversion_gdbf(-1, 0.8, &[-1, -1, -1]) + 3.8).abs() < 1e-12);
        let y = -0.7;
        assert!((inversion_gdbf(-1, y, &[1, 1, 1]) - (y.abs() + 3.0)).abs() < 1e-12);
    }

    #[test]
    fn argmin_ties_go_low() {
        assert_eq!(argmin_lowest(&[2.1, -0.5, 0.3]), 1);
        assert_eq!(argmin_lowest(&[-0.5, -0.5, 1.0]), 0);
    }

    #[test]
    fn single_flip_raises_objective_by_twice_inversion() {
        let code = tiny();
        let mut rng = FrameRng::seed_from_u64(4);
        for _ in 0..500 {
            let y: Vec<f64> = (0..6).map(|_| rng.random_range(-2.0..2.0)).collect();
            let x: Vec<i8> = (0..6)
                .map(|_| if rng.random::<bool>() { 1 } else { -1 })
                .collect();
            let st = DecoderState::from_decisions(&code, x.clone(), -0.5);
            if st.is_codeword() {
                continue;
            }
            let mut stepper = SingleBitStepper::gdbf(y.clone());
            let before = objective(&code, &st.x, &y);
            let mut after_state = st.clone();
            stepper.step(&code, &mut after_state, &mut rng);
            let emin = stepper
                .last_inversions()
                .iter()
                .cloned()
                .fold(f64::INFINITY, f64::min);
            let after = objective(&code, &after_state.x, &y);
            assert!((after - before + 2.0 * emin).abs() < 1e-9);
            if emin < 0.0 {
                assert!(after > before);
            }
            assert_eq!(
                after_state.s,
                code.syndrome(&crate::BipolarVector::new(after_state.x.clone()).unwrap())
                    .unwrap()
                    .into_inner()
            );
        }
    }

    #[test]
    fn multi_flip_uses_snapshot() {
        let code = tiny();
        // symbols 0 and 1 share check 0; both negative and wrong
        let y = vec![-0.2, -0.1, 1.0, 1.0, 1.0, 1.0];
        let mut st = DecoderState::from_samples(&code, &y, -0.9);
        let mut stepper = ModeSwitchStepper::new(y.clone(), -0.9, true);
        let mut rng = FrameRng::seed_from_u64(0);
        // E = (0.2 - 1 + ... ) computed before any flip
        let e0: Vec<f64> = (0..6)
            .map(|k| {
                let syn: Vec<i8> = code.checks_of(k).iter().map(|&i| st.s[i]).collect();
                inversion_gdbf(st.x[k], y[k], &syn)
            })
            .collect();
        let expect: Vec<usize> = (0..6).filter(|&k| e0[k] < -0.9).collect();
        let x0 = st.x.clone();
        stepper.step(&code, &mut st, &mut rng);
        let flipped: Vec<usize> = (0..6).filter(|&k| st.x[k] != x0[k]).collect();
        assert_eq!(flipped, expect);
    }

    #[test]
    fn threshold_flip_and_adaptation() {
        let code = tiny();
        // all checks satisfied except via symbol 0
        let y = vec![-0.05, 1.0, 1.0, 1.0, 1.0, 1.0];
        let mut st = DecoderState::from_samples(&code, &y, -0.9);
        let mut rng = FrameRng::seed_from_u64(0);
        let mut stepper = AdaptiveThresholdStepper::gdbf(y.clone(), 0.99);
        stepper.step(&code, &mut st, &mut rng);
        // symbol 0: E = 0.05 - 2 < -0.9 flips, theta kept
        assert_eq!(stepper.last_flips(), &[0]);
        assert_eq!(st.thetas[0], -0.9);
        assert!((st.thetas[1] - (-0.891)).abs() < 1e-12);
        assert!(st.is_codeword());
    }

    #[test]
    fn mode_switch_is_permanent() {
        let code = tiny();
        let mut rng = FrameRng::seed_from_u64(1);
        for _ in 0..300 {
            let y: Vec<f64> = (0..6).map(|_| rng.random_range(-1.5..1.5)).collect();
            let mut st = DecoderState::from_samples(&code, &y, -0.3);
            let mut stepper = ModeSwitchStepper::new(y.clone(), -0.3, true);
            let mut seen_single = false;
            for _ in 0..10 {
                let before = stepper.objective(&st);
                let was_multi = st.multi_mode;
                stepper.step(&code, &mut st, &mut rng);
                let after = stepper.objective(&st);
                if seen_single {
                    assert!(!st.multi_mode);
                }
                if was_multi && after < before {
                    assert!(!st.multi_mode);
                }
                seen_single |= !st.multi_mode;
            }
        }
    }

    #[test]
    fn overshooting_multi_flip_switches_mode() {
        let code = tiny();
        // every check fails; the three degree-2 symbols pass theta = -0.5 and
        // flipping them together lowers f
        let y = vec![-0.6; 6];
        let mut st = DecoderState::from_samples(&code, &y, -0.5);
        let mut stepper = ModeSwitchStepper::new(y.clone(), -0.5, true);
        let mut rng = FrameRng::seed_from_u64(0);
        let f0 = stepper.objective(&st);
        stepper.step(&code, &mut st, &mut rng);
        let f1 = stepper.objective(&st);
        assert!(f1 < f0, "{f0} -> {f1}");
        assert!(!st.multi_mode);
        let x1 = st.x.clone();
        stepper.step(&code, &mut st, &mut rng);
        assert_eq!(st.x.iter().zip(&x1).filter(|(a, b)| a != b).count(), 1);
    }

    #[test]
    fn thresholds_shrink_in_magnitude() {
        let code = tiny();
        let mut rng = FrameRng::seed_from_u64(2);
        let y: Vec<f64> = (0..6).map(|_| rng.random_range(-1.5..1.5)).collect();
        let mut st = DecoderState::from_samples(&code, &y, -0.9);
        let mut stepper = AdaptiveThresholdStepper::gdbf(y, 0.95);
        for _ in 0..20 {
            let before = st.thetas.clone();
            stepper.step(&code, &mut st, &mut rng);
            for (a, b) in st.thetas.iter().zip(&before) {
                assert!(a.abs() <= b.abs());
            }
        }
    }

    #[test]
    fn unit_lambda_matches_fixed_threshold_multi_flip() {
        let code = tiny();
        let mut rng = FrameRng::seed_from_u64(8);
        for _ in 0..200 {
            let y: Vec<f64> = (0..6).map(|_| rng.random_range(-1.5..1.5)).collect();
            let a = decode(
                &code,
                &mut AdaptiveThresholdStepper::gdbf(y.clone(), 1.0),
                DecoderState::from_samples(&code, &y, -0.4),
                20,
                &mut rng.clone(),
                true,
            );
            let b = decode(
                &code,
                &mut ModeSwitchStepper::new(y.clone(), -0.4, false),
                DecoderState::from_samples(&code, &y, -0.4),
                20,
                &mut rng.clone(),
                true,
            );
            assert_eq!(a, b);
        }
    }
}

//! BPSK over AWGN, SNR conversions, saturation and the uniform quantizer.

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::bipolar::BipolarVector;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ChannelError {
    #[error("code rate {0} is outside (0, 1)")]
    InvalidRate(f64),
    #[error("E_b/N_0 {0} dB is not finite")]
    InvalidSnr(f64),
    #[error("saturation magnitude {0} must be positive")]
    InvalidSaturation(f64),
    #[error("quantizer precision {0} bits is outside 1..=16")]
    InvalidPrecision(u32),
}

/// Noise standard deviation for unit-energy BPSK: `sigma^2 = N0/2`,
/// `Eb/N0 = 1 / (2 * rate * sigma^2)`.
pub fn ebn0_to_sigma(ebn0_db: f64, rate: f64) -> f64 {
    (2.0 * rate * 10f64.powf(ebn0_db / 10.0)).powf(-0.5)
}

/// Inverse of [`ebn0_to_sigma`].
pub fn sigma_to_ebn0(sigma: f64, rate: f64) -> f64 {
    10.0 * (1.0 / (2.0 * rate * sigma * sigma)).log10()
}

/// Channel operating point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChannelParams {
    pub ebn0_db: f64,
    pub rate: f64,
    pub sigma: f64,
    pub y_max: f64,
}

impl ChannelParams {
    pub fn new(ebn0_db: f64, rate: f64, y_max: f64) -> Result<Self, ChannelError> {
        if !(rate > 0.0 && rate < 1.0) {
            return Err(ChannelError::InvalidRate(rate));
        }
        if !ebn0_db.is_finite() {
            return Err(ChannelError::InvalidSnr(ebn0_db));
        }
        if !(y_max > 0.0) {
            return Err(ChannelError::InvalidSaturation(y_max));
        }
        Ok(Self {
            ebn0_db,
            rate,
            sigma: ebn0_to_sigma(ebn0_db, rate),
            y_max,
        })
    }

    /// Noise spectral density `N0 = 2 sigma^2`.
    pub fn n0(&self) -> f64 {
        2.0 * self.sigma * self.sigma
    }
}

/// Adds i.i.d. zero-mean Gaussian noise of standard deviation `sigma`.
///
/// Gaussian variates come from the ziggurat sampler in `rand_distr`.
pub fn transmit<R: Rng + ?Sized>(c: &BipolarVector, sigma: f64, rng: &mut R) -> Vec<f64> {
    c.as_slice()
        .iter()
        .map(|&ck| {
            let z: f64 = rng.sample(StandardNormal);
            f64::from(ck) + sigma * z
        })
        .collect()
}

/// Clamps a sample to `[-y_max, y_max]`.
#[inline]
pub fn saturate(y: f64, y_max: f64) -> f64 {
    y.clamp(-y_max, y_max)
}

/// Uniform mid-rise quantizer with `2^Q` levels on `[-Y_max, Y_max]`.
///
/// Levels sit at odd multiples of half a step, so zero is never produced.
/// Quantized values are carried as signed odd integers counting half-steps
/// (`level = units * step / 2`), which keeps quantized arithmetic exact.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "QuantizerConfig", into = "QuantizerConfig")]
pub struct QuantizerSpec {
    q_bits: u32,
    n_levels: u32,
    y_max: f64,
    step: f64,
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
struct QuantizerConfig {
    q_bits: u32,
    y_max: f64,
}

impl TryFrom<QuantizerConfig> for QuantizerSpec {
    type Error = ChannelError;
    fn try_from(c: QuantizerConfig) -> Result<Self, Self::Error> {
        Self::new(c.q_bits, c.y_max)
    }
}

impl From<QuantizerSpec> for QuantizerConfig {
    fn from(q: QuantizerSpec) -> Self {
        Self {
            q_bits: q.q_bits,
            y_max: q.y_max,
        }
    }
}

impl QuantizerSpec {
    pub fn new(q_bits: u32, y_max: f64) -> Result<Self, ChannelError> {
        if !(1..=16).contains(&q_bits) {
            return Err(ChannelError::InvalidPrecision(q_bits));
        }
        if !(y_max > 0.0 && y_max.is_finite()) {
            return Err(ChannelError::InvalidSaturation(y_max));
        }
        let n_levels = 1u32 << q_bits;
        Ok(Self {
            q_bits,
            n_levels,
            y_max,
            step: 2.0 * y_max / f64::from(n_levels),
        })
    }

    pub fn q_bits(&self) -> u32 {
        self.q_bits
    }

    pub fn n_levels(&self) -> u32 {
        self.n_levels
    }

    pub fn y_max(&self) -> f64 {
        self.y_max
    }

    pub fn step(&self) -> f64 {
        self.step
    }

    /// Largest representable magnitude in half-step units.
    pub fn max_units(&self) -> i32 {
        self.n_levels as i32 - 1
    }

    /// Quantizes `y` to half-step units (an odd integer).
    ///
    /// The bin index `floor(|y| N_Q / (2 Y_max))` is clamped to `N_Q/2 - 1`,
    /// which applies saturation at `Y_max`. `sign(0)` is taken as +1.
    pub fn quantize_units(&self, y: f64) -> i32 {
        let bin = (y.abs() * f64::from(self.n_levels) / (2.0 * self.y_max)).floor();
        let top = f64::from(self.n_levels / 2 - 1);
        let bin = if bin.is_nan() { top } else { bin.min(top) } as i32;
        let mag = 2 * bin + 1;
        if y < 0.0 {
            -mag
        } else {
            mag
        }
    }

    /// Real value of a level given in half-step units.
    pub fn units_to_value(&self, units: i32) -> f64 {
        f64::from(units) * self.step / 2.0
    }

    /// `g(y)`: the quantized real value of `y`.
    pub fn quantize(&self, y: f64) -> f64 {
        self.units_to_value(self.quantize_units(y))
    }

    /// All levels in ascending order.
    pub fn levels(&self) -> Vec<f64> {
        (0..self.n_levels as i32)
            .map(|i| self.units_to_value(2 * i + 1 - self.n_levels as i32))
            .collect()
    }

    /// Lower and upper boundaries of the bin around ascending level `i`.
    /// With `saturated_tails`, the outermost bins extend to infinity.
    pub fn bin_edges(&self, i: usize, saturated_tails: bool) -> (f64, f64) {
        let lo = i as f64 * self.step - self.y_max;
        let hi = lo + self.step;
        let last = self.n_levels as usize - 1;
        let lo = if saturated_tails && i == 0 {
            f64::NEG_INFINITY
        } else {
            lo
        };
        let hi = if saturated_tails && i == last {
            f64::INFINITY
        } else {
            hi
        };
        (lo, hi)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn sigma_conversion_anchors() {
        assert_abs_diff_eq!(ebn0_to_sigma(3.5, 0.5), 0.668, epsilon = 1e-3);
        assert_abs_diff_eq!(ebn0_to_sigma(0.0, 0.5), 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(ebn0_to_sigma(5.0, 0.9356), 0.4112, epsilon = 5e-4);
    }

    #[test]
    fn params_validation() {
        assert!(ChannelParams::new(3.0, 1.0, 2.5).is_err());
        assert!(ChannelParams::new(f64::NAN, 0.5, 2.5).is_err());
        assert!(ChannelParams::new(3.0, 0.5, 0.0).is_err());
        let p = ChannelParams::new(0.0, 0.5, 2.5).unwrap();
        assert_abs_diff_eq!(p.n0(), 2.0, epsilon = 1e-12);
    }

    #[test]
    fn quantizer_anchors() {
        let q4 = QuantizerSpec::new(4, 2.5).unwrap();
        assert_eq!(q4.quantize(0.4), 0.46875);
        assert_eq!(q4.quantize(-3.0), -2.34375);
        let q3 = QuantizerSpec::new(3, 2.5).unwrap();
        assert_eq!(q3.quantize(-0.9), -0.9375);
        assert_eq!(q3.quantize(0.0), q3.step() / 2.0);
        assert!(QuantizerSpec::new(0, 1.0).is_err());
        assert!(QuantizerSpec::new(3, -1.0).is_err());
    }

    #[test]
    fn level_set() {
        let q = QuantizerSpec::new(3, 2.5).unwrap();
        let levels = q.levels();
        assert_eq!(levels.len(), 8);
        assert_eq!(levels[0], -2.1875);
        assert_eq!(levels[7], 2.1875);
        assert!(levels.iter().all(|&v| v != 0.0));
        assert_eq!(q.bin_edges(0, true).0, f64::NEG_INFINITY);
        assert_eq!(q.bin_edges(3, true), (-0.625, 0.0));
    }

    #[test]
    fn zero_noise_is_identity() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let c = BipolarVector::new(vec![1, -1, 1, -1]).unwrap();
        let y = transmit(&c, 0.0, &mut rng);
        assert_eq!(y, vec![1.0, -1.0, 1.0, -1.0]);
    }

    #[test]
    fn transmit_is_reproducible() {
        let c = BipolarVector::ones(4);
        let a = transmit(&c, 1.0, &mut ChaCha8Rng::seed_from_u64(11));
        let b = transmit(&c, 1.0, &mut ChaCha8Rng::seed_from_u64(11));
        assert_eq!(a, b);
    }

    #[test]
    fn noise_moments() {
        let n = 1_000_000;
        let sigma = 0.8;
        let c = BipolarVector::ones(n);
        let y = transmit(&c, sigma, &mut ChaCha8Rng::seed_from_u64(5));
        let mean = y.iter().map(|v| v - 1.0).sum::<f64>() / n as f64;
        let var = y.iter().map(|v| (v - 1.0 - mean).powi(2)).sum::<f64>() / n as f64;
        assert!(mean.abs() < 0.004, "mean {mean}");
        assert!((var / (sigma * sigma) - 1.0).abs() < 0.01, "var {var}");
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(10_000))]

        #[test]
        fn quantizer_odd_symmetric_and_idempotent(y in -5.0f64..5.0, bits in 1u32..8, ymax in 0.5f64..3.0) {
            let q = QuantizerSpec::new(bits, ymax).unwrap();
            if y != 0.0 {
                prop_assert_eq!(q.quantize(-y), -q.quantize(y));
            }
            let v = q.quantize(y);
            prop_assert_eq!(q.quantize(v), v);
            prop_assert!(v.abs() <= ymax - q.step() / 2.0 + 1e-12);
            prop_assert!(q.quantize_units(y) % 2 != 0);
        }

        #[test]
        fn quantizer_monotone(a in -5.0f64..5.0, b in -5.0f64..5.0, bits in 1u32..8) {
            let q = QuantizerSpec::new(bits, 1.75).unwrap();
            let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
            prop_assert!(q.quantize(lo) <= q.quantize(hi));
        }

        #[test]
        fn snr_round_trip(ebn0 in -5.0f64..12.0, rate in 0.05f64..0.99) {
            let s = ebn0_to_sigma(ebn0, rate);
            let back = sigma_to_ebn0(s, rate);
            prop_assert!((back - ebn0).abs() <= 1e-12 * ebn0.abs().max(1.0));
        }
    }

    #[test]
    fn output_set_has_exactly_n_levels() {
        for bits in 1..=6 {
            let q = QuantizerSpec::new(bits, 2.5).unwrap();
            let mut seen = std::collections::BTreeSet::new();
            let mut y = -4.0;
            while y <= 4.0 {
                seen.insert(q.quantize_units(y));
                y += 1e-3;
            }
            assert_eq!(seen.len(), q.n_levels() as usize);
            assert!(!seen.contains(&0));
        }
    }
}

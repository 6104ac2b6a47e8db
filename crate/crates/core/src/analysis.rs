//! Convergence error and local maximum-likelihood (LML) flip analysis.
//!
//! Flip matrices are indexed by ascending quantizer level (rows) and
//! ascending syndrome sum `S = -d_v, -d_v + 2, ..., d_v` (columns). Entry
//! `-1` means the bit `x_k = +1` should flip.

use std::fmt::{self, Write as _};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::bipolar::BipolarVector;
use crate::channel::QuantizerSpec;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum AnalysisError {
    #[error("{what} has {found} entries, expected {expected}")]
    LengthMismatch {
        what: &'static str,
        expected: usize,
        found: usize,
    },
    #[error("at least one frame is required")]
    NoFrames,
    #[error("bit error probability {0} is outside (0, 1)")]
    InvalidErrorProbability(f64),
    #[error("invalid degrees d_v = {dv}, d_c = {dc}")]
    InvalidDegrees { dv: usize, dc: usize },
    #[error("noise standard deviation {0} must be positive")]
    InvalidSigma(f64),
}

/// Global maximum of the objective, `sum_k c_k y_k + m`, for a transmitted
/// codeword `c`.
pub fn f_max(m: usize, c: &BipolarVector, y: &[f64]) -> f64 {
    assert_eq!(c.len(), y.len(), "codeword and samples differ in length");
    let corr: f64 = c
        .as_slice()
        .iter()
        .zip(y)
        .map(|(&ck, &yk)| f64::from(ck) * yk)
        .sum();
    corr + m as f64
}

/// Mean of `f_final - f_max` over frames.
pub fn convergence_error(final_objectives: &[f64], f_maxes: &[f64]) -> Result<f64, AnalysisError> {
    if final_objectives.len() != f_maxes.len() {
        return Err(AnalysisError::LengthMismatch {
            what: "maximum list",
            expected: final_objectives.len(),
            found: f_maxes.len(),
        });
    }
    if final_objectives.is_empty() {
        return Err(AnalysisError::NoFrames);
    }
    let total: f64 = final_objectives
        .iter()
        .zip(f_maxes)
        .map(|(f, g)| f - g)
        .sum();
    Ok(total / final_objectives.len() as f64)
}

/// Gaussian CDF with mean `mean` and standard deviation `sigma`.
pub fn normal_cdf(x: f64, mean: f64, sigma: f64) -> f64 {
    0.5 * libm::erfc(-(x - mean) / (sigma * std::f64::consts::SQRT_2))
}

/// Treatment of the two outermost quantizer bins.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TailMode {
    /// Outermost bins extend to infinity and absorb the saturated mass.
    #[default]
    Saturated,
    /// Outermost bins end at `+-Y_max`; the masses then sum to less than 1.
    Truncated,
}

/// Probability that a sample with mean `mean` and deviation `sigma` falls
/// into the bin of ascending level `i`.
pub fn bin_probability(
    i: usize,
    mean: f64,
    sigma: f64,
    quantizer: &QuantizerSpec,
    tails: TailMode,
) -> f64 {
    let (lo, hi) = quantizer.bin_edges(i, tails == TailMode::Saturated);
    // difference of upper tails where that is more accurate
    if lo > mean {
        normal_cdf(-lo, -mean, sigma) - normal_cdf(-hi, -mean, sigma)
    } else {
        normal_cdf(hi, mean, sigma) - normal_cdf(lo, mean, sigma)
    }
}

/// Initial bit error probability `F_1(0)` of hard decisions.
pub fn pe_initial(sigma: f64) -> f64 {
    normal_cdf(0.0, 1.0, sigma)
}

fn binomial(n: u32, k: u32) -> f64 {
    (0..k).fold(1.0, |acc, j| acc * f64::from(n - j) / f64::from(j + 1))
}

/// Probability that a partial syndrome is wrong: an odd number of the
/// `d_c - 1` other symbols of the check are in error.
pub fn pc_from_pe(pe: f64, dc: usize) -> f64 {
    assert!(dc >= 2, "check degree must be at least 2");
    let n = (dc - 1) as u32;
    (1..=n)
        .step_by(2)
        .map(|e| binomial(n, e) * pe.powi(e as i32) * (1.0 - pe).powi((n - e) as i32))
        .sum()
}

/// Closed form `(1 - (1 - 2 p_e)^(d_c - 1)) / 2` of [`pc_from_pe`].
pub fn pc_closed_form(pe: f64, dc: usize) -> f64 {
    (1.0 - (1.0 - 2.0 * pe).powi(dc as i32 - 1)) / 2.0
}

/// Conditional distributions of the syndrome sum `S_k` for a correct and a
/// wrong decision, over ascending `S = -d_v, ..., d_v`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SyndromeLikelihoods {
    pub sums: Vec<i32>,
    pub given_correct: Vec<f64>,
    pub given_wrong: Vec<f64>,
}

impl SyndromeLikelihoods {
    fn index(&self, s: i32) -> Option<usize> {
        let dv = *self.sums.last()?;
        ((dv - s) % 2 == 0 && s.abs() <= dv).then(|| ((s + dv) / 2) as usize)
    }

    /// `P(S | x = c)`; zero for sums of the wrong parity.
    pub fn correct(&self, s: i32) -> f64 {
        self.index(s).map_or(0.0, |j| self.given_correct[j])
    }

    /// `P(S | x = -c)`; zero for sums of the wrong parity.
    pub fn wrong(&self, s: i32) -> f64 {
        self.index(s).map_or(0.0, |j| self.given_wrong[j])
    }
}

/// `P(S | x = c) = P(n_e = (d_v - S)/2)` and `P(S | x = -c) = P(n_e = (d_v + S)/2)`
/// with `n_e ~ Binomial(d_v, p_c)`.
pub fn syndrome_sum_likelihoods(pc: f64, dv: usize) -> SyndromeLikelihoods {
    let dv_i = dv as i32;
    let p_ne = |ne: i32| binomial(dv as u32, ne as u32) * pc.powi(ne) * (1.0 - pc).powi(dv_i - ne);
    let sums: Vec<i32> = (0..=dv_i).map(|j| 2 * j - dv_i).collect();
    SyndromeLikelihoods {
        given_correct: sums.iter().map(|&s| p_ne((dv_i - s) / 2)).collect(),
        given_wrong: sums.iter().map(|&s| p_ne((dv_i + s) / 2)).collect(),
        sums,
    }
}

/// Inputs of the LML flip matrix.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LmlParams {
    pub sigma: f64,
    pub quantizer: QuantizerSpec,
    pub dv: usize,
    pub dc: usize,
    /// Current bit error probability.
    pub pe: f64,
    #[serde(default)]
    pub tails: TailMode,
}

impl LmlParams {
    pub fn validate(&self) -> Result<(), AnalysisError> {
        if !(self.pe > 0.0 && self.pe < 1.0) {
            return Err(AnalysisError::InvalidErrorProbability(self.pe));
        }
        if self.dv < 1 || self.dc < 2 {
            return Err(AnalysisError::InvalidDegrees {
                dv: self.dv,
                dc: self.dc,
            });
        }
        if !(self.sigma > 0.0) {
            return Err(AnalysisError::InvalidSigma(self.sigma));
        }
        Ok(())
    }
}

/// Keep (+1) or flip (-1) decisions over all (level, syndrome sum) pairs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FlipMatrix {
    /// `entries[i][j]` for ascending level `i` and ascending sum `j`.
    pub entries: Vec<Vec<i8>>,
    pub row_levels: Vec<f64>,
    pub col_sums: Vec<i32>,
}

impl FlipMatrix {
    fn build(
        quantizer: &QuantizerSpec,
        dv: usize,
        mut decide: impl FnMut(usize, f64, usize, i32) -> i8,
    ) -> Self {
        let row_levels = quantizer.levels();
        let col_sums: Vec<i32> = (0..=dv as i32).map(|j| 2 * j - dv as i32).collect();
        let entries = row_levels
            .iter()
            .enumerate()
            .map(|(i, &y)| {
                col_sums
                    .iter()
                    .enumerate()
                    .map(|(j, &s)| decide(i, y, j, s))
                    .collect()
            })
            .collect();
        Self {
            entries,
            row_levels,
            col_sums,
        }
    }

    /// `Phi(i, j) = -Phi(N_Q - 1 - i, d_v - j)` for every cell (0-based).
    ///
    /// Reflecting both the level and the syndrome sum turns a keep decision
    /// for `x_k = +1` into a flip decision, so the top half determines the
    /// bottom half.
    pub fn is_antisymmetric(&self) -> bool {
        let rows = self.entries.len();
        let cols = self.col_sums.len();
        (0..rows).all(|i| {
            (0..cols).all(|j| self.entries[i][j] == -self.entries[rows - 1 - i][cols - 1 - j])
        })
    }

    /// Every flip cell reflects onto a keep cell.
    pub fn flips_reflect_to_keeps(&self) -> bool {
        let rows = self.entries.len();
        let cols = self.col_sums.len();
        (0..rows).all(|i| {
            (0..cols)
                .all(|j| self.entries[i][j] > 0 || self.entries[rows - 1 - i][cols - 1 - j] > 0)
        })
    }

    /// Within each column the flip cells form a block of the lowest levels.
    pub fn columns_monotone(&self) -> bool {
        (0..self.col_sums.len()).all(|j| self.entries.windows(2).all(|w| w[0][j] <= w[1][j]))
    }

    /// Bottom half in display orientation (levels descending from the
    /// smallest negative one).
    pub fn display_bottom_half(&self) -> Vec<Vec<i8>> {
        let rows = self.entries.len();
        (rows / 2..rows)
            .map(|r| self.entries[rows - 1 - r].iter().rev().copied().collect())
            .collect()
    }

    /// The top half in display orientation: levels descending from the
    /// largest, syndrome sums descending from `d_v`.
    pub fn display_top_half(&self) -> Vec<Vec<i8>> {
        let rows = self.entries.len();
        (0..rows / 2)
            .map(|r| self.entries[rows - 1 - r].iter().rev().copied().collect())
            .collect()
    }

    /// Number of flip cells in the column for syndrome sum `s`.
    pub fn flips_in_column(&self, s: i32) -> usize {
        let j = self
            .col_sums
            .iter()
            .position(|&c| c == s)
            .expect("syndrome sum not in matrix");
        self.entries.iter().filter(|row| row[j] < 0).count()
    }

    /// Full matrix as signed-integer CSV in display orientation, with the
    /// level in the first column.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("level");
        for s in self.col_sums.iter().rev() {
            write!(out, ",S={s}").unwrap();
        }
        out.push('\n');
        for (row, level) in self.entries.iter().zip(&self.row_levels).rev() {
            write!(out, "{level}").unwrap();
            for v in row.iter().rev() {
                write!(out, ",{v}").unwrap();
            }
            out.push('\n');
        }
        out
    }
}

impl fmt::Display for FlipMatrix {
    /// Grid in display orientation, one row per level.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:>10} |", "y \\ S")?;
        for s in self.col_sums.iter().rev() {
            write!(f, "{s:>4}")?;
        }
        writeln!(f)?;
        for (row, level) in self.entries.iter().zip(&self.row_levels).rev() {
            write!(f, "{level:>10.5} |")?;
            for v in row.iter().rev() {
                write!(f, "{v:>4}")?;
            }
            writeln!(f)?;
        }
        Ok(())
    }
}

/// LML flip decisions for `x_k = +1`: keep iff
/// `Pr(y|+1) P(S|correct) >= Pr(y|-1) P(S|wrong)`.
///
/// A zero likelihood on one side decides for the other side; cells where
/// both sides vanish are unreachable and kept.
pub fn lml_flip_matrix(params: &LmlParams) -> Result<FlipMatrix, AnalysisError> {
    params.validate()?;
    let pc = pc_from_pe(params.pe, params.dc);
    let lik = syndrome_sum_likelihoods(pc, params.dv);
    let q = &params.quantizer;
    Ok(FlipMatrix::build(q, params.dv, |i, _, j, _| {
        let keep = bin_probability(i, 1.0, params.sigma, q, params.tails) * lik.given_correct[j];
        let flip = bin_probability(i, -1.0, params.sigma, q, params.tails) * lik.given_wrong[j];
        if keep >= flip {
            1
        } else {
            -1
        }
    }))
}

/// Weighted GDBF flip decisions: flip iff `y + w S < theta`.
pub fn gdbf_flip_matrix(theta: f64, w: f64, quantizer: &QuantizerSpec, dv: usize) -> FlipMatrix {
    FlipMatrix::build(quantizer, dv, |_, y, _, s| {
        if y + w * f64::from(s) < theta {
            -1
        } else {
            1
        }
    })
}


/// Reference flip matrices in display orientation (top half,
/// levels descending, syndrome sums descending).
pub mod reference {
    fn parse(rows: [[i8; 4]; 8]) -> Vec<Vec<i8>> {
        rows.iter().map(|r| r.to_vec()).collect()
    }

    /// LML matrices for the initial, halved and reduced error probability.
    pub fn lml() -> [Vec<Vec<i8>>; 3] {
        [
            parse([
                [1, 1, 1, 1],
                [1, 1, 1, 1],
                [1, 1, 1, 1],
                [1, 1, 1, 1],
                [1, 1, 1, 1],
                [1, 1, 1, -1],
                [1, 1, 1, -1],
                [1, 1, -1, -1],
            ]),
            parse([
                [1, 1, 1, 1],
                [1, 1, 1, 1],
                [1, 1, 1, -1],
                [1, 1, 1, -1],
                [1, 1, 1, -1],
                [1, 1, 1, -1],
                [1, 1, -1, -1],
                [1, 1, -1, -1],
            ]),
            parse([
                [1, 1, 1, -1],
                [1, 1, 1, -1],
                [1, 1, 1, -1],
                [1, 1, 1, -1],
                [1, 1, -1, -1],
                [1, 1, -1, -1],
                [1, 1, -1, -1],
                [1, 1, -1, -1],
            ]),
        ]
    }

    /// Weighted GDBF matrices for thresholds -0.9, -0.3 and 0.
    pub fn weighted_gdbf() -> [Vec<Vec<i8>>; 3] {
        [
            parse([
                [1, 1, 1, 1],
                [1, 1, 1, 1],
                [1, 1, 1, 1],
                [1, 1, 1, 1],
                [1, 1, 1, 1],
                [1, 1, 1, -1],
                [1, 1, 1, -1],
                [1, 1, 1, -1],
            ]),
            parse([
                [1, 1, 1, 1],
                [1, 1, 1, 1],
                [1, 1, 1, -1],
                [1, 1, 1, -1],
                [1, 1, 1, -1],
                [1, 1, 1, -1],
                [1, 1, 1, -1],
                [1, 1, -1, -1],
            ]),
            parse([
                [1, 1, 1, -1],
                [1, 1, 1, -1],
                [1, 1, 1, -1],
                [1, 1, 1, -1],
                [1, 1, 1, -1],
                [1, 1, -1, -1],
                [1, 1, -1, -1],
                [1, 1, -1, -1],
            ]),
        ]
    }
}

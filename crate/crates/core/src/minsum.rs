//! Strict min-sum decoding with a flooding schedule.
//!
//! Messages are unsaturated doubles initialized from the raw channel
//! samples; min-sum is invariant to positive scaling of its input, so no
//! LLR conversion is needed.

use crate::bipolar::{sign, BipolarVector};
use crate::code::ParityCheckCode;
use crate::decoder::{objective, DecodeResult};

/// Edge layout of a code's Tanner graph for message passing.
///
/// Edges are numbered check by check in row-neighbor order.
#[derive(Debug, Clone)]
pub struct MinSumDecoder<'a> {
    code: &'a ParityCheckCode,
    /// Symbol of each edge.
    edge_symbol: Vec<usize>,
    /// First edge of each check; `check_start[m]` is the edge count.
    check_start: Vec<usize>,
    /// Edges of each symbol.
    symbol_edges: Vec<Vec<usize>>,
}

impl<'a> MinSumDecoder<'a> {
    pub fn new(code: &'a ParityCheckCode) -> Self {
        let mut edge_symbol = Vec::new();
        let mut check_start = Vec::with_capacity(code.m() + 1);
        let mut symbol_edges = vec![Vec::new(); code.n()];
        for i in 0..code.m() {
            check_start.push(edge_symbol.len());
            for &k in code.symbols_of(i) {
                symbol_edges[k].push(edge_symbol.len());
                edge_symbol.push(k);
            }
        }
        check_start.push(edge_symbol.len());
        Self {
            code,
            edge_symbol,
            check_start,
            symbol_edges,
        }
    }

    /// Decodes `y` with at most `max_iterations` flooding iterations. The
    /// syndrome of the hard decisions is checked before every iteration.
    pub fn decode(&self, y: &[f64], max_iterations: usize, trace: bool) -> DecodeResult {
        assert!(max_iterations >= 1, "iteration limit must be at least 1");
        assert_eq!(y.len(), self.code.n(), "sample vector length must equal n");
        let edges = self.edge_symbol.len();
        let mut v2c: Vec<f64> = self.edge_symbol.iter().map(|&k| y[k]).collect();
        let mut c2v = vec![0.0; edges];
        let mut x: Vec<i8> = y.iter().map(|&v| sign(v)).collect();
        let mut objective_trace = trace.then(|| vec![objective(self.code, &x, y)]);
        let mut t = 0;

        while !self.code.all_satisfied(&x) && t < max_iterations {
            for i in 0..self.code.m() {
                let range = self.check_start[i]..self.check_start[i + 1];
                let mut parity = 1i8;
                let (mut min1, mut min2, mut arg) = (f64::INFINITY, f64::INFINITY, usize::MAX);
                for e in range.clone() {
                    let v = v2c[e];
                    parity *= sign(v);
                    let a = v.abs();
                    if a < min1 {
                        min2 = min1;
                        min1 = a;
                        arg = e;
                    } else if a < min2 {
                        min2 = a;
                    }
                }
                for e in range {
                    let mag = if e == arg { min2 } else { min1 };
                    c2v[e] = f64::from(parity * sign(v2c[e])) * mag;
                }
            }
            for (k, edges_k) in self.symbol_edges.iter().enumerate() {
                let total = y[k] + edges_k.iter().map(|&e| c2v[e]).sum::<f64>();
                for &e in edges_k {
                    v2c[e] = total - c2v[e];
                }
                x[k] = sign(total);
            }
            t += 1;
            if let Some(tr) = objective_trace.as_mut() {
                tr.push(objective(self.code, &x, y));
            }
        }

        let final_objective = match &objective_trace {
            Some(tr) => *tr.last().unwrap(),
            None => objective(self.code, &x, y),
        };
        DecodeResult {
            success: self.code.all_satisfied(&x),
            iterations: t,
            decisions: BipolarVector::from_trusted(x),
            final_objective,
            objective_trace,
            smoothing_engaged: false,
        }
    }
}

/// One-shot min-sum decode; builds the edge layout on every call.
pub fn decode_minsum(code: &ParityCheckCode, y: &[f64], max_iterations: usize) -> DecodeResult {
    MinSumDecoder::new(code).decode(y, max_iterations, false)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::decoder::tests::tiny;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn noiseless_frame() {
        let code = tiny();
        let r = decode_minsum(&code, &[1.0; 6], 5);
        assert!(r.success);
        assert_eq!(r.iterations, 0);
    }

    #[test]
    fn corrects_single_error() {
        let code = tiny();
        // symbol 1 received weakly wrong; both of its checks fail
        let y = [0.9, -0.3, 1.1, 0.8, 1.0, 0.7];
        let r = decode_minsum(&code, &y, 2);
        assert!(r.success);
        assert_eq!(r.decisions, BipolarVector::ones(6));
        // hand trace: check 0 sends min(0.9, 0.8) = 0.8, check 1 sends
        // min(1.1, 1.0) = 1.0, total -0.3 + 1.8 > 0 after one iteration
        assert_eq!(r.iterations, 1);
    }

    #[test]
    fn scale_invariant_trajectories() {
        let code = tiny();
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        let dec = MinSumDecoder::new(&code);
        // dyadic samples and scales keep every sum exact
        for _ in 0..2000 {
            let y: Vec<f64> = (0..6)
                .map(|_| f64::from(rng.random_range(-16i32..=32)) / 16.0)
                .collect();
            let alpha = [0.25, 1.5, 3.0, 5.0, 7.0, 64.0][rng.random_range(0..6)];
            let ys: Vec<f64> = y.iter().map(|v| alpha * v).collect();
            let a = dec.decode(&y, 8, false);
            let b = dec.decode(&ys, 8, false);
            assert_eq!(a.decisions, b.decisions);
            assert_eq!(a.iterations, b.iterations);
            assert_eq!(a.success, b.success);
            if a.success {
                assert!(code.is_codeword(&a.decisions).unwrap());
            }
        }
    }
}

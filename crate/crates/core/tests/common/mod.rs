//! Shared fixtures for the integration tests.

#![allow(dead_code)]

use ngdbf::ParityCheckCode;

/// The (3,6)-regular 504x1008 PEG code shipped with the crate.
pub fn peg_code() -> ParityCheckCode {
    let path = concat!(env!("CARGO_MANIFEST_DIR"), "/data/peg504x1008.alist");
    ParityCheckCode::from_alist_file(path).expect("bundled PEG code parses")
}

/// `f(x) = sum x_k y_k + sum_i prod_{k in N(i)} x_k`, evaluated from the
/// row neighborhoods without any decoder bookkeeping.
pub fn reference_objective(code: &ParityCheckCode, x: &[i8], y: &[f64]) -> f64 {
    let correlation: f64 = x.iter().zip(y).map(|(&xk, &yk)| f64::from(xk) * yk).sum();
    let checks: i32 = (0..code.m())
        .map(|i| {
            code.symbols_of(i)
                .iter()
                .map(|&k| i32::from(x[k]))
                .product::<i32>()
        })
        .sum();
    correlation + f64::from(checks)
}

//! Progressive-edge-growth construction of a regular LDPC code.
//!
//! Usage: `cargo run --release --example peg -- N M DV DC SEED > out.alist`
//!
//! Symbols are processed in index order. Each new edge of a symbol goes to
//! a check of minimum current degree among those farthest from the symbol
//! in the graph built so far; remaining ties are broken by the seeded RNG.
//! Checks that have reached degree `DC` are not eligible, so the result is
//! regular whenever `N * DV = M * DC`.

use std::collections::VecDeque;
use std::env;
use std::process::ExitCode;

use ngdbf::ParityCheckCode;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn farthest_checks(
    sym: usize,
    sym_checks: &[Vec<usize>],
    check_syms: &[Vec<usize>],
    eligible: &[bool],
) -> Vec<usize> {
    let m = check_syms.len();
    if sym_checks[sym].is_empty() {
        return (0..m).filter(|&c| eligible[c]).collect();
    }
    let mut seen_check = vec![false; m];
    let mut seen_sym = vec![false; sym_checks.len()];
    seen_sym[sym] = true;
    let mut frontier: VecDeque<usize> = VecDeque::new();
    for &c in &sym_checks[sym] {
        seen_check[c] = true;
        frontier.push_back(c);
    }
    let total_eligible = eligible.iter().filter(|&&e| e).count();
    let mut reached_eligible = (0..m).filter(|&c| seen_check[c] && eligible[c]).count();
    let mut last_level: Vec<usize> = frontier.iter().copied().collect();
    loop {
        if reached_eligible == total_eligible {
            let far: Vec<usize> = last_level.into_iter().filter(|&c| eligible[c]).collect();
            return far;
        }
        let mut next = Vec::new();
        while let Some(c) = frontier.pop_front() {
            for &s in &check_syms[c] {
                if seen_sym[s] {
                    continue;
                }
                seen_sym[s] = true;
                for &c2 in &sym_checks[s] {
                    if !seen_check[c2] {
                        seen_check[c2] = true;
                        next.push(c2);
                    }
                }
            }
        }
        if next.is_empty() {
            return (0..m).filter(|&c| eligible[c] && !seen_check[c]).collect();
        }
        let newly = next.iter().filter(|&&c| eligible[c]).count();
        if reached_eligible + newly == total_eligible {
            // every eligible check is reachable; take the ones reached last
            last_level = next;
            reached_eligible = total_eligible;
            continue;
        }
        reached_eligible += newly;
        frontier.extend(next.iter().copied());
        last_level = next;
    }
}

fn build(n: usize, m: usize, dv: usize, dc: usize, seed: u64) -> Result<ParityCheckCode, String> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut sym_checks: Vec<Vec<usize>> = vec![Vec::new(); n];
    let mut check_syms: Vec<Vec<usize>> = vec![Vec::new(); m];
    for sym in 0..n {
        for _ in 0..dv {
            let eligible: Vec<bool> = (0..m)
                .map(|c| check_syms[c].len() < dc && !sym_checks[sym].contains(&c))
                .collect();
            let far = farthest_checks(sym, &sym_checks, &check_syms, &eligible);
            let min_deg = far
                .iter()
                .map(|&c| check_syms[c].len())
                .min()
                .ok_or_else(|| format!("no eligible check for symbol {sym}"))?;
            let best: Vec<usize> = far
                .into_iter()
                .filter(|&c| check_syms[c].len() == min_deg)
                .collect();
            let c = best[rng.random_range(0..best.len())];
            sym_checks[sym].push(c);
            check_syms[c].push(sym);
        }
    }
    for row in &mut check_syms {
        row.sort_unstable();
    }
    ParityCheckCode::from_rows(n, check_syms).map_err(|e| e.to_string())
}

fn main() -> ExitCode {
    let args: Vec<String> = env::args().skip(1).collect();
    let parsed: Result<Vec<u64>, _> = args.iter().map(|a| a.parse::<u64>()).collect();
    let Ok([n, m, dv, dc, seed]) = parsed
        .as_deref()
        .map(|v| <[u64; 5]>::try_from(v).ok())
        .ok()
        .flatten()
        .ok_or(())
    else {
        eprintln!("usage: peg N M DV DC SEED");
        return ExitCode::FAILURE;
    };
    match build(n as usize, m as usize, dv as usize, dc as usize, seed) {
        Ok(code) => {
            print!("{}", code.to_alist());
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("construction failed: {e}");
            ExitCode::FAILURE
        }
    }
}

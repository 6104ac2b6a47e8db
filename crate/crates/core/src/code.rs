//! Parity-check codes: alist parsing, Tanner-graph neighborhoods and syndromes.
//!
//! Symbols and checks are indexed from zero internally. Alist files use
//! one-based indices; the conversion happens only in [`parse_alist`] and
//! [`ParityCheckCode::to_alist`].

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use num_rational::Ratio;
use thiserror::Error;

use crate::bipolar::BipolarVector;

/// Errors raised while reading an alist description.
///
/// Every variant carries the 1-based line number where the problem was found.
#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum AlistError {
    #[error("line {line}: malformed header: {reason}")]
    MalformedHeader { line: usize, reason: String },
    #[error("line {line}: invalid integer token `{token}`")]
    InvalidToken { line: usize, token: String },
    #[error("line {line}: unexpected end of input while reading {what}")]
    UnexpectedEof { line: usize, what: &'static str },
    #[error("line {line}: {what} {index} declares degree {declared} but lists {found} indices")]
    DegreeMismatch {
        line: usize,
        what: &'static str,
        index: usize,
        declared: usize,
        found: usize,
    },
    #[error("line {line}: index {index} out of range 1..={bound}")]
    IndexOutOfRange {
        line: usize,
        index: usize,
        bound: usize,
    },
    #[error("line {line}: duplicate index {index}")]
    DuplicateIndex { line: usize, index: usize },
    #[error("line {line}: check {check} lists symbol {symbol} but the symbol list does not contain the check")]
    AsymmetricMembership {
        line: usize,
        check: usize,
        symbol: usize,
    },
    #[error("line {line}: {reason}")]
    InvalidStructure { line: usize, reason: String },
}

/// Alist text of the bundled (3,6)-regular 504x1008 code, girth 8.
pub const PEG_504X1008_ALIST: &str = include_str!("../data/peg504x1008.alist");

/// Errors from operations that take a decision vector.
#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum CodeError {
    #[error("vector length {found} does not match code length {expected}")]
    LengthMismatch { expected: usize, found: usize },
    #[error("I/O error reading {path}: {message}")]
    Io { path: String, message: String },
    #[error(transparent)]
    Alist(#[from] AlistError),
}

/// A binary LDPC code stored as the two adjacency lists of its Tanner graph.
///
/// Immutable after construction; share it freely between frame workers.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParityCheckCode {
    n: usize,
    m: usize,
    col_neighbors: Vec<Vec<usize>>,
    row_neighbors: Vec<Vec<usize>>,
    max_dv: usize,
    max_dc: usize,
}

impl ParityCheckCode {
    /// Builds a code from the check neighborhoods `N(i)`.
    ///
    /// Symbol neighborhoods are derived so that membership is symmetric by
    /// construction. Each row must have at least two members and each symbol
    /// at least one check.
    pub fn from_rows(n: usize, rows: Vec<Vec<usize>>) -> Result<Self, AlistError> {
        let m = rows.len();
        if m == 0 || n <= m {
            return Err(AlistError::InvalidStructure {
                line: 0,
                reason: format!("require n > m >= 1, got n={n} m={m}"),
            });
        }
        let mut cols = vec![Vec::new(); n];
        for (i, row) in rows.iter().enumerate() {
            if row.len() < 2 {
                return Err(AlistError::InvalidStructure {
                    line: 0,
                    reason: format!("check {i} has degree {} (< 2)", row.len()),
                });
            }
            for &k in row {
                if k >= n {
                    return Err(AlistError::IndexOutOfRange {
                        line: 0,
                        index: k + 1,
                        bound: n,
                    });
                }
                if cols[k].last() == Some(&i) {
                    return Err(AlistError::DuplicateIndex {
                        line: 0,
                        index: k + 1,
                    });
                }
                cols[k].push(i);
            }
        }
        if let Some(k) = cols.iter().position(Vec::is_empty) {
            return Err(AlistError::InvalidStructure {
                line: 0,
                reason: format!("symbol {k} is not connected to any check"),
            });
        }
        Ok(Self::assemble(n, m, cols, rows))
    }

    fn assemble(
        n: usize,
        m: usize,
        col_neighbors: Vec<Vec<usize>>,
        row_neighbors: Vec<Vec<usize>>,
    ) -> Self {
        let max_dv = col_neighbors.iter().map(Vec::len).max().unwrap_or(0);
        let max_dc = row_neighbors.iter().map(Vec::len).max().unwrap_or(0);
        Self {
            n,
            m,
            col_neighbors,
            row_neighbors,
            max_dv,
            max_dc,
        }
    }

    /// The bundled (3,6)-regular 504x1008 progressive-edge-growth code.
    pub fn peg_504x1008() -> Self {
        parse_alist(PEG_504X1008_ALIST).expect("bundled alist is valid")
    }

    /// Reads and parses an alist file.
    pub fn from_alist_file(path: impl AsRef<Path>) -> Result<Self, CodeError> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| CodeError::Io {
            path: path.display().to_string(),
            message: e.to_string(),
        })?;
        Ok(parse_alist(&text)?)
    }

    /// Number of symbols.
    pub fn n(&self) -> usize {
        self.n
    }

    /// Number of checks.
    pub fn m(&self) -> usize {
        self.m
    }

    /// Checks adjacent to symbol `k`, i.e. `M(k)`.
    pub fn checks_of(&self, k: usize) -> &[usize] {
        &self.col_neighbors[k]
    }

    /// Symbols adjacent to check `i`, i.e. `N(i)`.
    pub fn symbols_of(&self, i: usize) -> &[usize] {
        &self.row_neighbors[i]
    }

    pub fn col_neighbors(&self) -> &[Vec<usize>] {
        &self.col_neighbors
    }

    pub fn row_neighbors(&self) -> &[Vec<usize>] {
        &self.row_neighbors
    }

    pub fn max_dv(&self) -> usize {
        self.max_dv
    }

    pub fn max_dc(&self) -> usize {
        self.max_dc
    }

    /// Design rate `(n - m) / n`.
    pub fn rate(&self) -> Ratio<usize> {
        Ratio::new(self.n - self.m, self.n)
    }

    pub fn rate_f64(&self) -> f64 {
        (self.n - self.m) as f64 / self.n as f64
    }

    /// Column degree histogram: degree -> number of symbols.
    pub fn column_degree_histogram(&self) -> BTreeMap<usize, usize> {
        histogram(self.col_neighbors.iter().map(Vec::len))
    }

    /// Row degree histogram: degree -> number of checks.
    pub fn row_degree_histogram(&self) -> BTreeMap<usize, usize> {
        histogram(self.row_neighbors.iter().map(Vec::len))
    }

    /// Column degree shared by every symbol, if the code is column-regular.
    pub fn regular_column_degree(&self) -> Option<usize> {
        let h = self.column_degree_histogram();
        (h.len() == 1).then(|| *h.keys().next().unwrap())
    }

    fn check_len(&self, x: &BipolarVector) -> Result<(), CodeError> {
        if x.len() != self.n {
            return Err(CodeError::LengthMismatch {
                expected: self.n,
                found: x.len(),
            });
        }
        Ok(())
    }

    /// Bipolar syndrome: entry `i` is the product of `x` over `N(i)`.
    pub fn syndrome(&self, x: &BipolarVector) -> Result<BipolarVector, CodeError> {
        self.check_len(x)?;
        let mut s = vec![1i8; self.m];
        self.syndrome_into(x.as_slice(), &mut s);
        Ok(BipolarVector::from_trusted(s))
    }

    /// Unchecked syndrome kernel used inside the decoders.
    pub(crate) fn syndrome_into(&self, x: &[i8], s: &mut [i8]) {
        for (si, row) in s.iter_mut().zip(&self.row_neighbors) {
            *si = row.iter().fold(1i8, |acc, &k| acc * x[k]);
        }
    }

    pub(crate) fn all_satisfied(&self, x: &[i8]) -> bool {
        self.row_neighbors
            .iter()
            .all(|row| row.iter().fold(1i8, |acc, &k| acc * x[k]) == 1)
    }

    /// True iff every check is satisfied.
    pub fn is_codeword(&self, x: &BipolarVector) -> Result<bool, CodeError> {
        self.check_len(x)?;
        Ok(self.all_satisfied(x.as_slice()))
    }

    /// Serializes to alist text, zero-padding every list to the maximum degree.
    pub fn to_alist(&self) -> String {
        let mut out = String::new();
        let join = |v: &mut String, items: &mut dyn Iterator<Item = usize>| {
            let parts: Vec<String> = items.map(|i| i.to_string()).collect();
            v.push_str(&parts.join(" "));
            v.push('\n');
        };
        let _ = writeln!(out, "{} {}", self.n, self.m);
        let _ = writeln!(out, "{} {}", self.max_dv, self.max_dc);
        join(&mut out, &mut self.col_neighbors.iter().map(Vec::len));
        join(&mut out, &mut self.row_neighbors.iter().map(Vec::len));
        for col in &self.col_neighbors {
            let pad = self.max_dv - col.len();
            join(
                &mut out,
                &mut col.iter().map(|i| i + 1).chain(std::iter::repeat_n(0, pad)),
            );
        }
        for row in &self.row_neighbors {
            let pad = self.max_dc - row.len();
            join(
                &mut out,
                &mut row.iter().map(|k| k + 1).chain(std::iter::repeat_n(0, pad)),
            );
        }
        out
    }
}

fn histogram(degrees: impl Iterator<Item = usize>) -> BTreeMap<usize, usize> {
    let mut h = BTreeMap::new();
    for d in degrees {
        *h.entry(d).or_insert(0) += 1;
    }
    h
}

/// Line-oriented reader over the non-blank lines of an alist file.
struct Lines<'a> {
    inner: std::iter::Enumerate<std::str::Lines<'a>>,
    last_line: usize,
}

impl<'a> Lines<'a> {
    fn new(text: &'a str) -> Self {
        Self {
            inner: text.lines().enumerate(),
            last_line: 0,
        }
    }

    fn next_ints(&mut self, what: &'static str) -> Result<(usize, Vec<usize>), AlistError> {
        for (idx, line) in self.inner.by_ref() {
            self.last_line = idx + 1;
            if line.trim().is_empty() {
                continue;
            }
            let ints = line
                .split_whitespace()
                .map(|tok| {
                    tok.parse::<usize>().map_err(|_| AlistError::InvalidToken {
                        line: idx + 1,
                        token: tok.to_string(),
                    })
                })
                .collect::<Result<Vec<_>, _>>()?;
            return Ok((idx + 1, ints));
        }
        Err(AlistError::UnexpectedEof {
            line: self.last_line + 1,
            what,
        })
    }
}

fn header_pair(lines: &mut Lines<'_>, what: &'static str) -> Result<(usize, usize), AlistError> {
    let (line, v) = lines.next_ints(what)?;
    match v.as_slice() {
        [a, b] => Ok((*a, *b)),
        _ => Err(AlistError::MalformedHeader {
            line,
            reason: format!("expected two integers for {what}, found {}", v.len()),
        }),
    }
}

fn degree_line(
    lines: &mut Lines<'_>,
    count: usize,
    max: usize,
    what: &'static str,
) -> Result<Vec<usize>, AlistError> {
    let (line, v) = lines.next_ints(what)?;
    if v.len() != count {
        return Err(AlistError::MalformedHeader {
            line,
            reason: format!("expected {count} {what}, found {}", v.len()),
        });
    }
    let actual_max = v.iter().copied().max().unwrap_or(0);
    if actual_max != max {
        return Err(AlistError::MalformedHeader {
            line,
            reason: format!("declared maximum {max} but largest of {what} is {actual_max}"),
        });
    }
    Ok(v)
}

/// Reads one neighbor list per line, skipping zero padding.
fn neighbor_lists(
    lines: &mut Lines<'_>,
    degrees: &[usize],
    bound: usize,
    what: &'static str,
) -> Result<Vec<(usize, Vec<usize>)>, AlistError> {
    let mut out = Vec::with_capacity(degrees.len());
    for (index, &declared) in degrees.iter().enumerate() {
        let (line, raw) = lines.next_ints(what)?;
        let mut list = Vec::with_capacity(declared);
        for v in raw.into_iter().filter(|&v| v != 0) {
            if v > bound {
                return Err(AlistError::IndexOutOfRange {
                    line,
                    index: v,
                    bound,
                });
            }
            if list.contains(&(v - 1)) {
                return Err(AlistError::DuplicateIndex { line, index: v });
            }
            list.push(v - 1);
        }
        if list.len() != declared {
            return Err(AlistError::DegreeMismatch {
                line,
                what,
                index: index + 1,
                declared,
                found: list.len(),
            });
        }
        out.push((line, list));
    }
    Ok(out)
}

/// Parses the standard alist layout into a [`ParityCheckCode`].
///
/// Layout: `n m`, `max_dv max_dc`, the n column degrees, the m row degrees,
/// then one line per column and one line per row of 1-based indices. Zero
/// entries are padding and are skipped.
pub fn parse_alist(text: &str) -> Result<ParityCheckCode, AlistError> {
    let mut lines = Lines::new(text);
    let (n, m) = header_pair(&mut lines, "dimensions")?;
    if m == 0 || n <= m {
        return Err(AlistError::MalformedHeader {
            line: 1,
            reason: format!("require n > m >= 1, got n={n} m={m}"),
        });
    }
    let (max_dv, max_dc) = header_pair(&mut lines, "maximum degrees")?;
    let col_deg = degree_line(&mut lines, n, max_dv, "column degrees")?;
    let row_deg = degree_line(&mut lines, m, max_dc, "row degrees")?;
    let cols = neighbor_lists(&mut lines, &col_deg, m, "column")?;
    let rows = neighbor_lists(&mut lines, &row_deg, n, "row")?;

    for (k, (line, col)) in cols.iter().enumerate() {
        if col.is_empty() {
            return Err(AlistError::InvalidStructure {
                line: *line,
                reason: format!("symbol {} has no checks", k + 1),
            });
        }
    }
    for (i, (line, row)) in rows.iter().enumerate() {
        if row.len() < 2 {
            return Err(AlistError::InvalidStructure {
                line: *line,
                reason: format!("check {} has degree {} (< 2)", i + 1, row.len()),
            });
        }
        for &k in row {
            if !cols[k].1.contains(&i) {
                return Err(AlistError::AsymmetricMembership {
                    line: *line,
                    check: i + 1,
                    symbol: k + 1,
                });
            }
        }
    }
    // Row lists are consistent with the column lists; the converse only needs
    // the edge counts to agree.
    let col_edges: usize = col_deg.iter().sum();
    let row_edges: usize = row_deg.iter().sum();
    if col_edges != row_edges {
        let (line, _) = cols
            .iter()
            .enumerate()
            .find_map(|(k, (line, col))| {
                col.iter()
                    .find(|&&i| !rows[i].1.contains(&k))
                    .map(|&i| (*line, i))
            })
            .unwrap_or((lines.last_line, 0));
        return Err(AlistError::InvalidStructure {
            line,
            reason: format!("column lists hold {col_edges} edges but row lists hold {row_edges}"),
        });
    }

    Ok(ParityCheckCode::assemble(
        n,
        m,
        cols.into_iter().map(|(_, c)| c).collect(),
        rows.into_iter().map(|(_, r)| r).collect(),
    ))
}

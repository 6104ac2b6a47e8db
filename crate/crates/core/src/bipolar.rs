use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("entry {index} is {value}; bipolar vectors hold only -1 and +1")]
pub struct NotBipolar {
    pub index: usize,
    pub value: i8,
}

/// A vector over {-1, +1}. Binary 0 maps to +1 and binary 1 to -1.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "Vec<i8>", into = "Vec<i8>")]
pub struct BipolarVector(Vec<i8>);

impl BipolarVector {
    pub fn new(values: Vec<i8>) -> Result<Self, NotBipolar> {
        if let Some((index, &value)) = values.iter().enumerate().find(|(_, v)| v.abs() != 1) {
            return Err(NotBipolar { index, value });
        }
        Ok(Self(values))
    }

    pub(crate) fn from_trusted(values: Vec<i8>) -> Self {
        debug_assert!(values.iter().all(|v| v.abs() == 1));
        Self(values)
    }

    /// The all-(+1) vector, i.e. the all-zero binary word.
    pub fn ones(n: usize) -> Self {
        Self(vec![1; n])
    }

    /// Hard decisions `sign(y)`, with `sign(0) = +1`.
    pub fn from_signs(samples: &[f64]) -> Self {
        Self(samples.iter().map(|&y| sign(y)).collect())
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[i8] {
        &self.0
    }

    pub fn flip(&mut self, k: usize) {
        self.0[k] = -self.0[k];
    }

    /// Number of positions where the two vectors differ.
    pub fn hamming_distance(&self, other: &Self) -> usize {
        self.0.iter().zip(&other.0).filter(|(a, b)| a != b).count()
    }

    /// Number of -1 entries (binary weight).
    pub fn weight(&self) -> usize {
        self.0.iter().filter(|&&v| v < 0).count()
    }

    pub fn into_inner(self) -> Vec<i8> {
        self.0
    }
}

impl TryFrom<Vec<i8>> for BipolarVector {
    type Error = NotBipolar;
    fn try_from(v: Vec<i8>) -> Result<Self, Self::Error> {
        Self::new(v)
    }
}

impl From<BipolarVector> for Vec<i8> {
    fn from(v: BipolarVector) -> Self {
        v.0
    }
}

/// `sign` with the convention `sign(0) = +1`.
#[inline]
pub fn sign(y: f64) -> i8 {
    if y < 0.0 {
        -1
    } else {
        1
    }
}

//! LDPC bit-flipping decoders built on gradient descent, with and without
//! noise perturbation, plus a reference min-sum decoder, a deterministic
//! Monte Carlo harness and analysis tools for convergence error and local
//! maximum-likelihood flip decisions.
//!
//! Bipolar conventions throughout: binary 0 is +1, binary 1 is -1, and a
//! syndrome entry of +1 marks a satisfied check.
// Parameter checks use negated comparisons so that NaN is rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analysis;
pub mod bipolar;
pub mod channel;
pub mod code;
pub mod decoder;
pub mod gdbf;
pub mod harness;
pub mod minsum;
pub mod ngdbf;
pub mod strategy;

pub use bipolar::{sign, BipolarVector};
pub use channel::{ebn0_to_sigma, sigma_to_ebn0, ChannelParams, QuantizerSpec};
pub use code::{parse_alist, ParityCheckCode, PEG_504X1008_ALIST};
pub use decoder::{decode, objective, DecodeResult, DecoderState, FrameRng, Stepper};

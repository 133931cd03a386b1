//! Anomaly detection for network-connection records with a bidirectional GAN
//! trained under a Wasserstein-style objective.
//!
//! The pieces, bottom up:
//!
//! - [`tensor`] — dense layers, reverse-mode differentiation, RMSProp
//! - [`divergence`] — cross-entropy/KL/JS and 1-D Wasserstein on discrete
//!   distributions, plus the saturation demonstration
//! - [`model`] — generator, encoder, and critic with intermediate-layer taps
//! - [`train`] — the alternating critic/generator-encoder loop with weight
//!   clipping (and a classical cross-entropy mode for ablation)
//! - [`score`] — residual + feature-matching anomaly score, threshold rules,
//!   and the iterative latent-search baseline
//! - [`kdd`] — KDD-99 parsing, label swap, one-hot encoding, seeded splits
//! - [`eval`] — precision/recall/F1, contamination sweeps, timing benchmarks
//! - [`checkpoint`] / [`manifest`] — reproducible run artifacts
//!
//! See the `examples/` directory for one runnable example per capability, or
//! the `bigan-anomaly` binary for the pipeline CLI.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

pub mod checkpoint;
pub mod cli;
pub mod divergence;
pub mod eval;
pub mod fixture;
pub mod kdd;
pub mod manifest;
pub mod model;
pub mod score;
pub mod tensor;
pub mod train;

/// Binary class label, used both for ground truth and for verdicts.
/// `Anomalous` is the positive class everywhere.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Class {
    Normal,
    Anomalous,
}

impl Class {
    pub fn flip(self) -> Class {
        match self {
            Class::Normal => Class::Anomalous,
            Class::Anomalous => Class::Normal,
        }
    }
}

impl fmt::Display for Class {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Class::Normal => write!(f, "normal"),
            Class::Anomalous => write!(f, "anomalous"),
        }
    }
}

impl FromStr for Class {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "normal" => Ok(Class::Normal),
            "anomalous" => Ok(Class::Anomalous),
            other => Err(format!("unknown class {other:?}")),
        }
    }
}

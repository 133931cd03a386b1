//! Divergences between discrete distributions on the real line: cross-entropy,
//! KL, JS, and a closed-form 1-D Wasserstein distance via CDF differences.
//! All logarithms are natural; 0·ln 0 is treated as 0. Divergences that blow
//! up are reported as `f64::INFINITY`, not as errors, so saturation tables can
//! include them.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum DivergenceError {
    #[error("invalid distribution: {0}")]
    Invalid(String),
}

pub type Result<T> = std::result::Result<T, DivergenceError>;

const PROB_SUM_TOL: f64 = 1e-12;

/// A discrete distribution over outcomes identified by their position on the
/// real line. Positions strictly increasing, probabilities summing to 1.
#[derive(Clone, Debug, PartialEq)]
pub struct DiscreteDist {
    positions: Vec<f64>,
    probs: Vec<f64>,
}

impl DiscreteDist {
    pub fn new(positions: Vec<f64>, probs: Vec<f64>) -> Result<Self> {
        if positions.len() != probs.len() || positions.is_empty() {
            return Err(DivergenceError::Invalid(format!(
                "{} positions vs {} probabilities",
                positions.len(),
                probs.len()
            )));
        }
        if positions.iter().any(|p| !p.is_finite()) {
            return Err(DivergenceError::Invalid("non-finite position".into()));
        }
        if !positions.windows(2).all(|w| w[0] < w[1]) {
            return Err(DivergenceError::Invalid("positions must be strictly increasing".into()));
        }
        if probs.iter().any(|&p| !(p >= 0.0) || !p.is_finite()) {
            return Err(DivergenceError::Invalid("negative or non-finite probability".into()));
        }
        let sum: f64 = probs.iter().sum();
        if (sum - 1.0).abs() > PROB_SUM_TOL {
            return Err(DivergenceError::Invalid(format!("probabilities sum to {sum}")));
        }
        Ok(DiscreteDist { positions, probs })
    }

    pub fn point_mass(position: f64) -> Self {
        DiscreteDist { positions: vec![position], probs: vec![1.0] }
    }

    pub fn uniform(positions: Vec<f64>) -> Result<Self> {
        let n = positions.len();
        Self::new(positions, vec![1.0 / n as f64; n])
    }

    pub fn positions(&self) -> &[f64] {
        &self.positions
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }
}

/// Zero-pad both distributions onto the sorted union of their supports.
fn align(p: &DiscreteDist, q: &DiscreteDist) -> (Vec<f64>, Vec<f64>, Vec<f64>) {
    let mut union: Vec<f64> = p.positions.iter().chain(q.positions.iter()).copied().collect();
    union.sort_by(|a, b| a.partial_cmp(b).unwrap());
    union.dedup();
    let lookup = |d: &DiscreteDist, pos: f64| -> f64 {
        match d.positions.iter().position(|&x| x == pos) {
            Some(i) => d.probs[i],
            None => 0.0,
        }
    };
    let pp: Vec<f64> = union.iter().map(|&x| lookup(p, x)).collect();
    let qq: Vec<f64> = union.iter().map(|&x| lookup(q, x)).collect();
    (union, pp, qq)
}

/// H(P‖Q) = −Σ P(x) ln Q(x); +∞ when some x has P(x)>0 and Q(x)=0.
pub fn cross_entropy(p: &DiscreteDist, q: &DiscreteDist) -> f64 {
    let (_, pp, qq) = align(p, q);
    let mut h = 0.0;
    for (&pi, &qi) in pp.iter().zip(qq.iter()) {
        if pi == 0.0 {
            continue; // 0·ln 0 := 0
        }
        if qi == 0.0 {
            return f64::INFINITY;
        }
        h -= pi * qi.ln();
    }
    h
}

/// KL(P‖Q) = Σ P(x) ln(P(x)/Q(x)).
pub fn kl(p: &DiscreteDist, q: &DiscreteDist) -> f64 {
    let (_, pp, qq) = align(p, q);
    let mut d = 0.0;
    for (&pi, &qi) in pp.iter().zip(qq.iter()) {
        if pi == 0.0 {
            continue;
        }
        if qi == 0.0 {
            return f64::INFINITY;
        }
        d += pi * (pi / qi).ln();
    }
    d
}

/// JS(P‖Q) = ½KL(P‖M) + ½KL(Q‖M), M = (P+Q)/2. Always finite, in [0, ln 2].
pub fn js(p: &DiscreteDist, q: &DiscreteDist) -> f64 {
    let (_, pp, qq) = align(p, q);
    let mut d = 0.0;
    for (&pi, &qi) in pp.iter().zip(qq.iter()) {
        let m = 0.5 * (pi + qi);
        if pi > 0.0 {
            d += 0.5 * pi * (pi / m).ln();
        }
        if qi > 0.0 {
            d += 0.5 * qi * (qi / m).ln();
        }
    }
    d
}

/// W₁(P,Q) on the line: Σ |CDF_P − CDF_Q| · gap over the sorted union support.
pub fn wasserstein1(p: &DiscreteDist, q: &DiscreteDist) -> f64 {
    let (union, pp, qq) = align(p, q);
    let mut w = 0.0;
    let mut cdf_gap = 0.0;
    for i in 0..union.len() - 1 {
        cdf_gap += pp[i] - qq[i];
        w += cdf_gap.abs() * (union[i + 1] - union[i]);
    }
    w
}

/// For point masses at 0 and θ, tabulate (θ, JS, W₁). JS saturates at ln 2 for
/// every θ > 0 while W₁ grows linearly — the usable-gradient contrast.
pub fn saturation_sweep(separations: &[f64]) -> Result<Vec<(f64, f64, f64)>> {
    let origin = DiscreteDist::point_mass(0.0);
    separations
        .iter()
        .map(|&theta| {
            if theta < 0.0 {
                return Err(DivergenceError::Invalid(format!("negative separation {theta}")));
            }
            let shifted = DiscreteDist::point_mass(theta);
            Ok((theta, js(&origin, &shifted), wasserstein1(&origin, &shifted)))
        })
        .collect()
}

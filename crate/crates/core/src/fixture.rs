//! Deterministic synthetic fixtures: a KDD-format connection-record
//! generator for end-to-end pipeline runs, and a pure one-hot toy set for the
//! objective ablation.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::Normal;

use crate::kdd::FEATURE_COUNT;

const PROTOCOLS: [&str; 3] = ["tcp", "udp", "icmp"];
const SERVICES: [&str; 4] = ["http", "smtp", "dns", "ftp"];
const FLAGS: [&str; 3] = ["SF", "REJ", "S0"];
/// Continuous fields that carry signal; the rest stay constant.
const INFORMATIVE: [usize; 8] = [0, 4, 5, 7, 9, 12, 15, 22];
const SIGMA: f64 = 0.08;

fn pick<'a, R: Rng>(options: &[&'a str], weights: &[f64], rng: &mut R) -> &'a str {
    let total: f64 = weights.iter().sum();
    let mut draw = rng.gen::<f64>() * total;
    for (o, w) in options.iter().zip(weights.iter()) {
        if draw < *w {
            return o;
        }
        draw -= w;
    }
    options[options.len() - 1]
}

/// Synthetic KDD-99-format text: `n` comma-separated 42-field records at the
/// given anomaly fraction. Normal-class rows carry attack labels (the
/// label-swap convention); anomalous rows are labeled "normal.", sit 3σ away
/// on every informative continuous feature, and draw their categorical
/// values from a permuted distribution.
pub fn synthetic_kdd_csv(n: usize, anomaly_fraction: f64, seed: u64) -> String {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let normal_weights = [0.7, 0.2, 0.1, 0.0];
    let permuted_weights = [0.0, 0.1, 0.2, 0.7];
    let noise = Normal::new(0.0, SIGMA).unwrap();
    let mut out = String::new();
    for i in 0..n {
        let anomalous = (i as f64 + 0.5) / n as f64 > 1.0 - anomaly_fraction;
        let mut fields = vec!["0".to_string(); FEATURE_COUNT];
        let weights: &[f64] =
            if anomalous { &permuted_weights } else { &normal_weights };
        fields[1] = pick(&PROTOCOLS, &weights[..3], &mut rng).to_string();
        fields[2] = pick(&SERVICES, weights, &mut rng).to_string();
        fields[3] = pick(&FLAGS, &weights[..3], &mut rng).to_string();
        for (k, &f) in INFORMATIVE.iter().enumerate() {
            // alternate shift direction so anomalies stay inside [0,1]
            let center = 0.5
                + if anomalous {
                    3.0 * SIGMA * if k % 2 == 0 { 1.0 } else { -1.0 }
                } else {
                    0.0
                };
            let v: f64 = center + rng.sample::<f64, _>(noise);
            fields[f] = format!("{:.6}", v.clamp(0.0, 1.0));
        }
        let label = if anomalous {
            "normal."
        } else if i % 2 == 0 {
            "smurf."
        } else {
            "neptune."
        };
        out.push_str(&fields.join(","));
        out.push(',');
        out.push_str(label);
        out.push('\n');
    }
    out
}

/// Pure one-hot toy set: 5 blocks of 4 categories (20 dims), each block drawn
/// from a skewed categorical. The discrete data the cross-entropy objective
/// struggles with.
pub fn one_hot_toy(n: usize, seed: u64) -> Vec<Vec<f64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let weights = [0.6, 0.25, 0.1, 0.05];
    (0..n)
        .map(|_| {
            let mut x = vec![0.0; 20];
            for block in 0..5 {
                let mut draw = rng.gen::<f64>();
                let mut cat = 3;
                for (c, w) in weights.iter().enumerate() {
                    if draw < *w {
                        cat = c;
                        break;
                    }
                    draw -= w;
                }
                x[block * 4 + cat] = 1.0;
            }
            x
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kdd::{self, CategoricalCoding};
    use crate::Class;

    #[test]
    fn synthetic_csv_parses_and_swaps() {
        let text = synthetic_kdd_csv(200, 0.25, 3);
        let records = kdd::parse_kdd(&text).unwrap();
        assert_eq!(records.len(), 200);
        let labeled = kdd::swap_labels(&records);
        let anoms = labeled.iter().filter(|(_, c)| *c == Class::Anomalous).count();
        assert_eq!(anoms, 50);
    }

    #[test]
    fn synthetic_fixture_is_deterministic() {
        assert_eq!(synthetic_kdd_csv(50, 0.2, 9), synthetic_kdd_csv(50, 0.2, 9));
    }

    #[test]
    fn synthetic_csv_encodes_cleanly() {
        let text = synthetic_kdd_csv(100, 0.2, 4);
        let records = kdd::parse_kdd(&text).unwrap();
        let schema = kdd::fit_schema(&records, CategoricalCoding::OneHot).unwrap();
        for r in &records {
            let enc = kdd::encode(r, &schema).unwrap();
            assert!(enc.iter().all(|&v| (0.0..=1.0).contains(&v)));
        }
    }

    #[test]
    fn one_hot_toy_rows_are_valid_blocks() {
        for x in one_hot_toy(100, 1) {
            assert_eq!(x.len(), 20);
            for block in 0..5 {
                let ones = x[block * 4..(block + 1) * 4].iter().filter(|&&v| v == 1.0).count();
                let sum: f64 = x[block * 4..(block + 1) * 4].iter().sum();
                assert_eq!(ones, 1);
                assert_eq!(sum, 1.0);
            }
        }
    }
}

//! Evaluation: confusion counts with precision/recall/F1 (anomalous is the
//! positive class), the contamination-rate sweep, and the encoder-vs-search
//! timing benchmark.

use std::time::Instant;

use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::kdd::EncodedSample;
use crate::model::BiganModel;
use crate::score::{self, ScoreReport, ThresholdRule};
use crate::Class;

#[derive(Debug, Error)]
pub enum EvalError {
    #[error("shape error: {0}")]
    Shape(String),
    #[error("evaluation domain error: {0}")]
    Domain(String),
    #[error(transparent)]
    Score(#[from] score::ScoreError),
}

pub type Result<T> = std::result::Result<T, EvalError>;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EvalMetrics {
    pub true_positives: usize,
    pub false_positives: usize,
    pub false_negatives: usize,
    pub true_negatives: usize,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    /// Set when a zero denominator forced precision, recall, or F1 to 0.
    pub degenerate: bool,
}

/// Confusion counts and derived ratios; zero-denominator ratios come back as
/// 0 with the degenerate flag set (never NaN).
pub fn compute_metrics(verdicts: &[Class], truths: &[Class]) -> Result<EvalMetrics> {
    if verdicts.len() != truths.len() {
        return Err(EvalError::Shape(format!(
            "{} verdicts vs {} truths",
            verdicts.len(),
            truths.len()
        )));
    }
    let (mut tp, mut fp, mut fnc, mut tn) = (0usize, 0usize, 0usize, 0usize);
    for (v, t) in verdicts.iter().zip(truths.iter()) {
        match (v, t) {
            (Class::Anomalous, Class::Anomalous) => tp += 1,
            (Class::Anomalous, Class::Normal) => fp += 1,
            (Class::Normal, Class::Anomalous) => fnc += 1,
            (Class::Normal, Class::Normal) => tn += 1,
        }
    }
    let mut degenerate = false;
    let mut ratio = |num: usize, den: usize| -> f64 {
        if den == 0 {
            degenerate = true;
            0.0
        } else {
            num as f64 / den as f64
        }
    };
    let precision = ratio(tp, tp + fp);
    let recall = ratio(tp, tp + fnc);
    let f1 = if precision + recall > 0.0 {
        2.0 * precision * recall / (precision + recall)
    } else {
        degenerate = true;
        0.0
    };
    Ok(EvalMetrics {
        true_positives: tp,
        false_positives: fp,
        false_negatives: fnc,
        true_negatives: tn,
        precision,
        recall,
        f1,
        degenerate,
    })
}

/// Compose a test set from a mixed pool at exactly rate `c` (all the pool's
/// normals plus k = ⌊c·N + 0.5⌋ anomalies), score it, flag the top c
/// fraction, and measure. One row per rate.
pub fn contamination_sweep(
    model: &BiganModel,
    pool: &[EncodedSample],
    rates: &[f64],
    lambda: &[f64],
) -> Result<Vec<(f64, EvalMetrics)>> {
    let normals: Vec<&EncodedSample> = pool.iter().filter(|s| s.truth == Class::Normal).collect();
    let anoms: Vec<&EncodedSample> = pool.iter().filter(|s| s.truth == Class::Anomalous).collect();
    let mut out = Vec::with_capacity(rates.len());
    for &c in rates {
        if !(0.0..1.0).contains(&c) {
            return Err(EvalError::Domain(format!("rate {c} outside [0,1)")));
        }
        let k = ((c * normals.len() as f64 / (1.0 - c)).round() as usize).min(anoms.len());
        let needed = (c * (normals.len() + k) as f64 + 0.5).floor() as usize;
        if needed > anoms.len() {
            return Err(EvalError::Domain(format!(
                "pool supports at most {} anomalies, rate {c} needs {needed}",
                anoms.len()
            )));
        }
        let test: Vec<&EncodedSample> =
            normals.iter().chain(anoms.iter().take(needed)).copied().collect();
        let xs: Vec<Vec<f64>> = test.iter().map(|s| s.features.clone()).collect();
        let reports = score::score_batch(model, &xs, lambda)?;
        let verdicts = score::apply_threshold(&reports, ThresholdRule::ContaminationRate(c))?;
        let truths: Vec<Class> = test.iter().map(|s| s.truth).collect();
        out.push((c, compute_metrics(&verdicts, &truths)?));
    }
    Ok(out)
}

pub fn sweep_to_csv(rows: &[(f64, EvalMetrics)]) -> String {
    let mut out = String::from("rate,tp,fp,fn,tn,precision,recall,f1,degenerate\n");
    for (c, m) in rows {
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{},{}\n",
            c,
            m.true_positives,
            m.false_positives,
            m.false_negatives,
            m.true_negatives,
            m.precision,
            m.recall,
            m.f1,
            m.degenerate
        ));
    }
    out
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct BenchReport {
    pub batch_size: usize,
    pub repetitions: usize,
    pub anogan_steps: usize,
    pub encoder_mean_ms: f64,
    pub encoder_std_ms: f64,
    pub search_mean_ms: f64,
    pub search_std_ms: f64,
    pub speedup: f64,
}

fn mean_std(samples: &[f64]) -> (f64, f64) {
    let n = samples.len() as f64;
    let mean = samples.iter().sum::<f64>() / n;
    let var = samples.iter().map(|s| (s - mean) * (s - mean)).sum::<f64>() / n;
    (mean, var.sqrt())
}

/// Per-batch wall-clock comparison of encoder-path scoring against the
/// iterative latent search, one warm-up round excluded from both.
pub fn benchmark<R: Rng>(
    model: &BiganModel,
    batch: &[Vec<f64>],
    repetitions: usize,
    anogan_steps: usize,
    lambda: &[f64],
    rng: &mut R,
) -> Result<BenchReport> {
    if repetitions == 0 || batch.is_empty() {
        return Err(EvalError::Domain("benchmark needs samples and at least one repetition".into()));
    }
    // warm-up
    score::score_batch(model, batch, lambda)?;
    let mut encoder_times = Vec::with_capacity(repetitions);
    for _ in 0..repetitions {
        let t0 = Instant::now();
        score::score_batch(model, batch, lambda)?;
        encoder_times.push(t0.elapsed().as_secs_f64() * 1e3);
    }
    score::anogan_search(model, &batch[0], anogan_steps, 1e-3, lambda, rng)?;
    let mut search_times = Vec::with_capacity(repetitions);
    for _ in 0..repetitions {
        let t0 = Instant::now();
        for x in batch {
            score::anogan_search(model, x, anogan_steps, 1e-3, lambda, rng)?;
        }
        search_times.push(t0.elapsed().as_secs_f64() * 1e3);
    }
    let (encoder_mean_ms, encoder_std_ms) = mean_std(&encoder_times);
    let (search_mean_ms, search_std_ms) = mean_std(&search_times);
    Ok(BenchReport {
        batch_size: batch.len(),
        repetitions,
        anogan_steps,
        encoder_mean_ms,
        encoder_std_ms,
        search_mean_ms,
        search_std_ms,
        speedup: search_mean_ms / encoder_mean_ms.max(1e-9),
    })
}

/// Score-report CSV: sample_id, residual, per-tap losses, score, verdict
/// (blank when no rule was applied), truth.
pub fn scores_to_csv(reports: &[ScoreReport], verdicts: Option<&[Class]>, truths: &[Class]) -> String {
    let taps = reports.first().map_or(0, |r| r.discrimination.len());
    let mut header = String::from("sample_id,residual");
    for i in 1..=taps {
        header.push_str(&format!(",l_d{i}"));
    }
    header.push_str(",score,verdict,truth\n");
    let mut out = header;
    for (i, r) in reports.iter().enumerate() {
        out.push_str(&format!("{},{}", r.sample_id, r.residual));
        for d in &r.discrimination {
            out.push_str(&format!(",{d}"));
        }
        let verdict = verdicts.map_or(String::new(), |v| v[i].to_string());
        out.push_str(&format!(",{},{},{}\n", r.score, verdict, truths[i]));
    }
    out
}

/// Re-read a scores CSV produced by `scores_to_csv`.
pub fn scores_from_csv(text: &str) -> Result<(Vec<ScoreReport>, Vec<Class>)> {
    let mut lines = text.lines();
    let header = lines.next().ok_or_else(|| EvalError::Domain("empty scores CSV".into()))?;
    let cols: Vec<&str> = header.split(',').collect();
    let taps = cols.iter().filter(|c| c.starts_with("l_d")).count();
    let mut reports = Vec::new();
    let mut truths = Vec::new();
    for (n, line) in lines.enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let parts: Vec<&str> = line.split(',').collect();
        if parts.len() != taps + 5 {
            return Err(EvalError::Domain(format!("scores CSV line {}: bad field count", n + 2)));
        }
        let parse = |s: &str| -> Result<f64> {
            s.parse().map_err(|_| EvalError::Domain(format!("bad number {s:?} on line {}", n + 2)))
        };
        let sample_id: usize = parts[0]
            .parse()
            .map_err(|_| EvalError::Domain(format!("bad sample id on line {}", n + 2)))?;
        let residual = parse(parts[1])?;
        let discrimination: Vec<f64> =
            parts[2..2 + taps].iter().map(|s| parse(s)).collect::<Result<_>>()?;
        let score = parse(parts[2 + taps])?;
        let truth = parts[taps + 4]
            .parse::<Class>()
            .map_err(|e| EvalError::Domain(format!("line {}: {e}", n + 2)))?;
        reports.push(ScoreReport { sample_id, residual, discrimination, score });
        truths.push(truth);
    }
    Ok((reports, truths))
}

pub fn metrics_to_csv(rows: &[(&str, EvalMetrics)]) -> String {
    let mut out = String::from("rule,tp,fp,fn,tn,precision,recall,f1,degenerate\n");
    for (rule, m) in rows {
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{},{}\n",
            rule,
            m.true_positives,
            m.false_positives,
            m.false_negatives,
            m.true_negatives,
            m.precision,
            m.recall,
            m.f1,
            m.degenerate
        ));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn all_correct_gives_ones() {
        let truths = vec![Class::Anomalous, Class::Normal, Class::Anomalous];
        let m = compute_metrics(&truths, &truths).unwrap();
        assert_eq!((m.precision, m.recall, m.f1), (1.0, 1.0, 1.0));
        assert!(!m.degenerate);
    }

    #[test]
    fn f1_consistency_of_reference_ratios() {
        // 2PR/(P+R) for P = 0.9324, R = 0.9473
        let p: f64 = 0.9324;
        let r: f64 = 0.9473;
        let f1 = 2.0 * p * r / (p + r);
        assert!((f1 - 0.9398).abs() < 5e-5);
    }

    #[test]
    fn metrics_match_brute_force_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        let pick = |rng: &mut ChaCha8Rng| {
            if rng.gen_bool(0.5) {
                Class::Anomalous
            } else {
                Class::Normal
            }
        };
        let verdicts: Vec<Class> = (0..1000).map(|_| pick(&mut rng)).collect();
        let truths: Vec<Class> = (0..1000).map(|_| pick(&mut rng)).collect();
        let m = compute_metrics(&verdicts, &truths).unwrap();
        let count = |v: Class, t: Class| {
            verdicts.iter().zip(&truths).filter(|(a, b)| **a == v && **b == t).count()
        };
        assert_eq!(m.true_positives, count(Class::Anomalous, Class::Anomalous));
        assert_eq!(m.false_positives, count(Class::Anomalous, Class::Normal));
        assert_eq!(m.false_negatives, count(Class::Normal, Class::Anomalous));
        assert_eq!(m.true_negatives, count(Class::Normal, Class::Normal));
        assert_eq!(
            m.true_positives + m.false_positives + m.false_negatives + m.true_negatives,
            1000
        );
    }

    #[test]
    fn zero_denominators_flagged_not_nan() {
        let verdicts = vec![Class::Normal, Class::Normal];
        let truths = vec![Class::Normal, Class::Normal];
        let m = compute_metrics(&verdicts, &truths).unwrap();
        assert!(m.degenerate);
        assert_eq!(m.precision, 0.0);
        assert_eq!(m.recall, 0.0);
        assert_eq!(m.f1, 0.0);
    }

    #[test]
    fn length_mismatch_is_shape_error() {
        assert!(compute_metrics(&[Class::Normal], &[]).is_err());
    }

    #[test]
    fn scores_csv_round_trip() {
        let reports = vec![
            ScoreReport { sample_id: 0, residual: 1.5, discrimination: vec![0.2, 0.4], score: 1.08 },
            ScoreReport { sample_id: 1, residual: 0.5, discrimination: vec![0.1, 0.3], score: 0.42 },
        ];
        let truths = vec![Class::Anomalous, Class::Normal];
        let csv = scores_to_csv(&reports, None, &truths);
        let (back, back_truths) = scores_from_csv(&csv).unwrap();
        assert_eq!(back, reports);
        assert_eq!(back_truths, truths);
    }
}

//! Full pipeline on the bundled synthetic fixture: parse, label-swap, split,
//! encode, train, score, threshold at the contamination rate, report metrics.
//!
//!     cargo run --example train_toy

use std::time::Instant;

use bigan_anomaly::eval::compute_metrics;
use bigan_anomaly::score::{apply_threshold, score_batch, ThresholdRule};
use bigan_anomaly::train::{train, TrainConfig};
use bigan_anomaly::{fixture, kdd, Class};

fn main() {
    let contamination = 0.2;
    let csv = fixture::synthetic_kdd_csv(2000, 0.25, 7);
    let records = kdd::parse_kdd(&csv).expect("fixture parses");
    let labeled = kdd::swap_labels(&records);

    let cfg = TrainConfig::default();
    let split = kdd::split(&labeled, cfg.seed, contamination).expect("split");
    let schema = kdd::fit_schema(&split.train, kdd::CategoricalCoding::OneHot).expect("schema");
    let train_set: Vec<Vec<f64>> = split
        .train
        .iter()
        .map(|r| kdd::encode(r, &schema).expect("encode"))
        .collect();
    println!(
        "train: {} normals x {} features; test: {} records",
        train_set.len(),
        schema.width(),
        split.test.len()
    );

    let t0 = Instant::now();
    let (model, history) = train(&cfg, &train_set).expect("training");
    println!("trained {} epochs in {:.1}s", history.epochs.len(), t0.elapsed().as_secs_f64());

    let xs: Vec<Vec<f64>> = split
        .test
        .iter()
        .map(|(r, _)| kdd::encode(r, &schema).expect("encode"))
        .collect();
    let truths: Vec<Class> = split.test.iter().map(|(_, c)| *c).collect();
    let reports = score_batch(&model, &xs, &cfg.lambda_weights).expect("scoring");
    let verdicts =
        apply_threshold(&reports, ThresholdRule::ContaminationRate(contamination)).expect("rule");
    let m = compute_metrics(&verdicts, &truths).expect("metrics");
    println!(
        "precision {:.4} recall {:.4} f1 {:.4} (tp {} fp {} fn {} tn {})",
        m.precision, m.recall, m.f1, m.true_positives, m.false_positives, m.false_negatives, m.true_negatives
    );
}

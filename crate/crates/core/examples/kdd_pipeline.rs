//! The data pipeline on its own: parse KDD-format text, swap labels so the
//! minority class is the anomaly, fit an encoding schema on training normals
//! only, and split into a clean train set and a contaminated test set.
//!
//!     cargo run --example kdd_pipeline

use bigan_anomaly::kdd::{self, CategoricalCoding, FeatureKind};
use bigan_anomaly::{fixture, Class};

fn main() {
    let csv = fixture::synthetic_kdd_csv(1000, 0.25, 42);
    let records = kdd::parse_kdd(&csv).expect("parse");
    let labeled = kdd::swap_labels(&records);
    let anoms = labeled.iter().filter(|(_, c)| *c == Class::Anomalous).count();
    println!("{} records, {} anomalous after label swap", labeled.len(), anoms);

    let split = kdd::split(&labeled, 7, 0.1).expect("split");
    let test_anoms = split.test.iter().filter(|(_, c)| *c == Class::Anomalous).count();
    println!(
        "train: {} normals; test: {} records with {} anomalies (10% contamination)",
        split.train.len(),
        split.test.len(),
        test_anoms
    );

    let schema = kdd::fit_schema(&split.train, CategoricalCoding::OneHot).expect("schema");
    println!("encoded width: {} (41 raw features)", schema.width());
    for (i, kind) in schema.features.iter().enumerate() {
        if let FeatureKind::Categorical { vocab } = kind {
            println!("  feature {i}: categorical, vocabulary {vocab:?}");
        }
    }

    let x = kdd::encode(&split.train[0], &schema).expect("encode");
    let back = kdd::decode(&x, &schema).expect("decode");
    let categoricals_match = kdd::CATEGORICAL_INDICES
        .iter()
        .all(|&i| back[i] == split.train[0].fields[i]);
    println!("first train record: categorical fields round-trip exactly: {categoricals_match}");
}

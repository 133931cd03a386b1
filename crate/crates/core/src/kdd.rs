//! KDD-99 ingestion: parsing, the label swap (attack names become the normal
//! class, literal "normal" becomes anomalous), one-hot/dummy encoding with a
//! train-fitted schema, min-max scaling, and the seeded train/test split.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::Class;

#[derive(Debug, Error)]
pub enum KddError {
    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("data domain error: {0}")]
    Domain(String),
}

pub type Result<T> = std::result::Result<T, KddError>;

pub const FEATURE_COUNT: usize = 41;
/// Text-valued features of the KDD-99 format: protocol_type, service, flag.
pub const CATEGORICAL_INDICES: [usize; 3] = [1, 2, 3];

/// One connection record: 41 raw feature fields plus the label (trailing
/// period already stripped).
#[derive(Clone, Debug, PartialEq)]
pub struct RawRecord {
    pub fields: Vec<String>,
    pub label: String,
}

/// Parse comma-separated KDD-99 lines. Blank lines are skipped; any line with
/// the wrong field count is an error naming the line.
pub fn parse_kdd(text: &str) -> Result<Vec<RawRecord>> {
    let mut records = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let parts: Vec<&str> = line.split(',').collect();
        if parts.len() != FEATURE_COUNT + 1 {
            return Err(KddError::Parse {
                line: i + 1,
                msg: format!("expected {} fields, found {}", FEATURE_COUNT + 1, parts.len()),
            });
        }
        let label = parts[FEATURE_COUNT].trim_end_matches('.').to_string();
        if label.is_empty() {
            return Err(KddError::Parse { line: i + 1, msg: "empty label".into() });
        }
        records.push(RawRecord {
            fields: parts[..FEATURE_COUNT].iter().map(|s| s.to_string()).collect(),
            label,
        });
    }
    Ok(records)
}

/// The label swap: attack-named records play the normal class, literal
/// "normal" plays anomalous. Involutive at the class level.
pub fn swap_labels(records: &[RawRecord]) -> Vec<(RawRecord, Class)> {
    records
        .iter()
        .map(|r| {
            let class = if r.label == "normal" { Class::Anomalous } else { Class::Normal };
            (r.clone(), class)
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum FeatureKind {
    Categorical { vocab: Vec<String> },
    Continuous { min: f64, max: f64 },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CategoricalCoding {
    /// One indicator column per category.
    OneHot,
    /// Reference coding: first category maps to the all-zero block.
    Dummy,
}

/// Per-feature encoding plan fitted on training data only.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EncodingSchema {
    pub version: u32,
    pub coding: CategoricalCoding,
    pub features: Vec<FeatureKind>,
}

pub const SCHEMA_VERSION: u32 = 1;

impl EncodingSchema {
    pub fn width(&self) -> usize {
        self.features
            .iter()
            .map(|f| match f {
                FeatureKind::Categorical { vocab } => match self.coding {
                    CategoricalCoding::OneHot => vocab.len(),
                    CategoricalCoding::Dummy => vocab.len().saturating_sub(1),
                },
                FeatureKind::Continuous { .. } => 1,
            })
            .sum()
    }
}

/// Dense encoded sample in [0,1]^width; the truth label rides along for
/// evaluation only.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EncodedSample {
    pub sample_id: usize,
    pub features: Vec<f64>,
    pub truth: Class,
}

fn parse_numeric(value: &str, feature: usize) -> Result<f64> {
    value.trim().parse::<f64>().map_err(|_| {
        KddError::Domain(format!("feature {feature}: non-numeric value {value:?} in a continuous field"))
    })
}

/// Learn vocabularies (sorted, deduplicated) for the text features and
/// min/max ranges for the numeric ones, from training records only.
pub fn fit_schema(records: &[RawRecord], coding: CategoricalCoding) -> Result<EncodingSchema> {
    if records.is_empty() {
        return Err(KddError::Domain("cannot fit a schema on zero records".into()));
    }
    let mut features = Vec::with_capacity(FEATURE_COUNT);
    for f in 0..FEATURE_COUNT {
        if CATEGORICAL_INDICES.contains(&f) {
            let mut vocab: Vec<String> = records.iter().map(|r| r.fields[f].clone()).collect();
            vocab.sort();
            vocab.dedup();
            features.push(FeatureKind::Categorical { vocab });
        } else {
            let mut min = f64::INFINITY;
            let mut max = f64::NEG_INFINITY;
            for r in records {
                let v = parse_numeric(&r.fields[f], f)?;
                min = min.min(v);
                max = max.max(v);
            }
            features.push(FeatureKind::Continuous { min, max });
        }
    }
    Ok(EncodingSchema { version: SCHEMA_VERSION, coding, features })
}

/// Encode one record: one-hot (or dummy) blocks for categoricals, min-max
/// scaled and clamped continuous values. Unseen categories encode to the
/// all-zero block; that is defined behavior, not an error.
pub fn encode(record: &RawRecord, schema: &EncodingSchema) -> Result<Vec<f64>> {
    let mut out = Vec::with_capacity(schema.width());
    for (f, kind) in schema.features.iter().enumerate() {
        match kind {
            FeatureKind::Categorical { vocab } => {
                let hit = vocab.iter().position(|v| v == &record.fields[f]);
                let (start, len) = match schema.coding {
                    CategoricalCoding::OneHot => (0usize, vocab.len()),
                    CategoricalCoding::Dummy => (1usize, vocab.len().saturating_sub(1)),
                };
                let base = out.len();
                out.resize(base + len, 0.0);
                if let Some(i) = hit {
                    if i >= start {
                        out[base + i - start] = 1.0;
                    }
                }
            }
            FeatureKind::Continuous { min, max } => {
                let v = parse_numeric(&record.fields[f], f)?;
                let scaled = if max > min { ((v - min) / (max - min)).clamp(0.0, 1.0) } else { 0.0 };
                out.push(scaled);
            }
        }
    }
    Ok(out)
}

/// Invert `encode` for inspection: categorical values come back exactly,
/// continuous values up to the min-max scaling.
pub fn decode(features: &[f64], schema: &EncodingSchema) -> Result<Vec<String>> {
    if features.len() != schema.width() {
        return Err(KddError::Domain(format!(
            "encoded width {} != schema width {}",
            features.len(),
            schema.width()
        )));
    }
    let mut out = Vec::with_capacity(FEATURE_COUNT);
    let mut pos = 0usize;
    for kind in &schema.features {
        match kind {
            FeatureKind::Categorical { vocab } => {
                let (start, len) = match schema.coding {
                    CategoricalCoding::OneHot => (0usize, vocab.len()),
                    CategoricalCoding::Dummy => (1usize, vocab.len().saturating_sub(1)),
                };
                let block = &features[pos..pos + len];
                let hot = block.iter().position(|&v| v == 1.0);
                let value = match hot {
                    Some(i) => vocab[i + start].clone(),
                    None if schema.coding == CategoricalCoding::Dummy && !vocab.is_empty() => {
                        vocab[0].clone()
                    }
                    None => String::new(), // unseen category
                };
                out.push(value);
                pos += len;
            }
            FeatureKind::Continuous { min, max } => {
                let v = if max > min { min + features[pos] * (max - min) } else { *min };
                out.push(format!("{v}"));
                pos += 1;
            }
        }
    }
    Ok(out)
}

pub fn encode_all(records: &[(RawRecord, Class)], schema: &EncodingSchema) -> Result<Vec<EncodedSample>> {
    records
        .iter()
        .enumerate()
        .map(|(i, (r, c))| {
            Ok(EncodedSample { sample_id: i, features: encode(r, schema)?, truth: *c })
        })
        .collect()
}

/// Result of the seeded dichotomy: training normals from half A, a mixed test
/// set from half B at exactly the requested contamination.
#[derive(Clone, Debug)]
pub struct SplitOutput<T> {
    pub train: Vec<T>,
    pub test: Vec<(T, Class)>,
}

/// Seeded random dichotomy into halves A and B.
pub fn halve<T: Clone>(items: &[(T, Class)], seed: u64) -> (Vec<(T, Class)>, Vec<(T, Class)>) {
    let mut order: Vec<usize> = (0..items.len()).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    order.shuffle(&mut rng);
    let half = items.len() / 2;
    let pick = |idx: &[usize]| idx.iter().map(|&i| items[i].clone()).collect();
    (pick(&order[..half]), pick(&order[half..]))
}

/// Shuffle by seed, halve, keep half A's normal-class records for training,
/// and compose the test set from half B: all of B's normals plus k anomalies
/// with k = ⌊c·|test| + 0.5⌋.
pub fn split<T: Clone>(
    items: &[(T, Class)],
    seed: u64,
    contamination: f64,
) -> Result<SplitOutput<T>> {
    if !(0.0..=1.0).contains(&contamination) {
        return Err(KddError::Domain(format!("contamination {contamination} outside [0,1]")));
    }
    if items.len() < 2 {
        return Err(KddError::Domain("need at least two records to split".into()));
    }
    let (half_a, half_b) = halve(items, seed);

    let train: Vec<T> = half_a
        .iter()
        .filter(|(_, c)| *c == Class::Normal)
        .map(|(t, _)| t.clone())
        .collect();
    if train.is_empty() {
        return Err(KddError::Domain("half A contains no normal-class records".into()));
    }

    let b_normals: Vec<&T> =
        half_b.iter().filter(|(_, c)| *c == Class::Normal).map(|(t, _)| t).collect();
    let b_anoms: Vec<&T> =
        half_b.iter().filter(|(_, c)| *c == Class::Anomalous).map(|(t, _)| t).collect();

    let k = solve_anomaly_count(b_normals.len(), contamination);
    if k > b_anoms.len() {
        let max_c = b_anoms.len() as f64 / (b_normals.len() + b_anoms.len()) as f64;
        return Err(KddError::Domain(format!(
            "half B has only {} anomalous records; requested contamination {contamination} needs {k} \
             (maximum achievable is about {max_c:.4})",
            b_anoms.len()
        )));
    }
    let mut test: Vec<(T, Class)> = b_normals
        .iter()
        .map(|t| ((*t).clone(), Class::Normal))
        .chain(b_anoms.iter().take(k).map(|t| ((*t).clone(), Class::Anomalous)))
        .collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(1));
    test.shuffle(&mut rng);
    Ok(SplitOutput { train, test })
}

/// Smallest k with k = ⌊c·(n_norm + k) + 0.5⌋, found by a local scan around
/// the fixed-point estimate.
fn solve_anomaly_count(n_norm: usize, c: f64) -> usize {
    if c <= 0.0 {
        return 0;
    }
    if c >= 1.0 {
        // pure-anomaly test set is degenerate; keep one normal out is not
        // possible under the rule, so flag everything available
        return usize::MAX;
    }
    let guess = (c * n_norm as f64 / (1.0 - c)).round() as i64;
    for k in (guess - 2).max(0)..=(guess + 2) {
        let n = n_norm as i64 + k;
        if n > 0 && (c * n as f64 + 0.5).floor() as i64 == k {
            return k as usize;
        }
    }
    guess.max(0) as usize
}

#[cfg(test)]
mod tests {
    use super::*;

    fn line(protocol: &str, service: &str, flag: &str, value: f64, label: &str) -> String {
        let mut fields = vec!["0".to_string(); FEATURE_COUNT];
        fields[1] = protocol.into();
        fields[2] = service.into();
        fields[3] = flag.into();
        fields[4] = format!("{value}");
        fields.push(label.into());
        fields.join(",")
    }

    fn toy_records() -> Vec<RawRecord> {
        let text = [
            line("tcp", "http", "SF", 10.0, "smurf."),
            line("udp", "dns", "SF", 20.0, "neptune."),
            line("icmp", "http", "REJ", 30.0, "normal."),
            line("tcp", "smtp", "SF", 40.0, "smurf."),
        ]
        .join("\n");
        parse_kdd(&text).unwrap()
    }

    #[test]
    fn parse_strips_trailing_period() {
        let records = parse_kdd(&line("tcp", "http", "SF", 1.0, "normal.")).unwrap();
        assert_eq!(records[0].label, "normal");
        assert_eq!(records[0].fields.len(), FEATURE_COUNT);
    }

    #[test]
    fn parse_wrong_field_count_names_line() {
        let text = format!("{}\n1,2,3", line("tcp", "http", "SF", 1.0, "smurf."));
        match parse_kdd(&text) {
            Err(KddError::Parse { line, .. }) => assert_eq!(line, 2),
            other => panic!("expected parse error, got {other:?}"),
        }
    }

    #[test]
    fn swap_sends_attacks_to_normal_class() {
        let swapped = swap_labels(&toy_records());
        assert_eq!(swapped[0].1, Class::Normal); // smurf
        assert_eq!(swapped[2].1, Class::Anomalous); // literal "normal"
    }

    #[test]
    fn swap_is_involutive_at_class_level() {
        // swapping classes twice restores the original classes
        let swapped = swap_labels(&toy_records());
        let twice: Vec<Class> = swapped.iter().map(|(_, c)| c.flip().flip()).collect();
        assert_eq!(twice, swapped.iter().map(|(_, c)| *c).collect::<Vec<_>>());
    }

    #[test]
    fn schema_learns_sorted_vocab() {
        let schema = fit_schema(&toy_records(), CategoricalCoding::OneHot).unwrap();
        match &schema.features[1] {
            FeatureKind::Categorical { vocab } => {
                assert_eq!(vocab, &["icmp", "tcp", "udp"]);
            }
            other => panic!("expected categorical, got {other:?}"),
        }
    }

    #[test]
    fn constant_feature_encodes_to_zero() {
        let records = toy_records();
        let schema = fit_schema(&records, CategoricalCoding::OneHot).unwrap();
        // feature 0 is "0" everywhere -> min == max -> constant 0 column
        let enc = encode(&records[0], &schema).unwrap();
        assert_eq!(enc[0], 0.0);
    }

    #[test]
    fn one_hot_block_for_known_category() {
        let records = toy_records();
        let schema = fit_schema(&records, CategoricalCoding::OneHot).unwrap();
        let enc = encode(&records[0], &schema).unwrap();
        // feature order: [0]=continuous, then protocol block {icmp,tcp,udp}
        assert_eq!(&enc[1..4], &[0.0, 1.0, 0.0]);
    }

    #[test]
    fn unseen_category_encodes_to_zero_block() {
        let records = toy_records();
        let schema = fit_schema(&records, CategoricalCoding::OneHot).unwrap();
        let mut other = records[0].clone();
        other.fields[1] = "sctp".into();
        let enc = encode(&other, &schema).unwrap();
        assert_eq!(&enc[1..4], &[0.0, 0.0, 0.0]);
    }

    #[test]
    fn min_max_endpoints() {
        let records = toy_records();
        let schema = fit_schema(&records, CategoricalCoding::OneHot).unwrap();
        // feature 4 spans 10..40
        let lo = encode(&records[0], &schema).unwrap();
        let hi = encode(&records[3], &schema).unwrap();
        let w = schema.width();
        // continuous feature 4 sits right after the three categorical blocks
        let offset = 1 + 3 + 3 + 2; // f0 + protocol(3) + service(3) + flag(2)
        assert_eq!(lo[offset], 0.0);
        assert_eq!(hi[offset], 1.0);
        assert_eq!(lo.len(), w);
    }

    #[test]
    fn decode_round_trips_training_records() {
        let records = toy_records();
        let schema = fit_schema(&records, CategoricalCoding::OneHot).unwrap();
        for r in &records {
            let enc = encode(r, &schema).unwrap();
            let dec = decode(&enc, &schema).unwrap();
            for &f in CATEGORICAL_INDICES.iter() {
                assert_eq!(dec[f], r.fields[f]);
            }
            // continuous values recovered up to scaling
            let v: f64 = r.fields[4].parse().unwrap();
            let back: f64 = dec[4].parse().unwrap();
            assert!((v - back).abs() < 1e-9);
        }
    }

    #[test]
    fn dummy_coding_drops_reference_column() {
        let records = toy_records();
        let one_hot = fit_schema(&records, CategoricalCoding::OneHot).unwrap();
        let dummy = fit_schema(&records, CategoricalCoding::Dummy).unwrap();
        assert_eq!(dummy.width(), one_hot.width() - 3);
        // reference category ("icmp", first in vocab) -> all-zero block
        let enc = encode(&records[2], &dummy).unwrap();
        assert_eq!(&enc[1..3], &[0.0, 0.0]);
        let dec = decode(&enc, &dummy).unwrap();
        assert_eq!(dec[1], "icmp");
    }

    fn labeled_toy(n: usize, anom_every: usize) -> Vec<(usize, Class)> {
        (0..n)
            .map(|i| (i, if i % anom_every == 0 { Class::Anomalous } else { Class::Normal }))
            .collect()
    }

    #[test]
    fn split_zero_contamination_test_is_pure_normal() {
        let items = labeled_toy(100, 5);
        let out = split(&items, 7, 0.0).unwrap();
        assert!(out.test.iter().all(|(_, c)| *c == Class::Normal));
    }

    #[test]
    fn split_contamination_count_exact() {
        let items = labeled_toy(1000, 4);
        let out = split(&items, 11, 0.2).unwrap();
        let n = out.test.len();
        let anoms = out.test.iter().filter(|(_, c)| *c == Class::Anomalous).count();
        assert_eq!(anoms, (0.2 * n as f64 + 0.5).floor() as usize);
    }

    #[test]
    fn split_same_seed_identical() {
        let items = labeled_toy(200, 3);
        let a = split(&items, 42, 0.1).unwrap();
        let b = split(&items, 42, 0.1).unwrap();
        assert_eq!(a.train, b.train);
        assert_eq!(a.test.iter().map(|(i, _)| *i).collect::<Vec<_>>(),
                   b.test.iter().map(|(i, _)| *i).collect::<Vec<_>>());
    }

    #[test]
    fn split_train_has_no_anomalies_and_sets_disjoint() {
        let items = labeled_toy(500, 3);
        let out = split(&items, 5, 0.2).unwrap();
        let anom_ids: std::collections::HashSet<usize> =
            items.iter().filter(|(_, c)| *c == Class::Anomalous).map(|(i, _)| *i).collect();
        assert!(out.train.iter().all(|i| !anom_ids.contains(i)));
        let train_set: std::collections::HashSet<usize> = out.train.iter().copied().collect();
        assert!(out.test.iter().all(|(i, _)| !train_set.contains(i)));
    }

    #[test]
    fn split_insufficient_anomalies_reports_max() {
        let items = labeled_toy(100, 50); // 2 anomalies total
        match split(&items, 1, 0.4) {
            Err(KddError::Domain(msg)) => assert!(msg.contains("maximum achievable")),
            other => panic!("expected domain error, got {other:?}"),
        }
    }
}

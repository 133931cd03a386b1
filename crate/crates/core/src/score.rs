//! Anomaly scoring: residual loss from the encoder round trip, feature
//! matching over critic taps, the combined score, both selection criteria,
//! and the iterative latent-search baseline it replaces.

use rand::Rng;
use rand_distr::StandardNormal;
use thiserror::Error;

use crate::model::BiganModel;
use crate::tensor::{Mode, NetRole, Tape, TensorError};
use crate::Class;

#[derive(Debug, Error)]
pub enum ScoreError {
    #[error("scoring domain error: {0}")]
    Domain(String),
    #[error("latent search fault: {0}")]
    SearchFault(#[from] TensorError),
}

pub type Result<T> = std::result::Result<T, ScoreError>;

/// Per-sample score decomposition. `score` is always recomputable from the
/// stored parts: S = (1 − Σλ)·residual + Σ λᵢ·discriminationᵢ.
#[derive(Clone, Debug, PartialEq)]
pub struct ScoreReport {
    pub sample_id: usize,
    pub residual: f64,
    pub discrimination: Vec<f64>,
    pub score: f64,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum ThresholdRule {
    FixedThreshold(f64),
    /// Flag the top c fraction by score; c in [0, 1].
    ContaminationRate(f64),
}

/// L1 distance Σ|xᵢ − x̂ᵢ|.
pub fn residual_loss(x: &[f64], x_hat: &[f64]) -> Result<f64> {
    if x.len() != x_hat.len() {
        return Err(ScoreError::Domain(format!(
            "residual_loss: lengths {} vs {}",
            x.len(),
            x_hat.len()
        )));
    }
    Ok(x.iter().zip(x_hat.iter()).map(|(a, b)| (a - b).abs()).sum())
}

/// Per tap i: Σ|fᵢ(x, z) − fᵢ(G(z), z)|, Eval mode.
pub fn discrimination_loss(model: &BiganModel, x: &[f64], z: &[f64]) -> Result<Vec<f64>> {
    let g = model.generate(z).map_err(ScoreError::SearchFault)?;
    let real = model.criticize(x, z).map_err(ScoreError::SearchFault)?;
    let fake = model.criticize(&g, z).map_err(ScoreError::SearchFault)?;
    Ok(real
        .taps
        .iter()
        .zip(fake.taps.iter())
        .map(|(a, b)| a.iter().zip(b.iter()).map(|(u, v)| (u - v).abs()).sum())
        .collect())
}

fn validate_lambda(lambda: &[f64], taps: usize) -> Result<()> {
    if lambda.len() != taps {
        return Err(ScoreError::Domain(format!(
            "{} lambda weights for {} taps",
            lambda.len(),
            taps
        )));
    }
    if lambda.iter().any(|&l| l < 0.0) {
        return Err(ScoreError::Domain("lambda weights must be nonnegative".into()));
    }
    let sum: f64 = lambda.iter().sum();
    if sum >= 1.0 {
        return Err(ScoreError::Domain(format!("lambda weights sum to {sum}, must be < 1")));
    }
    Ok(())
}

pub fn combine(residual: f64, discrimination: &[f64], lambda: &[f64]) -> f64 {
    let lsum: f64 = lambda.iter().sum();
    (1.0 - lsum) * residual
        + discrimination.iter().zip(lambda.iter()).map(|(d, l)| l * d).sum::<f64>()
}

/// Single-pass score: z = E(x), x̂ = G(z), then combine residual and
/// feature-matching terms. No iterative search.
pub fn anomaly_score(
    model: &BiganModel,
    x: &[f64],
    lambda: &[f64],
    sample_id: usize,
) -> Result<ScoreReport> {
    validate_lambda(lambda, model.tap_indices.len())?;
    let z = model.encode(x).map_err(ScoreError::SearchFault)?;
    let x_hat = model.generate(&z).map_err(ScoreError::SearchFault)?;
    let residual = residual_loss(x, &x_hat)?;
    let discrimination = discrimination_loss(model, x, &z)?;
    let score = combine(residual, &discrimination, lambda);
    Ok(ScoreReport { sample_id, residual, discrimination, score })
}

pub fn score_batch(model: &BiganModel, xs: &[Vec<f64>], lambda: &[f64]) -> Result<Vec<ScoreReport>> {
    xs.iter()
        .enumerate()
        .map(|(i, x)| anomaly_score(model, x, lambda, i))
        .collect()
}

/// Degenerate-model flag: every score identical across a calibration batch.
pub fn is_degenerate(reports: &[ScoreReport]) -> bool {
    reports.len() > 1 && reports.windows(2).all(|w| w[0].score == w[1].score)
}

/// Iterative latent search baseline: gradient descent on the anomaly-score
/// loss with respect to z only (model frozen), from a random start. Returns
/// the best z found and the loss trajectory.
pub fn anogan_search<R: Rng>(
    model: &BiganModel,
    x: &[f64],
    steps: usize,
    step_size: f64,
    lambda: &[f64],
    rng: &mut R,
) -> Result<(Vec<f64>, Vec<f64>)> {
    if steps == 0 {
        return Err(ScoreError::Domain("latent search needs at least one step".into()));
    }
    validate_lambda(lambda, model.tap_indices.len())?;
    let lsum: f64 = lambda.iter().sum();
    let mut z: Vec<f64> = (0..model.latent_dim).map(|_| rng.sample(StandardNormal)).collect();
    let mut best_z = z.clone();
    let mut best_loss = f64::INFINITY;
    let mut trajectory = Vec::with_capacity(steps);

    for _ in 0..steps {
        let mut tape = Tape::new();
        let xn = tape.input(x.to_vec());
        let zn = tape.input(z.clone());
        let gn = tape.mlp(model, NetRole::Generator, zn, Mode::Eval, rng)?;
        let diff = tape.sub(xn, gn)?;
        let res = tape.abs_sum(diff);
        let mut loss = tape.scale(res, 1.0 - lsum);
        if !lambda.is_empty() {
            let real_pair = tape.concat(xn, zn);
            let fake_pair = tape.concat(gn, zn);
            let real_taps = tape.mlp_layers(model, NetRole::Critic, real_pair, Mode::Eval, rng)?;
            let fake_taps = tape.mlp_layers(model, NetRole::Critic, fake_pair, Mode::Eval, rng)?;
            for (&t, &l) in model.tap_indices.iter().zip(lambda.iter()) {
                let d = tape.sub(real_taps[t], fake_taps[t])?;
                let ld = tape.abs_sum(d);
                let weighted = tape.scale(ld, l);
                loss = tape.add(loss, weighted)?;
            }
        }
        let value = tape.scalar(loss);
        if !value.is_finite() {
            return Err(ScoreError::SearchFault(TensorError::NonFinite("search loss".into())));
        }
        trajectory.push(value);
        if value < best_loss {
            best_loss = value;
            best_z = z.clone();
        }
        let store = tape.backward(model, loss, &[1.0])?;
        if let Some(g) = store.input_grad(zn) {
            for (zi, gi) in z.iter_mut().zip(g.iter()) {
                *zi -= step_size * gi;
            }
        }
    }
    Ok((best_z, trajectory))
}

/// FixedThreshold: anomalous iff S > τ. ContaminationRate: the k highest
/// scores with k = ⌊c·N + 0.5⌋, ties broken by lower sample_id first.
pub fn apply_threshold(reports: &[ScoreReport], rule: ThresholdRule) -> Result<Vec<Class>> {
    match rule {
        ThresholdRule::FixedThreshold(tau) => {
            if !tau.is_finite() {
                return Err(ScoreError::Domain(format!("threshold {tau} is not finite")));
            }
            Ok(reports
                .iter()
                .map(|r| if r.score > tau { Class::Anomalous } else { Class::Normal })
                .collect())
        }
        ThresholdRule::ContaminationRate(c) => {
            if !(0.0..=1.0).contains(&c) {
                return Err(ScoreError::Domain(format!("contamination rate {c} outside [0,1]")));
            }
            if reports.is_empty() {
                return Err(ScoreError::Domain("contamination rule needs a nonempty batch".into()));
            }
            let n = reports.len();
            let k = (c * n as f64 + 0.5).floor() as usize;
            let k = k.min(n);
            let mut order: Vec<usize> = (0..n).collect();
            order.sort_by(|&a, &b| {
                reports[b]
                    .score
                    .partial_cmp(&reports[a].score)
                    .unwrap()
                    .then(reports[a].sample_id.cmp(&reports[b].sample_id))
            });
            let mut verdicts = vec![Class::Normal; n];
            for &i in order.iter().take(k) {
                verdicts[i] = Class::Anomalous;
            }
            Ok(verdicts)
        }
    }
}

/// Empirical threshold: τ maximizing F1 on a calibration set with known
/// labels, scanned over midpoints of the sorted scores.
pub fn calibrate_threshold(reports: &[ScoreReport], truths: &[Class]) -> Result<f64> {
    if reports.len() != truths.len() {
        return Err(ScoreError::Domain(format!(
            "{} reports vs {} labels",
            reports.len(),
            truths.len()
        )));
    }
    if !truths.contains(&Class::Normal) || !truths.contains(&Class::Anomalous) {
        return Err(ScoreError::Domain("calibration set must contain both classes".into()));
    }
    let mut scores: Vec<f64> = reports.iter().map(|r| r.score).collect();
    scores.sort_by(|a, b| a.partial_cmp(b).unwrap());
    scores.dedup();
    if scores.len() < 2 {
        return Err(ScoreError::Domain("all calibration scores identical; no separating threshold".into()));
    }
    let f1_at = |tau: f64| -> f64 {
        let (mut tp, mut fp, mut fnc) = (0.0, 0.0, 0.0);
        for (r, t) in reports.iter().zip(truths.iter()) {
            let flagged = r.score > tau;
            match (flagged, t) {
                (true, Class::Anomalous) => tp += 1.0,
                (true, Class::Normal) => fp += 1.0,
                (false, Class::Anomalous) => fnc += 1.0,
                (false, Class::Normal) => {}
            }
        }
        if tp == 0.0 {
            0.0
        } else {
            2.0 * tp / (2.0 * tp + fp + fnc)
        }
    };
    let mut best_tau = (scores[0] + scores[1]) / 2.0;
    let mut best_f1 = f1_at(best_tau);
    for w in scores.windows(2) {
        let tau = (w[0] + w[1]) / 2.0;
        let f1 = f1_at(tau);
        if f1 > best_f1 {
            best_f1 = f1;
            best_tau = tau;
        }
    }
    Ok(best_tau)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::train::TrainConfig;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn model(input_dim: usize, seed: u64) -> BiganModel {
        let cfg = TrainConfig::default();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        BiganModel::init(&cfg, input_dim, &mut rng)
    }

    fn report(id: usize, score: f64) -> ScoreReport {
        ScoreReport { sample_id: id, residual: score, discrimination: vec![], score }
    }

    #[test]
    fn residual_loss_identical_zero() {
        assert_eq!(residual_loss(&[0.1, 0.9], &[0.1, 0.9]).unwrap(), 0.0);
    }

    #[test]
    fn residual_loss_hand_sum() {
        assert_eq!(residual_loss(&[1.0, 0.0, 1.0], &[0.0, 0.0, 0.0]).unwrap(), 2.0);
    }

    #[test]
    fn residual_loss_symmetric() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        for _ in 0..50 {
            let a: Vec<f64> = (0..6).map(|_| rng.gen_range(-2.0..2.0)).collect();
            let b: Vec<f64> = (0..6).map(|_| rng.gen_range(-2.0..2.0)).collect();
            assert_eq!(residual_loss(&a, &b).unwrap(), residual_loss(&b, &a).unwrap());
        }
    }

    #[test]
    fn residual_loss_shape_error() {
        assert!(residual_loss(&[1.0], &[1.0, 2.0]).is_err());
    }

    #[test]
    fn discrimination_loss_zero_when_x_is_gz() {
        let m = model(8, 1);
        let z = vec![0.4; m.latent_dim];
        let g = m.generate(&z).unwrap();
        let ld = discrimination_loss(&m, &g, &z).unwrap();
        assert_eq!(ld.len(), 2);
        assert!(ld.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn discrimination_loss_single_tap_hand_critic() {
        use crate::tensor::{Activation, DenseLayer, Matrix, Mlp};
        // critic: 2 layers, tap on hidden layer 0
        let critic = Mlp::new(vec![
            DenseLayer::new(
                Matrix::from_rows(&[vec![1.0, -1.0, 0.5], vec![0.0, 2.0, 1.0]]),
                vec![0.0, 0.0],
                Activation::Identity,
                0.0,
            )
            .unwrap(),
            DenseLayer::new(Matrix::from_rows(&[vec![1.0, 1.0]]), vec![0.0], Activation::Identity, 0.0).unwrap(),
        ]);
        let gen = Mlp::new(vec![DenseLayer::new(
            Matrix::from_rows(&[vec![0.0], vec![0.0]]),
            vec![0.25, 0.75],
            Activation::Identity,
            0.0,
        )
        .unwrap()]);
        let enc = Mlp::new(vec![DenseLayer::new(
            Matrix::from_rows(&[vec![1.0, 0.0]]),
            vec![0.0],
            Activation::Identity,
            0.0,
        )
        .unwrap()]);
        let m = BiganModel { generator: gen, encoder: enc, critic, tap_indices: vec![0], latent_dim: 1, input_dim: 2 };
        let x = [1.0, 0.0];
        let z = [0.5];
        // G(z) = (0.25, 0.75)
        // f0(x,z)   = (1*1 -1*0 +0.5*0.5, 2*0 + 1*0.5)      = (1.25, 0.5)
        // f0(Gz,z)  = (0.25 - 0.75 + 0.25, 1.5 + 0.5)       = (-0.25, 2.0)
        // L_D1 = |1.25+0.25| + |0.5-2.0| = 1.5 + 1.5 = 3.0
        let ld = discrimination_loss(&m, &x, &z).unwrap();
        assert_eq!(ld, vec![3.0]);
    }

    #[test]
    fn zero_lambda_collapses_to_residual() {
        let m = model(6, 2);
        let x = vec![0.7; 6];
        let r = anomaly_score(&m, &x, &[0.0, 0.0], 0).unwrap();
        assert_eq!(r.score, r.residual);
        let z = m.encode(&x).unwrap();
        let xh = m.generate(&z).unwrap();
        assert_eq!(r.residual, residual_loss(&x, &xh).unwrap());
    }

    #[test]
    fn lambda_weighting_arithmetic() {
        let m = model(6, 3);
        let x = vec![0.3; 6];
        let eps = 1e-6;
        let r = anomaly_score(&m, &x, &[0.0, 1.0 - eps], 0).unwrap();
        assert!((r.score - r.discrimination[1]).abs() < 1e-4);
        // exact recombination always holds
        let recombined = combine(r.residual, &r.discrimination, &[0.0, 1.0 - eps]);
        assert!((r.score - recombined).abs() < 1e-15);
    }

    #[test]
    fn lambda_sum_ge_one_rejected() {
        let m = model(4, 4);
        assert!(anomaly_score(&m, &vec![0.5; 4], &[0.5, 0.6], 0).is_err());
    }

    #[test]
    fn anogan_single_zero_step_returns_start() {
        let m = model(5, 5);
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        let expected: Vec<f64> = {
            let mut r2 = ChaCha8Rng::seed_from_u64(42);
            (0..m.latent_dim).map(|_| r2.sample(StandardNormal)).collect()
        };
        let (z, traj) = anogan_search(&m, &vec![0.5; 5], 1, 0.0, &[0.1, 0.3], &mut rng).unwrap();
        assert_eq!(z, expected);
        assert_eq!(traj.len(), 1);
    }

    #[test]
    fn anogan_trajectory_nonincreasing_at_small_step() {
        let m = model(4, 6);
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let (_, traj) = anogan_search(&m, &vec![0.6; 4], 100, 1e-3, &[0.0, 0.0], &mut rng).unwrap();
        for w in traj.windows(2) {
            assert!(w[1] <= w[0] + 1e-9, "trajectory rose: {} -> {}", w[0], w[1]);
        }
    }

    #[test]
    fn contamination_zero_flags_nothing() {
        let reports: Vec<ScoreReport> = (0..5).map(|i| report(i, i as f64)).collect();
        let v = apply_threshold(&reports, ThresholdRule::ContaminationRate(0.0)).unwrap();
        assert!(v.iter().all(|&c| c == Class::Normal));
    }

    #[test]
    fn contamination_top_two_of_five() {
        let scores = [9.0, 7.0, 5.0, 3.0, 1.0];
        let reports: Vec<ScoreReport> = scores.iter().enumerate().map(|(i, &s)| report(i, s)).collect();
        let v = apply_threshold(&reports, ThresholdRule::ContaminationRate(0.4)).unwrap();
        assert_eq!(v, vec![Class::Anomalous, Class::Anomalous, Class::Normal, Class::Normal, Class::Normal]);
    }

    #[test]
    fn contamination_matches_sort_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(99);
        for _ in 0..100 {
            let n = rng.gen_range(1..40);
            let reports: Vec<ScoreReport> =
                (0..n).map(|i| report(i, (rng.gen_range(0..10) as f64) / 2.0)).collect();
            let c: f64 = rng.gen_range(0.0..1.0);
            let v = apply_threshold(&reports, ThresholdRule::ContaminationRate(c)).unwrap();
            let k = (c * n as f64 + 0.5).floor() as usize;
            assert_eq!(v.iter().filter(|&&x| x == Class::Anomalous).count(), k.min(n));
            // brute-force oracle: stable sort by (score desc, id asc)
            let mut idx: Vec<usize> = (0..n).collect();
            idx.sort_by(|&a, &b| {
                reports[b].score.partial_cmp(&reports[a].score).unwrap().then(a.cmp(&b))
            });
            for (rank, &i) in idx.iter().enumerate() {
                let expect = if rank < k.min(n) { Class::Anomalous } else { Class::Normal };
                assert_eq!(v[i], expect);
            }
        }
    }

    #[test]
    fn contamination_out_of_range_is_error() {
        let reports = vec![report(0, 1.0)];
        assert!(apply_threshold(&reports, ThresholdRule::ContaminationRate(1.5)).is_err());
    }

    #[test]
    fn fixed_threshold_monotonicity() {
        let reports: Vec<ScoreReport> = (0..10).map(|i| report(i, i as f64)).collect();
        let low = apply_threshold(&reports, ThresholdRule::FixedThreshold(2.5)).unwrap();
        let high = apply_threshold(&reports, ThresholdRule::FixedThreshold(7.5)).unwrap();
        for (l, h) in low.iter().zip(high.iter()) {
            // raising τ never converts normal to anomalous
            if *l == Class::Normal {
                assert_eq!(*h, Class::Normal);
            }
        }
    }

    #[test]
    fn calibrate_separated_scores_perfect_f1() {
        let reports: Vec<ScoreReport> = (0..10).map(|i| report(i, i as f64)).collect();
        let truths: Vec<Class> =
            (0..10).map(|i| if i >= 7 { Class::Anomalous } else { Class::Normal }).collect();
        let tau = calibrate_threshold(&reports, &truths).unwrap();
        let v = apply_threshold(&reports, ThresholdRule::FixedThreshold(tau)).unwrap();
        assert_eq!(v, truths);
    }

    #[test]
    fn calibrate_matches_exhaustive_scan() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let reports: Vec<ScoreReport> =
            (0..30).map(|i| report(i, rng.gen_range(0.0..5.0))).collect();
        let truths: Vec<Class> = (0..30)
            .map(|_| if rng.gen_bool(0.3) { Class::Anomalous } else { Class::Normal })
            .collect();
        let tau = calibrate_threshold(&reports, &truths).unwrap();
        // exhaustive oracle over a fine grid
        let f1 = |t: f64| {
            let v = apply_threshold(&reports, ThresholdRule::FixedThreshold(t)).unwrap();
            let tp = v.iter().zip(&truths).filter(|(a, b)| **a == Class::Anomalous && **b == Class::Anomalous).count() as f64;
            let fp = v.iter().zip(&truths).filter(|(a, b)| **a == Class::Anomalous && **b == Class::Normal).count() as f64;
            let fnc = v.iter().zip(&truths).filter(|(a, b)| **a == Class::Normal && **b == Class::Anomalous).count() as f64;
            if tp == 0.0 { 0.0 } else { 2.0 * tp / (2.0 * tp + fp + fnc) }
        };
        let best_grid = (0..=500).map(|i| f1(i as f64 * 0.01)).fold(0.0f64, f64::max);
        assert!((f1(tau) - best_grid).abs() < 1e-12);
    }

    #[test]
    fn calibrate_degenerate_cases() {
        let reports = vec![report(0, 1.0), report(1, 1.0)];
        let truths = vec![Class::Normal, Class::Anomalous];
        assert!(calibrate_threshold(&reports, &truths).is_err());
        let single_class = vec![Class::Normal, Class::Normal];
        let distinct = vec![report(0, 1.0), report(1, 2.0)];
        assert!(calibrate_threshold(&distinct, &single_class).is_err());
    }
}

//! Timing comparison of the two ways to map a sample into latent space:
//! one encoder forward pass versus iterative gradient search on z.
//!
//!     cargo run --example encoder_vs_search

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use bigan_anomaly::eval::benchmark;
use bigan_anomaly::model::BiganModel;
use bigan_anomaly::train::TrainConfig;

fn main() {
    let cfg = TrainConfig::default();
    let input_dim = 24;
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let model = BiganModel::init(&cfg, input_dim, &mut rng);
    let batch: Vec<Vec<f64>> =
        (0..10).map(|_| (0..input_dim).map(|_| rng.gen()).collect()).collect();

    let report =
        benchmark(&model, &batch, 5, 500, &cfg.lambda_weights, &mut rng).expect("benchmark");
    println!(
        "encoder path: {:.3} ± {:.3} ms/batch",
        report.encoder_mean_ms, report.encoder_std_ms
    );
    println!(
        "latent search ({} steps): {:.1} ± {:.1} ms/batch",
        report.anogan_steps, report.search_mean_ms, report.search_std_ms
    );
    println!("speedup: {:.0}x", report.speedup);
}

//! Why the Wasserstein distance and not Jensen-Shannon: for two point masses
//! separated by θ, JS pins at ln 2 for every θ > 0 (no gradient in θ) while
//! W₁ grows linearly.
//!
//!     cargo run --example divergence_saturation

use bigan_anomaly::divergence::{cross_entropy, kl, saturation_sweep, DiscreteDist};

fn main() {
    let grid: Vec<f64> = (0..=20).map(|i| i as f64 * 0.1).collect();
    println!("{:>5} {:>10} {:>12}", "theta", "js", "wasserstein1");
    for (theta, js, w1) in saturation_sweep(&grid).expect("sweep") {
        println!("{theta:>5.1} {js:>10.6} {w1:>12.6}");
    }

    // the same saturation, seen through KL and cross-entropy
    let p = DiscreteDist::point_mass(0.0);
    let q = DiscreteDist::point_mass(0.5);
    println!("\ndisjoint point masses: KL = {}, H(P||Q) = {}", kl(&p, &q), cross_entropy(&p, &q));
}

//! Central finite-difference check of the tape's analytic gradients through
//! the full three-network objective (encoder, generator, critic).
//!
//!     cargo run --example gradient_check

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use bigan_anomaly::model::BiganModel;
use bigan_anomaly::tensor::{Mode, NetRole, Tape};
use bigan_anomaly::train::{critic_objective, sample_latent, TrainConfig};

const H: f64 = 1e-5;

fn param_mut(m: &mut BiganModel, role: NetRole, layer: usize, idx: usize) -> &mut f64 {
    let mlp = match role {
        NetRole::Generator => &mut m.generator,
        NetRole::Encoder => &mut m.encoder,
        _ => &mut m.critic,
    };
    &mut mlp.layers[layer].weights.data[idx]
}

fn main() {
    let cfg = TrainConfig::default();
    let input_dim = 12;
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let model = BiganModel::init(&cfg, input_dim, &mut rng);

    let xs: Vec<Vec<f64>> = (0..3).map(|_| (0..input_dim).map(|_| rng.gen()).collect()).collect();
    let zs = sample_latent(&cfg, xs.len(), &mut rng).expect("latents");

    // analytic gradients of V = mean[D(x,E(x)) − D(G(z),z)]
    let mut tape = Tape::new();
    let mut terms = Vec::new();
    for (x, z) in xs.iter().zip(zs.iter()) {
        let xn = tape.input(x.clone());
        let zn = tape.input(z.clone());
        let en = tape.mlp(&model, NetRole::Encoder, xn, Mode::Eval, &mut rng).unwrap();
        let gn = tape.mlp(&model, NetRole::Generator, zn, Mode::Eval, &mut rng).unwrap();
        let real = tape.concat(xn, en);
        let fake = tape.concat(gn, zn);
        let d_real = tape.mlp(&model, NetRole::Critic, real, Mode::Eval, &mut rng).unwrap();
        let d_fake = tape.mlp(&model, NetRole::Critic, fake, Mode::Eval, &mut rng).unwrap();
        terms.push(tape.sub(d_real, d_fake).unwrap());
    }
    let root = tape.mean_of(terms).unwrap();
    let store = tape.backward(&model, root, &[1.0]).unwrap();

    let nets = [
        (NetRole::Generator, model.generator.layers.len()),
        (NetRole::Encoder, model.encoder.layers.len()),
        (NetRole::Critic, model.critic.layers.len()),
    ];
    let mut worst = 0.0f64;
    for (role, layers) in nets {
        for layer in 0..layers {
            let grads = store.layer_grads(role, layer).expect("layer touched");
            // spot-check a handful of weights per layer
            for probe in 0..8 {
                let n = grads.d_weights.data.len();
                let idx = (probe * 2654435761usize) % n;
                let analytic = grads.d_weights.data[idx];
                let mut perturbed = model.clone();
                *param_mut(&mut perturbed, role, layer, idx) += H;
                let plus = critic_objective(&perturbed, &xs, &zs).unwrap();
                *param_mut(&mut perturbed, role, layer, idx) -= 2.0 * H;
                let minus = critic_objective(&perturbed, &xs, &zs).unwrap();
                let fd = (plus - minus) / (2.0 * H);
                let rel = (analytic - fd).abs() / analytic.abs().max(fd.abs()).max(1e-8);
                worst = worst.max(rel);
            }
        }
    }
    println!("worst relative error across all three networks: {worst:.2e}");
}

//! The three networks: generator G (latent → real), encoder E (real →
//! latent), and a critic D over joint pairs (x, z) with intermediate-layer
//! taps used by the feature-matching score.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::tensor::{
    dense_forward, Activation, DenseLayer, LayerBank, Mlp, Mode, NetRole, Result,
    TensorError, LEAKY_SLOPE,
};
use crate::train::TrainConfig;

/// Hidden widths of the default architecture.
pub const GEN_HIDDEN: [usize; 2] = [64, 128];
pub const ENC_HIDDEN: [usize; 2] = [128, 64];
pub const CRITIC_HIDDEN: [usize; 3] = [256, 128, 64];
pub const CRITIC_DROPOUT: f64 = 0.2;
/// Taps sit on the last two hidden layers of the critic (widths 128 and 64).
pub const DEFAULT_TAPS: [usize; 2] = [1, 2];

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BiganModel {
    pub generator: Mlp,
    pub encoder: Mlp,
    pub critic: Mlp,
    pub tap_indices: Vec<usize>,
    pub latent_dim: usize,
    pub input_dim: usize,
}

/// Critic score plus the intermediate activations at every tap, captured in
/// the same forward pass.
#[derive(Clone, Debug)]
pub struct CriticOutput {
    pub score: f64,
    pub taps: Vec<Vec<f64>>,
}

impl LayerBank for BiganModel {
    fn layer(&self, net: NetRole, idx: usize) -> &DenseLayer {
        match net {
            NetRole::Generator => &self.generator.layers[idx],
            NetRole::Encoder => &self.encoder.layers[idx],
            NetRole::Critic => &self.critic.layers[idx],
            NetRole::Standalone => panic!("BiganModel has no standalone net"),
        }
    }

    fn layer_count(&self, net: NetRole) -> usize {
        match net {
            NetRole::Generator => self.generator.layers.len(),
            NetRole::Encoder => self.encoder.layers.len(),
            NetRole::Critic => self.critic.layers.len(),
            NetRole::Standalone => 0,
        }
    }
}

fn stack<R: Rng>(
    dims: &[usize],
    out_act: Activation,
    hidden_dropout: f64,
    rng: &mut R,
) -> Mlp {
    let mut layers = Vec::with_capacity(dims.len() - 1);
    for i in 0..dims.len() - 1 {
        let last = i == dims.len() - 2;
        let act = if last { out_act } else { Activation::LeakyRelu(LEAKY_SLOPE) };
        let dropout = if last { 0.0 } else { hidden_dropout };
        layers.push(DenseLayer::init(dims[i], dims[i + 1], act, dropout, rng));
    }
    Mlp::new(layers)
}

impl BiganModel {
    /// Seeded initialization of the default architecture.
    pub fn init<R: Rng>(cfg: &TrainConfig, input_dim: usize, rng: &mut R) -> Self {
        let l = cfg.latent_dim;
        let generator = stack(&[l, GEN_HIDDEN[0], GEN_HIDDEN[1], input_dim], Activation::Sigmoid, 0.0, rng);
        let encoder = stack(&[input_dim, ENC_HIDDEN[0], ENC_HIDDEN[1], l], Activation::Identity, 0.0, rng);
        let critic = stack(
            &[input_dim + l, CRITIC_HIDDEN[0], CRITIC_HIDDEN[1], CRITIC_HIDDEN[2], 1],
            Activation::Identity,
            CRITIC_DROPOUT,
            rng,
        );
        BiganModel {
            generator,
            encoder,
            critic,
            tap_indices: DEFAULT_TAPS.to_vec(),
            latent_dim: l,
            input_dim,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let check = |cond: bool, msg: &str| {
            if cond {
                Ok(())
            } else {
                Err(TensorError::Shape(msg.to_string()))
            }
        };
        check(self.generator.in_dim() == self.latent_dim, "generator input != latent_dim")?;
        check(self.generator.out_dim() == self.input_dim, "generator output != input_dim")?;
        check(self.encoder.in_dim() == self.input_dim, "encoder input != input_dim")?;
        check(self.encoder.out_dim() == self.latent_dim, "encoder output != latent_dim")?;
        check(
            self.critic.in_dim() == self.input_dim + self.latent_dim,
            "critic input != input_dim + latent_dim",
        )?;
        check(self.critic.out_dim() == 1, "critic output is not scalar")?;
        let hidden = self.critic.layers.len() - 1;
        check(
            self.tap_indices.windows(2).all(|w| w[0] < w[1])
                && self.tap_indices.iter().all(|&t| t < hidden),
            "tap indices must be strictly increasing hidden-layer indices",
        )?;
        Ok(())
    }

    pub fn param_count(&self) -> usize {
        self.generator.param_count() + self.encoder.param_count() + self.critic.param_count()
    }

    /// G(z), Eval mode (deterministic; final Sigmoid keeps outputs in (0,1)).
    pub fn generate(&self, z: &[f64]) -> Result<Vec<f64>> {
        if z.len() != self.latent_dim {
            return Err(TensorError::Shape(format!(
                "generate: latent length {} != {}",
                z.len(),
                self.latent_dim
            )));
        }
        self.generator.forward(z, Mode::Eval, &mut NoRng)
    }

    /// E(x), Eval mode (unbounded latent).
    pub fn encode(&self, x: &[f64]) -> Result<Vec<f64>> {
        if x.len() != self.input_dim {
            return Err(TensorError::Shape(format!(
                "encode: input length {} != {}",
                x.len(),
                self.input_dim
            )));
        }
        self.encoder.forward(x, Mode::Eval, &mut NoRng)
    }

    /// D(x, z) with tap activations, Eval mode. Critic input is x ‖ z.
    pub fn criticize(&self, x: &[f64], z: &[f64]) -> Result<CriticOutput> {
        if x.len() != self.input_dim || z.len() != self.latent_dim {
            return Err(TensorError::Shape(format!(
                "criticize: got ({}, {}), expected ({}, {})",
                x.len(),
                z.len(),
                self.input_dim,
                self.latent_dim
            )));
        }
        let mut joint = Vec::with_capacity(x.len() + z.len());
        joint.extend_from_slice(x);
        joint.extend_from_slice(z);
        let outs = self.critic.forward_layers(&joint, Mode::Eval, &mut NoRng)?;
        let taps = self.tap_indices.iter().map(|&t| outs[t].clone()).collect();
        let score = outs.last().unwrap()[0];
        Ok(CriticOutput { score, taps })
    }
}

/// RNG stand-in for Eval-mode passes, which must never draw randomness.
struct NoRng;

impl rand::RngCore for NoRng {
    fn next_u32(&mut self) -> u32 {
        unreachable!("Eval-mode forward drew randomness")
    }

    fn next_u64(&mut self) -> u64 {
        unreachable!("Eval-mode forward drew randomness")
    }

    fn fill_bytes(&mut self, _dest: &mut [u8]) {
        unreachable!("Eval-mode forward drew randomness")
    }

    fn try_fill_bytes(&mut self, _dest: &mut [u8]) -> std::result::Result<(), rand::Error> {
        unreachable!("Eval-mode forward drew randomness")
    }
}

/// Train-mode single-layer replay helper used by tests and the trainer's
/// objective probes.
pub fn replay_layers<R: Rng>(mlp: &Mlp, x: &[f64], rng: &mut R) -> Result<Vec<f64>> {
    let mut h = x.to_vec();
    for layer in &mlp.layers {
        h = dense_forward(layer, &h, Mode::Eval, rng)?;
    }
    Ok(h)
}

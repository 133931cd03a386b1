//! Dense linear algebra and reverse-mode differentiation for feed-forward
//! networks with dropout. Everything is `f64`; stochastic operations take an
//! explicit seeded RNG so runs are bit-reproducible.

use std::collections::HashMap;

use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum TensorError {
    #[error("shape mismatch: {0}")]
    Shape(String),
    #[error("non-finite value in {0}")]
    NonFinite(String),
    #[error("backward requires a completed forward pass: {0}")]
    State(String),
}

pub type Result<T> = std::result::Result<T, TensorError>;

/// Row-major dense matrix.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Matrix {
    pub rows: usize,
    pub cols: usize,
    pub data: Vec<f64>,
}

impl Matrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Matrix { rows, cols, data: vec![0.0; rows * cols] }
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Matrix { rows, cols, data }
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Self {
        let r = rows.len();
        let c = if r > 0 { rows[0].len() } else { 0 };
        Matrix::from_fn(r, c, |i, j| rows[i][j])
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.cols + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.data[i * self.cols + j] = v;
    }

    /// y = A x
    pub fn matvec(&self, x: &[f64]) -> Result<Vec<f64>> {
        if x.len() != self.cols {
            return Err(TensorError::Shape(format!(
                "matvec: matrix is {}x{}, vector has length {}",
                self.rows,
                self.cols,
                x.len()
            )));
        }
        let mut y = vec![0.0; self.rows];
        for i in 0..self.rows {
            let row = &self.data[i * self.cols..(i + 1) * self.cols];
            let mut acc = 0.0;
            for (a, b) in row.iter().zip(x.iter()) {
                acc += a * b;
            }
            y[i] = acc;
        }
        Ok(y)
    }

    /// y = Aᵀ x
    pub fn matvec_t(&self, x: &[f64]) -> Result<Vec<f64>> {
        if x.len() != self.rows {
            return Err(TensorError::Shape(format!(
                "matvec_t: matrix is {}x{}, vector has length {}",
                self.rows,
                self.cols,
                x.len()
            )));
        }
        let mut y = vec![0.0; self.cols];
        for i in 0..self.rows {
            let row = &self.data[i * self.cols..(i + 1) * self.cols];
            let xi = x[i];
            for (yj, a) in y.iter_mut().zip(row.iter()) {
                *yj += a * xi;
            }
        }
        Ok(y)
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Activation {
    Relu,
    LeakyRelu(f64),
    Tanh,
    Sigmoid,
    Identity,
}

impl Activation {
    #[inline]
    pub fn apply(&self, x: f64) -> f64 {
        match *self {
            Activation::Relu => x.max(0.0),
            Activation::LeakyRelu(slope) => {
                if x > 0.0 {
                    x
                } else {
                    slope * x
                }
            }
            Activation::Tanh => x.tanh(),
            Activation::Sigmoid => 1.0 / (1.0 + (-x).exp()),
            Activation::Identity => x,
        }
    }

    /// d activation / d preactivation, evaluated at the preactivation.
    #[inline]
    pub fn derivative(&self, pre: f64) -> f64 {
        match *self {
            Activation::Relu => {
                if pre > 0.0 {
                    1.0
                } else {
                    0.0
                }
            }
            Activation::LeakyRelu(slope) => {
                if pre > 0.0 {
                    1.0
                } else {
                    slope
                }
            }
            Activation::Tanh => {
                let t = pre.tanh();
                1.0 - t * t
            }
            Activation::Sigmoid => {
                let s = 1.0 / (1.0 + (-pre).exp());
                s * (1.0 - s)
            }
            Activation::Identity => 1.0,
        }
    }
}

/// Default negative slope for leaky ReLU units.
pub const LEAKY_SLOPE: f64 = 0.2;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Mode {
    Train,
    Eval,
}

/// One fully-connected layer: `act(Wx + b)` with inverted dropout on the
/// activations in Train mode.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DenseLayer {
    pub weights: Matrix,
    pub bias: Vec<f64>,
    pub activation: Activation,
    pub dropout_rate: f64,
}

impl DenseLayer {
    pub fn new(weights: Matrix, bias: Vec<f64>, activation: Activation, dropout_rate: f64) -> Result<Self> {
        if bias.len() != weights.rows {
            return Err(TensorError::Shape(format!(
                "bias length {} != weight rows {}",
                bias.len(),
                weights.rows
            )));
        }
        if !(0.0..1.0).contains(&dropout_rate) {
            return Err(TensorError::Shape(format!("dropout rate {dropout_rate} outside [0,1)")));
        }
        Ok(DenseLayer { weights, bias, activation, dropout_rate })
    }

    /// Glorot-style uniform init in [-a, a], a = sqrt(6 / (fan_in + fan_out)).
    pub fn init<R: Rng>(
        in_dim: usize,
        out_dim: usize,
        activation: Activation,
        dropout_rate: f64,
        rng: &mut R,
    ) -> Self {
        let a = (6.0 / (in_dim + out_dim) as f64).sqrt();
        let weights = Matrix::from_fn(out_dim, in_dim, |_, _| rng.gen_range(-a..a));
        DenseLayer { weights, bias: vec![0.0; out_dim], activation, dropout_rate }
    }

    pub fn in_dim(&self) -> usize {
        self.weights.cols
    }

    pub fn out_dim(&self) -> usize {
        self.weights.rows
    }

    pub fn param_count(&self) -> usize {
        self.weights.rows * self.weights.cols + self.bias.len()
    }
}

/// Forward through one layer. Train mode applies an inverted dropout mask
/// (kept units scaled by 1/(1-p)); Eval mode is deterministic.
pub fn dense_forward<R: Rng>(
    layer: &DenseLayer,
    x: &[f64],
    mode: Mode,
    rng: &mut R,
) -> Result<Vec<f64>> {
    let mut y = layer.weights.matvec(x)?;
    for (yi, b) in y.iter_mut().zip(layer.bias.iter()) {
        *yi = layer.activation.apply(*yi + b);
    }
    if mode == Mode::Train && layer.dropout_rate > 0.0 {
        let keep = 1.0 - layer.dropout_rate;
        for yi in y.iter_mut() {
            if rng.gen::<f64>() < layer.dropout_rate {
                *yi = 0.0;
            } else {
                *yi /= keep;
            }
        }
    }
    if y.iter().any(|v| !v.is_finite()) {
        return Err(TensorError::NonFinite("dense_forward output".into()));
    }
    Ok(y)
}

/// A stack of dense layers.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Mlp {
    pub layers: Vec<DenseLayer>,
}

impl Mlp {
    pub fn new(layers: Vec<DenseLayer>) -> Self {
        Mlp { layers }
    }

    pub fn in_dim(&self) -> usize {
        self.layers.first().map_or(0, |l| l.in_dim())
    }

    pub fn out_dim(&self) -> usize {
        self.layers.last().map_or(0, |l| l.out_dim())
    }

    pub fn param_count(&self) -> usize {
        self.layers.iter().map(|l| l.param_count()).sum()
    }

    pub fn forward<R: Rng>(&self, x: &[f64], mode: Mode, rng: &mut R) -> Result<Vec<f64>> {
        let mut h = x.to_vec();
        for layer in &self.layers {
            h = dense_forward(layer, &h, mode, rng)?;
        }
        Ok(h)
    }

    /// Forward pass keeping every layer's output (used for tap capture).
    pub fn forward_layers<R: Rng>(&self, x: &[f64], mode: Mode, rng: &mut R) -> Result<Vec<Vec<f64>>> {
        let mut outs = Vec::with_capacity(self.layers.len());
        let mut h = x.to_vec();
        for layer in &self.layers {
            h = dense_forward(layer, &h, mode, rng)?;
            outs.push(h.clone());
        }
        Ok(outs)
    }
}

/// Which network a recorded dense operation belongs to. `Standalone` is for
/// single-MLP uses (tests, latent search never touches it).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum NetRole {
    Generator,
    Encoder,
    Critic,
    Standalone,
}

/// Resolves `(NetRole, layer index)` to concrete layers during taped forward
/// and backward passes, so the tape never has to clone parameters.
pub trait LayerBank {
    fn layer(&self, net: NetRole, idx: usize) -> &DenseLayer;
    fn layer_count(&self, net: NetRole) -> usize;
}

impl LayerBank for Mlp {
    fn layer(&self, _net: NetRole, idx: usize) -> &DenseLayer {
        &self.layers[idx]
    }

    fn layer_count(&self, _net: NetRole) -> usize {
        self.layers.len()
    }
}

pub type NodeId = usize;

enum Op {
    Input,
    Dense {
        net: NetRole,
        layer: usize,
        parent: NodeId,
        preact: Vec<f64>,
        // inverted-dropout mask (entries 0 or 1/(1-p)); None in Eval mode
        mask: Option<Vec<f64>>,
    },
    Concat { a: NodeId, b: NodeId },
    Sub { a: NodeId, b: NodeId },
    Add { a: NodeId, b: NodeId },
    AbsSum { parent: NodeId },
    MeanOf { parents: Vec<NodeId> },
    Scale { parent: NodeId, factor: f64 },
    AddConst { parent: NodeId },
    Sigmoid { parent: NodeId },
    Ln { parent: NodeId, eps: f64 },
}

struct Node {
    value: Vec<f64>,
    op: Op,
}

/// Per-layer parameter gradients.
#[derive(Clone, Debug)]
pub struct LayerGrads {
    pub d_weights: Matrix,
    pub d_bias: Vec<f64>,
}

impl LayerGrads {
    pub fn zeros_like(layer: &DenseLayer) -> Self {
        LayerGrads {
            d_weights: Matrix::zeros(layer.weights.rows, layer.weights.cols),
            d_bias: vec![0.0; layer.bias.len()],
        }
    }
}

/// Result of a backward pass: parameter gradients per (net, layer) plus
/// gradients at input nodes (needed by the latent search).
pub struct GradStore {
    params: HashMap<(NetRole, usize), LayerGrads>,
    inputs: HashMap<NodeId, Vec<f64>>,
}

impl GradStore {
    pub fn layer_grads(&self, net: NetRole, idx: usize) -> Option<&LayerGrads> {
        self.params.get(&(net, idx))
    }

    /// Gradients for every layer of `net`, zero-filled where nothing reached.
    pub fn net_grads(&self, bank: &impl LayerBank, net: NetRole) -> Vec<LayerGrads> {
        (0..bank.layer_count(net))
            .map(|i| {
                self.params
                    .get(&(net, i))
                    .cloned()
                    .unwrap_or_else(|| LayerGrads::zeros_like(bank.layer(net, i)))
            })
            .collect()
    }

    pub fn input_grad(&self, id: NodeId) -> Option<&[f64]> {
        self.inputs.get(&id).map(|v| v.as_slice())
    }
}

/// Wengert-style tape: the forward pass appends operations, `backward`
/// replays them once in reverse.
pub struct Tape {
    nodes: Vec<Node>,
}

impl Default for Tape {
    fn default() -> Self {
        Self::new()
    }
}

impl Tape {
    pub fn new() -> Self {
        Tape { nodes: Vec::new() }
    }

    fn push(&mut self, value: Vec<f64>, op: Op) -> NodeId {
        self.nodes.push(Node { value, op });
        self.nodes.len() - 1
    }

    pub fn value(&self, id: NodeId) -> &[f64] {
        &self.nodes[id].value
    }

    pub fn scalar(&self, id: NodeId) -> f64 {
        self.nodes[id].value[0]
    }

    pub fn input(&mut self, value: Vec<f64>) -> NodeId {
        self.push(value, Op::Input)
    }

    pub fn dense<R: Rng>(
        &mut self,
        bank: &impl LayerBank,
        net: NetRole,
        idx: usize,
        parent: NodeId,
        mode: Mode,
        rng: &mut R,
    ) -> Result<NodeId> {
        let layer = bank.layer(net, idx);
        let x = &self.nodes[parent].value;
        let mut pre = layer.weights.matvec(x)?;
        for (p, b) in pre.iter_mut().zip(layer.bias.iter()) {
            *p += b;
        }
        let mut value: Vec<f64> = pre.iter().map(|&p| layer.activation.apply(p)).collect();
        let mask = if mode == Mode::Train && layer.dropout_rate > 0.0 {
            let keep = 1.0 - layer.dropout_rate;
            let m: Vec<f64> = value
                .iter()
                .map(|_| if rng.gen::<f64>() < layer.dropout_rate { 0.0 } else { 1.0 / keep })
                .collect();
            for (v, mk) in value.iter_mut().zip(m.iter()) {
                *v *= mk;
            }
            Some(m)
        } else {
            None
        };
        if value.iter().any(|v| !v.is_finite()) {
            return Err(TensorError::NonFinite(format!("dense layer {idx}")));
        }
        Ok(self.push(value, Op::Dense { net, layer: idx, parent, preact: pre, mask }))
    }

    /// Chain all layers of `net`; returns the final node.
    pub fn mlp<R: Rng>(
        &mut self,
        bank: &impl LayerBank,
        net: NetRole,
        input: NodeId,
        mode: Mode,
        rng: &mut R,
    ) -> Result<NodeId> {
        let mut h = input;
        for idx in 0..bank.layer_count(net) {
            h = self.dense(bank, net, idx, h, mode, rng)?;
        }
        Ok(h)
    }

    /// Like `mlp` but returns every layer's node (for tap capture).
    pub fn mlp_layers<R: Rng>(
        &mut self,
        bank: &impl LayerBank,
        net: NetRole,
        input: NodeId,
        mode: Mode,
        rng: &mut R,
    ) -> Result<Vec<NodeId>> {
        let mut ids = Vec::with_capacity(bank.layer_count(net));
        let mut h = input;
        for idx in 0..bank.layer_count(net) {
            h = self.dense(bank, net, idx, h, mode, rng)?;
            ids.push(h);
        }
        Ok(ids)
    }

    pub fn concat(&mut self, a: NodeId, b: NodeId) -> NodeId {
        let mut v = self.nodes[a].value.clone();
        v.extend_from_slice(&self.nodes[b].value);
        self.push(v, Op::Concat { a, b })
    }

    pub fn sub(&mut self, a: NodeId, b: NodeId) -> Result<NodeId> {
        let (va, vb) = (&self.nodes[a].value, &self.nodes[b].value);
        if va.len() != vb.len() {
            return Err(TensorError::Shape(format!("sub: {} vs {}", va.len(), vb.len())));
        }
        let v = va.iter().zip(vb.iter()).map(|(x, y)| x - y).collect();
        Ok(self.push(v, Op::Sub { a, b }))
    }

    pub fn add(&mut self, a: NodeId, b: NodeId) -> Result<NodeId> {
        let (va, vb) = (&self.nodes[a].value, &self.nodes[b].value);
        if va.len() != vb.len() {
            return Err(TensorError::Shape(format!("add: {} vs {}", va.len(), vb.len())));
        }
        let v = va.iter().zip(vb.iter()).map(|(x, y)| x + y).collect();
        Ok(self.push(v, Op::Add { a, b }))
    }

    /// Scalar node Σ|parent_i|.
    pub fn abs_sum(&mut self, parent: NodeId) -> NodeId {
        let s = self.nodes[parent].value.iter().map(|v| v.abs()).sum();
        self.push(vec![s], Op::AbsSum { parent })
    }

    /// Mean of scalar nodes.
    pub fn mean_of(&mut self, parents: Vec<NodeId>) -> Result<NodeId> {
        if parents.is_empty() {
            return Err(TensorError::Shape("mean of zero nodes".into()));
        }
        let s: f64 = parents.iter().map(|&p| self.nodes[p].value[0]).sum();
        let m = s / parents.len() as f64;
        Ok(self.push(vec![m], Op::MeanOf { parents }))
    }

    pub fn scale(&mut self, parent: NodeId, factor: f64) -> NodeId {
        let v = self.nodes[parent].value.iter().map(|x| x * factor).collect();
        self.push(v, Op::Scale { parent, factor })
    }

    pub fn add_const(&mut self, parent: NodeId, c: f64) -> NodeId {
        let v = self.nodes[parent].value.iter().map(|x| x + c).collect();
        self.push(v, Op::AddConst { parent })
    }

    pub fn sigmoid(&mut self, parent: NodeId) -> NodeId {
        let v = self.nodes[parent].value.iter().map(|x| 1.0 / (1.0 + (-x).exp())).collect();
        self.push(v, Op::Sigmoid { parent })
    }

    /// ln(max(x, eps)), elementwise.
    pub fn ln(&mut self, parent: NodeId, eps: f64) -> NodeId {
        let v = self.nodes[parent].value.iter().map(|x| x.max(eps).ln()).collect();
        self.push(v, Op::Ln { parent, eps })
    }

    /// Reverse sweep from `root`, seeding its gradient with `seed`. Visits
    /// every recorded node exactly once, in reverse order.
    pub fn backward(&self, bank: &impl LayerBank, root: NodeId, seed: &[f64]) -> Result<GradStore> {
        if self.nodes.is_empty() {
            return Err(TensorError::State("empty tape".into()));
        }
        if seed.len() != self.nodes[root].value.len() {
            return Err(TensorError::Shape(format!(
                "seed length {} != root length {}",
                seed.len(),
                self.nodes[root].value.len()
            )));
        }
        let mut grads: Vec<Option<Vec<f64>>> = vec![None; self.nodes.len()];
        grads[root] = Some(seed.to_vec());

        let mut store = GradStore { params: HashMap::new(), inputs: HashMap::new() };

        for id in (0..self.nodes.len()).rev() {
            let g = match grads[id].take() {
                Some(g) => g,
                None => continue,
            };
            let node = &self.nodes[id];
            match &node.op {
                Op::Input => {
                    let entry = store.inputs.entry(id).or_insert_with(|| vec![0.0; g.len()]);
                    for (e, gi) in entry.iter_mut().zip(g.iter()) {
                        *e += gi;
                    }
                }
                Op::Dense { net, layer, parent, preact, mask } => {
                    let l = bank.layer(*net, *layer);
                    // y = mask ⊙ act(pre); g_pre = g ⊙ mask ⊙ act'(pre)
                    let mut g_pre = g;
                    if let Some(m) = mask {
                        for (gp, mk) in g_pre.iter_mut().zip(m.iter()) {
                            *gp *= mk;
                        }
                    }
                    for (gp, p) in g_pre.iter_mut().zip(preact.iter()) {
                        *gp *= l.activation.derivative(*p);
                    }
                    let lg = store
                        .params
                        .entry((*net, *layer))
                        .or_insert_with(|| LayerGrads::zeros_like(l));
                    let x = &self.nodes[*parent].value;
                    for (i, gp) in g_pre.iter().enumerate() {
                        lg.d_bias[i] += gp;
                        let row = &mut lg.d_weights.data[i * x.len()..(i + 1) * x.len()];
                        for (w, xj) in row.iter_mut().zip(x.iter()) {
                            *w += gp * xj;
                        }
                    }
                    let g_parent = l.weights.matvec_t(&g_pre)?;
                    accumulate(&mut grads, *parent, &g_parent);
                }
                Op::Concat { a, b } => {
                    let na = self.nodes[*a].value.len();
                    accumulate(&mut grads, *a, &g[..na]);
                    accumulate(&mut grads, *b, &g[na..]);
                }
                Op::Sub { a, b } => {
                    accumulate(&mut grads, *a, &g);
                    let neg: Vec<f64> = g.iter().map(|x| -x).collect();
                    accumulate(&mut grads, *b, &neg);
                }
                Op::Add { a, b } => {
                    accumulate(&mut grads, *a, &g);
                    accumulate(&mut grads, *b, &g);
                }
                Op::AbsSum { parent } => {
                    let gp: Vec<f64> = self.nodes[*parent]
                        .value
                        .iter()
                        .map(|&v| g[0] * sign(v))
                        .collect();
                    accumulate(&mut grads, *parent, &gp);
                }
                Op::MeanOf { parents } => {
                    let share = [g[0] / parents.len() as f64];
                    for &p in parents {
                        accumulate(&mut grads, p, &share);
                    }
                }
                Op::Scale { parent, factor } => {
                    let gp: Vec<f64> = g.iter().map(|x| x * factor).collect();
                    accumulate(&mut grads, *parent, &gp);
                }
                Op::AddConst { parent, .. } => {
                    accumulate(&mut grads, *parent, &g);
                }
                Op::Sigmoid { parent } => {
                    let gp: Vec<f64> = node
                        .value
                        .iter()
                        .zip(g.iter())
                        .map(|(&s, &gi)| gi * s * (1.0 - s))
                        .collect();
                    accumulate(&mut grads, *parent, &gp);
                }
                Op::Ln { parent, eps } => {
                    let gp: Vec<f64> = self.nodes[*parent]
                        .value
                        .iter()
                        .zip(g.iter())
                        .map(|(&x, &gi)| if x > *eps { gi / x } else { 0.0 })
                        .collect();
                    accumulate(&mut grads, *parent, &gp);
                }
            }
        }
        Ok(store)
    }
}

#[inline]
fn sign(v: f64) -> f64 {
    if v > 0.0 {
        1.0
    } else if v < 0.0 {
        -1.0
    } else {
        0.0
    }
}

fn accumulate(grads: &mut [Option<Vec<f64>>], id: NodeId, g: &[f64]) {
    match &mut grads[id] {
        Some(acc) => {
            for (a, gi) in acc.iter_mut().zip(g.iter()) {
                *a += gi;
            }
        }
        None => grads[id] = Some(g.to_vec()),
    }
}

/// RMSProp accumulator for one layer.
#[derive(Clone, Debug)]
pub struct LayerOptState {
    pub sq_weights: Matrix,
    pub sq_bias: Vec<f64>,
}

/// RMSProp accumulators for a whole network.
#[derive(Clone, Debug)]
pub struct MlpOptState {
    pub layers: Vec<LayerOptState>,
}

impl MlpOptState {
    pub fn zeros_like(mlp: &Mlp) -> Self {
        MlpOptState {
            layers: mlp
                .layers
                .iter()
                .map(|l| LayerOptState {
                    sq_weights: Matrix::zeros(l.weights.rows, l.weights.cols),
                    sq_bias: vec![0.0; l.bias.len()],
                })
                .collect(),
        }
    }
}

pub const RMSPROP_EPS: f64 = 1e-8;

/// One RMSProp descent step: s ← decay·s + (1-decay)·g²,
/// p ← p − lr·g/(√s + ε). Deterministic given inputs.
pub fn rmsprop_step(
    mlp: &mut Mlp,
    grads: &[LayerGrads],
    state: &mut MlpOptState,
    lr: f64,
    decay: f64,
) -> Result<()> {
    if grads.len() != mlp.layers.len() || state.layers.len() != mlp.layers.len() {
        return Err(TensorError::Shape(format!(
            "rmsprop: {} layers, {} grads, {} states",
            mlp.layers.len(),
            grads.len(),
            state.layers.len()
        )));
    }
    for ((layer, g), s) in mlp.layers.iter_mut().zip(grads.iter()).zip(state.layers.iter_mut()) {
        if !g.d_weights.is_finite() || g.d_bias.iter().any(|v| !v.is_finite()) {
            return Err(TensorError::NonFinite("gradient".into()));
        }
        for ((w, gw), sw) in layer
            .weights
            .data
            .iter_mut()
            .zip(g.d_weights.data.iter())
            .zip(s.sq_weights.data.iter_mut())
        {
            *sw = decay * *sw + (1.0 - decay) * gw * gw;
            *w -= lr * gw / (sw.sqrt() + RMSPROP_EPS);
        }
        for ((b, gb), sb) in layer.bias.iter_mut().zip(g.d_bias.iter()).zip(s.sq_bias.iter_mut()) {
            *sb = decay * *sb + (1.0 - decay) * gb * gb;
            *b -= lr * gb / (sb.sqrt() + RMSPROP_EPS);
        }
    }
    Ok(())
}

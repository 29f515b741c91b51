//! The trainable preference head.
//!
//! A two-hidden-layer ReLU MLP maps a pair difference `z_second - z_first` to
//! the probability that affect increases. Hidden widths are
//! `(min(d/2, 250), min(d/4, 125))` with floor division. Training minimises
//! mean binary cross-entropy plus `alpha / (2n) * sum ||W||^2` (weights only,
//! `n` = batch size) with mini-batch Adam, and stops once the epoch loss has
//! failed to beat the best loss by more than `tol` for `patience` epochs.

use std::path::Path;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::preference::PreferencePair;

pub const CHECKPOINT_FORMAT: &str = "lasca-head/1";

/// Probabilities are clipped to `[PROB_CLIP, 1 - PROB_CLIP]` inside the log.
pub const PROB_CLIP: f64 = 1e-12;

#[derive(Debug, Error)]
pub enum LearnerError {
    #[error("input has dimension {actual}, head expects {expected}")]
    DimensionMismatch { expected: usize, actual: usize },
    #[error("no training pairs")]
    EmptyTrainingSet,
    #[error("no pairs to evaluate")]
    EmptyEvaluationSet,
    #[error("invalid head config: {0}")]
    InvalidConfig(String),
    #[error("checkpoint {path}: {message}")]
    Checkpoint { path: String, message: String },
}

pub type Result<T> = std::result::Result<T, LearnerError>;

/// `(min(d/2, 250), min(d/4, 125))`, floor division.
pub fn hidden_sizes(input_dim: usize) -> (usize, usize) {
    ((input_dim / 2).min(250), (input_dim / 4).min(125))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HeadConfig {
    pub input_dim: usize,
    pub hidden: (usize, usize),
    pub l2_alpha: f64,
    pub max_epochs: usize,
    pub tol: f64,
    pub patience: usize,
    pub learning_rate: f64,
    /// Upper bound on the mini-batch size; the effective size is `min(batch_size, n)`.
    pub batch_size: usize,
    pub beta1: f64,
    pub beta2: f64,
    pub adam_epsilon: f64,
    pub seed: u64,
}

impl HeadConfig {
    pub fn new(input_dim: usize) -> Result<Self> {
        let (h1, h2) = hidden_sizes(input_dim);
        Self::with_hidden(input_dim, h1, h2)
    }

    pub fn with_hidden(input_dim: usize, h1: usize, h2: usize) -> Result<Self> {
        let cfg = Self {
            input_dim,
            hidden: (h1, h2),
            l2_alpha: 1.0,
            max_epochs: 25,
            tol: 1e-3,
            patience: 3,
            learning_rate: 1e-3,
            batch_size: 200,
            beta1: 0.9,
            beta2: 0.999,
            adam_epsilon: 1e-8,
            seed: 0,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let (h1, h2) = self.hidden;
        let bad = |m: String| Err(LearnerError::InvalidConfig(m));
        if self.input_dim == 0 {
            return bad("input dimension must be positive".into());
        }
        if !(h1 >= h2 && h2 >= 1) {
            return bad(format!("hidden sizes ({h1}, {h2}) must satisfy h1 >= h2 >= 1"));
        }
        if self.max_epochs == 0 || self.patience == 0 || self.batch_size == 0 {
            return bad("max_epochs, patience and batch_size must be positive".into());
        }
        if !(self.learning_rate > 0.0) || !(self.l2_alpha >= 0.0) || !(self.tol >= 0.0) {
            return bad("learning_rate must be > 0, l2_alpha and tol >= 0".into());
        }
        Ok(())
    }
}

/// Fully connected layer, weights row-major `rows x cols` (out x in).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Dense {
    pub rows: usize,
    pub cols: usize,
    pub weights: Vec<f64>,
    pub bias: Vec<f64>,
}

impl Dense {
    fn zeros(rows: usize, cols: usize) -> Self {
        Self { rows, cols, weights: vec![0.0; rows * cols], bias: vec![0.0; rows] }
    }

    fn glorot(rows: usize, cols: usize, rng: &mut ChaCha8Rng) -> Self {
        let limit = (6.0 / (rows + cols) as f64).sqrt();
        let weights = (0..rows * cols).map(|_| rng.random_range(-limit..limit)).collect();
        Self { rows, cols, weights, bias: vec![0.0; rows] }
    }

    fn row(&self, r: usize) -> &[f64] {
        &self.weights[r * self.cols..(r + 1) * self.cols]
    }

    fn affine(&self, x: &[f64], out: &mut [f64]) {
        for (r, o) in out.iter_mut().enumerate() {
            *o = self.bias[r] + dot(self.row(r), x);
        }
    }

    fn squared_norm(&self) -> f64 {
        self.weights.iter().map(|w| w * w).sum()
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Numerically stable logistic function, kept strictly inside `(0, 1)`.
pub fn sigmoid(x: f64) -> f64 {
    let p = if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    };
    p.clamp(f64::MIN_POSITIVE, 1.0 - f64::EPSILON / 2.0)
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct TrainingMeta {
    pub epochs_run: usize,
    pub final_loss: f64,
    pub seed: u64,
    pub stopped_early: bool,
    pub loss_history: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PreferenceHead {
    pub config: HeadConfig,
    /// Input -> h1, h1 -> h2, h2 -> 1.
    pub layers: [Dense; 3],
    pub meta: TrainingMeta,
}

/// Gradients with the same shapes as [`PreferenceHead::layers`].
#[derive(Debug, Clone, PartialEq)]
pub struct HeadGradients {
    pub layers: [Dense; 3],
}

impl HeadGradients {
    fn zeros_like(head: &PreferenceHead) -> Self {
        Self { layers: head.layers.clone().map(|l| Dense::zeros(l.rows, l.cols)) }
    }

    /// All gradient entries, weights then bias per layer.
    pub fn flatten(&self) -> Vec<f64> {
        self.layers.iter().flat_map(|l| l.weights.iter().chain(&l.bias).copied()).collect()
    }
}

/// Glorot-uniform weights, zero biases; same seed gives the same parameters.
pub fn init_head(cfg: &HeadConfig) -> PreferenceHead {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let (h1, h2) = cfg.hidden;
    PreferenceHead {
        config: cfg.clone(),
        layers: [
            Dense::glorot(h1, cfg.input_dim, &mut rng),
            Dense::glorot(h2, h1, &mut rng),
            Dense::glorot(1, h2, &mut rng),
        ],
        meta: TrainingMeta { seed: cfg.seed, ..Default::default() },
    }
}

struct Activations {
    a1: Vec<f64>,
    h1: Vec<f64>,
    a2: Vec<f64>,
    h2: Vec<f64>,
    logit: f64,
}

impl PreferenceHead {
    pub fn input_dim(&self) -> usize {
        self.config.input_dim
    }

    pub fn parameter_count(&self) -> usize {
        self.layers.iter().map(|l| l.weights.len() + l.bias.len()).sum()
    }

    fn check_dim(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.input_dim() {
            return Err(LearnerError::DimensionMismatch { expected: self.input_dim(), actual: x.len() });
        }
        Ok(())
    }

    fn activations(&self, x: &[f64]) -> Activations {
        let [l1, l2, l3] = &self.layers;
        let mut a1 = vec![0.0; l1.rows];
        l1.affine(x, &mut a1);
        let h1: Vec<f64> = a1.iter().map(|v| v.max(0.0)).collect();
        let mut a2 = vec![0.0; l2.rows];
        l2.affine(&h1, &mut a2);
        let h2: Vec<f64> = a2.iter().map(|v| v.max(0.0)).collect();
        let logit = l3.bias[0] + dot(l3.row(0), &h2);
        Activations { a1, h1, a2, h2, logit }
    }

    /// Probability that affect increases along `delta_z`.
    pub fn forward(&self, delta_z: &[f64]) -> Result<f64> {
        self.check_dim(delta_z)?;
        Ok(sigmoid(self.activations(delta_z).logit))
    }

    /// Pre-activations of both hidden layers, for diagnostics.
    pub fn hidden_preactivations(&self, x: &[f64]) -> Result<(Vec<f64>, Vec<f64>)> {
        self.check_dim(x)?;
        let a = self.activations(x);
        Ok((a.a1, a.a2))
    }

    fn l2_penalty(&self, n: usize) -> f64 {
        let sq: f64 = self.layers.iter().map(Dense::squared_norm).sum();
        self.config.l2_alpha / (2.0 * n as f64) * sq
    }

    /// Loss plus gradient over a batch, accumulated in one pass.
    fn loss_and_grad(&self, batch: &[(&[f64], u8)], want_grad: bool) -> (f64, Option<HeadGradients>) {
        let n = batch.len();
        let inv_n = 1.0 / n as f64;
        let mut g = want_grad.then(|| HeadGradients::zeros_like(self));
        let mut bce = 0.0;
        let [_, l2, l3] = &self.layers;
        let mut d_h1 = vec![0.0; l2.cols];
        let mut d_a2 = vec![0.0; l2.rows];
        for &(x, y) in batch {
            let act = self.activations(x);
            let p = sigmoid(act.logit);
            let y = y as f64;
            let pc = p.clamp(PROB_CLIP, 1.0 - PROB_CLIP);
            bce -= y * pc.ln() + (1.0 - y) * (1.0 - pc).ln();
            let Some(g) = g.as_mut() else { continue };

            let d_logit = (p - y) * inv_n;
            let [g1, g2, g3] = &mut g.layers;
            for (gw, h) in g3.weights.iter_mut().zip(&act.h2) {
                *gw += d_logit * h;
            }
            g3.bias[0] += d_logit;

            for (r, d) in d_a2.iter_mut().enumerate() {
                *d = if act.a2[r] > 0.0 { d_logit * l3.weights[r] } else { 0.0 };
            }
            d_h1.iter_mut().for_each(|v| *v = 0.0);
            for (r, &d) in d_a2.iter().enumerate() {
                if d == 0.0 {
                    continue;
                }
                g2.bias[r] += d;
                let grow = &mut g2.weights[r * g2.cols..(r + 1) * g2.cols];
                for (gw, h) in grow.iter_mut().zip(&act.h1) {
                    *gw += d * h;
                }
                for (dh, w) in d_h1.iter_mut().zip(l2.row(r)) {
                    *dh += d * w;
                }
            }
            for (r, &dh) in d_h1.iter().enumerate() {
                if dh == 0.0 || act.a1[r] <= 0.0 {
                    continue;
                }
                g1.bias[r] += dh;
                let grow = &mut g1.weights[r * g1.cols..(r + 1) * g1.cols];
                for (gw, xi) in grow.iter_mut().zip(x) {
                    *gw += dh * xi;
                }
            }
        }
        if let Some(g) = g.as_mut() {
            let reg = self.config.l2_alpha * inv_n;
            for (gl, l) in g.layers.iter_mut().zip(&self.layers) {
                for (gw, w) in gl.weights.iter_mut().zip(&l.weights) {
                    *gw += reg * w;
                }
            }
        }
        (bce * inv_n + self.l2_penalty(n), g)
    }

    fn check_batch(&self, batch: &[(&[f64], u8)]) -> Result<()> {
        if batch.is_empty() {
            return Err(LearnerError::EmptyTrainingSet);
        }
        for (x, _) in batch {
            self.check_dim(x)?;
        }
        Ok(())
    }
}

/// Mean BCE over the batch plus the L2 penalty on weight matrices.
pub fn loss(head: &PreferenceHead, batch: &[(&[f64], u8)]) -> Result<f64> {
    head.check_batch(batch)?;
    Ok(head.loss_and_grad(batch, false).0)
}

/// Exact gradient of [`loss`] with respect to every parameter.
pub fn grad(head: &PreferenceHead, batch: &[(&[f64], u8)]) -> Result<HeadGradients> {
    head.check_batch(batch)?;
    Ok(head.loss_and_grad(batch, true).1.expect("gradient requested"))
}

pub fn as_batch(pairs: &[PreferencePair]) -> Vec<(&[f64], u8)> {
    pairs.iter().map(|p| (p.delta_z.as_slice(), p.label)).collect()
}

struct Adam {
    m: Vec<Dense>,
    v: Vec<Dense>,
    step: i32,
}

impl Adam {
    fn new(head: &PreferenceHead) -> Self {
        let z = || head.layers.iter().map(|l| Dense::zeros(l.rows, l.cols)).collect();
        Self { m: z(), v: z(), step: 0 }
    }

    fn update(&mut self, head: &mut PreferenceHead, g: &HeadGradients) {
        let c = &head.config;
        self.step += 1;
        let lr = c.learning_rate * (1.0 - c.beta2.powi(self.step)).sqrt() / (1.0 - c.beta1.powi(self.step));
        let (b1, b2, eps) = (c.beta1, c.beta2, c.adam_epsilon);
        for (((layer, gl), ml), vl) in head.layers.iter_mut().zip(&g.layers).zip(&mut self.m).zip(&mut self.v) {
            let pairs = [
                (&mut layer.weights, &gl.weights, &mut ml.weights, &mut vl.weights),
                (&mut layer.bias, &gl.bias, &mut ml.bias, &mut vl.bias),
            ];
            for (p, gp, m, v) in pairs {
                for i in 0..p.len() {
                    m[i] = b1 * m[i] + (1.0 - b1) * gp[i];
                    v[i] = b2 * v[i] + (1.0 - b2) * gp[i] * gp[i];
                    p[i] -= lr * m[i] / (v[i].sqrt() + eps);
                }
            }
        }
    }
}

/// Mini-batch Adam on shuffled pairs. Deterministic given `head.config.seed`.
pub fn train(head: PreferenceHead, pairs: &[PreferencePair]) -> Result<PreferenceHead> {
    let batch = as_batch(pairs);
    train_batch(head, &batch)
}

pub fn train_batch(mut head: PreferenceHead, data: &[(&[f64], u8)]) -> Result<PreferenceHead> {
    if data.is_empty() {
        return Err(LearnerError::EmptyTrainingSet);
    }
    head.check_batch(data)?;
    head.config.validate()?;
    let cfg = head.config.clone();
    // separate stream from the initialiser so shuffling does not depend on how
    // many draws the weights consumed
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed ^ 0x5eed_5417_f1e5_0001);
    let n = data.len();
    let batch_size = cfg.batch_size.min(n);
    let mut order: Vec<usize> = (0..n).collect();
    let mut adam = Adam::new(&head);
    let mut best = f64::INFINITY;
    let mut no_improve = 0;
    let mut history = Vec::new();
    let mut stopped_early = false;
    let mut batch: Vec<(&[f64], u8)> = Vec::with_capacity(batch_size);

    for _ in 0..cfg.max_epochs {
        order.shuffle(&mut rng);
        let mut accumulated = 0.0;
        for chunk in order.chunks(batch_size) {
            batch.clear();
            batch.extend(chunk.iter().map(|&i| data[i]));
            let (l, g) = head.loss_and_grad(&batch, true);
            accumulated += l * chunk.len() as f64;
            adam.update(&mut head, &g.expect("gradient requested"));
        }
        let epoch_loss = accumulated / n as f64;
        history.push(epoch_loss);
        if best - epoch_loss > cfg.tol {
            no_improve = 0;
        } else {
            no_improve += 1;
        }
        best = best.min(epoch_loss);
        if no_improve >= cfg.patience {
            stopped_early = true;
            break;
        }
    }
    head.meta = TrainingMeta {
        epochs_run: history.len(),
        final_loss: *history.last().expect("at least one epoch"),
        seed: cfg.seed,
        stopped_early,
        loss_history: history,
    };
    Ok(head)
}

/// Fraction of pairs whose prediction (`p > 0.5`) matches the label.
pub fn accuracy(head: &PreferenceHead, pairs: &[PreferencePair]) -> Result<f64> {
    accuracy_batch(head, &as_batch(pairs))
}

pub fn accuracy_batch(head: &PreferenceHead, data: &[(&[f64], u8)]) -> Result<f64> {
    if data.is_empty() {
        return Err(LearnerError::EmptyEvaluationSet);
    }
    let mut correct = 0usize;
    for &(x, y) in data {
        let predicted = u8::from(head.forward(x)? > 0.5);
        correct += usize::from(predicted == y);
    }
    Ok(correct as f64 / data.len() as f64)
}

#[derive(Serialize, Deserialize)]
struct Checkpoint {
    format: String,
    head: PreferenceHead,
}

pub fn checkpoint_json(head: &PreferenceHead) -> String {
    serde_json::to_string_pretty(&Checkpoint { format: CHECKPOINT_FORMAT.into(), head: head.clone() })
        .expect("head serialises")
}

pub fn save_checkpoint(head: &PreferenceHead, path: &Path) -> Result<()> {
    crate::io::atomic_write(path, checkpoint_json(head).as_bytes()).map_err(|e| LearnerError::Checkpoint {
        path: path.display().to_string(),
        message: e.to_string(),
    })
}

pub fn parse_checkpoint(json: &str, origin: &str) -> Result<PreferenceHead> {
    let err = |message: String| LearnerError::Checkpoint { path: origin.to_string(), message };
    let ck: Checkpoint = serde_json::from_str(json).map_err(|e| err(e.to_string()))?;
    if ck.format != CHECKPOINT_FORMAT {
        return Err(err(format!("unsupported format `{}`", ck.format)));
    }
    validate_head(&ck.head).map_err(|e| err(e.to_string()))?;
    Ok(ck.head)
}

/// Shapes agree with the config and every parameter is finite.
pub fn validate_head(head: &PreferenceHead) -> Result<()> {
    head.config.validate()?;
    let (h1, h2) = head.config.hidden;
    let shapes = [(h1, head.config.input_dim), (h2, h1), (1, h2)];
    for (l, (r, c)) in head.layers.iter().zip(shapes) {
        if l.rows != r || l.cols != c || l.weights.len() != r * c || l.bias.len() != r {
            return Err(LearnerError::InvalidConfig(format!(
                "layer shape {}x{} does not match config {r}x{c}",
                l.rows, l.cols
            )));
        }
        if l.weights.iter().chain(&l.bias).any(|v| !v.is_finite()) {
            return Err(LearnerError::InvalidConfig("non-finite parameter".into()));
        }
    }
    Ok(())
}

pub fn load_checkpoint(path: &Path) -> Result<PreferenceHead> {
    let text = std::fs::read_to_string(path).map_err(|e| LearnerError::Checkpoint {
        path: path.display().to_string(),
        message: e.to_string(),
    })?;
    parse_checkpoint(&text, &path.display().to_string())
}

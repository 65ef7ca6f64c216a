//! Mini-batch Adam training with a best-validation checkpoint.

use alloc::vec;
use alloc::vec::Vec;
use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::{
    batch_arrays, case_features, coefficient_targets, l1_loss, ChannelStats, DatasetSplit, FeatureScaling, LossWeights,
    Mlp, SurrogateModel, TrainingPoint, Workspace, CHANNEL_COUNT, DEFAULT_HIDDEN, FEATURE_COUNT,
};
use crate::error::{Error, Result};
use crate::fields::FlowCase;
use crate::rng::stream;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TrainConfig {
    pub learning_rate: f64,
    /// Cosine decay of the learning rate down to `learning_rate * final_lr_fraction`;
    /// 1.0 keeps it constant.
    pub final_lr_fraction: f64,
    pub batch_size: usize,
    pub epochs: usize,
    pub seed: u64,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
    /// Validation loss is computed every this many epochs (and after the last).
    pub validate_every: usize,
    /// Points drawn from each training case per epoch.
    pub points_per_case: usize,
    /// Share of the drawn points taken from the hull surface.
    pub surface_fraction: f64,
    /// Fixed points per validation case.
    pub validation_points_per_case: usize,
    pub hidden: Vec<usize>,
    pub loss_weights: LossWeights,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            learning_rate: 1e-3,
            final_lr_fraction: 0.05,
            batch_size: 1024,
            epochs: 120,
            seed: 0,
            beta1: 0.9,
            beta2: 0.999,
            epsilon: 1e-8,
            validate_every: 1,
            points_per_case: 512,
            surface_fraction: 0.75,
            validation_points_per_case: 1024,
            hidden: DEFAULT_HIDDEN.to_vec(),
            loss_weights: LossWeights::default(),
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::Config(m.into()));
        if !(self.learning_rate > 0.0) {
            return bad("learning rate must be positive");
        }
        if !(self.final_lr_fraction > 0.0 && self.final_lr_fraction <= 1.0) {
            return bad("final learning-rate fraction must be in (0, 1]");
        }
        if self.batch_size == 0 || self.points_per_case == 0 || self.validate_every == 0 {
            return bad("batch size, points per case and validation cadence must be at least 1");
        }
        if !(0.0..1.0).contains(&self.beta1) || !(0.0..1.0).contains(&self.beta2) || !(self.epsilon > 0.0) {
            return bad("adaptive-moment decays must be in [0, 1) and epsilon positive");
        }
        if !(0.0..=1.0).contains(&self.surface_fraction) {
            return bad("surface fraction must be in [0, 1]");
        }
        if self.hidden.contains(&0) {
            return bad("hidden layers must be non-empty");
        }
        if !(self.loss_weights.surface >= 0.0 && self.loss_weights.volume >= 0.0) {
            return bad("loss weights must be non-negative");
        }
        Ok(())
    }

    pub fn layer_sizes(&self) -> Vec<usize> {
        let mut sizes = vec![FEATURE_COUNT];
        sizes.extend_from_slice(&self.hidden);
        sizes.push(CHANNEL_COUNT);
        sizes
    }

    fn learning_rate_at(&self, epoch: usize) -> f64 {
        if self.final_lr_fraction >= 1.0 || self.epochs <= 1 {
            return self.learning_rate;
        }
        let t = epoch as f64 / (self.epochs - 1) as f64;
        let cos = 0.5 * (1.0 + libm::cos(core::f64::consts::PI * t));
        self.learning_rate * (self.final_lr_fraction + (1.0 - self.final_lr_fraction) * cos)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EpochRecord {
    pub epoch: usize,
    pub train_loss: f64,
    pub val_loss: Option<f64>,
}

#[derive(Debug, Clone)]
pub struct TrainOutcome {
    pub model: SurrogateModel,
    pub history: Vec<EpochRecord>,
    /// Epoch whose weights were returned, if any validation ran.
    pub best_epoch: Option<usize>,
}

struct PreparedCase {
    features: Vec<f64>,
    targets: Vec<f64>,
    surface_count: usize,
    len: usize,
}

impl PreparedCase {
    fn new(case: &FlowCase, scaling: &FeatureScaling) -> Result<Self> {
        let features = case_features(case, scaling)?;
        let mut targets = Vec::with_capacity(case.samples.len() * CHANNEL_COUNT);
        for s in &case.samples {
            targets.extend_from_slice(&coefficient_targets(s, case.v_inf, &case.constants)?);
        }
        Ok(PreparedCase {
            features: features.iter().flat_map(|f| f.0).collect(),
            targets,
            surface_count: case.mesh.face_count(),
            len: case.samples.len(),
        })
    }

    fn target(&self, i: usize) -> &[f64; CHANNEL_COUNT] {
        self.targets[i * CHANNEL_COUNT..(i + 1) * CHANNEL_COUNT].try_into().unwrap()
    }

    fn draw<R: Rng>(&self, n: usize, surface_fraction: f64, rng: &mut R, out: &mut Vec<usize>) {
        let volume_count = self.len - self.surface_count;
        let n_surface = if volume_count == 0 {
            n
        } else if self.surface_count == 0 {
            0
        } else {
            libm::round(n as f64 * surface_fraction) as usize
        };
        for k in 0..n {
            let i = if k < n_surface {
                rng.random_range(0..self.surface_count)
            } else {
                self.surface_count + rng.random_range(0..volume_count)
            };
            out.push(i);
        }
    }
}

/// Gathered mini-batch buffers.
#[derive(Default)]
struct Batch {
    x: Vec<f64>,
    t: Vec<f64>,
    s: Vec<bool>,
}

impl Batch {
    fn clear(&mut self) {
        self.x.clear();
        self.t.clear();
        self.s.clear();
    }

    fn push(&mut self, case: &PreparedCase, i: usize) {
        self.x.extend_from_slice(&case.features[i * FEATURE_COUNT..(i + 1) * FEATURE_COUNT]);
        self.t.extend_from_slice(case.target(i));
        self.s.push(i < case.surface_count);
    }
}

struct Adam {
    m: Vec<f64>,
    v: Vec<f64>,
    step: i32,
}

impl Adam {
    fn new(n: usize) -> Self {
        Adam {
            m: vec![0.0; n],
            v: vec![0.0; n],
            step: 0,
        }
    }

    fn update(&mut self, params: &mut [f64], grad: &[f64], lr: f64, c: &TrainConfig) {
        self.step += 1;
        let bc1 = 1.0 - libm::pow(c.beta1, f64::from(self.step));
        let bc2 = 1.0 - libm::pow(c.beta2, f64::from(self.step));
        for (((p, g), m), v) in params.iter_mut().zip(grad).zip(&mut self.m).zip(&mut self.v) {
            *m = c.beta1 * *m + (1.0 - c.beta1) * g;
            *v = c.beta2 * *v + (1.0 - c.beta2) * g * g;
            *p -= lr * (*m / bc1) / (libm::sqrt(*v / bc2) + c.epsilon);
        }
    }
}

/// Loss and its gradient with respect to every network parameter.
pub fn loss_gradient(network: &Mlp, batch: &[TrainingPoint], weights: LossWeights) -> Result<(f64, Vec<f64>)> {
    let (x, t, s) = batch_arrays(batch)?;
    let mut ws = Workspace::default();
    let pred = network.forward_into(&x, &mut ws).to_vec();
    let mut d_out = vec![0.0; pred.len()];
    let value = l1_loss(&pred, &t, &s, weights, Some(&mut d_out));
    let mut grad = vec![0.0; network.params().len()];
    network.backward(&x, &mut ws, &d_out, &mut grad);
    Ok((value, grad))
}

/// Train a surrogate on the cases listed in `split.train`, keeping the
/// weights with the lowest validation loss.
pub fn train(
    cases: &[FlowCase],
    split: &DatasetSplit,
    config: &TrainConfig,
    scaling: FeatureScaling,
    observer: &mut dyn FnMut(&EpochRecord),
) -> Result<TrainOutcome> {
    config.validate()?;
    if split.train.is_empty() {
        return Err(Error::Config("training set is empty".into()));
    }
    if let Some(&bad) = split.train.iter().chain(&split.validation).find(|&&i| i >= cases.len()) {
        return Err(Error::Config(alloc::format!("case {bad} is not in the dataset")));
    }
    let constants = cases[split.train[0]].constants;
    let prepare = |ids: &[usize]| ids.iter().map(|&i| PreparedCase::new(&cases[i], &scaling)).collect::<Result<Vec<_>>>();
    let mut train_set = prepare(&split.train)?;
    let mut val_set = prepare(&split.validation)?;

    let stats = ChannelStats::fit(train_set.iter().flat_map(|c| (0..c.len).map(move |i| (c.target(i), i < c.surface_count))));
    for c in train_set.iter_mut().chain(val_set.iter_mut()) {
        for row in c.targets.chunks_exact_mut(CHANNEL_COUNT) {
            stats.normalize(row);
        }
    }

    let network = Mlp::random(&config.layer_sizes(), &mut stream(config.seed, "init"))?;
    let mut model = SurrogateModel::new(network, stats, scaling, constants)?;
    if config.epochs == 0 {
        return Ok(TrainOutcome {
            model,
            history: Vec::new(),
            best_epoch: None,
        });
    }

    let mut val_batch = Batch::default();
    {
        let mut rng = stream(config.seed, "validation");
        let mut idx = Vec::new();
        for c in &val_set {
            idx.clear();
            c.draw(config.validation_points_per_case, config.surface_fraction, &mut rng, &mut idx);
            for &i in &idx {
                val_batch.push(c, i);
            }
        }
    }

    let net = &mut model.network;
    let mut adam = Adam::new(net.params().len());
    let mut ws = Workspace::default();
    let mut grad = vec![0.0; net.params().len()];
    let mut d_out = Vec::new();
    let mut batch = Batch::default();
    let mut rng = stream(config.seed, "sampling");
    let mut order: Vec<(u32, u32)> = Vec::new();
    let mut idx = Vec::new();
    let mut history = Vec::with_capacity(config.epochs);
    let mut best: Option<(f64, usize, Vec<f64>)> = None;

    for epoch in 0..config.epochs {
        order.clear();
        for (ci, c) in train_set.iter().enumerate() {
            idx.clear();
            c.draw(config.points_per_case, config.surface_fraction, &mut rng, &mut idx);
            order.extend(idx.iter().map(|&i| (ci as u32, i as u32)));
        }
        order.shuffle(&mut rng);
        let lr = config.learning_rate_at(epoch);
        let mut total = 0.0;
        for chunk in order.chunks(config.batch_size) {
            batch.clear();
            for &(ci, i) in chunk {
                batch.push(&train_set[ci as usize], i as usize);
            }
            let pred = net.forward_into(&batch.x, &mut ws);
            d_out.clear();
            d_out.resize(pred.len(), 0.0);
            let value = l1_loss(pred, &batch.t, &batch.s, config.loss_weights, Some(&mut d_out));
            if !value.is_finite() {
                return Err(Error::Diverged { epoch, loss: value });
            }
            total += value * chunk.len() as f64;
            grad.iter_mut().for_each(|g| *g = 0.0);
            net.backward(&batch.x, &mut ws, &d_out, &mut grad);
            adam.update(net.params_mut(), &grad, lr, config);
        }
        let train_loss = total / order.len() as f64;
        if !train_loss.is_finite() {
            return Err(Error::Diverged { epoch, loss: train_loss });
        }
        let validate = !val_batch.s.is_empty() && ((epoch + 1) % config.validate_every == 0 || epoch + 1 == config.epochs);
        let val_loss = if validate {
            let pred = net.forward_into(&val_batch.x, &mut ws);
            let v = l1_loss(pred, &val_batch.t, &val_batch.s, config.loss_weights, None);
            if !v.is_finite() {
                return Err(Error::Diverged { epoch, loss: v });
            }
            if best.as_ref().map_or(true, |b| v < b.0) {
                best = Some((v, epoch, net.params().to_vec()));
            }
            Some(v)
        } else {
            None
        };
        let record = EpochRecord {
            epoch,
            train_loss,
            val_loss,
        };
        observer(&record);
        history.push(record);
    }

    let best_epoch = best.map(|(_, epoch, params)| {
        model.network.params_mut().copy_from_slice(&params);
        epoch
    });
    Ok(TrainOutcome {
        model,
        history,
        best_epoch,
    })
}

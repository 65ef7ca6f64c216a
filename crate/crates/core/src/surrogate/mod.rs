//! Point-wise neural field surrogate.
//!
//! A query point is described by its position relative to the hull, the
//! nearest hull normal, the flow speed and the shape parameters; the network
//! predicts the eight field channels at that point. Targets are learned in
//! coefficient form (pressure coefficient, velocity ratio, friction stress
//! over dynamic pressure) and z-scored with train-set statistics.

mod mlp;
mod train;

use alloc::vec::Vec;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fields::{integrate_forces, FieldSample, ForceOptions, ForceVector, SampleKind, WaterConstants};
use crate::geom::Vec3;
use crate::mesh::{HullMesh, MeshIndex};
use crate::morph::{DesignBounds, DesignParams, Parameter};

pub use mlp::{Mlp, Workspace};
pub use train::{loss_gradient, train, EpochRecord, TrainConfig, TrainOutcome};

pub const FEATURE_COUNT: usize = 13;
pub const CHANNEL_COUNT: usize = 8;
pub const CHANNEL_NAMES: [&str; CHANNEL_COUNT] = ["p", "q", "u_x", "u_y", "u_z", "kappa_x", "kappa_y", "kappa_z"];
const SURFACE_CHANNELS: [usize; 5] = [0, 1, 5, 6, 7];
const VOLUME_CHANNELS: [usize; 5] = [0, 1, 2, 3, 4];
const CLASS_FLAG: usize = 12;

pub(crate) fn channels(surface: bool) -> &'static [usize; 5] {
    if surface {
        &SURFACE_CHANNELS
    } else {
        &VOLUME_CHANNELS
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FeatureVector(pub [f64; FEATURE_COUNT]);

impl FeatureVector {
    pub fn is_surface(&self) -> bool {
        self.0[CLASS_FLAG] == 1.0
    }
}

/// Constants that map raw inputs into feature space.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureScaling {
    /// Reference speed; features carry `V / v_ref`.
    pub v_ref: f64,
    /// Shape parameters are mapped from these bounds onto `[-1, 1]`.
    pub bounds: DesignBounds,
}

impl Default for FeatureScaling {
    fn default() -> Self {
        let bounds = DesignBounds::default();
        FeatureScaling {
            v_ref: bounds.upper[Parameter::Speed.index()],
            bounds,
        }
    }
}

/// Per-design frame used to featurize points around one hull.
pub struct DesignFrame<'a> {
    scaling: &'a FeatureScaling,
    x_bow: f64,
    length: f64,
    head: [f64; 5],
}

impl<'a> DesignFrame<'a> {
    pub fn new(mesh: &HullMesh, params: &DesignParams, scaling: &'a FeatureScaling) -> Self {
        let b = mesh.bounds();
        let mut head = [0.0; 5];
        head[0] = params.v_inf / scaling.v_ref;
        let shape = [
            Parameter::ScaleX,
            Parameter::LengthOverBeam,
            Parameter::BeamOverDraught,
            Parameter::Midship,
        ];
        for (slot, p) in head[1..].iter_mut().zip(shape) {
            *slot = 2.0 * scaling.bounds.normalize(p, params.get(p)) - 1.0;
        }
        DesignFrame {
            scaling,
            x_bow: b.min.x,
            length: b.max.x - b.min.x,
            head,
        }
    }

    pub fn scaling(&self) -> &FeatureScaling {
        self.scaling
    }

    pub fn point(&self, position: Vec3, distance: f64, normal: Vec3, surface: bool) -> FeatureVector {
        let l = self.length;
        let mut f = [0.0; FEATURE_COUNT];
        f[0] = (position.x - self.x_bow) / l;
        f[1] = position.y / l;
        f[2] = position.z / l;
        f[3] = distance / l;
        f[4] = normal.x;
        f[5] = normal.y;
        f[6] = normal.z;
        f[7..12].copy_from_slice(&self.head);
        f[CLASS_FLAG] = if surface { 1.0 } else { 0.0 };
        FeatureVector(f)
    }
}

/// Features of every face centroid of `mesh`, in face order.
pub fn surface_features(mesh: &HullMesh, frame: &DesignFrame) -> Vec<FeatureVector> {
    mesh.face_geometry()
        .iter()
        .map(|g| frame.point(g.centroid, 0.0, g.normal, true))
        .collect()
}

/// Features of off-body points, using the nearest hull face.
pub fn volume_features(index: &MeshIndex, positions: &[Vec3], frame: &DesignFrame) -> Vec<FeatureVector> {
    positions
        .iter()
        .map(|&p| {
            let q = index.signed_distance(p);
            frame.point(p, q.distance, q.normal, false)
        })
        .collect()
}

/// Features for every sample of a case, in sample order.
pub fn case_features(case: &crate::fields::FlowCase, scaling: &FeatureScaling) -> Result<Vec<FeatureVector>> {
    case.validate()?;
    let frame = DesignFrame::new(&case.mesh, &case.params, scaling);
    let mut out = surface_features(&case.mesh, &frame);
    let positions: Vec<Vec3> = case.volume_samples().iter().map(|s| s.position).collect();
    out.extend(volume_features(&case.mesh.index(), &positions, &frame));
    check_finite(&out)?;
    Ok(out)
}

fn check_finite(features: &[FeatureVector]) -> Result<()> {
    match features.iter().position(|f| f.0.iter().any(|v| !v.is_finite())) {
        Some(i) => Err(Error::NonFiniteFeature(i)),
        None => Ok(()),
    }
}

/// Channel values in coefficient form. Absent channels are zero.
pub fn coefficient_targets(sample: &FieldSample, v_inf: f64, c: &WaterConstants) -> Result<[f64; CHANNEL_COUNT]> {
    if !(v_inf > 0.0) {
        return Err(Error::Domain("coefficients need a positive freestream speed".into()));
    }
    let q_inf = c.dynamic_pressure(v_inf);
    let mut t = [0.0; CHANNEL_COUNT];
    t[0] = (sample.p + c.rho * c.gravity * sample.position.z - c.p_atm) / q_inf;
    t[1] = sample.q;
    match sample.kind {
        SampleKind::Volume { u } => t[2..5].copy_from_slice(&(u / v_inf).to_array()),
        SampleKind::Surface { kappa } => t[5..8].copy_from_slice(&(kappa / q_inf).to_array()),
    }
    Ok(t)
}

/// Inverse of [`coefficient_targets`].
pub fn physical_sample(
    position: Vec3,
    surface: bool,
    coefficients: &[f64; CHANNEL_COUNT],
    v_inf: f64,
    c: &WaterConstants,
) -> FieldSample {
    let q_inf = c.dynamic_pressure(v_inf);
    let p = c.hydrostatic(position.z) + coefficients[0] * q_inf;
    let v3 = |k: usize| Vec3::new(coefficients[k], coefficients[k + 1], coefficients[k + 2]);
    if surface {
        FieldSample::surface(position, p, coefficients[1], v3(5) * q_inf)
    } else {
        FieldSample::volume(position, p, coefficients[1], v3(2) * v_inf)
    }
}

/// Per-channel z-score statistics.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChannelStats {
    pub mean: [f64; CHANNEL_COUNT],
    pub scale: [f64; CHANNEL_COUNT],
}

impl Default for ChannelStats {
    fn default() -> Self {
        ChannelStats {
            mean: [0.0; CHANNEL_COUNT],
            scale: [1.0; CHANNEL_COUNT],
        }
    }
}

impl ChannelStats {
    /// Statistics over the channels present for each point's class.
    pub fn fit<'a>(rows: impl IntoIterator<Item = (&'a [f64; CHANNEL_COUNT], bool)>) -> Self {
        let mut n = [0usize; CHANNEL_COUNT];
        let mut sum = [0.0; CHANNEL_COUNT];
        let mut sum2 = [0.0; CHANNEL_COUNT];
        for (row, surface) in rows {
            for &k in channels(surface) {
                n[k] += 1;
                sum[k] += row[k];
                sum2[k] += row[k] * row[k];
            }
        }
        let mut stats = ChannelStats::default();
        for k in 0..CHANNEL_COUNT {
            if n[k] == 0 {
                continue;
            }
            let mean = sum[k] / n[k] as f64;
            let var = (sum2[k] / n[k] as f64 - mean * mean).max(0.0);
            stats.mean[k] = mean;
            let sd = libm::sqrt(var);
            stats.scale[k] = if sd > 1e-12 { sd } else { 1.0 };
        }
        stats
    }

    pub fn validate(&self) -> Result<()> {
        if self.scale.iter().all(|&s| s > 0.0 && s.is_finite()) && self.mean.iter().all(|m| m.is_finite()) {
            Ok(())
        } else {
            Err(Error::Config("normalization scales must be positive and finite".into()))
        }
    }

    pub fn normalize(&self, row: &mut [f64]) {
        for ((v, m), s) in row.iter_mut().zip(&self.mean).zip(&self.scale) {
            *v = (*v - m) / s;
        }
    }

    pub fn denormalize(&self, row: &mut [f64]) {
        for ((v, m), s) in row.iter_mut().zip(&self.mean).zip(&self.scale) {
            *v = *v * s + m;
        }
    }
}

/// Default hidden layer widths.
pub const DEFAULT_HIDDEN: [usize; 3] = [64, 64, 64];

#[derive(Debug, Clone, PartialEq)]
pub struct SurrogateModel {
    pub network: Mlp,
    pub stats: ChannelStats,
    pub scaling: FeatureScaling,
    pub constants: WaterConstants,
}

impl SurrogateModel {
    pub fn new(network: Mlp, stats: ChannelStats, scaling: FeatureScaling, constants: WaterConstants) -> Result<Self> {
        if network.inputs() != FEATURE_COUNT || network.outputs() != CHANNEL_COUNT {
            return Err(Error::Config("surrogate network must map 13 features to 8 channels".into()));
        }
        stats.validate()?;
        Ok(SurrogateModel {
            network,
            stats,
            scaling,
            constants,
        })
    }

    /// Raw network output (z-scored channels).
    pub fn forward_normalized(&self, features: &[FeatureVector]) -> Result<Vec<f64>> {
        check_finite(features)?;
        let flat: Vec<f64> = features.iter().flat_map(|f| f.0).collect();
        Ok(self.network.forward(&flat))
    }

    /// Channel values in coefficient form, water fraction clamped to `[0, 1]`.
    pub fn forward(&self, features: &[FeatureVector]) -> Result<Vec<[f64; CHANNEL_COUNT]>> {
        let raw = self.forward_normalized(features)?;
        Ok(raw
            .chunks_exact(CHANNEL_COUNT)
            .map(|c| {
                let mut row = [0.0; CHANNEL_COUNT];
                row.copy_from_slice(c);
                self.stats.denormalize(&mut row);
                row[1] = row[1].clamp(0.0, 1.0);
                row
            })
            .collect())
    }
}

/// One training or validation point with its z-scored target.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrainingPoint {
    pub features: FeatureVector,
    pub target: [f64; CHANNEL_COUNT],
    pub surface: bool,
}

/// Relative weights of the surface and volume terms of the loss.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct LossWeights {
    pub surface: f64,
    pub volume: f64,
}

impl Default for LossWeights {
    fn default() -> Self {
        LossWeights {
            surface: 1.0,
            volume: 1.0,
        }
    }
}

/// Mean over points of the summed absolute channel errors of each point's
/// class; `grad`, if given, receives `d loss / d prediction`.
pub(crate) fn l1_loss(
    prediction: &[f64],
    target: &[f64],
    surface: &[bool],
    weights: LossWeights,
    mut grad: Option<&mut [f64]>,
) -> f64 {
    let n = surface.len() as f64;
    let mut total = 0.0;
    for (i, &s) in surface.iter().enumerate() {
        let w = if s { weights.surface } else { weights.volume };
        let row = i * CHANNEL_COUNT;
        let mut point = 0.0;
        for &k in channels(s) {
            let d = prediction[row + k] - target[row + k];
            point += d.abs();
            if let Some(g) = grad.as_deref_mut() {
                g[row + k] = if d > 0.0 {
                    w / n
                } else if d < 0.0 {
                    -w / n
                } else {
                    0.0
                };
            }
        }
        total += w * point;
    }
    total / n
}

fn batch_arrays(batch: &[TrainingPoint]) -> Result<(Vec<f64>, Vec<f64>, Vec<bool>)> {
    if batch.is_empty() {
        return Err(Error::Domain("loss needs a non-empty batch".into()));
    }
    let mut x = Vec::with_capacity(batch.len() * FEATURE_COUNT);
    let mut t = Vec::with_capacity(batch.len() * CHANNEL_COUNT);
    let mut s = Vec::with_capacity(batch.len());
    for (i, p) in batch.iter().enumerate() {
        if p.features.is_surface() != p.surface {
            return Err(Error::SampleMismatch { index: i });
        }
        x.extend_from_slice(&p.features.0);
        t.extend_from_slice(&p.target);
        s.push(p.surface);
    }
    check_finite(&batch.iter().map(|p| p.features).collect::<Vec<_>>())?;
    Ok((x, t, s))
}

/// Split surface/volume mean absolute error on normalized channels.
pub fn loss(network: &Mlp, batch: &[TrainingPoint], weights: LossWeights) -> Result<f64> {
    let (x, t, s) = batch_arrays(batch)?;
    Ok(l1_loss(&network.forward(&x), &t, &s, weights, None))
}

/// Case indices of the train, validation and test sets.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DatasetSplit {
    pub train: Vec<usize>,
    pub validation: Vec<usize>,
    pub test: Vec<usize>,
}

/// Seeded shuffle of `0..n` partitioned by `ratios` (train, validation, test).
pub fn split_dataset(n: usize, ratios: [f64; 3], seed: u64) -> Result<DatasetSplit> {
    if ratios.iter().any(|r| !(*r >= 0.0)) || libm::fabs(ratios.iter().sum::<f64>() - 1.0) > 1e-9 {
        return Err(Error::Config("split ratios must be non-negative and sum to 1".into()));
    }
    let n_train = libm::round(n as f64 * ratios[0]) as usize;
    let n_val = (libm::round(n as f64 * ratios[1]) as usize).min(n - n_train.min(n));
    let n_test = n.saturating_sub(n_train + n_val);
    for (size, r) in [n_train, n_val, n_test].iter().zip(ratios) {
        if r > 0.0 && *size == 0 {
            return Err(Error::Config(alloc::format!("{n} cases are too few for split ratios {ratios:?}")));
        }
    }
    let mut ids: Vec<usize> = (0..n).collect();
    let mut rng = crate::rng::stream(seed, "split");
    rand::seq::SliceRandom::shuffle(ids.as_mut_slice(), &mut rng);
    let test = ids.split_off(n_train + n_val);
    let validation = ids.split_off(n_train);
    Ok(DatasetSplit {
        train: ids,
        validation,
        test,
    })
}

/// Which points a design evaluation predicts.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct SamplingPlan {
    /// Structured off-body grid, or `None` for surface-only evaluation.
    pub volume_grid: Option<[usize; 3]>,
}

impl Default for SamplingPlan {
    fn default() -> Self {
        SamplingPlan {
            volume_grid: Some([16, 12, 12]),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DesignEvaluation {
    pub forces: ForceVector,
    /// Predicted surface samples followed by volume samples.
    pub samples: Vec<FieldSample>,
}

/// Predict the fields around a morphed hull and integrate its forces.
pub fn evaluate_design(
    model: &SurrogateModel,
    mesh: &HullMesh,
    params: &DesignParams,
    plan: &SamplingPlan,
) -> Result<DesignEvaluation> {
    let frame = DesignFrame::new(mesh, params, &model.scaling);
    let mut features = surface_features(mesh, &frame);
    let mut positions: Vec<(Vec3, bool)> = mesh.face_geometry().iter().map(|g| (g.centroid, true)).collect();
    if let Some(dims) = plan.volume_grid {
        let grid = crate::oracle::volume_grid(mesh, dims);
        features.extend(volume_features(&mesh.index(), &grid, &frame));
        positions.extend(grid.into_iter().map(|p| (p, false)));
    }
    let predicted = model.forward(&features)?;
    let samples: Vec<FieldSample> = positions
        .iter()
        .zip(&predicted)
        .map(|(&(p, s), c)| physical_sample(p, s, c, params.v_inf, &model.constants))
        .collect();
    let forces = integrate_forces(
        mesh,
        &samples[..mesh.face_count()],
        &model.constants,
        ForceOptions::default(),
    )?;
    Ok(DesignEvaluation { forces, samples })
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn volume_point(target: [f64; 8]) -> TrainingPoint {
        let mut f = [0.0; FEATURE_COUNT];
        f[0] = 0.3;
        TrainingPoint {
            features: FeatureVector(f),
            target,
            surface: false,
        }
    }

    #[test]
    fn hand_summed_volume_loss() {
        let net = Mlp::zeros(&[FEATURE_COUNT, 4, CHANNEL_COUNT]).unwrap();
        let p = volume_point([0.5, 0.5, 0.1, 0.2, 0.3, 9.0, 9.0, 9.0]);
        let l = loss(&net, &[p], LossWeights::default()).unwrap();
        assert!((l - 1.6).abs() < 1e-15);
    }

    #[test]
    fn classes_mask_their_foreign_channels() {
        let net = Mlp::zeros(&[FEATURE_COUNT, CHANNEL_COUNT]).unwrap();
        let mut surf = volume_point([0.0, 0.0, 5.0, 5.0, 5.0, 0.0, 0.0, 0.0]);
        surf.surface = true;
        surf.features.0[CLASS_FLAG] = 1.0;
        assert_eq!(loss(&net, &[surf], LossWeights::default()).unwrap(), 0.0);
        let vol = volume_point([0.0, 0.0, 0.0, 0.0, 0.0, 5.0, 5.0, 5.0]);
        assert_eq!(loss(&net, &[vol], LossWeights::default()).unwrap(), 0.0);
        // flag and class disagree
        surf.surface = false;
        assert!(matches!(
            loss(&net, &[surf], LossWeights::default()),
            Err(Error::SampleMismatch { index: 0 })
        ));
        assert!(loss(&net, &[], LossWeights::default()).is_err());
    }

    #[test]
    fn zero_network_predicts_channel_means() {
        let stats = ChannelStats {
            mean: [0.1, 0.9, 1.0, 0.0, 0.0, 0.003, 0.0, 0.0],
            scale: [1.0; 8],
        };
        let model = SurrogateModel::new(
            Mlp::zeros(&[FEATURE_COUNT, 8, CHANNEL_COUNT]).unwrap(),
            stats.clone(),
            FeatureScaling::default(),
            WaterConstants::default(),
        )
        .unwrap();
        let out = model.forward(&[FeatureVector([0.2; FEATURE_COUNT])]).unwrap();
        assert_eq!(out, vec![stats.mean]);
        let bad = FeatureVector([f64::NAN; FEATURE_COUNT]);
        assert!(matches!(model.forward(&[bad]), Err(Error::NonFiniteFeature(0))));
    }

    #[test]
    fn water_fraction_is_clamped_at_inference() {
        let stats = ChannelStats {
            mean: [0.0, 1.7, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0],
            scale: [1.0; 8],
        };
        let model = SurrogateModel::new(
            Mlp::zeros(&[FEATURE_COUNT, CHANNEL_COUNT]).unwrap(),
            stats,
            FeatureScaling::default(),
            WaterConstants::default(),
        )
        .unwrap();
        assert_eq!(model.forward(&[FeatureVector([0.0; FEATURE_COUNT])]).unwrap()[0][1], 1.0);
    }

    #[test]
    fn coefficient_round_trip() {
        let c = WaterConstants::default();
        let s = FieldSample::surface(Vec3::new(1.0, 0.2, -0.3), 104_000.0, 0.8, Vec3::new(2.0, 0.1, -0.4));
        let t = coefficient_targets(&s, 1.7, &c).unwrap();
        let back = physical_sample(s.position, true, &t, 1.7, &c);
        assert!((back.p - s.p).abs() < 1e-9);
        assert!((back.kappa().unwrap() - s.kappa().unwrap()).norm() < 1e-12);
        // stagnation: c_p = 1
        let stag = FieldSample::volume(Vec3::ZERO, c.p_atm + c.dynamic_pressure(2.0), 1.0, Vec3::ZERO);
        assert_eq!(coefficient_targets(&stag, 2.0, &c).unwrap()[0], 1.0);
        assert!(coefficient_targets(&stag, 0.0, &c).is_err());
    }

    #[test]
    fn stats_only_see_present_channels() {
        let a = [1.0, 0.0, 2.0, 0.0, 0.0, 100.0, 0.0, 0.0];
        let b = [3.0, 1.0, 0.0, 0.0, 0.0, 7.0, 0.0, 0.0];
        let stats = ChannelStats::fit([(&a, false), (&b, true)]);
        assert_eq!(stats.mean[0], 2.0);
        assert_eq!(stats.mean[2], 2.0);
        assert_eq!(stats.mean[5], 7.0);
        assert_eq!(stats.scale[5], 1.0);
    }

    #[test]
    fn paper_split_sizes() {
        let s = split_dataset(140, [120.0 / 140.0, 10.0 / 140.0, 10.0 / 140.0], 5).unwrap();
        assert_eq!((s.train.len(), s.validation.len(), s.test.len()), (120, 10, 10));
        let mut all: Vec<usize> = s.train.iter().chain(&s.validation).chain(&s.test).copied().collect();
        all.sort_unstable();
        assert_eq!(all, (0..140).collect::<Vec<_>>());
        assert_eq!(s, split_dataset(140, [120.0 / 140.0, 10.0 / 140.0, 10.0 / 140.0], 5).unwrap());
        assert_ne!(s.train, split_dataset(140, [120.0 / 140.0, 10.0 / 140.0, 10.0 / 140.0], 6).unwrap().train);
        let all_train = split_dataset(7, [1.0, 0.0, 0.0], 1).unwrap();
        assert_eq!((all_train.train.len(), all_train.validation.len(), all_train.test.len()), (7, 0, 0));
        assert!(split_dataset(2, [0.4, 0.3, 0.3], 1).is_err());
        assert!(split_dataset(10, [0.5, 0.5, 0.5], 1).is_err());
    }
}

//! Analytic stand-in for a RANS flow solver.
//!
//! Generates a procedural hull and self-consistent flow fields around any
//! morphed variant, so the surrogate can be trained and the optimization
//! loop validated against exact ground truth. The flow model is invented;
//! it is built to be smooth, deterministic, speed-dominated and to carry a
//! Froude-dependent midship trade-off, not to be physically accurate.
//!
//! Frame: the freestream runs along `+x`, the bow tip sits at the upstream
//! end of the hull, the calm waterline is `z = 0`.

mod flow;
mod hull;

use serde::{Deserialize, Serialize};

use crate::fields::{integrate_forces, FlowCase, ForceOptions, ForceVector, WaterConstants};
use crate::mesh::HullMesh;
use crate::morph::{apply_morph, BaselineRatios, DesignParams, MorphConfig};
use crate::{Error, Result};

pub use flow::{friction_coefficient, surface_samples, synth_case, volume_grid};
pub use hull::make_baseline_hull;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FrictionLine {
    /// `0.075 / (log10 Re − 2)²`
    Ittc1957,
    /// `0.066 / (log10 Re − 2.03)²`
    Hughes,
}

/// Shape controls of the procedural hull.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct HullShape {
    /// Longitudinal stations between the bow and stern tips.
    pub stations: usize,
    /// Vertices around each section (rounded down to even).
    pub ring: usize,
    /// Waterline taper exponent of the forebody (larger is blunter).
    pub entrance_exponent: f64,
    /// Waterline taper exponent of the afterbody.
    pub run_exponent: f64,
    /// Section super-ellipse exponent; below 1 gives boxy sections.
    pub section_exponent: f64,
}

impl Default for HullShape {
    fn default() -> Self {
        Self {
            stations: 48,
            ring: 32,
            entrance_exponent: 3.0,
            run_exponent: 4.0,
            section_exponent: 0.5,
        }
    }
}

/// Coefficients of the analytic flow model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct FlowModel {
    pub friction_line: FrictionLine,
    /// Kinematic viscosity, m²/s.
    pub kinematic_viscosity: f64,
    /// Stagnation pressure coefficient on upstream-facing surface.
    pub bow_pressure: f64,
    /// Pressure recovery coefficient on downstream-facing surface at the
    /// preferred midship position.
    pub stern_recovery: f64,
    /// Loss of stern recovery per squared midship offset.
    pub recovery_loss: f64,
    /// Midship position with the best pressure recovery.
    pub preferred_midship: f64,
    /// Suction coefficient on the parallel midbody.
    pub suction: f64,
    /// Wave elevation scale `a` in `a·Fn²·L`.
    pub wave_amplitude: f64,
    /// Exponential decay of the bow-wave amplitude with midship position
    /// (a longer entrance makes a smaller bow wave).
    pub entrance_wave_decay: f64,
    /// Aft decay length of the bow-wave pressure on the hull, fraction of L.
    pub bow_wave_extent: f64,
    /// Free-surface interface thickness as a fraction of the draught.
    pub interface_thickness: f64,
    /// Near-field decay length of volume perturbations, fraction of L.
    pub near_field_decay: f64,
}

impl Default for FlowModel {
    fn default() -> Self {
        Self {
            friction_line: FrictionLine::Ittc1957,
            kinematic_viscosity: 1.19e-6,
            bow_pressure: 0.45,
            stern_recovery: 0.30,
            recovery_loss: 2.0,
            preferred_midship: 0.3,
            suction: 0.08,
            wave_amplitude: 0.025,
            entrance_wave_decay: 3.0,
            bow_wave_extent: 0.1,
            interface_thickness: 0.1,
            near_field_decay: 0.05,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct OracleConfig {
    /// Baseline length L0, m.
    pub length: f64,
    /// Baseline beam B0, m.
    pub beam: f64,
    /// Baseline draught T0, m (the topside rises another T0 above water).
    pub draught: f64,
    pub hull: HullShape,
    pub flow: FlowModel,
    /// Volume sample grid `[nx, ny, nz]`.
    pub volume_grid: [usize; 3],
    /// Relative Gaussian noise on dynamic field components.
    pub noise: f64,
    pub seed: u64,
    pub constants: WaterConstants,
}

impl Default for OracleConfig {
    fn default() -> Self {
        let ratios = BaselineRatios::default();
        let length = 6.0;
        let beam = length / ratios.length_over_beam;
        Self {
            length,
            beam,
            draught: beam / ratios.beam_over_draught,
            hull: HullShape::default(),
            flow: FlowModel::default(),
            volume_grid: [16, 12, 12],
            noise: 0.0,
            seed: 0,
            constants: WaterConstants::default(),
        }
    }
}

impl OracleConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.length > 0.0 && self.beam > 0.0 && self.draught > 0.0) {
            return Err(Error::Config("hull dimensions must be positive".into()));
        }
        if self.volume_grid.iter().any(|&n| n < 8) {
            return Err(Error::Config("volume grid must be at least 8x8x8".into()));
        }
        if !(self.noise >= 0.0) {
            return Err(Error::Config("noise must be non-negative".into()));
        }
        Ok(())
    }

    /// Principal-dimension ratios of the procedural hull.
    pub fn baseline_ratios(&self) -> BaselineRatios {
        BaselineRatios {
            length_over_beam: self.length / self.beam,
            beam_over_draught: self.beam / self.draught,
        }
    }
}

/// Ground-truth hull force of a design: morph, synthesize, integrate.
///
/// Only surface samples are synthesized; they are the same samples
/// [`synth_case`] places first in its output.
pub fn oracle_resistance(
    baseline: &HullMesh,
    params: &DesignParams,
    morph: &MorphConfig,
    config: &OracleConfig,
) -> Result<ForceVector> {
    let mesh = apply_morph(baseline, params, morph)?;
    let samples = surface_samples(&mesh, params, config);
    integrate_forces(&mesh, &samples, &config.constants, ForceOptions::default())
}

/// Forces of an already-synthesized case.
pub fn case_forces(case: &FlowCase) -> Result<ForceVector> {
    integrate_forces(
        &case.mesh,
        case.surface_samples(),
        &case.constants,
        ForceOptions::default(),
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fields::{speed_from_froude, FieldSample};
    use crate::geom::Vec3;
    use crate::mesh::HullMesh;
    use alloc::vec::Vec;

    fn setup() -> (OracleConfig, HullMesh, MorphConfig) {
        let cfg = OracleConfig::default();
        let base = make_baseline_hull(&cfg);
        let morph = MorphConfig {
            baseline: cfg.baseline_ratios(),
            ..MorphConfig::default()
        };
        (cfg, base, morph)
    }

    fn design(cfg: &OracleConfig, midship: f64, v: f64) -> DesignParams {
        DesignParams::baseline(&cfg.baseline_ratios(), midship, v)
    }

    fn friction_fx(mesh: &HullMesh, samples: &[FieldSample]) -> f64 {
        mesh.face_geometry()
            .iter()
            .zip(samples)
            .map(|(g, s)| s.q * s.kappa().unwrap().x * g.area)
            .sum()
    }

    #[test]
    fn zero_speed_limit() {
        let (cfg, base, morph) = setup();
        let p = design(&cfg, 0.5, 0.0);
        let mesh = apply_morph(&base, &p, &morph).unwrap();
        let case = synth_case(&mesh, &p, &cfg);
        let eps = cfg.flow.interface_thickness * cfg.draught;
        for s in &case.samples {
            let z = s.position.z;
            assert!((s.q - 1.0 / (1.0 + libm::exp(z / eps))).abs() < 1e-15);
            match s.kind {
                crate::fields::SampleKind::Surface { kappa } => {
                    assert_eq!(kappa, Vec3::ZERO);
                    assert!((s.p - cfg.constants.hydrostatic(z)).abs() < 1e-9);
                }
                crate::fields::SampleKind::Volume { u } => assert_eq!(u, Vec3::ZERO),
            }
        }
    }

    #[test]
    fn friction_scales_below_square_law() {
        let (mut cfg, base, morph) = setup();
        cfg.flow.wave_amplitude = 0.0;
        let v = 1.2;
        let mesh = apply_morph(&base, &design(&cfg, 0.5, v), &morph).unwrap();
        let f1 = friction_fx(&mesh, &surface_samples(&mesh, &design(&cfg, 0.5, v), &cfg));
        let f2 = friction_fx(&mesh, &surface_samples(&mesh, &design(&cfg, 0.5, 2.0 * v), &cfg));
        let re = v * cfg.length / cfg.flow.kinematic_viscosity;
        let line = FrictionLine::Ittc1957;
        let expected = 4.0 * friction_coefficient(line, 2.0 * re) / friction_coefficient(line, re);
        assert!(expected < 4.0);
        assert!((f2 / f1 - expected).abs() < 1e-9 * expected);
    }

    #[test]
    fn symmetric_case_has_no_side_force() {
        let (cfg, base, morph) = setup();
        let p = design(&cfg, 0.45, 1.7);
        let f = oracle_resistance(&base, &p, &morph, &cfg).unwrap();
        assert!(f.fy.abs() <= 1e-9 * f.fx.abs(), "{f:?}");
    }

    #[test]
    fn resistance_positive_and_increasing_with_speed() {
        let (cfg, base, morph) = setup();
        let bounds = crate::morph::DesignBounds::default();
        let mut prev = 0.0;
        for i in 0..5 {
            let v = 1.0 + 0.3 * i as f64;
            let f = oracle_resistance(&base, &design(&cfg, 0.5, v), &morph, &cfg).unwrap();
            assert!(f.fx > prev);
            prev = f.fx;
        }
        // corners of the design box
        for mask in 0..32u32 {
            let mut a = [0.0; 5];
            for (k, slot) in a.iter_mut().enumerate() {
                *slot = if mask >> k & 1 == 1 { bounds.upper[k] } else { bounds.lower[k] };
            }
            let p = DesignParams::from_array(a);
            assert!(oracle_resistance(&base, &p, &morph, &cfg).unwrap().fx > 0.0);
        }
    }

    #[test]
    fn larger_hull_more_resistance() {
        let (cfg, base, morph) = setup();
        let mut prev = 0.0;
        for s in [0.9, 1.0, 1.1] {
            let p = DesignParams {
                scale_x: s,
                ..design(&cfg, 0.5, 1.6)
            };
            let fx = oracle_resistance(&base, &p, &morph, &cfg).unwrap().fx;
            assert!(fx > prev);
            prev = fx;
        }
    }

    #[test]
    fn optimal_midship_depends_on_froude() {
        let (cfg, base, morph) = setup();
        let argmin = |froude: f64| {
            let v = speed_from_froude(froude, cfg.constants.gravity, cfg.length);
            (0..=80)
                .map(|i| 0.3 + 0.005 * i as f64)
                .map(|m| (oracle_resistance(&base, &design(&cfg, m, v), &morph, &cfg).unwrap().fx, m))
                .fold((f64::INFINITY, 0.0), |a, b| if b.0 < a.0 { b } else { a })
                .1
        };
        let (slow, fast) = (argmin(0.18), argmin(0.26));
        assert!(fast - slow > 0.05, "slow {slow} fast {fast}");
    }

    #[test]
    fn resistance_path_matches_full_case() {
        let (cfg, base, morph) = setup();
        let p = design(&cfg, 0.6, 1.4);
        let mesh = apply_morph(&base, &p, &morph).unwrap();
        let case = synth_case(&mesh, &p, &cfg);
        case.validate().unwrap();
        assert_eq!(case_forces(&case).unwrap(), oracle_resistance(&base, &p, &morph, &cfg).unwrap());
        assert_eq!(case.volume_samples().len(), 16 * 12 * 12);
    }

    #[test]
    fn deterministic_with_noise() {
        let (mut cfg, base, morph) = setup();
        cfg.noise = 0.01;
        let p = design(&cfg, 0.5, 1.5);
        let mesh = apply_morph(&base, &p, &morph).unwrap();
        let a = synth_case(&mesh, &p, &cfg);
        assert_eq!(a, synth_case(&mesh, &p, &cfg));
        cfg.noise = 0.0;
        let clean = synth_case(&mesh, &p, &cfg);
        assert_ne!(a.samples, clean.samples);
    }

    #[test]
    fn resistance_surface_is_smooth() {
        let (cfg, base, morph) = setup();
        let h = 1e-3;
        let f = |m: f64| oracle_resistance(&base, &design(&cfg, m, 1.8), &morph, &cfg).unwrap().fx;
        let second: Vec<f64> = (0..9)
            .map(|i| 0.32 + 0.045 * i as f64)
            .map(|m| (f(m + h) - 2.0 * f(m) + f(m - h)) / (h * h))
            .collect();
        let scale = f(0.5);
        for d2 in second {
            assert!(d2.abs() < 10.0 * scale, "{d2}");
        }
    }

    #[test]
    fn invalid_config_rejected() {
        let cfg = OracleConfig {
            volume_grid: [8, 8, 4],
            ..OracleConfig::default()
        };
        assert!(cfg.validate().is_err());
        assert!(OracleConfig::default().validate().is_ok());
    }
}

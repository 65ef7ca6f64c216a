//! Parametric hull deformation: three scalings and a longitudinal shift.
//!
//! Transformations apply in a fixed order, scale then shift:
//! `(x, y, z) -> (sx·x + δ(t(x)), sy·y, sz·z)` where `t(x)` is the vertex's
//! normalized position along the baseline hull length and `δ` is the
//! midship shift curve.

use serde::{Deserialize, Serialize};

use crate::geom::Vec3;
use crate::mesh::HullMesh;
use crate::{Error, Result};

/// The five design variables.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Parameter {
    #[serde(rename = "scale_x")]
    ScaleX,
    #[serde(rename = "LbyB")]
    LengthOverBeam,
    #[serde(rename = "BbyT")]
    BeamOverDraught,
    #[serde(rename = "midship")]
    Midship,
    #[serde(rename = "v_inf")]
    Speed,
}

impl Parameter {
    pub const ALL: [Parameter; 5] = [
        Parameter::ScaleX,
        Parameter::LengthOverBeam,
        Parameter::BeamOverDraught,
        Parameter::Midship,
        Parameter::Speed,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Parameter::ScaleX => "scale_x",
            Parameter::LengthOverBeam => "LbyB",
            Parameter::BeamOverDraught => "BbyT",
            Parameter::Midship => "midship",
            Parameter::Speed => "v_inf",
        }
    }

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn from_name(name: &str) -> Option<Parameter> {
        Parameter::ALL.into_iter().find(|p| p.name() == name)
    }
}

/// One hull design and its freestream speed.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DesignParams {
    pub scale_x: f64,
    #[serde(rename = "LbyB")]
    pub length_over_beam: f64,
    #[serde(rename = "BbyT")]
    pub beam_over_draught: f64,
    pub midship: f64,
    /// Freestream speed, m/s.
    pub v_inf: f64,
}

impl DesignParams {
    /// Builds parameters, rejecting any value outside `bounds`.
    pub fn new(values: [f64; 5], bounds: &DesignBounds) -> Result<Self> {
        let p = Self::from_array(values);
        bounds.check(&p)?;
        Ok(p)
    }

    pub fn from_array(v: [f64; 5]) -> Self {
        Self {
            scale_x: v[0],
            length_over_beam: v[1],
            beam_over_draught: v[2],
            midship: v[3],
            v_inf: v[4],
        }
    }

    pub fn to_array(&self) -> [f64; 5] {
        [
            self.scale_x,
            self.length_over_beam,
            self.beam_over_draught,
            self.midship,
            self.v_inf,
        ]
    }

    pub fn get(&self, p: Parameter) -> f64 {
        self.to_array()[p.index()]
    }

    pub fn with(&self, p: Parameter, value: f64) -> Self {
        let mut a = self.to_array();
        a[p.index()] = value;
        Self::from_array(a)
    }

    /// Parameters reproducing the baseline hull at speed `v_inf`.
    pub fn baseline(ratios: &BaselineRatios, midship: f64, v_inf: f64) -> Self {
        Self {
            scale_x: 1.0,
            length_over_beam: ratios.length_over_beam,
            beam_over_draught: ratios.beam_over_draught,
            midship,
            v_inf,
        }
    }
}

/// Per-parameter `[lower, upper]` ranges.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DesignBounds {
    pub lower: [f64; 5],
    pub upper: [f64; 5],
}

impl Default for DesignBounds {
    fn default() -> Self {
        Self {
            lower: [0.9, 6.3, 3.0, 0.3, 1.0],
            upper: [1.1, 7.6, 4.0, 0.7, 2.2],
        }
    }
}

impl DesignBounds {
    pub fn new(lower: [f64; 5], upper: [f64; 5]) -> Result<Self> {
        let b = Self { lower, upper };
        b.validate()?;
        Ok(b)
    }

    pub fn validate(&self) -> Result<()> {
        for p in Parameter::ALL {
            let (lo, hi) = self.range(p);
            if !(lo < hi) || !lo.is_finite() || !hi.is_finite() {
                return Err(Error::InvalidBounds {
                    name: p.name(),
                    lower: lo,
                    upper: hi,
                });
            }
        }
        Ok(())
    }

    pub fn range(&self, p: Parameter) -> (f64, f64) {
        (self.lower[p.index()], self.upper[p.index()])
    }

    pub fn width(&self, p: Parameter) -> f64 {
        self.upper[p.index()] - self.lower[p.index()]
    }

    pub fn check(&self, params: &DesignParams) -> Result<()> {
        for p in Parameter::ALL {
            let v = params.get(p);
            let (lo, hi) = self.range(p);
            if !(v >= lo && v <= hi) {
                return Err(Error::OutOfBounds {
                    name: p.name(),
                    value: v,
                    lower: lo,
                    upper: hi,
                });
            }
        }
        Ok(())
    }

    pub fn contains(&self, params: &DesignParams) -> bool {
        self.check(params).is_ok()
    }

    /// Min-max normalization of one parameter to `[0, 1]`.
    pub fn normalize(&self, p: Parameter, value: f64) -> f64 {
        (value - self.lower[p.index()]) / self.width(p)
    }

    pub fn denormalize(&self, p: Parameter, u: f64) -> f64 {
        self.lower[p.index()] + u * self.width(p)
    }
}

/// Principal-dimension ratios of the undeformed hull.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BaselineRatios {
    /// L0 / B0.
    pub length_over_beam: f64,
    /// B0 / T0.
    pub beam_over_draught: f64,
}

impl Default for BaselineRatios {
    fn default() -> Self {
        Self {
            length_over_beam: 6.96,
            beam_over_draught: 3.52,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MorphConfig {
    pub baseline: BaselineRatios,
    /// Shift-curve amplitude as a fraction of the baseline hull length.
    pub shift_amplitude: f64,
}

impl Default for MorphConfig {
    fn default() -> Self {
        Self {
            baseline: BaselineRatios::default(),
            shift_amplitude: 0.02,
        }
    }
}

/// `(scale_x, scale_y, scale_z)` realizing the requested ratios.
pub fn derived_scales(params: &DesignParams, baseline: &BaselineRatios) -> Result<(f64, f64, f64)> {
    let sx = params.scale_x;
    let sy = sx * baseline.length_over_beam / params.length_over_beam;
    let sz = sy * baseline.beam_over_draught / params.beam_over_draught;
    for (name, v) in [("scale_x", sx), ("scale_y", sy), ("scale_z", sz)] {
        if !(v > 0.0) || !v.is_finite() {
            return Err(Error::OutOfBounds {
                name,
                value: v,
                lower: 0.0,
                upper: f64::INFINITY,
            });
        }
    }
    Ok((sx, sy, sz))
}

fn smoothstep(s: f64) -> f64 {
    s * s * (3.0 - 2.0 * s)
}

/// Longitudinal displacement at normalized position `t`.
///
/// Two cubic Hermite segments meeting at `midship`: zero value and slope at
/// `t = 0` and `t = 1`, peak value `amplitude` with zero slope at `midship`.
pub fn shift_curve(t: f64, midship: f64, amplitude: f64) -> f64 {
    if t <= 0.0 || t >= 1.0 {
        return 0.0;
    }
    let s = if t < midship {
        t / midship
    } else if t > midship {
        (1.0 - t) / (1.0 - midship)
    } else {
        1.0
    };
    amplitude * smoothstep(s)
}

/// Largest `|dδ/dt|` of the shift curve.
pub fn shift_curve_max_slope(midship: f64, amplitude: f64) -> f64 {
    let shorter = midship.min(1.0 - midship);
    if shorter <= 0.0 {
        return f64::INFINITY;
    }
    1.5 * amplitude.abs() / shorter
}

/// Applies the design to a baseline mesh.
///
/// Rejects designs whose longitudinal mapping would fold over itself.
pub fn apply_morph(mesh: &HullMesh, params: &DesignParams, config: &MorphConfig) -> Result<HullMesh> {
    let (sx, sy, sz) = derived_scales(params, &config.baseline)?;
    let bounds = mesh.bounds();
    let x0 = bounds.min.x;
    let length = bounds.max.x - bounds.min.x;
    let amplitude = config.shift_amplitude * length;
    let shifted = amplitude != 0.0;
    if shifted {
        let slope = shift_curve_max_slope(params.midship, amplitude) / length;
        if !(slope < sx) {
            return Err(Error::MorphRejected { slope, scale: sx });
        }
    }
    mesh.map_vertices(|v| {
        let mut x = sx * v.x;
        if shifted {
            x += shift_curve((v.x - x0) / length, params.midship, amplitude);
        }
        Vec3::new(x, sy * v.y, sz * v.z)
    })
}

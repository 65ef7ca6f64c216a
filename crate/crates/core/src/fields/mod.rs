//! Flow-field containers, non-dimensional coefficients, hull-force
//! integration, free-surface extraction and force-error metrics.

mod free_surface;
mod metrics;

use alloc::vec::Vec;
use core::ops::{Add, Sub};

use serde::{Deserialize, Serialize};

use crate::geom::Vec3;
use crate::mesh::HullMesh;
use crate::morph::DesignParams;
use crate::{Error, Result};

pub use free_surface::{extract_free_surface, FreeSurface, FreeSurfacePoint};
pub use metrics::{force_relative_l1, relative_l1, RelativeL1};

/// Water and reference-pressure constants.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct WaterConstants {
    /// Density, kg/m³.
    pub rho: f64,
    /// Gravitational acceleration, m/s².
    pub gravity: f64,
    /// Reference (atmospheric) pressure, Pa.
    pub p_atm: f64,
}

impl Default for WaterConstants {
    fn default() -> Self {
        Self {
            rho: 1025.0,
            gravity: 9.81,
            p_atm: 101_325.0,
        }
    }
}

impl WaterConstants {
    /// Hydrostatic pressure `p_atm − ρ g z` at height `z`.
    pub fn hydrostatic(&self, z: f64) -> f64 {
        self.p_atm - self.rho * self.gravity * z
    }

    /// Dynamic pressure `ρ V² / 2`.
    pub fn dynamic_pressure(&self, v_inf: f64) -> f64 {
        0.5 * self.rho * v_inf * v_inf
    }
}

/// Location-specific channels. The unused channel is absent, not zero.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum SampleKind {
    /// On the hull: skin-friction stress, Pa.
    Surface { kappa: Vec3 },
    /// In the fluid: mean velocity, m/s.
    Volume { u: Vec3 },
}

/// Physical fields at one point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FieldSample {
    pub position: Vec3,
    /// Pressure, Pa.
    pub p: f64,
    /// Water volume fraction in `[0, 1]`.
    pub q: f64,
    pub kind: SampleKind,
}

impl FieldSample {
    pub fn surface(position: Vec3, p: f64, q: f64, kappa: Vec3) -> Self {
        Self {
            position,
            p,
            q,
            kind: SampleKind::Surface { kappa },
        }
    }

    pub fn volume(position: Vec3, p: f64, q: f64, u: Vec3) -> Self {
        Self {
            position,
            p,
            q,
            kind: SampleKind::Volume { u },
        }
    }

    pub fn is_surface(&self) -> bool {
        matches!(self.kind, SampleKind::Surface { .. })
    }

    pub fn kappa(&self) -> Option<Vec3> {
        match self.kind {
            SampleKind::Surface { kappa } => Some(kappa),
            SampleKind::Volume { .. } => None,
        }
    }

    pub fn velocity(&self) -> Option<Vec3> {
        match self.kind {
            SampleKind::Volume { u } => Some(u),
            SampleKind::Surface { .. } => None,
        }
    }
}

/// One flow solution: geometry, freestream and the sampled point cloud.
///
/// Surface samples come first, one per face in face order, followed by the
/// volume samples.
#[derive(Debug, Clone, PartialEq)]
pub struct FlowCase {
    pub params: DesignParams,
    pub mesh: HullMesh,
    /// Freestream speed, m/s.
    pub v_inf: f64,
    pub constants: WaterConstants,
    /// Length between perpendiculars, m.
    pub l_pp: f64,
    pub samples: Vec<FieldSample>,
}

impl FlowCase {
    pub fn surface_samples(&self) -> &[FieldSample] {
        let n = self.mesh.face_count().min(self.samples.len());
        &self.samples[..n]
    }

    pub fn volume_samples(&self) -> &[FieldSample] {
        let n = self.mesh.face_count().min(self.samples.len());
        &self.samples[n..]
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.v_inf > 0.0) {
            return Err(Error::Domain(alloc::format!("v_inf must be positive, got {}", self.v_inf)));
        }
        if !(self.constants.rho > 0.0) {
            return Err(Error::Domain(alloc::format!("rho must be positive, got {}", self.constants.rho)));
        }
        let faces = self.mesh.face_geometry();
        if self.samples.len() < faces.len() {
            return Err(Error::CountMismatch {
                expected: faces.len(),
                actual: self.samples.len(),
            });
        }
        let tol = 1e-6 * self.l_pp;
        for (i, s) in self.samples.iter().enumerate() {
            let ok = if i < faces.len() {
                s.is_surface() && (s.position - faces[i].centroid).norm() <= tol
            } else {
                !s.is_surface()
            };
            if !ok || !(0.0..=1.0).contains(&s.q) {
                return Err(Error::SampleMismatch { index: i });
            }
        }
        Ok(())
    }

    pub fn froude(&self) -> f64 {
        froude_number(self.v_inf, self.constants.gravity, self.l_pp)
    }
}

/// Integrated hull force, N.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct ForceVector {
    pub fx: f64,
    pub fy: f64,
    pub fz: f64,
}

impl ForceVector {
    pub fn to_array(self) -> [f64; 3] {
        [self.fx, self.fy, self.fz]
    }

    pub fn from_vec3(v: Vec3) -> Self {
        Self {
            fx: v.x,
            fy: v.y,
            fz: v.z,
        }
    }

    pub fn norm(self) -> f64 {
        Vec3::new(self.fx, self.fy, self.fz).norm()
    }

    pub fn is_finite(self) -> bool {
        self.fx.is_finite() && self.fy.is_finite() && self.fz.is_finite()
    }
}

impl Add for ForceVector {
    type Output = ForceVector;
    fn add(self, o: Self) -> Self {
        ForceVector {
            fx: self.fx + o.fx,
            fy: self.fy + o.fy,
            fz: self.fz + o.fz,
        }
    }
}

impl Sub for ForceVector {
    type Output = ForceVector;
    fn sub(self, o: Self) -> Self {
        ForceVector {
            fx: self.fx - o.fx,
            fy: self.fy - o.fy,
            fz: self.fz - o.fz,
        }
    }
}

/// `Fn = V / sqrt(g L)`.
pub fn froude_number(v_inf: f64, gravity: f64, l_pp: f64) -> f64 {
    v_inf / libm::sqrt(gravity * l_pp)
}

/// Speed for a given Froude number.
pub fn speed_from_froude(froude: f64, gravity: f64, l_pp: f64) -> f64 {
    froude * libm::sqrt(gravity * l_pp)
}

/// Hydrodynamic pressure coefficient `c_p = 2 (p + ρ g z − p_atm) / (ρ V²)`.
pub fn pressure_coefficient(p: f64, z: f64, v_inf: f64, c: &WaterConstants) -> Result<f64> {
    if v_inf == 0.0 {
        return Err(Error::Domain("pressure coefficient needs v_inf != 0".into()));
    }
    Ok(2.0 * (p + c.rho * c.gravity * z - c.p_atm) / (c.rho * v_inf * v_inf))
}

/// Skin-friction coefficient `c_fx = 2 κ_x / (ρ S V²)`.
pub fn skin_friction_coefficient(
    kappa_x: f64,
    wetted_area: f64,
    v_inf: f64,
    c: &WaterConstants,
) -> Result<f64> {
    if !(wetted_area > 0.0) {
        return Err(Error::Domain(alloc::format!(
            "wetted area must be positive, got {wetted_area}"
        )));
    }
    if v_inf == 0.0 {
        return Err(Error::Domain("skin friction coefficient needs v_inf != 0".into()));
    }
    Ok(2.0 * kappa_x / (c.rho * wetted_area * v_inf * v_inf))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct ForceOptions {
    /// Report total pressure force (`p − p_atm`) instead of the hydrodynamic
    /// part (`p + ρ g z − p_atm`).
    pub include_hydrostatic: bool,
}

fn check_surface(mesh: &HullMesh, samples: &[FieldSample]) -> Result<()> {
    if samples.len() != mesh.face_count() {
        return Err(Error::CountMismatch {
            expected: mesh.face_count(),
            actual: samples.len(),
        });
    }
    Ok(())
}

/// Hull force from one surface sample per face.
///
/// `F = Σ q_f [ −p_dyn,f n_f + κ_f ] A_f`, with `n` the outward normal and
/// `p_dyn = p + ρ g z − p_atm`. The sum runs sequentially in face order.
pub fn integrate_forces(
    mesh: &HullMesh,
    samples: &[FieldSample],
    constants: &WaterConstants,
    options: ForceOptions,
) -> Result<ForceVector> {
    check_surface(mesh, samples)?;
    let mut total = Vec3::ZERO;
    for (i, (g, s)) in mesh.face_geometry().iter().zip(samples).enumerate() {
        let kappa = s.kappa().ok_or(Error::SampleMismatch { index: i })?;
        let z = s.position.z;
        let p_rel = if options.include_hydrostatic {
            s.p - constants.p_atm
        } else {
            s.p + constants.rho * constants.gravity * z - constants.p_atm
        };
        let traction = kappa - g.normal * p_rel;
        total += traction * (s.q * g.area);
    }
    Ok(ForceVector::from_vec3(total))
}

/// Wetted area `S = Σ q_f A_f`.
pub fn wetted_surface_area(mesh: &HullMesh, q: &[f64]) -> Result<f64> {
    if q.len() != mesh.face_count() {
        return Err(Error::CountMismatch {
            expected: mesh.face_count(),
            actual: q.len(),
        });
    }
    Ok(mesh
        .face_geometry()
        .iter()
        .zip(q)
        .map(|(g, q)| q * g.area)
        .sum())
}

//! Analytic flow fields.

use alloc::vec::Vec;

use super::{FlowModel, FrictionLine, OracleConfig};
use crate::fields::{FieldSample, FlowCase};
use crate::geom::Vec3;
use crate::mesh::HullMesh;
use crate::morph::DesignParams;
use crate::rng::{self, StreamRng};

/// Friction lines are evaluated no lower than this Reynolds number.
const MIN_REYNOLDS: f64 = 1e5;

/// Flat-plate friction coefficient at Reynolds number `re`.
pub fn friction_coefficient(line: FrictionLine, re: f64) -> f64 {
    let lg = libm::log10(re.max(MIN_REYNOLDS));
    match line {
        FrictionLine::Ittc1957 => 0.075 / ((lg - 2.0) * (lg - 2.0)),
        FrictionLine::Hughes => 0.066 / ((lg - 2.03) * (lg - 2.03)),
    }
}

/// Per-case constants shared by all sample points.
struct Freestream<'a> {
    model: &'a FlowModel,
    config: &'a OracleConfig,
    v: f64,
    length: f64,
    x_bow: f64,
    /// ρ V² / 2.
    q_inf: f64,
    /// Kelvin wavenumber g / V².
    wavenumber: f64,
    bow_wave: f64,
    recovery: f64,
    tau: f64,
    interface: f64,
}

impl<'a> Freestream<'a> {
    fn new(mesh: &HullMesh, params: &DesignParams, config: &'a OracleConfig) -> Self {
        let model = &config.flow;
        let c = &config.constants;
        let b = mesh.bounds();
        let length = b.max.x - b.min.x;
        let v = params.v_inf.max(0.0);
        let q_inf = c.dynamic_pressure(v);
        let froude2 = v * v / (c.gravity * length);
        let offset = params.midship - model.preferred_midship;
        let re = v * length / model.kinematic_viscosity;
        Self {
            model,
            config,
            v,
            length,
            x_bow: b.min.x,
            q_inf,
            wavenumber: if v > 0.0 { c.gravity / (v * v) } else { 0.0 },
            bow_wave: model.wave_amplitude
                * libm::exp(-model.entrance_wave_decay * (params.midship - 0.5))
                * froude2
                * length,
            recovery: model.stern_recovery * (1.0 - model.recovery_loss * offset * offset),
            tau: q_inf * friction_coefficient(model.friction_line, re),
            interface: model.interface_thickness * config.draught,
        }
    }

    /// Wave elevation ζ(x, y).
    fn elevation(&self, x: f64, y: f64) -> f64 {
        if self.bow_wave == 0.0 {
            return 0.0;
        }
        self.bow_wave
            * libm::cos(self.wavenumber * (x - self.x_bow))
            * libm::exp(-y.abs() / (0.2 * self.length))
    }

    fn water_fraction(&self, z: f64, zeta: f64) -> f64 {
        1.0 / (1.0 + libm::exp((z - zeta) / self.interface))
    }

    /// Hull-shape pressure coefficient for outward normal `n`.
    fn form_cp(&self, n: Vec3) -> f64 {
        // positive where the surface faces the oncoming flow
        let s = -n.x;
        let facing = if s > 0.0 { self.model.bow_pressure } else { self.recovery };
        facing * s * s - self.model.suction * (1.0 - s * s)
    }

    /// Dynamic pressure from the wave elevation, decaying with depth.
    fn wave_pressure(&self, z: f64, zeta: f64) -> f64 {
        let c = &self.config.constants;
        c.rho * c.gravity * zeta * libm::exp(self.wavenumber * z.min(0.0))
    }

    /// Bow-wave pressure on the hull: the entrance crest, fading aft.
    fn hull_wave_pressure(&self, p: Vec3) -> f64 {
        let xi = (p.x - self.x_bow) / self.length;
        self.wave_pressure(p.z, self.bow_wave) * libm::exp(-xi / self.model.bow_wave_extent)
    }

    fn jitter(&self, rng: &mut StreamRng) -> f64 {
        if self.config.noise > 0.0 {
            1.0 + self.config.noise * rng::standard_normal(rng)
        } else {
            1.0
        }
    }
}

fn noise_stream(params: &DesignParams, config: &OracleConfig, tag: &str) -> StreamRng {
    let mut bytes = Vec::with_capacity(40);
    for v in params.to_array() {
        bytes.extend_from_slice(&v.to_le_bytes());
    }
    rng::stream(config.seed ^ rng::digest(&bytes), tag)
}

/// One surface sample per face centroid, in face order.
pub fn surface_samples(mesh: &HullMesh, params: &DesignParams, config: &OracleConfig) -> Vec<FieldSample> {
    let fs = Freestream::new(mesh, params, config);
    let c = &config.constants;
    let mut rng = noise_stream(params, config, "surface-noise");
    mesh.face_geometry()
        .iter()
        .map(|g| {
            let p = g.centroid;
            let n = g.normal;
            let zeta = fs.elevation(p.x, p.y);
            let q = fs.water_fraction(p.z, zeta);
            let dynamic = fs.q_inf * fs.form_cp(n) + fs.hull_wave_pressure(p);
            let tangential = Vec3::X - n * n.x;
            let kappa = tangential * fs.tau;
            let (jp, jk) = (fs.jitter(&mut rng), fs.jitter(&mut rng));
            FieldSample::surface(p, c.hydrostatic(p.z) + dynamic * jp, q, kappa * jk)
        })
        .collect()
}

/// Positions of the structured volume grid around `mesh`, x-major.
pub fn volume_grid(mesh: &HullMesh, dims: [usize; 3]) -> Vec<Vec3> {
    let b = mesh.bounds();
    let length = b.max.x - b.min.x;
    let lo = Vec3::new(b.min.x - 0.25 * length, -0.25 * length, 2.0 * b.min.z);
    let hi = Vec3::new(b.max.x + 0.25 * length, 0.25 * length, b.max.z);
    let step = |i: usize, n: usize, a: f64, b: f64| a + (b - a) * i as f64 / (n - 1) as f64;
    let mut out = Vec::with_capacity(dims[0] * dims[1] * dims[2]);
    for i in 0..dims[0] {
        for j in 0..dims[1] {
            for k in 0..dims[2] {
                out.push(Vec3::new(
                    step(i, dims[0], lo.x, hi.x),
                    step(j, dims[1], lo.y, hi.y),
                    step(k, dims[2], lo.z, hi.z),
                ));
            }
        }
    }
    out
}

fn volume_samples(mesh: &HullMesh, params: &DesignParams, config: &OracleConfig) -> Vec<FieldSample> {
    let fs = Freestream::new(mesh, params, config);
    let c = &config.constants;
    let index = mesh.index();
    let decay = fs.model.near_field_decay * fs.length;
    let mut rng = noise_stream(params, config, "volume-noise");
    volume_grid(mesh, config.volume_grid)
        .into_iter()
        .map(|p| {
            let near = index.signed_distance(p);
            let f = libm::exp(-near.distance.max(0.0) / decay);
            let n = near.normal;
            let zeta = fs.elevation(p.x, p.y);
            let q = fs.water_fraction(p.z, zeta);
            let column = -c.rho * c.gravity * p.z + fs.wave_pressure(p.z, zeta);
            let dynamic = fs.q_inf * fs.form_cp(n) * f;
            let u = (Vec3::X - n * (n.x * f)) * fs.v;
            let (jp, ju) = (fs.jitter(&mut rng), fs.jitter(&mut rng));
            FieldSample::volume(p, c.p_atm + q * column + dynamic * jp, q, u * ju)
        })
        .collect()
}

/// Full synthetic flow solution for a morphed hull.
pub fn synth_case(mesh: &HullMesh, params: &DesignParams, config: &OracleConfig) -> FlowCase {
    let mut samples = surface_samples(mesh, params, config);
    samples.extend(volume_samples(mesh, params, config));
    let b = mesh.bounds();
    FlowCase {
        params: *params,
        mesh: mesh.clone(),
        v_inf: params.v_inf,
        constants: config.constants,
        l_pp: b.max.x - b.min.x,
        samples,
    }
}

//! Columnar binary FlowCase files and their CSV export.

use std::fs;
use std::path::Path;

use hullform_core::fields::{FieldSample, FlowCase, SampleKind, WaterConstants};
use hullform_core::{DesignParams, HullMesh, Vec3};

use crate::binfmt::{Reader, Writer};
use crate::error::{Error, Result};

const MAGIC: &[u8; 8] = b"HFCASE\0\0";
const VERSION: u32 = 1;

/// Column manifest. `vx, vy, vz` hold skin friction on surface rows and
/// velocity on volume rows.
pub const CASE_COLUMNS: [&str; 8] = ["x", "y", "z", "p", "q", "vx", "vy", "vz"];

pub fn encode_case(case: &FlowCase) -> Vec<u8> {
    let mut w = Writer::default();
    w.bytes(MAGIC);
    w.u32(VERSION);
    w.f64s(&case.params.to_array());
    w.f64(case.v_inf);
    w.f64s(&[case.constants.rho, case.constants.gravity, case.constants.p_atm]);
    w.f64(case.l_pp);
    w.u64(case.mesh.vertices().len() as u64);
    for v in case.mesh.vertices() {
        w.f64s(&[v.x, v.y, v.z]);
    }
    w.u64(case.mesh.face_count() as u64);
    for f in case.mesh.faces() {
        for &i in f {
            w.u32(i);
        }
    }
    w.u32(CASE_COLUMNS.len() as u32);
    for c in CASE_COLUMNS {
        w.str(c);
    }
    let n = case.samples.len();
    let surface = case.samples.iter().take_while(|s| s.is_surface()).count();
    w.u64(n as u64);
    w.u64(surface as u64);
    let column = |k: usize, s: &FieldSample| -> f64 {
        let a = match s.kind {
            SampleKind::Surface { kappa } => kappa,
            SampleKind::Volume { u } => u,
        };
        [s.position.x, s.position.y, s.position.z, s.p, s.q, a.x, a.y, a.z][k]
    };
    for k in 0..CASE_COLUMNS.len() {
        for s in &case.samples {
            w.f64(column(k, s));
        }
    }
    w.buf
}

pub fn decode_case(path: &Path, data: &[u8]) -> Result<FlowCase> {
    let mut r = Reader::new(path, data);
    r.expect(MAGIC, "flow case")?;
    let version = r.u32()?;
    if version != VERSION {
        return Err(r.error(format!("unsupported flow case version {version}")));
    }
    let params = DesignParams::from_array(r.f64s::<5>()?);
    let v_inf = r.f64()?;
    let [rho, gravity, p_atm] = r.f64s::<3>()?;
    let l_pp = r.f64()?;
    let nv = r.count(24)?;
    let mut vertices = Vec::with_capacity(nv);
    for _ in 0..nv {
        let [x, y, z] = r.f64s::<3>()?;
        vertices.push(Vec3::new(x, y, z));
    }
    let nf = r.count(12)?;
    let mut faces = Vec::with_capacity(nf);
    for _ in 0..nf {
        faces.push([r.u32()?, r.u32()?, r.u32()?]);
    }
    let mesh = HullMesh::new(vertices, faces).map_err(|source| Error::Data {
        path: path.to_path_buf(),
        source,
    })?;
    let ncol = r.u32()? as usize;
    let names = (0..ncol).map(|_| r.str()).collect::<Result<Vec<_>>>()?;
    if names != CASE_COLUMNS {
        return Err(r.error(format!("unexpected channel manifest {names:?}")));
    }
    let n = r.count(8 * ncol)?;
    let surface = r.u64()? as usize;
    if surface > n {
        return Err(r.error(format!("{surface} surface rows out of {n}")));
    }
    let mut cols = vec![vec![0.0; n]; ncol];
    for col in &mut cols {
        for v in col.iter_mut() {
            *v = r.f64()?;
        }
    }
    r.finish()?;
    let samples = (0..n)
        .map(|i| {
            let pos = Vec3::new(cols[0][i], cols[1][i], cols[2][i]);
            let a = Vec3::new(cols[5][i], cols[6][i], cols[7][i]);
            if i < surface {
                FieldSample::surface(pos, cols[3][i], cols[4][i], a)
            } else {
                FieldSample::volume(pos, cols[3][i], cols[4][i], a)
            }
        })
        .collect();
    let case = FlowCase {
        params,
        mesh,
        v_inf,
        constants: WaterConstants { rho, gravity, p_atm },
        l_pp,
        samples,
    };
    case.validate().map_err(|source| Error::Data {
        path: path.to_path_buf(),
        source,
    })?;
    Ok(case)
}

pub fn write_case(path: &Path, case: &FlowCase) -> Result<()> {
    fs::write(path, encode_case(case)).map_err(|e| Error::io(path, e))
}

pub fn read_case(path: &Path) -> Result<FlowCase> {
    let data = fs::read(path).map_err(|e| Error::io(path, e))?;
    decode_case(path, &data)
}

/// Human-readable export; absent channels are left empty.
pub fn write_case_csv(path: &Path, case: &FlowCase) -> Result<()> {
    let csv_err = |source| Error::Csv {
        path: path.to_path_buf(),
        source,
    };
    let mut w = csv::Writer::from_path(path).map_err(csv_err)?;
    w.write_record(["kind", "x", "y", "z", "p", "q", "u_x", "u_y", "u_z", "kappa_x", "kappa_y", "kappa_z"])
        .map_err(csv_err)?;
    for s in &case.samples {
        let v3 = |v: Vec3| [v.x.to_string(), v.y.to_string(), v.z.to_string()];
        let empty = || [String::new(), String::new(), String::new()];
        let (kind, u, k) = match s.kind {
            SampleKind::Surface { kappa } => ("surface", empty(), v3(kappa)),
            SampleKind::Volume { u } => ("volume", v3(u), empty()),
        };
        let mut row = vec![kind.to_string()];
        row.extend(v3(s.position));
        row.push(s.p.to_string());
        row.push(s.q.to_string());
        row.extend(u);
        row.extend(k);
        w.write_record(&row).map_err(csv_err)?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

//! OBJ and STL readers and writers.

use std::collections::HashMap;
use std::fs;
use std::io::Write;
use std::path::Path;

use hullform_core::{HullMesh, Vec3};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MeshFormat {
    Obj,
    StlAscii,
    StlBinary,
}

impl MeshFormat {
    /// Format implied by the file extension; STL is written as binary.
    pub fn from_path(path: &Path) -> Result<Self> {
        match path.extension().and_then(|e| e.to_str()).map(str::to_ascii_lowercase).as_deref() {
            Some("obj") => Ok(MeshFormat::Obj),
            Some("stl") => Ok(MeshFormat::StlBinary),
            _ => Err(Error::Config(format!("{}: unknown mesh format (expected .obj or .stl)", path.display()))),
        }
    }
}

/// Read an OBJ or STL mesh. Open or non-manifold meshes are accepted with a
/// warning.
pub fn load_mesh(path: &Path) -> Result<HullMesh> {
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    let mesh = match MeshFormat::from_path(path)? {
        MeshFormat::Obj => parse_obj(path, &bytes)?,
        _ if is_binary_stl(&bytes) => parse_stl_binary(path, &bytes)?,
        _ => parse_stl_ascii(path, &bytes)?,
    };
    let topo = mesh.topology();
    if !topo.is_watertight() {
        log::warn!(
            "{}: mesh is not watertight ({} boundary edges, {} non-manifold edges)",
            path.display(),
            topo.boundary_edges,
            topo.non_manifold_edges
        );
    }
    Ok(mesh)
}

pub fn save_mesh(path: &Path, mesh: &HullMesh, format: MeshFormat) -> Result<()> {
    let bytes = match format {
        MeshFormat::Obj => obj_string(mesh).into_bytes(),
        MeshFormat::StlAscii => stl_ascii_string(mesh).into_bytes(),
        MeshFormat::StlBinary => stl_binary_bytes(mesh),
    };
    fs::write(path, bytes).map_err(|e| Error::io(path, e))
}

fn build(path: &Path, vertices: Vec<Vec3>, faces: Vec<[u32; 3]>) -> Result<HullMesh> {
    HullMesh::new(vertices, faces).map_err(|source| Error::Data {
        path: path.to_path_buf(),
        source,
    })
}

pub fn parse_obj(path: &Path, bytes: &[u8]) -> Result<HullMesh> {
    let text = std::str::from_utf8(bytes).map_err(|e| Error::Binary {
        path: path.to_path_buf(),
        offset: e.valid_up_to() as u64,
        message: "OBJ file is not valid UTF-8".into(),
    })?;
    let mut vertices = Vec::new();
    let mut faces = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let err = |message: String| Error::Parse {
            path: path.to_path_buf(),
            line,
            message,
        };
        let content = raw.split('#').next().unwrap_or("");
        let mut tok = content.split_whitespace();
        match tok.next() {
            Some("v") => {
                let c: Vec<f64> = tok
                    .take(3)
                    .map(|t| t.parse::<f64>().map_err(|_| err(format!("bad coordinate `{t}`"))))
                    .collect::<Result<_>>()?;
                if c.len() != 3 || !c.iter().all(|v| v.is_finite()) {
                    return Err(err("vertex needs three finite coordinates".into()));
                }
                vertices.push(Vec3::new(c[0], c[1], c[2]));
            }
            Some("f") => {
                let mut idx = Vec::new();
                for t in tok {
                    let head = t.split('/').next().unwrap_or("");
                    let k: i64 = head.parse().map_err(|_| err(format!("bad face index `{t}`")))?;
                    let n = vertices.len() as i64;
                    let resolved = if k < 0 { n + k } else { k - 1 };
                    if k == 0 || resolved < 0 || resolved >= n {
                        return Err(err(format!(
                            "face {} references vertex {k} but only {n} vertices are defined",
                            faces.len()
                        )));
                    }
                    idx.push(resolved as u32);
                }
                if idx.len() < 3 {
                    return Err(err("face needs at least three vertices".into()));
                }
                for k in 1..idx.len() - 1 {
                    faces.push([idx[0], idx[k], idx[k + 1]]);
                }
            }
            _ => {}
        }
    }
    build(path, vertices, faces)
}

pub fn obj_string(mesh: &HullMesh) -> String {
    let mut s = String::new();
    for v in mesh.vertices() {
        s.push_str(&format!("v {} {} {}\n", v.x, v.y, v.z));
    }
    for f in mesh.faces() {
        s.push_str(&format!("f {} {} {}\n", f[0] + 1, f[1] + 1, f[2] + 1));
    }
    s
}

fn is_binary_stl(bytes: &[u8]) -> bool {
    if bytes.len() < 84 {
        return false;
    }
    let n = u32::from_le_bytes(bytes[80..84].try_into().unwrap()) as usize;
    bytes.len() == 84 + 50 * n
}

/// Merge bit-identical corner positions into shared vertices.
struct Welder {
    vertices: Vec<Vec3>,
    index: HashMap<[u64; 3], u32>,
}

impl Welder {
    fn new() -> Self {
        Welder {
            vertices: Vec::new(),
            index: HashMap::new(),
        }
    }

    fn add(&mut self, v: Vec3) -> u32 {
        let key = [v.x.to_bits(), v.y.to_bits(), v.z.to_bits()];
        *self.index.entry(key).or_insert_with(|| {
            self.vertices.push(v);
            (self.vertices.len() - 1) as u32
        })
    }
}

pub fn parse_stl_binary(path: &Path, bytes: &[u8]) -> Result<HullMesh> {
    if bytes.len() < 84 {
        return Err(Error::Binary {
            path: path.to_path_buf(),
            offset: bytes.len() as u64,
            message: "truncated STL header".into(),
        });
    }
    let n = u32::from_le_bytes(bytes[80..84].try_into().unwrap()) as usize;
    let expected = 84 + 50 * n;
    if bytes.len() < expected {
        return Err(Error::Binary {
            path: path.to_path_buf(),
            offset: bytes.len() as u64,
            message: format!("STL declares {n} triangles but ends early (expected {expected} bytes)"),
        });
    }
    let mut w = Welder::new();
    let mut faces = Vec::with_capacity(n);
    for t in 0..n {
        let rec = &bytes[84 + 50 * t..84 + 50 * (t + 1)];
        let f = |k: usize| f64::from(f32::from_le_bytes(rec[4 * k..4 * k + 4].try_into().unwrap()));
        let mut tri = [0u32; 3];
        for (c, slot) in tri.iter_mut().enumerate() {
            let base = 3 + 3 * c;
            let v = Vec3::new(f(base), f(base + 1), f(base + 2));
            if !(v.x.is_finite() && v.y.is_finite() && v.z.is_finite()) {
                return Err(Error::Binary {
                    path: path.to_path_buf(),
                    offset: (84 + 50 * t + 4 * base) as u64,
                    message: "non-finite vertex coordinate".into(),
                });
            }
            *slot = w.add(v);
        }
        faces.push(tri);
    }
    build(path, w.vertices, faces)
}

pub fn parse_stl_ascii(path: &Path, bytes: &[u8]) -> Result<HullMesh> {
    let text = String::from_utf8_lossy(bytes);
    let mut w = Welder::new();
    let mut faces = Vec::new();
    let mut corners: Vec<u32> = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let err = |message: String| Error::Parse {
            path: path.to_path_buf(),
            line,
            message,
        };
        let mut tok = raw.split_whitespace();
        match tok.next() {
            Some("vertex") => {
                let c: Vec<f64> = tok
                    .map(|t| t.parse::<f64>().map_err(|_| err(format!("bad coordinate `{t}`"))))
                    .collect::<Result<_>>()?;
                if c.len() != 3 || !c.iter().all(|v| v.is_finite()) {
                    return Err(err("vertex needs three finite coordinates".into()));
                }
                corners.push(w.add(Vec3::new(c[0], c[1], c[2])));
            }
            Some("endloop") => {
                if corners.len() != 3 {
                    return Err(err(format!("facet has {} vertices, expected 3", corners.len())));
                }
                faces.push([corners[0], corners[1], corners[2]]);
                corners.clear();
            }
            Some("solid" | "endsolid" | "facet" | "endfacet" | "outer") | None => {}
            Some(other) => return Err(err(format!("unexpected keyword `{other}`"))),
        }
    }
    build(path, w.vertices, faces)
}

pub fn stl_ascii_string(mesh: &HullMesh) -> String {
    let mut s = String::from("solid hull\n");
    for (f, g) in mesh.faces().iter().zip(mesh.face_geometry()) {
        let n = g.normal;
        s.push_str(&format!("  facet normal {} {} {}\n    outer loop\n", n.x, n.y, n.z));
        for &i in f {
            let v = mesh.vertices()[i as usize];
            s.push_str(&format!("      vertex {} {} {}\n", v.x, v.y, v.z));
        }
        s.push_str("    endloop\n  endfacet\n");
    }
    s.push_str("endsolid hull\n");
    s
}

pub fn stl_binary_bytes(mesh: &HullMesh) -> Vec<u8> {
    let mut out = Vec::with_capacity(84 + 50 * mesh.face_count());
    let mut header = [0u8; 80];
    header[..12].copy_from_slice(b"hullform stl");
    out.extend_from_slice(&header);
    out.extend_from_slice(&(mesh.face_count() as u32).to_le_bytes());
    for (f, g) in mesh.faces().iter().zip(mesh.face_geometry()) {
        let mut put = |v: Vec3| {
            for c in [v.x, v.y, v.z] {
                out.write_all(&(c as f32).to_le_bytes()).unwrap();
            }
        };
        put(g.normal);
        for &i in f {
            put(mesh.vertices()[i as usize]);
        }
        out.extend_from_slice(&[0, 0]);
    }
    out
}

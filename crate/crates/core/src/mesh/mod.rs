//! Indexed triangle meshes of the hull surface.
//!
//! Units are meters. Meshes live in a hull-fixed frame: x longitudinal,
//! z vertical (up positive) with the calm waterline at z = 0.

mod bvh;

use alloc::collections::BTreeMap;
use alloc::vec::Vec;

use crate::geom::{Aabb, Vec3};
use crate::{Error, Result};

pub use bvh::{DistanceQuery, MeshIndex};

/// Faces with area at or below this are rejected as degenerate.
pub const MIN_FACE_AREA: f64 = 1e-12;

/// Normal, area and centroid of one triangle.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FaceGeometry {
    pub normal: Vec3,
    pub area: f64,
    pub centroid: Vec3,
}

/// Geometry of the triangle `(a, b, c)`; `None` when degenerate.
pub fn triangle_geometry(a: Vec3, b: Vec3, c: Vec3) -> Option<FaceGeometry> {
    let cross = (b - a).cross(c - a);
    let len = cross.norm();
    let area = 0.5 * len;
    if !(area > MIN_FACE_AREA) {
        return None;
    }
    Some(FaceGeometry {
        normal: cross / len,
        area,
        centroid: (a + b + c) / 3.0,
    })
}

/// Edge-incidence summary of a mesh.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct Topology {
    /// Edges used by exactly one face.
    pub boundary_edges: usize,
    /// Edges used by more than two faces.
    pub non_manifold_edges: usize,
}

impl Topology {
    pub fn is_watertight(&self) -> bool {
        self.boundary_edges == 0 && self.non_manifold_edges == 0
    }
}

/// Triangle surface mesh with per-face normals, areas and centroids.
///
/// Immutable after construction.
#[derive(Debug, Clone, PartialEq)]
pub struct HullMesh {
    vertices: Vec<Vec3>,
    faces: Vec<[u32; 3]>,
    geometry: Vec<FaceGeometry>,
}

impl HullMesh {
    /// Builds a mesh, rejecting out-of-range indices and degenerate faces.
    pub fn new(vertices: Vec<Vec3>, faces: Vec<[u32; 3]>) -> Result<Self> {
        if faces.is_empty() {
            return Err(Error::EmptyMesh);
        }
        let n = vertices.len();
        for (fi, f) in faces.iter().enumerate() {
            if let Some(&bad) = f.iter().find(|&&i| i as usize >= n) {
                return Err(Error::IndexOutOfRange {
                    face: fi,
                    index: bad as usize,
                    vertex_count: n,
                });
            }
        }
        let mut geometry = Vec::with_capacity(faces.len());
        let mut degenerate = Vec::new();
        for (fi, f) in faces.iter().enumerate() {
            let [a, b, c] = f.map(|i| vertices[i as usize]);
            match triangle_geometry(a, b, c) {
                Some(g) => geometry.push(g),
                None => degenerate.push(fi),
            }
        }
        if !degenerate.is_empty() {
            return Err(Error::DegenerateFaces(degenerate));
        }
        Ok(Self {
            vertices,
            faces,
            geometry,
        })
    }

    pub fn vertices(&self) -> &[Vec3] {
        &self.vertices
    }

    pub fn faces(&self) -> &[[u32; 3]] {
        &self.faces
    }

    pub fn face_count(&self) -> usize {
        self.faces.len()
    }

    /// Per-face normal, area and centroid, in face order.
    pub fn face_geometry(&self) -> &[FaceGeometry] {
        &self.geometry
    }

    pub fn face_vertices(&self, face: usize) -> [Vec3; 3] {
        self.faces[face].map(|i| self.vertices[i as usize])
    }

    pub fn total_area(&self) -> f64 {
        self.geometry.iter().map(|g| g.area).sum()
    }

    pub fn bounds(&self) -> Aabb {
        let mut b = Aabb::EMPTY;
        for &v in &self.vertices {
            b.grow(v);
        }
        b
    }

    pub fn topology(&self) -> Topology {
        let mut edges: BTreeMap<(u32, u32), u32> = BTreeMap::new();
        for f in &self.faces {
            for k in 0..3 {
                let (a, b) = (f[k], f[(k + 1) % 3]);
                *edges.entry((a.min(b), a.max(b))).or_insert(0) += 1;
            }
        }
        let mut t = Topology::default();
        for &count in edges.values() {
            match count {
                1 => t.boundary_edges += 1,
                2 => {}
                _ => t.non_manifold_edges += 1,
            }
        }
        t
    }

    /// Divergence-theorem volume `Σ (c·n) A / 3`; no closedness check.
    pub fn signed_volume(&self) -> f64 {
        self.geometry
            .iter()
            .map(|g| g.centroid.dot(g.normal) * g.area)
            .sum::<f64>()
            / 3.0
    }

    /// Enclosed volume of a closed mesh. Positive for outward orientation.
    pub fn enclosed_volume(&self) -> Result<f64> {
        let topo = self.topology();
        if topo.boundary_edges > 0 {
            return Err(Error::OpenMesh {
                boundary_edges: topo.boundary_edges,
            });
        }
        Ok(self.signed_volume())
    }

    /// Same topology with every vertex mapped through `f`.
    pub fn map_vertices(&self, f: impl Fn(Vec3) -> Vec3) -> Result<Self> {
        Self::new(
            self.vertices.iter().map(|&v| f(v)).collect(),
            self.faces.clone(),
        )
    }

    pub fn translated(&self, offset: Vec3) -> Result<Self> {
        self.map_vertices(|v| v + offset)
    }

    pub fn scaled(&self, sx: f64, sy: f64, sz: f64) -> Result<Self> {
        self.map_vertices(|v| Vec3::new(v.x * sx, v.y * sy, v.z * sz))
    }

    /// Reflection across the x–z plane, with winding flipped to stay outward.
    pub fn mirrored_y(&self) -> Result<Self> {
        Self::new(
            self.vertices
                .iter()
                .map(|v| Vec3::new(v.x, -v.y, v.z))
                .collect(),
            self.faces.iter().map(|f| [f[0], f[2], f[1]]).collect(),
        )
    }

    /// Midpoint subdivision: every triangle becomes four, edge lengths halve.
    pub fn subdivided(&self) -> Result<Self> {
        let mut vertices = self.vertices.clone();
        let mut midpoints: BTreeMap<(u32, u32), u32> = BTreeMap::new();
        let mut mid = |a: u32, b: u32, vertices: &mut Vec<Vec3>| -> u32 {
            let key = (a.min(b), a.max(b));
            *midpoints.entry(key).or_insert_with(|| {
                let p = (vertices[a as usize] + vertices[b as usize]) * 0.5;
                vertices.push(p);
                (vertices.len() - 1) as u32
            })
        };
        let mut faces = Vec::with_capacity(self.faces.len() * 4);
        for &[a, b, c] in &self.faces {
            let ab = mid(a, b, &mut vertices);
            let bc = mid(b, c, &mut vertices);
            let ca = mid(c, a, &mut vertices);
            faces.extend_from_slice(&[[a, ab, ca], [ab, b, bc], [ca, bc, c], [ab, bc, ca]]);
        }
        Self::new(vertices, faces)
    }

    /// Order-independent fingerprint of the face list.
    pub fn topology_hash(&self) -> u64 {
        let mut bytes = Vec::with_capacity(self.faces.len() * 12);
        for f in &self.faces {
            for i in f {
                bytes.extend_from_slice(&i.to_le_bytes());
            }
        }
        crate::rng::digest(&bytes)
    }

    /// Spatial index for distance queries.
    pub fn index(&self) -> MeshIndex<'_> {
        MeshIndex::new(self)
    }
}

/// Axis-aligned unit cube `[0,1]^3`, 12 outward-facing triangles.
pub fn unit_cube() -> HullMesh {
    let v: Vec<Vec3> = (0..8)
        .map(|i| Vec3::new((i & 1) as f64, ((i >> 1) & 1) as f64, ((i >> 2) & 1) as f64))
        .collect();
    let faces = alloc::vec![
        [0, 2, 1], [1, 2, 3], // z = 0
        [4, 5, 6], [5, 7, 6], // z = 1
        [0, 1, 4], [1, 5, 4], // y = 0
        [2, 6, 3], [3, 6, 7], // y = 1
        [0, 4, 2], [2, 4, 6], // x = 0
        [1, 3, 5], [3, 7, 5], // x = 1
    ];
    HullMesh::new(v, faces).expect("unit cube is valid")
}

/// Regular tetrahedron-corner solid `(0,0,0),(1,0,0),(0,1,0),(0,0,1)`.
pub fn unit_tetrahedron() -> HullMesh {
    let v = alloc::vec![
        Vec3::new(0.0, 0.0, 0.0),
        Vec3::new(1.0, 0.0, 0.0),
        Vec3::new(0.0, 1.0, 0.0),
        Vec3::new(0.0, 0.0, 1.0),
    ];
    HullMesh::new(v, alloc::vec![[0, 2, 1], [0, 1, 3], [0, 3, 2], [1, 2, 3]])
        .expect("tetrahedron is valid")
}

/// Icosphere of radius `r` after `levels` subdivisions (20·4^levels faces).
pub fn icosphere(r: f64, levels: u32) -> HullMesh {
    let t = (1.0 + libm::sqrt(5.0)) / 2.0;
    let raw = [
        (-1.0, t, 0.0), (1.0, t, 0.0), (-1.0, -t, 0.0), (1.0, -t, 0.0),
        (0.0, -1.0, t), (0.0, 1.0, t), (0.0, -1.0, -t), (0.0, 1.0, -t),
        (t, 0.0, -1.0), (t, 0.0, 1.0), (-t, 0.0, -1.0), (-t, 0.0, 1.0),
    ];
    let project = |v: Vec3| v * (r / v.norm());
    let vertices: Vec<Vec3> = raw.iter().map(|&(x, y, z)| project(Vec3::new(x, y, z))).collect();
    let faces: Vec<[u32; 3]> = alloc::vec![
        [0, 11, 5], [0, 5, 1], [0, 1, 7], [0, 7, 10], [0, 10, 11],
        [1, 5, 9], [5, 11, 4], [11, 10, 2], [10, 7, 6], [7, 1, 8],
        [3, 9, 4], [3, 4, 2], [3, 2, 6], [3, 6, 8], [3, 8, 9],
        [4, 9, 5], [2, 4, 11], [6, 2, 10], [8, 6, 7], [9, 8, 1],
    ];
    let mut mesh = HullMesh::new(vertices, faces).expect("icosahedron is valid");
    for _ in 0..levels {
        mesh = mesh
            .subdivided()
            .and_then(|m| m.map_vertices(project))
            .expect("subdivision keeps faces valid");
    }
    mesh
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    #[test]
    fn tetrahedron_volume_is_one_sixth() {
        let m = unit_tetrahedron();
        assert_eq!(m.face_count(), 4);
        assert!((m.enclosed_volume().unwrap() - 1.0 / 6.0).abs() < 1e-15);
    }

    #[test]
    fn right_triangle_geometry() {
        let m = HullMesh::new(
            vec![Vec3::new(0., 0., 0.), Vec3::new(1., 0., 0.), Vec3::new(0., 1., 0.)],
            vec![[0, 1, 2]],
        )
        .unwrap();
        let g = m.face_geometry()[0];
        assert_eq!(g.normal, Vec3::new(0.0, 0.0, 1.0));
        assert_eq!(g.area, 0.5);
        assert!((g.centroid - Vec3::new(1. / 3., 1. / 3., 0.)).norm() < 1e-15);

        let flipped = HullMesh::new(m.vertices().to_vec(), vec![[0, 2, 1]]).unwrap();
        assert_eq!(flipped.face_geometry()[0].normal, Vec3::new(0.0, 0.0, -1.0));
    }

    #[test]
    fn cube_area_and_volume() {
        let c = unit_cube();
        assert!(c.topology().is_watertight());
        assert!((c.total_area() - 6.0).abs() < 1e-12);
        assert!((c.enclosed_volume().unwrap() - 1.0).abs() < 1e-12);
        let s = c.scaled(2.0, 3.0, 4.0).unwrap();
        assert!((s.enclosed_volume().unwrap() - 24.0).abs() < 1e-9);
    }

    #[test]
    fn normals_are_unit_length() {
        for g in icosphere(1.0, 2).face_geometry() {
            assert!((g.normal.norm() - 1.0).abs() < 1e-9);
        }
    }

    #[test]
    fn out_of_range_index_names_face() {
        let err = HullMesh::new(
            vec![Vec3::ZERO, Vec3::X, Vec3::new(0., 1., 0.), Vec3::new(0., 0., 1.)],
            vec![[0, 1, 2], [0, 1, 98]],
        )
        .unwrap_err();
        assert_eq!(
            err,
            Error::IndexOutOfRange {
                face: 1,
                index: 98,
                vertex_count: 4
            }
        );
    }

    #[test]
    fn degenerate_faces_are_listed() {
        let err = HullMesh::new(
            vec![Vec3::ZERO, Vec3::X, Vec3::new(2., 0., 0.), Vec3::new(0., 1., 0.)],
            vec![[0, 1, 3], [0, 1, 2], [1, 2, 0]],
        )
        .unwrap_err();
        assert_eq!(err, Error::DegenerateFaces(vec![1, 2]));
    }

    #[test]
    fn open_mesh_volume_reports_boundary() {
        let c = unit_cube();
        let open = HullMesh::new(c.vertices().to_vec(), c.faces()[1..].to_vec()).unwrap();
        assert_eq!(
            open.enclosed_volume(),
            Err(Error::OpenMesh { boundary_edges: 3 })
        );
    }

    #[test]
    fn icosphere_volume_converges() {
        let exact = 4.0 / 3.0 * core::f64::consts::PI;
        let mut prev = f64::INFINITY;
        for level in 1..=4 {
            let err = (icosphere(1.0, level).enclosed_volume().unwrap() - exact).abs() / exact;
            assert!(err < prev);
            prev = err;
        }
        let fine = icosphere(1.0, 4);
        assert_eq!(fine.face_count(), 5120);
        assert!(prev < 0.005);
    }

    #[test]
    fn subdivision_preserves_area_and_volume() {
        let c = unit_cube();
        let s = c.subdivided().unwrap();
        assert_eq!(s.face_count(), 48);
        assert!(s.topology().is_watertight());
        assert!((s.total_area() - 6.0).abs() < 1e-12);
        assert!((s.enclosed_volume().unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn mirror_keeps_volume_positive() {
        let m = unit_tetrahedron().mirrored_y().unwrap();
        assert!((m.enclosed_volume().unwrap() - 1.0 / 6.0).abs() < 1e-15);
    }
}

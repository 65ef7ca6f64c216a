//! Procedural container-ship-like hull.

use alloc::vec::Vec;

use super::OracleConfig;
use crate::geom::Vec3;
use crate::mesh::HullMesh;

/// Signed power `sgn(v)·|v|^e`.
fn spow(v: f64, e: f64) -> f64 {
    libm::copysign(libm::pow(v.abs(), e), v)
}

struct Station {
    half_beam: f64,
    draught: f64,
    topside: f64,
}

fn station(config: &OracleConfig, xi: f64) -> Station {
    // u in [-1, 1]: -1 at the bow, +1 at the stern
    let u = 2.0 * xi - 1.0;
    let plan = if u < 0.0 { config.hull.entrance_exponent } else { config.hull.run_exponent };
    let taper = |e: f64| (1.0 - libm::pow(u.abs(), e)).max(0.0);
    Station {
        half_beam: 0.5 * config.beam * libm::sqrt(taper(plan)),
        draught: config.draught * libm::pow(taper(plan + 4.0), 0.25),
        topside: config.draught * libm::pow(taper(8.0), 0.25),
    }
}

/// Watertight hull with the bow tip at `x = 0`, the stern tip at `x = L0`,
/// keel at `z = −T0`, deck at `z = +T0`, and an exactly mirror-symmetric
/// vertex set about `y = 0`.
pub fn make_baseline_hull(config: &OracleConfig) -> HullMesh {
    let n = config.hull.stations.max(4);
    let m = (config.hull.ring.max(8) / 2) * 2;
    let e = config.hull.section_exponent;
    let mut vertices = Vec::with_capacity((n - 1) * m + 2);
    vertices.push(Vec3::new(0.0, 0.0, 0.0));
    for i in 1..n {
        let xi = 0.5 * (1.0 - libm::cos(core::f64::consts::PI * i as f64 / n as f64));
        let s = station(config, xi);
        let x = xi * config.length;
        let ring_start = vertices.len();
        // j = 0 on deck centerline, j = m/2 on the keel; starboard half first
        for j in 0..=m / 2 {
            let theta = core::f64::consts::TAU * j as f64 / m as f64;
            let (sin, cos) = if j == 0 {
                (0.0, 1.0)
            } else if j == m / 2 {
                (0.0, -1.0)
            } else if 4 * j == m {
                (1.0, 0.0)
            } else {
                (libm::sin(theta), libm::cos(theta))
            };
            let y = s.half_beam * spow(sin, e);
            let z = if cos >= 0.0 { s.topside } else { s.draught } * spow(cos, e);
            vertices.push(Vec3::new(x, y, z));
        }
        for j in (m / 2 + 1)..m {
            let mirror = vertices[ring_start + (m - j)];
            vertices.push(Vec3::new(mirror.x, -mirror.y, mirror.z));
        }
    }
    let stern = vertices.len() as u32;
    vertices.push(Vec3::new(config.length, 0.0, 0.0));

    let ring = |i: usize, j: usize| -> u32 { (1 + (i - 1) * m + (j % m)) as u32 };
    let mut faces = Vec::with_capacity(2 * n * m);
    for j in 0..m {
        faces.push([0, ring(1, j + 1), ring(1, j)]);
    }
    for i in 1..n - 1 {
        for j in 0..m {
            let (a, b, c, d) = (ring(i, j), ring(i, j + 1), ring(i + 1, j + 1), ring(i + 1, j));
            // port quads use the mirrored diagonal
            if 2 * j < m {
                faces.push([a, b, c]);
                faces.push([a, c, d]);
            } else {
                faces.push([a, b, d]);
                faces.push([b, c, d]);
            }
        }
    }
    for j in 0..m {
        faces.push([ring(n - 1, j), ring(n - 1, j + 1), stern]);
    }
    let mesh = HullMesh::new(vertices, faces).expect("procedural hull has no degenerate faces");
    if mesh.signed_volume() < 0.0 {
        let flipped = mesh.faces().iter().map(|f| [f[0], f[2], f[1]]).collect();
        HullMesh::new(mesh.vertices().to_vec(), flipped).expect("flipping keeps faces valid")
    } else {
        mesh
    }
}

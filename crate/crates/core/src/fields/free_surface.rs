use alloc::format;
use alloc::vec::Vec;

use super::FieldSample;
use crate::{Error, Result};

/// Free-surface elevation in one grid column.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FreeSurfacePoint {
    pub x: f64,
    pub y: f64,
    /// Height where the water fraction crosses the level, m.
    pub elevation: f64,
    /// `elevation / L_pp`.
    pub elevation_normalized: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FreeSurface {
    pub points: Vec<FreeSurfacePoint>,
    /// Columns without a crossing (fully wet or fully dry).
    pub excluded_columns: usize,
    /// Columns whose water fraction is not monotone in z.
    pub non_monotone_columns: usize,
}

fn sorted_unique(mut v: Vec<f64>) -> Vec<f64> {
    v.sort_by(f64::total_cmp);
    v.dedup();
    v
}

fn locate(axis: &[f64], v: f64) -> Option<usize> {
    axis.binary_search_by(|a| a.total_cmp(&v)).ok()
}

/// Iso-surface of the water fraction on a structured x–y–z grid.
///
/// Each (x, y) column is scanned from the top down and the first crossing of
/// `level` is located by linear interpolation, so non-monotone columns report
/// their highest crossing.
pub fn extract_free_surface(samples: &[FieldSample], level: f64, l_pp: f64) -> Result<FreeSurface> {
    let xs = sorted_unique(samples.iter().map(|s| s.position.x).collect());
    let ys = sorted_unique(samples.iter().map(|s| s.position.y).collect());
    let zs = sorted_unique(samples.iter().map(|s| s.position.z).collect());
    let (nx, ny, nz) = (xs.len(), ys.len(), zs.len());
    if samples.len() != nx * ny * nz {
        return Err(Error::IncompleteGrid(format!(
            "{} samples for a {nx}x{ny}x{nz} grid",
            samples.len()
        )));
    }
    if nz < 2 {
        return Err(Error::IncompleteGrid("need at least two z levels".into()));
    }
    let mut q = alloc::vec![f64::NAN; samples.len()];
    for s in samples {
        let (i, j, k) = (
            locate(&xs, s.position.x).unwrap(),
            locate(&ys, s.position.y).unwrap(),
            locate(&zs, s.position.z).unwrap(),
        );
        let slot = &mut q[(i * ny + j) * nz + k];
        if !slot.is_nan() {
            return Err(Error::IncompleteGrid(format!(
                "duplicate sample at ({}, {}, {})",
                s.position.x, s.position.y, s.position.z
            )));
        }
        *slot = s.q;
    }

    let mut out = FreeSurface {
        points: Vec::new(),
        excluded_columns: 0,
        non_monotone_columns: 0,
    };
    for i in 0..nx {
        for j in 0..ny {
            let col = &q[(i * ny + j) * nz..(i * ny + j + 1) * nz];
            let increasing = col.windows(2).all(|w| w[1] >= w[0]);
            let decreasing = col.windows(2).all(|w| w[1] <= w[0]);
            if !increasing && !decreasing {
                out.non_monotone_columns += 1;
            }
            let mut found = None;
            for k in (0..nz - 1).rev() {
                let (lo, hi) = (col[k] - level, col[k + 1] - level);
                if hi == 0.0 {
                    found = Some(zs[k + 1]);
                    break;
                }
                if lo == 0.0 {
                    found = Some(zs[k]);
                    break;
                }
                if (lo < 0.0) != (hi < 0.0) {
                    let t = lo / (lo - hi);
                    found = Some(zs[k] + t * (zs[k + 1] - zs[k]));
                    break;
                }
            }
            match found {
                Some(z) => out.points.push(FreeSurfacePoint {
                    x: xs[i],
                    y: ys[j],
                    elevation: z,
                    elevation_normalized: z / l_pp,
                }),
                None => out.excluded_columns += 1,
            }
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geom::Vec3;

    fn grid(f: impl Fn(f64, f64, f64) -> f64, n: usize, dz: f64, z0: f64) -> Vec<FieldSample> {
        let mut v = Vec::new();
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    let (x, y, z) = (i as f64 * 0.25, j as f64 * 0.25 - 1.0, z0 + k as f64 * dz);
                    v.push(FieldSample::volume(Vec3::new(x, y, z), 0.0, f(x, y, z), Vec3::ZERO));
                }
            }
        }
        v
    }

    #[test]
    fn step_gives_flat_surface() {
        let s = grid(|_, _, z| if z < 0.0 { 1.0 } else { 0.0 }, 8, 0.2, -0.7);
        let fs = extract_free_surface(&s, 0.5, 2.0).unwrap();
        assert_eq!(fs.points.len(), 64);
        for p in &fs.points {
            assert!(p.elevation.abs() < 1e-12, "{p:?}");
        }
    }

    #[test]
    fn linear_ramp_is_exact() {
        let s = grid(|_, _, z| (0.5 - (z - 0.3)).clamp(0.0, 1.0), 9, 0.125, -0.5);
        let fs = extract_free_surface(&s, 0.5, 2.0).unwrap();
        assert_eq!(fs.points.len(), 81);
        for p in &fs.points {
            assert!((p.elevation - 0.3).abs() < 1e-12);
            assert!((p.elevation_normalized - 0.15).abs() < 1e-12);
        }
    }

    #[test]
    fn smooth_interface_within_half_cell() {
        let zeta = |x: f64, y: f64| 0.1 * libm::cos(2.0 * x) * libm::exp(-y.abs());
        let eps = 0.02;
        let dz = 0.05;
        let s = grid(|x, y, z| 1.0 / (1.0 + libm::exp((z - zeta(x, y)) / eps)), 12, dz, -0.3);
        let fs = extract_free_surface(&s, 0.5, 1.0).unwrap();
        assert_eq!(fs.points.len(), 144);
        for p in &fs.points {
            assert!((p.elevation - zeta(p.x, p.y)).abs() <= 0.5 * dz);
        }
    }

    #[test]
    fn dry_columns_are_excluded() {
        let s = grid(|x, _, z| if x > 1.0 || z < 0.0 { 1.0 } else { 0.0 }, 8, 0.2, -0.7);
        let fs = extract_free_surface(&s, 0.5, 1.0).unwrap();
        assert_eq!(fs.excluded_columns, 3 * 8);
        assert_eq!(fs.points.len(), 5 * 8);
    }

    #[test]
    fn non_monotone_uses_highest_crossing() {
        let s = grid(|_, _, z| if z < -0.4 || (z > 0.0 && z < 0.3) { 1.0 } else { 0.0 }, 8, 0.2, -0.7);
        let fs = extract_free_surface(&s, 0.5, 1.0).unwrap();
        assert_eq!(fs.non_monotone_columns, 64);
        // nodes at z = 0.1 (wet) and 0.3 (dry): crossing midway
        assert!((fs.points[0].elevation - 0.2).abs() < 1e-12);
    }

    #[test]
    fn incomplete_grid_is_rejected() {
        let mut s = grid(|_, _, _| 1.0, 8, 0.2, -0.7);
        s.pop();
        assert!(matches!(extract_free_surface(&s, 0.5, 1.0), Err(Error::IncompleteGrid(_))));
    }
}

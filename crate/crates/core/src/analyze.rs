//! Correlation-based sensitivity analysis and SVG figures.

use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;
use core::fmt::Write;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::morph::Parameter;
use crate::optimize::EvaluationRecord;

/// Sample Pearson correlation.
pub fn pearson(xs: &[f64], ys: &[f64]) -> Result<f64> {
    if xs.len() != ys.len() {
        return Err(Error::DimensionMismatch {
            expected: xs.len(),
            actual: ys.len(),
        });
    }
    if xs.len() < 2 {
        return Err(Error::Domain("correlation needs at least two points".into()));
    }
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (x, y) in xs.iter().zip(ys) {
        let (dx, dy) = (x - mx, y - my);
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if sxx == 0.0 || syy == 0.0 {
        return Err(Error::ZeroVariance);
    }
    Ok((sxy / libm::sqrt(sxx * syy)).clamp(-1.0, 1.0))
}

/// Least-squares polynomial coefficients, lowest power first.
pub fn polyfit(xs: &[f64], ys: &[f64], degree: usize) -> Result<Vec<f64>> {
    if !(1..=2).contains(&degree) {
        return Err(Error::Unsupported(alloc::format!("polynomial degree {degree}")));
    }
    if xs.len() != ys.len() {
        return Err(Error::DimensionMismatch {
            expected: xs.len(),
            actual: ys.len(),
        });
    }
    if xs.len() <= degree {
        return Err(Error::RankDeficient);
    }
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let scale = xs.iter().map(|x| libm::fabs(x - mean)).fold(0.0, f64::max);
    if !(scale > 0.0) {
        return Err(Error::RankDeficient);
    }
    let k = degree + 1;
    // normal equations in t = (x - mean) / scale
    let mut a = vec![vec![0.0; k + 1]; k];
    for (x, y) in xs.iter().zip(ys) {
        let t = (x - mean) / scale;
        let mut pw = [1.0; 5];
        for i in 1..5 {
            pw[i] = pw[i - 1] * t;
        }
        for r in 0..k {
            for c in 0..k {
                a[r][c] += pw[r + c];
            }
            a[r][k] += pw[r] * y;
        }
    }
    let coeffs = solve(a)?;
    // back to powers of x
    let (m, s) = (mean, scale);
    Ok(match degree {
        1 => vec![coeffs[0] - coeffs[1] * m / s, coeffs[1] / s],
        _ => vec![
            coeffs[0] - coeffs[1] * m / s + coeffs[2] * m * m / (s * s),
            coeffs[1] / s - 2.0 * coeffs[2] * m / (s * s),
            coeffs[2] / (s * s),
        ],
    })
}

/// Gaussian elimination with partial pivoting on an augmented matrix.
fn solve(mut a: Vec<Vec<f64>>) -> Result<Vec<f64>> {
    let k = a.len();
    let norm = a.iter().flat_map(|r| r[..k].iter()).fold(0.0f64, |m, v| m.max(libm::fabs(*v)));
    for col in 0..k {
        let pivot = (col..k)
            .max_by(|&i, &j| libm::fabs(a[i][col]).total_cmp(&libm::fabs(a[j][col])))
            .unwrap();
        if libm::fabs(a[pivot][col]) <= 1e-12 * norm {
            return Err(Error::RankDeficient);
        }
        a.swap(col, pivot);
        for r in col + 1..k {
            let f = a[r][col] / a[col][col];
            for c in col..=k {
                a[r][c] -= f * a[col][c];
            }
        }
    }
    let mut x = vec![0.0; k];
    for r in (0..k).rev() {
        let s: f64 = (r + 1..k).map(|c| a[r][c] * x[c]).sum();
        x[r] = (a[r][k] - s) / a[r][r];
    }
    Ok(x)
}

pub fn polyval(coeffs: &[f64], x: f64) -> f64 {
    coeffs.iter().rev().fold(0.0, |acc, c| acc * x + c)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PanelFit {
    pub parameter: String,
    pub linear: Vec<f64>,
    pub quadratic: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SensitivityReport {
    /// Varied parameters followed by the objective.
    pub variables: Vec<String>,
    /// Pairwise Pearson r over `variables`.
    pub correlation: Vec<Vec<f64>>,
    /// Parameter-vs-objective trend fits, in `variables` order.
    pub fits: Vec<PanelFit>,
    /// Parameters sorted by descending |r| with the objective.
    pub ranking: Vec<(String, f64)>,
    /// Id of the feasible record with the lowest objective.
    pub min_record_id: u64,
    /// Parameters left out because they never varied.
    pub excluded: Vec<String>,
}

impl SensitivityReport {
    pub fn objective_name(&self) -> &str {
        &self.variables[self.variables.len() - 1]
    }
}

/// Columns of the feasible records: the five parameters and one objective.
fn columns(records: &[&EvaluationRecord], objective: usize) -> Result<(Vec<Vec<f64>>, Vec<f64>)> {
    let params = (0..5).map(|k| records.iter().map(|r| r.params.to_array()[k]).collect()).collect();
    let obj = records
        .iter()
        .map(|r| {
            r.objectives.get(objective).copied().ok_or(Error::DimensionMismatch {
                expected: objective + 1,
                actual: r.objectives.len(),
            })
        })
        .collect::<Result<Vec<f64>>>()?;
    Ok((params, obj))
}

/// Correlation matrix, trend fits and |r| ranking over the feasible records.
pub fn sensitivity_report(records: &[EvaluationRecord], objective: usize, objective_name: &str) -> Result<SensitivityReport> {
    let feasible: Vec<&EvaluationRecord> = records.iter().filter(|r| r.feasible).collect();
    if feasible.len() < 3 {
        return Err(Error::Domain("sensitivity analysis needs at least three feasible records".into()));
    }
    let (params, obj) = columns(&feasible, objective)?;
    let mut names = Vec::new();
    let mut cols = Vec::new();
    let mut excluded = Vec::new();
    for (p, col) in Parameter::ALL.iter().zip(params) {
        if col.iter().all(|v| *v == col[0]) {
            excluded.push(p.name().to_string());
        } else {
            names.push(p.name().to_string());
            cols.push(col);
        }
    }
    let n_params = cols.len();
    names.push(objective_name.to_string());
    cols.push(obj);
    let m = cols.len();
    let mut correlation = vec![vec![1.0; m]; m];
    for i in 0..m {
        for j in i + 1..m {
            let r = pearson(&cols[i], &cols[j])?;
            correlation[i][j] = r;
            correlation[j][i] = r;
        }
    }
    let mut fits = Vec::with_capacity(n_params);
    for (name, col) in names.iter().zip(&cols).take(n_params) {
        fits.push(PanelFit {
            parameter: name.clone(),
            linear: polyfit(col, &cols[m - 1], 1)?,
            quadratic: polyfit(col, &cols[m - 1], 2).unwrap_or_default(),
        });
    }
    let mut ranking: Vec<(String, f64)> = (0..n_params).map(|i| (names[i].clone(), correlation[i][m - 1])).collect();
    ranking.sort_by(|a, b| libm::fabs(b.1).total_cmp(&libm::fabs(a.1)));
    let min_record_id = feasible
        .iter()
        .zip(&cols[m - 1])
        .fold((f64::INFINITY, 0u64), |best, (r, &v)| if v < best.0 { (v, r.id) } else { best })
        .1;
    Ok(SensitivityReport {
        variables: names,
        correlation,
        fits,
        ranking,
        min_record_id,
        excluded,
    })
}

const LIGHTEST: [f64; 3] = [250.0, 250.0, 250.0];
const DARK_RED: [f64; 3] = [165.0, 15.0, 21.0];
const DARK_GREEN: [f64; 3] = [0.0, 109.0, 44.0];

/// Panel background: red for positive, green for negative correlation,
/// darker with larger |r|.
pub fn correlation_color(r: f64) -> String {
    let target = if r >= 0.0 { DARK_RED } else { DARK_GREEN };
    let t = libm::fabs(r).min(1.0);
    let c: Vec<u8> = (0..3).map(|k| libm::round(LIGHTEST[k] + (target[k] - LIGHTEST[k]) * t) as u8).collect();
    alloc::format!("#{:02x}{:02x}{:02x}", c[0], c[1], c[2])
}

struct Axis {
    lo: f64,
    hi: f64,
}

impl Axis {
    fn of(values: &[f64]) -> Axis {
        let lo = values.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let pad = if hi > lo { 0.05 * (hi - lo) } else { 0.5 };
        Axis { lo: lo - pad, hi: hi + pad }
    }

    fn map(&self, v: f64, a: f64, b: f64) -> f64 {
        a + (v - self.lo) / (self.hi - self.lo) * (b - a)
    }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

const PANEL: f64 = 120.0;
const GAP: f64 = 8.0;
const MARGIN: f64 = 60.0;

/// Scatter-matrix figure of a sensitivity report.
pub fn scatter_matrix_svg(report: &SensitivityReport, records: &[EvaluationRecord], objective: usize) -> Result<String> {
    let feasible: Vec<&EvaluationRecord> = records.iter().filter(|r| r.feasible).collect();
    let (params, obj) = columns(&feasible, objective)?;
    let cols: Vec<Vec<f64>> = report
        .variables
        .iter()
        .map(|name| match Parameter::from_name(name) {
            Some(p) => params[p.index()].clone(),
            None => obj.clone(),
        })
        .collect();
    let min_idx = feasible.iter().position(|r| r.id == report.min_record_id).unwrap_or(0);
    let m = cols.len();
    let size = 2.0 * MARGIN + m as f64 * PANEL + (m as f64 - 1.0) * GAP;
    let axes: Vec<Axis> = cols.iter().map(|c| Axis::of(c)).collect();
    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{size:.0}" height="{size:.0}" viewBox="0 0 {size:.0} {size:.0}" font-family="sans-serif" font-size="10">"#
    );
    let _ = writeln!(s, r#"<rect width="100%" height="100%" fill="white"/>"#);
    for i in 0..m {
        for j in 0..m {
            let x0 = MARGIN + j as f64 * (PANEL + GAP);
            let y0 = MARGIN + i as f64 * (PANEL + GAP);
            let r = report.correlation[i][j];
            let fill = if i == j { String::from("#ffffff") } else { correlation_color(r) };
            let _ = writeln!(
                s,
                r##"<g class="panel" data-row="{i}" data-col="{j}" data-r="{r:.4}"><rect x="{x0:.2}" y="{y0:.2}" width="{PANEL:.0}" height="{PANEL:.0}" fill="{fill}" stroke="#444"/>"##
            );
            if i == j {
                let _ = writeln!(
                    s,
                    r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">{}</text>"#,
                    x0 + PANEL / 2.0,
                    y0 + PANEL / 2.0,
                    escape(&report.variables[i])
                );
            } else {
                let _ = writeln!(s, r#"<clipPath id="c{i}_{j}"><rect x="{x0:.2}" y="{y0:.2}" width="{PANEL:.0}" height="{PANEL:.0}"/></clipPath>"#);
                let _ = writeln!(s, r#"<g clip-path="url(#c{i}_{j})">"#);
                let (xa, ya) = (&axes[j], &axes[i]);
                let px = |v: f64| xa.map(v, x0, x0 + PANEL);
                let py = |v: f64| ya.map(v, y0 + PANEL, y0);
                for (k, (x, y)) in cols[j].iter().zip(&cols[i]).enumerate() {
                    if k != min_idx {
                        let _ = writeln!(s, r##"<circle cx="{:.2}" cy="{:.2}" r="1.6" fill="#333"/>"##, px(*x), py(*y));
                    }
                }
                for (deg, color) in [(1, "blue"), (2, "red")] {
                    if let Ok(c) = polyfit(&cols[j], &cols[i], deg) {
                        let pts: Vec<String> = (0..=40)
                            .map(|t| {
                                let x = xa.lo + (xa.hi - xa.lo) * t as f64 / 40.0;
                                alloc::format!("{:.2},{:.2}", px(x), py(polyval(&c, x)))
                            })
                            .collect();
                        let _ = writeln!(
                            s,
                            r#"<polyline class="fit{deg}" points="{}" fill="none" stroke="{color}" stroke-width="1.2"/>"#,
                            pts.join(" ")
                        );
                    }
                }
                let _ = writeln!(
                    s,
                    r#"<circle class="minimum" cx="{:.2}" cy="{:.2}" r="3.5" fill="blue"/>"#,
                    px(cols[j][min_idx]),
                    py(cols[i][min_idx])
                );
                let _ = writeln!(s, "</g>");
            }
            let _ = writeln!(s, "</g>");
        }
    }
    for (k, name) in report.variables.iter().enumerate() {
        let c = MARGIN + k as f64 * (PANEL + GAP) + PANEL / 2.0;
        let _ = writeln!(s, r#"<text x="{c:.2}" y="{:.2}" text-anchor="middle">{}</text>"#, MARGIN - 10.0, escape(name));
        let _ = writeln!(
            s,
            r#"<text x="{:.2}" y="{c:.2}" text-anchor="end" dominant-baseline="middle">{}</text>"#,
            MARGIN - 6.0,
            escape(name)
        );
    }
    s.push_str("</svg>\n");
    Ok(s)
}

fn star(cx: f64, cy: f64, r: f64) -> String {
    let pts: Vec<String> = (0..10)
        .map(|k| {
            let a = core::f64::consts::PI * k as f64 / 5.0 - core::f64::consts::FRAC_PI_2;
            let rr = if k % 2 == 0 { r } else { 0.45 * r };
            alloc::format!("{:.2},{:.2}", cx + rr * libm::cos(a), cy + rr * libm::sin(a))
        })
        .collect();
    pts.join(" ")
}

/// Two-objective scatter of all feasible records with the front starred.
pub fn pareto_svg(records: &[EvaluationRecord], front: &[EvaluationRecord], names: &[String]) -> Result<String> {
    let dims = records.iter().find(|r| r.feasible).map_or(0, |r| r.objectives.len());
    if dims != 2 || names.len() != 2 {
        return Err(Error::Unsupported(alloc::format!("Pareto figure needs two objectives, got {dims}")));
    }
    let feasible: Vec<&EvaluationRecord> = records.iter().filter(|r| r.feasible).collect();
    let xs: Vec<f64> = feasible.iter().map(|r| r.objectives[0]).collect();
    let ys: Vec<f64> = feasible.iter().map(|r| r.objectives[1]).collect();
    let (xa, ya) = (Axis::of(&xs), Axis::of(&ys));
    let (w, h, m) = (560.0, 420.0, 70.0);
    let px = |v: f64| xa.map(v, m, w - 20.0);
    let py = |v: f64| ya.map(v, h - m, 20.0);
    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w:.0}" height="{h:.0}" viewBox="0 0 {w:.0} {h:.0}" font-family="sans-serif" font-size="11">"#
    );
    let _ = writeln!(s, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let _ = writeln!(
        s,
        r#"<polyline points="{m:.0},20 {m:.0},{:.0} {:.0},{:.0}" fill="none" stroke="black"/>"#,
        h - m,
        w - 20.0,
        h - m
    );
    for (k, v) in [(0, xa.lo), (1, xa.hi)] {
        let anchor = if k == 0 { "start" } else { "end" };
        let _ = writeln!(s, r#"<text x="{:.2}" y="{:.0}" text-anchor="{anchor}">{v:.3}</text>"#, px(v), h - m + 16.0);
    }
    for v in [ya.lo, ya.hi] {
        let _ = writeln!(s, r#"<text x="{:.0}" y="{:.2}" text-anchor="end">{v:.3}</text>"#, m - 4.0, py(v));
    }
    let _ = writeln!(s, r#"<text x="{:.0}" y="{:.0}" text-anchor="middle">{}</text>"#, (m + w - 20.0) / 2.0, h - 20.0, escape(&names[0]));
    let _ = writeln!(
        s,
        r#"<text x="16" y="{:.0}" text-anchor="middle" transform="rotate(-90 16 {:.0})">{}</text>"#,
        (h - m + 20.0) / 2.0,
        (h - m + 20.0) / 2.0,
        escape(&names[1])
    );
    for (x, y) in xs.iter().zip(&ys) {
        let _ = writeln!(s, r##"<circle cx="{:.2}" cy="{:.2}" r="3" fill="none" stroke="#777"/>"##, px(*x), py(*y));
    }
    for r in front {
        let (cx, cy) = (px(r.objectives[0]), py(r.objectives[1]));
        let _ = writeln!(
            s,
            r#"<polygon class="front" data-x="{cx:.2}" data-y="{cy:.2}" points="{}" fill="red" stroke="darkred"/>"#,
            star(cx, cy, 7.0)
        );
    }
    s.push_str("</svg>\n");
    Ok(s)
}

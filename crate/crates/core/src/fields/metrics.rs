use alloc::vec::Vec;

use super::ForceVector;
use crate::{Error, Result};

/// Relative L1 error in percent, aggregated over cases.
#[derive(Debug, Clone, PartialEq)]
pub struct RelativeL1 {
    /// Per-case `|pred − truth| / |truth| · 100`, zero-truth cases omitted.
    pub per_case: Vec<f64>,
    pub mean: f64,
    /// Population standard deviation over the retained cases.
    pub std_dev: f64,
    /// Cases skipped because `|truth| <= zero_tolerance`.
    pub excluded: usize,
}

/// Per-case relative error, mean and standard deviation.
pub fn relative_l1(predicted: &[f64], truth: &[f64], zero_tolerance: f64) -> Result<RelativeL1> {
    if predicted.len() != truth.len() {
        return Err(Error::CountMismatch {
            expected: truth.len(),
            actual: predicted.len(),
        });
    }
    let mut per_case = Vec::with_capacity(truth.len());
    let mut excluded = 0;
    for (&p, &t) in predicted.iter().zip(truth) {
        if t.abs() <= zero_tolerance {
            excluded += 1;
            continue;
        }
        per_case.push((p - t).abs() / t.abs() * 100.0);
    }
    if per_case.is_empty() {
        return Err(Error::Domain("all truth values are zero".into()));
    }
    let n = per_case.len() as f64;
    let mean = per_case.iter().sum::<f64>() / n;
    let var = per_case.iter().map(|e| (e - mean) * (e - mean)).sum::<f64>() / n;
    Ok(RelativeL1 {
        per_case,
        mean,
        std_dev: libm::sqrt(var),
        excluded,
    })
}

/// Component-wise relative L1 over a set of cases.
///
/// A component counts as zero when it is at most `zero_fraction` times the
/// largest true component of the same case.
pub fn force_relative_l1(
    predicted: &[ForceVector],
    truth: &[ForceVector],
    zero_fraction: f64,
) -> Result<[Result<RelativeL1>; 3]> {
    if predicted.len() != truth.len() {
        return Err(Error::CountMismatch {
            expected: truth.len(),
            actual: predicted.len(),
        });
    }
    Ok(core::array::from_fn(|c| {
        let mut p = Vec::new();
        let mut t = Vec::new();
        let mut zeroed = 0;
        for (a, b) in predicted.iter().zip(truth) {
            let tb = b.to_array();
            let scale = tb.iter().fold(0.0f64, |m, v| m.max(v.abs()));
            if tb[c].abs() <= zero_fraction * scale {
                zeroed += 1;
                continue;
            }
            p.push(a.to_array()[c]);
            t.push(tb[c]);
        }
        relative_l1(&p, &t, 0.0).map(|mut r| {
            r.excluded += zeroed;
            r
        })
    }))
}

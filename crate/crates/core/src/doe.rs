//! Sobol design-of-experiments plans and the unit-cube to design mapping.

use alloc::vec::Vec;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::morph::{DesignBounds, DesignParams, Parameter};

pub const MAX_DIMENSION: usize = 16;
const BITS: usize = 32;

/// Primitive polynomial data for dimensions 2..=16: degree `s`, coefficient
/// bits `a` and initial direction integers `m`.
pub const DIRECTION_TABLE: [(u32, u32, &[u32]); MAX_DIMENSION - 1] = [
    (1, 0, &[1]),
    (2, 1, &[1, 3]),
    (3, 1, &[1, 3, 1]),
    (3, 2, &[1, 1, 1]),
    (4, 1, &[1, 1, 3, 3]),
    (4, 4, &[1, 3, 5, 13]),
    (5, 2, &[1, 1, 5, 5, 17]),
    (5, 4, &[1, 1, 5, 5, 5]),
    (5, 7, &[1, 1, 7, 11, 19]),
    (5, 11, &[1, 1, 5, 1, 1]),
    (5, 13, &[1, 1, 1, 3, 11]),
    (5, 14, &[1, 3, 5, 5, 31]),
    (6, 1, &[1, 3, 3, 9, 7, 49]),
    (6, 13, &[1, 1, 1, 15, 21, 21]),
    (6, 16, &[1, 3, 1, 13, 27, 49]),
];

fn direction_numbers(dim: usize) -> [u32; BITS] {
    let mut v = [0u32; BITS];
    if dim == 0 {
        for (k, slot) in v.iter_mut().enumerate() {
            *slot = 1 << (BITS - 1 - k);
        }
        return v;
    }
    let (s, a, m) = DIRECTION_TABLE[dim - 1];
    let s = s as usize;
    for k in 0..BITS {
        v[k] = if k < s {
            m[k] << (BITS - 1 - k)
        } else {
            let mut x = v[k - s] ^ (v[k - s] >> s);
            for i in 1..s {
                if (a >> (s - 1 - i)) & 1 == 1 {
                    x ^= v[k - i];
                }
            }
            x
        };
    }
    v
}

/// Sequential gray-code Sobol generator.
#[derive(Debug, Clone)]
pub struct SobolState {
    directions: Vec<[u32; BITS]>,
    current: Vec<u32>,
    index: u64,
}

impl SobolState {
    pub fn new(dim: usize) -> Result<Self> {
        if dim == 0 || dim > MAX_DIMENSION {
            return Err(Error::UnsupportedDimension(dim));
        }
        Ok(SobolState {
            directions: (0..dim).map(direction_numbers).collect(),
            current: alloc::vec![0; dim],
            index: 0,
        })
    }

    pub fn dimension(&self) -> usize {
        self.current.len()
    }

    /// Number of points produced so far (including skipped ones).
    pub fn index(&self) -> u64 {
        self.index
    }

    /// Next point in `[0, 1)^d`. The first call returns the origin.
    pub fn next_point(&mut self) -> Vec<f64> {
        let point = self.current.iter().map(|&c| c as f64 / 4_294_967_296.0).collect();
        let bit = (!self.index).trailing_zeros() as usize;
        if bit < BITS {
            for (c, v) in self.current.iter_mut().zip(&self.directions) {
                *c ^= v[bit];
            }
        }
        self.index += 1;
        point
    }

    pub fn skip(&mut self, n: u64) {
        for _ in 0..n {
            self.next_point();
        }
    }
}

/// `n` Sobol points in `[0, 1)^dim` after discarding the first `skip`.
pub fn sobol_generate(dim: usize, n: usize, skip: u64) -> Result<Vec<Vec<f64>>> {
    let mut state = SobolState::new(dim)?;
    state.skip(skip);
    Ok((0..n).map(|_| state.next_point()).collect())
}

/// The searchable part of the design vector: parameters not listed in
/// `frozen` are free and map to unit-cube coordinates in `Parameter::ALL` order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DesignSpace {
    pub bounds: DesignBounds,
    pub frozen: Vec<(Parameter, f64)>,
}

impl DesignSpace {
    pub fn new(bounds: DesignBounds, frozen: Vec<(Parameter, f64)>) -> Result<Self> {
        bounds.validate()?;
        Ok(DesignSpace { bounds, frozen })
    }

    pub fn all_free(bounds: DesignBounds) -> Self {
        DesignSpace { bounds, frozen: Vec::new() }
    }

    pub fn frozen_value(&self, p: Parameter) -> Option<f64> {
        self.frozen.iter().find(|(q, _)| *q == p).map(|&(_, v)| v)
    }

    pub fn free(&self) -> Vec<Parameter> {
        Parameter::ALL
            .iter()
            .copied()
            .filter(|&p| self.frozen_value(p).is_none())
            .collect()
    }

    pub fn dimension(&self) -> usize {
        self.free().len()
    }

    /// Affine map of a unit point onto the free parameters.
    pub fn scale_to_bounds(&self, unit: &[f64]) -> Result<DesignParams> {
        let free = self.free();
        if unit.len() != free.len() {
            return Err(Error::DimensionMismatch {
                expected: free.len(),
                actual: unit.len(),
            });
        }
        let mut values = [0.0; 5];
        for p in Parameter::ALL {
            if let Some(v) = self.frozen_value(p) {
                values[p.index()] = v;
            }
        }
        for (&p, &u) in free.iter().zip(unit) {
            values[p.index()] = self.bounds.denormalize(p, u);
        }
        Ok(DesignParams::from_array(values))
    }

    /// Inverse of [`scale_to_bounds`](Self::scale_to_bounds) on the free parameters.
    pub fn to_unit(&self, params: &DesignParams) -> Vec<f64> {
        self.free()
            .into_iter()
            .map(|p| self.bounds.normalize(p, params.get(p)))
            .collect()
    }
}

/// Sobol plan over a design space.
pub fn sobol_plan(space: &DesignSpace, n: usize, skip: u64) -> Result<Vec<DesignParams>> {
    sobol_generate(space.dimension(), n, skip)?
        .iter()
        .map(|u| space.scale_to_bounds(u))
        .collect()
}

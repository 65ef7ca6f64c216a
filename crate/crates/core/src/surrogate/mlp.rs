//! Dense tanh network with hand-written backpropagation.
//!
//! Parameters live in one flat vector, layer by layer: the weight matrix
//! stored input-major (`w[i * out + o]`) followed by the bias.

use alloc::vec;
use alloc::vec::Vec;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Mlp {
    sizes: Vec<usize>,
    params: Vec<f64>,
}

/// Per-layer activations kept for the backward pass.
#[derive(Debug, Default)]
pub struct Workspace {
    rows: usize,
    layers: Vec<Vec<f64>>,
    delta: Vec<f64>,
    delta_prev: Vec<f64>,
}

fn parameter_count(sizes: &[usize]) -> usize {
    sizes.windows(2).map(|w| w[0] * w[1] + w[1]).sum()
}

impl Mlp {
    /// Zero-initialized network.
    pub fn zeros(sizes: &[usize]) -> Result<Self> {
        if sizes.len() < 2 || sizes.contains(&0) {
            return Err(Error::Config("a network needs at least two non-empty layers".into()));
        }
        Ok(Mlp {
            sizes: sizes.to_vec(),
            params: vec![0.0; parameter_count(sizes)],
        })
    }

    /// Uniform weights in `±sqrt(3 / fan_in)`, zero biases.
    pub fn random<R: Rng + ?Sized>(sizes: &[usize], rng: &mut R) -> Result<Self> {
        let mut net = Self::zeros(sizes)?;
        let mut offset = 0;
        for w in sizes.windows(2) {
            let (fan_in, fan_out) = (w[0], w[1]);
            let limit = libm::sqrt(3.0 / fan_in as f64);
            for v in &mut net.params[offset..offset + fan_in * fan_out] {
                *v = rng.random_range(-limit..limit);
            }
            offset += fan_in * fan_out + fan_out;
        }
        Ok(net)
    }

    pub fn from_parts(sizes: Vec<usize>, params: Vec<f64>) -> Result<Self> {
        let mut net = Self::zeros(&sizes)?;
        if params.len() != net.params.len() {
            return Err(Error::CountMismatch {
                expected: net.params.len(),
                actual: params.len(),
            });
        }
        net.params = params;
        Ok(net)
    }

    pub fn sizes(&self) -> &[usize] {
        &self.sizes
    }

    pub fn params(&self) -> &[f64] {
        &self.params
    }

    pub fn params_mut(&mut self) -> &mut [f64] {
        &mut self.params
    }

    pub fn inputs(&self) -> usize {
        self.sizes[0]
    }

    pub fn outputs(&self) -> usize {
        self.sizes[self.sizes.len() - 1]
    }

    fn layer_offsets(&self) -> Vec<usize> {
        let mut offsets = Vec::with_capacity(self.sizes.len());
        let mut at = 0;
        for w in self.sizes.windows(2) {
            offsets.push(at);
            at += w[0] * w[1] + w[1];
        }
        offsets
    }

    fn affine(&self, offset: usize, fan_in: usize, fan_out: usize, input: &[f64], output: &mut [f64]) {
        let (w, rest) = self.params[offset..].split_at(fan_in * fan_out);
        let bias = &rest[..fan_out];
        for (x, y) in input.chunks_exact(fan_in).zip(output.chunks_exact_mut(fan_out)) {
            y.copy_from_slice(bias);
            for (xi, row) in x.iter().zip(w.chunks_exact(fan_out)) {
                for (yo, wo) in y.iter_mut().zip(row) {
                    *yo += xi * wo;
                }
            }
        }
    }

    /// Forward pass over `rows` inputs laid out row-major; returns the
    /// output rows and keeps activations in `ws` for [`backward`](Self::backward).
    pub fn forward_into<'w>(&self, input: &[f64], ws: &'w mut Workspace) -> &'w [f64] {
        let rows = input.len() / self.inputs();
        ws.rows = rows;
        ws.layers.resize_with(self.sizes.len() - 1, Vec::new);
        let offsets = self.layer_offsets();
        let last = self.sizes.len() - 2;
        for l in 0..=last {
            let (fan_in, fan_out) = (self.sizes[l], self.sizes[l + 1]);
            let (done, todo) = ws.layers.split_at_mut(l);
            let src: &[f64] = if l == 0 { input } else { &done[l - 1] };
            let dst = &mut todo[0];
            dst.resize(rows * fan_out, 0.0);
            self.affine(offsets[l], fan_in, fan_out, src, dst);
            if l < last {
                for v in dst.iter_mut() {
                    *v = libm::tanh(*v);
                }
            }
        }
        &ws.layers[last]
    }

    pub fn forward(&self, input: &[f64]) -> Vec<f64> {
        let mut ws = Workspace::default();
        self.forward_into(input, &mut ws).to_vec()
    }

    /// Accumulates `d loss / d params` into `grad` given the output gradient
    /// of the last [`forward_into`](Self::forward_into) call on `input`.
    pub fn backward(&self, input: &[f64], ws: &mut Workspace, d_output: &[f64], grad: &mut [f64]) {
        let rows = ws.rows;
        let offsets = self.layer_offsets();
        let last = self.sizes.len() - 2;
        let mut delta = core::mem::take(&mut ws.delta);
        let mut delta_prev = core::mem::take(&mut ws.delta_prev);
        delta.clear();
        delta.extend_from_slice(d_output);
        for l in (0..=last).rev() {
            let (fan_in, fan_out) = (self.sizes[l], self.sizes[l + 1]);
            let src: &[f64] = if l == 0 { input } else { &ws.layers[l - 1] };
            let (gw, gb) = grad[offsets[l]..offsets[l] + fan_in * fan_out + fan_out].split_at_mut(fan_in * fan_out);
            for (x, d) in src.chunks_exact(fan_in).zip(delta.chunks_exact(fan_out)) {
                for (xi, row) in x.iter().zip(gw.chunks_exact_mut(fan_out)) {
                    for (g, dv) in row.iter_mut().zip(d) {
                        *g += xi * dv;
                    }
                }
                for (g, dv) in gb.iter_mut().zip(d) {
                    *g += dv;
                }
            }
            if l == 0 {
                break;
            }
            let w = &self.params[offsets[l]..offsets[l] + fan_in * fan_out];
            delta_prev.clear();
            delta_prev.resize(rows * fan_in, 0.0);
            for ((dp, d), a) in delta_prev
                .chunks_exact_mut(fan_in)
                .zip(delta.chunks_exact(fan_out))
                .zip(src.chunks_exact(fan_in))
            {
                for ((dpi, row), ai) in dp.iter_mut().zip(w.chunks_exact(fan_out)).zip(a) {
                    let mut acc = [0.0; 4];
                    let mut rc = row.chunks_exact(4);
                    let mut dc = d.chunks_exact(4);
                    for (r4, d4) in (&mut rc).zip(&mut dc) {
                        for k in 0..4 {
                            acc[k] += r4[k] * d4[k];
                        }
                    }
                    let mut s = (acc[0] + acc[1]) + (acc[2] + acc[3]);
                    for (r, dv) in rc.remainder().iter().zip(dc.remainder()) {
                        s += r * dv;
                    }
                    *dpi = s * (1.0 - ai * ai);
                }
            }
            core::mem::swap(&mut delta, &mut delta_prev);
        }
        ws.delta = delta;
        ws.delta_prev = delta_prev;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::stream;

    #[test]
    fn zero_network_outputs_zero() {
        let net = Mlp::zeros(&[3, 4, 2]).unwrap();
        assert_eq!(net.forward(&[1.0, 2.0, 3.0, 4.0, 5.0, 6.0]), vec![0.0; 4]);
    }

    #[test]
    fn single_neuron_by_hand() {
        // y = 2 tanh(0.5 x + 0.1) - 0.3
        let net = Mlp::from_parts(vec![1, 1, 1], vec![0.5, 0.1, 2.0, -0.3]).unwrap();
        let y = net.forward(&[0.8]);
        assert!((y[0] - (2.0 * libm::tanh(0.5)  - 0.3)).abs() < 1e-15);
    }

    #[test]
    fn backward_matches_finite_differences() {
        let mut rng = stream(3, "mlp");
        let sizes = [4, 6, 5, 3];
        let mut net = Mlp::random(&sizes, &mut rng).unwrap();
        let input: Vec<f64> = (0..8).map(|_| rng.random_range(-1.0..1.0)).collect();
        let weights: Vec<f64> = (0..6).map(|_| rng.random_range(-1.0..1.0)).collect();
        // objective: weighted sum of outputs
        let objective = |net: &Mlp| net.forward(&input).iter().zip(&weights).map(|(a, b)| a * b).sum::<f64>();
        let mut ws = Workspace::default();
        net.forward_into(&input, &mut ws);
        let mut grad = vec![0.0; net.params().len()];
        net.backward(&input, &mut ws, &weights, &mut grad);
        let h = 1e-6;
        for k in 0..grad.len() {
            let v = net.params[k];
            net.params[k] = v + h;
            let up = objective(&net);
            net.params[k] = v - h;
            let down = objective(&net);
            net.params[k] = v;
            let fd = (up - down) / (2.0 * h);
            assert!((fd - grad[k]).abs() < 1e-7 * (1.0 + fd.abs()), "{k}: {fd} vs {}", grad[k]);
        }
    }

    #[test]
    fn rejects_bad_shapes() {
        assert!(Mlp::zeros(&[3]).is_err());
        assert!(Mlp::zeros(&[3, 0, 1]).is_err());
        assert!(Mlp::from_parts(vec![2, 1], vec![0.0; 2]).is_err());
    }
}

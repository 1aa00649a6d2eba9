//! Moment-based optimizer step with decoupled weight decay.

#[allow(unused_imports)]
use num_traits::Float;

use alloc::vec;
use alloc::vec::Vec;

use crate::matrix::Mat;

const BETA1: f64 = 0.9;
const BETA2: f64 = 0.999;
const EPS: f64 = 1e-8;

/// Per-tensor first and second moments plus the step counter.
///
/// The update is `theta -= lr * mhat / (sqrt(vhat) + eps) + decay * theta`:
/// the decay shrinks parameters directly instead of being folded into the
/// gradient, so a zero learning rate still shrinks and a zero decay leaves
/// the adaptive step untouched.
pub(crate) struct AdamW {
    lr: f64,
    decay: f64,
    t: i32,
    m: Vec<Vec<f64>>,
    v: Vec<Vec<f64>>,
}

impl AdamW {
    pub(crate) fn new(lr: f64, decay: f64, tensor_sizes: &[usize]) -> Self {
        AdamW {
            lr,
            decay,
            t: 0,
            m: tensor_sizes.iter().map(|&s| vec![0.0; s]).collect(),
            v: tensor_sizes.iter().map(|&s| vec![0.0; s]).collect(),
        }
    }

    /// One update over all tensors; `params` and `grads` must match the
    /// sizes given at construction, in the same order.
    pub(crate) fn step(&mut self, params: &mut [&mut Mat], grads: &[&Mat]) {
        assert_eq!(params.len(), self.m.len());
        assert_eq!(grads.len(), self.m.len());
        self.t += 1;
        let bc1 = 1.0 - BETA1.powi(self.t);
        let bc2 = 1.0 - BETA2.powi(self.t);

        for ((theta, grad), (m, v)) in params
            .iter_mut()
            .zip(grads)
            .zip(self.m.iter_mut().zip(&mut self.v))
        {
            let g = grad.as_slice();
            let p = theta.as_mut_slice();
            assert_eq!(g.len(), m.len(), "tensor size changed mid-run");
            assert_eq!(p.len(), m.len(), "tensor size changed mid-run");
            for i in 0..g.len() {
                m[i] = BETA1 * m[i] + (1.0 - BETA1) * g[i];
                v[i] = BETA2 * v[i] + (1.0 - BETA2) * g[i] * g[i];
                let mhat = m[i] / bc1;
                let vhat = v[i] / bc2;
                p[i] -= self.lr * mhat / (vhat.sqrt() + EPS) + self.decay * p[i];
            }
        }
    }
}

//! Parameter containers and seeded initialization.

#[allow(unused_imports)]
use num_traits::Float;

use rand::Rng;
use rand_chacha::ChaCha8Rng;

use crate::matrix::Mat;
use crate::seed;

/// Self-term and aggregation-term weights of one layer.
#[derive(Debug, Clone, PartialEq)]
pub struct LayerWeights {
    pub w0: Mat,
    pub w1: Mat,
}

/// Uniform init in +-sqrt(6 / (fan_in + fan_out)).
fn fan_scaled(rows: usize, cols: usize, rng: &mut ChaCha8Rng) -> Mat {
    let limit = (6.0 / (rows + cols) as f64).sqrt();
    Mat::from_fn(rows, cols, |_, _| rng.random_range(-limit..limit))
}

/// Parameters of the co-embedding model.
///
/// The edge layer lifts the scalar edge state (`w0: 1 x N`) and aggregates
/// endpoint features (`w1: N x N`); the node layer maps the aggregated
/// `N`-wide node states to the hidden width; the classifier is affine on the
/// pooled hidden vector.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelParams {
    pub edge_layer: LayerWeights,
    pub node_layer: LayerWeights,
    /// `hidden_dim x n_classes`.
    pub classifier: Mat,
    /// `1 x n_classes`.
    pub bias: Mat,
}

impl ModelParams {
    /// Fresh seeded parameters; biases start at zero.
    pub fn init(n_regions: usize, hidden_dim: usize, n_classes: usize, seed: u64) -> Self {
        let mut rng = seed::rng(seed, "co-embedding-init");
        ModelParams {
            edge_layer: LayerWeights {
                w0: fan_scaled(1, n_regions, &mut rng),
                w1: fan_scaled(n_regions, n_regions, &mut rng),
            },
            node_layer: LayerWeights {
                w0: fan_scaled(n_regions, hidden_dim, &mut rng),
                w1: fan_scaled(n_regions, hidden_dim, &mut rng),
            },
            classifier: fan_scaled(hidden_dim, n_classes, &mut rng),
            bias: Mat::zeros(1, n_classes),
        }
    }

    pub fn n_regions(&self) -> usize {
        self.edge_layer.w1.rows()
    }

    pub fn hidden_dim(&self) -> usize {
        self.classifier.rows()
    }

    pub fn n_classes(&self) -> usize {
        self.classifier.cols()
    }

    /// The six tensors in a fixed order (update and serialization order).
    pub fn tensors(&self) -> [&Mat; 6] {
        [
            &self.edge_layer.w0,
            &self.edge_layer.w1,
            &self.node_layer.w0,
            &self.node_layer.w1,
            &self.classifier,
            &self.bias,
        ]
    }

    pub fn tensors_mut(&mut self) -> [&mut Mat; 6] {
        [
            &mut self.edge_layer.w0,
            &mut self.edge_layer.w1,
            &mut self.node_layer.w0,
            &mut self.node_layer.w1,
            &mut self.classifier,
            &mut self.bias,
        ]
    }

    pub fn all_finite(&self) -> bool {
        self.tensors().iter().all(|t| t.all_finite())
    }
}

/// Parameters of the two-layer GCN baseline: hidden layer, output layer, and
/// an output bias shared across nodes.
#[derive(Debug, Clone, PartialEq)]
pub struct GcnParams {
    pub layer1: LayerWeights,
    pub layer2: LayerWeights,
    /// `1 x n_classes`.
    pub bias: Mat,
}

impl GcnParams {
    pub fn init(n_regions: usize, hidden_dim: usize, n_classes: usize, seed: u64) -> Self {
        let mut rng = seed::rng(seed, "gcn-init");
        GcnParams {
            layer1: LayerWeights {
                w0: fan_scaled(n_regions, hidden_dim, &mut rng),
                w1: fan_scaled(n_regions, hidden_dim, &mut rng),
            },
            layer2: LayerWeights {
                w0: fan_scaled(hidden_dim, n_classes, &mut rng),
                w1: fan_scaled(hidden_dim, n_classes, &mut rng),
            },
            bias: Mat::zeros(1, n_classes),
        }
    }

    pub fn n_regions(&self) -> usize {
        self.layer1.w0.rows()
    }

    pub fn hidden_dim(&self) -> usize {
        self.layer1.w0.cols()
    }

    pub fn n_classes(&self) -> usize {
        self.bias.cols()
    }

    /// The five tensors in a fixed order (update and serialization order).
    pub fn tensors(&self) -> [&Mat; 5] {
        [
            &self.layer1.w0,
            &self.layer1.w1,
            &self.layer2.w0,
            &self.layer2.w1,
            &self.bias,
        ]
    }

    pub fn tensors_mut(&mut self) -> [&mut Mat; 5] {
        [
            &mut self.layer1.w0,
            &mut self.layer1.w1,
            &mut self.layer2.w0,
            &mut self.layer2.w1,
            &mut self.bias,
        ]
    }

    pub fn all_finite(&self) -> bool {
        self.tensors().iter().all(|t| t.all_finite())
    }
}

//! The co-embedding graph classifier and its plain GCN baseline.
//!
//! Both models read a [`BrainGraph`](crate::graph::BrainGraph) and emit one
//! logit per class. Their shared trick for permutation invariance: each
//! region's feature vector is its correlation profile sorted in descending
//! order, so relabeling regions permutes feature rows without scrambling the
//! feature axis, and mean pooling at the end removes the row order too.
//!
//! The co-embedding model runs one edge layer (edge states aggregate their
//! endpoint nodes through the incidence structure) and one node layer (node
//! states aggregate through the projected edge connectivity), then pools and
//! classifies:
//!
//! ```text
//! H_e = relu(h_e0 W0e + B^T X W1e)        edge layer, width N
//! H_v = B H_e / (N - 1)                   mean over incident edges
//! H   = relu(H_v W0n + phi(A_e) H_v W1n)  node layer, width hidden_dim
//! logits = mean_rows(H) Wc + bias
//! ```
//!
//! The baseline is the classical two-layer form with the adjacency in the
//! aggregation slot and no edge states. Training is full batch: Adam-style
//! moment updates with decoupled weight decay, softmax cross-entropy,
//! inverted dropout after each hidden activation. Everything is
//! deterministic for a fixed seed.

mod adamw;
mod forward;
mod layers;
mod params;
mod train;

pub use forward::{forward, forward_gcn, gradients, loss, softmax, Gradients};
pub use layers::{co_embed_node_layer, edge_layer, gcn_layer, Activation};
pub use params::{GcnParams, LayerWeights, ModelParams};
pub use train::{train, train_gcn, train_model, EpochStats, ModelKind, TrainedModel};

pub(crate) use forward::{
    argmax, forward_gcn_prepared_eval, forward_prepared_eval, prepare, prepare_gcn, Prepared,
    PreparedGcn,
};
pub(crate) use train::{check_dataset, train_co_prepared, train_gcn_prepared};

use crate::error::{Error, Result};

/// Whether stochastic regularization (dropout) is active, and at what rate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Mode {
    /// Inverted dropout after each hidden activation with this probability.
    Train { dropout: f64 },
    /// Deterministic pass; the rng is never touched.
    Eval,
}

/// Training hyperparameters.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainConfig {
    /// Full-batch epochs.
    pub epochs: usize,
    pub learning_rate: f64,
    /// Decoupled per-step shrinkage rate.
    pub weight_decay: f64,
    /// Drop probability for hidden activations.
    pub dropout: f64,
    /// Width of the final hidden representation.
    pub hidden_dim: usize,
    pub seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            epochs: 300,
            learning_rate: 1e-4,
            weight_decay: 5e-4,
            dropout: 0.5,
            hidden_dim: 1024,
            seed: 42,
        }
    }
}

impl TrainConfig {
    /// Checks ranges. Zero learning rate and zero decay are allowed (useful
    /// for optimizer identities); epochs and hidden width must be positive.
    pub fn validate(&self) -> Result<()> {
        if self.epochs == 0 {
            return Err(Error::InvalidConfig {
                reason: "epochs must be at least 1",
            });
        }
        if self.hidden_dim == 0 {
            return Err(Error::InvalidConfig {
                reason: "hidden_dim must be at least 1",
            });
        }
        if !self.learning_rate.is_finite() || self.learning_rate < 0.0 {
            return Err(Error::InvalidConfig {
                reason: "learning_rate must be finite and nonnegative",
            });
        }
        if !self.weight_decay.is_finite() || self.weight_decay < 0.0 {
            return Err(Error::InvalidConfig {
                reason: "weight_decay must be finite and nonnegative",
            });
        }
        if !(0.0..1.0).contains(&self.dropout) {
            return Err(Error::InvalidConfig {
                reason: "dropout must lie in [0, 1)",
            });
        }
        Ok(())
    }
}

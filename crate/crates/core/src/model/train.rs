//! Full-batch training for both model kinds.
//!
//! The per-graph forward in [`forward`](super::forward) is the reference
//! semantics; the trainer gets its throughput from stacking every graph's
//! node (or edge) rows into one tall matrix so each epoch runs a handful of
//! large GEMMs instead of hundreds of small ones. Graph-local mixing steps
//! (incidence scatter/gather, per-graph aggregation products) walk the
//! stacked buffers per graph. Unit tests pin the batched gradients to the
//! per-graph reverse-mode path and to finite differences.

#[allow(unused_imports)]
use num_traits::Float;

use alloc::vec;
use alloc::vec::Vec;

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::graph::BrainGraph;
use crate::matrix::{gemm, gemm_raw, Mat};
use crate::model::adamw::AdamW;
use crate::model::forward::{
    argmax, forward, forward_gcn, prepare, prepare_gcn, softmax, Prepared, PreparedGcn,
};
use crate::model::{GcnParams, Mode, ModelParams, TrainConfig};
use crate::seed::{self, MaskStream};

/// Loss and training accuracy after one epoch's update.
#[derive(Debug, Clone, PartialEq)]
pub struct EpochStats {
    /// 1-based epoch index.
    pub epoch: usize,
    /// Mean softmax cross-entropy over the training set.
    pub loss: f64,
    /// Fraction of training graphs whose argmax logit hits the label.
    pub train_accuracy: f64,
}

/// Which classifier to train or evaluate.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ModelKind {
    CoEmbedding,
    GcnBaseline,
}

/// A trained classifier of either kind.
#[derive(Debug, Clone, PartialEq)]
pub enum TrainedModel {
    CoEmbedding(ModelParams),
    GcnBaseline(GcnParams),
}

impl TrainedModel {
    pub fn kind(&self) -> ModelKind {
        match self {
            TrainedModel::CoEmbedding(_) => ModelKind::CoEmbedding,
            TrainedModel::GcnBaseline(_) => ModelKind::GcnBaseline,
        }
    }

    /// Eval-mode logits for one graph.
    pub fn logits(&self, g: &BrainGraph) -> Result<Vec<f64>> {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        match self {
            TrainedModel::CoEmbedding(p) => forward(g, p, Mode::Eval, &mut rng),
            TrainedModel::GcnBaseline(p) => forward_gcn(g, p, Mode::Eval, &mut rng),
        }
    }

    /// Predicted class for one graph (argmax of eval-mode logits).
    pub fn predict(&self, g: &BrainGraph) -> Result<usize> {
        Ok(argmax(&self.logits(g)?))
    }
}

/// Region count and class count of a dataset, with shape and label checks.
pub(crate) fn check_dataset(dataset: &[BrainGraph]) -> Result<(usize, usize)> {
    let first = dataset.first().ok_or(Error::EmptyDataset)?;
    let n = first.n_regions();
    if dataset.iter().any(|g| g.n_regions() != n) {
        return Err(Error::InvalidGraph {
            reason: "graphs disagree on region count",
        });
    }
    let n_classes = dataset.iter().map(|g| g.label()).max().unwrap_or(0) + 1;
    let first_label = first.label();
    if dataset.iter().all(|g| g.label() == first_label) {
        return Err(Error::SingleClass);
    }
    Ok((n, n_classes))
}

/// Trains the co-embedding model on the full dataset.
pub fn train(dataset: &[BrainGraph], cfg: &TrainConfig) -> Result<(ModelParams, Vec<EpochStats>)> {
    cfg.validate()?;
    let (n, n_classes) = check_dataset(dataset)?;
    let preps = dataset.iter().map(prepare).collect::<Result<Vec<_>>>()?;
    let refs: Vec<&Prepared> = preps.iter().collect();
    train_co_prepared(&refs, cfg, n, n_classes)
}

/// Trains the plain GCN baseline on the full dataset.
pub fn train_gcn(
    dataset: &[BrainGraph],
    cfg: &TrainConfig,
) -> Result<(GcnParams, Vec<EpochStats>)> {
    cfg.validate()?;
    let (n, n_classes) = check_dataset(dataset)?;
    let preps = dataset
        .iter()
        .map(prepare_gcn)
        .collect::<Result<Vec<_>>>()?;
    let refs: Vec<&PreparedGcn> = preps.iter().collect();
    train_gcn_prepared(&refs, cfg, n, n_classes)
}

/// Trains the chosen model kind.
pub fn train_model(
    dataset: &[BrainGraph],
    kind: ModelKind,
    cfg: &TrainConfig,
) -> Result<(TrainedModel, Vec<EpochStats>)> {
    match kind {
        ModelKind::CoEmbedding => {
            train(dataset, cfg).map(|(p, h)| (TrainedModel::CoEmbedding(p), h))
        }
        ModelKind::GcnBaseline => {
            train_gcn(dataset, cfg).map(|(p, h)| (TrainedModel::GcnBaseline(p), h))
        }
    }
}

pub(crate) fn train_co_prepared(
    preps: &[&Prepared],
    cfg: &TrainConfig,
    n: usize,
    n_classes: usize,
) -> Result<(ModelParams, Vec<EpochStats>)> {
    let mut params = ModelParams::init(n, cfg.hidden_dim, n_classes, cfg.seed);
    let mut trainer = CoTrainer::new(preps, n, n_classes, cfg.hidden_dim);
    let mut masks = MaskContext::new(cfg);
    let mut opt = AdamW::new(
        cfg.learning_rate,
        cfg.weight_decay,
        &sizes(&params.tensors()),
    );

    let mut history = Vec::with_capacity(cfg.epochs);
    for epoch in 1..=cfg.epochs {
        let (loss, acc) = trainer.epoch(preps, &params, masks.for_epoch());
        {
            let g = &trainer.grads;
            opt.step(
                &mut params.tensors_mut(),
                &[&g.w0e, &g.w1e, &g.w0n, &g.w1n, &g.wc, &g.bias],
            );
        }
        history.push(EpochStats {
            epoch,
            loss,
            train_accuracy: acc,
        });
    }
    debug_assert!(params.all_finite());
    Ok((params, history))
}

pub(crate) fn train_gcn_prepared(
    preps: &[&PreparedGcn],
    cfg: &TrainConfig,
    n: usize,
    n_classes: usize,
) -> Result<(GcnParams, Vec<EpochStats>)> {
    let mut params = GcnParams::init(n, cfg.hidden_dim, n_classes, cfg.seed);
    let mut trainer = GcnTrainer::new(preps, n, n_classes, cfg.hidden_dim);
    let mut masks = MaskContext::new(cfg);
    let mut opt = AdamW::new(
        cfg.learning_rate,
        cfg.weight_decay,
        &sizes(&params.tensors()),
    );

    let mut history = Vec::with_capacity(cfg.epochs);
    for epoch in 1..=cfg.epochs {
        let (loss, acc) = trainer.epoch(preps, &params, masks.for_epoch());
        {
            let g = &trainer.grads;
            opt.step(
                &mut params.tensors_mut(),
                &[&g.w0e, &g.w1e, &g.w0n, &g.w1n, &g.bias],
            );
        }
        history.push(EpochStats {
            epoch,
            loss,
            train_accuracy: acc,
        });
    }
    debug_assert!(params.all_finite());
    Ok((params, history))
}

fn sizes(tensors: &[&Mat]) -> Vec<usize> {
    tensors.iter().map(|t| t.as_slice().len()).collect()
}

/// Owns the dropout stream; yields per-epoch handles.
struct MaskContext {
    stream: MaskStream,
    dropout: f64,
}

impl MaskContext {
    fn new(cfg: &TrainConfig) -> Self {
        MaskContext {
            stream: MaskStream::new(seed::derive(cfg.seed, "dropout")),
            dropout: cfg.dropout,
        }
    }

    fn for_epoch(&mut self) -> Option<(f64, &mut MaskStream)> {
        if self.dropout > 0.0 {
            Some((self.dropout, &mut self.stream))
        } else {
            None
        }
    }
}

/// Per-epoch gradient tensors, named after the parameter they pair with.
/// The GCN trainer reuses the struct with `w0e/w1e` meaning layer 1 and
/// `w0n/w1n` meaning layer 2 (`wc` unused, 0 x 0).
pub(crate) struct BatchGrads {
    pub(crate) w0e: Mat,
    pub(crate) w1e: Mat,
    pub(crate) w0n: Mat,
    pub(crate) w1n: Mat,
    pub(crate) wc: Mat,
    pub(crate) bias: Mat,
}

/// Relu + optional inverted dropout over `src`, writing activations to `dst`
/// and the applied multiplier to `mult` (1 or 0 scaled by 1/(1-p)).
fn activate(
    src: &Mat,
    dst: &mut Mat,
    mult: &mut [f64],
    masks: &mut Option<(f64, &mut MaskStream)>,
) {
    match masks {
        Some((p, stream)) => {
            let threshold = MaskStream::threshold(*p);
            let inv_keep = 1.0 / (1.0 - *p);
            for ((d, &s), m) in dst
                .as_mut_slice()
                .iter_mut()
                .zip(src.as_slice())
                .zip(mult.iter_mut())
            {
                *m = if stream.keep(threshold) {
                    inv_keep
                } else {
                    0.0
                };
                *d = s.max(0.0) * *m;
            }
        }
        None => {
            for ((d, &s), m) in dst
                .as_mut_slice()
                .iter_mut()
                .zip(src.as_slice())
                .zip(mult.iter_mut())
            {
                *m = 1.0;
                *d = s.max(0.0);
            }
        }
    }
}

/// Backward of [`activate`]: `d *= mult * relu'(z)` elementwise.
fn backprop_activation(d: &mut Mat, z: &Mat, mult: &[f64]) {
    for ((v, &zv), &m) in d
        .as_mut_slice()
        .iter_mut()
        .zip(z.as_slice())
        .zip(mult.iter())
    {
        *v = if zv > 0.0 { *v * m } else { 0.0 };
    }
}

/// Mean cross-entropy, accuracy, and d loss / d logits (already divided by
/// the graph count) from a stacked logits matrix.
fn loss_and_dlogits(logits: &Mat, labels: &[usize], dlogits: &mut Mat) -> (f64, f64) {
    let n_graphs = labels.len();
    let inv = 1.0 / n_graphs as f64;
    let mut loss_sum = 0.0;
    let mut hits = 0usize;
    for (gi, &label) in labels.iter().enumerate() {
        let row = logits.row(gi);
        let m = row.iter().fold(f64::NEG_INFINITY, |a, &b| a.max(b));
        let sum: f64 = row.iter().map(|l| (l - m).exp()).sum();
        loss_sum += m + sum.ln() - row[label];
        if argmax(row) == label {
            hits += 1;
        }
        let probs = softmax(row);
        let drow = dlogits.row_mut(gi);
        for (c, pr) in probs.iter().enumerate() {
            drow[c] = (pr - if c == label { 1.0 } else { 0.0 }) * inv;
        }
    }
    (loss_sum * inv, hits as f64 / n_graphs as f64)
}

/// Reusable buffers and the epoch computation for the co-embedding model.
pub(crate) struct CoTrainer {
    n: usize,
    f_mid: usize,
    labels: Vec<usize>,
    s_all: Mat,
    he0_all: Mat,
    z1: Mat,
    he: Mat,
    mult1: Vec<f64>,
    hv1: Mat,
    pcat: Mat,
    wcat: Mat,
    z2: Mat,
    hv2: Mat,
    mult2: Vec<f64>,
    h_all: Mat,
    logits: Mat,
    dlogits: Mat,
    dh_all: Mat,
    dz2: Mat,
    gcat: Mat,
    dpcat: Mat,
    dhv1: Mat,
    dz1: Mat,
    pub(crate) grads: BatchGrads,
}

impl CoTrainer {
    pub(crate) fn new(preps: &[&Prepared], n: usize, n_classes: usize, hidden: usize) -> Self {
        let n_graphs = preps.len();
        let n_e = preps[0].s.rows();
        let f_mid = n;
        let edge_rows = n_graphs * n_e;
        let node_rows = n_graphs * n;

        let mut s_all = Mat::zeros(edge_rows, n);
        let mut he0_all = Mat::zeros(edge_rows, 1);
        let mut labels = Vec::with_capacity(n_graphs);
        for (gi, prep) in preps.iter().enumerate() {
            for e in 0..n_e {
                s_all.row_mut(gi * n_e + e).copy_from_slice(prep.s.row(e));
                he0_all[(gi * n_e + e, 0)] = prep.he0[(e, 0)];
            }
            labels.push(prep.label);
        }

        CoTrainer {
            n,
            f_mid,
            labels,
            s_all,
            he0_all,
            z1: Mat::zeros(edge_rows, f_mid),
            he: Mat::zeros(edge_rows, f_mid),
            mult1: vec![1.0; edge_rows * f_mid],
            hv1: Mat::zeros(node_rows, f_mid),
            pcat: Mat::zeros(node_rows, 2 * f_mid),
            wcat: Mat::zeros(2 * f_mid, hidden),
            z2: Mat::zeros(node_rows, hidden),
            hv2: Mat::zeros(node_rows, hidden),
            mult2: vec![1.0; node_rows * hidden],
            h_all: Mat::zeros(n_graphs, hidden),
            logits: Mat::zeros(n_graphs, n_classes),
            dlogits: Mat::zeros(n_graphs, n_classes),
            dh_all: Mat::zeros(n_graphs, hidden),
            dz2: Mat::zeros(node_rows, hidden),
            gcat: Mat::zeros(2 * f_mid, hidden),
            dpcat: Mat::zeros(node_rows, 2 * f_mid),
            dhv1: Mat::zeros(node_rows, f_mid),
            dz1: Mat::zeros(edge_rows, f_mid),
            grads: BatchGrads {
                w0e: Mat::zeros(1, f_mid),
                w1e: Mat::zeros(n, f_mid),
                w0n: Mat::zeros(f_mid, hidden),
                w1n: Mat::zeros(f_mid, hidden),
                wc: Mat::zeros(hidden, n_classes),
                bias: Mat::zeros(1, n_classes),
            },
        }
    }

    /// One full-batch forward/backward; leaves gradients in `self.grads` and
    /// returns (mean loss, training accuracy).
    pub(crate) fn epoch(
        &mut self,
        preps: &[&Prepared],
        p: &ModelParams,
        mut masks: Option<(f64, &mut MaskStream)>,
    ) -> (f64, f64) {
        let n_graphs = preps.len();
        let (n, f_mid) = (self.n, self.f_mid);
        let n_e = preps[0].s.rows();
        let inv_nm1 = 1.0 / (n - 1) as f64;

        // Edge layer on the stacked edge rows.
        gemm(
            &mut self.z1,
            0.0,
            1.0,
            &self.he0_all,
            false,
            &p.edge_layer.w0,
            false,
        );
        gemm(
            &mut self.z1,
            1.0,
            1.0,
            &self.s_all,
            false,
            &p.edge_layer.w1,
            false,
        );
        activate(&self.z1, &mut self.he, &mut self.mult1, &mut masks);

        // Node states: mean over incident edges, per graph.
        self.hv1.as_mut_slice().fill(0.0);
        for (gi, prep) in preps.iter().enumerate() {
            for (e, &(i, j)) in prep.incidence.pairs().iter().enumerate() {
                let src = self.he.row(gi * n_e + e);
                for k in 0..f_mid {
                    let v = src[k] * inv_nm1;
                    self.hv1[(gi * n + i, k)] += v;
                    self.hv1[(gi * n + j, k)] += v;
                }
            }
        }

        // pcat = [hv1 | phi hv1], wcat = [w0n; w1n].
        for r in 0..self.hv1.rows() {
            let (dst, src) = (self.pcat.row_mut(r), self.hv1.row(r));
            dst[..f_mid].copy_from_slice(src);
        }
        for (gi, prep) in preps.iter().enumerate() {
            gemm_raw(
                n,
                n,
                f_mid,
                1.0,
                prep.phi.as_slice(),
                n,
                false,
                &self.hv1.as_slice()[gi * n * f_mid..],
                f_mid,
                false,
                0.0,
                &mut self.pcat.as_mut_slice()[gi * n * 2 * f_mid + f_mid..],
                2 * f_mid,
            );
        }
        for r in 0..f_mid {
            self.wcat.row_mut(r).copy_from_slice(p.node_layer.w0.row(r));
            self.wcat
                .row_mut(f_mid + r)
                .copy_from_slice(p.node_layer.w1.row(r));
        }

        gemm(&mut self.z2, 0.0, 1.0, &self.pcat, false, &self.wcat, false);
        activate(&self.z2, &mut self.hv2, &mut self.mult2, &mut masks);

        // Mean pool per graph, then the affine classifier.
        let inv_n = 1.0 / n as f64;
        for gi in 0..n_graphs {
            self.h_all.row_mut(gi).fill(0.0);
            for r in 0..n {
                let src = self.hv2.row(gi * n + r);
                for (acc, &v) in self.h_all.row_mut(gi).iter_mut().zip(src) {
                    *acc += v;
                }
            }
            for v in self.h_all.row_mut(gi) {
                *v *= inv_n;
            }
        }
        gemm(
            &mut self.logits,
            0.0,
            1.0,
            &self.h_all,
            false,
            &p.classifier,
            false,
        );
        for gi in 0..n_graphs {
            for (v, b) in self.logits.row_mut(gi).iter_mut().zip(p.bias.row(0)) {
                *v += b;
            }
        }

        let (loss, acc) = loss_and_dlogits(&self.logits, &self.labels, &mut self.dlogits);

        // Classifier gradients and the pooled backward signal.
        for c in 0..self.grads.bias.cols() {
            let mut sum = 0.0;
            for gi in 0..n_graphs {
                sum += self.dlogits[(gi, c)];
            }
            self.grads.bias[(0, c)] = sum;
        }
        gemm(
            &mut self.grads.wc,
            0.0,
            1.0,
            &self.h_all,
            true,
            &self.dlogits,
            false,
        );
        gemm(
            &mut self.dh_all,
            0.0,
            1.0,
            &self.dlogits,
            false,
            &p.classifier,
            true,
        );

        for gi in 0..n_graphs {
            for r in 0..n {
                let dst = self.dz2.row_mut(gi * n + r);
                for (d, &s) in dst.iter_mut().zip(self.dh_all.row(gi)) {
                    *d = s * inv_n;
                }
            }
        }
        backprop_activation(&mut self.dz2, &self.z2, &self.mult2);

        // Node-layer gradients via the concatenated form.
        gemm(&mut self.gcat, 0.0, 1.0, &self.pcat, true, &self.dz2, false);
        for r in 0..f_mid {
            self.grads.w0n.row_mut(r).copy_from_slice(self.gcat.row(r));
            self.grads
                .w1n
                .row_mut(r)
                .copy_from_slice(self.gcat.row(f_mid + r));
        }
        gemm(
            &mut self.dpcat,
            0.0,
            1.0,
            &self.dz2,
            false,
            &self.wcat,
            true,
        );

        for r in 0..self.dhv1.rows() {
            let (dst, src) = (self.dhv1.row_mut(r), self.dpcat.row(r));
            dst.copy_from_slice(&src[..f_mid]);
        }
        for (gi, prep) in preps.iter().enumerate() {
            gemm_raw(
                n,
                n,
                f_mid,
                1.0,
                prep.phi.as_slice(),
                n,
                true,
                &self.dpcat.as_slice()[gi * n * 2 * f_mid + f_mid..],
                2 * f_mid,
                false,
                1.0,
                &mut self.dhv1.as_mut_slice()[gi * n * f_mid..],
                f_mid,
            );
        }

        // Back through the incidence mean into edge space.
        for (gi, prep) in preps.iter().enumerate() {
            for (e, &(i, j)) in prep.incidence.pairs().iter().enumerate() {
                let dst_row = gi * n_e + e;
                for k in 0..f_mid {
                    self.dz1[(dst_row, k)] =
                        (self.dhv1[(gi * n + i, k)] + self.dhv1[(gi * n + j, k)]) * inv_nm1;
                }
            }
        }
        backprop_activation(&mut self.dz1, &self.z1, &self.mult1);

        gemm(
            &mut self.grads.w1e,
            0.0,
            1.0,
            &self.s_all,
            true,
            &self.dz1,
            false,
        );
        gemm(
            &mut self.grads.w0e,
            0.0,
            1.0,
            &self.he0_all,
            true,
            &self.dz1,
            false,
        );

        (loss, acc)
    }
}

/// Reusable buffers and the epoch computation for the GCN baseline.
pub(crate) struct GcnTrainer {
    n: usize,
    labels: Vec<usize>,
    xcat_all: Mat,
    z1: Mat,
    h1: Mat,
    mult1: Vec<f64>,
    hcat: Mat,
    wcat1: Mat,
    wcat2: Mat,
    z2: Mat,
    logits: Mat,
    dlogits: Mat,
    dz2: Mat,
    gcat2: Mat,
    dhcat: Mat,
    dh1: Mat,
    gcat1: Mat,
    pub(crate) grads: BatchGrads,
}

impl GcnTrainer {
    pub(crate) fn new(preps: &[&PreparedGcn], n: usize, n_classes: usize, hidden: usize) -> Self {
        let n_graphs = preps.len();
        let node_rows = n_graphs * n;
        let mut xcat_all = Mat::zeros(node_rows, 2 * n);
        let mut labels = Vec::with_capacity(n_graphs);
        for (gi, prep) in preps.iter().enumerate() {
            for r in 0..n {
                xcat_all
                    .row_mut(gi * n + r)
                    .copy_from_slice(prep.xcat.row(r));
            }
            labels.push(prep.label);
        }

        GcnTrainer {
            n,
            labels,
            xcat_all,
            z1: Mat::zeros(node_rows, hidden),
            h1: Mat::zeros(node_rows, hidden),
            mult1: vec![1.0; node_rows * hidden],
            hcat: Mat::zeros(node_rows, 2 * hidden),
            wcat1: Mat::zeros(2 * n, hidden),
            wcat2: Mat::zeros(2 * hidden, n_classes),
            z2: Mat::zeros(node_rows, n_classes),
            logits: Mat::zeros(n_graphs, n_classes),
            dlogits: Mat::zeros(n_graphs, n_classes),
            dz2: Mat::zeros(node_rows, n_classes),
            gcat2: Mat::zeros(2 * hidden, n_classes),
            dhcat: Mat::zeros(node_rows, 2 * hidden),
            dh1: Mat::zeros(node_rows, hidden),
            gcat1: Mat::zeros(2 * n, hidden),
            grads: BatchGrads {
                w0e: Mat::zeros(n, hidden),
                w1e: Mat::zeros(n, hidden),
                w0n: Mat::zeros(hidden, n_classes),
                w1n: Mat::zeros(hidden, n_classes),
                wc: Mat::zeros(0, 0),
                bias: Mat::zeros(1, n_classes),
            },
        }
    }

    pub(crate) fn epoch(
        &mut self,
        preps: &[&PreparedGcn],
        p: &GcnParams,
        mut masks: Option<(f64, &mut MaskStream)>,
    ) -> (f64, f64) {
        let n_graphs = preps.len();
        let n = self.n;
        let hidden = p.hidden_dim();

        for r in 0..n {
            self.wcat1.row_mut(r).copy_from_slice(p.layer1.w0.row(r));
            self.wcat1
                .row_mut(n + r)
                .copy_from_slice(p.layer1.w1.row(r));
        }
        for r in 0..hidden {
            self.wcat2.row_mut(r).copy_from_slice(p.layer2.w0.row(r));
            self.wcat2
                .row_mut(hidden + r)
                .copy_from_slice(p.layer2.w1.row(r));
        }

        gemm(
            &mut self.z1,
            0.0,
            1.0,
            &self.xcat_all,
            false,
            &self.wcat1,
            false,
        );
        activate(&self.z1, &mut self.h1, &mut self.mult1, &mut masks);

        // hcat = [h1 | A h1] per graph.
        for r in 0..self.h1.rows() {
            let (dst, src) = (self.hcat.row_mut(r), self.h1.row(r));
            dst[..hidden].copy_from_slice(src);
        }
        for (gi, prep) in preps.iter().enumerate() {
            gemm_raw(
                n,
                n,
                hidden,
                1.0,
                prep.a.as_slice(),
                n,
                false,
                &self.h1.as_slice()[gi * n * hidden..],
                hidden,
                false,
                0.0,
                &mut self.hcat.as_mut_slice()[gi * n * 2 * hidden + hidden..],
                2 * hidden,
            );
        }

        gemm(
            &mut self.z2,
            0.0,
            1.0,
            &self.hcat,
            false,
            &self.wcat2,
            false,
        );
        let inv_n = 1.0 / n as f64;
        for gi in 0..n_graphs {
            let dst = self.logits.row_mut(gi);
            dst.copy_from_slice(p.bias.row(0));
            for r in 0..n {
                for (acc, &v) in dst.iter_mut().zip(self.z2.row(gi * n + r)) {
                    *acc += v * inv_n;
                }
            }
        }

        let (loss, acc) = loss_and_dlogits(&self.logits, &self.labels, &mut self.dlogits);

        for c in 0..self.grads.bias.cols() {
            let mut sum = 0.0;
            for gi in 0..n_graphs {
                sum += self.dlogits[(gi, c)];
            }
            self.grads.bias[(0, c)] = sum;
        }
        for gi in 0..n_graphs {
            for r in 0..n {
                let dst = self.dz2.row_mut(gi * n + r);
                for (d, &s) in dst.iter_mut().zip(self.dlogits.row(gi)) {
                    *d = s * inv_n;
                }
            }
        }

        gemm(
            &mut self.gcat2,
            0.0,
            1.0,
            &self.hcat,
            true,
            &self.dz2,
            false,
        );
        for r in 0..hidden {
            self.grads.w0n.row_mut(r).copy_from_slice(self.gcat2.row(r));
            self.grads
                .w1n
                .row_mut(r)
                .copy_from_slice(self.gcat2.row(hidden + r));
        }
        gemm(
            &mut self.dhcat,
            0.0,
            1.0,
            &self.dz2,
            false,
            &self.wcat2,
            true,
        );

        for r in 0..self.dh1.rows() {
            let (dst, src) = (self.dh1.row_mut(r), self.dhcat.row(r));
            dst.copy_from_slice(&src[..hidden]);
        }
        for (gi, prep) in preps.iter().enumerate() {
            gemm_raw(
                n,
                n,
                hidden,
                1.0,
                prep.a.as_slice(),
                n,
                true,
                &self.dhcat.as_slice()[gi * n * 2 * hidden + hidden..],
                2 * hidden,
                false,
                1.0,
                &mut self.dh1.as_mut_slice()[gi * n * hidden..],
                hidden,
            );
        }
        backprop_activation(&mut self.dh1, &self.z1, &self.mult1);

        gemm(
            &mut self.gcat1,
            0.0,
            1.0,
            &self.xcat_all,
            true,
            &self.dh1,
            false,
        );
        for r in 0..n {
            self.grads.w0e.row_mut(r).copy_from_slice(self.gcat1.row(r));
            self.grads
                .w1e
                .row_mut(r)
                .copy_from_slice(self.gcat1.row(n + r));
        }

        (loss, acc)
    }
}

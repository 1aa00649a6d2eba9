//! Per-graph forward passes, the loss, and reverse-mode gradients.

#[allow(unused_imports)]
use num_traits::Float;

use alloc::vec::Vec;

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::graph::{incidence_matrix, phi_project, BrainGraph, IncidenceMatrix};
use crate::matrix::Mat;
use crate::model::{GcnParams, LayerWeights, Mode, ModelParams};

/// Per-graph inputs of the co-embedding model, computed once.
pub(crate) struct Prepared {
    /// Sorted correlation profiles, `N x N`.
    pub(crate) x: Mat,
    /// `B^T x`: endpoint-feature sums per edge, `N_e x N`.
    pub(crate) s: Mat,
    /// Initial edge state: edge connectivity row means, `N_e x 1`.
    pub(crate) he0: Mat,
    /// Projected edge connectivity, `N x N`.
    pub(crate) phi: Mat,
    pub(crate) incidence: IncidenceMatrix,
    pub(crate) label: usize,
}

/// Per-graph inputs of the GCN baseline.
pub(crate) struct PreparedGcn {
    /// `[X | A X]` stacked column-wise, `N x 2N`.
    pub(crate) xcat: Mat,
    /// Adjacency, `N x N`.
    pub(crate) a: Mat,
    pub(crate) label: usize,
}

/// Each region's correlation profile, sorted descending. Sorting makes the
/// feature axis independent of region numbering, which is what lets a
/// region permutation commute with the whole network.
fn sorted_feature_rows(values: &Mat) -> Mat {
    let n = values.rows();
    let mut x = values.clone();
    for r in 0..n {
        x.row_mut(r).sort_unstable_by(|a, b| b.total_cmp(a));
    }
    x
}

pub(crate) fn prepare(g: &BrainGraph) -> Result<Prepared> {
    let incidence = incidence_matrix(g.n_regions())?;
    let x = sorted_feature_rows(g.node_fc().values());
    let s = incidence.gather_edges(&x)?;
    let he0 = Mat::from_vec(g.n_edges(), 1, g.edge_fc().values().row_means());
    let phi = phi_project(g.edge_fc(), &incidence)?;
    Ok(Prepared {
        x,
        s,
        he0,
        phi,
        incidence,
        label: g.label(),
    })
}

pub(crate) fn prepare_gcn(g: &BrainGraph) -> Result<PreparedGcn> {
    let x = sorted_feature_rows(g.node_fc().values());
    let a = g.adjacency().clone();
    let ax = a.matmul(&x);
    let n = x.rows();
    let mut xcat = Mat::zeros(n, 2 * n);
    for r in 0..n {
        let dst = xcat.row_mut(r);
        dst[..n].copy_from_slice(x.row(r));
        dst[n..].copy_from_slice(ax.row(r));
    }
    Ok(PreparedGcn {
        xcat,
        a,
        label: g.label(),
    })
}

fn validate_co_shapes(p: &ModelParams, n_regions: usize) -> Result<()> {
    let op = "co-embedding forward";
    let f_mid = p.edge_layer.w0.cols();
    if p.edge_layer.w0.rows() != 1 {
        return Err(Error::ShapeMismatch {
            op,
            expected: (1, f_mid),
            got: p.edge_layer.w0.dims(),
        });
    }
    if p.edge_layer.w1.dims() != (n_regions, f_mid) {
        return Err(Error::ShapeMismatch {
            op,
            expected: (n_regions, f_mid),
            got: p.edge_layer.w1.dims(),
        });
    }
    let hidden = p.node_layer.w0.cols();
    if p.node_layer.w0.dims() != (f_mid, hidden) || p.node_layer.w1.dims() != (f_mid, hidden) {
        return Err(Error::ShapeMismatch {
            op,
            expected: (f_mid, hidden),
            got: p.node_layer.w1.dims(),
        });
    }
    if p.classifier.rows() != hidden {
        return Err(Error::ShapeMismatch {
            op,
            expected: (hidden, p.classifier.cols()),
            got: p.classifier.dims(),
        });
    }
    if p.bias.dims() != (1, p.classifier.cols()) {
        return Err(Error::ShapeMismatch {
            op,
            expected: (1, p.classifier.cols()),
            got: p.bias.dims(),
        });
    }
    Ok(())
}

fn validate_gcn_shapes(p: &GcnParams, n_regions: usize) -> Result<()> {
    let op = "gcn forward";
    let hidden = p.layer1.w0.cols();
    if p.layer1.w0.dims() != (n_regions, hidden) || p.layer1.w1.dims() != (n_regions, hidden) {
        return Err(Error::ShapeMismatch {
            op,
            expected: (n_regions, hidden),
            got: p.layer1.w1.dims(),
        });
    }
    let classes = p.layer2.w0.cols();
    if p.layer2.w0.dims() != (hidden, classes) || p.layer2.w1.dims() != (hidden, classes) {
        return Err(Error::ShapeMismatch {
            op,
            expected: (hidden, classes),
            got: p.layer2.w1.dims(),
        });
    }
    if p.bias.dims() != (1, classes) {
        return Err(Error::ShapeMismatch {
            op,
            expected: (1, classes),
            got: p.bias.dims(),
        });
    }
    Ok(())
}

fn apply_dropout(m: &mut Mat, p: f64, rng: &mut ChaCha8Rng) {
    if p <= 0.0 {
        return;
    }
    let inv_keep = 1.0 / (1.0 - p);
    for v in m.as_mut_slice() {
        *v = if rng.random::<f64>() >= p {
            *v * inv_keep
        } else {
            0.0
        };
    }
}

struct Trace {
    z1: Mat,
    hv1: Mat,
    phv: Mat,
    z2: Mat,
    h: Vec<f64>,
    logits: Vec<f64>,
}

fn forward_traced(
    prep: &Prepared,
    p: &ModelParams,
    mode: Mode,
    rng: &mut ChaCha8Rng,
) -> Result<Trace> {
    let n = prep.x.rows();
    validate_co_shapes(p, n)?;

    let mut z1 = prep.he0.matmul(&p.edge_layer.w0);
    z1.add_assign(&prep.s.matmul(&p.edge_layer.w1));
    let mut he = z1.clone();
    for v in he.as_mut_slice() {
        *v = v.max(0.0);
    }
    if let Mode::Train { dropout } = mode {
        apply_dropout(&mut he, dropout, rng);
    }

    let mut hv1 = prep.incidence.scatter_nodes(&he)?;
    hv1.scale(1.0 / (n - 1) as f64);
    let phv = prep.phi.matmul(&hv1);

    let mut z2 = hv1.matmul(&p.node_layer.w0);
    z2.add_assign(&phv.matmul(&p.node_layer.w1));
    let mut hv2 = z2.clone();
    for v in hv2.as_mut_slice() {
        *v = v.max(0.0);
    }
    if let Mode::Train { dropout } = mode {
        apply_dropout(&mut hv2, dropout, rng);
    }

    let h = hv2.col_means();
    let logits = affine_classify(&h, &p.classifier, &p.bias);
    Ok(Trace {
        z1,
        hv1,
        phv,
        z2,
        h,
        logits,
    })
}

pub(crate) fn affine_classify(h: &[f64], classifier: &Mat, bias: &Mat) -> Vec<f64> {
    let c = classifier.cols();
    let mut logits = bias.row(0).to_vec();
    for (k, &hk) in h.iter().enumerate() {
        for (l, &w) in classifier.row(k).iter().enumerate().take(c) {
            logits[l] += hk * w;
        }
    }
    logits
}

/// Class logits of the co-embedding model for one graph.
///
/// In [`Mode::Train`] dropout masks are drawn from `rng`; in [`Mode::Eval`]
/// the pass is deterministic and `rng` is untouched.
pub fn forward(
    g: &BrainGraph,
    p: &ModelParams,
    mode: Mode,
    rng: &mut ChaCha8Rng,
) -> Result<Vec<f64>> {
    let prep = prepare(g)?;
    Ok(forward_traced(&prep, p, mode, rng)?.logits)
}

pub(crate) fn forward_prepared_eval(prep: &Prepared, p: &ModelParams) -> Result<Vec<f64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    Ok(forward_traced(prep, p, Mode::Eval, &mut rng)?.logits)
}

/// Class logits of the plain GCN baseline for one graph.
pub fn forward_gcn(
    g: &BrainGraph,
    p: &GcnParams,
    mode: Mode,
    rng: &mut ChaCha8Rng,
) -> Result<Vec<f64>> {
    let prep = prepare_gcn(g)?;
    forward_gcn_prepared(&prep, p, mode, rng)
}

pub(crate) fn forward_gcn_prepared_eval(prep: &PreparedGcn, p: &GcnParams) -> Result<Vec<f64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    forward_gcn_prepared(prep, p, Mode::Eval, &mut rng)
}

pub(crate) fn forward_gcn_prepared(
    prep: &PreparedGcn,
    p: &GcnParams,
    mode: Mode,
    rng: &mut ChaCha8Rng,
) -> Result<Vec<f64>> {
    let n = prep.a.rows();
    validate_gcn_shapes(p, n)?;

    // xcat * [w0; w1] done in two halves to avoid assembling the stack.
    let x = sub_cols(&prep.xcat, 0, n);
    let ax = sub_cols(&prep.xcat, n, n);
    let mut z1 = x.matmul(&p.layer1.w0);
    z1.add_assign(&ax.matmul(&p.layer1.w1));
    for v in z1.as_mut_slice() {
        *v = v.max(0.0);
    }
    if let Mode::Train { dropout } = mode {
        apply_dropout(&mut z1, dropout, rng);
    }

    let ah1 = prep.a.matmul(&z1);
    let mut z2 = z1.matmul(&p.layer2.w0);
    z2.add_assign(&ah1.matmul(&p.layer2.w1));
    for r in 0..z2.rows() {
        let row = z2.row_mut(r);
        for (v, b) in row.iter_mut().zip(p.bias.row(0)) {
            *v += b;
        }
    }
    Ok(z2.col_means())
}

fn sub_cols(m: &Mat, start: usize, width: usize) -> Mat {
    let mut out = Mat::zeros(m.rows(), width);
    for r in 0..m.rows() {
        out.row_mut(r)
            .copy_from_slice(&m.row(r)[start..start + width]);
    }
    out
}

/// Numerically stable softmax.
pub fn softmax(logits: &[f64]) -> Vec<f64> {
    let m = logits.iter().fold(f64::NEG_INFINITY, |a, &b| a.max(b));
    let exps: Vec<f64> = logits.iter().map(|l| (l - m).exp()).collect();
    let z: f64 = exps.iter().sum();
    exps.into_iter().map(|e| e / z).collect()
}

/// Softmax cross-entropy against `label`, via a stable log-sum-exp.
///
/// Weight decay is not part of this value; it enters as parameter shrinkage
/// inside the optimizer step.
pub fn loss(logits: &[f64], label: usize) -> f64 {
    assert!(label < logits.len(), "label out of range");
    let m = logits.iter().fold(f64::NEG_INFINITY, |a, &b| a.max(b));
    let sum: f64 = logits.iter().map(|l| (l - m).exp()).sum();
    m + sum.ln() - logits[label]
}

pub(crate) fn argmax(xs: &[f64]) -> usize {
    let mut best = 0;
    for (i, v) in xs.iter().enumerate().skip(1) {
        if *v > xs[best] {
            best = i;
        }
    }
    best
}

/// Loss gradients with respect to every co-embedding parameter.
#[derive(Debug, Clone, PartialEq)]
pub struct Gradients {
    pub edge_layer: LayerWeights,
    pub node_layer: LayerWeights,
    pub classifier: Mat,
    pub bias: Mat,
}

impl Gradients {
    /// Same fixed tensor order as [`ModelParams::tensors`].
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
}

/// Exact reverse-mode gradients of [`loss`] after an eval-mode (dropout-free)
/// forward pass on one graph.
pub fn gradients(g: &BrainGraph, label: usize, p: &ModelParams) -> Result<Gradients> {
    let prep = prepare(g)?;
    gradients_prepared(&prep, label, p)
}

pub(crate) fn gradients_prepared(
    prep: &Prepared,
    label: usize,
    p: &ModelParams,
) -> Result<Gradients> {
    if label >= p.n_classes() {
        return Err(Error::InvalidClass {
            class: label,
            n_classes: p.n_classes(),
        });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    let t = forward_traced(prep, p, Mode::Eval, &mut rng)?;
    let n = prep.x.rows();

    // d loss / d logits.
    let mut dlogits = softmax(&t.logits);
    dlogits[label] -= 1.0;

    let g_bias = Mat::from_vec(1, dlogits.len(), dlogits.clone());
    let g_classifier = Mat::from_fn(p.hidden_dim(), p.n_classes(), |k, c| t.h[k] * dlogits[c]);

    // Through the mean pool: every node row receives dh / N.
    let dh: Vec<f64> = (0..p.hidden_dim())
        .map(|k| {
            p.classifier
                .row(k)
                .iter()
                .zip(&dlogits)
                .map(|(w, d)| w * d)
                .sum::<f64>()
        })
        .collect();
    let inv_n = 1.0 / n as f64;
    let mut dz2 = Mat::from_fn(n, p.hidden_dim(), |_, k| dh[k] * inv_n);
    for (v, z) in dz2.as_mut_slice().iter_mut().zip(t.z2.as_slice()) {
        if *z <= 0.0 {
            *v = 0.0;
        }
    }

    let g_w0n = t.hv1.t_matmul(&dz2);
    let g_w1n = t.phv.t_matmul(&dz2);

    let mut dhv1 = dz2.matmul_t(&p.node_layer.w0);
    dhv1.add_assign(&prep.phi.t_matmul(&dz2.matmul_t(&p.node_layer.w1)));

    let mut dz1 = prep.incidence.gather_edges(&dhv1)?;
    dz1.scale(1.0 / (n - 1) as f64);
    for (v, z) in dz1.as_mut_slice().iter_mut().zip(t.z1.as_slice()) {
        if *z <= 0.0 {
            *v = 0.0;
        }
    }

    let g_w1e = prep.s.t_matmul(&dz1);
    let g_w0e = prep.he0.t_matmul(&dz1);

    Ok(Gradients {
        edge_layer: LayerWeights {
            w0: g_w0e,
            w1: g_w1e,
        },
        node_layer: LayerWeights {
            w0: g_w0n,
            w1: g_w1n,
        },
        classifier: g_classifier,
        bias: g_bias,
    })
}

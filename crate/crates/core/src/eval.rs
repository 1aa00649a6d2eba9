//! Stratified k-fold cross-validation and classification metrics.
//!
//! Folds are stratified: each class's members are shuffled with a seeded
//! generator and dealt round-robin starting from the least-loaded fold, so
//! per-fold class counts and fold sizes both stay within one subject of an
//! even split. Precision and F1 are macro-averaged over the classes that
//! occur in the predictions or the labels.

#[allow(unused_imports)]
use num_traits::Float;

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::vec;
use alloc::vec::Vec;

use rand::seq::SliceRandom;

use crate::error::{Error, Result};
use crate::graph::BrainGraph;
use crate::model::{
    argmax, check_dataset, forward_gcn_prepared_eval, forward_prepared_eval, prepare, prepare_gcn,
    train_co_prepared, train_gcn_prepared, ModelKind, Prepared, PreparedGcn, TrainConfig,
};
use crate::seed;

/// A deterministic partition of dataset indices into k disjoint folds.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FoldPlan {
    folds: Vec<Vec<usize>>,
    seed: u64,
}

impl FoldPlan {
    pub fn k(&self) -> usize {
        self.folds.len()
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Test indices per fold, each sorted ascending.
    pub fn folds(&self) -> &[Vec<usize>] {
        &self.folds
    }

    /// All indices outside fold `fold`, sorted ascending.
    pub fn train_indices(&self, fold: usize) -> Vec<usize> {
        let mut out: Vec<usize> = self
            .folds
            .iter()
            .enumerate()
            .filter(|&(f, _)| f != fold)
            .flat_map(|(_, idxs)| idxs.iter().copied())
            .collect();
        out.sort_unstable();
        out
    }
}

/// Splits `labels` into `k` stratified folds, deterministic per `seed`.
///
/// Each class is shuffled independently and dealt over the folds in
/// least-loaded-first order, which keeps every fold within one member of an
/// even share of each class (and of the total) even when class sizes do not
/// divide evenly.
pub fn stratified_kfold(labels: &[usize], k: usize, seed: u64) -> Result<FoldPlan> {
    if k < 2 {
        return Err(Error::InvalidFoldCount { k });
    }
    if labels.len() < k {
        return Err(Error::TooFewSamples {
            n_samples: labels.len(),
            k,
        });
    }

    let mut by_class: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for (i, &c) in labels.iter().enumerate() {
        by_class.entry(c).or_default().push(i);
    }

    let mut rng = seed::rng(seed, "stratified-kfold");
    let mut folds: Vec<Vec<usize>> = vec![Vec::new(); k];
    for members in by_class.values() {
        let mut members = members.clone();
        members.shuffle(&mut rng);
        let mut order: Vec<usize> = (0..k).collect();
        order.sort_by_key(|&f| (folds[f].len(), f));
        for (pos, idx) in members.into_iter().enumerate() {
            folds[order[pos % k]].push(idx);
        }
    }
    for fold in &mut folds {
        fold.sort_unstable();
    }
    Ok(FoldPlan { folds, seed })
}

/// Accuracy, macro precision, and macro F1 of one train/test split.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MetricsReport {
    pub accuracy: f64,
    pub precision: f64,
    pub f1: f64,
}

/// Scores predictions against labels.
///
/// Precision and F1 are averaged over the classes appearing in either
/// sequence; a class with no predicted positives contributes precision 0,
/// and a zero denominator anywhere contributes 0 rather than NaN.
pub fn metrics(preds: &[usize], labels: &[usize]) -> Result<MetricsReport> {
    if preds.len() != labels.len() {
        return Err(Error::LengthMismatch {
            what: "predictions vs labels",
            left: preds.len(),
            right: labels.len(),
        });
    }
    if preds.is_empty() {
        return Err(Error::EmptyDataset);
    }

    let n = preds.len() as f64;
    let correct = preds.iter().zip(labels).filter(|(p, l)| p == l).count();

    let classes: BTreeSet<usize> = preds.iter().chain(labels).copied().collect();
    let mut precision_sum = 0.0;
    let mut f1_sum = 0.0;
    for &c in &classes {
        let mut tp = 0usize;
        let mut fp = 0usize;
        let mut fn_ = 0usize;
        for (&p, &l) in preds.iter().zip(labels) {
            match (p == c, l == c) {
                (true, true) => tp += 1,
                (true, false) => fp += 1,
                (false, true) => fn_ += 1,
                (false, false) => {}
            }
        }
        let precision = if tp + fp > 0 {
            tp as f64 / (tp + fp) as f64
        } else {
            0.0
        };
        let recall = if tp + fn_ > 0 {
            tp as f64 / (tp + fn_) as f64
        } else {
            0.0
        };
        let f1 = if precision + recall > 0.0 {
            2.0 * precision * recall / (precision + recall)
        } else {
            0.0
        };
        precision_sum += precision;
        f1_sum += f1;
    }

    let k = classes.len() as f64;
    Ok(MetricsReport {
        accuracy: correct as f64 / n,
        precision: precision_sum / k,
        f1: f1_sum / k,
    })
}

/// Cross-validation results: per-fold metrics plus their mean and
/// population standard deviation.
#[derive(Debug, Clone, PartialEq)]
pub struct CvReport {
    pub folds: Vec<MetricsReport>,
    pub test_sizes: Vec<usize>,
    pub mean: MetricsReport,
    pub std: MetricsReport,
    pub k: usize,
    pub seed: u64,
}

/// Mean and population std of each metric over the folds.
pub fn summarize(folds: &[MetricsReport]) -> (MetricsReport, MetricsReport) {
    let n = folds.len() as f64;
    let mean_of = |f: fn(&MetricsReport) -> f64| folds.iter().map(f).sum::<f64>() / n;
    let mean = MetricsReport {
        accuracy: mean_of(|m| m.accuracy),
        precision: mean_of(|m| m.precision),
        f1: mean_of(|m| m.f1),
    };
    let std_of = |f: fn(&MetricsReport) -> f64, mu: f64| {
        (folds.iter().map(|m| (f(m) - mu).powi(2)).sum::<f64>() / n).sqrt()
    };
    let std = MetricsReport {
        accuracy: std_of(|m| m.accuracy, mean.accuracy),
        precision: std_of(|m| m.precision, mean.precision),
        f1: std_of(|m| m.f1, mean.f1),
    };
    (mean, std)
}

enum PreparedSet {
    Co(Vec<Prepared>),
    Gcn(Vec<PreparedGcn>),
}

/// Class count of a training subset; rejects single-class subsets.
fn subset_classes(labels: &[usize], idxs: &[usize]) -> Result<usize> {
    let first = labels[idxs[0]];
    let max = idxs.iter().map(|&i| labels[i]).max().unwrap();
    if idxs.iter().all(|&i| labels[i] == first) {
        return Err(Error::SingleClass);
    }
    Ok(max + 1)
}

/// Stratified k-fold cross-validation of the chosen model kind.
///
/// Each fold trains on the other k-1 folds from a fresh initialization
/// seeded per fold (derived from `seed`, overriding `cfg.seed`) and is
/// scored on the held-out subjects.
pub fn cross_validate(
    dataset: &[BrainGraph],
    kind: ModelKind,
    cfg: &TrainConfig,
    k: usize,
    seed: u64,
) -> Result<CvReport> {
    cfg.validate()?;
    let (n, _) = check_dataset(dataset)?;
    let labels: Vec<usize> = dataset.iter().map(|g| g.label()).collect();
    let plan = stratified_kfold(&labels, k, seed)?;

    let prepared = match kind {
        ModelKind::CoEmbedding => {
            PreparedSet::Co(dataset.iter().map(prepare).collect::<Result<Vec<_>>>()?)
        }
        ModelKind::GcnBaseline => PreparedSet::Gcn(
            dataset
                .iter()
                .map(prepare_gcn)
                .collect::<Result<Vec<_>>>()?,
        ),
    };

    let mut folds = Vec::with_capacity(k);
    let mut test_sizes = Vec::with_capacity(k);
    for (fold, test_idx) in plan.folds().iter().enumerate() {
        let train_idx = plan.train_indices(fold);
        assert!(
            test_idx.iter().all(|i| !train_idx.contains(i)),
            "train/test overlap in fold {fold}"
        );

        let mut fold_cfg = cfg.clone();
        fold_cfg.seed = seed::derive_indexed(seed, "cv-train", fold as u64);
        let n_classes = subset_classes(&labels, &train_idx)?;

        let preds: Vec<usize> = match &prepared {
            PreparedSet::Co(preps) => {
                let train_refs: Vec<&Prepared> = train_idx.iter().map(|&i| &preps[i]).collect();
                let (params, _) = train_co_prepared(&train_refs, &fold_cfg, n, n_classes)?;
                test_idx
                    .iter()
                    .map(|&i| forward_prepared_eval(&preps[i], &params).map(|l| argmax(&l)))
                    .collect::<Result<_>>()?
            }
            PreparedSet::Gcn(preps) => {
                let train_refs: Vec<&PreparedGcn> = train_idx.iter().map(|&i| &preps[i]).collect();
                let (params, _) = train_gcn_prepared(&train_refs, &fold_cfg, n, n_classes)?;
                test_idx
                    .iter()
                    .map(|&i| forward_gcn_prepared_eval(&preps[i], &params).map(|l| argmax(&l)))
                    .collect::<Result<_>>()?
            }
        };

        let truth: Vec<usize> = test_idx.iter().map(|&i| labels[i]).collect();
        folds.push(metrics(&preds, &truth)?);
        test_sizes.push(test_idx.len());
    }

    let (mean, std) = summarize(&folds);
    Ok(CvReport {
        folds,
        test_sizes,
        mean,
        std,
        k,
        seed,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::synth::{generate_dataset, SynthConfig};

    fn counts_per_class(fold: &[usize], labels: &[usize]) -> BTreeMap<usize, usize> {
        let mut out = BTreeMap::new();
        for &i in fold {
            *out.entry(labels[i]).or_insert(0) += 1;
        }
        out
    }

    #[test]
    fn balanced_hundred_splits_exactly() {
        let labels: Vec<usize> = (0..100).map(|i| i % 2).collect();
        let plan = stratified_kfold(&labels, 10, 3).unwrap();
        for fold in plan.folds() {
            assert_eq!(fold.len(), 10);
            let counts = counts_per_class(fold, &labels);
            assert_eq!(counts[&0], 5);
            assert_eq!(counts[&1], 5);
        }
    }

    #[test]
    fn uneven_sizes_stay_within_one() {
        let labels: Vec<usize> = (0..103).map(|i| i % 2).collect();
        let plan = stratified_kfold(&labels, 10, 9).unwrap();

        let mut seen = BTreeSet::new();
        for fold in plan.folds() {
            assert!(fold.len() == 10 || fold.len() == 11, "size {}", fold.len());
            for &i in fold {
                assert!(seen.insert(i), "index {i} in two folds");
            }
            for (_, c) in counts_per_class(fold, &labels) {
                assert!((5..=6).contains(&c));
            }
        }
        assert_eq!(seen.len(), 103);
        assert_eq!(*seen.iter().max().unwrap(), 102);
    }

    #[test]
    fn plans_are_deterministic_per_seed() {
        let labels: Vec<usize> = (0..40).map(|i| i % 3).collect();
        let a = stratified_kfold(&labels, 5, 11).unwrap();
        let b = stratified_kfold(&labels, 5, 11).unwrap();
        assert_eq!(a, b);
        let c = stratified_kfold(&labels, 5, 12).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn train_indices_complement_the_fold() {
        let labels: Vec<usize> = (0..30).map(|i| i % 2).collect();
        let plan = stratified_kfold(&labels, 3, 4).unwrap();
        for fold in 0..plan.k() {
            let train = plan.train_indices(fold);
            assert_eq!(train.len() + plan.folds()[fold].len(), 30);
            for i in &train {
                assert!(!plan.folds()[fold].contains(i));
            }
        }
    }

    #[test]
    fn fold_plan_rejects_bad_arguments() {
        let labels = vec![0, 1, 0, 1];
        assert!(matches!(
            stratified_kfold(&labels, 1, 0),
            Err(Error::InvalidFoldCount { k: 1 })
        ));
        assert!(matches!(
            stratified_kfold(&labels, 5, 0),
            Err(Error::TooFewSamples { n_samples: 4, k: 5 })
        ));
    }

    #[test]
    fn perfect_predictions_score_one() {
        let r = metrics(&[0, 1, 2, 1], &[0, 1, 2, 1]).unwrap();
        assert_eq!(r.accuracy, 1.0);
        assert_eq!(r.precision, 1.0);
        assert_eq!(r.f1, 1.0);
    }

    /// Two-class confusion worked by hand: class 0 has precision 1 and
    /// recall 2/3 (F1 0.8), class 1 has precision 1/2 and recall 1 (F1 2/3).
    #[test]
    fn mixed_predictions_match_confusion_matrix() {
        let r = metrics(&[1, 1, 0, 0], &[1, 0, 0, 0]).unwrap();
        assert!((r.accuracy - 0.75).abs() < 1e-15);
        assert!((r.precision - 0.75).abs() < 1e-15);
        assert!((r.f1 - (0.8 + 2.0 / 3.0) / 2.0).abs() < 1e-15);
    }

    #[test]
    fn all_wrong_scores_zero() {
        let r = metrics(&[1, 0, 1, 0], &[0, 1, 0, 1]).unwrap();
        assert_eq!(r.accuracy, 0.0);
        assert_eq!(r.precision, 0.0);
        assert_eq!(r.f1, 0.0);
    }

    #[test]
    fn absent_classes_are_excluded() {
        // Only class 2 occurs; macro averages run over that single class.
        let r = metrics(&[2, 2], &[2, 2]).unwrap();
        assert_eq!(r.precision, 1.0);
        // Class 3 occurs only in predictions: precision 0, recall 0.
        let r = metrics(&[3, 2], &[2, 2]).unwrap();
        assert_eq!(r.accuracy, 0.5);
        assert_eq!(r.precision, 0.5);
    }

    #[test]
    fn metrics_rejects_bad_input() {
        assert!(matches!(
            metrics(&[0, 1], &[0]),
            Err(Error::LengthMismatch {
                left: 2,
                right: 1,
                ..
            })
        ));
        assert!(matches!(metrics(&[], &[]), Err(Error::EmptyDataset)));
    }

    fn tiny_dataset() -> Vec<crate::graph::BrainGraph> {
        let cfg = SynthConfig {
            n_regions: 8,
            t_len: 40,
            ..SynthConfig::default()
        };
        generate_dataset(&cfg, 9).unwrap()
    }

    fn tiny_cfg() -> TrainConfig {
        TrainConfig {
            epochs: 5,
            hidden_dim: 8,
            dropout: 0.2,
            ..TrainConfig::default()
        }
    }

    #[test]
    fn cross_validation_is_deterministic() {
        let data = tiny_dataset();
        let a = cross_validate(&data, ModelKind::CoEmbedding, &tiny_cfg(), 3, 17).unwrap();
        let b = cross_validate(&data, ModelKind::CoEmbedding, &tiny_cfg(), 3, 17).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.k, 3);
        assert_eq!(a.seed, 17);
        assert_eq!(a.folds.len(), 3);
        assert_eq!(a.test_sizes, vec![6, 6, 6]);
    }

    #[test]
    fn cross_validation_summary_matches_folds() {
        let data = tiny_dataset();
        for kind in [ModelKind::CoEmbedding, ModelKind::GcnBaseline] {
            let r = cross_validate(&data, kind, &tiny_cfg(), 3, 5).unwrap();
            let (mean, std) = summarize(&r.folds);
            assert!((r.mean.accuracy - mean.accuracy).abs() < 1e-12);
            assert!((r.std.f1 - std.f1).abs() < 1e-12);
            for m in r.folds.iter().chain([&r.mean, &r.std]) {
                for v in [m.accuracy, m.precision, m.f1] {
                    assert!((0.0..=1.0).contains(&v), "metric {v} out of range");
                }
            }
        }
    }
}

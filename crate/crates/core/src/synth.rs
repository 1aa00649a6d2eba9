//! Synthetic labeled time series with class-dependent community structure.
//!
//! Each subject is drawn from a Gaussian latent-factor model: region `i`
//! mixes its community's shared signal with private noise,
//!
//! ```text
//! x_i(t) = sqrt(c) * f_{g(i)}(t) + sqrt(1 - c) * noise_std * eps_i(t)
//! ```
//!
//! with unit-variance `f_k` and `eps_i`, communities assigned round-robin
//! (`g(i) = i mod n_communities`), and the coupling `c` chosen per class.
//! At the default `noise_std = 1` the mixture has unit variance and the
//! expected intra-community correlation equals `c`, so downstream
//! connectivity estimates can be checked against known targets.

#[allow(unused_imports)]
use num_traits::Float;

use alloc::vec::Vec;

use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::graph::{build_graph, BrainGraph};
use crate::matrix::Mat;
use crate::seed;
use crate::signal::TimeSeriesMatrix;

/// Parameters of the generative model.
#[derive(Debug, Clone, PartialEq)]
pub struct SynthConfig {
    /// Regions per subject.
    pub n_regions: usize,
    /// Time samples per subject.
    pub t_len: usize,
    /// Number of shared latent signals.
    pub n_communities: usize,
    /// Coupling strength per class, each in `[0, 1)`, pairwise distinct.
    pub coupling_by_class: Vec<f64>,
    /// Scale of the private noise term.
    pub noise_std: f64,
    /// Base seed; subject `s` uses `seed + s`.
    pub seed: u64,
}

impl Default for SynthConfig {
    fn default() -> Self {
        SynthConfig {
            n_regions: 20,
            t_len: 150,
            n_communities: 2,
            coupling_by_class: alloc::vec![0.6, 0.3],
            noise_std: 1.0,
            seed: 42,
        }
    }
}

impl SynthConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n_regions < 2 {
            return Err(Error::InvalidConfig {
                reason: "n_regions must be at least 2",
            });
        }
        if self.t_len < 2 {
            return Err(Error::InvalidConfig {
                reason: "t_len must be at least 2",
            });
        }
        if self.n_communities == 0 || self.n_communities > self.n_regions {
            return Err(Error::InvalidConfig {
                reason: "n_communities must be in 1..=n_regions",
            });
        }
        if self.coupling_by_class.is_empty() {
            return Err(Error::InvalidConfig {
                reason: "coupling_by_class must not be empty",
            });
        }
        if self
            .coupling_by_class
            .iter()
            .any(|&c| !c.is_finite() || !(0.0..1.0).contains(&c))
        {
            return Err(Error::InvalidConfig {
                reason: "couplings must lie in [0, 1)",
            });
        }
        for (a, &ca) in self.coupling_by_class.iter().enumerate() {
            if self.coupling_by_class[a + 1..].contains(&ca) {
                return Err(Error::InvalidConfig {
                    reason: "couplings must be pairwise distinct",
                });
            }
        }
        if !(self.noise_std > 0.0) || !self.noise_std.is_finite() {
            return Err(Error::InvalidConfig {
                reason: "noise_std must be a positive finite number",
            });
        }
        Ok(())
    }

    /// Number of classes the config can label.
    pub fn n_classes(&self) -> usize {
        self.coupling_by_class.len()
    }
}

/// One subject's `T x N` series for the given class, deterministic in `seed`.
///
/// Draw order is fixed: the `n_communities` latent signals first (community
/// 0's `T` samples, then community 1's, ...), then each region's private
/// noise in region order.
pub fn generate_subject(cfg: &SynthConfig, class: usize, seed: u64) -> Result<TimeSeriesMatrix> {
    cfg.validate()?;
    let c = *cfg
        .coupling_by_class
        .get(class)
        .ok_or(Error::InvalidClass {
            class,
            n_classes: cfg.coupling_by_class.len(),
        })?;
    let mut rng = seed::rng(seed, "synth-subject");

    let mut latents = Mat::zeros(cfg.n_communities, cfg.t_len);
    for v in latents.as_mut_slice() {
        *v = rng.sample(StandardNormal);
    }

    let shared = c.sqrt();
    let private = (1.0 - c).sqrt() * cfg.noise_std;
    let mut values = Mat::zeros(cfg.t_len, cfg.n_regions);
    for i in 0..cfg.n_regions {
        let f = latents.row(i % cfg.n_communities);
        for t in 0..cfg.t_len {
            let eps: f64 = rng.sample(StandardNormal);
            values[(t, i)] = shared * f[t] + private * eps;
        }
    }
    TimeSeriesMatrix::new(values)
}

/// Labeled subject series: `n_per_class` subjects for each class, subject
/// `s` seeded with `cfg.seed + s` and labeled `s % n_classes`.
pub fn generate_labeled_series(
    cfg: &SynthConfig,
    n_per_class: usize,
) -> Result<Vec<(TimeSeriesMatrix, usize)>> {
    cfg.validate()?;
    if n_per_class == 0 {
        return Err(Error::InvalidConfig {
            reason: "n_per_class must be at least 1",
        });
    }
    let n_classes = cfg.n_classes();
    let total = n_per_class * n_classes;
    let mut out = Vec::with_capacity(total);
    for s in 0..total {
        let class = s % n_classes;
        let ts = generate_subject(cfg, class, cfg.seed.wrapping_add(s as u64))?;
        out.push((ts, class));
    }
    Ok(out)
}

/// Full pipeline from config to labeled connectivity graphs.
pub fn generate_dataset(cfg: &SynthConfig, n_per_class: usize) -> Result<Vec<BrainGraph>> {
    generate_labeled_series(cfg, n_per_class)?
        .into_iter()
        .map(|(ts, class)| build_graph(&ts, class))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::connectivity::node_fc;

    fn small_cfg() -> SynthConfig {
        SynthConfig {
            n_regions: 10,
            t_len: 80,
            ..SynthConfig::default()
        }
    }

    #[test]
    fn same_seed_is_bit_identical() {
        let cfg = small_cfg();
        let a = generate_subject(&cfg, 0, 7).unwrap();
        let b = generate_subject(&cfg, 0, 7).unwrap();
        assert_eq!(a.values().as_slice(), b.values().as_slice());
        let c = generate_subject(&cfg, 0, 8).unwrap();
        assert_ne!(a.values().as_slice(), c.values().as_slice());
    }

    #[test]
    fn class_changes_output() {
        let cfg = small_cfg();
        let a = generate_subject(&cfg, 0, 7).unwrap();
        let b = generate_subject(&cfg, 1, 7).unwrap();
        assert_ne!(a.values().as_slice(), b.values().as_slice());
    }

    /// With zero coupling all regions are independent, so the mean absolute
    /// off-diagonal correlation over many subjects must sit within a few
    /// standard errors of the T-sample null (std of a null correlation is
    /// about 1/sqrt(T)).
    #[test]
    fn zero_coupling_gives_null_correlations() {
        let cfg = SynthConfig {
            n_regions: 10,
            t_len: 100,
            coupling_by_class: alloc::vec![0.0, 0.5],
            ..SynthConfig::default()
        };
        let mut sum = 0.0;
        let mut count = 0usize;
        for s in 0..200u64 {
            let ts = generate_subject(&cfg, 0, 1000 + s).unwrap();
            let fc = node_fc(&ts).unwrap();
            let n = fc.n_regions();
            for i in 0..n {
                for j in (i + 1)..n {
                    sum += fc.values()[(i, j)].abs();
                    count += 1;
                }
            }
        }
        let mean_abs = sum / count as f64;
        let bound = 3.0 / (cfg.t_len as f64).sqrt();
        assert!(mean_abs < bound, "mean |corr| {mean_abs} not below {bound}");
    }

    /// At c = 0.6 with two communities, same-community pairs share a latent
    /// signal (expected correlation near c) while cross-community pairs do
    /// not (expected correlation 0).
    #[test]
    fn intra_community_exceeds_inter() {
        let cfg = SynthConfig::default();
        let mut intra = (0.0, 0usize);
        let mut inter = (0.0, 0usize);
        for s in 0..100u64 {
            let ts = generate_subject(&cfg, 0, 5000 + s).unwrap();
            let fc = node_fc(&ts).unwrap();
            for i in 0..cfg.n_regions {
                for j in (i + 1)..cfg.n_regions {
                    let v = fc.values()[(i, j)];
                    if i % cfg.n_communities == j % cfg.n_communities {
                        intra.0 += v;
                        intra.1 += 1;
                    } else {
                        inter.0 += v;
                        inter.1 += 1;
                    }
                }
            }
        }
        let mean_intra = intra.0 / intra.1 as f64;
        let mean_inter = inter.0 / inter.1 as f64;
        assert!(
            mean_intra > mean_inter + 0.2,
            "intra {mean_intra} vs inter {mean_inter}"
        );
        assert!(
            (mean_intra - 0.6).abs() < 0.1,
            "intra {mean_intra} far from coupling"
        );
    }

    /// Widening the gap between the two class couplings must not shrink the
    /// separation between the classes' mean intra-community correlations.
    #[test]
    fn coupling_gap_separates_classes() {
        let gaps = [[0.45, 0.40], [0.55, 0.35], [0.70, 0.25]];
        let mut separations = Vec::new();
        for couplings in gaps {
            let cfg = SynthConfig {
                coupling_by_class: couplings.to_vec(),
                ..SynthConfig::default()
            };
            let mut means = [0.0f64; 2];
            for class in 0..2 {
                let mut sum = 0.0;
                let mut count = 0usize;
                for s in 0..40u64 {
                    let ts = generate_subject(&cfg, class, 900 + s).unwrap();
                    let fc = node_fc(&ts).unwrap();
                    for i in 0..cfg.n_regions {
                        for j in (i + 1)..cfg.n_regions {
                            if i % 2 == j % 2 {
                                sum += fc.values()[(i, j)];
                                count += 1;
                            }
                        }
                    }
                }
                means[class] = sum / count as f64;
            }
            separations.push(means[0] - means[1]);
        }
        assert!(
            separations[0] < separations[1] && separations[1] < separations[2],
            "separations not increasing: {separations:?}"
        );
    }

    #[test]
    fn dataset_is_balanced_and_distinct() {
        let cfg = SynthConfig {
            n_regions: 8,
            t_len: 40,
            ..SynthConfig::default()
        };
        let graphs = generate_dataset(&cfg, 50).unwrap();
        assert_eq!(graphs.len(), 100);
        let ones = graphs.iter().filter(|g| g.label() == 1).count();
        assert_eq!(ones, 50);
        assert_eq!(graphs.len() - ones, 50);

        let series = generate_labeled_series(&cfg, 3).unwrap();
        for (a, (ts_a, _)) in series.iter().enumerate() {
            for (ts_b, _) in series.iter().skip(a + 1) {
                assert_ne!(ts_a.values().as_slice(), ts_b.values().as_slice());
            }
        }
    }

    #[test]
    fn invalid_configs_are_rejected() {
        let mut cfg = SynthConfig::default();
        cfg.coupling_by_class = alloc::vec![0.4, 0.4];
        assert!(matches!(cfg.validate(), Err(Error::InvalidConfig { .. })));
        cfg.coupling_by_class = alloc::vec![0.4, 1.0];
        assert!(matches!(cfg.validate(), Err(Error::InvalidConfig { .. })));
        cfg = SynthConfig {
            noise_std: 0.0,
            ..SynthConfig::default()
        };
        assert!(matches!(cfg.validate(), Err(Error::InvalidConfig { .. })));
        cfg = SynthConfig {
            n_communities: 25,
            ..SynthConfig::default()
        };
        assert!(matches!(cfg.validate(), Err(Error::InvalidConfig { .. })));
        assert!(matches!(
            generate_subject(&SynthConfig::default(), 5, 1),
            Err(Error::InvalidClass {
                class: 5,
                n_classes: 2
            })
        ));
        assert!(matches!(
            generate_labeled_series(&SynthConfig::default(), 0),
            Err(Error::InvalidConfig { .. })
        ));
    }
}

use std::time::Instant;

use rand::seq::index::sample;
use rayon::prelude::*;
use serde::Serialize;

use super::{adjusted_rand_index, wilcoxon_signed_rank, WilcoxonMode, WilcoxonResult};
use crate::data::DataMatrix;
use crate::error::{Error, Result};
use crate::search::{autogmm_search, SearchConfig};
use crate::seed::{derive_seed, rng_from_seed};

/// A named search configuration taking part in a benchmark.
#[derive(Debug, Clone)]
pub struct BenchmarkConfig {
    pub name: String,
    pub config: SearchConfig,
}

/// One (subsample, configuration) cell.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BenchmarkRecord {
    pub rep: usize,
    pub config: String,
    /// Selected component count; absent when the search failed.
    pub k: Option<usize>,
    pub ari: Option<f64>,
    /// Wall-clock seconds of the search call alone.
    pub seconds: f64,
    pub failure: Option<String>,
}

/// Paired comparison of two configurations on one metric.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PairwiseTest {
    pub first: String,
    pub second: String,
    /// `"ari"` or `"seconds"`.
    pub metric: String,
    /// Subsamples on which both configurations produced a value.
    pub n_pairs: usize,
    pub result: Option<WilcoxonResult>,
    /// Why no test result is available (too few pairs, all differences zero).
    pub note: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BenchmarkReport {
    pub reps: usize,
    pub frac: f64,
    pub subsample_size: usize,
    pub seed: u64,
    /// Worker threads available while the cells ran; co-scheduled cells
    /// perturb each other's timings.
    pub threads: usize,
    /// Sorted row indices of every subsample, shared by all configurations.
    pub subsamples: Vec<Vec<usize>>,
    /// Ordered by rep, then configuration.
    pub records: Vec<BenchmarkRecord>,
    pub tests: Vec<PairwiseTest>,
}

/// Runs every configuration on `reps` shared random subsamples of
/// `round(frac · n)` rows and compares configurations pairwise with
/// two-sided signed-rank tests on ARI and runtime.
pub fn subsample_benchmark(
    data: &DataMatrix,
    truth: &[usize],
    configs: &[BenchmarkConfig],
    reps: usize,
    frac: f64,
    seed: u64,
) -> Result<BenchmarkReport> {
    let n = data.nrows();
    if truth.len() != n {
        return Err(Error::Input(format!(
            "{} truth labels for {n} samples",
            truth.len()
        )));
    }
    if !(frac > 0.0 && frac <= 1.0) {
        return Err(Error::Input(format!(
            "subsample fraction must be in (0, 1], got {frac}"
        )));
    }
    if reps < 2 {
        return Err(Error::Input(
            "benchmark needs at least two subsamples".into(),
        ));
    }
    if configs.is_empty() {
        return Err(Error::Input(
            "benchmark needs at least one configuration".into(),
        ));
    }
    for c in configs {
        c.config.validate()?;
    }
    let size = (frac * n as f64).round() as usize;
    if size < 2 {
        return Err(Error::Input(format!(
            "subsample of {size} rows is too small"
        )));
    }

    let subsamples: Vec<Vec<usize>> = (0..reps)
        .map(|rep| {
            let mut rng = rng_from_seed(derive_seed(seed, rep as u64, 0));
            let mut idx = sample(&mut rng, n, size).into_vec();
            idx.sort_unstable();
            idx
        })
        .collect();

    let cells: Vec<(usize, usize)> = (0..reps)
        .flat_map(|r| (0..configs.len()).map(move |c| (r, c)))
        .collect();
    let records: Vec<BenchmarkRecord> = cells
        .par_iter()
        .map(|&(rep, c)| {
            let idx = &subsamples[rep];
            let sub = data.select_rows(idx);
            let sub_truth: Vec<usize> = idx.iter().map(|&i| truth[i]).collect();
            let start = Instant::now();
            let outcome = autogmm_search(&sub, &configs[c].config);
            let seconds = start.elapsed().as_secs_f64();
            let (k, ari, failure) = match outcome {
                Ok(result) => {
                    let ari = adjusted_rand_index(&sub_truth, result.labels()).ok();
                    (Some(result.best.k), ari, None)
                }
                Err(e) => (None, None, Some(e.to_string())),
            };
            BenchmarkRecord {
                rep,
                config: configs[c].name.clone(),
                k,
                ari,
                seconds,
                failure,
            }
        })
        .collect();

    let column = |c: usize, metric: &str| -> Vec<Option<f64>> {
        (0..reps)
            .map(|rep| {
                let r = &records[rep * configs.len() + c];
                match metric {
                    "ari" => r.ari,
                    _ => r.failure.is_none().then_some(r.seconds),
                }
            })
            .collect()
    };
    let mut tests = Vec::new();
    for i in 0..configs.len() {
        for j in i + 1..configs.len() {
            for metric in ["ari", "seconds"] {
                let (a, b): (Vec<f64>, Vec<f64>) = column(i, metric)
                    .into_iter()
                    .zip(column(j, metric))
                    .filter_map(|(x, y)| Some((x?, y?)))
                    .unzip();
                let (result, note) = match wilcoxon_signed_rank(&a, &b, WilcoxonMode::Normal) {
                    Ok(r) => (Some(r), None),
                    Err(e) => (None, Some(e.to_string())),
                };
                tests.push(PairwiseTest {
                    first: configs[i].name.clone(),
                    second: configs[j].name.clone(),
                    metric: metric.to_string(),
                    n_pairs: a.len(),
                    result,
                    note,
                });
            }
        }
    }

    Ok(BenchmarkReport {
        reps,
        frac,
        subsample_size: size,
        seed,
        threads: rayon::current_num_threads(),
        subsamples,
        records,
        tests,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gmm::CovarianceConstraint;
    use crate::init::InitMethod;
    use crate::io::synthetic::{generate, SyntheticKind, SyntheticSpec};

    fn small_config(seed: u64) -> SearchConfig {
        SearchConfig {
            kmin: 1,
            kmax: 3,
            methods: vec![InitMethod::KMeans],
            constraints: vec![CovarianceConstraint::Spherical],
            seed,
            ..SearchConfig::default()
        }
    }

    #[test]
    fn full_fraction_self_comparison_is_degenerate() {
        let s = generate(&SyntheticSpec::new(SyntheticKind::ThreeComponent, 1)).unwrap();
        let cfg = BenchmarkConfig {
            name: "a".into(),
            config: small_config(0),
        };
        let twin = BenchmarkConfig {
            name: "b".into(),
            ..cfg.clone()
        };
        let report = subsample_benchmark(&s.data, &s.labels, &[cfg, twin], 2, 1.0, 5).unwrap();
        assert_eq!(report.subsamples, vec![(0..100).collect::<Vec<_>>(); 2]);
        let ari = report.tests.iter().find(|t| t.metric == "ari").unwrap();
        assert_eq!(ari.n_pairs, 2);
        assert!(ari.result.is_none() && ari.note.is_some());
    }

    #[test]
    fn deterministic_apart_from_timing() {
        let s = generate(&SyntheticSpec::new(SyntheticKind::ThreeComponent, 2)).unwrap();
        let configs = [
            BenchmarkConfig {
                name: "kmeans".into(),
                config: small_config(3),
            },
            BenchmarkConfig {
                name: "ward".into(),
                config: SearchConfig {
                    methods: vec![InitMethod::ALL[0]],
                    ..small_config(3)
                },
            },
        ];
        let strip = |mut r: BenchmarkReport| {
            for rec in &mut r.records {
                rec.seconds = 0.0;
            }
            r.tests.retain(|t| t.metric == "ari");
            r
        };
        let a = strip(subsample_benchmark(&s.data, &s.labels, &configs, 3, 0.8, 9).unwrap());
        let b = strip(subsample_benchmark(&s.data, &s.labels, &configs, 3, 0.8, 9).unwrap());
        assert_eq!(a, b);
        assert_eq!(a.subsample_size, 80);
        assert!(a
            .subsamples
            .iter()
            .all(|s| s.len() == 80 && s.windows(2).all(|w| w[0] < w[1])));
        assert_eq!(a.records.len(), 6);
    }

    #[test]
    fn rejects_bad_arguments() {
        let s = generate(&SyntheticSpec::new(SyntheticKind::ThreeComponent, 2)).unwrap();
        let cfg = [BenchmarkConfig {
            name: "a".into(),
            config: small_config(0),
        }];
        assert!(subsample_benchmark(&s.data, &s.labels, &cfg, 1, 0.8, 0).is_err());
        assert!(subsample_benchmark(&s.data, &s.labels, &cfg, 2, 0.0, 0).is_err());
        assert!(subsample_benchmark(&s.data, &s.labels, &cfg, 2, 1.5, 0).is_err());
        assert!(subsample_benchmark(&s.data, &s.labels[1..], &cfg, 2, 0.8, 0).is_err());
    }
}

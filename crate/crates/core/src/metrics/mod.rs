//! Clustering agreement and paired significance testing.

mod bench;
mod wilcoxon;

use std::collections::HashMap;

pub use bench::{
    subsample_benchmark, BenchmarkConfig, BenchmarkRecord, BenchmarkReport, PairwiseTest,
};
pub use wilcoxon::{wilcoxon_signed_rank, WilcoxonMode, WilcoxonResult};

use crate::error::{Error, Result};

fn choose2(x: u64) -> f64 {
    (x as f64) * (x.saturating_sub(1) as f64) / 2.0
}

/// Adjusted Rand index between two labelings of the same samples.
///
/// Pair-counting form `(index − expected) / (max − expected)` over the
/// contingency table. When `max == expected` (both labelings are a single
/// cluster, or both are all singletons) the partitions are identical and the
/// result is `1.0`.
pub fn adjusted_rand_index(u: &[usize], v: &[usize]) -> Result<f64> {
    if u.len() != v.len() {
        return Err(Error::Input(format!(
            "labelings have different lengths ({} vs {})",
            u.len(),
            v.len()
        )));
    }
    let n = u.len() as u64;
    if n < 2 {
        return Err(Error::Input("ARI needs at least two samples".into()));
    }
    let mut cells: HashMap<(usize, usize), u64> = HashMap::new();
    let mut rows: HashMap<usize, u64> = HashMap::new();
    let mut cols: HashMap<usize, u64> = HashMap::new();
    for (&a, &b) in u.iter().zip(v) {
        *cells.entry((a, b)).or_default() += 1;
        *rows.entry(a).or_default() += 1;
        *cols.entry(b).or_default() += 1;
    }
    let index: f64 = cells.values().map(|&c| choose2(c)).sum();
    let sum_rows: f64 = rows.values().map(|&c| choose2(c)).sum();
    let sum_cols: f64 = cols.values().map(|&c| choose2(c)).sum();
    let expected = sum_rows * sum_cols / choose2(n);
    let max = 0.5 * (sum_rows + sum_cols);
    if max == expected {
        return Ok(1.0);
    }
    Ok((index - expected) / (max - expected))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::seed::rng_from_seed;
    use proptest::prelude::*;
    use rand::seq::SliceRandom;

    /// ARI from explicit agreement counts over every pair of samples.
    fn pair_oracle(u: &[usize], v: &[usize]) -> f64 {
        let n = u.len();
        let (mut both, mut only_u, mut only_v, mut total) = (0.0, 0.0, 0.0, 0.0);
        for i in 0..n {
            for j in i + 1..n {
                let su = u[i] == u[j];
                let sv = v[i] == v[j];
                total += 1.0;
                if su && sv {
                    both += 1.0;
                }
                if su {
                    only_u += 1.0;
                }
                if sv {
                    only_v += 1.0;
                }
            }
        }
        let expected = only_u * only_v / total;
        let max = 0.5 * (only_u + only_v);
        if max == expected {
            1.0
        } else {
            (both - expected) / (max - expected)
        }
    }

    /// Every set partition of `n` items as a restricted-growth string.
    fn partitions(n: usize) -> Vec<Vec<usize>> {
        fn rec(cur: &mut Vec<usize>, n: usize, out: &mut Vec<Vec<usize>>) {
            if cur.len() == n {
                out.push(cur.clone());
                return;
            }
            let next = cur.iter().max().map_or(0, |m| m + 1);
            for l in 0..=next {
                cur.push(l);
                rec(cur, n, out);
                cur.pop();
            }
        }
        let mut out = Vec::new();
        rec(&mut Vec::new(), n, &mut out);
        out
    }

    #[test]
    fn examples() {
        assert_eq!(
            adjusted_rand_index(&[0, 0, 1, 1], &[0, 0, 0, 1]).unwrap(),
            0.0
        );
        assert_eq!(
            adjusted_rand_index(&[3, 3, 1, 2], &[3, 3, 1, 2]).unwrap(),
            1.0
        );
        assert_eq!(adjusted_rand_index(&[0, 0, 0], &[5, 5, 5]).unwrap(), 1.0);
        assert!(adjusted_rand_index(&[0, 1], &[0]).is_err());
    }

    #[test]
    fn exhaustive_small_partitions_match_pair_oracle() {
        for n in 2..=6 {
            let parts = partitions(n);
            for u in &parts {
                for v in &parts {
                    let fast = adjusted_rand_index(u, v).unwrap();
                    let slow = pair_oracle(u, v);
                    assert!(
                        (fast - slow).abs() <= 1e-12,
                        "{u:?} {v:?}: {fast} vs {slow}"
                    );
                }
            }
        }
    }

    #[test]
    fn random_permutation_averages_zero() {
        let mut rng = rng_from_seed(2024);
        let truth: Vec<usize> = (0..100).map(|i| i % 4).collect();
        let mut shuffled = truth.clone();
        let mut total = 0.0;
        for _ in 0..1000 {
            shuffled.shuffle(&mut rng);
            total += adjusted_rand_index(&truth, &shuffled).unwrap();
        }
        assert!((total / 1000.0).abs() <= 0.05);
    }

    proptest! {
        #[test]
        fn symmetric_and_permutation_invariant(
            u in proptest::collection::vec(0usize..5, 2..50),
            seed in any::<u64>(),
        ) {
            let mut rng = rng_from_seed(seed);
            let v: Vec<usize> = u.iter().map(|_| rand::Rng::random_range(&mut rng, 0..4)).collect();
            prop_assert!((adjusted_rand_index(&u, &v).unwrap() - adjusted_rand_index(&v, &u).unwrap()).abs() < 1e-12);
            let mut perm: Vec<usize> = (0..5).collect();
            perm.shuffle(&mut rng);
            let relabeled: Vec<usize> = u.iter().map(|&l| perm[l] + 10).collect();
            prop_assert!((adjusted_rand_index(&u, &v).unwrap() - adjusted_rand_index(&relabeled, &v).unwrap()).abs() < 1e-12);
            prop_assert_eq!(adjusted_rand_index(&u, &relabeled).unwrap(), 1.0);
        }
    }
}

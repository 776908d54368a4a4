use serde::Serialize;
use statrs::distribution::{ContinuousCDF, Normal};

use crate::error::{Error, Result};

/// Largest number of non-zero differences accepted by [`WilcoxonMode::Exact`].
pub const EXACT_MAX_N: usize = 15;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum WilcoxonMode {
    /// Normal approximation with tie-corrected variance and no continuity correction.
    #[default]
    Normal,
    /// Exact null distribution over all sign assignments of the observed ranks.
    Exact,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct WilcoxonResult {
    /// `min(W+, W−)` over the non-zero differences.
    pub statistic: f64,
    /// Two-sided p-value.
    pub p_value: f64,
    /// Number of non-zero differences that entered the test.
    pub n_used: usize,
    pub mode: WilcoxonMode,
}

/// Average ranks (1-based) of `values`, with tied values sharing the mean rank.
fn average_ranks(values: &[f64]) -> Vec<f64> {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    let mut ranks = vec![0.0; values.len()];
    let mut start = 0;
    while start < order.len() {
        let mut end = start + 1;
        while end < order.len() && values[order[end]] == values[order[start]] {
            end += 1;
        }
        let rank = (start + end + 1) as f64 / 2.0;
        for &i in &order[start..end] {
            ranks[i] = rank;
        }
        start = end;
    }
    ranks
}

/// Two-sided Wilcoxon signed-rank test on the paired differences `a − b`.
///
/// Zero differences are dropped and tied magnitudes share their average rank.
pub fn wilcoxon_signed_rank(a: &[f64], b: &[f64], mode: WilcoxonMode) -> Result<WilcoxonResult> {
    if a.len() != b.len() {
        return Err(Error::Input(format!(
            "paired samples have different lengths ({} vs {})",
            a.len(),
            b.len()
        )));
    }
    if a.len() < 2 {
        return Err(Error::Input(
            "signed-rank test needs at least two pairs".into(),
        ));
    }
    let diffs: Vec<f64> = a
        .iter()
        .zip(b)
        .map(|(x, y)| x - y)
        .filter(|d| *d != 0.0)
        .collect();
    if diffs.iter().any(|d| !d.is_finite()) {
        return Err(Error::Input(
            "paired samples contain non-finite values".into(),
        ));
    }
    let n = diffs.len();
    if n == 0 {
        return Err(Error::Degenerate("all paired differences are zero".into()));
    }
    let magnitudes: Vec<f64> = diffs.iter().map(|d| d.abs()).collect();
    let ranks = average_ranks(&magnitudes);
    let w_plus: f64 = diffs
        .iter()
        .zip(&ranks)
        .filter(|(d, _)| **d > 0.0)
        .map(|(_, r)| r)
        .sum();
    let total = (n * (n + 1)) as f64 / 2.0;
    let statistic = w_plus.min(total - w_plus);

    let p_value = match mode {
        WilcoxonMode::Normal => {
            let mean = total / 2.0;
            let mut ties = 0.0;
            let mut sorted = magnitudes.clone();
            sorted.sort_by(f64::total_cmp);
            for group in sorted.chunk_by(|x, y| x == y) {
                let t = group.len() as f64;
                ties += t * t * t - t;
            }
            let var = (n * (n + 1) * (2 * n + 1)) as f64 / 24.0 - ties / 48.0;
            if var <= 0.0 {
                return Err(Error::Degenerate("signed-rank variance is zero".into()));
            }
            let z = (statistic - mean) / var.sqrt();
            let normal = Normal::standard();
            (2.0 * normal.cdf(z)).min(1.0)
        }
        WilcoxonMode::Exact => exact_p_value(&ranks, statistic)?,
    };
    Ok(WilcoxonResult {
        statistic,
        p_value,
        n_used: n,
        mode,
    })
}

/// Fraction of the `2^n` sign assignments whose `min(W+, W−)` is at most the
/// observed statistic. Ranks are doubled so half-ranks from ties stay integral.
fn exact_p_value(ranks: &[f64], statistic: f64) -> Result<f64> {
    let n = ranks.len();
    if n > EXACT_MAX_N {
        return Err(Error::Input(format!(
            "exact signed-rank test supports at most {EXACT_MAX_N} non-zero differences, got {n}"
        )));
    }
    let doubled: Vec<usize> = ranks.iter().map(|r| (2.0 * r).round() as usize).collect();
    let total: usize = doubled.iter().sum();
    let observed = (2.0 * statistic).round() as usize;
    // counts[s]: number of sign assignments whose positive doubled-rank sum is s
    let mut counts = vec![0u64; total + 1];
    counts[0] = 1;
    for &r in &doubled {
        for s in (r..=total).rev() {
            counts[s] += counts[s - r];
        }
    }
    let extreme: u64 = counts
        .iter()
        .enumerate()
        .filter(|&(s, _)| s.min(total - s) <= observed)
        .map(|(_, c)| c)
        .sum();
    Ok(extreme as f64 / (1u64 << n) as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::seed::rng_from_seed;
    use rand::Rng;

    /// Enumerates every sign assignment of the observed magnitudes.
    fn enumeration_oracle(a: &[f64], b: &[f64]) -> f64 {
        let diffs: Vec<f64> = a
            .iter()
            .zip(b)
            .map(|(x, y)| x - y)
            .filter(|d| *d != 0.0)
            .collect();
        let ranks = average_ranks(&diffs.iter().map(|d| d.abs()).collect::<Vec<_>>());
        let total: f64 = ranks.iter().sum();
        let w_plus: f64 = diffs
            .iter()
            .zip(&ranks)
            .filter(|(d, _)| **d > 0.0)
            .map(|(_, r)| r)
            .sum();
        let observed = w_plus.min(total - w_plus);
        let n = ranks.len();
        let mut hits = 0u64;
        for mask in 0u64..(1 << n) {
            let s: f64 = (0..n)
                .filter(|i| mask >> i & 1 == 1)
                .map(|i| ranks[i])
                .sum();
            if s.min(total - s) <= observed + 1e-9 {
                hits += 1;
            }
        }
        hits as f64 / (1u64 << n) as f64
    }

    #[test]
    fn ten_same_sign_pairs_normal_p() {
        let b: Vec<f64> = (0..10).map(|i| i as f64 * 0.37).collect();
        let a: Vec<f64> = b
            .iter()
            .enumerate()
            .map(|(i, x)| x + 0.5 * (i + 1) as f64)
            .collect();
        let r = wilcoxon_signed_rank(&a, &b, WilcoxonMode::Normal).unwrap();
        assert_eq!(r.statistic, 0.0);
        assert!((r.p_value - 0.005).abs() <= 0.001, "{}", r.p_value);
        let exact = wilcoxon_signed_rank(&a, &b, WilcoxonMode::Exact).unwrap();
        assert!((exact.p_value - 2.0 / 1024.0).abs() < 1e-15);
    }

    #[test]
    fn constant_shift_gives_minimal_p() {
        let b = [1.0, 4.0, 2.0, 8.0, 5.0, 7.0, 3.0, 6.0, 9.0, 0.0];
        let a: Vec<f64> = b.iter().map(|x| x + 2.0).collect();
        let r = wilcoxon_signed_rank(&a, &b, WilcoxonMode::Normal).unwrap();
        assert_eq!(r.statistic, 0.0);
        let mixed: Vec<f64> = b
            .iter()
            .enumerate()
            .map(|(i, x)| if i % 3 == 0 { x - 2.0 } else { x + 2.0 })
            .collect();
        assert!(
            r.p_value
                < wilcoxon_signed_rank(&mixed, &b, WilcoxonMode::Normal)
                    .unwrap()
                    .p_value
        );
        let exact = wilcoxon_signed_rank(&a, &b, WilcoxonMode::Exact).unwrap();
        assert!((exact.p_value - 2.0 / 1024.0).abs() < 1e-15);
    }

    #[test]
    fn degenerate_and_bad_input() {
        assert!(matches!(
            wilcoxon_signed_rank(&[1.0, 2.0], &[1.0, 2.0], WilcoxonMode::Normal),
            Err(Error::Degenerate(_))
        ));
        assert!(matches!(
            wilcoxon_signed_rank(&[1.0], &[2.0], WilcoxonMode::Normal),
            Err(Error::Input(_))
        ));
        assert!(matches!(
            wilcoxon_signed_rank(&[1.0, 2.0], &[2.0], WilcoxonMode::Normal),
            Err(Error::Input(_))
        ));
        let a: Vec<f64> = (0..16).map(|i| i as f64 + 1.0).collect();
        assert!(matches!(
            wilcoxon_signed_rank(&a, &[0.0; 16], WilcoxonMode::Exact),
            Err(Error::Input(_))
        ));
    }

    #[test]
    fn exact_matches_enumeration_random_n8() {
        let mut rng = rng_from_seed(88);
        for _ in 0..50 {
            let a: Vec<f64> = (0..8).map(|_| rng.random::<f64>()).collect();
            let b: Vec<f64> = (0..8).map(|_| rng.random::<f64>()).collect();
            let r = wilcoxon_signed_rank(&a, &b, WilcoxonMode::Exact).unwrap();
            assert!((r.p_value - enumeration_oracle(&a, &b)).abs() < 1e-15);
        }
    }

    #[test]
    fn exact_matches_enumeration_all_sign_patterns() {
        for n in 2..=10usize {
            // magnitudes with ties (pairs share a value) exercise half-ranks
            let magnitudes: Vec<f64> = (0..n).map(|i| (i / 2 + 1) as f64).collect();
            for mask in 0u32..(1 << n) {
                let a: Vec<f64> = (0..n)
                    .map(|i| {
                        if mask >> i & 1 == 1 {
                            magnitudes[i]
                        } else {
                            -magnitudes[i]
                        }
                    })
                    .collect();
                let b = vec![0.0; n];
                let r = wilcoxon_signed_rank(&a, &b, WilcoxonMode::Exact).unwrap();
                assert!(
                    (r.p_value - enumeration_oracle(&a, &b)).abs() < 1e-15,
                    "n={n} mask={mask}"
                );
            }
        }
    }

    #[test]
    fn average_ranks_share_ties() {
        assert_eq!(
            average_ranks(&[3.0, 1.0, 3.0, 2.0]),
            vec![3.5, 1.0, 3.5, 2.0]
        );
    }
}

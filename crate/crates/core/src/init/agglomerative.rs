//! Bottom-up agglomerative clustering via the nearest-neighbor chain.
//!
//! All four linkages are reducible, so the chain algorithm yields the same
//! hierarchy as naive greedy merging in `O(n²)` time and `O(n²/2)` memory. The
//! full merge sequence is kept so one build can be cut at every `k`.

use super::{Affinity, InitMethod, Linkage};
use crate::data::DataMatrix;
use crate::error::{Error, Result};

/// Condensed upper-triangle distance matrix.
struct Condensed {
    n: usize,
    values: Vec<f64>,
}

impl Condensed {
    #[inline]
    fn index(&self, i: usize, j: usize) -> usize {
        let (i, j) = if i < j { (i, j) } else { (j, i) };
        self.n * i - i * (i + 1) / 2 + j - i - 1
    }

    #[inline]
    fn get(&self, i: usize, j: usize) -> f64 {
        self.values[self.index(i, j)]
    }

    #[inline]
    fn set(&mut self, i: usize, j: usize, v: f64) {
        let idx = self.index(i, j);
        self.values[idx] = v;
    }

    fn build(data: &DataMatrix, affinity: Affinity) -> Result<Self> {
        let n = data.nrows();
        let norms: Vec<f64> = match affinity {
            Affinity::Cosine => {
                let norms: Vec<f64> = data
                    .rows()
                    .map(|r| r.iter().map(|x| x * x).sum::<f64>().sqrt())
                    .collect();
                if let Some(i) = norms.iter().position(|&v| v == 0.0) {
                    return Err(Error::InitFailure(format!(
                        "cosine affinity is undefined for the all-zero row {i}"
                    )));
                }
                norms
            }
            _ => Vec::new(),
        };
        let mut values = Vec::with_capacity(n * n.saturating_sub(1) / 2);
        for i in 0..n {
            let a = data.row(i);
            for j in i + 1..n {
                let b = data.row(j);
                let d = match affinity {
                    Affinity::L2 => a
                        .iter()
                        .zip(b)
                        .map(|(x, y)| (x - y) * (x - y))
                        .sum::<f64>()
                        .sqrt(),
                    Affinity::L1 => a.iter().zip(b).map(|(x, y)| (x - y).abs()).sum(),
                    Affinity::Cosine => {
                        let dot: f64 = a.iter().zip(b).map(|(x, y)| x * y).sum();
                        (1.0 - dot / (norms[i] * norms[j])).max(0.0)
                    }
                };
                values.push(d);
            }
        }
        Ok(Self { n, values })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
struct Merge {
    /// A member of each merged cluster.
    a: usize,
    b: usize,
    distance: f64,
}

/// Complete merge history of an agglomeration, ordered by merge distance.
#[derive(Debug, Clone)]
pub struct Dendrogram {
    n: usize,
    merges: Vec<Merge>,
}

impl Dendrogram {
    pub fn build(data: &DataMatrix, affinity: Affinity, linkage: Linkage) -> Result<Self> {
        if linkage == Linkage::Ward && affinity != Affinity::L2 {
            return Err(Error::Input("ward linkage requires l2 affinity".into()));
        }
        let n = data.nrows();
        if n == 0 {
            return Err(Error::Input("cannot agglomerate an empty matrix".into()));
        }
        let mut dist = Condensed::build(data, affinity)?;
        let mut size = vec![1usize; n];
        let mut active = vec![true; n];
        let mut merges = Vec::with_capacity(n - 1);
        let mut chain: Vec<usize> = Vec::with_capacity(n);
        let mut first_active = 0;

        for _ in 1..n {
            if chain.is_empty() {
                while !active[first_active] {
                    first_active += 1;
                }
                chain.push(first_active);
            }
            let (a, b) = loop {
                let a = *chain.last().unwrap();
                let prev = (chain.len() >= 2).then(|| chain[chain.len() - 2]);
                // Ties prefer the previous chain element, which guarantees termination.
                let (mut best, mut best_d) = match prev {
                    Some(p) => (p, dist.get(a, p)),
                    None => (usize::MAX, f64::INFINITY),
                };
                for j in 0..n {
                    if j != a && active[j] {
                        let d = dist.get(a, j);
                        if d < best_d {
                            best = j;
                            best_d = d;
                        }
                    }
                }
                if Some(best) == prev {
                    chain.pop();
                    chain.pop();
                    break (a, best);
                }
                chain.push(best);
            };

            let d_ab = dist.get(a, b);
            merges.push(Merge {
                a,
                b,
                distance: d_ab,
            });
            let (keep, drop) = if a < b { (a, b) } else { (b, a) };
            let (sa, sb) = (size[a] as f64, size[b] as f64);
            for j in 0..n {
                if !active[j] || j == a || j == b {
                    continue;
                }
                let (da, db) = (dist.get(a, j), dist.get(b, j));
                let updated = match linkage {
                    Linkage::Single => da.min(db),
                    Linkage::Complete => da.max(db),
                    Linkage::Average => (sa * da + sb * db) / (sa + sb),
                    Linkage::Ward => {
                        let sj = size[j] as f64;
                        (((sa + sj) * da * da + (sb + sj) * db * db - sj * d_ab * d_ab)
                            / (sa + sb + sj))
                            .max(0.0)
                            .sqrt()
                    }
                };
                dist.set(keep, j, updated);
            }
            size[keep] += size[drop];
            active[drop] = false;
        }

        // Slot indices double as member indices: a slot always holds the cluster
        // containing the point of the same index.
        merges.sort_by(|x, y| x.distance.total_cmp(&y.distance));
        Ok(Self { n, merges })
    }

    pub fn n_samples(&self) -> usize {
        self.n
    }

    /// Flat clustering with exactly `k` clusters, labeled in order of each
    /// cluster's smallest member index.
    pub fn cut(&self, k: usize) -> Result<Vec<usize>> {
        if k == 0 || k > self.n {
            return Err(Error::Input(format!(
                "cannot cut {} samples into {k} clusters",
                self.n
            )));
        }
        let mut parent: Vec<usize> = (0..self.n).collect();
        fn find(parent: &mut [usize], mut x: usize) -> usize {
            while parent[x] != x {
                parent[x] = parent[parent[x]];
                x = parent[x];
            }
            x
        }
        for m in &self.merges[..self.n - k] {
            let ra = find(&mut parent, m.a);
            let rb = find(&mut parent, m.b);
            let (lo, hi) = if ra < rb { (ra, rb) } else { (rb, ra) };
            parent[hi] = lo;
        }
        let mut label_of_root = vec![usize::MAX; self.n];
        let mut next = 0;
        Ok((0..self.n)
            .map(|i| {
                let r = find(&mut parent, i);
                if label_of_root[r] == usize::MAX {
                    label_of_root[r] = next;
                    next += 1;
                }
                label_of_root[r]
            })
            .collect())
    }
}

/// Agglomerates `data` until `k` clusters remain.
pub fn agglomerate(data: &DataMatrix, k: usize, method: InitMethod) -> Result<Vec<usize>> {
    let InitMethod::Agglomerative { affinity, linkage } = method else {
        return Err(Error::Input(
            "k-means is not an agglomerative method".into(),
        ));
    };
    if k == 0 || k > data.nrows() {
        return Err(Error::Input(format!(
            "cannot cut {} samples into {k} clusters",
            data.nrows()
        )));
    }
    Dendrogram::build(data, affinity, linkage)?.cut(k)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::seed::rng_from_seed;
    use rand::Rng;

    fn dissimilarity(a: &[f64], b: &[f64], affinity: Affinity) -> f64 {
        match affinity {
            Affinity::L2 => a
                .iter()
                .zip(b)
                .map(|(x, y)| (x - y).powi(2))
                .sum::<f64>()
                .sqrt(),
            Affinity::L1 => a.iter().zip(b).map(|(x, y)| (x - y).abs()).sum(),
            Affinity::Cosine => {
                let dot: f64 = a.iter().zip(b).map(|(x, y)| x * y).sum();
                let na = a.iter().map(|x| x * x).sum::<f64>().sqrt();
                let nb = b.iter().map(|x| x * x).sum::<f64>().sqrt();
                1.0 - dot / (na * nb)
            }
        }
    }

    /// Linkage straight from its definition over member sets.
    fn linkage_distance(
        rows: &[Vec<f64>],
        p: &[usize],
        q: &[usize],
        aff: Affinity,
        link: Linkage,
    ) -> f64 {
        let pairs = || p.iter().flat_map(|&i| q.iter().map(move |&j| (i, j)));
        match link {
            Linkage::Single => pairs()
                .map(|(i, j)| dissimilarity(&rows[i], &rows[j], aff))
                .fold(f64::INFINITY, f64::min),
            Linkage::Complete => pairs()
                .map(|(i, j)| dissimilarity(&rows[i], &rows[j], aff))
                .fold(0.0, f64::max),
            Linkage::Average => {
                pairs()
                    .map(|(i, j)| dissimilarity(&rows[i], &rows[j], aff))
                    .sum::<f64>()
                    / (p.len() * q.len()) as f64
            }
            Linkage::Ward => {
                // increase in within-cluster sum of squares
                let centroid = |s: &[usize]| -> Vec<f64> {
                    (0..rows[0].len())
                        .map(|a| s.iter().map(|&i| rows[i][a]).sum::<f64>() / s.len() as f64)
                        .collect()
                };
                let (cp, cq) = (centroid(p), centroid(q));
                let sq: f64 = cp.iter().zip(&cq).map(|(x, y)| (x - y).powi(2)).sum();
                (p.len() * q.len()) as f64 / (p.len() + q.len()) as f64 * sq
            }
        }
    }

    fn naive(rows: &[Vec<f64>], k: usize, aff: Affinity, link: Linkage) -> Vec<usize> {
        let mut clusters: Vec<Vec<usize>> = (0..rows.len()).map(|i| vec![i]).collect();
        while clusters.len() > k {
            let mut best = (0, 1, f64::INFINITY);
            for i in 0..clusters.len() {
                for j in i + 1..clusters.len() {
                    let d = linkage_distance(rows, &clusters[i], &clusters[j], aff, link);
                    if d < best.2 {
                        best = (i, j, d);
                    }
                }
            }
            let merged = clusters.remove(best.1);
            clusters[best.0].extend(merged);
        }
        canonical_from_sets(rows.len(), &clusters)
    }

    fn canonical_from_sets(n: usize, clusters: &[Vec<usize>]) -> Vec<usize> {
        let mut raw = vec![0; n];
        for (c, members) in clusters.iter().enumerate() {
            for &i in members {
                raw[i] = c;
            }
        }
        canonical(&raw)
    }

    fn canonical(labels: &[usize]) -> Vec<usize> {
        let mut map = std::collections::HashMap::new();
        labels
            .iter()
            .map(|l| {
                let next = map.len();
                *map.entry(*l).or_insert(next)
            })
            .collect()
    }

    #[test]
    fn nearest_pair_merges_first() {
        let data = DataMatrix::from_rows(&[[0.0], [1.0], [10.0]]).unwrap();
        let m = InitMethod::agglomerative(Affinity::L2, Linkage::Single).unwrap();
        assert_eq!(agglomerate(&data, 2, m).unwrap(), vec![0, 0, 1]);
    }

    #[test]
    fn k_equals_n_is_identity_and_k_too_large_fails() {
        let data =
            DataMatrix::from_rows(&[[0.0, 1.0], [3.0, 1.0], [1.0, 7.0], [2.0, 2.0]]).unwrap();
        for m in InitMethod::ALL.iter().filter(|m| **m != InitMethod::KMeans) {
            assert_eq!(agglomerate(&data, 4, *m).unwrap(), vec![0, 1, 2, 3]);
            assert_eq!(agglomerate(&data, 1, *m).unwrap(), vec![0, 0, 0, 0]);
            assert!(matches!(agglomerate(&data, 5, *m), Err(Error::Input(_))));
        }
    }

    #[test]
    fn cosine_rejects_zero_rows() {
        let data = DataMatrix::from_rows(&[[0.0, 0.0], [1.0, 1.0], [1.0, 0.0]]).unwrap();
        let m = InitMethod::agglomerative(Affinity::Cosine, Linkage::Average).unwrap();
        assert!(matches!(
            agglomerate(&data, 2, m),
            Err(Error::InitFailure(_))
        ));
    }

    #[test]
    fn matches_naive_agglomeration() {
        for seed in 0..5 {
            let mut rng = rng_from_seed(seed);
            let rows: Vec<Vec<f64>> = (0..20)
                .map(|_| vec![rng.random_range(-5.0..5.0), rng.random_range(-5.0..5.0)])
                .collect();
            let data = DataMatrix::from_rows(&rows).unwrap();
            for method in InitMethod::ALL.iter().filter(|m| **m != InitMethod::KMeans) {
                let InitMethod::Agglomerative { affinity, linkage } = *method else {
                    unreachable!()
                };
                let dendro = Dendrogram::build(&data, affinity, linkage).unwrap();
                for k in 1..=20 {
                    let fast = dendro.cut(k).unwrap();
                    assert_eq!(
                        fast,
                        naive(&rows, k, affinity, linkage),
                        "{method} k={k} seed={seed}"
                    );
                    let mut used = fast.clone();
                    used.sort_unstable();
                    used.dedup();
                    assert_eq!(used.len(), k);
                }
            }
        }
    }

    #[test]
    fn deterministic_with_duplicates() {
        let rows: Vec<[f64; 2]> = (0..30)
            .map(|i| {
                if i % 3 == 0 {
                    [1.0, 1.0]
                } else {
                    [i as f64, 0.5]
                }
            })
            .collect();
        let data = DataMatrix::from_rows(&rows).unwrap();
        for method in InitMethod::ALL.iter().filter(|m| **m != InitMethod::KMeans) {
            let a = agglomerate(&data, 4, *method).unwrap();
            let b = agglomerate(&data, 4, *method).unwrap();
            assert_eq!(a, b);
        }
    }
}

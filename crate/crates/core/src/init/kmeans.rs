use rand::Rng;

use crate::data::{squared_euclidean, DataMatrix};
use crate::error::{Error, Result};
use crate::seed::{derive_seed, rng_from_seed};

const MAX_LLOYD_ITER: usize = 300;
const RELATIVE_TOL: f64 = 1e-4;

/// Best-of-`reps` k-means (k-means++ seeding, then Lloyd iterations) by inertia.
pub fn kmeans_init(data: &DataMatrix, k: usize, reps: usize, seed: u64) -> Result<Vec<usize>> {
    let n = data.nrows();
    if k == 0 || k > n {
        return Err(Error::Input(format!(
            "cannot form {k} k-means clusters from {n} samples"
        )));
    }
    if reps == 0 {
        return Err(Error::Input("k-means needs at least one repetition".into()));
    }
    let mut best: Option<(f64, Vec<usize>)> = None;
    for rep in 0..reps {
        let mut rng = rng_from_seed(derive_seed(seed, 0, rep as u64));
        let centers = plus_plus(data, k, &mut rng);
        let (inertia, labels) = lloyd(data, centers);
        if best.as_ref().is_none_or(|(b, _)| inertia < *b) {
            best = Some((inertia, labels));
        }
    }
    Ok(best.unwrap().1)
}

/// Greedy k-means++: each new center is the best of `2 + ln k` candidates drawn
/// proportionally to squared distance from the chosen centers.
fn plus_plus(data: &DataMatrix, k: usize, rng: &mut impl Rng) -> Vec<Vec<f64>> {
    let n = data.nrows();
    let trials = 2 + (k as f64).ln() as usize;
    let mut centers = vec![data.row(rng.random_range(0..n)).to_vec()];
    let mut closest: Vec<f64> = data
        .rows()
        .map(|r| squared_euclidean(r, &centers[0]))
        .collect();
    while centers.len() < k {
        let total: f64 = closest.iter().sum();
        let mut best: Option<(f64, usize, Vec<f64>)> = None;
        for _ in 0..trials {
            let pick = if total > 0.0 {
                let target = rng.random::<f64>() * total;
                let mut acc = 0.0;
                let mut chosen = n - 1;
                for (i, d) in closest.iter().enumerate() {
                    acc += d;
                    if acc > target {
                        chosen = i;
                        break;
                    }
                }
                chosen
            } else {
                rng.random_range(0..n)
            };
            let candidate: Vec<f64> = data
                .rows()
                .zip(&closest)
                .map(|(r, c)| c.min(squared_euclidean(r, data.row(pick))))
                .collect();
            let pot: f64 = candidate.iter().sum();
            if best.as_ref().is_none_or(|(b, _, _)| pot < *b) {
                best = Some((pot, pick, candidate));
            }
        }
        let (_, pick, candidate) = best.unwrap();
        centers.push(data.row(pick).to_vec());
        closest = candidate;
    }
    centers
}

fn assign(data: &DataMatrix, centers: &[Vec<f64>], labels: &mut [usize], dists: &mut [f64]) -> f64 {
    let mut inertia = 0.0;
    for ((row, l), dist) in data.rows().zip(labels.iter_mut()).zip(dists.iter_mut()) {
        let mut best = 0;
        let mut best_d = f64::INFINITY;
        for (j, c) in centers.iter().enumerate() {
            let d = squared_euclidean(row, c);
            if d < best_d {
                best_d = d;
                best = j;
            }
        }
        *l = best;
        *dist = best_d;
        inertia += best_d;
    }
    inertia
}

fn lloyd(data: &DataMatrix, mut centers: Vec<Vec<f64>>) -> (f64, Vec<usize>) {
    let n = data.nrows();
    let k = centers.len();
    let d = data.ncols();
    let mut labels = vec![0; n];
    let mut dists = vec![0.0; n];
    let mut inertia = assign(data, &centers, &mut labels, &mut dists);
    for _ in 0..MAX_LLOYD_ITER {
        let mut sums = vec![vec![0.0; d]; k];
        let mut counts = vec![0usize; k];
        for (row, &l) in data.rows().zip(&labels) {
            counts[l] += 1;
            for (s, x) in sums[l].iter_mut().zip(row) {
                *s += x;
            }
        }
        // An empty cluster takes over the point farthest from its own center.
        let mut taken = vec![false; n];
        for j in 0..k {
            if counts[j] == 0 {
                let far = (0..n)
                    .filter(|&i| !taken[i] && counts[labels[i]] > 1)
                    .max_by(|&a, &b| dists[a].total_cmp(&dists[b]).then(b.cmp(&a)));
                if let Some(i) = far {
                    taken[i] = true;
                    let old = labels[i];
                    counts[old] -= 1;
                    for (s, x) in sums[old].iter_mut().zip(data.row(i)) {
                        *s -= x;
                    }
                    labels[i] = j;
                    counts[j] = 1;
                    sums[j] = data.row(i).to_vec();
                }
            }
        }
        for ((c, s), &cnt) in centers.iter_mut().zip(&sums).zip(&counts) {
            if cnt > 0 {
                for (ci, si) in c.iter_mut().zip(s) {
                    *ci = si / cnt as f64;
                }
            }
        }
        let next = assign(data, &centers, &mut labels, &mut dists);
        let change = inertia - next;
        inertia = next;
        if change.abs() <= RELATIVE_TOL * inertia.max(f64::MIN_POSITIVE) {
            break;
        }
    }
    (inertia, labels)
}

//! Stage 2a: k-means localization in the kernel feature space.

use ndarray::{Array1, Array2, ArrayView1, ArrayView2};
use rand::Rng as _;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::seed;
use crate::{Error, Result};

/// Independent k-means++ restarts per fit; the lowest-inertia run wins.
pub const N_INIT: usize = 10;
/// Lloyd iteration cap per restart.
pub const MAX_ITER: usize = 300;

/// A partition of feature rows into `k` non-empty clusters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClusterModel {
    centroids: Array2<f64>,
    sizes: Vec<usize>,
    membership: Vec<usize>,
    inertia: f64,
}

impl ClusterModel {
    pub fn k(&self) -> usize {
        self.sizes.len()
    }

    pub fn centroids(&self) -> ArrayView2<'_, f64> {
        self.centroids.view()
    }

    pub fn centroid(&self, cluster: usize) -> ArrayView1<'_, f64> {
        self.centroids.row(cluster)
    }

    pub fn sizes(&self) -> &[usize] {
        &self.sizes
    }

    pub fn membership(&self) -> &[usize] {
        &self.membership
    }

    pub fn inertia(&self) -> f64 {
        self.inertia
    }

    /// Row indices belonging to `cluster`, ascending.
    pub fn members(&self, cluster: usize) -> Vec<usize> {
        self.membership
            .iter()
            .enumerate()
            .filter(|(_, &c)| c == cluster)
            .map(|(i, _)| i)
            .collect()
    }

    /// Index of the closest centroid; see [`assign_nearest`].
    pub fn assign(&self, f: ArrayView1<f64>) -> usize {
        nearest(self.centroids.view(), f).0
    }

    /// One cluster holding every row, centered at the sample mean.
    pub fn single(f: ArrayView2<f64>) -> Result<Self> {
        let n = f.nrows();
        if n == 0 {
            return Err(Error::EmptyInput("cannot build a cluster from zero rows"));
        }
        let membership = vec![0; n];
        let centroids = cluster_means(f, &membership, 1);
        let inertia = inertia(f, centroids.view(), &membership);
        Ok(Self {
            centroids,
            sizes: vec![n],
            membership,
            inertia,
        })
    }
}

/// Nearest centroid by squared Euclidean distance; ties go to the lowest
/// index.
pub fn assign_nearest(model: &ClusterModel, f: ArrayView1<f64>) -> usize {
    model.assign(f)
}

#[inline]
pub(crate) fn sq_dist(a: ArrayView1<f64>, b: ArrayView1<f64>) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

fn nearest(centroids: ArrayView2<f64>, f: ArrayView1<f64>) -> (usize, f64) {
    let mut best = (0, f64::INFINITY);
    for (j, c) in centroids.rows().into_iter().enumerate() {
        let d = sq_dist(f, c);
        if d < best.1 {
            best = (j, d);
        }
    }
    best
}

fn cluster_means(f: ArrayView2<f64>, labels: &[usize], k: usize) -> Array2<f64> {
    let mut sums = Array2::zeros((k, f.ncols()));
    let mut counts = vec![0usize; k];
    for (row, &c) in f.rows().into_iter().zip(labels) {
        let mut s = sums.row_mut(c);
        s += &row;
        counts[c] += 1;
    }
    for (mut s, &n) in sums.rows_mut().into_iter().zip(&counts) {
        if n > 0 {
            s /= n as f64;
        }
    }
    sums
}

fn inertia(f: ArrayView2<f64>, centroids: ArrayView2<f64>, labels: &[usize]) -> f64 {
    f.rows()
        .into_iter()
        .zip(labels)
        .map(|(row, &c)| sq_dist(row, centroids.row(c)))
        .sum()
}

/// One k-means++ seeded Lloyd run, with the inertia after every centroid
/// update.
#[derive(Debug, Clone)]
pub struct LloydRun {
    pub model: ClusterModel,
    pub inertia_history: Vec<f64>,
    pub iterations: usize,
}

fn plusplus_init(f: ArrayView2<f64>, k: usize, rng: &mut seed::Rng) -> Array2<f64> {
    let n = f.nrows();
    let mut centroids = Array2::zeros((k, f.ncols()));
    let first = rng.random_range(0..n);
    centroids.row_mut(0).assign(&f.row(first));
    let mut d2: Array1<f64> = f
        .rows()
        .into_iter()
        .map(|r| sq_dist(r, f.row(first)))
        .collect();
    for c in 1..k {
        let total: f64 = d2.sum();
        let pick = if total > 0.0 {
            let target = rng.random::<f64>() * total;
            let mut acc = 0.0;
            let mut pick = n - 1;
            for (i, &d) in d2.iter().enumerate() {
                acc += d;
                if acc > target && d > 0.0 {
                    pick = i;
                    break;
                }
            }
            pick
        } else {
            rng.random_range(0..n)
        };
        centroids.row_mut(c).assign(&f.row(pick));
        for (i, r) in f.rows().into_iter().enumerate() {
            d2[i] = d2[i].min(sq_dist(r, f.row(pick)));
        }
    }
    centroids
}

/// Assigns every row to its nearest centroid, then hands each empty
/// cluster the row farthest from its current centroid (taken from a
/// cluster that can spare it).
fn assign_all(f: ArrayView2<f64>, centroids: &mut Array2<f64>, labels: &mut [usize]) {
    let k = centroids.nrows();
    let mut dists = vec![0.0; labels.len()];
    for (i, row) in f.rows().into_iter().enumerate() {
        let (c, d) = nearest(centroids.view(), row);
        labels[i] = c;
        dists[i] = d;
    }
    let mut counts = vec![0usize; k];
    for &c in labels.iter() {
        counts[c] += 1;
    }
    for empty in 0..k {
        if counts[empty] > 0 {
            continue;
        }
        let donor = (0..labels.len())
            .filter(|&i| counts[labels[i]] > 1)
            .fold(None, |best: Option<usize>, i| match best {
                Some(b) if dists[b] >= dists[i] => Some(b),
                _ => Some(i),
            })
            .expect("k <= n guarantees a donor");
        counts[labels[donor]] -= 1;
        counts[empty] = 1;
        labels[donor] = empty;
        dists[donor] = 0.0;
        centroids.row_mut(empty).assign(&f.row(donor));
    }
}

fn check_k(n: usize, k: usize) -> Result<()> {
    if k == 0 || k > n {
        Err(Error::InvalidK { k, n })
    } else {
        Ok(())
    }
}

/// A single restart. Iterates until the assignment is a fixed point of
/// the Lloyd map or [`MAX_ITER`] is reached.
pub fn lloyd_run(f: ArrayView2<f64>, k: usize, seed: u64) -> Result<LloydRun> {
    let n = f.nrows();
    check_k(n, k)?;
    let mut rng = seed::rng(seed);
    let mut centroids = plusplus_init(f, k, &mut rng);
    let mut labels = vec![usize::MAX; n];
    let mut next = vec![0usize; n];
    let mut history = Vec::new();
    let mut iterations = 0;
    while iterations < MAX_ITER {
        assign_all(f, &mut centroids, &mut next);
        if next == labels {
            break;
        }
        std::mem::swap(&mut labels, &mut next);
        centroids = cluster_means(f, &labels, k);
        history.push(inertia(f, centroids.view(), &labels));
        iterations += 1;
    }
    let mut sizes = vec![0usize; k];
    for &c in &labels {
        sizes[c] += 1;
    }
    let inertia = history.last().copied().unwrap_or(0.0);
    Ok(LloydRun {
        model: ClusterModel {
            centroids,
            sizes,
            membership: labels,
            inertia,
        },
        inertia_history: history,
        iterations,
    })
}

/// k-means with k-means++ seeding and [`N_INIT`] restarts. Restart `r`
/// uses a seed derived from `(seed, r)`; the lowest-inertia run is kept
/// (earliest restart on ties).
pub fn kmeans_fit(f: ArrayView2<f64>, k: usize, seed: u64) -> Result<ClusterModel> {
    check_k(f.nrows(), k)?;
    let runs: Vec<LloydRun> = (0..N_INIT)
        .into_par_iter()
        .map(|r| lloyd_run(f, k, seed::derive(seed, &[r as u64])))
        .collect::<Result<_>>()?;
    let best = runs
        .into_iter()
        .reduce(|best, run| {
            if run.model.inertia < best.model.inertia {
                run
            } else {
                best
            }
        })
        .expect("N_INIT > 0");
    Ok(best.model)
}

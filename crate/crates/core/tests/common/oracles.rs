//! Reference implementations used as independent checks. None of these
//! call into the crate's numerical code paths.

use nalgebra::DMatrix;
use ndarray::{Array2, ArrayView1, ArrayView2};

pub fn sort_median(z: &[f64]) -> f64 {
    let mut s = z.to_vec();
    s.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let n = s.len();
    if n % 2 == 1 {
        s[n / 2]
    } else {
        (s[n / 2 - 1] + s[n / 2]) / 2.0
    }
}

pub fn sort_mad(z: &[f64]) -> f64 {
    let m = sort_median(z);
    let dev: Vec<f64> = z.iter().map(|v| (v - m).abs()).collect();
    1.4826 * sort_median(&dev)
}

/// Counts wins and ties over every (outlier, inlier) pair.
pub fn pairwise_auc(scores: &[f64], y: &[u8]) -> f64 {
    let mut credit = 0.0;
    let mut pairs = 0.0;
    for (i, &yi) in y.iter().enumerate() {
        if yi != 1 {
            continue;
        }
        for (j, &yj) in y.iter().enumerate() {
            if yj != 0 {
                continue;
            }
            pairs += 1.0;
            if scores[i] > scores[j] {
                credit += 1.0;
            } else if scores[i] == scores[j] {
                credit += 0.5;
            }
        }
    }
    credit / pairs
}

/// Classical PCA scores `U S` of the column-centered data via SVD.
pub fn pca_scores(x: ArrayView2<f64>) -> (Array2<f64>, Vec<f64>) {
    let (n, d) = x.dim();
    let means: Vec<f64> = (0..d).map(|j| x.column(j).sum() / n as f64).collect();
    let xc = DMatrix::from_fn(n, d, |i, j| x[[i, j]] - means[j]);
    let svd = xc.svd(true, false);
    let u = svd.u.unwrap();
    let mut order: Vec<usize> = (0..svd.singular_values.len()).collect();
    order.sort_by(|&a, &b| {
        svd.singular_values[b]
            .partial_cmp(&svd.singular_values[a])
            .unwrap()
    });
    let mut scores = Array2::zeros((n, order.len()));
    let mut sv = Vec::new();
    for (c, &o) in order.iter().enumerate() {
        let s = svd.singular_values[o];
        sv.push(s);
        for i in 0..n {
            scores[[i, c]] = u[(i, o)] * s;
        }
    }
    (scores, sv)
}

pub fn sq_dist(a: ArrayView1<f64>, b: ArrayView1<f64>) -> f64 {
    let mut s = 0.0;
    for i in 0..a.len() {
        s += (a[i] - b[i]).powi(2);
    }
    s
}

/// Minimum within-cluster sum of squares over all 2-partitions.
pub fn best_two_partition(f: ArrayView2<f64>) -> (Vec<usize>, f64) {
    let n = f.nrows();
    assert!(n <= 16);
    let mut best = (vec![], f64::INFINITY);
    // Point 0 is always in group 0; skip the empty second group.
    for mask in 1u32..(1 << (n - 1)) {
        let labels: Vec<usize> = (0..n)
            .map(|i| {
                if i == 0 {
                    0
                } else {
                    ((mask >> (i - 1)) & 1) as usize
                }
            })
            .collect();
        let sse = partition_sse(f, &labels, 2);
        if sse < best.1 {
            best = (labels, sse);
        }
    }
    best
}

pub fn partition_sse(f: ArrayView2<f64>, labels: &[usize], k: usize) -> f64 {
    let d = f.ncols();
    let mut total = 0.0;
    for c in 0..k {
        let rows: Vec<usize> = (0..f.nrows()).filter(|&i| labels[i] == c).collect();
        if rows.is_empty() {
            continue;
        }
        let mean: Vec<f64> = (0..d)
            .map(|j| rows.iter().map(|&i| f[[i, j]]).sum::<f64>() / rows.len() as f64)
            .collect();
        for &i in &rows {
            for j in 0..d {
                total += (f[[i, j]] - mean[j]).powi(2);
            }
        }
    }
    total
}

/// True when `a` and `b` describe the same partition up to relabeling.
pub fn same_partition(a: &[usize], b: &[usize]) -> bool {
    let n = a.len();
    (0..n).all(|i| (0..n).all(|j| (a[i] == a[j]) == (b[i] == b[j])))
}

/// Brute-force local score: recompute every direction's median and MAD
/// from the cluster members with sorting, then take the max loss.
pub fn naive_local_score(
    f_new: ArrayView1<f64>,
    centroid: ArrayView1<f64>,
    members: &[ArrayView1<f64>],
    directions: &[Vec<f64>],
    svm_c: Option<f64>,
) -> f64 {
    let q = f_new.len();
    let mut best = 0.0f64;
    for u in directions {
        let mut proj_new = 0.0;
        for j in 0..q {
            proj_new += u[j] * (f_new[j] - centroid[j]);
        }
        let z: Vec<f64> = members
            .iter()
            .map(|m| (0..q).map(|j| u[j] * (m[j] - centroid[j])).sum())
            .collect();
        let loss = match svm_c {
            Some(c) => (proj_new.abs() - c * sort_mad(&z)).max(0.0),
            None => (proj_new - sort_median(&z)).abs() / sort_mad(&z).max(1e-9),
        };
        best = best.max(loss);
    }
    best
}

/// Random projection depth outlyingness in the original coordinates:
/// `max_u |u.x - med(u.X)| / MAD(u.X)`.
pub fn rpd_outlyingness(
    x_train: ArrayView2<f64>,
    x_new: ArrayView2<f64>,
    directions: &[Vec<f64>],
) -> Vec<f64> {
    let stats: Vec<(f64, f64)> = directions
        .iter()
        .map(|u| {
            let z: Vec<f64> = x_train
                .rows()
                .into_iter()
                .map(|r| r.iter().zip(u).map(|(a, b)| a * b).sum())
                .collect();
            (sort_median(&z), sort_mad(&z))
        })
        .collect();
    x_new
        .rows()
        .into_iter()
        .map(|r| {
            directions
                .iter()
                .zip(&stats)
                .map(|(u, (med, mad))| {
                    let p: f64 = r.iter().zip(u).map(|(a, b)| a * b).sum();
                    (p - med).abs() / mad
                })
                .fold(0.0, f64::max)
        })
        .collect()
}

pub fn argsort(v: &[f64]) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..v.len()).collect();
    idx.sort_by(|&a, &b| v[a].partial_cmp(&v[b]).unwrap().then(a.cmp(&b)));
    idx
}

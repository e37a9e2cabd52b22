//! Stage 1: RBF kernel PCA.
//!
//! Builds the Gram matrix of the training sample, double-centers it, keeps
//! the leading eigenpairs and maps new points through the same centered
//! kernel expansion. Training features are `sqrt(lambda_j) * v_ij`; the
//! out-of-sample map divides the centered kernel projection by
//! `sqrt(lambda_j)`, so both agree on the training points.

use nalgebra::{DMatrix, SymmetricEigen};
use ndarray::{Array1, Array2, ArrayView1, ArrayView2, Axis};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Absolute eigenvalue floor; see [`eigen_floor`].
pub const EIGEN_FLOOR_ABS: f64 = 1e-10;
/// Relative eigenvalue floor, as a fraction of the largest eigenvalue.
pub const EIGEN_FLOOR_REL: f64 = 1e-12;

/// Eigenpairs at or below this value are dropped before the map is built.
pub fn eigen_floor(largest: f64) -> f64 {
    EIGEN_FLOOR_ABS.max(EIGEN_FLOOR_REL * largest)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KernelParams {
    gamma: f64,
}

impl KernelParams {
    /// `gamma` must be finite and strictly positive.
    pub fn new(gamma: f64) -> Result<Self> {
        if gamma.is_finite() && gamma > 0.0 {
            Ok(Self { gamma })
        } else {
            Err(Error::InvalidParameter(format!(
                "RBF gamma must be finite and > 0, got {gamma}"
            )))
        }
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }
}

/// Kernel used by a fitted [`KpcaModel`].
///
/// Only the RBF kernel is part of the supported configuration surface.
/// The linear kernel reduces kernel PCA to ordinary PCA and exists so tests
/// can check the eigen machinery against a classical reference.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Kernel {
    Rbf(KernelParams),
    #[doc(hidden)]
    Linear,
}

impl Kernel {
    #[inline]
    fn eval(&self, x: ArrayView1<f64>, y: ArrayView1<f64>) -> f64 {
        match self {
            Kernel::Rbf(p) => rbf_unchecked(x, y, p.gamma),
            Kernel::Linear => x.dot(&y),
        }
    }
}

#[inline]
fn rbf_unchecked(x: ArrayView1<f64>, y: ArrayView1<f64>, gamma: f64) -> f64 {
    let d2: f64 = x.iter().zip(y).map(|(a, b)| (a - b) * (a - b)).sum();
    (-gamma * d2).exp()
}

/// `exp(-gamma * |x - y|^2)`.
pub fn rbf_kernel(x: &[f64], y: &[f64], params: KernelParams) -> Result<f64> {
    if x.len() != y.len() {
        return Err(Error::DimensionMismatch {
            expected: x.len(),
            found: y.len(),
        });
    }
    Ok(rbf_unchecked(
        ArrayView1::from(x),
        ArrayView1::from(y),
        params.gamma,
    ))
}

/// Uncentered kernel matrix of a sample. Symmetric by construction: only
/// the upper triangle is evaluated and then mirrored.
#[derive(Debug, Clone, PartialEq)]
pub struct GramMatrix {
    entries: Array2<f64>,
}

impl GramMatrix {
    pub fn n(&self) -> usize {
        self.entries.nrows()
    }

    pub fn entries(&self) -> ArrayView2<'_, f64> {
        self.entries.view()
    }

    pub fn into_inner(self) -> Array2<f64> {
        self.entries
    }
}

pub fn gram_matrix(x: ArrayView2<f64>, params: KernelParams) -> GramMatrix {
    GramMatrix {
        entries: kernel_matrix(x, Kernel::Rbf(params)),
    }
}

fn kernel_matrix(x: ArrayView2<f64>, kernel: Kernel) -> Array2<f64> {
    let n = x.nrows();
    let upper: Vec<Vec<f64>> = (0..n)
        .into_par_iter()
        .map(|i| {
            let xi = x.row(i);
            (i..n).map(|j| kernel.eval(xi, x.row(j))).collect()
        })
        .collect();
    let mut k = Array2::zeros((n, n));
    for (i, row) in upper.into_iter().enumerate() {
        for (off, v) in row.into_iter().enumerate() {
            let j = i + off;
            k[[i, j]] = v;
            k[[j, i]] = v;
        }
    }
    k
}

/// Output of [`center_gram`]: the double-centered matrix plus the statistics
/// needed to center kernel rows of unseen points.
#[derive(Debug, Clone)]
pub struct CenteredGram {
    pub matrix: Array2<f64>,
    pub row_means: Array1<f64>,
    pub total_mean: f64,
}

/// Double centering `K - 1K - K1 + 1K1` with `1` the matrix of entries `1/N`.
/// `k` must be square and symmetric; the result is exactly symmetric.
pub fn center_gram(k: ArrayView2<f64>) -> CenteredGram {
    let n = k.nrows();
    assert_eq!(n, k.ncols(), "Gram matrix must be square");
    if n == 0 {
        return CenteredGram {
            matrix: Array2::zeros((0, 0)),
            row_means: Array1::zeros(0),
            total_mean: 0.0,
        };
    }
    let row_means = k.mean_axis(Axis(1)).expect("n > 0");
    let total_mean = row_means.mean().expect("n > 0");
    let mut matrix = Array2::zeros((n, n));
    for i in 0..n {
        for j in i..n {
            let v = k[[i, j]] - row_means[i] - row_means[j] + total_mean;
            matrix[[i, j]] = v;
            matrix[[j, i]] = v;
        }
    }
    CenteredGram {
        matrix,
        row_means,
        total_mean,
    }
}

/// Fitted kernel PCA map.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KpcaModel {
    train_points: Array2<f64>,
    kernel: Kernel,
    eigenvalues: Array1<f64>,
    eigenvectors: Array2<f64>,
    gram_row_means: Array1<f64>,
    gram_total_mean: f64,
}

/// Fits an RBF kernel PCA keeping at most `q_requested` components.
///
/// Components whose eigenvalue does not clear [`eigen_floor`] are dropped,
/// so the fitted `q` may be smaller than requested. Fails with
/// [`Error::DegenerateKernel`] when no component survives (all points
/// identical, say).
pub fn fit_kpca(x: ArrayView2<f64>, params: KernelParams, q_requested: usize) -> Result<KpcaModel> {
    fit_kpca_with_kernel(x, Kernel::Rbf(params), q_requested)
}

#[doc(hidden)]
pub fn fit_kpca_with_kernel(
    x: ArrayView2<f64>,
    kernel: Kernel,
    q_requested: usize,
) -> Result<KpcaModel> {
    let n = x.nrows();
    if n < 2 {
        return Err(Error::EmptyInput("kernel PCA needs at least two points"));
    }
    if q_requested == 0 {
        return Err(Error::InvalidParameter(
            "number of kernel components must be >= 1".into(),
        ));
    }
    if let Kernel::Rbf(p) = kernel {
        KernelParams::new(p.gamma)?;
    }
    let centered = center_gram(kernel_matrix(x, kernel).view());

    let dm = DMatrix::from_fn(n, n, |i, j| centered.matrix[[i, j]]);
    let eig = SymmetricEigen::new(dm);
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));

    let largest = eig.eigenvalues[order[0]];
    let floor = eigen_floor(largest);
    let rank = order
        .iter()
        .take_while(|&&i| eig.eigenvalues[i] > floor)
        .count();
    if rank == 0 {
        return Err(Error::DegenerateKernel { largest });
    }
    let q = q_requested.min(rank);

    let mut eigenvalues = Array1::zeros(q);
    let mut eigenvectors = Array2::zeros((n, q));
    for (j, &src) in order.iter().take(q).enumerate() {
        eigenvalues[j] = eig.eigenvalues[src];
        let col = eig.eigenvectors.column(src);
        // Sign convention: the largest-magnitude entry is positive.
        let pivot = (0..n).fold(0, |best, i| {
            if col[i].abs() > col[best].abs() {
                i
            } else {
                best
            }
        });
        let sign = if col[pivot] < 0.0 { -1.0 } else { 1.0 };
        for i in 0..n {
            eigenvectors[[i, j]] = sign * col[i];
        }
    }

    Ok(KpcaModel {
        train_points: x.to_owned(),
        kernel,
        eigenvalues,
        eigenvectors,
        gram_row_means: centered.row_means,
        gram_total_mean: centered.total_mean,
    })
}

impl KpcaModel {
    /// Number of retained components.
    pub fn q(&self) -> usize {
        self.eigenvalues.len()
    }

    /// Input dimension.
    pub fn dim(&self) -> usize {
        self.train_points.ncols()
    }

    pub fn n_train(&self) -> usize {
        self.train_points.nrows()
    }

    pub fn kernel(&self) -> Kernel {
        self.kernel
    }

    pub fn eigenvalues(&self) -> ArrayView1<'_, f64> {
        self.eigenvalues.view()
    }

    pub fn eigenvectors(&self) -> ArrayView2<'_, f64> {
        self.eigenvectors.view()
    }

    pub fn train_points(&self) -> ArrayView2<'_, f64> {
        self.train_points.view()
    }

    pub fn gram_row_means(&self) -> ArrayView1<'_, f64> {
        self.gram_row_means.view()
    }

    pub fn gram_total_mean(&self) -> f64 {
        self.gram_total_mean
    }

    /// Training features `F[i, j] = sqrt(lambda_j) * v_ij`.
    pub fn training_features(&self) -> Array2<f64> {
        let scale = self.eigenvalues.mapv(f64::sqrt);
        &self.eigenvectors * &scale
    }

    /// Maps unseen points into the kernel feature space.
    pub fn transform(&self, x_new: ArrayView2<f64>) -> Result<Array2<f64>> {
        if x_new.ncols() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: x_new.ncols(),
            });
        }
        let m = x_new.nrows();
        let n = self.n_train();
        if m == 0 {
            return Ok(Array2::zeros((0, self.q())));
        }
        let rows: Vec<f64> = (0..m)
            .into_par_iter()
            .flat_map_iter(|r| {
                let xr = x_new.row(r);
                let kx: Vec<f64> = self
                    .train_points
                    .rows()
                    .into_iter()
                    .map(|xi| self.kernel.eval(xr, xi))
                    .collect();
                let row_mean = kx.iter().sum::<f64>() / n as f64;
                kx.into_iter()
                    .zip(self.gram_row_means.iter())
                    .map(move |(k, rm)| k - row_mean - rm + self.gram_total_mean)
            })
            .collect();
        let centered = Array2::from_shape_vec((m, n), rows).expect("shape");
        let inv_sqrt = self.eigenvalues.mapv(|l| 1.0 / l.sqrt());
        Ok(centered.dot(&self.eigenvectors) * &inv_sqrt)
    }
}

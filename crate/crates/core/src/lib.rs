//! Two-stage localized kernel projection-based loss outlyingness (LKPLO).
//!
//! An unsupervised outlier detector built from three pieces:
//!
//! 1. a global kernel PCA map that flattens non-linear inlier structure
//!    ([`kernel`]),
//! 2. k-means localization in the kernel feature space ([`cluster`]),
//! 3. a projection-pursuit score inside each cluster: the maximum over an
//!    ensemble of directions of a robust loss, weighted by the inverse
//!    cluster size ([`plo`]).
//!
//! Dropping stages gives the ablation ladder: [`Variant::Plo`] (linear,
//! global), [`Variant::Kplo`] (kernel, global) and [`Variant::Lkplo`] (the
//! full two-stage model).
//!
//! The crate also carries the evaluation harness used to benchmark the
//! detector: CSV ingestion and synthetic datasets ([`data`]), stratified
//! cross-validation, ROC AUC and randomized hyperparameter search
//! ([`eval`]). The `lkplo` binary exposes all of it on the command line
//! ([`cli`]).
//!
//! ```
//! use lkplo::{data, FitConfig, LossSpec, Variant};
//!
//! let ds = data::gen_three_gaussians(7);
//! let cfg = FitConfig {
//!     variant: Variant::Lkplo,
//!     gamma: 0.5,
//!     q: 8,
//!     k: 3,
//!     loss: LossSpec::SvmLike { c: 2.0 },
//!     ..FitConfig::default()
//! };
//! let model = lkplo::fit(ds.x.view(), &cfg).unwrap();
//! let scores = model.score(ds.x.view()).unwrap();
//! assert_eq!(scores.len(), ds.len());
//! ```

pub mod cli;
pub mod cluster;
pub mod config;
pub mod data;
mod error;
pub mod eval;
pub mod kernel;
pub mod plo;
pub mod seed;
pub mod stats;

pub use cluster::{assign_nearest, kmeans_fit, ClusterModel};
pub use data::{Dataset, Standardizer};
pub use error::{Error, Result};
pub use eval::{roc_auc, stratified_kfold, ExperimentReport, FoldPlan, Protocol};
pub use kernel::{fit_kpca, KernelParams, KpcaModel};
pub use plo::{fit, DirectionConfig, FitConfig, LkploModel, LossSpec, ProjectionStats, Variant};
pub use stats::{mad, median};

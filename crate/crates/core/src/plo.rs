//! Projection-based loss outlyingness: direction ensembles, the two losses,
//! the local max-over-directions score and the cluster-size weighted final
//! score, assembled into the PLO / KPLO / LKPLO model variants.

use std::fmt;
use std::path::Path;
use std::str::FromStr;

use ndarray::{Array1, Array2, ArrayView1, ArrayView2, Axis};
use rand::seq::index;
use rand::Rng as _;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::cluster::{kmeans_fit, ClusterModel};
use crate::kernel::{fit_kpca, KernelParams, KpcaModel};
use crate::seed;
use crate::stats::median_and_mad_in_place;
use crate::{Error, Result};

/// Lower bound applied to the MAD before it divides a deviation.
pub const MAD_FLOOR: f64 = 1e-9;
/// Candidate directions shorter than this are discarded.
pub const MIN_DIRECTION_NORM: f64 = 1e-12;
/// Extra draws allowed per direction type to replace discarded candidates.
pub const RETRY_BUDGET: usize = 16;
/// Tag written into serialized models.
pub const MODEL_FORMAT: &str = "lkplo-model-v1";

const KMEANS_STREAM: u64 = 0x6b6d;
const DIRECTION_STREAM: u64 = 0x6469;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Variant {
    /// Linear features, one global cluster.
    Plo,
    /// Kernel PCA features, one global cluster.
    Kplo,
    /// Kernel PCA features, k-means localization.
    Lkplo,
}

impl Variant {
    pub const ALL: [Variant; 3] = [Variant::Plo, Variant::Kplo, Variant::Lkplo];

    pub fn name(self) -> &'static str {
        match self {
            Variant::Plo => "PLO",
            Variant::Kplo => "KPLO",
            Variant::Lkplo => "LKPLO",
        }
    }

    pub fn uses_kernel(self) -> bool {
        !matches!(self, Variant::Plo)
    }
}

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Variant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "plo" => Ok(Variant::Plo),
            "kplo" => Ok(Variant::Kplo),
            "lkplo" => Ok(Variant::Lkplo),
            other => Err(Error::InvalidParameter(format!(
                "unknown variant {other:?}"
            ))),
        }
    }
}

/// Per-direction loss.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum LossSpec {
    /// `|u.f' - median| / MAD`
    RobustZ,
    /// `max(0, |u.f'| - c * MAD)`
    SvmLike { c: f64 },
}

impl LossSpec {
    pub fn validate(&self) -> Result<()> {
        match *self {
            LossSpec::RobustZ => Ok(()),
            LossSpec::SvmLike { c } if c.is_finite() && c > 0.0 => Ok(()),
            LossSpec::SvmLike { c } => Err(Error::InvalidParameter(format!(
                "SVM-like margin multiplier c must be > 0, got {c}"
            ))),
        }
    }

    #[inline]
    pub fn eval(&self, stats: &ProjectionStats, f_prime: ArrayView1<f64>) -> f64 {
        match *self {
            LossSpec::RobustZ => robust_z_loss(stats, f_prime),
            LossSpec::SvmLike { c } => svm_like_loss(stats, f_prime, c),
        }
    }
}

/// A unit-norm projection direction.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Direction(Array1<f64>);

impl Direction {
    /// Normalizes `v`; `None` if it is too short to normalize.
    pub fn new(v: Array1<f64>) -> Option<Self> {
        let norm = v.dot(&v).sqrt();
        if norm.is_finite() && norm >= MIN_DIRECTION_NORM {
            Some(Direction(v / norm))
        } else {
            None
        }
    }

    pub fn as_array(&self) -> ArrayView1<'_, f64> {
        self.0.view()
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    #[inline]
    pub fn project(&self, f: ArrayView1<f64>) -> f64 {
        self.0.dot(&f)
    }
}

/// Median and scaled MAD of a cluster's centered members projected onto
/// one direction.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProjectionStats {
    pub direction: Direction,
    pub median_proj: f64,
    pub mad_proj: f64,
}

impl ProjectionStats {
    /// `centered` holds one centroid-centered member per row.
    pub fn from_members(direction: Direction, centered: ArrayView2<f64>) -> Self {
        let mut z: Vec<f64> = centered
            .rows()
            .into_iter()
            .map(|r| direction.project(r))
            .collect();
        let (median_proj, mad_proj) = median_and_mad_in_place(&mut z);
        Self {
            direction,
            median_proj,
            mad_proj,
        }
    }
}

pub fn robust_z_loss(stats: &ProjectionStats, f_prime: ArrayView1<f64>) -> f64 {
    (stats.direction.project(f_prime) - stats.median_proj).abs() / stats.mad_proj.max(MAD_FLOOR)
}

/// Hinge on the projection about the centroid; the projection is not
/// shifted by the projected median.
pub fn svm_like_loss(stats: &ProjectionStats, f_prime: ArrayView1<f64>, c: f64) -> f64 {
    (stats.direction.project(f_prime).abs() - c * stats.mad_proj).max(0.0)
}

/// How many directions of each type to generate per cluster.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct DirectionConfig {
    /// Isotropic Gaussian directions.
    pub n_random: usize,
    /// Add the `q` canonical basis vectors.
    pub include_basis: bool,
    /// Directions through single centered members.
    pub n_one_point: usize,
    /// Directions through differences of member pairs.
    pub n_two_points: usize,
    /// At fit time, cap one-point and two-point counts at the number of
    /// members and distinct pairs in each cluster.
    pub cap_to_cluster: bool,
}

impl Default for DirectionConfig {
    fn default() -> Self {
        Self {
            n_random: 100,
            include_basis: true,
            n_one_point: 50,
            n_two_points: 50,
            cap_to_cluster: true,
        }
    }
}

impl DirectionConfig {
    /// Random directions only: the classical random-projection depth setup.
    pub fn random_only(n: usize) -> Self {
        Self {
            n_random: n,
            include_basis: false,
            n_one_point: 0,
            n_two_points: 0,
            cap_to_cluster: true,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_random == 0
            && !self.include_basis
            && self.n_one_point == 0
            && self.n_two_points == 0
        {
            return Err(Error::InvalidParameter(
                "direction config requests no directions".into(),
            ));
        }
        Ok(())
    }

    /// Counts actually used for a cluster with `n_k` members.
    pub fn resolve(&self, n_k: usize) -> Self {
        if !self.cap_to_cluster {
            return *self;
        }
        Self {
            n_one_point: self.n_one_point.min(n_k),
            n_two_points: self.n_two_points.min(pair_count(n_k)),
            ..*self
        }
    }
}

fn pair_count(n: usize) -> usize {
    n * n.saturating_sub(1) / 2
}

/// Maps `0..n(n-1)/2` onto pairs `(i, j)` with `i < j`.
fn pair_from_index(mut idx: usize, n: usize) -> (usize, usize) {
    let mut i = 0;
    while idx >= n - 1 - i {
        idx -= n - 1 - i;
        i += 1;
    }
    (i, i + 1 + idx)
}

/// Builds the direction ensemble for one cluster's centered members.
///
/// Random, basis, one-point and two-point directions are drawn in that
/// order from a single stream seeded by `seed`. Sampling is without
/// replacement while the pool is large enough, otherwise with
/// replacement. Candidates shorter than [`MIN_DIRECTION_NORM`] are skipped
/// and redrawn within [`RETRY_BUDGET`].
pub fn gen_directions(
    f_centered: ArrayView2<f64>,
    config: &DirectionConfig,
    seed: u64,
) -> Result<Vec<Direction>> {
    config.validate()?;
    let (n_k, q) = f_centered.dim();
    if n_k == 0 || q == 0 {
        return Err(Error::EmptyInput(
            "direction generation needs members and features",
        ));
    }
    let mut rng = seed::rng(seed);
    let mut out = Vec::with_capacity(
        config.n_random
            + q * config.include_basis as usize
            + config.n_one_point
            + config.n_two_points,
    );

    for _ in 0..config.n_random {
        for _ in 0..=RETRY_BUDGET {
            let v: Array1<f64> = (0..q)
                .map(|_| rng.sample::<f64, _>(StandardNormal))
                .collect();
            if let Some(d) = Direction::new(v) {
                out.push(d);
                break;
            }
        }
    }

    if config.include_basis {
        for j in 0..q {
            let mut e = Array1::zeros(q);
            e[j] = 1.0;
            out.push(Direction(e));
        }
    }

    let one_point = |i: usize| Direction::new(f_centered.row(i).to_owned());
    draw_from_pool(&mut rng, n_k, config.n_one_point, one_point, &mut out);

    let pairs = pair_count(n_k);
    let two_points = |p: usize| {
        let (i, j) = pair_from_index(p, n_k);
        Direction::new(&f_centered.row(i) - &f_centered.row(j))
    };
    draw_from_pool(&mut rng, pairs, config.n_two_points, two_points, &mut out);

    if out.is_empty() {
        Err(Error::DegenerateDirections)
    } else {
        Ok(out)
    }
}

fn draw_from_pool<F>(
    rng: &mut seed::Rng,
    pool: usize,
    wanted: usize,
    make: F,
    out: &mut Vec<Direction>,
) where
    F: Fn(usize) -> Option<Direction>,
{
    if wanted == 0 || pool == 0 {
        return;
    }
    if wanted <= pool {
        let draws = pool.min(wanted + RETRY_BUDGET);
        let mut taken = 0;
        for idx in index::sample(rng, pool, draws) {
            if taken == wanted {
                break;
            }
            if let Some(d) = make(idx) {
                out.push(d);
                taken += 1;
            }
        }
    } else {
        for _ in 0..wanted {
            for _ in 0..=RETRY_BUDGET {
                if let Some(d) = make(rng.random_range(0..pool)) {
                    out.push(d);
                    break;
                }
            }
        }
    }
}

/// Everything the scorer needs about one cluster.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClusterEntry {
    pub centroid: Array1<f64>,
    pub size: usize,
    pub stats: Vec<ProjectionStats>,
}

/// Maximum loss over the cluster's directions for `f_new - centroid`.
pub fn local_score(f_new: ArrayView1<f64>, entry: &ClusterEntry, loss: &LossSpec) -> f64 {
    let f_prime = &f_new - &entry.centroid;
    entry
        .stats
        .iter()
        .map(|s| loss.eval(s, f_prime.view()))
        .fold(0.0, f64::max)
}

/// Hyperparameters for [`fit`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitConfig {
    pub variant: Variant,
    /// RBF width; ignored by PLO.
    pub gamma: f64,
    /// Requested kernel components; clamped to the usable rank. Ignored by PLO.
    pub q: usize,
    /// Number of clusters; only LKPLO uses it.
    pub k: usize,
    pub loss: LossSpec,
    pub directions: DirectionConfig,
    pub seed: u64,
}

impl Default for FitConfig {
    fn default() -> Self {
        Self {
            variant: Variant::Lkplo,
            gamma: 1.0,
            q: 10,
            k: 5,
            loss: LossSpec::SvmLike { c: 2.0 },
            directions: DirectionConfig::default(),
            seed: 42,
        }
    }
}

/// A fitted detector.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LkploModel {
    variant: Variant,
    dim: usize,
    kpca: Option<KpcaModel>,
    clusters: ClusterModel,
    loss: LossSpec,
    per_cluster: Vec<ClusterEntry>,
    direction_config: DirectionConfig,
    seed: u64,
}

#[derive(Serialize, Deserialize)]
struct ModelFile<M> {
    format: String,
    model: M,
}

/// Score of one point with the intermediate quantities.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PointScore {
    pub cluster: usize,
    pub local: f64,
    pub score: f64,
}

/// Fits one of the three model variants on `x`.
pub fn fit(x: ArrayView2<f64>, config: &FitConfig) -> Result<LkploModel> {
    let (n, d) = x.dim();
    if n < 2 {
        return Err(Error::EmptyInput("fitting needs at least two rows"));
    }
    if d == 0 {
        return Err(Error::EmptyInput("fitting needs at least one feature"));
    }
    config.loss.validate()?;
    config.directions.validate()?;

    let (kpca, features) = if config.variant.uses_kernel() {
        let kpca = fit_kpca(x, KernelParams::new(config.gamma)?, config.q)?;
        let f = kpca.training_features();
        (Some(kpca), f)
    } else {
        (None, x.to_owned())
    };

    let clusters = match config.variant {
        Variant::Lkplo => kmeans_fit(
            features.view(),
            config.k,
            seed::derive(config.seed, &[KMEANS_STREAM]),
        )?,
        Variant::Plo | Variant::Kplo => ClusterModel::single(features.view())?,
    };

    let per_cluster = (0..clusters.k())
        .into_par_iter()
        .map(|c| {
            let members = clusters.members(c);
            let centroid = clusters.centroid(c).to_owned();
            let centered = &features.select(Axis(0), &members) - &centroid;
            let dirs = gen_directions(
                centered.view(),
                &config.directions.resolve(members.len()),
                seed::derive(config.seed, &[DIRECTION_STREAM, c as u64]),
            )?;
            let stats = dirs
                .into_iter()
                .map(|u| ProjectionStats::from_members(u, centered.view()))
                .collect();
            Ok(ClusterEntry {
                centroid,
                size: members.len(),
                stats,
            })
        })
        .collect::<Result<Vec<_>>>()?;

    Ok(LkploModel {
        variant: config.variant,
        dim: d,
        kpca,
        clusters,
        loss: config.loss,
        per_cluster,
        direction_config: config.directions,
        seed: config.seed,
    })
}

impl LkploModel {
    pub fn variant(&self) -> Variant {
        self.variant
    }

    /// Input dimension.
    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Feature-space dimension.
    pub fn q(&self) -> usize {
        self.kpca.as_ref().map_or(self.dim, KpcaModel::q)
    }

    pub fn kpca(&self) -> Option<&KpcaModel> {
        self.kpca.as_ref()
    }

    pub fn clusters(&self) -> &ClusterModel {
        &self.clusters
    }

    pub fn loss(&self) -> LossSpec {
        self.loss
    }

    pub fn per_cluster(&self) -> &[ClusterEntry] {
        &self.per_cluster
    }

    pub fn direction_config(&self) -> DirectionConfig {
        self.direction_config
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Number of directions stored per cluster.
    pub fn direction_counts(&self) -> Vec<usize> {
        self.per_cluster.iter().map(|e| e.stats.len()).collect()
    }

    /// Same model geometry and statistics scored with a different loss.
    pub fn with_loss(&self, loss: LossSpec) -> Result<Self> {
        loss.validate()?;
        Ok(Self {
            loss,
            ..self.clone()
        })
    }

    /// Maps input rows into the space the clusters live in.
    pub fn features(&self, x: ArrayView2<f64>) -> Result<Array2<f64>> {
        if x.ncols() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                found: x.ncols(),
            });
        }
        match &self.kpca {
            Some(kpca) => kpca.transform(x),
            None => Ok(x.to_owned()),
        }
    }

    /// Outlier scores, larger meaning more outlying.
    pub fn score(&self, x: ArrayView2<f64>) -> Result<Vec<f64>> {
        Ok(self
            .score_detailed(x)?
            .into_iter()
            .map(|p| p.score)
            .collect())
    }

    pub fn score_detailed(&self, x: ArrayView2<f64>) -> Result<Vec<PointScore>> {
        let f = self.features(x)?;
        Ok((0..f.nrows())
            .into_par_iter()
            .map(|i| self.score_feature_row(f.row(i)))
            .collect())
    }

    /// Scores a point that is already in feature space.
    pub fn score_feature_row(&self, f: ArrayView1<f64>) -> PointScore {
        let cluster = self.clusters.assign(f);
        let entry = &self.per_cluster[cluster];
        let local = local_score(f, entry, &self.loss);
        PointScore {
            cluster,
            local,
            score: local / entry.size as f64,
        }
    }

    pub fn to_json(&self) -> Result<String> {
        serde_json::to_string(&ModelFile {
            format: MODEL_FORMAT.to_string(),
            model: self,
        })
        .map_err(|e| Error::ModelFormat(e.to_string()))
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let file: ModelFile<LkploModel> =
            serde_json::from_str(s).map_err(|e| Error::ModelFormat(e.to_string()))?;
        if file.format != MODEL_FORMAT {
            return Err(Error::ModelFormat(format!(
                "expected format {MODEL_FORMAT:?}, found {:?}",
                file.format
            )));
        }
        Ok(file.model)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        std::fs::write(path, self.to_json()?).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let s = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json(&s)
    }
}

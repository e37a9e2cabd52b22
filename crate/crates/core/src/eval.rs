//! Evaluation protocol: stratified k-fold cross-validation, ROC AUC, a
//! stratified train/validation split for tuning, randomized hyperparameter
//! search and the PLO / KPLO / LKPLO ablation ladder.
//!
//! Per outer fold: split the training rows 75/25 (stratified), standardize
//! on the inner-train part, pick the hyperparameters with the best
//! validation AUC, re-standardize on the full outer-train rows, refit the
//! winner there and score the held-out fold.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::time::Instant;

use ndarray::ArrayView2;
use rand::seq::SliceRandom;
use rand::Rng as _;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::data::{Dataset, Standardizer};
use crate::plo::{fit, DirectionConfig, FitConfig, LossSpec, Variant};
use crate::seed;
use crate::{Error, Result};

const SPLIT_STREAM: u64 = 0x7370;
const SEARCH_STREAM: u64 = 0x7365;

/// Test-fold index for every sample.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FoldPlan {
    pub k: usize,
    pub assignments: Vec<usize>,
    pub seed: u64,
}

impl FoldPlan {
    pub fn test_indices(&self, fold: usize) -> Vec<usize> {
        (0..self.assignments.len())
            .filter(|&i| self.assignments[i] == fold)
            .collect()
    }

    pub fn train_indices(&self, fold: usize) -> Vec<usize> {
        (0..self.assignments.len())
            .filter(|&i| self.assignments[i] != fold)
            .collect()
    }
}

fn class_indices(y: &[u8]) -> [Vec<usize>; 2] {
    let mut by_class = [Vec::new(), Vec::new()];
    for (i, &l) in y.iter().enumerate() {
        by_class[usize::from(l != 0)].push(i);
    }
    by_class
}

/// Shuffles each class and deals its members round-robin over the folds.
/// The dealing position carries over from one class to the next so fold
/// sizes stay balanced overall.
pub fn stratified_kfold(y: &[u8], k: usize, seed: u64) -> Result<FoldPlan> {
    if k < 2 {
        return Err(Error::Stratification(format!(
            "need at least 2 folds, got {k}"
        )));
    }
    let by_class = class_indices(y);
    for (label, members) in by_class.iter().enumerate() {
        if members.len() < k {
            return Err(Error::Stratification(format!(
                "class {label} has {} samples, fewer than {k} folds",
                members.len()
            )));
        }
    }
    let mut rng = seed::rng(seed);
    let mut assignments = vec![0; y.len()];
    let mut next = 0;
    for mut members in by_class {
        members.shuffle(&mut rng);
        for i in members {
            assignments[i] = next;
            next = (next + 1) % k;
        }
    }
    Ok(FoldPlan {
        k,
        assignments,
        seed,
    })
}

/// Stratified holdout: returns `(train, validation)` positions into `y`,
/// each sorted ascending. Every class contributes
/// `round(n_c * val_fraction)` samples to validation, clamped so both parts
/// keep at least one member of the class.
pub fn stratified_split(
    y: &[u8],
    val_fraction: f64,
    seed: u64,
) -> Result<(Vec<usize>, Vec<usize>)> {
    if !(val_fraction > 0.0 && val_fraction < 1.0) {
        return Err(Error::InvalidParameter(format!(
            "validation fraction must be in (0, 1), got {val_fraction}"
        )));
    }
    let mut rng = seed::rng(seed);
    let (mut train, mut val) = (Vec::new(), Vec::new());
    for (label, mut members) in class_indices(y).into_iter().enumerate() {
        let n = members.len();
        if n < 2 {
            return Err(Error::Stratification(format!(
                "class {label} has {n} samples; the tuning split needs at least 2"
            )));
        }
        members.shuffle(&mut rng);
        let n_val = ((n as f64 * val_fraction).round() as usize).clamp(1, n - 1);
        val.extend_from_slice(&members[..n_val]);
        train.extend_from_slice(&members[n_val..]);
    }
    train.sort_unstable();
    val.sort_unstable();
    Ok((train, val))
}

/// Area under the ROC curve via the Mann-Whitney U statistic; tied
/// scores earn half credit. Label 1 marks the positive (outlier) class.
pub fn roc_auc(scores: &[f64], y: &[u8]) -> Result<f64> {
    if scores.len() != y.len() {
        return Err(Error::InvalidParameter(format!(
            "{} scores but {} labels",
            scores.len(),
            y.len()
        )));
    }
    let n_pos = y.iter().filter(|&&l| l != 0).count();
    let n_neg = y.len() - n_pos;
    if n_pos == 0 || n_neg == 0 {
        return Err(Error::SingleClass);
    }
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[a].total_cmp(&scores[b]));

    // Ranks are 1-based; a tie group spanning positions [start, end) gets
    // the average rank (start + end + 1) / 2, a multiple of 0.5.
    let mut pos_rank_sum = 0.0;
    let mut start = 0;
    while start < order.len() {
        let mut end = start + 1;
        while end < order.len() && scores[order[end]] == scores[order[start]] {
            end += 1;
        }
        let avg_rank = (start + end + 1) as f64 / 2.0;
        let pos_in_group = order[start..end].iter().filter(|&&i| y[i] != 0).count();
        pos_rank_sum += avg_rank * pos_in_group as f64;
        start = end;
    }
    let u = pos_rank_sum - (n_pos * (n_pos + 1)) as f64 / 2.0;
    Ok(u / (n_pos as f64 * n_neg as f64))
}

/// Distribution of one hyperparameter.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ParamDist {
    /// Integers in `[lo, hi]`, inclusive.
    IntRange {
        lo: i64,
        hi: i64,
    },
    LogUniform {
        lo: f64,
        hi: f64,
    },
    Uniform {
        lo: f64,
        hi: f64,
    },
    Categorical {
        choices: Vec<String>,
    },
}

impl ParamDist {
    fn validate(&self, name: &str) -> Result<()> {
        let ok = match self {
            ParamDist::IntRange { lo, hi } => lo < hi,
            ParamDist::LogUniform { lo, hi } => *lo > 0.0 && lo < hi && hi.is_finite(),
            ParamDist::Uniform { lo, hi } => lo < hi && lo.is_finite() && hi.is_finite(),
            ParamDist::Categorical { choices } => !choices.is_empty(),
        };
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidParameter(format!(
                "invalid search range for {name}: {self:?}"
            )))
        }
    }

    fn sample(&self, rng: &mut seed::Rng) -> ParamValue {
        match self {
            ParamDist::IntRange { lo, hi } => ParamValue::Int(rng.random_range(*lo..=*hi)),
            ParamDist::LogUniform { lo, hi } => {
                ParamValue::Real(rng.random_range(lo.ln()..hi.ln()).exp())
            }
            ParamDist::Uniform { lo, hi } => ParamValue::Real(rng.random_range(*lo..*hi)),
            ParamDist::Categorical { choices } => {
                ParamValue::Cat(choices[rng.random_range(0..choices.len())].clone())
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ParamValue {
    Int(i64),
    Real(f64),
    Cat(String),
}

impl ParamValue {
    pub fn as_f64(&self) -> Option<f64> {
        match *self {
            ParamValue::Int(v) => Some(v as f64),
            ParamValue::Real(v) => Some(v),
            ParamValue::Cat(_) => None,
        }
    }

    pub fn as_i64(&self) -> Option<i64> {
        match *self {
            ParamValue::Int(v) => Some(v),
            _ => None,
        }
    }
}

pub type Params = BTreeMap<String, ParamValue>;

/// Ordered set of named hyperparameter distributions. Parameters are
/// sampled in insertion order.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct SearchSpace {
    pub entries: Vec<(String, ParamDist)>,
}

impl SearchSpace {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with(mut self, name: &str, dist: ParamDist) -> Self {
        self.entries.push((name.to_string(), dist));
        self
    }

    pub fn validate(&self) -> Result<()> {
        self.entries.iter().try_for_each(|(n, d)| d.validate(n))
    }

    pub fn sample(&self, rng: &mut seed::Rng) -> Params {
        self.entries
            .iter()
            .map(|(n, d)| (n.clone(), d.sample(rng)))
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trial {
    pub index: usize,
    pub params: Params,
    /// `None` when the objective failed.
    pub value: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub error: Option<String>,
}

impl Trial {
    /// Objective value, with failures counted as negative infinity.
    pub fn objective(&self) -> f64 {
        self.value.unwrap_or(f64::NEG_INFINITY)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SearchResult {
    pub best_index: usize,
    pub best_params: Params,
    pub best_value: f64,
    pub trials: Vec<Trial>,
}

/// Uniform random search maximizing `objective`. Trial `t` samples from a
/// stream derived from `(seed, t)`; trials run in parallel and are logged in
/// index order. Ties go to the earliest trial.
pub fn random_search<F>(
    space: &SearchSpace,
    n_trials: usize,
    seed: u64,
    objective: F,
) -> Result<SearchResult>
where
    F: Fn(&Params) -> Result<f64> + Sync,
{
    if n_trials == 0 {
        return Err(Error::InvalidParameter("n_trials must be >= 1".into()));
    }
    space.validate()?;
    let trials: Vec<Trial> = (0..n_trials)
        .into_par_iter()
        .map(|index| {
            let params = space.sample(&mut seed::rng_for(seed, &[index as u64]));
            let (value, error) = match objective(&params) {
                Ok(v) if !v.is_nan() => (Some(v), None),
                Ok(_) => (None, Some("objective returned NaN".to_string())),
                Err(e) => (None, Some(e.to_string())),
            };
            Trial {
                index,
                params,
                value,
                error,
            }
        })
        .collect();
    let best = trials.iter().fold(&trials[0], |best, t| {
        if t.objective() > best.objective() {
            t
        } else {
            best
        }
    });
    Ok(SearchResult {
        best_index: best.index,
        best_params: best.params.clone(),
        best_value: best.objective(),
        trials,
    })
}

/// A tunable detector: fit on one matrix, score another.
pub trait Method: Sync {
    fn name(&self) -> String;

    fn search_space(&self) -> SearchSpace;

    /// Fits with `params` on `train` and returns one score per `test` row,
    /// larger meaning more outlying.
    fn fit_score(
        &self,
        params: &Params,
        train: ArrayView2<f64>,
        test: ArrayView2<f64>,
        seed: u64,
    ) -> Result<Vec<f64>>;
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LossKind {
    RobustZ,
    SvmLike,
}

/// The detector of this crate wrapped for tuning.
#[derive(Debug, Clone, PartialEq)]
pub struct LkploMethod {
    pub variant: Variant,
    pub loss: LossKind,
    pub directions: DirectionConfig,
}

impl LkploMethod {
    pub fn new(variant: Variant, loss: LossKind) -> Self {
        Self {
            variant,
            loss,
            directions: DirectionConfig::default(),
        }
    }

    /// Parses the command-line method names `plo`, `kplo`, `lkplo-rz`,
    /// `lkplo-svm`. The global variants use the SVM-like loss.
    pub fn from_name(name: &str) -> Result<Self> {
        let m = match name {
            "plo" => Self::new(Variant::Plo, LossKind::SvmLike),
            "kplo" => Self::new(Variant::Kplo, LossKind::SvmLike),
            "lkplo-rz" => Self::new(Variant::Lkplo, LossKind::RobustZ),
            "lkplo-svm" | "lkplo" => Self::new(Variant::Lkplo, LossKind::SvmLike),
            other => {
                return Err(Error::InvalidParameter(format!(
                    "unknown method {other:?} (expected plo, kplo, lkplo-rz or lkplo-svm)"
                )))
            }
        };
        Ok(m)
    }

    /// Builds the fit configuration for one trial. `k` is clamped to the
    /// number of training rows.
    pub fn fit_config(&self, params: &Params, n_train: usize, seed: u64) -> Result<FitConfig> {
        let get = |name: &str| -> Result<f64> {
            params
                .get(name)
                .and_then(ParamValue::as_f64)
                .ok_or_else(|| {
                    Error::InvalidParameter(format!("missing numeric hyperparameter {name:?}"))
                })
        };
        let defaults = FitConfig::default();
        let gamma = if self.variant.uses_kernel() {
            get("gamma")?
        } else {
            defaults.gamma
        };
        let q = if self.variant.uses_kernel() {
            get("q")? as usize
        } else {
            defaults.q
        };
        let k = match self.variant {
            Variant::Lkplo => (get("k")? as usize).clamp(1, n_train.max(1)),
            _ => 1,
        };
        let loss = match self.loss {
            LossKind::RobustZ => LossSpec::RobustZ,
            LossKind::SvmLike => LossSpec::SvmLike { c: get("c")? },
        };
        Ok(FitConfig {
            variant: self.variant,
            gamma,
            q,
            k,
            loss,
            directions: self.directions,
            seed,
        })
    }
}

impl Method for LkploMethod {
    fn name(&self) -> String {
        match (self.variant, self.loss) {
            (Variant::Lkplo, LossKind::SvmLike) => "LKPLO (SVM-like)".into(),
            (Variant::Lkplo, LossKind::RobustZ) => "LKPLO (Robust-Z)".into(),
            (v, LossKind::SvmLike) => v.name().into(),
            (v, LossKind::RobustZ) => format!("{} (Robust-Z)", v.name()),
        }
    }

    /// K in [2, 30], gamma log-uniform in [1e-4, 10], q in [5, 30], c
    /// uniform in [1, 5], restricted to what the variant and loss use.
    fn search_space(&self) -> SearchSpace {
        let mut space = SearchSpace::new();
        if self.variant == Variant::Lkplo {
            space = space.with("k", ParamDist::IntRange { lo: 2, hi: 30 });
        }
        if self.variant.uses_kernel() {
            space = space
                .with("gamma", ParamDist::LogUniform { lo: 1e-4, hi: 1e1 })
                .with("q", ParamDist::IntRange { lo: 5, hi: 30 });
        }
        if self.loss == LossKind::SvmLike {
            space = space.with("c", ParamDist::Uniform { lo: 1.0, hi: 5.0 });
        }
        space
    }

    fn fit_score(
        &self,
        params: &Params,
        train: ArrayView2<f64>,
        test: ArrayView2<f64>,
        seed: u64,
    ) -> Result<Vec<f64>> {
        let cfg = self.fit_config(params, train.nrows(), seed)?;
        fit(train, &cfg)?.score(test)
    }
}

/// Cross-validation and tuning settings.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Protocol {
    pub k_folds: usize,
    pub n_trials: usize,
    pub val_fraction: f64,
    pub seed: u64,
}

impl Default for Protocol {
    fn default() -> Self {
        Self {
            k_folds: 5,
            n_trials: 50,
            val_fraction: 0.25,
            seed: 42,
        }
    }
}

/// Everything produced for one outer fold.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FoldOutcome {
    pub fold: usize,
    pub test_auc: f64,
    pub best_params: Params,
    pub validation_auc: f64,
    pub trials: Vec<Trial>,
    pub inner_standardizer: Standardizer,
    pub outer_standardizer: Standardizer,
}

/// Tunes on the outer-train rows of `fold` and scores its test rows.
pub fn evaluate_fold(
    dataset: &Dataset,
    method: &dyn Method,
    plan: &FoldPlan,
    fold: usize,
    protocol: &Protocol,
) -> Result<FoldOutcome> {
    let outer_train = plan.train_indices(fold);
    let test = plan.test_indices(fold);
    let outer = dataset.subset(&outer_train);
    let test_set = dataset.subset(&test);

    let (inner_idx, val_idx) = stratified_split(
        &outer.y,
        protocol.val_fraction,
        seed::derive(protocol.seed, &[SPLIT_STREAM, fold as u64]),
    )?;
    let inner = outer.subset(&inner_idx);
    let val = outer.subset(&val_idx);
    let inner_std = Standardizer::fit(inner.x.view())?;
    let inner_x = inner_std.apply(inner.x.view())?;
    let val_x = inner_std.apply(val.x.view())?;

    let search = random_search(
        &method.search_space(),
        protocol.n_trials,
        seed::derive(protocol.seed, &[SEARCH_STREAM, fold as u64]),
        |params| {
            let scores = method.fit_score(params, inner_x.view(), val_x.view(), protocol.seed)?;
            roc_auc(&scores, &val.y)
        },
    )?;

    let outer_std = Standardizer::fit(outer.x.view())?;
    let scores = method.fit_score(
        &search.best_params,
        outer_std.apply(outer.x.view())?.view(),
        outer_std.apply(test_set.x.view())?.view(),
        protocol.seed,
    )?;
    Ok(FoldOutcome {
        fold,
        test_auc: roc_auc(&scores, &test_set.y)?,
        best_params: search.best_params,
        validation_auc: search.best_value,
        trials: search.trials,
        inner_standardizer: inner_std,
        outer_standardizer: outer_std,
    })
}

/// Mean and standard deviation of the fold AUCs for one method on one
/// dataset.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub dataset: String,
    pub method: String,
    pub protocol: Protocol,
    pub fold_aucs: Vec<f64>,
    pub mean: f64,
    /// Population standard deviation over folds.
    pub std: f64,
    pub fold_params: Vec<Params>,
    pub fold_validation_aucs: Vec<f64>,
    pub trials: Vec<Vec<Trial>>,
    /// Not serialized, so report files stay byte-reproducible.
    #[serde(skip)]
    pub wall_clock_seconds: f64,
}

pub fn mean_std(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
    (mean, var.sqrt())
}

/// Full protocol for one method on one dataset.
pub fn evaluate_method(
    dataset: &Dataset,
    method: &dyn Method,
    protocol: &Protocol,
) -> Result<ExperimentReport> {
    let started = Instant::now();
    let plan = stratified_kfold(&dataset.y, protocol.k_folds, protocol.seed)?;
    let outcomes: Vec<FoldOutcome> = (0..plan.k)
        .into_par_iter()
        .map(|f| evaluate_fold(dataset, method, &plan, f, protocol))
        .collect::<Result<_>>()?;
    let fold_aucs: Vec<f64> = outcomes.iter().map(|o| o.test_auc).collect();
    let (mean, std) = mean_std(&fold_aucs);
    let mut report = ExperimentReport {
        dataset: dataset.name.clone(),
        method: method.name(),
        protocol: *protocol,
        fold_aucs,
        mean,
        std,
        fold_params: Vec::with_capacity(plan.k),
        fold_validation_aucs: Vec::with_capacity(plan.k),
        trials: Vec::with_capacity(plan.k),
        wall_clock_seconds: 0.0,
    };
    for o in outcomes {
        report.fold_params.push(o.best_params);
        report.fold_validation_aucs.push(o.validation_auc);
        report.trials.push(o.trials);
    }
    report.wall_clock_seconds = started.elapsed().as_secs_f64();
    Ok(report)
}

impl ExperimentReport {
    pub fn csv_header(k_folds: usize) -> String {
        let mut h = String::from("dataset,method,mean,std");
        for f in 1..=k_folds {
            let _ = write!(h, ",fold_{f}");
        }
        h
    }

    pub fn csv_row(&self) -> String {
        let mut row = format!(
            "{},{},{},{}",
            csv_field(&self.dataset),
            csv_field(&self.method),
            self.mean,
            self.std
        );
        for a in &self.fold_aucs {
            let _ = write!(row, ",{a}");
        }
        row
    }

    /// `0.912 ± 0.031`
    pub fn summary(&self) -> String {
        format!("{:.3} ± {:.3}", self.mean, self.std)
    }
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

/// The three ablation variants, all tuned with the SVM-like loss.
pub fn ablation_methods() -> [LkploMethod; 3] {
    Variant::ALL.map(|v| LkploMethod::new(v, LossKind::SvmLike))
}

/// One report per (dataset, variant), dataset-major, variants in PLO,
/// KPLO, LKPLO order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AblationTable {
    pub reports: Vec<ExperimentReport>,
}

pub fn run_ablation(datasets: &[Dataset], protocol: &Protocol) -> Result<AblationTable> {
    let mut reports = Vec::with_capacity(datasets.len() * 3);
    for ds in datasets {
        for m in ablation_methods() {
            reports.push(evaluate_method(ds, &m, protocol)?);
        }
    }
    Ok(AblationTable { reports })
}

impl AblationTable {
    pub fn get(&self, dataset: &str, variant: Variant) -> Option<&ExperimentReport> {
        let name = LkploMethod::new(variant, LossKind::SvmLike).name();
        self.reports
            .iter()
            .find(|r| r.dataset == dataset && r.method == name)
    }

    pub fn to_csv(&self) -> String {
        let k = self.reports.first().map_or(0, |r| r.fold_aucs.len());
        let mut out = ExperimentReport::csv_header(k);
        out.push('\n');
        for r in &self.reports {
            out.push_str(&r.csv_row());
            out.push('\n');
        }
        out
    }

    /// Variants as rows, datasets as columns.
    pub fn to_text(&self) -> String {
        let mut datasets: Vec<&str> = Vec::new();
        for r in &self.reports {
            if !datasets.contains(&r.dataset.as_str()) {
                datasets.push(&r.dataset);
            }
        }
        let col_w = datasets.iter().map(|d| d.len()).max().unwrap_or(0).max(13);
        let mut out = format!("{:<18}", "variant");
        for d in &datasets {
            let _ = write!(out, "  {d:>col_w$}");
        }
        out.push('\n');
        for v in Variant::ALL {
            let _ = write!(out, "{:<18}", v.name());
            for d in &datasets {
                let cell = self
                    .get(d, v)
                    .map_or_else(|| "-".to_string(), |r| r.summary());
                let _ = write!(out, "  {cell:>col_w$}");
            }
            out.push('\n');
        }
        out
    }
}

//! Datasets: CSV ingestion, train-only standardization and the synthetic
//! 2-D benchmarks.
//!
//! CSV layout: UTF-8, one header row, decimal-point reals. Every column
//! except `label` is a feature (kept in header order); `label` is `0` for
//! inliers and `1` for outliers.

use std::f64::consts::PI;
use std::path::Path;

use ndarray::{Array1, Array2, ArrayView2, Axis};
use rand::Rng as _;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::seed;
use crate::{Error, Result};

pub const LABEL_COLUMN: &str = "label";

/// Names accepted by [`synthetic`].
pub const SYNTHETIC_NAMES: [&str; 3] = ["three_gaussians", "inside_outside", "moons"];

#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub name: String,
    pub feature_names: Vec<String>,
    pub x: Array2<f64>,
    /// 0 = inlier, 1 = outlier.
    pub y: Vec<u8>,
}

impl Dataset {
    pub fn new(name: impl Into<String>, x: Array2<f64>, y: Vec<u8>) -> Result<Self> {
        if x.nrows() != y.len() {
            return Err(Error::InvalidParameter(format!(
                "{} rows but {} labels",
                x.nrows(),
                y.len()
            )));
        }
        if let Some(bad) = y.iter().find(|&&l| l > 1) {
            return Err(Error::InvalidParameter(format!(
                "label {bad} is not 0 or 1"
            )));
        }
        let feature_names = (0..x.ncols()).map(|j| format!("x{j}")).collect();
        Ok(Self {
            name: name.into(),
            feature_names,
            x,
            y,
        })
    }

    pub fn len(&self) -> usize {
        self.y.len()
    }

    pub fn is_empty(&self) -> bool {
        self.y.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.x.ncols()
    }

    pub fn n_outliers(&self) -> usize {
        self.y.iter().filter(|&&l| l == 1).count()
    }

    pub fn n_inliers(&self) -> usize {
        self.len() - self.n_outliers()
    }

    /// Rows `idx`, in the given order.
    pub fn subset(&self, idx: &[usize]) -> Dataset {
        Dataset {
            name: self.name.clone(),
            feature_names: self.feature_names.clone(),
            x: self.x.select(Axis(0), idx),
            y: idx.iter().map(|&i| self.y[i]).collect(),
        }
    }

    pub fn save_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let mut w = csv::Writer::from_path(path).map_err(|e| csv_err(path, e))?;
        let header: Vec<&str> = self
            .feature_names
            .iter()
            .map(String::as_str)
            .chain([LABEL_COLUMN])
            .collect();
        w.write_record(&header).map_err(|e| csv_err(path, e))?;
        for (row, label) in self.x.rows().into_iter().zip(&self.y) {
            let rec: Vec<String> = row
                .iter()
                .map(|v| v.to_string())
                .chain([label.to_string()])
                .collect();
            w.write_record(&rec).map_err(|e| csv_err(path, e))?;
        }
        w.flush().map_err(|e| Error::io(path, e))
    }
}

fn csv_err(path: &Path, e: csv::Error) -> Error {
    if let csv::ErrorKind::Io(_) = e.kind() {
        match e.into_kind() {
            csv::ErrorKind::Io(io) => Error::io(path, io),
            _ => unreachable!(),
        }
    } else {
        Error::parse(path, e.to_string())
    }
}

/// Reads a labelled CSV file.
pub fn load_csv(path: impl AsRef<Path>) -> Result<Dataset> {
    let path = path.as_ref();
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .from_reader(file);
    let header: Vec<String> = rdr
        .headers()
        .map_err(|e| csv_err(path, e))?
        .iter()
        .map(|h| h.trim().to_string())
        .collect();
    let label_col = header
        .iter()
        .position(|h| h == LABEL_COLUMN)
        .ok_or_else(|| Error::parse(path, format!("missing {LABEL_COLUMN:?} column in header")))?;
    let feature_names: Vec<String> = header
        .iter()
        .enumerate()
        .filter(|&(j, _)| j != label_col)
        .map(|(_, h)| h.clone())
        .collect();
    let d = feature_names.len();

    let mut values = Vec::new();
    let mut y = Vec::new();
    for rec in rdr.records() {
        let rec = rec.map_err(|e| match e.kind() {
            csv::ErrorKind::UnequalLengths {
                pos,
                expected_len,
                len,
            } => Error::parse(
                path,
                format!(
                    "line {}: ragged row with {len} fields, expected {expected_len}",
                    pos.as_ref().map_or(0, |p| p.line())
                ),
            ),
            _ => csv_err(path, e),
        })?;
        let line = rec.position().map_or(0, |p| p.line());
        for (j, cell) in rec.iter().enumerate() {
            let cell = cell.trim();
            let column = &header[j];
            if j == label_col {
                let label = match cell {
                    "0" => 0,
                    "1" => 1,
                    _ => {
                        return Err(Error::parse(
                            path,
                            format!("line {line}, column {column:?}: label {cell:?} is not 0 or 1"),
                        ))
                    }
                };
                y.push(label);
            } else {
                let v: f64 =
                    cell.parse()
                        .ok()
                        .filter(|v: &f64| v.is_finite())
                        .ok_or_else(|| {
                            Error::parse(
                        path,
                        format!("line {line}, column {column:?}: {cell:?} is not a finite number"),
                    )
                        })?;
                values.push(v);
            }
        }
    }
    let n = y.len();
    let x = Array2::from_shape_vec((n, d), values).expect("rows checked for equal length");
    let name = path.file_stem().map_or_else(
        || "dataset".to_string(),
        |s| s.to_string_lossy().into_owned(),
    );
    Ok(Dataset {
        name,
        feature_names,
        x,
        y,
    })
}

/// Per-feature mean and standard deviation of a training sample.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Standardizer {
    pub means: Array1<f64>,
    /// Population standard deviations; 0 for constant features.
    pub stds: Array1<f64>,
}

impl Standardizer {
    pub fn fit(x_train: ArrayView2<f64>) -> Result<Self> {
        let (n, d) = x_train.dim();
        if n == 0 {
            return Err(Error::EmptyInput("standardizer needs at least one row"));
        }
        let mut means = Array1::zeros(d);
        let mut stds = Array1::zeros(d);
        for (j, col) in x_train.axis_iter(Axis(1)).enumerate() {
            let first = col[0];
            if col.iter().all(|&v| v == first) {
                means[j] = first;
                continue;
            }
            let mean = col.sum() / n as f64;
            let var = col.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n as f64;
            means[j] = mean;
            stds[j] = var.sqrt();
        }
        Ok(Self { means, stds })
    }

    /// Features whose training values were all equal.
    pub fn zero_variance(&self) -> Vec<bool> {
        self.stds.iter().map(|&s| s == 0.0).collect()
    }

    pub fn apply(&self, x: ArrayView2<f64>) -> Result<Array2<f64>> {
        if x.ncols() != self.means.len() {
            return Err(Error::DimensionMismatch {
                expected: self.means.len(),
                found: x.ncols(),
            });
        }
        let scale = self.stds.mapv(|s| if s > 0.0 { s } else { 1.0 });
        Ok((&x - &self.means) / &scale)
    }
}

pub fn fit_standardizer(x_train: ArrayView2<f64>) -> Result<Standardizer> {
    Standardizer::fit(x_train)
}

/// Builds one of the synthetic datasets by name.
pub fn synthetic(name: &str, seed: u64) -> Result<Dataset> {
    match name {
        "three_gaussians" => Ok(gen_three_gaussians(seed)),
        "inside_outside" => Ok(gen_inside_outside(seed)),
        "moons" => Ok(gen_moons(seed)),
        other => Err(Error::InvalidParameter(format!(
            "unknown synthetic dataset {other:?} (expected one of {SYNTHETIC_NAMES:?})"
        ))),
    }
}

fn two_d(name: &str, points: Vec<[f64; 2]>, y: Vec<u8>) -> Dataset {
    let n = points.len();
    let flat = points.into_iter().flatten().collect();
    Dataset {
        name: name.to_string(),
        feature_names: vec!["x".into(), "y".into()],
        x: Array2::from_shape_vec((n, 2), flat).expect("2 columns"),
        y,
    }
}

fn dist(a: [f64; 2], b: [f64; 2]) -> f64 {
    ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2)).sqrt()
}

pub const THREE_GAUSSIAN_CENTERS: [[f64; 2]; 3] = [[0.0, 0.0], [5.0, 0.0], [2.5, 4.5]];

/// Three isotropic Gaussian inlier blobs (150 points each, std 0.5) plus
/// 30 uniform outliers on `[-3, 8]^2` kept at least 2.0 from every center.
pub fn gen_three_gaussians(seed: u64) -> Dataset {
    let mut rng = seed::rng(seed);
    let noise = Normal::new(0.0, 0.5).expect("valid std");
    let mut pts = Vec::with_capacity(480);
    for c in THREE_GAUSSIAN_CENTERS {
        for _ in 0..150 {
            pts.push([c[0] + noise.sample(&mut rng), c[1] + noise.sample(&mut rng)]);
        }
    }
    while pts.len() < 480 {
        let p = [rng.random_range(-3.0..8.0), rng.random_range(-3.0..8.0)];
        if THREE_GAUSSIAN_CENTERS.iter().all(|&c| dist(p, c) >= 2.0) {
            pts.push(p);
        }
    }
    let mut y = vec![0u8; 450];
    y.extend([1u8; 30]);
    two_d("three_gaussians", pts, y)
}

/// A ring of 400 inliers (radius ~ N(3, 0.15)), 20 outliers in a tight
/// blob at the origin and 20 uniform outliers on `[-6, 6]^2` away from the
/// ring band `[2.2, 3.8]`.
pub fn gen_inside_outside(seed: u64) -> Dataset {
    let mut rng = seed::rng(seed);
    let radius = Normal::new(3.0, 0.15).expect("valid std");
    let blob = Normal::new(0.0, 0.2).expect("valid std");
    let mut pts = Vec::with_capacity(440);
    for _ in 0..400 {
        let r = radius.sample(&mut rng);
        let theta = rng.random_range(0.0..2.0 * PI);
        pts.push([r * theta.cos(), r * theta.sin()]);
    }
    while pts.len() < 420 {
        let p = [blob.sample(&mut rng), blob.sample(&mut rng)];
        if dist(p, [0.0, 0.0]) < 1.0 {
            pts.push(p);
        }
    }
    while pts.len() < 440 {
        let p = [rng.random_range(-6.0..6.0), rng.random_range(-6.0..6.0)];
        let r = dist(p, [0.0, 0.0]);
        if !(2.2..=3.8).contains(&r) {
            pts.push(p);
        }
    }
    let mut y = vec![0u8; 400];
    y.extend([1u8; 40]);
    two_d("inside_outside", pts, y)
}

/// Two interleaving unit half-circles (200 points each, Gaussian noise std
/// 0.08) plus 25 uniform outliers in the inlier bounding box grown by 1.0,
/// each at least 0.3 from every inlier.
pub fn gen_moons(seed: u64) -> Dataset {
    let mut rng = seed::rng(seed);
    let noise = Normal::new(0.0, 0.08).expect("valid std");
    let per_moon = 200;
    let mut pts = Vec::with_capacity(425);
    for i in 0..per_moon {
        let t = PI * i as f64 / (per_moon - 1) as f64;
        pts.push([t.cos(), t.sin()]);
    }
    for i in 0..per_moon {
        let t = PI * i as f64 / (per_moon - 1) as f64;
        pts.push([1.0 - t.cos(), 1.0 - t.sin() - 0.5]);
    }
    for p in pts.iter_mut() {
        p[0] += noise.sample(&mut rng);
        p[1] += noise.sample(&mut rng);
    }
    let (mut lo, mut hi) = ([f64::INFINITY; 2], [f64::NEG_INFINITY; 2]);
    for p in &pts {
        for a in 0..2 {
            lo[a] = lo[a].min(p[a]);
            hi[a] = hi[a].max(p[a]);
        }
    }
    let inliers = pts.len();
    while pts.len() < inliers + 25 {
        let p = [
            rng.random_range(lo[0] - 1.0..hi[0] + 1.0),
            rng.random_range(lo[1] - 1.0..hi[1] + 1.0),
        ];
        if pts[..inliers].iter().all(|&q| dist(p, q) >= 0.3) {
            pts.push(p);
        }
    }
    let mut y = vec![0u8; inliers];
    y.extend([1u8; 25]);
    two_d("moons", pts, y)
}

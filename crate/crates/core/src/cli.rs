//! The `lkplo` command-line tool.
//!
//! Subcommands: `fit`, `score`, `benchmark`, `ablation`, `generate` and
//! `grid`. Options may come from a TOML config file (`--config`, see
//! [`crate::config`]); flags take precedence. Every command writes its
//! artifact through a temporary file and renames it into place, so an
//! artifact exists only if the command succeeded.

use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use ndarray::Array2;

use crate::config::RunConfig;
use crate::data::{self, Dataset};
use crate::eval::{
    self, evaluate_method, run_ablation, ExperimentReport, LkploMethod, LossKind, Method, Protocol,
};
use crate::plo::{fit, DirectionConfig, FitConfig, LkploModel, LossSpec};
use crate::{Error, Result};

#[derive(Debug, Parser)]
#[command(
    name = "lkplo",
    version,
    about = "Localized kernel projection outlyingness"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Fit a model on a labelled CSV (labels are ignored) and save it as JSON.
    Fit(FitArgs),
    /// Score every row of a CSV with a saved model.
    Score(ScoreArgs),
    /// Cross-validated, tuned ROC AUC of one method on one dataset.
    ///
    /// Writes <out>/report.json (full trial logs) and <out>/report.csv with
    /// columns dataset,method,mean,std,fold_1..fold_k.
    Benchmark(BenchmarkArgs),
    /// PLO / KPLO / LKPLO ablation over the built-in synthetic datasets and
    /// any supplied CSVs.
    ///
    /// Writes <out>/ablation.json, <out>/ablation.csv (columns
    /// dataset,method,mean,std,fold_1..fold_k) and <out>/ablation.txt.
    Ablation(AblationArgs),
    /// Write a synthetic dataset (three_gaussians, inside_outside, moons) as CSV.
    Generate(GenerateArgs),
    /// Score a regular lattice over a 2-D box; writes CSV columns x,y,score.
    Grid(GridArgs),
}

#[derive(Debug, Clone, Default, Args)]
pub struct DirectionArgs {
    /// Random Gaussian directions per cluster.
    #[arg(long)]
    pub n_random: Option<usize>,
    /// Include the canonical basis directions.
    #[arg(long)]
    pub include_basis: Option<bool>,
    /// One-point directions per cluster (capped at the cluster size).
    #[arg(long)]
    pub n_one_point: Option<usize>,
    /// Two-point directions per cluster (capped at the number of pairs).
    #[arg(long)]
    pub n_two_points: Option<usize>,
}

#[derive(Debug, Args)]
pub struct FitArgs {
    /// Training CSV.
    #[arg(long)]
    pub data: PathBuf,
    /// Where to write the model.
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// plo, kplo, lkplo-rz or lkplo-svm.
    #[arg(long)]
    pub method: Option<String>,
    /// rz or svm; overrides the loss implied by --method.
    #[arg(long)]
    pub loss: Option<String>,
    #[arg(long)]
    pub gamma: Option<f64>,
    #[arg(long)]
    pub q: Option<usize>,
    #[arg(long)]
    pub k: Option<usize>,
    #[arg(long)]
    pub c: Option<f64>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[command(flatten)]
    pub directions: DirectionArgs,
}

#[derive(Debug, Args)]
pub struct ScoreArgs {
    #[arg(long)]
    pub model: PathBuf,
    #[arg(long)]
    pub data: PathBuf,
    /// Output CSV with columns row_index,score.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct BenchmarkArgs {
    /// CSV path or synth:<name>.
    #[arg(long)]
    pub data: Option<String>,
    #[arg(long)]
    pub method: Option<String>,
    #[arg(long)]
    pub loss: Option<String>,
    /// Number of outer folds [default: 5].
    #[arg(long)]
    pub folds: Option<usize>,
    /// Search trials per fold [default: 50].
    #[arg(long)]
    pub trials: Option<usize>,
    /// Validation share of each outer-train split [default: 0.25].
    #[arg(long)]
    pub val_fraction: Option<f64>,
    /// Protocol seed; also seeds synthetic data [default: 42].
    #[arg(long)]
    pub seed: Option<u64>,
    /// Output directory [default: .].
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[command(flatten)]
    pub directions: DirectionArgs,
}

#[derive(Debug, Args)]
pub struct AblationArgs {
    /// Extra datasets (CSV path or synth:<name>); repeatable. Without any,
    /// the three synthetic datasets are used.
    #[arg(long)]
    pub data: Vec<String>,
    #[arg(long)]
    pub folds: Option<usize>,
    #[arg(long)]
    pub trials: Option<usize>,
    #[arg(long)]
    pub val_fraction: Option<f64>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[command(flatten)]
    pub directions: DirectionArgs,
}

#[derive(Debug, Args)]
pub struct GenerateArgs {
    /// three_gaussians, inside_outside or moons.
    pub name: String,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long)]
    pub config: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct GridArgs {
    #[arg(long)]
    pub model: PathBuf,
    /// xmin,xmax,ymin,ymax
    #[arg(long, allow_hyphen_values = true)]
    pub bounds: Option<String>,
    /// Points per axis.
    #[arg(long)]
    pub resolution: Option<usize>,
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long)]
    pub config: Option<PathBuf>,
}

/// Runs one parsed command. Progress and summaries go to `stdout`.
pub fn run(cli: Cli, stdout: &mut dyn std::io::Write) -> Result<()> {
    match cli.command {
        Command::Fit(a) => cmd_fit(&a, stdout),
        Command::Score(a) => cmd_score(&a),
        Command::Benchmark(a) => cmd_benchmark(&a, stdout),
        Command::Ablation(a) => cmd_ablation(&a, stdout),
        Command::Generate(a) => cmd_generate(&a),
        Command::Grid(a) => cmd_grid(&a),
    }
}

fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let file_name = path
        .file_name()
        .ok_or_else(|| Error::InvalidParameter(format!("{} is not a file path", path.display())))?;
    let tmp = dir.join(format!(".{}.tmp", file_name.to_string_lossy()));
    std::fs::write(&tmp, bytes).map_err(|e| Error::io(&tmp, e))?;
    std::fs::rename(&tmp, path).map_err(|e| Error::io(path, e))
}

fn out_line(stdout: &mut dyn std::io::Write, line: &str) -> Result<()> {
    writeln!(stdout, "{line}").map_err(|e| Error::io("<stdout>", e))
}

fn parse_loss_kind(s: &str) -> Result<LossKind> {
    match s {
        "rz" | "robust_z" | "robust-z" => Ok(LossKind::RobustZ),
        "svm" | "svm_like" | "svm-like" => Ok(LossKind::SvmLike),
        other => Err(Error::InvalidParameter(format!(
            "unknown loss {other:?} (expected rz or svm)"
        ))),
    }
}

fn method_from(name: Option<&str>, loss: Option<&str>) -> Result<LkploMethod> {
    let mut m = LkploMethod::from_name(name.unwrap_or("lkplo-svm"))?;
    if let Some(l) = loss {
        m.loss = parse_loss_kind(l)?;
    }
    Ok(m)
}

fn directions_from(
    flags: &DirectionArgs,
    n_random: Option<usize>,
    include_basis: Option<bool>,
    n_one_point: Option<usize>,
    n_two_points: Option<usize>,
) -> DirectionConfig {
    let d = DirectionConfig::default();
    DirectionConfig {
        n_random: flags.n_random.or(n_random).unwrap_or(d.n_random),
        include_basis: flags
            .include_basis
            .or(include_basis)
            .unwrap_or(d.include_basis),
        n_one_point: flags.n_one_point.or(n_one_point).unwrap_or(d.n_one_point),
        n_two_points: flags
            .n_two_points
            .or(n_two_points)
            .unwrap_or(d.n_two_points),
        cap_to_cluster: true,
    }
}

/// Resolves a `--data` value: `synth:<name>` or a CSV path.
pub fn load_data(spec: &str, seed: u64) -> Result<Dataset> {
    match spec.strip_prefix("synth:") {
        Some(name) => data::synthetic(name, seed),
        None => data::load_csv(spec),
    }
}

/// Builds the fit configuration for `lkplo fit` from flags and file.
pub fn fit_config(a: &FitArgs, file: &RunConfig) -> Result<FitConfig> {
    let f = &file.fit;
    let method = method_from(
        a.method.as_deref().or(f.method.as_deref()),
        a.loss.as_deref().or(f.loss.as_deref()),
    )?;
    let d = FitConfig::default();
    let loss = match method.loss {
        LossKind::RobustZ => LossSpec::RobustZ,
        LossKind::SvmLike => LossSpec::SvmLike {
            c: a.c.or(f.c).unwrap_or(2.0),
        },
    };
    Ok(FitConfig {
        variant: method.variant,
        gamma: a.gamma.or(f.gamma).unwrap_or(d.gamma),
        q: a.q.or(f.q).unwrap_or(d.q),
        k: a.k.or(f.k).unwrap_or(d.k),
        loss,
        directions: directions_from(
            &a.directions,
            f.n_random,
            f.include_basis,
            f.n_one_point,
            f.n_two_points,
        ),
        seed: a.seed.or(f.seed).unwrap_or(d.seed),
    })
}

fn loss_label(loss: LossSpec) -> String {
    match loss {
        LossSpec::RobustZ => "robust-z".into(),
        LossSpec::SvmLike { c } => format!("svm-like(c={c})"),
    }
}

pub fn cmd_fit(a: &FitArgs, stdout: &mut dyn std::io::Write) -> Result<()> {
    let file = RunConfig::load_optional(a.config.as_deref())?;
    let cfg = fit_config(a, &file)?;
    let ds = data::load_csv(&a.data)?;
    let model = fit(ds.x.view(), &cfg)?;
    write_atomic(&a.out, model.to_json()?.as_bytes())?;
    out_line(
        stdout,
        &format!(
            "variant={} loss={} q={} K={} directions={:?}",
            model.variant(),
            loss_label(model.loss()),
            model.q(),
            model.clusters().k(),
            model.direction_counts()
        ),
    )
}

pub fn cmd_score(a: &ScoreArgs) -> Result<()> {
    let model = LkploModel::load(&a.model)?;
    let ds = data::load_csv(&a.data)?;
    let scores = model.score(ds.x.view())?;
    let mut out = String::from("row_index,score\n");
    for (i, s) in scores.iter().enumerate() {
        out.push_str(&format!("{i},{s}\n"));
    }
    write_atomic(&a.out, out.as_bytes())
}

fn protocol_from(
    folds: Option<usize>,
    trials: Option<usize>,
    val_fraction: Option<f64>,
    seed: Option<u64>,
) -> Protocol {
    let d = Protocol::default();
    Protocol {
        k_folds: folds.unwrap_or(d.k_folds),
        n_trials: trials.unwrap_or(d.n_trials),
        val_fraction: val_fraction.unwrap_or(d.val_fraction),
        seed: seed.unwrap_or(d.seed),
    }
}

fn json_pretty<T: serde::Serialize>(v: &T) -> Result<Vec<u8>> {
    let mut s = serde_json::to_vec_pretty(v).map_err(|e| Error::ModelFormat(e.to_string()))?;
    s.push(b'\n');
    Ok(s)
}

pub fn cmd_benchmark(a: &BenchmarkArgs, stdout: &mut dyn std::io::Write) -> Result<()> {
    let file = RunConfig::load_optional(a.config.as_deref())?;
    let b = &file.benchmark;
    let protocol = protocol_from(
        a.folds.or(b.folds),
        a.trials.or(b.trials),
        a.val_fraction.or(b.val_fraction),
        a.seed.or(b.seed),
    );
    let data_spec = a
        .data
        .as_deref()
        .or(b.data.as_deref())
        .ok_or_else(|| Error::InvalidParameter("benchmark needs --data".into()))?;
    let ds = load_data(data_spec, protocol.seed)?;
    let mut method = method_from(
        a.method.as_deref().or(b.method.as_deref()),
        a.loss.as_deref().or(b.loss.as_deref()),
    )?;
    method.directions = directions_from(
        &a.directions,
        b.n_random,
        b.include_basis,
        b.n_one_point,
        b.n_two_points,
    );

    let report = evaluate_method(&ds, &method, &protocol)?;
    let out = a.out.clone().unwrap_or_else(|| PathBuf::from("."));
    std::fs::create_dir_all(&out).map_err(|e| Error::io(&out, e))?;
    write_atomic(&out.join("report.json"), &json_pretty(&report)?)?;
    let csv = format!(
        "{}\n{}\n",
        ExperimentReport::csv_header(protocol.k_folds),
        report.csv_row()
    );
    write_atomic(&out.join("report.csv"), csv.as_bytes())?;
    eprintln!("{:.1}s elapsed", report.wall_clock_seconds);
    out_line(
        stdout,
        &format!("{} {}: {}", report.dataset, method.name(), report.summary()),
    )
}

pub fn cmd_ablation(a: &AblationArgs, stdout: &mut dyn std::io::Write) -> Result<()> {
    let file = RunConfig::load_optional(a.config.as_deref())?;
    let s = &file.ablation;
    let protocol = protocol_from(
        a.folds.or(s.folds),
        a.trials.or(s.trials),
        a.val_fraction.or(s.val_fraction),
        a.seed.or(s.seed),
    );
    let mut specs: Vec<String> = if !a.data.is_empty() {
        a.data.clone()
    } else {
        s.data.clone().unwrap_or_default()
    };
    if specs.is_empty() {
        specs = data::SYNTHETIC_NAMES
            .iter()
            .map(|n| format!("synth:{n}"))
            .collect();
    }
    let datasets = specs
        .iter()
        .map(|d| load_data(d, protocol.seed))
        .collect::<Result<Vec<_>>>()?;
    let dirs = directions_from(
        &a.directions,
        s.n_random,
        s.include_basis,
        s.n_one_point,
        s.n_two_points,
    );
    let table = if dirs == DirectionConfig::default() {
        run_ablation(&datasets, &protocol)?
    } else {
        let mut reports = Vec::new();
        for ds in &datasets {
            for mut m in eval::ablation_methods() {
                m.directions = dirs;
                reports.push(evaluate_method(ds, &m as &dyn Method, &protocol)?);
            }
        }
        eval::AblationTable { reports }
    };

    let out = a.out.clone().unwrap_or_else(|| PathBuf::from("."));
    std::fs::create_dir_all(&out).map_err(|e| Error::io(&out, e))?;
    write_atomic(&out.join("ablation.json"), &json_pretty(&table)?)?;
    write_atomic(&out.join("ablation.csv"), table.to_csv().as_bytes())?;
    let text = table.to_text();
    write_atomic(&out.join("ablation.txt"), text.as_bytes())?;
    stdout
        .write_all(text.as_bytes())
        .map_err(|e| Error::io("<stdout>", e))
}

pub fn cmd_generate(a: &GenerateArgs) -> Result<()> {
    let file = RunConfig::load_optional(a.config.as_deref())?;
    let seed = a.seed.or(file.generate.seed).unwrap_or(42);
    let ds = data::synthetic(&a.name, seed)?;
    let tmp = a.out.with_extension("csv.tmp");
    ds.save_csv(&tmp)?;
    std::fs::rename(&tmp, &a.out).map_err(|e| Error::io(&a.out, e))
}

/// Row-major lattice: `y` varies slowest, `x` fastest.
pub fn lattice(bounds: [f64; 4], resolution: usize) -> Result<Array2<f64>> {
    let [x0, x1, y0, y1] = bounds;
    if resolution == 0 || !(x0 <= x1 && y0 <= y1) || bounds.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "bad grid: bounds {bounds:?}, resolution {resolution}"
        )));
    }
    let axis = |lo: f64, hi: f64| -> Vec<f64> {
        if resolution == 1 {
            vec![0.5 * (lo + hi)]
        } else {
            (0..resolution)
                .map(|i| lo + (hi - lo) * i as f64 / (resolution - 1) as f64)
                .collect()
        }
    };
    let (xs, ys) = (axis(x0, x1), axis(y0, y1));
    let mut g = Array2::zeros((resolution * resolution, 2));
    for (iy, &y) in ys.iter().enumerate() {
        for (ix, &x) in xs.iter().enumerate() {
            let r = iy * resolution + ix;
            g[[r, 0]] = x;
            g[[r, 1]] = y;
        }
    }
    Ok(g)
}

/// Parses `xmin,xmax,ymin,ymax`.
pub fn parse_bounds(s: &str) -> Result<[f64; 4]> {
    let vals: Vec<f64> = s
        .split(',')
        .map(|v| v.trim().parse::<f64>())
        .collect::<std::result::Result<_, _>>()
        .map_err(|e| Error::InvalidParameter(format!("bounds {s:?}: {e}")))?;
    <[f64; 4]>::try_from(vals)
        .map_err(|_| Error::InvalidParameter(format!("bounds {s:?}: expected xmin,xmax,ymin,ymax")))
}

pub fn cmd_grid(a: &GridArgs) -> Result<()> {
    let file = RunConfig::load_optional(a.config.as_deref())?;
    let model = LkploModel::load(&a.model)?;
    if model.dim() != 2 {
        return Err(Error::DimensionMismatch {
            expected: 2,
            found: model.dim(),
        });
    }
    let bounds = match (&a.bounds, file.grid.bounds) {
        (Some(b), _) => parse_bounds(b)?,
        (None, Some(b)) => b,
        (None, None) => return Err(Error::InvalidParameter("grid needs --bounds".into())),
    };
    let resolution = a.resolution.or(file.grid.resolution).unwrap_or(100);
    let pts = lattice(bounds, resolution)?;
    let scores = model.score(pts.view())?;
    let mut out = String::from("x,y,score\n");
    for (p, s) in pts.rows().into_iter().zip(&scores) {
        out.push_str(&format!("{},{},{}\n", p[0], p[1], s));
    }
    write_atomic(&a.out, out.as_bytes())
}

//! Tuned, cross-validated ROC AUC of one method on one dataset, with the
//! per-fold winning hyperparameters.
//!
//! ```bash
//! cargo run --release -p lkplo --example cross_validation -- [method] [dataset] [trials]
//! ```
//!
//! `method` is one of plo, kplo, lkplo-rz, lkplo-svm; `dataset` is a
//! synthetic name or a CSV path.

use lkplo::eval::{evaluate_method, LkploMethod, Method, ParamValue, Protocol};
use lkplo::{data, Result};

fn main() -> Result<()> {
    let mut args = std::env::args().skip(1);
    let method = LkploMethod::from_name(&args.next().unwrap_or_else(|| "lkplo-svm".into()))?;
    let source = args.next().unwrap_or_else(|| "three_gaussians".into());
    let trials = args.next().map_or(20, |t| t.parse().expect("trial count"));

    let protocol = Protocol {
        n_trials: trials,
        ..Protocol::default()
    };
    let ds = if source.ends_with(".csv") {
        data::load_csv(&source)?
    } else {
        data::synthetic(&source, protocol.seed)?
    };

    let report = evaluate_method(&ds, &method, &protocol)?;
    println!("{} on {}: {}", method.name(), ds.name, report.summary());
    for (f, (auc, params)) in report.fold_aucs.iter().zip(&report.fold_params).enumerate() {
        let shown: Vec<String> = params
            .iter()
            .map(|(k, v)| match v {
                ParamValue::Int(i) => format!("{k}={i}"),
                ParamValue::Real(x) => format!("{k}={x:.4}"),
                ParamValue::Cat(c) => format!("{k}={c}"),
            })
            .collect();
        println!(
            "  fold {}: test {auc:.3}, val {:.3}, {}",
            f + 1,
            report.fold_validation_aucs[f],
            shown.join(" ")
        );
    }
    println!("{:.1}s", report.wall_clock_seconds);
    Ok(())
}

//! PLO -> KPLO -> LKPLO ablation on the synthetic datasets.
//!
//! ```bash
//! cargo run --release -p lkplo --example ablation -- [trials] [dataset...]
//! ```

use lkplo::data;
use lkplo::eval::{run_ablation, Protocol};

fn main() -> lkplo::Result<()> {
    let mut args = std::env::args().skip(1);
    let trials = args.next().map_or(50, |t| t.parse().expect("trial count"));
    let names: Vec<String> = args.collect();
    let names = if names.is_empty() {
        data::SYNTHETIC_NAMES
            .iter()
            .map(|s| s.to_string())
            .collect()
    } else {
        names
    };

    let protocol = Protocol {
        n_trials: trials,
        ..Protocol::default()
    };
    let datasets = names
        .iter()
        .map(|n| data::synthetic(n, protocol.seed))
        .collect::<lkplo::Result<Vec<_>>>()?;

    let started = std::time::Instant::now();
    let table = run_ablation(&datasets, &protocol)?;
    print!("{}", table.to_text());
    println!("({:.1}s)", started.elapsed().as_secs_f64());
    for r in &table.reports {
        println!("{} / {}: folds {:?}", r.dataset, r.method, r.fold_aucs);
    }
    Ok(())
}

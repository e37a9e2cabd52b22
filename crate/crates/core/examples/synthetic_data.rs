//! Generate the three synthetic benchmarks and write them as CSV.
//!
//! ```bash
//! cargo run -p lkplo --example synthetic_data -- [out_dir] [seed]
//! ```

use lkplo::data;

fn main() -> lkplo::Result<()> {
    let mut args = std::env::args().skip(1);
    let out = std::path::PathBuf::from(args.next().unwrap_or_else(|| ".".into()));
    let seed = args.next().map_or(42, |s| s.parse().expect("seed"));

    for name in data::SYNTHETIC_NAMES {
        let ds = data::synthetic(name, seed)?;
        let path = out.join(format!("{name}.csv"));
        ds.save_csv(&path)?;
        let lo =
            ds.x.fold_axis(ndarray::Axis(0), f64::INFINITY, |a, &b| a.min(b));
        let hi =
            ds.x.fold_axis(ndarray::Axis(0), f64::NEG_INFINITY, |a, &b| a.max(b));
        println!(
            "{name}: {} inliers, {} outliers, x in [{:.2}, {:.2}], y in [{:.2}, {:.2}] -> {}",
            ds.n_inliers(),
            ds.n_outliers(),
            lo[0],
            hi[0],
            lo[1],
            hi[1],
            path.display()
        );
    }
    Ok(())
}

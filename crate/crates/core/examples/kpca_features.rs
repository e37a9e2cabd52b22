//! Kernel PCA on the ring dataset: eigen-spectrum, out-of-sample mapping,
//! and how far the ring's inner outliers land from the inliers in feature
//! space.
//!
//! ```bash
//! cargo run -p lkplo --example kpca_features
//! ```

use lkplo::data::gen_inside_outside;
use lkplo::{fit_kpca, KernelParams};
use ndarray::{s, Axis};

fn main() -> lkplo::Result<()> {
    let ds = gen_inside_outside(42);
    let inliers = ds.x.slice(s![..400, ..]);
    let model = fit_kpca(inliers, KernelParams::new(1.0)?, 10)?;

    let ev = model.eigenvalues();
    let total: f64 = ev.sum();
    println!("kept {} components", model.q());
    for (i, l) in ev.iter().enumerate() {
        println!(
            "  lambda_{:<2} = {:>9.4}  ({:>5.1}% of kept)",
            i + 1,
            l,
            100.0 * l / total
        );
    }

    let train = model.training_features();
    let center = train.mean_axis(Axis(0)).expect("non-empty");
    let radius = |f: ndarray::ArrayView1<f64>| (&f - &center).mapv(|v| v * v).sum().sqrt();
    let inlier_r: Vec<f64> = train.rows().into_iter().map(radius).collect();
    let mean_r = inlier_r.iter().sum::<f64>() / inlier_r.len() as f64;

    let outliers = model.transform(ds.x.slice(s![400.., ..]))?;
    let blob_r = outliers
        .rows()
        .into_iter()
        .take(20)
        .map(radius)
        .sum::<f64>()
        / 20.0;
    let far_r = outliers
        .rows()
        .into_iter()
        .skip(20)
        .map(radius)
        .sum::<f64>()
        / 20.0;
    println!("mean distance to feature centroid: inliers {mean_r:.3}, inner blob {blob_r:.3}, scattered {far_r:.3}");
    Ok(())
}

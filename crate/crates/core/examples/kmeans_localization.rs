//! k-means in the kernel feature space of the three-blob dataset. Prints
//! the cluster sizes and how each input blob is spread over the clusters
//! for a range of K.
//!
//! ```bash
//! cargo run -p lkplo --example kmeans_localization
//! ```

use lkplo::data::gen_three_gaussians;
use lkplo::{fit_kpca, kmeans_fit, KernelParams};
use ndarray::s;

fn main() -> lkplo::Result<()> {
    let ds = gen_three_gaussians(42);
    let kpca = fit_kpca(ds.x.slice(s![..450, ..]), KernelParams::new(0.5)?, 8)?;
    let f = kpca.training_features();

    for k in [2, 3, 4, 6] {
        let m = kmeans_fit(f.view(), k, 42)?;
        println!("K={k}: inertia {:.3}, sizes {:?}", m.inertia(), m.sizes());
        for blob in 0..3 {
            let mut counts = vec![0usize; k];
            for &c in &m.membership()[blob * 150..(blob + 1) * 150] {
                counts[c] += 1;
            }
            println!("  blob {blob} -> {counts:?}");
        }
    }
    Ok(())
}

//! Fit, save to JSON, reload, and confirm the reloaded model scores new
//! points bit-for-bit the same. Also swaps the loss without refitting.
//!
//! ```bash
//! cargo run -p lkplo --example save_load_model
//! ```

use lkplo::data::gen_three_gaussians;
use lkplo::{fit, FitConfig, LkploModel, LossSpec};

fn main() -> lkplo::Result<()> {
    let ds = gen_three_gaussians(1);
    let cfg = FitConfig {
        gamma: 0.5,
        q: 8,
        k: 3,
        ..FitConfig::default()
    };
    let model = fit(ds.x.view(), &cfg)?;

    let path = std::env::temp_dir().join("lkplo-example-model.json");
    model.save(&path)?;
    let bytes = model.to_json()?.len();
    let back = LkploModel::load(&path)?;

    let probe = gen_three_gaussians(2).x;
    let a = model.score(probe.view())?;
    let b = back.score(probe.view())?;
    let identical = a.iter().zip(&b).all(|(x, y)| x.to_bits() == y.to_bits());
    println!(
        "saved {} ({bytes} bytes), reloaded {} model, identical scores: {identical}",
        path.display(),
        back.variant()
    );

    let rz = back.with_loss(LossSpec::RobustZ)?;
    let strict = back.with_loss(LossSpec::SvmLike { c: 1.0 })?;
    let zeros = |s: &[f64]| s.iter().filter(|&&v| v == 0.0).count();
    println!(
        "zero scores on {} probes: svm c=2 {}, svm c=1 {}, robust-z {}",
        probe.nrows(),
        zeros(&b),
        zeros(&strict.score(probe.view())?),
        zeros(&rz.score(probe.view())?)
    );
    std::fs::remove_file(&path).ok();
    Ok(())
}

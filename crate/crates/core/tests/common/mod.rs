#![allow(dead_code)]

pub mod invariants;
pub mod oracles;

use ndarray::Array2;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

/// Gaussian blobs with the given centers; returns points and blob labels.
pub fn blobs(
    centers: &[[f64; 2]],
    per_blob: usize,
    std: f64,
    seed: u64,
) -> (Array2<f64>, Vec<usize>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = centers.len() * per_blob;
    let mut x = Array2::zeros((n, 2));
    let mut labels = Vec::with_capacity(n);
    for (b, c) in centers.iter().enumerate() {
        for i in 0..per_blob {
            let r = b * per_blob + i;
            x[[r, 0]] = c[0] + std * rng.sample::<f64, _>(StandardNormal);
            x[[r, 1]] = c[1] + std * rng.sample::<f64, _>(StandardNormal);
            labels.push(b);
        }
    }
    (x, labels)
}

pub fn random_matrix(n: usize, d: usize, seed: u64) -> Array2<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Array2::from_shape_fn((n, d), |_| rng.sample::<f64, _>(StandardNormal))
}

/// Runs the binary with `args`, returning (success, stdout, stderr).
pub fn lkplo(args: &[&str]) -> (bool, String, String) {
    let out = std::process::Command::new(env!("CARGO_BIN_EXE_lkplo"))
        .args(args)
        .output()
        .expect("binary runs");
    (
        out.status.success(),
        String::from_utf8_lossy(&out.stdout).into_owned(),
        String::from_utf8_lossy(&out.stderr).into_owned(),
    )
}

pub fn path_str(p: &std::path::Path) -> &str {
    p.to_str().expect("utf-8 path")
}

//! Score a lattice around the ring dataset and draw the decision surface
//! as ASCII art. Shades are score deciles over the lattice, darker meaning
//! more outlying; `o` marks training inliers.
//!
//! ```bash
//! cargo run --release -p lkplo --example boundary_grid
//! ```

use lkplo::cli::lattice;
use lkplo::data::gen_inside_outside;
use lkplo::{fit, FitConfig, LossSpec, Variant};

fn main() -> lkplo::Result<()> {
    let ds = gen_inside_outside(42);
    let inliers = ds.x.slice(ndarray::s![..400, ..]);
    let res = 48;
    let grid = lattice([-5.0, 5.0, -5.0, 5.0], res)?;
    let shades = [' ', '.', ':', '-', '=', '+', '*', '#', '%', '@'];
    let cell = 10.0 / (res - 1) as f64;
    let mut occupied = vec![false; res * res];
    for p in inliers.rows() {
        let col = ((p[0] + 5.0) / cell).round() as usize;
        let row = ((p[1] + 5.0) / cell).round() as usize;
        if col < res && row < res {
            occupied[row * res + col] = true;
        }
    }

    for variant in Variant::ALL {
        let cfg = FitConfig {
            variant,
            gamma: 1.0,
            q: 10,
            k: 8,
            loss: LossSpec::SvmLike { c: 2.0 },
            ..FitConfig::default()
        };
        let scores = fit(inliers, &cfg)?.score(grid.view())?;
        let mut sorted = scores.clone();
        sorted.sort_by(f64::total_cmp);
        let decile = |s: f64| sorted.partition_point(|&v| v < s) * 10 / sorted.len();
        println!("{}:", variant.name());
        // Lattice rows run with y slowest; print the top row first.
        for row in (0..res).rev() {
            let line: String = (0..res)
                .map(|col| {
                    if occupied[row * res + col] {
                        'o'
                    } else {
                        shades[decile(scores[row * res + col]).min(9)]
                    }
                })
                .collect();
            println!("  |{line}|");
        }
    }
    Ok(())
}

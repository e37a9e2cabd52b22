//! Property checks shared by the module test files and the acceptance
//! suite. Each runs `cases` generated inputs with a deterministic proptest
//! runner and reports the first counterexample as an error string.

use lkplo::cluster::{kmeans_fit, lloyd_run};
use lkplo::eval::{evaluate_fold, roc_auc, stratified_kfold, LkploMethod, LossKind, Protocol};
use lkplo::kernel::{
    center_gram, fit_kpca, fit_kpca_with_kernel, gram_matrix, Kernel, KernelParams,
};
use lkplo::plo::{
    fit, gen_directions, local_score, robust_z_loss, svm_like_loss, ClusterEntry, Direction,
    DirectionConfig, FitConfig, LkploModel, LossSpec, ProjectionStats, Variant,
};
use lkplo::{mad, median, Dataset};
use ndarray::{Array1, Array2};
use proptest::prelude::*;
use proptest::test_runner::{Config, RngAlgorithm, TestCaseError, TestRng, TestRunner};

use super::oracles;

fn runner(cases: u32) -> TestRunner {
    let config = Config {
        cases,
        failure_persistence: None,
        max_shrink_iters: 256,
        ..Config::default()
    };
    TestRunner::new_with_rng(config, TestRng::deterministic_rng(RngAlgorithm::ChaCha))
}

fn run<S: Strategy>(
    cases: u32,
    strategy: S,
    test: impl Fn(S::Value) -> Result<(), TestCaseError>,
) -> Result<(), String>
where
    S::Value: std::fmt::Debug,
{
    runner(cases)
        .run(&strategy, test)
        .map_err(|e| e.to_string())
}

pub fn matrix(
    rows: std::ops::RangeInclusive<usize>,
    cols: std::ops::RangeInclusive<usize>,
    lim: f64,
) -> impl Strategy<Value = Array2<f64>> {
    (rows, cols).prop_flat_map(move |(n, d)| {
        prop::collection::vec(-lim..lim, n * d)
            .prop_map(move |v| Array2::from_shape_vec((n, d), v).unwrap())
    })
}

fn kp(g: f64) -> KernelParams {
    KernelParams::new(g).unwrap()
}

// ---------------------------------------------------------------- oracles

pub fn oracle_median_mad(cases: u32) -> Result<(), String> {
    run(cases, prop::collection::vec(-1e3..1e3f64, 1..60), |z| {
        prop_assert_eq!(median(&z).unwrap(), oracles::sort_median(&z));
        prop_assert_eq!(mad(&z).unwrap(), oracles::sort_mad(&z));
        Ok(())
    })
}

pub fn oracle_auc(cases: u32) -> Result<(), String> {
    let strat = (2usize..=200).prop_flat_map(|n| {
        (
            prop::collection::vec(0u8..2, n),
            prop::collection::vec(prop_oneof![(0i32..8).prop_map(f64::from), -5.0..5.0f64], n),
        )
    });
    run(cases, strat, |(mut y, s)| {
        y[0] = 0;
        y[1] = 1;
        prop_assert_eq!(roc_auc(&s, &y).unwrap(), oracles::pairwise_auc(&s, &y));
        Ok(())
    })
}

pub fn oracle_linear_kpca(cases: u32) -> Result<(), String> {
    run(cases, matrix(8..=100, 1..=5, 3.0), |x| {
        let d = x.ncols();
        let model = fit_kpca_with_kernel(x.view(), Kernel::Linear, d).unwrap();
        let (pca, sv) = oracles::pca_scores(x.view());
        // Needs well-separated singular values for a sign-only ambiguity.
        let gaps_ok = sv.windows(2).all(|w| w[0] - w[1] > 1e-3 * sv[0]) && sv[d - 1] > 1e-3 * sv[0];
        if !gaps_ok {
            return Ok(());
        }
        prop_assert_eq!(model.q(), d);
        let f = model.training_features();
        for j in 0..d {
            let sign = if f.column(j).dot(&pca.column(j)) < 0.0 {
                -1.0
            } else {
                1.0
            };
            for i in 0..x.nrows() {
                prop_assert!(
                    (f[[i, j]] - sign * pca[[i, j]]).abs() <= 1e-6,
                    "component {} row {}",
                    j,
                    i
                );
            }
        }
        Ok(())
    })
}

pub fn oracle_local_score(cases: u32) -> Result<(), String> {
    let strat = (
        matrix(6..=50, 1..=5, 3.0),
        any::<u64>(),
        prop::bool::ANY,
        1usize..=4,
        0.05..2.0f64,
        1.0..5.0f64,
    );
    run(cases, strat, |(x, seed, kernel, k, gamma, c)| {
        let n = x.nrows();
        let cfg = FitConfig {
            variant: if kernel { Variant::Lkplo } else { Variant::Plo },
            gamma,
            q: 5,
            k: k.min(n),
            loss: LossSpec::SvmLike { c },
            directions: DirectionConfig {
                n_random: 12,
                include_basis: true,
                n_one_point: 6,
                n_two_points: 6,
                cap_to_cluster: true,
            },
            seed,
        };
        let model = match fit(x.view(), &cfg) {
            Ok(m) => m,
            Err(_) => return Ok(()),
        };
        let train_f = match model.kpca() {
            Some(kpca) => kpca.training_features(),
            None => x.clone(),
        };
        let probe = &x * 1.3;
        let f_new = model.features(probe.view()).unwrap();
        for loss in [LossSpec::SvmLike { c }, LossSpec::RobustZ] {
            let m = model.with_loss(loss).unwrap();
            let detailed = m.score_detailed(probe.view()).unwrap();
            for (r, p) in detailed.iter().enumerate() {
                let entry = &m.per_cluster()[p.cluster];
                let members_idx = m.clusters().members(p.cluster);
                let members: Vec<_> = members_idx.iter().map(|&i| train_f.row(i)).collect();
                let dirs: Vec<Vec<f64>> = entry
                    .stats
                    .iter()
                    .map(|s| s.direction.as_array().to_vec())
                    .collect();
                let svm_c = match loss {
                    LossSpec::SvmLike { c } => Some(c),
                    LossSpec::RobustZ => None,
                };
                let want = oracles::naive_local_score(
                    f_new.row(r),
                    entry.centroid.view(),
                    &members,
                    &dirs,
                    svm_c,
                );
                let tol = 1e-9 * want.abs().max(1.0);
                prop_assert!(
                    (p.local - want).abs() <= tol,
                    "row {}: {} vs {}",
                    r,
                    p.local,
                    want
                );
            }
        }
        Ok(())
    })
}

pub fn oracle_rpd(cases: u32) -> Result<(), String> {
    let strat = (matrix(10..=60, 2..=4, 3.0), any::<u64>());
    run(cases, strat, |(x, seed)| {
        let cfg = FitConfig {
            variant: Variant::Plo,
            loss: LossSpec::RobustZ,
            directions: DirectionConfig::random_only(40),
            seed,
            ..FitConfig::default()
        };
        let model = fit(x.view(), &cfg).unwrap();
        let dirs: Vec<Vec<f64>> = model.per_cluster()[0]
            .stats
            .iter()
            .map(|s| s.direction.as_array().to_vec())
            .collect();
        if model.per_cluster()[0]
            .stats
            .iter()
            .any(|s| s.mad_proj < 1e-6)
        {
            return Ok(());
        }
        let probe = &x * 1.5 + 0.25;
        let n = x.nrows() as f64;
        let ours: Vec<f64> = model
            .score(probe.view())
            .unwrap()
            .into_iter()
            .map(|s| s * n)
            .collect();
        let rpd = oracles::rpd_outlyingness(x.view(), probe.view(), &dirs);
        for (a, b) in ours.iter().zip(&rpd) {
            prop_assert!((a - b).abs() <= 1e-9 * b.abs().max(1.0), "{} vs {}", a, b);
        }
        // Rank identity, ignoring pairs closer than the numerical tolerance.
        let order = oracles::argsort(&rpd);
        for w in order.windows(2) {
            let (i, j) = (w[0], w[1]);
            if rpd[j] - rpd[i] > 1e-9 * rpd[j].abs().max(1.0) {
                prop_assert!(ours[i] < ours[j]);
            }
        }
        Ok(())
    })
}

// ------------------------------------------------------------- invariants

pub fn gram_invariants(cases: u32) -> Result<(), String> {
    run(
        cases,
        (matrix(1..=12, 1..=4, 3.0), 1e-3..1.0f64),
        |(x, g)| {
            let k = gram_matrix(x.view(), kp(g));
            let e = k.entries();
            for i in 0..k.n() {
                prop_assert_eq!(e[[i, i]], 1.0);
                for j in 0..k.n() {
                    prop_assert_eq!(e[[i, j]], e[[j, i]]);
                    prop_assert!(e[[i, j]] > 0.0 && e[[i, j]] <= 1.0);
                }
            }
            Ok(())
        },
    )
}

pub fn centering_invariants(cases: u32) -> Result<(), String> {
    let strat = (1usize..=15)
        .prop_flat_map(|n| matrix(n..=n, n..=n, 2.0))
        .prop_map(|a| &a + &a.t());
    run(cases, strat, |k| {
        let n = k.nrows() as f64;
        let c = center_gram(k.view());
        for row in c.matrix.rows() {
            prop_assert!(row.sum().abs() <= 1e-9 * n);
        }
        prop_assert_eq!(&c.matrix, &c.matrix.t());
        let again = center_gram(c.matrix.view());
        let diff = (&again.matrix - &c.matrix)
            .mapv(f64::abs)
            .fold(0.0, |a: f64, &b| a.max(b));
        prop_assert!(diff <= 1e-9 * n);
        Ok(())
    })
}

pub fn kpca_invariants(cases: u32) -> Result<(), String> {
    let strat = (matrix(3..=15, 1..=3, 2.0), 0.05..2.0f64, 1usize..=16);
    run(cases, strat, |(x, g, q)| {
        let model = match fit_kpca(x.view(), kp(g), q) {
            Ok(m) => m,
            Err(lkplo::Error::DegenerateKernel { .. }) => return Ok(()),
            Err(e) => return Err(TestCaseError::fail(e.to_string())),
        };
        let n = x.nrows();
        prop_assert!(model.q() <= n && model.q() <= q && model.q() >= 1);
        let ev = model.eigenvalues();
        prop_assert!(ev.windows(2).into_iter().all(|w| w[0] >= w[1]));
        prop_assert!(ev.iter().all(|&l| l > lkplo::kernel::eigen_floor(ev[0])));
        let v = model.eigenvectors();
        let gram = v.t().dot(&v);
        for a in 0..model.q() {
            for b in 0..model.q() {
                let want = if a == b { 1.0 } else { 0.0 };
                prop_assert!((gram[[a, b]] - want).abs() <= 1e-8);
            }
        }
        let f = model.training_features();
        let t = model.transform(x.view()).unwrap();
        prop_assert!((&t - &f).iter().all(|d| d.abs() <= 1e-6));
        if model.q() < q {
            // Clamped to the numerical rank: F F^T reproduces the centered Gram.
            let kbar = center_gram(gram_matrix(x.view(), kp(g)).entries()).matrix;
            let recon = f.dot(&f.t());
            prop_assert!((&recon - &kbar).iter().all(|d| d.abs() <= 1e-6));
        }
        Ok(())
    })
}

pub fn kmeans_invariants(cases: u32) -> Result<(), String> {
    let strat = (matrix(2..=20, 1..=3, 5.0), 1usize..=5, any::<u64>());
    run(cases, strat, |(f, k, seed)| {
        let n = f.nrows();
        let k = k.min(n);
        let m = kmeans_fit(f.view(), k, seed).unwrap();
        prop_assert_eq!(m.sizes().iter().sum::<usize>(), n);
        prop_assert!(m.sizes().iter().all(|&s| s >= 1));
        for (i, row) in f.rows().into_iter().enumerate() {
            prop_assert_eq!(
                m.assign(row),
                m.membership()[i],
                "row {} not a fixed point",
                i
            );
        }
        for c in 0..k {
            let idx = m.members(c);
            let mean = f
                .select(ndarray::Axis(0), &idx)
                .mean_axis(ndarray::Axis(0))
                .unwrap();
            prop_assert!((&mean - &m.centroid(c)).iter().all(|d| d.abs() <= 1e-9));
        }
        prop_assert_eq!(&m, &kmeans_fit(f.view(), k, seed).unwrap());
        let run = lloyd_run(f.view(), k, seed).unwrap();
        for w in run.inertia_history.windows(2) {
            prop_assert!(
                w[1] <= w[0] + 1e-9 * w[0].abs().max(1.0),
                "inertia rose {} -> {}",
                w[0],
                w[1]
            );
        }
        Ok(())
    })
}

pub fn direction_invariants(cases: u32) -> Result<(), String> {
    let strat = (
        matrix(1..=10, 1..=6, 3.0),
        0usize..20,
        prop::bool::ANY,
        0usize..20,
        0usize..20,
        any::<u64>(),
    );
    run(cases, strat, |(f, nr, basis, n1, n2, seed)| {
        let cfg = DirectionConfig {
            n_random: nr,
            include_basis: basis,
            n_one_point: n1,
            n_two_points: n2,
            cap_to_cluster: false,
        };
        if cfg.validate().is_err() {
            return Ok(());
        }
        let dirs = gen_directions(f.view(), &cfg, seed).unwrap();
        let requested = nr + if basis { f.ncols() } else { 0 } + n1 + n2;
        prop_assert!(dirs.len() <= requested);
        prop_assert!(dirs.len() >= nr);
        for d in &dirs {
            let norm = d.as_array().dot(&d.as_array()).sqrt();
            prop_assert!((norm - 1.0).abs() <= 1e-9);
        }
        prop_assert_eq!(dirs, gen_directions(f.view(), &cfg, seed).unwrap());
        Ok(())
    })
}

fn stats_strategy(q: usize) -> impl Strategy<Value = ProjectionStats> {
    (
        prop::collection::vec(-3.0..3.0f64, q),
        -5.0..5.0f64,
        0.0..3.0f64,
    )
        .prop_filter_map("nonzero", |(u, med, mad)| {
            Direction::new(Array1::from(u)).map(|direction| ProjectionStats {
                direction,
                median_proj: med,
                mad_proj: mad,
            })
        })
}

pub fn loss_invariants(cases: u32) -> Result<(), String> {
    let strat = (1usize..6).prop_flat_map(|q| {
        (
            stats_strategy(q),
            prop::collection::vec(-10.0..10.0f64, q),
            1e-3..10.0f64,
        )
    });
    run(cases, strat, |(s, f, c)| {
        let f = Array1::from(f);
        let rz = robust_z_loss(&s, f.view());
        let svm = svm_like_loss(&s, f.view(), c);
        prop_assert!(rz >= 0.0 && svm >= 0.0);
        prop_assert!(svm_like_loss(&s, f.view(), c * 2.0) <= svm);
        Ok(())
    })
}

pub fn max_dominance(cases: u32) -> Result<(), String> {
    let strat = (2usize..5).prop_flat_map(|q| {
        (
            prop::collection::vec(stats_strategy(q), 1..8),
            stats_strategy(q),
            prop::collection::vec(-5.0..5.0f64, q),
            prop::bool::ANY,
        )
    });
    run(cases, strat, |(stats, extra, f, svm)| {
        let q = f.len();
        let loss = if svm {
            LossSpec::SvmLike { c: 1.5 }
        } else {
            LossSpec::RobustZ
        };
        let mut entry = ClusterEntry {
            centroid: Array1::zeros(q),
            size: 3,
            stats,
        };
        let f = Array1::from(f);
        let before = local_score(f.view(), &entry, &loss);
        entry.stats.push(extra);
        prop_assert!(local_score(f.view(), &entry, &loss) >= before);
        Ok(())
    })
}

fn small_config(
    variant: Variant,
    k: usize,
    gamma: f64,
    q: usize,
    loss: LossSpec,
    seed: u64,
) -> FitConfig {
    FitConfig {
        variant,
        gamma,
        q,
        k,
        loss,
        directions: DirectionConfig {
            n_random: 10,
            include_basis: true,
            n_one_point: 5,
            n_two_points: 5,
            cap_to_cluster: true,
        },
        seed,
    }
}

pub fn svm_monotone_in_c(cases: u32) -> Result<(), String> {
    let strat = (
        matrix(6..=25, 2..=2, 3.0),
        1usize..=3,
        0.1..2.0f64,
        2usize..=6,
        1.0..5.0f64,
        0.0..4.0f64,
        any::<u64>(),
    );
    run(cases, strat, |(x, k, g, q, c1, dc, seed)| {
        let cfg = small_config(Variant::Lkplo, k, g, q, LossSpec::SvmLike { c: c1 }, seed);
        let m = match fit(x.view(), &cfg) {
            Ok(m) => m,
            Err(_) => return Ok(()),
        };
        let probe = &x * 1.4;
        let s1 = m.score(probe.view()).unwrap();
        let s2 = m
            .with_loss(LossSpec::SvmLike { c: c1 + dc })
            .unwrap()
            .score(probe.view())
            .unwrap();
        prop_assert!(s1.iter().zip(&s2).all(|(a, b)| b <= a));
        prop_assert!(s1.iter().all(|&s| s >= 0.0 && s.is_finite()));
        Ok(())
    })
}

pub fn auc_symmetry(cases: u32) -> Result<(), String> {
    let strat = (2usize..=80).prop_flat_map(|n| {
        (
            prop::collection::vec(0u8..2, n),
            prop::collection::vec(0i32..10, n),
        )
    });
    run(cases, strat, |(mut y, s)| {
        y[0] = 0;
        y[1] = 1;
        let s: Vec<f64> = s.into_iter().map(f64::from).collect();
        let neg: Vec<f64> = s.iter().map(|v| -v).collect();
        let a = roc_auc(&s, &y).unwrap();
        prop_assert_eq!(a + roc_auc(&neg, &y).unwrap(), 1.0);
        let mono: Vec<f64> = s.iter().map(|v| v.exp() * 3.0 - 7.0).collect();
        prop_assert_eq!(roc_auc(&mono, &y).unwrap(), a);
        Ok(())
    })
}

pub fn fold_invariants(cases: u32) -> Result<(), String> {
    let strat = (2usize..=6).prop_flat_map(|k| (Just(k), k..=60usize, k..=20usize, any::<u64>()));
    run(cases, strat, |(k, n0, n1, seed)| {
        let mut y = vec![0u8; n0];
        y.extend(std::iter::repeat_n(1u8, n1));
        let plan = stratified_kfold(&y, k, seed).unwrap();
        let mut seen = vec![0usize; y.len()];
        for f in 0..k {
            for i in plan.test_indices(f) {
                seen[i] += 1;
            }
            let test = plan.test_indices(f);
            for (class, total) in [(0u8, n0), (1u8, n1)] {
                let cnt = test.iter().filter(|&&i| y[i] == class).count();
                prop_assert!(
                    cnt == total / k || cnt == total.div_ceil(k),
                    "fold {} class {}: {}",
                    f,
                    class,
                    cnt
                );
            }
        }
        prop_assert!(seen.iter().all(|&s| s == 1));
        prop_assert_eq!(plan, stratified_kfold(&y, k, seed).unwrap());
        Ok(())
    })
}

pub fn no_leakage(cases: u32) -> Result<(), String> {
    let strat = (
        matrix(26..=32, 2..=2, 3.0),
        6usize..=8,
        any::<u64>(),
        prop::collection::vec(-50.0..50.0f64, 64),
    );
    run(cases, strat, |(x, n_out, seed, noise)| {
        let n = x.nrows();
        let mut y = vec![0u8; n - n_out];
        y.extend(std::iter::repeat_n(1u8, n_out));
        let ds = Dataset::new("leak", x, y).unwrap();
        let protocol = Protocol {
            k_folds: 3,
            n_trials: 3,
            val_fraction: 0.25,
            seed,
        };
        let mut method = LkploMethod::new(Variant::Plo, LossKind::SvmLike);
        method.directions = DirectionConfig::random_only(8);
        let plan = stratified_kfold(&ds.y, 3, seed).unwrap();
        let base = evaluate_fold(&ds, &method, &plan, 0, &protocol).unwrap();

        let mut perturbed = ds.clone();
        for (t, &i) in plan.test_indices(0).iter().enumerate() {
            perturbed.x[[i, 0]] += noise[(2 * t) % 64];
            perturbed.x[[i, 1]] -= noise[(2 * t + 1) % 64];
        }
        let other = evaluate_fold(&perturbed, &method, &plan, 0, &protocol).unwrap();
        prop_assert_eq!(&base.best_params, &other.best_params);
        prop_assert_eq!(&base.trials, &other.trials);
        prop_assert_eq!(&base.inner_standardizer, &other.inner_standardizer);
        prop_assert_eq!(&base.outer_standardizer, &other.outer_standardizer);
        Ok(())
    })
}

pub fn save_load_identity(cases: u32) -> Result<(), String> {
    let strat = (
        matrix(5..=20, 2..=3, 3.0),
        0usize..3,
        prop::bool::ANY,
        1usize..=3,
        any::<u64>(),
        matrix(1..=10, 3..=3, 4.0),
    );
    run(cases, strat, |(x, v, svm, k, seed, probe)| {
        let variant = Variant::ALL[v];
        let loss = if svm {
            LossSpec::SvmLike { c: 2.5 }
        } else {
            LossSpec::RobustZ
        };
        let m = match fit(x.view(), &small_config(variant, k, 0.5, 4, loss, seed)) {
            Ok(m) => m,
            Err(_) => return Ok(()),
        };
        let json = m.to_json().unwrap();
        let back = LkploModel::from_json(&json).unwrap();
        prop_assert_eq!(&back, &m);
        prop_assert_eq!(back.to_json().unwrap(), json);
        let probe = probe.slice(ndarray::s![.., ..x.ncols()]).to_owned();
        let a = m.score(probe.view()).unwrap();
        let b = back.score(probe.view()).unwrap();
        prop_assert!(a.iter().zip(&b).all(|(p, q)| p.to_bits() == q.to_bits()));
        Ok(())
    })
}

pub fn determinism(cases: u32) -> Result<(), String> {
    let strat = (matrix(8..=20, 2..=2, 3.0), 1usize..=3, any::<u64>());
    run(cases, strat, |(x, k, seed)| {
        let cfg = small_config(
            Variant::Lkplo,
            k,
            0.7,
            5,
            LossSpec::SvmLike { c: 2.0 },
            seed,
        );
        let (a, b) = match (fit(x.view(), &cfg), fit(x.view(), &cfg)) {
            (Ok(a), Ok(b)) => (a, b),
            _ => return Ok(()),
        };
        let sa = a.score(x.view()).unwrap();
        let sb = b.score(x.view()).unwrap();
        prop_assert!(sa.iter().zip(&sb).all(|(p, q)| p.to_bits() == q.to_bits()));
        Ok(())
    })
}

//! Acceptance suite. Prints one PASS/FAIL/SKIP line per criterion and exits
//! non-zero if any criterion fails.
//!
//! The CIFAR-10 criterion reads the binary batches from `$DSI_CIFAR10_DIR`
//! (`data_batch_1.bin` .. `data_batch_5.bin`) and is skipped when they are absent.

use std::path::PathBuf;
use std::time::{Duration, Instant};

use dsi_core::distrib::{ks_sorted, wasserstein_sorted};
use dsi_core::metrics::class_distance_sets;
use dsi_core::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

enum Outcome {
    Pass(String),
    Fail(String),
    Skip(String),
}

type Criterion = (&'static str, Duration, fn() -> Outcome);

fn check(ok: bool, detail: String) -> Outcome {
    if ok {
        Outcome::Pass(detail)
    } else {
        Outcome::Fail(detail)
    }
}

fn mean(v: &[f64]) -> f64 {
    v.iter().sum::<f64>() / v.len() as f64
}

fn dsi(data: &LabeledDataset, cfg: &DsiConfig) -> f64 {
    dsi_multiclass(data, cfg).unwrap().dsi
}

/// 1. Same-distribution limit.
fn same_distribution_limit() -> Outcome {
    let run = |m: usize| -> Vec<f64> {
        (0..8)
            .map(|seed| {
                dsi(
                    &generate(&GeneratorSpec::new(Family::Random, m, seed)).unwrap(),
                    &DsiConfig::default(),
                )
            })
            .collect()
    };
    let m1000 = mean(&run(1000));
    let m2000 = mean(&run(2000));
    check(
        (0.004..=0.009).contains(&m1000) && (0.002..=0.005).contains(&m2000) && m2000 < m1000,
        format!("mean DSI 1000/class = {m1000:.4} in [0.004, 0.009]; 2000/class = {m2000:.4} in [0.002, 0.005] and below"),
    )
}

/// 2. Exact ICD/BCD cardinalities on 300 random datasets.
fn cardinality_exactness() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    for trial in 0..300 {
        let k = rng.gen_range(2..=4);
        let sizes: Vec<usize> = (0..k).map(|_| rng.gen_range(2..=60)).collect();
        let n: usize = sizes.iter().sum();
        let d = rng.gen_range(1..=4);
        let points: Vec<f64> = (0..n * d).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let labels: Vec<u32> = sizes
            .iter()
            .enumerate()
            .flat_map(|(c, &m)| std::iter::repeat(c as u32).take(m))
            .collect();
        let data = LabeledDataset::new(points, d, labels, &[]).unwrap();
        let sets = class_distance_sets(&data, &MetricSpec::default()).unwrap();
        for (c, (icd, bcd)) in sets.iter().enumerate() {
            let m = sizes[c];
            if icd.len() != m * (m - 1) / 2 || bcd.len() != m * (n - m) {
                return Outcome::Fail(format!("dataset {trial}, class {c}: |ICD| = {}, |BCD| = {}", icd.len(), bcd.len()));
            }
        }
        // the pairwise case through the two-class routes as well
        let x = &data.classes()[0];
        let y = &data.classes()[1];
        let pair = dsi_core::metrics::bcd_pair(&data, x.id, y.id, &MetricSpec::default()).unwrap();
        if pair.len() != x.rows.len() * y.rows.len() {
            return Outcome::Fail(format!("dataset {trial}: pair BCD has {} values", pair.len()));
        }
    }
    Outcome::Pass("300 datasets, class sizes 2..60: |ICD| = m(m-1)/2, |BCD| = m1*m2".into())
}

fn brute_ecdf(s: &[f64], x: f64) -> f64 {
    s.iter().filter(|&&v| v <= x).count() as f64 / s.len() as f64
}

/// 3. KS and Wasserstein merge sweeps against quadratic references.
fn divergence_oracles() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut worst = 0.0f64;
    for _ in 0..200 {
        let draw = |rng: &mut ChaCha8Rng| {
            let len = rng.gen_range(1..=100);
            let mut v: Vec<f64> = (0..len)
                .map(|_| {
                    // mix of continuous values and grid values to force ties
                    if rng.gen_bool(0.5) {
                        rng.gen_range(0.0..5.0)
                    } else {
                        rng.gen_range(0..20) as f64 * 0.25
                    }
                })
                .collect();
            v.sort_by(f64::total_cmp);
            v
        };
        let p = draw(&mut rng);
        let q = draw(&mut rng);
        let mut xs: Vec<f64> = p.iter().chain(&q).copied().collect();
        xs.sort_by(f64::total_cmp);
        xs.dedup();
        let ks_ref = xs
            .iter()
            .map(|&x| (brute_ecdf(&p, x) - brute_ecdf(&q, x)).abs())
            .fold(0.0, f64::max);
        let w_ref: f64 = xs
            .windows(2)
            .map(|w| (brute_ecdf(&p, w[0]) - brute_ecdf(&q, w[0])).abs() * (w[1] - w[0]))
            .sum();
        worst = worst
            .max((ks_sorted(&p, &q).unwrap() - ks_ref).abs())
            .max((wasserstein_sorted(&p, &q).unwrap() - w_ref).abs());
    }
    check(worst <= 1e-12, format!("200 sample pairs, max abs deviation {worst:.2e} <= 1e-12"))
}

/// 4. Separability ordering of the six generator families.
fn table_ordering() -> Outcome {
    let sep: Vec<(Family, f64)> = Family::ALL
        .iter()
        .map(|&f| {
            let data = generate(&GeneratorSpec::new(f, 1000, 1)).unwrap();
            (f, 1.0 - dsi(&data, &DsiConfig::default()))
        })
        .collect();
    let ordered = sep.windows(2).all(|w| w[0].1 > w[1].1);
    let random = sep[0].1;
    let blobs = sep[5].1;
    let listing: Vec<String> = sep.iter().map(|(f, s)| format!("{f} {s:.3}")).collect();
    check(
        ordered && random > 0.98 && blobs < 0.10,
        format!("1-DSI: {} (strictly decreasing, random > 0.98, blobs < 0.10)", listing.join(" > ")),
    )
}

/// 5. Cluster-SD sweep monotonicity across metrics and divergences.
fn cluster_sd_sweep() -> Outcome {
    let base = GeneratorSpec::new(Family::Blobs, 1000, 1);
    let sds: Vec<f64> = (1..=9).map(f64::from).collect();
    let column = |metric, div| -> Vec<f64> {
        sweep(&base, &sds, &DsiConfig::new(metric, div))
            .unwrap()
            .into_iter()
            .map(|(_, r)| r.dsi)
            .collect()
    };
    let decreasing = |v: &[f64]| v.windows(2).all(|w| w[0] > w[1]);
    let spread = |v: &[f64]| {
        v.iter().copied().fold(f64::MIN, f64::max) - v.iter().copied().fold(f64::MAX, f64::min)
    };
    let ks = column(MetricKind::Euclidean, Divergence::Ks);
    let normw = column(MetricKind::Euclidean, Divergence::WassersteinNormalized);
    let l1 = column(MetricKind::CityBlock, Divergence::Ks);
    let linf = column(MetricKind::Chebyshev, Divergence::Ks);
    check(
        decreasing(&ks) && decreasing(&l1) && decreasing(&linf) && spread(&ks) > spread(&normw),
        format!(
            "SD 1..9 strictly decreasing for euclidean/cityblock/chebyshev; spread KS {:.3} > normW {:.3}",
            spread(&ks),
            spread(&normw)
        ),
    )
}

fn cifar_paths() -> Option<Vec<PathBuf>> {
    let dir = PathBuf::from(std::env::var_os("DSI_CIFAR10_DIR")?);
    let paths: Vec<PathBuf> = (1..=5).map(|i| dir.join(format!("data_batch_{i}.bin"))).collect();
    paths.iter().all(|p| p.is_file()).then_some(paths)
}

/// 6. CIFAR-10 subsample estimate.
fn cifar_subsample() -> Outcome {
    let Some(paths) = cifar_paths() else {
        return Outcome::Skip(
            "CIFAR-10 binary batches not found (set DSI_CIFAR10_DIR to the cifar-10-batches-bin directory)".into(),
        );
    };
    let data = load_cifar10_binary(&paths).unwrap();
    let cfg = DsiConfig {
        subsample: Some(SubsampleConfig {
            size: SubsetSize::Count(1000),
            trials: 8,
            seed: 7,
        }),
        ..DsiConfig::default()
    };
    let est = dsi_estimate(&data, &cfg).unwrap();
    check(
        (0.090..=0.120).contains(&est.mean) && (0.002..=0.012).contains(&est.sd),
        format!("8 x 1000 images: mean {:.4} in [0.090, 0.120], sd {:.4} in [0.002, 0.012]", est.mean, est.sd),
    )
}

fn random_dataset(rng: &mut ChaCha8Rng) -> LabeledDataset {
    let k = rng.gen_range(2..=3);
    let d = rng.gen_range(2..=5);
    let m = rng.gen_range(20..=80);
    let n = k * m;
    let points: Vec<f64> = (0..n * d).map(|_| rng.gen_range(-3.0..3.0)).collect();
    // shift class 1 a little so the index is not trivially tiny
    let labels: Vec<u32> = (0..n).map(|i| (i % k) as u32).collect();
    let points = points
        .chunks(d)
        .zip(&labels)
        .flat_map(|(row, &l)| row.iter().map(move |v| v + f64::from(l) * 0.8))
        .collect();
    LabeledDataset::new(points, d, labels, &[]).unwrap()
}

/// Random orthogonal matrix via Gram-Schmidt on a random square matrix.
fn random_rotation(rng: &mut ChaCha8Rng, d: usize) -> Vec<Vec<f64>> {
    let mut basis: Vec<Vec<f64>> = Vec::new();
    while basis.len() < d {
        let mut v: Vec<f64> = (0..d).map(|_| rng.gen_range(-1.0..1.0)).collect();
        for b in &basis {
            let dot: f64 = v.iter().zip(b).map(|(x, y)| x * y).sum();
            v.iter_mut().zip(b).for_each(|(x, y)| *x -= dot * y);
        }
        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm > 1e-3 {
            basis.push(v.into_iter().map(|x| x / norm).collect());
        }
    }
    basis
}

/// 7. Label swap, row permutation, isometry and scaling invariance.
fn invariance_suite() -> Outcome {
    use rand::seq::SliceRandom;
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let cfg = DsiConfig::default();
    let mut worst = [0.0f64; 4];
    for _ in 0..20 {
        let data = random_dataset(&mut rng);
        let base = dsi(&data, &cfg);
        let d = data.dim();
        let k = data.num_classes() as u32;

        let swapped_labels: Vec<u32> = data.labels().iter().map(|&l| (l + 1) % k).collect();
        let swapped = LabeledDataset::new(data.points().to_vec(), d, swapped_labels, &[]).unwrap();

        let mut order: Vec<usize> = (0..data.len()).collect();
        order.shuffle(&mut rng);
        let permuted = data.select(&order).unwrap();

        let rot = random_rotation(&mut rng, d);
        let shift: Vec<f64> = (0..d).map(|_| rng.gen_range(-50.0..50.0)).collect();
        let moved = data
            .map_points(|p| {
                rot.iter()
                    .zip(&shift)
                    .map(|(r, s)| r.iter().zip(p).map(|(a, b)| a * b).sum::<f64>() + s)
                    .collect()
            })
            .unwrap();

        let c = rng.gen_range(0.01..100.0);
        let scaled = data.map_points(|p| p.iter().map(|v| v * c).collect()).unwrap();

        for (w, other) in worst.iter_mut().zip([&swapped, &permuted, &moved, &scaled]) {
            *w = w.max((dsi(other, &cfg) - base).abs());
        }
    }
    check(
        worst.iter().all(|&w| w < 1e-9),
        format!(
            "20 datasets, max |delta DSI|: label swap {:.1e}, permutation {:.1e}, isometry {:.1e}, scaling {:.1e} (< 1e-9)",
            worst[0], worst[1], worst[2], worst[3]
        ),
    )
}

/// 8. Reports identical with one thread and many.
fn determinism_under_parallelism() -> Outcome {
    let many = std::thread::available_parallelism().map_or(4, |n| n.get()).max(4);
    let pool = |t: usize| rayon::ThreadPoolBuilder::new().num_threads(t).build().unwrap();
    let (single, multi) = (pool(1), pool(many));
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    for i in 0..10 {
        let mut data = random_dataset(&mut rng);
        if i % 2 == 0 {
            // enough rows to span several pairwise blocks
            data = generate(&GeneratorSpec::new(Family::Moons, 300 + 10 * i, i as u64)).unwrap();
        }
        let cfg = DsiConfig {
            subsample: (i % 3 == 0).then_some(SubsampleConfig {
                size: SubsetSize::Fraction(0.8),
                trials: 3,
                seed: i as u64,
            }),
            ..DsiConfig::default()
        };
        let run = || {
            let multi = dsi_multiclass(&data, &cfg).unwrap().without_timing();
            let est = cfg.subsample.map(|_| {
                let e = dsi_estimate(&data, &cfg).unwrap();
                (e.mean, e.sd, e.trials.iter().map(DsiReport::without_timing).collect::<Vec<_>>())
            });
            (multi, est)
        };
        if single.install(run) != multi.install(run) {
            return Outcome::Fail(format!("dataset {i}: reports differ between 1 and {many} threads"));
        }
    }
    Outcome::Pass(format!("10 datasets, 1 thread vs {many} threads: identical reports"))
}

fn main() {
    let criteria: [Criterion; 8] = [
        ("1 same-distribution limit", Duration::from_secs(60), same_distribution_limit),
        ("2 cardinality exactness", Duration::MAX, cardinality_exactness),
        ("3 KS/W oracle equivalence", Duration::from_secs(5), divergence_oracles),
        ("4 family separability ordering", Duration::from_secs(120), table_ordering),
        ("5 cluster-SD monotonicity", Duration::from_secs(120), cluster_sd_sweep),
        ("6 CIFAR-10 subsample estimate", Duration::from_secs(600), cifar_subsample),
        ("7 invariance suite", Duration::MAX, invariance_suite),
        ("8 determinism under parallelism", Duration::MAX, determinism_under_parallelism),
    ];
    let mut failed = 0;
    for (name, budget, run) in criteria {
        let start = Instant::now();
        let outcome = run();
        let elapsed = start.elapsed();
        let outcome = match outcome {
            Outcome::Pass(d) if elapsed > budget => {
                Outcome::Fail(format!("{d}; runtime {elapsed:.1?} over budget {budget:?}"))
            }
            o => o,
        };
        match outcome {
            Outcome::Pass(d) => println!("PASS  {name}: {d} [{elapsed:.1?}]"),
            Outcome::Skip(d) => println!("SKIP  {name}: {d}"),
            Outcome::Fail(d) => {
                failed += 1;
                println!("FAIL  {name}: {d} [{elapsed:.1?}]");
            }
        }
    }
    if failed > 0 {
        println!("{failed} acceptance criteria failed");
        std::process::exit(1);
    }
}

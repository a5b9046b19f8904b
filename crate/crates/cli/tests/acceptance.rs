//! End-to-end acceptance checks. Prints one PASS/FAIL line per criterion
//! and exits non-zero if any criterion fails.

use std::fs;
use std::path::Path;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{ToPrimitive, Zero};

use illumaug::augment::{
    apply_global, augment_frame, augment_sequence, build_m1, preset_by_name, LocalMaskSpec,
};
use illumaug::edt::{edt, edt_brute_force};
use illumaug::metrics::{
    accumulate, best_threshold, compute_metrics, default_thresholds, fm_from_pr, sweep_thresholds,
    ConfusionCounts, MetricsReport, ProbabilityMap, ThresholdReport,
};
use illumaug::model::{
    batch_loss, batch_loss_and_gradient, ClassWeights, ModelParams, FEATURE_DIM, PARAM_COUNT,
};
use illumaug::scenes::Scenario;
use illumaug::{BinaryMask, Error, GroundTruth, Image, RngStream};
use illumaug_cli::{
    cmd_eval, cmd_synth, cmd_train, EvalOptions, SynthOptions, TrainOptions, MODEL_FILE,
};

type Outcome = Result<String, String>;

fn check(cond: bool, msg: impl Into<String>) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg.into())
    }
}

fn random_mask(rng: &mut RngStream) -> BinaryMask {
    let w = rng.int_inclusive(3, 64) as usize;
    let h = rng.int_inclusive(3, 64) as usize;
    let density = rng.real_in(0.01, 0.99);
    let bits: Vec<bool> = (0..w * h).map(|_| rng.chance(density)).collect();
    BinaryMask::from_fn(w, h, |x, y| bits[y * w + x])
}

fn edt_exactness() -> Outcome {
    let start = Instant::now();
    let mut rng = RngStream::new(0xED7, 0);
    let mut compared = 0;
    for i in 0..500 {
        let mask = random_mask(&mut rng);
        match (edt(&mask), edt_brute_force(&mask)) {
            (Ok(a), Ok(b)) => {
                check(
                    a.squared() == b.squared(),
                    format!("mask {i} ({:?}) differs", mask.dims()),
                )?;
                compared += 1;
            }
            (Err(Error::NoBackground), Err(Error::NoBackground)) => {}
            (a, b) => {
                return Err(format!(
                    "mask {i}: inconsistent results {:?} / {:?}",
                    a.err(),
                    b.err()
                ))
            }
        }
    }
    let t = start.elapsed();
    check(t < Duration::from_secs(30), format!("took {t:?}"))?;
    Ok(format!(
        "{compared} of 500 masks equal exactly ({:.2} s)",
        t.as_secs_f64()
    ))
}

fn q(n: u64) -> BigRational {
    BigRational::from_integer(BigInt::from(n))
}

fn exact(num: u64, den: u64, fallback: f64) -> f64 {
    if den == 0 {
        fallback
    } else {
        (q(num) / q(den)).to_f64().unwrap()
    }
}

/// Confusion-matrix metrics in exact rational arithmetic.
fn metric_oracle(c: &ConfusionCounts) -> [f64; 9] {
    let (tp, fp, fn_, tn) = (c.tp, c.fp, c.fn_, c.tn);
    let precision = exact(tp, tp + fp, 0.0);
    let recall = exact(tp, tp + fn_, 0.0);
    let fm = if tp == 0 {
        0.0
    } else {
        let (p, r) = (q(tp) / q(tp + fp), q(tp) / q(tp + fn_));
        (q(2) * &p * &r / (p + r)).to_f64().unwrap()
    };
    let factors = [tp + fp, tp + fn_, tn + fp, tn + fn_];
    let matthews = if factors.contains(&0) {
        0.0
    } else {
        let num = BigInt::from(tp) * BigInt::from(tn) - BigInt::from(fp) * BigInt::from(fn_);
        let den = factors
            .iter()
            .fold(BigInt::from(1), |a, &f| a * BigInt::from(f));
        let mag = BigRational::new(&num * &num, den).to_f64().unwrap().sqrt();
        if num < BigInt::zero() {
            -mag
        } else {
            mag
        }
    };
    [
        recall,
        exact(tn, tn + fp, 1.0),
        exact(fp, fp + tn, 0.0),
        exact(fn_, fn_ + tp, 1.0),
        (q(100) * q(fp + fn_) / q(tp + fp + fn_ + tn))
            .to_f64()
            .unwrap(),
        fm,
        precision,
        exact(tp, tp + fp + fn_, 0.0),
        matthews,
    ]
}

fn metric_oracle_agreement() -> Outcome {
    let mut rng = RngStream::new(0x3E7, 0);
    let mut worst = 0.0f64;
    for _ in 0..1000 {
        let mut draw = || match rng.index(4) {
            0 => 0,
            1 => rng.int_inclusive(1, 20) as u64,
            2 => rng.int_inclusive(0, 100_000) as u64,
            _ => rng.int_inclusive(0, 2_000_000_000) as u64,
        };
        let c = ConfusionCounts::new(draw(), draw(), draw(), draw());
        if c.total() == 0 {
            continue;
        }
        let got: MetricsReport<f64> = compute_metrics(&c).map_err(|e| e.to_string())?;
        for (a, b) in got.values().iter().zip(metric_oracle(&c)) {
            worst = worst.max((a - b).abs());
        }
    }
    check(worst <= 1e-12, format!("max deviation {worst:e}"))?;
    let m: MetricsReport<f64> = compute_metrics(&ConfusionCounts::new(50, 10, 20, 920)).unwrap();
    for (name, got, want) in [
        ("precision", m.precision, 0.8333),
        ("recall", m.recall, 0.7143),
        ("fm", m.fm, 0.7692),
        ("iou", m.iou, 0.6250),
        ("pwc", m.pwc, 3.0),
        ("matthews", m.matthews, 0.7558),
    ] {
        check(
            (got - want).abs() <= 5e-4,
            format!("{name} = {got}, expected {want}"),
        )?;
    }
    Ok(format!(
        "1000 random cases, max deviation {worst:.1e}; worked example matches"
    ))
}

fn reported_value_consistency() -> Outcome {
    let gl = fm_from_pr(0.7562f64, 0.7687);
    let none = fm_from_pr(0.6207f64, 0.4606);
    check((gl - 0.7624).abs() <= 5e-4, format!("GL fm {gl:.5}"))?;
    check(
        (none - 0.5288).abs() <= 5e-4,
        format!("no-augmentation fm {none:.5}"),
    )?;
    Ok(format!("GL {gl:.4} vs 0.7624, none {none:.4} vs 0.5288"))
}

fn random_frame(rng: &mut RngStream) -> (Image, GroundTruth) {
    let w = rng.int_inclusive(16, 96) as usize;
    let h = rng.int_inclusive(16, 72) as usize;
    let data: Vec<u8> = (0..w * h * 3)
        .map(|_| rng.int_inclusive(0, 255) as u8)
        .collect();
    let labels: Vec<bool> = (0..w * h).map(|_| rng.chance(0.1)).collect();
    (
        Image::new(w, h, 3, data).unwrap(),
        GroundTruth::new(w, h, labels).unwrap(),
    )
}

fn augmentation_invariants() -> Outcome {
    let start = Instant::now();
    let preset = preset_by_name("GL").unwrap();
    let mut rng = RngStream::new(0xA46, 0);
    let frames: Vec<(Image, GroundTruth)> = (0..200).map(|_| random_frame(&mut rng)).collect();
    let mut applied = 0;
    let mut sequential = Vec::new();
    for (i, (img, gt)) in frames.iter().enumerate() {
        let mut stream = RngStream::new(99, i as u64);
        let (out, out_gt, record) =
            augment_frame(img, gt, &preset, &mut stream).map_err(|e| e.to_string())?;
        check(out_gt == *gt, format!("frame {i}: labels changed"))?;
        check(
            record.replay(img, gt).map_err(|e| e.to_string())? == (out.clone(), out_gt.clone()),
            format!("frame {i}: replay differs"),
        )?;
        if record.applied {
            applied += 1;
            let spec = LocalMaskSpec {
                center: record.center.unwrap(),
                radius: record.d.unwrap(),
            };
            let m1 = build_m1(&spec, img.dims());
            let global_only =
                apply_global(img, record.z_global.unwrap(), record.sign_global.unwrap()).unwrap();
            let bound = (record.z_local.unwrap() + record.z_global.unwrap()) as i32;
            let (w, h) = img.dims();
            for y in 0..h {
                for x in 0..w {
                    for c in 0..3 {
                        let delta = out.get(x, y, c) as i32 - img.get(x, y, c) as i32;
                        check(
                            delta.abs() <= bound,
                            format!("frame {i}: |delta| {delta} > {bound}"),
                        )?;
                        if !m1.get(x, y) {
                            check(
                                out.get(x, y, c) == global_only.get(x, y, c),
                                format!(
                                    "frame {i}: local effect leaked outside the disc at ({x},{y})"
                                ),
                            )?;
                        }
                    }
                }
            }
        } else {
            check(out == *img, format!("frame {i}: unapplied frame changed"))?;
        }
        sequential.push((out, out_gt, record));
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(8)
        .build()
        .unwrap();
    let parallel = pool
        .install(|| augment_sequence(&frames, &preset, 99))
        .map_err(|e| e.to_string())?;
    check(
        parallel == sequential,
        "8-worker run differs from sequential",
    )?;
    let t = start.elapsed();
    check(t < Duration::from_secs(60), format!("took {t:?}"))?;
    Ok(format!(
        "200 frames ({applied} augmented), parallel == sequential, replay exact ({:.2} s)",
        t.as_secs_f64()
    ))
}

fn gradient_check() -> Outcome {
    let h = 1e-5;
    let mut worst = 0.0f64;
    for draw in 0..20u64 {
        let mut rng = RngStream::new(0x6AD, draw);
        let flat: Vec<f64> = (0..PARAM_COUNT).map(|_| rng.real_in(-1.0, 1.0)).collect();
        let params = ModelParams::from_flat(flat.clone()).unwrap();
        let n = rng.int_inclusive(8, 64) as usize;
        let feats: Vec<[f64; FEATURE_DIM]> = (0..n)
            .map(|_| {
                let mut f = [1.0; FEATURE_DIM];
                for v in f.iter_mut().take(FEATURE_DIM - 1) {
                    *v = rng.real_in(0.0, 1.0);
                }
                f
            })
            .collect();
        let targets: Vec<bool> = (0..n).map(|_| rng.chance(0.3)).collect();
        let w = ClassWeights {
            foreground: rng.real_in(0.5, 5.0),
            background: rng.real_in(0.5, 5.0),
        };
        let (_, grad) =
            batch_loss_and_gradient(&params, &feats, &targets, &w).map_err(|e| e.to_string())?;
        for i in 0..PARAM_COUNT {
            let shifted = |d: f64| {
                let mut p = flat.clone();
                p[i] += d;
                batch_loss(&ModelParams::from_flat(p).unwrap(), &feats, &targets, &w)
            };
            let numeric = (shifted(h) - shifted(-h)) / (2.0 * h);
            let rel = (grad[i] - numeric).abs() / grad[i].abs().max(numeric.abs()).max(1e-6);
            worst = worst.max(rel);
        }
    }
    check(worst < 1e-4, format!("max relative error {worst:e}"))?;
    Ok(format!(
        "20 draws x {PARAM_COUNT} parameters, max relative error {worst:.1e}"
    ))
}

const HEADLINE_SEEDS: [u64; 5] = [1, 2, 3, 4, 5];
const HEADLINE_PRESETS: [&str; 3] = ["baseline", "default", "GL"];

struct Headline {
    /// fm per seed, per preset in `HEADLINE_PRESETS` order.
    fm: Vec<[f64; 3]>,
    elapsed: Duration,
}

fn mean(v: impl Iterator<Item = f64>) -> f64 {
    let items: Vec<f64> = v.collect();
    items.iter().sum::<f64>() / items.len() as f64
}

fn run_headline(root: &Path) -> Result<Headline, String> {
    let start = Instant::now();
    let mut fm = Vec::new();
    for seed in HEADLINE_SEEDS {
        let dir = root.join(format!("seed{seed}"));
        let train = cmd_synth(&SynthOptions {
            scenario: Scenario::Darkening,
            out: dir.join("train"),
            seed,
            dims: Some((128, 96)),
            n_frames: Some(200),
        })
        .map_err(|e| e.to_string())?;
        let test = cmd_synth(&SynthOptions {
            scenario: Scenario::Lightswitch,
            out: dir.join("test"),
            seed: seed + 1000,
            dims: Some((128, 96)),
            n_frames: Some(150),
        })
        .map_err(|e| e.to_string())?;
        let mut row = [0.0; 3];
        for (k, preset) in HEADLINE_PRESETS.iter().enumerate() {
            let out = dir.join(preset);
            cmd_train(&TrainOptions {
                train: Some(train.clone()),
                out: Some(out.clone()),
                preset: Some(preset.to_string()),
                seed: Some(seed),
                ..Default::default()
            })
            .map_err(|e| e.to_string())?;
            let report = cmd_eval(&EvalOptions {
                model: Some(out.join(MODEL_FILE)),
                test: Some(test.clone()),
                out: Some(out.clone()),
                ..Default::default()
            })
            .map_err(|e| e.to_string())?;
            row[k] = report.best.metrics.fm;
        }
        println!(
            "    seed {seed}: fm baseline {:.4}  default {:.4}  GL {:.4}",
            row[0], row[1], row[2]
        );
        fm.push(row);
    }
    Ok(Headline {
        fm,
        elapsed: start.elapsed(),
    })
}

fn headline_direction(h: &Headline) -> Outcome {
    let wins = h.fm.iter().filter(|r| r[2] > r[0]).count();
    let gap = mean(h.fm.iter().map(|r| r[2])) - mean(h.fm.iter().map(|r| r[0]));
    let summary = format!(
        "GL beats baseline in {wins}/5 seeds, mean gap {gap:+.4}, {:.0} s",
        h.elapsed.as_secs_f64()
    );
    check(wins >= 4, summary.clone())?;
    check(gap >= 0.05, summary.clone())?;
    check(h.elapsed < Duration::from_secs(15 * 60), summary.clone())?;
    Ok(summary)
}

fn headline_ordering(h: &Headline) -> Outcome {
    let means: Vec<f64> = (0..3).map(|k| mean(h.fm.iter().map(|r| r[k]))).collect();
    let summary = format!(
        "mean fm baseline {:.4}, default {:.4}, GL {:.4}",
        means[0], means[1], means[2]
    );
    if means[2] >= means[1] {
        Ok(summary)
    } else if means[1] - means[2] <= 0.05 {
        Ok(format!("{summary} (GL below default within tolerance)"))
    } else {
        Err(summary)
    }
}

fn tree(root: &Path) -> Vec<(String, Vec<u8>)> {
    let mut out = Vec::new();
    let mut stack = vec![root.to_path_buf()];
    while let Some(d) = stack.pop() {
        for e in fs::read_dir(&d).unwrap() {
            let p = e.unwrap().path();
            if p.is_dir() {
                stack.push(p);
            } else {
                out.push((
                    p.strip_prefix(root).unwrap().display().to_string(),
                    fs::read(&p).unwrap(),
                ));
            }
        }
    }
    out.sort();
    out
}

fn determinism(root: &Path) -> Outcome {
    let synth = |name: &str| {
        cmd_synth(&SynthOptions {
            scenario: Scenario::Lightswitch,
            out: root.join(name),
            seed: 42,
            dims: Some((64, 48)),
            n_frames: Some(30),
        })
        .map_err(|e| e.to_string())
    };
    let manifest = synth("synth_a")?;
    synth("synth_b")?;
    let a = tree(&root.join("synth_a"));
    check(
        a == tree(&root.join("synth_b")),
        "synthesized datasets differ",
    )?;

    let config = root.join("exp.toml");
    fs::write(
        &config,
        format!(
            "[data]\ntrain = {:?}\n[augment]\npreset = \"GL\"\n[train]\nseed = 8\nmax_epochs = 4\nreference_frames = 9\n",
            manifest.display().to_string()
        ),
    )
    .unwrap();
    let train = |name: &str| {
        cmd_train(&TrainOptions {
            config: Some(config.clone()),
            out: Some(root.join(name)),
            ..Default::default()
        })
        .map_err(|e| e.to_string())
    };
    let first = train("train_a")?;
    let second = train("train_b")?;
    let (ma, mb) = (
        fs::read(&first.model).unwrap(),
        fs::read(&second.model).unwrap(),
    );
    check(ma == mb, "model files differ")?;
    check(
        fs::read(&first.log).unwrap() == fs::read(&second.log).unwrap(),
        "training logs differ",
    )?;
    Ok(format!(
        "{} dataset files and a {}-byte model reproduced byte for byte",
        a.len(),
        ma.len()
    ))
}

fn threshold_protocol() -> Outcome {
    let grid = default_thresholds::<f64>();
    check(
        grid.len() == 19,
        format!("grid has {} thresholds", grid.len()),
    )?;
    let mut rng = RngStream::new(0x7E5, 0);
    let frames: Vec<(ProbabilityMap<f64>, GroundTruth)> = (0..12)
        .map(|_| {
            let (w, h) = (
                rng.int_inclusive(4, 20) as usize,
                rng.int_inclusive(4, 20) as usize,
            );
            let p = ProbabilityMap::new(w, h, (0..w * h).map(|_| rng.unit()).collect()).unwrap();
            let g = GroundTruth::new(w, h, (0..w * h).map(|_| rng.chance(0.3)).collect()).unwrap();
            (p, g)
        })
        .collect();
    let (preds, gts): (Vec<_>, Vec<_>) = frames.into_iter().unzip();
    let sweep = sweep_thresholds(&preds, &gts, &grid).map_err(|e| e.to_string())?;
    check(sweep.len() == 19, format!("sweep has {} rows", sweep.len()))?;
    let mut csv = Vec::new();
    illumaug::metrics::write_sweep_csv(&sweep, &mut csv).map_err(|e| e.to_string())?;
    check(
        String::from_utf8(csv).unwrap().lines().count() == 20,
        "csv is not header + 19 rows",
    )?;

    // Pooled counts: split accumulation equals accumulation over the joint frame.
    for &t in &grid {
        let split: ConfusionCounts = preds
            .iter()
            .zip(&gts)
            .map(|(p, g)| accumulate(p, g, t).unwrap())
            .sum();
        let joint_p: Vec<f64> = preds
            .iter()
            .flat_map(|p| p.values().iter().copied())
            .collect();
        let joint_g: Vec<bool> = gts
            .iter()
            .flat_map(|g| g.labels().iter().copied())
            .collect();
        let n = joint_g.len();
        let joint = accumulate(
            &ProbabilityMap::new(n, 1, joint_p).unwrap(),
            &GroundTruth::new(n, 1, joint_g).unwrap(),
            t,
        )
        .unwrap();
        check(split == joint, format!("pooled counts differ at {t}"))?;
    }

    // Equal maxima at 0.6 and 0.7: the smaller threshold wins.
    let row = |threshold: f64, fm: f64| ThresholdReport {
        threshold,
        metrics: MetricsReport {
            fm,
            ..compute_metrics::<f64>(&ConfusionCounts::new(1, 1, 1, 1)).unwrap()
        },
    };
    let best =
        best_threshold(&[row(0.5, 0.3), row(0.6, 0.9), row(0.7, 0.9), row(0.8, 0.1)]).unwrap();
    check(
        best.threshold == 0.6,
        format!("tie resolved to {}", best.threshold),
    )?;
    Ok("19 rows, tie -> 0.6, split == joint counts at every threshold".into())
}

fn main() -> ExitCode {
    let mut failures = 0;
    let mut report = |n: u32, name: &str, outcome: Outcome| match &outcome {
        Ok(detail) => println!("criterion {n} [{name}]: PASS - {detail}"),
        Err(detail) => {
            failures += 1;
            println!("criterion {n} [{name}]: FAIL - {detail}");
        }
    };
    let scratch = tempfile::tempdir().expect("temporary directory");

    report(1, "EDT exactness", edt_exactness());
    report(2, "metric oracle", metric_oracle_agreement());
    report(3, "reported value consistency", reported_value_consistency());
    report(4, "augmentation invariants", augmentation_invariants());
    report(5, "gradient check", gradient_check());
    match run_headline(scratch.path()) {
        Ok(h) => {
            report(6, "GL beats no augmentation", headline_direction(&h));
            report(7, "ordering none/default/GL", headline_ordering(&h));
        }
        Err(e) => {
            report(6, "GL beats no augmentation", Err(e.clone()));
            report(7, "ordering none/default/GL", Err(e));
        }
    }
    report(8, "determinism", determinism(scratch.path()));
    report(9, "threshold protocol", threshold_protocol());

    if failures == 0 {
        println!("acceptance: all 9 criteria passed");
        ExitCode::SUCCESS
    } else {
        println!("acceptance: {failures} criterion(s) failed");
        ExitCode::FAILURE
    }
}

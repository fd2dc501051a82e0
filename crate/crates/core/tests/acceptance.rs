//! Acceptance run: one `PASS`/`FAIL` line per criterion.
//!
//! `GOFMARK_ACCEPTANCE=2,5` restricts the run to the listed criteria.
//! Exits nonzero if any selected criterion fails.

use std::path::Path;
use std::process::{Command, ExitCode};
use std::time::{Duration, Instant};

use gofmark::calibrate::{mc_critical_batch, simulate_null};
use gofmark::detect::Detector;
use gofmark::gof::{k_s, phi_s, stat_ad, stat_chi2, stat_cvm, stat_kol, stat_kuiper, stat_neyman, stat_trgof, stat_watson, PValueSeq};
use gofmark::harness::{ExperimentConfig, ResultRow, Runner, TrialSeeds};
use gofmark::prng::{gaussian, stream, uniform, SecretKey};
use gofmark::schemes::{
    gumbel_alt_cdf, gumbel_decode, gumbel_pivot, inverse_decode, inverse_pivot, null_cdf, synthid_decode,
    synthid_pivot, NtpDist, NullLaw, SchemeSpec,
};
use gofmark::textsim::{generate_watermarked, repetition_rate, SimModel, SimParams};

type Outcome = Result<String, String>;

struct Criterion {
    id: u32,
    name: &'static str,
    budget: Duration,
    run: fn() -> Outcome,
}

fn main() -> ExitCode {
    let criteria = [
        Criterion { id: 1, name: "statistic correctness", budget: secs(1), run: c1_statistics },
        Criterion { id: 2, name: "unbiased decoders", budget: secs(120), run: c2_unbiased },
        Criterion { id: 3, name: "null laws", budget: secs(120), run: c3_null_laws },
        Criterion { id: 4, name: "Gumbel alternative law", budget: secs(60), run: c4_gumbel_alt },
        Criterion { id: 5, name: "Type I control", budget: secs(1800), run: c5_type1 },
        Criterion { id: 6, name: "power at high entropy", budget: secs(600), run: c6_power },
        Criterion { id: 7, name: "length monotonicity", budget: secs(1200), run: c7_length },
        Criterion { id: 8, name: "repetition mechanism", budget: secs(600), run: c8_repetition },
        Criterion { id: 9, name: "robustness direction", budget: secs(900), run: c9_robustness },
        Criterion { id: 10, name: "thread-count determinism", budget: secs(600), run: c10_determinism },
    ];
    let only: Option<Vec<u32>> = std::env::var("GOFMARK_ACCEPTANCE")
        .ok()
        .map(|s| s.split(',').filter_map(|x| x.trim().parse().ok()).collect());
    let mut failed = 0;
    for c in criteria.iter().filter(|c| only.as_ref().is_none_or(|o| o.contains(&c.id))) {
        let start = Instant::now();
        let outcome = (c.run)();
        let took = start.elapsed();
        let (ok, detail) = match outcome {
            Ok(d) if took <= c.budget => (true, d),
            Ok(d) => (false, format!("{d}; over the {}s budget", c.budget.as_secs())),
            Err(d) => (false, d),
        };
        failed += !ok as usize;
        println!(
            "{} criterion {:>2} {}: {detail} [{:.1}s]",
            if ok { "PASS" } else { "FAIL" },
            c.id,
            c.name,
            took.as_secs_f64()
        );
    }
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}

fn secs(s: u64) -> Duration {
    Duration::from_secs(s)
}

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn e2s<E: std::fmt::Display>(e: E) -> String {
    e.to_string()
}

fn pv(values: &[f64]) -> PValueSeq {
    PValueSeq::new(values.to_vec()).expect("valid p-values")
}

fn c1_statistics() -> Outcome {
    let close = |got: f64, want: f64, what: &str| ensure((got - want).abs() <= 1e-9, || format!("{what}: {got} vs {want}"));
    let (a, b, c, d) = (pv(&[0.5]), pv(&[0.25, 0.75]), pv(&[0.2, 0.6]), pv(&[0.9]));
    close(stat_kol(&a), 0.5, "Kol (0.5)")?;
    close(stat_kol(&b), 0.25, "Kol (0.25,0.75)")?;
    close(stat_kol(&c), 0.4, "Kol (0.2,0.6)")?;
    close(stat_kuiper(&d), 1.0, "Kui (0.9)")?;
    close(stat_kuiper(&c), 0.6, "Kui (0.2,0.6)")?;
    close(stat_kuiper(&b), 0.5, "Kui (0.25,0.75)")?;
    close(stat_cvm(&a), 1.0 / 12.0, "CvM (0.5)")?;
    close(stat_cvm(&b), 1.0 / 24.0, "CvM (0.25,0.75)")?;
    close(stat_cvm(&d), 1.0 / 12.0 + 0.16, "CvM (0.9)")?;
    close(stat_watson(&d), 1.0 / 12.0, "Wat (0.9)")?;
    close(stat_watson(&b), 1.0 / 24.0, "Wat (0.25,0.75)")?;
    close(stat_ad(&a).map_err(e2s)?, -1.0 - 0.25f64.ln(), "AD (0.5)")?;
    let ad2 = -2.0 - 0.5 * (0.0625f64.ln() + 3.0 * 0.5625f64.ln());
    close(stat_ad(&b).map_err(e2s)?, ad2, "AD (0.25,0.75)")?;
    close(stat_neyman(&a, 3).map_err(e2s)?, 1.25, "Ney (0.5)")?;
    close(stat_neyman(&b, 3).map_err(e2s)?, 0.15625, "Ney (0.25,0.75)")?;
    close(stat_chi2(&pv(&[0.1, 0.2, 0.6, 0.7]), 2).map_err(e2s)?, 0.0, "Chi balanced")?;
    close(stat_chi2(&pv(&[0.1, 0.2, 0.3, 0.4]), 2).map_err(e2s)?, 4.0, "Chi lopsided")?;
    close(stat_chi2(&pv(&[0.1, 0.3, 0.6, 0.9]), 4).map_err(e2s)?, 0.0, "Chi one per bin")?;
    close(stat_trgof(&pv(&[0.6, 0.9]), 2.0, None).map_err(e2s)?, 0.0, "Phi (0.6,0.9)")?;
    close(stat_trgof(&c, 2.0, Some(0.5)).map_err(e2s)?, 0.28125, "Phi (0.2,0.6) c=0.5")?;
    let mut worst = 0.0f64;
    for i in 1..100 {
        for j in 1..100 {
            let (u, v) = (i as f64 / 100.0, j as f64 / 100.0);
            let direct = v * phi_s(2.0, u / v) + (1.0 - v) * phi_s(2.0, (1.0 - u) / (1.0 - v));
            let reduced = (u - v).powi(2) / (2.0 * v * (1.0 - v));
            worst = worst.max((k_s(2.0, u, v) - reduced).abs()).max((direct - reduced).abs());
        }
    }
    ensure(worst <= 1e-12, || format!("K2 reduction off by {worst:e}"))?;
    Ok(format!("20 hand examples to 1e-9, K2 reduction max error {worst:.1e}"))
}

fn random_dist(seed: u64, v: usize) -> NtpDist {
    let s = stream(seed, v as u64);
    let w: Vec<f64> = (0..v).map(|i| (1.5 * gaussian(s, i as u64)).exp()).collect();
    NtpDist::from_weights(&w).expect("positive weights")
}

fn c2_unbiased() -> Outcome {
    let draws = 100_000u64;
    let mut worst = 0.0f64;
    for scheme in SchemeSpec::all(30).map_err(e2s)? {
        for d in 0..20u64 {
            let v = [2, 5, 50][d as usize % 3];
            let p = random_dist(0x00B1_A5ED + d, v);
            let mut counts = vec![0u64; v];
            let base = 0xD1CE_0000 + 100 * d + scheme.rounds as u64;
            for i in 0..draws {
                let seed = stream(base, i);
                let w = match scheme.kind {
                    gofmark::schemes::SchemeKind::GumbelMax => gumbel_decode(&p, seed),
                    gofmark::schemes::SchemeKind::InverseTransform => inverse_decode(&p, seed),
                    gofmark::schemes::SchemeKind::SynthId => {
                        synthid_decode(&p, seed, scheme.rounds, uniform(stream(base ^ 0xF4E5, 0), i))
                    }
                }
                .map_err(e2s)?;
                counts[w as usize] += 1;
            }
            let tv: f64 = 0.5
                * counts.iter().zip(p.probs()).map(|(&c, &q)| (c as f64 / draws as f64 - q).abs()).sum::<f64>();
            ensure(tv < 0.01, || format!("{scheme} distribution {d} (V={v}): TV {tv:.4}"))?;
            worst = worst.max(tv);
        }
    }
    Ok(format!("3 schemes x 20 distributions, max TV {worst:.4}"))
}

/// Kolmogorov distance between a sample and a CDF.
fn ks(mut xs: Vec<f64>, cdf: impl Fn(f64) -> f64) -> f64 {
    xs.sort_by(f64::total_cmp);
    let n = xs.len() as f64;
    xs.iter()
        .enumerate()
        .map(|(i, &x)| {
            let f = cdf(x);
            ((i + 1) as f64 / n - f).max(f - i as f64 / n)
        })
        .fold(0.0, f64::max)
}

fn c3_null_laws() -> Outcome {
    let n = 100_000u64;
    let mut parts = Vec::new();
    for scheme in SchemeSpec::all(30).map_err(e2s)? {
        // Text drawn without the key: the token is independent of the seed.
        let v = if scheme == SchemeSpec::inverse() { 1000 } else { 50 };
        let p = random_dist(0x4E55_11, v);
        let text_rng = stream(0x7E47, scheme.rounds as u64 + scheme.kind as u64);
        let ys: Vec<f64> = (0..n)
            .map(|i| {
                let u = uniform(text_rng, i);
                let mut cum = 0.0;
                let mut token = (v - 1) as u32;
                for (w, &q) in p.probs().iter().enumerate() {
                    cum += q;
                    if u < cum {
                        token = w as u32;
                        break;
                    }
                }
                let seed = stream(0x5EED_0001 ^ scheme.kind as u64, i);
                match scheme.kind {
                    gofmark::schemes::SchemeKind::GumbelMax => gumbel_pivot(token, seed),
                    gofmark::schemes::SchemeKind::InverseTransform => inverse_pivot(token, seed, v).unwrap(),
                    gofmark::schemes::SchemeKind::SynthId => synthid_pivot(token, seed, scheme.rounds, v),
                }
            })
            .collect();
        let law = NullLaw::new(scheme);
        let d = ks(ys, |x| law.cdf(x));
        ensure(d < 0.006, || format!("{scheme}: Kolmogorov distance {d:.5}"))?;
        parts.push(format!("{scheme} {d:.4}"));
    }
    // Extended-precision Irwin-Hall against means of 30 independent uniforms.
    let k = 30;
    let mc = stream(0x1A11, 30);
    let mut means: Vec<f64> =
        (0..n).map(|i| (0..k).map(|j| uniform(mc, i * k + j)).sum::<f64>() / k as f64).collect();
    means.sort_by(f64::total_cmp);
    let synthid = SchemeSpec::synthid(k as u32).map_err(e2s)?;
    let mut worst = 0.0f64;
    for g in 1..200 {
        let r = g as f64 / 200.0;
        let emp = means.partition_point(|&m| m <= r) as f64 / n as f64;
        worst = worst.max((null_cdf(synthid, r).map_err(e2s)? - emp).abs());
    }
    ensure(worst < 0.002, || format!("Irwin-Hall k=30 vs Monte Carlo: {worst:.5}"))?;
    Ok(format!("KS {}; Irwin-Hall vs MC {worst:.4}", parts.join(", ")))
}

fn c4_gumbel_alt() -> Outcome {
    let p = NtpDist::new(vec![0.45, 0.25, 0.15, 0.1, 0.05]).map_err(e2s)?;
    let ys: Vec<f64> = (0..100_000u64)
        .map(|i| {
            let seed = stream(0xA17, i);
            gumbel_pivot(gumbel_decode(&p, seed).unwrap(), seed)
        })
        .collect();
    let d = ks(ys, |r| gumbel_alt_cdf(&p, r.clamp(0.0, 1.0)).unwrap());
    ensure(d < 0.006, || format!("sup distance {d:.5}"))?;
    Ok(format!("sup distance {d:.4} at 1e5 draws"))
}

fn runner(cfg: ExperimentConfig) -> Result<Runner, String> {
    Runner::new(cfg).map_err(e2s)
}

fn scratch_dir(tag: &str) -> std::path::PathBuf {
    let dir = std::env::temp_dir().join(format!("gofmark-acceptance-{tag}-{}", std::process::id()));
    let _ = std::fs::remove_dir_all(&dir);
    dir
}

fn c5_type1() -> Outcome {
    let cfg = ExperimentConfig {
        temperatures: vec![1.0],
        lengths: vec![400],
        trials: 10_000,
        calibration_b: 100_000,
        master_seed: 0x7E1,
        out_dir: scratch_dir("c5"),
        ..ExperimentConfig::default()
    };
    let rows = runner(cfg)?.run_type1().map_err(e2s)?;
    let (lo, hi) = rows.iter().fold((1.0f64, 0.0f64), |(lo, hi), r| (lo.min(r.value), hi.max(r.value)));
    for r in &rows {
        ensure((r.value - 0.01).abs() <= 0.004, || format!("{} {}: Type I {}", r.scheme, r.detector, r.value))?;
    }
    // Stringent level, straight from the null law.
    let mut worst = 0.0f64;
    for scheme in SchemeSpec::all(30).map_err(e2s)? {
        let dets = Detector::all_for(scheme);
        let crit = mc_critical_batch(scheme, &dets, 400, 1e-3, 1_000_000, 0xA1FA).map_err(e2s)?;
        let stats = simulate_null(scheme, &dets, 400, 100_000, 0xB0B).map_err(e2s)?;
        for ((d, c), s) in dets.iter().zip(&crit).zip(&stats) {
            let rate = s.iter().filter(|&&t| t > c.gamma).count() as f64 / s.len() as f64;
            ensure(rate <= 2e-3, || format!("{scheme} {d} at alpha 1e-3: {rate}"))?;
            worst = worst.max(rate);
        }
    }
    Ok(format!(
        "alpha 0.01: {} cells in [{lo:.4}, {hi:.4}]; alpha 1e-3: max {worst:.5}",
        rows.len()
    ))
}

fn find<'a>(rows: &'a [ResultRow], det: &Detector, n: usize, t: f64, edit: &str) -> Result<&'a ResultRow, String> {
    rows.iter()
        .find(|r| r.detector == *det && r.n == n && r.temperature == t && r.edit == edit)
        .ok_or_else(|| format!("missing row {det} n={n} T={t} {edit}"))
}

fn c6_power() -> Outcome {
    let cfg = ExperimentConfig {
        schemes: vec!["gumbel".into()],
        detectors: gofmark::gof::GofTest::all().iter().map(|t| t.to_string()).collect(),
        temperatures: vec![1.0],
        lengths: vec![400],
        trials: 1000,
        master_seed: 0x6,
        out_dir: scratch_dir("c6"),
        ..ExperimentConfig::default()
    };
    let rows = runner(cfg)?.run_type2().map_err(e2s)?;
    let worst = rows.iter().map(|r| r.value).fold(0.0, f64::max);
    for r in &rows {
        ensure(r.value <= 0.02, || format!("{}: Type II {}", r.detector, r.value))?;
    }
    Ok(format!("8 GoF tests, max Type II {worst:.3}"))
}

fn c7_length() -> Outcome {
    let trials = 1000;
    let cfg = ExperimentConfig {
        temperatures: vec![0.3, 1.0],
        lengths: vec![200, 400],
        trials,
        master_seed: 0x7,
        out_dir: scratch_dir("c7"),
        ..ExperimentConfig::default()
    };
    let rows = runner(cfg)?.run_type2().map_err(e2s)?;
    let mut cells = 0;
    let mut worst = f64::NEG_INFINITY;
    for short in rows.iter().filter(|r| r.n == 200) {
        let long = rows
            .iter()
            .find(|r| r.scheme == short.scheme && r.detector == short.detector && r.temperature == short.temperature && r.n == 400)
            .ok_or("missing n=400 row")?;
        let (a, b) = (short.value, long.value);
        let sigma = ((a * (1.0 - a) + b * (1.0 - b)) / trials as f64).sqrt();
        let excess = b - a - 2.0 * sigma;
        worst = worst.max(b - a);
        ensure(excess <= 0.0, || {
            format!("{} {} T={}: n=400 {b} vs n=200 {a}", short.scheme, short.detector, short.temperature)
        })?;
        cells += 1;
    }
    Ok(format!("{cells} cells, largest increase {worst:.3}"))
}

fn c8_repetition() -> Outcome {
    let model = SimModel::new(SimParams::default()).map_err(e2s)?;
    let mut means = Vec::new();
    for t in [0.1, 0.3, 1.0] {
        let mut total = 0.0;
        for i in 0..100 {
            let s = TrialSeeds::new(0x8, i);
            let rec = generate_watermarked(&model.reseeded(s.model), SchemeSpec::gumbel(), &SecretKey::from_u64(s.key), 400, t)
                .map_err(e2s)?;
            total += repetition_rate(&rec.tokens, 1).map_err(e2s)?;
        }
        means.push(total / 100.0);
    }
    ensure(means[0] > means[1] && means[1] > means[2], || format!("1-gram repetition {means:.4?} not decreasing"))?;
    let cfg = ExperimentConfig {
        schemes: vec!["gumbel".into()],
        detectors: gofmark::gof::GofTest::all().iter().map(|t| t.to_string()).collect(),
        temperatures: vec![0.1],
        lengths: vec![400],
        trials: 500,
        calibration_b: 10_000,
        dedupe: true,
        master_seed: 0x8,
        out_dir: scratch_dir("c8"),
        ..ExperimentConfig::default()
    };
    let rows = runner(cfg)?.run_type2().map_err(e2s)?;
    let mean = |edit: &str| {
        let v: Vec<f64> = rows.iter().filter(|r| r.edit == edit).map(|r| r.value).collect();
        v.iter().sum::<f64>() / v.len() as f64
    };
    let (raw, dedup) = (mean("none"), mean("dedupe"));
    ensure(dedup > raw, || format!("GoF Type II raw {raw:.4} vs dedupe {dedup:.4}"))?;
    Ok(format!(
        "repetition {:.4} > {:.4} > {:.4}; GoF Type II raw {raw:.3} -> dedupe {dedup:.3}",
        means[0], means[1], means[2]
    ))
}

fn c9_robustness() -> Outcome {
    let cfg = ExperimentConfig {
        schemes: vec!["gumbel".into()],
        temperatures: vec![1.0],
        lengths: vec![300],
        trials: 500,
        edits: vec!["Info@0.3".into(), "Del@0.2".into()],
        master_seed: 0x9,
        out_dir: scratch_dir("c9"),
        ..ExperimentConfig::default()
    };
    let rows = runner(cfg)?.run_robustness().map_err(e2s)?;
    let (kui, ars): (Detector, Detector) = ("Kui".parse().map_err(e2s)?, "Ars".parse().map_err(e2s)?);
    let (k, a) = (find(&rows, &kui, 300, 1.0, "Info")?.value, find(&rows, &ars, 300, 1.0, "Info")?.value);
    ensure(k < a, || format!("InfoRich: Kui {k} vs Ars {a}"))?;
    let mut pairs = Vec::new();
    for d in Detector::all_for(SchemeSpec::gumbel()) {
        let (base, del) = (find(&rows, &d, 300, 1.0, "none")?.value, find(&rows, &d, 300, 1.0, "Del")?.value);
        ensure(del > base, || format!("Delete@0.2: {d} Type II {del} vs unedited {base}"))?;
        pairs.push(format!("{d} {base:.3}->{del:.3}"));
    }
    Ok(format!("InfoRich Kui {k:.3} < Ars {a:.3}; Delete {}", pairs.join(", ")))
}

fn c10_determinism() -> Outcome {
    let dir = scratch_dir("c10");
    std::fs::create_dir_all(&dir).map_err(e2s)?;
    let cfg = ExperimentConfig {
        temperatures: vec![0.3, 1.0],
        lengths: vec![100, 200],
        trials: 200,
        calibration_b: 2000,
        dedupe: true,
        ..ExperimentConfig::default()
    };
    let cfg_path = dir.join("config.json");
    std::fs::write(&cfg_path, cfg.to_json()).map_err(e2s)?;
    let run = |threads: &str, out: &Path| -> Result<Vec<u8>, String> {
        let status = Command::new(env!("CARGO_BIN_EXE_gofmark"))
            .args(["type2", "--config"])
            .arg(&cfg_path)
            .args(["--seed", "1234", "--threads", threads, "--out"])
            .arg(out)
            .output()
            .map_err(e2s)?;
        ensure(status.status.success(), || format!("gofmark exited with {}", status.status))?;
        std::fs::read(out.join("results.csv")).map_err(e2s)
    };
    let a = run("1", &dir.join("t1"))?;
    let b = run("4", &dir.join("t4"))?;
    ensure(a == b, || "results.csv differs between --threads 1 and --threads 4".into())?;
    let lines = a.iter().filter(|&&c| c == b'\n').count();
    Ok(format!("{lines} identical lines from --threads 1 and --threads 4"))
}

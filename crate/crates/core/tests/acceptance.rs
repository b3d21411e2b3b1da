//! Acceptance suite. Prints one PASS/FAIL/SKIPPED line per criterion and
//! exits nonzero if any criterion fails.
//!
//! Criterion 6 needs external data and is skipped unless
//! `PCDM_LIVE_MANIFEST` points to a converted LIVE release 2 manifest;
//! `PCDM_NAMING_TABLE` optionally selects the naming table to use with it.

mod common;

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::{Duration, Instant};

use common::{lp_transport_cost, random_descriptor, random_ground, DE2000_PAIRS};
use pcdm_core::baselines::{mean_de2000, psnr, ssim};
use pcdm_core::colorspace::{delta_e_2000, De2000Params, LabColor};
use pcdm_core::emd::{emd, FLOW_TOL};
use pcdm_core::eval::{
    decompose_distortion, evaluate, fit_regression, load_manifest, pearson_cc, rmse, spearman_rho, DistortionClass,
    EvalOptions, Metric, RegressionParams,
};
use pcdm_core::naming::load_naming_table;
use pcdm_core::pcdm::{pcdm_score, PcdmConfig};
use pcdm_core::synth::{add_gaussian_noise, gaussian_blur, jpeg_compress, textured_scene};
use pcdm_core::RgbImage;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

enum Verdict {
    Pass(String),
    Fail(String),
    Skipped(String),
}

type Check = fn() -> Verdict;

fn time_limited(elapsed: Duration, limit: Duration, detail: String) -> Verdict {
    if elapsed > limit {
        Verdict::Fail(format!("{detail}; took {elapsed:.2?}, limit {limit:?}"))
    } else {
        Verdict::Pass(detail)
    }
}

fn ac1_ciede2000_conformance() -> Verdict {
    let start = Instant::now();
    let params = De2000Params::default();
    let mut worst: f64 = 0.0;
    for p in DE2000_PAIRS {
        let v = delta_e_2000(
            LabColor { l: p[0], a: p[1], b: p[2] },
            LabColor { l: p[3], a: p[4], b: p[5] },
            params,
        );
        worst = worst.max((v - p[6]).abs());
    }
    if worst >= 1e-4 {
        return Verdict::Fail(format!("max deviation {worst:.2e} >= 1e-4"));
    }
    time_limited(start.elapsed(), Duration::from_secs(1), format!("34 pairs, max deviation {worst:.2e}"))
}

fn ac2_emd_exactness() -> Verdict {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(20_140_601);
    let mut worst: f64 = 0.0;
    for i in 0..200 {
        let ground = random_ground(&mut rng, 11);
        let p = random_descriptor(&mut rng, 11, 0.0);
        let q = random_descriptor(&mut rng, 11, 0.0);
        let got = match emd(&p, &q, &ground) {
            Ok(r) => r,
            Err(e) => return Verdict::Fail(format!("instance {i}: {e}")),
        };
        let want = lp_transport_cost(p.probs(), q.probs(), ground.as_slice());
        worst = worst.max((got.cost - want).abs());
        if let Err(e) = got.flow.check_marginals(p.probs(), q.probs(), FLOW_TOL) {
            return Verdict::Fail(format!("instance {i}: {e}"));
        }
    }
    if worst >= 1e-9 {
        return Verdict::Fail(format!("max |solver − LP| = {worst:.2e}"));
    }
    time_limited(
        start.elapsed(),
        Duration::from_secs(10),
        format!("200 instances, max |solver − LP| = {worst:.2e}"),
    )
}

fn ac3_identity() -> Verdict {
    let expected = 1.0 / (1.0 + 5f64.exp());
    let images = [
        textured_scene(120, 80, 1),
        textured_scene(33, 47, 2),
        RgbImage::filled(16, 16, [200, 30, 90]),
    ];
    let mut worst: f64 = 0.0;
    for img in &images {
        for rate in [0.05, 0.25, 0.5, 1.0] {
            let cfg = PcdmConfig::default().sampling_rate(rate);
            match pcdm_score(img, img, &cfg) {
                Ok(s) => worst = worst.max((s.score - expected).abs()),
                Err(e) => return Verdict::Fail(e.to_string()),
            }
        }
    }
    if worst > 1e-6 {
        Verdict::Fail(format!("max deviation from {expected:.7} is {worst:.2e}"))
    } else {
        Verdict::Pass(format!("score {expected:.7} on 3 images × 4 rates, max deviation {worst:.1e}"))
    }
}

fn ac4_noise_monotonicity() -> Verdict {
    let start = Instant::now();
    let cfg = PcdmConfig::default();
    let sigmas = [5.0, 10.0, 20.0, 40.0];
    let mut violations = Vec::new();
    let mut summary = Vec::new();
    for seed in [11u64, 22, 33] {
        let img = textured_scene(256, 256, seed);
        let scores: Vec<f64> = sigmas
            .iter()
            .map(|&s| {
                let noisy = add_gaussian_noise(&img, s, seed * 100 + s as u64);
                pcdm_score(&img, &noisy, &cfg).map(|r| r.score).unwrap_or(f64::NAN)
            })
            .collect();
        for k in 0..3 {
            if !(scores[k + 1] > scores[k]) {
                violations.push(format!("fixture {seed}: σ={} → σ={}", sigmas[k], sigmas[k + 1]));
            }
        }
        summary.push(format!("[{}]", scores.iter().map(|v| format!("{v:.4}")).collect::<Vec<_>>().join(" ")));
    }
    if !violations.is_empty() {
        return Verdict::Fail(format!("violations: {}; scores {}", violations.join(", "), summary.join(" ")));
    }
    time_limited(
        start.elapsed(),
        Duration::from_secs(60),
        format!("9/9 ordered comparisons hold; scores {}", summary.join(" ")),
    )
}

fn ac5_regression() -> Verdict {
    let rmse_of = |p: &RegressionParams, raw: &[f64], y: &[f64]| {
        (raw.iter().zip(y).map(|(x, y)| (p.predict(*x) - y).powi(2)).sum::<f64>() / raw.len() as f64).sqrt()
    };
    let truth = RegressionParams {
        beta1: 20.0,
        beta2: 0.5,
        beta3: 10.0,
        beta4: 1.0,
        beta5: 5.0,
        form: Default::default(),
    };
    let raw: Vec<f64> = (0..100).map(|i| i as f64 * 0.2).collect();
    let y = truth.predict_all(&raw);
    let curve = match fit_regression(&raw, &y) {
        Ok(p) => rmse_of(&p, &raw, &y),
        Err(e) => return Verdict::Fail(format!("logistic data: {e}")),
    };
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let raw_aff: Vec<f64> = (0..60).map(|_| rng.random_range(-3.0..9.0)).collect();
    let y_aff: Vec<f64> = raw_aff.iter().map(|x| 2.0 * x + 3.0).collect();
    let affine = match fit_regression(&raw_aff, &y_aff) {
        Ok(p) => rmse_of(&p, &raw_aff, &y_aff),
        Err(e) => return Verdict::Fail(format!("affine data: {e}")),
    };
    let detail = format!("logistic RMSE {curve:.2e} (< 1e-6), affine RMSE {affine:.2e} (< 1e-8)");
    if curve < 1e-6 && affine < 1e-8 {
        Verdict::Pass(detail)
    } else {
        Verdict::Fail(detail)
    }
}

fn ac6_live_reproduction() -> Verdict {
    let Some(manifest_path) = std::env::var_os("PCDM_LIVE_MANIFEST") else {
        return Verdict::Skipped("set PCDM_LIVE_MANIFEST to a LIVE release 2 manifest to run".into());
    };
    let manifest = match load_manifest(&manifest_path) {
        Ok(m) => m,
        Err(e) => return Verdict::Fail(format!("manifest: {e}")),
    };
    let pcdm = match std::env::var_os("PCDM_NAMING_TABLE") {
        Some(p) => match load_naming_table(&p).map_err(|e| e.to_string()).and_then(|t| {
            PcdmConfig::from_table(t).map_err(|e| e.to_string())
        }) {
            Ok(cfg) => cfg,
            Err(e) => return Verdict::Fail(format!("naming table: {e}")),
        },
        None => PcdmConfig::default(),
    };
    let opts = EvalOptions { pcdm, ..Default::default() };
    let report = match evaluate(&manifest, Metric::Pcdm, &opts) {
        Ok(r) => r,
        Err(e) => return Verdict::Fail(e.to_string()),
    };
    // (cell, expected CC, CC tolerance, expected RMSE)
    let targets: [(Option<DistortionClass>, f64, f64, f64); 4] = [
        (Some(DistortionClass::Wn), 0.979, 0.02, 5.08),
        (Some(DistortionClass::Jpeg), 0.959, 0.02, 7.10),
        (Some(DistortionClass::Jp2k), 0.956, 0.02, 7.49),
        (None, 0.927, 0.03, 8.67),
    ];
    let mut misses = Vec::new();
    let mut cells = Vec::new();
    for (class, cc, tol, rm) in targets {
        let cell = match class {
            Some(c) => report.cell(c),
            None => Some(report.overall()),
        };
        let label = class.map_or("All", |c| c.label());
        let Some(cell) = cell else {
            misses.push(format!("{label}: missing"));
            continue;
        };
        cells.push(format!("{label} CC {:.3} RMSE {:.2}", cell.pearson_cc, cell.rmse));
        if (cell.pearson_cc - cc).abs() > tol {
            misses.push(format!("{label} CC {:.3} vs {cc} ± {tol}", cell.pearson_cc));
        }
        if (cell.rmse - rm).abs() > 1.0 {
            misses.push(format!("{label} RMSE {:.2} vs {rm} ± 1.0", cell.rmse));
        }
    }
    let detail = format!("n = {}; {}", report.overall().n, cells.join(", "));
    if misses.is_empty() {
        Verdict::Pass(detail)
    } else {
        Verdict::Fail(format!("{detail}; out of tolerance: {}", misses.join(", ")))
    }
}

fn ac7_rate_scaling() -> Verdict {
    let reference = textured_scene(768, 512, 7);
    let blurred = gaussian_blur(&reference, 1.3);
    let score = |rate: f64| pcdm_score(&reference, &blurred, &PcdmConfig::default().sampling_rate(rate));

    // Warm the thread pool and caches, then take the best of several runs
    // for the cheap rate so scheduling noise does not dominate it.
    if let Err(e) = score(0.05) {
        return Verdict::Fail(e.to_string());
    }
    let mut t_low = Duration::MAX;
    let mut res_low = 0.0;
    for _ in 0..5 {
        let t = Instant::now();
        res_low = score(0.05).unwrap().residual;
        t_low = t_low.min(t.elapsed());
    }
    let t = Instant::now();
    let res_mid = score(0.5).unwrap().residual;
    let t_mid = t.elapsed();
    let res_high = score(1.0).unwrap().residual;

    let ratio = t_mid.as_secs_f64() / t_low.as_secs_f64();
    let detail = format!(
        "time 0.05: {t_low:.2?}, 0.5: {t_mid:.2?} (ratio {ratio:.1}); residual {res_low:.4} → {res_mid:.4} → {res_high:.4}"
    );
    if ratio >= 10.0 && res_mid <= res_low && res_high <= res_mid {
        Verdict::Pass(detail)
    } else {
        Verdict::Fail(detail)
    }
}

fn ac8_decomposition() -> Verdict {
    let reference = textured_scene(256, 256, 5);
    let compressed = match jpeg_compress(&reference, 10) {
        Ok(c) => c,
        Err(e) => return Verdict::Fail(e.to_string()),
    };
    let (intensity, chroma) = decompose_distortion(&reference, &compressed).unwrap();
    let ssim_loss = |d: &RgbImage| 1.0 - ssim(&reference, d).unwrap().score;
    let identity = 1.0 / (1.0 + 5f64.exp());
    let cfg = PcdmConfig::default();
    let pcdm_excess = |d: &RgbImage| pcdm_score(&reference, d, &cfg).unwrap().score - identity;

    let (s_i, s_c) = (ssim_loss(&intensity), ssim_loss(&chroma));
    let (e_i, e_c) = (mean_de2000(&reference, &intensity).unwrap(), mean_de2000(&reference, &chroma).unwrap());
    let (p_i, p_c) = (pcdm_excess(&intensity), pcdm_excess(&chroma));

    let ssim_ratio = s_c / s_i;
    let de_ratio = e_c / e_i;
    let pcdm_ratio = p_c / p_i;
    let detail = format!(
        "SSIM loss I {s_i:.4} C {s_c:.4} (C/I {ssim_ratio:.3}); ΔE00 I {e_i:.3} C {e_c:.3} (C/I {de_ratio:.3}); \
         PCDM excess I {p_i:.4} C {p_c:.4} (C/I {pcdm_ratio:.3})"
    );
    let ok = s_i > s_c && e_c > 0.0 && de_ratio > ssim_ratio && pcdm_ratio > ssim_ratio;
    if ok {
        Verdict::Pass(detail)
    } else {
        Verdict::Fail(detail)
    }
}

fn ac9_baseline_oracles() -> Verdict {
    let luma = |p: [u8; 3]| 0.299 * p[0] as f64 + 0.587 * p[1] as f64 + 0.114 * p[2] as f64;
    let mut worst: f64 = 0.0;
    for seed in 0..4u64 {
        let a = textured_scene(64, 48, seed);
        let b = add_gaussian_noise(&a, 3.0 + seed as f64 * 4.0, seed);
        let mut sse = 0.0;
        for y in 0..a.height() {
            for x in 0..a.width() {
                sse += (luma(a.pixel(x, y)) - luma(b.pixel(x, y))).powi(2);
            }
        }
        let mse = sse / a.pixel_count() as f64;
        let brute = 10.0 * (255.0f64 * 255.0 / mse).log10();
        worst = worst.max((psnr(&a, &b).unwrap() - brute).abs());
    }
    let psnr_worst = worst;

    let x: Vec<f64> = (0..25).map(|i| ((i * 7919) % 101) as f64 / 3.0).collect();
    let y: Vec<f64> = x.iter().enumerate().map(|(i, v)| v * 1.7 + ((i * 31) % 13) as f64).collect();
    let n = x.len() as f64;
    let brute_pearson = |x: &[f64], y: &[f64]| {
        let (sx, sy) = (x.iter().sum::<f64>(), y.iter().sum::<f64>());
        let sxx: f64 = x.iter().map(|v| v * v).sum();
        let syy: f64 = y.iter().map(|v| v * v).sum();
        let sxy: f64 = x.iter().zip(y).map(|(a, b)| a * b).sum();
        (n * sxy - sx * sy) / ((n * sxx - sx * sx).sqrt() * (n * syy - sy * sy).sqrt())
    };
    let count_ranks = |v: &[f64]| -> Vec<f64> {
        v.iter()
            .map(|&a| {
                let less = v.iter().filter(|&&b| b < a).count() as f64;
                let eq = v.iter().filter(|&&b| b == a).count() as f64;
                1.0 + less + (eq - 1.0) / 2.0
            })
            .collect()
    };
    let brute_rmse = (x.iter().zip(&y).map(|(a, b)| (a - b) * (a - b)).sum::<f64>() / n).sqrt();
    worst = worst.max((pearson_cc(&x, &y).unwrap() - brute_pearson(&x, &y)).abs());
    worst = worst.max((rmse(&x, &y).unwrap() - brute_rmse).abs());
    worst = worst.max((spearman_rho(&x, &y).unwrap() - brute_pearson(&count_ranks(&x), &count_ranks(&y))).abs());

    let img = textured_scene(80, 60, 9);
    let self_ssim = ssim(&img, &img).unwrap().score;
    let detail = format!("PSNR max dev {psnr_worst:.1e}, overall max dev {worst:.1e}, SSIM(x,x) = {self_ssim}");
    if worst < 1e-9 && self_ssim == 1.0 {
        Verdict::Pass(detail)
    } else {
        Verdict::Fail(detail)
    }
}

fn main() {
    let checks: [(&str, Check); 9] = [
        ("AC1 CIEDE2000 conformance", ac1_ciede2000_conformance),
        ("AC2 EMD exactness vs LP oracle", ac2_emd_exactness),
        ("AC3 PCDM identity value", ac3_identity),
        ("AC4 monotone in noise level", ac4_noise_monotonicity),
        ("AC5 regression sanity", ac5_regression),
        ("AC6 LIVE Table reproduction", ac6_live_reproduction),
        ("AC7 sampling-rate scaling", ac7_rate_scaling),
        ("AC8 decomposition direction", ac8_decomposition),
        ("AC9 baseline oracles", ac9_baseline_oracles),
    ];
    let mut failures = 0;
    for (name, check) in checks {
        let start = Instant::now();
        let verdict = catch_unwind(AssertUnwindSafe(check))
            .unwrap_or_else(|_| Verdict::Fail("panicked".into()));
        let secs = start.elapsed().as_secs_f64();
        match verdict {
            Verdict::Pass(d) => println!("PASS    {name}: {d} [{secs:.2}s]"),
            Verdict::Skipped(d) => println!("SKIPPED {name}: {d}"),
            Verdict::Fail(d) => {
                failures += 1;
                println!("FAIL    {name}: {d} [{secs:.2}s]");
            }
        }
    }
    if failures > 0 {
        println!("{failures} criterion(s) failed");
        std::process::exit(1);
    }
}

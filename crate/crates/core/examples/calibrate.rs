//! Scratch calibration runs for choosing Monte Carlo parameters.
//! Invoke: cargo run --example calibrate -- <scenario> [args...]

use ltlab_core::functionals::StatKind;
use ltlab_core::kac::{alpha_fixed_time_mean, modulus_mean};
use ltlab_core::path_sim::{SimConfig, SimMode};
use ltlab_core::sampler::{sample_alpha, sample_modulus, sample_statistic};
use std::time::Instant;

fn mean_se(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let m = xs.iter().sum::<f64>() / n;
    let v = xs.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (n - 1.0);
    (m, (v / n).sqrt())
}

fn main() {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let scenario = args.first().map(String::as_str).unwrap_or("help");
    let f = |i: usize, d: f64| args.get(i).and_then(|s| s.parse().ok()).unwrap_or(d);
    match scenario {
        "mean" => {
            // args: t delta dtdiv npaths
            let t = f(1, 16.0);
            let delta = f(2, 1.0 / 16.0);
            let dt = delta * delta / f(3, 16.0);
            let n = f(4, 500.0) as usize;
            let cfg = SimConfig { t_horizon: t, dt, bin_width: delta, n_paths: n, master_seed: 42, mode: SimMode::Brownian };
            let t0 = Instant::now();
            let raw = sample_modulus(&cfg, 1.0, false).unwrap();
            let deb = sample_modulus(&cfg, 1.0, true).unwrap();
            let (mr, sr) = mean_se(&raw);
            let (md, sd) = mean_se(&deb);
            let exact = modulus_mean(t, 1.0).unwrap().value;
            println!("t={t} delta={delta} dt={dt} n={n} elapsed={:?}", t0.elapsed());
            println!("exact {exact:.6}  raw {mr:.6}±{sr:.6} (z={:+.2})  debiased {md:.6}±{sd:.6} (z={:+.2})",
                (mr - exact) / sr, (md - exact) / sd);
        }
        "var" => {
            // args: t delta dtdiv npaths kindflag(0=singleT,1=crossT)
            let t = f(1, 64.0);
            let delta = f(2, 1.0 / 16.0);
            let dt = delta * delta / f(3, 16.0);
            let n = f(4, 1000.0) as usize;
            let cross = f(5, 0.0) > 0.5;
            let kind = if cross { StatKind::CrossT } else { StatKind::SingleT };
            let cfg = SimConfig { t_horizon: t, dt, bin_width: delta, n_paths: n, master_seed: 7, mode: SimMode::Brownian };
            let t0 = Instant::now();
            let vals: Vec<f64> = sample_statistic(&cfg, kind, 1.0, true).unwrap().iter().map(|s| s.value).collect();
            let (m, se) = mean_se(&vals);
            let var = vals.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (vals.len() - 1) as f64;
            let target = if cross { 32.0 / 3.0 } else { 64.0 / 3.0 * alpha_fixed_time_mean(1.0) };
            println!("t={t} delta={delta} n={n} cross={cross} elapsed={:?}", t0.elapsed());
            println!("mean {m:.4}±{se:.4}  var {var:.4}  target(single:(64/3)Eα₁, cross:(32/3)Eβ… raw) {target:.4}  ratio {:.4}", var / target);
        }
        "hform" => {
            // args: h_exp delta_div dtdiv npaths t
            let h = 2.0f64.powi(-(f(1, 6.0) as i32));
            let delta = h / f(2, 4.0);
            let dt = delta * delta / f(3, 16.0);
            let n = f(4, 500.0) as usize;
            let t = f(5, 1.0);
            let cfg = SimConfig { t_horizon: t, dt, bin_width: delta, n_paths: n, master_seed: 11, mode: SimMode::Brownian };
            let t0 = Instant::now();
            let vals: Vec<f64> = sample_statistic(&cfg, StatKind::SingleH, h, true).unwrap().iter().map(|s| s.value).collect();
            let (m, se) = mean_se(&vals);
            let var = vals.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (vals.len() - 1) as f64;
            let target = 64.0 / 3.0 * alpha_fixed_time_mean(t);
            println!("h={h} delta={delta} n={n} elapsed={:?}", t0.elapsed());
            println!("mean {m:.4}±{se:.4}  var {var:.4}  (64/3)Eα_t {target:.4}  ratio {:.4}", var / target);
        }
        "clt" => {
            // args: cross(0/1) t delta nsamples
            use ltlab_core::verify::{verify_clt, LimitKind, VerifyCltConfig};
            let kind = if f(1, 0.0) > 0.5 { LimitKind::Cross } else { LimitKind::Single };
            let cfg = VerifyCltConfig {
                kind,
                t: f(2, 256.0),
                bin_width: f(3, 1.0 / 16.0),
                n_samples: f(4, 2000.0) as usize,
                seed_statistic: 101,
                seed_reference: 202,
            };
            let t0 = Instant::now();
            let r = verify_clt(&cfg).unwrap();
            println!("elapsed {:?}", t0.elapsed());
            println!("ks: D={:.4} p={:.5} pass={}", r.ks.statistic, r.ks.p_value.unwrap(), r.ks.passed);
            println!("variance: {} pass={}", r.variance.details, r.variance.passed);
            for m in &r.moments {
                println!("moment: {} pass={}", m.details, m.passed);
            }
        }
        "lln" => {
            // args: delta_exp npaths dtdiv
            use ltlab_core::verify::lln_ladder;
            let delta = 2.0f64.powi(-(f(1, 9.0) as i32));
            let n = f(2, 400.0) as usize;
            let dt = delta * delta / f(3, 8.0);
            let cfg = SimConfig { t_horizon: 1.0, dt, bin_width: delta, n_paths: n, master_seed: 5, mode: SimMode::Brownian };
            let ladder: Vec<f64> = (4..=7).map(|e| 2.0f64.powi(-e)).collect();
            let t0 = Instant::now();
            let meds = lln_ladder(&cfg, &ladder, true).unwrap();
            println!("delta={delta} n={n} elapsed={:?}", t0.elapsed());
            for (h, m) in meds {
                println!("h={h:.6} median={m:.4} |median-4|={:.4}", (m - 4.0).abs());
            }
        }
        "exp" => {
            // args: cross(0/1) h_exp delta_div npaths dtdiv
            use ltlab_core::sampler::{sample_cross_exponential, sample_single_exponential};
            let cross = f(1, 0.0) > 0.5;
            let h = 2.0f64.powi(-(f(2, 6.0) as i32));
            let delta = h / f(3, 4.0);
            let dt = delta * delta / f(5, 16.0);
            let n = f(4, 1000.0) as usize;
            let cfg = SimConfig { t_horizon: 1.0, dt, bin_width: delta, n_paths: n, master_seed: 17, mode: SimMode::Brownian };
            let t0 = Instant::now();
            let batch = if cross {
                sample_cross_exponential(&cfg, 1.0, 1.0, h, 0.999).unwrap()
            } else {
                sample_single_exponential(&cfg, 1.0, h, 0.999, true).unwrap()
            };
            let sq: Vec<f64> = batch.samples.iter().map(|s| s.value * s.value).collect();
            let (m2, se) = mean_se(&sq);
            let target = if cross { 3.771236 } else { 30.169889 };
            println!("cross={cross} h={h} delta={delta} n={n} capped={} elapsed={:?}", batch.n_capped, t0.elapsed());
            println!("second moment {m2:.4}±{se:.4}  target {target:.4}  z={:+.2}", (m2 - target) / se);
        }
        "alpha" => {
            let delta = f(1, 1.0 / 32.0);
            let dt = delta * delta / f(2, 16.0);
            let n = f(3, 2000.0) as usize;
            let cfg = SimConfig { t_horizon: 1.0, dt, bin_width: delta, n_paths: n, master_seed: 3, mode: SimMode::Brownian };
            let t0 = Instant::now();
            let a = sample_alpha(&cfg, true).unwrap();
            let (m, se) = mean_se(&a);
            println!("delta={delta} n={n} elapsed={:?}", t0.elapsed());
            println!("E[α₁] mc {m:.5}±{se:.5}  exact {:.5}", alpha_fixed_time_mean(1.0));
        }
        _ => println!("scenarios: mean var hform clt lln exp alpha"),
    }
}

//! Distributional and moment verification of the simulated statistics
//! against the predicted limit laws.

use crate::functionals::StatKind;
use crate::kac::{alpha_fixed_time_mean, fit_log_exponent, modulus_mean, MomentValue};
use crate::path_sim::{SimConfig, SimMode};
use crate::rng::{stream_rng, AUX_STREAM_BASE};
use crate::sampler::{map_field_pairs, sample_modulus, sample_statistic};
use crate::{Error, Result};
use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

/// √(64/3), the single-process limit constant.
pub const C_SINGLE: f64 = 4.618802153517006; // (64/3)^{1/2}
/// √(32/3), the cross-process limit constant.
pub const C_CROSS: f64 = 3.265986323710904; // (32/3)^{1/2}

/// Which limit law to sample.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LimitKind {
    /// c √(α₁) η with c = √(64/3).
    Single,
    /// C̃ √(β_{1,1}) η with C̃ = √(32/3).
    Cross,
}

impl LimitKind {
    pub fn constant(self) -> f64 {
        match self {
            LimitKind::Single => C_SINGLE,
            LimitKind::Cross => C_CROSS,
        }
    }
}

/// One draw from the limit law, with the radial and normal parts recorded
/// for audit.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct LimitLawSample {
    pub value: f64,
    pub alpha_or_beta_draw: f64,
    pub normal_draw: f64,
    pub constant_used: f64,
}

/// Samples the limit law by simulating the radial part (α₁ or β_{1,1}) and
/// multiplying by an independent standard normal from the same stream.
///
/// `cfg.n_paths` is the number of samples; `cfg` should be one refinement
/// level finer than the statistic arm it will be compared against.
pub fn sample_limit_law(kind: LimitKind, cfg: &SimConfig) -> Result<Vec<LimitLawSample>> {
    cfg.validate()?;
    let c = kind.constant();
    match kind {
        LimitKind::Single => {
            let corr = 2.0 / 3.0 * cfg.bin_width * cfg.t_horizon;
            (0..cfg.n_paths as u64)
                .into_par_iter()
                .map(|idx| {
                    let mut rng = stream_rng(cfg.master_seed, idx);
                    let field = crate::path_sim::gen_bm_local_time_with(cfg, &mut rng)?;
                    let draw = crate::functionals::alpha(&field) + corr;
                    let eta: f64 = rng.sample(StandardNormal);
                    Ok(LimitLawSample {
                        value: c * draw.sqrt() * eta,
                        alpha_or_beta_draw: draw,
                        normal_draw: eta,
                        constant_used: c,
                    })
                })
                .collect()
        }
        LimitKind::Cross => map_field_pairs(cfg, |f1, f2, idx| {
            let draw = crate::functionals::beta(f1, f2)?.max(0.0);
            let mut rng = stream_rng(cfg.master_seed, AUX_STREAM_BASE + idx);
            let eta: f64 = rng.sample(StandardNormal);
            Ok(LimitLawSample {
                value: c * draw.sqrt() * eta,
                alpha_or_beta_draw: draw,
                normal_draw: eta,
                constant_used: c,
            })
        }),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TestKind {
    KsTwoSample,
    MomentCompare,
    MeanCheck,
    TrendFit,
}

/// Outcome of one distributional or moment comparison.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TestReport {
    pub test_kind: TestKind,
    pub statistic: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub p_value: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ci: Option<[f64; 2]>,
    pub n_a: usize,
    pub n_b: usize,
    pub config_digest: String,
    pub passed: bool,
    pub details: String,
}

/// FNV-1a digest of a configuration description, embedded in every report.
pub fn config_digest(desc: &str) -> String {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for b in desc.as_bytes() {
        h ^= *b as u64;
        h = h.wrapping_mul(0x0000_0100_0000_01b3);
    }
    format!("{h:016x}")
}

/// Survival function of the Kolmogorov distribution,
/// Q(λ) = 2 Σ_{k≥1} (−1)^{k−1} e^{−2k²λ²}.
pub fn kolmogorov_sf(lambda: f64) -> f64 {
    if lambda <= 0.0 {
        return 1.0;
    }
    let mut sum = 0.0;
    let mut sign = 1.0;
    for kk in 1..101 {
        let term = (-2.0 * (kk as f64) * (kk as f64) * lambda * lambda).exp();
        sum += sign * term;
        sign = -sign;
        if term < 1e-16 {
            break;
        }
    }
    (2.0 * sum).clamp(0.0, 1.0)
}

/// Two-sample Kolmogorov–Smirnov statistic D.
pub fn ks_statistic(a: &[f64], b: &[f64]) -> f64 {
    let mut xs = a.to_vec();
    let mut ys = b.to_vec();
    xs.sort_unstable_by(|p, q| p.total_cmp(q));
    ys.sort_unstable_by(|p, q| p.total_cmp(q));
    let (na, nb) = (xs.len() as f64, ys.len() as f64);
    let (mut i, mut j) = (0usize, 0usize);
    let mut d: f64 = 0.0;
    while i < xs.len() && j < ys.len() {
        // Advance past ties in both arrays before comparing ECDFs.
        let v = xs[i].min(ys[j]);
        while i < xs.len() && xs[i] == v {
            i += 1;
        }
        while j < ys.len() && ys[j] == v {
            j += 1;
        }
        d = d.max((i as f64 / na - j as f64 / nb).abs());
    }
    d
}

/// Two-sample KS test with the asymptotic p-value at effective size
/// n_a·n_b/(n_a+n_b).
pub fn ks_two_sample(a: &[f64], b: &[f64], digest: &str) -> Result<TestReport> {
    if a.len() < 100 || b.len() < 100 {
        return Err(Error::Config(format!(
            "ks_two_sample needs at least 100 samples per arm, got {} and {}",
            a.len(),
            b.len()
        )));
    }
    let d = ks_statistic(a, b);
    let ne = (a.len() * b.len()) as f64 / (a.len() + b.len()) as f64;
    let sqrt_ne = ne.sqrt();
    let lambda = (sqrt_ne + 0.12 + 0.11 / sqrt_ne) * d;
    let p = kolmogorov_sf(lambda);
    Ok(TestReport {
        test_kind: TestKind::KsTwoSample,
        statistic: d,
        p_value: Some(p),
        ci: None,
        n_a: a.len(),
        n_b: b.len(),
        config_digest: digest.to_string(),
        passed: p > 0.01,
        details: format!("D={d:.5}, effective n={ne:.1}"),
    })
}

/// Bootstrap percentile confidence interval for the m-th raw moment.
pub fn bootstrap_moment_ci(
    samples: &[f64],
    order: u32,
    level: f64,
    n_resamples: usize,
    seed: u64,
) -> (f64, [f64; 2]) {
    let powered: Vec<f64> = samples.iter().map(|x| x.powi(order as i32)).collect();
    let n = powered.len();
    let point = powered.iter().sum::<f64>() / n as f64;
    let mut rng = stream_rng(seed, AUX_STREAM_BASE + order as u64);
    let mut means = Vec::with_capacity(n_resamples);
    for _ in 0..n_resamples {
        let mut s = 0.0;
        for _ in 0..n {
            s += powered[rng.gen_range(0..n)];
        }
        means.push(s / n as f64);
    }
    means.sort_unstable_by(|p, q| p.total_cmp(q));
    let tail = (1.0 - level) / 2.0;
    let lo = means[((n_resamples as f64 * tail) as usize).min(n_resamples - 1)];
    let hi = means[((n_resamples as f64 * (1.0 - tail)) as usize).min(n_resamples - 1)];
    (point, [lo, hi])
}

/// Compares the empirical m-th moment of `samples` against a prediction,
/// using a bootstrap 99% CI widened by the prediction's own error estimate.
pub fn moment_compare(
    samples: &[f64],
    predicted: &MomentValue,
    order: u32,
    digest: &str,
    seed: u64,
) -> TestReport {
    let (point, ci) = bootstrap_moment_ci(samples, order, 0.99, 10_000, seed);
    let lo = ci[0] - predicted.abs_error_estimate;
    let hi = ci[1] + predicted.abs_error_estimate;
    let passed = predicted.value >= lo && predicted.value <= hi;
    TestReport {
        test_kind: TestKind::MomentCompare,
        statistic: point,
        p_value: None,
        ci: Some(ci),
        n_a: samples.len(),
        n_b: 0,
        config_digest: digest.to_string(),
        passed,
        details: format!(
            "order {order}: empirical {point:.5}, predicted {:.5} ± {:.2e}",
            predicted.value, predicted.abs_error_estimate
        ),
    }
}

fn mean_and_se(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let var = xs.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}

/// One rung of a mean-check ladder.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MeanCheckPoint {
    pub t: f64,
    pub mc_mean: f64,
    pub mc_se: f64,
    pub exact: f64,
    pub z: f64,
}

/// Result of comparing simulated modulus means against the exact quadrature
/// mean over a horizon ladder.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MeanCheckReport {
    pub points: Vec<MeanCheckPoint>,
    /// Fitted exponent of |mean − 4t| against t.
    pub deficit_exponent: f64,
    pub report: TestReport,
}

/// Compares the Monte Carlo mean of ∫(L^{x+1}_t − L^x_t)² dx against
/// `modulus_mean(t, 1)` at each ladder point, and fits the growth of the
/// centering deficit |mean − 4t| against t.
pub fn mean_check(
    t_ladder: &[f64],
    template: &SimConfig,
    bin_width_for: impl Fn(f64) -> f64,
    debias: bool,
) -> Result<MeanCheckReport> {
    if t_ladder.len() < 3 {
        return Err(Error::Config("mean_check needs a ladder of at least 3 horizons".into()));
    }
    let mut points = Vec::new();
    for &t in t_ladder {
        let delta = bin_width_for(t);
        let cfg = SimConfig {
            t_horizon: t,
            dt: delta * delta / 16.0,
            bin_width: delta,
            ..template.clone()
        };
        let ms = sample_modulus(&cfg, 1.0, debias)?;
        let (mean, se) = mean_and_se(&ms);
        let exact = modulus_mean(t, 1.0)?.value;
        points.push(MeanCheckPoint { t, mc_mean: mean, mc_se: se, exact, z: (mean - exact) / se });
    }
    let ts: Vec<f64> = points.iter().map(|p| p.t).collect();
    let deficits: Vec<f64> = points.iter().map(|p| (p.mc_mean - 4.0 * p.t).abs()).collect();
    let exponent = fit_log_exponent(&ts, &deficits);
    let worst_z = points.iter().map(|p| p.z.abs()).fold(0.0, f64::max);
    let digest = config_digest(&format!("mean_check t={t_ladder:?} seed={}", template.master_seed));
    let passed = worst_z <= 3.0 && exponent <= 0.6;
    Ok(MeanCheckReport {
        points,
        deficit_exponent: exponent,
        report: TestReport {
            test_kind: TestKind::MeanCheck,
            statistic: worst_z,
            p_value: None,
            ci: None,
            n_a: template.n_paths,
            n_b: 0,
            config_digest: digest,
            passed,
            details: format!("worst |z| = {worst_z:.2}, deficit exponent = {exponent:.3}"),
        },
    })
}

/// Configuration of a full CLT verification run.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct VerifyCltConfig {
    pub kind: LimitKind,
    /// Horizon of the t-form statistic.
    pub t: f64,
    /// Bin width of the statistic arm; the reference arm runs one level finer.
    pub bin_width: f64,
    pub n_samples: usize,
    pub seed_statistic: u64,
    pub seed_reference: u64,
}

/// Consolidated output of [`verify_clt`].
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct VerifyCltReport {
    pub kind: LimitKind,
    pub ks: TestReport,
    pub variance: TestReport,
    pub moments: Vec<TestReport>,
    pub insufficient_power: bool,
    pub passed: bool,
}

/// Simulates the t-form statistic and the limit law, then runs the KS test
/// and moment comparisons for orders 1..4.
///
/// The statistic and reference arms must use different master seeds; the
/// reference arm's own radial simulation runs at half the statistic arm's
/// bin width so a shared discretization bias cannot cancel.
pub fn verify_clt(cfg: &VerifyCltConfig) -> Result<VerifyCltReport> {
    verify_clt_with_samples(cfg).map(|(report, _, _)| report)
}

/// As [`verify_clt`], also returning both sample arrays (statistic arm,
/// reference arm) for export.
pub fn verify_clt_with_samples(
    cfg: &VerifyCltConfig,
) -> Result<(VerifyCltReport, Vec<f64>, Vec<f64>)> {
    if cfg.seed_statistic == cfg.seed_reference {
        return Err(Error::Config(
            "statistic and reference arms must use different master seeds".into(),
        ));
    }
    let insufficient_power = cfg.n_samples < 1000;
    let delta = cfg.bin_width;
    let stat_cfg = SimConfig {
        t_horizon: cfg.t,
        dt: delta * delta / 16.0,
        bin_width: delta,
        n_paths: cfg.n_samples,
        master_seed: cfg.seed_statistic,
        mode: SimMode::Brownian,
    };
    let stat_kind = match cfg.kind {
        LimitKind::Single => StatKind::SingleT,
        LimitKind::Cross => StatKind::CrossT,
    };
    let stat: Vec<f64> = sample_statistic(&stat_cfg, stat_kind, 1.0, true)?
        .iter()
        .map(|s| s.value)
        .collect();

    let ref_delta = delta / 2.0;
    let ref_cfg = SimConfig {
        t_horizon: 1.0,
        dt: ref_delta * ref_delta / 16.0,
        bin_width: ref_delta,
        n_paths: cfg.n_samples,
        master_seed: cfg.seed_reference,
        mode: SimMode::Brownian,
    };
    let reference = sample_limit_law(cfg.kind, &ref_cfg)?;
    let ref_values: Vec<f64> = reference.iter().map(|s| s.value).collect();
    let radial: Vec<f64> = reference.iter().map(|s| s.alpha_or_beta_draw).collect();

    let digest = config_digest(&format!("{cfg:?}"));
    let ks = ks_two_sample(&stat, &ref_values, &digest)?;

    // Variance against the quadrature/MC radial mean.
    let c2 = cfg.kind.constant() * cfg.kind.constant();
    let radial_mean = match cfg.kind {
        LimitKind::Single => alpha_fixed_time_mean(1.0),
        LimitKind::Cross => radial.iter().sum::<f64>() / radial.len() as f64,
    };
    let target_var = c2 * radial_mean;
    let (stat_mean, _) = mean_and_se(&stat);
    let emp_var = stat
        .iter()
        .map(|x| (x - stat_mean) * (x - stat_mean))
        .sum::<f64>()
        / (stat.len() - 1) as f64;
    let var_ratio = emp_var / target_var;
    let variance = TestReport {
        test_kind: TestKind::MomentCompare,
        statistic: emp_var,
        p_value: None,
        ci: Some([0.95 * target_var, 1.05 * target_var]),
        n_a: stat.len(),
        n_b: radial.len(),
        config_digest: digest.clone(),
        passed: (var_ratio - 1.0).abs() <= 0.05,
        details: format!("empirical variance {emp_var:.4}, target {target_var:.4}"),
    };

    // Moment comparisons m = 1..4. Odd moments vanish; even-moment targets
    // come from the Monte Carlo radial draws (fixed-time radial moments have
    // no quadrature route).
    let mut moments = Vec::new();
    for m in 1..=4u32 {
        let predicted = match m {
            1 | 3 => MomentValue {
                value: 0.0,
                abs_error_estimate: 0.0,
                method: crate::kac::MomentMethod::ClosedForm,
            },
            2 => {
                let (rm, rse) = mean_and_se(&radial);
                MomentValue {
                    value: c2 * rm,
                    abs_error_estimate: 3.0 * c2 * rse,
                    method: crate::kac::MomentMethod::Quadrature,
                }
            }
            _ => {
                let sq: Vec<f64> = radial.iter().map(|r| r * r).collect();
                let (rm, rse) = mean_and_se(&sq);
                MomentValue {
                    value: 3.0 * c2 * c2 * rm,
                    abs_error_estimate: 3.0 * 3.0 * c2 * c2 * rse,
                    method: crate::kac::MomentMethod::Quadrature,
                }
            }
        };
        moments.push(moment_compare(&stat, &predicted, m, &digest, cfg.seed_reference ^ m as u64));
    }

    let passed = ks.passed && variance.passed && moments.iter().all(|m| m.passed);
    Ok((
        VerifyCltReport {
            kind: cfg.kind,
            ks,
            variance,
            moments,
            insufficient_power,
            passed: passed && !insufficient_power,
        },
        stat,
        ref_values,
    ))
}

/// Per-path LLN ladder: medians of sq_modulus(·, h)/h at t = 1 over a
/// dyadic h-ladder, for trend diagnostics against the a.s. limit 4t.
pub fn lln_ladder(
    template: &SimConfig,
    h_ladder: &[f64],
    debias: bool,
) -> Result<Vec<(f64, f64)>> {
    // One simulation pass; every rung is evaluated on the same field so the
    // rung-to-rung noise is maximally correlated.
    let ladder = h_ladder.to_vec();
    let per_path: Vec<Vec<f64>> = crate::sampler::map_fields(template, |field, _| {
        ladder
            .iter()
            .map(|&h| {
                let m = if debias {
                    crate::functionals::sq_modulus_debiased(field, h)?
                } else {
                    crate::functionals::sq_modulus(field, h)?
                };
                Ok(m / h)
            })
            .collect()
    })?;
    let mut out = Vec::new();
    for (j, &h) in h_ladder.iter().enumerate() {
        let mut scaled: Vec<f64> = per_path.iter().map(|row| row[j]).collect();
        scaled.sort_unstable_by(|p, q| p.total_cmp(q));
        let median = scaled[scaled.len() / 2];
        out.push((h, median));
    }
    Ok(out)
}

/// Monte Carlo second moment of the cross h-statistic at fixed times
/// s = t, for the monotonicity diagnostic along an s = t ladder.
pub fn cross_second_moment(template: &SimConfig, h: f64) -> Result<(f64, f64)> {
    let vals: Vec<f64> = sample_statistic(template, StatKind::CrossH, h, false)?
        .iter()
        .map(|s| s.value * s.value)
        .collect();
    Ok(mean_and_se(&vals))
}

/// Sanity statistics used by callers that need a quick normality audit of
/// limit-law samples: mean and odd-moment z-scores.
pub fn odd_moment_z(samples: &[f64], order: u32) -> f64 {
    let powered: Vec<f64> = samples.iter().map(|x| x.powi(order as i32)).collect();
    let (m, se) = mean_and_se(&powered);
    m / se
}

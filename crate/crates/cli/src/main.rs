//! Command-line front end: configuration, orchestration, and emission of
//! tables, CSV/JSON reports, and SVG histograms.
//!
//! Exit codes: 0 all checks pass, 1 statistical rejection, 2 usage error,
//! 3 runtime/numerical failure.

mod svg;

use clap::{Args, Parser, Subcommand, ValueEnum};
use ltlab_core::functionals::{StatKind, StatSample};
use ltlab_core::kac::{
    kac_alpha_moment, kac_beta_moment, limit_prediction, modulus_mean, MomentLaw, MomentSpec,
    MomentTarget, MomentValue,
};
use ltlab_core::path_sim::{simulate_field, SimConfig, SimMode};
use ltlab_core::sampler::{sample_alpha, sample_beta, sample_statistic, with_thread_count};
use ltlab_core::verify::{
    config_digest, mean_check, verify_clt_with_samples, LimitKind, VerifyCltConfig,
};
use std::collections::HashMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::str::FromStr;

/// Env var naming the default output directory.
const OUT_ENV: &str = "LTLAB_OUT";

#[derive(Parser, Debug)]
#[command(
    name = "ltlab",
    version,
    about = "Numerical laboratory for the L² modulus of continuity of Brownian local time"
)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
#[value(rename_all = "snake_case")]
enum OutFormat {
    Csv,
    Json,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
#[value(rename_all = "snake_case")]
enum ModeArg {
    Brownian,
    Lattice,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
#[value(rename_all = "snake_case")]
enum KindArg {
    SingleH,
    SingleT,
    CrossH,
    CrossT,
    Alpha,
    Beta,
    Field,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
#[value(rename_all = "snake_case")]
enum KacTarget {
    AlphaMoment,
    BetaMoment,
    ModulusMean,
    LimitPredictionSingle,
    LimitPredictionCross,
}

#[derive(Args, Debug, Clone, Default)]
struct Common {
    /// Flat key=value config file; command-line flags win over it.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory (default: $LTLAB_OUT, else current directory).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Artifact format for tabular reports.
    #[arg(long, global = true, value_enum)]
    format: Option<OutFormat>,
    /// Also emit SVG plots.
    #[arg(long, global = true)]
    plot: bool,
    /// Worker threads (default: all cores; results identical for any value).
    #[arg(long, global = true)]
    threads: Option<usize>,
}

#[derive(Subcommand, Debug)]
enum Cmd {
    /// Draw Monte Carlo samples of a path statistic and write a sample CSV.
    Simulate {
        #[command(flatten)]
        common: Common,
        /// Statistic to sample.
        #[arg(long, value_enum)]
        kind: Option<KindArg>,
        #[arg(long)]
        t: Option<f64>,
        #[arg(long)]
        h: Option<f64>,
        #[arg(long)]
        dt: Option<f64>,
        #[arg(long)]
        bin_width: Option<f64>,
        #[arg(long)]
        paths: Option<usize>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long, value_enum)]
        mode: Option<ModeArg>,
        /// Disable the bin-averaging debias correction (single kinds only).
        #[arg(long)]
        raw: bool,
    },
    /// Verify the single-process CLT: statistic arm vs limit-law arm.
    VerifyClt {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        t: Option<f64>,
        #[arg(long)]
        bin_width: Option<f64>,
        #[arg(long)]
        paths: Option<usize>,
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Verify the cross-process CLT: statistic arm vs limit-law arm.
    VerifyCross {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        t: Option<f64>,
        #[arg(long)]
        bin_width: Option<f64>,
        #[arg(long)]
        paths: Option<usize>,
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Evaluate exact moment predictions (quadrature / closed forms).
    Kac {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_enum)]
        target: Option<KacTarget>,
        /// Statistic moment order (limit predictions).
        #[arg(long)]
        m: Option<u32>,
        /// Radial moment order (alpha/beta moments).
        #[arg(long)]
        n: Option<u32>,
        #[arg(long)]
        zeta: Option<f64>,
        #[arg(long)]
        zeta2: Option<f64>,
        #[arg(long)]
        t: Option<f64>,
        #[arg(long)]
        h: Option<f64>,
    },
    /// Compare simulated modulus means against the exact quadrature mean
    /// over a horizon ladder, and fit the centering-deficit exponent.
    MeanCheck {
        #[command(flatten)]
        common: Common,
        /// Comma-separated horizon ladder, e.g. 64,256,1024.
        #[arg(long)]
        t: Option<String>,
        #[arg(long)]
        bin_width: Option<f64>,
        #[arg(long)]
        paths: Option<usize>,
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Check the pathwise scaling identity M(t,h) = h³ M(t/h², 1).
    ScalingCheck {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_enum)]
        mode: Option<ModeArg>,
        #[arg(long)]
        t: Option<f64>,
        #[arg(long)]
        h: Option<f64>,
        #[arg(long)]
        bin_width: Option<f64>,
        #[arg(long)]
        paths: Option<usize>,
        #[arg(long)]
        seed: Option<u64>,
    },
}

/// Failure classified by exit code.
enum Failure {
    Rejection(String),
    Usage(String),
    Runtime(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Rejection(_) => 1,
            Failure::Usage(_) => 2,
            Failure::Runtime(_) => 3,
        }
    }
    fn message(&self) -> &str {
        match self {
            Failure::Rejection(m) | Failure::Usage(m) | Failure::Runtime(m) => m,
        }
    }
}

impl From<ltlab_core::Error> for Failure {
    fn from(e: ltlab_core::Error) -> Self {
        use ltlab_core::Error::*;
        match e {
            Config(_) | GridMismatch(_) | ProbeAlignment { .. } => Failure::Usage(e.to_string()),
            _ => Failure::Runtime(e.to_string()),
        }
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Runtime(format!("i/o failure: {e}"))
    }
}

/// Key-value pairs loaded from a flat config file.
struct FileCfg(HashMap<String, String>);

impl FileCfg {
    fn load(path: Option<&Path>) -> Result<Self, Failure> {
        let mut map = HashMap::new();
        if let Some(p) = path {
            let text = std::fs::read_to_string(p)
                .map_err(|e| Failure::Usage(format!("cannot read config {}: {e}", p.display())))?;
            for (lineno, line) in text.lines().enumerate() {
                let line = line.trim();
                if line.is_empty() || line.starts_with('#') {
                    continue;
                }
                let (k, v) = line.split_once('=').ok_or_else(|| {
                    Failure::Usage(format!(
                        "config {}:{}: expected key=value, got {line:?}",
                        p.display(),
                        lineno + 1
                    ))
                })?;
                map.insert(k.trim().to_string(), v.trim().to_string());
            }
        }
        Ok(FileCfg(map))
    }

    fn get<T: FromStr>(&self, key: &str) -> Result<Option<T>, Failure> {
        match self.0.get(key) {
            None => Ok(None),
            Some(raw) => raw.parse::<T>().map(Some).map_err(|_| {
                Failure::Usage(format!("config key {key}: cannot parse {raw:?}"))
            }),
        }
    }
}

/// Flag > config file > default.
fn resolve<T: FromStr>(
    flag: Option<T>,
    cfg: &FileCfg,
    key: &str,
    default: T,
) -> Result<T, Failure> {
    Ok(flag.or(cfg.get(key)?).unwrap_or(default))
}

fn out_dir(common: &Common) -> Result<PathBuf, Failure> {
    let dir = common
        .out
        .clone()
        .or_else(|| std::env::var_os(OUT_ENV).map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("."));
    std::fs::create_dir_all(&dir)?;
    Ok(dir)
}

fn write_artifact(dir: &Path, name: &str, content: &str) -> Result<PathBuf, Failure> {
    let path = dir.join(name);
    std::fs::write(&path, content)?;
    Ok(path)
}

fn json<T: serde::Serialize>(value: &T) -> Result<String, Failure> {
    serde_json::to_string_pretty(value).map_err(|e| Failure::Runtime(e.to_string()))
}

fn stat_csv(samples: &[StatSample]) -> Result<String, Failure> {
    let mut buf = Vec::new();
    ltlab_core::functionals::write_stat_csv(&mut buf, samples)?;
    String::from_utf8(buf).map_err(|e| Failure::Runtime(e.to_string()))
}

fn plain_csv(kind: &str, h: f64, t: f64, values: &[f64]) -> String {
    let mut s = String::from("kind,h,t,seed,value\n");
    for (i, v) in values.iter().enumerate() {
        let _ = writeln!(s, "{kind},{h},{t},{i},{v:.17e}");
    }
    s
}

fn summary_stats(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n - 1.0).max(1.0);
    (mean, var.sqrt())
}

fn moment_csv(
    target: &str,
    zeta: f64,
    zeta2: f64,
    t: f64,
    h: f64,
    order: u32,
    mv: &MomentValue,
) -> Result<String, Failure> {
    let method = match mv.method {
        ltlab_core::kac::MomentMethod::ClosedForm => "closed_form",
        ltlab_core::kac::MomentMethod::Quadrature => "quadrature",
        ltlab_core::kac::MomentMethod::PermutationSum => "permutation_sum",
    };
    Ok(format!(
        "target,zeta,zeta2,t,h,order,value,error,method\n\
         {target},{zeta},{zeta2},{t},{h},{order},{:.17e},{:.3e},{method}\n",
        mv.value, mv.abs_error_estimate
    ))
}

fn run_simulate(
    common: &Common,
    kind: Option<KindArg>,
    t: Option<f64>,
    h: Option<f64>,
    dt: Option<f64>,
    bin_width: Option<f64>,
    paths: Option<usize>,
    seed: Option<u64>,
    mode: Option<ModeArg>,
    raw: bool,
) -> Result<(), Failure> {
    let cfg = FileCfg::load(common.config.as_deref())?;
    let kind = kind
        .or(match cfg.0.get("kind").map(String::as_str) {
            Some("single_h") => Some(KindArg::SingleH),
            Some("single_t") => Some(KindArg::SingleT),
            Some("cross_h") => Some(KindArg::CrossH),
            Some("cross_t") => Some(KindArg::CrossT),
            Some("alpha") => Some(KindArg::Alpha),
            Some("beta") => Some(KindArg::Beta),
            Some("field") => Some(KindArg::Field),
            Some(other) => return Err(Failure::Usage(format!("unknown kind {other:?}"))),
            None => None,
        })
        .ok_or_else(|| Failure::Usage("simulate requires --kind".into()))?;
    let mode = mode
        .or(match cfg.0.get("mode").map(String::as_str) {
            Some("brownian") => Some(ModeArg::Brownian),
            Some("lattice") => Some(ModeArg::Lattice),
            Some(other) => return Err(Failure::Usage(format!("unknown mode {other:?}"))),
            None => None,
        })
        .unwrap_or(ModeArg::Brownian);
    let t = resolve(t, &cfg, "t", 1.0)?;
    let h = resolve(h, &cfg, "h", 1.0)?;
    let delta = resolve(bin_width, &cfg, "bin_width", if mode == ModeArg::Lattice { 1.0 } else { 1.0 / 16.0 })?;
    let dt = resolve(dt, &cfg, "dt", delta * delta / 16.0)?;
    let paths = resolve(paths, &cfg, "paths", 1000)?;
    let seed = resolve(seed, &cfg, "seed", 0)?;
    let debias = !raw && mode == ModeArg::Brownian;
    let sim = SimConfig {
        t_horizon: t,
        dt,
        bin_width: delta,
        n_paths: paths,
        master_seed: seed,
        mode: if mode == ModeArg::Lattice { SimMode::LatticeWalk } else { SimMode::Brownian },
    };
    sim.validate()?;
    let digest = config_digest(&format!("simulate {kind:?} {sim:?} debias={debias}"));
    let dir = out_dir(common)?;

    let run = || -> Result<(), Failure> {
        match kind {
            KindArg::Field => {
                let field = simulate_field(&sim, seed)?;
                let mut bin = Vec::new();
                field.write_dump(&mut bin)?;
                std::fs::write(dir.join(format!("field_{digest}.bin")), &bin)?;
                let mut csv = Vec::new();
                field.write_csv(&mut csv)?;
                std::fs::write(dir.join(format!("field_{digest}.csv")), &csv)?;
                println!(
                    "field: {} bins, total occupation {:.6} (t = {t})",
                    field.values.len(),
                    field.total_occupation()
                );
            }
            KindArg::Alpha | KindArg::Beta => {
                let (name, values) = match kind {
                    KindArg::Alpha => ("alpha", sample_alpha(&sim, debias)?),
                    _ => ("beta", sample_beta(&sim)?),
                };
                let (mean, sd) = summary_stats(&values);
                let csv = plain_csv(name, 0.0, t, &values);
                let path = write_artifact(&dir, &format!("samples_{name}_{digest}.csv"), &csv)?;
                println!("{name}: n = {paths}, mean = {mean:.5}, sd = {sd:.5}");
                println!("wrote {}", path.display());
                if common.plot {
                    let s = svg::histogram(&[(name, &values, "steelblue")], 60, name);
                    write_artifact(&dir, &format!("hist_{name}_{digest}.svg"), &s)?;
                }
            }
            _ => {
                let stat_kind = match kind {
                    KindArg::SingleH => StatKind::SingleH,
                    KindArg::SingleT => StatKind::SingleT,
                    KindArg::CrossH => StatKind::CrossH,
                    _ => StatKind::CrossT,
                };
                let samples = sample_statistic(&sim, stat_kind, h, debias)?;
                let values: Vec<f64> = samples.iter().map(|s| s.value).collect();
                let (mean, sd) = summary_stats(&values);
                let csv = stat_csv(&samples)?;
                let name = stat_kind.as_str();
                let path = write_artifact(&dir, &format!("samples_{name}_{digest}.csv"), &csv)?;
                println!("{name}: n = {paths}, mean = {mean:.5}, sd = {sd:.5}");
                println!("wrote {}", path.display());
                if common.plot {
                    let s = svg::histogram(&[(name, &values, "steelblue")], 60, name);
                    write_artifact(&dir, &format!("hist_{name}_{digest}.svg"), &s)?;
                }
            }
        }
        Ok(())
    };
    match common.threads {
        Some(n) => with_thread_count(n, run),
        None => run(),
    }
}

fn run_verify(
    common: &Common,
    limit_kind: LimitKind,
    t: Option<f64>,
    bin_width: Option<f64>,
    paths: Option<usize>,
    seed: Option<u64>,
) -> Result<(), Failure> {
    let cfg = FileCfg::load(common.config.as_deref())?;
    let t = resolve(t, &cfg, "t", 256.0)?;
    let delta = resolve(bin_width, &cfg, "bin_width", 1.0 / 16.0)?;
    let paths = resolve(paths, &cfg, "paths", 10_000)?;
    let seed = resolve(seed, &cfg, "seed", 7)?;
    let vcfg = VerifyCltConfig {
        kind: limit_kind,
        t,
        bin_width: delta,
        n_samples: paths,
        seed_statistic: seed,
        // Independent stream family for the reference arm.
        seed_reference: seed ^ 0xd1b5_4a32_d192_ed03,
    };
    let dir = out_dir(common)?;
    let run = || verify_clt_with_samples(&vcfg);
    let (report, stat, reference) = match common.threads {
        Some(n) => with_thread_count(n, run),
        None => run(),
    }?;

    let digest = report.ks.config_digest.clone();
    let label = match limit_kind {
        LimitKind::Single => "single_t",
        LimitKind::Cross => "cross_t",
    };
    let stat_rows: Vec<StatSample> = stat
        .iter()
        .enumerate()
        .map(|(i, &v)| StatSample {
            value: v,
            statistic_kind: match limit_kind {
                LimitKind::Single => StatKind::SingleT,
                LimitKind::Cross => StatKind::CrossT,
            },
            h: 1.0,
            t,
            seed: i as u64,
        })
        .collect();
    write_artifact(&dir, &format!("samples_{label}_{digest}.csv"), &stat_csv(&stat_rows)?)?;
    write_artifact(
        &dir,
        &format!("samples_limit_{label}_{digest}.csv"),
        &plain_csv(&format!("limit_{label}"), 1.0, 1.0, &reference),
    )?;
    write_artifact(&dir, &format!("report_{label}_{digest}.json"), &json(&report)?)?;
    if common.format == Some(OutFormat::Csv) {
        let mut s = String::from("test_kind,statistic,p_value,ci_lo,ci_hi,n_a,n_b,passed\n");
        for r in std::iter::once(&report.ks)
            .chain(std::iter::once(&report.variance))
            .chain(report.moments.iter())
        {
            let _ = writeln!(
                s,
                "{:?},{},{},{},{},{},{},{}",
                r.test_kind,
                r.statistic,
                r.p_value.map(|p| p.to_string()).unwrap_or_default(),
                r.ci.map(|c| c[0].to_string()).unwrap_or_default(),
                r.ci.map(|c| c[1].to_string()).unwrap_or_default(),
                r.n_a,
                r.n_b,
                r.passed
            );
        }
        write_artifact(&dir, &format!("report_{label}_{digest}.csv"), &s)?;
    }
    if common.plot {
        let s = svg::histogram(
            &[
                ("statistic arm", &stat, "steelblue"),
                ("limit-law arm", &reference, "indianred"),
            ],
            60,
            &format!("{label} statistic vs limit law, t = {t}"),
        );
        write_artifact(&dir, &format!("hist_{label}_{digest}.svg"), &s)?;
    }

    println!("=== {label} CLT verification, t = {t}, n = {paths} per arm ===");
    println!(
        "KS: D = {:.5}, p = {:.5} -> {}",
        report.ks.statistic,
        report.ks.p_value.unwrap_or(f64::NAN),
        if report.ks.passed { "pass" } else { "reject" }
    );
    println!(
        "variance: {} -> {}",
        report.variance.details,
        if report.variance.passed { "pass" } else { "reject" }
    );
    for m in &report.moments {
        println!("{} -> {}", m.details, if m.passed { "pass" } else { "reject" });
    }
    if report.insufficient_power {
        println!("note: n < 1000, insufficient power; run flagged as non-passing");
    }
    if report.passed {
        Ok(())
    } else {
        Err(Failure::Rejection(format!(
            "{label} verification rejected (KS p = {:.3e})",
            report.ks.p_value.unwrap_or(f64::NAN)
        )))
    }
}

#[allow(clippy::too_many_arguments)]
fn run_kac(
    common: &Common,
    target: Option<KacTarget>,
    m: Option<u32>,
    n: Option<u32>,
    zeta: Option<f64>,
    zeta2: Option<f64>,
    t: Option<f64>,
    h: Option<f64>,
) -> Result<(), Failure> {
    let cfg = FileCfg::load(common.config.as_deref())?;
    let target = target
        .or(match cfg.0.get("target").map(String::as_str) {
            Some("alpha_moment") => Some(KacTarget::AlphaMoment),
            Some("beta_moment") => Some(KacTarget::BetaMoment),
            Some("modulus_mean") => Some(KacTarget::ModulusMean),
            Some("limit_prediction_single") => Some(KacTarget::LimitPredictionSingle),
            Some("limit_prediction_cross") => Some(KacTarget::LimitPredictionCross),
            Some(other) => return Err(Failure::Usage(format!("unknown target {other:?}"))),
            None => None,
        })
        .ok_or_else(|| Failure::Usage("kac requires --target".into()))?;
    let zeta = resolve(zeta, &cfg, "zeta", 1.0)?;
    let zeta2 = resolve(zeta2, &cfg, "zeta2", zeta)?;
    let t = resolve(t, &cfg, "t", 1.0)?;
    let h = resolve(h, &cfg, "h", 1.0)?;
    let m = resolve(m, &cfg, "m", 2)?;
    let n = resolve(n, &cfg, "n", 1)?;

    let (name, order, mv) = match target {
        KacTarget::AlphaMoment => ("alpha_moment", n, kac_alpha_moment(zeta, n)?),
        KacTarget::BetaMoment => ("beta_moment", n, kac_beta_moment(zeta, zeta2, n)?),
        KacTarget::ModulusMean => ("modulus_mean", 1, modulus_mean(t, h)?),
        KacTarget::LimitPredictionSingle => (
            "limit_prediction_single",
            m,
            limit_prediction(&MomentSpec {
                order: m,
                law: MomentLaw::Exponential { zeta },
                target: MomentTarget::LimitPredictionSingle,
            })?,
        ),
        KacTarget::LimitPredictionCross => (
            "limit_prediction_cross",
            m,
            limit_prediction(&MomentSpec {
                order: m,
                law: MomentLaw::ExponentialPair { zeta, zeta2 },
                target: MomentTarget::LimitPredictionCross,
            })?,
        ),
    };
    println!("{name}: {:.6} ± {:.2e}", mv.value, mv.abs_error_estimate);
    let dir = out_dir(common)?;
    let digest = config_digest(&format!("kac {name} {zeta} {zeta2} {t} {h} {order}"));
    match common.format.unwrap_or(OutFormat::Csv) {
        OutFormat::Csv => {
            let csv = moment_csv(name, zeta, zeta2, t, h, order, &mv)?;
            write_artifact(&dir, &format!("moment_{name}_{digest}.csv"), &csv)?;
        }
        OutFormat::Json => {
            #[derive(serde::Serialize)]
            struct MomentReport<'a> {
                target: &'a str,
                zeta: f64,
                zeta2: f64,
                t: f64,
                h: f64,
                order: u32,
                #[serde(flatten)]
                value: &'a MomentValue,
                config_digest: &'a str,
            }
            let rep = MomentReport {
                target: name,
                zeta,
                zeta2,
                t,
                h,
                order,
                value: &mv,
                config_digest: &digest,
            };
            write_artifact(&dir, &format!("moment_{name}_{digest}.json"), &json(&rep)?)?;
        }
    }
    Ok(())
}

fn run_mean_check(
    common: &Common,
    t: Option<String>,
    bin_width: Option<f64>,
    paths: Option<usize>,
    seed: Option<u64>,
) -> Result<(), Failure> {
    let cfg = FileCfg::load(common.config.as_deref())?;
    let ladder_raw = t.or(cfg.0.get("t").cloned()).unwrap_or_else(|| "64,256,1024".into());
    let ladder: Vec<f64> = ladder_raw
        .split(',')
        .map(|s| s.trim().parse::<f64>())
        .collect::<Result<_, _>>()
        .map_err(|_| Failure::Usage(format!("cannot parse t ladder {ladder_raw:?}")))?;
    let delta = resolve(bin_width, &cfg, "bin_width", 1.0 / 16.0)?;
    let paths = resolve(paths, &cfg, "paths", 2000)?;
    let seed = resolve(seed, &cfg, "seed", 1)?;
    let template = SimConfig {
        t_horizon: 1.0,
        dt: delta * delta / 16.0,
        bin_width: delta,
        n_paths: paths,
        master_seed: seed,
        mode: SimMode::Brownian,
    };
    let run = || mean_check(&ladder, &template, |_| delta, true);
    let report = match common.threads {
        Some(n) => with_thread_count(n, run),
        None => run(),
    }?;
    let dir = out_dir(common)?;
    let digest = report.report.config_digest.clone();
    write_artifact(&dir, &format!("mean_check_{digest}.json"), &json(&report)?)?;
    let mut csv = String::from("t,mc_mean,mc_se,exact,z\n");
    for p in &report.points {
        let _ = writeln!(csv, "{},{},{},{},{}", p.t, p.mc_mean, p.mc_se, p.exact, p.z);
    }
    write_artifact(&dir, &format!("mean_check_{digest}.csv"), &csv)?;
    if common.plot {
        let pts: Vec<(f64, f64)> = report
            .points
            .iter()
            .map(|p| (p.t.ln(), (p.mc_mean - 4.0 * p.t).abs().max(f64::MIN_POSITIVE).ln()))
            .collect();
        let s = svg::line_plot(&pts, "log |mean − 4t| vs log t");
        write_artifact(&dir, &format!("mean_check_{digest}.svg"), &s)?;
    }
    println!("=== mean check over t = {ladder:?}, n = {paths} ===");
    for p in &report.points {
        println!(
            "t = {:6}: mc {:.4} ± {:.4}, exact {:.4}, z = {:+.2}",
            p.t, p.mc_mean, p.mc_se, p.exact, p.z
        );
    }
    println!(
        "deficit exponent = {:.3} (requires ≤ 0.6), worst |z| = {:.2}",
        report.deficit_exponent, report.report.statistic
    );
    if report.report.passed {
        Ok(())
    } else {
        Err(Failure::Rejection("mean check rejected".into()))
    }
}

fn run_scaling_check(
    common: &Common,
    mode: Option<ModeArg>,
    t: Option<f64>,
    h: Option<f64>,
    bin_width: Option<f64>,
    paths: Option<usize>,
    seed: Option<u64>,
) -> Result<(), Failure> {
    let cfg = FileCfg::load(common.config.as_deref())?;
    let mode = mode
        .or(match cfg.0.get("mode").map(String::as_str) {
            Some("brownian") => Some(ModeArg::Brownian),
            Some("lattice") => Some(ModeArg::Lattice),
            Some(other) => return Err(Failure::Usage(format!("unknown mode {other:?}"))),
            None => None,
        })
        .unwrap_or(ModeArg::Lattice);
    let seed = resolve(seed, &cfg, "seed", 0)?;
    let dir = out_dir(common)?;
    match mode {
        ModeArg::Lattice => {
            let t = resolve(t, &cfg, "t", 4096.0)?;
            let paths = resolve(paths, &cfg, "paths", 100)?;
            let sim = SimConfig {
                t_horizon: t,
                dt: 1.0,
                bin_width: 1.0,
                n_paths: 1,
                master_seed: seed,
                mode: SimMode::LatticeWalk,
            };
            let mut worst = 0.0f64;
            for k in 0..paths as u64 {
                let rep = ltlab_core::functionals::scaling_check(&sim, seed + k, 1.0)?;
                worst = worst.max(rep.relative_deviation);
            }
            println!(
                "lattice scaling identity over {paths} walks of {t} steps: worst relative deviation {worst:.3e}"
            );
            let digest = config_digest(&format!("scaling lattice {t} {paths} {seed}"));
            write_artifact(
                &dir,
                &format!("scaling_check_{digest}.json"),
                &json(&serde_json::json!({
                    "mode": "lattice", "t": t, "paths": paths,
                    "worst_relative_deviation": worst,
                    "config_digest": digest,
                }))?,
            )?;
            if worst == 0.0 {
                Ok(())
            } else {
                Err(Failure::Rejection(format!(
                    "lattice scaling identity violated: deviation {worst:.3e}"
                )))
            }
        }
        ModeArg::Brownian => {
            let t = resolve(t, &cfg, "t", 1.0)?;
            let h = resolve(h, &cfg, "h", 0.25)?;
            let delta0 = resolve(bin_width, &cfg, "bin_width", h / 4.0)?;
            let mut devs = Vec::new();
            for level in 0..3 {
                let delta = delta0 / 2.0f64.powi(level);
                let sim = SimConfig {
                    t_horizon: t,
                    dt: delta * delta / 16.0,
                    bin_width: delta,
                    n_paths: 1,
                    master_seed: seed,
                    mode: SimMode::Brownian,
                };
                let rep = ltlab_core::functionals::scaling_check(&sim, seed, h)?;
                println!(
                    "delta = {delta:.5}: direct {:.6}, rescaled {:.6}, relative deviation {:.4}",
                    rep.modulus_direct, rep.modulus_rescaled, rep.relative_deviation
                );
                devs.push((delta, rep.relative_deviation));
            }
            let digest = config_digest(&format!("scaling brownian {t} {h} {delta0} {seed}"));
            write_artifact(
                &dir,
                &format!("scaling_check_{digest}.json"),
                &json(&serde_json::json!({
                    "mode": "brownian", "t": t, "h": h,
                    "ladder": devs.iter().map(|d| d.0).collect::<Vec<_>>(),
                    "relative_deviations": devs.iter().map(|d| d.1).collect::<Vec<_>>(),
                    "config_digest": digest,
                }))?,
            )?;
            let decreasing = devs.windows(2).all(|w| w[1].1 <= w[0].1);
            if decreasing {
                println!("deviation decreases along the refinement ladder: pass");
                Ok(())
            } else {
                Err(Failure::Rejection(
                    "scaling deviation did not decrease along the refinement ladder".into(),
                ))
            }
        }
    }
}

fn dispatch(cli: Cli) -> Result<(), Failure> {
    match cli.cmd {
        Cmd::Simulate { common, kind, t, h, dt, bin_width, paths, seed, mode, raw } => {
            run_simulate(&common, kind, t, h, dt, bin_width, paths, seed, mode, raw)
        }
        Cmd::VerifyClt { common, t, bin_width, paths, seed } => {
            run_verify(&common, LimitKind::Single, t, bin_width, paths, seed)
        }
        Cmd::VerifyCross { common, t, bin_width, paths, seed } => {
            run_verify(&common, LimitKind::Cross, t, bin_width, paths, seed)
        }
        Cmd::Kac { common, target, m, n, zeta, zeta2, t, h } => {
            run_kac(&common, target, m, n, zeta, zeta2, t, h)
        }
        Cmd::MeanCheck { common, t, bin_width, paths, seed } => {
            run_mean_check(&common, t, bin_width, paths, seed)
        }
        Cmd::ScalingCheck { common, mode, t, h, bin_width, paths, seed } => {
            run_scaling_check(&common, mode, t, h, bin_width, paths, seed)
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 2,
            };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match dispatch(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message());
            ExitCode::from(f.code())
        }
    }
}

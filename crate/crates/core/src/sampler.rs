//! Parallel Monte Carlo batch drivers.
//!
//! Every sample is a pure function of `(cfg, master_seed, path_index)`;
//! batches fan out over rayon and collect in path-index order, so the output
//! is bit-identical for any worker count.

use crate::functionals::{alpha, beta, cross_modulus, normalized_stat_cross,
                         normalized_stat_single, sq_modulus, sq_modulus_debiased, StatKind,
                         StatSample};
use crate::path_sim::{gen_bm_local_time_with, gen_walk_with, walk_local_time, LocalTimeField,
                      SimConfig, SimMode};
use crate::rng::stream_rng;
use crate::Result;
use rand::Rng;
use rand_pcg::Pcg64Mcg;
use rayon::prelude::*;

/// Builds the field for one path index of a batch.
fn field_for(cfg: &SimConfig, rng: &mut Pcg64Mcg) -> Result<LocalTimeField> {
    match cfg.mode {
        SimMode::Brownian => gen_bm_local_time_with(cfg, rng),
        SimMode::LatticeWalk => {
            Ok(walk_local_time(&gen_walk_with(cfg.t_horizon.round() as usize, rng)?))
        }
    }
}

/// Maps `f` over the fields of a batch, one stream per path index.
pub fn map_fields<T, F>(cfg: &SimConfig, f: F) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(&LocalTimeField, u64) -> Result<T> + Sync,
{
    cfg.validate()?;
    (0..cfg.n_paths as u64)
        .into_par_iter()
        .map(|idx| {
            let mut rng = stream_rng(cfg.master_seed, idx);
            let field = field_for(cfg, &mut rng)?;
            f(&field, idx)
        })
        .collect()
}

/// Maps `f` over independent field pairs (streams 2i and 2i+1).
pub fn map_field_pairs<T, F>(cfg: &SimConfig, f: F) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(&LocalTimeField, &LocalTimeField, u64) -> Result<T> + Sync,
{
    cfg.validate()?;
    (0..cfg.n_paths as u64)
        .into_par_iter()
        .map(|idx| {
            let mut r1 = stream_rng(cfg.master_seed, 2 * idx);
            let mut r2 = stream_rng(cfg.master_seed, 2 * idx + 1);
            let f1 = field_for(cfg, &mut r1)?;
            let f2 = field_for(cfg, &mut r2)?;
            f(&f1, &f2, idx)
        })
        .collect()
}

/// Simulates one batch of the normalized statistic `kind` at fixed time.
///
/// With `debias` set, the single-kind modulus uses the bin-averaging
/// correction of [`sq_modulus_debiased`]; the cross modulus needs none.
pub fn sample_statistic(
    cfg: &SimConfig,
    kind: StatKind,
    h: f64,
    debias: bool,
) -> Result<Vec<StatSample>> {
    let t = cfg.t_horizon;
    match kind {
        StatKind::SingleT | StatKind::SingleH => map_fields(cfg, |field, idx| {
            if debias {
                let probe = if kind == StatKind::SingleT { 1.0 } else { h };
                let m = sq_modulus_debiased(field, probe)?;
                let value = match kind {
                    StatKind::SingleT => (m - 4.0 * t) / t.powf(0.75),
                    _ => (m - 4.0 * probe * t) / probe.powf(1.5),
                };
                Ok(StatSample { value, statistic_kind: kind, h: probe, t, seed: idx })
            } else {
                normalized_stat_single(field, kind, h, idx)
            }
        }),
        StatKind::CrossT | StatKind::CrossH => {
            map_field_pairs(cfg, |f1, f2, idx| normalized_stat_cross(f1, f2, kind, h, idx))
        }
    }
}

/// Self-intersection local time α per path, optionally with the lag-0
/// bin-averaging correction (2/3)·δ·t.
pub fn sample_alpha(cfg: &SimConfig, debias: bool) -> Result<Vec<f64>> {
    let corr = if debias { 2.0 / 3.0 * cfg.bin_width * cfg.t_horizon } else { 0.0 };
    map_fields(cfg, |field, _| Ok(alpha(field) + corr))
}

/// Intersection local time β per independent pair.
pub fn sample_beta(cfg: &SimConfig) -> Result<Vec<f64>> {
    map_field_pairs(cfg, |f1, f2, _| beta(f1, f2))
}

/// Raw (or debiased) L² modulus per path at probe `h`.
pub fn sample_modulus(cfg: &SimConfig, h: f64, debias: bool) -> Result<Vec<f64>> {
    map_fields(cfg, |field, _| {
        if debias {
            sq_modulus_debiased(field, h)
        } else {
            sq_modulus(field, h)
        }
    })
}

/// Exponential-time batch: per-path horizon drawn from Exp(ζ), capped at the
/// configured quantile. The fraction of capped draws is reported, not hidden.
#[derive(Debug, Clone)]
pub struct ExpBatch {
    pub samples: Vec<StatSample>,
    pub n_capped: usize,
    pub cap_quantile: f64,
}

fn draw_exponential<R: Rng>(rng: &mut R, zeta: f64, cap: f64) -> (f64, bool) {
    let u: f64 = rng.gen::<f64>();
    let lam = -(1.0 - u).ln() / zeta;
    if lam > cap {
        (cap, true)
    } else {
        (lam.max(f64::MIN_POSITIVE), false)
    }
}

/// Single-process statistic (∫(Δ^h L_λ)² dx − 4hλ)/h^{3/2} at independent
/// exponential times λ ~ Exp(ζ).
pub fn sample_single_exponential(
    cfg: &SimConfig,
    zeta: f64,
    h: f64,
    cap_quantile: f64,
    debias: bool,
) -> Result<ExpBatch> {
    cfg.validate()?;
    let cap = -(1.0 - cap_quantile).ln() / zeta;
    let per_path: Vec<(StatSample, bool)> = (0..cfg.n_paths as u64)
        .into_par_iter()
        .map(|idx| {
            let mut rng = stream_rng(cfg.master_seed, idx);
            let (lam, capped) = draw_exponential(&mut rng, zeta, cap);
            let mut path_cfg = cfg.clone();
            path_cfg.t_horizon = lam.max(cfg.dt);
            let field = gen_bm_local_time_with(&path_cfg, &mut rng)?;
            let m = if debias { sq_modulus_debiased(&field, h)? } else { sq_modulus(&field, h)? };
            let value = (m - 4.0 * h * lam) / h.powf(1.5);
            Ok((
                StatSample { value, statistic_kind: StatKind::SingleH, h, t: lam, seed: idx },
                capped,
            ))
        })
        .collect::<Result<_>>()?;
    let n_capped = per_path.iter().filter(|(_, c)| *c).count();
    Ok(ExpBatch {
        samples: per_path.into_iter().map(|(s, _)| s).collect(),
        n_capped,
        cap_quantile,
    })
}

/// Cross statistic ∫(Δ^h L_λ)(Δ^h L̃_λ') dx / h^{3/2} at independent
/// exponential times λ ~ Exp(ζ), λ' ~ Exp(ζ').
pub fn sample_cross_exponential(
    cfg: &SimConfig,
    zeta: f64,
    zeta2: f64,
    h: f64,
    cap_quantile: f64,
) -> Result<ExpBatch> {
    cfg.validate()?;
    let cap1 = -(1.0 - cap_quantile).ln() / zeta;
    let cap2 = -(1.0 - cap_quantile).ln() / zeta2;
    let per_path: Vec<(StatSample, bool)> = (0..cfg.n_paths as u64)
        .into_par_iter()
        .map(|idx| {
            let mut r1 = stream_rng(cfg.master_seed, 2 * idx);
            let mut r2 = stream_rng(cfg.master_seed, 2 * idx + 1);
            let (l1, c1) = draw_exponential(&mut r1, zeta, cap1);
            let (l2, c2) = draw_exponential(&mut r2, zeta2, cap2);
            let mut cfg1 = cfg.clone();
            cfg1.t_horizon = l1.max(cfg.dt);
            let mut cfg2 = cfg.clone();
            cfg2.t_horizon = l2.max(cfg.dt);
            let f1 = gen_bm_local_time_with(&cfg1, &mut r1)?;
            let f2 = gen_bm_local_time_with(&cfg2, &mut r2)?;
            let value = cross_modulus(&f1, &f2, h)? / h.powf(1.5);
            Ok((
                StatSample { value, statistic_kind: StatKind::CrossH, h, t: l1, seed: idx },
                c1 || c2,
            ))
        })
        .collect::<Result<_>>()?;
    let n_capped = per_path.iter().filter(|(_, c)| *c).count();
    Ok(ExpBatch {
        samples: per_path.into_iter().map(|(s, _)| s).collect(),
        n_capped,
        cap_quantile,
    })
}

/// α_λ (or β_{λ,λ'}) draws at exponential times; Monte Carlo oracles for the
/// Kac quadrature values.
pub fn sample_alpha_exponential(
    cfg: &SimConfig,
    zeta: f64,
    cap_quantile: f64,
    debias: bool,
) -> Result<Vec<f64>> {
    cfg.validate()?;
    let cap = -(1.0 - cap_quantile).ln() / zeta;
    (0..cfg.n_paths as u64)
        .into_par_iter()
        .map(|idx| {
            let mut rng = stream_rng(cfg.master_seed, idx);
            let (lam, _) = draw_exponential(&mut rng, zeta, cap);
            let mut path_cfg = cfg.clone();
            path_cfg.t_horizon = lam.max(cfg.dt);
            let field = gen_bm_local_time_with(&path_cfg, &mut rng)?;
            let corr = if debias { 2.0 / 3.0 * cfg.bin_width * lam } else { 0.0 };
            Ok(alpha(&field) + corr)
        })
        .collect()
}

pub fn sample_beta_exponential(
    cfg: &SimConfig,
    zeta: f64,
    zeta2: f64,
    cap_quantile: f64,
) -> Result<Vec<f64>> {
    cfg.validate()?;
    let cap1 = -(1.0 - cap_quantile).ln() / zeta;
    let cap2 = -(1.0 - cap_quantile).ln() / zeta2;
    (0..cfg.n_paths as u64)
        .into_par_iter()
        .map(|idx| {
            let mut r1 = stream_rng(cfg.master_seed, 2 * idx);
            let mut r2 = stream_rng(cfg.master_seed, 2 * idx + 1);
            let (l1, _) = draw_exponential(&mut r1, zeta, cap1);
            let (l2, _) = draw_exponential(&mut r2, zeta2, cap2);
            let mut cfg1 = cfg.clone();
            cfg1.t_horizon = l1.max(cfg.dt);
            let mut cfg2 = cfg.clone();
            cfg2.t_horizon = l2.max(cfg.dt);
            let f1 = gen_bm_local_time_with(&cfg1, &mut r1)?;
            let f2 = gen_bm_local_time_with(&cfg2, &mut r2)?;
            beta(&f1, &f2)
        })
        .collect()
}

/// Runs `f` on a private rayon pool of `threads` workers. Used to show that
/// batch output is independent of worker count.
pub fn with_thread_count<T: Send>(threads: usize, f: impl FnOnce() -> T + Send) -> T {
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .expect("rayon pool")
        .install(f)
}

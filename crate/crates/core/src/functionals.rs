//! Path functionals of local-time fields: self-intersection local time,
//! intersection local time, the L² modulus of continuity, the polymer
//! Hamiltonian, and the normalized CLT statistics.

use crate::path_sim::{gen_bm_scaled_pair, rescale_path_field, walk_local_time, LatticePath,
                      LocalTimeField, SimConfig, SimMode};
use crate::rng::stream_rng;
use crate::{Error, Result};
use serde::{Deserialize, Serialize};
use std::io::Write;

/// Which normalized statistic a sample realizes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StatKind {
    /// (∫(L^{x+h}_t − L^x_t)² dx − 4ht) / h^{3/2}, h → 0 at fixed t.
    SingleH,
    /// (∫(L^{x+1}_t − L^x_t)² dx − 4t) / t^{3/4}, t → ∞.
    SingleT,
    /// ∫(Δ^h L)(Δ^h L̃) dx / h^{3/2} for two independent motions.
    CrossH,
    /// ∫(Δ¹L)(Δ¹L̃) dx / t^{3/4} for two independent motions.
    CrossT,
}

impl StatKind {
    pub fn as_str(self) -> &'static str {
        match self {
            StatKind::SingleH => "single_h",
            StatKind::SingleT => "single_t",
            StatKind::CrossH => "cross_h",
            StatKind::CrossT => "cross_t",
        }
    }
}

/// One realization of a normalized modulus statistic.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct StatSample {
    pub value: f64,
    pub statistic_kind: StatKind,
    pub h: f64,
    pub t: f64,
    pub seed: u64,
}

/// Writes samples as `kind,h,t,seed,value` CSV.
pub fn write_stat_csv<W: Write>(mut w: W, samples: &[StatSample]) -> Result<()> {
    writeln!(w, "kind,h,t,seed,value")?;
    for s in samples {
        writeln!(w, "{},{},{},{},{:.17e}", s.statistic_kind.as_str(), s.h, s.t, s.seed, s.value)?;
    }
    Ok(())
}

/// Self-intersection local time α = δ·Σ values².
pub fn alpha(field: &LocalTimeField) -> f64 {
    field.bin_width * field.values.iter().map(|v| v * v).sum::<f64>()
}

fn check_grids(f1: &LocalTimeField, f2: &LocalTimeField) -> Result<()> {
    if (f1.bin_width - f2.bin_width).abs() > 1e-12 * f1.bin_width {
        return Err(Error::GridMismatch(format!(
            "bin widths differ: {} vs {}",
            f1.bin_width, f2.bin_width
        )));
    }
    // Both grids must sit on the same integer lattice of bin centers.
    for f in [f1, f2] {
        let idx = f.origin / f.bin_width;
        if (idx - idx.round()).abs() > 1e-6 {
            return Err(Error::GridMismatch(format!(
                "origin {} is not anchored to the δ = {} grid",
                f.origin, f.bin_width
            )));
        }
    }
    Ok(())
}

/// Intersection local time β = δ·Σ over overlapping bins of the products.
pub fn beta(f1: &LocalTimeField, f2: &LocalTimeField) -> Result<f64> {
    check_grids(f1, f2)?;
    let a0 = f1.first_bin_index();
    let b0 = f2.first_bin_index();
    let lo = a0.max(b0);
    let hi = (a0 + f1.values.len() as i64).min(b0 + f2.values.len() as i64);
    let mut sum = 0.0;
    for idx in lo..hi {
        sum += f1.values[(idx - a0) as usize] * f2.values[(idx - b0) as usize];
    }
    Ok(f1.bin_width * sum)
}

fn probe_bins(field: &LocalTimeField, h: f64) -> Result<usize> {
    let ratio = h / field.bin_width;
    let k = ratio.round();
    if !(h > 0.0) || (ratio - k).abs() > 1e-9 || k < 1.0 {
        return Err(Error::ProbeAlignment { h, bin_width: field.bin_width });
    }
    Ok(k as usize)
}

/// L² modulus δ·Σ_x (values[x+k] − values[x])² with h = k·δ, summed over the
/// support padded by k bins so the boundary terms against zero are included.
pub fn sq_modulus(field: &LocalTimeField, h: f64) -> Result<f64> {
    let k = probe_bins(field, h)?;
    let v = &field.values;
    let n = v.len();
    let mut sum = 0.0;
    // x runs from k bins left of the support to its right edge.
    for i in 0..n + k {
        let a = if i >= k { v.get(i - k).copied().unwrap_or(0.0) } else { 0.0 };
        let b = v.get(i).copied().unwrap_or(0.0);
        let d = b - a;
        sum += d * d;
    }
    Ok(field.bin_width * sum)
}

/// [`sq_modulus`] with the leading bin-averaging attenuation removed.
///
/// Replacing L by its bin average shrinks the lag-0 term of the modulus by
/// (2/3)·δ·(4t) + O(δ²) because ∫(L^{x+u} − L^x)² dx ≈ 4ut for small u,
/// while the lag-h term only moves by O(δ²). Adding (4/3)·δ·t back gives an
/// estimator whose grid bias is quadratic in δ instead of linear. Only
/// meaningful for δ-binned Brownian fields; exact lattice fields need no
/// correction.
pub fn sq_modulus_debiased(field: &LocalTimeField, h: f64) -> Result<f64> {
    Ok(sq_modulus(field, h)? + 4.0 / 3.0 * field.bin_width * field.t_horizon)
}

/// Cross modulus δ·Σ (Δ^h f1)(Δ^h f2). May be negative.
pub fn cross_modulus(f1: &LocalTimeField, f2: &LocalTimeField, h: f64) -> Result<f64> {
    check_grids(f1, f2)?;
    let k = probe_bins(f1, h)? as i64;
    let a0 = f1.first_bin_index();
    let b0 = f2.first_bin_index();
    let lo = a0.min(b0) - k;
    let hi = (a0 + f1.values.len() as i64).max(b0 + f2.values.len() as i64);
    let mut sum = 0.0;
    for idx in lo..hi {
        let d1 = f1.value_at(idx + k) - f1.value_at(idx);
        let d2 = f2.value_at(idx + k) - f2.value_at(idx);
        sum += d1 * d2;
    }
    Ok(f1.bin_width * sum)
}

/// Polymer Hamiltonian of a walk:
/// Σ_{i≠j} 1{S_i=S_j} − ½ Σ_{i≠j} 1{|S_i−S_j|=1},
/// computed from local-time counts as (Σ_x l_x² − n) − Σ_x l_x l_{x+1}.
pub fn hamiltonian(path: &LatticePath) -> i64 {
    let f = walk_local_time(path);
    let l: Vec<i64> = f.values.iter().map(|&v| v as i64).collect();
    let n = path.n_steps() as i64;
    let self_term: i64 = l.iter().map(|x| x * x).sum::<i64>() - n;
    let neighbor_term: i64 = l.windows(2).map(|w| w[0] * w[1]).sum();
    self_term - neighbor_term
}

/// Normalized single-process statistic for a field.
///
/// `SingleT` probes at h = 1 and normalizes by t^{3/4}; `SingleH` probes at
/// `h` and normalizes by h^{3/2} after centering at 4ht.
pub fn normalized_stat_single(
    field: &LocalTimeField,
    kind: StatKind,
    h: f64,
    seed: u64,
) -> Result<StatSample> {
    let t = field.t_horizon;
    let (value, h_used) = match kind {
        StatKind::SingleT => ((sq_modulus(field, 1.0)? - 4.0 * t) / t.powf(0.75), 1.0),
        StatKind::SingleH => ((sq_modulus(field, h)? - 4.0 * h * t) / h.powf(1.5), h),
        _ => return Err(Error::Config("cross kinds need two fields".into())),
    };
    Ok(StatSample { value, statistic_kind: kind, h: h_used, t, seed })
}

/// Normalized cross statistic for two independent fields. Cross statistics
/// carry no centering term.
pub fn normalized_stat_cross(
    f1: &LocalTimeField,
    f2: &LocalTimeField,
    kind: StatKind,
    h: f64,
    seed: u64,
) -> Result<StatSample> {
    let t = f1.t_horizon;
    let (value, h_used) = match kind {
        StatKind::CrossT => (cross_modulus(f1, f2, 1.0)? / t.powf(0.75), 1.0),
        StatKind::CrossH => (cross_modulus(f1, f2, h)? / h.powf(1.5), h),
        _ => return Err(Error::Config("single kinds take one field".into())),
    };
    Ok(StatSample { value, statistic_kind: kind, h: h_used, t, seed })
}

/// Outcome of a pathwise scaling-identity check.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ScalingReport {
    pub h: f64,
    pub modulus_direct: f64,
    pub modulus_rescaled: f64,
    pub relative_deviation: f64,
}

/// Verifies ∫(Δ^h L_t)² dx = h³ ∫(Δ¹ L_{t/h²})² dx realization by
/// realization on shared driving noise.
///
/// In lattice mode (h = 1) the identity is exact. In brownian mode the two
/// sides are binned independently, so the deviation is the discretization
/// error and shrinks with the bin width.
pub fn scaling_check(cfg: &SimConfig, seed: u64, h: f64) -> Result<ScalingReport> {
    cfg.validate()?;
    match cfg.mode {
        SimMode::LatticeWalk => {
            if (h - 1.0).abs() > 1e-12 {
                return Err(Error::Config("lattice scaling check requires h = 1".into()));
            }
            let field = walk_local_time(&crate::path_sim::gen_walk(
                cfg.t_horizon.round() as usize,
                seed,
            )?);
            let rescaled = rescale_path_field(&field, 1.0)?;
            let direct = sq_modulus(&field, 1.0)?;
            let other = sq_modulus(&rescaled, rescaled.bin_width)?;
            Ok(ScalingReport {
                h,
                modulus_direct: direct,
                modulus_rescaled: other,
                relative_deviation: (direct - other).abs() / direct.abs().max(f64::MIN_POSITIVE),
            })
        }
        SimMode::Brownian => {
            // Both probes must land on the grid: h = k·δ and 1 = k'·δ.
            let _ = h / cfg.bin_width;
            let mut rng = stream_rng(seed, 0);
            let (a, b) = gen_bm_scaled_pair(cfg, &mut rng, h)?;
            let direct = sq_modulus(&a, h)?;
            let rescaled = h * h * h * sq_modulus(&b, 1.0)?;
            Ok(ScalingReport {
                h,
                modulus_direct: direct,
                modulus_rescaled: rescaled,
                relative_deviation: (direct - rescaled).abs()
                    / direct.abs().max(f64::MIN_POSITIVE),
            })
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::path_sim::{gen_bm_local_time, gen_walk};
    use approx::assert_abs_diff_eq;

    fn hand_field() -> LocalTimeField {
        // l^0=1, l^1=2, l^2=1 on the unit grid.
        LocalTimeField { origin: 0.0, bin_width: 1.0, values: vec![1.0, 2.0, 1.0], t_horizon: 4.0 }
    }

    fn zero_field() -> LocalTimeField {
        LocalTimeField { origin: 0.0, bin_width: 1.0, values: vec![], t_horizon: 1.0 }
    }

    #[test]
    fn alpha_zero_field() {
        assert_eq!(alpha(&zero_field()), 0.0);
    }

    #[test]
    fn alpha_hand_example() {
        assert_eq!(alpha(&hand_field()), 6.0);
    }

    #[test]
    fn beta_disjoint_supports_is_zero() {
        let f = hand_field();
        let g = LocalTimeField {
            origin: 10.0,
            bin_width: 1.0,
            values: vec![3.0, 1.0],
            t_horizon: 4.0,
        };
        assert_eq!(beta(&f, &g).unwrap(), 0.0);
    }

    #[test]
    fn beta_of_field_with_itself_is_alpha() {
        let f = hand_field();
        assert_eq!(beta(&f, &f).unwrap(), alpha(&f));
        let bm = gen_bm_local_time(
            &SimConfig {
                t_horizon: 1.0,
                dt: 1.0 / 256.0,
                bin_width: 0.125,
                n_paths: 1,
                master_seed: 0,
                mode: SimMode::Brownian,
            },
            7,
        )
        .unwrap();
        assert_abs_diff_eq!(beta(&bm, &bm).unwrap(), alpha(&bm), epsilon = 1e-12);
    }

    #[test]
    fn beta_symmetric() {
        let f = hand_field();
        let g = LocalTimeField {
            origin: 1.0,
            bin_width: 1.0,
            values: vec![2.0, 5.0],
            t_horizon: 7.0,
        };
        assert_eq!(beta(&f, &g).unwrap(), beta(&g, &f).unwrap());
    }

    #[test]
    fn beta_rejects_grid_mismatch() {
        let f = hand_field();
        let g = LocalTimeField {
            origin: 0.0,
            bin_width: 0.5,
            values: vec![1.0],
            t_horizon: 1.0,
        };
        assert!(beta(&f, &g).is_err());
    }

    #[test]
    fn sq_modulus_zero_field() {
        assert_eq!(sq_modulus(&zero_field(), 1.0).unwrap(), 0.0);
    }

    #[test]
    fn sq_modulus_hand_example() {
        // (0-1)² + (1-2)² + (2-1)² + (1-0)² = 4 over x = -1..2.
        assert_eq!(sq_modulus(&hand_field(), 1.0).unwrap(), 4.0);
    }

    #[test]
    fn sq_modulus_rejects_unaligned_probe() {
        assert!(matches!(
            sq_modulus(&hand_field(), 0.5),
            Err(Error::ProbeAlignment { .. })
        ));
    }

    #[test]
    fn cross_modulus_zero_partner() {
        let f = hand_field();
        let z = zero_field();
        assert_eq!(cross_modulus(&f, &z, 1.0).unwrap(), 0.0);
    }

    #[test]
    fn cross_modulus_self_equals_sq_modulus() {
        let f = hand_field();
        assert_eq!(cross_modulus(&f, &f, 1.0).unwrap(), sq_modulus(&f, 1.0).unwrap());
    }

    #[test]
    fn cross_modulus_symmetric() {
        let f = hand_field();
        let g = LocalTimeField {
            origin: -1.0,
            bin_width: 1.0,
            values: vec![1.0, 3.0, 2.0],
            t_horizon: 6.0,
        };
        assert_eq!(
            cross_modulus(&f, &g, 1.0).unwrap(),
            cross_modulus(&g, &f, 1.0).unwrap()
        );
    }

    #[test]
    fn translation_invariance() {
        let f = hand_field();
        let shifted = LocalTimeField { origin: f.origin + 5.0, ..f.clone() };
        assert_eq!(alpha(&f), alpha(&shifted));
        assert_eq!(sq_modulus(&f, 1.0).unwrap(), sq_modulus(&shifted, 1.0).unwrap());
        assert_eq!(beta(&f, &f).unwrap(), beta(&shifted, &shifted).unwrap());
        assert_eq!(
            cross_modulus(&f, &f, 1.0).unwrap(),
            cross_modulus(&shifted, &shifted, 1.0).unwrap()
        );
    }

    #[test]
    fn hamiltonian_hand_example() {
        let p = LatticePath::from_steps(vec![1, -1, 1, 1]).unwrap();
        // (6 - 4) - 4 = -2.
        assert_eq!(hamiltonian(&p), -2);
    }

    #[test]
    fn hamiltonian_single_step() {
        let p = LatticePath::from_steps(vec![-1]).unwrap();
        assert_eq!(hamiltonian(&p), 0);
    }

    #[test]
    fn hamiltonian_modulus_identity() {
        // H_n + n = ½ Σ_x (l^x − l^{x+1})² for every path.
        for seed in 0..200 {
            let p = gen_walk(501, seed).unwrap();
            let f = walk_local_time(&p);
            let m = sq_modulus(&f, 1.0).unwrap();
            assert_eq!(
                (hamiltonian(&p) + p.n_steps() as i64) as f64,
                0.5 * m,
                "seed {seed}"
            );
        }
    }

    #[test]
    fn normalized_stat_zero_field_single_h() {
        let z = LocalTimeField {
            origin: 0.0,
            bin_width: 0.25,
            values: vec![],
            t_horizon: 2.0,
        };
        let s = normalized_stat_single(&z, StatKind::SingleH, 0.5, 0).unwrap();
        // -4ht / h^{3/2} = -4t/√h.
        assert_abs_diff_eq!(s.value, -4.0 * 2.0 / 0.5f64.sqrt(), epsilon = 1e-12);
    }

    #[test]
    fn normalized_stat_hand_example_single_t() {
        let f = hand_field();
        let s = normalized_stat_single(&f, StatKind::SingleT, 1.0, 0).unwrap();
        // (4 - 16)/4^{3/4} ≈ -4.2426.
        assert_abs_diff_eq!(s.value, -12.0 / 4.0f64.powf(0.75), epsilon = 1e-12);
        assert_abs_diff_eq!(s.value, -4.242640687, epsilon = 1e-6);
    }

    #[test]
    fn scaling_check_identity_at_h1() {
        let cfg = SimConfig {
            t_horizon: 1.0,
            dt: 1.0 / 1024.0,
            bin_width: 0.0625,
            n_paths: 1,
            master_seed: 0,
            mode: SimMode::Brownian,
        };
        let r = scaling_check(&cfg, 5, 1.0).unwrap();
        assert!(r.relative_deviation < 1e-12, "{:?}", r);
    }

    #[test]
    fn scaling_check_lattice_exact() {
        let cfg = SimConfig {
            t_horizon: 256.0,
            dt: 1.0,
            bin_width: 1.0,
            n_paths: 1,
            master_seed: 0,
            mode: SimMode::LatticeWalk,
        };
        let r = scaling_check(&cfg, 3, 1.0).unwrap();
        assert_eq!(r.relative_deviation, 0.0);
    }

    #[test]
    fn stat_csv_shape() {
        let s = StatSample {
            value: 1.5,
            statistic_kind: StatKind::CrossH,
            h: 0.25,
            t: 1.0,
            seed: 9,
        };
        let mut buf = Vec::new();
        write_stat_csv(&mut buf, &[s]).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("kind,h,t,seed,value\n"));
        assert!(text.contains("cross_h,0.25,1,9,"));
    }
}

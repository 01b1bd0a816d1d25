//! Exact and quadrature-based moment predictions.
//!
//! Everything here is built from the α-potential density of Brownian motion,
//! u^α(x) = e^{−√(2α)|x|} / √(2α): the second-difference integrals behind the
//! limit constants, Kac moments of the intersection and self-intersection
//! local times at independent exponential times, the predicted limit-law
//! moments, and the exact mean of the L² modulus at fixed time.

use crate::quad::{integrate, integrate_with_budget, QuadResult};
use crate::{Error, Result};
use serde::{Deserialize, Serialize};

/// Exponential killing rate α > 0.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Kernel {
    pub rate: f64,
}

impl Kernel {
    pub fn new(rate: f64) -> Result<Self> {
        if !(rate > 0.0) {
            return Err(Error::Config(format!("killing rate must be > 0, got {rate}")));
        }
        Ok(Kernel { rate })
    }

    /// √(2α), the decay rate of the potential density.
    #[inline]
    pub fn gamma(&self) -> f64 {
        (2.0 * self.rate).sqrt()
    }
}

/// Which law the times of a moment request follow.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MomentLaw {
    Exponential { zeta: f64 },
    ExponentialPair { zeta: f64, zeta2: f64 },
    FixedTime { t: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MomentTarget {
    AlphaMoment,
    BetaMoment,
    ModulusMean,
    LimitPredictionSingle,
    LimitPredictionCross,
}

/// An order-m moment request.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct MomentSpec {
    pub order: u32,
    pub law: MomentLaw,
    pub target: MomentTarget,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MomentMethod {
    ClosedForm,
    Quadrature,
    PermutationSum,
}

/// A computed moment with its error estimate.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct MomentValue {
    pub value: f64,
    pub abs_error_estimate: f64,
    pub method: MomentMethod,
}

impl MomentValue {
    fn closed(value: f64) -> Self {
        MomentValue { value, abs_error_estimate: 0.0, method: MomentMethod::ClosedForm }
    }

    fn from_quad(q: QuadResult, method: MomentMethod) -> Self {
        MomentValue { value: q.value, abs_error_estimate: q.abs_error, method }
    }
}

/// The α-potential density u^α(x) = e^{−√(2α)|x|} / √(2α).
#[inline]
pub fn u(kernel: Kernel, x: f64) -> f64 {
    let g = kernel.gamma();
    (-g * x.abs()).exp() / g
}

/// Δ^h Δ^h u^α at coincidence: 2(1 − e^{−√(2α)h}) / √(2α) = 2h + O(h²).
pub fn dd_zero(kernel: Kernel, h: f64) -> f64 {
    let g = kernel.gamma();
    -2.0 * (-g * h).exp_m1() / g
}

/// The second difference Δ^h Δ^{−h} u^α(x) = 2u(x) − u(x+h) − u(x−h),
/// evaluated from exponentials via `exp_m1` so that the three nearly equal
/// terms do not cancel catastrophically at small h.
pub fn ddu(kernel: Kernel, x: f64, h: f64) -> f64 {
    let g = kernel.gamma();
    let ax = x.abs();
    if ax >= h {
        // u(x)·(2 − e^{−γh} − e^{γh}) ≤ 0.
        -(-g * ax).exp() * ((g * h).exp_m1() + (-g * h).exp_m1()) / g
    } else {
        -(-g * ax).exp() * ((-g * h).exp_m1() + (-g * (h - 2.0 * ax)).exp_m1()) / g
    }
}

/// Closed form of ∫_{|x| ≥ h} (Δ^hΔ^{−h}u^α)(Δ^hΔ^{−h}u^β) dx. With α = β
/// this is the O(h⁴) tail of the cross integral.
pub fn vprop_tail_integral(k1: Kernel, k2: Kernel, h: f64) -> f64 {
    let g1 = k1.gamma();
    let g2 = k2.gamma();
    let c1 = ((g1 * h).exp_m1() + (-g1 * h).exp_m1()) / g1;
    let c2 = ((g2 * h).exp_m1() + (-g2 * h).exp_m1()) / g2;
    2.0 * c1 * c2 * (-(g1 + g2) * h).exp() / (g1 + g2)
}

/// ∫ (Δ^hΔ^{−h}u^α)(Δ^hΔ^{−h}u^β) dx = (8/3 + O(h)) h³.
///
/// The |x| ≤ h part is integrated adaptively from the stable piecewise
/// representation; the |x| > h part is a closed-form exponential tail.
pub fn vprop_cross_integral(k1: Kernel, k2: Kernel, h: f64) -> Result<MomentValue> {
    if !(h > 0.0 && h <= 1.0) {
        return Err(Error::Config(format!("h must lie in (0, 1], got {h}")));
    }
    let near = integrate(|x| ddu(k1, x, h) * ddu(k2, x, h), 0.0, h, 1e-16)?;
    let value = 2.0 * near.value + vprop_tail_integral(k1, k2, h);
    Ok(MomentValue {
        value,
        abs_error_estimate: 2.0 * near.abs_error,
        method: MomentMethod::Quadrature,
    })
}

/// ∫ |Δ^hΔ^{−h}u^α| dx = O(h²).
pub fn vprop_abs_integral(kernel: Kernel, h: f64) -> Result<MomentValue> {
    if h == 0.0 {
        return Ok(MomentValue::closed(0.0));
    }
    if !(h > 0.0 && h <= 1.0) {
        return Err(Error::Config(format!("h must lie in [0, 1], got {h}")));
    }
    // The sign changes once inside (0, h); adaptive bisection resolves the kink.
    let near = integrate(|x| ddu(kernel, x, h).abs(), 0.0, h, 1e-14)?;
    let g = kernel.gamma();
    let tail = ((g * h).exp_m1() + (-g * h).exp_m1()) / g * (-g * h).exp() / g;
    Ok(MomentValue {
        value: 2.0 * (near.value + tail),
        abs_error_estimate: 2.0 * near.abs_error,
        method: MomentMethod::Quadrature,
    })
}

fn factorial(n: u64) -> f64 {
    (1..=n).map(|k| k as f64).product()
}

/// (2n)! / (2ⁿ n!), the number of pairings of 2n items.
pub fn pairing_count(n: u32) -> f64 {
    factorial(2 * n as u64) / (2f64.powi(n as i32) * factorial(n as u64))
}

fn permutations(n: usize) -> Vec<Vec<usize>> {
    if n == 0 {
        return vec![vec![]];
    }
    let mut out = Vec::new();
    for p in permutations(n - 1) {
        for slot in 0..n {
            let mut q = p.clone();
            q.insert(slot, n - 1);
            out.push(q);
        }
    }
    out
}

/// Iterated adaptive quadrature of `f` over [-r, r]^dim with one tolerance
/// per nesting level (`tols[0]` outermost). Inner failures surface as NaN
/// and are converted back into an error at the top.
fn integrate_iterated<F>(f: &F, dim: usize, r: f64, tols: &[f64]) -> Result<QuadResult>
where
    F: Fn(&[f64]) -> f64,
{
    fn level<F: Fn(&[f64]) -> f64>(
        f: &F,
        dim: usize,
        r: f64,
        tols: &[f64],
        prefix: &mut Vec<f64>,
    ) -> f64 {
        let depth = prefix.len();
        let res = integrate_with_budget(
            |x| {
                let mut p = prefix.clone();
                p.push(x);
                if p.len() == dim {
                    f(&p)
                } else {
                    level(f, dim, r, tols, &mut p)
                }
            },
            -r,
            r,
            tols[depth],
            2000,
        );
        match res {
            Ok(q) => q.value,
            Err(_) => f64::NAN,
        }
    }

    let mut prefix = Vec::with_capacity(dim);
    let value = level(f, dim, r, tols, &mut prefix);
    if !value.is_finite() {
        return Err(Error::QuadratureNonConvergence { value, error: f64::NAN, tol: tols[0] });
    }
    // Error estimate: outer tolerance plus inner tolerances spread over the
    // integration volume.
    let mut err = tols[0];
    let mut vol = 1.0;
    for &t in &tols[1..] {
        vol *= 2.0 * r;
        err += t * vol;
    }
    Ok(QuadResult { value, abs_error: err, evaluations: 0 })
}

/// Kac permutation sum Σ_π ∏_j u^ζ(x_{π(j)} − x_{π(j−1)}) with π(0) = 0 and
/// x_0 = 0, evaluated at one spatial point. `coords[i]` is the location of
/// item i; items may share locations.
fn kac_permanent(kernel: Kernel, coords: &[f64], perms: &[Vec<usize>]) -> f64 {
    let n = coords.len();
    // Memoize the kernel at all needed differences.
    let mut from_zero = vec![0.0; n];
    let mut pair = vec![0.0; n * n];
    for i in 0..n {
        from_zero[i] = u(kernel, coords[i]);
        for j in 0..n {
            pair[i * n + j] = u(kernel, coords[i] - coords[j]);
        }
    }
    let mut sum = 0.0;
    for p in perms {
        let mut prod = from_zero[p[0]];
        for w in p.windows(2) {
            prod *= pair[w[1] * n + w[0]];
        }
        sum += prod;
    }
    sum
}

/// E[(∫ L^x_{λ_ζ} L̃^x_{λ_ζ'} dx)^n] by Kac's moment formula: the double
/// permutation sum factorizes into a product of two single-process sums,
/// integrated over n spatial variables.
pub fn kac_beta_moment(zeta: f64, zeta2: f64, n: u32) -> Result<MomentValue> {
    let k1 = Kernel::new(zeta)?;
    let k2 = Kernel::new(zeta2)?;
    match n {
        0 => Ok(MomentValue::closed(1.0)),
        1 => {
            // ∫ u^ζ(x) u^{ζ'}(x) dx = 2 / (γ γ' (γ + γ')).
            let (g1, g2) = (k1.gamma(), k2.gamma());
            Ok(MomentValue::closed(2.0 / (g1 * g2 * (g1 + g2))))
        }
        2 | 3 => {
            let dim = n as usize;
            let perms = permutations(dim);
            let r = 40.0 / k1.gamma().min(k2.gamma());
            let tols: Vec<f64> = match n {
                2 => vec![1e-7, 1e-9],
                _ => vec![1e-5, 1e-6, 1e-7],
            };
            let f = |x: &[f64]| kac_permanent(k1, x, &perms) * kac_permanent(k2, x, &perms);
            let q = integrate_iterated(&f, dim, r, &tols)?;
            Ok(MomentValue::from_quad(q, MomentMethod::PermutationSum))
        }
        _ => Err(Error::Config(format!("kac_beta_moment implements n <= 3, got {n}"))),
    }
}

/// E[(∫ (L^x_{λ_ζ})² dx)^n] by the 2n-point Kac sum with coincident pairs,
/// reduced to an n-dimensional integral.
pub fn kac_alpha_moment(zeta: f64, n: u32) -> Result<MomentValue> {
    let k = Kernel::new(zeta)?;
    match n {
        0 => Ok(MomentValue::closed(1.0)),
        1 => {
            // 2 u(0) ∫ u(x) dx = 4 / γ³.
            let g = k.gamma();
            Ok(MomentValue::closed(4.0 / (g * g * g)))
        }
        2 => {
            let perms = permutations(4);
            let r = 40.0 / k.gamma();
            let tols = [1e-6, 1e-8];
            let f = |x: &[f64]| {
                let coords = [x[0], x[0], x[1], x[1]];
                kac_permanent(k, &coords, &perms)
            };
            let q = integrate_iterated(&f, 2, r, &tols)?;
            Ok(MomentValue::from_quad(q, MomentMethod::PermutationSum))
        }
        _ => Err(Error::Config(format!("kac_alpha_moment implements n <= 2, got {n}"))),
    }
}

/// Predicted limit of the m-th moment of the normalized statistic:
/// odd m vanish; m = 2n gives (2n)!/(2ⁿn!) times (64/3)ⁿ E[α_{λ_ζ}ⁿ]
/// (single) or (32/3)ⁿ E[β_{λ_ζ,λ_ζ'}ⁿ] (cross).
pub fn limit_prediction(spec: &MomentSpec) -> Result<MomentValue> {
    if spec.order % 2 == 1 {
        return Ok(MomentValue::closed(0.0));
    }
    let n = spec.order / 2;
    if n == 0 {
        return Ok(MomentValue::closed(1.0));
    }
    match spec.target {
        MomentTarget::LimitPredictionSingle => {
            let zeta = match spec.law {
                MomentLaw::Exponential { zeta } => zeta,
                _ => {
                    return Err(Error::Config(
                        "single limit prediction needs an exponential law".into(),
                    ))
                }
            };
            let base = kac_alpha_moment(zeta, n)?;
            let scale = pairing_count(n) * (64.0 / 3.0f64).powi(n as i32);
            Ok(MomentValue {
                value: scale * base.value,
                abs_error_estimate: scale * base.abs_error_estimate,
                method: base.method,
            })
        }
        MomentTarget::LimitPredictionCross => {
            let (zeta, zeta2) = match spec.law {
                MomentLaw::ExponentialPair { zeta, zeta2 } => (zeta, zeta2),
                MomentLaw::Exponential { zeta } => (zeta, zeta),
                _ => {
                    return Err(Error::Config(
                        "cross limit prediction needs exponential laws".into(),
                    ))
                }
            };
            let base = kac_beta_moment(zeta, zeta2, n)?;
            let scale = pairing_count(n) * (32.0 / 3.0f64).powi(n as i32);
            Ok(MomentValue {
                value: scale * base.value,
                abs_error_estimate: scale * base.abs_error_estimate,
                method: base.method,
            })
        }
        other => Err(Error::Config(format!("limit_prediction does not handle {other:?}"))),
    }
}

/// Exact E[∫ (L^{x+h}_t − L^x_t)² dx] = 4 ∫₀^t (t−r)(p_r(0) − p_r(h)) dr,
/// computed by adaptive quadrature after the substitution r = s² that
/// removes the endpoint singularity of the heat kernel.
pub fn modulus_mean(t: f64, h: f64) -> Result<MomentValue> {
    if !(t > 0.0) {
        return Err(Error::Config(format!("t must be > 0, got {t}")));
    }
    if h == 0.0 {
        return Ok(MomentValue::closed(0.0));
    }
    if !(h > 0.0) {
        return Err(Error::Config(format!("h must be >= 0, got {h}")));
    }
    let pref = 8.0 / (2.0 * std::f64::consts::PI).sqrt();
    let tol = (4.0 * t * 1e-10).max(1e-12);
    let q = integrate(
        |s| {
            let decay = -(-h * h / (2.0 * s * s)).exp_m1();
            pref * (t - s * s) * decay
        },
        0.0,
        t.sqrt(),
        tol,
    )?;
    Ok(MomentValue::from_quad(q, MomentMethod::Quadrature))
}

/// Closed-form E[α_t] = E[∫ (L^x_t)² dx] = (8/3) t^{3/2} / √(2π) at fixed t.
pub fn alpha_fixed_time_mean(t: f64) -> f64 {
    8.0 / 3.0 * t.powf(1.5) / (2.0 * std::f64::consts::PI).sqrt()
}

/// Least-squares slope of ln|y| against ln x; used for O(h^p) exponent fits.
pub fn fit_log_exponent(xs: &[f64], ys: &[f64]) -> f64 {
    assert_eq!(xs.len(), ys.len());
    let n = xs.len() as f64;
    let lx: Vec<f64> = xs.iter().map(|x| x.ln()).collect();
    let ly: Vec<f64> = ys.iter().map(|y| y.abs().max(f64::MIN_POSITIVE).ln()).collect();
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let cov: f64 = lx.iter().zip(&ly).map(|(a, b)| (a - mx) * (b - my)).sum();
    let var: f64 = lx.iter().map(|a| (a - mx) * (a - mx)).sum();
    cov / var
}

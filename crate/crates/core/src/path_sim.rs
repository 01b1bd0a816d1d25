//! Path generation and local-time field extraction.
//!
//! Two backends produce [`LocalTimeField`]s:
//!
//! * `LatticeWalk` — a simple random walk on the integers; site-visit counts
//!   are exact integer local times on the unit grid.
//! * `Brownian` — exact Gaussian increments of variance `dt`; occupation
//!   time is accumulated into bins of width `bin_width` centered at integer
//!   multiples of `bin_width` (0 is a bin center, so probe shifts that are
//!   integer multiples of the bin width align exactly).

use crate::rng::stream_rng;
use crate::{Error, Result};
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};
use std::io::{Read, Write};

/// Simulation backend.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SimMode {
    Brownian,
    LatticeWalk,
}

/// Configuration for a batch of simulated paths.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SimConfig {
    /// Time horizon (dimensionless Brownian time; step count in lattice mode).
    pub t_horizon: f64,
    /// Time step between Gaussian increments (brownian mode only).
    pub dt: f64,
    /// Spatial bin width δ.
    pub bin_width: f64,
    /// Number of independent paths.
    pub n_paths: usize,
    /// Master seed; per-path streams are derived from it.
    pub master_seed: u64,
    pub mode: SimMode,
}

impl SimConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.t_horizon > 0.0) {
            return Err(Error::Config(format!("t_horizon must be > 0, got {}", self.t_horizon)));
        }
        if !(self.bin_width > 0.0) {
            return Err(Error::Config(format!("bin_width must be > 0, got {}", self.bin_width)));
        }
        if self.n_paths == 0 {
            return Err(Error::Config("n_paths must be >= 1".into()));
        }
        match self.mode {
            SimMode::Brownian => {
                if !(self.dt > 0.0) {
                    return Err(Error::Config(format!("dt must be > 0, got {}", self.dt)));
                }
                // The sampled walk must resolve the bin scale: dt <= δ²/4.
                let cap = self.bin_width * self.bin_width / 4.0;
                if self.dt > cap * (1.0 + 1e-12) {
                    return Err(Error::Config(format!(
                        "dt = {} exceeds bin_width²/4 = {}",
                        self.dt, cap
                    )));
                }
            }
            SimMode::LatticeWalk => {
                if (self.bin_width - 1.0).abs() > 1e-12 {
                    return Err(Error::Config("lattice mode requires bin_width = 1".into()));
                }
                if self.t_horizon < 1.0 {
                    return Err(Error::Config("lattice mode requires t_horizon >= 1".into()));
                }
            }
        }
        Ok(())
    }
}

/// A simple-random-walk trajectory. Positions are the partial sums of the
/// steps, starting at S_0 = 0.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LatticePath {
    steps: Vec<i8>,
}

impl LatticePath {
    /// Builds a path from explicit ±1 steps.
    pub fn from_steps(steps: Vec<i8>) -> Result<Self> {
        if steps.is_empty() {
            return Err(Error::Config("a lattice path needs at least one step".into()));
        }
        if steps.iter().any(|&s| s != 1 && s != -1) {
            return Err(Error::Config("lattice steps must be ±1".into()));
        }
        Ok(LatticePath { steps })
    }

    pub fn n_steps(&self) -> usize {
        self.steps.len()
    }

    pub fn steps(&self) -> &[i8] {
        &self.steps
    }

    /// Iterator over the positions S_1, ..., S_n.
    pub fn positions(&self) -> impl Iterator<Item = i64> + '_ {
        self.steps.iter().scan(0i64, |s, &step| {
            *s += step as i64;
            Some(*s)
        })
    }
}

/// Generates a simple random walk of `n_steps` i.i.d. ±1 steps.
///
/// Deterministic function of `(n_steps, seed)`.
pub fn gen_walk(n_steps: usize, seed: u64) -> Result<LatticePath> {
    let mut rng = stream_rng(seed, 0);
    gen_walk_with(n_steps, &mut rng)
}

/// As [`gen_walk`], drawing from a caller-provided stream.
pub fn gen_walk_with<R: Rng>(n_steps: usize, rng: &mut R) -> Result<LatticePath> {
    if n_steps == 0 {
        return Err(Error::Config("n_steps must be >= 1".into()));
    }
    let mut steps = Vec::with_capacity(n_steps);
    // Draw 64 steps per u64.
    let mut remaining = n_steps;
    while remaining > 0 {
        let bits: u64 = rng.gen();
        let take = remaining.min(64);
        for k in 0..take {
            steps.push(if (bits >> k) & 1 == 1 { 1 } else { -1 });
        }
        remaining -= take;
    }
    Ok(LatticePath { steps })
}

/// A gridded occupation-density field approximating x ↦ L^x_t.
///
/// `values[i]` is the occupation density (time per unit space) of the bin
/// centered at `origin + i·bin_width`. The grid is anchored so that bin
/// centers are integer multiples of `bin_width`.
#[derive(Debug, Clone, PartialEq)]
pub struct LocalTimeField {
    /// Coordinate of the first bin center.
    pub origin: f64,
    /// Bin width δ.
    pub bin_width: f64,
    /// Occupation densities, one per bin.
    pub values: Vec<f64>,
    /// Time horizon the field was accumulated over.
    pub t_horizon: f64,
}

impl LocalTimeField {
    /// Index of the first bin on the global grid (origin / bin_width).
    pub fn first_bin_index(&self) -> i64 {
        (self.origin / self.bin_width).round() as i64
    }

    /// Total occupation time δ·Σ values. Equals the horizon up to the
    /// discrete occupation tolerance (exactly, in lattice mode).
    pub fn total_occupation(&self) -> f64 {
        self.bin_width * self.values.iter().sum::<f64>()
    }

    /// Field value at global bin index `idx`, zero outside the stored range.
    pub fn value_at(&self, idx: i64) -> f64 {
        let first = self.first_bin_index();
        if idx < first || idx >= first + self.values.len() as i64 {
            0.0
        } else {
            self.values[(idx - first) as usize]
        }
    }

    /// Writes the binary dump: magic, version, δ, origin, t_horizon, length,
    /// then the values, all little-endian.
    pub fn write_dump<W: Write>(&self, mut w: W) -> Result<()> {
        w.write_all(b"LTF1")?;
        w.write_all(&1u32.to_le_bytes())?;
        w.write_all(&self.bin_width.to_le_bytes())?;
        w.write_all(&self.origin.to_le_bytes())?;
        w.write_all(&self.t_horizon.to_le_bytes())?;
        w.write_all(&(self.values.len() as u64).to_le_bytes())?;
        for v in &self.values {
            w.write_all(&v.to_le_bytes())?;
        }
        Ok(())
    }

    /// Reads a field written by [`LocalTimeField::write_dump`].
    pub fn read_dump<R: Read>(mut r: R) -> Result<Self> {
        let mut magic = [0u8; 4];
        r.read_exact(&mut magic)?;
        if &magic != b"LTF1" {
            return Err(Error::BadDump("bad magic".into()));
        }
        let mut b4 = [0u8; 4];
        r.read_exact(&mut b4)?;
        if u32::from_le_bytes(b4) != 1 {
            return Err(Error::BadDump("unsupported version".into()));
        }
        let mut b8 = [0u8; 8];
        let mut read_f64 = |r: &mut R| -> Result<f64> {
            r.read_exact(&mut b8)?;
            Ok(f64::from_le_bytes(b8))
        };
        let bin_width = read_f64(&mut r)?;
        let origin = read_f64(&mut r)?;
        let t_horizon = read_f64(&mut r)?;
        let mut l8 = [0u8; 8];
        r.read_exact(&mut l8)?;
        let len = u64::from_le_bytes(l8) as usize;
        let mut values = Vec::with_capacity(len);
        let mut v8 = [0u8; 8];
        for _ in 0..len {
            r.read_exact(&mut v8)?;
            values.push(f64::from_le_bytes(v8));
        }
        Ok(LocalTimeField { origin, bin_width, values, t_horizon })
    }

    /// CSV export (`x,value` per line) for debugging.
    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "x,value")?;
        for (i, v) in self.values.iter().enumerate() {
            writeln!(w, "{},{}", self.origin + i as f64 * self.bin_width, v)?;
        }
        Ok(())
    }
}

/// Exact site-visit local time of a lattice path: values[x] counts the
/// indices 1 ≤ i ≤ n with S_i = x, on the unit grid.
pub fn walk_local_time(path: &LatticePath) -> LocalTimeField {
    let n = path.n_steps() as i64;
    // Positions stay within [-n, n]; count into a dense array.
    let mut counts = vec![0u64; (2 * n + 1) as usize];
    let mut min_idx = i64::MAX;
    let mut max_idx = i64::MIN;
    for pos in path.positions() {
        counts[(pos + n) as usize] += 1;
        min_idx = min_idx.min(pos);
        max_idx = max_idx.max(pos);
    }
    let values: Vec<f64> = ((min_idx + n)..=(max_idx + n))
        .map(|i| counts[i as usize] as f64)
        .collect();
    LocalTimeField {
        origin: min_idx as f64,
        bin_width: 1.0,
        values,
        t_horizon: path.n_steps() as f64,
    }
}

/// Growable bin accumulator indexed by global bin index.
struct BinAccumulator {
    counts: Vec<u64>,
    first: i64,
}

impl BinAccumulator {
    fn with_expected_range(half_range: i64) -> Self {
        let n = (2 * half_range + 1) as usize;
        BinAccumulator { counts: vec![0; n], first: -half_range }
    }

    #[inline]
    fn add(&mut self, idx: i64) {
        if idx < self.first {
            let grow = (self.first - idx) as usize + 64;
            let mut new = vec![0u64; self.counts.len() + grow];
            new[grow..].copy_from_slice(&self.counts);
            self.counts = new;
            self.first -= grow as i64;
        }
        let off = (idx - self.first) as usize;
        if off >= self.counts.len() {
            self.counts.resize(off + 64, 0);
        }
        self.counts[(idx - self.first) as usize] += 1;
    }

    fn into_field(self, weight: f64, bin_width: f64, t_horizon: f64) -> LocalTimeField {
        let lo = self.counts.iter().position(|&c| c > 0).unwrap_or(0);
        let hi = self.counts.iter().rposition(|&c| c > 0).map_or(lo, |i| i + 1);
        let values: Vec<f64> = self.counts[lo..hi].iter().map(|&c| c as f64 * weight).collect();
        LocalTimeField {
            origin: (self.first + lo as i64) as f64 * bin_width,
            bin_width,
            values,
            t_horizon,
        }
    }
}

/// Simulates Brownian motion by exact Gaussian increments and accumulates
/// `dt` into the bin containing the path at each sampling time, divided by
/// the bin width.
pub fn gen_bm_local_time(cfg: &SimConfig, seed: u64) -> Result<LocalTimeField> {
    let mut rng = stream_rng(seed, 0);
    gen_bm_local_time_with(cfg, &mut rng)
}

/// As [`gen_bm_local_time`], drawing from a caller-provided stream.
pub fn gen_bm_local_time_with<R: Rng>(cfg: &SimConfig, rng: &mut R) -> Result<LocalTimeField> {
    cfg.validate()?;
    if cfg.mode != SimMode::Brownian {
        return Err(Error::Config("gen_bm_local_time requires brownian mode".into()));
    }
    let n_steps = (cfg.t_horizon / cfg.dt).round().max(1.0) as u64;
    let sigma = cfg.dt.sqrt();
    let inv_delta = 1.0 / cfg.bin_width;
    let half_range = (5.0 * cfg.t_horizon.sqrt() * inv_delta).ceil() as i64 + 2;
    let mut acc = BinAccumulator::with_expected_range(half_range);
    let mut w = 0.0f64;
    for _ in 0..n_steps {
        let g: f64 = rng.sample(StandardNormal);
        w += sigma * g;
        acc.add((w * inv_delta).round() as i64);
    }
    Ok(acc.into_field(cfg.dt * inv_delta, cfg.bin_width, cfg.t_horizon))
}

/// One Brownian draw binned twice from the same increments: once as-is at
/// horizon `t`, and once after the pathwise rescaling W'_s = h⁻¹ W_{h²s}
/// (horizon t/h²), both on the configured grid. Used for realization-level
/// verification of the scaling identity.
pub fn gen_bm_scaled_pair<R: Rng>(
    cfg: &SimConfig,
    rng: &mut R,
    h: f64,
) -> Result<(LocalTimeField, LocalTimeField)> {
    cfg.validate()?;
    if cfg.mode != SimMode::Brownian {
        return Err(Error::Config("gen_bm_scaled_pair requires brownian mode".into()));
    }
    if !(h > 0.0) {
        return Err(Error::Config("scale h must be > 0".into()));
    }
    let n_steps = (cfg.t_horizon / cfg.dt).round().max(1.0) as u64;
    let sigma = cfg.dt.sqrt();
    let inv_delta = 1.0 / cfg.bin_width;
    let t_scaled = cfg.t_horizon / (h * h);
    let half_a = (5.0 * cfg.t_horizon.sqrt() * inv_delta).ceil() as i64 + 2;
    let half_b = (5.0 * t_scaled.sqrt() * inv_delta).ceil() as i64 + 2;
    let mut acc_a = BinAccumulator::with_expected_range(half_a);
    let mut acc_b = BinAccumulator::with_expected_range(half_b);
    let inv_h = 1.0 / h;
    let mut w = 0.0f64;
    for _ in 0..n_steps {
        let g: f64 = rng.sample(StandardNormal);
        w += sigma * g;
        acc_a.add((w * inv_delta).round() as i64);
        acc_b.add((w * inv_h * inv_delta).round() as i64);
    }
    let a = acc_a.into_field(cfg.dt * inv_delta, cfg.bin_width, cfg.t_horizon);
    let dt_scaled = cfg.dt / (h * h);
    let b = acc_b.into_field(dt_scaled * inv_delta, cfg.bin_width, t_scaled);
    Ok((a, b))
}

/// Deterministic rescaling of a field: implements the correspondence
/// L^x_{h⁻²t} ↔ h⁻¹ L^{hx}_t on the stored bins. The output grid has
/// spacing `bin_width / h`.
///
/// `h` must be an integer multiple of the bin width ratio so that probe
/// shifts on the rescaled grid stay bin-aligned.
pub fn rescale_path_field(field: &LocalTimeField, h: f64) -> Result<LocalTimeField> {
    if !(h > 0.0) {
        return Err(Error::Config("scale h must be > 0".into()));
    }
    let ratio = h / field.bin_width;
    if (ratio - ratio.round()).abs() > 1e-9 || ratio.round() < 1.0 {
        return Err(Error::GridMismatch(format!(
            "scale h = {} would alias bins of width {}",
            h, field.bin_width
        )));
    }
    Ok(LocalTimeField {
        origin: field.origin / h,
        bin_width: field.bin_width / h,
        values: field.values.iter().map(|v| v / h).collect(),
        t_horizon: field.t_horizon / (h * h),
    })
}

/// Dispatches on the configured mode to produce one field for `seed`.
pub fn simulate_field(cfg: &SimConfig, seed: u64) -> Result<LocalTimeField> {
    cfg.validate()?;
    match cfg.mode {
        SimMode::Brownian => gen_bm_local_time(cfg, seed),
        SimMode::LatticeWalk => {
            let n = cfg.t_horizon.round() as usize;
            Ok(walk_local_time(&gen_walk(n, seed)?))
        }
    }
}

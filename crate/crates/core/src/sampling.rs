//! Reproducible samplers and fill-distance diagnostics.
//!
//! All randomness comes from [`GENERATOR`] seeded through [`derive_seed`], so a
//! master seed plus a stream path determines every draw on every machine.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::boundary::Domain;
use crate::error::{check_dim, Error, Result};

/// Generator used for every draw, pinned by name and crate version.
pub const GENERATOR: &str = "ChaCha8Rng (rand_chacha 0.9)";

pub type SimRng = ChaCha8Rng;

pub fn rng_from_seed(seed: u64) -> SimRng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Child seed for the stream at `path` below `master`, by chained SplitMix64.
pub fn derive_seed(master: u64, path: &[u64]) -> u64 {
    path.iter().fold(splitmix64(master), |acc, p| splitmix64(acc ^ splitmix64(*p)))
}

/// `n` i.i.d. points, uniform on `[0, 1)^d`.
pub fn sample_iid_uniform(n: usize, d: usize, seed: u64) -> Vec<Vec<f64>> {
    let mut rng = rng_from_seed(seed);
    (0..n).map(|_| (0..d).map(|_| rng.random::<f64>()).collect()).collect()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChainConfig {
    pub d: usize,
    /// Step half-width; increments are uniform on `[−ε, ε]^d`.
    pub eps: f64,
    pub n: usize,
    pub seed: u64,
    /// States discarded before the first emitted one.
    pub burn_in: usize,
}

impl ChainConfig {
    pub fn new(d: usize, eps: f64, n: usize, seed: u64) -> Self {
        Self { d, eps, n, seed, burn_in: 0 }
    }

    pub fn validate(&self) -> Result<()> {
        if self.d == 0 || self.n == 0 {
            return Err(Error::Config("chain needs d >= 1 and n >= 1".into()));
        }
        if !(self.eps >= 0.0 && self.eps.is_finite()) {
            return Err(Error::Config(format!("step size must be finite and nonnegative (got {})", self.eps)));
        }
        Ok(())
    }
}

fn wrap_unit(v: f64) -> f64 {
    let w = v - v.floor();
    // A tiny negative input can round up to exactly 1.
    if w >= 1.0 {
        0.0
    } else {
        w
    }
}

/// Random walk `x_i = x_{i−1} + e_i` on the unit torus, started at the origin.
///
/// The origin itself is the first emitted state unless `burn_in > 0`.
pub fn sample_torus_walk(cfg: &ChainConfig) -> Result<Vec<Vec<f64>>> {
    cfg.validate()?;
    let mut rng = rng_from_seed(cfg.seed);
    let mut x = vec![0.0; cfg.d];
    let mut out = Vec::with_capacity(cfg.n);
    for step in 0..cfg.burn_in + cfg.n {
        if step > 0 {
            for v in x.iter_mut() {
                let e = cfg.eps * (2.0 * rng.random::<f64>() - 1.0);
                *v = wrap_unit(*v + e);
            }
        }
        if step >= cfg.burn_in {
            out.push(x.clone());
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FillDistanceReport {
    /// Largest nearest-point distance found over the evaluation grid.
    pub value: f64,
    /// Grid spacing actually used (0 for exact computations).
    pub resolution: f64,
    /// The true fill distance lies in `[value, value + slack]`.
    pub slack: f64,
    pub exact: bool,
}

/// Grid spacing used by default in dimension `d`, or `None` where a full grid
/// is too expensive to be a sensible default.
pub fn default_resolution(d: usize) -> Option<f64> {
    match d {
        1 => Some(1e-4),
        2 => Some(1e-2),
        _ => None,
    }
}

const MAX_GRID_NODES: usize = 50_000_000;

/// Fill distance `sup_{x ∈ domain} min_i ‖x − x_i‖₂`, approximated by the
/// maximum over a uniform grid of spacing at most `resolution`.
pub fn fill_distance(points: &[Vec<f64>], domain: &Domain, resolution: f64) -> Result<FillDistanceReport> {
    if points.is_empty() {
        return Err(Error::Argument("fill distance of an empty point set".into()));
    }
    if !(resolution > 0.0 && resolution.is_finite()) {
        return Err(Error::Argument(format!("resolution must be positive (got {resolution})")));
    }
    let d = domain.dim();
    for p in points {
        check_dim(d, p.len())?;
    }
    let counts: Vec<usize> =
        (0..d).map(|i| ((domain.hi()[i] - domain.lo()[i]) / resolution).ceil() as usize + 1).collect();
    let total = counts.iter().try_fold(1usize, |acc, c| acc.checked_mul(*c)).unwrap_or(usize::MAX);
    if total > MAX_GRID_NODES {
        return Err(Error::Argument(format!("grid of {total} nodes is too large; use a coarser resolution")));
    }
    let spacing: Vec<f64> = (0..d).map(|i| (domain.hi()[i] - domain.lo()[i]) / (counts[i] - 1) as f64).collect();
    let flat: Vec<f64> = points.iter().flatten().copied().collect();
    let value = (0..total)
        .into_par_iter()
        .with_min_len(1024)
        .map_init(
            || vec![0.0; d],
            |node, mut idx| {
                for i in 0..d {
                    let k = idx % counts[i];
                    idx /= counts[i];
                    node[i] = if k + 1 == counts[i] { domain.hi()[i] } else { domain.lo()[i] + k as f64 * spacing[i] };
                }
                flat.chunks_exact(d)
                    .map(|p| p.iter().zip(node.iter()).map(|(a, b)| (a - b) * (a - b)).sum::<f64>())
                    .fold(f64::INFINITY, f64::min)
            },
        )
        .reduce(|| 0.0, f64::max)
        .sqrt();
    let max_spacing = spacing.iter().copied().fold(0.0, f64::max);
    let diag = spacing.iter().map(|s| s * s).sum::<f64>().sqrt();
    Ok(FillDistanceReport { value, resolution: max_spacing, slack: 0.5 * diag, exact: false })
}

/// Exact fill distance of points in an interval: the largest of the two end
/// gaps and half the largest interior gap.
pub fn fill_distance_1d_exact(points: &[f64], lo: f64, hi: f64) -> Result<FillDistanceReport> {
    if points.is_empty() {
        return Err(Error::Argument("fill distance of an empty point set".into()));
    }
    let mut xs = points.to_vec();
    xs.sort_by(f64::total_cmp);
    let mut value = (xs[0] - lo).max(hi - xs[xs.len() - 1]);
    for w in xs.windows(2) {
        value = value.max(0.5 * (w[1] - w[0]));
    }
    Ok(FillDistanceReport { value, resolution: 0.0, slack: 0.0, exact: true })
}

/// `M^d` points on the regular grid with `M` nodes per axis of `[0, 1]^d`.
pub fn unit_grid(m_per_axis: usize, d: usize) -> Vec<Vec<f64>> {
    let total = m_per_axis.pow(d as u32);
    (0..total)
        .map(|mut idx| {
            (0..d)
                .map(|_| {
                    let k = idx % m_per_axis;
                    idx /= m_per_axis;
                    if m_per_axis == 1 {
                        0.5
                    } else {
                        k as f64 / (m_per_axis - 1) as f64
                    }
                })
                .collect()
        })
        .collect()
}

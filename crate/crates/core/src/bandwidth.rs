//! Bandwidth selection by log-marginal-likelihood and the optimal split fraction.
//!
//! Only training points are ever passed in here. Choosing `h` from `D₀` alone
//! keeps the sample-splitting estimator unbiased.

use nalgebra::DVector;

use crate::error::{Error, Result};
use crate::linalg::JitteredCholesky;
use crate::stein::{GramKind, SteinKernel};

/// `1/φ` where `φ` is the golden ratio.
pub const INV_GOLDEN: f64 = 0.618_033_988_749_894_9;

/// Candidates closer than this to the lower bound are rejected.
const LOWER_EXCLUSION: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BandwidthSearch {
    pub lo: f64,
    pub hi: f64,
    /// Number of bracket reductions.
    pub iters: usize,
    pub rel_tol: f64,
}

impl Default for BandwidthSearch {
    fn default() -> Self {
        Self { lo: 0.0, hi: 10.0, iters: 10, rel_tol: 1e-4 }
    }
}

impl BandwidthSearch {
    pub fn validate(&self) -> Result<()> {
        if !(self.lo >= 0.0 && self.lo < self.hi && self.hi.is_finite()) {
            return Err(Error::Config(format!(
                "bandwidth bounds must satisfy 0 <= lo < hi (got {}, {})",
                self.lo, self.hi
            )));
        }
        if self.iters == 0 {
            return Err(Error::Config("bandwidth search needs at least one iteration".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GoldenResult {
    pub x: f64,
    pub value: f64,
    /// Final bracket after all reductions.
    pub bracket: (f64, f64),
    pub evaluations: usize,
    /// The two surviving candidates scored equally; the smaller was returned.
    pub tie: bool,
    /// Every evaluation was `-∞` or NaN; `x` is the midpoint of the search range.
    pub failed: bool,
}

/// Golden-section maximisation of `f` over `(lo, hi]` with exactly `iters`
/// bracket reductions. Non-finite objective values count as `-∞`; ties go to
/// the smaller argument.
pub fn golden_section_max(mut f: impl FnMut(f64) -> f64, lo: f64, hi: f64, iters: usize) -> GoldenResult {
    let mut eval = |x: f64| -> f64 {
        if x <= lo + LOWER_EXCLUSION {
            return f64::NEG_INFINITY;
        }
        let v = f(x);
        if v.is_nan() {
            f64::NEG_INFINITY
        } else {
            v
        }
    };
    let (mut a, mut b) = (lo, hi);
    let mut c = b - INV_GOLDEN * (b - a);
    let mut d = a + INV_GOLDEN * (b - a);
    let mut fc = eval(c);
    let mut fd = eval(d);
    let mut evaluations = 2;
    let mut any_finite = fc > f64::NEG_INFINITY || fd > f64::NEG_INFINITY;
    for _ in 0..iters {
        if fc >= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - INV_GOLDEN * (b - a);
            fc = eval(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + INV_GOLDEN * (b - a);
            fd = eval(d);
        }
        evaluations += 1;
        any_finite |= fc > f64::NEG_INFINITY || fd > f64::NEG_INFINITY;
    }
    if !any_finite {
        return GoldenResult {
            x: 0.5 * (lo + hi),
            value: f64::NEG_INFINITY,
            bracket: (a, b),
            evaluations,
            tie: false,
            failed: true,
        };
    }
    // c < d always, so `>=` prefers the smaller argument.
    let (x, value) = if fc >= fd { (c, fc) } else { (d, fd) };
    GoldenResult { x, value, bracket: (a, b), evaluations, tie: fc == fd, failed: false }
}

/// `log p(f₀ | D₀, h) = −½ f₀ᵀ K₊⁻¹ f₀ − ½ log|K₊| − (m/2) log 2π`, with `K₊`
/// built at the kernel's current bandwidth.
///
/// Returns `-∞` if `K₊` is singular (repeated points, or factorisation failure
/// at the largest jitter).
pub fn log_marginal_likelihood(sk: &SteinKernel, states: &[Vec<f64>], fvals: &[f64]) -> Result<f64> {
    if states.is_empty() || states.len() != fvals.len() {
        return Err(Error::Argument(format!(
            "need matching nonempty states and values (got {} and {})",
            states.len(),
            fvals.len()
        )));
    }
    if fvals.iter().any(|v| !v.is_finite()) {
        return Err(Error::Argument("function values must be finite".into()));
    }
    let gram = sk.gram(states, GramKind::KPlus)?;
    if gram.has_duplicates {
        return Ok(f64::NEG_INFINITY);
    }
    Ok(lml_from_gram(&gram.matrix, fvals, sk.c()))
}

pub(crate) fn lml_from_gram(k: &nalgebra::DMatrix<f64>, fvals: &[f64], c: f64) -> f64 {
    let Ok(chol) = JitteredCholesky::factor_scaled(k, jitter_scale(k, c)) else {
        return f64::NEG_INFINITY;
    };
    let f = DVector::from_column_slice(fvals);
    let alpha = chol.solve(&f);
    let m = fvals.len() as f64;
    -0.5 * f.dot(&alpha) - 0.5 * chol.log_det() - 0.5 * m * (2.0 * std::f64::consts::PI).ln()
}

/// Mean diagonal of the `k0` part of `K₊ = c·11ᵀ + K₀`, falling back to the
/// full mean diagonal when `K₀` has none.
pub(crate) fn jitter_scale(kplus: &nalgebra::DMatrix<f64>, c: f64) -> f64 {
    let m = kplus.nrows().max(1) as f64;
    let k0 = kplus.trace() / m - c;
    if k0 > 0.0 {
        k0
    } else {
        kplus.trace() / m
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BandwidthChoice {
    pub h: f64,
    pub log_likelihood: f64,
    pub tie: bool,
    pub failed: bool,
    pub evaluations: usize,
}

/// Maximises [`log_marginal_likelihood`] over `h ∈ (lo, hi]` using only the
/// training points given.
pub fn optimize_bandwidth(
    sk: &SteinKernel,
    states: &[Vec<f64>],
    fvals: &[f64],
    search: &BandwidthSearch,
) -> Result<BandwidthChoice> {
    search.validate()?;
    // Surface argument errors once instead of inside the objective.
    if states.is_empty() || states.len() != fvals.len() || fvals.iter().any(|v| !v.is_finite()) {
        return Err(Error::Argument("bandwidth search needs matching, finite training data".into()));
    }
    let mut err = None;
    let g = golden_section_max(
        |h| match sk.with_bandwidth(h).and_then(|k| log_marginal_likelihood(&k, states, fvals)) {
            Ok(v) => v,
            Err(e) => {
                err.get_or_insert(e);
                f64::NEG_INFINITY
            }
        },
        search.lo,
        search.hi,
        search.iters,
    );
    if let Some(e) = err {
        return Err(e);
    }
    Ok(BandwidthChoice { h: g.x, log_likelihood: g.value, tie: g.tie, failed: g.failed, evaluations: g.evaluations })
}

/// `ρ* = ν / (1 + ν)` with `ν = 2 s / d`, where `s` is the joint smoothness
/// `a ∧ b` of target and kernel. `s = ∞` gives 1.
pub fn optimal_split(smoothness: f64, dim: usize) -> Result<f64> {
    if smoothness.is_nan() || smoothness < 0.0 || dim == 0 {
        return Err(Error::Argument(format!("need smoothness >= 0 and d >= 1 (got {smoothness}, {dim})")));
    }
    if smoothness.is_infinite() {
        return Ok(1.0);
    }
    let nu = 2.0 * smoothness / dim as f64;
    Ok(nu / (1.0 + nu))
}

/// Training-set size for `n` samples at split fraction `rho`, clamped to `1..n`.
pub fn split_index(n: usize, rho: f64) -> usize {
    let m = (rho * n as f64).round() as usize;
    m.clamp(1, n.saturating_sub(1).max(1))
}

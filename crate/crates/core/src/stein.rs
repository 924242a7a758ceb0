//! Score functions, the Stein operator and the Stein reproducing kernel.
//!
//! For a modified kernel `k` and score `u = ∇ log π`,
//!
//! ```text
//! k0(x, x') = ∇_x·∇_x' k + u(x)·∇_x' k + u(x')·∇_x k + u(x)·u(x') k
//! ```
//!
//! and `k+ = c + k0`. Sections `k0(·, x')` have zero mean under `Π` whenever
//! the boundary weight vanishes on the domain faces.

use std::collections::HashSet;
use std::fmt;
use std::sync::Arc;

use nalgebra::DMatrix;
use rayon::prelude::*;

use crate::boundary::{ModifiedKernel, Weighted};
use crate::error::{check_dim, Error, Result};

/// `u(x) = ∇_x log π(x)` for a target known up to normalisation.
pub trait ScoreFunction: Send + Sync {
    fn dim(&self) -> usize;

    /// Writes `∇ log π(x)` into `out`.
    fn score(&self, x: &[f64], out: &mut [f64]);

    fn name(&self) -> &str {
        "custom"
    }

    /// True when the score is identically zero, which lets `k0` skip the
    /// score-bearing terms entirely.
    fn is_zero(&self) -> bool {
        false
    }
}

/// Score of the uniform distribution on a box.
#[derive(Debug, Clone, Copy)]
pub struct UniformScore {
    pub dim: usize,
}

impl ScoreFunction for UniformScore {
    fn dim(&self) -> usize {
        self.dim
    }

    fn score(&self, _x: &[f64], out: &mut [f64]) {
        out.iter_mut().for_each(|v| *v = 0.0);
    }

    fn name(&self) -> &str {
        "uniform"
    }

    fn is_zero(&self) -> bool {
        true
    }
}

/// Adapts a closure into a [`ScoreFunction`].
pub struct FnScore<F> {
    dim: usize,
    name: String,
    f: F,
}

impl<F> FnScore<F>
where
    F: Fn(&[f64], &mut [f64]) + Send + Sync,
{
    pub fn new(dim: usize, name: impl Into<String>, f: F) -> Self {
        Self { dim, name: name.into(), f }
    }
}

impl<F> ScoreFunction for FnScore<F>
where
    F: Fn(&[f64], &mut [f64]) + Send + Sync,
{
    fn dim(&self) -> usize {
        self.dim
    }

    fn score(&self, x: &[f64], out: &mut [f64]) {
        (self.f)(x, out)
    }

    fn name(&self) -> &str {
        &self.name
    }
}

/// A vector field `φ: R^d → R^d` with known divergence.
pub trait VectorField {
    fn dim(&self) -> usize;
    fn value(&self, x: &[f64], out: &mut [f64]);
    fn divergence(&self, x: &[f64]) -> f64;
}

/// `φ(x) = k(x, anchor) · direction` for a modified kernel `k`.
#[derive(Debug, Clone)]
pub struct KernelSection {
    pub kernel: ModifiedKernel,
    pub anchor: Vec<f64>,
    pub direction: Vec<f64>,
}

impl VectorField for KernelSection {
    fn dim(&self) -> usize {
        self.kernel.dim()
    }

    fn value(&self, x: &[f64], out: &mut [f64]) {
        let k = self.kernel.eval(x, &self.anchor).unwrap_or(0.0);
        out.iter_mut().zip(&self.direction).for_each(|(o, v)| *o = k * v);
    }

    fn divergence(&self, x: &[f64]) -> f64 {
        let g = self.kernel.grad_x(x, &self.anchor).unwrap_or_else(|_| vec![0.0; x.len()]);
        g.iter().zip(&self.direction).map(|(a, b)| a * b).sum()
    }
}

/// The Stein operator `S_π[φ](x) = ∇·φ(x) + φ(x)·∇ log π(x)`.
pub fn stein_apply(score: &dyn ScoreFunction, field: &dyn VectorField, x: &[f64]) -> Result<f64> {
    check_dim(score.dim(), x.len())?;
    check_dim(field.dim(), x.len())?;
    let d = x.len();
    let mut u = vec![0.0; d];
    let mut phi = vec![0.0; d];
    score.score(x, &mut u);
    field.value(x, &mut phi);
    Ok(field.divergence(x) + phi.iter().zip(&u).map(|(a, b)| a * b).sum::<f64>())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GramKind {
    K0,
    KPlus,
}

/// A Gram matrix plus whether its point set contained exact repeats, in which
/// case the matrix is singular by construction.
#[derive(Debug, Clone)]
pub struct Gram {
    pub matrix: DMatrix<f64>,
    pub has_duplicates: bool,
}

pub(crate) struct Prepared<'a> {
    w: Weighted<'a>,
    score: Vec<f64>,
}

#[derive(Clone)]
pub struct SteinKernel {
    mk: ModifiedKernel,
    score: Arc<dyn ScoreFunction>,
    c: f64,
}

impl fmt::Debug for SteinKernel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("SteinKernel")
            .field("mk", &self.mk)
            .field("score", &self.score.name())
            .field("c", &self.c)
            .finish()
    }
}

/// Rows at or above this size are assembled in parallel.
const PARALLEL_GRAM_ROWS: usize = 96;

impl SteinKernel {
    pub fn new(mk: ModifiedKernel, score: Arc<dyn ScoreFunction>, c: f64) -> Result<Self> {
        check_dim(mk.dim(), score.dim())?;
        if !(c.is_finite() && c > 0.0) {
            return Err(Error::Config(format!("constant kernel level must be positive (got {c})")));
        }
        Ok(Self { mk, score, c })
    }

    /// Uniform target on the weight's box with `c = 1`.
    pub fn uniform(mk: ModifiedKernel) -> Self {
        let dim = mk.dim();
        Self { mk, score: Arc::new(UniformScore { dim }), c: 1.0 }
    }

    pub fn modified(&self) -> &ModifiedKernel {
        &self.mk
    }

    pub fn score(&self) -> &Arc<dyn ScoreFunction> {
        &self.score
    }

    pub fn c(&self) -> f64 {
        self.c
    }

    pub fn dim(&self) -> usize {
        self.mk.dim()
    }

    pub fn bandwidth(&self) -> f64 {
        self.mk.base().bandwidth()
    }

    pub fn with_bandwidth(&self, h: f64) -> Result<Self> {
        Ok(Self { mk: self.mk.with_bandwidth(h)?, score: Arc::clone(&self.score), c: self.c })
    }

    pub fn with_c(&self, c: f64) -> Result<Self> {
        Self::new(self.mk.clone(), Arc::clone(&self.score), c)
    }

    pub(crate) fn prepare<'a>(&self, x: &'a [f64]) -> Result<Prepared<'a>> {
        check_dim(self.dim(), x.len())?;
        if !self.mk.weight().domain().contains(x) {
            return Err(Error::Argument(format!("point {x:?} lies outside the kernel's domain")));
        }
        if x.iter().any(|v| !v.is_finite()) {
            return Err(Error::Argument(format!("non-finite point {x:?}")));
        }
        let w = self.mk.weigh(x);
        let mut score = vec![0.0; x.len()];
        // Every score-bearing term carries a δ(x) factor; skip the score where
        // δ vanishes since it may diverge on the boundary.
        if w.delta != 0.0 && !self.score.is_zero() {
            self.score.score(x, &mut score);
        }
        Ok(Prepared { w, score })
    }

    pub(crate) fn prepare_all<'a>(&self, points: &'a [Vec<f64>]) -> Result<Vec<Prepared<'a>>> {
        points.iter().map(|p| self.prepare(p)).collect()
    }

    pub(crate) fn k0_prepared(&self, p: &Prepared, q: &Prepared) -> f64 {
        let mp = self.mk.pair(&p.w, &q.w);
        if self.score.is_zero() {
            return mp.cross;
        }
        let (x, y) = (p.w.x, q.w.x);
        let mut ugp = 0.0;
        let mut upg = 0.0;
        let mut udiff = 0.0;
        let mut updiff = 0.0;
        let mut uu = 0.0;
        for i in 0..x.len() {
            let diff = x[i] - y[i];
            ugp += p.score[i] * q.w.grad[i];
            upg += q.score[i] * p.w.grad[i];
            udiff += p.score[i] * diff;
            updiff += q.score[i] * diff;
            uu += p.score[i] * q.score[i];
        }
        let dd = p.w.delta * q.w.delta;
        let s = mp.grad_scale;
        // u·∇_x' k and u'·∇_x k; swapping the arguments swaps these two exactly.
        let a = p.w.delta * mp.kt * ugp - (dd * s) * udiff;
        let b = q.w.delta * mp.kt * upg + (dd * s) * updiff;
        mp.cross + (a + b) + uu * (dd * mp.kt)
    }

    pub fn k0(&self, x: &[f64], xp: &[f64]) -> Result<f64> {
        Ok(self.k0_prepared(&self.prepare(x)?, &self.prepare(xp)?))
    }

    pub fn kplus(&self, x: &[f64], xp: &[f64]) -> Result<f64> {
        Ok(self.c + self.k0(x, xp)?)
    }

    pub fn gram(&self, points: &[Vec<f64>], which: GramKind) -> Result<Gram> {
        let prep = self.prepare_all(points)?;
        let m = prep.len();
        let offset = match which {
            GramKind::K0 => 0.0,
            GramKind::KPlus => self.c,
        };
        let row = |i: usize| -> Vec<f64> { (i..m).map(|j| offset + self.k0_prepared(&prep[i], &prep[j])).collect() };
        let upper: Vec<Vec<f64>> =
            if m >= PARALLEL_GRAM_ROWS { (0..m).into_par_iter().map(row).collect() } else { (0..m).map(row).collect() };
        let mut matrix = DMatrix::zeros(m, m);
        for (i, r) in upper.iter().enumerate() {
            for (k, v) in r.iter().enumerate() {
                matrix[(i, i + k)] = *v;
                matrix[(i + k, i)] = *v;
            }
        }
        Ok(Gram { matrix, has_duplicates: has_duplicates(points) })
    }

    /// `[k(rows_i, cols_j)]`, e.g. `K10` with D₁ as rows and D₀ as columns.
    pub fn cross_gram(&self, rows: &[Vec<f64>], cols: &[Vec<f64>], which: GramKind) -> Result<DMatrix<f64>> {
        let pr = self.prepare_all(rows)?;
        let pc = self.prepare_all(cols)?;
        let offset = if which == GramKind::KPlus { self.c } else { 0.0 };
        let row = |i: usize| -> Vec<f64> { pc.iter().map(|q| offset + self.k0_prepared(&pr[i], q)).collect() };
        let data: Vec<Vec<f64>> = if pr.len() >= PARALLEL_GRAM_ROWS {
            (0..pr.len()).into_par_iter().map(row).collect()
        } else {
            (0..pr.len()).map(row).collect()
        };
        Ok(DMatrix::from_fn(pr.len(), pc.len(), |i, j| data[i][j]))
    }
}

pub(crate) fn point_key(x: &[f64]) -> Vec<u64> {
    // +0.0 and -0.0 are the same state.
    x.iter().map(|v| (v + 0.0).to_bits()).collect()
}

pub(crate) fn has_duplicates(points: &[Vec<f64>]) -> bool {
    let mut seen = HashSet::with_capacity(points.len());
    !points.iter().all(|p| seen.insert(point_key(p)))
}

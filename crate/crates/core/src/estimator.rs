//! Sample splitting, representer fits and the three integral estimators.
//!
//! * [`estimate_mc`]: the plain sample mean.
//! * [`estimate_cf`]: fit a control functional on `D₀`, average the residuals
//!   over `D₁`. Uses the closed form obtained in the `c → ∞` limit of the
//!   `k₊ = c + k0` fit.
//! * [`estimate_loo`]: every point is scored against a surrogate fitted to all
//!   the other points.
//!
//! All three are unbiased as long as the surrogate never sees the points it is
//! evaluated on.

use std::collections::HashSet;

use nalgebra::DVector;
use serde::Serialize;

use crate::bandwidth::{jitter_scale, optimize_bandwidth, split_index, BandwidthSearch};
use crate::error::{check_dim, Error, Result};
use crate::linalg::{JitteredCholesky, JITTER_SCHEDULE};
use crate::stein::{point_key, GramKind, SteinKernel};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum Estimator {
    MC,
    CF,
    LOOCF,
}

impl Estimator {
    pub const ALL: [Estimator; 3] = [Estimator::MC, Estimator::CF, Estimator::LOOCF];

    pub fn as_str(&self) -> &'static str {
        match self {
            Estimator::MC => "MC",
            Estimator::CF => "CF",
            Estimator::LOOCF => "LOOCF",
        }
    }
}

impl std::fmt::Display for Estimator {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for Estimator {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_uppercase().as_str() {
            "MC" => Ok(Estimator::MC),
            "CF" => Ok(Estimator::CF),
            "LOOCF" | "LOO" => Ok(Estimator::LOOCF),
            _ => Err(Error::Config(format!("unknown estimator {s:?}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Flag {
    /// The surrogate was singular and replaced by `f_m ≡ 0`.
    FallbackZero,
    /// `δ ≡ 1`: control functionals are not guaranteed to have zero mean.
    ConstantWeight,
    /// Repeated training states were dropped before fitting.
    DuplicatesRemoved(usize),
    /// Number of leave-one-out folds that fell back to `f^{(-i)} ≡ 0`.
    FoldFallbacks(usize),
    BandwidthSearchFailed,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EstimateSummary {
    pub value: f64,
    pub estimator: Estimator,
    /// Points used to fit the surrogate (0 for MC).
    pub n_train: usize,
    /// Points the residuals were averaged over.
    pub n_eval: usize,
    /// `∫ f_m dΠ` of the surrogate, where one was fitted.
    pub fitted_constant: Option<f64>,
    pub bandwidth: Option<f64>,
    pub flags: Vec<Flag>,
}

impl EstimateSummary {
    pub fn fell_back(&self) -> bool {
        self.flags.iter().any(|f| matches!(f, Flag::FallbackZero | Flag::FoldFallbacks(_)))
    }
}

/// States and function values, split by index into `D₀ = [0, m)` and `D₁ = [m, n)`.
#[derive(Debug, Clone)]
pub struct SplitDataset {
    states: Vec<Vec<f64>>,
    fvals: Vec<f64>,
    m: usize,
    rho: f64,
    /// Max-coordinate tolerance for treating two training states as equal.
    pub dedupe_tol: f64,
}

impl SplitDataset {
    /// Splits at `m = round(ρ n)`, clamped to `1 ≤ m < n`.
    pub fn new(states: Vec<Vec<f64>>, fvals: Vec<f64>, rho: f64) -> Result<Self> {
        if !(rho > 0.0 && rho < 1.0) {
            return Err(Error::Argument(format!("split fraction must lie in (0, 1) (got {rho})")));
        }
        let m = split_index(states.len(), rho);
        Self::build(states, fvals, m, rho)
    }

    pub fn with_split(states: Vec<Vec<f64>>, fvals: Vec<f64>, m: usize) -> Result<Self> {
        let rho = m as f64 / states.len().max(1) as f64;
        Self::build(states, fvals, m, rho)
    }

    fn build(states: Vec<Vec<f64>>, fvals: Vec<f64>, m: usize, rho: f64) -> Result<Self> {
        let n = states.len();
        if n != fvals.len() {
            return Err(Error::Argument(format!("{n} states but {} function values", fvals.len())));
        }
        if n < 2 {
            return Err(Error::Argument("need at least two samples to split".into()));
        }
        if m == 0 || m >= n {
            return Err(Error::Argument(format!("split index must satisfy 1 <= m < n (got m={m}, n={n})")));
        }
        if fvals.iter().any(|v| !v.is_finite()) {
            return Err(Error::Argument("function values must be finite".into()));
        }
        Ok(Self { states, fvals, m, rho, dedupe_tol: 0.0 })
    }

    pub fn n(&self) -> usize {
        self.states.len()
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn rho(&self) -> f64 {
        self.rho
    }

    pub fn d0(&self) -> (&[Vec<f64>], &[f64]) {
        (&self.states[..self.m], &self.fvals[..self.m])
    }

    pub fn d1(&self) -> (&[Vec<f64>], &[f64]) {
        (&self.states[self.m..], &self.fvals[self.m..])
    }

    /// `D₀` with repeated states removed (first occurrence kept).
    pub fn d0_deduped(&self) -> (Vec<Vec<f64>>, Vec<f64>) {
        let (s, f) = self.d0();
        dedupe(s, f, self.dedupe_tol)
    }
}

/// Removes repeated states, keeping the first occurrence of each.
///
/// Two states are repeats when their max-coordinate distance is `<= tol`;
/// `tol = 0` means bitwise-equal coordinates, which is what a rejected
/// Metropolis move produces.
pub fn dedupe(states: &[Vec<f64>], fvals: &[f64], tol: f64) -> (Vec<Vec<f64>>, Vec<f64>) {
    let mut keep_s: Vec<Vec<f64>> = Vec::with_capacity(states.len());
    let mut keep_f = Vec::with_capacity(states.len());
    if tol <= 0.0 {
        let mut seen = HashSet::with_capacity(states.len());
        for (s, f) in states.iter().zip(fvals) {
            if seen.insert(point_key(s)) {
                keep_s.push(s.clone());
                keep_f.push(*f);
            }
        }
    } else {
        for (s, f) in states.iter().zip(fvals) {
            let dup = keep_s.iter().any(|k| k.iter().zip(s).all(|(a, b)| (a - b).abs() <= tol));
            if !dup {
                keep_s.push(s.clone());
                keep_f.push(*f);
            }
        }
    }
    (keep_s, keep_f)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FitStatus {
    FullRank,
    /// `K₊` was singular; the surrogate is `f_m ≡ 0`.
    FallbackZero,
}

/// `f_m(x) = Σ a_i k₊(x, x_i)` fitted by interpolation on `D₀`.
#[derive(Debug, Clone)]
pub struct ControlFunctionalFit {
    pub coeffs: DVector<f64>,
    /// The `c → ∞` fitted constant `(1ᵀK₀⁻¹f₀) / (1ᵀK₀⁻¹1)`, when `K₀` factorises.
    pub beta: Option<f64>,
    pub training: Vec<Vec<f64>>,
    pub status: FitStatus,
    pub jitter_used: f64,
    c: f64,
}

impl ControlFunctionalFit {
    pub fn predict(&self, sk: &SteinKernel, x: &[f64]) -> Result<f64> {
        check_dim(sk.dim(), x.len())?;
        if self.status == FitStatus::FallbackZero {
            return Ok(0.0);
        }
        let mut acc = 0.0;
        for (a, xi) in self.coeffs.iter().zip(&self.training) {
            acc += a * sk.kplus(x, xi)?;
        }
        Ok(acc)
    }

    /// `∫ f_m dΠ = c · Σ a_i`; the `k0` part integrates to zero.
    pub fn integral(&self) -> f64 {
        self.c * self.coeffs.sum()
    }
}

fn check_training(states: &[Vec<f64>], fvals: &[f64]) -> Result<()> {
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
    Ok(())
}

/// Solves `(K₊ + λI) a = f₀` with escalating jitter. Repeated states make
/// `K₊` singular by construction and always give [`FitStatus::FallbackZero`].
pub fn fit(sk: &SteinKernel, states: &[Vec<f64>], fvals: &[f64]) -> Result<ControlFunctionalFit> {
    check_training(states, fvals)?;
    let gram = sk.gram(states, GramKind::KPlus)?;
    let m = states.len();
    let fallback = |jitter| ControlFunctionalFit {
        coeffs: DVector::zeros(m),
        beta: None,
        training: states.to_vec(),
        status: FitStatus::FallbackZero,
        jitter_used: jitter,
        c: sk.c(),
    };
    if gram.has_duplicates {
        let max_jitter = JITTER_SCHEDULE[JITTER_SCHEDULE.len() - 1] * gram.matrix.trace() / m as f64;
        return Ok(fallback(max_jitter));
    }
    let chol = match JitteredCholesky::factor_scaled(&gram.matrix, jitter_scale(&gram.matrix, sk.c())) {
        Ok(c) => c,
        Err(j) => return Ok(fallback(j)),
    };
    let coeffs = chol.solve(&DVector::from_column_slice(fvals));
    let beta = limit_fit(sk, states, fvals)?.map(|l| l.beta);
    Ok(ControlFunctionalFit {
        coeffs,
        beta,
        training: states.to_vec(),
        status: FitStatus::FullRank,
        jitter_used: chol.jitter,
        c: sk.c(),
    })
}

/// `f_m − β̂ = Σ α_i k0(·, x_i)` in the `c → ∞` limit.
#[derive(Debug, Clone)]
pub(crate) struct LimitFit {
    pub alpha: DVector<f64>,
    pub beta: f64,
}

pub(crate) fn limit_fit(sk: &SteinKernel, states: &[Vec<f64>], fvals: &[f64]) -> Result<Option<LimitFit>> {
    let gram = sk.gram(states, GramKind::K0)?;
    if gram.has_duplicates {
        return Ok(None);
    }
    let Ok(chol) = JitteredCholesky::factor(&gram.matrix) else {
        return Ok(None);
    };
    let f = DVector::from_column_slice(fvals);
    let ones = DVector::from_element(states.len(), 1.0);
    let kf = chol.solve(&f);
    let k1 = chol.solve(&ones);
    let beta = kf.sum() / k1.sum();
    if !beta.is_finite() {
        return Ok(None);
    }
    let alpha = chol.solve(&(f - DVector::from_element(states.len(), beta)));
    Ok(Some(LimitFit { alpha, beta }))
}

fn weight_flags(sk: &SteinKernel) -> Vec<Flag> {
    if sk.modified().weight().vanishes_on_boundary() {
        Vec::new()
    } else {
        vec![Flag::ConstantWeight]
    }
}

pub fn estimate_mc(fvals: &[f64]) -> Result<EstimateSummary> {
    if fvals.is_empty() {
        return Err(Error::Argument("cannot average an empty sample".into()));
    }
    Ok(EstimateSummary {
        value: fvals.iter().sum::<f64>() / fvals.len() as f64,
        estimator: Estimator::MC,
        n_train: 0,
        n_eval: fvals.len(),
        fitted_constant: None,
        bandwidth: None,
        flags: Vec::new(),
    })
}

/// The sample-splitting control-functional estimator in its `c → ∞` closed form,
///
/// ```text
/// I = (n−m)⁻¹ 1ᵀ { f₁ − K₁₀ K₀⁻¹ [ f₀ − β̂ 1 ] },   β̂ = 1ᵀK₀⁻¹f₀ / 1ᵀK₀⁻¹1
/// ```
///
/// with `K₀ = [k0(x_i, x_j)]` over `D₀` and `K₁₀ = [k0(x_{m+i}, x_j)]`.
/// Repeated states in `D₀` are removed first. If `K₀` cannot be factorised
/// the surrogate is `f_m ≡ 0` and the result is the mean over `D₁`.
pub fn estimate_cf(sk: &SteinKernel, data: &SplitDataset) -> Result<EstimateSummary> {
    let (train_s, train_f) = data.d0_deduped();
    let (eval_s, eval_f) = data.d1();
    let mut flags = weight_flags(sk);
    let removed = data.m() - train_s.len();
    if removed > 0 {
        flags.push(Flag::DuplicatesRemoved(removed));
    }
    let mut summary = EstimateSummary {
        value: 0.0,
        estimator: Estimator::CF,
        n_train: train_s.len(),
        n_eval: eval_s.len(),
        fitted_constant: None,
        bandwidth: Some(sk.bandwidth()),
        flags,
    };
    match limit_fit(sk, &train_s, &train_f)? {
        Some(lf) => {
            let k10 = sk.cross_gram(eval_s, &train_s, GramKind::K0)?;
            let correction = k10 * &lf.alpha;
            let total: f64 = eval_f.iter().zip(correction.iter()).map(|(f, c)| f - c).sum();
            summary.value = total / eval_s.len() as f64;
            summary.fitted_constant = Some(lf.beta);
        }
        None => {
            summary.value = eval_f.iter().sum::<f64>() / eval_f.len() as f64;
            summary.flags.push(Flag::FallbackZero);
        }
    }
    Ok(summary)
}

/// How each leave-one-out fold picks its bandwidth.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum LooBandwidth {
    /// Use the kernel's bandwidth for every fold.
    Fixed,
    /// Re-optimise the marginal likelihood on each fold's training set.
    PerFold(BandwidthSearch),
}

/// `I_n = n⁻¹ Σ_i [ f(x_i) − (f^{(−i)}(x_i) − ∫ f^{(−i)} dΠ) ]`, each fold fitted
/// in the same `c → ∞` form as [`estimate_cf`].
pub fn estimate_loo(
    sk: &SteinKernel,
    states: &[Vec<f64>],
    fvals: &[f64],
    policy: LooBandwidth,
) -> Result<EstimateSummary> {
    check_training(states, fvals)?;
    let n = states.len();
    if n < 2 {
        return Err(Error::Argument("leave-one-out needs at least two samples".into()));
    }
    let mut fold_fallbacks = 0;
    let mut search_failed = false;
    let mut total = 0.0;
    let mut train_s: Vec<Vec<f64>> = Vec::with_capacity(n - 1);
    let mut train_f: Vec<f64> = Vec::with_capacity(n - 1);
    for i in 0..n {
        train_s.clear();
        train_f.clear();
        for j in (0..n).filter(|&j| j != i) {
            train_s.push(states[j].clone());
            train_f.push(fvals[j]);
        }
        let fold_kernel = match policy {
            LooBandwidth::Fixed => sk.clone(),
            LooBandwidth::PerFold(search) => {
                let choice = optimize_bandwidth(sk, &train_s, &train_f, &search)?;
                search_failed |= choice.failed;
                sk.with_bandwidth(choice.h)?
            }
        };
        let correction = match limit_fit(&fold_kernel, &train_s, &train_f)? {
            Some(lf) => {
                let row = fold_kernel.cross_gram(&states[i..=i], &train_s, GramKind::K0)?;
                (row * &lf.alpha)[0]
            }
            None => {
                fold_fallbacks += 1;
                0.0
            }
        };
        total += fvals[i] - correction;
    }
    let mut flags = weight_flags(sk);
    if fold_fallbacks > 0 {
        flags.push(Flag::FoldFallbacks(fold_fallbacks));
    }
    if search_failed {
        flags.push(Flag::BandwidthSearchFailed);
    }
    Ok(EstimateSummary {
        value: total / n as f64,
        estimator: Estimator::LOOCF,
        n_train: n - 1,
        n_eval: n,
        fitted_constant: None,
        bandwidth: match policy {
            LooBandwidth::Fixed => Some(sk.bandwidth()),
            LooBandwidth::PerFold(_) => None,
        },
        flags,
    })
}

/// Mean squared error of `estimates` about `truth`, with its standard error
/// over replicates.
pub fn mse_summary(estimates: &[f64], truth: f64) -> Result<(f64, f64)> {
    if estimates.is_empty() {
        return Err(Error::Argument("no estimates to summarise".into()));
    }
    let r = estimates.len() as f64;
    let sq: Vec<f64> = estimates.iter().map(|e| (e - truth) * (e - truth)).collect();
    let mse = sq.iter().sum::<f64>() / r;
    if estimates.len() < 2 {
        return Ok((mse, 0.0));
    }
    let var = sq.iter().map(|s| (s - mse) * (s - mse)).sum::<f64>() / (r - 1.0);
    Ok((mse, (var / r).sqrt()))
}

//! Simulation harness: uniform target on `[0, 1]^d`, integrands
//! `f(x) = 1 + sin(2π ω x₁)` with true integral 1, and MC / CF / LOOCF compared
//! across sample sizes, kernel smoothness and (for dependent samples) random
//! walk step sizes.
//!
//! Output rows are emitted in a fixed order and every replicate draws from its
//! own derived seed, so a configuration and master seed determine the CSV
//! byte for byte. The one exception is `wall_time_ms`, which is left empty
//! unless timing is requested.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::time::Instant;

use rayon::prelude::*;
use serde::Serialize;

use crate::bandwidth::{optimal_split, optimize_bandwidth, split_index, BandwidthSearch};
use crate::boundary::{BoundaryWeight, ModifiedKernel};
use crate::error::{Error, Result};
use crate::estimator::{
    dedupe, estimate_cf, estimate_loo, estimate_mc, mse_summary, Estimator, LooBandwidth, SplitDataset,
};
use crate::kernel::{BaseKernel, RadialProfile};
use crate::sampling::{derive_seed, sample_iid_uniform, sample_torus_walk, ChainConfig};
use crate::stein::SteinKernel;

/// The integral of every bundled test function against the uniform target.
pub const TRUTH: f64 = 1.0;

pub const CSV_HEADER: &str = "estimator,d,b,omega,n,eps,mse,se,mean_estimate,fallback_count,wall_time_ms";

/// `1 + sin(2π ω x₁)`.
pub fn test_function(omega: u32, x: &[f64]) -> f64 {
    1.0 + (2.0 * std::f64::consts::PI * omega as f64 * x[0]).sin()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Design {
    /// Independent uniform samples.
    IidConvergence,
    /// Random walks on the torus, one row block per step size.
    TorusStepSweep,
}

impl std::str::FromStr for Design {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "iid" | "iidconvergence" => Ok(Design::IidConvergence),
            "torus" | "torusstepsweep" => Ok(Design::TorusStepSweep),
            _ => Err(Error::Config(format!("unknown design {s:?} (expected iid or torus)"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum BandwidthPolicy {
    Fixed(f64),
    /// Maximise the marginal likelihood on the training points of each fit.
    Optimize,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SplitPolicy {
    Fixed(f64),
    /// `ρ*` for the kernel's smoothness and the dimension.
    Optimal,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub design: Design,
    pub d: usize,
    pub omega: u32,
    pub b_list: Vec<u32>,
    pub n_list: Vec<usize>,
    pub eps_list: Vec<f64>,
    pub replicates: usize,
    pub rho: SplitPolicy,
    pub bandwidth: BandwidthPolicy,
    pub search: BandwidthSearch,
    pub c: f64,
    pub seed: u64,
    pub estimators: Vec<Estimator>,
    pub timing: bool,
    /// Worker threads; 0 lets the pool decide.
    pub threads: usize,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            design: Design::IidConvergence,
            d: 1,
            omega: 1,
            b_list: vec![1],
            n_list: Vec::new(),
            eps_list: Vec::new(),
            replicates: 100,
            rho: SplitPolicy::Fixed(0.5),
            bandwidth: BandwidthPolicy::Optimize,
            search: BandwidthSearch::default(),
            c: 1.0,
            seed: 0,
            estimators: Estimator::ALL.to_vec(),
            timing: false,
            threads: 0,
        }
    }
}

fn parse_list<T: std::str::FromStr>(key: &str, v: &str) -> Result<Vec<T>> {
    v.split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| s.parse::<T>().map_err(|_| Error::Config(format!("bad value {s:?} for {key}"))))
        .collect()
}

fn parse_one<T: std::str::FromStr>(key: &str, v: &str) -> Result<T> {
    v.trim().parse::<T>().map_err(|_| Error::Config(format!("bad value {v:?} for {key}")))
}

/// Parses flat `key = value` text. Blank lines and `#` comments are skipped.
pub fn parse_kv(text: &str) -> Result<BTreeMap<String, String>> {
    let mut out = BTreeMap::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| Error::Config(format!("line {}: expected key=value, got {raw:?}", lineno + 1)))?;
        out.insert(k.trim().trim_start_matches("--").to_string(), v.trim().to_string());
    }
    Ok(out)
}

impl ExperimentConfig {
    /// Builds a configuration from `key → value` pairs named like the CLI flags.
    pub fn from_pairs(pairs: &BTreeMap<String, String>) -> Result<Self> {
        let mut cfg = Self::default();
        for (k, v) in pairs {
            match k.as_str() {
                "design" => cfg.design = v.parse()?,
                "d" => cfg.d = parse_one(k, v)?,
                "omega" => cfg.omega = parse_one(k, v)?,
                "b" => cfg.b_list = parse_list(k, v)?,
                "n" => cfg.n_list = parse_list(k, v)?,
                "eps" => cfg.eps_list = parse_list(k, v)?,
                "reps" => cfg.replicates = parse_one(k, v)?,
                "rho" => {
                    cfg.rho = if v.eq_ignore_ascii_case("opt") {
                        SplitPolicy::Optimal
                    } else {
                        SplitPolicy::Fixed(parse_one(k, v)?)
                    }
                }
                "bandwidth" => {
                    cfg.bandwidth = if v.eq_ignore_ascii_case("opt") {
                        BandwidthPolicy::Optimize
                    } else {
                        BandwidthPolicy::Fixed(parse_one(k, v)?)
                    }
                }
                "c" => cfg.c = parse_one(k, v)?,
                "seed" => cfg.seed = parse_one(k, v)?,
                "estimators" => cfg.estimators = parse_list(k, v)?,
                "timing" => cfg.timing = parse_one(k, v)?,
                "h_lo" => cfg.search.lo = parse_one(k, v)?,
                "h_hi" => cfg.search.hi = parse_one(k, v)?,
                "h_iters" => cfg.search.iters = parse_one(k, v)?,
                _ => return Err(Error::Config(format!("unknown setting {k:?}"))),
            }
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Config(m));
        if self.d == 0 {
            return bad("d must be at least 1".into());
        }
        if self.omega == 0 {
            return bad("omega must be a positive integer".into());
        }
        if self.n_list.is_empty() {
            return bad("no sample sizes given (n)".into());
        }
        if self.n_list.iter().any(|&n| n < 2) {
            return bad("every sample size must be at least 2".into());
        }
        if self.b_list.is_empty() || self.b_list.iter().any(|&b| b > 2) {
            return bad("kernel smoothness list must be nonempty with values in {0, 1, 2}".into());
        }
        if self.design == Design::TorusStepSweep
            && (self.eps_list.is_empty() || self.eps_list.iter().any(|e| !(*e >= 0.0 && e.is_finite())))
        {
            return bad("torus design needs a nonempty list of nonnegative step sizes (eps)".into());
        }
        if self.replicates < 2 {
            return bad("need at least two replicates for standard errors".into());
        }
        if let SplitPolicy::Fixed(r) = self.rho {
            if !(r > 0.0 && r < 1.0) {
                return bad(format!("rho must lie in (0, 1) (got {r})"));
            }
        }
        if let BandwidthPolicy::Fixed(h) = self.bandwidth {
            if !(h > 0.0 && h.is_finite()) {
                return bad(format!("bandwidth must be positive (got {h})"));
            }
        }
        if !(self.c > 0.0 && self.c.is_finite()) {
            return bad(format!("c must be positive (got {})", self.c));
        }
        if self.estimators.is_empty() {
            return bad("no estimators selected".into());
        }
        self.search.validate()
    }

    fn kernel(&self, b: u32) -> Result<SteinKernel> {
        let h = match self.bandwidth {
            BandwidthPolicy::Fixed(h) => h,
            BandwidthPolicy::Optimize => 1.0,
        };
        let mk = ModifiedKernel::new(
            BaseKernel::new(RadialProfile::wendland(b, self.d)?, h)?,
            BoundaryWeight::unit_cube(self.d),
        )?;
        SteinKernel::uniform(mk).with_c(self.c)
    }

    fn split_fraction(&self, b: u32) -> Result<f64> {
        match self.rho {
            SplitPolicy::Fixed(r) => Ok(r),
            // The target is uniform (infinitely smooth), so the kernel's
            // smoothness b + 1 is the binding one.
            SplitPolicy::Optimal => optimal_split(b as f64 + 1.0, self.d),
        }
    }

    fn design_tag(&self) -> u64 {
        match self.design {
            Design::IidConvergence => 1,
            Design::TorusStepSweep => 2,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ResultRow {
    pub estimator: Estimator,
    pub d: usize,
    pub b: u32,
    pub omega: u32,
    pub n: usize,
    pub eps: Option<f64>,
    pub mse: f64,
    pub se: f64,
    pub mean_estimate: f64,
    pub fallback_count: usize,
    pub wall_time_ms: Option<f64>,
}

#[derive(Debug, Clone, Copy)]
struct Outcome {
    value: f64,
    fell_back: bool,
    millis: f64,
}

fn run_replicate(cfg: &ExperimentConfig, sk: &SteinKernel, b: u32, states: &[Vec<f64>]) -> Result<Vec<Outcome>> {
    let fvals: Vec<f64> = states.iter().map(|x| test_function(cfg.omega, x)).collect();
    let mc_value = estimate_mc(&fvals)?.value;
    let mut out = Vec::with_capacity(cfg.estimators.len());
    for est in &cfg.estimators {
        let start = Instant::now();
        let (value, fell_back) = match est {
            Estimator::MC => (mc_value, false),
            Estimator::CF => {
                let m = split_index(states.len(), cfg.split_fraction(b)?);
                match cf_once(cfg, sk, states, &fvals, m) {
                    Ok(s) => (s.value, s.fell_back()),
                    Err(_) => (estimate_mc(&fvals[m..])?.value, true),
                }
            }
            Estimator::LOOCF => {
                let (ds, df) = dedupe(states, &fvals, 0.0);
                if ds.len() < 2 {
                    (mc_value, true)
                } else {
                    let policy = match cfg.bandwidth {
                        BandwidthPolicy::Fixed(_) => LooBandwidth::Fixed,
                        BandwidthPolicy::Optimize => LooBandwidth::PerFold(cfg.search),
                    };
                    match estimate_loo(sk, &ds, &df, policy) {
                        Ok(s) => (s.value, s.fell_back()),
                        Err(_) => (mc_value, true),
                    }
                }
            }
        };
        out.push(Outcome { value, fell_back, millis: start.elapsed().as_secs_f64() * 1e3 });
    }
    Ok(out)
}

fn cf_once(
    cfg: &ExperimentConfig,
    sk: &SteinKernel,
    states: &[Vec<f64>],
    fvals: &[f64],
    m: usize,
) -> Result<crate::estimator::EstimateSummary> {
    let data = SplitDataset::with_split(states.to_vec(), fvals.to_vec(), m)?;
    let mut search_failed = false;
    let kernel = match cfg.bandwidth {
        BandwidthPolicy::Fixed(_) => sk.clone(),
        BandwidthPolicy::Optimize => {
            // D₀ only; D₁ never reaches the bandwidth search.
            let (ts, tf) = data.d0_deduped();
            let choice = optimize_bandwidth(sk, &ts, &tf, &cfg.search)?;
            search_failed = choice.failed;
            sk.with_bandwidth(choice.h)?
        }
    };
    let mut s = estimate_cf(&kernel, &data)?;
    if search_failed {
        s.flags.push(crate::estimator::Flag::BandwidthSearchFailed);
    }
    Ok(s)
}

fn draw(cfg: &ExperimentConfig, n: usize, eps_idx: usize, rep: usize) -> Result<Vec<Vec<f64>>> {
    let seed = derive_seed(
        cfg.seed,
        &[cfg.design_tag(), cfg.d as u64, cfg.omega as u64, n as u64, eps_idx as u64, rep as u64],
    );
    match cfg.design {
        Design::IidConvergence => Ok(sample_iid_uniform(n, cfg.d, seed)),
        Design::TorusStepSweep => sample_torus_walk(&ChainConfig::new(cfg.d, cfg.eps_list[eps_idx], n, seed)),
    }
}

/// Runs every cell of the grid and returns one row per (cell, estimator).
///
/// Row order: step size (torus design only), then smoothness, then sample
/// size, then estimators in the configured order.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<Vec<ResultRow>> {
    cfg.validate()?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.threads)
        .build()
        .map_err(|e| Error::Config(format!("cannot build worker pool: {e}")))?;
    pool.install(|| run_grid(cfg))
}

fn run_grid(cfg: &ExperimentConfig) -> Result<Vec<ResultRow>> {
    let eps_cells: Vec<(usize, Option<f64>)> = match cfg.design {
        Design::IidConvergence => vec![(0, None)],
        Design::TorusStepSweep => cfg.eps_list.iter().enumerate().map(|(i, e)| (i, Some(*e))).collect(),
    };
    let mut rows = Vec::new();
    for &(eps_idx, eps) in &eps_cells {
        for &b in &cfg.b_list {
            let sk = cfg.kernel(b)?;
            for &n in &cfg.n_list {
                let per_rep: Vec<Vec<Outcome>> = (0..cfg.replicates)
                    .into_par_iter()
                    .map(|rep| run_replicate(cfg, &sk, b, &draw(cfg, n, eps_idx, rep)?))
                    .collect::<Result<_>>()?;
                for (k, est) in cfg.estimators.iter().enumerate() {
                    let values: Vec<f64> = per_rep.iter().map(|o| o[k].value).collect();
                    let (mse, se) = mse_summary(&values, TRUTH)?;
                    rows.push(ResultRow {
                        estimator: *est,
                        d: cfg.d,
                        b,
                        omega: cfg.omega,
                        n,
                        eps,
                        mse,
                        se,
                        mean_estimate: values.iter().sum::<f64>() / values.len() as f64,
                        fallback_count: per_rep.iter().filter(|o| o[k].fell_back).count(),
                        wall_time_ms: cfg.timing.then(|| per_rep.iter().map(|o| o[k].millis).sum()),
                    });
                }
            }
        }
    }
    Ok(rows)
}

/// 17 significant digits, enough to round-trip any `f64`.
fn fmt_float(v: f64) -> String {
    format!("{v:.16e}")
}

pub fn to_csv(rows: &[ResultRow]) -> String {
    let mut s = String::from(CSV_HEADER);
    s.push('\n');
    for r in rows {
        let _ = writeln!(
            s,
            "{},{},{},{},{},{},{},{},{},{},{}",
            r.estimator,
            r.d,
            r.b,
            r.omega,
            r.n,
            r.eps.map(fmt_float).unwrap_or_default(),
            fmt_float(r.mse),
            fmt_float(r.se),
            fmt_float(r.mean_estimate),
            r.fallback_count,
            r.wall_time_ms.map(fmt_float).unwrap_or_default(),
        );
    }
    s
}

pub fn to_json(rows: &[ResultRow]) -> Result<String> {
    serde_json::to_string_pretty(rows).map_err(|e| Error::Argument(format!("cannot serialise rows: {e}")))
}

/// Parses CSV produced by [`to_csv`].
pub fn from_csv(text: &str) -> Result<Vec<ResultRow>> {
    let mut lines = text.lines();
    match lines.next() {
        Some(h) if h.trim() == CSV_HEADER => {}
        _ => return Err(Error::Argument("missing or unexpected CSV header".into())),
    }
    let opt = |s: &str| -> Result<Option<f64>> {
        if s.is_empty() {
            Ok(None)
        } else {
            parse_one("float", s).map(Some)
        }
    };
    lines
        .filter(|l| !l.trim().is_empty())
        .map(|line| {
            let f: Vec<&str> = line.split(',').collect();
            if f.len() != 11 {
                return Err(Error::Argument(format!("expected 11 columns, got {}: {line:?}", f.len())));
            }
            Ok(ResultRow {
                estimator: f[0].parse()?,
                d: parse_one("d", f[1])?,
                b: parse_one("b", f[2])?,
                omega: parse_one("omega", f[3])?,
                n: parse_one("n", f[4])?,
                eps: opt(f[5])?,
                mse: parse_one("mse", f[6])?,
                se: parse_one("se", f[7])?,
                mean_estimate: parse_one("mean_estimate", f[8])?,
                fallback_count: parse_one("fallback_count", f[9])?,
                wall_time_ms: opt(f[10])?,
            })
        })
        .collect()
}

/// Least-squares slope of `log mse` against `log n`.
pub fn fit_slope(ns: &[usize], mses: &[f64]) -> Result<f64> {
    if ns.len() != mses.len() || ns.len() < 3 {
        return Err(Error::Argument("slope fit needs at least three (n, mse) pairs".into()));
    }
    if ns.contains(&0) || mses.iter().any(|&m| !(m > 0.0 && m.is_finite())) {
        return Err(Error::Argument("slope fit needs positive n and mse".into()));
    }
    let xs: Vec<f64> = ns.iter().map(|&n| (n as f64).ln()).collect();
    let ys: Vec<f64> = mses.iter().map(|m| m.ln()).collect();
    let k = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / k;
    let my = ys.iter().sum::<f64>() / k;
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    if sxx == 0.0 {
        return Err(Error::Argument("slope fit needs at least two distinct n".into()));
    }
    Ok(sxy / sxx)
}

/// Grouping key for slope summaries.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct SlopeGroup {
    pub d: usize,
    pub b: u32,
    pub omega: u32,
    pub eps: Option<f64>,
}

/// MSE slope against `n` for each `(d, b, omega, eps)` group of `estimator`
/// rows, in order of first appearance.
pub fn slopes_by_group(rows: &[ResultRow], estimator: Estimator) -> Vec<(SlopeGroup, Result<f64>)> {
    let mut groups: Vec<(SlopeGroup, Vec<usize>, Vec<f64>)> = Vec::new();
    for r in rows.iter().filter(|r| r.estimator == estimator) {
        let key = SlopeGroup { d: r.d, b: r.b, omega: r.omega, eps: r.eps };
        match groups.iter_mut().find(|g| g.0 == key) {
            Some(g) => {
                g.1.push(r.n);
                g.2.push(r.mse);
            }
            None => groups.push((key, vec![r.n], vec![r.mse])),
        }
    }
    groups.into_iter().map(|(k, ns, ms)| (k, fit_slope(&ns, &ms))).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn test_function_values() {
        assert_eq!(test_function(1, &[0.0]), 1.0);
        assert!((test_function(1, &[0.25, 0.9]) - 2.0).abs() < 1e-15);
        for omega in [1, 3] {
            let n = 10_000;
            let q = (0..n).map(|i| test_function(omega, &[(i as f64 + 0.5) / n as f64])).sum::<f64>() / n as f64;
            assert!((q - 1.0).abs() < 1e-10, "{q}");
        }
    }

    #[test]
    fn slope_examples() {
        let ns = [16, 32, 64, 128];
        let inv: Vec<f64> = ns.iter().map(|&n| 1.0 / n as f64).collect();
        assert!((fit_slope(&ns, &inv).unwrap() + 1.0).abs() < 1e-12);
        let cube: Vec<f64> = ns.iter().map(|&n| (n as f64).powi(-3)).collect();
        assert!((fit_slope(&ns, &cube).unwrap() + 3.0).abs() < 1e-12);
        assert!(fit_slope(&ns[..2], &inv[..2]).is_err());
        assert!(fit_slope(&ns[..3], &[1.0, 0.0, 1.0]).is_err());
    }

    #[test]
    fn noisy_slope_recovered() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let ns = [16, 32, 64, 128, 256, 512];
        let ms: Vec<f64> = ns.iter().map(|&n| (n as f64).powi(-2) * (0.2 * rng.random::<f64>() - 0.1).exp()).collect();
        assert!((fit_slope(&ns, &ms).unwrap() + 2.0).abs() < 0.15);
    }

    #[test]
    fn kv_parsing() {
        let kv = parse_kv("# comment\ndesign = torus\n\nn=8,16 # trailing\n--eps=0.1,0.5\n").unwrap();
        assert_eq!(kv["design"], "torus");
        assert_eq!(kv["n"], "8,16");
        assert_eq!(kv["eps"], "0.1,0.5");
        assert!(parse_kv("oops").is_err());
        let cfg = ExperimentConfig::from_pairs(&kv).unwrap();
        assert_eq!(cfg.design, Design::TorusStepSweep);
        assert_eq!(cfg.n_list, vec![8, 16]);
        let mut bad = kv.clone();
        bad.insert("wat".into(), "1".into());
        assert!(ExperimentConfig::from_pairs(&bad).is_err());
        let mut missing = kv;
        missing.remove("n");
        assert!(ExperimentConfig::from_pairs(&missing).is_err());
    }

    fn small(design: Design) -> ExperimentConfig {
        ExperimentConfig { design, n_list: vec![8], eps_list: vec![0.3], replicates: 2, seed: 3, ..Default::default() }
    }

    #[test]
    fn smoke_single_cell() {
        let rows = run_experiment(&small(Design::IidConvergence)).unwrap();
        assert_eq!(rows.len(), 3);
        assert_eq!(rows.iter().map(|r| r.estimator).collect::<Vec<_>>(), Estimator::ALL.to_vec());
        assert!(rows.iter().all(|r| r.mse.is_finite() && r.se >= 0.0 && r.eps.is_none() && r.wall_time_ms.is_none()));
        let torus = run_experiment(&small(Design::TorusStepSweep)).unwrap();
        assert!(torus.iter().all(|r| r.eps == Some(0.3)));
    }

    #[test]
    fn csv_round_trips() {
        let mut cfg = small(Design::TorusStepSweep);
        cfg.timing = true;
        let rows = run_experiment(&cfg).unwrap();
        let csv = to_csv(&rows);
        assert!(csv.starts_with(CSV_HEADER));
        assert_eq!(from_csv(&csv).unwrap(), rows);
        let json: serde_json::Value = serde_json::from_str(&to_json(&rows).unwrap()).unwrap();
        assert_eq!(json.as_array().unwrap().len(), rows.len());
        assert_eq!(json[0]["estimator"], "MC");
    }

    #[test]
    fn runs_are_deterministic_across_thread_counts() {
        let mut cfg = small(Design::IidConvergence);
        cfg.replicates = 6;
        cfg.threads = 1;
        let a = to_csv(&run_experiment(&cfg).unwrap());
        cfg.threads = 4;
        let b = to_csv(&run_experiment(&cfg).unwrap());
        assert_eq!(a, b);
    }

    #[test]
    fn degenerate_chain_is_counted_not_fatal() {
        let mut cfg = small(Design::TorusStepSweep);
        cfg.eps_list = vec![0.0];
        let rows = run_experiment(&cfg).unwrap();
        let loo = rows.iter().find(|r| r.estimator == Estimator::LOOCF).unwrap();
        assert_eq!(loo.fallback_count, 2);
        // All states sit at the origin where f = 1.
        assert!(rows.iter().all(|r| r.mse == 0.0));
    }

    #[test]
    fn slopes_group_rows() {
        let mk = |est, b, n: usize, mse| ResultRow {
            estimator: est,
            d: 1,
            b,
            omega: 1,
            n,
            eps: None,
            mse,
            se: 0.0,
            mean_estimate: 1.0,
            fallback_count: 0,
            wall_time_ms: None,
        };
        let mut rows = Vec::new();
        for n in [10, 20, 40] {
            rows.push(mk(Estimator::CF, 1, n, (n as f64).powi(-3)));
            rows.push(mk(Estimator::CF, 2, n, (n as f64).powi(-2)));
            rows.push(mk(Estimator::MC, 1, n, 1.0 / n as f64));
        }
        let s = slopes_by_group(&rows, Estimator::CF);
        assert_eq!(s.len(), 2);
        assert!((s[0].1.as_ref().unwrap() + 3.0).abs() < 1e-12);
        assert!((s[1].1.as_ref().unwrap() + 2.0).abs() < 1e-12);
    }
}

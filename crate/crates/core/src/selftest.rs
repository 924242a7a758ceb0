//! Quick invariant checks runnable from the CLI (`steinctrl selftest`).

use crate::boundary::{BoundaryWeight, ModifiedKernel};
use crate::estimator::{estimate_cf, fit, FitStatus, SplitDataset};
use crate::kernel::{BaseKernel, RadialProfile};
use crate::sampling::{fill_distance, sample_iid_uniform, unit_grid};
use crate::stein::SteinKernel;
use crate::Domain;

#[derive(Debug, Clone)]
pub struct SelfCheck {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

fn check(name: &'static str, run: impl FnOnce() -> crate::Result<(bool, String)>) -> SelfCheck {
    match run() {
        Ok((passed, detail)) => SelfCheck { name, passed, detail },
        Err(e) => SelfCheck { name, passed: false, detail: format!("error: {e}") },
    }
}

fn rel_err(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(1e-8)
}

fn derivative_check() -> crate::Result<(bool, String)> {
    let mut worst: f64 = 0.0;
    for d in 1..=3 {
        let profiles = [
            RadialProfile::wendland(0, d)?,
            RadialProfile::wendland(1, d)?,
            RadialProfile::wendland(2, d)?,
            RadialProfile::matern72(d)?,
        ];
        for p in profiles {
            let k = BaseKernel::new(p, 0.7)?;
            let pts = sample_iid_uniform(20, 2 * d, 11 + d as u64);
            for pt in &pts {
                let (x, xp) = pt.split_at(d);
                let g = k.grad_x(x, xp)?;
                for i in 0..d {
                    let e = 1e-6;
                    let mut a = x.to_vec();
                    let mut b = x.to_vec();
                    a[i] += e;
                    b[i] -= e;
                    let fd = (k.eval(&a, xp)? - k.eval(&b, xp)?) / (2.0 * e);
                    if (fd - g[i]).abs() > 1e-8 {
                        worst = worst.max(rel_err(g[i], fd));
                    }
                }
            }
        }
    }
    Ok((worst <= 1e-5, format!("worst relative gradient error {worst:.2e}")))
}

fn zero_mean_check() -> crate::Result<(bool, String)> {
    let mk = ModifiedKernel::new(BaseKernel::new(RadialProfile::wendland(1, 1)?, 0.5)?, BoundaryWeight::unit_cube(1))?;
    let sk = SteinKernel::uniform(mk);
    let n = 10_000;
    let mut worst: f64 = 0.0;
    for xp in [0.1, 0.37, 0.5, 0.9] {
        let mut acc = 0.0;
        for i in 0..n {
            acc += sk.k0(&[(i as f64 + 0.5) / n as f64], &[xp])?;
        }
        worst = worst.max((acc / n as f64).abs());
    }
    Ok((worst <= 1e-6, format!("largest |∫ k0(·, x') dΠ| = {worst:.2e}")))
}

fn constant_integrand_check() -> crate::Result<(bool, String)> {
    let mk = ModifiedKernel::new(BaseKernel::new(RadialProfile::wendland(1, 2)?, 0.8)?, BoundaryWeight::unit_cube(2))?;
    let sk = SteinKernel::uniform(mk);
    let states = sample_iid_uniform(24, 2, 5);
    let data = SplitDataset::new(states, vec![3.25; 24], 0.5)?;
    let est = estimate_cf(&sk, &data)?;
    let err = (est.value - 3.25).abs();
    Ok((err <= 1e-10, format!("|estimate - 3.25| = {err:.2e}")))
}

fn fallback_check() -> crate::Result<(bool, String)> {
    let mk = ModifiedKernel::new(BaseKernel::new(RadialProfile::wendland(1, 1)?, 0.5)?, BoundaryWeight::unit_cube(1))?;
    let sk = SteinKernel::uniform(mk);
    let states = vec![vec![0.3], vec![0.3], vec![0.6], vec![0.8]];
    let f = fit(&sk, &states, &[1.0, 2.0, 3.0, 4.0])?;
    Ok((f.status == FitStatus::FallbackZero && f.integral() == 0.0, format!("status {:?}", f.status)))
}

fn fill_distance_check() -> crate::Result<(bool, String)> {
    let pts = unit_grid(5, 2);
    let rep = fill_distance(&pts, &Domain::unit_cube(2), 1e-3)?;
    let expected = 0.125 * 2f64.sqrt();
    let err = (rep.value - expected).abs();
    Ok((err <= rep.slack, format!("grid fill distance {:.6} vs {expected:.6}", rep.value)))
}

/// Runs every check; all should pass on a healthy build.
pub fn run_all() -> Vec<SelfCheck> {
    vec![
        check("kernel gradients match finite differences", derivative_check),
        check("Stein kernel sections integrate to zero", zero_mean_check),
        check("constant integrand recovered exactly", constant_integrand_check),
        check("duplicate states fall back to zero", fallback_check),
        check("fill distance of a regular grid", fill_distance_check),
    ]
}

#[cfg(test)]
mod tests {
    #[test]
    fn all_pass() {
        for c in super::run_all() {
            assert!(c.passed, "{}: {}", c.name, c.detail);
        }
    }
}

//! Boundary weights `δ` and the modified kernel `k(x, x') = δ(x) δ(x') k̃(x, x')`.
//!
//! Every weight except [`BoundaryWeight::Constant`] vanishes on the faces of
//! its box, which is what makes Stein-kernel sections integrate to zero.

use crate::error::{check_dim, Error, Result};
use crate::kernel::BaseKernel;

/// An axis-aligned box `∏ [lo_i, hi_i]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Domain {
    lo: Vec<f64>,
    hi: Vec<f64>,
}

impl Domain {
    pub fn new(lo: Vec<f64>, hi: Vec<f64>) -> Result<Self> {
        if lo.is_empty() || lo.len() != hi.len() {
            return Err(Error::Config("box bounds must be nonempty and of equal length".into()));
        }
        if lo.iter().zip(&hi).any(|(a, b)| !(a.is_finite() && b.is_finite() && a < b)) {
            return Err(Error::Config(format!("degenerate box {lo:?} .. {hi:?}")));
        }
        Ok(Self { lo, hi })
    }

    pub fn unit_cube(dim: usize) -> Self {
        Self { lo: vec![0.0; dim], hi: vec![1.0; dim] }
    }

    pub fn cube(dim: usize, lo: f64, hi: f64) -> Result<Self> {
        Self::new(vec![lo; dim], vec![hi; dim])
    }

    pub fn dim(&self) -> usize {
        self.lo.len()
    }

    pub fn lo(&self) -> &[f64] {
        &self.lo
    }

    pub fn hi(&self) -> &[f64] {
        &self.hi
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        x.len() == self.dim() && x.iter().zip(self.lo.iter().zip(&self.hi)).all(|(v, (a, b))| *a <= *v && *v <= *b)
    }

    fn contains_strictly(&self, inner: &Domain) -> bool {
        inner.dim() == self.dim() && (0..self.dim()).all(|i| self.lo[i] < inner.lo[i] && inner.hi[i] < self.hi[i])
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum BoundaryWeight {
    /// `∏ t_i (1 − t_i)` with `t` the affine image of `x` in the unit cube.
    UnitCubeProduct(Domain),
    /// Identically 1 on `inner`, decaying smoothly to 0 on the faces of `outer`.
    SmoothPlateau { outer: Domain, inner: Domain },
    /// `δ ≡ 1`. The resulting Stein kernel is no longer guaranteed to have
    /// zero-mean sections.
    Constant(Domain),
}

impl BoundaryWeight {
    pub fn unit_cube(dim: usize) -> Self {
        Self::UnitCubeProduct(Domain::unit_cube(dim))
    }

    pub fn plateau(outer: Domain, inner: Domain) -> Result<Self> {
        if !outer.contains_strictly(&inner) {
            return Err(Error::Config("plateau box must lie strictly inside the outer box".into()));
        }
        Ok(Self::SmoothPlateau { outer, inner })
    }

    pub fn domain(&self) -> &Domain {
        match self {
            Self::UnitCubeProduct(d) | Self::Constant(d) => d,
            Self::SmoothPlateau { outer, .. } => outer,
        }
    }

    pub fn dim(&self) -> usize {
        self.domain().dim()
    }

    pub fn vanishes_on_boundary(&self) -> bool {
        !matches!(self, Self::Constant(_))
    }

    fn check(&self, x: &[f64]) -> Result<()> {
        check_dim(self.dim(), x.len())?;
        if !self.domain().contains(x) {
            return Err(Error::Argument(format!("point {x:?} lies outside the weight's domain")));
        }
        Ok(())
    }

    pub fn eval(&self, x: &[f64]) -> Result<f64> {
        self.check(x)?;
        let mut g = vec![0.0; x.len()];
        Ok(self.value_grad(x, &mut g))
    }

    pub fn grad(&self, x: &[f64]) -> Result<Vec<f64>> {
        self.check(x)?;
        let mut g = vec![0.0; x.len()];
        self.value_grad(x, &mut g);
        Ok(g)
    }

    /// Writes `∇δ(x)` into `grad` and returns `δ(x)`. No domain check.
    pub(crate) fn value_grad(&self, x: &[f64], grad: &mut [f64]) -> f64 {
        let d = x.len();
        // Per-coordinate factors and their derivatives.
        let mut f = vec![0.0; d];
        let mut df = vec![0.0; d];
        match self {
            Self::Constant(_) => {
                grad.iter_mut().for_each(|g| *g = 0.0);
                return 1.0;
            }
            Self::UnitCubeProduct(dom) => {
                for i in 0..d {
                    let w = dom.hi[i] - dom.lo[i];
                    let t = (x[i] - dom.lo[i]) / w;
                    f[i] = t * (1.0 - t);
                    df[i] = (1.0 - 2.0 * t) / w;
                }
            }
            Self::SmoothPlateau { outer, inner } => {
                for i in 0..d {
                    let (v, dv) = plateau_factor(x[i], outer.lo[i], inner.lo[i], inner.hi[i], outer.hi[i]);
                    f[i] = v;
                    df[i] = dv;
                }
            }
        }
        for i in 0..d {
            let others: f64 = (0..d).filter(|&j| j != i).map(|j| f[j]).product();
            grad[i] = df[i] * others;
        }
        f.iter().product()
    }
}

/// Smooth step from 1 at `s = 0` to 0 at `s = 1`, flat to all orders at both ends.
fn smooth_step(s: f64) -> (f64, f64) {
    if s <= 0.0 {
        return (1.0, 0.0);
    }
    if s >= 1.0 {
        return (0.0, 0.0);
    }
    let e = 1.0 / (1.0 - s) - 1.0 / s;
    let v = 1.0 / (1.0 + e.exp());
    let de = 1.0 / ((1.0 - s) * (1.0 - s)) + 1.0 / (s * s);
    let dv = -v * (1.0 - v) * de;
    (v, if dv.is_finite() { dv } else { 0.0 })
}

fn plateau_factor(t: f64, lo: f64, a: f64, b: f64, hi: f64) -> (f64, f64) {
    if t < a {
        let w = a - lo;
        let (v, dv) = smooth_step((a - t) / w);
        (v, -dv / w)
    } else if t > b {
        let w = hi - b;
        let (v, dv) = smooth_step((t - b) / w);
        (v, dv / w)
    } else {
        (1.0, 0.0)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ModifiedKernel {
    base: BaseKernel,
    weight: BoundaryWeight,
}

/// A point together with its boundary weight and weight gradient.
#[derive(Debug, Clone)]
pub(crate) struct Weighted<'a> {
    pub x: &'a [f64],
    pub delta: f64,
    pub grad: Vec<f64>,
}

/// Everything the Stein kernel needs from one pair of weighted points.
#[derive(Debug, Clone, Copy)]
pub(crate) struct ModifiedPair {
    pub kt: f64,
    pub grad_scale: f64,
    pub cross: f64,
}

impl ModifiedKernel {
    pub fn new(base: BaseKernel, weight: BoundaryWeight) -> Result<Self> {
        check_dim(base.dim(), weight.dim())?;
        Ok(Self { base, weight })
    }

    pub fn base(&self) -> &BaseKernel {
        &self.base
    }

    pub fn weight(&self) -> &BoundaryWeight {
        &self.weight
    }

    pub fn dim(&self) -> usize {
        self.base.dim()
    }

    pub fn with_bandwidth(&self, h: f64) -> Result<Self> {
        Ok(Self { base: self.base.with_bandwidth(h)?, weight: self.weight.clone() })
    }

    pub(crate) fn weigh<'a>(&self, x: &'a [f64]) -> Weighted<'a> {
        let mut grad = vec![0.0; x.len()];
        let delta = self.weight.value_grad(x, &mut grad);
        Weighted { x, delta, grad }
    }

    fn checked<'a>(&self, x: &'a [f64]) -> Result<Weighted<'a>> {
        self.weight.check(x)?;
        Ok(self.weigh(x))
    }

    /// Base-kernel quantities plus the full cross-divergence of `k`.
    pub(crate) fn pair(&self, p: &Weighted, q: &Weighted) -> ModifiedPair {
        let rp = self.base.pair(p.x, q.x);
        // g·g' k̃ + [δ g'·∇_x k̃ − δ' g·∇_x k̃] + δ δ' ∇_x·∇_x' k̃, with ∇_x k̃ = s (x − x')
        let mut gg = 0.0;
        let mut g_diff = 0.0;
        let mut gp_diff = 0.0;
        for i in 0..p.x.len() {
            let diff = p.x[i] - q.x[i];
            gg += p.grad[i] * q.grad[i];
            g_diff += p.grad[i] * diff;
            gp_diff += q.grad[i] * diff;
        }
        let s = rp.grad_scale;
        let dd = p.delta * q.delta;
        let mixed = (p.delta * s) * gp_diff + -((q.delta * s) * g_diff);
        ModifiedPair { kt: rp.value, grad_scale: s, cross: rp.value * gg + mixed + dd * rp.cross_div }
    }

    pub fn eval(&self, x: &[f64], xp: &[f64]) -> Result<f64> {
        let (p, q) = (self.checked(x)?, self.checked(xp)?);
        Ok(p.delta * q.delta * self.base.pair(x, xp).value)
    }

    pub fn grad_x(&self, x: &[f64], xp: &[f64]) -> Result<Vec<f64>> {
        let (p, q) = (self.checked(x)?, self.checked(xp)?);
        let rp = self.base.pair(x, xp);
        let dd = p.delta * q.delta;
        Ok((0..x.len()).map(|i| p.grad[i] * q.delta * rp.value + dd * rp.grad_scale * (x[i] - xp[i])).collect())
    }

    pub fn grad_xp(&self, x: &[f64], xp: &[f64]) -> Result<Vec<f64>> {
        let (p, q) = (self.checked(x)?, self.checked(xp)?);
        let rp = self.base.pair(x, xp);
        let dd = p.delta * q.delta;
        Ok((0..x.len()).map(|i| p.delta * q.grad[i] * rp.value - dd * rp.grad_scale * (x[i] - xp[i])).collect())
    }

    pub fn cross_div(&self, x: &[f64], xp: &[f64]) -> Result<f64> {
        let (p, q) = (self.checked(x)?, self.checked(xp)?);
        Ok(self.pair(&p, &q).cross)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernel::RadialProfile;

    fn fd_grad(f: impl Fn(&[f64]) -> f64, x: &[f64]) -> Vec<f64> {
        let e = 1e-6;
        (0..x.len())
            .map(|i| {
                let mut a = x.to_vec();
                let mut b = x.to_vec();
                a[i] += e;
                b[i] -= e;
                (f(&a) - f(&b)) / (2.0 * e)
            })
            .collect()
    }

    fn assert_close(a: f64, b: f64, rel: f64, abs: f64) {
        assert!((a - b).abs() <= rel * b.abs() + abs, "{a} vs {b}");
    }

    #[test]
    fn unit_cube_values() {
        let w = BoundaryWeight::unit_cube(2);
        assert_eq!(w.eval(&[0.5, 0.5]).unwrap(), 0.0625);
        for x in [[0.0, 0.3], [1.0, 0.7], [0.2, 0.0], [0.9, 1.0]] {
            assert_eq!(w.eval(&x).unwrap(), 0.0);
        }
        let w1 = BoundaryWeight::unit_cube(1);
        assert_eq!(w1.grad(&[0.5]).unwrap(), vec![0.0]);
        assert_eq!(w1.grad(&[0.25]).unwrap(), vec![0.5]);
        assert!(matches!(w1.eval(&[1.5]), Err(Error::Argument(_))));
    }

    #[test]
    fn general_box_vanishes_exactly_on_faces() {
        let w = BoundaryWeight::UnitCubeProduct(Domain::new(vec![-0.3, 2.0], vec![0.7, 5.1]).unwrap());
        assert_eq!(w.eval(&[-0.3, 3.0]).unwrap(), 0.0);
        assert_eq!(w.eval(&[0.1, 5.1]).unwrap(), 0.0);
        assert!(w.eval(&[0.2, 3.55]).unwrap() > 0.0);
    }

    fn plateau(d: usize) -> BoundaryWeight {
        BoundaryWeight::plateau(Domain::cube(d, -10.0, 10.0).unwrap(), Domain::cube(d, -9.0, 9.0).unwrap()).unwrap()
    }

    #[test]
    fn plateau_values() {
        let w = plateau(3);
        assert_eq!(w.eval(&[0.0, 0.0, 0.0]).unwrap(), 1.0);
        assert_eq!(w.grad(&[8.9, -3.0, 0.0]).unwrap(), vec![0.0; 3]);
        assert_eq!(w.eval(&[-10.0, 0.0, 0.0]).unwrap(), 0.0);
        assert_eq!(w.eval(&[0.0, 10.0, 5.0]).unwrap(), 0.0);
        let v = w.eval(&[9.5, 0.0, 0.0]).unwrap();
        assert!(v > 0.0 && v < 1.0);
        assert!(BoundaryWeight::plateau(Domain::unit_cube(1), Domain::unit_cube(1)).is_err());
    }

    #[test]
    fn weight_gradients_match_finite_differences() {
        let weights = [
            BoundaryWeight::unit_cube(2),
            BoundaryWeight::UnitCubeProduct(Domain::new(vec![-1.0, 0.0], vec![2.0, 0.5]).unwrap()),
            plateau(2),
        ];
        let pts = [[0.13, 0.41], [0.3, 0.2], [0.77, 0.05]];
        for w in &weights {
            for p in pts {
                // Map into each domain.
                let dom = w.domain();
                let x: Vec<f64> = (0..2).map(|i| dom.lo()[i] + p[i] * (dom.hi()[i] - dom.lo()[i])).collect();
                let g = w.grad(&x).unwrap();
                let fd = fd_grad(|y| w.eval(y).unwrap(), &x);
                for i in 0..2 {
                    assert_close(g[i], fd[i], 1e-5, 1e-8);
                }
            }
        }
        // Inside the transition band of the plateau.
        let w = plateau(1);
        for t in [-9.9, -9.5, -9.1, 9.05, 9.5, 9.95] {
            assert_close(w.grad(&[t]).unwrap()[0], fd_grad(|y| w.eval(y).unwrap(), &[t])[0], 1e-5, 1e-8);
        }
    }

    fn mk(weight: BoundaryWeight, b: u32, h: f64) -> ModifiedKernel {
        let d = weight.dim();
        ModifiedKernel::new(BaseKernel::new(RadialProfile::wendland(b, d).unwrap(), h).unwrap(), weight).unwrap()
    }

    #[test]
    fn constant_weight_reduces_to_base() {
        let k = mk(BoundaryWeight::Constant(Domain::unit_cube(2)), 1, 0.8);
        let (x, y) = ([0.2, 0.7], [0.5, 0.4]);
        let b = *k.base();
        assert_eq!(k.eval(&x, &y).unwrap(), b.eval(&x, &y).unwrap());
        assert_eq!(k.grad_x(&x, &y).unwrap(), b.grad_x(&x, &y).unwrap());
        assert_eq!(k.cross_div(&x, &y).unwrap(), b.cross_div(&x, &y).unwrap());
    }

    #[test]
    fn boundary_point_kills_kernel() {
        let k = mk(BoundaryWeight::unit_cube(1), 0, 1.0);
        assert_eq!(k.eval(&[0.0], &[0.4]).unwrap(), 0.0);
        assert_eq!(k.grad_xp(&[0.0], &[0.4]).unwrap(), vec![0.0]);
        assert_eq!(k.eval(&[0.6], &[1.0]).unwrap(), 0.0);
    }

    #[test]
    fn modified_derivatives_match_finite_differences() {
        let cases: Vec<(ModifiedKernel, Vec<f64>, Vec<f64>)> = vec![
            (mk(BoundaryWeight::unit_cube(1), 0, 1.0), vec![0.4], vec![0.6]),
            (mk(BoundaryWeight::unit_cube(2), 1, 0.7), vec![0.2, 0.6], vec![0.5, 0.35]),
            (mk(plateau(2), 2, 4.0), vec![-9.4, 1.0], vec![-8.0, 2.5]),
        ];
        for (k, x, y) in cases {
            let gx = k.grad_x(&x, &y).unwrap();
            let gy = k.grad_xp(&x, &y).unwrap();
            let fx = fd_grad(|z| k.eval(z, &y).unwrap(), &x);
            let fy = fd_grad(|z| k.eval(&x, z).unwrap(), &y);
            for i in 0..x.len() {
                assert_close(gx[i], fx[i], 1e-5, 1e-8);
                assert_close(gy[i], fy[i], 1e-5, 1e-8);
            }
            // ∇_x · ∇_x' k as the trace of the mixed Hessian of finite differences of the analytic ∇_x'.
            let e = 1e-6;
            let mut fd_cross = 0.0;
            for i in 0..x.len() {
                let mut a = x.clone();
                let mut b = x.clone();
                a[i] += e;
                b[i] -= e;
                fd_cross += (k.grad_xp(&a, &y).unwrap()[i] - k.grad_xp(&b, &y).unwrap()[i]) / (2.0 * e);
            }
            assert_close(k.cross_div(&x, &y).unwrap(), fd_cross, 1e-5, 1e-8);
        }
    }
}

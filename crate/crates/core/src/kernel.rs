//! Radial profiles and the isotropic base kernel `k̃(x, x') = φ(‖x − x'‖ / h)`.
//!
//! Wendland profiles are the compactly supported piecewise polynomials of
//! smoothness `b ∈ {0, 1, 2}` with exponent `ℓ = ⌊d/2 + b + 2⌋`, normalised so
//! that `φ(0) = 1`. The Matérn profile is the order-7/2 member of the Matérn
//! family, `φ(z) = (1 + s + 2s²/5 + s³/15) e^{-s}` with `s = √7 z`.

use crate::error::{check_dim, Error, Result};

/// Below this value of `r / h` the coincident-point limits are used.
const COINCIDENT_RATIO: f64 = 1e-12;

const SQRT_7: f64 = 2.645_751_311_064_590_6;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Family {
    /// Compactly supported on `z < 1`.
    Wendland {
        smoothness: u32,
    },
    Matern72,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RadialProfile {
    family: Family,
    dim: usize,
}

impl RadialProfile {
    pub fn wendland(smoothness: u32, dim: usize) -> Result<Self> {
        if smoothness > 2 {
            return Err(Error::Config(format!("Wendland smoothness must be 0, 1 or 2 (got {smoothness})")));
        }
        Self::new(Family::Wendland { smoothness }, dim)
    }

    pub fn matern72(dim: usize) -> Result<Self> {
        Self::new(Family::Matern72, dim)
    }

    pub fn new(family: Family, dim: usize) -> Result<Self> {
        if dim == 0 {
            return Err(Error::Config("dimension must be at least 1".into()));
        }
        if let Family::Wendland { smoothness } = family {
            if smoothness > 2 {
                return Err(Error::Config(format!("Wendland smoothness must be 0, 1 or 2 (got {smoothness})")));
            }
        }
        Ok(Self { family, dim })
    }

    pub fn family(&self) -> Family {
        self.family
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Wendland exponent `ℓ = ⌊d/2 + b + 2⌋`; `None` for Matérn.
    pub fn ell(&self) -> Option<u32> {
        match self.family {
            Family::Wendland { smoothness } => Some((self.dim as u32 + 2 * smoothness + 4) / 2),
            Family::Matern72 => None,
        }
    }

    /// Support radius in units of `z`, if compact.
    pub fn support(&self) -> Option<f64> {
        match self.family {
            Family::Wendland { .. } => Some(1.0),
            Family::Matern72 => None,
        }
    }

    pub fn phi(&self, z: f64) -> f64 {
        debug_assert!(z >= 0.0);
        match self.family {
            Family::Wendland { smoothness } => {
                let l = self.ell().unwrap() as f64;
                let p = (1.0 - z).max(0.0);
                let pw = |k: i32| p.powi(l as i32 + k);
                match smoothness {
                    0 => ((l + 1.0) * z + 1.0) * pw(1),
                    1 => {
                        let poly = (l * l + 4.0 * l + 3.0) * z * z + 3.0 * (l + 2.0) * z + 3.0;
                        poly * pw(2) / 3.0
                    }
                    _ => {
                        let poly = (l.powi(3) + 9.0 * l * l + 23.0 * l + 15.0) * z.powi(3)
                            + (6.0 * l * l + 36.0 * l + 45.0) * z * z
                            + 15.0 * (l + 3.0) * z
                            + 15.0;
                        poly * pw(3) / 15.0
                    }
                }
            }
            Family::Matern72 => {
                let s = SQRT_7 * z;
                (1.0 + s + 0.4 * s * s + s.powi(3) / 15.0) * (-s).exp()
            }
        }
    }

    pub fn phi_d1(&self, z: f64) -> f64 {
        debug_assert!(z >= 0.0);
        match self.family {
            Family::Wendland { smoothness } => {
                let l = self.ell().unwrap() as f64;
                let p = (1.0 - z).max(0.0);
                let pw = |k: i32| p.powi(l as i32 + k);
                match smoothness {
                    0 => -(l * l + 3.0 * l + 2.0) * z * pw(0),
                    1 => -(l * l + 7.0 * l + 12.0) * z * ((l + 1.0) * z + 1.0) * pw(1) / 3.0,
                    _ => {
                        let poly = l * l * z * z + 4.0 * l * z * z + 3.0 * l * z + 3.0 * z * z + 6.0 * z + 3.0;
                        -(l * l + 11.0 * l + 30.0) * poly * z * pw(2) / 15.0
                    }
                }
            }
            Family::Matern72 => {
                let s = SQRT_7 * z;
                -SQRT_7 * s * (s * s + 3.0 * s + 3.0) * (-s).exp() / 15.0
            }
        }
    }

    pub fn phi_d2(&self, z: f64) -> f64 {
        debug_assert!(z >= 0.0);
        match self.family {
            Family::Wendland { smoothness } => {
                let l = self.ell().unwrap() as f64;
                let p = (1.0 - z).max(0.0);
                let pw = |k: i32| p.powi(l as i32 + k);
                match smoothness {
                    0 => (l * l + 3.0 * l + 2.0) * ((l + 1.0) * z - 1.0) * pw(-1),
                    1 => {
                        let poly = l * l * z * z + 4.0 * l * z * z - l * z + 3.0 * z * z - 1.0;
                        (l * l + 7.0 * l + 12.0) * poly * pw(0) / 3.0
                    }
                    _ => {
                        let z2 = z * z;
                        let z3 = z2 * z;
                        let poly = l.powi(3) * z3 + 9.0 * l * l * z3 + 23.0 * l * z3 + 6.0 * l * z2 - 3.0 * l * z
                            + 15.0 * z3
                            + 15.0 * z2
                            - 3.0 * z
                            - 3.0;
                        (l * l + 11.0 * l + 30.0) * poly * pw(1) / 15.0
                    }
                }
            }
            Family::Matern72 => {
                let s = SQRT_7 * z;
                7.0 * (s.powi(3) - 3.0 * s - 3.0) * (-s).exp() / 15.0
            }
        }
    }
}

/// Values of `k̃` and its derivatives at one pair of points.
///
/// The gradient is `grad_scale · (x − x')`, so it never needs a separate
/// allocation.
#[derive(Debug, Clone, Copy)]
pub(crate) struct RadialPair {
    pub value: f64,
    pub grad_scale: f64,
    pub cross_div: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BaseKernel {
    profile: RadialProfile,
    bandwidth: f64,
}

impl BaseKernel {
    pub fn new(profile: RadialProfile, bandwidth: f64) -> Result<Self> {
        if !(bandwidth.is_finite() && bandwidth > 0.0) {
            return Err(Error::Config(format!("bandwidth must be positive and finite (got {bandwidth})")));
        }
        Ok(Self { profile, bandwidth })
    }

    pub fn profile(&self) -> &RadialProfile {
        &self.profile
    }

    pub fn bandwidth(&self) -> f64 {
        self.bandwidth
    }

    pub fn dim(&self) -> usize {
        self.profile.dim
    }

    pub fn with_bandwidth(&self, bandwidth: f64) -> Result<Self> {
        Self::new(self.profile, bandwidth)
    }

    fn check(&self, x: &[f64], xp: &[f64]) -> Result<()> {
        check_dim(self.dim(), x.len())?;
        check_dim(self.dim(), xp.len())
    }

    pub fn eval(&self, x: &[f64], xp: &[f64]) -> Result<f64> {
        self.check(x, xp)?;
        Ok(self.pair(x, xp).value)
    }

    /// `∇_x k̃(x, x')`. The gradient in `x'` is its negation.
    pub fn grad_x(&self, x: &[f64], xp: &[f64]) -> Result<Vec<f64>> {
        self.check(x, xp)?;
        let s = self.pair(x, xp).grad_scale;
        Ok(x.iter().zip(xp).map(|(a, b)| (a - b) * s).collect())
    }

    /// `∇_x · ∇_{x'} k̃(x, x')`, i.e. minus the radial Laplacian of `k̃` in `x`.
    pub fn cross_div(&self, x: &[f64], xp: &[f64]) -> Result<f64> {
        self.check(x, xp)?;
        Ok(self.pair(x, xp).cross_div)
    }

    pub(crate) fn pair(&self, x: &[f64], xp: &[f64]) -> RadialPair {
        let r = x.iter().zip(xp).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt();
        self.radial(r)
    }

    pub(crate) fn radial(&self, r: f64) -> RadialPair {
        let h = self.bandwidth;
        let z = r / h;
        let d = self.dim() as f64;
        if let Some(support) = self.profile.support() {
            if z >= support {
                return RadialPair { value: 0.0, grad_scale: 0.0, cross_div: 0.0 };
            }
        }
        if z < COINCIDENT_RATIO {
            // φ'(0) = 0 for every profile, so φ'(z)/z → φ''(0).
            let d2 = self.profile.phi_d2(0.0);
            return RadialPair { value: self.profile.phi(z), grad_scale: 0.0, cross_div: -d * d2 / (h * h) };
        }
        let d1 = self.profile.phi_d1(z);
        let d2 = self.profile.phi_d2(z);
        RadialPair {
            value: self.profile.phi(z),
            grad_scale: d1 / (h * r),
            cross_div: -(d2 / (h * h) + (d - 1.0) * d1 / (r * h)),
        }
    }
}

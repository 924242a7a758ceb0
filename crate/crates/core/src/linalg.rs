//! Jittered Cholesky factorisation shared by fitting, the closed-form
//! estimators and the marginal likelihood.

use nalgebra::{Cholesky, DMatrix, DVector, Dyn};

/// Jitter levels, as multiples of the mean diagonal, tried in order.
pub const JITTER_SCHEDULE: [f64; 5] = [1e-10, 1e-9, 1e-8, 1e-7, 1e-6];

#[derive(Debug, Clone)]
pub struct JitteredCholesky {
    chol: Cholesky<f64, Dyn>,
    /// Absolute jitter `λ` added to the diagonal.
    pub jitter: f64,
}

impl JitteredCholesky {
    /// Factorises `K + λI`, escalating `λ` through [`JITTER_SCHEDULE`] times
    /// the mean diagonal of `K`.
    ///
    /// Returns `Err(λ_max)` if every level fails or the matrix is not finite.
    pub fn factor(k: &DMatrix<f64>) -> Result<Self, f64> {
        Self::factor_scaled(k, k.trace() / k.nrows().max(1) as f64)
    }

    /// As [`factor`](Self::factor) with the jitter measured against `scale`
    /// instead of the mean diagonal.
    pub fn factor_scaled(k: &DMatrix<f64>, scale: f64) -> Result<Self, f64> {
        let m = k.nrows();
        debug_assert_eq!(m, k.ncols());
        if m == 0 || !(scale.is_finite() && scale > 0.0) || k.iter().any(|v| !v.is_finite()) {
            return Err(f64::NAN);
        }
        let mut last = 0.0;
        for rel in JITTER_SCHEDULE {
            let jitter = rel * scale;
            last = jitter;
            let mut a = k.clone();
            for i in 0..m {
                a[(i, i)] += jitter;
            }
            if let Some(chol) = Cholesky::new(a) {
                if chol.l_dirty().diagonal().iter().all(|d| d.is_finite() && *d > 0.0) {
                    return Ok(Self { chol, jitter });
                }
            }
        }
        Err(last)
    }

    pub fn solve(&self, b: &DVector<f64>) -> DVector<f64> {
        self.chol.solve(b)
    }

    pub fn log_det(&self) -> f64 {
        2.0 * self.chol.l_dirty().diagonal().iter().map(|d| d.ln()).sum::<f64>()
    }

    pub fn dim(&self) -> usize {
        self.chol.l_dirty().nrows()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn factors_spd_and_solves() {
        let k = DMatrix::from_row_slice(2, 2, &[4.0, 1.0, 1.0, 3.0]);
        let c = JitteredCholesky::factor(&k).unwrap();
        assert!(c.jitter > 0.0 && c.jitter < 1e-9);
        let x = c.solve(&DVector::from_vec(vec![1.0, 2.0]));
        let back = &k * &x;
        assert!((back[0] - 1.0).abs() < 1e-8 && (back[1] - 2.0).abs() < 1e-8);
        assert!((c.log_det() - 11f64.ln()).abs() < 1e-9);
    }

    #[test]
    fn jitter_rescues_semidefinite() {
        let k = DMatrix::from_element(3, 3, 1.0);
        assert!(JitteredCholesky::factor(&k).is_ok());
    }

    #[test]
    fn indefinite_and_degenerate_fail() {
        let k = DMatrix::from_row_slice(2, 2, &[1.0, 2.0, 2.0, 1.0]);
        assert!(JitteredCholesky::factor(&k).is_err());
        assert!(JitteredCholesky::factor(&DMatrix::zeros(2, 2)).is_err());
        let mut nan = DMatrix::identity(2, 2);
        nan[(0, 1)] = f64::NAN;
        assert!(JitteredCholesky::factor(&nan).is_err());
    }
}

//! Dense linear least squares for the small systems used across the crate.

use nalgebra::{DMatrix, DVector};

/// Solution of an overdetermined system `A x ≈ b`.
#[derive(Debug, Clone)]
pub(crate) struct LstsqFit {
    pub coeffs: Vec<f64>,
    pub residuals: Vec<f64>,
}

impl LstsqFit {
    pub fn rms(&self) -> f64 {
        if self.residuals.is_empty() {
            return 0.0;
        }
        (self.residuals.iter().map(|r| r * r).sum::<f64>() / self.residuals.len() as f64).sqrt()
    }
}

/// Solves via SVD. Returns `None` when the design matrix is rank deficient
/// (smallest/largest singular value below `1e-10`).
pub(crate) fn lstsq(rows: &[Vec<f64>], rhs: &[f64]) -> Option<LstsqFit> {
    let m = rows.len();
    let n = rows.first()?.len();
    if m < n || n == 0 || rhs.len() != m {
        return None;
    }
    let a = DMatrix::from_fn(m, n, |i, j| rows[i][j]);
    let b = DVector::from_column_slice(rhs);
    let svd = a.clone().svd(true, true);
    let smax = svd.singular_values.max();
    let smin = svd.singular_values.min();
    if !(smax > 0.0) || smin / smax < 1e-10 {
        return None;
    }
    let x = svd.solve(&b, 0.0).ok()?;
    let residuals = (&a * &x - &b).iter().copied().collect();
    Some(LstsqFit {
        coeffs: x.iter().copied().collect(),
        residuals,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_line_fit() {
        let rows: Vec<Vec<f64>> = (0..5).map(|i| vec![1.0, i as f64]).collect();
        let rhs: Vec<f64> = (0..5).map(|i| 2.0 - 0.5 * i as f64).collect();
        let fit = lstsq(&rows, &rhs).unwrap();
        assert!((fit.coeffs[0] - 2.0).abs() < 1e-12 && (fit.coeffs[1] + 0.5).abs() < 1e-12);
        assert!(fit.rms() < 1e-12);
    }

    #[test]
    fn rank_deficient_is_none() {
        let rows = vec![vec![1.0, 0.0, 0.0], vec![1.0, 1.0, 1.0], vec![1.0, 1.0, 1.0]];
        assert!(lstsq(&rows, &[1.0, 2.0, 2.0]).is_none());
        assert!(lstsq(&rows[..2], &[1.0, 2.0]).is_none());
    }
}

use serde::{Deserialize, Serialize};

use super::{CoregError, MatchPoint, Result};
use crate::lsq::lstsq;

/// Number of monomials of total degree ≤ `order` in two variables.
pub fn coeff_count(order: usize) -> usize {
    (order + 1) * (order + 2) / 2
}

/// Monomials `u^(d−j)·v^j` for `d = 0..=order`, `j = 0..=d`.
pub fn monomials(order: usize, u: f64, v: f64) -> Vec<f64> {
    let mut out = Vec::with_capacity(coeff_count(order));
    for d in 0..=order {
        for j in 0..=d {
            out.push(u.powi((d - j) as i32) * v.powi(j as i32));
        }
    }
    out
}

/// Bivariate polynomial shift field `(dx(x, y), dy(x, y))` in pixels over
/// coordinates normalized to `u = x / (width − 1)`, `v = y / (height − 1)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DistortionModel {
    pub order: usize,
    pub coeff_dx: Vec<f64>,
    pub coeff_dy: Vec<f64>,
    /// RMS magnitude of the fit residual vectors, pixels.
    pub rms_fit: f64,
    pub width: usize,
    pub height: usize,
}

impl DistortionModel {
    pub fn zero(order: usize, width: usize, height: usize) -> Self {
        Self {
            order,
            coeff_dx: vec![0.0; coeff_count(order)],
            coeff_dy: vec![0.0; coeff_count(order)],
            rms_fit: 0.0,
            width,
            height,
        }
    }

    /// Constant field `(dx, dy)`.
    pub fn translation(dx: f64, dy: f64, width: usize, height: usize) -> Self {
        let mut m = Self::zero(0, width, height);
        m.coeff_dx[0] = dx;
        m.coeff_dy[0] = dy;
        m
    }

    pub fn validate(&self) -> Result<()> {
        let n = coeff_count(self.order);
        if self.coeff_dx.len() != n || self.coeff_dy.len() != n {
            return Err(CoregError::InvalidParams(format!(
                "order {} needs {n} coefficients per component",
                self.order
            )));
        }
        if self.width < 2 || self.height < 2 {
            return Err(CoregError::InvalidParams("model extent below 2x2".into()));
        }
        if self.coeff_dx.iter().chain(&self.coeff_dy).any(|c| !c.is_finite()) {
            return Err(CoregError::InvalidParams("non-finite coefficient".into()));
        }
        Ok(())
    }

    #[inline]
    pub fn normalize(&self, x: f64, y: f64) -> (f64, f64) {
        (x / (self.width - 1) as f64, y / (self.height - 1) as f64)
    }

    pub fn eval(&self, x: f64, y: f64) -> (f64, f64) {
        let (u, v) = self.normalize(x, y);
        let mut dx = 0.0;
        let mut dy = 0.0;
        let mut k = 0;
        for d in 0..=self.order {
            for j in 0..=d {
                let m = u.powi((d - j) as i32) * v.powi(j as i32);
                dx += self.coeff_dx[k] * m;
                dy += self.coeff_dy[k] * m;
                k += 1;
            }
        }
        (dx, dy)
    }

    /// Largest shift magnitude over a coarse grid including the corners.
    pub fn max_magnitude(&self) -> f64 {
        let steps = 16;
        let mut best: f64 = 0.0;
        for j in 0..=steps {
            for i in 0..=steps {
                let x = (self.width - 1) as f64 * i as f64 / steps as f64;
                let y = (self.height - 1) as f64 * j as f64 / steps as f64;
                let (dx, dy) = self.eval(x, y);
                best = best.max(dx.hypot(dy));
            }
        }
        best
    }
}

/// Independent least-squares fits of `dx` and `dy` as polynomials of the
/// reference position. Requires at least twice as many matches as
/// coefficients per component.
pub fn fit_distortion(
    matches: &[MatchPoint],
    order: usize,
    width: usize,
    height: usize,
) -> Result<DistortionModel> {
    if !(1..=3).contains(&order) {
        return Err(CoregError::InvalidParams(format!("order {order} not in 1..=3")));
    }
    let needed = 2 * coeff_count(order);
    if matches.len() < needed {
        return Err(CoregError::TooFewMatches {
            found: matches.len(),
            needed,
        });
    }
    let mut model = DistortionModel::zero(order, width, height);
    model.validate()?;
    let rows: Vec<Vec<f64>> = matches
        .iter()
        .map(|m| {
            let (u, v) = model.normalize(m.x_ref, m.y_ref);
            monomials(order, u, v)
        })
        .collect();
    let dx: Vec<f64> = matches.iter().map(|m| m.dx).collect();
    let dy: Vec<f64> = matches.iter().map(|m| m.dy).collect();
    let fx = lstsq(&rows, &dx).ok_or(CoregError::SingularFit)?;
    let fy = lstsq(&rows, &dy).ok_or(CoregError::SingularFit)?;
    let ss: f64 = fx
        .residuals
        .iter()
        .zip(&fy.residuals)
        .map(|(a, b)| a * a + b * b)
        .sum();
    model.rms_fit = (ss / matches.len() as f64).sqrt();
    model.coeff_dx = fx.coeffs;
    model.coeff_dy = fy.coeffs;
    Ok(model)
}

//! Canny edge detector: Gaussian smoothing, Sobel gradient, non-maximum
//! suppression and double-threshold hysteresis.

use rayon::prelude::*;

use super::{CoregError, Result};
use crate::raster::Plane;

/// Separable Gaussian blur with replicated borders. Kernel radius `ceil(3σ)`.
pub fn gaussian_blur(plane: &Plane<f64>, sigma: f64) -> Plane<f64> {
    if sigma <= 0.0 {
        return plane.clone();
    }
    let radius = (3.0 * sigma).ceil() as isize;
    let mut kernel: Vec<f64> = (-radius..=radius)
        .map(|i| (-(i * i) as f64 / (2.0 * sigma * sigma)).exp())
        .collect();
    let sum: f64 = kernel.iter().sum();
    kernel.iter_mut().for_each(|k| *k /= sum);

    let (w, h) = (plane.width(), plane.height());
    let clamp = |i: isize, n: usize| i.clamp(0, n as isize - 1) as usize;

    let mut tmp = Plane::new(w, h, 0.0);
    tmp.as_mut_slice()
        .par_chunks_mut(w)
        .enumerate()
        .for_each(|(y, out)| {
            let row = plane.row(y);
            for (x, o) in out.iter_mut().enumerate() {
                let mut acc = 0.0;
                for (k, &kv) in kernel.iter().enumerate() {
                    acc += kv * row[clamp(x as isize + k as isize - radius, w)];
                }
                *o = acc;
            }
        });
    let mut out = Plane::new(w, h, 0.0);
    out.as_mut_slice()
        .par_chunks_mut(w)
        .enumerate()
        .for_each(|(y, out)| {
            for (k, &kv) in kernel.iter().enumerate() {
                let src = tmp.row(clamp(y as isize + k as isize - radius, h));
                for (o, &s) in out.iter_mut().zip(src) {
                    *o += kv * s;
                }
            }
        });
    out
}

/// Sobel gradient `(gx, gy)` with replicated borders.
pub fn sobel(plane: &Plane<f64>) -> (Plane<f64>, Plane<f64>) {
    let (w, h) = (plane.width(), plane.height());
    let at = |x: isize, y: isize| {
        plane.get(
            x.clamp(0, w as isize - 1) as usize,
            y.clamp(0, h as isize - 1) as usize,
        )
    };
    let mut gx = Plane::new(w, h, 0.0);
    let mut gy = Plane::new(w, h, 0.0);
    gx.as_mut_slice()
        .par_chunks_mut(w)
        .zip(gy.as_mut_slice().par_chunks_mut(w))
        .enumerate()
        .for_each(|(y, (rx, ry))| {
            let y = y as isize;
            for x in 0..w as isize {
                let (a, b, c) = (at(x - 1, y - 1), at(x, y - 1), at(x + 1, y - 1));
                let (d, f) = (at(x - 1, y), at(x + 1, y));
                let (g, hh, i) = (at(x - 1, y + 1), at(x, y + 1), at(x + 1, y + 1));
                rx[x as usize] = (c + 2.0 * f + i) - (a + 2.0 * d + g);
                ry[x as usize] = (g + 2.0 * hh + i) - (a + 2.0 * b + c);
            }
        });
    (gx, gy)
}

/// Gradient magnitude after non-maximum suppression along the quantized
/// gradient direction. A pixel survives when it is strictly greater than its
/// backward neighbor and not smaller than its forward neighbor, so a ridge two
/// pixels wide keeps exactly one pixel. The one-pixel border is cleared.
pub fn non_max_suppression(gx: &Plane<f64>, gy: &Plane<f64>) -> Plane<f64> {
    let (w, h) = (gx.width(), gx.height());
    let mag = Plane::from_vec(
        w,
        h,
        gx.as_slice()
            .iter()
            .zip(gy.as_slice())
            .map(|(a, b)| a.hypot(*b))
            .collect(),
    )
    .expect("same shape");
    let mut out = Plane::new(w, h, 0.0);
    if w < 3 || h < 3 {
        return out;
    }
    let tan22 = std::f64::consts::FRAC_PI_8.tan();
    out.as_mut_slice()
        .par_chunks_mut(w)
        .enumerate()
        .skip(1)
        .take(h - 2)
        .for_each(|(y, row)| {
            for x in 1..w - 1 {
                let m = mag.get(x, y);
                if m == 0.0 {
                    continue;
                }
                let (dx, dy) = (gx.get(x, y), gy.get(x, y));
                let (ax, ay) = (dx.abs(), dy.abs());
                // Offsets of the forward neighbor along the gradient.
                let (ox, oy): (isize, isize) = if ay <= ax * tan22 {
                    (1, 0)
                } else if ax <= ay * tan22 {
                    (0, 1)
                } else if (dx > 0.0) == (dy > 0.0) {
                    (1, 1)
                } else {
                    (1, -1)
                };
                let fwd = mag.get((x as isize + ox) as usize, (y as isize + oy) as usize);
                let bwd = mag.get((x as isize - ox) as usize, (y as isize - oy) as usize);
                if m > bwd && m >= fwd {
                    row[x] = m;
                }
            }
        });
    out
}

pub fn hysteresis(nms: &Plane<f64>, t_low: f64, t_high: f64) -> Plane<u8> {
    let (w, h) = (nms.width(), nms.height());
    let mut out = Plane::new(w, h, 0u8);
    let mut stack = Vec::new();
    for y in 0..h {
        for x in 0..w {
            if nms.get(x, y) >= t_high && out.get(x, y) == 0 {
                out.set(x, y, 1);
                stack.push((x, y));
                while let Some((cx, cy)) = stack.pop() {
                    for ny in cy.saturating_sub(1)..=(cy + 1).min(h - 1) {
                        for nx in cx.saturating_sub(1)..=(cx + 1).min(w - 1) {
                            if out.get(nx, ny) == 0 && nms.get(nx, ny) >= t_low {
                                out.set(nx, ny, 1);
                                stack.push((nx, ny));
                            }
                        }
                    }
                }
            }
        }
    }
    out
}

/// Binary (0/1) Canny edge map with absolute gradient thresholds.
pub fn canny_edges<T: Copy + Into<f64>>(
    plane: &Plane<T>,
    sigma: f64,
    t_low: f64,
    t_high: f64,
) -> Result<Plane<u8>> {
    if !(t_low > 0.0 && t_low < t_high) {
        return Err(CoregError::BadThresholds { t_low, t_high });
    }
    if !(sigma > 0.0) {
        return Err(CoregError::InvalidParams(format!("sigma {sigma}")));
    }
    let smooth = gaussian_blur(&plane.to_f64(), sigma);
    let (gx, gy) = sobel(&smooth);
    Ok(hysteresis(&non_max_suppression(&gx, &gy), t_low, t_high))
}

/// Thresholds for [`canny_auto`], relative to a high percentile of the
/// suppressed gradient magnitude.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct RelativeThresholds {
    /// Quantile of the non-zero suppressed magnitudes used as the scale.
    pub quantile: f64,
    pub low: f64,
    pub high: f64,
}

impl Default for RelativeThresholds {
    fn default() -> Self {
        Self {
            quantile: 0.98,
            low: 0.1,
            high: 0.25,
        }
    }
}

/// Canny with thresholds scaled to the plane's own gradient statistics, so
/// bands with different contrast produce comparable edge maps. A plane with
/// no gradient yields an all-zero map.
pub fn canny_auto<T: Copy + Into<f64>>(
    plane: &Plane<T>,
    sigma: f64,
    thresholds: RelativeThresholds,
) -> Result<Plane<u8>> {
    if !(thresholds.low > 0.0 && thresholds.low < thresholds.high) {
        return Err(CoregError::BadThresholds {
            t_low: thresholds.low,
            t_high: thresholds.high,
        });
    }
    let smooth = gaussian_blur(&plane.to_f64(), sigma);
    let (gx, gy) = sobel(&smooth);
    let nms = non_max_suppression(&gx, &gy);
    let mut mags: Vec<f64> = nms.as_slice().iter().copied().filter(|&m| m > 0.0).collect();
    if mags.is_empty() {
        return Ok(Plane::new(plane.width(), plane.height(), 0));
    }
    let k = ((mags.len() - 1) as f64 * thresholds.quantile.clamp(0.0, 1.0)).round() as usize;
    let (_, scale, _) = mags.select_nth_unstable_by(k, |a, b| a.total_cmp(b));
    let scale = *scale;
    if !(scale > 1e-9) {
        return Ok(Plane::new(plane.width(), plane.height(), 0));
    }
    Ok(hysteresis(&nms, thresholds.low * scale, thresholds.high * scale))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constant_plane_has_no_edges() {
        let p = Plane::new(32, 32, 100u16);
        let e = canny_edges(&p, 1.4, 5.0, 20.0).unwrap();
        assert!(e.as_slice().iter().all(|&v| v == 0));
        let e = canny_auto(&p, 1.4, RelativeThresholds::default()).unwrap();
        assert!(e.as_slice().iter().all(|&v| v == 0));
    }

    #[test]
    fn vertical_step_gives_single_line() {
        let step = 20;
        let p = Plane::from_fn(40, 30, |x, _| if x < step { 50u16 } else { 200 });
        let e = canny_edges(&p, 1.4, 20.0, 80.0).unwrap();
        for y in 1..29 {
            let cols: Vec<usize> = (0..40).filter(|&x| e.get(x, y) == 1).collect();
            assert_eq!(cols.len(), 1, "row {y}: {cols:?}");
            assert!((cols[0] as f64 - (step as f64 - 0.5)).abs() <= 1.0);
        }
    }

    #[test]
    fn equal_thresholds_rejected() {
        let p = Plane::new(8, 8, 0u16);
        assert!(matches!(canny_edges(&p, 1.0, 10.0, 10.0), Err(CoregError::BadThresholds { .. })));
        assert!(matches!(canny_edges(&p, 1.0, 0.0, 10.0), Err(CoregError::BadThresholds { .. })));
    }

    #[test]
    fn blur_preserves_constant_and_mass() {
        let p = Plane::new(16, 9, 3.0);
        let b = gaussian_blur(&p, 2.0);
        assert!(b.as_slice().iter().all(|v| (v - 3.0).abs() < 1e-12));
        let mut d = Plane::new(31, 31, 0.0);
        d.set(15, 15, 1.0);
        let b = gaussian_blur(&d, 1.0);
        let total: f64 = b.as_slice().iter().sum();
        assert!((total - 1.0).abs() < 1e-12);
    }
}

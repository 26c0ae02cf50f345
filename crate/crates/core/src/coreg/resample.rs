use rayon::prelude::*;

use super::DistortionModel;
use crate::raster::Plane;

/// Aligned plane plus validity mask (`false` where the source fell outside).
#[derive(Debug, Clone, PartialEq)]
pub struct Resampled {
    pub plane: Plane<u16>,
    pub valid: Plane<bool>,
}

impl Resampled {
    pub fn invalid_count(&self) -> usize {
        self.valid.as_slice().iter().filter(|v| !**v).count()
    }
}

/// Bilinear sample at a real-valued position; `None` outside `[0, w−1]×[0, h−1]`.
#[inline]
pub fn bilinear<T: Copy + Into<f64>>(plane: &Plane<T>, x: f64, y: f64) -> Option<f64> {
    let (w, h) = (plane.width(), plane.height());
    if !(x >= 0.0 && y >= 0.0 && x <= (w - 1) as f64 && y <= (h - 1) as f64) {
        return None;
    }
    let x0 = x.floor() as usize;
    let y0 = y.floor() as usize;
    let fx = x - x0 as f64;
    let fy = y - y0 as f64;
    let x1 = (x0 + 1).min(w - 1);
    let y1 = (y0 + 1).min(h - 1);
    let v00: f64 = plane.get(x0, y0).into();
    let v10: f64 = plane.get(x1, y0).into();
    let v01: f64 = plane.get(x0, y1).into();
    let v11: f64 = plane.get(x1, y1).into();
    let top = v00 + fx * (v10 - v00);
    let bottom = v01 + fx * (v11 - v01);
    Some(top + fy * (bottom - top))
}

/// Inverse mapping: `out(x, y) = tgt(x + dx(x, y), y + dy(x, y))`, bilinear.
/// Samples falling outside the target are written as 0 and masked.
pub fn resample(tgt: &Plane<u16>, model: &DistortionModel) -> Resampled {
    let (w, h) = (tgt.width(), tgt.height());
    let mut plane = Plane::new(w, h, 0u16);
    let mut valid = Plane::new(w, h, false);
    plane
        .as_mut_slice()
        .par_chunks_mut(w)
        .zip(valid.as_mut_slice().par_chunks_mut(w))
        .enumerate()
        .for_each(|(y, (out, mask))| {
            for x in 0..w {
                let (dx, dy) = model.eval(x as f64, y as f64);
                if let Some(v) = bilinear(tgt, x as f64 + dx, y as f64 + dy) {
                    out[x] = (v + 0.5).floor() as u16;
                    mask[x] = true;
                }
            }
        });
    Resampled { plane, valid }
}

//! FFT cross-correlation of equally sized tiles with per-axis parabolic
//! subpixel peak refinement.

use std::sync::Arc;

use rustfft::num_complex::Complex64;
use rustfft::{Fft, FftPlanner};
use serde::{Deserialize, Serialize};

use super::{CoregError, Result};
use crate::raster::Plane;

/// Similarity surface used to locate the shift.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CorrelationMode {
    /// Zero-mean normalized cross-correlation; peak value in [-1, 1].
    #[default]
    Ncc,
    /// Phase correlation (whitened cross-power spectrum).
    Phase,
}

/// Recovered displacement of the target tile relative to the reference: a
/// feature at `p` in the reference appears at `p + (dx, dy)` in the target.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Shift {
    pub dx: f64,
    pub dy: f64,
    pub score: f64,
}

/// Reusable FFT plans for one square tile size.
pub struct Correlator {
    size: usize,
    fft: Arc<dyn Fft<f64>>,
    ifft: Arc<dyn Fft<f64>>,
    mode: CorrelationMode,
}

impl Correlator {
    /// `size` is rounded up to a power of two.
    pub fn new(size: usize, mode: CorrelationMode) -> Self {
        let size = size.max(2).next_power_of_two();
        let mut planner = FftPlanner::new();
        Self {
            size,
            fft: planner.plan_fft_forward(size),
            ifft: planner.plan_fft_inverse(size),
            mode,
        }
    }

    pub fn size(&self) -> usize {
        self.size
    }

    fn fft2(&self, buf: &mut [Complex64], inverse: bool) {
        let n = self.size;
        let plan = if inverse { &self.ifft } else { &self.fft };
        let mut scratch = vec![Complex64::default(); plan.get_inplace_scratch_len()];
        for row in buf.chunks_exact_mut(n) {
            plan.process_with_scratch(row, &mut scratch);
        }
        let mut col = vec![Complex64::default(); n];
        for x in 0..n {
            for y in 0..n {
                col[y] = buf[y * n + x];
            }
            plan.process_with_scratch(&mut col, &mut scratch);
            for y in 0..n {
                buf[y * n + x] = col[y];
            }
        }
    }

    /// Zero-mean copy of a tile, zero padded into an `n × n` buffer, and
    /// its sum of squares.
    fn load(&self, tile: &Plane<f64>) -> (Vec<Complex64>, f64) {
        let n = self.size;
        let count = (tile.width() * tile.height()) as f64;
        let mean = tile.as_slice().iter().sum::<f64>() / count;
        let mut buf = vec![Complex64::default(); n * n];
        let mut energy = 0.0;
        for y in 0..tile.height() {
            for (x, &v) in tile.row(y).iter().enumerate() {
                let d = v - mean;
                energy += d * d;
                buf[y * n + x] = Complex64::new(d, 0.0);
            }
        }
        (buf, energy)
    }

    /// Correlation surface `c(s) = Σ a(p)·b(p + s)` (circular), normalized so
    /// a perfect match peaks at 1.
    pub fn surface(&self, reference: &Plane<f64>, target: &Plane<f64>) -> Result<Plane<f64>> {
        if reference.width() != target.width() || reference.height() != target.height() {
            return Err(CoregError::TileShape(format!(
                "{}x{} vs {}x{}",
                reference.width(),
                reference.height(),
                target.width(),
                target.height()
            )));
        }
        if reference.width() > self.size || reference.height() > self.size {
            return Err(CoregError::TileShape(format!(
                "tile {}x{} exceeds correlator size {}",
                reference.width(),
                reference.height(),
                self.size
            )));
        }
        let (mut a, ea) = self.load(reference);
        let (mut b, eb) = self.load(target);
        let flat = |e: f64| !(e > 1e-12 * (reference.width() * reference.height()) as f64);
        if flat(ea) || flat(eb) {
            return Err(CoregError::FlatTile);
        }
        self.fft2(&mut a, false);
        self.fft2(&mut b, false);
        let n = self.size;
        let mut cross: Vec<Complex64> = a.iter().zip(&b).map(|(x, y)| x.conj() * y).collect();
        if self.mode == CorrelationMode::Phase {
            for c in cross.iter_mut() {
                let m = c.norm();
                *c = if m > 1e-15 { *c / m } else { Complex64::default() };
            }
        }
        self.fft2(&mut cross, true);
        let scale = match self.mode {
            CorrelationMode::Ncc => 1.0 / ((n * n) as f64 * (ea * eb).sqrt()),
            CorrelationMode::Phase => 1.0 / (n * n) as f64,
        };
        Ok(Plane::from_vec(n, n, cross.iter().map(|c| c.re * scale).collect()).expect("n×n"))
    }

    pub fn correlate(&self, reference: &Plane<f64>, target: &Plane<f64>) -> Result<Shift> {
        let surface = self.surface(reference, target)?;
        Ok(locate_peak(&surface))
    }
}

/// Vertex offset of the parabola through three samples centred at 0.
fn parabola_offset(minus: f64, center: f64, plus: f64) -> f64 {
    let denom = minus - 2.0 * center + plus;
    if denom >= 0.0 {
        return 0.0;
    }
    (0.5 * (minus - plus) / denom).clamp(-0.5, 0.5)
}

/// Integer argmax of a circular surface refined per axis; shifts wrapped into
/// `(−N/2, N/2]`.
pub fn locate_peak(surface: &Plane<f64>) -> Shift {
    let n = surface.width();
    let m = surface.height();
    let (mut px, mut py, mut best) = (0, 0, f64::NEG_INFINITY);
    for y in 0..m {
        for (x, &v) in surface.row(y).iter().enumerate() {
            if v > best {
                best = v;
                px = x;
                py = y;
            }
        }
    }
    let ox = parabola_offset(
        surface.get((px + n - 1) % n, py),
        best,
        surface.get((px + 1) % n, py),
    );
    let oy = parabola_offset(
        surface.get(px, (py + m - 1) % m),
        best,
        surface.get(px, (py + 1) % m),
    );
    let wrap = |p: usize, len: usize| {
        if p > len / 2 {
            p as f64 - len as f64
        } else {
            p as f64
        }
    };
    Shift {
        dx: wrap(px, n) + ox,
        dy: wrap(py, m) + oy,
        score: best.clamp(0.0, 1.0),
    }
}

/// One-shot normalized cross-correlation of two equally sized tiles.
pub fn fft_xcorr<T: Copy + Into<f64>>(tile_ref: &Plane<T>, tile_tgt: &Plane<T>) -> Result<Shift> {
    let size = tile_ref.width().max(tile_ref.height());
    Correlator::new(size, CorrelationMode::Ncc).correlate(&tile_ref.to_f64(), &tile_tgt.to_f64())
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};

    fn texture(n: usize, seed: u64) -> Plane<f64> {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let noise = Plane::from_fn(n, n, |_, _| rng.random::<f64>());
        // Wrap-around blur keeps the texture periodic.
        let k = 2isize;
        Plane::from_fn(n, n, |x, y| {
            let mut acc = 0.0;
            for dy in -k..=k {
                for dx in -k..=k {
                    let xx = (x as isize + dx).rem_euclid(n as isize) as usize;
                    let yy = (y as isize + dy).rem_euclid(n as isize) as usize;
                    acc += noise.get(xx, yy);
                }
            }
            acc
        })
    }

    fn roll(p: &Plane<f64>, sx: isize, sy: isize) -> Plane<f64> {
        let (w, h) = (p.width() as isize, p.height() as isize);
        Plane::from_fn(p.width(), p.height(), |x, y| {
            p.get(
                (x as isize - sx).rem_euclid(w) as usize,
                (y as isize - sy).rem_euclid(h) as usize,
            )
        })
    }

    #[test]
    fn self_match_is_zero_with_unit_score() {
        let t = texture(64, 1);
        let s = fft_xcorr(&t, &t).unwrap();
        assert!(s.dx.abs() < 1e-9 && s.dy.abs() < 1e-9);
        assert!((s.score - 1.0).abs() < 1e-9);
    }

    #[test]
    fn circular_shift_is_recovered() {
        let t = texture(64, 2);
        let s = fft_xcorr(&t, &roll(&t, 3, -2)).unwrap();
        assert!((s.dx - 3.0).abs() < 1e-9 && (s.dy + 2.0).abs() < 1e-9, "{s:?}");
        assert!(s.score >= 0.99);
    }

    #[test]
    fn half_pixel_shift_within_quarter_pixel() {
        let t = texture(64, 3);
        let n = 64isize;
        // Bilinear sample at x − 2.5 (wrapping).
        let shifted = Plane::from_fn(64, 64, |x, y| {
            let a = t.get((x as isize - 2).rem_euclid(n) as usize, y);
            let b = t.get((x as isize - 3).rem_euclid(n) as usize, y);
            0.5 * a + 0.5 * b
        });
        let s = fft_xcorr(&t, &shifted).unwrap();
        assert!((2.25..=2.75).contains(&s.dx), "{s:?}");
        assert!(s.dy.abs() < 0.25);
    }

    #[test]
    fn flat_tile_is_rejected() {
        let flat = Plane::new(32, 32, 5.0);
        let t = texture(32, 4);
        assert!(matches!(fft_xcorr(&flat, &t), Err(CoregError::FlatTile)));
        assert!(matches!(fft_xcorr(&t, &flat), Err(CoregError::FlatTile)));
    }

    #[test]
    fn non_power_of_two_tiles_are_padded() {
        let t = texture(64, 5).window(0, 0, 48, 40).unwrap();
        let s = fft_xcorr(&t, &t).unwrap();
        assert!(s.dx.abs() < 1e-9 && s.dy.abs() < 1e-9);
    }

    #[test]
    fn phase_mode_finds_integer_shift() {
        let t = texture(64, 6);
        let c = Correlator::new(64, CorrelationMode::Phase);
        let s = c.correlate(&t, &roll(&t, -5, 7)).unwrap();
        assert!((s.dx + 5.0).abs() < 1e-6 && (s.dy - 7.0).abs() < 1e-6);
    }
}

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::raster::Plane;

/// Ground pattern rendered into the clean scene. Values are in `[0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Texture {
    Flat,
    Checkerboard {
        #[serde(default = "default_cell")]
        cell: usize,
    },
    FractalNoise {
        #[serde(default = "default_scale")]
        scale: f64,
        #[serde(default = "default_octaves")]
        octaves: u32,
    },
    UrbanBlocks {
        /// Mean building footprint edge, pixels.
        #[serde(default = "default_block")]
        block: f64,
    },
}

fn default_cell() -> usize {
    16
}
fn default_scale() -> f64 {
    64.0
}
fn default_octaves() -> u32 {
    5
}
fn default_block() -> f64 {
    8.0
}

impl Default for Texture {
    fn default() -> Self {
        Texture::UrbanBlocks { block: default_block() }
    }
}

fn hash(seed: u64, a: i64, b: i64, c: u32) -> f64 {
    // SplitMix64 finalizer over the lattice coordinates.
    let mut z = seed
        ^ (a as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15)
        ^ (b as u64).wrapping_mul(0xC2B2_AE3D_27D4_EB4F)
        ^ u64::from(c).wrapping_mul(0x1656_67B1_9E37_79F9);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^= z >> 31;
    (z >> 11) as f64 / (1u64 << 53) as f64
}

fn smooth(t: f64) -> f64 {
    t * t * (3.0 - 2.0 * t)
}

/// Multi-octave value noise in `[0, 1]`.
fn value_noise(seed: u64, x: f64, y: f64, scale: f64, octaves: u32) -> f64 {
    let mut total = 0.0;
    let mut amp = 1.0;
    let mut norm = 0.0;
    let mut s = scale.max(1.0);
    for o in 0..octaves.max(1) {
        let (fx, fy) = (x / s, y / s);
        let (ix, iy) = (fx.floor() as i64, fy.floor() as i64);
        let (tx, ty) = (smooth(fx - ix as f64), smooth(fy - iy as f64));
        let v00 = hash(seed, ix, iy, o);
        let v10 = hash(seed, ix + 1, iy, o);
        let v01 = hash(seed, ix, iy + 1, o);
        let v11 = hash(seed, ix + 1, iy + 1, o);
        let top = v00 + tx * (v10 - v00);
        let bottom = v01 + tx * (v11 - v01);
        total += amp * (top + ty * (bottom - top));
        norm += amp;
        amp *= 0.5;
        s = (s / 2.0).max(1.0);
    }
    total / norm
}

/// Fraction of pixel `[i, i+1)` covered by `[lo, hi)`.
fn overlap(i: usize, lo: f64, hi: f64) -> f64 {
    let a = lo.max(i as f64);
    let b = hi.min(i as f64 + 1.0);
    (b - a).max(0.0)
}

/// Paints an axis-aligned rectangle with exact area coverage at its edges.
fn paint_rect(p: &mut Plane<f64>, x0: f64, y0: f64, x1: f64, y1: f64, value: f64) {
    let (w, h) = (p.width(), p.height());
    let cx0 = x0.floor().max(0.0) as usize;
    let cy0 = y0.floor().max(0.0) as usize;
    let cx1 = (x1.ceil().max(0.0) as usize).min(w);
    let cy1 = (y1.ceil().max(0.0) as usize).min(h);
    for y in cy0..cy1 {
        let fy = overlap(y, y0, y1);
        let row = p.row_mut(y);
        for (x, px) in row.iter_mut().enumerate().take(cx1).skip(cx0) {
            let c = fy * overlap(x, x0, x1);
            *px = *px * (1.0 - c) + value * c;
        }
    }
}

pub fn render(texture: &Texture, width: usize, height: usize, seed: u64) -> Plane<f64> {
    match *texture {
        Texture::Flat => Plane::new(width, height, 0.5),
        Texture::Checkerboard { cell } => {
            let c = cell.max(1);
            Plane::from_fn(width, height, |x, y| ((x / c + y / c) % 2) as f64)
        }
        Texture::FractalNoise { scale, octaves } => {
            Plane::from_fn(width, height, |x, y| value_noise(seed, x as f64, y as f64, scale, octaves))
        }
        Texture::UrbanBlocks { block } => urban_blocks(width, height, seed, block.max(4.0)),
    }
}

fn urban_blocks(width: usize, height: usize, seed: u64, block: f64) -> Plane<f64> {
    let mut p = Plane::from_fn(width, height, |x, y| {
        0.3 + 0.2 * value_noise(seed ^ 0x5EED, x as f64, y as f64, 48.0, 4)
    });
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    // Road network: a jittered grid of dark strips.
    let spacing = block * 6.0;
    let mut x = rng.random_range(0.0..spacing);
    while x < width as f64 {
        let wd = rng.random_range(2.0..5.0);
        paint_rect(&mut p, x, 0.0, x + wd, height as f64, 0.12);
        x += spacing * rng.random_range(0.7..1.3);
    }
    let mut y = rng.random_range(0.0..spacing);
    while y < height as f64 {
        let wd = rng.random_range(2.0..5.0);
        paint_rect(&mut p, 0.0, y, width as f64, y + wd, 0.12);
        y += spacing * rng.random_range(0.7..1.3);
    }
    // Buildings with sub-pixel corners.
    let count = (width * height) as f64 / (block * block * 2.5);
    for _ in 0..count as usize {
        let bw = block * rng.random_range(0.4..1.6);
        let bh = block * rng.random_range(0.4..1.6);
        let x0 = rng.random_range(-bw..width as f64);
        let y0 = rng.random_range(-bh..height as f64);
        let v = rng.random_range(0.0..1.0);
        paint_rect(&mut p, x0, y0, x0 + bw, y0 + bh, v);
    }
    p
}

//! Tiled matching of Canny edge maps.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::canny::{canny_auto, gaussian_blur, RelativeThresholds};
use super::xcorr::{CorrelationMode, Correlator};
use super::{CoregError, MatchPoint, Result};
use crate::raster::Plane;

/// Matching configuration. Defaults: 8×8 grid of 128 px tiles.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct MatchParams {
    pub tile_size: usize,
    pub grid_nx: usize,
    pub grid_ny: usize,
    pub min_score: f64,
    /// Gap kept between the outer tiles and the image border, pixels.
    pub margin: usize,
    pub canny_sigma: f64,
    pub thresholds: RelativeThresholds,
    /// Blur applied to the binary edge maps before correlation.
    pub edge_blur_sigma: f64,
    pub mode: CorrelationMode,
}

impl Default for MatchParams {
    fn default() -> Self {
        Self {
            tile_size: 128,
            grid_nx: 8,
            grid_ny: 8,
            min_score: 0.2,
            margin: 16,
            canny_sigma: 1.5,
            thresholds: RelativeThresholds::default(),
            edge_blur_sigma: 1.0,
            mode: CorrelationMode::Ncc,
        }
    }
}

/// Tile origins along one axis, evenly spread between the margins.
fn tile_origins(extent: usize, tile: usize, margin: usize, count: usize) -> Result<Vec<usize>> {
    if count == 0 || tile + 2 * margin > extent {
        return Err(CoregError::InvalidParams(format!(
            "{count} tiles of {tile} px with {margin} px margin do not fit in {extent} px"
        )));
    }
    let span = extent - 2 * margin - tile;
    Ok((0..count)
        .map(|i| {
            if count == 1 {
                margin + span / 2
            } else {
                margin + (span * i + (count - 1) / 2) / (count - 1)
            }
        })
        .collect())
}

/// Blurred Canny edge map used as the matching feature.
pub fn edge_feature<T: Copy + Into<f64>>(plane: &Plane<T>, params: &MatchParams) -> Result<Plane<f64>> {
    let edges = canny_auto(plane, params.canny_sigma, params.thresholds)?;
    Ok(gaussian_blur(&edges.map(f64::from), params.edge_blur_sigma))
}

/// Reference-band feature map computed once and matched against any number
/// of target planes.
pub struct EdgeMatcher {
    params: MatchParams,
    reference: Plane<f64>,
}

impl EdgeMatcher {
    pub fn new<T: Copy + Into<f64>>(reference: &Plane<T>, params: MatchParams) -> Result<Self> {
        if params.tile_size < 32 {
            return Err(CoregError::InvalidParams(format!(
                "tile size {} below 32",
                params.tile_size
            )));
        }
        Ok(Self {
            params,
            reference: edge_feature(reference, &params)?,
        })
    }

    pub fn params(&self) -> &MatchParams {
        &self.params
    }

    /// Matches on the configured grid.
    pub fn match_plane<T: Copy + Into<f64> + Sync>(&self, target: &Plane<T>) -> Result<Vec<MatchPoint>> {
        self.match_grid(target, self.params.grid_nx, self.params.grid_ny)
    }

    pub fn match_grid<T: Copy + Into<f64> + Sync>(
        &self,
        target: &Plane<T>,
        nx: usize,
        ny: usize,
    ) -> Result<Vec<MatchPoint>> {
        let (w, h) = (self.reference.width(), self.reference.height());
        if target.width() != w || target.height() != h {
            return Err(CoregError::DimensionMismatch(format!(
                "reference {w}x{h}, target {}x{}",
                target.width(),
                target.height()
            )));
        }
        let p = &self.params;
        let xs = tile_origins(w, p.tile_size, p.margin, nx)?;
        let ys = tile_origins(h, p.tile_size, p.margin, ny)?;
        let target = edge_feature(target, p)?;
        let correlator = Correlator::new(p.tile_size, p.mode);
        let half = (p.tile_size as f64 - 1.0) / 2.0;

        let results: Vec<Option<MatchPoint>> = (0..nx * ny)
            .into_par_iter()
            .map(|id| -> Result<Option<MatchPoint>> {
                let (x0, y0) = (xs[id % nx], ys[id / nx]);
                let a = self.reference.window(x0, y0, p.tile_size, p.tile_size).expect("tile inside");
                let b = target.window(x0, y0, p.tile_size, p.tile_size).expect("tile inside");
                match correlator.correlate(&a, &b) {
                    Ok(s) if s.score >= p.min_score => Ok(Some(MatchPoint {
                        x_ref: x0 as f64 + half,
                        y_ref: y0 as f64 + half,
                        dx: s.dx,
                        dy: s.dy,
                        score: s.score,
                        tile_id: id,
                    })),
                    Ok(_) | Err(CoregError::FlatTile) => Ok(None),
                    Err(e) => Err(e),
                }
            })
            .collect::<Result<_>>()?;
        let matches: Vec<MatchPoint> = results.into_iter().flatten().collect();
        if matches.is_empty() {
            return Err(CoregError::NoMatches);
        }
        Ok(matches)
    }
}

/// Edge maps for both planes, then one FFT correlation per grid tile. Tiles
/// scoring below `min_score` or without structure are dropped; the result is
/// ordered by tile id.
pub fn collect_matches<T: Copy + Into<f64> + Sync>(
    ref_plane: &Plane<T>,
    tgt_plane: &Plane<T>,
    params: &MatchParams,
) -> Result<Vec<MatchPoint>> {
    EdgeMatcher::new(ref_plane, *params)?.match_plane(tgt_plane)
}

/// Residual misregistration measured by re-matching an aligned pair.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Residual {
    pub mean_px: f64,
    pub rms_px: f64,
    pub points: usize,
}

pub const DEFAULT_RESIDUAL_POINTS: usize = 50;

/// Grid with at least `n_points` tiles, as square as possible.
pub fn residual_grid(n_points: usize) -> (usize, usize) {
    let nx = (n_points as f64).sqrt().ceil() as usize;
    (nx, n_points.div_ceil(nx))
}

/// Mean and RMS of residual shift magnitudes at `n_points` or more tile
/// centers.
pub fn coreg_residual<T: Copy + Into<f64> + Sync>(
    ref_plane: &Plane<T>,
    aligned_plane: &Plane<T>,
    n_points: usize,
    params: &MatchParams,
) -> Result<Residual> {
    let matcher = EdgeMatcher::new(ref_plane, *params)?;
    residual_with(&matcher, aligned_plane, n_points)
}

pub fn residual_with<T: Copy + Into<f64> + Sync>(
    matcher: &EdgeMatcher,
    aligned_plane: &Plane<T>,
    n_points: usize,
) -> Result<Residual> {
    if n_points < 10 {
        return Err(CoregError::InvalidParams(format!("{n_points} residual points, 10 required")));
    }
    let (nx, ny) = residual_grid(n_points);
    let matches = matcher.match_grid(aligned_plane, nx, ny)?;
    let mags: Vec<f64> = matches.iter().map(|m| m.dx.hypot(m.dy)).collect();
    let n = mags.len() as f64;
    Ok(Residual {
        mean_px: mags.iter().sum::<f64>() / n,
        rms_px: (mags.iter().map(|m| m * m).sum::<f64>() / n).sqrt(),
        points: mags.len(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};

    fn blocks(w: usize, h: usize, seed: u64) -> Plane<f64> {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let mut p = Plane::new(w, h, 60.0);
        for _ in 0..(w * h / 300) {
            let x0 = rng.random_range(0..w);
            let y0 = rng.random_range(0..h);
            let bw = rng.random_range(6..24);
            let bh = rng.random_range(6..24);
            let v = rng.random_range(80.0..220.0);
            for y in y0..(y0 + bh).min(h) {
                for x in x0..(x0 + bw).min(w) {
                    p.set(x, y, v);
                }
            }
        }
        p
    }

    #[test]
    fn tile_origins_spread_evenly() {
        assert_eq!(tile_origins(100, 32, 2, 3).unwrap(), vec![2, 34, 66]);
        assert!(tile_origins(60, 32, 16, 2).is_err());
    }

    #[test]
    fn identical_planes_give_zero_shift() {
        let p = blocks(400, 300, 1);
        let params = MatchParams { tile_size: 64, grid_nx: 4, grid_ny: 3, ..Default::default() };
        let m = collect_matches(&p, &p, &params).unwrap();
        assert_eq!(m.len(), 12);
        for mp in &m {
            assert!(mp.dx.abs() < 1e-9 && mp.dy.abs() < 1e-9);
            assert!(mp.score > 0.999);
        }
        assert!(m.windows(2).all(|w| w[0].tile_id < w[1].tile_id));
    }

    #[test]
    fn global_shift_is_measured() {
        let p = blocks(400, 300, 2);
        // Feature at x in the reference appears at x + 4 in the target.
        let t = Plane::from_fn(400, 300, |x, y| p.get(x.saturating_sub(4), y));
        let params = MatchParams { tile_size: 64, grid_nx: 4, grid_ny: 3, ..Default::default() };
        let m = collect_matches(&p, &t, &params).unwrap();
        assert!(m.len() >= 10);
        for mp in &m {
            assert!((mp.dx - 4.0).abs() <= 0.5 && mp.dy.abs() <= 0.5, "{mp:?}");
        }
    }

    #[test]
    fn featureless_planes_have_no_matches() {
        let p = Plane::new(200, 200, 10u16);
        let params = MatchParams { tile_size: 64, grid_nx: 2, grid_ny: 2, ..Default::default() };
        assert!(matches!(collect_matches(&p, &p, &params), Err(CoregError::NoMatches)));
    }

    #[test]
    fn residual_of_identical_pair_is_zero() {
        let p = blocks(400, 400, 3);
        let params = MatchParams { tile_size: 64, ..Default::default() };
        let r = coreg_residual(&p, &p, 10, &params).unwrap();
        assert!(r.mean_px < 1e-9 && r.rms_px < 1e-9);
        assert!(r.points >= 10);
        assert!(coreg_residual(&p, &p, 9, &params).is_err());
    }

    #[test]
    fn residual_of_shifted_pair_is_the_shift() {
        let p = blocks(400, 400, 4);
        let t = Plane::from_fn(400, 400, |x, y| p.get(x.saturating_sub(4), y));
        let params = MatchParams { tile_size: 64, ..Default::default() };
        let r = coreg_residual(&p, &t, 16, &params).unwrap();
        assert!((r.mean_px - 4.0).abs() < 0.25, "{r:?}");
    }

    #[test]
    fn residual_grid_covers_requested_points() {
        assert_eq!(residual_grid(50), (8, 7));
        assert_eq!(residual_grid(10), (4, 3));
    }
}

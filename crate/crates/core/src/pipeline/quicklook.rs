use std::path::Path;

use super::{PipelineError, Result, Stage};
use crate::raster::{BandId, Plane, RawScene};

/// 8-bit preview image, interleaved when it has three channels.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct QuicklookImage {
    pub width: usize,
    pub height: usize,
    pub channels: usize,
    pub data: Vec<u8>,
}

impl QuicklookImage {
    /// Binary PGM (one channel) or PPM (three channels).
    pub fn to_pnm(&self) -> Vec<u8> {
        let magic = if self.channels == 1 { "P5" } else { "P6" };
        let mut out = format!("{magic}\n{} {}\n255\n", self.width, self.height).into_bytes();
        out.extend_from_slice(&self.data);
        out
    }
}

/// Value at percentile `p` of ascending `sorted` by the nearest-rank rule.
pub fn percentile_nearest_rank(sorted: &[u16], p: f64) -> u16 {
    let n = sorted.len();
    let rank = ((p / 100.0) * n as f64).ceil() as usize;
    sorted[rank.clamp(1, n) - 1]
}

/// Linear stretch sending the `lo` percentile to 0 and the `hi` percentile to
/// 255; a band with no spread maps to mid-gray.
pub fn stretch_band(plane: &Plane<u16>, lo_pct: f64, hi_pct: f64) -> Vec<u8> {
    let mut sorted = plane.as_slice().to_vec();
    sorted.sort_unstable();
    let lo = percentile_nearest_rank(&sorted, lo_pct) as f64;
    let hi = percentile_nearest_rank(&sorted, hi_pct) as f64;
    if hi <= lo {
        return vec![128; sorted.len()];
    }
    plane
        .as_slice()
        .iter()
        .map(|&v| (255.0 * (v as f64 - lo) / (hi - lo)).round().clamp(0.0, 255.0) as u8)
        .collect()
}

/// Stretched preview of one band (gray) or three bands (given in R, G, B
/// order), each stretched independently.
pub fn render_quicklook(scene: &RawScene, bands: &[BandId], percentiles: (f64, f64)) -> Result<QuicklookImage> {
    if !matches!(bands.len(), 1 | 3) {
        return Err(PipelineError::BadBandSelection(bands.len()));
    }
    let channels: Vec<Vec<u8>> =
        bands.iter().map(|b| stretch_band(scene.plane(*b), percentiles.0, percentiles.1)).collect();
    let n = scene.width() * scene.lines();
    let data = (0..n).flat_map(|i| channels.iter().map(move |c| c[i])).collect();
    Ok(QuicklookImage { width: scene.width(), height: scene.lines(), channels: bands.len(), data })
}

/// Writes a 2 %–98 % stretched PGM or PPM.
pub fn quicklook(scene: &RawScene, bands: &[BandId], path: impl AsRef<Path>) -> Result<()> {
    let image = render_quicklook(scene, bands, (2.0, 98.0))?;
    std::fs::write(path.as_ref(), image.to_pnm()).map_err(|e| PipelineError::stage(Stage::Output, e))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn scene_of(planes: [Plane<u16>; 4]) -> RawScene {
        let h = planes[0].height();
        RawScene::new(16, planes, (0..h).map(|i| i as f64).collect()).unwrap()
    }

    #[test]
    fn constant_scene_is_mid_gray() {
        let s = scene_of(std::array::from_fn(|_| Plane::new(8, 4, 700)));
        let q = render_quicklook(&s, &[BandId::Nir], (2.0, 98.0)).unwrap();
        assert!(q.data.iter().all(|&v| v == 128));
        assert!(q.to_pnm().starts_with(b"P5\n8 4\n255\n"));
    }

    #[test]
    fn two_bands_rejected() {
        let s = scene_of(std::array::from_fn(|_| Plane::new(8, 4, 1)));
        assert!(matches!(
            render_quicklook(&s, &[BandId::Red, BandId::Green], (2.0, 98.0)),
            Err(PipelineError::BadBandSelection(2))
        ));
    }

    #[test]
    fn stretch_on_known_histogram() {
        // Values 1..=100 once each: nearest rank puts the 2nd percentile at 2
        // and the 98th at 98.
        let p = Plane::from_vec(100, 1, (1..=100).collect()).unwrap();
        let out = stretch_band(&p, 2.0, 98.0);
        assert_eq!(out[1], 0);
        assert_eq!(out[97], 255);
        assert_eq!(out[0], 0);
        assert_eq!(out[99], 255);
        assert_eq!(out[49], (255.0 * 48.0 / 96.0f64).round() as u8);
    }

    #[test]
    fn ppm_interleaves_rgb() {
        let planes = std::array::from_fn(|b| Plane::from_vec(2, 1, vec![0, 10 * (b as u16 + 1)]).unwrap());
        let s = scene_of(planes);
        let q = render_quicklook(&s, &[BandId::Red, BandId::Green, BandId::Blue], (0.0, 100.0)).unwrap();
        assert_eq!(q.data, vec![0, 0, 0, 255, 255, 255]);
        assert!(q.to_pnm().starts_with(b"P6\n"));
    }
}

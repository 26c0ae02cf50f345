use serde::{Deserialize, Serialize};

use super::{Plane, RasterError, Result};

/// Spectral band. Integer codes follow file order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BandId {
    Blue = 0,
    Green = 1,
    Red = 2,
    Nir = 3,
}

impl BandId {
    pub const ALL: [BandId; 4] = [BandId::Blue, BandId::Green, BandId::Red, BandId::Nir];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn from_index(i: usize) -> Option<BandId> {
        Self::ALL.get(i).copied()
    }

    pub fn name(self) -> &'static str {
        match self {
            BandId::Blue => "blue",
            BandId::Green => "green",
            BandId::Red => "red",
            BandId::Nir => "nir",
        }
    }

    pub fn parse(s: &str) -> Option<BandId> {
        Self::ALL
            .into_iter()
            .find(|b| b.name().eq_ignore_ascii_case(s))
    }
}

impl std::fmt::Display for BandId {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

/// Four-band pushbroom scene: planar DN storage plus one UTC timestamp
/// (seconds since the Unix epoch) per image line.
#[derive(Debug, Clone, PartialEq)]
pub struct RawScene {
    pub(super) bit_depth: u8,
    pub(super) planes: [Plane<u16>; 4],
    pub(super) line_times: Vec<f64>,
}

impl RawScene {
    pub fn new(bit_depth: u8, planes: [Plane<u16>; 4], line_times: Vec<f64>) -> Result<Self> {
        let scene = Self {
            bit_depth,
            planes,
            line_times,
        };
        scene.validate()?;
        Ok(scene)
    }

    /// Checks every scene invariant: bit depth, shared plane size, DN range
    /// and strictly increasing line times.
    pub fn validate(&self) -> Result<()> {
        if self.bit_depth != 8 && self.bit_depth != 16 {
            return Err(RasterError::HeaderInvalid(format!(
                "bit depth {} (8 or 16 supported)",
                self.bit_depth
            )));
        }
        let (w, h) = (self.planes[0].width(), self.planes[0].height());
        if w == 0 || h == 0 {
            return Err(RasterError::HeaderInvalid("empty scene".into()));
        }
        if w > u32::MAX as usize || h > u32::MAX as usize {
            return Err(RasterError::HeaderInvalid("scene too large".into()));
        }
        for (b, p) in self.planes.iter().enumerate() {
            if p.width() != w || p.height() != h {
                return Err(RasterError::HeaderInvalid(format!(
                    "band {b} is {}x{}, band 0 is {w}x{h}",
                    p.width(),
                    p.height()
                )));
            }
        }
        let max = self.max_dn();
        if let Some(b) = self
            .planes
            .iter()
            .position(|p| p.as_slice().iter().any(|&v| v > max))
        {
            return Err(RasterError::HeaderInvalid(format!(
                "band {b} holds DN above {max}"
            )));
        }
        if self.line_times.len() != h {
            return Err(RasterError::HeaderInvalid(format!(
                "{} line times for {h} lines",
                self.line_times.len()
            )));
        }
        if self.line_times.iter().any(|t| !t.is_finite())
            || self.line_times.windows(2).any(|p| p[1] <= p[0])
        {
            return Err(RasterError::HeaderInvalid(
                "line times must be finite and strictly increasing".into(),
            ));
        }
        Ok(())
    }

    pub fn width(&self) -> usize {
        self.planes[0].width()
    }

    pub fn lines(&self) -> usize {
        self.planes[0].height()
    }

    pub fn bit_depth(&self) -> u8 {
        self.bit_depth
    }

    pub fn max_dn(&self) -> u16 {
        ((1u32 << self.bit_depth) - 1) as u16
    }

    pub fn plane(&self, band: BandId) -> &Plane<u16> {
        &self.planes[band.index()]
    }

    pub fn planes(&self) -> &[Plane<u16>; 4] {
        &self.planes
    }

    pub fn line_times(&self) -> &[f64] {
        &self.line_times
    }

    /// Replaces band planes, keeping bit depth and timing.
    pub fn with_planes(&self, planes: [Plane<u16>; 4]) -> Result<Self> {
        Self::new(self.bit_depth, planes, self.line_times.clone())
    }

    pub fn into_planes(self) -> [Plane<u16>; 4] {
        self.planes
    }

    pub fn extract_tile(
        &self,
        band: BandId,
        x0: usize,
        y0: usize,
        w: usize,
        h: usize,
    ) -> Result<Plane<u16>> {
        self.plane(band).window(x0, y0, w, h)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn scene(w: usize, h: usize) -> RawScene {
        let planes = std::array::from_fn(|b| Plane::from_fn(w, h, |x, y| ((x + y + b) % 7) as u16));
        RawScene::new(8, planes, (0..h).map(|i| i as f64 * 0.002).collect()).unwrap()
    }

    #[test]
    fn band_codes_are_file_order() {
        let codes: Vec<usize> = BandId::ALL.iter().map(|b| b.index()).collect();
        assert_eq!(codes, vec![0, 1, 2, 3]);
        assert_eq!(BandId::parse("NIR"), Some(BandId::Nir));
    }

    #[test]
    fn full_tile_equals_plane() {
        let s = scene(6, 5);
        let t = s.extract_tile(BandId::Red, 0, 0, 6, 5).unwrap();
        assert_eq!(&t, s.plane(BandId::Red));
    }

    #[test]
    fn zero_width_tile_is_out_of_bounds() {
        let s = scene(6, 5);
        assert!(matches!(
            s.extract_tile(BandId::Red, 0, 0, 0, 5),
            Err(RasterError::OutOfBounds(_))
        ));
    }

    #[test]
    fn tile_does_not_alias_scene() {
        let s = scene(6, 5);
        let before = s.clone();
        let mut t = s.extract_tile(BandId::Blue, 1, 1, 3, 3).unwrap();
        t.as_mut_slice().iter_mut().for_each(|v| *v = 99);
        assert_eq!(s, before);
    }

    #[test]
    fn invariants_are_enforced() {
        let p = || Plane::new(2, 2, 0u16);
        assert!(RawScene::new(12, [p(), p(), p(), p()], vec![0.0, 1.0]).is_err());
        assert!(RawScene::new(8, [p(), p(), p(), p()], vec![1.0, 1.0]).is_err());
        let mut hot = p();
        hot.set(0, 0, 256);
        assert!(RawScene::new(8, [p(), hot, p(), p()], vec![0.0, 1.0]).is_err());
        assert!(RawScene::new(8, [p(), Plane::new(3, 2, 0), p(), p()], vec![0.0, 1.0]).is_err());
    }
}

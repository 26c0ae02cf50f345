//! L3RAW container: a fixed 20-byte little-endian header, the per-line time
//! table, then band-major, row-major samples.
//!
//! ```text
//! "L3RW" | version u16 = 1 | width u32 | lines u32 | bit_depth u8 | band_count u8 = 4 | reserved [u8; 4]
//! line_times f64 x lines
//! planes: band-major, row-major, u8 or u16 per sample
//! ```

use std::io::{Read, Write};
use std::path::Path;

use super::{Plane, RasterError, RawScene, Result};

pub const MAGIC: [u8; 4] = *b"L3RW";
pub const HEADER_LEN: usize = 20;
const VERSION: u16 = 1;
const BAND_COUNT: u8 = 4;

pub fn write_raw<W: Write>(scene: &RawScene, mut out: W) -> Result<()> {
    scene.validate()?;
    let mut header = [0u8; HEADER_LEN];
    header[0..4].copy_from_slice(&MAGIC);
    header[4..6].copy_from_slice(&VERSION.to_le_bytes());
    header[6..10].copy_from_slice(&(scene.width() as u32).to_le_bytes());
    header[10..14].copy_from_slice(&(scene.lines() as u32).to_le_bytes());
    header[14] = scene.bit_depth();
    header[15] = BAND_COUNT;
    out.write_all(&header)?;

    let bytes_per = scene.bit_depth() as usize / 8;
    let mut buf = Vec::with_capacity(scene.lines() * 8 + 4 * scene.width() * scene.lines() * bytes_per);
    for t in scene.line_times() {
        buf.extend_from_slice(&t.to_le_bytes());
    }
    for plane in scene.planes() {
        match bytes_per {
            1 => buf.extend(plane.as_slice().iter().map(|&v| v as u8)),
            _ => plane
                .as_slice()
                .iter()
                .for_each(|v| buf.extend_from_slice(&v.to_le_bytes())),
        }
    }
    out.write_all(&buf)?;
    Ok(())
}

pub fn read_raw<R: Read>(mut input: R) -> Result<RawScene> {
    let mut bytes = Vec::new();
    input.read_to_end(&mut bytes)?;
    if bytes.len() < HEADER_LEN {
        if bytes.len() >= 4 && bytes[0..4] != MAGIC {
            return Err(RasterError::BadMagic(bytes[0..4].try_into().unwrap()));
        }
        return Err(RasterError::Truncated {
            expected: HEADER_LEN,
            found: bytes.len(),
        });
    }
    let magic: [u8; 4] = bytes[0..4].try_into().unwrap();
    if magic != MAGIC {
        return Err(RasterError::BadMagic(magic));
    }
    let le_u32 = |o: usize| u32::from_le_bytes(bytes[o..o + 4].try_into().unwrap()) as usize;
    let version = u16::from_le_bytes([bytes[4], bytes[5]]);
    let width = le_u32(6);
    let lines = le_u32(10);
    let bit_depth = bytes[14];
    let band_count = bytes[15];
    if version != VERSION {
        return Err(RasterError::HeaderInvalid(format!("version {version}")));
    }
    if band_count != BAND_COUNT {
        return Err(RasterError::HeaderInvalid(format!("band count {band_count}")));
    }
    if bit_depth != 8 && bit_depth != 16 {
        return Err(RasterError::HeaderInvalid(format!("bit depth {bit_depth}")));
    }
    if width == 0 || lines == 0 {
        return Err(RasterError::HeaderInvalid(format!("{width}x{lines} scene")));
    }
    let bytes_per = bit_depth as usize / 8;
    let expected = width
        .checked_mul(lines)
        .and_then(|n| n.checked_mul(4 * bytes_per))
        .and_then(|n| n.checked_add(HEADER_LEN + 8 * lines))
        .ok_or_else(|| RasterError::HeaderInvalid("dimensions overflow".into()))?;
    if bytes.len() < expected {
        return Err(RasterError::Truncated {
            expected,
            found: bytes.len(),
        });
    }

    let mut cursor = HEADER_LEN;
    let line_times = (0..lines)
        .map(|i| {
            let o = cursor + 8 * i;
            f64::from_le_bytes(bytes[o..o + 8].try_into().unwrap())
        })
        .collect();
    cursor += 8 * lines;

    let n = width * lines;
    let mut read_plane = || {
        let data: Vec<u16> = match bytes_per {
            1 => bytes[cursor..cursor + n].iter().map(|&b| b as u16).collect(),
            _ => bytes[cursor..cursor + 2 * n]
                .chunks_exact(2)
                .map(|c| u16::from_le_bytes([c[0], c[1]]))
                .collect(),
        };
        cursor += n * bytes_per;
        Plane::from_vec(width, lines, data)
    };
    let planes = [read_plane()?, read_plane()?, read_plane()?, read_plane()?];
    RawScene::new(bit_depth, planes, line_times)
}

pub fn save_raw(scene: &RawScene, path: impl AsRef<Path>) -> Result<()> {
    // Validate first so an invalid scene never leaves a partial file behind.
    scene.validate()?;
    let mut buf = Vec::new();
    write_raw(scene, &mut buf)?;
    std::fs::write(path, buf)?;
    Ok(())
}

pub fn load_raw(path: impl AsRef<Path>) -> Result<RawScene> {
    let file = std::fs::File::open(path)?;
    read_raw(std::io::BufReader::new(file))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn tiny(bit_depth: u8) -> RawScene {
        let planes = std::array::from_fn(|b| Plane::new(1, 1, b as u16 * 3));
        RawScene::new(bit_depth, planes, vec![1.5e9]).unwrap()
    }

    #[test]
    fn single_pixel_file_size() {
        for bd in [8u8, 16] {
            let mut buf = Vec::new();
            write_raw(&tiny(bd), &mut buf).unwrap();
            assert_eq!(buf.len(), HEADER_LEN + 8 + 4 * (bd as usize / 8));
        }
    }

    #[test]
    fn save_is_deterministic() {
        let mut a = Vec::new();
        let mut b = Vec::new();
        write_raw(&tiny(16), &mut a).unwrap();
        write_raw(&tiny(16), &mut b).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn bad_magic_is_rejected() {
        let mut buf = Vec::new();
        write_raw(&tiny(8), &mut buf).unwrap();
        buf[0..4].copy_from_slice(b"XXXX");
        assert!(matches!(read_raw(&buf[..]), Err(RasterError::BadMagic(m)) if &m == b"XXXX"));
    }

    #[test]
    fn short_payload_is_truncated() {
        let planes = std::array::from_fn(|_| Plane::new(3, 100, 7u16));
        let s = RawScene::new(8, planes, (0..100).map(|i| i as f64).collect()).unwrap();
        let mut buf = Vec::new();
        write_raw(&s, &mut buf).unwrap();
        // Drop one line of the last band.
        buf.truncate(buf.len() - 3);
        assert!(matches!(read_raw(&buf[..]), Err(RasterError::Truncated { .. })));
    }

    #[test]
    fn invalid_header_fields() {
        let mut buf = Vec::new();
        write_raw(&tiny(8), &mut buf).unwrap();
        let mut bad = buf.clone();
        bad[14] = 12;
        assert!(matches!(read_raw(&bad[..]), Err(RasterError::HeaderInvalid(_))));
        let mut bad = buf.clone();
        bad[6..10].copy_from_slice(&0u32.to_le_bytes());
        assert!(matches!(read_raw(&bad[..]), Err(RasterError::HeaderInvalid(_))));
    }

    #[test]
    fn out_of_range_dn_is_refused_before_write() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("bad.l3raw");
        let mut s = tiny(8);
        // Bypass the constructor check to simulate a corrupted in-memory scene.
        let mut planes = s.clone().into_planes();
        planes[0].set(0, 0, 300);
        s = RawScene { planes, ..s };
        assert!(matches!(save_raw(&s, &path), Err(RasterError::HeaderInvalid(_))));
        assert!(!path.exists());
    }

    fn arb_scene() -> impl Strategy<Value = RawScene> {
        (1usize..12, 1usize..9, prop::bool::ANY).prop_flat_map(|(w, h, wide)| {
            let bd = if wide { 16u8 } else { 8 };
            let max = if wide { u16::MAX } else { 255 };
            (
                prop::collection::vec(0..=max, 4 * w * h),
                prop::collection::vec(0.0f64..5e-3, h),
                Just((w, h, bd)),
            )
        })
        .prop_map(|(data, steps, (w, h, bd))| {
            let planes = std::array::from_fn(|b| {
                Plane::from_vec(w, h, data[b * w * h..(b + 1) * w * h].to_vec()).unwrap()
            });
            let mut t = 1.6e9;
            let times = steps
                .iter()
                .map(|s| {
                    t += 1e-3 + s;
                    t
                })
                .collect();
            RawScene::new(bd, planes, times).unwrap()
        })
    }

    proptest! {
        #[test]
        fn roundtrip_is_identity(s in arb_scene()) {
            let mut buf = Vec::new();
            write_raw(&s, &mut buf).unwrap();
            let back = read_raw(&buf[..]).unwrap();
            prop_assert_eq!(back, s);
        }
    }
}

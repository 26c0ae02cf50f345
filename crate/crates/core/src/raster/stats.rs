use serde::{Deserialize, Serialize};

use super::{BandId, RasterError, RawScene, Result};

/// Per-line DN statistics of one band (population standard deviation).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SceneStats {
    pub band: BandId,
    pub line_mean: Vec<f64>,
    pub line_std: Vec<f64>,
    pub mean: f64,
    pub std: f64,
}

impl SceneStats {
    pub fn compute(scene: &RawScene, band: BandId) -> Self {
        let plane = scene.plane(band);
        let (line_mean, line_std) = plane.rows().map(mean_std).unzip();
        let (mean, std) = mean_std(plane.as_slice());
        Self {
            band,
            line_mean,
            line_std,
            mean,
            std,
        }
    }
}

/// Arithmetic mean and population standard deviation.
///
/// Two-pass around the mean so large DN offsets do not cancel.
pub fn mean_std<T: Copy + Into<f64>>(values: &[T]) -> (f64, f64) {
    if values.is_empty() {
        return (0.0, 0.0);
    }
    let n = values.len() as f64;
    let mean = values.iter().map(|&v| v.into()).sum::<f64>() / n;
    let var = values
        .iter()
        .map(|&v| {
            let d = v.into() - mean;
            d * d
        })
        .sum::<f64>()
        / n;
    (mean, var.sqrt())
}

pub fn line_stats(scene: &RawScene, band: BandId, line: usize) -> Result<(f64, f64)> {
    if line >= scene.lines() {
        return Err(RasterError::OutOfBounds(format!(
            "line {line} of {}",
            scene.lines()
        )));
    }
    Ok(mean_std(scene.plane(band).row(line)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::raster::Plane;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};

    fn one_line(values: Vec<u16>) -> RawScene {
        let w = values.len();
        let planes = std::array::from_fn(|_| Plane::from_vec(w, 1, values.clone()).unwrap());
        RawScene::new(16, planes, vec![0.0]).unwrap()
    }

    #[test]
    fn constant_and_two_point_lines() {
        assert_eq!(line_stats(&one_line(vec![50; 9]), BandId::Red, 0).unwrap(), (50.0, 0.0));
        assert_eq!(line_stats(&one_line(vec![0, 100]), BandId::Red, 0).unwrap(), (50.0, 50.0));
        assert!(line_stats(&one_line(vec![1]), BandId::Red, 1).is_err());
    }

    #[test]
    fn random_line_matches_naive_oracle() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        let values: Vec<u16> = (0..1001).map(|_| rng.random_range(0..4096)).collect();
        let (m, s) = line_stats(&one_line(values.clone()), BandId::Blue, 0).unwrap();
        // Oracle: textbook sum / sum-of-squares in integers.
        let n = values.len() as u128;
        let sum: u128 = values.iter().map(|&v| v as u128).sum();
        let sum2: u128 = values.iter().map(|&v| (v as u128) * (v as u128)).sum();
        let om = sum as f64 / n as f64;
        let ovar = (n * sum2 - sum * sum) as f64 / (n * n) as f64;
        assert!((m - om).abs() <= 1e-9 * om);
        assert!((s - ovar.sqrt()).abs() <= 1e-9 * ovar.sqrt());
    }

    proptest! {
        #[test]
        fn std_invariant_under_reversal_and_rotation(v in prop::collection::vec(0u16..1000, 1..64), k in 0usize..64) {
            let (_, s) = mean_std(&v);
            let mut r = v.clone();
            r.reverse();
            let (_, sr) = mean_std(&r);
            let mut rot = v.clone();
            rot.rotate_left(k % v.len());
            let (_, srot) = mean_std(&rot);
            prop_assert!((s - sr).abs() < 1e-9 && (s - srot).abs() < 1e-9);
            prop_assert!(s >= 0.0);
        }
    }
}

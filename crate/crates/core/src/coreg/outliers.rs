use serde::{Deserialize, Serialize};

use super::{CoregError, MatchPoint, Result};

/// Expected inter-band shift with the acceptance gate around it.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ShiftPrior {
    pub dx: f64,
    pub dy: f64,
    pub gate: f64,
}

impl ShiftPrior {
    pub const DEFAULT_GATE: f64 = 5.0;

    pub fn new(dx: f64, dy: f64, gate: f64) -> Result<Self> {
        if !(gate > 0.0) {
            return Err(CoregError::InvalidParams(format!("gate radius {gate}")));
        }
        Ok(Self { dx, dy, gate })
    }

    /// Fallback without attitude metadata: component-wise median of the
    /// matches.
    pub fn from_matches(matches: &[MatchPoint], gate: f64) -> Result<Self> {
        if matches.is_empty() {
            return Err(CoregError::NoMatches);
        }
        let dx: Vec<f64> = matches.iter().map(|m| m.dx).collect();
        let dy: Vec<f64> = matches.iter().map(|m| m.dy).collect();
        Self::new(median(&dx), median(&dy), gate)
    }
}

pub(crate) fn median(values: &[f64]) -> f64 {
    let mut v = values.to_vec();
    v.sort_by(|a, b| a.total_cmp(b));
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

pub const MAD_FLOOR_PX: f64 = 0.5;
pub const MAD_FACTOR: f64 = 3.0;

/// Two-pass rejection. First every match farther than the gate radius from
/// the prior is dropped; then any match whose `dx` or `dy` deviates from the
/// survivors' median by more than 3×MAD (MAD floored at 0.5 px). Order is
/// preserved.
pub fn remove_outliers(matches: &[MatchPoint], prior: &ShiftPrior) -> Result<Vec<MatchPoint>> {
    if matches.is_empty() {
        return Err(CoregError::NoMatches);
    }
    let gated: Vec<MatchPoint> = matches
        .iter()
        .filter(|m| (m.dx - prior.dx).hypot(m.dy - prior.dy) <= prior.gate)
        .copied()
        .collect();
    if gated.is_empty() {
        return Err(CoregError::AllRejected);
    }
    let dx: Vec<f64> = gated.iter().map(|m| m.dx).collect();
    let dy: Vec<f64> = gated.iter().map(|m| m.dy).collect();
    let (mx, my) = (median(&dx), median(&dy));
    let mad = |v: &[f64], m: f64| {
        let dev: Vec<f64> = v.iter().map(|x| (x - m).abs()).collect();
        median(&dev).max(MAD_FLOOR_PX)
    };
    let (lx, ly) = (MAD_FACTOR * mad(&dx, mx), MAD_FACTOR * mad(&dy, my));
    let kept: Vec<MatchPoint> = gated
        .into_iter()
        .filter(|m| (m.dx - mx).abs() <= lx && (m.dy - my).abs() <= ly)
        .collect();
    if kept.is_empty() {
        return Err(CoregError::AllRejected);
    }
    Ok(kept)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};

    fn mp(id: usize, dx: f64, dy: f64) -> MatchPoint {
        MatchPoint { x_ref: id as f64, y_ref: 0.0, dx, dy, score: 0.9, tile_id: id }
    }

    #[test]
    fn matches_at_prior_are_kept() {
        let m: Vec<_> = (0..10).map(|i| mp(i, 1.0, -2.0)).collect();
        let p = ShiftPrior::new(1.0, -2.0, 5.0).unwrap();
        assert_eq!(remove_outliers(&m, &p).unwrap(), m);
    }

    #[test]
    fn injected_gross_outliers_are_removed() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        let mut m = Vec::new();
        let mut injected = Vec::new();
        for i in 0..60 {
            if i % 5 == 0 {
                let a = rng.random::<f64>() * std::f64::consts::TAU;
                m.push(mp(i, 2.0 + 50.0 * a.cos(), -1.0 + 50.0 * a.sin()));
                injected.push(i);
            } else {
                m.push(mp(i, 2.0 + rng.random_range(-0.8..0.8), -1.0 + rng.random_range(-0.8..0.8)));
            }
        }
        let p = ShiftPrior::new(2.0, -1.0, 5.0).unwrap();
        let kept = remove_outliers(&m, &p).unwrap();
        assert!(kept.iter().all(|k| !injected.contains(&k.tile_id)));
        assert_eq!(kept.len(), 60 - injected.len());
        assert!(kept.windows(2).all(|w| w[0].tile_id < w[1].tile_id));
    }

    #[test]
    fn everything_far_from_prior_is_rejected() {
        let m: Vec<_> = (0..8).map(|i| mp(i, 100.0, 0.0)).collect();
        let p = ShiftPrior::new(0.0, 0.0, 5.0).unwrap();
        assert!(matches!(remove_outliers(&m, &p), Err(CoregError::AllRejected)));
        assert!(ShiftPrior::new(0.0, 0.0, 0.0).is_err());
    }

    #[test]
    fn median_fallback_prior() {
        let m = vec![mp(0, 1.0, 1.0), mp(1, 2.0, 5.0), mp(2, 30.0, 2.0)];
        let p = ShiftPrior::from_matches(&m, 5.0).unwrap();
        assert_eq!((p.dx, p.dy), (2.0, 2.0));
    }
}

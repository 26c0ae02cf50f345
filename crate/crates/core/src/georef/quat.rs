use nalgebra::{Matrix3, Quaternion as NaQuaternion, Rotation3, UnitQuaternion, Vector3};
use serde::{Deserialize, Serialize};

use super::{GeorefError, Result};

/// Unit quaternion, scalar first, rotating body-frame vectors into the
/// reference frame. Serialized as `[qs, qx, qy, qz]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(from = "[f64; 4]", into = "[f64; 4]")]
pub struct Quaternion {
    pub qs: f64,
    pub qx: f64,
    pub qy: f64,
    pub qz: f64,
}

impl From<[f64; 4]> for Quaternion {
    fn from(q: [f64; 4]) -> Self {
        Self { qs: q[0], qx: q[1], qy: q[2], qz: q[3] }
    }
}

impl From<Quaternion> for [f64; 4] {
    fn from(q: Quaternion) -> Self {
        [q.qs, q.qx, q.qy, q.qz]
    }
}

impl Quaternion {
    pub const IDENTITY: Self = Self { qs: 1.0, qx: 0.0, qy: 0.0, qz: 0.0 };

    pub fn from_axis_angle(axis: Vector3<f64>, angle: f64) -> Self {
        Self::from_unit(UnitQuaternion::from_axis_angle(&nalgebra::Unit::new_normalize(axis), angle))
    }

    pub fn from_matrix(m: &Matrix3<f64>) -> Self {
        Self::from_unit(UnitQuaternion::from_rotation_matrix(&Rotation3::from_matrix_unchecked(*m)))
    }

    pub fn from_unit(q: UnitQuaternion<f64>) -> Self {
        Self { qs: q.w, qx: q.i, qy: q.j, qz: q.k }
    }

    pub fn to_unit(self) -> UnitQuaternion<f64> {
        UnitQuaternion::new_normalize(NaQuaternion::new(self.qs, self.qx, self.qy, self.qz))
    }

    pub fn norm(&self) -> f64 {
        (self.qs * self.qs + self.qx * self.qx + self.qy * self.qy + self.qz * self.qz).sqrt()
    }

    pub fn normalized(self) -> Self {
        let n = self.norm();
        Self { qs: self.qs / n, qx: self.qx / n, qy: self.qy / n, qz: self.qz / n }
    }

    pub fn dot(&self, o: &Self) -> f64 {
        self.qs * o.qs + self.qx * o.qx + self.qy * o.qy + self.qz * o.qz
    }

    pub fn neg(self) -> Self {
        Self { qs: -self.qs, qx: -self.qx, qy: -self.qy, qz: -self.qz }
    }

    /// Hamilton product: `self * o` applies `o` first.
    pub fn mul(&self, o: &Self) -> Self {
        Self::from_unit(self.to_unit() * o.to_unit())
    }

    pub fn rotate(&self, v: &Vector3<f64>) -> Vector3<f64> {
        self.to_unit() * v
    }

    pub fn to_matrix(&self) -> Matrix3<f64> {
        self.to_unit().to_rotation_matrix().into_inner()
    }

    /// Spherical interpolation, `s` in `[0, 1]`, along the shorter arc.
    pub fn slerp(&self, o: &Self, s: f64) -> Self {
        let (a, b) = (self.to_unit(), o.to_unit());
        match a.try_slerp(&b, s, 1e-12) {
            Some(q) => Self::from_unit(q),
            None => Self::from_unit(a.nlerp(&b, s)),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AttitudeSample {
    pub t: f64,
    pub q: Quaternion,
}

/// Time-ordered attitude samples with sign continuity enforced.
#[derive(Debug, Clone, PartialEq)]
pub struct AttitudeTrack {
    samples: Vec<AttitudeSample>,
}

impl AttitudeTrack {
    /// Normalizes every quaternion and flips any sample whose dot product
    /// with its predecessor is negative.
    pub fn new(samples: Vec<AttitudeSample>) -> Result<Self> {
        if samples.is_empty() {
            return Err(GeorefError::EmptySamples);
        }
        let mut out: Vec<AttitudeSample> = Vec::with_capacity(samples.len());
        for s in samples {
            if !s.t.is_finite() || !(s.q.norm() > 0.0) {
                return Err(GeorefError::Metadata(format!("invalid attitude sample at t={}", s.t)));
            }
            let mut q = s.q.normalized();
            if let Some(prev) = out.last() {
                if s.t <= prev.t {
                    return Err(GeorefError::Metadata(format!(
                        "attitude samples not strictly increasing at t={}",
                        s.t
                    )));
                }
                if q.dot(&prev.q) < 0.0 {
                    q = q.neg();
                }
            }
            out.push(AttitudeSample { t: s.t, q });
        }
        Ok(Self { samples: out })
    }

    pub fn samples(&self) -> &[AttitudeSample] {
        &self.samples
    }

    pub fn span(&self) -> (f64, f64) {
        (self.samples[0].t, self.samples[self.samples.len() - 1].t)
    }

    /// Attitude at `t`. A single-sample track is constant in time.
    pub fn at(&self, t: f64) -> Result<Quaternion> {
        slerp_attitude(&self.samples, t)
    }
}

/// Interpolates sorted samples at `t`; exact sample values at sample times.
pub fn slerp_attitude(samples: &[AttitudeSample], t: f64) -> Result<Quaternion> {
    let (first, last) = match samples {
        [] => return Err(GeorefError::EmptySamples),
        [only] => return Ok(only.q),
        [f, .., l] => (f, l),
    };
    if !(t >= first.t && t <= last.t) {
        return Err(GeorefError::OutOfRange { t, first: first.t, last: last.t });
    }
    let i = samples.partition_point(|s| s.t <= t);
    if i > 0 && samples[i - 1].t == t {
        return Ok(samples[i - 1].q);
    }
    let (a, b) = (&samples[i - 1], &samples[i]);
    Ok(a.q.slerp(&b.q, (t - a.t) / (b.t - a.t)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::f64::consts::FRAC_PI_2;

    /// Component distance modulo the double cover.
    fn qdist(a: &Quaternion, b: &Quaternion) -> f64 {
        let d = |s: f64| {
            ((a.qs - s * b.qs).powi(2) + (a.qx - s * b.qx).powi(2) + (a.qy - s * b.qy).powi(2) + (a.qz - s * b.qz).powi(2))
                .sqrt()
        };
        d(1.0).min(d(-1.0))
    }

    #[test]
    fn sample_times_are_exact() {
        let q1 = Quaternion::from_axis_angle(Vector3::x(), 0.3);
        let q2 = Quaternion::from_axis_angle(Vector3::y(), 0.5);
        let s = vec![AttitudeSample { t: 0.0, q: q1 }, AttitudeSample { t: 2.0, q: q2 }];
        assert_eq!(slerp_attitude(&s, 0.0).unwrap(), q1);
        assert_eq!(slerp_attitude(&s, 2.0).unwrap(), q2);
        assert!(matches!(slerp_attitude(&s, 2.5), Err(GeorefError::OutOfRange { .. })));
        assert!(matches!(slerp_attitude(&[], 0.0), Err(GeorefError::EmptySamples)));
    }

    #[test]
    fn constant_track() {
        let q = Quaternion::from_axis_angle(Vector3::new(1.0, 2.0, 3.0), 1.1);
        let s = vec![AttitudeSample { t: 0.0, q }, AttitudeSample { t: 1.0, q }];
        for k in 0..=10 {
            assert!(qdist(&slerp_attitude(&s, k as f64 / 10.0).unwrap(), &q) < 1e-12);
        }
    }

    #[test]
    fn midpoint_of_quarter_turn() {
        let s = vec![
            AttitudeSample { t: 0.0, q: Quaternion::IDENTITY },
            AttitudeSample { t: 1.0, q: Quaternion::from_axis_angle(Vector3::z(), FRAC_PI_2) },
        ];
        let mid = slerp_attitude(&s, 0.5).unwrap();
        let expected = Quaternion::from_axis_angle(Vector3::z(), FRAC_PI_2 / 2.0);
        assert!(qdist(&mid, &expected) < 1e-9);
    }

    #[test]
    fn sign_continuity_enforced() {
        let q = Quaternion::from_axis_angle(Vector3::x(), 0.2);
        let track = AttitudeTrack::new(vec![
            AttitudeSample { t: 0.0, q },
            AttitudeSample { t: 1.0, q: q.neg() },
        ])
        .unwrap();
        assert!(track.samples()[1].q.dot(&q) > 0.0);
    }

    fn quat() -> impl Strategy<Value = Quaternion> {
        (-1.0..1.0f64, -1.0..1.0f64, -1.0..1.0f64, -1.0..1.0f64)
            .prop_filter("nonzero", |(a, b, c, d)| a * a + b * b + c * c + d * d > 1e-3)
            .prop_map(|(a, b, c, d)| Quaternion { qs: a, qx: b, qy: c, qz: d }.normalized())
    }

    proptest! {
        #[test]
        fn composition_is_associative(a in quat(), b in quat(), c in quat()) {
            let l = a.mul(&b).mul(&c);
            let r = a.mul(&b.mul(&c));
            prop_assert!(qdist(&l, &r) < 1e-12);
        }

        #[test]
        fn rotation_preserves_norm(q in quat(), x in -1e4..1e4f64, y in -1e4..1e4f64, z in -1e4..1e4f64) {
            let v = Vector3::new(x, y, z);
            prop_assert!((q.rotate(&v).norm() - v.norm()).abs() <= 1e-12 * v.norm().max(1.0));
            prop_assert!((q.norm() - 1.0).abs() < 1e-9);
        }
    }
}

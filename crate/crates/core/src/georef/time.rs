use std::f64::consts::TAU;

/// Julian date of the Unix epoch.
pub const UNIX_EPOCH_JD: f64 = 2_440_587.5;
pub const J2000_JD: f64 = 2_451_545.0;
/// Length of one sidereal day in SI seconds.
pub const SIDEREAL_DAY_S: f64 = 86_164.090_530_832_88;

pub fn julian_date(t_unix: f64) -> f64 {
    t_unix / 86_400.0 + UNIX_EPOCH_JD
}

/// Greenwich Mean Sidereal Time (IAU-82), radians in `[0, 2π)`.
pub fn gmst(t_unix: f64) -> f64 {
    let tut1 = (julian_date(t_unix) - J2000_JD) / 36_525.0;
    let seconds = 67_310.548_41
        + (876_600.0 * 3600.0 + 8_640_184.812_866) * tut1
        + 0.093_104 * tut1 * tut1
        - 6.2e-6 * tut1 * tut1 * tut1;
    (seconds.to_radians() / 240.0).rem_euclid(TAU)
}

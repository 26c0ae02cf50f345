use chrono::{Datelike, NaiveDate, TimeZone, Utc};
use serde::{Deserialize, Serialize};

use super::{GeorefError, Result};

pub const TLE_LINE_LEN: usize = 69;

/// Mean orbital elements decoded from a two-line element set.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TleElements {
    pub satnum: u32,
    /// Epoch as Unix seconds (UTC).
    pub epoch: f64,
    pub inclination_deg: f64,
    pub raan_deg: f64,
    pub eccentricity: f64,
    pub arg_perigee_deg: f64,
    pub mean_anomaly_deg: f64,
    /// Revolutions per day.
    pub mean_motion: f64,
    /// Drag term, 1/earth radii.
    pub bstar: f64,
}

/// Mod-10 checksum over the first 68 characters: digits count their value,
/// `-` counts as one.
pub fn tle_checksum(line: &str) -> u32 {
    line.chars()
        .take(TLE_LINE_LEN - 1)
        .map(|c| match c {
            '0'..='9' => c as u32 - '0' as u32,
            '-' => 1,
            _ => 0,
        })
        .sum::<u32>()
        % 10
}

fn field<'a>(line: &'a str, start: usize, end: usize) -> &'a str {
    &line[start - 1..end]
}

fn parse_f64(line: &str, start: usize, end: usize, name: &'static str) -> Result<f64> {
    let text = field(line, start, end).trim();
    text.parse().map_err(|_| GeorefError::FieldParse {
        field: name,
        text: text.to_string(),
    })
}

/// Fields like ` 28098-4` meaning 0.28098e-4.
fn parse_implied(line: &str, start: usize, end: usize, name: &'static str) -> Result<f64> {
    let raw = field(line, start, end);
    let err = || GeorefError::FieldParse {
        field: name,
        text: raw.to_string(),
    };
    let text = raw.trim();
    if text.is_empty() {
        return Ok(0.0);
    }
    let (sign, body) = match text.as_bytes()[0] {
        b'-' => (-1.0, &text[1..]),
        b'+' => (1.0, &text[1..]),
        _ => (1.0, text),
    };
    let split = body.rfind(['-', '+']).filter(|&i| i > 0).ok_or_else(err)?;
    let mantissa: f64 = format!("0.{}", &body[..split]).parse().map_err(|_| err())?;
    let exponent: i32 = body[split..].parse().map_err(|_| err())?;
    Ok(sign * mantissa * 10f64.powi(exponent))
}

fn check_line(line: &str, number: u8) -> Result<()> {
    if line.len() != TLE_LINE_LEN || !line.is_ascii() {
        return Err(GeorefError::BadLength {
            line: number,
            len: line.chars().count(),
        });
    }
    if !line.starts_with(char::from(b'0' + number)) {
        return Err(GeorefError::FieldParse {
            field: "line number",
            text: line[..1].to_string(),
        });
    }
    let stated = line.as_bytes()[TLE_LINE_LEN - 1];
    if !stated.is_ascii_digit() || u32::from(stated - b'0') != tle_checksum(line) {
        return Err(GeorefError::BadChecksum { line: number });
    }
    Ok(())
}

fn epoch_unix(year2: u32, day: f64) -> Result<f64> {
    let year = if year2 < 57 { 2000 + year2 } else { 1900 + year2 } as i32;
    let jan1 = NaiveDate::from_ymd_opt(year, 1, 1)
        .and_then(|d| d.and_hms_opt(0, 0, 0))
        .ok_or(GeorefError::FieldParse {
            field: "epoch year",
            text: year.to_string(),
        })?;
    Ok(Utc.from_utc_datetime(&jan1).timestamp() as f64 + (day - 1.0) * 86_400.0)
}

pub fn parse_tle(line1: &str, line2: &str) -> Result<TleElements> {
    check_line(line1, 1)?;
    check_line(line2, 2)?;
    let satnum = field(line1, 3, 7).trim().parse().map_err(|_| GeorefError::FieldParse {
        field: "satellite number",
        text: field(line1, 3, 7).to_string(),
    })?;
    let year2 = parse_f64(line1, 19, 20, "epoch year")? as u32;
    let day = parse_f64(line1, 21, 32, "epoch day")?;
    let bstar = parse_implied(line1, 54, 61, "bstar")?;
    let ecc_text = field(line2, 27, 33).trim();
    let eccentricity: f64 = format!("0.{ecc_text}").parse().map_err(|_| GeorefError::FieldParse {
        field: "eccentricity",
        text: ecc_text.to_string(),
    })?;
    let el = TleElements {
        satnum,
        epoch: epoch_unix(year2, day)?,
        inclination_deg: parse_f64(line2, 9, 16, "inclination")?,
        raan_deg: parse_f64(line2, 18, 25, "raan")?,
        eccentricity,
        arg_perigee_deg: parse_f64(line2, 35, 42, "argument of perigee")?,
        mean_anomaly_deg: parse_f64(line2, 44, 51, "mean anomaly")?,
        mean_motion: parse_f64(line2, 53, 63, "mean motion")?,
        bstar,
    };
    if !(0.0..1.0).contains(&el.eccentricity) || el.mean_motion <= 0.0 {
        return Err(GeorefError::FieldParse {
            field: "elements",
            text: format!("e={} n={}", el.eccentricity, el.mean_motion),
        });
    }
    Ok(el)
}

fn implied(value: f64) -> String {
    if value == 0.0 {
        return " 00000-0".into();
    }
    let sign = if value < 0.0 { '-' } else { ' ' };
    let mut exp = value.abs().log10().floor() as i32 + 1;
    let mut mant = (value.abs() / 10f64.powi(exp) * 1e5).round() as u32;
    if mant >= 100_000 {
        mant /= 10;
        exp += 1;
    }
    let esign = if exp < 0 { '-' } else { '+' };
    format!("{sign}{mant:05}{esign}{}", exp.abs())
}

fn with_checksum(mut body: String) -> String {
    body.push(char::from(b'0' + tle_checksum(&body) as u8));
    body
}

/// Encodes elements as two checksummed TLE lines.
pub fn format_tle(el: &TleElements) -> (String, String) {
    let dt = Utc.timestamp_opt(el.epoch.floor() as i64, 0).single().expect("epoch in range");
    let jan1 = Utc.with_ymd_and_hms(dt.year(), 1, 1, 0, 0, 0).single().expect("valid date");
    let day = (el.epoch - jan1.timestamp() as f64) / 86_400.0 + 1.0;
    let l1 = format!(
        "1 {:05}U 00000A   {:02}{:012.8}  .00000000  00000-0 {} 0  999",
        el.satnum,
        dt.year() % 100,
        day,
        implied(el.bstar)
    );
    let ecc = format!("{:.7}", el.eccentricity);
    let l2 = format!(
        "2 {:05} {:8.4} {:8.4} {} {:8.4} {:8.4} {:11.8}    1",
        el.satnum,
        el.inclination_deg,
        el.raan_deg.rem_euclid(360.0),
        &ecc[2..],
        el.arg_perigee_deg.rem_euclid(360.0),
        el.mean_anomaly_deg.rem_euclid(360.0),
        el.mean_motion
    );
    (with_checksum(l1), with_checksum(l2))
}

#[cfg(test)]
mod tests {
    use super::*;

    const L1: &str = "1 00005U 58002B   00179.78495062  .00000023  00000-0  28098-4 0  4753";
    const L2: &str = "2 00005  34.2682 348.7242 1859667 331.7664  19.3264 10.82419157413667";

    #[test]
    fn parses_reference_set() {
        let el = parse_tle(L1, L2).unwrap();
        assert_eq!(el.satnum, 5);
        assert!((el.eccentricity - 0.1859667).abs() < 1e-12);
        assert!((el.inclination_deg - 34.2682).abs() < 1e-12);
        assert!((el.mean_motion - 10.82419157).abs() < 1e-12);
        assert!((el.bstar - 0.28098e-4).abs() < 1e-15);
        // 2000 day 179.78495062: 2000-06-27 18:50:19.733568 UTC.
        assert!((el.epoch - 962_131_819.733_568).abs() < 1e-3);
    }

    #[test]
    fn checksum_rule() {
        assert_eq!(tle_checksum(L1), 3);
        assert_eq!(tle_checksum(L2), 7);
        assert_eq!(tle_checksum("1-1-"), 4);
    }

    #[test]
    fn flipped_checksum_rejected() {
        let bad = format!("{}4", &L1[..68]);
        assert!(matches!(parse_tle(&bad, L2), Err(GeorefError::BadChecksum { line: 1 })));
    }

    #[test]
    fn short_line_rejected() {
        assert!(matches!(parse_tle(&L1[..68], L2), Err(GeorefError::BadLength { line: 1, len: 68 })));
    }

    #[test]
    fn formatted_synthetic_roundtrips() {
        let el = TleElements {
            satnum: 40931,
            epoch: 1_500_000_000.25,
            inclination_deg: 97.5,
            raan_deg: 123.4567,
            eccentricity: 0.0011234,
            arg_perigee_deg: 90.0,
            mean_anomaly_deg: 270.125,
            mean_motion: 15.18734512,
            bstar: -1.2345e-5,
        };
        let (l1, l2) = format_tle(&el);
        assert_eq!(l1.len(), 69);
        assert_eq!(l2.len(), 69);
        let back = parse_tle(&l1, &l2).unwrap();
        assert!((back.eccentricity - el.eccentricity).abs() < 1e-12);
        assert!((back.inclination_deg - el.inclination_deg).abs() < 1e-12);
        assert!((back.mean_motion - el.mean_motion).abs() < 1e-9);
        assert!((back.bstar - el.bstar).abs() < 1e-10);
        assert!((back.epoch - el.epoch).abs() < 1e-3);
    }
}

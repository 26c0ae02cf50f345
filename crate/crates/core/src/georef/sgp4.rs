//! Near-Earth SGP4 propagation (WGS72 constants, TEME output).

use std::f64::consts::TAU;

use nalgebra::Vector3;

use super::tle::TleElements;
use super::{GeorefError, Result};

const MU: f64 = 398_600.8;
const RADIUS: f64 = 6378.135;
const J2: f64 = 0.001_082_616;
const J3: f64 = -0.000_002_538_81;
const J4: f64 = -0.000_001_655_97;
const X2O3: f64 = 2.0 / 3.0;
/// Minutes per radian of rev/day.
const XPDOTP: f64 = 1440.0 / TAU;

fn xke() -> f64 {
    60.0 / (RADIUS * RADIUS * RADIUS / MU).sqrt()
}

/// Position (km) and velocity (km/s) at `t` (Unix seconds).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StateVector {
    pub t: f64,
    pub r: Vector3<f64>,
    pub v: Vector3<f64>,
}

/// Initialized SGP4 propagator for one element set.
#[derive(Debug, Clone)]
pub struct Sgp4 {
    epoch: f64,
    ecco: f64,
    inclo: f64,
    nodeo: f64,
    argpo: f64,
    mo: f64,
    bstar: f64,
    no: f64,
    isimp: bool,
    aycof: f64,
    con41: f64,
    cc1: f64,
    cc4: f64,
    cc5: f64,
    d2: f64,
    d3: f64,
    d4: f64,
    delmo: f64,
    eta: f64,
    argpdot: f64,
    omgcof: f64,
    sinmao: f64,
    t2cof: f64,
    t3cof: f64,
    t4cof: f64,
    t5cof: f64,
    x1mth2: f64,
    x7thm1: f64,
    mdot: f64,
    nodedot: f64,
    xlcof: f64,
    xmcof: f64,
    nodecf: f64,
}

impl Sgp4 {
    pub fn new(el: &TleElements) -> Result<Self> {
        let xke = xke();
        let j3oj2 = J3 / J2;
        let ecco = el.eccentricity;
        let inclo = el.inclination_deg.to_radians();
        let nodeo = el.raan_deg.to_radians();
        let argpo = el.arg_perigee_deg.to_radians();
        let mo = el.mean_anomaly_deg.to_radians();
        let no_kozai = el.mean_motion / XPDOTP;
        if !(no_kozai > 0.0) || !(0.0..1.0).contains(&ecco) {
            return Err(GeorefError::Propagation(format!(
                "invalid elements e={ecco} n={}",
                el.mean_motion
            )));
        }

        // Recover the original mean motion from the Kozai value.
        let eccsq = ecco * ecco;
        let omeosq = 1.0 - eccsq;
        let rteosq = omeosq.sqrt();
        let cosio = inclo.cos();
        let cosio2 = cosio * cosio;
        let ak = (xke / no_kozai).powf(X2O3);
        let d1 = 0.75 * J2 * (3.0 * cosio2 - 1.0) / (rteosq * omeosq);
        let mut del = d1 / (ak * ak);
        let adel = ak * (1.0 - del * del - del * (1.0 / 3.0 + 134.0 * del * del / 81.0));
        del = d1 / (adel * adel);
        let no = no_kozai / (1.0 + del);

        let period_min = TAU / no;
        if period_min >= 225.0 {
            return Err(GeorefError::DeepSpaceUnsupported { period_min });
        }

        let ao = (xke / no).powf(X2O3);
        let sinio = inclo.sin();
        let po = ao * omeosq;
        let con42 = 1.0 - 5.0 * cosio2;
        let con41 = -con42 - cosio2 - cosio2;
        let posq = po * po;
        let rp = ao * (1.0 - ecco);

        let isimp = rp < 220.0 / RADIUS + 1.0;
        let ss = 78.0 / RADIUS + 1.0;
        let qzms2t = ((120.0 - 78.0) / RADIUS).powi(4);
        let mut sfour = ss;
        let mut qzms24 = qzms2t;
        let perige = (rp - 1.0) * RADIUS;
        if perige < 156.0 {
            sfour = if perige < 98.0 { 20.0 } else { perige - 78.0 };
            qzms24 = ((120.0 - sfour) / RADIUS).powi(4);
            sfour = sfour / RADIUS + 1.0;
        }
        let pinvsq = 1.0 / posq;
        let tsi = 1.0 / (ao - sfour);
        let eta = ao * ecco * tsi;
        let etasq = eta * eta;
        let eeta = ecco * eta;
        let psisq = (1.0 - etasq).abs();
        let coef = qzms24 * tsi.powi(4);
        let coef1 = coef / psisq.powf(3.5);
        let cc2 = coef1
            * no
            * (ao * (1.0 + 1.5 * etasq + eeta * (4.0 + etasq))
                + 0.375 * J2 * tsi / psisq * con41 * (8.0 + 3.0 * etasq * (8.0 + etasq)));
        let bstar = el.bstar;
        let cc1 = bstar * cc2;
        let cc3 = if ecco > 1.0e-4 {
            -2.0 * coef * tsi * j3oj2 * no * sinio / ecco
        } else {
            0.0
        };
        let x1mth2 = 1.0 - cosio2;
        let cc4 = 2.0
            * no
            * coef1
            * ao
            * omeosq
            * (eta * (2.0 + 0.5 * etasq) + ecco * (0.5 + 2.0 * etasq)
                - J2 * tsi / (ao * psisq)
                    * (-3.0 * con41 * (1.0 - 2.0 * eeta + etasq * (1.5 - 0.5 * eeta))
                        + 0.75 * x1mth2 * (2.0 * etasq - eeta * (1.0 + etasq)) * (2.0 * argpo).cos()));
        let cc5 = 2.0 * coef1 * ao * omeosq * (1.0 + 2.75 * (etasq + eeta) + eeta * etasq);
        let cosio4 = cosio2 * cosio2;
        let temp1 = 1.5 * J2 * pinvsq * no;
        let temp2 = 0.5 * temp1 * J2 * pinvsq;
        let temp3 = -0.46875 * J4 * pinvsq * pinvsq * no;
        let mdot = no
            + 0.5 * temp1 * rteosq * con41
            + 0.0625 * temp2 * rteosq * (13.0 - 78.0 * cosio2 + 137.0 * cosio4);
        let argpdot = -0.5 * temp1 * con42
            + 0.0625 * temp2 * (7.0 - 114.0 * cosio2 + 395.0 * cosio4)
            + temp3 * (3.0 - 36.0 * cosio2 + 49.0 * cosio4);
        let xhdot1 = -temp1 * cosio;
        let nodedot = xhdot1 + (0.5 * temp2 * (4.0 - 19.0 * cosio2) + 2.0 * temp3 * (3.0 - 7.0 * cosio2)) * cosio;
        let omgcof = bstar * cc3 * argpo.cos();
        let xmcof = if ecco > 1.0e-4 { -X2O3 * coef * bstar / eeta } else { 0.0 };
        let nodecf = 3.5 * omeosq * xhdot1 * cc1;
        let t2cof = 1.5 * cc1;
        let denom = if (cosio + 1.0).abs() > 1.5e-12 { 1.0 + cosio } else { 1.5e-12 };
        let xlcof = -0.25 * j3oj2 * sinio * (3.0 + 5.0 * cosio) / denom;
        let aycof = -0.5 * j3oj2 * sinio;
        let delmo = (1.0 + eta * mo.cos()).powi(3);
        let sinmao = mo.sin();
        let x7thm1 = 7.0 * cosio2 - 1.0;

        let (mut d2, mut d3, mut d4, mut t3cof, mut t4cof, mut t5cof) = (0.0, 0.0, 0.0, 0.0, 0.0, 0.0);
        if !isimp {
            let cc1sq = cc1 * cc1;
            d2 = 4.0 * ao * tsi * cc1sq;
            let temp = d2 * tsi * cc1 / 3.0;
            d3 = (17.0 * ao + sfour) * temp;
            d4 = 0.5 * temp * ao * tsi * (221.0 * ao + 31.0 * sfour) * cc1;
            t3cof = d2 + 2.0 * cc1sq;
            t4cof = 0.25 * (3.0 * d3 + cc1 * (12.0 * d2 + 10.0 * cc1sq));
            t5cof = 0.2 * (3.0 * d4 + 12.0 * cc1 * d3 + 6.0 * d2 * d2 + 15.0 * cc1sq * (2.0 * d2 + cc1sq));
        }

        Ok(Self {
            epoch: el.epoch,
            ecco,
            inclo,
            nodeo,
            argpo,
            mo,
            bstar,
            no,
            isimp,
            aycof,
            con41,
            cc1,
            cc4,
            cc5,
            d2,
            d3,
            d4,
            delmo,
            eta,
            argpdot,
            omgcof,
            sinmao,
            t2cof,
            t3cof,
            t4cof,
            t5cof,
            x1mth2,
            x7thm1,
            mdot,
            nodedot,
            xlcof,
            xmcof,
            nodecf,
        })
    }

    pub fn epoch(&self) -> f64 {
        self.epoch
    }

    /// Un-Kozai'd mean motion, rad/min.
    pub fn mean_motion(&self) -> f64 {
        self.no
    }

    /// Position (km) and velocity (km/s) in TEME, `tsince` minutes from epoch.
    pub fn propagate_minutes(&self, tsince: f64) -> Result<(Vector3<f64>, Vector3<f64>)> {
        let xke = xke();
        let t = tsince;
        let xmdf = self.mo + self.mdot * t;
        let argpdf = self.argpo + self.argpdot * t;
        let nodedf = self.nodeo + self.nodedot * t;
        let mut argpm = argpdf;
        let mut mm = xmdf;
        let t2 = t * t;
        let mut nodem = nodedf + self.nodecf * t2;
        let mut tempa = 1.0 - self.cc1 * t;
        let mut tempe = self.bstar * self.cc4 * t;
        let mut templ = self.t2cof * t2;

        if !self.isimp {
            let delomg = self.omgcof * t;
            let delm = self.xmcof * ((1.0 + self.eta * xmdf.cos()).powi(3) - self.delmo);
            let temp = delomg + delm;
            mm = xmdf + temp;
            argpm = argpdf - temp;
            let t3 = t2 * t;
            let t4 = t3 * t;
            tempa -= self.d2 * t2 + self.d3 * t3 + self.d4 * t4;
            tempe += self.bstar * self.cc5 * (mm.sin() - self.sinmao);
            templ += self.t3cof * t3 + t4 * (self.t4cof + t * self.t5cof);
        }

        let am = (xke / self.no).powf(X2O3) * tempa * tempa;
        let nm = xke / am.powf(1.5);
        let mut em = self.ecco - tempe;
        if !(-0.001..1.0).contains(&em) {
            return Err(GeorefError::Propagation(format!("eccentricity {em} at {t} min")));
        }
        em = em.max(1.0e-6);
        mm += self.no * templ;
        let xlm = (mm + argpm + nodem).rem_euclid(TAU);
        nodem = nodem.rem_euclid(TAU);
        argpm = argpm.rem_euclid(TAU);
        mm = (xlm - argpm - nodem).rem_euclid(TAU);

        let sinip = self.inclo.sin();
        let cosip = self.inclo.cos();

        // Long-period periodics.
        let axnl = em * argpm.cos();
        let temp = 1.0 / (am * (1.0 - em * em));
        let aynl = em * argpm.sin() + temp * self.aycof;
        let xl = mm + argpm + nodem + temp * self.xlcof * axnl;

        // Kepler's equation in the Lyddane form.
        let u = (xl - nodem).rem_euclid(TAU);
        let mut eo1 = u;
        let mut tem5: f64 = 9999.9;
        let (mut sineo1, mut coseo1) = (0.0, 0.0);
        let mut ktr = 1;
        while tem5.abs() >= 1.0e-12 && ktr <= 10 {
            sineo1 = eo1.sin();
            coseo1 = eo1.cos();
            tem5 = 1.0 - coseo1 * axnl - sineo1 * aynl;
            tem5 = (u - aynl * coseo1 + axnl * sineo1 - eo1) / tem5;
            if tem5.abs() >= 0.95 {
                tem5 = 0.95_f64.copysign(tem5);
            }
            eo1 += tem5;
            ktr += 1;
        }

        // Short-period periodics.
        let ecose = axnl * coseo1 + aynl * sineo1;
        let esine = axnl * sineo1 - aynl * coseo1;
        let el2 = axnl * axnl + aynl * aynl;
        let pl = am * (1.0 - el2);
        if pl < 0.0 {
            return Err(GeorefError::Propagation(format!("semi-latus rectum {pl} at {t} min")));
        }
        let rl = am * (1.0 - ecose);
        let rdotl = am.sqrt() * esine / rl;
        let rvdotl = pl.sqrt() / rl;
        let betal = (1.0 - el2).sqrt();
        let temp = esine / (1.0 + betal);
        let sinu = am / rl * (sineo1 - aynl - axnl * temp);
        let cosu = am / rl * (coseo1 - axnl + aynl * temp);
        let mut su = sinu.atan2(cosu);
        let sin2u = (cosu + cosu) * sinu;
        let cos2u = 1.0 - 2.0 * sinu * sinu;
        let temp = 1.0 / pl;
        let temp1 = 0.5 * J2 * temp;
        let temp2 = temp1 * temp;

        let mrt = rl * (1.0 - 1.5 * temp2 * betal * self.con41) + 0.5 * temp1 * self.x1mth2 * cos2u;
        su -= 0.25 * temp2 * self.x7thm1 * sin2u;
        let xnode = nodem + 1.5 * temp2 * cosip * sin2u;
        let xinc = self.inclo + 1.5 * temp2 * cosip * sinip * cos2u;
        let mvt = rdotl - nm * temp1 * self.x1mth2 * sin2u / xke;
        let rvdot = rvdotl + nm * temp1 * (self.x1mth2 * cos2u + 1.5 * self.con41) / xke;

        if mrt < 1.0 {
            return Err(GeorefError::Decay { radius_km: mrt * RADIUS });
        }

        let (sinsu, cossu) = su.sin_cos();
        let (snod, cnod) = xnode.sin_cos();
        let (sini, cosi) = xinc.sin_cos();
        let xmx = -snod * cosi;
        let xmy = cnod * cosi;
        let uvec = Vector3::new(xmx * sinsu + cnod * cossu, xmy * sinsu + snod * cossu, sini * sinsu);
        let vvec = Vector3::new(xmx * cossu - cnod * sinsu, xmy * cossu - snod * sinsu, sini * cossu);
        let vkmpersec = RADIUS * xke / 60.0;
        Ok((uvec * (mrt * RADIUS), (uvec * mvt + vvec * rvdot) * vkmpersec))
    }

    /// State at Unix time `t`.
    pub fn state(&self, t: f64) -> Result<StateVector> {
        let (r, v) = self.propagate_minutes((t - self.epoch) / 60.0)?;
        Ok(StateVector { t, r, v })
    }
}

/// One-shot propagation of `elements` to Unix time `t`.
pub fn sgp4_propagate(elements: &TleElements, t: f64) -> Result<StateVector> {
    Sgp4::new(elements)?.state(t)
}

/// Keplerian semi-major axis for a mean motion in rev/day, km.
pub fn kepler_semi_major_axis(mean_motion_rev_day: f64) -> f64 {
    let n = mean_motion_rev_day * TAU / 86_400.0;
    (MU / (n * n)).cbrt()
}


#[cfg(test)]
mod tests {
    use super::super::tle::parse_tle;
    use super::*;

    fn close(a: Vector3<f64>, b: [f64; 3], tol: f64) {
        let d = (a - Vector3::from(b)).norm();
        assert!(d < tol, "{a:?} vs {b:?}: {d}");
    }

    #[test]
    fn near_earth_reference_vectors() {
        // Reference values from an independent SGP4 implementation.
        let s = Sgp4::new(
            &parse_tle(
                "1 06251U 62025E   06176.82412014  .00008885  00000-0  12808-3 0  3985",
                "2 06251  58.0579  54.0425 0030035 139.1568 221.1854 15.56387291  6774",
            )
            .unwrap(),
        )
        .unwrap();
        let (r, v) = s.propagate_minutes(0.0).unwrap();
        close(r, [3988.3102269938663, 5498.966572352187, 0.9005587865923731], 1e-3);
        close(v, [-3.290032737938881, 2.3576528196347417, 6.496623474956849], 1e-6);
        let (r, _) = s.propagate_minutes(360.0).unwrap();
        close(r, [4993.626428356406, 2890.549699000398, -3600.401456268915], 1e-3);
    }

    #[test]
    fn deep_space_rejected() {
        let geo = TleElements {
            satnum: 1,
            epoch: 0.0,
            inclination_deg: 0.1,
            raan_deg: 0.0,
            eccentricity: 0.0002,
            arg_perigee_deg: 0.0,
            mean_anomaly_deg: 0.0,
            mean_motion: 1.0027,
            bstar: 0.0,
        };
        assert!(matches!(Sgp4::new(&geo), Err(GeorefError::DeepSpaceUnsupported { .. })));
    }

    #[test]
    fn circular_radius_near_kepler_axis() {
        let el = TleElements {
            satnum: 2,
            epoch: 1.5e9,
            inclination_deg: 97.5,
            raan_deg: 10.0,
            eccentricity: 0.0,
            arg_perigee_deg: 0.0,
            mean_anomaly_deg: 0.0,
            mean_motion: 15.2,
            bstar: 0.0,
        };
        let st = sgp4_propagate(&el, el.epoch).unwrap();
        let a = kepler_semi_major_axis(el.mean_motion);
        assert!((st.r.norm() - a).abs() < 15.0, "{} vs {a}", st.r.norm());
        assert!((6500.0..8000.0).contains(&st.r.norm()));
    }
}

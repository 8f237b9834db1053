//! Solar position and clear-sky plane-of-array irradiance.
//!
//! Position follows the NOAA formulation (Meeus' low-precision solar
//! coordinates with an equation-of-time correction); it agrees with full
//! ephemerides to a few hundredths of a degree for 1900–2100. The clear-sky
//! model is the Meinel air-mass attenuation law evaluated on pressure-corrected
//! air mass, with a fixed diffuse fraction, transposed isotropically onto the
//! tilted plane.

use chrono::{Duration, NaiveDate, NaiveDateTime, Timelike};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Irradiance at the top of the atmosphere used by the Meinel law, W/m².
const MEINEL_SOLAR_CONSTANT: f64 = 1353.0;
/// Diffuse horizontal share of the horizontal beam component.
const DIFFUSE_FRACTION: f64 = 0.1;
/// Ground reflectance for the reflected component on tilted planes.
pub const ALBEDO: f64 = 0.2;
/// Scale height of the isothermal atmosphere, m.
const SCALE_HEIGHT: f64 = 8434.5;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GeoLocation {
    /// Degrees north.
    pub latitude: f64,
    /// Degrees east.
    pub longitude: f64,
    /// Metres above sea level.
    pub altitude: f64,
    /// Hours east of UTC for the local standard time used by all series.
    pub utc_offset: f64,
}

impl GeoLocation {
    pub fn new(latitude: f64, longitude: f64, altitude: f64, utc_offset: f64) -> Result<Self> {
        let loc = GeoLocation {
            latitude,
            longitude,
            altitude,
            utc_offset,
        };
        loc.validate()?;
        Ok(loc)
    }

    /// Universidad de los Andes campus, Bogotá (UTC−5, no daylight saving).
    pub fn bogota() -> Self {
        GeoLocation {
            latitude: 4.6024,
            longitude: -74.0674,
            altitude: 2624.0,
            utc_offset: -5.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(-90.0..=90.0).contains(&self.latitude) {
            return Err(Error::input(format!("latitude {} outside [-90, 90]", self.latitude)));
        }
        if !(-180.0..=180.0).contains(&self.longitude) {
            return Err(Error::input(format!(
                "longitude {} outside [-180, 180]",
                self.longitude
            )));
        }
        if !(self.altitude >= -500.0) {
            return Err(Error::input(format!("altitude {} below -500 m", self.altitude)));
        }
        if !(-14.0..=14.0).contains(&self.utc_offset) {
            return Err(Error::input(format!(
                "utc offset {} h is not a civil offset",
                self.utc_offset
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ArrayOrientation {
    /// Degrees from horizontal.
    pub tilt: f64,
    /// Degrees clockwise from north (180 = facing south).
    pub azimuth: f64,
}

impl ArrayOrientation {
    pub fn new(tilt: f64, azimuth: f64) -> Result<Self> {
        let o = ArrayOrientation { tilt, azimuth };
        o.validate()?;
        Ok(o)
    }

    pub fn validate(&self) -> Result<()> {
        if !(0.0..=90.0).contains(&self.tilt) {
            return Err(Error::input(format!("tilt {} outside [0, 90]", self.tilt)));
        }
        if !(0.0..360.0).contains(&self.azimuth) {
            return Err(Error::input(format!("azimuth {} outside [0, 360)", self.azimuth)));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolarPosition {
    /// True (unrefracted) zenith angle, degrees in [0, 180].
    pub zenith: f64,
    /// Degrees clockwise from north in [0, 360).
    pub azimuth: f64,
}

fn julian_day_utc(utc: NaiveDateTime) -> f64 {
    let j2000 = NaiveDate::from_ymd_opt(2000, 1, 1)
        .expect("valid date")
        .and_hms_opt(12, 0, 0)
        .expect("valid time");
    let secs = (utc - j2000).num_milliseconds() as f64 / 1000.0;
    2_451_545.0 + secs / 86_400.0
}

/// Apparent solar coordinates for local standard time `t`.
pub fn solar_position(t: NaiveDateTime, loc: &GeoLocation) -> Result<SolarPosition> {
    loc.validate()?;
    let offset = Duration::milliseconds((loc.utc_offset * 3_600_000.0).round() as i64);
    let utc = t
        .checked_sub_signed(offset)
        .ok_or_else(|| Error::input(format!("timestamp {t} cannot be resolved to UTC")))?;

    let jc = (julian_day_utc(utc) - 2_451_545.0) / 36_525.0;
    let l0 = (280.46646 + jc * (36_000.76983 + jc * 0.0003032)).rem_euclid(360.0);
    let m = 357.52911 + jc * (35_999.05029 - 0.0001537 * jc);
    let e = 0.016708634 - jc * (0.000042037 + 0.0000001267 * jc);
    let mr = m.to_radians();
    let center = mr.sin() * (1.914602 - jc * (0.004817 + 0.000014 * jc))
        + (2.0 * mr).sin() * (0.019993 - 0.000101 * jc)
        + (3.0 * mr).sin() * 0.000289;
    let true_long = l0 + center;
    let omega = (125.04 - 1934.136 * jc).to_radians();
    let app_long = true_long - 0.00569 - 0.00478 * omega.sin();
    let mean_obliq = 23.0 + (26.0 + (21.448 - jc * (46.815 + jc * (0.00059 - jc * 0.001813))) / 60.0) / 60.0;
    let obliq = (mean_obliq + 0.00256 * omega.cos()).to_radians();
    let decl = (obliq.sin() * app_long.to_radians().sin()).asin();

    let y = (obliq / 2.0).tan().powi(2);
    let l0r = l0.to_radians();
    let eot_min = 4.0
        * (y * (2.0 * l0r).sin() - 2.0 * e * mr.sin() + 4.0 * e * y * mr.sin() * (2.0 * l0r).cos()
            - 0.5 * y * y * (4.0 * l0r).sin()
            - 1.25 * e * e * (2.0 * mr).sin())
        .to_degrees();

    let local_min = t.hour() as f64 * 60.0 + t.minute() as f64 + t.second() as f64 / 60.0;
    let true_solar = (local_min + eot_min + 4.0 * loc.longitude - 60.0 * loc.utc_offset).rem_euclid(1440.0);
    let hour_angle = if true_solar / 4.0 < 0.0 {
        true_solar / 4.0 + 180.0
    } else {
        true_solar / 4.0 - 180.0
    };

    let lat = loc.latitude.to_radians();
    let cos_zen = (lat.sin() * decl.sin() + lat.cos() * decl.cos() * hour_angle.to_radians().cos()).clamp(-1.0, 1.0);
    let zen = cos_zen.acos();
    let zenith = zen.to_degrees();

    let denom = lat.cos() * zen.sin();
    let azimuth = if denom.abs() < 1e-12 {
        // Sun at the zenith or observer at a pole: azimuth is arbitrary.
        180.0
    } else {
        let c = ((lat.sin() * cos_zen - decl.sin()) / denom).clamp(-1.0, 1.0);
        let a = c.acos().to_degrees();
        if hour_angle > 0.0 {
            (a + 180.0).rem_euclid(360.0)
        } else {
            (540.0 - a).rem_euclid(360.0)
        }
    };
    Ok(SolarPosition { zenith, azimuth })
}

/// Kasten–Young relative optical air mass; infinite with the sun below the horizon.
pub fn relative_air_mass(zenith_deg: f64) -> f64 {
    if zenith_deg >= 90.0 {
        return f64::INFINITY;
    }
    1.0 / (zenith_deg.to_radians().cos() + 0.50572 * (96.07995 - zenith_deg).powf(-1.6364))
}

/// Clear-sky irradiance components, W/m².
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClearSky {
    pub dni: f64,
    pub dhi: f64,
    pub ghi: f64,
    pub poa: f64,
}

/// Angle-of-incidence cosine of the beam on the array plane.
pub fn cos_incidence(pos: &SolarPosition, orient: &ArrayOrientation) -> f64 {
    let z = pos.zenith.to_radians();
    let t = orient.tilt.to_radians();
    z.cos() * t.cos() + z.sin() * t.sin() * (pos.azimuth - orient.azimuth).to_radians().cos()
}

pub fn clear_sky_components(pos: &SolarPosition, altitude: f64, orient: &ArrayOrientation) -> ClearSky {
    if pos.zenith >= 90.0 {
        return ClearSky {
            dni: 0.0,
            dhi: 0.0,
            ghi: 0.0,
            poa: 0.0,
        };
    }
    let pressure_ratio = (-altitude / SCALE_HEIGHT).exp();
    let am = relative_air_mass(pos.zenith) * pressure_ratio;
    let dni = MEINEL_SOLAR_CONSTANT * 0.7f64.powf(am.powf(0.678));
    let cz = pos.zenith.to_radians().cos();
    let dhi = DIFFUSE_FRACTION * dni * cz;
    let ghi = dni * cz + dhi;
    let tilt = orient.tilt.to_radians();
    let beam = dni * cos_incidence(pos, orient).max(0.0);
    let sky = dhi * (1.0 + tilt.cos()) / 2.0;
    let ground = ghi * ALBEDO * (1.0 - tilt.cos()) / 2.0;
    ClearSky {
        dni,
        dhi,
        ghi,
        poa: beam + sky + ground,
    }
}

/// Clear-sky plane-of-array irradiance `G_cs` at local time `t`, W/m².
pub fn clear_sky_poa(t: NaiveDateTime, loc: &GeoLocation, orient: &ArrayOrientation) -> Result<f64> {
    orient.validate()?;
    let pos = solar_position(t, loc)?;
    Ok(clear_sky_components(&pos, loc.altitude, orient).poa)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ts(s: &str) -> NaiveDateTime {
        NaiveDateTime::parse_from_str(s, "%Y-%m-%d %H:%M").unwrap()
    }

    fn site_orient() -> ArrayOrientation {
        ArrayOrientation::new(10.0, 180.0).unwrap()
    }

    #[test]
    fn equator_equinox_noon_is_overhead() {
        let loc = GeoLocation::new(0.0, 0.0, 0.0, 0.0).unwrap();
        // 2021 March equinox at 09:37 UTC; equation of time ≈ −7.4 min.
        let p = solar_position(ts("2021-03-20 12:07"), &loc).unwrap();
        assert!(p.zenith < 0.5, "zenith {}", p.zenith);
    }

    #[test]
    fn midnight_is_below_horizon() {
        let p = solar_position(ts("2021-01-15 00:00"), &GeoLocation::bogota()).unwrap();
        assert!(p.zenith > 90.0);
    }

    // Reference values from pvlib's NREL SPA implementation (geometric zenith).
    #[test]
    fn matches_spa_ephemeris_at_reference_site() {
        let loc = GeoLocation::bogota();
        let cases = [
            ("2021-01-15 12:30", 26.265206, 192.826088),
            ("2021-03-20 12:00", 4.571207, 168.578130),
            ("2021-06-21 06:30", 80.869562, 66.970240),
            ("2020-09-10 16:45", 72.753652, 273.290375),
        ];
        for (t, zen, az) in cases {
            let p = solar_position(ts(t), &loc).unwrap();
            assert!((p.zenith - zen).abs() <= 0.2, "{t}: zenith {} vs {zen}", p.zenith);
            assert!((p.azimuth - az).abs() <= 0.2, "{t}: azimuth {} vs {az}", p.azimuth);
        }
    }

    #[test]
    fn invalid_location_is_rejected() {
        assert!(GeoLocation::new(91.0, 0.0, 0.0, 0.0).is_err());
        assert!(GeoLocation::new(0.0, 181.0, 0.0, 0.0).is_err());
        assert!(GeoLocation::new(0.0, 0.0, -600.0, 0.0).is_err());
        assert!(ArrayOrientation::new(95.0, 180.0).is_err());
        assert!(ArrayOrientation::new(10.0, 360.0).is_err());
        let bad = GeoLocation {
            latitude: 100.0,
            ..GeoLocation::bogota()
        };
        assert!(solar_position(ts("2021-01-01 12:00"), &bad).is_err());
    }

    #[test]
    fn clear_sky_is_zero_at_night() {
        let g = clear_sky_poa(ts("2021-01-15 02:00"), &GeoLocation::bogota(), &site_orient()).unwrap();
        assert_eq!(g, 0.0);
    }

    fn daily_profile(date: &str) -> Vec<(NaiveDateTime, f64)> {
        let d = NaiveDate::parse_from_str(date, "%Y-%m-%d").unwrap();
        crate::series::day_timestamps(d)
            .into_iter()
            .map(|t| (t, clear_sky_poa(t, &GeoLocation::bogota(), &site_orient()).unwrap()))
            .collect()
    }

    #[test]
    fn january_profile_peaks_near_noon_within_envelope() {
        let prof = daily_profile("2021-01-15");
        let (t_peak, g_peak) = prof.iter().copied().max_by(|a, b| a.1.total_cmp(&b.1)).unwrap();
        assert!((11..13).contains(&t_peak.hour()), "peak at {t_peak}");
        assert!((900.0..=1250.0).contains(&g_peak), "peak {g_peak}");
    }

    #[test]
    fn profile_is_zero_iff_sun_down_and_unimodal() {
        let loc = GeoLocation::bogota();
        for date in ["2021-01-15", "2020-04-01", "2020-06-21", "2020-09-10", "2020-12-21"] {
            let prof = daily_profile(date);
            for (t, g) in &prof {
                let z = solar_position(*t, &loc).unwrap().zenith;
                assert_eq!(*g == 0.0, z >= 90.0, "{t}: g={g} z={z}");
            }
            let day: Vec<f64> = prof.iter().map(|p| p.1).filter(|g| *g > 0.0).collect();
            let peak = day.iter().enumerate().max_by(|a, b| a.1.total_cmp(b.1)).unwrap().0;
            assert!(day[..=peak].windows(2).all(|w| w[1] >= w[0]), "{date} rising limb");
            assert!(day[peak..].windows(2).all(|w| w[1] <= w[0]), "{date} falling limb");
        }
    }

    #[test]
    fn higher_altitude_never_reduces_clear_sky() {
        let orient = site_orient();
        for z in [0.0, 20.0, 45.0, 70.0, 85.0, 89.5] {
            let pos = SolarPosition {
                zenith: z,
                azimuth: 180.0,
            };
            for alt in [0.0, 100.0, 1312.0, 2624.0] {
                let g1 = clear_sky_components(&pos, alt, &orient).poa;
                let g2 = clear_sky_components(&pos, 2.0 * alt, &orient).poa;
                assert!(g2 >= g1, "z={z} alt={alt}: {g2} < {g1}");
            }
        }
    }
}

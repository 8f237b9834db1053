//! Sun path and clear-sky plane-of-array irradiance over one day in Bogotá.
//!
//! cargo run --example solar_geometry -- 2020-06-21

use chrono::NaiveDate;
use pvtwin::geometry::{clear_sky_components, solar_position, ArrayOrientation, GeoLocation};
use pvtwin::series::day_timestamps;

fn main() -> pvtwin::Result<()> {
    let date = std::env::args()
        .nth(1)
        .and_then(|s| NaiveDate::parse_from_str(&s, "%Y-%m-%d").ok())
        .unwrap_or(NaiveDate::from_ymd_opt(2020, 3, 20).unwrap());
    let loc = GeoLocation::bogota();
    let orient = ArrayOrientation::new(10.0, 180.0)?;

    println!("time   zenith  azimuth    GHI    POA");
    let mut energy = 0.0;
    for t in day_timestamps(date) {
        let pos = solar_position(t, &loc)?;
        let cs = clear_sky_components(&pos, loc.altitude, &orient);
        energy += cs.poa / 12.0;
        if t.format("%M").to_string() == "00" && pos.zenith < 90.0 {
            println!(
                "{}  {:6.2}  {:7.2}  {:5.0}  {:5.0}",
                t.format("%H:%M"),
                pos.zenith,
                pos.azimuth,
                cs.ghi,
                cs.poa
            );
        }
    }
    println!("clear-sky POA insolation on {date}: {:.2} kWh/m²", energy / 1000.0);
    Ok(())
}

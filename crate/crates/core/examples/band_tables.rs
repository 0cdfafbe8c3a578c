//! Sentinel-2A/2B band tables, band orders and the FDI wavelength factor.

use debris_core::prelude::*;

fn main() -> Result<()> {
    let a = WavelengthTable::sentinel2(Sensor::S2A);
    let b = WavelengthTable::sentinel2(Sensor::S2B);
    println!(
        "{:<4} {:<13} {:>8} {:>8} {:>5}",
        "key", "band", "S2A nm", "S2B nm", "res"
    );
    for (x, y) in a.bands().iter().zip(b.bands()) {
        println!(
            "{:<4} {:<13} {:>8.1} {:>8.1} {:>4}m",
            x.key, x.descriptor, x.wavelength_nm, y.wavelength_nm, x.resolution_m
        );
    }

    println!("\nMARIDA patch order: {}", MARIDA_ORDER.join(" "));
    for sensor in [Sensor::S2A, Sensor::S2B] {
        let p = FdiParams::sentinel2(sensor);
        println!("{sensor:?} FDI factor {:.12}", p.wavelength_factor());
    }
    let swir = FdiParams::swir_interpolation(&a)?;
    println!("SWIR-interpolation factor {:.12}", swir.wavelength_factor());
    println!(
        "\nas JSON:\n{}",
        serde_json::to_string_pretty(&a.select(&["B4", "B8"])?.bands()).expect("serializes")
    );
    Ok(())
}

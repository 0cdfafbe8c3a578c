//! Per-detector accuracy of NDVI, FDI, WCI and the combined rule on a
//! labeled scene.

use debris_core::eval::{per_index_report, DetectorKind};
use debris_core::prelude::*;

fn main() -> Result<()> {
    let table = WavelengthTable::sentinel2(Sensor::S2A).select(&MARIDA_ORDER)?;
    let spec = SceneSpec::new(64, 64)
        .with_object(
            Shape::Rect {
                x: 20,
                y: 28,
                w: 12,
                h: 6,
            },
            "ship-metal",
            1.0,
        )
        .with_object(
            Shape::Rect {
                x: 32,
                y: 28,
                w: 6,
                h: 6,
            },
            "plastic",
            1.0,
        )
        .with_object(
            Shape::Disk {
                cx: 12.0,
                cy: 12.0,
                r: 4.0,
            },
            "seaweed",
            0.9,
        )
        .with_noise(0.005, 11);
    let scene = generate(&spec, &table)?;

    for cfg in [ThresholdConfig::default(), ThresholdConfig::otsu()] {
        let report = per_index_report(&scene, &cfg, None)?;
        println!("{:?} thresholds, water reference {}", cfg.mode, report.water_reference);
        print!("{}", report.table());
        let combined = report.get(DetectorKind::Combined);
        println!("combined confusion (rows truth, columns predicted):");
        for (class, row) in Class::ALL.iter().zip(combined.confusion) {
            println!("  {:<15} {:?}", class.name(), row);
        }
        println!();
    }
    Ok(())
}

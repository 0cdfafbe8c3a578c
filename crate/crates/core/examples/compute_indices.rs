//! NDVI, FDI and WCI over a stack.
//!
//! ```text
//! cargo run --example compute_indices [-- STACK.tif]
//! ```
//!
//! Without an argument a synthetic 32x32 scene with a plastic patch is used.

use std::path::Path;

use debris_core::prelude::*;

fn main() -> Result<()> {
    let stack = match std::env::args().nth(1) {
        Some(path) => read_stack(Path::new(&path), &ReadOptions::default())?,
        None => {
            let table = WavelengthTable::sentinel2(Sensor::S2A).select(&MARIDA_ORDER)?;
            let spec = SceneSpec::new(32, 32)
                .with_object(
                    Shape::Rect {
                        x: 12,
                        y: 12,
                        w: 6,
                        h: 6,
                    },
                    "plastic",
                    0.8,
                )
                .with_noise(0.003, 7);
            generate(&spec, &table)?.stack
        }
    };
    println!(
        "stack {}x{} with bands {:?}",
        stack.width(),
        stack.height(),
        stack.wavelengths().keys()
    );

    let params = FdiParams::from_table(stack.wavelengths())?;
    println!("FDI wavelength factor {:.10}", params.wavelength_factor());

    let reference = choose_water_reference(&stack, None, None)?;
    let maps = [ndvi(&stack)?, fdi(&stack, &params)?, wci(&stack, &reference, None)?];
    println!(
        "\n{:<6} {:>10} {:>10} {:>10} {:>7}",
        "index", "min", "mean", "max", "valid"
    );
    for map in &maps {
        let s = map.stats();
        let f = |v: Option<f64>| v.map_or("-".to_string(), |v| format!("{v:.4}"));
        println!(
            "{:<6} {:>10} {:>10} {:>10} {:>7}",
            map.kind().name(),
            f(s.min),
            f(s.mean),
            f(s.max),
            s.valid_count
        );
    }

    let (cx, cy) = (stack.width() / 2, stack.height() / 2);
    println!("\ncentre pixel ({cx},{cy}):");
    for map in &maps {
        println!("  {} = {:?}", map.kind().name(), map.get(cx, cy));
    }
    Ok(())
}

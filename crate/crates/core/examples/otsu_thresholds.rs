//! Per-scene Otsu thresholds on each index map, with the histogram they
//! come from.

use debris_core::classify::{Histogram, OTSU_BINS};
use debris_core::prelude::*;

fn main() -> Result<()> {
    let table = WavelengthTable::sentinel2(Sensor::S2A).select(&MARIDA_ORDER)?;
    let spec = SceneSpec::new(64, 64)
        .with_object(
            Shape::Rect {
                x: 28,
                y: 28,
                w: 8,
                h: 8,
            },
            "plastic",
            0.5,
        )
        .with_noise(0.005, 2);
    let stack = generate(&spec, &table)?.stack;
    let reference = choose_water_reference(&stack, None, None)?;
    let params = FdiParams::from_table(stack.wavelengths())?;

    for map in [ndvi(&stack)?, fdi(&stack, &params)?, wci(&stack, &reference, None)?] {
        let values: Vec<f64> = map.valid_values().collect();
        let h = Histogram::from_values(&values)?;
        let k = h.otsu_boundary();
        println!(
            "{}: range [{:.4}, {:.4}], boundary {k}/{OTSU_BINS}, threshold {:.5}",
            map.kind().name(),
            h.min,
            h.max,
            otsu_threshold(&map)?
        );
        sparkline(&h.counts, k);
    }

    let ndvi_map = ndvi(&stack)?;
    let fdi_map = fdi(&stack, &params)?;
    let wci_map = wci(&stack, &reference, None)?;
    let resolved = ThresholdConfig::otsu().resolve(&ndvi_map, &fdi_map, &wci_map)?;
    println!("\nresolved: {}", serde_json::to_string(&resolved).expect("serializes"));

    let flat = vec![0.25; 100];
    println!(
        "flat input: {:?}",
        debris_core::classify::otsu_threshold_values(&flat).err()
    );
    Ok(())
}

/// 64-column text histogram with the split marked by `|`.
fn sparkline(counts: &[u64; OTSU_BINS], boundary: usize) {
    const LEVELS: &[char] = &[' ', '.', ':', '-', '=', '+', '*', '#'];
    let grouped: Vec<u64> = counts.chunks(4).map(|c| c.iter().sum()).collect();
    let max = *grouped.iter().max().unwrap_or(&1) as f64;
    let line: String = grouped
        .iter()
        .enumerate()
        .flat_map(|(i, &c)| {
            let level = if c == 0 {
                0
            } else {
                1 + ((c as f64).ln_1p() / max.ln_1p() * 6.0) as usize
            };
            let mark = (i * 4 < boundary && boundary <= i * 4 + 3).then_some('|');
            std::iter::once(LEVELS[level.min(7)]).chain(mark)
        })
        .collect();
    println!("  [{line}]");
}

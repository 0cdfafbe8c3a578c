//! Evaluates a MARIDA patch against its label mask.
//!
//! ```text
//! cargo run --example marida_patch -- S2_x_y_z.tif S2_x_y_z_cl.tif [water_ref.json]
//! ```
//!
//! The patch is read in MARIDA band order and the 15 thematic codes are
//! collapsed with the bundled mapping.

use std::path::Path;

use debris_core::eval::{per_index_report, LabeledScene};
use debris_core::prelude::*;

fn main() -> Result<()> {
    let args: Vec<String> = std::env::args().skip(1).collect();
    if args.len() < 2 {
        eprintln!("usage: marida_patch PATCH.tif MASK.tif [WATER_REF.json]");
        return Ok(());
    }
    let opts = ReadOptions {
        band_order: BandOrder::Marida,
        ..ReadOptions::default()
    };
    let mapping = LabelMapping::marida();
    let scene = LabeledScene::load(Path::new(&args[0]), Path::new(&args[1]), &mapping, &opts)?;
    let reference = args.get(2).map(|p| WaterReference::load(Path::new(p))).transpose()?;

    let scored = scene.truth.data().iter().filter(|&&c| c != Class::Undetermined).count();
    println!(
        "{}x{} patch, {scored} labeled pixels",
        scene.stack.width(),
        scene.stack.height()
    );
    for cfg in [ThresholdConfig::default(), ThresholdConfig::otsu()] {
        let report = per_index_report(&scene, &cfg, reference.as_ref())?;
        println!("\n{:?} thresholds", cfg.mode);
        print!("{}", report.table());
    }
    Ok(())
}

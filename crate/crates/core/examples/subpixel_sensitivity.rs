//! Detection rate against sub-pixel coverage for each detector and debris type.
//!
//! ```text
//! cargo run --release --example subpixel_sensitivity
//! ```

use debris_core::prelude::*;
use debris_core::synth::{CurveOptions, Detector};

fn main() -> Result<()> {
    let table = WavelengthTable::sentinel2(Sensor::S2A).select(&MARIDA_ORDER)?;
    let water = Endmember::builtin("water", &table)?;
    let alphas: Vec<f64> = (0..=10).map(|i| i as f64 / 10.0).collect();
    let fixed = ThresholdConfig::default();
    let detectors = [
        ("ndvi", Detector::Ndvi(fixed.tau_n_lo)),
        ("fdi", Detector::Fdi(fixed.tau_f)),
        ("wci", Detector::Wci(fixed.tau_w)),
        ("combined", Detector::Combined(fixed.clone())),
    ];
    let opts = CurveOptions::default();
    println!(
        "{} realizations of {}x{} pixels, noise sigma {}",
        opts.realizations, opts.size, opts.size, opts.noise_sigma
    );

    for target in ["plastic", "wood", "seaweed"] {
        let endmember = Endmember::builtin(target, &table)?;
        println!("\n{target}");
        print!("{:<9}", "alpha");
        for a in &alphas {
            print!(" {a:>5.1}");
        }
        println!();
        for (name, detector) in &detectors {
            let curve = sensitivity_curve(&endmember, &water, &alphas, detector, &table, &opts)?;
            print!("{name:<9}");
            for p in &curve {
                print!(" {:>5.2}", p.detection_rate);
            }
            println!();
        }
    }
    Ok(())
}

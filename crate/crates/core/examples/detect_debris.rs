//! Full detection: water reference, indices, thresholds, class map and overlay.
//!
//! ```text
//! cargo run --example detect_debris [-- STACK.tif [OUT_DIR]]
//! ```

use std::path::{Path, PathBuf};

use debris_core::classify::class_counts;
use debris_core::prelude::*;

fn main() -> Result<()> {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let stack = match args.first() {
        Some(path) => read_stack(Path::new(path), &ReadOptions::default())?,
        None => {
            let table = WavelengthTable::sentinel2(Sensor::S2A).select(&MARIDA_ORDER)?;
            let spec = SceneSpec::new(64, 64)
                .with_object(
                    Shape::Rect {
                        x: 10,
                        y: 10,
                        w: 8,
                        h: 8,
                    },
                    "plastic",
                    1.0,
                )
                .with_object(
                    Shape::Disk {
                        cx: 45.0,
                        cy: 40.0,
                        r: 5.0,
                    },
                    "seaweed",
                    1.0,
                )
                .with_noise(0.004, 3);
            generate(&spec, &table)?.stack
        }
    };
    let out_dir = args
        .get(1)
        .map(PathBuf::from)
        .unwrap_or_else(|| std::env::temp_dir().join("debris_detect"));
    std::fs::create_dir_all(&out_dir).expect("create output directory");

    let reference = choose_water_reference(&stack, None, None)?;
    println!(
        "water reference ({}): {:?}",
        reference.provenance(),
        reference.signature().values()
    );

    for mode in [ThresholdMode::Fixed, ThresholdMode::Otsu] {
        let cfg = ThresholdConfig {
            mode,
            ..ThresholdConfig::default()
        };
        let d = detect(&stack, &reference, &DetectOptions::with_thresholds(cfg))?;
        let t = &d.thresholds;
        println!(
            "\n{mode:?}: tau_w {:.4} tau_f {:.4} tau_n_lo {:.4} tau_n_hi {:.4} fallbacks {:?}",
            t.tau_w, t.tau_f, t.tau_n_lo, t.tau_n_hi, t.fallbacks
        );
        let counts = class_counts(&d.classes);
        for class in Class::ALL {
            println!("  {:<15} {:>6}", class.name(), counts[class.code() as usize]);
        }
        if mode == ThresholdMode::Fixed {
            write_class_map(&d.classes, &out_dir.join("classes.tif"))?;
            write_png(&d.classes, &out_dir.join("overlay.png"))?;
        }
    }
    println!("\nwrote {}", out_dir.join("overlay.png").display());
    Ok(())
}

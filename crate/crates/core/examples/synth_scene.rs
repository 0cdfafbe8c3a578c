//! Building a synthetic scene from endmembers and writing it with its mask.

use debris_core::eval::LabelMapping;
use debris_core::prelude::*;

fn main() -> Result<()> {
    let table = WavelengthTable::sentinel2(Sensor::S2B).select(&MARIDA_ORDER)?;
    for name in Endmember::BUILTIN {
        let e = Endmember::builtin(name, &table)?;
        let v: Vec<String> = e.signature.values().iter().map(|v| format!("{v:.3}")).collect();
        println!("{name:<11} {}", v.join(" "));
    }

    let spec = SceneSpec::new(48, 32)
        .with_object(
            Shape::Rect {
                x: 4,
                y: 4,
                w: 10,
                h: 6,
            },
            "wood",
            1.0,
        )
        .with_object(
            Shape::Disk {
                cx: 30.0,
                cy: 16.0,
                r: 6.0,
            },
            "plastic",
            0.4,
        )
        .with_noise(0.003, 42);
    println!(
        "\nspec:\n{}",
        serde_json::to_string_pretty(&spec).expect("spec serializes")
    );

    let scene = generate(&spec, &table)?;
    let plastic = Endmember::builtin("plastic", &table)?;
    let water = Endmember::builtin("water", &table)?;
    let half = mix(&plastic.signature, &water.signature, 0.4)?;
    println!("\n40% plastic over water: {:?}", half.values());

    let dir = tempfile::tempdir().expect("temp dir");
    write_stack(&scene.stack, &dir.path().join("stack.tif"))?;
    write_mask(&scene.truth.map(|c| c.code() as u16), &dir.path().join("mask.tif"))?;
    LabelMapping::class_codes().save(&dir.path().join("mapping.json"))?;
    for row in 0..scene.truth.height() {
        let line: String = (0..scene.truth.width())
            .map(|x| match scene.truth.get(x, row).unwrap() {
                Class::Water => '.',
                Class::Debris => '#',
                Class::FloatingOther => 'o',
                Class::Wake => '~',
                Class::Undetermined => '?',
            })
            .collect();
        println!("{line}");
    }
    Ok(())
}

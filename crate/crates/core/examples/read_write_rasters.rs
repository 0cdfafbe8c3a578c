//! Writing and reading stacks as GeoTIFF (strips, tiles, deflate) and BSF.

use debris_core::io::{self, Compression, Layout, Planar, WriteOptions};
use debris_core::prelude::*;
use debris_core::raster::Dtype;

fn main() -> Result<()> {
    let dir = tempfile::tempdir().expect("temp dir");
    let table = WavelengthTable::sentinel2(Sensor::S2A).select(&MARIDA_ORDER)?;
    let spec = SceneSpec::new(64, 48).with_noise(0.004, 1);
    let stack = generate(&spec, &table)?
        .stack
        .with_storage(Dtype::Uint16, 1e-4, Some(0.0))?;

    let variants = [
        ("strips.tif", WriteOptions::default()),
        (
            "tiled_deflate.tif",
            WriteOptions {
                layout: Layout::Tiles { width: 16, height: 16 },
                planar: Planar::Separate,
                compression: Compression::Deflate,
            },
        ),
    ];
    for (name, opts) in &variants {
        let path = dir.path().join(name);
        io::write_geotiff_with(&stack, &path, opts)?;
        report(&path, &stack)?;
    }
    let bsf = dir.path().join("stack.bsf");
    write_stack(&stack, &bsf)?;
    report(&bsf, &stack)?;

    let ndvi_path = dir.path().join("ndvi.tif");
    write_index(&ndvi(&stack)?, &ndvi_path)?;
    let (values, valid) = io::read_index_values(&ndvi_path)?;
    println!(
        "ndvi.tif: {}x{}, {} valid pixels",
        values.width(),
        values.height(),
        valid.data().iter().filter(|&&v| v).count()
    );
    Ok(())
}

fn report(path: &std::path::Path, original: &BandStack) -> Result<()> {
    let back = read_stack(path, &ReadOptions::default())?;
    // uint16 with scale 1e-4 quantizes to half a step at most
    let max_err = (0..original.band_count())
        .flat_map(|b| {
            let (p, q) = (original.plane(b).values().data(), back.plane(b).values().data());
            p.iter().zip(q).map(|(a, b)| (a - b).abs()).collect::<Vec<_>>()
        })
        .fold(0.0, f64::max);
    let bytes = std::fs::metadata(path).map(|m| m.len()).unwrap_or(0);
    println!(
        "{:<18} {:>7} bytes  {} bands {:?}  max |error| {max_err:.1e}",
        path.file_name().unwrap().to_string_lossy(),
        bytes,
        back.band_count(),
        back.header().dtype
    );
    Ok(())
}

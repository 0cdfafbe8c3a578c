mod common;

use common::*;
use debris_core::bands::{Sensor, WavelengthTable};
use debris_core::error::Error;
use debris_core::io::{read_mask, read_stack, write_mask, write_stack, ReadOptions};
use debris_core::raster::{Dtype, Raster};
use debris_core::spectral::{BandStack, Plane};
use proptest::prelude::*;

fn same_bits(a: &BandStack, b: &BandStack) -> bool {
    a.band_count() == b.band_count()
        && (0..a.band_count()).all(|i| {
            let (p, q) = (a.plane(i), b.plane(i));
            p.valid() == q.valid()
                && p.values()
                    .data()
                    .iter()
                    .zip(q.values().data())
                    .all(|(x, y)| x.to_bits() == y.to_bits())
        })
}

#[test]
fn scaled_uint16_reads_as_reflectance() {
    let dir = tempfile::tempdir().unwrap();
    let t = marida_table();
    let stack = BandStack::from_fn(4, 3, t.clone(), |x, y| {
        vec![(1234 + x + 10 * y) as f64 / 10_000.0; t.len()]
    })
    .unwrap()
    .with_storage(Dtype::Uint16, 1e-4, None)
    .unwrap();
    for name in ["s.tif", "s.bsf"] {
        let path = dir.path().join(name);
        write_stack(&stack, &path).unwrap();
        let back = read_stack(&path, &ReadOptions::default()).unwrap();
        assert_eq!(back.header().dtype, Dtype::Uint16);
        let v = back.pixel_signature(0, 0).unwrap().values()[0];
        assert!((v - 0.1234).abs() < 1e-12, "{name}: {v}");
    }
}

#[test]
fn single_pixel_float_stack() {
    let dir = tempfile::tempdir().unwrap();
    let t = WavelengthTable::sentinel2(Sensor::S2A).select(&["B8"]).unwrap();
    let stack = BandStack::from_fn(1, 1, t, |_, _| vec![0.5]).unwrap();
    let path = dir.path().join("one.tif");
    write_stack(&stack, &path).unwrap();
    let back = read_stack(&path, &ReadOptions::default()).unwrap();
    assert_eq!(back.plane(0).values().get(0, 0), Some(0.5));
    assert_eq!(back.wavelengths().keys(), vec!["B8".to_string()]);
}

#[test]
fn mixed_resolution_stack_harmonizes_before_writing() {
    let dir = tempfile::tempdir().unwrap();
    let t = WavelengthTable::sentinel2(Sensor::S2A)
        .select(&["B4", "B6", "B8", "B11"])
        .unwrap();
    let fine = |seed: f64| {
        Plane::new(Raster::from_fn(4, 4, |x, y| (seed + (x + 4 * y) as f64 / 100.0) as f32 as f64).unwrap()).unwrap()
    };
    let coarse = |seed: f64| {
        Plane::new(Raster::from_fn(2, 2, |x, y| (seed + (x + 2 * y) as f64 / 100.0) as f32 as f64).unwrap()).unwrap()
    };
    let stack = BandStack::new(vec![fine(0.1), coarse(0.2), fine(0.3), coarse(0.05)], t).unwrap();
    assert!(!stack.is_harmonized());

    let path = dir.path().join("mixed.bsf");
    assert!(matches!(write_stack(&stack, &path), Err(Error::NotHarmonized)));

    let h = stack.harmonize().unwrap();
    assert!(h.is_harmonized());
    write_stack(&h, &path).unwrap();
    assert!(same_bits(&h, &read_stack(&path, &ReadOptions::default()).unwrap()));
    let re2 = h.plane(1).values();
    assert_eq!((re2.width(), re2.height()), (4, 4));
    for y in 0..4 {
        for x in 0..4 {
            assert_eq!(re2.get(x, y), stack.plane(1).values().get(x / 2, y / 2));
        }
    }
}

#[test]
fn marida_style_mask_keeps_fifteen_codes() {
    let dir = tempfile::tempdir().unwrap();
    let mask = Raster::from_fn(16, 4, |x, y| ((x + 16 * y) % 16) as u16).unwrap();
    let path = dir.path().join("mask.tif");
    write_mask(&mask, &path).unwrap();
    let back = read_mask(&path).unwrap();
    assert_eq!(back, mask);
    let distinct: std::collections::BTreeSet<u16> = back.data().iter().copied().filter(|&c| c != 0).collect();
    assert_eq!(distinct.len(), 15);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(40))]

    #[test]
    fn random_stacks_round_trip(w in 1usize..20, h in 1usize..20, seed in any::<u64>(), bsf in any::<bool>()) {
        let dir = tempfile::tempdir().unwrap();
        let stack = random_stack(&mut rng(seed), w, h, &marida_table())
            .map_spectra(|_, _, s| s.iter_mut().for_each(|v| *v = *v as f32 as f64))
            .unwrap();
        let path = dir.path().join(if bsf { "r.bsf" } else { "r.tif" });
        write_stack(&stack, &path).unwrap();
        let back = read_stack(&path, &ReadOptions::default()).unwrap();
        prop_assert!(same_bits(&stack, &back));
        prop_assert_eq!(back.wavelengths(), stack.wavelengths());
    }

    #[test]
    fn masks_round_trip(w in 1usize..30, h in 1usize..30, codes in prop::collection::vec(0u16..300, 900)) {
        let dir = tempfile::tempdir().unwrap();
        let mask = Raster::new(w, h, codes[..w * h].to_vec()).unwrap();
        let path = dir.path().join("m.tif");
        write_mask(&mask, &path).unwrap();
        prop_assert_eq!(read_mask(&path).unwrap(), mask);
    }
}

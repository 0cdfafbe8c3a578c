//! Acceptance criteria 1-9. All criteria run sequentially inside one test so
//! the timing checks are not disturbed by other tests; each prints a single
//! PASS/FAIL line straight to stdout.

mod common;

use std::io::Write;
use std::process::Command;
use std::time::{Duration, Instant};

use common::*;
use debris_core::bands::Sensor;
use debris_core::classify::{Class, ThresholdConfig};
use debris_core::eval::{evaluate, per_index_report, DetectorKind, EvalReport};
use debris_core::indices::{fdi, ndvi, wci, FdiParams, Provenance, WaterReference};
use debris_core::io::tiff::{self, Compression, Layout, Planar, WriteOptions};
use debris_core::io::{bsf, read_stack, write_stack, BandMeta, RawRaster, ReadOptions};
use debris_core::parallel::with_threads;
use debris_core::pipeline::{choose_water_reference, detect, DetectOptions};
use debris_core::raster::{Dtype, RasterHeader};
use debris_core::spectral::{pearson_slices, BandStack, SpectralSignature};
use debris_core::synth::{generate, sensitivity_curve, CurveOptions, Detector, Endmember, SceneSpec, Shape};
use rand::Rng;

const TOL: f64 = 1e-12;

struct Outcome {
    ok: bool,
    detail: String,
}

fn outcome(ok: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        ok,
        detail: detail.into(),
    }
}

fn print_line(line: &str) {
    // bypasses libtest output capture
    let mut out = std::io::stdout().lock();
    let _ = writeln!(out, "{line}");
    let _ = out.flush();
}

fn c1_index_oracles() -> Outcome {
    let start = Instant::now();
    let table = marida_table();
    let params = FdiParams::sentinel2(Sensor::S2A);
    let (l8, l4) = (832.8, 664.6);
    let mut rng = rng(1);
    let mut worst: f64 = 0.0;
    let mut validity_mismatch = 0usize;
    for _ in 0..1000 {
        let stack = random_stack(&mut rng, 32, 32, &table);
        let reference_values: Vec<f64> = (0..table.len()).map(|_| rng.random_range(0.001..0.2)).collect();
        let reference = WaterReference::new(
            SpectralSignature::new(table.keys(), reference_values.clone()).unwrap(),
            Provenance::File,
        )
        .unwrap();
        let n = ndvi(&stack).unwrap();
        let f = fdi(&stack, &params).unwrap();
        let w = wci(&stack, &reference, None).unwrap();
        for y in 0..32 {
            for x in 0..32 {
                let s = stack.pixel_signature(x, y).unwrap();
                let b = |k: &str| s.value(k).unwrap();
                let checks = [
                    (n.get(x, y), ndvi_oracle(b("B4"), b("B8"))),
                    (f.get(x, y), Some(fdi_oracle(b("B6"), b("B8"), b("B11"), l8, l4))),
                    (w.get(x, y), pearson_oracle(s.values(), &reference_values)),
                ];
                for (got, want) in checks {
                    match (got, want) {
                        (Some(g), Some(o)) => worst = worst.max((g - o).abs()),
                        (None, None) => {}
                        _ => validity_mismatch += 1,
                    }
                }
            }
        }
    }
    let elapsed = start.elapsed();
    outcome(
        worst <= TOL && validity_mismatch == 0 && elapsed < Duration::from_secs(10),
        format!(
            "1000 stacks 32x32x11, max |lib - oracle| = {worst:.2e}, validity mismatches {validity_mismatch}, {:.2} s",
            elapsed.as_secs_f64()
        ),
    )
}

fn c2_wavelength_factor() -> Outcome {
    let s2a_oracle = (832.8 - 664.6) / (832.8 + 664.6) * 10.0;
    let s2b_oracle = (833.0 - 665.0) / (833.0 + 665.0) * 10.0;
    let s2a = FdiParams::sentinel2(Sensor::S2A).wavelength_factor();
    let s2b = FdiParams::sentinel2(Sensor::S2B).wavelength_factor();
    let digits = format!("{s2a:.12}").starts_with("1.1232803");
    let ok = (s2a - s2a_oracle).abs() <= TOL && (s2b - s2b_oracle).abs() <= TOL && digits;
    outcome(
        ok,
        format!("S2A factor {s2a:.16} (hand {s2a_oracle:.16}), S2B {s2b:.16} (hand {s2b_oracle:.16})"),
    )
}

fn c3_invariances() -> Outcome {
    let table = marida_table();
    let params = FdiParams::sentinel2(Sensor::S2A);
    let mut rng = rng(3);
    let mut worst = [0.0f64; 5];
    let mut bound_violations = 0usize;
    for _ in 0..200 {
        let stack = random_stack(&mut rng, 16, 16, &table);
        let c = rng.random_range(0.05..20.0);
        let (a, b): (f64, f64) = (rng.random_range(0.1..5.0), rng.random_range(-0.2..0.2));
        let reference = WaterReference::builtin(&table).unwrap();
        let scaled = stack.scaled(c).unwrap();
        let affine = stack
            .map_spectra(|_, _, s| s.iter_mut().for_each(|v| *v = a * *v + b.abs()))
            .unwrap();

        let (n, ns) = (ndvi(&stack).unwrap(), ndvi(&scaled).unwrap());
        let (w, ws, wa) = (
            wci(&stack, &reference, None).unwrap(),
            wci(&scaled, &reference, None).unwrap(),
            wci(&affine, &reference, None).unwrap(),
        );
        let (f, fs) = (fdi(&stack, &params).unwrap(), fdi(&scaled, &params).unwrap());
        for i in 0..stack.width() * stack.height() {
            let (x, y) = (i % 16, i / 16);
            worst[0] = worst[0].max((n.get(x, y).unwrap() - ns.get(x, y).unwrap()).abs());
            worst[1] = worst[1].max((w.get(x, y).unwrap() - ws.get(x, y).unwrap()).abs());
            worst[2] = worst[2].max((w.get(x, y).unwrap() - wa.get(x, y).unwrap()).abs());
            worst[3] = worst[3].max((c * f.get(x, y).unwrap() - fs.get(x, y).unwrap()).abs());
            if n.get(x, y).unwrap().abs() > 1.0 || w.get(x, y).unwrap().abs() > 1.0 {
                bound_violations += 1;
            }
        }
        let u: Vec<f64> = (0..11).map(|_| rng.random_range(-1.0..1.0)).collect();
        let v: Vec<f64> = (0..11).map(|_| rng.random_range(-1.0..1.0)).collect();
        let sign = if rng.random_bool(0.5) { 1.0 } else { -1.0 };
        let ua: Vec<f64> = u.iter().map(|x| sign * a * x + b).collect();
        let r = pearson_slices(&u, &v).unwrap();
        let ra = pearson_slices(&ua, &v).unwrap();
        worst[4] = worst[4].max((sign * r - ra).abs());
    }
    let ok = worst.iter().all(|&e| e <= TOL) && bound_violations == 0;
    outcome(
        ok,
        format!(
            "max deviation: ndvi scale {:.1e}, wci scale {:.1e}, wci affine {:.1e}, fdi homogeneity {:.1e}, \
             pearson affine {:.1e}; |index| > 1: {bound_violations}",
            worst[0], worst[1], worst[2], worst[3], worst[4]
        ),
    )
}

fn c4_metric_oracle() -> Outcome {
    let mut rng = rng(4);
    let mut count_mismatch = 0usize;
    let mut worst: f64 = 0.0;
    for _ in 0..1000 {
        let (w, h) = (rng.random_range(1..24), rng.random_range(1..24));
        let pred = random_class_map(&mut rng, w, h, &Class::ALL);
        let truth = random_class_map(&mut rng, w, h, &Class::ALL);
        let m = tally(&pred, &truth);
        let total: u64 = m.iter().flatten().sum();
        let report = match evaluate(&pred, &truth) {
            Ok(r) => r,
            Err(_) => {
                if total != 0 {
                    count_mismatch += 1;
                }
                continue;
            }
        };
        if report.confusion != m || report.evaluated_pixels != total {
            count_mismatch += 1;
        }
        let correct: u64 = (0..5).map(|i| m[i][i]).sum();
        worst = worst.max((report.overall_accuracy - correct as f64 / total as f64).abs());
        for (k, class) in [Class::Water, Class::Debris, Class::FloatingOther, Class::Wake]
            .iter()
            .enumerate()
        {
            let tp = m[k][k] as f64;
            let t: f64 = m[k].iter().sum::<u64>() as f64;
            let p: f64 = m.iter().map(|r| r[k]).sum::<u64>() as f64;
            let metrics = report.metrics(*class).unwrap();
            let pairs = [
                (metrics.precision, (p > 0.0).then(|| tp / p)),
                (metrics.recall, (t > 0.0).then(|| tp / t)),
                (metrics.f1, (t + p > 0.0).then(|| 2.0 * tp / (t + p))),
                (metrics.iou, (t + p - tp > 0.0).then(|| tp / (t + p - tp))),
            ];
            for (got, want) in pairs {
                match (got, want) {
                    (Some(g), Some(o)) => worst = worst.max((g - o).abs()),
                    (None, None) => {}
                    _ => count_mismatch += 1,
                }
            }
        }
    }
    outcome(
        count_mismatch == 0 && worst <= TOL,
        format!("1000 random map pairs, count mismatches {count_mismatch}, max ratio error {worst:.1e}"),
    )
}

fn plastic_scene(alpha: f64, seed: u64) -> SceneSpec {
    SceneSpec::new(64, 64)
        .with_object(
            Shape::Rect {
                x: 28,
                y: 28,
                w: 8,
                h: 8,
            },
            "plastic",
            alpha,
        )
        .with_noise(0.005, seed)
}

fn debris_iou(r: &EvalReport) -> f64 {
    r.metrics(Class::Debris).and_then(|m| m.iou).unwrap_or(0.0)
}

fn c5_synthetic_end_to_end() -> Outcome {
    let start = Instant::now();
    let table = marida_table();
    let cfg = ThresholdConfig::otsu();
    let mut ok = true;
    let mut parts = Vec::new();
    for seed in 0..5 {
        let full = per_index_report(&generate(&plastic_scene(1.0, seed), &table).unwrap(), &cfg, None).unwrap();
        let half = per_index_report(&generate(&plastic_scene(0.5, seed), &table).unwrap(), &cfg, None).unwrap();
        let (f, h) = (full.get(DetectorKind::Combined), half.get(DetectorKind::Combined));
        ok &= f.overall_accuracy >= 0.99 && debris_iou(f) >= 0.90 && debris_iou(h) >= 0.75;
        parts.push(format!(
            "seed {seed}: acc {:.4} iou {:.3} / a=0.5 iou {:.3}",
            f.overall_accuracy,
            debris_iou(f),
            debris_iou(h)
        ));
    }
    let elapsed = start.elapsed();
    ok &= elapsed < Duration::from_secs(5);
    outcome(ok, format!("{}; {:.2} s", parts.join("; "), elapsed.as_secs_f64()))
}

fn ship_scene(seed: u64) -> SceneSpec {
    SceneSpec::new(64, 64)
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
        .with_noise(0.005, seed)
}

fn c6_combined_vs_single() -> Outcome {
    let table = marida_table();
    let mut ok = true;
    let mut parts = Vec::new();
    for seed in 0..5 {
        let scene = generate(&ship_scene(seed), &table).unwrap();
        let report = per_index_report(&scene, &ThresholdConfig::otsu(), None).unwrap();
        let acc = |d| report.get(d).overall_accuracy;
        let best_single = acc(DetectorKind::NdviOnly)
            .max(acc(DetectorKind::FdiOnly))
            .max(acc(DetectorKind::WciOnly));
        let combined = acc(DetectorKind::Combined);
        ok &= combined >= best_single - 0.01;
        let fixed = per_index_report(&scene, &ThresholdConfig::default(), None).unwrap();
        parts.push(format!(
            "seed {seed}: combined {combined:.4} vs best single {best_single:.4} (fixed thresholds: combined {:.4})",
            fixed.get(DetectorKind::Combined).overall_accuracy
        ));
    }
    outcome(ok, parts.join("; "))
}

fn c7_subpixel_monotonicity() -> Outcome {
    let start = Instant::now();
    let table = marida_table();
    let plastic = Endmember::builtin("plastic", &table).unwrap();
    let water = Endmember::builtin("water", &table).unwrap();
    let alphas: Vec<f64> = (1..=10).map(|i| i as f64 / 10.0).collect();
    let curve = sensitivity_curve(
        &plastic,
        &water,
        &alphas,
        &Detector::Fdi(ThresholdConfig::default().tau_f),
        &table,
        &CurveOptions::default(),
    )
    .unwrap();
    let worst_drop = curve
        .windows(2)
        .map(|w| w[0].detection_rate - w[1].detection_rate)
        .fold(f64::NEG_INFINITY, f64::max);
    let elapsed = start.elapsed();
    let rates: Vec<String> = curve
        .iter()
        .map(|p| format!("{:.1}:{:.3}", p.alpha, p.detection_rate))
        .collect();
    outcome(
        worst_drop <= 0.02 && curve.iter().all(|p| p.total >= 100) && elapsed < Duration::from_secs(30),
        format!(
            "FDI rates [{}], largest drop {worst_drop:.3}, {:.2} s",
            rates.join(" "),
            elapsed.as_secs_f64()
        ),
    )
}

fn c8_roundtrips() -> Outcome {
    let mut rng = rng(8);
    let mut failures = Vec::new();
    let layouts = [
        (Layout::Strips { rows_per_strip: 16 }, Planar::Chunky, Compression::None),
        (
            Layout::Strips { rows_per_strip: 5 },
            Planar::Separate,
            Compression::Deflate,
        ),
        (
            Layout::Tiles { width: 16, height: 32 },
            Planar::Chunky,
            Compression::Deflate,
        ),
        (
            Layout::Tiles { width: 32, height: 16 },
            Planar::Separate,
            Compression::None,
        ),
    ];
    let mut cases = 0;
    for dtype in [Dtype::Uint8, Dtype::Uint16, Dtype::Float32] {
        let (w, h, bands) = (37, 21, 3);
        let mut header = RasterHeader::new(w, h, bands, dtype);
        header.scale = dtype.default_scale();
        header.nodata = Some(0.0);
        let data: Vec<Vec<f64>> = (0..bands)
            .map(|_| {
                (0..w * h)
                    .map(|_| match dtype {
                        Dtype::Uint8 => rng.random_range(0..=255u32) as f64,
                        Dtype::Uint16 => rng.random_range(0..=65535u32) as f64,
                        Dtype::Float32 => rng.random_range(-1e6f32..1e6f32) as f64,
                    })
                    .collect()
            })
            .collect();
        let raw = RawRaster {
            header,
            bands: data,
            band_meta: (0..bands)
                .map(|b| BandMeta {
                    key: Some(format!("B{}", b + 2)),
                    wavelength_nm: Some(490.0 + 70.0 * b as f64),
                    ..BandMeta::default()
                })
                .collect(),
            geo_tags: Vec::new(),
        };
        for (layout, planar, compression) in layouts {
            let opts = WriteOptions {
                layout,
                planar,
                compression,
            };
            cases += 1;
            let back = tiff::decode(&tiff::encode(&raw, &opts).unwrap(), Some(dtype)).unwrap();
            let same_bits = back
                .bands
                .iter()
                .flatten()
                .zip(raw.bands.iter().flatten())
                .all(|(a, b)| a.to_bits() == b.to_bits());
            if back.header != raw.header || !same_bits {
                failures.push(format!("tiff {dtype} {layout:?} {planar:?} {compression:?}"));
            }
        }
        cases += 1;
        let back = bsf::decode(&bsf::encode(&raw).unwrap()).unwrap();
        if back.header != raw.header || back.bands != raw.bands {
            failures.push(format!("bsf {dtype}"));
        }
    }

    // stack-level files
    let dir = tempfile::tempdir().unwrap();
    let table = marida_table();
    let stack = random_stack(&mut rng, 19, 13, &table)
        .map_spectra(|_, _, s| s.iter_mut().for_each(|v| *v = *v as f32 as f64))
        .unwrap();
    for name in ["s.tif", "s.bsf"] {
        cases += 1;
        let path = dir.path().join(name);
        write_stack(&stack, &path).unwrap();
        let back = read_stack(&path, &ReadOptions::default()).unwrap();
        let same = (0..stack.band_count()).all(|b| {
            stack
                .plane(b)
                .values()
                .data()
                .iter()
                .zip(back.plane(b).values().data())
                .all(|(a, b)| a.to_bits() == b.to_bits())
        });
        if !same || back.wavelengths().keys() != stack.wavelengths().keys() {
            failures.push(format!("stack {name}"));
        }
    }

    let table_ok = table_one_matches();
    outcome(
        failures.is_empty() && table_ok.is_ok(),
        format!(
            "{cases} write/read cases, failures {:?}; Table I dump: {}",
            failures,
            table_ok.unwrap_or_else(|e| e)
        ),
    )
}

/// Runs `debris dump-bands` and compares every field with Table I.
fn table_one_matches() -> Result<String, String> {
    #[rustfmt::skip]
    let rows: [(&str, &str, f64, f64, u32); 13] = [
        ("B1", "Coastal", 442.7, 442.3, 60),
        ("B2", "Blue", 492.4, 492.1, 10),
        ("B3", "Green", 559.8, 559.0, 10),
        ("B4", "Red", 664.6, 665.0, 10),
        ("B5", "Red Edge1", 704.1, 703.8, 20),
        ("B6", "Red Edge2", 740.5, 739.1, 20),
        ("B7", "Red Edge3", 782.8, 779.7, 20),
        ("B8", "NIR", 832.8, 833.0, 10),
        ("B8A", "Narrow NIR", 864.7, 864.0, 20),
        ("B9", "Water Vapour", 945.1, 943.2, 60),
        ("B10", "SWIR Cirrus", 1373.5, 1376.9, 60),
        ("B11", "SWIR1", 1613.7, 1610.4, 20),
        ("B12", "SWIR2", 2202.4, 2185.7, 20),
    ];
    for (sensor, col) in [("s2a", 0), ("s2b", 1)] {
        let out = Command::new(env!("CARGO_BIN_EXE_debris"))
            .args(["dump-bands", "--sensor", sensor])
            .output()
            .map_err(|e| e.to_string())?;
        if !out.status.success() {
            return Err(format!("dump-bands exited {:?}", out.status.code()));
        }
        let json: serde_json::Value = serde_json::from_slice(&out.stdout).map_err(|e| e.to_string())?;
        let bands = json.as_array().ok_or("not an array")?;
        if bands.len() != rows.len() {
            return Err(format!("{} rows", bands.len()));
        }
        for (b, row) in bands.iter().zip(rows) {
            let nm = if col == 0 { row.2 } else { row.3 };
            let matches = b["key"] == row.0
                && b["descriptor"] == row.1
                && b["wavelength_nm"].as_f64() == Some(nm)
                && b["resolution_m"].as_u64() == Some(row.4 as u64);
            if !matches {
                return Err(format!("{sensor} row {} differs: {b}", row.0));
            }
        }
    }
    Ok("13 rows x 2 sensors match".into())
}

fn c9_performance() -> Outcome {
    let table = marida_table();
    let spec = SceneSpec::new(256, 256)
        .with_object(
            Shape::Rect {
                x: 100,
                y: 100,
                w: 24,
                h: 24,
            },
            "plastic",
            0.7,
        )
        .with_object(
            Shape::Disk {
                cx: 60.0,
                cy: 180.0,
                r: 10.0,
            },
            "ship-metal",
            1.0,
        )
        .with_noise(0.005, 9);
    let stack: BandStack = generate(&spec, &table).unwrap().stack;
    let opts = DetectOptions::with_thresholds(ThresholdConfig::otsu());
    let run = || {
        let reference = choose_water_reference(&stack, None, None).unwrap();
        detect(&stack, &reference, &opts).unwrap()
    };

    let time = |threads: usize| {
        with_threads(threads, || {
            run();
            let mut best = Duration::MAX;
            for _ in 0..5 {
                let t = Instant::now();
                std::hint::black_box(run());
                best = best.min(t.elapsed());
            }
            best
        })
        .unwrap()
    };
    let single = time(1);
    let reference = with_threads(1, run).unwrap();
    let mut identical = true;
    let mut scaling = Vec::new();
    for threads in [2, 4, 8] {
        let other = with_threads(threads, run).unwrap();
        identical &= other.classes == reference.classes
            && [
                (&other.indices.ndvi, &reference.indices.ndvi),
                (&other.indices.fdi, &reference.indices.fdi),
                (&other.indices.wci, &reference.indices.wci),
            ]
            .iter()
            .all(|(a, b)| {
                a.valid() == b.valid()
                    && a.values()
                        .data()
                        .iter()
                        .zip(b.values().data())
                        .all(|(x, y)| x.to_bits() == y.to_bits())
            });
        let t = time(threads);
        scaling.push(format!("{threads}t {:.1} ms", t.as_secs_f64() * 1e3));
    }
    let cpus = std::thread::available_parallelism().map_or(1, |n| n.get());
    outcome(
        single < Duration::from_millis(100) && identical,
        format!(
            "256x256x11 estimate+index+detect single-threaded {:.1} ms; {}; outputs identical across thread counts: {identical}; \
             {cpus} CPU(s) available{}",
            single.as_secs_f64() * 1e3,
            scaling.join(", "),
            if cpus < 2 { ", so speedup is not measurable here" } else { "" }
        ),
    )
}

#[test]
fn acceptance_criteria() {
    type Check = fn() -> Outcome;
    let criteria: [(u32, &str, Check); 9] = [
        (1, "index-oracle equivalence", c1_index_oracles),
        (2, "FDI wavelength constant", c2_wavelength_factor),
        (3, "invariance suite", c3_invariances),
        (4, "metric-oracle equivalence", c4_metric_oracle),
        (5, "synthetic end-to-end", c5_synthetic_end_to_end),
        (6, "combined vs single-index accuracy", c6_combined_vs_single),
        (7, "sub-pixel monotonicity", c7_subpixel_monotonicity),
        (8, "I/O round-trips and band table", c8_roundtrips),
        (9, "performance floor", c9_performance),
    ];
    let mut failed = Vec::new();
    for (id, title, check) in criteria {
        let o = check();
        print_line(&format!(
            "acceptance {id} [{}] {title}: {}",
            if o.ok { "PASS" } else { "FAIL" },
            o.detail
        ));
        if !o.ok {
            failed.push(id);
        }
    }
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}

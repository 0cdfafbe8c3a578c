//! Detection of floating marine debris in Sentinel-2 imagery from three
//! spectral indices: NDVI, the Floating Debris Index (FDI) and the Water
//! Correlation Index (WCI).
//!
//! ```no_run
//! use debris_core::prelude::*;
//! use std::path::Path;
//!
//! let stack = read_stack(Path::new("patch.tif"), &ReadOptions::default())?;
//! let reference = choose_water_reference(&stack, None, None)?;
//! let detection = detect(&stack, &reference, &DetectOptions::default())?;
//! write_png(&detection.classes, Path::new("overlay.png"))?;
//! # Ok::<(), debris_core::Error>(())
//! ```
//!
//! Runnable examples, `cargo run --example NAME`:
//!
//! - `compute_indices`: NDVI, FDI and WCI over a stack, with statistics
//! - `read_write_rasters`: GeoTIFF layouts and compression, BSF, index rasters
//! - `detect_debris`: fixed and Otsu thresholds, class map and PNG overlay
//! - `evaluate_scene`: per-detector accuracy table on a labeled scene
//! - `synth_scene`: endmembers, mixing and scene specs
//! - `subpixel_sensitivity`: detection rate against coverage fraction
//! - `otsu_thresholds`: index histograms and where Otsu splits them
//! - `band_tables`: Sentinel-2A/2B wavelengths and the FDI factor
//! - `marida_patch`: scoring a real MARIDA patch against its mask

pub mod bands;
pub mod classify;
pub mod cli;
pub mod error;
pub mod eval;
pub mod indices;
pub mod io;
pub mod parallel;
pub mod pipeline;
pub mod raster;
pub mod render;
pub mod spectral;
pub mod synth;

pub use error::{Error, Result};

/// The types and functions most programs need.
pub mod prelude {
    pub use crate::bands::{BandInfo, BandOrder, Sensor, WavelengthTable, MARIDA_ORDER};
    pub use crate::classify::{
        classify_combined, classify_single, otsu_threshold, Class, ClassMap, Polarity, ThresholdConfig, ThresholdMode,
    };
    pub use crate::error::{Error, Result};
    pub use crate::eval::{evaluate, map_labels, per_index_report, EvalReport, LabelMapping, LabeledScene};
    pub use crate::indices::{estimate_water_signature, fdi, ndvi, wci, FdiParams, Provenance, WaterReference};
    pub use crate::io::{read_mask, read_stack, write_class_map, write_index, write_mask, write_stack, ReadOptions};
    pub use crate::pipeline::{choose_water_reference, detect, DetectOptions};
    pub use crate::raster::Raster;
    pub use crate::render::write_png;
    pub use crate::spectral::{BandStack, Correlation, IndexKind, IndexMap, Resampling, SpectralSignature};
    pub use crate::synth::{generate, mix, sensitivity_curve, Endmember, SceneSpec, Shape};
}

//! End-to-end detection: harmonize, compute the three indices, threshold.

use std::borrow::Cow;

use crate::classify::{apply_thresholds, ClassMap, ResolvedThresholds, ThresholdConfig};
use crate::error::Result;
use crate::indices::{estimate_water_signature, fdi, ndvi, wci_with, FdiParams, WaterReference};
use crate::spectral::{BandStack, Correlation, IndexMap};

#[derive(Debug, Clone, PartialEq)]
pub struct DetectOptions {
    pub thresholds: ThresholdConfig,
    /// Defaults to the constants of the stack's wavelength table.
    pub fdi: Option<FdiParams>,
    /// WCI band subset; all stack bands when `None`.
    pub wci_bands: Option<Vec<String>>,
    pub correlation: Correlation,
}

impl Default for DetectOptions {
    fn default() -> Self {
        DetectOptions {
            thresholds: ThresholdConfig::default(),
            fdi: None,
            wci_bands: None,
            correlation: Correlation::Pearson,
        }
    }
}

impl DetectOptions {
    pub fn with_thresholds(thresholds: ThresholdConfig) -> Self {
        DetectOptions {
            thresholds,
            ..DetectOptions::default()
        }
    }
}

/// `stack` itself if already on one grid, else its harmonized copy.
pub fn harmonized(stack: &BandStack) -> Result<Cow<'_, BandStack>> {
    if stack.is_harmonized() {
        Ok(Cow::Borrowed(stack))
    } else {
        Ok(Cow::Owned(stack.harmonize()?))
    }
}

/// Picks the water reference: a loaded file, else the median of the water
/// pixels of `mask`, else an estimate from the lowest-NDVI quartile.
pub fn choose_water_reference(
    stack: &BandStack,
    file: Option<WaterReference>,
    mask: Option<&ClassMap>,
) -> Result<WaterReference> {
    let reference = match file {
        Some(r) => r,
        None => estimate_water_signature(&*harmonized(stack)?, mask)?,
    };
    log::info!("water reference provenance: {}", reference.provenance());
    Ok(reference)
}

#[derive(Debug, Clone, PartialEq)]
pub struct IndexSet {
    pub ndvi: IndexMap,
    pub fdi: IndexMap,
    pub wci: IndexMap,
}

pub fn compute_indices(stack: &BandStack, reference: &WaterReference, opts: &DetectOptions) -> Result<IndexSet> {
    let stack = harmonized(stack)?;
    let params = match &opts.fdi {
        Some(p) => p.clone(),
        None => FdiParams::from_table(stack.wavelengths())?,
    };
    Ok(IndexSet {
        ndvi: ndvi(&stack)?,
        fdi: fdi(&stack, &params)?,
        wci: wci_with(&stack, reference, opts.wci_bands.as_deref(), opts.correlation)?,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct Detection {
    pub indices: IndexSet,
    pub thresholds: ResolvedThresholds,
    pub classes: ClassMap,
}

/// Indices plus the combined classification.
pub fn detect(stack: &BandStack, reference: &WaterReference, opts: &DetectOptions) -> Result<Detection> {
    let indices = compute_indices(stack, reference, opts)?;
    let thresholds = opts.thresholds.resolve(&indices.ndvi, &indices.fdi, &indices.wci)?;
    let classes = apply_thresholds(&indices.ndvi, &indices.fdi, &indices.wci, &thresholds)?;
    Ok(Detection {
        indices,
        thresholds,
        classes,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bands::{Sensor, WavelengthTable, MARIDA_ORDER};
    use crate::classify::Class;
    use crate::indices::Provenance;
    use crate::synth::{generate, SceneSpec};

    #[test]
    fn all_water_scene_is_all_water() {
        let t = WavelengthTable::sentinel2(Sensor::S2A).select(&MARIDA_ORDER).unwrap();
        let scene = generate(&SceneSpec::new(32, 32).with_noise(0.002, 5), &t).unwrap();
        let reference = WaterReference::builtin(&t).unwrap();
        let d = detect(&scene.stack, &reference, &DetectOptions::default()).unwrap();
        assert!(d.classes.data().iter().all(|&c| c == Class::Water));
    }

    #[test]
    fn reference_priority() {
        let t = WavelengthTable::sentinel2(Sensor::S2A).select(&MARIDA_ORDER).unwrap();
        let scene = generate(&SceneSpec::new(8, 8), &t).unwrap();
        let builtin = WaterReference::builtin(&t).unwrap();
        let r = choose_water_reference(&scene.stack, Some(builtin.clone()), Some(&scene.truth)).unwrap();
        assert_eq!(r, builtin);
        let r = choose_water_reference(&scene.stack, None, Some(&scene.truth)).unwrap();
        assert_eq!(r.provenance(), Provenance::Estimated);
        assert_eq!(r.signature().values(), builtin.signature().values());
    }
}

//! Synthetic labeled scenes from linear sub-pixel mixing of endmember
//! spectra, and detection-rate curves over the coverage fraction.
//!
//! Noise is drawn from ChaCha8 (`rand_chacha`) seeded with `seed`, one
//! standard normal per sample in band-sequential, row-major order, so a
//! scene is bit-identical on every platform.

use std::collections::BTreeMap;
use std::path::Path;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bands::WavelengthTable;
use crate::classify::{classify_combined, classify_single, Class, ClassMap, Polarity, ThresholdConfig};
use crate::error::{Error, Result};
use crate::eval::LabeledScene;
use crate::indices::{fdi, ndvi, wci, FdiParams, Provenance, SignatureFile, WaterReference};
use crate::raster::Raster;
use crate::spectral::{BandStack, Plane, SpectralSignature};

/// Piecewise-linear anchor spectra (nm, reflectance) of the built-in
/// endmembers. Synthetic shapes for tests, not measured spectra.
const WATER: &[(f64, f64)] = &[
    (440.0, 0.085),
    (490.0, 0.075),
    (560.0, 0.055),
    (665.0, 0.030),
    (705.0, 0.024),
    (740.0, 0.018),
    (783.0, 0.016),
    (833.0, 0.015),
    (865.0, 0.013),
    (945.0, 0.010),
    (1375.0, 0.003),
    (1610.0, 0.006),
    (2200.0, 0.004),
];

const PLASTIC: &[(f64, f64)] = &[
    (440.0, 0.065),
    (490.0, 0.065),
    (560.0, 0.068),
    (665.0, 0.062),
    (705.0, 0.085),
    (740.0, 0.125),
    (783.0, 0.165),
    (833.0, 0.200),
    (865.0, 0.190),
    (945.0, 0.150),
    (1375.0, 0.020),
    (1610.0, 0.070),
    (2200.0, 0.050),
];

const WOOD: &[(f64, f64)] = &[
    (440.0, 0.040),
    (490.0, 0.050),
    (560.0, 0.070),
    (665.0, 0.100),
    (705.0, 0.120),
    (740.0, 0.140),
    (783.0, 0.160),
    (833.0, 0.180),
    (865.0, 0.180),
    (945.0, 0.170),
    (1375.0, 0.030),
    (1610.0, 0.150),
    (2200.0, 0.100),
];

const SEAWEED: &[(f64, f64)] = &[
    (440.0, 0.030),
    (490.0, 0.035),
    (560.0, 0.050),
    (665.0, 0.035),
    (705.0, 0.080),
    (740.0, 0.160),
    (783.0, 0.200),
    (833.0, 0.220),
    (865.0, 0.220),
    (945.0, 0.180),
    (1375.0, 0.010),
    (1610.0, 0.060),
    (2200.0, 0.030),
];

const SHIP_METAL: &[(f64, f64)] = &[
    (440.0, 0.240),
    (490.0, 0.250),
    (560.0, 0.260),
    (665.0, 0.265),
    (705.0, 0.255),
    (740.0, 0.245),
    (783.0, 0.245),
    (833.0, 0.245),
    (865.0, 0.240),
    (945.0, 0.220),
    (1375.0, 0.050),
    (1610.0, 0.180),
    (2200.0, 0.150),
];

fn builtin_anchors(name: &str) -> Option<&'static [(f64, f64)]> {
    Some(match name {
        "water" => WATER,
        "plastic" => PLASTIC,
        "wood" => WOOD,
        "seaweed" => SEAWEED,
        "ship-metal" => SHIP_METAL,
        _ => return None,
    })
}

fn interpolate(anchors: &[(f64, f64)], nm: f64) -> f64 {
    let (first, last) = (anchors[0], anchors[anchors.len() - 1]);
    if nm <= first.0 {
        return first.1;
    }
    if nm >= last.0 {
        return last.1;
    }
    let k = anchors.partition_point(|a| a.0 <= nm);
    let (a, b) = (anchors[k - 1], anchors[k]);
    a.1 + (b.1 - a.1) * (nm - a.0) / (b.0 - a.0)
}

/// A named pure-material spectrum.
#[derive(Debug, Clone, PartialEq)]
pub struct Endmember {
    pub name: String,
    pub signature: SpectralSignature,
}

impl Endmember {
    pub const BUILTIN: [&'static str; 5] = ["water", "plastic", "wood", "seaweed", "ship-metal"];

    pub fn new(name: impl Into<String>, signature: SpectralSignature) -> Result<Self> {
        let name = name.into();
        if let Some(v) = signature.values().iter().find(|&&v| v < 0.0) {
            return Err(Error::InvalidConfig(format!(
                "endmember '{name}' has negative reflectance {v}"
            )));
        }
        Ok(Endmember { name, signature })
    }

    /// A built-in endmember sampled at the band centers of `table`.
    pub fn builtin(name: &str, table: &WavelengthTable) -> Result<Self> {
        let anchors =
            builtin_anchors(name).ok_or_else(|| Error::InvalidConfig(format!("unknown endmember '{name}'")))?;
        Endmember::from_anchors(name, anchors, table)
    }

    /// Linear interpolation of `(nm, reflectance)` anchors, flat beyond the ends.
    pub fn from_anchors(name: &str, anchors: &[(f64, f64)], table: &WavelengthTable) -> Result<Self> {
        if anchors.is_empty() || anchors.windows(2).any(|w| w[0].0 >= w[1].0) {
            return Err(Error::InvalidConfig(format!(
                "endmember '{name}' anchors must be non-empty with increasing wavelengths"
            )));
        }
        let values = table
            .bands()
            .iter()
            .map(|b| interpolate(anchors, b.wavelength_nm))
            .collect();
        Endmember::new(name, SpectralSignature::new(table.keys(), values)?)
    }

    /// Ground-truth class of pixels covered by this material.
    pub fn default_class(name: &str) -> Option<Class> {
        match name {
            "water" => Some(Class::Water),
            "plastic" | "wood" => Some(Class::Debris),
            "seaweed" | "ship-metal" => Some(Class::FloatingOther),
            _ => None,
        }
    }
}

/// Named signatures in the water-reference JSON format.
pub type EndmemberLibrary = BTreeMap<String, SignatureFile>;

pub fn load_library(path: &Path) -> Result<EndmemberLibrary> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    serde_json::from_str(&text).map_err(|e| Error::json(path, e))
}

/// `alpha * a + (1 - alpha) * b` per band.
pub fn mix(a: &SpectralSignature, b: &SpectralSignature, alpha: f64) -> Result<SpectralSignature> {
    if !(0.0..=1.0).contains(&alpha) {
        return Err(Error::BadAlpha(alpha));
    }
    if a.len() != b.len() {
        return Err(Error::LengthMismatch {
            left: a.len(),
            right: b.len(),
        });
    }
    if a.band_ids() != b.band_ids() {
        return Err(Error::InvalidConfig("mixed signatures have different bands".into()));
    }
    let values = a
        .values()
        .iter()
        .zip(b.values())
        .map(|(&x, &y)| mix_value(x, y, alpha))
        .collect();
    SpectralSignature::new(a.band_ids().to_vec(), values)
}

fn mix_value(a: f64, b: f64, alpha: f64) -> f64 {
    alpha * a + (1.0 - alpha) * b
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase", deny_unknown_fields)]
pub enum Shape {
    Rect {
        x: usize,
        y: usize,
        w: usize,
        h: usize,
    },
    /// Pixels whose centers lie within `r` of `(cx, cy)`.
    Disk {
        cx: f64,
        cy: f64,
        r: f64,
    },
}

impl Shape {
    pub fn contains(&self, x: usize, y: usize) -> bool {
        match *self {
            Shape::Rect { x: x0, y: y0, w, h } => x >= x0 && x < x0 + w && y >= y0 && y < y0 + h,
            Shape::Disk { cx, cy, r } => {
                let (dx, dy) = (x as f64 + 0.5 - cx, y as f64 + 0.5 - cy);
                dx * dx + dy * dy <= r * r
            }
        }
    }

    fn check_bounds(&self, width: usize, height: usize) -> Result<()> {
        let ok = match *self {
            Shape::Rect { x, y, w, h } => w > 0 && h > 0 && x + w <= width && y + h <= height,
            Shape::Disk { cx, cy, r } => {
                r > 0.0 && cx - r >= 0.0 && cy - r >= 0.0 && cx + r <= width as f64 && cy + r <= height as f64
            }
        };
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidConfig(format!(
                "{self:?} does not fit a {width}x{height} scene"
            )))
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SceneObject {
    pub shape: Shape,
    pub endmember: String,
    /// Sub-pixel coverage fraction.
    #[serde(default = "one")]
    pub coverage: f64,
    /// Truth label; defaults by endmember name.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub class: Option<Class>,
}

fn one() -> f64 {
    1.0
}

fn water() -> String {
    "water".into()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SceneSpec {
    pub width: usize,
    pub height: usize,
    #[serde(default = "water")]
    pub background: String,
    #[serde(default)]
    pub objects: Vec<SceneObject>,
    /// Standard deviation of the additive per-band Gaussian noise.
    #[serde(default)]
    pub noise_sigma: f64,
    #[serde(default)]
    pub seed: u64,
    /// Signatures that override or extend the built-in endmembers.
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub endmembers: EndmemberLibrary,
}

impl SceneSpec {
    pub fn new(width: usize, height: usize) -> Self {
        SceneSpec {
            width,
            height,
            background: water(),
            objects: Vec::new(),
            noise_sigma: 0.0,
            seed: 0,
            endmembers: BTreeMap::new(),
        }
    }

    pub fn with_object(mut self, shape: Shape, endmember: &str, coverage: f64) -> Self {
        self.objects.push(SceneObject {
            shape,
            endmember: endmember.into(),
            coverage,
            class: None,
        });
        self
    }

    pub fn with_noise(mut self, sigma: f64, seed: u64) -> Self {
        self.noise_sigma = sigma;
        self.seed = seed;
        self
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let spec: SceneSpec = serde_json::from_str(&text).map_err(|e| Error::json(path, e))?;
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if self.width == 0 || self.height == 0 {
            return Err(Error::InvalidConfig(format!(
                "scene size {}x{}",
                self.width, self.height
            )));
        }
        if !(self.noise_sigma.is_finite() && self.noise_sigma >= 0.0) {
            return Err(Error::InvalidConfig(format!("noise_sigma = {}", self.noise_sigma)));
        }
        for obj in &self.objects {
            if !(0.0..=1.0).contains(&obj.coverage) {
                return Err(Error::BadAlpha(obj.coverage));
            }
            obj.shape.check_bounds(self.width, self.height)?;
        }
        Ok(())
    }

    /// Endmember by name: inline signatures first, then built-ins.
    pub fn endmember(&self, name: &str, table: &WavelengthTable) -> Result<Endmember> {
        match self.endmembers.get(name) {
            Some(file) => {
                let sig = file.clone().into_signature()?.subset(&table.keys())?;
                Endmember::new(name, sig)
            }
            None => Endmember::builtin(name, table),
        }
    }
}

struct Layer<'a> {
    cover: Box<dyn Fn(usize, usize) -> bool + 'a>,
    signature: &'a [f64],
    alpha: f64,
    class: Class,
}

#[allow(clippy::too_many_arguments)]
fn render(
    width: usize,
    height: usize,
    table: &WavelengthTable,
    background: &[f64],
    background_class: Class,
    layers: &[Layer],
    noise_sigma: f64,
    seed: u64,
) -> Result<LabeledScene> {
    let n = width * height;
    let bands = table.len();
    // per pixel: index of the topmost layer covering it
    let mut top: Vec<Option<usize>> = vec![None; n];
    let mut truth = vec![background_class; n];
    for (l, layer) in layers.iter().enumerate() {
        for y in 0..height {
            for x in 0..width {
                if (layer.cover)(x, y) {
                    let i = y * width + x;
                    top[i] = Some(l);
                    if layer.alpha > 0.0 {
                        truth[i] = layer.class;
                    }
                }
            }
        }
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let normal = Normal::new(0.0, 1.0).expect("unit normal");
    let mut planes = Vec::with_capacity(bands);
    for (b, &bg) in background.iter().enumerate() {
        let mut values: Vec<f64> = top
            .iter()
            .map(|t| match t {
                Some(l) => mix_value(layers[*l].signature[b], bg, layers[*l].alpha),
                None => bg,
            })
            .collect();
        if noise_sigma > 0.0 {
            for v in &mut values {
                *v = (*v + noise_sigma * normal.sample(&mut rng)).max(0.0);
            }
        }
        planes.push(Plane::new(Raster::new(width, height, values)?)?);
    }
    Ok(LabeledScene {
        stack: BandStack::new(planes, table.clone())?,
        truth: Raster::new(width, height, truth)?,
    })
}

/// Renders `spec` on `table`. Covered pixels are `mix(object, background,
/// coverage)`; later objects replace earlier ones. Only pixels with nonzero
/// coverage take the object's truth label.
pub fn generate(spec: &SceneSpec, table: &WavelengthTable) -> Result<LabeledScene> {
    spec.validate()?;
    let background = spec.endmember(&spec.background, table)?;
    let background_class = Endmember::default_class(&spec.background).unwrap_or(Class::Water);
    let members = spec
        .objects
        .iter()
        .map(|o| {
            let class = o
                .class
                .or_else(|| Endmember::default_class(&o.endmember))
                .ok_or_else(|| Error::InvalidConfig(format!("object '{}' needs an explicit class", o.endmember)))?;
            Ok((spec.endmember(&o.endmember, table)?, class))
        })
        .collect::<Result<Vec<_>>>()?;
    let layers: Vec<Layer> = spec
        .objects
        .iter()
        .zip(&members)
        .map(|(o, (m, class))| Layer {
            cover: Box::new(move |x, y| o.shape.contains(x, y)),
            signature: m.signature.values(),
            alpha: o.coverage,
            class: *class,
        })
        .collect();
    render(
        spec.width,
        spec.height,
        table,
        background.signature.values(),
        background_class,
        &layers,
        spec.noise_sigma,
        spec.seed,
    )
}

/// Detector evaluated by [`sensitivity_curve`]. A pixel counts as detected
/// when it is labeled debris or floating_other.
#[derive(Debug, Clone, PartialEq)]
pub enum Detector {
    /// NDVI at or above the threshold.
    Ndvi(f64),
    /// FDI at or above the threshold.
    Fdi(f64),
    /// WCI below the threshold.
    Wci(f64),
    Combined(ThresholdConfig),
}

impl Detector {
    pub fn classify(&self, stack: &BandStack, reference: &WaterReference) -> Result<ClassMap> {
        let fdi_params = || FdiParams::from_table(stack.wavelengths());
        match self {
            Detector::Ndvi(t) => classify_single(&ndvi(stack)?, *t, Polarity::Above),
            Detector::Fdi(t) => classify_single(&fdi(stack, &fdi_params()?)?, *t, Polarity::Above),
            Detector::Wci(t) => classify_single(&wci(stack, reference, None)?, *t, Polarity::Below),
            Detector::Combined(cfg) => classify_combined(
                &ndvi(stack)?,
                &fdi(stack, &fdi_params()?)?,
                &wci(stack, reference, None)?,
                cfg,
            ),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CurveOptions {
    pub realizations: usize,
    pub noise_sigma: f64,
    /// Realization `r` uses seed `seed + r` at every coverage fraction.
    pub seed: u64,
    /// Side of the square, fully covered test scene.
    pub size: usize,
}

impl Default for CurveOptions {
    fn default() -> Self {
        CurveOptions {
            realizations: 100,
            noise_sigma: 0.005,
            seed: 0,
            size: 8,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CurvePoint {
    pub alpha: f64,
    pub detection_rate: f64,
    pub detected: usize,
    pub total: usize,
}

/// Fraction of planted pixels detected at each coverage fraction. The
/// background signature doubles as the water reference.
pub fn sensitivity_curve(
    endmember: &Endmember,
    background: &Endmember,
    alphas: &[f64],
    detector: &Detector,
    table: &WavelengthTable,
    opts: &CurveOptions,
) -> Result<Vec<CurvePoint>> {
    if opts.realizations == 0 || opts.size == 0 {
        return Err(Error::InvalidConfig(
            "sensitivity curve needs realizations and a scene size".into(),
        ));
    }
    if !(opts.noise_sigma.is_finite() && opts.noise_sigma >= 0.0) {
        return Err(Error::InvalidConfig(format!("noise_sigma = {}", opts.noise_sigma)));
    }
    let target = endmember.signature.subset(&table.keys())?;
    let bg = background.signature.subset(&table.keys())?;
    let reference = WaterReference::new(bg.clone(), Provenance::Builtin)?;
    alphas
        .iter()
        .map(|&alpha| {
            if !(0.0..=1.0).contains(&alpha) {
                return Err(Error::BadAlpha(alpha));
            }
            let detected = (0..opts.realizations)
                .into_par_iter()
                .map(|r| {
                    let layer = Layer {
                        cover: Box::new(|_, _| true),
                        signature: target.values(),
                        alpha,
                        class: Class::Debris,
                    };
                    let scene = render(
                        opts.size,
                        opts.size,
                        table,
                        bg.values(),
                        Class::Water,
                        &[layer],
                        opts.noise_sigma,
                        opts.seed.wrapping_add(r as u64),
                    )?;
                    let classes = detector.classify(&scene.stack, &reference)?;
                    Ok(classes
                        .data()
                        .iter()
                        .filter(|&&c| matches!(c, Class::Debris | Class::FloatingOther))
                        .count())
                })
                .collect::<Result<Vec<usize>>>()?
                .into_iter()
                .sum::<usize>();
            let total = opts.realizations * opts.size * opts.size;
            Ok(CurvePoint {
                alpha,
                detection_rate: detected as f64 / total as f64,
                detected,
                total,
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bands::{Sensor, MARIDA_ORDER};

    fn table() -> WavelengthTable {
        WavelengthTable::sentinel2(Sensor::S2A).select(&MARIDA_ORDER).unwrap()
    }

    fn sig(v: &[f64]) -> SpectralSignature {
        SpectralSignature::new((0..v.len()).map(|i| format!("B{}", i + 1)).collect(), v.to_vec()).unwrap()
    }

    #[test]
    fn mix_examples() {
        let a = sig(&[0.2, 0.4]);
        let b = sig(&[0.0, 0.0]);
        assert_eq!(mix(&a, &b, 0.0).unwrap(), b);
        assert_eq!(mix(&a, &b, 1.0).unwrap(), a);
        assert_eq!(mix(&a, &b, 0.5).unwrap().values(), &[0.1, 0.2]);
        assert!(matches!(mix(&a, &b, 1.5), Err(Error::BadAlpha(_))));
        assert!(matches!(
            mix(&a, &sig(&[0.1, 0.1, 0.1]), 0.5),
            Err(Error::LengthMismatch { .. })
        ));
    }

    #[test]
    fn anchors_interpolate_and_extrapolate_flat() {
        let a = [(500.0, 0.1), (700.0, 0.3)];
        assert_eq!(interpolate(&a, 400.0), 0.1);
        assert_eq!(interpolate(&a, 900.0), 0.3);
        assert!((interpolate(&a, 600.0) - 0.2).abs() < 1e-15);
        assert_eq!(interpolate(&a, 700.0), 0.3);
    }

    #[test]
    fn builtins_are_nonnegative_and_distinct() {
        let t = WavelengthTable::sentinel2(Sensor::S2A);
        let all: Vec<_> = Endmember::BUILTIN
            .iter()
            .map(|n| Endmember::builtin(n, &t).unwrap())
            .collect();
        for (i, a) in all.iter().enumerate() {
            assert!(a.signature.values().iter().all(|&v| v >= 0.0));
            for b in &all[i + 1..] {
                assert_ne!(a.signature, b.signature);
            }
        }
        assert!(Endmember::builtin("granite", &t).is_err());
    }

    #[test]
    fn noiseless_rect_equals_endmember() {
        let t = table();
        let spec = SceneSpec::new(16, 16).with_object(Shape::Rect { x: 4, y: 4, w: 8, h: 8 }, "plastic", 1.0);
        let scene = generate(&spec, &t).unwrap();
        let plastic = Endmember::builtin("plastic", &t).unwrap();
        let water = Endmember::builtin("water", &t).unwrap();
        assert_eq!(
            scene.stack.pixel_signature(5, 5).unwrap().values(),
            plastic.signature.values()
        );
        assert_eq!(
            scene.stack.pixel_signature(0, 0).unwrap().values(),
            water.signature.values()
        );
        assert_eq!(scene.truth.get(5, 5), Some(Class::Debris));
        assert_eq!(scene.truth.get(3, 5), Some(Class::Water));
    }

    #[test]
    fn same_seed_is_bit_identical() {
        let t = table();
        let spec = SceneSpec::new(12, 10)
            .with_object(
                Shape::Disk {
                    cx: 6.0,
                    cy: 5.0,
                    r: 3.0,
                },
                "wood",
                0.4,
            )
            .with_noise(0.01, 42);
        let a = generate(&spec, &t).unwrap();
        let b = generate(&spec, &t).unwrap();
        assert_eq!(a.stack, b.stack);
        assert_eq!(a.truth, b.truth);
        let c = generate(&spec.clone().with_noise(0.01, 43), &t).unwrap();
        assert_ne!(a.stack, c.stack);
    }

    #[test]
    fn zero_coverage_keeps_water_label() {
        let t = table();
        let spec = SceneSpec::new(4, 4).with_object(Shape::Rect { x: 0, y: 0, w: 2, h: 2 }, "plastic", 0.0);
        let scene = generate(&spec, &t).unwrap();
        assert!(scene.truth.data().iter().all(|&c| c == Class::Water));
    }

    #[test]
    fn spec_validation() {
        let t = table();
        let out = SceneSpec::new(8, 8).with_object(Shape::Rect { x: 4, y: 4, w: 8, h: 1 }, "plastic", 1.0);
        assert!(matches!(generate(&out, &t), Err(Error::InvalidConfig(_))));
        let alpha = SceneSpec::new(8, 8).with_object(Shape::Rect { x: 0, y: 0, w: 1, h: 1 }, "plastic", 1.2);
        assert!(matches!(generate(&alpha, &t), Err(Error::BadAlpha(_))));
        let unknown = SceneSpec::new(8, 8).with_object(Shape::Rect { x: 0, y: 0, w: 1, h: 1 }, "foam", 1.0);
        assert!(generate(&unknown, &t).is_err());
    }

    #[test]
    fn spec_json() {
        let text = r#"{
            "width": 8, "height": 8, "seed": 7, "noise_sigma": 0.002,
            "objects": [
                {"shape": {"type": "rect", "x": 1, "y": 1, "w": 2, "h": 2}, "endmember": "tarp", "class": "debris"}
            ],
            "endmembers": {"tarp": {"bands": ["B1","B2","B3","B4","B5","B6","B7","B8","B8A","B11","B12"],
                                     "values": [0.1,0.1,0.1,0.1,0.1,0.1,0.1,0.3,0.3,0.1,0.1]}}
        }"#;
        let spec: SceneSpec = serde_json::from_str(text).unwrap();
        assert_eq!(spec.objects[0].coverage, 1.0);
        let scene = generate(&spec, &table()).unwrap();
        assert_eq!(scene.truth.get(1, 1), Some(Class::Debris));
    }

    #[test]
    fn noiseless_fdi_detection_is_a_step() {
        let t = table();
        let plastic = Endmember::builtin("plastic", &t).unwrap();
        let water = Endmember::builtin("water", &t).unwrap();
        let opts = CurveOptions {
            realizations: 2,
            noise_sigma: 0.0,
            ..CurveOptions::default()
        };
        let curve = sensitivity_curve(&plastic, &water, &[0.0, 1.0], &Detector::Fdi(0.05), &t, &opts).unwrap();
        assert_eq!(curve[0].detection_rate, 0.0);
        assert_eq!(curve[1].detection_rate, 1.0);
        assert_eq!(curve[1].total, 128);
    }
}

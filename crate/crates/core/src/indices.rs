//! Per-pixel spectral indices: NDVI, the Floating Debris Index (FDI) and the
//! Water Correlation Index (WCI), plus estimation of the reference seawater
//! signature the WCI correlates against.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::bands::{s2, Sensor, WavelengthTable};
use crate::classify::{Class, ClassMap};
use crate::error::{Error, Result};
use crate::parallel::map_pixels;
use crate::raster::Raster;
use crate::spectral::{is_constant, BandStack, Correlation, IndexKind, IndexMap, SpectralSignature};

/// Minimum number of labeled water pixels for a mask-based water signature.
pub const MIN_WATER_PIXELS: usize = 32;

fn require_harmonized(stack: &BandStack) -> Result<()> {
    if stack.is_harmonized() {
        Ok(())
    } else {
        Err(Error::NotHarmonized)
    }
}

fn index_map(stack: &BandStack, kind: IndexKind, (values, valid): (Vec<f64>, Vec<bool>)) -> Result<IndexMap> {
    let (w, h) = (stack.width(), stack.height());
    IndexMap::new(kind, Raster::new(w, h, values)?, Raster::new(w, h, valid)?)
}

/// `(NIR - Red) / (NIR + Red)` per pixel. Pixels where the denominator is
/// zero are invalid.
pub fn ndvi(stack: &BandStack) -> Result<IndexMap> {
    require_harmonized(stack)?;
    let nir = stack.band_data(stack.band_index(s2::NIR)?);
    let red = stack.band_data(stack.band_index(s2::RED)?);
    let valid = stack.valid();
    let out = map_pixels(valid.len(), stack.width(), |i| {
        if !valid[i] {
            return None;
        }
        let sum = nir[i] + red[i];
        if sum == 0.0 {
            return None;
        }
        let v = (nir[i] - red[i]) / sum;
        (v.is_finite() && (-1.0..=1.0).contains(&v)).then_some(v)
    });
    index_map(stack, IndexKind::Ndvi, out)
}

/// Denominator of the FDI wavelength fraction.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "form")]
pub enum FdiDenominator {
    /// `lambda_nir + lambda_red`
    NirPlusRed,
    /// `lambda_swir - lambda_red`, the interpolation form of the original
    /// Floating Debris Index.
    SwirMinusRed { swir_nm: f64 },
}

/// Constants of the FDI baseline
/// `NIR' = lo + (hi - lo) * (lambda_nir - lambda_red) / denominator * factor_scale`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct FdiParams {
    pub nir_band: String,
    pub baseline_lo_band: String,
    pub baseline_hi_band: String,
    pub nir_nm: f64,
    pub red_nm: f64,
    pub denominator: FdiDenominator,
    pub factor_scale: f64,
}

impl Default for FdiParams {
    fn default() -> Self {
        FdiParams::sentinel2(Sensor::S2A)
    }
}

impl FdiParams {
    pub fn sentinel2(sensor: Sensor) -> Self {
        FdiParams::from_table(&WavelengthTable::sentinel2(sensor)).expect("built-in table has B4/B8")
    }

    /// NIR and Red center wavelengths taken from `table`.
    pub fn from_table(table: &WavelengthTable) -> Result<Self> {
        let nm = |key: &str| {
            table
                .find(key)
                .map(|b| b.wavelength_nm)
                .ok_or_else(|| Error::MissingBand(key.to_string()))
        };
        let params = FdiParams {
            nir_band: s2::NIR.into(),
            baseline_lo_band: s2::RED_EDGE2.into(),
            baseline_hi_band: s2::SWIR1.into(),
            nir_nm: nm(s2::NIR)?,
            red_nm: nm(s2::RED)?,
            denominator: FdiDenominator::NirPlusRed,
            factor_scale: 10.0,
        };
        params.validate()?;
        Ok(params)
    }

    /// The interpolation form `(lambda_nir - lambda_red) / (lambda_swir1 - lambda_red) * 10`.
    pub fn swir_interpolation(table: &WavelengthTable) -> Result<Self> {
        let swir_nm = table
            .find(s2::SWIR1)
            .map(|b| b.wavelength_nm)
            .ok_or_else(|| Error::MissingBand(s2::SWIR1.into()))?;
        let mut params = FdiParams::from_table(table)?;
        params.denominator = FdiDenominator::SwirMinusRed { swir_nm };
        params.validate()?;
        Ok(params)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.nir_nm > self.red_nm && self.red_nm > 0.0) {
            return Err(Error::InvalidConfig(format!(
                "FDI wavelengths need nir > red > 0 (got {} and {})",
                self.nir_nm, self.red_nm
            )));
        }
        if !(self.factor_scale.is_finite() && self.factor_scale > 0.0) {
            return Err(Error::InvalidConfig(format!(
                "FDI factor_scale must be > 0, got {}",
                self.factor_scale
            )));
        }
        if let FdiDenominator::SwirMinusRed { swir_nm } = self.denominator {
            if swir_nm.is_nan() || swir_nm <= self.red_nm {
                return Err(Error::InvalidConfig(format!(
                    "FDI swir wavelength {swir_nm} must exceed red {}",
                    self.red_nm
                )));
            }
        }
        Ok(())
    }

    /// The wavelength fraction times `factor_scale`.
    pub fn wavelength_factor(&self) -> f64 {
        let denom = match self.denominator {
            FdiDenominator::NirPlusRed => self.nir_nm + self.red_nm,
            FdiDenominator::SwirMinusRed { swir_nm } => swir_nm - self.red_nm,
        };
        (self.nir_nm - self.red_nm) / denom * self.factor_scale
    }
}

/// `NIR - NIR'` per pixel, with `NIR'` the baseline interpolated between the
/// configured low and high bands.
pub fn fdi(stack: &BandStack, params: &FdiParams) -> Result<IndexMap> {
    require_harmonized(stack)?;
    params.validate()?;
    let nir = stack.band_data(stack.band_index(&params.nir_band)?);
    let lo = stack.band_data(stack.band_index(&params.baseline_lo_band)?);
    let hi = stack.band_data(stack.band_index(&params.baseline_hi_band)?);
    let factor = params.wavelength_factor();
    let valid = stack.valid();
    let out = map_pixels(valid.len(), stack.width(), |i| {
        if !valid[i] {
            return None;
        }
        let baseline = lo[i] + (hi[i] - lo[i]) * factor;
        let v = nir[i] - baseline;
        v.is_finite().then_some(v)
    });
    index_map(stack, IndexKind::Fdi, out)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Provenance {
    /// Loaded from a signature file.
    File,
    /// Estimated from the scene.
    Estimated,
    /// Built-in synthetic fixture.
    Builtin,
}

impl std::fmt::Display for Provenance {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Provenance::File => "file",
            Provenance::Estimated => "estimated",
            Provenance::Builtin => "builtin",
        })
    }
}

/// JSON form shared by water references and endmember libraries.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SignatureFile {
    pub bands: Vec<String>,
    pub values: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub provenance: Option<Provenance>,
}

impl SignatureFile {
    pub fn into_signature(self) -> Result<SpectralSignature> {
        SpectralSignature::new(self.bands, self.values)
    }
}

/// Reference seawater spectrum.
#[derive(Debug, Clone, PartialEq)]
pub struct WaterReference {
    signature: SpectralSignature,
    provenance: Provenance,
}

impl WaterReference {
    pub fn new(signature: SpectralSignature, provenance: Provenance) -> Result<Self> {
        let v = signature.values();
        if is_constant(v) {
            return Err(Error::ZeroVarianceReference);
        }
        Ok(WaterReference { signature, provenance })
    }

    /// Synthetic clear-water spectrum sampled on `table`.
    pub fn builtin(table: &WavelengthTable) -> Result<Self> {
        let water = crate::synth::Endmember::builtin("water", table)?;
        WaterReference::new(water.signature, Provenance::Builtin)
    }

    pub fn signature(&self) -> &SpectralSignature {
        &self.signature
    }

    pub fn provenance(&self) -> Provenance {
        self.provenance
    }

    pub fn to_json(&self) -> String {
        let file = SignatureFile {
            bands: self.signature.band_ids().to_vec(),
            values: self.signature.values().to_vec(),
            provenance: Some(self.provenance),
        };
        serde_json::to_string_pretty(&file).expect("plain data serializes")
    }

    /// Parses the JSON form; provenance defaults to `file`.
    pub fn from_json(text: &str) -> std::result::Result<Self, serde_json::Error> {
        let file: SignatureFile = serde_json::from_str(text)?;
        let provenance = file.provenance.unwrap_or(Provenance::File);
        file.into_signature()
            .and_then(|s| WaterReference::new(s, provenance))
            .map_err(serde::de::Error::custom)
    }

    /// Loads a reference file. The result always has provenance `file`.
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let mut r = WaterReference::from_json(&text).map_err(|e| Error::json(path, e))?;
        r.provenance = Provenance::File;
        Ok(r)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_json()).map_err(|e| Error::io(path, e))
    }
}

/// Correlation of each pixel spectrum with the water reference over `bands`
/// (default: every stack band). Pixels with a constant spectrum are invalid.
pub fn wci(stack: &BandStack, reference: &WaterReference, bands: Option<&[String]>) -> Result<IndexMap> {
    wci_with(stack, reference, bands, Correlation::Pearson)
}

pub fn wci_with(
    stack: &BandStack,
    reference: &WaterReference,
    bands: Option<&[String]>,
    estimator: Correlation,
) -> Result<IndexMap> {
    require_harmonized(stack)?;
    let keys: Vec<String> = match bands {
        Some(b) => b.to_vec(),
        None => stack.wavelengths().keys(),
    };
    if keys.len() < 2 {
        return Err(Error::InvalidConfig(format!(
            "WCI needs at least 2 bands, got {}",
            keys.len()
        )));
    }
    let reference = reference.signature.subset(&keys)?;
    let r = reference.values();
    if is_constant(r) {
        return Err(Error::ZeroVarianceReference);
    }
    let planes = keys
        .iter()
        .map(|k| Ok(stack.band_data(stack.band_index(k)?)))
        .collect::<Result<Vec<_>>>()?;
    let valid = stack.valid();
    let n = planes.len() as f64;

    let out = match estimator {
        Correlation::Pearson => {
            let mean_r = r.iter().sum::<f64>() / n;
            let centered: Vec<f64> = r.iter().map(|v| v - mean_r).collect();
            let srr: f64 = centered.iter().map(|v| v * v).sum();
            map_pixels(valid.len(), stack.width(), |i| {
                if !valid[i] {
                    return None;
                }
                let first = planes[0][i];
                if planes.iter().all(|p| p[i] == first) {
                    return None;
                }
                let mean = planes.iter().map(|p| p[i]).sum::<f64>() / n;
                let (mut sxy, mut sxx) = (0.0, 0.0);
                for (p, c) in planes.iter().zip(&centered) {
                    let d = p[i] - mean;
                    sxy += d * c;
                    sxx += d * d;
                }
                if sxx == 0.0 {
                    return None;
                }
                let v = sxy / (sxx * srr).sqrt();
                v.is_finite().then(|| v.clamp(-1.0, 1.0))
            })
        }
        other => map_pixels(valid.len(), stack.width(), |i| {
            if !valid[i] {
                return None;
            }
            let x: Vec<f64> = planes.iter().map(|p| p[i]).collect();
            other.compute(&x, r).ok()
        }),
    };
    index_map(stack, IndexKind::Wci, out)
}

fn median(values: &mut [f64]) -> f64 {
    values.sort_by(f64::total_cmp);
    let n = values.len();
    if n % 2 == 1 {
        values[n / 2]
    } else {
        let (a, b) = (values[n / 2 - 1], values[n / 2]);
        if a == b {
            a
        } else {
            a + (b - a) / 2.0
        }
    }
}

fn median_signature(stack: &BandStack, pixels: &[usize]) -> Result<SpectralSignature> {
    let values = (0..stack.band_count())
        .map(|b| {
            let data = stack.band_data(b);
            let mut v: Vec<f64> = pixels.iter().map(|&i| data[i]).collect();
            median(&mut v)
        })
        .collect();
    SpectralSignature::new(stack.wavelengths().keys(), values)
}

/// Per-band median spectrum of the water pixels in `water_mask`, or, without
/// a mask, of the lowest-NDVI quartile of valid pixels.
pub fn estimate_water_signature(stack: &BandStack, water_mask: Option<&ClassMap>) -> Result<WaterReference> {
    require_harmonized(stack)?;
    let valid = stack.valid();
    let pixels: Vec<usize> = match water_mask {
        Some(mask) => {
            if mask.width() != stack.width() || mask.height() != stack.height() {
                return Err(Error::GridMismatch(format!(
                    "water mask is {}x{}, stack is {}x{}",
                    mask.width(),
                    mask.height(),
                    stack.width(),
                    stack.height()
                )));
            }
            let pixels: Vec<usize> = mask
                .data()
                .iter()
                .enumerate()
                .filter(|&(i, &c)| c == Class::Water && valid[i])
                .map(|(i, _)| i)
                .collect();
            if pixels.len() < MIN_WATER_PIXELS {
                return Err(Error::TooFewWaterPixels {
                    found: pixels.len(),
                    required: MIN_WATER_PIXELS,
                });
            }
            pixels
        }
        None => {
            let ndvi = ndvi(stack)?;
            let mut ranked: Vec<(f64, usize)> = (0..valid.len()).filter_map(|i| ndvi.at(i).map(|v| (v, i))).collect();
            if ranked.is_empty() {
                return Err(Error::TooFewWaterPixels { found: 0, required: 1 });
            }
            ranked.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
            let quartile = ranked.len().div_ceil(4);
            ranked[..quartile].iter().map(|&(_, i)| i).collect()
        }
    };
    WaterReference::new(median_signature(stack, &pixels)?, Provenance::Estimated)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bands::{BandInfo, MARIDA_ORDER};

    fn two_band(nir: f64, red: f64) -> BandStack {
        let t = WavelengthTable::sentinel2(Sensor::S2A).select(&["B4", "B8"]).unwrap();
        BandStack::from_fn(1, 1, t, |_, _| vec![red, nir]).unwrap()
    }

    fn fdi_stack(b6: f64, b8: f64, b11: f64) -> BandStack {
        let t = WavelengthTable::sentinel2(Sensor::S2A)
            .select(&["B4", "B6", "B8", "B11"])
            .unwrap();
        BandStack::from_fn(1, 1, t, |_, _| vec![0.05, b6, b8, b11]).unwrap()
    }

    #[test]
    fn ndvi_examples() {
        assert_eq!(ndvi(&two_band(0.2, 0.2)).unwrap().get(0, 0), Some(0.0));
        let v = ndvi(&two_band(0.06, 0.02)).unwrap().get(0, 0).unwrap();
        assert!((v - 0.5).abs() < 1e-12);
        let zero = ndvi(&two_band(0.0, 0.0)).unwrap();
        assert_eq!(zero.get(0, 0), None);
        assert_eq!(zero.valid_count(), 0);
    }

    #[test]
    fn ndvi_missing_red() {
        let t = WavelengthTable::sentinel2(Sensor::S2A).select(&["B3", "B8"]).unwrap();
        let stack = BandStack::from_fn(1, 1, t, |_, _| vec![0.1, 0.2]).unwrap();
        assert!(matches!(ndvi(&stack), Err(Error::MissingBand(b)) if b == "B4"));
    }

    #[test]
    fn indices_require_harmonized_stack() {
        let t = WavelengthTable::sentinel2(Sensor::S2A)
            .select(&["B4", "B8", "B6"])
            .unwrap();
        let fine = crate::spectral::Plane::new(Raster::filled(2, 2, 0.1).unwrap()).unwrap();
        let coarse = crate::spectral::Plane::new(Raster::filled(1, 1, 0.1).unwrap()).unwrap();
        let stack = BandStack::new(vec![fine.clone(), fine, coarse], t).unwrap();
        assert!(matches!(ndvi(&stack), Err(Error::NotHarmonized)));
        assert!(ndvi(&stack.harmonize().unwrap()).is_ok());
    }

    #[test]
    fn s2a_wavelength_factor() {
        // (832.8 - 664.6) / (832.8 + 664.6) * 10 = 8410 / 7487
        let f = FdiParams::sentinel2(Sensor::S2A).wavelength_factor();
        assert!((f - 1.1232803526111927).abs() < 1e-12, "{f}");
        let b = FdiParams::sentinel2(Sensor::S2B).wavelength_factor();
        assert!((b - 1.1214953271028036).abs() < 1e-12, "{b}");
    }

    #[test]
    fn fdi_examples() {
        let params = FdiParams::default();
        let v = fdi(&fdi_stack(0.1, 0.3, 0.2), &params).unwrap().get(0, 0).unwrap();
        assert!((v - 0.08767196473888073).abs() < 1e-12, "{v}");
        // baseline collapses when the two baseline bands agree
        let v = fdi(&fdi_stack(0.15, 0.4, 0.15), &params).unwrap().get(0, 0).unwrap();
        assert!((v - 0.25).abs() < 1e-15);
        // NIR on the baseline
        let nir_prime = 0.1 + (0.2 - 0.1) * params.wavelength_factor();
        let v = fdi(&fdi_stack(0.1, nir_prime, 0.2), &params)
            .unwrap()
            .get(0, 0)
            .unwrap();
        assert!(v.abs() < 1e-15);
    }

    #[test]
    fn fdi_swir_form() {
        let t = WavelengthTable::sentinel2(Sensor::S2A);
        let p = FdiParams::swir_interpolation(&t).unwrap();
        let expected = (832.8 - 664.6) / (1613.7 - 664.6) * 10.0;
        assert!((p.wavelength_factor() - expected).abs() < 1e-12);
    }

    #[test]
    fn fdi_params_validation() {
        let p = FdiParams {
            factor_scale: 0.0,
            ..FdiParams::default()
        };
        assert!(p.validate().is_err());
        let mut p = FdiParams::default();
        std::mem::swap(&mut p.nir_nm, &mut p.red_nm);
        assert!(p.validate().is_err());
        let json = serde_json::to_string(&FdiParams::default()).unwrap();
        assert_eq!(serde_json::from_str::<FdiParams>(&json).unwrap(), FdiParams::default());
    }

    fn ref3() -> WaterReference {
        let sig = SpectralSignature::new(vec!["B2".into(), "B3".into(), "B4".into()], vec![0.1, 0.2, 0.3]).unwrap();
        WaterReference::new(sig, Provenance::File).unwrap()
    }

    fn stack3(f: impl Fn(usize, usize) -> Vec<f64>) -> BandStack {
        let t = WavelengthTable::sentinel2(Sensor::S2A)
            .select(&["B2", "B3", "B4"])
            .unwrap();
        BandStack::from_fn(3, 2, t, f).unwrap()
    }

    #[test]
    fn wci_examples() {
        let r = ref3();
        let same = wci(&stack3(|_, _| vec![0.1, 0.2, 0.3]), &r, None).unwrap();
        assert!(same.valid_values().all(|v| (v - 1.0).abs() < 1e-12));
        let affine = wci(
            &stack3(|x, _| {
                let a = 1.0 + x as f64;
                vec![a * 0.1 + 0.05, a * 0.2 + 0.05, a * 0.3 + 0.05]
            }),
            &r,
            None,
        )
        .unwrap();
        assert!(affine.valid_values().all(|v| (v - 1.0).abs() < 1e-12));
        let rev = wci(&stack3(|_, _| vec![0.3, 0.2, 0.1]), &r, None).unwrap();
        assert!(rev.valid_values().all(|v| (v + 1.0).abs() < 1e-12));
        let flat = wci(&stack3(|_, _| vec![0.2, 0.2, 0.2]), &r, None).unwrap();
        assert_eq!(flat.valid_count(), 0);
    }

    #[test]
    fn wci_band_subset_and_errors() {
        let r = ref3();
        let stack = stack3(|_, _| vec![0.3, 0.2, 0.25]);
        let sub = vec!["B2".to_string(), "B3".to_string()];
        let m = wci(&stack, &r, Some(&sub)).unwrap();
        assert!(m.valid_values().all(|v| (v + 1.0).abs() < 1e-12));
        let missing = vec!["B2".to_string(), "B8".to_string()];
        assert!(matches!(wci(&stack, &r, Some(&missing)), Err(Error::MissingBand(_))));
        let one = vec!["B2".to_string()];
        assert!(wci(&stack, &r, Some(&one)).is_err());

        let flat_sig =
            SpectralSignature::new(vec!["B2".into(), "B3".into(), "B4".into()], vec![0.1, 0.1, 0.3]).unwrap();
        let flat_ref = WaterReference::new(flat_sig, Provenance::File).unwrap();
        assert!(matches!(
            wci(&stack, &flat_ref, Some(&sub)),
            Err(Error::ZeroVarianceReference)
        ));
    }

    #[test]
    fn water_reference_json() {
        let r = ref3();
        let text = r.to_json();
        assert!(text.contains("\"provenance\": \"file\""));
        let back = WaterReference::from_json(&text).unwrap();
        assert_eq!(back, r);
        let bare = WaterReference::from_json(r#"{"bands":["a","b"],"values":[0.1,0.123456789012345]}"#).unwrap();
        assert_eq!(bare.provenance(), Provenance::File);
        assert_eq!(bare.signature().values()[1], 0.123456789012345);
        assert!(WaterReference::from_json(r#"{"bands":["a","b"],"values":[0.1,0.1]}"#).is_err());
    }

    #[test]
    fn estimate_with_uniform_mask() {
        let t = WavelengthTable::sentinel2(Sensor::S2A).select(&MARIDA_ORDER).unwrap();
        let s: Vec<f64> = (0..11).map(|i| 0.01 + 0.003 * i as f64).collect();
        let stack = BandStack::from_fn(8, 8, t, |_, _| s.clone()).unwrap();
        let mask = Raster::filled(8, 8, Class::Water).unwrap();
        let r = estimate_water_signature(&stack, Some(&mask)).unwrap();
        assert_eq!(r.signature().values(), &s[..]);
        assert_eq!(r.provenance(), Provenance::Estimated);
    }

    #[test]
    fn too_few_water_pixels() {
        let t = WavelengthTable::sentinel2(Sensor::S2A).select(&["B4", "B8"]).unwrap();
        let stack = BandStack::from_fn(8, 8, t, |_, _| vec![0.1, 0.2]).unwrap();
        let mask = Raster::from_fn(8, 8, |x, y| {
            if y == 0 && x < 8 || y == 1 && x < 2 {
                Class::Water
            } else {
                Class::Debris
            }
        })
        .unwrap();
        assert!(matches!(
            estimate_water_signature(&stack, Some(&mask)),
            Err(Error::TooFewWaterPixels {
                found: 10,
                required: 32
            })
        ));
    }

    #[test]
    fn custom_tables_work_with_indices() {
        let t = WavelengthTable::new(vec![
            BandInfo {
                key: "B4".into(),
                descriptor: "Red".into(),
                wavelength_nm: 660.0,
                resolution_m: 10,
            },
            BandInfo {
                key: "B8".into(),
                descriptor: "NIR".into(),
                wavelength_nm: 840.0,
                resolution_m: 10,
            },
        ])
        .unwrap();
        let p = FdiParams::from_table(&t).unwrap();
        assert!((p.wavelength_factor() - 180.0 / 1500.0 * 10.0).abs() < 1e-15);
    }

    #[test]
    fn median_is_deterministic() {
        assert_eq!(median(&mut [3.0, 1.0, 2.0]), 2.0);
        assert_eq!(median(&mut [4.0, 1.0, 2.0, 3.0]), 2.5);
        assert_eq!(median(&mut [0.3, 0.3]), 0.3);
    }
}

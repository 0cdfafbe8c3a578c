//! Raster file I/O: a GeoTIFF subset and the BSF fixture format, both decoded
//! into [`BandStack`]s, single-band label masks, or index rasters.

pub mod bsf;
pub mod tiff;

use std::path::Path;

use crate::bands::{BandInfo, BandOrder, Sensor, WavelengthTable};
use crate::classify::ClassMap;
use crate::error::{Error, Result};
use crate::raster::{Dtype, OpaqueTag, Raster, RasterHeader};
use crate::spectral::{BandStack, IndexMap, Plane};

pub use tiff::{Compression, Layout, Planar, WriteOptions};

/// Ground-truth mask with raw integer label codes.
pub type CodeMask = Raster<u16>;

/// Band metadata carried by a file, when present.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct BandMeta {
    pub key: Option<String>,
    pub descriptor: Option<String>,
    pub wavelength_nm: Option<f64>,
    pub resolution_m: Option<u32>,
}

/// Stored sample values (before scaling) exactly as they appear in a file.
#[derive(Debug, Clone, PartialEq)]
pub struct RawRaster {
    pub header: RasterHeader,
    pub bands: Vec<Vec<f64>>,
    pub band_meta: Vec<BandMeta>,
    pub geo_tags: Vec<OpaqueTag>,
}

impl RawRaster {
    pub fn validate(&self) -> Result<()> {
        self.header.validate()?;
        if self.bands.len() != self.header.band_count || self.band_meta.len() != self.header.band_count {
            return Err(Error::InvalidHeader(format!(
                "header declares {} bands, payload has {} (metadata {})",
                self.header.band_count,
                self.bands.len(),
                self.band_meta.len()
            )));
        }
        if let Some(b) = self.bands.iter().find(|b| b.len() != self.header.pixel_count()) {
            return Err(Error::InvalidHeader(format!(
                "band with {} samples in a {}x{} raster",
                b.len(),
                self.header.width,
                self.header.height
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RasterFormat {
    GeoTiff,
    Bsf,
}

impl RasterFormat {
    /// Picks the format from a file extension (`.bsf`, otherwise GeoTIFF).
    pub fn from_path(path: &Path) -> Self {
        match path.extension().and_then(|e| e.to_str()) {
            Some(e) if e.eq_ignore_ascii_case("bsf") => RasterFormat::Bsf,
            _ => RasterFormat::GeoTiff,
        }
    }

    fn sniff(path: &Path) -> Result<Self> {
        use std::io::Read;
        let mut magic = [0u8; 4];
        let mut f = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
        let n = f.read(&mut magic).map_err(|e| Error::io(path, e))?;
        Ok(if n == 4 && magic == bsf::MAGIC {
            RasterFormat::Bsf
        } else {
            RasterFormat::GeoTiff
        })
    }
}

/// How stored values become a [`BandStack`].
#[derive(Debug, Clone)]
pub struct ReadOptions {
    /// Table used to resolve band keys and wavelengths absent from the file.
    pub sensor: WavelengthTable,
    pub band_order: BandOrder,
    /// Overrides the file's (or dtype default) reflectance scale.
    pub scale: Option<f64>,
    pub expect_dtype: Option<Dtype>,
}

impl Default for ReadOptions {
    fn default() -> Self {
        ReadOptions {
            sensor: WavelengthTable::sentinel2(Sensor::S2A),
            band_order: BandOrder::Auto,
            scale: None,
            expect_dtype: None,
        }
    }
}

pub fn read_geotiff(path: &Path) -> Result<BandStack> {
    read_geotiff_with(path, &ReadOptions::default())
}

pub fn read_geotiff_with(path: &Path, opts: &ReadOptions) -> Result<BandStack> {
    raw_to_stack(tiff::read_raw(path, opts.expect_dtype)?, opts)
}

pub fn write_geotiff(stack: &BandStack, path: &Path) -> Result<()> {
    write_geotiff_with(stack, path, &WriteOptions::default())
}

pub fn write_geotiff_with(stack: &BandStack, path: &Path, opts: &WriteOptions) -> Result<()> {
    tiff::write_raw(&stack_to_raw(stack)?, path, opts)
}

pub fn read_bsf(path: &Path) -> Result<BandStack> {
    read_bsf_with(path, &ReadOptions::default())
}

pub fn read_bsf_with(path: &Path, opts: &ReadOptions) -> Result<BandStack> {
    let raw = bsf::read_raw(path)?;
    if let Some(want) = opts.expect_dtype {
        if want != raw.header.dtype {
            return Err(Error::DtypeMismatch(format!(
                "file declares {}, caller expects {want}",
                raw.header.dtype
            )));
        }
    }
    raw_to_stack(raw, opts)
}

pub fn write_bsf(stack: &BandStack, path: &Path) -> Result<()> {
    bsf::write_raw(&stack_to_raw(stack)?, path)
}

/// Reads a stack from either format, detected by magic bytes.
pub fn read_stack(path: &Path, opts: &ReadOptions) -> Result<BandStack> {
    match RasterFormat::sniff(path)? {
        RasterFormat::Bsf => read_bsf_with(path, opts),
        RasterFormat::GeoTiff => read_geotiff_with(path, opts),
    }
}

/// Writes a stack in the format implied by the file extension.
pub fn write_stack(stack: &BandStack, path: &Path) -> Result<()> {
    match RasterFormat::from_path(path) {
        RasterFormat::Bsf => write_bsf(stack, path),
        RasterFormat::GeoTiff => write_geotiff(stack, path),
    }
}

fn read_raw_any(path: &Path) -> Result<RawRaster> {
    match RasterFormat::sniff(path)? {
        RasterFormat::Bsf => bsf::read_raw(path),
        RasterFormat::GeoTiff => tiff::read_raw(path, None),
    }
}

fn write_raw_any(raw: &RawRaster, path: &Path) -> Result<()> {
    match RasterFormat::from_path(path) {
        RasterFormat::Bsf => bsf::write_raw(raw, path),
        RasterFormat::GeoTiff => tiff::write_raw(raw, path, &WriteOptions::default()),
    }
}

/// Reads a single-band integer label mask, preserving raw codes.
pub fn read_mask(path: &Path) -> Result<CodeMask> {
    let raw = read_raw_any(path)?;
    if raw.header.band_count != 1 {
        return Err(Error::NonIntegerMask(format!(
            "'{}' has {} bands",
            path.display(),
            raw.header.band_count
        )));
    }
    if !raw.header.dtype.is_integer() {
        return Err(Error::NonIntegerMask(format!(
            "'{}' stores {} samples",
            path.display(),
            raw.header.dtype
        )));
    }
    let RawRaster { header, mut bands, .. } = raw;
    let codes = bands.swap_remove(0).into_iter().map(|v| v as u16).collect();
    Raster::new(header.width, header.height, codes)
}

/// Writes raw label codes as `uint8` when they fit, else `uint16`.
pub fn write_mask(mask: &CodeMask, path: &Path) -> Result<()> {
    let max = mask.data().iter().copied().max().unwrap_or(0);
    let dtype = if max <= u8::MAX as u16 {
        Dtype::Uint8
    } else {
        Dtype::Uint16
    };
    let raw = RawRaster {
        header: RasterHeader::new(mask.width(), mask.height(), 1, dtype),
        bands: vec![mask.data().iter().map(|&c| c as f64).collect()],
        band_meta: vec![BandMeta::default()],
        geo_tags: Vec::new(),
    };
    write_raw_any(&raw, path)
}

/// Writes predicted classes as their `u8` codes.
pub fn write_class_map(map: &ClassMap, path: &Path) -> Result<()> {
    write_mask(&map.map(|c| c.code() as u16), path)
}

/// Writes an index map as single-band `float32`; invalid pixels become NaN.
pub fn write_index(map: &IndexMap, path: &Path) -> Result<()> {
    let mut header = RasterHeader::new(map.width(), map.height(), 1, Dtype::Float32);
    header.nodata = Some(f64::NAN);
    let values = map
        .values()
        .data()
        .iter()
        .zip(map.valid().data())
        .map(|(&v, &ok)| if ok { v as f32 as f64 } else { f64::NAN })
        .collect();
    let raw = RawRaster {
        header,
        bands: vec![values],
        band_meta: vec![BandMeta {
            key: Some(map.kind().name().to_ascii_uppercase()),
            ..BandMeta::default()
        }],
        geo_tags: Vec::new(),
    };
    write_raw_any(&raw, path)
}

/// Reads a single-band float raster written by [`write_index`]:
/// values and validity (NaN and nodata are invalid).
pub fn read_index_values(path: &Path) -> Result<(Raster<f64>, Raster<bool>)> {
    let raw = read_raw_any(path)?;
    if raw.header.band_count != 1 {
        return Err(Error::InvalidHeader(format!(
            "index raster has {} bands",
            raw.header.band_count
        )));
    }
    let (w, h) = (raw.header.width, raw.header.height);
    let values: Vec<f64> = raw.bands[0].iter().map(|v| v * raw.header.scale).collect();
    let valid = raw.bands[0]
        .iter()
        .map(|&v| v.is_finite() && !raw.header.is_nodata(v))
        .collect();
    Ok((Raster::new(w, h, values)?, Raster::new(w, h, valid)?))
}

fn band_table(raw: &RawRaster, opts: &ReadOptions) -> Result<WavelengthTable> {
    let n = raw.header.band_count;
    if raw.band_meta.iter().all(|m| m.key.is_some()) {
        let bands = raw
            .band_meta
            .iter()
            .map(|m| {
                let key = m.key.clone().expect("checked");
                let known = opts.sensor.find(&key);
                let pick = |file: Option<f64>, table: Option<f64>| file.or(table);
                Ok(BandInfo {
                    descriptor: m
                        .descriptor
                        .clone()
                        .or_else(|| known.map(|b| b.descriptor.clone()))
                        .unwrap_or_default(),
                    wavelength_nm: pick(m.wavelength_nm, known.map(|b| b.wavelength_nm))
                        .ok_or_else(|| Error::MissingBand(key.clone()))?,
                    resolution_m: m
                        .resolution_m
                        .or(known.map(|b| b.resolution_m))
                        .ok_or_else(|| Error::MissingBand(key.clone()))?,
                    key,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        return WavelengthTable::new(bands);
    }
    if raw.band_meta.iter().all(|m| m.wavelength_nm.is_some()) {
        let tables = [
            opts.sensor.clone(),
            WavelengthTable::sentinel2(Sensor::S2A),
            WavelengthTable::sentinel2(Sensor::S2B),
        ];
        let bands = raw
            .band_meta
            .iter()
            .map(|m| {
                let nm = m.wavelength_nm.expect("checked");
                match tables.iter().find_map(|t| t.by_wavelength(nm)) {
                    Some(b) => b.clone(),
                    None => BandInfo {
                        key: format!("{nm}nm"),
                        descriptor: String::new(),
                        wavelength_nm: nm,
                        resolution_m: 10,
                    },
                }
            })
            .collect();
        return WavelengthTable::new(bands);
    }
    opts.band_order.resolve(&opts.sensor, n)
}

/// Applies scale, nodata and band metadata to stored values.
pub fn raw_to_stack(raw: RawRaster, opts: &ReadOptions) -> Result<BandStack> {
    raw.validate()?;
    let table = band_table(&raw, opts)?;
    let mut header = raw.header;
    if let Some(s) = opts.scale {
        header.scale = s;
    }
    header.validate()?;
    let (w, h) = (header.width, header.height);
    let planes = raw
        .bands
        .into_iter()
        .enumerate()
        .map(|(b, stored)| {
            let valid: Vec<bool> = stored.iter().map(|&v| !header.is_nodata(v)).collect();
            let values: Vec<f64> = stored.iter().map(|&v| v * header.scale).collect();
            let negative = values
                .iter()
                .zip(&valid)
                .any(|(&v, &ok)| ok && v.is_finite() && v < 0.0);
            let (values, valid) = (Raster::new(w, h, values)?, Raster::new(w, h, valid)?);
            if negative {
                log::warn!(
                    "band {} has negative reflectance; flagged raw-uncalibrated",
                    table.bands()[b].key
                );
                Plane::uncalibrated(values, valid)
            } else {
                Plane::with_validity(values, valid)
            }
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(BandStack::new(planes, table)?
        .with_storage(header.dtype, header.scale, header.nodata)?
        .with_geo_tags(raw.geo_tags))
}

/// Quantizes reflectance back to stored values using the stack's header.
pub fn stack_to_raw(stack: &BandStack) -> Result<RawRaster> {
    if !stack.is_harmonized() {
        return Err(Error::NotHarmonized);
    }
    let header = RasterHeader {
        width: stack.width(),
        height: stack.height(),
        band_count: stack.band_count(),
        ..stack.header().clone()
    };
    header.validate()?;
    let bands = stack
        .planes()
        .iter()
        .map(|p| {
            p.values()
                .data()
                .iter()
                .zip(p.valid().data())
                .map(|(&v, &ok)| match header.nodata {
                    Some(nd) if !ok => nd,
                    _ => header.dtype.quantize(v / header.scale),
                })
                .collect()
        })
        .collect();
    let band_meta = stack
        .wavelengths()
        .bands()
        .iter()
        .map(|b| BandMeta {
            key: Some(b.key.clone()),
            descriptor: Some(b.descriptor.clone()),
            wavelength_nm: Some(b.wavelength_nm),
            resolution_m: Some(b.resolution_m),
        })
        .collect();
    Ok(RawRaster {
        header,
        bands,
        band_meta,
        geo_tags: stack.geo_tags().to_vec(),
    })
}

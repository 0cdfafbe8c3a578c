//! Generic pixel grids and the storage header shared by every raster format.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A row-major `width x height` grid of values.
#[derive(Debug, Clone, PartialEq)]
pub struct Raster<T> {
    width: usize,
    height: usize,
    data: Vec<T>,
}

impl<T: Copy> Raster<T> {
    pub fn new(width: usize, height: usize, data: Vec<T>) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::InvalidHeader(format!(
                "raster dimensions must be positive, got {width}x{height}"
            )));
        }
        if data.len() != width * height {
            return Err(Error::LengthMismatch {
                left: data.len(),
                right: width * height,
            });
        }
        Ok(Raster { width, height, data })
    }

    pub fn filled(width: usize, height: usize, value: T) -> Result<Self> {
        Raster::new(width, height, vec![value; width * height])
    }

    pub fn from_fn(width: usize, height: usize, f: impl Fn(usize, usize) -> T) -> Result<Self> {
        let mut data = Vec::with_capacity(width * height);
        for y in 0..height {
            for x in 0..width {
                data.push(f(x, y));
            }
        }
        Raster::new(width, height, data)
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn same_grid<U>(&self, other: &Raster<U>) -> bool {
        self.width == other.width && self.height == other.height
    }

    pub fn get(&self, x: usize, y: usize) -> Option<T> {
        if x < self.width && y < self.height {
            Some(self.data[y * self.width + x])
        } else {
            None
        }
    }

    pub fn set(&mut self, x: usize, y: usize, value: T) {
        assert!(x < self.width && y < self.height, "pixel out of bounds");
        self.data[y * self.width + x] = value;
    }

    pub fn data(&self) -> &[T] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [T] {
        &mut self.data
    }

    pub fn into_data(self) -> Vec<T> {
        self.data
    }

    pub fn map<U: Copy>(&self, f: impl Fn(T) -> U) -> Raster<U> {
        Raster {
            width: self.width,
            height: self.height,
            data: self.data.iter().map(|&v| f(v)).collect(),
        }
    }
}

/// Upsampling factors that map 60 m, 20 m and 10 m grids onto each other.
pub const UPSAMPLE_FACTORS: [usize; 4] = [1, 2, 3, 6];

/// Block-replicates every pixel into a `factor x factor` block.
pub fn upsample_nearest<T: Copy>(plane: &Raster<T>, factor: usize) -> Result<Raster<T>> {
    if !UPSAMPLE_FACTORS.contains(&factor) {
        return Err(Error::BadFactor(factor));
    }
    if factor == 1 {
        return Ok(plane.clone());
    }
    let width = plane.width * factor;
    let height = plane.height * factor;
    let mut data = Vec::with_capacity(width * height);
    for y in 0..height {
        let src_row = &plane.data[(y / factor) * plane.width..][..plane.width];
        for &v in src_row {
            data.extend(std::iter::repeat_n(v, factor));
        }
    }
    Raster::new(width, height, data)
}

/// Bilinear interpolation between source pixel centres, clamped at the
/// edges. Output pixels with an invalid neighbour take the nearest source
/// value instead, so invalid samples never leak into valid ones.
pub fn upsample_bilinear(plane: &Raster<f64>, valid: &Raster<bool>, factor: usize) -> Result<Raster<f64>> {
    if !UPSAMPLE_FACTORS.contains(&factor) {
        return Err(Error::BadFactor(factor));
    }
    if !plane.same_grid(valid) {
        return Err(Error::GridMismatch("plane and validity differ in size".into()));
    }
    let (w, h) = (plane.width, plane.height);
    // source coordinate of output index i, and its two neighbours with weight
    let axis = |i: usize, n: usize| {
        let s = ((i as f64 + 0.5) / factor as f64 - 0.5).clamp(0.0, (n - 1) as f64);
        let lo = s.floor() as usize;
        (lo, (lo + 1).min(n - 1), s - lo as f64)
    };
    Raster::from_fn(w * factor, h * factor, |x, y| {
        let (x0, x1, fx) = axis(x, w);
        let (y0, y1, fy) = axis(y, h);
        let corners = [(x0, y0), (x1, y0), (x0, y1), (x1, y1)];
        if corners.iter().any(|&(cx, cy)| !valid.data[cy * w + cx]) {
            return plane.data[(y / factor) * w + x / factor];
        }
        let at = |cx: usize, cy: usize| plane.data[cy * w + cx];
        let top = at(x0, y0) * (1.0 - fx) + at(x1, y0) * fx;
        let bottom = at(x0, y1) * (1.0 - fx) + at(x1, y1) * fx;
        top * (1.0 - fy) + bottom * fy
    })
}

/// On-disk sample type.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Dtype {
    Uint8,
    Uint16,
    Float32,
}

impl Dtype {
    pub fn size(self) -> usize {
        match self {
            Dtype::Uint8 => 1,
            Dtype::Uint16 => 2,
            Dtype::Float32 => 4,
        }
    }

    /// Numeric code used in the BSF header.
    pub fn code(self) -> u32 {
        match self {
            Dtype::Uint8 => 1,
            Dtype::Uint16 => 2,
            Dtype::Float32 => 3,
        }
    }

    pub fn from_code(code: u32) -> Option<Self> {
        match code {
            1 => Some(Dtype::Uint8),
            2 => Some(Dtype::Uint16),
            3 => Some(Dtype::Float32),
            _ => None,
        }
    }

    pub fn is_integer(self) -> bool {
        !matches!(self, Dtype::Float32)
    }

    /// Scale applied when the file does not carry one: Sentinel-2 L1C stores
    /// reflectance as `uint16` digital numbers in units of 1/10000.
    pub fn default_scale(self) -> f64 {
        match self {
            Dtype::Uint16 => 1.0 / 10_000.0,
            _ => 1.0,
        }
    }

    /// Rounds and saturates `value` to the nearest representable stored value.
    pub fn quantize(self, value: f64) -> f64 {
        match self {
            Dtype::Uint8 => value.round().clamp(0.0, u8::MAX as f64),
            Dtype::Uint16 => value.round().clamp(0.0, u16::MAX as f64),
            Dtype::Float32 => value as f32 as f64,
        }
    }
}

impl std::fmt::Display for Dtype {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Dtype::Uint8 => "uint8",
            Dtype::Uint16 => "uint16",
            Dtype::Float32 => "float32",
        })
    }
}

/// Storage description of a raster file: reflectance = stored value x `scale`.
#[derive(Debug, Clone, PartialEq)]
pub struct RasterHeader {
    pub width: usize,
    pub height: usize,
    pub band_count: usize,
    pub dtype: Dtype,
    pub scale: f64,
    pub nodata: Option<f64>,
}

impl RasterHeader {
    pub fn new(width: usize, height: usize, band_count: usize, dtype: Dtype) -> Self {
        RasterHeader {
            width,
            height,
            band_count,
            dtype,
            scale: 1.0,
            nodata: None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.width == 0 || self.height == 0 || self.band_count == 0 {
            return Err(Error::InvalidHeader(format!(
                "width, height and band_count must be >= 1 (got {}x{}x{})",
                self.width, self.height, self.band_count
            )));
        }
        if !(self.scale.is_finite() && self.scale > 0.0) {
            return Err(Error::InvalidHeader(format!(
                "scale must be finite and > 0, got {}",
                self.scale
            )));
        }
        Ok(())
    }

    pub fn pixel_count(&self) -> usize {
        self.width * self.height
    }

    pub fn payload_len(&self) -> usize {
        self.pixel_count() * self.band_count * self.dtype.size()
    }

    /// True if `stored` equals the nodata sentinel (NaN sentinels match NaN).
    pub fn is_nodata(&self, stored: f64) -> bool {
        match self.nodata {
            Some(nd) if nd.is_nan() => stored.is_nan(),
            Some(nd) => stored == nd,
            None => false,
        }
    }
}

/// A TIFF tag carried through a read/write cycle without interpretation
/// (geo-referencing keys, tie points, pixel scale).
#[derive(Debug, Clone, PartialEq)]
pub struct OpaqueTag {
    pub code: u16,
    pub value: TagValue,
}

#[derive(Debug, Clone, PartialEq)]
pub enum TagValue {
    Byte(Vec<u8>),
    Ascii(Vec<u8>),
    Short(Vec<u16>),
    Long(Vec<u32>),
    Rational(Vec<(u32, u32)>),
    SByte(Vec<i8>),
    Undefined(Vec<u8>),
    SShort(Vec<i16>),
    SLong(Vec<i32>),
    SRational(Vec<(i32, i32)>),
    Float(Vec<f32>),
    Double(Vec<f64>),
}

impl TagValue {
    pub fn count(&self) -> usize {
        match self {
            TagValue::Byte(v) | TagValue::Ascii(v) | TagValue::Undefined(v) => v.len(),
            TagValue::Short(v) => v.len(),
            TagValue::Long(v) => v.len(),
            TagValue::Rational(v) => v.len(),
            TagValue::SByte(v) => v.len(),
            TagValue::SShort(v) => v.len(),
            TagValue::SLong(v) => v.len(),
            TagValue::SRational(v) => v.len(),
            TagValue::Float(v) => v.len(),
            TagValue::Double(v) => v.len(),
        }
    }

    /// Integer view for SHORT/LONG/BYTE tags.
    pub fn as_u64s(&self) -> Option<Vec<u64>> {
        match self {
            TagValue::Byte(v) => Some(v.iter().map(|&x| x as u64).collect()),
            TagValue::Short(v) => Some(v.iter().map(|&x| x as u64).collect()),
            TagValue::Long(v) => Some(v.iter().map(|&x| x as u64).collect()),
            _ => None,
        }
    }

    /// Text view for ASCII tags, trailing NULs stripped.
    pub fn as_text(&self) -> Option<String> {
        match self {
            TagValue::Ascii(v) => {
                let end = v.iter().rposition(|&b| b != 0).map_or(0, |p| p + 1);
                Some(String::from_utf8_lossy(&v[..end]).into_owned())
            }
            _ => None,
        }
    }
}

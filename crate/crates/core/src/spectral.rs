//! In-memory spectral data model: band stacks, per-pixel signatures, index
//! maps, correlation estimators and grid harmonization.

use serde::{Deserialize, Serialize};

use crate::bands::WavelengthTable;
use crate::error::{Error, Result};
use crate::raster::{upsample_bilinear, upsample_nearest, Dtype, OpaqueTag, Raster, RasterHeader, UPSAMPLE_FACTORS};

/// One band of reflectance with its own validity mask.
///
/// Non-finite values are always invalid. Valid values must be non-negative
/// unless the plane is flagged raw-uncalibrated.
#[derive(Debug, Clone, PartialEq)]
pub struct Plane {
    values: Raster<f64>,
    valid: Raster<bool>,
    raw_uncalibrated: bool,
}

impl Plane {
    pub fn new(values: Raster<f64>) -> Result<Self> {
        let valid = values.map(|v| v.is_finite());
        Plane::with_validity(values, valid)
    }

    pub fn with_validity(values: Raster<f64>, valid: Raster<bool>) -> Result<Self> {
        let plane = Plane::build(values, valid, false)?;
        if let Some(v) = plane.valid_values().find(|v| *v < 0.0) {
            return Err(Error::InvalidStack(format!(
                "negative reflectance {v} in a calibrated plane"
            )));
        }
        Ok(plane)
    }

    /// A plane whose values may be negative (e.g. uncalibrated digital numbers).
    pub fn uncalibrated(values: Raster<f64>, valid: Raster<bool>) -> Result<Self> {
        Plane::build(values, valid, true)
    }

    fn build(values: Raster<f64>, valid: Raster<bool>, raw_uncalibrated: bool) -> Result<Self> {
        if !values.same_grid(&valid) {
            return Err(Error::GridMismatch(format!(
                "plane values are {}x{} but mask is {}x{}",
                values.width(),
                values.height(),
                valid.width(),
                valid.height()
            )));
        }
        let mut valid = valid;
        for (m, v) in valid.data_mut().iter_mut().zip(values.data()) {
            *m &= v.is_finite();
        }
        Ok(Plane {
            values,
            valid,
            raw_uncalibrated,
        })
    }

    pub fn width(&self) -> usize {
        self.values.width()
    }

    pub fn height(&self) -> usize {
        self.values.height()
    }

    pub fn values(&self) -> &Raster<f64> {
        &self.values
    }

    pub fn valid(&self) -> &Raster<bool> {
        &self.valid
    }

    pub fn is_raw_uncalibrated(&self) -> bool {
        self.raw_uncalibrated
    }

    fn valid_values(&self) -> impl Iterator<Item = f64> + '_ {
        self.values
            .data()
            .iter()
            .zip(self.valid.data())
            .filter(|(_, &ok)| ok)
            .map(|(&v, _)| v)
    }
}

/// Co-registered multi-band reflectance raster.
///
/// Planes may sit on different native grids (10/20/60 m) until
/// [`BandStack::harmonize`] brings them onto the finest one. The stack-level
/// validity mask always lives on the finest grid and is the conjunction of
/// every plane's mask.
#[derive(Debug, Clone, PartialEq)]
pub struct BandStack {
    header: RasterHeader,
    planes: Vec<Plane>,
    wavelengths: WavelengthTable,
    valid: Vec<bool>,
    factors: Vec<usize>,
    geo_tags: Vec<OpaqueTag>,
}

impl BandStack {
    pub fn new(planes: Vec<Plane>, wavelengths: WavelengthTable) -> Result<Self> {
        if planes.is_empty() {
            return Err(Error::InvalidStack("a stack needs at least one band".into()));
        }
        if planes.len() != wavelengths.len() {
            return Err(Error::InvalidStack(format!(
                "{} planes but {} wavelength entries",
                planes.len(),
                wavelengths.len()
            )));
        }
        let (width, height, factors) = grid_factors(&planes, &wavelengths)?;
        let mut valid = vec![true; width * height];
        for (plane, &k) in planes.iter().zip(&factors) {
            let mask = plane.valid.data();
            for y in 0..height {
                let src = &mask[(y / k) * plane.width()..][..plane.width()];
                let dst = &mut valid[y * width..][..width];
                for (x, d) in dst.iter_mut().enumerate() {
                    *d &= src[x / k];
                }
            }
        }
        let band_count = planes.len();
        Ok(BandStack {
            header: RasterHeader::new(width, height, band_count, Dtype::Float32),
            planes,
            wavelengths,
            valid,
            factors,
            geo_tags: Vec::new(),
        })
    }

    /// Builds a harmonized stack from a per-pixel spectrum function.
    pub fn from_fn(
        width: usize,
        height: usize,
        wavelengths: WavelengthTable,
        f: impl Fn(usize, usize) -> Vec<f64>,
    ) -> Result<Self> {
        let n = wavelengths.len();
        let mut bands = vec![Vec::with_capacity(width * height); n];
        for y in 0..height {
            for x in 0..width {
                let spectrum = f(x, y);
                if spectrum.len() != n {
                    return Err(Error::LengthMismatch {
                        left: spectrum.len(),
                        right: n,
                    });
                }
                for (band, v) in bands.iter_mut().zip(spectrum) {
                    band.push(v);
                }
            }
        }
        let planes = bands
            .into_iter()
            .map(|data| Plane::new(Raster::new(width, height, data)?))
            .collect::<Result<Vec<_>>>()?;
        BandStack::new(planes, wavelengths)
    }

    /// Sets the on-disk storage description used when the stack is written.
    pub fn with_storage(mut self, dtype: Dtype, scale: f64, nodata: Option<f64>) -> Result<Self> {
        self.header.dtype = dtype;
        self.header.scale = scale;
        self.header.nodata = nodata;
        self.header.validate()?;
        Ok(self)
    }

    pub fn with_geo_tags(mut self, tags: Vec<OpaqueTag>) -> Self {
        self.geo_tags = tags;
        self
    }

    pub fn header(&self) -> &RasterHeader {
        &self.header
    }

    pub fn width(&self) -> usize {
        self.header.width
    }

    pub fn height(&self) -> usize {
        self.header.height
    }

    pub fn band_count(&self) -> usize {
        self.planes.len()
    }

    pub fn planes(&self) -> &[Plane] {
        &self.planes
    }

    pub fn plane(&self, index: usize) -> &Plane {
        &self.planes[index]
    }

    pub fn wavelengths(&self) -> &WavelengthTable {
        &self.wavelengths
    }

    pub fn geo_tags(&self) -> &[OpaqueTag] {
        &self.geo_tags
    }

    /// Stack validity on the finest grid, row-major.
    pub fn valid(&self) -> &[bool] {
        &self.valid
    }

    pub fn valid_count(&self) -> usize {
        self.valid.iter().filter(|&&v| v).count()
    }

    pub fn is_harmonized(&self) -> bool {
        self.factors.iter().all(|&k| k == 1)
    }

    pub fn band_index(&self, key: &str) -> Result<usize> {
        self.wavelengths
            .index_of(key)
            .ok_or_else(|| Error::MissingBand(key.to_string()))
    }

    /// Band values of a harmonized stack as flat row-major slices.
    pub(crate) fn band_data(&self, index: usize) -> &[f64] {
        debug_assert!(self.is_harmonized());
        self.planes[index].values.data()
    }

    pub fn pixel_signature(&self, x: usize, y: usize) -> Result<SpectralSignature> {
        if x >= self.width() || y >= self.height() {
            return Err(Error::OutOfBounds {
                x,
                y,
                width: self.width(),
                height: self.height(),
            });
        }
        if !self.valid[y * self.width() + x] {
            return Err(Error::InvalidPixel { x, y });
        }
        let values = self
            .planes
            .iter()
            .zip(&self.factors)
            .map(|(p, &k)| p.values.get(x / k, y / k).expect("grid checked"))
            .collect();
        SpectralSignature::new(self.wavelengths.keys(), values)
    }

    /// Every band multiplied by `c`.
    pub fn scaled(&self, c: f64) -> Result<Self> {
        let planes = self
            .planes
            .iter()
            .map(|p| {
                let values = p.values.map(|v| v * c);
                if p.raw_uncalibrated {
                    Plane::uncalibrated(values, p.valid.clone())
                } else {
                    Plane::with_validity(values, p.valid.clone())
                }
            })
            .collect::<Result<Vec<_>>>()?;
        let mut out = BandStack::new(planes, self.wavelengths.clone())?;
        out.header = self.header.clone();
        out.geo_tags = self.geo_tags.clone();
        Ok(out)
    }

    /// Applies `f` to the spectrum of every pixel of a harmonized stack.
    pub fn map_spectra(&self, f: impl Fn(usize, usize, &mut [f64])) -> Result<Self> {
        if !self.is_harmonized() {
            return Err(Error::NotHarmonized);
        }
        let (w, h) = (self.width(), self.height());
        let mut bands: Vec<Vec<f64>> = self.planes.iter().map(|p| p.values.data().to_vec()).collect();
        let mut spectrum = vec![0.0; bands.len()];
        for y in 0..h {
            for x in 0..w {
                let i = y * w + x;
                for (s, b) in spectrum.iter_mut().zip(&bands) {
                    *s = b[i];
                }
                f(x, y, &mut spectrum);
                for (s, b) in spectrum.iter().zip(bands.iter_mut()) {
                    b[i] = *s;
                }
            }
        }
        let planes = bands
            .into_iter()
            .zip(&self.planes)
            .map(|(data, p)| {
                let values = Raster::new(w, h, data)?;
                if p.raw_uncalibrated {
                    Plane::uncalibrated(values, p.valid.clone())
                } else {
                    Plane::with_validity(values, p.valid.clone())
                }
            })
            .collect::<Result<Vec<_>>>()?;
        let mut out = BandStack::new(planes, self.wavelengths.clone())?;
        out.header = self.header.clone();
        out.geo_tags = self.geo_tags.clone();
        Ok(out)
    }

    /// Brings every plane onto the finest grid by nearest-neighbor block
    /// replication. Idempotent.
    pub fn harmonize(&self) -> Result<Self> {
        self.harmonize_with(Resampling::Nearest)
    }

    /// [`harmonize`](Self::harmonize) with a choice of interpolation.
    /// Validity is always block-replicated.
    pub fn harmonize_with(&self, resampling: Resampling) -> Result<Self> {
        if self.is_harmonized() {
            return Ok(self.clone());
        }
        let planes = self
            .planes
            .iter()
            .zip(&self.factors)
            .map(|(p, &k)| {
                let values = match resampling {
                    Resampling::Nearest => upsample_nearest(&p.values, k)?,
                    Resampling::Bilinear => upsample_bilinear(&p.values, &p.valid, k)?,
                };
                Ok(Plane {
                    values,
                    valid: upsample_nearest(&p.valid, k)?,
                    raw_uncalibrated: p.raw_uncalibrated,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        let mut out = BandStack::new(planes, self.wavelengths.clone())?;
        out.header = self.header.clone();
        out.geo_tags = self.geo_tags.clone();
        debug_assert_eq!(out.valid, self.valid);
        Ok(out)
    }
}

/// How coarse planes are brought onto the finest grid.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Resampling {
    /// Block replication; keeps measured values. Use for band math.
    #[default]
    Nearest,
    /// Smooth interpolation for display products; invents values.
    Bilinear,
}

/// Finest grid plus the replication factor of every plane.
///
/// A plane either already covers the finest grid or is coarser by exactly
/// the ratio of its native resolution to the finest native resolution among
/// the full-size planes.
fn grid_factors(planes: &[Plane], table: &WavelengthTable) -> Result<(usize, usize, Vec<usize>)> {
    let width = planes.iter().map(Plane::width).max().unwrap_or(0);
    let height = planes.iter().map(Plane::height).max().unwrap_or(0);
    let grid_res = planes
        .iter()
        .zip(table.bands())
        .filter(|(p, _)| p.width() == width && p.height() == height)
        .map(|(_, b)| b.resolution_m)
        .min()
        .ok_or_else(|| Error::InconsistentDims(format!("no plane spans the full {width}x{height} grid")))?;
    planes
        .iter()
        .zip(table.bands())
        .map(|(p, b)| {
            if p.width() == width && p.height() == height {
                return Ok(1);
            }
            let k = width / p.width();
            let ok = width % p.width() == 0
                && p.height() * k == height
                && UPSAMPLE_FACTORS.contains(&k)
                && b.resolution_m == grid_res * k as u32;
            if ok {
                Ok(k)
            } else {
                Err(Error::InconsistentDims(format!(
                    "band '{}' ({} m) is {}x{}, which does not divide the {grid_res} m grid {width}x{height}",
                    b.key,
                    b.resolution_m,
                    p.width(),
                    p.height()
                )))
            }
        })
        .collect::<Result<Vec<_>>>()
        .map(|f| (width, height, f))
}

/// One reflectance per band, in stack order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectralSignature {
    band_ids: Vec<String>,
    values: Vec<f64>,
}

impl SpectralSignature {
    pub fn new(band_ids: Vec<String>, values: Vec<f64>) -> Result<Self> {
        if band_ids.len() != values.len() {
            return Err(Error::LengthMismatch {
                left: band_ids.len(),
                right: values.len(),
            });
        }
        if values.len() < 2 {
            return Err(Error::InvalidConfig(format!(
                "a spectral signature needs at least 2 bands, got {}",
                values.len()
            )));
        }
        if let Some(v) = values.iter().find(|v| !v.is_finite()) {
            return Err(Error::InvalidConfig(format!("non-finite signature value {v}")));
        }
        Ok(SpectralSignature { band_ids, values })
    }

    pub fn band_ids(&self) -> &[String] {
        &self.band_ids
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn value(&self, band: &str) -> Option<f64> {
        self.band_ids.iter().position(|b| b == band).map(|i| self.values[i])
    }

    /// Values for `bands`, in that order.
    pub fn subset<S: AsRef<str>>(&self, bands: &[S]) -> Result<Self> {
        let values = bands
            .iter()
            .map(|b| {
                self.value(b.as_ref())
                    .ok_or_else(|| Error::MissingBand(b.as_ref().to_string()))
            })
            .collect::<Result<Vec<_>>>()?;
        SpectralSignature::new(bands.iter().map(|b| b.as_ref().to_string()).collect(), values)
    }
}

/// Pearson product-moment correlation of two signatures.
pub fn pearson(a: &SpectralSignature, b: &SpectralSignature) -> Result<f64> {
    pearson_slices(a.values(), b.values())
}

/// True when every element equals the first.
pub fn is_constant(values: &[f64]) -> bool {
    values.iter().all(|&v| v == values[0])
}

/// Two-pass Pearson correlation, clamped to [-1, 1]. Constant inputs have
/// no correlation.
pub fn pearson_slices(a: &[f64], b: &[f64]) -> Result<f64> {
    if a.len() != b.len() {
        return Err(Error::LengthMismatch {
            left: a.len(),
            right: b.len(),
        });
    }
    if a.len() < 2 {
        return Err(Error::ZeroVariance);
    }
    if is_constant(a) || is_constant(b) {
        return Err(Error::ZeroVariance);
    }
    let n = a.len() as f64;
    let ma = a.iter().sum::<f64>() / n;
    let mb = b.iter().sum::<f64>() / n;
    let (mut sab, mut saa, mut sbb) = (0.0, 0.0, 0.0);
    for (&x, &y) in a.iter().zip(b) {
        let (dx, dy) = (x - ma, y - mb);
        sab += dx * dy;
        saa += dx * dx;
        sbb += dy * dy;
    }
    if saa == 0.0 || sbb == 0.0 {
        return Err(Error::ZeroVariance);
    }
    Ok((sab / (saa * sbb).sqrt()).clamp(-1.0, 1.0))
}

/// Correlation estimator used by the water correlation index.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Correlation {
    #[default]
    Pearson,
    /// Pearson correlation of average ranks.
    Spearman,
    /// Uncentered cosine similarity.
    Cosine,
}

impl Correlation {
    pub fn compute(self, a: &[f64], b: &[f64]) -> Result<f64> {
        match self {
            Correlation::Pearson => pearson_slices(a, b),
            Correlation::Spearman => {
                if a.len() != b.len() {
                    return Err(Error::LengthMismatch {
                        left: a.len(),
                        right: b.len(),
                    });
                }
                pearson_slices(&average_ranks(a), &average_ranks(b))
            }
            Correlation::Cosine => {
                if a.len() != b.len() {
                    return Err(Error::LengthMismatch {
                        left: a.len(),
                        right: b.len(),
                    });
                }
                let dot: f64 = a.iter().zip(b).map(|(x, y)| x * y).sum();
                let na: f64 = a.iter().map(|x| x * x).sum();
                let nb: f64 = b.iter().map(|x| x * x).sum();
                if na == 0.0 || nb == 0.0 {
                    return Err(Error::ZeroVariance);
                }
                Ok((dot / (na * nb).sqrt()).clamp(-1.0, 1.0))
            }
        }
    }
}

fn average_ranks(values: &[f64]) -> Vec<f64> {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&i, &j| values[i].total_cmp(&values[j]).then(i.cmp(&j)));
    let mut ranks = vec![0.0; values.len()];
    let mut start = 0;
    while start < order.len() {
        let mut end = start + 1;
        while end < order.len() && values[order[end]] == values[order[start]] {
            end += 1;
        }
        let rank = (start + end - 1) as f64 / 2.0 + 1.0;
        for &i in &order[start..end] {
            ranks[i] = rank;
        }
        start = end;
    }
    ranks
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum IndexKind {
    Ndvi,
    Fdi,
    Wci,
}

impl IndexKind {
    pub const ALL: [IndexKind; 3] = [IndexKind::Ndvi, IndexKind::Fdi, IndexKind::Wci];

    pub fn name(self) -> &'static str {
        match self {
            IndexKind::Ndvi => "ndvi",
            IndexKind::Fdi => "fdi",
            IndexKind::Wci => "wci",
        }
    }
}

impl std::str::FromStr for IndexKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "ndvi" => Ok(IndexKind::Ndvi),
            "fdi" => Ok(IndexKind::Fdi),
            "wci" => Ok(IndexKind::Wci),
            other => Err(Error::InvalidConfig(format!("unknown index kind '{other}'"))),
        }
    }
}

impl std::fmt::Display for IndexKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

/// Single-channel index raster. Values at invalid pixels are unspecified.
#[derive(Debug, Clone, PartialEq)]
pub struct IndexMap {
    kind: IndexKind,
    values: Raster<f64>,
    valid: Raster<bool>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IndexStats {
    pub min: Option<f64>,
    pub max: Option<f64>,
    pub mean: Option<f64>,
    pub valid_count: usize,
}

impl IndexMap {
    pub fn new(kind: IndexKind, values: Raster<f64>, valid: Raster<bool>) -> Result<Self> {
        if !values.same_grid(&valid) {
            return Err(Error::GridMismatch("index values and mask differ in size".into()));
        }
        Ok(IndexMap { kind, values, valid })
    }

    pub fn kind(&self) -> IndexKind {
        self.kind
    }

    pub fn width(&self) -> usize {
        self.values.width()
    }

    pub fn height(&self) -> usize {
        self.values.height()
    }

    pub fn values(&self) -> &Raster<f64> {
        &self.values
    }

    pub fn valid(&self) -> &Raster<bool> {
        &self.valid
    }

    pub fn get(&self, x: usize, y: usize) -> Option<f64> {
        match self.valid.get(x, y) {
            Some(true) => self.values.get(x, y),
            _ => None,
        }
    }

    /// Value at flat index `i`, or `None` if invalid.
    pub fn at(&self, i: usize) -> Option<f64> {
        if self.valid.data()[i] {
            Some(self.values.data()[i])
        } else {
            None
        }
    }

    pub fn same_grid(&self, other: &IndexMap) -> bool {
        self.values.same_grid(&other.values)
    }

    pub fn valid_values(&self) -> impl Iterator<Item = f64> + '_ {
        self.values
            .data()
            .iter()
            .zip(self.valid.data())
            .filter(|(_, &ok)| ok)
            .map(|(&v, _)| v)
    }

    pub fn valid_count(&self) -> usize {
        self.valid.data().iter().filter(|&&v| v).count()
    }

    pub fn stats(&self) -> IndexStats {
        let mut count = 0usize;
        let mut sum = 0.0;
        let mut min = f64::INFINITY;
        let mut max = f64::NEG_INFINITY;
        for v in self.valid_values() {
            count += 1;
            sum += v;
            min = min.min(v);
            max = max.max(v);
        }
        if count == 0 {
            return IndexStats {
                min: None,
                max: None,
                mean: None,
                valid_count: 0,
            };
        }
        IndexStats {
            min: Some(min),
            max: Some(max),
            mean: Some(sum / count as f64),
            valid_count: count,
        }
    }
}

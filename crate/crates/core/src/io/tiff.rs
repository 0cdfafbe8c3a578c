//! Baseline GeoTIFF subset: classic (32-bit offset) TIFF, 1..=16 samples per
//! pixel, `uint8`/`uint16`/`float32`, uncompressed or Deflate, striped or
//! tiled, chunky or planar. Only the first IFD is read, so overviews are
//! ignored.
//!
//! Reflectance scale, nodata and per-band metadata travel in the GDAL
//! metadata (42112) and nodata (42113) tags. GeoTIFF keys are kept opaque.

use std::collections::BTreeMap;
use std::io::{Read, Write};
use std::path::Path;

use flate2::read::ZlibDecoder;
use flate2::write::ZlibEncoder;

use super::{BandMeta, RawRaster};
use crate::error::{Error, Result};
use crate::raster::{Dtype, OpaqueTag, RasterHeader, TagValue};

const IMAGE_WIDTH: u16 = 256;
const IMAGE_LENGTH: u16 = 257;
const BITS_PER_SAMPLE: u16 = 258;
const COMPRESSION: u16 = 259;
const PHOTOMETRIC: u16 = 262;
const STRIP_OFFSETS: u16 = 273;
const SAMPLES_PER_PIXEL: u16 = 277;
const ROWS_PER_STRIP: u16 = 278;
const STRIP_BYTE_COUNTS: u16 = 279;
const PLANAR_CONFIGURATION: u16 = 284;
const PREDICTOR: u16 = 317;
const TILE_WIDTH: u16 = 322;
const TILE_LENGTH: u16 = 323;
const TILE_OFFSETS: u16 = 324;
const TILE_BYTE_COUNTS: u16 = 325;
const EXTRA_SAMPLES: u16 = 338;
const SAMPLE_FORMAT: u16 = 339;
const GDAL_METADATA: u16 = 42112;
const GDAL_NODATA: u16 = 42113;

/// Geo-referencing tags preserved verbatim: ModelPixelScale, ModelTiepoint,
/// ModelTransformation, GeoKeyDirectory, GeoDoubleParams, GeoAsciiParams.
pub const GEO_TAGS: [u16; 6] = [33550, 33922, 34264, 34735, 34736, 34737];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Compression {
    None,
    Deflate,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Layout {
    Strips {
        rows_per_strip: usize,
    },
    /// Tile sides must be multiples of 16.
    Tiles {
        width: usize,
        height: usize,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Planar {
    /// Samples of one pixel stored together.
    Chunky,
    /// One plane per band.
    Separate,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct WriteOptions {
    pub layout: Layout,
    pub planar: Planar,
    pub compression: Compression,
}

impl Default for WriteOptions {
    fn default() -> Self {
        WriteOptions {
            layout: Layout::Strips { rows_per_strip: 16 },
            planar: Planar::Chunky,
            compression: Compression::None,
        }
    }
}

struct Bytes<'a> {
    data: &'a [u8],
    big_endian: bool,
}

impl Bytes<'_> {
    fn slice(&self, offset: usize, len: usize) -> Result<&[u8]> {
        offset
            .checked_add(len)
            .and_then(|end| self.data.get(offset..end))
            .ok_or_else(|| {
                Error::CorruptFile(format!(
                    "range {offset}..{} beyond end of file ({} bytes)",
                    offset.saturating_add(len),
                    self.data.len()
                ))
            })
    }

    fn u16(&self, offset: usize) -> Result<u16> {
        let b: [u8; 2] = self.slice(offset, 2)?.try_into().expect("len 2");
        Ok(if self.big_endian {
            u16::from_be_bytes(b)
        } else {
            u16::from_le_bytes(b)
        })
    }

    fn u32(&self, offset: usize) -> Result<u32> {
        let b: [u8; 4] = self.slice(offset, 4)?.try_into().expect("len 4");
        Ok(if self.big_endian {
            u32::from_be_bytes(b)
        } else {
            u32::from_le_bytes(b)
        })
    }

    fn value(&self, typ: u16, count: usize, raw: &[u8]) -> Option<TagValue> {
        let be = self.big_endian;
        let u16s = |c: &[u8]| {
            let b = [c[0], c[1]];
            if be {
                u16::from_be_bytes(b)
            } else {
                u16::from_le_bytes(b)
            }
        };
        let u32s = |c: &[u8]| {
            let b = [c[0], c[1], c[2], c[3]];
            if be {
                u32::from_be_bytes(b)
            } else {
                u32::from_le_bytes(b)
            }
        };
        let u64s = |c: &[u8]| {
            let b: [u8; 8] = c[..8].try_into().expect("len 8");
            if be {
                u64::from_be_bytes(b)
            } else {
                u64::from_le_bytes(b)
            }
        };
        let raw = &raw[..count * type_size(typ)?];
        Some(match typ {
            1 => TagValue::Byte(raw.to_vec()),
            2 => TagValue::Ascii(raw.to_vec()),
            3 => TagValue::Short(raw.chunks_exact(2).map(u16s).collect()),
            4 => TagValue::Long(raw.chunks_exact(4).map(u32s).collect()),
            5 => TagValue::Rational(raw.chunks_exact(8).map(|c| (u32s(&c[..4]), u32s(&c[4..]))).collect()),
            6 => TagValue::SByte(raw.iter().map(|&b| b as i8).collect()),
            7 => TagValue::Undefined(raw.to_vec()),
            8 => TagValue::SShort(raw.chunks_exact(2).map(|c| u16s(c) as i16).collect()),
            9 => TagValue::SLong(raw.chunks_exact(4).map(|c| u32s(c) as i32).collect()),
            10 => TagValue::SRational(
                raw.chunks_exact(8)
                    .map(|c| (u32s(&c[..4]) as i32, u32s(&c[4..]) as i32))
                    .collect(),
            ),
            11 => TagValue::Float(raw.chunks_exact(4).map(|c| f32::from_bits(u32s(c))).collect()),
            12 => TagValue::Double(raw.chunks_exact(8).map(|c| f64::from_bits(u64s(c))).collect()),
            _ => return None,
        })
    }
}

fn type_size(typ: u16) -> Option<usize> {
    match typ {
        1 | 2 | 6 | 7 => Some(1),
        3 | 8 => Some(2),
        4 | 9 | 11 => Some(4),
        5 | 10 | 12 => Some(8),
        _ => None,
    }
}

fn type_code(v: &TagValue) -> u16 {
    match v {
        TagValue::Byte(_) => 1,
        TagValue::Ascii(_) => 2,
        TagValue::Short(_) => 3,
        TagValue::Long(_) => 4,
        TagValue::Rational(_) => 5,
        TagValue::SByte(_) => 6,
        TagValue::Undefined(_) => 7,
        TagValue::SShort(_) => 8,
        TagValue::SLong(_) => 9,
        TagValue::SRational(_) => 10,
        TagValue::Float(_) => 11,
        TagValue::Double(_) => 12,
    }
}

fn encode_value(v: &TagValue) -> Vec<u8> {
    let mut out = Vec::new();
    match v {
        TagValue::Byte(b) | TagValue::Ascii(b) | TagValue::Undefined(b) => out.extend_from_slice(b),
        TagValue::SByte(b) => out.extend(b.iter().map(|&x| x as u8)),
        TagValue::Short(s) => s.iter().for_each(|x| out.extend_from_slice(&x.to_le_bytes())),
        TagValue::SShort(s) => s.iter().for_each(|x| out.extend_from_slice(&x.to_le_bytes())),
        TagValue::Long(s) => s.iter().for_each(|x| out.extend_from_slice(&x.to_le_bytes())),
        TagValue::SLong(s) => s.iter().for_each(|x| out.extend_from_slice(&x.to_le_bytes())),
        TagValue::Rational(s) => s.iter().for_each(|(n, d)| {
            out.extend_from_slice(&n.to_le_bytes());
            out.extend_from_slice(&d.to_le_bytes());
        }),
        TagValue::SRational(s) => s.iter().for_each(|(n, d)| {
            out.extend_from_slice(&n.to_le_bytes());
            out.extend_from_slice(&d.to_le_bytes());
        }),
        TagValue::Float(s) => s.iter().for_each(|x| out.extend_from_slice(&x.to_le_bytes())),
        TagValue::Double(s) => s.iter().for_each(|x| out.extend_from_slice(&x.to_le_bytes())),
    }
    out
}

type Tags = BTreeMap<u16, TagValue>;

fn read_ifd(bytes: &Bytes, offset: usize) -> Result<Tags> {
    let count = bytes.u16(offset)? as usize;
    let mut tags = Tags::new();
    for i in 0..count {
        let entry = offset + 2 + i * 12;
        let code = bytes.u16(entry)?;
        let typ = bytes.u16(entry + 2)?;
        let n = bytes.u32(entry + 4)? as usize;
        // unknown field types are skipped, as baseline readers must
        let Some(size) = type_size(typ) else { continue };
        let len = n
            .checked_mul(size)
            .ok_or_else(|| Error::CorruptFile(format!("tag {code} count overflows")))?;
        let raw = if len <= 4 {
            bytes.slice(entry + 8, 4)?
        } else {
            bytes.slice(bytes.u32(entry + 8)? as usize, len)?
        };
        if let Some(v) = bytes.value(typ, n, raw) {
            tags.insert(code, v);
        }
    }
    Ok(tags)
}

fn tag_u64s(tags: &Tags, code: u16, name: &str) -> Result<Option<Vec<u64>>> {
    match tags.get(&code) {
        None => Ok(None),
        Some(v) => v
            .as_u64s()
            .map(Some)
            .ok_or_else(|| Error::CorruptFile(format!("{name} (tag {code}) has a non-integer type"))),
    }
}

fn tag_scalar(tags: &Tags, code: u16, name: &str) -> Result<Option<u64>> {
    Ok(tag_u64s(tags, code, name)?.and_then(|v| v.first().copied()))
}

fn required(tags: &Tags, code: u16, name: &str) -> Result<Vec<u64>> {
    tag_u64s(tags, code, name)?.ok_or_else(|| Error::CorruptFile(format!("missing {name} (tag {code})")))
}

/// Per-sample list that may be given once for all samples.
fn per_sample(values: Vec<u64>, spp: usize, code: u16, name: &str) -> Result<Vec<u64>> {
    match values.len() {
        n if n == spp => Ok(values),
        1 => Ok(vec![values[0]; spp]),
        n => Err(Error::CorruptFile(format!(
            "{name} (tag {code}) has {n} entries for {spp} samples"
        ))),
    }
}

fn resolve_dtype(bits: &[u64], formats: &[u64]) -> Result<Dtype> {
    if bits.windows(2).any(|w| w[0] != w[1]) {
        return Err(Error::DtypeMismatch(format!(
            "BitsPerSample (tag 258) differs between samples: {bits:?}"
        )));
    }
    if formats.windows(2).any(|w| w[0] != w[1]) {
        return Err(Error::DtypeMismatch(format!(
            "SampleFormat (tag 339) differs between samples: {formats:?}"
        )));
    }
    match (bits[0], formats[0]) {
        (8, 1) => Ok(Dtype::Uint8),
        (16, 1) => Ok(Dtype::Uint16),
        (32, 3) => Ok(Dtype::Float32),
        (b, 3) => Err(Error::DtypeMismatch(format!(
            "SampleFormat (tag 339) declares IEEE float but BitsPerSample (tag 258) is {b}"
        ))),
        (b, 1) => Err(Error::UnsupportedTiffFeature(format!(
            "BitsPerSample={b} (tag 258) for unsigned integers"
        ))),
        (_, f) => Err(Error::UnsupportedTiffFeature(format!("SampleFormat={f} (tag 339)"))),
    }
}

fn compression_of(code: u64) -> Result<Compression> {
    match code {
        1 => Ok(Compression::None),
        8 | 32946 => Ok(Compression::Deflate),
        other => {
            let name = match other {
                2 => "CCITT RLE",
                5 => "LZW",
                6 | 7 => "JPEG",
                32773 => "PackBits",
                34925 => "LZMA",
                50000 => "ZSTD",
                50001 => "WebP",
                _ => "unknown",
            };
            Err(Error::UnsupportedTiffFeature(format!(
                "Compression={other} ({name}) (tag 259)"
            )))
        }
    }
}

fn decode_chunk(bytes: &Bytes, offset: u64, count: u64, compression: Compression, expected: usize) -> Result<Vec<u8>> {
    let raw = bytes.slice(offset as usize, count as usize)?;
    let mut out = match compression {
        Compression::None => raw.to_vec(),
        Compression::Deflate => {
            let mut out = Vec::with_capacity(expected);
            ZlibDecoder::new(raw)
                .read_to_end(&mut out)
                .map_err(|e| Error::CorruptFile(format!("Deflate stream: {e}")))?;
            out
        }
    };
    if out.len() < expected {
        return Err(Error::CorruptFile(format!(
            "chunk at offset {offset} holds {} bytes, expected {expected}",
            out.len()
        )));
    }
    out.truncate(expected);
    Ok(out)
}

fn decode_samples(raw: &[u8], dtype: Dtype, big_endian: bool) -> Vec<f64> {
    match dtype {
        Dtype::Uint8 => raw.iter().map(|&b| b as f64).collect(),
        Dtype::Uint16 => raw
            .chunks_exact(2)
            .map(|c| {
                let b = [c[0], c[1]];
                (if big_endian {
                    u16::from_be_bytes(b)
                } else {
                    u16::from_le_bytes(b)
                }) as f64
            })
            .collect(),
        Dtype::Float32 => raw
            .chunks_exact(4)
            .map(|c| {
                let b = [c[0], c[1], c[2], c[3]];
                (if big_endian {
                    f32::from_be_bytes(b)
                } else {
                    f32::from_le_bytes(b)
                }) as f64
            })
            .collect(),
    }
}

pub(crate) fn encode_samples(values: impl Iterator<Item = f64>, dtype: Dtype, out: &mut Vec<u8>) {
    match dtype {
        Dtype::Uint8 => out.extend(values.map(|v| v as u8)),
        Dtype::Uint16 => values.for_each(|v| out.extend_from_slice(&(v as u16).to_le_bytes())),
        Dtype::Float32 => values.for_each(|v| out.extend_from_slice(&(v as f32).to_le_bytes())),
    }
}

/// Decodes the first image of a TIFF file held in memory.
pub fn decode(data: &[u8], expect_dtype: Option<Dtype>) -> Result<RawRaster> {
    if data.len() < 8 {
        return Err(Error::CorruptFile("shorter than a TIFF header".into()));
    }
    let big_endian = match &data[..2] {
        b"II" => false,
        b"MM" => true,
        _ => return Err(Error::CorruptFile("missing TIFF byte-order mark".into())),
    };
    let bytes = Bytes { data, big_endian };
    match bytes.u16(2)? {
        42 => {}
        43 => return Err(Error::UnsupportedTiffFeature("BigTIFF (version 43)".into())),
        v => return Err(Error::CorruptFile(format!("TIFF version {v}"))),
    }
    let tags = read_ifd(&bytes, bytes.u32(4)? as usize)?;

    let width = required(&tags, IMAGE_WIDTH, "ImageWidth")?[0] as usize;
    let height = required(&tags, IMAGE_LENGTH, "ImageLength")?[0] as usize;
    let spp = tag_scalar(&tags, SAMPLES_PER_PIXEL, "SamplesPerPixel")?.unwrap_or(1) as usize;
    if !(1..=16).contains(&spp) {
        return Err(Error::UnsupportedTiffFeature(format!(
            "SamplesPerPixel={spp} (tag 277)"
        )));
    }
    let bits = per_sample(
        tag_u64s(&tags, BITS_PER_SAMPLE, "BitsPerSample")?.unwrap_or_else(|| vec![1]),
        spp,
        BITS_PER_SAMPLE,
        "BitsPerSample",
    )?;
    let formats = per_sample(
        tag_u64s(&tags, SAMPLE_FORMAT, "SampleFormat")?.unwrap_or_else(|| vec![1]),
        spp,
        SAMPLE_FORMAT,
        "SampleFormat",
    )?;
    let dtype = resolve_dtype(&bits, &formats)?;
    if let Some(want) = expect_dtype {
        if want != dtype {
            return Err(Error::DtypeMismatch(format!(
                "file declares {dtype}, caller expects {want}"
            )));
        }
    }
    let compression = compression_of(tag_scalar(&tags, COMPRESSION, "Compression")?.unwrap_or(1))?;
    match tag_scalar(&tags, PREDICTOR, "Predictor")?.unwrap_or(1) {
        1 => {}
        p => return Err(Error::UnsupportedTiffFeature(format!("Predictor={p} (tag 317)"))),
    }
    let planar = match tag_scalar(&tags, PLANAR_CONFIGURATION, "PlanarConfiguration")?.unwrap_or(1) {
        1 => Planar::Chunky,
        2 => Planar::Separate,
        p => return Err(Error::CorruptFile(format!("PlanarConfiguration={p} (tag 284)"))),
    };

    let mut header = RasterHeader::new(width, height, spp, dtype);
    header.validate()?;
    let size = dtype.size();
    let samples_per_chunk_pixel = if planar == Planar::Chunky { spp } else { 1 };
    let planes_in_file = if planar == Planar::Chunky { 1 } else { spp };
    let mut bands = vec![vec![0.0; width * height]; spp];

    // place one decoded chunk covering columns x0.., rows y0.. of a chunk
    // `cw` pixels wide into the output bands
    let mut place = |samples: &[f64], plane: usize, x0: usize, y0: usize, cw: usize, ch: usize| {
        for row in 0..ch {
            let y = y0 + row;
            if y >= height {
                break;
            }
            for col in 0..cw {
                let x = x0 + col;
                if x >= width {
                    break;
                }
                let base = (row * cw + col) * samples_per_chunk_pixel;
                if planar == Planar::Chunky {
                    for (s, band) in bands.iter_mut().enumerate() {
                        band[y * width + x] = samples[base + s];
                    }
                } else {
                    bands[plane][y * width + x] = samples[base];
                }
            }
        }
    };

    if tags.contains_key(&TILE_WIDTH) {
        let tw = required(&tags, TILE_WIDTH, "TileWidth")?[0] as usize;
        let th = required(&tags, TILE_LENGTH, "TileLength")?[0] as usize;
        if tw == 0 || th == 0 {
            return Err(Error::CorruptFile("zero tile size".into()));
        }
        let offsets = required(&tags, TILE_OFFSETS, "TileOffsets")?;
        let counts = required(&tags, TILE_BYTE_COUNTS, "TileByteCounts")?;
        let across = width.div_ceil(tw);
        let down = height.div_ceil(th);
        let expected_tiles = across * down * planes_in_file;
        if offsets.len() < expected_tiles || counts.len() < expected_tiles {
            return Err(Error::CorruptFile(format!(
                "{} tile offsets for {expected_tiles} tiles",
                offsets.len().min(counts.len())
            )));
        }
        let chunk_len = tw * th * samples_per_chunk_pixel * size;
        for plane in 0..planes_in_file {
            for ty in 0..down {
                for tx in 0..across {
                    let t = plane * across * down + ty * across + tx;
                    let raw = decode_chunk(&bytes, offsets[t], counts[t], compression, chunk_len)?;
                    let samples = decode_samples(&raw, dtype, big_endian);
                    place(&samples, plane, tx * tw, ty * th, tw, th);
                }
            }
        }
    } else {
        let offsets = required(&tags, STRIP_OFFSETS, "StripOffsets")?;
        let counts = required(&tags, STRIP_BYTE_COUNTS, "StripByteCounts")?;
        let rps =
            (tag_scalar(&tags, ROWS_PER_STRIP, "RowsPerStrip")?.unwrap_or(u32::MAX as u64) as usize).clamp(1, height);
        let strips = height.div_ceil(rps);
        let expected_strips = strips * planes_in_file;
        if offsets.len() < expected_strips || counts.len() < expected_strips {
            return Err(Error::CorruptFile(format!(
                "{} strip offsets for {expected_strips} strips",
                offsets.len().min(counts.len())
            )));
        }
        for plane in 0..planes_in_file {
            for s in 0..strips {
                let rows = rps.min(height - s * rps);
                let chunk_len = rows * width * samples_per_chunk_pixel * size;
                let t = plane * strips + s;
                let raw = decode_chunk(&bytes, offsets[t], counts[t], compression, chunk_len)?;
                let samples = decode_samples(&raw, dtype, big_endian);
                place(&samples, plane, 0, s * rps, width, rows);
            }
        }
    }

    let mut band_meta = vec![BandMeta::default(); spp];
    let mut scale = None;
    if let Some(xml) = tags.get(&GDAL_METADATA).and_then(TagValue::as_text) {
        for item in parse_gdal_metadata(&xml) {
            let Some(sample) = item.sample.filter(|&s| s < spp) else {
                continue;
            };
            let meta = &mut band_meta[sample];
            match (item.name.as_str(), item.role.as_deref()) {
                (_, Some("scale")) => {
                    let v: f64 = item
                        .value
                        .trim()
                        .parse()
                        .map_err(|_| Error::CorruptFile(format!("bad scale '{}' in GDAL metadata", item.value)))?;
                    match scale {
                        Some(s) if s != v => {
                            return Err(Error::UnsupportedTiffFeature(
                                "per-band scale factors (tag 42112)".into(),
                            ))
                        }
                        _ => scale = Some(v),
                    }
                }
                (_, Some("description")) => meta.descriptor = Some(item.value),
                ("BAND_KEY", _) => meta.key = Some(item.value),
                ("WAVELENGTH_NM", _) => meta.wavelength_nm = item.value.trim().parse().ok(),
                ("RESOLUTION_M", _) => meta.resolution_m = item.value.trim().parse().ok(),
                _ => {}
            }
        }
    }
    header.scale = scale.unwrap_or_else(|| dtype.default_scale());
    if let Some(text) = tags.get(&GDAL_NODATA).and_then(TagValue::as_text) {
        header.nodata = Some(parse_nodata(&text)?);
    }
    header.validate()?;

    let geo_tags = GEO_TAGS
        .iter()
        .filter_map(|&code| tags.get(&code).map(|v| OpaqueTag { code, value: v.clone() }))
        .collect();

    Ok(RawRaster {
        header,
        bands,
        band_meta,
        geo_tags,
    })
}

fn parse_nodata(text: &str) -> Result<f64> {
    let t = text.trim();
    match t.to_ascii_lowercase().as_str() {
        "nan" | "-nan" => Ok(f64::NAN),
        "inf" | "+inf" => Ok(f64::INFINITY),
        "-inf" => Ok(f64::NEG_INFINITY),
        _ => t
            .parse()
            .map_err(|_| Error::CorruptFile(format!("GDAL_NODATA (tag 42113) '{t}'"))),
    }
}

fn format_f64(v: f64) -> String {
    if v.is_nan() {
        "nan".into()
    } else {
        format!("{v}")
    }
}

#[derive(Debug, Clone, PartialEq)]
struct MetadataItem {
    name: String,
    sample: Option<usize>,
    role: Option<String>,
    value: String,
}

fn xml_escape(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
        .replace('"', "&quot;")
}

fn xml_unescape(s: &str) -> String {
    s.replace("&lt;", "<")
        .replace("&gt;", ">")
        .replace("&quot;", "\"")
        .replace("&apos;", "'")
        .replace("&amp;", "&")
}

fn parse_gdal_metadata(xml: &str) -> Vec<MetadataItem> {
    let mut items = Vec::new();
    let mut rest = xml;
    while let Some(start) = rest.find("<Item") {
        rest = &rest[start + 5..];
        let Some(tag_end) = rest.find('>') else { break };
        let attrs = &rest[..tag_end];
        rest = &rest[tag_end + 1..];
        let Some(close) = rest.find("</Item>") else { break };
        let value = xml_unescape(&rest[..close]);
        rest = &rest[close + 7..];

        let attr = |key: &str| -> Option<String> {
            let pat = format!("{key}=\"");
            let i = attrs.find(&pat)? + pat.len();
            let j = attrs[i..].find('"')?;
            Some(xml_unescape(&attrs[i..i + j]))
        };
        let Some(name) = attr("name") else { continue };
        items.push(MetadataItem {
            name,
            sample: attr("sample").and_then(|s| s.parse().ok()),
            role: attr("role"),
            value,
        });
    }
    items
}

fn gdal_metadata_xml(raw: &RawRaster) -> String {
    let mut xml = String::from("<GDALMetadata>\n");
    let mut item = |name: &str, sample: usize, role: Option<&str>, value: &str| {
        let role = role.map(|r| format!(" role=\"{r}\"")).unwrap_or_default();
        xml.push_str(&format!(
            "  <Item name=\"{name}\" sample=\"{sample}\"{role}>{}</Item>\n",
            xml_escape(value)
        ));
    };
    for (i, meta) in raw.band_meta.iter().enumerate() {
        item("SCALE", i, Some("scale"), &format_f64(raw.header.scale));
        if let Some(k) = &meta.key {
            item("BAND_KEY", i, None, k);
        }
        if let Some(d) = &meta.descriptor {
            item("DESCRIPTION", i, Some("description"), d);
        }
        if let Some(w) = meta.wavelength_nm {
            item("WAVELENGTH_NM", i, None, &format_f64(w));
        }
        if let Some(r) = meta.resolution_m {
            item("RESOLUTION_M", i, None, &r.to_string());
        }
    }
    xml.push_str("</GDALMetadata>");
    xml
}

fn ascii(s: &str) -> TagValue {
    let mut b = s.as_bytes().to_vec();
    b.push(0);
    TagValue::Ascii(b)
}

/// Encodes a raster as a little-endian classic TIFF.
pub fn encode(raw: &RawRaster, opts: &WriteOptions) -> Result<Vec<u8>> {
    raw.validate()?;
    let h = &raw.header;
    let (width, height, spp, dtype) = (h.width, h.height, h.band_count, h.dtype);
    if spp > 16 {
        return Err(Error::UnsupportedTiffFeature(format!(
            "SamplesPerPixel={spp} (tag 277)"
        )));
    }

    // (x0, y0, chunk width, chunk height) of every chunk in one plane
    let regions: Vec<(usize, usize, usize, usize)> = match opts.layout {
        Layout::Strips { rows_per_strip } => {
            let rps = rows_per_strip.clamp(1, height);
            (0..height.div_ceil(rps))
                .map(|s| (0, s * rps, width, rps.min(height - s * rps)))
                .collect()
        }
        Layout::Tiles { width: tw, height: th } => {
            if tw == 0 || th == 0 || tw % 16 != 0 || th % 16 != 0 {
                return Err(Error::InvalidConfig(format!(
                    "tile size {tw}x{th} must be a positive multiple of 16"
                )));
            }
            let mut r = Vec::new();
            for ty in 0..height.div_ceil(th) {
                for tx in 0..width.div_ceil(tw) {
                    r.push((tx * tw, ty * th, tw, th));
                }
            }
            r
        }
    };
    let plane_sets: Vec<Vec<usize>> = match opts.planar {
        Planar::Chunky => vec![(0..spp).collect()],
        Planar::Separate => (0..spp).map(|b| vec![b]).collect(),
    };

    let mut file = vec![0u8; 8];
    file[..4].copy_from_slice(&[b'I', b'I', 42, 0]);
    let mut offsets = Vec::new();
    let mut counts = Vec::new();
    for set in &plane_sets {
        for &(x0, y0, cw, ch) in &regions {
            let mut chunk = Vec::with_capacity(cw * ch * set.len() * dtype.size());
            let samples = (0..ch).flat_map(|row| {
                (0..cw).flat_map(move |col| {
                    set.iter().map(move |&b| {
                        let (x, y) = (x0 + col, y0 + row);
                        if x < width && y < height {
                            raw.bands[b][y * width + x]
                        } else {
                            0.0
                        }
                    })
                })
            });
            encode_samples(samples, dtype, &mut chunk);
            if opts.compression == Compression::Deflate {
                let mut enc = ZlibEncoder::new(Vec::new(), flate2::Compression::default());
                enc.write_all(&chunk).expect("in-memory write");
                chunk = enc.finish().expect("in-memory write");
            }
            if file.len() % 2 == 1 {
                file.push(0);
            }
            offsets.push(
                u32::try_from(file.len())
                    .map_err(|_| Error::UnsupportedTiffFeature("files over 4 GiB (BigTIFF)".into()))?,
            );
            counts.push(chunk.len() as u32);
            file.extend_from_slice(&chunk);
        }
    }

    let mut tags = Tags::new();
    tags.insert(IMAGE_WIDTH, TagValue::Long(vec![width as u32]));
    tags.insert(IMAGE_LENGTH, TagValue::Long(vec![height as u32]));
    tags.insert(BITS_PER_SAMPLE, TagValue::Short(vec![(dtype.size() * 8) as u16; spp]));
    tags.insert(
        COMPRESSION,
        TagValue::Short(vec![match opts.compression {
            Compression::None => 1,
            Compression::Deflate => 8,
        }]),
    );
    tags.insert(PHOTOMETRIC, TagValue::Short(vec![1]));
    tags.insert(SAMPLES_PER_PIXEL, TagValue::Short(vec![spp as u16]));
    tags.insert(
        PLANAR_CONFIGURATION,
        TagValue::Short(vec![match opts.planar {
            Planar::Chunky => 1,
            Planar::Separate => 2,
        }]),
    );
    if spp > 1 {
        tags.insert(EXTRA_SAMPLES, TagValue::Short(vec![0; spp - 1]));
    }
    tags.insert(
        SAMPLE_FORMAT,
        TagValue::Short(vec![if dtype == Dtype::Float32 { 3 } else { 1 }; spp]),
    );
    match opts.layout {
        Layout::Strips { rows_per_strip } => {
            tags.insert(
                ROWS_PER_STRIP,
                TagValue::Long(vec![rows_per_strip.clamp(1, height) as u32]),
            );
            tags.insert(STRIP_OFFSETS, TagValue::Long(offsets));
            tags.insert(STRIP_BYTE_COUNTS, TagValue::Long(counts));
        }
        Layout::Tiles { width: tw, height: th } => {
            tags.insert(TILE_WIDTH, TagValue::Long(vec![tw as u32]));
            tags.insert(TILE_LENGTH, TagValue::Long(vec![th as u32]));
            tags.insert(TILE_OFFSETS, TagValue::Long(offsets));
            tags.insert(TILE_BYTE_COUNTS, TagValue::Long(counts));
        }
    }
    tags.insert(GDAL_METADATA, ascii(&gdal_metadata_xml(raw)));
    if let Some(nd) = h.nodata {
        tags.insert(GDAL_NODATA, ascii(&format_f64(nd)));
    }
    for t in &raw.geo_tags {
        tags.entry(t.code).or_insert_with(|| t.value.clone());
    }

    if file.len() % 2 == 1 {
        file.push(0);
    }
    let ifd_offset = file.len();
    file[4..8].copy_from_slice(&(ifd_offset as u32).to_le_bytes());
    let mut extra = ifd_offset + 2 + tags.len() * 12 + 4;
    let mut entries = Vec::with_capacity(tags.len() * 12);
    let mut overflow = Vec::new();
    for (&code, value) in &tags {
        let data = encode_value(value);
        entries.extend_from_slice(&code.to_le_bytes());
        entries.extend_from_slice(&type_code(value).to_le_bytes());
        entries.extend_from_slice(&(value.count() as u32).to_le_bytes());
        if data.len() <= 4 {
            let mut inline = [0u8; 4];
            inline[..data.len()].copy_from_slice(&data);
            entries.extend_from_slice(&inline);
        } else {
            entries.extend_from_slice(&(extra as u32).to_le_bytes());
            overflow.extend_from_slice(&data);
            extra += data.len();
            if extra % 2 == 1 {
                overflow.push(0);
                extra += 1;
            }
        }
    }
    file.extend_from_slice(&(tags.len() as u16).to_le_bytes());
    file.extend_from_slice(&entries);
    file.extend_from_slice(&0u32.to_le_bytes());
    file.extend_from_slice(&overflow);
    Ok(file)
}

pub fn read_raw(path: &Path, expect_dtype: Option<Dtype>) -> Result<RawRaster> {
    let data = std::fs::read(path).map_err(|e| Error::io(path, e))?;
    decode(&data, expect_dtype)
}

pub fn write_raw(raw: &RawRaster, path: &Path, opts: &WriteOptions) -> Result<()> {
    let bytes = encode(raw, opts)?;
    std::fs::write(path, bytes).map_err(|e| Error::io(path, e))
}

//! BSF: a minimal band-sequential fixture format.
//!
//! ```text
//! offset  size  field
//!      0     4  magic "BSF1"
//!      4     4  width        (u32 LE)
//!      8     4  height       (u32 LE)
//!     12     4  band_count   (u32 LE)
//!     16     4  dtype code   (u32 LE: 1 uint8, 2 uint16, 3 float32)
//!     20     8  scale        (f64 LE)
//!     28     8  nodata       (f64 LE, NaN = none)
//!     36    28  reserved, zero
//!     64     .  payload, band-sequential, row-major, little-endian
//!      .     .  band_count center wavelengths in nm (f64 LE)
//! ```

use std::path::Path;

use super::tiff::encode_samples;
use super::{BandMeta, RawRaster};
use crate::error::{Error, Result};
use crate::raster::{Dtype, RasterHeader};

pub const MAGIC: [u8; 4] = *b"BSF1";
pub const HEADER_LEN: usize = 64;

pub fn encode(raw: &RawRaster) -> Result<Vec<u8>> {
    raw.validate()?;
    let h = &raw.header;
    let mut out = Vec::with_capacity(HEADER_LEN + h.payload_len() + h.band_count * 8);
    out.extend_from_slice(&MAGIC);
    for v in [h.width, h.height, h.band_count] {
        let v = u32::try_from(v).map_err(|_| Error::InvalidHeader(format!("dimension {v} exceeds u32")))?;
        out.extend_from_slice(&v.to_le_bytes());
    }
    out.extend_from_slice(&h.dtype.code().to_le_bytes());
    out.extend_from_slice(&h.scale.to_le_bytes());
    out.extend_from_slice(&h.nodata.unwrap_or(f64::NAN).to_le_bytes());
    out.resize(HEADER_LEN, 0);
    for band in &raw.bands {
        encode_samples(band.iter().copied(), h.dtype, &mut out);
    }
    for meta in &raw.band_meta {
        out.extend_from_slice(&meta.wavelength_nm.unwrap_or(0.0).to_le_bytes());
    }
    Ok(out)
}

pub fn decode(data: &[u8]) -> Result<RawRaster> {
    if data.len() < 4 {
        return Err(Error::TruncatedPayload {
            expected: HEADER_LEN,
            found: data.len(),
        });
    }
    let magic: [u8; 4] = data[..4].try_into().expect("len 4");
    if magic != MAGIC {
        return Err(Error::BadMagic(magic));
    }
    if data.len() < HEADER_LEN {
        return Err(Error::TruncatedPayload {
            expected: HEADER_LEN,
            found: data.len(),
        });
    }
    let u32_at = |o: usize| u32::from_le_bytes(data[o..o + 4].try_into().expect("len 4"));
    let f64_at = |o: usize| f64::from_le_bytes(data[o..o + 8].try_into().expect("len 8"));
    let dtype = Dtype::from_code(u32_at(16))
        .ok_or_else(|| Error::CorruptFile(format!("unknown BSF dtype code {}", u32_at(16))))?;
    let nodata = f64_at(28);
    let header = RasterHeader {
        width: u32_at(4) as usize,
        height: u32_at(8) as usize,
        band_count: u32_at(12) as usize,
        dtype,
        scale: f64_at(20),
        nodata: (!nodata.is_nan()).then_some(nodata),
    };
    header.validate()?;

    let payload = header.payload_len();
    let expected = HEADER_LEN + payload + header.band_count * 8;
    if data.len() < expected {
        return Err(Error::TruncatedPayload {
            expected,
            found: data.len(),
        });
    }
    if data.len() > expected {
        return Err(Error::CorruptFile(format!(
            "{} trailing bytes after the wavelength table",
            data.len() - expected
        )));
    }
    let band_bytes = header.pixel_count() * dtype.size();
    let bands = (0..header.band_count)
        .map(|b| {
            let raw = &data[HEADER_LEN + b * band_bytes..][..band_bytes];
            match dtype {
                Dtype::Uint8 => raw.iter().map(|&v| v as f64).collect(),
                Dtype::Uint16 => raw
                    .chunks_exact(2)
                    .map(|c| u16::from_le_bytes([c[0], c[1]]) as f64)
                    .collect(),
                Dtype::Float32 => raw
                    .chunks_exact(4)
                    .map(|c| f32::from_le_bytes([c[0], c[1], c[2], c[3]]) as f64)
                    .collect(),
            }
        })
        .collect();
    let band_meta = (0..header.band_count)
        .map(|b| {
            let nm = f64_at(HEADER_LEN + payload + b * 8);
            BandMeta {
                wavelength_nm: (nm > 0.0).then_some(nm),
                ..BandMeta::default()
            }
        })
        .collect();
    Ok(RawRaster {
        header,
        bands,
        band_meta,
        geo_tags: Vec::new(),
    })
}

pub fn read_raw(path: &Path) -> Result<RawRaster> {
    let data = std::fs::read(path).map_err(|e| Error::io(path, e))?;
    decode(&data)
}

pub fn write_raw(raw: &RawRaster, path: &Path) -> Result<()> {
    let bytes = encode(raw)?;
    std::fs::write(path, bytes).map_err(|e| Error::io(path, e))
}

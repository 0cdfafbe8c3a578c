//! RGB PNG overlays of class maps.

use std::path::Path;

use crate::classify::{Class, ClassMap};
use crate::error::{Error, Result};

/// Overlay color of each class.
pub fn class_color(class: Class) -> [u8; 3] {
    match class {
        Class::Water => [0x08, 0x30, 0x6B],
        Class::Debris => [0xFF, 0xFF, 0xB2],
        Class::FloatingOther => [0x6B, 0xAE, 0xD6],
        Class::Wake => [0xFE, 0xD9, 0x76],
        Class::Undetermined => [0xBD, 0xBD, 0xBD],
    }
}

/// 8-bit RGB PNG with one pixel per map cell.
pub fn encode_png(map: &ClassMap) -> Result<Vec<u8>> {
    let pixels: Vec<u8> = map.data().iter().flat_map(|&c| class_color(c)).collect();
    let mut out = Vec::new();
    {
        let mut encoder = png::Encoder::new(&mut out, map.width() as u32, map.height() as u32);
        encoder.set_color(png::ColorType::Rgb);
        encoder.set_depth(png::BitDepth::Eight);
        let mut writer = encoder
            .write_header()
            .map_err(|e| Error::InvalidStack(format!("PNG encoding failed: {e}")))?;
        writer
            .write_image_data(&pixels)
            .map_err(|e| Error::InvalidStack(format!("PNG encoding failed: {e}")))?;
    }
    Ok(out)
}

pub fn write_png(map: &ClassMap, path: &Path) -> Result<()> {
    std::fs::write(path, encode_png(map)?).map_err(|e| Error::io(path, e))
}

//! Band metadata: Sentinel-2 MSI wavelength tables and band ordering.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Well-known Sentinel-2 band keys used by the indices.
pub mod s2 {
    pub const COASTAL: &str = "B1";
    pub const BLUE: &str = "B2";
    pub const GREEN: &str = "B3";
    pub const RED: &str = "B4";
    pub const RED_EDGE1: &str = "B5";
    pub const RED_EDGE2: &str = "B6";
    pub const RED_EDGE3: &str = "B7";
    pub const NIR: &str = "B8";
    pub const NARROW_NIR: &str = "B8A";
    pub const WATER_VAPOUR: &str = "B9";
    pub const SWIR_CIRRUS: &str = "B10";
    pub const SWIR1: &str = "B11";
    pub const SWIR2: &str = "B12";
}

/// Native resolutions present on the MSI.
pub const RESOLUTIONS_M: [u32; 3] = [10, 20, 60];

/// (key, descriptor, S2A center nm, S2B center nm, resolution m)
const SENTINEL2_BANDS: [(&str, &str, f64, f64, u32); 13] = [
    ("B1", "Coastal", 442.7, 442.3, 60),
    ("B2", "Blue", 492.4, 492.1, 10),
    ("B3", "Green", 559.8, 559.0, 10),
    ("B4", "Red", 664.6, 665.0, 10),
    ("B5", "Red Edge1", 704.1, 703.8, 20),
    ("B6", "Red Edge2", 740.5, 739.1, 20),
    ("B7", "Red Edge3", 782.8, 779.7, 20),
    ("B8", "NIR", 832.8, 833.0, 10),
    ("B8A", "Narrow NIR", 864.7, 864.0, 20),
    ("B9", "Water Vapour", 945.1, 943.2, 60),
    ("B10", "SWIR Cirrus", 1373.5, 1376.9, 60),
    ("B11", "SWIR1", 1613.7, 1610.4, 20),
    ("B12", "SWIR2", 2202.4, 2185.7, 20),
];

/// Band order of MARIDA patches: the 13 MSI bands minus B9 and B10.
pub const MARIDA_ORDER: [&str; 11] = ["B1", "B2", "B3", "B4", "B5", "B6", "B7", "B8", "B8A", "B11", "B12"];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Sensor {
    S2A,
    S2B,
}

impl std::str::FromStr for Sensor {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "s2a" => Ok(Sensor::S2A),
            "s2b" => Ok(Sensor::S2B),
            other => Err(Error::InvalidConfig(format!("unknown sensor '{other}'"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BandInfo {
    pub key: String,
    pub descriptor: String,
    pub wavelength_nm: f64,
    pub resolution_m: u32,
}

/// Per-band descriptor, center wavelength and native resolution, in stack order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<BandInfo>", into = "Vec<BandInfo>")]
pub struct WavelengthTable {
    bands: Vec<BandInfo>,
}

impl TryFrom<Vec<BandInfo>> for WavelengthTable {
    type Error = Error;

    fn try_from(bands: Vec<BandInfo>) -> Result<Self> {
        WavelengthTable::new(bands)
    }
}

impl From<WavelengthTable> for Vec<BandInfo> {
    fn from(t: WavelengthTable) -> Self {
        t.bands
    }
}

impl WavelengthTable {
    pub fn new(bands: Vec<BandInfo>) -> Result<Self> {
        if bands.is_empty() {
            return Err(Error::InvalidConfig("wavelength table is empty".into()));
        }
        for (i, b) in bands.iter().enumerate() {
            if !(b.wavelength_nm.is_finite() && b.wavelength_nm > 0.0) {
                return Err(Error::InvalidConfig(format!(
                    "band '{}' has non-positive wavelength {}",
                    b.key, b.wavelength_nm
                )));
            }
            if !RESOLUTIONS_M.contains(&b.resolution_m) {
                return Err(Error::InvalidConfig(format!(
                    "band '{}' has resolution {} m, expected one of {:?}",
                    b.key, b.resolution_m, RESOLUTIONS_M
                )));
            }
            if bands[..i].iter().any(|o| o.key == b.key) {
                return Err(Error::InvalidConfig(format!("duplicate band key '{}'", b.key)));
            }
        }
        Ok(WavelengthTable { bands })
    }

    /// The full 13-band MSI table for one platform.
    pub fn sentinel2(sensor: Sensor) -> Self {
        let bands = SENTINEL2_BANDS
            .iter()
            .map(|&(key, descriptor, a, b, res)| BandInfo {
                key: key.to_string(),
                descriptor: descriptor.to_string(),
                wavelength_nm: match sensor {
                    Sensor::S2A => a,
                    Sensor::S2B => b,
                },
                resolution_m: res,
            })
            .collect();
        WavelengthTable { bands }
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        serde_json::from_str(&text).map_err(|e| Error::json(path, e))
    }

    pub fn len(&self) -> usize {
        self.bands.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bands.is_empty()
    }

    pub fn bands(&self) -> &[BandInfo] {
        &self.bands
    }

    pub fn get(&self, index: usize) -> Option<&BandInfo> {
        self.bands.get(index)
    }

    pub fn index_of(&self, key: &str) -> Option<usize> {
        self.bands.iter().position(|b| b.key == key)
    }

    pub fn find(&self, key: &str) -> Option<&BandInfo> {
        self.bands.iter().find(|b| b.key == key)
    }

    pub fn keys(&self) -> Vec<String> {
        self.bands.iter().map(|b| b.key.clone()).collect()
    }

    /// Sub-table with `keys` in the given order.
    pub fn select<S: AsRef<str>>(&self, keys: &[S]) -> Result<Self> {
        let bands = keys
            .iter()
            .map(|k| {
                self.find(k.as_ref())
                    .cloned()
                    .ok_or_else(|| Error::MissingBand(k.as_ref().to_string()))
            })
            .collect::<Result<Vec<_>>>()?;
        WavelengthTable::new(bands)
    }

    /// Looks a band up by exact center wavelength.
    pub fn by_wavelength(&self, nm: f64) -> Option<&BandInfo> {
        self.bands.iter().find(|b| b.wavelength_nm == nm)
    }
}

/// How the bands of a file without embedded band metadata are ordered.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BandOrder {
    /// 11 bands ordered as in [`MARIDA_ORDER`] or all 13 in MSI order,
    /// chosen by band count.
    #[default]
    Auto,
    Marida,
    Full,
    Explicit(Vec<String>),
}

impl std::str::FromStr for BandOrder {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "auto" => Ok(BandOrder::Auto),
            "marida" => Ok(BandOrder::Marida),
            "full" => Ok(BandOrder::Full),
            _ => {
                let keys: Vec<String> = s
                    .split(',')
                    .map(|k| k.trim().to_ascii_uppercase())
                    .filter(|k| !k.is_empty())
                    .collect();
                if keys.is_empty() {
                    return Err(Error::InvalidConfig(format!("empty band order '{s}'")));
                }
                Ok(BandOrder::Explicit(keys))
            }
        }
    }
}

impl BandOrder {
    /// Resolves the order against a sensor table for a file with `band_count` bands.
    pub fn resolve(&self, sensor: &WavelengthTable, band_count: usize) -> Result<WavelengthTable> {
        let table = match self {
            BandOrder::Auto => match band_count {
                11 => sensor.select(&MARIDA_ORDER)?,
                n if n == sensor.len() => sensor.clone(),
                n => {
                    return Err(Error::InvalidConfig(format!(
                        "cannot infer the band order of a {n}-band raster; \
                         pass an explicit band order"
                    )))
                }
            },
            BandOrder::Marida => sensor.select(&MARIDA_ORDER)?,
            BandOrder::Full => sensor.clone(),
            BandOrder::Explicit(keys) => sensor.select(keys)?,
        };
        if table.len() != band_count {
            return Err(Error::InvalidConfig(format!(
                "band order lists {} bands but the raster has {band_count}",
                table.len()
            )));
        }
        Ok(table)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn s2a_reference_bands() {
        let t = WavelengthTable::sentinel2(Sensor::S2A);
        assert_eq!(t.len(), 13);
        let nir = t.find(s2::NIR).unwrap();
        assert_eq!((nir.wavelength_nm, nir.resolution_m), (832.8, 10));
        let red = t.find(s2::RED).unwrap();
        assert_eq!((red.wavelength_nm, red.resolution_m), (664.6, 10));
        let re2 = t.find(s2::RED_EDGE2).unwrap();
        assert_eq!((re2.wavelength_nm, re2.resolution_m), (740.5, 20));
        let swir1 = t.find(s2::SWIR1).unwrap();
        assert_eq!((swir1.wavelength_nm, swir1.resolution_m), (1613.7, 20));
    }

    #[test]
    fn s2b_swir1() {
        let t = WavelengthTable::sentinel2(Sensor::S2B);
        assert_eq!(t.find(s2::SWIR1).unwrap().wavelength_nm, 1610.4);
    }

    #[test]
    fn rejects_bad_tables() {
        let band = |key: &str, nm: f64, res: u32| BandInfo {
            key: key.into(),
            descriptor: "x".into(),
            wavelength_nm: nm,
            resolution_m: res,
        };
        assert!(WavelengthTable::new(vec![band("a", 0.0, 10)]).is_err());
        assert!(WavelengthTable::new(vec![band("a", 500.0, 30)]).is_err());
        assert!(WavelengthTable::new(vec![band("a", 500.0, 10), band("a", 600.0, 10)]).is_err());
        assert!(WavelengthTable::new(vec![]).is_err());
    }

    #[test]
    fn band_order_resolution() {
        let s2a = WavelengthTable::sentinel2(Sensor::S2A);
        let marida = BandOrder::Auto.resolve(&s2a, 11).unwrap();
        assert_eq!(marida.keys(), MARIDA_ORDER.map(String::from).to_vec());
        assert_eq!(BandOrder::Auto.resolve(&s2a, 13).unwrap(), s2a);
        assert!(BandOrder::Auto.resolve(&s2a, 4).is_err());

        let order: BandOrder = "b4,b8".parse().unwrap();
        let t = order.resolve(&s2a, 2).unwrap();
        assert_eq!(t.keys(), vec!["B4", "B8"]);
        assert!(order.resolve(&s2a, 3).is_err());
        assert!(matches!(
            "B4,B99".parse::<BandOrder>().unwrap().resolve(&s2a, 2),
            Err(Error::MissingBand(_))
        ));
    }

    #[test]
    fn table_json_roundtrip() {
        let t = WavelengthTable::sentinel2(Sensor::S2B);
        let json = serde_json::to_string(&t).unwrap();
        let back: WavelengthTable = serde_json::from_str(&json).unwrap();
        assert_eq!(back, t);
        assert!(serde_json::from_str::<WavelengthTable>("[]").is_err());
    }
}

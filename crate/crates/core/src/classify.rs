//! Threshold classification of index maps, including automatic thresholds
//! from Otsu's method.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::parallel::map_labels;
use crate::raster::Raster;
use crate::spectral::{IndexKind, IndexMap};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Class {
    Water,
    Debris,
    FloatingOther,
    Wake,
    #[default]
    Undetermined,
}

impl Class {
    pub const ALL: [Class; 5] = [
        Class::Water,
        Class::Debris,
        Class::FloatingOther,
        Class::Wake,
        Class::Undetermined,
    ];

    /// Integer code written to class rasters.
    pub fn code(self) -> u8 {
        self as u8
    }

    pub fn from_code(code: u8) -> Option<Class> {
        Class::ALL.get(code as usize).copied()
    }

    pub fn name(self) -> &'static str {
        match self {
            Class::Water => "water",
            Class::Debris => "debris",
            Class::FloatingOther => "floating_other",
            Class::Wake => "wake",
            Class::Undetermined => "undetermined",
        }
    }
}

impl std::fmt::Display for Class {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for Class {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Class::ALL
            .into_iter()
            .find(|c| c.name() == s)
            .ok_or_else(|| Error::InvalidConfig(format!("unknown class '{s}'")))
    }
}

pub type ClassMap = Raster<Class>;

/// Pixel counts per class, indexed by [`Class::code`].
pub fn class_counts(map: &ClassMap) -> [usize; 5] {
    let mut counts = [0; 5];
    for &c in map.data() {
        counts[c.code() as usize] += 1;
    }
    counts
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Polarity {
    /// `value >= threshold` is debris.
    Above,
    /// `value < threshold` is debris.
    Below,
}

/// Binary debris/water map from one index. Invalid pixels are undetermined.
pub fn classify_single(index: &IndexMap, threshold: f64, polarity: Polarity) -> Result<ClassMap> {
    if !threshold.is_finite() {
        return Err(Error::InvalidConfig(format!("threshold {threshold} is not finite")));
    }
    let labels = map_labels(index.values().len(), index.width(), |i| match index.at(i) {
        None => Class::Undetermined,
        Some(v) => {
            let hit = match polarity {
                Polarity::Above => v >= threshold,
                Polarity::Below => v < threshold,
            };
            if hit {
                Class::Debris
            } else {
                Class::Water
            }
        }
    });
    Raster::new(index.width(), index.height(), labels)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ThresholdMode {
    #[default]
    Fixed,
    /// Per-scene Otsu thresholds; the fixed values are fallbacks.
    Otsu,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ThresholdConfig {
    /// WCI at or above which a pixel is water.
    pub tau_w: f64,
    /// FDI at or above which a pixel holds floating material.
    pub tau_f: f64,
    /// NDVI at or above which floating material is debris.
    pub tau_n_lo: f64,
    /// NDVI at or above which a non-floating pixel is a wake.
    pub tau_n_hi: f64,
    pub mode: ThresholdMode,
}

impl Default for ThresholdConfig {
    fn default() -> Self {
        ThresholdConfig {
            tau_w: 0.9,
            tau_f: 0.02,
            tau_n_lo: 0.0,
            tau_n_hi: 0.1,
            mode: ThresholdMode::Fixed,
        }
    }
}

impl ThresholdConfig {
    pub fn otsu() -> Self {
        ThresholdConfig {
            mode: ThresholdMode::Otsu,
            ..ThresholdConfig::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("tau_w", self.tau_w),
            ("tau_f", self.tau_f),
            ("tau_n_lo", self.tau_n_lo),
            ("tau_n_hi", self.tau_n_hi),
        ] {
            if !v.is_finite() {
                return Err(Error::InvalidConfig(format!("{name} = {v} is not finite")));
            }
        }
        if !(-1.0..=1.0).contains(&self.tau_w) {
            return Err(Error::InvalidConfig(format!("tau_w = {} outside [-1, 1]", self.tau_w)));
        }
        if self.tau_n_lo > self.tau_n_hi {
            return Err(Error::InvalidConfig(format!(
                "tau_n_lo = {} exceeds tau_n_hi = {}",
                self.tau_n_lo, self.tau_n_hi
            )));
        }
        Ok(())
    }

    pub fn load(path: &std::path::Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let cfg: ThresholdConfig = serde_json::from_str(&text).map_err(|e| Error::json(path, e))?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// Concrete thresholds for one scene. In Otsu mode `tau_w`, `tau_f` and
    /// `tau_n_lo` come from the index histograms and `tau_n_hi` is the larger
    /// of the NDVI Otsu threshold and the configured value. A degenerate
    /// histogram keeps the configured value.
    pub fn resolve(&self, ndvi: &IndexMap, fdi: &IndexMap, wci: &IndexMap) -> Result<ResolvedThresholds> {
        self.validate()?;
        let mut resolved = ResolvedThresholds {
            tau_w: self.tau_w,
            tau_f: self.tau_f,
            tau_n_lo: self.tau_n_lo,
            tau_n_hi: self.tau_n_hi,
            mode: self.mode,
            fallbacks: Vec::new(),
        };
        if self.mode == ThresholdMode::Fixed {
            return Ok(resolved);
        }
        let mut otsu = |map: &IndexMap| match otsu_threshold(map) {
            Ok(t) => Some(t),
            Err(_) => {
                log::warn!("{} histogram is degenerate; keeping the fixed threshold", map.kind());
                resolved.fallbacks.push(map.kind());
                None
            }
        };
        let (w, f, n) = (otsu(wci), otsu(fdi), otsu(ndvi));
        if let Some(t) = w {
            resolved.tau_w = t;
        }
        if let Some(t) = f {
            resolved.tau_f = t;
        }
        if let Some(t) = n {
            resolved.tau_n_lo = t;
            resolved.tau_n_hi = t.max(self.tau_n_hi);
        }
        Ok(resolved)
    }
}

/// Thresholds actually applied to a scene.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResolvedThresholds {
    pub tau_w: f64,
    pub tau_f: f64,
    pub tau_n_lo: f64,
    pub tau_n_hi: f64,
    pub mode: ThresholdMode,
    /// Indices whose Otsu threshold fell back to the fixed value.
    pub fallbacks: Vec<IndexKind>,
}

impl ResolvedThresholds {
    /// The rule for one pixel, all three values valid.
    pub fn decide(&self, ndvi: f64, fdi: f64, wci: f64) -> Class {
        if wci >= self.tau_w {
            Class::Water
        } else if fdi >= self.tau_f && ndvi >= self.tau_n_lo {
            Class::Debris
        } else if fdi >= self.tau_f {
            Class::FloatingOther
        } else if ndvi >= self.tau_n_hi {
            Class::Wake
        } else {
            Class::Water
        }
    }
}

fn check_grid(maps: &[&IndexMap]) -> Result<()> {
    let first = maps[0];
    for m in &maps[1..] {
        if !first.same_grid(m) {
            return Err(Error::GridMismatch(format!(
                "{} is {}x{}, {} is {}x{}",
                first.kind(),
                first.width(),
                first.height(),
                m.kind(),
                m.width(),
                m.height()
            )));
        }
    }
    Ok(())
}

/// Hierarchical combination of the three indices. Undetermined wherever any
/// input is invalid.
pub fn classify_combined(ndvi: &IndexMap, fdi: &IndexMap, wci: &IndexMap, cfg: &ThresholdConfig) -> Result<ClassMap> {
    check_grid(&[ndvi, fdi, wci])?;
    let t = cfg.resolve(ndvi, fdi, wci)?;
    apply_thresholds(ndvi, fdi, wci, &t)
}

/// Combined classification with already-resolved thresholds.
pub fn apply_thresholds(ndvi: &IndexMap, fdi: &IndexMap, wci: &IndexMap, t: &ResolvedThresholds) -> Result<ClassMap> {
    check_grid(&[ndvi, fdi, wci])?;
    let labels = map_labels(ndvi.values().len(), ndvi.width(), |i| {
        match (ndvi.at(i), fdi.at(i), wci.at(i)) {
            (Some(n), Some(f), Some(w)) => t.decide(n, f, w),
            _ => Class::Undetermined,
        }
    });
    Raster::new(ndvi.width(), ndvi.height(), labels)
}

pub const OTSU_BINS: usize = 256;

/// Fixed-edge histogram of the valid values of an index map.
#[derive(Debug, Clone, PartialEq)]
pub struct Histogram {
    pub min: f64,
    pub max: f64,
    pub counts: [u64; OTSU_BINS],
}

impl Histogram {
    /// Fails with `DegenerateHistogram` unless at least two distinct values are present.
    pub fn from_values(values: &[f64]) -> Result<Self> {
        let (min, max) = values.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| {
            (lo.min(v), hi.max(v))
        });
        if max <= min || !(max - min).is_finite() {
            return Err(Error::DegenerateHistogram);
        }
        let mut h = Histogram {
            min,
            max,
            counts: [0; OTSU_BINS],
        };
        let counts = values
            .par_chunks(4096)
            .map(|chunk| {
                let mut c = [0u64; OTSU_BINS];
                for &v in chunk {
                    c[h.bin(v)] += 1;
                }
                c
            })
            .reduce(
                || [0u64; OTSU_BINS],
                |mut a, b| {
                    a.iter_mut().zip(b).for_each(|(x, y)| *x += y);
                    a
                },
            );
        h.counts = counts;
        Ok(h)
    }

    pub fn width(&self) -> f64 {
        (self.max - self.min) / OTSU_BINS as f64
    }

    pub fn bin(&self, v: f64) -> usize {
        let b = ((v - self.min) / self.width()).floor();
        if b <= 0.0 {
            0
        } else {
            (b as usize).min(OTSU_BINS - 1)
        }
    }

    /// Lower edge of bin `k`.
    pub fn edge(&self, k: usize) -> f64 {
        self.min + k as f64 * self.width()
    }

    /// Between-class variance (up to a constant factor, in bin units) of
    /// splitting below bin `k`; `None` if one side is empty.
    pub fn between_class_variance(&self, k: usize) -> Option<f64> {
        let (mut n0, mut s0, mut n, mut s) = (0u128, 0u128, 0u128, 0u128);
        for (i, &c) in self.counts.iter().enumerate() {
            let (c, ic) = (c as u128, c as u128 * i as u128);
            if i < k {
                n0 += c;
                s0 += ic;
            }
            n += c;
            s += ic;
        }
        let (n1, s1) = (n - n0, s - s0);
        if n0 == 0 || n1 == 0 {
            return None;
        }
        let d = (n1 * s0) as i128 - (n0 * s1) as i128;
        let d = d as f64;
        Some(d * d / (n0 as f64 * n1 as f64))
    }

    /// Index of the boundary (1..=255) maximizing between-class variance;
    /// ties go to the lowest boundary.
    pub fn otsu_boundary(&self) -> usize {
        let (mut n0, mut s0) = (0u128, 0u128);
        let n: u128 = self.counts.iter().map(|&c| c as u128).sum();
        let s: u128 = self
            .counts
            .iter()
            .enumerate()
            .map(|(i, &c)| c as u128 * i as u128)
            .sum();
        let mut best = (1, f64::NEG_INFINITY);
        for k in 1..OTSU_BINS {
            n0 += self.counts[k - 1] as u128;
            s0 += self.counts[k - 1] as u128 * (k - 1) as u128;
            let (n1, s1) = (n - n0, s - s0);
            if n0 == 0 || n1 == 0 {
                continue;
            }
            let d = ((n1 * s0) as i128 - (n0 * s1) as i128) as f64;
            let var = d * d / (n0 as f64 * n1 as f64);
            if var > best.1 {
                best = (k, var);
            }
        }
        best.0
    }
}

/// Otsu threshold over a 256-bin histogram of the valid values.
pub fn otsu_threshold(index: &IndexMap) -> Result<f64> {
    let values: Vec<f64> = index.valid_values().collect();
    otsu_threshold_values(&values)
}

pub fn otsu_threshold_values(values: &[f64]) -> Result<f64> {
    let h = Histogram::from_values(values)?;
    Ok(h.edge(h.otsu_boundary()))
}

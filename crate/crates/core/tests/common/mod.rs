//! Independent scalar re-implementations used as test oracles, plus random
//! fixtures. Nothing here calls into the library's index or metric code.

#![allow(dead_code)]

use debris_core::bands::{Sensor, WavelengthTable, MARIDA_ORDER};
use debris_core::classify::{Class, ClassMap};
use debris_core::raster::Raster;
use debris_core::spectral::BandStack;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn marida_table() -> WavelengthTable {
    WavelengthTable::sentinel2(Sensor::S2A).select(&MARIDA_ORDER).unwrap()
}

/// Random reflectance stack in (0.001, 0.5).
pub fn random_stack(rng: &mut ChaCha8Rng, w: usize, h: usize, table: &WavelengthTable) -> BandStack {
    let n = table.len();
    let values: Vec<Vec<f64>> = (0..w * h)
        .map(|_| (0..n).map(|_| rng.random_range(0.001..0.5)).collect())
        .collect();
    BandStack::from_fn(w, h, table.clone(), |x, y| values[y * w + x].clone()).unwrap()
}

pub fn ndvi_oracle(red: f64, nir: f64) -> Option<f64> {
    if red + nir == 0.0 {
        None
    } else {
        Some((nir - red) / (nir + red))
    }
}

/// `NIR - (RE2 + (SWIR1 - RE2) * (l8 - l4) / (l8 + l4) * 10)`
pub fn fdi_oracle(re2: f64, nir: f64, swir1: f64, l8: f64, l4: f64) -> f64 {
    let nir_prime = re2 + (swir1 - re2) * ((l8 - l4) / (l8 + l4)) * 10.0;
    nir - nir_prime
}

/// Textbook single-pass sum formula.
pub fn pearson_oracle(x: &[f64], y: &[f64]) -> Option<f64> {
    let n = x.len() as f64;
    let (sx, sy): (f64, f64) = (x.iter().sum(), y.iter().sum());
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| a * b).sum();
    let sxx: f64 = x.iter().map(|a| a * a).sum();
    let syy: f64 = y.iter().map(|b| b * b).sum();
    let den = ((n * sxx - sx * sx) * (n * syy - sy * sy)).sqrt();
    if x.iter().all(|&v| v == x[0]) || y.iter().all(|&v| v == y[0]) || den == 0.0 {
        None
    } else {
        Some((n * sxy - sx * sy) / den)
    }
}

/// Naive per-pixel tally: counts[truth][pred], skipping undetermined truth.
pub fn tally(pred: &ClassMap, truth: &ClassMap) -> [[u64; 5]; 5] {
    let mut m = [[0u64; 5]; 5];
    for y in 0..truth.height() {
        for x in 0..truth.width() {
            let t = truth.get(x, y).unwrap();
            let p = pred.get(x, y).unwrap();
            if t == Class::Undetermined {
                continue;
            }
            let ti = Class::ALL.iter().position(|&c| c == t).unwrap();
            let pi = Class::ALL.iter().position(|&c| c == p).unwrap();
            m[ti][pi] += 1;
        }
    }
    m
}

pub fn random_class_map(rng: &mut ChaCha8Rng, w: usize, h: usize, classes: &[Class]) -> ClassMap {
    let v = (0..w * h)
        .map(|_| classes[rng.random_range(0..classes.len())])
        .collect();
    Raster::new(w, h, v).unwrap()
}

/// Brute-force Otsu: every boundary 1..=255 of a 256-bin histogram.
/// `w0 * w1 * (mu0 - mu1)^2` is evaluated in its integer-sum form
/// `(n1*s0 - n0*s1)^2 / (n0*n1)`, bin units, so ties compare exactly.
pub fn otsu_oracle(values: &[f64]) -> Option<f64> {
    let min = values.iter().cloned().fold(f64::INFINITY, f64::min);
    let max = values.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    if max <= min {
        return None;
    }
    let width = (max - min) / 256.0;
    let mut counts = [0u64; 256];
    for &v in values {
        let b = ((v - min) / width).floor();
        let b = if b <= 0.0 { 0 } else { (b as usize).min(255) };
        counts[b] += 1;
    }
    let mut best: Option<(usize, f64)> = None;
    for k in 1..256 {
        let (n0, n1): (u64, u64) = (counts[..k].iter().sum(), counts[k..].iter().sum());
        if n0 == 0 || n1 == 0 {
            continue;
        }
        let s0: u64 = (0..k).map(|i| counts[i] * i as u64).sum();
        let s1: u64 = (k..256).map(|i| counts[i] * i as u64).sum();
        let d = (n1 as i128 * s0 as i128 - n0 as i128 * s1 as i128) as f64;
        let var = d * d / (n0 as f64 * n1 as f64);
        if best.is_none_or(|(_, b)| var > b) {
            best = Some((k, var));
        }
    }
    best.map(|(k, _)| min + k as f64 * width)
}

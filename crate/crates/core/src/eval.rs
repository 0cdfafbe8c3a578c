//! Scoring predicted class maps against labeled masks.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::classify::{
    apply_thresholds, classify_single, Class, ClassMap, Polarity, ResolvedThresholds, ThresholdConfig,
};
use crate::error::{Error, Result};
use crate::indices::{Provenance, WaterReference};
use crate::io::{read_mask, read_stack, CodeMask, ReadOptions};
use crate::pipeline::{choose_water_reference, compute_indices, harmonized, DetectOptions};
use crate::raster::Raster;
use crate::spectral::BandStack;

/// A stack with its ground truth. Undetermined truth pixels are not scored.
#[derive(Debug, Clone, PartialEq)]
pub struct LabeledScene {
    pub stack: BandStack,
    pub truth: ClassMap,
}

impl LabeledScene {
    pub fn new(stack: BandStack, truth: ClassMap) -> Result<Self> {
        if truth.width() != stack.width() || truth.height() != stack.height() {
            return Err(Error::GridMismatch(format!(
                "mask is {}x{}, stack is {}x{}",
                truth.width(),
                truth.height(),
                stack.width(),
                stack.height()
            )));
        }
        Ok(LabeledScene { stack, truth })
    }

    pub fn load(stack: &Path, mask: &Path, mapping: &LabelMapping, opts: &ReadOptions) -> Result<Self> {
        let stack = read_stack(stack, opts)?;
        let truth = map_labels(&read_mask(mask)?, mapping)?;
        LabeledScene::new(stack, truth)
    }
}

/// Evaluation class a raw mask code maps to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EvalClass {
    Water,
    Debris,
    FloatingOther,
    Wake,
    Ignore,
}

impl EvalClass {
    pub fn class(self) -> Class {
        match self {
            EvalClass::Water => Class::Water,
            EvalClass::Debris => Class::Debris,
            EvalClass::FloatingOther => Class::FloatingOther,
            EvalClass::Wake => Class::Wake,
            EvalClass::Ignore => Class::Undetermined,
        }
    }
}

/// Raw mask code to evaluation class, as JSON `{"code": "class"}`.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(transparent)]
pub struct LabelMapping {
    pub entries: BTreeMap<u16, EvalClass>,
}

impl LabelMapping {
    pub fn new(entries: impl IntoIterator<Item = (u16, EvalClass)>) -> Self {
        LabelMapping {
            entries: entries.into_iter().collect(),
        }
    }

    /// The 15 MARIDA classes (and 0, unlabeled) collapsed to the four
    /// evaluation classes.
    pub fn marida() -> Self {
        serde_json::from_str(MARIDA_MAPPING).expect("bundled mapping parses")
    }

    /// Codes equal to [`Class::code`], as written by the scene generator.
    pub fn class_codes() -> Self {
        LabelMapping::new([
            (0, EvalClass::Water),
            (1, EvalClass::Debris),
            (2, EvalClass::FloatingOther),
            (3, EvalClass::Wake),
            (4, EvalClass::Ignore),
        ])
    }

    pub fn get(&self, code: u16) -> Option<EvalClass> {
        self.entries.get(&code).copied()
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        serde_json::from_str(&text).map_err(|e| Error::json(path, e))
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_json()).map_err(|e| Error::io(path, e))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("plain data serializes")
    }
}

const MARIDA_MAPPING: &str = include_str!("../data/marida_mapping.json");

/// Applies `mapping` to every code; ignored codes become undetermined.
/// Fails with the smallest code missing from the mapping.
pub fn map_labels(mask: &CodeMask, mapping: &LabelMapping) -> Result<ClassMap> {
    if let Some(code) = mask.data().iter().copied().filter(|c| mapping.get(*c).is_none()).min() {
        return Err(Error::UnmappedCode(code));
    }
    Ok(mask.map(|c| mapping.get(c).expect("checked above").class()))
}

/// Classes with a truth row in the report, in confusion-matrix order.
pub const SCORED: [Class; 4] = [Class::Water, Class::Debris, Class::FloatingOther, Class::Wake];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassMetrics {
    pub class: Class,
    pub truth_count: u64,
    pub predicted_count: u64,
    pub true_positives: u64,
    /// `None` when the denominator is zero.
    pub precision: Option<f64>,
    pub recall: Option<f64>,
    pub f1: Option<f64>,
    pub iou: Option<f64>,
}

fn ratio(num: u64, den: u64) -> Option<f64> {
    (den > 0).then(|| num as f64 / den as f64)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    /// Rows are truth, columns predicted, both in [`Class::ALL`] order.
    pub confusion: [[u64; 5]; 5],
    pub evaluated_pixels: u64,
    pub correct: u64,
    pub overall_accuracy: f64,
    /// Evaluated pixels whose truth is not water.
    pub non_water_pixels: u64,
    pub non_water_accuracy: Option<f64>,
    pub per_class: Vec<ClassMetrics>,
    /// Mean over classes with a defined value.
    pub macro_f1: Option<f64>,
    pub mean_iou: Option<f64>,
}

/// Scores `pred` against `truth`. Undetermined truth pixels are skipped;
/// undetermined predictions count as errors.
pub fn evaluate(pred: &ClassMap, truth: &ClassMap) -> Result<EvalReport> {
    if !pred.same_grid(truth) {
        return Err(Error::GridMismatch(format!(
            "prediction is {}x{}, truth is {}x{}",
            pred.width(),
            pred.height(),
            truth.width(),
            truth.height()
        )));
    }
    let mut confusion = [[0u64; 5]; 5];
    for (&p, &t) in pred.data().iter().zip(truth.data()) {
        if t != Class::Undetermined {
            confusion[t.code() as usize][p.code() as usize] += 1;
        }
    }
    EvalReport::from_confusion(confusion)
}

impl EvalReport {
    pub fn from_confusion(confusion: [[u64; 5]; 5]) -> Result<Self> {
        let evaluated: u64 = confusion.iter().flatten().sum();
        if evaluated == 0 {
            return Err(Error::NoEvaluatedPixels);
        }
        let correct: u64 = (0..5).map(|i| confusion[i][i]).sum();
        let water = Class::Water.code() as usize;
        let non_water: u64 = evaluated - confusion[water].iter().sum::<u64>();
        let non_water_correct = correct - confusion[water][water];

        let per_class: Vec<ClassMetrics> = SCORED
            .iter()
            .map(|&class| {
                let k = class.code() as usize;
                let tp = confusion[k][k];
                let truth_count: u64 = confusion[k].iter().sum();
                let predicted_count: u64 = confusion.iter().map(|row| row[k]).sum();
                ClassMetrics {
                    class,
                    truth_count,
                    predicted_count,
                    true_positives: tp,
                    precision: ratio(tp, predicted_count),
                    recall: ratio(tp, truth_count),
                    f1: ratio(2 * tp, truth_count + predicted_count),
                    iou: ratio(tp, truth_count + predicted_count - tp),
                }
            })
            .collect();
        let mean = |values: Vec<f64>| (!values.is_empty()).then(|| values.iter().sum::<f64>() / values.len() as f64);
        let macro_f1 = mean(per_class.iter().filter_map(|m| m.f1).collect());
        let mean_iou = mean(per_class.iter().filter_map(|m| m.iou).collect());
        Ok(EvalReport {
            confusion,
            evaluated_pixels: evaluated,
            correct,
            overall_accuracy: correct as f64 / evaluated as f64,
            non_water_pixels: non_water,
            non_water_accuracy: ratio(non_water_correct, non_water),
            per_class,
            macro_f1,
            mean_iou,
        })
    }

    pub fn metrics(&self, class: Class) -> Option<&ClassMetrics> {
        self.per_class.iter().find(|m| m.class == class)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("plain data serializes")
    }

    /// Per-class metrics as an aligned text table.
    pub fn table(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(
            out,
            "{:<15} {:>8} {:>8} {:>9} {:>7} {:>7} {:>7}",
            "class", "truth", "pred", "precision", "recall", "f1", "iou"
        );
        for m in &self.per_class {
            let _ = writeln!(
                out,
                "{:<15} {:>8} {:>8} {:>9} {:>7} {:>7} {:>7}",
                m.class.name(),
                m.truth_count,
                m.predicted_count,
                fmt_opt(m.precision),
                fmt_opt(m.recall),
                fmt_opt(m.f1),
                fmt_opt(m.iou)
            );
        }
        let _ = writeln!(
            out,
            "overall accuracy {:.4} over {} pixels; non-water accuracy {} over {}",
            self.overall_accuracy,
            self.evaluated_pixels,
            fmt_opt(self.non_water_accuracy),
            self.non_water_pixels
        );
        out
    }
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map_or_else(|| "n/a".to_string(), |v| format!("{v:.4}"))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DetectorKind {
    NdviOnly,
    FdiOnly,
    WciOnly,
    Combined,
}

impl DetectorKind {
    pub const ALL: [DetectorKind; 4] = [
        DetectorKind::NdviOnly,
        DetectorKind::FdiOnly,
        DetectorKind::WciOnly,
        DetectorKind::Combined,
    ];

    pub fn name(self) -> &'static str {
        match self {
            DetectorKind::NdviOnly => "ndvi_only",
            DetectorKind::FdiOnly => "fdi_only",
            DetectorKind::WciOnly => "wci_only",
            DetectorKind::Combined => "combined",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DetectorReport {
    pub detector: DetectorKind,
    pub report: EvalReport,
}

/// One report per detector over the same evaluated pixels.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IndexReport {
    pub thresholds: ResolvedThresholds,
    pub water_reference: Provenance,
    pub rows: Vec<DetectorReport>,
}

impl IndexReport {
    pub fn get(&self, detector: DetectorKind) -> &EvalReport {
        &self
            .rows
            .iter()
            .find(|r| r.detector == detector)
            .expect("every detector has a row")
            .report
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("plain data serializes")
    }

    pub fn table(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(
            out,
            "{:<9} {:>8} {:>9} {:>8} {:>9} {:>10}",
            "detector", "accuracy", "non_water", "macro_f1", "debris_f1", "debris_iou"
        );
        for row in &self.rows {
            let r = &row.report;
            let debris = r.metrics(Class::Debris);
            let _ = writeln!(
                out,
                "{:<9} {:>8.4} {:>9} {:>8} {:>9} {:>10}",
                row.detector.name(),
                r.overall_accuracy,
                fmt_opt(r.non_water_accuracy),
                fmt_opt(r.macro_f1),
                fmt_opt(debris.and_then(|m| m.f1)),
                fmt_opt(debris.and_then(|m| m.iou))
            );
        }
        out
    }
}

/// Scores NDVI-only (above `tau_n_lo`), FDI-only (above `tau_f`), WCI-only
/// (below `tau_w`) and the combined rule. The evaluated set is every pixel
/// with a truth label and a valid stack spectrum. Without a reference the
/// water signature is estimated from the scene.
pub fn per_index_report(
    scene: &LabeledScene,
    cfg: &ThresholdConfig,
    water_ref: Option<&WaterReference>,
) -> Result<IndexReport> {
    per_index_report_with(scene, &DetectOptions::with_thresholds(cfg.clone()), water_ref)
}

pub fn per_index_report_with(
    scene: &LabeledScene,
    opts: &DetectOptions,
    water_ref: Option<&WaterReference>,
) -> Result<IndexReport> {
    let stack = harmonized(&scene.stack)?;
    if scene.truth.width() != stack.width() || scene.truth.height() != stack.height() {
        return Err(Error::GridMismatch(format!(
            "mask is {}x{}, harmonized stack is {}x{}",
            scene.truth.width(),
            scene.truth.height(),
            stack.width(),
            stack.height()
        )));
    }
    let reference = choose_water_reference(&stack, water_ref.cloned(), None)?;
    let idx = compute_indices(&stack, &reference, opts)?;
    let t = opts.thresholds.resolve(&idx.ndvi, &idx.fdi, &idx.wci)?;
    let valid = stack.valid();
    let truth = Raster::new(
        stack.width(),
        stack.height(),
        scene
            .truth
            .data()
            .iter()
            .zip(valid)
            .map(|(&c, &ok)| if ok { c } else { Class::Undetermined })
            .collect(),
    )?;
    let maps = [
        (
            DetectorKind::NdviOnly,
            classify_single(&idx.ndvi, t.tau_n_lo, Polarity::Above)?,
        ),
        (
            DetectorKind::FdiOnly,
            classify_single(&idx.fdi, t.tau_f, Polarity::Above)?,
        ),
        (
            DetectorKind::WciOnly,
            classify_single(&idx.wci, t.tau_w, Polarity::Below)?,
        ),
        (
            DetectorKind::Combined,
            apply_thresholds(&idx.ndvi, &idx.fdi, &idx.wci, &t)?,
        ),
    ];
    let rows = maps
        .into_iter()
        .map(|(detector, pred)| {
            Ok(DetectorReport {
                detector,
                report: evaluate(&pred, &truth)?,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(IndexReport {
        thresholds: t,
        water_reference: reference.provenance(),
        rows,
    })
}

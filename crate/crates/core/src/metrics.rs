//! Detection quality metrics: IoU-based matching against ground truth,
//! average precision per class, mAP, and precision/recall/F1 at a confidence
//! threshold. Also the Darknet layer sizing rules for a given class count.

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::Serialize;

use crate::detection::{iou, BoundingBox, ComponentClass, SketchDetections};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RankedPrediction {
    pub confidence: f64,
    pub is_true_positive: bool,
    /// IoU with the matched ground truth, for true positives.
    pub iou: Option<f64>,
    pub bbox: BoundingBox,
}

/// Ranked predictions of one class and the number of ground-truth boxes.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ClassMatches {
    pub ranked: Vec<RankedPrediction>,
    pub ground_truth: usize,
}

impl ClassMatches {
    pub fn true_positives(&self) -> usize {
        self.ranked.iter().filter(|p| p.is_true_positive).count()
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct MatchResult {
    pub classes: BTreeMap<ComponentClass, ClassMatches>,
}

impl MatchResult {
    pub fn ground_truth(&self) -> usize {
        self.classes.values().map(|c| c.ground_truth).sum()
    }

    /// Ground-truth boxes no prediction was matched to.
    pub fn unmatched_ground_truth(&self) -> usize {
        self.classes.values().map(|c| c.ground_truth - c.true_positives()).sum()
    }

    /// Pools the matches of several images, re-ranking each class.
    pub fn pooled<'a>(results: impl IntoIterator<Item = &'a MatchResult>) -> MatchResult {
        let mut out = MatchResult::default();
        for r in results {
            for (class, m) in &r.classes {
                let entry = out.classes.entry(*class).or_default();
                entry.ground_truth += m.ground_truth;
                entry.ranked.extend_from_slice(&m.ranked);
            }
        }
        for m in out.classes.values_mut() {
            m.ranked
                .sort_by(|a, b| rank_order(a.confidence, &a.bbox, b.confidence, &b.bbox));
        }
        out
    }
}

/// Confidence descending, then box coordinates; the sort using it must be stable.
fn rank_order(ca: f64, a: &BoundingBox, cb: f64, b: &BoundingBox) -> Ordering {
    cb.total_cmp(&ca)
        .then(a.cx.total_cmp(&b.cx))
        .then(a.cy.total_cmp(&b.cy))
        .then(a.w.total_cmp(&b.w))
        .then(a.h.total_cmp(&b.h))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MatchConfig {
    pub iou_threshold: f64,
    pub include_screen: bool,
}

impl Default for MatchConfig {
    fn default() -> Self {
        MatchConfig {
            iou_threshold: 0.5,
            include_screen: false,
        }
    }
}

/// Greedy matching: predictions in rank order each claim the unmatched
/// same-class ground truth with the highest IoU, if that IoU reaches the
/// threshold; otherwise they are false positives.
pub fn match_detections(
    predictions: &SketchDetections,
    ground_truth: &SketchDetections,
    config: &MatchConfig,
) -> Result<MatchResult> {
    if predictions.image_id != ground_truth.image_id {
        return Err(Error::ImageMismatch {
            predictions: predictions.image_id.clone(),
            ground_truth: ground_truth.image_id.clone(),
        });
    }
    if !(config.iou_threshold > 0.0 && config.iou_threshold < 1.0) {
        return Err(Error::validation(
            "iou_threshold",
            format!("{} is outside (0, 1)", config.iou_threshold),
        ));
    }
    let evaluated = |c: ComponentClass| config.include_screen || c.is_widget();

    let mut result = MatchResult::default();
    let gts: Vec<_> = ground_truth.detections.iter().filter(|d| evaluated(d.class)).collect();
    for g in &gts {
        result.classes.entry(g.class).or_default().ground_truth += 1;
    }

    let mut preds: Vec<_> = predictions.detections.iter().filter(|d| evaluated(d.class)).collect();
    preds.sort_by(|a, b| rank_order(a.confidence, &a.bbox, b.confidence, &b.bbox));

    let mut used = vec![false; gts.len()];
    for p in preds {
        let best = gts
            .iter()
            .enumerate()
            .filter(|(k, g)| !used[*k] && g.class == p.class)
            .map(|(k, g)| (k, iou(&p.bbox, &g.bbox)))
            .fold(None::<(usize, f64)>, |best, cand| match best {
                Some((_, v)) if v >= cand.1 => best,
                _ => Some(cand),
            });
        let matched = best.filter(|&(_, v)| v >= config.iou_threshold);
        if let Some((k, _)) = matched {
            used[k] = true;
        }
        result
            .classes
            .entry(p.class)
            .or_default()
            .ranked
            .push(RankedPrediction {
                confidence: p.confidence,
                is_true_positive: matched.is_some(),
                iou: matched.map(|(_, v)| v),
                bbox: p.bbox,
            });
    }
    Ok(result)
}

/// Precision-recall integration rule.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ApMethod {
    /// Area under the monotone precision envelope at every recall step.
    #[default]
    AllPoint,
    /// Mean of the envelope sampled at recall 0, 0.1, ..., 1.
    ElevenPoint,
}

/// All-point interpolated AP; `None` when the class has no ground truth.
pub fn average_precision(class: &ClassMatches) -> Option<f64> {
    average_precision_with(class, ApMethod::AllPoint)
}

pub fn average_precision_with(class: &ClassMatches, method: ApMethod) -> Option<f64> {
    if class.ground_truth == 0 {
        return None;
    }
    let total = class.ground_truth as f64;
    let mut tp = 0usize;
    let mut recall = Vec::with_capacity(class.ranked.len());
    let mut precision = Vec::with_capacity(class.ranked.len());
    for (i, p) in class.ranked.iter().enumerate() {
        tp += usize::from(p.is_true_positive);
        recall.push(tp as f64 / total);
        precision.push(tp as f64 / (i + 1) as f64);
    }
    // Envelope: best precision at this recall or beyond.
    for i in (0..precision.len().saturating_sub(1)).rev() {
        precision[i] = precision[i].max(precision[i + 1]);
    }

    let ap = match method {
        ApMethod::AllPoint => {
            let mut prev_recall = 0.0;
            let mut area = 0.0;
            for (r, p) in recall.iter().zip(&precision) {
                area += (r - prev_recall) * p;
                prev_recall = *r;
            }
            area
        }
        ApMethod::ElevenPoint => {
            (0..=10)
                .map(|t| {
                    let level = t as f64 / 10.0;
                    recall
                        .iter()
                        .position(|&r| r >= level - 1e-12)
                        .map_or(0.0, |i| precision[i])
                })
                .sum::<f64>()
                / 11.0
        }
    };
    Some(ap.clamp(0.0, 1.0))
}

/// Mean of the per-class APs over classes with ground truth.
pub fn mean_average_precision(results: &MatchResult) -> Result<f64> {
    mean_average_precision_with(results, ApMethod::AllPoint)
}

pub fn mean_average_precision_with(results: &MatchResult, method: ApMethod) -> Result<f64> {
    let aps: Vec<f64> = results
        .classes
        .values()
        .filter_map(|c| average_precision_with(c, method))
        .collect();
    if aps.is_empty() {
        return Err(Error::NoGroundTruth);
    }
    Ok(aps.iter().sum::<f64>() / aps.len() as f64)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PrecisionRecall {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
}

impl PrecisionRecall {
    /// Precision is 1 when nothing was predicted; F1 is 0 when both are 0.
    pub fn from_counts(true_positives: usize, predicted: usize, ground_truth: usize) -> Self {
        let precision = if predicted == 0 {
            1.0
        } else {
            true_positives as f64 / predicted as f64
        };
        let recall = if ground_truth == 0 {
            0.0
        } else {
            true_positives as f64 / ground_truth as f64
        };
        PrecisionRecall {
            precision,
            recall,
            f1: f1_score(precision, recall),
        }
    }
}

/// Harmonic mean of precision and recall.
pub fn f1_score(precision: f64, recall: f64) -> f64 {
    if precision + recall == 0.0 {
        0.0
    } else {
        2.0 * precision * recall / (precision + recall)
    }
}

/// Counts over all classes, keeping predictions at or above the threshold.
pub fn precision_recall_f1(result: &MatchResult, confidence_threshold: f64) -> PrecisionRecall {
    let kept = result
        .classes
        .values()
        .flat_map(|c| &c.ranked)
        .filter(|p| p.confidence >= confidence_threshold);
    let (mut tp, mut predicted) = (0, 0);
    for p in kept {
        predicted += 1;
        tp += usize::from(p.is_true_positive);
    }
    PrecisionRecall::from_counts(tp, predicted, result.ground_truth())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EvalConfig {
    pub matching: MatchConfig,
    pub confidence_threshold: f64,
    pub ap_method: ApMethod,
}

impl Default for EvalConfig {
    fn default() -> Self {
        EvalConfig {
            matching: MatchConfig::default(),
            confidence_threshold: 0.25,
            ap_method: ApMethod::AllPoint,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EvalReport {
    pub per_class_ap: BTreeMap<String, f64>,
    #[serde(rename = "mAP")]
    pub map: f64,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub mean_iou: f64,
    pub true_positives: usize,
    pub false_positives: usize,
    pub false_negatives: usize,
    pub iou_threshold: f64,
    pub confidence_threshold: f64,
}

/// Evaluates (prediction, ground truth) pairs of the same images, pooling
/// detections over the whole set.
pub fn evaluate(pairs: &[(SketchDetections, SketchDetections)], config: &EvalConfig) -> Result<EvalReport> {
    let per_image = pairs
        .iter()
        .map(|(p, g)| match_detections(p, g, &config.matching))
        .collect::<Result<Vec<_>>>()?;
    let pooled = MatchResult::pooled(&per_image);
    report(&pooled, config)
}

pub fn report(pooled: &MatchResult, config: &EvalConfig) -> Result<EvalReport> {
    let map = mean_average_precision_with(pooled, config.ap_method)?;
    let per_class_ap = pooled
        .classes
        .iter()
        .filter_map(|(c, m)| average_precision_with(m, config.ap_method).map(|ap| (c.as_str().to_string(), ap)))
        .collect();
    let prf = precision_recall_f1(pooled, config.confidence_threshold);

    let kept: Vec<_> = pooled
        .classes
        .values()
        .flat_map(|c| &c.ranked)
        .filter(|p| p.confidence >= config.confidence_threshold)
        .collect();
    let ious: Vec<f64> = kept.iter().filter_map(|p| p.iou).collect();
    let mean_iou = if ious.is_empty() {
        0.0
    } else {
        ious.iter().sum::<f64>() / ious.len() as f64
    };
    let tp = ious.len();

    Ok(EvalReport {
        per_class_ap,
        map,
        precision: prf.precision,
        recall: prf.recall,
        f1: prf.f1,
        mean_iou,
        true_positives: tp,
        false_positives: kept.len() - tp,
        false_negatives: pooled.ground_truth() - tp,
        iou_threshold: config.matching.iou_threshold,
        confidence_threshold: config.confidence_threshold,
    })
}

impl EvalReport {
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "{:<12} {:>8}", "class", "AP");
        for (class, ap) in &self.per_class_ap {
            let _ = writeln!(out, "{class:<12} {:>7.2}%", ap * 100.0);
        }
        let _ = writeln!(out);
        let _ = writeln!(out, "mAP@{:.2}     {:>7.2}%", self.iou_threshold, self.map * 100.0);
        let _ = writeln!(out, "conf_thresh  {:.2}", self.confidence_threshold);
        let _ = writeln!(out, "precision    {:.4}", self.precision);
        let _ = writeln!(out, "recall       {:.4}", self.recall);
        let _ = writeln!(out, "F1           {:.4}", self.f1);
        let _ = writeln!(out, "mean IoU     {:.4}", self.mean_iou);
        let _ = writeln!(
            out,
            "TP {} FP {} FN {}",
            self.true_positives, self.false_positives, self.false_negatives
        );
        out
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

/// Batch size of the training configuration.
pub const DARKNET_BATCH_SIZE: u32 = 64;

/// Darknet YOLO settings derived from the number of classes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DarknetConfig {
    pub classes: u32,
    pub filters: u32,
    pub max_batches: u32,
    pub batch_size: u32,
}

impl DarknetConfig {
    pub fn for_classes(classes: u32) -> Result<Self> {
        Ok(DarknetConfig {
            classes,
            filters: darknet_filters(classes)?,
            max_batches: darknet_max_batches(classes)?,
            batch_size: DARKNET_BATCH_SIZE,
        })
    }
}

/// Filters of the convolutional layer before each YOLO layer: (classes + 5) * 3.
pub fn darknet_filters(classes: u32) -> Result<u32> {
    if classes < 1 {
        return Err(Error::InvalidClassCount(classes));
    }
    Ok((classes + 5) * 3)
}

/// Training length: classes * 2000 batches.
pub fn darknet_max_batches(classes: u32) -> Result<u32> {
    if classes < 1 {
        return Err(Error::InvalidClassCount(classes));
    }
    Ok(classes * 2000)
}

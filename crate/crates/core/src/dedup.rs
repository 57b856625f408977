//! Removal of overlapping widget detections before layout inference.

use crate::detection::{intersection_area, Detection, SketchDetections};

/// Overlap above this fraction of the smaller box means two detections
/// describe the same widget.
pub const MAX_OVERLAP_FRACTION: f64 = 0.5;

/// Shared area relative to the smaller of the two boxes.
pub fn overlap_fraction(a: &Detection, b: &Detection) -> f64 {
    let smaller = a.bbox.area().min(b.bbox.area());
    (intersection_area(&a.bbox, &b.bbox) / smaller).clamp(0.0, 1.0)
}

/// Drops every widget that overlaps a more confident one by more than half of
/// the smaller box.
///
/// Widgets are accepted greedily by descending confidence (larger area first
/// on ties, then input order); a candidate survives iff it conflicts with no
/// already accepted widget. `Screen` detections are never removed. Survivors
/// keep their input order.
pub fn eliminate_overlaps(input: &SketchDetections) -> SketchDetections {
    let dets = &input.detections;
    let mut ranked: Vec<usize> = (0..dets.len()).filter(|&i| dets[i].class.is_widget()).collect();
    ranked.sort_by(|&i, &j| {
        dets[j]
            .confidence
            .total_cmp(&dets[i].confidence)
            .then_with(|| dets[j].bbox.area().total_cmp(&dets[i].bbox.area()))
            .then(i.cmp(&j))
    });

    let mut keep = vec![false; dets.len()];
    let mut accepted: Vec<usize> = Vec::new();
    for i in ranked {
        let conflict = accepted
            .iter()
            .any(|&j| overlap_fraction(&dets[i], &dets[j]) > MAX_OVERLAP_FRACTION);
        if !conflict {
            accepted.push(i);
            keep[i] = true;
        }
    }
    for (i, d) in dets.iter().enumerate() {
        if !d.class.is_widget() {
            keep[i] = true;
        }
    }

    SketchDetections {
        image_id: input.image_id.clone(),
        image_width: input.image_width,
        image_height: input.image_height,
        detections: dets.iter().zip(keep).filter_map(|(d, k)| k.then_some(*d)).collect(),
    }
}

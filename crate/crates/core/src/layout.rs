//! Recursive grouping of detections into alternating vertical and horizontal
//! arrangements.
//!
//! [`align`] stacks components along its orientation. Components whose
//! projections perpendicular to the stacking direction overlap cannot be
//! stacked, so they (and everything transitively overlapping them) are
//! grouped and laid out again in the flipped orientation.

use std::cmp::Ordering;
use std::collections::VecDeque;
use std::fmt::Write as _;

use crate::detection::{BoundingBox, Detection, SketchDetections};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Orientation {
    Vertical,
    Horizontal,
}

impl Orientation {
    pub fn flip(self) -> Orientation {
        match self {
            Orientation::Vertical => Orientation::Horizontal,
            Orientation::Horizontal => Orientation::Vertical,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Orientation::Vertical => "Vertical",
            Orientation::Horizontal => "Horizontal",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum LayoutNode {
    Leaf(Detection),
    Arrangement {
        orientation: Orientation,
        children: Vec<LayoutNode>,
    },
}

impl LayoutNode {
    /// Leaf detections in pre-order.
    pub fn leaves(&self) -> Vec<&Detection> {
        let mut out = Vec::new();
        self.collect_leaves(&mut out);
        out
    }

    fn collect_leaves<'a>(&'a self, out: &mut Vec<&'a Detection>) {
        match self {
            LayoutNode::Leaf(d) => out.push(d),
            LayoutNode::Arrangement { children, .. } => {
                for c in children {
                    c.collect_leaves(out);
                }
            }
        }
    }

    pub fn leaf_count(&self) -> usize {
        match self {
            LayoutNode::Leaf(_) => 1,
            LayoutNode::Arrangement { children, .. } => children.iter().map(LayoutNode::leaf_count).sum(),
        }
    }

    pub fn arrangement_count(&self) -> usize {
        match self {
            LayoutNode::Leaf(_) => 0,
            LayoutNode::Arrangement { children, .. } => {
                1 + children.iter().map(LayoutNode::arrangement_count).sum::<usize>()
            }
        }
    }

    /// Tightest box around all leaves; `None` for an arrangement without leaves.
    pub fn bounding_region(&self) -> Option<BoundingBox> {
        match self {
            LayoutNode::Leaf(d) => Some(d.bbox),
            LayoutNode::Arrangement { children, .. } => children
                .iter()
                .filter_map(LayoutNode::bounding_region)
                .reduce(|a, b| a.union(&b)),
        }
    }

    /// Indented text outline, one node per line.
    pub fn outline(&self) -> String {
        let mut out = String::new();
        self.write_outline(0, &mut out);
        out
    }

    fn write_outline(&self, depth: usize, out: &mut String) {
        let indent = "  ".repeat(depth);
        match self {
            LayoutNode::Leaf(d) => {
                let _ = writeln!(out, "{indent}{} {:.2} {}", d.class, d.confidence, fmt_box(&d.bbox));
            }
            LayoutNode::Arrangement { orientation, children } => {
                match self.bounding_region() {
                    Some(b) => {
                        let _ = writeln!(out, "{indent}{} {}", orientation.as_str(), fmt_box(&b));
                    }
                    None => {
                        let _ = writeln!(out, "{indent}{} (empty)", orientation.as_str());
                    }
                }
                for c in children {
                    c.write_outline(depth + 1, out);
                }
            }
        }
    }
}

fn fmt_box(b: &BoundingBox) -> String {
    format!("[cx={:.1} cy={:.1} w={:.1} h={:.1}]", b.cx, b.cy, b.w, b.h)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LayoutConfig {
    /// Projection overlap (pixels) that must be exceeded for two components
    /// to count as aligned.
    pub align_tolerance: f64,
}

impl Default for LayoutConfig {
    fn default() -> Self {
        LayoutConfig { align_tolerance: 0.0 }
    }
}

/// Whether `a` and `b` share a band that prevents stacking them along `o`:
/// for vertical stacking their y-intervals overlap with positive length,
/// for horizontal stacking their x-intervals do.
pub fn is_aligned(a: &Detection, b: &Detection, o: Orientation) -> bool {
    is_aligned_within(a, b, o, 0.0)
}

pub fn is_aligned_within(a: &Detection, b: &Detection, o: Orientation, tolerance: f64) -> bool {
    let (a, b) = (&a.bbox, &b.bbox);
    let overlap = match o {
        Orientation::Vertical => a.bottom().min(b.bottom()) - a.top().max(b.top()),
        Orientation::Horizontal => a.right().min(b.right()) - a.left().max(b.left()),
    };
    overlap > tolerance
}

/// Lays out `components` along `o` with the default configuration.
pub fn align(components: &[Detection], o: Orientation) -> Result<LayoutNode> {
    align_with(components, o, &LayoutConfig::default())
}

pub fn align_with(components: &[Detection], o: Orientation, config: &LayoutConfig) -> Result<LayoutNode> {
    if components.is_empty() {
        return Err(Error::EmptyAlignment);
    }
    let items = components.iter().copied().enumerate().collect();
    Ok(Aligner { config }.align(items, o, false))
}

type Item = (usize, Detection);

struct Aligner<'a> {
    config: &'a LayoutConfig,
}

impl Aligner<'_> {
    /// `repeated` is set when the caller handed down its own complete set;
    /// such a call must not pass that set on again.
    fn align(&self, mut items: Vec<Item>, o: Orientation, repeated: bool) -> LayoutNode {
        items.sort_by(|a, b| sort_key(a, b, o));
        let total = items.len();
        let mut remaining: VecDeque<Item> = items.into();
        let mut children = Vec::new();

        while let Some(current) = remaining.pop_front() {
            let mut in_group = vec![false; remaining.len()];
            let mut queue = VecDeque::from([current]);
            while let Some(analyzed) = queue.pop_front() {
                for (k, candidate) in remaining.iter().enumerate() {
                    if !in_group[k] && is_aligned_within(&analyzed.1, &candidate.1, o, self.config.align_tolerance) {
                        in_group[k] = true;
                        queue.push_back(*candidate);
                    }
                }
            }

            if !in_group.contains(&true) {
                children.push(LayoutNode::Leaf(current.1));
                continue;
            }

            let mut group = Vec::new();
            let mut rest = VecDeque::new();
            for (item, grouped) in remaining.into_iter().zip(in_group) {
                if grouped {
                    group.push(item);
                } else {
                    rest.push_back(item);
                }
            }
            remaining = rest;
            group.push(current);

            let whole_set = group.len() == total;
            if whole_set && repeated {
                // No progress possible: every component overlaps in both projections.
                group.sort_by(|a, b| sort_key(a, b, o));
                return LayoutNode::Arrangement {
                    orientation: o,
                    children: group.into_iter().map(|(_, d)| LayoutNode::Leaf(d)).collect(),
                };
            }
            children.push(self.align(group, o.flip(), whole_set));
        }

        LayoutNode::Arrangement {
            orientation: o,
            children,
        }
    }
}

fn sort_key(a: &Item, b: &Item, o: Orientation) -> Ordering {
    let (da, db) = (&a.1.bbox, &b.1.bbox);
    let (pa, sa, pb, sb) = match o {
        Orientation::Vertical => (da.cy, da.cx, db.cy, db.cx),
        Orientation::Horizontal => (da.cx, da.cy, db.cx, db.cy),
    };
    pa.total_cmp(&pb).then(sa.total_cmp(&sb)).then(a.0.cmp(&b.0))
}

/// Layout of one screen: the canvas box plus a vertical root arrangement.
#[derive(Debug, Clone, PartialEq)]
pub struct ScreenLayout {
    pub screen_box: BoundingBox,
    pub canvas_width: u32,
    pub canvas_height: u32,
    pub root: LayoutNode,
}

impl ScreenLayout {
    /// True for a screen without widgets; its root has no children.
    pub fn is_empty(&self) -> bool {
        matches!(&self.root, LayoutNode::Arrangement { children, .. } if children.is_empty())
    }
}

/// Lays out every widget of an overlap-free sketch under a vertical root.
pub fn build_screen_layout(input: &SketchDetections, config: &LayoutConfig) -> ScreenLayout {
    let (w, h) = (f64::from(input.image_width), f64::from(input.image_height));
    let screen_box = input.screen().map(|d| d.bbox).unwrap_or(BoundingBox {
        cx: w / 2.0,
        cy: h / 2.0,
        w,
        h,
    });
    let widgets: Vec<Detection> = input.widgets().copied().collect();
    let root = if widgets.is_empty() {
        LayoutNode::Arrangement {
            orientation: Orientation::Vertical,
            children: Vec::new(),
        }
    } else {
        align_with(&widgets, Orientation::Vertical, config).expect("non-empty widget list")
    };
    ScreenLayout {
        screen_box,
        canvas_width: input.image_width,
        canvas_height: input.image_height,
        root,
    }
}

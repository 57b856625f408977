//! Layout inference checked against a line-by-line transcription of the
//! grouping pseudocode, plus structural invariants on random inputs.

use aiaforge_core::dedup::eliminate_overlaps;
use aiaforge_core::detection::{BoundingBox, ComponentClass, Detection, SketchDetections};
use aiaforge_core::layout::{align, LayoutNode, Orientation};
use proptest::prelude::*;

#[derive(Debug, PartialEq)]
enum Trace {
    Leaf(usize),
    Node(Orientation, Vec<Trace>),
}

/// Transcription of the pseudocode, working on indices into `all`.
/// `components` is a list, `currentAlignment` accumulates results,
/// `componentsToAnalyze` is a work list and `newComponents` the aligned set.
fn oracle(all: &[Detection], mut components: Vec<usize>, orientation: Orientation, caller_len: Option<usize>) -> Trace {
    let overlaps = |a: usize, b: usize| {
        let (p, q) = (&all[a].bbox, &all[b].bbox);
        let (lo, hi) = match orientation {
            Orientation::Vertical => (p.top().max(q.top()), p.bottom().min(q.bottom())),
            Orientation::Horizontal => (p.left().max(q.left()), p.right().min(q.right())),
        };
        hi - lo > 0.0
    };
    let key = |i: usize| {
        let b = &all[i].bbox;
        match orientation {
            Orientation::Vertical => (b.cy, b.cx, i),
            Orientation::Horizontal => (b.cx, b.cy, i),
        }
    };
    components.sort_by(|&a, &b| key(a).partial_cmp(&key(b)).unwrap());
    let size = components.len();
    let repeated = caller_len == Some(size);

    let mut current_alignment = Vec::new();
    while !components.is_empty() {
        let cur = components.remove(0);
        let mut to_analyze = vec![cur];
        let mut new_components: Vec<usize> = Vec::new();
        while !to_analyze.is_empty() {
            let analyzed = to_analyze.remove(0);
            for &component in &components {
                if overlaps(analyzed, component) && !new_components.contains(&component) {
                    to_analyze.push(component);
                    new_components.push(component);
                }
            }
        }
        if new_components.is_empty() {
            current_alignment.push(Trace::Leaf(cur));
        } else {
            components.retain(|c| !new_components.contains(c));
            new_components.push(cur);
            if repeated && new_components.len() == size {
                let mut all_sorted = new_components.clone();
                all_sorted.sort_by(|&a, &b| key(a).partial_cmp(&key(b)).unwrap());
                return Trace::Node(orientation, all_sorted.into_iter().map(Trace::Leaf).collect());
            }
            let n = new_components.len();
            let caller = if n == size { Some(size) } else { None };
            current_alignment.push(oracle(all, new_components, orientation.flip(), caller));
        }
    }
    Trace::Node(orientation, current_alignment)
}

/// Maps a layout tree back to input indices (boxes are distinct by construction).
fn to_trace(node: &LayoutNode, all: &[Detection]) -> Trace {
    match node {
        LayoutNode::Leaf(d) => Trace::Leaf(all.iter().position(|x| x == d).unwrap()),
        LayoutNode::Arrangement { orientation, children } => {
            Trace::Node(*orientation, children.iter().map(|c| to_trace(c, all)).collect())
        }
    }
}

fn det(cx: f64, cy: f64, w: f64, h: f64, conf: f64) -> Detection {
    Detection::new(ComponentClass::Button, conf, BoundingBox::new(cx, cy, w, h).unwrap()).unwrap()
}

fn arb_components(max: usize, extent: f64) -> impl Strategy<Value = Vec<Detection>> {
    prop::collection::vec(
        (0.0..400.0f64, 0.0..800.0f64, 5.0..extent, 5.0..extent, 0.0..1.0f64),
        1..=max,
    )
    .prop_map(|v| v.into_iter().map(|(cx, cy, w, h, c)| det(cx, cy, w, h, c)).collect())
}

fn deduped(components: Vec<Detection>) -> Vec<Detection> {
    let s = SketchDetections {
        image_id: "r".into(),
        image_width: 10_000,
        image_height: 10_000,
        detections: components,
    };
    eliminate_overlaps(&s).detections
}

fn check_sibling_order(node: &LayoutNode) -> bool {
    match node {
        LayoutNode::Leaf(_) => true,
        LayoutNode::Arrangement { orientation, children } => {
            let centers: Vec<f64> = children
                .iter()
                .map(|c| {
                    let r = c.bounding_region().unwrap();
                    match orientation {
                        Orientation::Vertical => r.cy,
                        Orientation::Horizontal => r.cx,
                    }
                })
                .collect();
            centers.windows(2).all(|w| w[0] <= w[1]) && children.iter().all(check_sibling_order)
        }
    }
}

fn no_empty_arrangements(node: &LayoutNode) -> bool {
    match node {
        LayoutNode::Leaf(_) => true,
        LayoutNode::Arrangement { children, .. } => !children.is_empty() && children.iter().all(no_empty_arrangements),
    }
}

#[test]
fn tall_component_beside_column() {
    let all = [
        det(100.0, 100.0, 80.0, 30.0, 0.9),
        det(100.0, 200.0, 80.0, 30.0, 0.9),
        det(300.0, 150.0, 80.0, 160.0, 0.9),
    ];
    let got = to_trace(&align(&all, Orientation::Vertical).unwrap(), &all);
    assert_eq!(got, oracle(&all, vec![0, 1, 2], Orientation::Vertical, None));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(2000))]

    #[test]
    fn matches_pseudocode_transcription(components in arb_components(6, 200.0)) {
        let all = deduped(components);
        prop_assume!(!all.is_empty());
        let got = to_trace(&align(&all, Orientation::Vertical).unwrap(), &all);
        let expected = oracle(&all, (0..all.len()).collect(), Orientation::Vertical, None);
        prop_assert_eq!(got, expected);
    }

    #[test]
    fn structural_invariants(components in arb_components(30, 150.0)) {
        let all = deduped(components);
        prop_assume!(!all.is_empty());
        let tree = align(&all, Orientation::Vertical).unwrap();
        let mut leaves: Vec<String> = tree.leaves().iter().map(|d| format!("{d:?}")).collect();
        let mut input: Vec<String> = all.iter().map(|d| format!("{d:?}")).collect();
        leaves.sort();
        input.sort();
        prop_assert_eq!(leaves, input);
        prop_assert!(check_sibling_order(&tree));
        prop_assert!(no_empty_arrangements(&tree));
        prop_assert_eq!(&tree, &align(&all, Orientation::Vertical).unwrap());
    }

    #[test]
    fn terminates_on_heavily_overlapping_boxes(components in arb_components(40, 600.0)) {
        // No overlap elimination: boxes overlap in both projections.
        let tree = align(&components, Orientation::Vertical).unwrap();
        prop_assert_eq!(tree.leaf_count(), components.len());
        prop_assert!(no_empty_arrangements(&tree));
    }
}

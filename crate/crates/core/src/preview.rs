//! SVG previews of detections and of inferred wireframes.

use std::fmt::Write as _;

use crate::detection::{BoundingBox, ComponentClass, SketchDetections};
use crate::layout::{LayoutNode, ScreenLayout};

/// Stroke color per class, indexed by [`ComponentClass::ordinal`].
pub const PALETTE: [&str; 10] = [
    "#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd", "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf",
];

/// Arrangement stroke shades, darkest at the root.
const DEPTH_SHADES: [&str; 5] = ["#202020", "#505050", "#808080", "#a0a0a0", "#c0c0c0"];

const FONT_SIZE: f64 = 12.0;

pub fn class_color(class: ComponentClass) -> &'static str {
    PALETTE[class.ordinal()]
}

fn header(out: &mut String, width: u32, height: u32) {
    let _ = writeln!(out, r#"<?xml version="1.0" encoding="UTF-8"?>"#);
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{width}" height="{height}" viewBox="0 0 {width} {height}">"#
    );
    let _ = writeln!(
        out,
        r##"<rect class="canvas" x="0" y="0" width="{width}" height="{height}" fill="#ffffff"/>"##
    );
}

fn rect_attrs(b: &BoundingBox) -> String {
    format!(r#"x="{}" y="{}" width="{}" height="{}""#, b.left(), b.top(), b.w, b.h)
}

fn label(out: &mut String, b: &BoundingBox, canvas_height: u32, color: &str, text: &str) {
    let x = b.left() + 2.0;
    let y = (b.top() + FONT_SIZE).min(f64::from(canvas_height));
    let _ = writeln!(
        out,
        r#"<text class="label" x="{x}" y="{y}" font-family="sans-serif" font-size="{FONT_SIZE}" fill="{color}">{text}</text>"#
    );
}

/// One labeled rectangle per detection, colored by class.
pub fn render_detections_svg(input: &SketchDetections) -> String {
    let mut out = String::new();
    header(&mut out, input.image_width, input.image_height);
    for d in &input.detections {
        let color = class_color(d.class);
        let _ = writeln!(
            out,
            r#"<rect class="detection" {} fill="none" stroke="{color}" stroke-width="2"/>"#,
            rect_attrs(&d.bbox)
        );
        label(
            &mut out,
            &d.bbox,
            input.image_height,
            color,
            &format!("{} {:.2}", d.class, d.confidence),
        );
    }
    out.push_str("</svg>\n");
    out
}

/// Dashed outlines for arrangements at their bounding regions, shaded by
/// nesting depth, and solid labeled boxes for leaves.
pub fn render_wireframe_svg(layout: &ScreenLayout) -> String {
    let mut out = String::new();
    header(&mut out, layout.canvas_width, layout.canvas_height);
    draw_node(&mut out, &layout.root, 0, layout.canvas_height);
    out.push_str("</svg>\n");
    out
}

fn draw_node(out: &mut String, node: &LayoutNode, depth: usize, canvas_height: u32) {
    match node {
        LayoutNode::Leaf(d) => {
            let color = class_color(d.class);
            let _ = writeln!(
                out,
                r#"<rect class="leaf" {} fill="{color}" fill-opacity="0.15" stroke="{color}" stroke-width="2"/>"#,
                rect_attrs(&d.bbox)
            );
            label(out, &d.bbox, canvas_height, color, d.class.as_str());
        }
        LayoutNode::Arrangement { orientation, children } => {
            if let Some(region) = node.bounding_region() {
                let shade = DEPTH_SHADES[depth.min(DEPTH_SHADES.len() - 1)];
                let _ = writeln!(
                    out,
                    r#"<rect class="arrangement {}" {} fill="none" stroke="{shade}" stroke-width="1" stroke-dasharray="6 4"/>"#,
                    orientation.as_str().to_lowercase(),
                    rect_attrs(&region)
                );
            }
            for c in children {
                draw_node(out, c, depth + 1, canvas_height);
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::detection::Detection;
    use crate::layout::{build_screen_layout, LayoutConfig};

    fn det(class: ComponentClass, cx: f64, cy: f64) -> Detection {
        Detection::new(class, 0.876, BoundingBox::new(cx, cy, 80.0, 30.0).unwrap()).unwrap()
    }

    fn count(svg: &str, needle: &str) -> usize {
        svg.matches(needle).count()
    }

    #[test]
    fn empty_scene() {
        let svg = render_detections_svg(&SketchDetections::new("e", 320, 480, vec![]).unwrap());
        assert_eq!(count(&svg, "<rect"), 1);
        assert!(svg.contains(r#"width="320" height="480""#));
    }

    #[test]
    fn detections_are_labeled() {
        let s = SketchDetections::new(
            "d",
            720,
            1280,
            vec![
                det(ComponentClass::Button, 100.0, 100.0),
                det(ComponentClass::Label, 300.0, 100.0),
                det(ComponentClass::Slider, 100.0, 400.0),
            ],
        )
        .unwrap();
        let svg = render_detections_svg(&s);
        assert_eq!(count(&svg, r#"<rect class="detection""#), 3);
        assert_eq!(count(&svg, "<text"), 3);
        assert!(svg.contains(">Button 0.88<"));
        assert!(svg.contains(&format!(r#"stroke="{}""#, PALETTE[ComponentClass::Slider.ordinal()])));
        assert_eq!(svg, render_detections_svg(&s));
    }

    #[test]
    fn wireframe_grid() {
        let s = SketchDetections::new(
            "g",
            720,
            1280,
            vec![
                det(ComponentClass::Button, 100.0, 100.0),
                det(ComponentClass::Button, 300.0, 100.0),
                det(ComponentClass::Button, 100.0, 300.0),
                det(ComponentClass::Button, 300.0, 300.0),
            ],
        )
        .unwrap();
        let svg = render_wireframe_svg(&build_screen_layout(&s, &LayoutConfig::default()));
        assert_eq!(count(&svg, r#"<rect class="arrangement"#), 3);
        assert_eq!(count(&svg, "stroke-dasharray"), 3);
        assert_eq!(count(&svg, r#"<rect class="leaf""#), 4);
        assert!(svg.contains(r#"<rect class="leaf" x="60" y="85" width="80" height="30""#));
    }

    #[test]
    fn single_leaf_wireframe() {
        let s = SketchDetections::new("one", 720, 1280, vec![det(ComponentClass::Map, 360.0, 600.0)]).unwrap();
        let svg = render_wireframe_svg(&build_screen_layout(&s, &LayoutConfig::default()));
        assert_eq!(count(&svg, r#"class="arrangement"#), 1);
        assert_eq!(count(&svg, r#"class="leaf""#), 1);
    }
}

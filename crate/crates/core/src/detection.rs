//! Detection records, bounding-box geometry and ingestion of detector output
//! and labelme annotation files.
//!
//! Boxes are stored in the center/extent form the detector emits. Everything
//! that enters through [`parse_detections`] or [`parse_labelme`] is clamped to
//! the image rectangle and carries at most one `Screen` detection.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// The nine widget classes plus the screen itself.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum ComponentClass {
    Label,
    Button,
    Image,
    TextBox,
    CheckBox,
    ListPicker,
    Slider,
    Switch,
    Map,
    Screen,
}

impl ComponentClass {
    pub const ALL: [ComponentClass; 10] = [
        ComponentClass::Label,
        ComponentClass::Button,
        ComponentClass::Image,
        ComponentClass::TextBox,
        ComponentClass::CheckBox,
        ComponentClass::ListPicker,
        ComponentClass::Slider,
        ComponentClass::Switch,
        ComponentClass::Map,
        ComponentClass::Screen,
    ];

    /// Canonical name used in every file format.
    pub fn as_str(self) -> &'static str {
        match self {
            ComponentClass::Label => "Label",
            ComponentClass::Button => "Button",
            ComponentClass::Image => "Image",
            ComponentClass::TextBox => "TextBox",
            ComponentClass::CheckBox => "CheckBox",
            ComponentClass::ListPicker => "ListPicker",
            ComponentClass::Slider => "Slider",
            ComponentClass::Switch => "Switch",
            ComponentClass::Map => "Map",
            ComponentClass::Screen => "Screen",
        }
    }

    pub fn is_widget(self) -> bool {
        self != ComponentClass::Screen
    }

    /// Position in [`ComponentClass::ALL`].
    pub fn ordinal(self) -> usize {
        self as usize
    }
}

impl fmt::Display for ComponentClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ComponentClass {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        ComponentClass::ALL
            .iter()
            .copied()
            .find(|c| c.as_str() == s)
            .ok_or_else(|| s.to_string())
    }
}

/// Axis-aligned box in pixels, described by its center and extent.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundingBox {
    pub cx: f64,
    pub cy: f64,
    pub w: f64,
    pub h: f64,
}

impl BoundingBox {
    pub fn new(cx: f64, cy: f64, w: f64, h: f64) -> Result<Self> {
        if ![cx, cy, w, h].iter().all(|v| v.is_finite()) {
            return Err(Error::InvalidBox(format!(
                "non-finite coordinate in ({cx}, {cy}, {w}, {h})"
            )));
        }
        if w <= 0.0 || h <= 0.0 {
            return Err(Error::InvalidBox(format!(
                "width and height must be positive, got {w}x{h}"
            )));
        }
        Ok(BoundingBox { cx, cy, w, h })
    }

    /// Box spanned by two opposite corners, in either order.
    pub fn from_corners(x1: f64, y1: f64, x2: f64, y2: f64) -> Result<Self> {
        BoundingBox::new((x1 + x2) / 2.0, (y1 + y2) / 2.0, (x2 - x1).abs(), (y2 - y1).abs())
    }

    fn from_edges(left: f64, top: f64, right: f64, bottom: f64) -> Result<Self> {
        BoundingBox::new((left + right) / 2.0, (top + bottom) / 2.0, right - left, bottom - top)
    }

    pub fn left(&self) -> f64 {
        self.cx - self.w / 2.0
    }

    pub fn top(&self) -> f64 {
        self.cy - self.h / 2.0
    }

    pub fn right(&self) -> f64 {
        self.cx + self.w / 2.0
    }

    pub fn bottom(&self) -> f64 {
        self.cy + self.h / 2.0
    }

    pub fn area(&self) -> f64 {
        self.w * self.h
    }

    /// Intersection with the rectangle `[0, width] x [0, height]`.
    ///
    /// Fails when nothing of the box remains inside.
    pub fn clamp_to(&self, width: f64, height: f64) -> Result<Self> {
        if self.left() >= 0.0 && self.top() >= 0.0 && self.right() <= width && self.bottom() <= height {
            return Ok(*self);
        }
        BoundingBox::from_edges(
            self.left().clamp(0.0, width),
            self.top().clamp(0.0, height),
            self.right().clamp(0.0, width),
            self.bottom().clamp(0.0, height),
        )
        .map_err(|_| Error::InvalidBox(format!("box {self:?} lies outside the {width}x{height} image")))
    }

    /// Smallest box covering both.
    pub fn union(&self, other: &BoundingBox) -> BoundingBox {
        let left = self.left().min(other.left());
        let top = self.top().min(other.top());
        let right = self.right().max(other.right());
        let bottom = self.bottom().max(other.bottom());
        BoundingBox {
            cx: (left + right) / 2.0,
            cy: (top + bottom) / 2.0,
            w: right - left,
            h: bottom - top,
        }
    }
}

/// Area shared by two boxes; zero when they are disjoint or only touch.
pub fn intersection_area(a: &BoundingBox, b: &BoundingBox) -> f64 {
    let overlap_x = a.right().min(b.right()) - a.left().max(b.left());
    let overlap_y = a.bottom().min(b.bottom()) - a.top().max(b.top());
    overlap_x.max(0.0) * overlap_y.max(0.0)
}

/// Intersection over union (Jaccard index of the two areas).
pub fn iou(a: &BoundingBox, b: &BoundingBox) -> f64 {
    let inter = intersection_area(a, b);
    // Areas from the same edge arithmetic as the intersection, so iou(a, a) == 1 exactly.
    let edge_area = |r: &BoundingBox| (r.right() - r.left()) * (r.bottom() - r.top());
    let union = edge_area(a) + edge_area(b) - inter;
    (inter / union).clamp(0.0, 1.0)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Detection {
    pub class: ComponentClass,
    pub confidence: f64,
    #[serde(rename = "box")]
    pub bbox: BoundingBox,
}

impl Detection {
    pub fn new(class: ComponentClass, confidence: f64, bbox: BoundingBox) -> Result<Self> {
        if !(0.0..=1.0).contains(&confidence) {
            return Err(Error::validation(
                "confidence",
                format!("{confidence} is outside [0, 1]"),
            ));
        }
        Ok(Detection {
            class,
            confidence,
            bbox,
        })
    }
}

/// Every detection found in one sketch image.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SketchDetections {
    pub image_id: String,
    pub image_width: u32,
    pub image_height: u32,
    pub detections: Vec<Detection>,
}

impl SketchDetections {
    /// Builds an ingested sketch: boxes clamped to the image, and only the
    /// most confident `Screen` kept (first one on ties).
    pub fn new(
        image_id: impl Into<String>,
        image_width: u32,
        image_height: u32,
        detections: Vec<Detection>,
    ) -> Result<Self> {
        if image_width == 0 || image_height == 0 {
            return Err(Error::validation(
                "width/height",
                format!("image dimensions must be positive, got {image_width}x{image_height}"),
            ));
        }
        let (w, h) = (f64::from(image_width), f64::from(image_height));
        let mut clamped = Vec::with_capacity(detections.len());
        for (i, d) in detections.into_iter().enumerate() {
            let bbox = d
                .bbox
                .clamp_to(w, h)
                .map_err(|e| Error::validation(format!("detections[{i}]"), e.to_string()))?;
            clamped.push(Detection { bbox, ..d });
        }

        let best_screen = clamped
            .iter()
            .enumerate()
            .filter(|(_, d)| d.class == ComponentClass::Screen)
            .fold(None::<(usize, f64)>, |best, (i, d)| match best {
                Some((_, c)) if c >= d.confidence => best,
                _ => Some((i, d.confidence)),
            })
            .map(|(i, _)| i);
        let detections = clamped
            .into_iter()
            .enumerate()
            .filter(|(i, d)| d.class != ComponentClass::Screen || Some(*i) == best_screen)
            .map(|(_, d)| d)
            .collect();

        Ok(SketchDetections {
            image_id: image_id.into(),
            image_width,
            image_height,
            detections,
        })
    }

    pub fn screen(&self) -> Option<&Detection> {
        self.detections.iter().find(|d| d.class == ComponentClass::Screen)
    }

    pub fn widgets(&self) -> impl Iterator<Item = &Detection> {
        self.detections.iter().filter(|d| d.class.is_widget())
    }

    /// Serializes into the detection document format read by [`parse_detections`].
    pub fn to_detection_json(&self) -> String {
        let doc = DetectionDocument {
            image: self.image_id.clone(),
            width: self.image_width,
            height: self.image_height,
            detections: self
                .detections
                .iter()
                .map(|d| DetectionEntry {
                    class: d.class.as_str().to_string(),
                    confidence: d.confidence,
                    cx: d.bbox.cx,
                    cy: d.bbox.cy,
                    w: d.bbox.w,
                    h: d.bbox.h,
                })
                .collect(),
        };
        serde_json::to_string_pretty(&doc).expect("detection document serializes")
    }
}

#[derive(Serialize, Deserialize)]
struct DetectionDocument {
    image: String,
    width: u32,
    height: u32,
    detections: Vec<DetectionEntry>,
}

#[derive(Serialize, Deserialize)]
struct DetectionEntry {
    class: String,
    confidence: f64,
    cx: f64,
    cy: f64,
    w: f64,
    h: f64,
}

fn parse_class(field: String, value: &str) -> Result<ComponentClass> {
    value.parse().map_err(|value| Error::UnknownClass { field, value })
}

/// Reads a detector-output document (`image`, `width`, `height`, `detections`).
pub fn parse_detections(text: &str) -> Result<SketchDetections> {
    let doc: DetectionDocument = serde_json::from_str(text)?;
    let mut detections = Vec::with_capacity(doc.detections.len());
    for (i, e) in doc.detections.iter().enumerate() {
        let class = parse_class(format!("detections[{i}].class"), &e.class)?;
        if !(0.0..=1.0).contains(&e.confidence) {
            return Err(Error::validation(
                format!("detections[{i}].confidence"),
                format!("{} is outside [0, 1]", e.confidence),
            ));
        }
        let bbox = BoundingBox::new(e.cx, e.cy, e.w, e.h)
            .map_err(|err| Error::validation(format!("detections[{i}]"), err.to_string()))?;
        detections.push(Detection {
            class,
            confidence: e.confidence,
            bbox,
        });
    }
    SketchDetections::new(doc.image, doc.width, doc.height, detections)
}

#[derive(Deserialize)]
struct LabelmeDocument {
    #[serde(rename = "imageWidth")]
    image_width: u32,
    #[serde(rename = "imageHeight")]
    image_height: u32,
    #[serde(rename = "imagePath", default)]
    image_path: Option<String>,
    shapes: Vec<LabelmeShape>,
}

#[derive(Deserialize)]
struct LabelmeShape {
    label: String,
    points: Vec<[f64; 2]>,
    shape_type: String,
}

/// Reads a labelme annotation file as ground truth (confidence 1.0).
///
/// The image id is the file stem of `imagePath` when present, else empty.
pub fn parse_labelme(text: &str) -> Result<SketchDetections> {
    let doc: LabelmeDocument = serde_json::from_str(text)?;
    let mut detections = Vec::with_capacity(doc.shapes.len());
    for (i, shape) in doc.shapes.iter().enumerate() {
        if shape.shape_type != "rectangle" {
            return Err(Error::validation(
                format!("shapes[{i}].shape_type"),
                format!("only rectangle shapes are supported, got {:?}", shape.shape_type),
            ));
        }
        let class = parse_class(format!("shapes[{i}].label"), &shape.label)?;
        let [[x1, y1], [x2, y2]] = shape.points[..] else {
            return Err(Error::validation(
                format!("shapes[{i}].points"),
                format!("rectangle needs exactly 2 points, got {}", shape.points.len()),
            ));
        };
        let bbox = BoundingBox::from_corners(x1, y1, x2, y2)
            .map_err(|err| Error::validation(format!("shapes[{i}].points"), err.to_string()))?;
        detections.push(Detection {
            class,
            confidence: 1.0,
            bbox,
        });
    }
    let image_id = doc
        .image_path
        .as_deref()
        .map(|p| {
            let name = p.rsplit(['/', '\\']).next().unwrap_or(p);
            name.rsplit_once('.').map_or(name, |(stem, _)| stem).to_string()
        })
        .unwrap_or_default();
    SketchDetections::new(image_id, doc.image_width, doc.image_height, detections)
}

/// Which document schema a JSON text follows.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DocumentKind {
    Detections,
    Labelme,
}

/// Detects the schema by the presence of `shapes` or `detections`.
pub fn detect_kind(text: &str) -> Result<DocumentKind> {
    let value: serde_json::Value = serde_json::from_str(text)?;
    let obj = value
        .as_object()
        .ok_or_else(|| Error::validation("document", "top level must be an object"))?;
    if obj.contains_key("shapes") {
        Ok(DocumentKind::Labelme)
    } else if obj.contains_key("detections") {
        Ok(DocumentKind::Detections)
    } else {
        Err(Error::validation(
            "document",
            "neither a detection document (`detections`) nor a labelme file (`shapes`)",
        ))
    }
}

/// Parses either schema, chosen by [`detect_kind`].
pub fn parse_any(text: &str) -> Result<SketchDetections> {
    match detect_kind(text)? {
        DocumentKind::Detections => parse_detections(text),
        DocumentKind::Labelme => parse_labelme(text),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn bx(cx: f64, cy: f64, w: f64, h: f64) -> BoundingBox {
        BoundingBox::new(cx, cy, w, h).unwrap()
    }

    #[test]
    fn class_names_round_trip() {
        assert_eq!(ComponentClass::ALL.len(), 10);
        for c in ComponentClass::ALL {
            assert_eq!(c.as_str().parse::<ComponentClass>().unwrap(), c);
        }
        assert_eq!(ComponentClass::ALL.iter().filter(|c| !c.is_widget()).count(), 1);
        assert!("button".parse::<ComponentClass>().is_err());
    }

    #[test]
    fn single_button_document() {
        let text = r#"{"image":"s1","width":720,"height":1280,"detections":[
            {"class":"Button","confidence":0.93,"cx":360,"cy":200,"w":300,"h":80}]}"#;
        let s = parse_detections(text).unwrap();
        assert_eq!(s.image_id, "s1");
        assert_eq!(s.detections.len(), 1);
        let d = s.detections[0];
        assert_eq!(d.class, ComponentClass::Button);
        assert_eq!(d.confidence, 0.93);
        assert_eq!(d.bbox, bx(360.0, 200.0, 300.0, 80.0));
    }

    #[test]
    fn keeps_most_confident_screen() {
        let text = r#"{"image":"s","width":100,"height":100,"detections":[
            {"class":"Screen","confidence":0.7,"cx":50,"cy":50,"w":90,"h":90},
            {"class":"Label","confidence":0.5,"cx":20,"cy":20,"w":10,"h":10},
            {"class":"Screen","confidence":0.9,"cx":50,"cy":50,"w":80,"h":80}]}"#;
        let s = parse_detections(text).unwrap();
        let screens: Vec<_> = s
            .detections
            .iter()
            .filter(|d| d.class == ComponentClass::Screen)
            .collect();
        assert_eq!(screens.len(), 1);
        assert_eq!(screens[0].confidence, 0.9);
        assert_eq!(s.detections[0].class, ComponentClass::Label);
    }

    #[test]
    fn screen_tie_keeps_first() {
        let text = r#"{"image":"s","width":100,"height":100,"detections":[
            {"class":"Screen","confidence":0.8,"cx":50,"cy":50,"w":90,"h":90},
            {"class":"Screen","confidence":0.8,"cx":50,"cy":50,"w":80,"h":80}]}"#;
        let s = parse_detections(text).unwrap();
        assert_eq!(s.detections.len(), 1);
        assert_eq!(s.detections[0].bbox.w, 90.0);
    }

    #[test]
    fn rejects_out_of_range_confidence() {
        let text = r#"{"image":"s","width":100,"height":100,"detections":[
            {"class":"Button","confidence":1.2,"cx":50,"cy":50,"w":10,"h":10}]}"#;
        let err = parse_detections(text).unwrap_err();
        assert!(
            matches!(err, Error::Validation { ref field, .. } if field == "detections[0].confidence"),
            "{err}"
        );
    }

    #[test]
    fn rejects_unknown_class_by_name() {
        let text = r#"{"image":"s","width":100,"height":100,"detections":[
            {"class":"Menu","confidence":0.5,"cx":50,"cy":50,"w":10,"h":10}]}"#;
        let err = parse_detections(text).unwrap_err();
        assert!(err.to_string().contains("\"Menu\""), "{err}");
    }

    #[test]
    fn malformed_document_reports_position() {
        let err = parse_detections("{\n  \"image\": \"s\",\n  \"width\": }").unwrap_err();
        match err {
            Error::Syntax { line, .. } => assert_eq!(line, 3),
            other => panic!("unexpected {other}"),
        }
        assert!(matches!(
            parse_detections(r#"{"image":"s","width":1,"height":1}"#),
            Err(Error::Syntax { .. })
        ));
    }

    #[test]
    fn clamps_boxes_to_image() {
        let text = r#"{"image":"s","width":100,"height":50,"detections":[
            {"class":"Image","confidence":0.5,"cx":90,"cy":-5,"w":40,"h":20}]}"#;
        let b = parse_detections(text).unwrap().detections[0].bbox;
        assert_eq!((b.left(), b.top(), b.right(), b.bottom()), (70.0, 0.0, 100.0, 5.0));
    }

    #[test]
    fn box_entirely_outside_is_rejected() {
        let text = r#"{"image":"s","width":100,"height":50,"detections":[
            {"class":"Image","confidence":0.5,"cx":300,"cy":10,"w":40,"h":20}]}"#;
        assert!(parse_detections(text).is_err());
    }

    fn labelme(shapes: &str) -> String {
        format!(
            r#"{{"version":"4.5.6","imagePath":"dir/sketch_07.jpg","imageData":null,"imageWidth":720,"imageHeight":1280,"shapes":[{shapes}]}}"#
        )
    }

    #[test]
    fn labelme_rectangle() {
        let s = parse_labelme(&labelme(
            r#"{"label":"Button","points":[[10,20],[110,70]],"shape_type":"rectangle","flags":{}}"#,
        ))
        .unwrap();
        assert_eq!(s.image_id, "sketch_07");
        assert_eq!(
            s.detections,
            vec![Detection::new(ComponentClass::Button, 1.0, bx(60.0, 45.0, 100.0, 50.0)).unwrap()]
        );

        let reversed = parse_labelme(&labelme(
            r#"{"label":"Button","points":[[110,70],[10,20]],"shape_type":"rectangle"}"#,
        ))
        .unwrap();
        assert_eq!(reversed.detections, s.detections);
    }

    #[test]
    fn labelme_errors() {
        let unknown = parse_labelme(&labelme(
            r#"{"label":"Menu","points":[[10,20],[110,70]],"shape_type":"rectangle"}"#,
        ));
        assert!(matches!(unknown, Err(Error::UnknownClass { ref value, .. }) if value == "Menu"));

        let polygon = parse_labelme(&labelme(
            r#"{"label":"Button","points":[[10,20],[110,70],[5,5]],"shape_type":"polygon"}"#,
        ));
        assert!(matches!(polygon, Err(Error::Validation { ref field, .. }) if field.ends_with("shape_type")));

        let flat = parse_labelme(&labelme(
            r#"{"label":"Button","points":[[10,20],[110,20]],"shape_type":"rectangle"}"#,
        ));
        assert!(flat.is_err());
    }

    #[test]
    fn intersection_examples() {
        let a = bx(1.0, 1.0, 2.0, 2.0);
        assert_eq!(intersection_area(&a, &a), 4.0);
        assert_eq!(intersection_area(&a, &bx(2.0, 1.0, 2.0, 2.0)), 2.0);
        assert_eq!(
            intersection_area(&bx(0.0, 0.0, 1.0, 1.0), &bx(10.0, 10.0, 1.0, 1.0)),
            0.0
        );
    }

    #[test]
    fn iou_examples() {
        let a = bx(1.0, 1.0, 2.0, 2.0);
        assert_eq!(iou(&a, &a), 1.0);
        assert!((iou(&a, &bx(2.0, 1.0, 2.0, 2.0)) - 1.0 / 3.0).abs() < 1e-12);
        assert_eq!(iou(&bx(0.0, 0.0, 1.0, 1.0), &bx(10.0, 10.0, 1.0, 1.0)), 0.0);
    }

    #[test]
    fn detect_schema() {
        assert_eq!(detect_kind(&labelme("")).unwrap(), DocumentKind::Labelme);
        assert_eq!(
            detect_kind(r#"{"image":"a","width":1,"height":1,"detections":[]}"#).unwrap(),
            DocumentKind::Detections
        );
        assert!(detect_kind("[]").is_err());
        assert!(detect_kind("{}").is_err());
    }

    fn arb_box() -> impl Strategy<Value = BoundingBox> {
        (0.0..500.0f64, 0.0..500.0f64, 0.5..200.0f64, 0.5..200.0f64).prop_map(|(cx, cy, w, h)| bx(cx, cy, w, h))
    }

    proptest! {
        #[test]
        fn iou_bounds_and_symmetry(a in arb_box(), b in arb_box()) {
            let v = iou(&a, &b);
            prop_assert!((0.0..=1.0).contains(&v));
            prop_assert_eq!(v, iou(&b, &a));
            prop_assert_eq!(iou(&a, &a), 1.0);
            prop_assert!(intersection_area(&a, &b) <= a.area().min(b.area()) + 1e-9);
        }

        #[test]
        fn labelme_corner_order_invariant(x1 in 0.0..700.0f64, y1 in 0.0..1200.0f64, dx in 1.0..20.0f64, dy in 1.0..80.0f64, flip_x: bool, flip_y: bool) {
            let (x2, y2) = (x1 + dx, y1 + dy);
            let (ax, bxx) = if flip_x { (x2, x1) } else { (x1, x2) };
            let (ay, by) = if flip_y { (y2, y1) } else { (y1, y2) };
            let a = parse_labelme(&labelme(&format!(r#"{{"label":"Label","points":[[{x1},{y1}],[{x2},{y2}]],"shape_type":"rectangle"}}"#))).unwrap();
            let b = parse_labelme(&labelme(&format!(r#"{{"label":"Label","points":[[{ax},{ay}],[{bxx},{by}]],"shape_type":"rectangle"}}"#))).unwrap();
            prop_assert_eq!(a.detections, b.detections);
        }

        #[test]
        fn detection_document_round_trip(
            entries in prop::collection::vec((0usize..9, 0.0..=1.0f64, 20.0..600.0f64, 20.0..1200.0f64, 1.0..20.0f64, 1.0..20.0f64), 0..12)
        ) {
            let detections = entries
                .into_iter()
                .map(|(c, conf, cx, cy, w, h)| Detection::new(ComponentClass::ALL[c], conf, bx(cx, cy, w, h)).unwrap())
                .collect();
            let s = SketchDetections::new("img", 720, 1280, detections).unwrap();
            let back = parse_detections(&s.to_detection_json()).unwrap();
            prop_assert_eq!(back, s);
        }
    }
}

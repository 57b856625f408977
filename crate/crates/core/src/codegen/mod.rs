//! Translation of screen layouts into App Inventor source files and the
//! packaged `.aia` project.

mod aia;
mod scm;
mod tables;
mod uuid;

use std::collections::{BTreeMap, HashMap};

pub use aia::{emit_bky, emit_properties, package_aia, AiaProject, MAX_SCREENS, PROPERTIES_PATH};
pub use scm::{build_scm_document, emit_scm, scm_json, scm_json_body, ScmDocument};
pub use tables::{ComponentEntry, FormatTables};
pub use uuid::{UuidGenerator, FORM_UUID};

use crate::detection::ComponentClass;
use crate::error::{Error, Result};
use crate::layout::{LayoutNode, Orientation, ScreenLayout};

/// Which App Inventor component realizes a detected `ListPicker`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ListStyle {
    #[default]
    ListPicker,
    Spinner,
}

/// Boxes wider than this share of the screen width fill their parent.
pub const DEFAULT_FILL_PARENT_THRESHOLD: f64 = 0.85;

#[derive(Debug, Clone, PartialEq)]
pub struct GenerationOptions {
    pub project_name: String,
    pub main_screen: String,
    pub list_style: ListStyle,
    pub author_slug: String,
    pub deterministic_uuids: bool,
    pub uuid_seed: u64,
    pub fill_parent_threshold: f64,
}

impl GenerationOptions {
    pub fn new(project_name: impl Into<String>) -> Self {
        GenerationOptions {
            project_name: project_name.into(),
            main_screen: "Screen1".to_string(),
            list_style: ListStyle::default(),
            author_slug: "anonymous".to_string(),
            deterministic_uuids: false,
            uuid_seed: 0,
            fill_parent_threshold: DEFAULT_FILL_PARENT_THRESHOLD,
        }
    }

    /// Generator for one project build, seeded in deterministic mode.
    pub fn uuid_generator(&self) -> UuidGenerator {
        if self.deterministic_uuids {
            UuidGenerator::seeded(self.uuid_seed)
        } else {
            UuidGenerator::from_entropy()
        }
    }
}

/// `[A-Za-z][A-Za-z0-9_]*`
pub fn is_identifier(s: &str) -> bool {
    let mut chars = s.chars();
    matches!(chars.next(), Some(c) if c.is_ascii_alphabetic()) && chars.all(|c| c.is_ascii_alphanumeric() || c == '_')
}

/// App Inventor dimension value.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SizeCode {
    Automatic,
    FillParent,
    Pixels(u32),
}

impl SizeCode {
    pub fn code(self) -> String {
        match self {
            SizeCode::Automatic => "-1".to_string(),
            SizeCode::FillParent => "-2".to_string(),
            SizeCode::Pixels(px) => px.to_string(),
        }
    }
}

/// One visual component of a `.scm` document.
#[derive(Debug, Clone, PartialEq)]
pub struct ComponentSpec {
    pub name: String,
    pub type_name: String,
    pub version: String,
    pub uuid: String,
    pub height: Option<SizeCode>,
    pub width: Option<SizeCode>,
    pub extra_properties: BTreeMap<String, String>,
    pub children: Vec<ComponentSpec>,
}

impl ComponentSpec {
    /// Pre-order traversal.
    pub fn iter(&self) -> impl Iterator<Item = &ComponentSpec> {
        let mut stack = vec![self];
        std::iter::from_fn(move || {
            let next = stack.pop()?;
            stack.extend(next.children.iter().rev());
            Some(next)
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ComponentMapping {
    pub type_name: &'static str,
    pub version: String,
    /// Image and Map keep the detected pixel height; everything else is automatic.
    pub keeps_detected_height: bool,
}

pub fn map_class_to_component(class: ComponentClass, options: &GenerationOptions) -> Result<ComponentMapping> {
    map_with_tables(class, options, FormatTables::pinned())
}

fn map_with_tables(
    class: ComponentClass,
    options: &GenerationOptions,
    tables: &FormatTables,
) -> Result<ComponentMapping> {
    let type_name = match class {
        ComponentClass::Screen => return Err(Error::NotAWidget(class)),
        ComponentClass::ListPicker => match options.list_style {
            ListStyle::ListPicker => "ListPicker",
            ListStyle::Spinner => "Spinner",
        },
        other => other.as_str(),
    };
    Ok(ComponentMapping {
        type_name,
        version: tables.component(type_name)?.version.clone(),
        keeps_detected_height: matches!(class, ComponentClass::Image | ComponentClass::Map),
    })
}

fn arrangement_type(o: Orientation) -> &'static str {
    match o {
        Orientation::Vertical => "VerticalArrangement",
        Orientation::Horizontal => "HorizontalArrangement",
    }
}

/// Builds the component tree placed under the Form; `None` for an empty screen.
pub fn layout_to_component_tree(
    layout: &ScreenLayout,
    options: &GenerationOptions,
    uuids: &mut UuidGenerator,
) -> Result<Option<ComponentSpec>> {
    if layout.is_empty() {
        return Ok(None);
    }
    let mut builder = TreeBuilder {
        layout,
        options,
        tables: FormatTables::pinned(),
        uuids,
        counters: HashMap::new(),
    };
    builder.node(&layout.root, true).map(Some)
}

struct TreeBuilder<'a> {
    layout: &'a ScreenLayout,
    options: &'a GenerationOptions,
    tables: &'a FormatTables,
    uuids: &'a mut UuidGenerator,
    counters: HashMap<&'static str, usize>,
}

impl TreeBuilder<'_> {
    fn name_for(&mut self, type_name: &'static str) -> String {
        let n = self.counters.entry(type_name).or_insert(0);
        *n += 1;
        format!("{type_name}{n}")
    }

    fn node(&mut self, node: &LayoutNode, is_root: bool) -> Result<ComponentSpec> {
        match node {
            LayoutNode::Arrangement { orientation, children } => {
                let type_name = arrangement_type(*orientation);
                let entry = self.tables.component(type_name)?;
                let (version, extra_properties) = (entry.version.clone(), entry.properties.clone());
                let name = self.name_for(type_name);
                let uuid = self.uuids.next_uuid();
                let children = children
                    .iter()
                    .map(|c| self.node(c, false))
                    .collect::<Result<Vec<_>>>()?;
                Ok(ComponentSpec {
                    name,
                    type_name: type_name.to_string(),
                    version,
                    uuid,
                    // The outermost arrangement fills the screen.
                    height: Some(if is_root {
                        SizeCode::FillParent
                    } else {
                        SizeCode::Automatic
                    }),
                    width: Some(SizeCode::FillParent),
                    extra_properties,
                    children,
                })
            }
            LayoutNode::Leaf(d) => {
                let mapping = map_with_tables(d.class, self.options, self.tables)?;
                let extra_properties = self.tables.component(mapping.type_name)?.properties.clone();
                let width = if d.bbox.w > self.options.fill_parent_threshold * self.layout.screen_box.w {
                    SizeCode::FillParent
                } else {
                    SizeCode::Automatic
                };
                let height = if mapping.keeps_detected_height {
                    SizeCode::Pixels((d.bbox.h.round() as u32).max(1))
                } else {
                    SizeCode::Automatic
                };
                Ok(ComponentSpec {
                    name: self.name_for(mapping.type_name),
                    type_name: mapping.type_name.to_string(),
                    version: mapping.version,
                    uuid: self.uuids.next_uuid(),
                    height: Some(height),
                    width: Some(width),
                    extra_properties,
                    children: Vec::new(),
                })
            }
        }
    }
}

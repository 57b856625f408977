use std::collections::BTreeMap;

use serde_json::{Map, Value};

use super::{layout_to_component_tree, ComponentSpec, FormatTables, GenerationOptions, UuidGenerator, FORM_UUID};
use crate::error::{Error, Result};
use crate::layout::ScreenLayout;

/// Contents of one screen's `.scm` file.
#[derive(Debug, Clone, PartialEq)]
pub struct ScmDocument {
    pub auth_url: Vec<String>,
    pub ya_version: String,
    pub form: ComponentSpec,
}

impl ScmDocument {
    pub const SOURCE: &'static str = "Form";
}

pub fn build_scm_document(
    screen_name: &str,
    layout: &ScreenLayout,
    options: &GenerationOptions,
    uuids: &mut UuidGenerator,
) -> Result<ScmDocument> {
    let tables = FormatTables::pinned();
    let children = layout_to_component_tree(layout, options, uuids)?.into_iter().collect();
    let form = ComponentSpec {
        name: screen_name.to_string(),
        type_name: "Form".to_string(),
        version: tables.form_version.clone(),
        uuid: FORM_UUID.to_string(),
        height: None,
        width: None,
        extra_properties: BTreeMap::from([
            ("AppName".to_string(), options.project_name.clone()),
            ("Title".to_string(), screen_name.to_string()),
        ]),
        children,
    };
    Ok(ScmDocument {
        auth_url: tables.auth_url.clone(),
        ya_version: tables.ya_version.clone(),
        form,
    })
}

fn component_json(c: &ComponentSpec) -> Value {
    let mut obj = Map::new();
    obj.insert("$Name".into(), c.name.clone().into());
    obj.insert("$Type".into(), c.type_name.clone().into());
    obj.insert("$Version".into(), c.version.clone().into());

    let mut props = c.extra_properties.clone();
    if let Some(h) = c.height {
        props.insert("Height".into(), h.code());
    }
    if let Some(w) = c.width {
        props.insert("Width".into(), w.code());
    }
    for (k, v) in props {
        obj.insert(k, v.into());
    }

    obj.insert("Uuid".into(), c.uuid.clone().into());
    if !c.children.is_empty() {
        obj.insert(
            "$Components".into(),
            Value::Array(c.children.iter().map(component_json).collect()),
        );
    }
    Value::Object(obj)
}

/// The JSON object wrapped by the `.scm` framing.
pub fn scm_json(doc: &ScmDocument) -> Value {
    let mut obj = Map::new();
    obj.insert(
        "authURL".into(),
        Value::Array(doc.auth_url.iter().cloned().map(Value::from).collect()),
    );
    obj.insert("YaVersion".into(), doc.ya_version.clone().into());
    obj.insert("Source".into(), ScmDocument::SOURCE.into());
    obj.insert("Properties".into(), component_json(&doc.form));
    Value::Object(obj)
}

/// Serializes a document with the `#|` / `$JSON` / `|#` framing App Inventor
/// expects on import.
pub fn emit_scm(doc: &ScmDocument) -> String {
    format!("#|\n$JSON\n{}\n|#", scm_json(doc))
}

/// Parses the JSON body out of framed `.scm` text.
pub fn scm_json_body(text: &str) -> Result<Value> {
    let malformed = |msg: &str| Error::validation("scm", msg.to_string());
    let mut lines = text.lines();
    if lines.next() != Some("#|") || lines.next() != Some("$JSON") {
        return Err(malformed("missing `#|` / `$JSON` header"));
    }
    let rest: Vec<&str> = lines.collect();
    match rest.split_last() {
        Some((&"|#", body)) => Ok(serde_json::from_str(&body.join("\n"))?),
        _ => Err(malformed("missing `|#` trailer")),
    }
}

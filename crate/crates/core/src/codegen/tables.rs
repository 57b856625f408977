use std::collections::BTreeMap;
use std::sync::OnceLock;

use serde::Deserialize;

use crate::error::{Error, Result};

const PINNED: &str = include_str!("../../formats.toml");

/// Version numbers and fixed values of the App Inventor file formats.
#[derive(Debug, Clone, Deserialize)]
pub struct FormatTables {
    pub ya_version: String,
    pub auth_url: Vec<String>,
    pub form_version: String,
    pub blocks_xml: String,
    pub project_properties: Vec<(String, String)>,
    pub components: BTreeMap<String, ComponentEntry>,
}

#[derive(Debug, Clone, Deserialize)]
pub struct ComponentEntry {
    pub version: String,
    #[serde(default)]
    pub properties: BTreeMap<String, String>,
}

impl FormatTables {
    /// The tables shipped with the crate.
    pub fn pinned() -> &'static FormatTables {
        static TABLES: OnceLock<FormatTables> = OnceLock::new();
        TABLES.get_or_init(|| FormatTables::from_toml(PINNED).expect("shipped formats.toml is valid"))
    }

    pub fn from_toml(text: &str) -> Result<FormatTables> {
        toml::from_str(text).map_err(|e| Error::FormatTable(e.to_string()))
    }

    pub fn component(&self, type_name: &str) -> Result<&ComponentEntry> {
        self.components
            .get(type_name)
            .ok_or_else(|| Error::FormatTable(format!("no entry for component type {type_name}")))
    }
}

use std::collections::HashSet;
use std::io::{Cursor, Write};

use zip::write::SimpleFileOptions;
use zip::{CompressionMethod, DateTime, ZipWriter};

use super::{build_scm_document, emit_scm, is_identifier, FormatTables, GenerationOptions, ScmDocument};
use crate::error::{Error, Result};
use crate::layout::ScreenLayout;

/// Screens per project, one per uploaded sketch.
pub const MAX_SCREENS: usize = 6;

pub const PROPERTIES_PATH: &str = "youngandroidproject/project.properties";

/// A named project and its ordered screens.
#[derive(Debug, Clone)]
pub struct AiaProject {
    pub options: GenerationOptions,
    pub screens: Vec<(String, ScreenLayout)>,
}

impl AiaProject {
    pub fn new(options: GenerationOptions, screens: Vec<(String, ScreenLayout)>) -> Result<Self> {
        let project = AiaProject { options, screens };
        project.validate()?;
        Ok(project)
    }

    pub fn validate(&self) -> Result<()> {
        let invalid = |msg: String| Err(Error::InvalidProject(msg));
        if self.screens.is_empty() {
            return invalid("a project needs at least one screen".into());
        }
        if self.screens.len() > MAX_SCREENS {
            return Err(Error::TooManyScreens {
                max: MAX_SCREENS,
                got: self.screens.len(),
            });
        }
        if !is_identifier(&self.options.project_name) {
            return invalid(format!(
                "project name {:?} is not a valid identifier",
                self.options.project_name
            ));
        }
        if !is_identifier(&self.options.author_slug) {
            return invalid(format!(
                "author {:?} is not a valid identifier",
                self.options.author_slug
            ));
        }
        let mut seen = HashSet::new();
        for (name, _) in &self.screens {
            if !is_identifier(name) {
                return invalid(format!("screen name {name:?} is not a valid identifier"));
            }
            if !seen.insert(name.as_str()) {
                return invalid(format!("duplicate screen name {name:?}"));
            }
        }
        if !seen.contains(self.options.main_screen.as_str()) {
            return invalid(format!(
                "main screen {:?} is not one of the project's screens",
                self.options.main_screen
            ));
        }
        Ok(())
    }

    /// Directory of the screen sources inside the archive.
    pub fn source_dir(&self) -> String {
        format!(
            "src/appinventor/ai_{}/{}",
            self.options.author_slug, self.options.project_name
        )
    }

    /// `.scm` documents in screen order, drawing Uuids from one generator.
    pub fn scm_documents(&self) -> Result<Vec<(String, ScmDocument)>> {
        self.validate()?;
        let mut uuids = self.options.uuid_generator();
        self.screens
            .iter()
            .map(|(name, layout)| {
                build_scm_document(name, layout, &self.options, &mut uuids).map(|doc| (name.clone(), doc))
            })
            .collect()
    }
}

/// Blocks file of a screen without any program logic.
pub fn emit_bky() -> String {
    FormatTables::pinned().blocks_xml.clone()
}

pub fn emit_properties(project: &AiaProject) -> String {
    let o = &project.options;
    let mut out = format!(
        "main=appinventor.ai_{}.{}.{}\nname={}\n",
        o.author_slug, o.project_name, o.main_screen, o.project_name
    );
    for (key, value) in &FormatTables::pinned().project_properties {
        out.push_str(key);
        out.push('=');
        out.push_str(&value.replace("{project}", &o.project_name));
        out.push('\n');
    }
    out
}

/// Zips the project: properties first, then `<screen>.scm` and
/// `<screen>.bky` per screen in project order. Entry timestamps are fixed, so
/// the bytes depend only on the project and the Uuids drawn.
pub fn package_aia(project: &AiaProject) -> Result<Vec<u8>> {
    let documents = project.scm_documents()?;
    let options = SimpleFileOptions::default()
        .compression_method(CompressionMethod::Deflated)
        .last_modified_time(DateTime::default())
        .unix_permissions(0o644);

    let mut zip = ZipWriter::new(Cursor::new(Vec::new()));
    zip.start_file(PROPERTIES_PATH, options)?;
    zip.write_all(emit_properties(project).as_bytes())?;

    let dir = project.source_dir();
    let bky = emit_bky();
    for (name, doc) in &documents {
        zip.start_file(format!("{dir}/{name}.scm"), options)?;
        zip.write_all(emit_scm(doc).as_bytes())?;
        zip.start_file(format!("{dir}/{name}.bky"), options)?;
        zip.write_all(bky.as_bytes())?;
    }
    Ok(zip.finish()?.into_inner())
}

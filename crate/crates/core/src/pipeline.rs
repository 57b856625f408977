//! Stage composition from ingested detections to a packaged project.

use crate::codegen::{package_aia, AiaProject, GenerationOptions};
use crate::dedup::eliminate_overlaps;
use crate::detection::SketchDetections;
use crate::error::Result;
use crate::layout::{build_screen_layout, LayoutConfig, ScreenLayout};

/// Overlap elimination followed by layout inference.
pub fn compile_screen(input: &SketchDetections, config: &LayoutConfig) -> ScreenLayout {
    build_screen_layout(&eliminate_overlaps(input), config)
}

/// Compiles named sketches into a validated project, one screen each.
pub fn build_project(
    screens: &[(String, SketchDetections)],
    options: GenerationOptions,
    config: &LayoutConfig,
) -> Result<AiaProject> {
    let layouts = screens
        .iter()
        .map(|(name, sketch)| (name.clone(), compile_screen(sketch, config)))
        .collect();
    AiaProject::new(options, layouts)
}

/// [`build_project`] followed by packaging into `.aia` bytes.
pub fn convert(
    screens: &[(String, SketchDetections)],
    options: GenerationOptions,
    config: &LayoutConfig,
) -> Result<Vec<u8>> {
    package_aia(&build_project(screens, options, config)?)
}

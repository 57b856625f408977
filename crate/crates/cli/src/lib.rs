//! Command-line driver: `convert`, `evaluate`, `preview` and `darknet`.

mod args;

use std::collections::{BTreeMap, HashSet};
use std::fs;
use std::path::{Path, PathBuf};

use aiaforge_core::codegen::package_aia;
use aiaforge_core::codegen::{is_identifier, GenerationOptions, ListStyle, MAX_SCREENS};
use aiaforge_core::detection::{parse_any, SketchDetections};
use aiaforge_core::layout::LayoutConfig;
use aiaforge_core::metrics::{evaluate, ApMethod, DarknetConfig, EvalConfig, EvalReport, MatchConfig};
use aiaforge_core::pipeline::{build_project, compile_screen};
use aiaforge_core::preview::{render_detections_svg, render_wireframe_svg};
use thiserror::Error;

pub use args::{parse_args, Cli, Command};

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{path}: {message}")]
    Input { path: PathBuf, message: String },
    #[error("{0}")]
    Invalid(String),
    #[error("cannot write {path}: {source}")]
    Output { path: PathBuf, source: std::io::Error },
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Input { .. } | CliError::Invalid(_) => 3,
            CliError::Output { .. } => 4,
        }
    }
}

pub type CliResult<T> = Result<T, CliError>;

#[derive(Debug, Clone, PartialEq)]
pub struct ConvertConfig {
    pub inputs: Vec<PathBuf>,
    pub output: PathBuf,
    pub screen_names: Option<Vec<String>>,
    pub options: GenerationOptions,
    pub layout: LayoutConfig,
    pub dump_layout: bool,
    pub preview: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EvaluateConfig {
    pub predictions: Vec<PathBuf>,
    pub ground_truth: Vec<PathBuf>,
    /// Report path without extension; `.txt` and `.json` are written.
    pub output: PathBuf,
    pub eval: EvalConfig,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PreviewConfig {
    pub inputs: Vec<PathBuf>,
    pub output_dir: PathBuf,
    pub layout: LayoutConfig,
    pub dump_layout: bool,
}

/// Parses a detection or labelme file. Sketches without an image id take
/// the file stem.
pub fn load_sketch(path: &Path) -> CliResult<SketchDetections> {
    let input_err = |message: String| CliError::Input {
        path: path.to_path_buf(),
        message,
    };
    let text = fs::read_to_string(path).map_err(|e| input_err(e.to_string()))?;
    let mut sketch = parse_any(&text).map_err(|e| input_err(e.to_string()))?;
    if sketch.image_id.is_empty() {
        sketch.image_id = file_stem(path);
    }
    Ok(sketch)
}

fn file_stem(path: &Path) -> String {
    path.file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default()
}

/// Writes through a temporary sibling file and renames it into place.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> CliResult<()> {
    let out_err = |source| CliError::Output {
        path: path.to_path_buf(),
        source,
    };
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(out_err)?;
    }
    let mut tmp = path.as_os_str().to_owned();
    tmp.push(format!(".tmp{}", std::process::id()));
    let tmp = PathBuf::from(tmp);
    fs::write(&tmp, bytes).map_err(out_err)?;
    fs::rename(&tmp, path).map_err(|e| {
        let _ = fs::remove_file(&tmp);
        out_err(e)
    })
}

/// Screen names in input order, validated.
pub fn resolve_screen_names(count: usize, names: Option<&[String]>) -> CliResult<Vec<String>> {
    let names: Vec<String> = match names {
        Some(n) if n.len() != count => {
            return Err(CliError::Usage(format!(
                "--screen-names lists {} names for {count} inputs",
                n.len()
            )))
        }
        Some(n) => n.to_vec(),
        None => (1..=count).map(|i| format!("Screen{i}")).collect(),
    };
    let mut seen = HashSet::new();
    for n in &names {
        if !is_identifier(n) {
            return Err(CliError::Usage(format!("screen name {n:?} is not a valid identifier")));
        }
        if !seen.insert(n) {
            return Err(CliError::Usage(format!("duplicate screen name {n:?}")));
        }
    }
    Ok(names)
}

pub fn run_convert(config: &ConvertConfig) -> CliResult<()> {
    if config.inputs.is_empty() {
        return Err(CliError::Usage("convert needs at least one input".into()));
    }
    if config.inputs.len() > MAX_SCREENS {
        return Err(CliError::Usage(format!(
            "a project holds at most {MAX_SCREENS} screens (one per sketch), got {} inputs",
            config.inputs.len()
        )));
    }
    let names = resolve_screen_names(config.inputs.len(), config.screen_names.as_deref())?;
    let mut options = config.options.clone();
    if !is_identifier(&options.project_name) {
        return Err(CliError::Usage(format!(
            "project name {:?} is not a valid identifier",
            options.project_name
        )));
    }
    if options.main_screen.is_empty() {
        options.main_screen = names[0].clone();
    } else if !names.contains(&options.main_screen) {
        return Err(CliError::Usage(format!(
            "main screen {:?} is not one of {names:?}",
            options.main_screen
        )));
    }

    let sketches = config
        .inputs
        .iter()
        .map(|p| load_sketch(p))
        .collect::<CliResult<Vec<_>>>()?;
    let screens: Vec<(String, SketchDetections)> = names.into_iter().zip(sketches).collect();

    let project = build_project(&screens, options, &config.layout).map_err(|e| CliError::Invalid(e.to_string()))?;
    let bytes = package_aia(&project).map_err(|e| CliError::Invalid(e.to_string()))?;
    write_atomic(&config.output, &bytes)?;

    let dir = config.output.parent().unwrap_or(Path::new(""));
    let stem = file_stem(&config.output);
    for ((name, sketch), (_, layout)) in screens.iter().zip(&project.screens) {
        if config.dump_layout {
            write_atomic(
                &dir.join(format!("{stem}.{name}.layout.txt")),
                layout.root.outline().as_bytes(),
            )?;
        }
        if config.preview {
            write_atomic(
                &dir.join(format!("{}.detections.svg", sketch.image_id)),
                render_detections_svg(sketch).as_bytes(),
            )?;
            write_atomic(
                &dir.join(format!("{}.wireframe.svg", sketch.image_id)),
                render_wireframe_svg(layout).as_bytes(),
            )?;
        }
    }
    Ok(())
}

/// Pairs predictions with ground truth by image id.
pub fn pair_by_image(
    predictions: Vec<SketchDetections>,
    ground_truth: Vec<SketchDetections>,
) -> CliResult<Vec<(SketchDetections, SketchDetections)>> {
    let mut gt: BTreeMap<String, SketchDetections> = BTreeMap::new();
    for g in ground_truth {
        let id = g.image_id.clone();
        if gt.insert(id.clone(), g).is_some() {
            return Err(CliError::Invalid(format!("duplicate ground truth for image {id:?}")));
        }
    }
    let mut pairs = Vec::new();
    let mut orphans = Vec::new();
    let mut seen = HashSet::new();
    for p in predictions {
        if !seen.insert(p.image_id.clone()) {
            return Err(CliError::Invalid(format!(
                "duplicate predictions for image {:?}",
                p.image_id
            )));
        }
        match gt.remove(&p.image_id) {
            Some(g) => pairs.push((p, g)),
            None => orphans.push(format!("prediction without ground truth: {}", p.image_id)),
        }
    }
    orphans.extend(
        gt.into_keys()
            .map(|id| format!("ground truth without prediction: {id}")),
    );
    if !orphans.is_empty() {
        return Err(CliError::Invalid(format!(
            "unmatched images:\n  {}",
            orphans.join("\n  ")
        )));
    }
    Ok(pairs)
}

pub fn run_evaluate(config: &EvaluateConfig) -> CliResult<EvalReport> {
    let load_all = |paths: &[PathBuf]| paths.iter().map(|p| load_sketch(p)).collect::<CliResult<Vec<_>>>();
    let pairs = pair_by_image(load_all(&config.predictions)?, load_all(&config.ground_truth)?)?;
    let report = evaluate(&pairs, &config.eval).map_err(|e| CliError::Invalid(e.to_string()))?;
    write_atomic(&config.output.with_extension("txt"), report.to_text().as_bytes())?;
    write_atomic(&config.output.with_extension("json"), report.to_json().as_bytes())?;
    Ok(report)
}

pub fn run_preview(config: &PreviewConfig) -> CliResult<Vec<PathBuf>> {
    let sketches = config
        .inputs
        .iter()
        .map(|p| load_sketch(p))
        .collect::<CliResult<Vec<_>>>()?;
    let mut written = Vec::new();
    for sketch in &sketches {
        let layout = compile_screen(sketch, &config.layout);
        let mut files = vec![
            (
                format!("{}.detections.svg", sketch.image_id),
                render_detections_svg(sketch),
            ),
            (
                format!("{}.wireframe.svg", sketch.image_id),
                render_wireframe_svg(&layout),
            ),
        ];
        if config.dump_layout {
            files.push((format!("{}.layout.txt", sketch.image_id), layout.root.outline()));
        }
        for (name, content) in files {
            let path = config.output_dir.join(name);
            write_atomic(&path, content.as_bytes())?;
            written.push(path);
        }
    }
    Ok(written)
}

pub fn run_darknet(classes: u32) -> CliResult<String> {
    let cfg = DarknetConfig::for_classes(classes).map_err(|e| CliError::Usage(e.to_string()))?;
    Ok(format!(
        "classes={}\nfilters={}\nmax_batches={}\nbatch={}\n",
        cfg.classes, cfg.filters, cfg.max_batches, cfg.batch_size
    ))
}

/// Runs a parsed command line; returns the process exit code.
pub fn run(cli: Cli) -> i32 {
    let result = match args::resolve(cli) {
        Ok(Command::Convert(c)) => run_convert(&c).map(|()| {
            eprintln!("wrote {}", c.output.display());
        }),
        Ok(Command::Evaluate(c)) => run_evaluate(&c).map(|report| print!("{}", report.to_text())),
        Ok(Command::Preview(c)) => run_preview(&c).map(|files| {
            for f in files {
                eprintln!("wrote {}", f.display());
            }
        }),
        Ok(Command::Darknet { classes }) => run_darknet(classes).map(|text| print!("{text}")),
        Err(e) => Err(e),
    };
    match result {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

pub(crate) fn list_style_from(s: &str) -> CliResult<ListStyle> {
    match s.to_ascii_lowercase().as_str() {
        "listpicker" => Ok(ListStyle::ListPicker),
        "spinner" => Ok(ListStyle::Spinner),
        other => Err(CliError::Usage(format!(
            "unknown list style {other:?} (listpicker|spinner)"
        ))),
    }
}

pub(crate) fn ap_method_from(s: &str) -> CliResult<ApMethod> {
    match s {
        "all-point" => Ok(ApMethod::AllPoint),
        "eleven-point" => Ok(ApMethod::ElevenPoint),
        other => Err(CliError::Usage(format!(
            "unknown AP method {other:?} (all-point|eleven-point)"
        ))),
    }
}

pub(crate) fn match_config(iou_threshold: f64, include_screen: bool) -> CliResult<MatchConfig> {
    if !(iou_threshold > 0.0 && iou_threshold < 1.0) {
        return Err(CliError::Usage(format!(
            "--iou-threshold {iou_threshold} is outside (0, 1)"
        )));
    }
    Ok(MatchConfig {
        iou_threshold,
        include_screen,
    })
}

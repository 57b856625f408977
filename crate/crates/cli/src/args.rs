use std::fs;
use std::path::{Path, PathBuf};

use aiaforge_core::codegen::{GenerationOptions, DEFAULT_FILL_PARENT_THRESHOLD};
use aiaforge_core::layout::LayoutConfig;
use aiaforge_core::metrics::EvalConfig;
use clap::{Args, Parser, Subcommand};
use serde::Deserialize;

use crate::{
    ap_method_from, list_style_from, match_config, CliError, CliResult, ConvertConfig, EvaluateConfig, PreviewConfig,
};

#[derive(Debug, Parser)]
#[command(
    name = "aiaforge",
    version,
    about = "Compile UI sketch detections into App Inventor projects"
)]
pub struct Cli {
    /// TOML file with default values for any flag; flags win.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,

    #[command(subcommand)]
    pub command: Sub,
}

#[derive(Debug, Subcommand)]
pub enum Sub {
    /// Build an .aia project from up to 6 detection or labelme files.
    Convert(ConvertArgs),
    /// Score predictions against ground truth.
    Evaluate(EvaluateArgs),
    /// Write detection and wireframe SVGs.
    Preview(PreviewArgs),
    /// Print Darknet layer settings for a class count.
    Darknet {
        #[arg(long, default_value_t = 10)]
        classes: u32,
    },
}

#[derive(Debug, Args)]
pub struct ConvertArgs {
    /// One file per screen, in screen order.
    #[arg(required = true)]
    pub inputs: Vec<PathBuf>,
    #[arg(short, long)]
    pub output: Option<PathBuf>,
    #[arg(long)]
    pub name: Option<String>,
    #[arg(long)]
    pub main_screen: Option<String>,
    #[arg(long, value_delimiter = ',')]
    pub screen_names: Option<Vec<String>>,
    /// listpicker or spinner
    #[arg(long)]
    pub list_style: Option<String>,
    #[arg(long)]
    pub author: Option<String>,
    /// Seeded Uuids, for reproducible archives.
    #[arg(long)]
    pub deterministic: bool,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Projection overlap in pixels below which components do not align.
    #[arg(long)]
    pub align_tolerance: Option<f64>,
    /// Share of the screen width above which a component fills its parent.
    #[arg(long)]
    pub fill_threshold: Option<f64>,
    #[arg(long)]
    pub dump_layout: bool,
    /// Also write detection and wireframe SVGs next to the archive.
    #[arg(long)]
    pub preview: bool,
}

#[derive(Debug, Args)]
pub struct EvaluateArgs {
    #[arg(long, num_args = 1.., required = true)]
    pub predictions: Vec<PathBuf>,
    #[arg(long, num_args = 1.., required = true)]
    pub ground_truth: Vec<PathBuf>,
    /// Report path; `.txt` and `.json` files are written.
    #[arg(short, long)]
    pub output: Option<PathBuf>,
    #[arg(long)]
    pub iou_threshold: Option<f64>,
    #[arg(long)]
    pub conf_threshold: Option<f64>,
    #[arg(long)]
    pub include_screen: bool,
    /// all-point or eleven-point
    #[arg(long)]
    pub ap_method: Option<String>,
}

#[derive(Debug, Args)]
pub struct PreviewArgs {
    #[arg(required = true)]
    pub inputs: Vec<PathBuf>,
    /// Output directory.
    #[arg(short, long)]
    pub output: Option<PathBuf>,
    #[arg(long)]
    pub align_tolerance: Option<f64>,
    #[arg(long)]
    pub dump_layout: bool,
}

/// Values accepted in the `--config` file.
#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub output: Option<PathBuf>,
    pub name: Option<String>,
    pub main_screen: Option<String>,
    pub screen_names: Option<Vec<String>>,
    pub list_style: Option<String>,
    pub author: Option<String>,
    pub deterministic: Option<bool>,
    pub seed: Option<u64>,
    pub align_tolerance: Option<f64>,
    pub fill_threshold: Option<f64>,
    pub dump_layout: Option<bool>,
    pub preview: Option<bool>,
    pub iou_threshold: Option<f64>,
    pub conf_threshold: Option<f64>,
    pub include_screen: Option<bool>,
    pub ap_method: Option<String>,
}

impl FileConfig {
    pub fn load(path: &Path) -> CliResult<FileConfig> {
        let text = fs::read_to_string(path).map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))?;
        toml::from_str(&text).map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Command {
    Convert(ConvertConfig),
    Evaluate(EvaluateConfig),
    Preview(PreviewConfig),
    Darknet { classes: u32 },
}

pub fn parse_args<I, T>(argv: I) -> Result<Cli, clap::Error>
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    Cli::try_parse_from(argv)
}

fn layout_config(tolerance: Option<f64>) -> CliResult<LayoutConfig> {
    let align_tolerance = tolerance.unwrap_or(0.0);
    if !(align_tolerance >= 0.0 && align_tolerance.is_finite()) {
        return Err(CliError::Usage(format!(
            "--align-tolerance {align_tolerance} must be a non-negative number"
        )));
    }
    Ok(LayoutConfig { align_tolerance })
}

/// Merges flags over the config file and fills in defaults.
pub fn resolve(cli: Cli) -> CliResult<Command> {
    let file = match &cli.config {
        Some(path) => FileConfig::load(path)?,
        None => FileConfig::default(),
    };
    match cli.command {
        Sub::Convert(a) => {
            let output = a.output.or(file.output);
            let name = a
                .name
                .or(file.name)
                .or_else(|| {
                    output
                        .as_deref()
                        .and_then(Path::file_stem)
                        .map(|s| s.to_string_lossy().into_owned())
                })
                .unwrap_or_else(|| "Project".to_string());
            let output = output.unwrap_or_else(|| PathBuf::from(format!("{name}.aia")));
            let list_style = match a.list_style.or(file.list_style) {
                Some(s) => list_style_from(&s)?,
                None => Default::default(),
            };
            let fill_parent_threshold = a
                .fill_threshold
                .or(file.fill_threshold)
                .unwrap_or(DEFAULT_FILL_PARENT_THRESHOLD);
            if !(fill_parent_threshold > 0.0 && fill_parent_threshold <= 1.0) {
                return Err(CliError::Usage(format!(
                    "--fill-threshold {fill_parent_threshold} is outside (0, 1]"
                )));
            }
            let options = GenerationOptions {
                project_name: name,
                main_screen: a.main_screen.or(file.main_screen).unwrap_or_default(),
                list_style,
                author_slug: a.author.or(file.author).unwrap_or_else(|| "anonymous".to_string()),
                deterministic_uuids: a.deterministic || file.deterministic.unwrap_or(false),
                uuid_seed: a.seed.or(file.seed).unwrap_or(0),
                fill_parent_threshold,
            };
            Ok(Command::Convert(ConvertConfig {
                inputs: a.inputs,
                output,
                screen_names: a.screen_names.or(file.screen_names),
                options,
                layout: layout_config(a.align_tolerance.or(file.align_tolerance))?,
                dump_layout: a.dump_layout || file.dump_layout.unwrap_or(false),
                preview: a.preview || file.preview.unwrap_or(false),
            }))
        }
        Sub::Evaluate(a) => {
            let defaults = EvalConfig::default();
            let confidence_threshold = a
                .conf_threshold
                .or(file.conf_threshold)
                .unwrap_or(defaults.confidence_threshold);
            if !(0.0..=1.0).contains(&confidence_threshold) {
                return Err(CliError::Usage(format!(
                    "--conf-threshold {confidence_threshold} is outside [0, 1]"
                )));
            }
            let eval = EvalConfig {
                matching: match_config(
                    a.iou_threshold
                        .or(file.iou_threshold)
                        .unwrap_or(defaults.matching.iou_threshold),
                    a.include_screen || file.include_screen.unwrap_or(false),
                )?,
                confidence_threshold,
                ap_method: match a.ap_method.or(file.ap_method) {
                    Some(m) => ap_method_from(&m)?,
                    None => defaults.ap_method,
                },
            };
            Ok(Command::Evaluate(EvaluateConfig {
                predictions: a.predictions,
                ground_truth: a.ground_truth,
                output: a.output.or(file.output).unwrap_or_else(|| PathBuf::from("report")),
                eval,
            }))
        }
        Sub::Preview(a) => Ok(Command::Preview(PreviewConfig {
            inputs: a.inputs,
            output_dir: a.output.or(file.output).unwrap_or_else(|| PathBuf::from(".")),
            layout: layout_config(a.align_tolerance.or(file.align_tolerance))?,
            dump_layout: a.dump_layout || file.dump_layout.unwrap_or(false),
        })),
        Sub::Darknet { classes } => Ok(Command::Darknet { classes }),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use aiaforge_core::codegen::ListStyle;

    fn convert(argv: &[&str]) -> ConvertConfig {
        match resolve(parse_args(argv).unwrap()).unwrap() {
            Command::Convert(c) => c,
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn convert_defaults() {
        let c = convert(&["aiaforge", "convert", "a.json", "b.json", "-o", "out/Test.aia"]);
        assert_eq!(c.options.project_name, "Test");
        assert_eq!(c.options.main_screen, "");
        assert_eq!(c.options.author_slug, "anonymous");
        assert_eq!(c.options.list_style, ListStyle::ListPicker);
        assert!(!c.options.deterministic_uuids);
        assert_eq!(c.inputs.len(), 2);
    }

    #[test]
    fn convert_flags() {
        let c = convert(&[
            "aiaforge",
            "convert",
            "a.json",
            "--name",
            "Demo",
            "--list-style",
            "spinner",
            "--deterministic",
            "--seed",
            "9",
            "--screen-names",
            "Home,Info",
            "--main-screen",
            "Info",
        ]);
        assert_eq!(c.output, PathBuf::from("Demo.aia"));
        assert_eq!(c.options.list_style, ListStyle::Spinner);
        assert!(c.options.deterministic_uuids);
        assert_eq!(c.options.uuid_seed, 9);
        assert_eq!(c.screen_names, Some(vec!["Home".to_string(), "Info".to_string()]));
        assert_eq!(c.options.main_screen, "Info");
    }

    #[test]
    fn flags_override_config_file() {
        let dir = std::env::temp_dir().join(format!("aiaforge-args-{}", std::process::id()));
        fs::create_dir_all(&dir).unwrap();
        let cfg = dir.join("cfg.toml");
        fs::write(
            &cfg,
            "name = \"FromFile\"\nauthor = \"someone\"\nlist_style = \"spinner\"\nseed = 3\n",
        )
        .unwrap();
        let c = convert(&[
            "aiaforge",
            "--config",
            cfg.to_str().unwrap(),
            "convert",
            "a.json",
            "--name",
            "Flag",
        ]);
        assert_eq!(c.options.project_name, "Flag");
        assert_eq!(c.options.author_slug, "someone");
        assert_eq!(c.options.list_style, ListStyle::Spinner);
        assert_eq!(c.options.uuid_seed, 3);

        fs::write(&cfg, "bogus = 1\n").unwrap();
        let err = resolve(parse_args(["aiaforge", "--config", cfg.to_str().unwrap(), "convert", "a.json"]).unwrap());
        assert!(matches!(err, Err(CliError::Usage(_))));
        fs::remove_dir_all(dir).unwrap();
    }

    #[test]
    fn bad_values_are_usage_errors() {
        for argv in [
            &["aiaforge", "convert", "a.json", "--list-style", "dropdown"][..],
            &[
                "aiaforge",
                "evaluate",
                "--predictions",
                "p",
                "--ground-truth",
                "g",
                "--iou-threshold",
                "1.5",
            ][..],
            &[
                "aiaforge",
                "evaluate",
                "--predictions",
                "p",
                "--ground-truth",
                "g",
                "--ap-method",
                "101",
            ][..],
        ] {
            let err = resolve(parse_args(argv).unwrap()).unwrap_err();
            assert_eq!(err.exit_code(), 2, "{argv:?}");
        }
        assert!(parse_args(["aiaforge", "convert"]).is_err());
    }

    #[test]
    fn evaluate_defaults() {
        match resolve(
            parse_args([
                "aiaforge",
                "evaluate",
                "--predictions",
                "p1",
                "p2",
                "--ground-truth",
                "g1",
                "g2",
            ])
            .unwrap(),
        )
        .unwrap()
        {
            Command::Evaluate(e) => {
                assert_eq!(e.predictions.len(), 2);
                assert_eq!(e.eval, EvalConfig::default());
                assert_eq!(e.output, PathBuf::from("report"));
            }
            other => panic!("{other:?}"),
        }
    }
}

//! Command line front end: loads a manifest and runs checks on it.

pub mod json;
pub mod manifest;
pub mod report;
pub mod tensors;

use std::ffi::OsString;
use std::path::PathBuf;

use acmetric::classify::classify;
use acmetric::curvature::OmegaSource;
use acmetric::{GeometryError, Slot, TensorGrid};
use clap::{Args, Parser, Subcommand};
use serde_json::{json, Value};

pub use manifest::{load_manifest, parse_manifest, Manifest, ManifestError};
pub use report::{run_check, RunReport, RunSettings};

pub const EXIT_PASS: i32 = 0;
pub const EXIT_IDENTITY_FAILURE: i32 = 1;
pub const EXIT_INPUT_ERROR: i32 = 2;

#[derive(Debug, Parser)]
#[command(
    name = "acmetric",
    version,
    about = "Checks almost contact metric structures given by a manifest"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    #[command(flatten)]
    pub flags: Flags,
}

#[derive(Debug, Args)]
pub struct Flags {
    /// Print the machine-readable JSON report.
    #[arg(long, global = true)]
    pub json: bool,
    /// Number of sample points (overrides the manifest).
    #[arg(long, global = true)]
    pub samples: Option<usize>,
    /// Sampling seed (overrides the manifest).
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Verdict tolerance (overrides the manifest).
    #[arg(long, global = true)]
    pub tol: Option<f64>,
    /// Source of the 2-form in the Einstein check: d_eta or fundamental_form.
    #[arg(long, global = true)]
    pub omega_source: Option<String>,
    /// A point as comma-separated coordinates.
    #[arg(long, global = true, allow_hyphen_values = true)]
    pub at: Option<String>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run every check and classify the structure.
    Check { manifest: PathBuf },
    /// Classify the structure.
    Classify { manifest: PathBuf },
    /// Print a named tensor at a point.
    Tensor {
        manifest: PathBuf,
        #[arg(long)]
        name: String,
    },
    /// Run the Einstein check.
    Einstein { manifest: PathBuf },
    /// Rank at a point, or over the samples without `--at`.
    Rank { manifest: PathBuf },
}

impl Command {
    fn manifest(&self) -> &PathBuf {
        match self {
            Command::Check { manifest }
            | Command::Classify { manifest }
            | Command::Tensor { manifest, .. }
            | Command::Einstein { manifest }
            | Command::Rank { manifest } => manifest,
        }
    }
}

/// What the binary prints and how it exits.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Output {
    pub stdout: String,
    pub stderr: String,
    pub code: i32,
}

impl Output {
    fn ok(stdout: String) -> Self {
        Output {
            stdout,
            stderr: String::new(),
            code: EXIT_PASS,
        }
    }

    fn error(code: i32, message: impl std::fmt::Display) -> Self {
        Output {
            stdout: String::new(),
            stderr: format!("error: {message}\n"),
            code,
        }
    }
}

/// Parses `args` (including the program name) and runs the command.
pub fn execute<I, T>(args: I) -> Output
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    match Cli::try_parse_from(args) {
        Ok(cli) => run(&cli),
        Err(e) => {
            let code = if e.use_stderr() {
                EXIT_INPUT_ERROR
            } else {
                EXIT_PASS
            };
            let text = e.render().to_string();
            if e.use_stderr() {
                Output {
                    stdout: String::new(),
                    stderr: text,
                    code,
                }
            } else {
                Output::ok(text)
            }
        }
    }
}

fn settings(m: &Manifest, flags: &Flags) -> Result<RunSettings, String> {
    let samples = flags.samples.unwrap_or(m.samples);
    if samples == 0 {
        return Err("--samples must be at least 1".into());
    }
    let tolerance = flags.tol.unwrap_or(m.tolerance);
    if !(tolerance > 0.0 && tolerance.is_finite()) {
        return Err("--tol must be positive".into());
    }
    let omega_source = match &flags.omega_source {
        None => m.omega_source,
        Some(s) => OmegaSource::from_name(s).ok_or_else(|| {
            format!("--omega-source must be d_eta or fundamental_form, got `{s}`")
        })?,
    };
    Ok(RunSettings {
        samples,
        seed: flags.seed.unwrap_or(m.seed),
        tolerance,
        omega_source,
    })
}

fn parse_point(text: &str) -> Result<Vec<f64>, String> {
    text.split(',')
        .map(|t| {
            t.trim()
                .parse::<f64>()
                .map_err(|_| format!("--at: `{t}` is not a number"))
        })
        .collect()
}

fn geometry_exit(e: &GeometryError) -> i32 {
    match e {
        GeometryError::InconsistentCriteria { .. } => EXIT_IDENTITY_FAILURE,
        _ => EXIT_INPUT_ERROR,
    }
}

pub fn run(cli: &Cli) -> Output {
    let manifest = match load_manifest(cli.command.manifest()) {
        Ok(m) => m,
        Err(e) => return Output::error(EXIT_INPUT_ERROR, e),
    };
    let settings = match settings(&manifest, &cli.flags) {
        Ok(s) => s,
        Err(e) => return Output::error(EXIT_INPUT_ERROR, e),
    };
    let at = match cli.flags.at.as_deref().map(parse_point).transpose() {
        Ok(at) => at,
        Err(e) => return Output::error(EXIT_INPUT_ERROR, e),
    };
    match dispatch(
        &cli.command,
        &manifest,
        &settings,
        at.as_deref(),
        cli.flags.json,
    ) {
        Ok(out) => out,
        Err(e) => Output::error(geometry_exit(&e), e),
    }
}

fn render(value: Value, as_json: bool, human: impl FnOnce() -> String) -> String {
    if as_json {
        json::to_string(&value)
    } else {
        human()
    }
}

fn to_value(v: &impl serde::Serialize) -> Value {
    serde_json::to_value(v).expect("report types serialize")
}

fn dispatch(
    command: &Command,
    m: &Manifest,
    settings: &RunSettings,
    at: Option<&[f64]>,
    as_json: bool,
) -> Result<Output, GeometryError> {
    let s = &m.structure;
    match command {
        Command::Check { .. } => {
            let report = run_check(s, settings)?;
            let stdout = render(to_value(&report), as_json, || report::human(&report));
            let failed = report.failed_hard_identities();
            if failed.is_empty() {
                Ok(Output::ok(stdout))
            } else {
                Ok(Output {
                    stdout,
                    stderr: format!("error: hard identities failed: {}\n", failed.join(", ")),
                    code: EXIT_IDENTITY_FAILURE,
                })
            }
        }
        Command::Classify { .. } => {
            let c: report::ClassificationSummary =
                (&classify(s, settings.samples, settings.seed, settings.tolerance)?).into();
            let value = json!({
                "tool": to_value(&report::ToolInfo::default()),
                "seed": settings.seed,
                "samples": settings.samples,
                "tolerance": settings.tolerance,
                "classification": to_value(&c),
            });
            Ok(Output::ok(render(value, as_json, || {
                report::classification_table(&c)
            })))
        }
        Command::Einstein { .. } => {
            let e = report::einstein_section(s, settings)?;
            let value = json!({
                "tool": to_value(&report::ToolInfo::default()),
                "seed": settings.seed,
                "samples": settings.samples,
                "tolerance": settings.tolerance,
                "einstein": to_value(&e),
            });
            Ok(Output::ok(render(value, as_json, || {
                report::einstein_table(&e)
            })))
        }
        Command::Tensor { name, .. } => {
            let Some(x) = at else {
                return Ok(Output::error(EXIT_INPUT_ERROR, "tensor needs --at"));
            };
            let p = s.chart().point(x)?;
            let Some(parts) = tensors::named_tensor(s, name, &p, settings.omega_source)? else {
                return Ok(Output::error(
                    EXIT_INPUT_ERROR,
                    format!(
                        "unknown tensor `{name}`; known: {}",
                        tensors::TENSOR_NAMES.join(", ")
                    ),
                ));
            };
            let value = json!({
                "name": name,
                "point": x,
                "parts": parts
                    .iter()
                    .map(|(label, g)| (label.to_string(), grid_value(g)))
                    .collect::<serde_json::Map<_, _>>(),
            });
            Ok(Output::ok(render(value, as_json, || {
                let mut out = String::new();
                for (label, g) in &parts {
                    if parts.len() > 1 {
                        out.push_str(&format!("{label}\n"));
                    }
                    out.push_str(&g.to_string());
                }
                out
            })))
        }
        Command::Rank { .. } => match at {
            Some(x) => {
                let rank = s.chart().rank_at(&s.chart().point(x)?)?;
                let value = json!({"point": x, "rank": rank, "even": rank % 2 == 0});
                Ok(Output::ok(render(value, as_json, || format!("{rank}\n"))))
            }
            None => {
                let ranks = s
                    .chart()
                    .samples(settings.seed, settings.samples)?
                    .iter()
                    .map(|p| s.chart().rank_at(p))
                    .collect::<Result<Vec<_>, _>>()?;
                let value = json!({"seed": settings.seed, "samples": settings.samples, "per_sample": ranks});
                Ok(Output::ok(render(value, as_json, || {
                    ranks.iter().map(|r| format!("{r}\n")).collect()
                })))
            }
        },
    }
}

fn slot_name(s: Slot) -> &'static str {
    match s {
        Slot::FrameLower => "frame_lower",
        Slot::FrameUpper => "frame_upper",
        Slot::FullLower => "full_lower",
        Slot::FullUpper => "full_upper",
        Slot::CoordLower => "coord_lower",
        Slot::CoordUpper => "coord_upper",
    }
}

fn grid_value(g: &TensorGrid) -> Value {
    json!({
        "slots": g.slots().iter().map(|s| slot_name(*s)).collect::<Vec<_>>(),
        "shape": g.shape(),
        "data": g.data(),
    })
}

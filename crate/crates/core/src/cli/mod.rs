//! Command-line front end: bundle validation, end-to-end runs, batch
//! evaluation, synthetic scenes, and config templates.

pub mod bundle;
pub mod config;
pub mod eval;
pub mod run;
pub mod synth;

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

pub use bundle::{inspect_bundle, load_bundle, BundleManifest, ValidationReport, ViewFiles, MANIFEST};
pub use config::{InitialPoseConfig, PipelineConfig, ThumbSideSetting};
pub use eval::{eval_dirs, read_logs};
pub use run::{
    contact_map_file, pseudo_pose_file, render_outputs, run_intent, run_pipeline, write_outputs, IntentResult,
    PseudoPose, RunDiagnostics,
};
pub use synth::{ring_cameras, synth_scene, write_bundle, SynthOptions, SynthShape};

use crate::error::{Error, Result};

/// Environment variable holding the default config path.
pub const CONFIG_ENV: &str = "GRASPMAP_CONFIG";

pub const EXIT_OK: i32 = 0;
pub const EXIT_VALIDATION: i32 = 2;
pub const EXIT_PIPELINE: i32 = 3;
pub const EXIT_EVAL: i32 = 4;

#[derive(Debug, Parser)]
#[command(name = "graspmap", version, about = "Contact-map refinement, pseudo-pose IK, and grasp metrics")]
pub struct Cli {
    /// Pipeline config document (defaults to the bundle's own, then built-in defaults).
    #[arg(long, global = true, env = CONFIG_ENV)]
    pub config: Option<PathBuf>,
    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Check a scene bundle and list every problem.
    Validate {
        #[arg(long)]
        bundle: PathBuf,
    },
    /// Contact maps and pseudo poses for every intent of a bundle.
    Run {
        #[arg(long)]
        bundle: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Only this intent.
        #[arg(long)]
        intent: Option<usize>,
    },
    /// Metrics over a directory of episode logs.
    Eval {
        #[arg(long)]
        logs: PathBuf,
        /// Directory holding contact_map_<intent>.json files.
        #[arg(long)]
        maps: PathBuf,
        /// Object mesh, for hand-surface coverage.
        #[arg(long)]
        mesh: Option<PathBuf>,
        /// Report file (default: stdout).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Render a synthetic scene bundle.
    Synth(SynthArgs),
    /// Config templates.
    Config {
        #[command(subcommand)]
        action: ConfigAction,
    },
}

#[derive(Debug, Args)]
pub struct SynthArgs {
    #[arg(long, value_enum)]
    pub shape: SynthShape,
    #[arg(long, default_value_t = 64)]
    pub resolution: usize,
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 2)]
    pub intents: usize,
    /// Base confidence per intent, comma separated.
    #[arg(long, value_delimiter = ',', default_values_t = [0.9, 0.8])]
    pub confidence: Vec<f64>,
}

#[derive(Debug, Subcommand)]
pub enum ConfigAction {
    /// Write the full default config.
    Init {
        /// Destination file (default: stdout).
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn emit(out: Option<&Path>, text: &str) -> Result<()> {
    match out {
        Some(path) => fs::write(path, text).map_err(|e| Error::io(path, e)),
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout
                .write_all(text.as_bytes())
                .map_err(|e| Error::io("<stdout>", e))
        }
    }
}

fn resolve_config(flag: Option<&Path>, bundle: Option<&Path>) -> Result<PipelineConfig> {
    if let Some(path) = flag {
        return PipelineConfig::read(path);
    }
    if let Some(dir) = bundle {
        if let Ok(manifest) = BundleManifest::read(dir) {
            if let Some(cfg) = manifest.config {
                return PipelineConfig::read(&dir.join(cfg));
            }
        }
    }
    Ok(PipelineConfig::default())
}

fn fail(code: i32, err: impl std::fmt::Display) -> i32 {
    eprintln!("error: {err}");
    code
}

fn execute(cli: Cli) -> i32 {
    match cli.command {
        Command::Validate { bundle } => {
            let (_, report) = inspect_bundle(&bundle);
            for w in &report.warnings {
                eprintln!("warning: {w}");
            }
            let text = serde_json::to_string_pretty(&report).expect("report serializes") + "\n";
            if let Err(e) = emit(None, &text) {
                return fail(EXIT_PIPELINE, e);
            }
            if report.is_clean() {
                EXIT_OK
            } else {
                EXIT_VALIDATION
            }
        }
        Command::Run { bundle, out, intent } => {
            let cfg = match resolve_config(cli.config.as_deref(), Some(&bundle)) {
                Ok(c) => c,
                Err(e) => return fail(EXIT_VALIDATION, e),
            };
            let (scene, report) = inspect_bundle(&bundle);
            let Some(scene) = scene else {
                return fail(EXIT_VALIDATION, Error::Bundle(report.findings));
            };
            let results = match run_pipeline(&scene, &cfg, intent) {
                Ok(r) => r,
                Err(e) => return fail(EXIT_PIPELINE, e),
            };
            match write_outputs(&out, &render_outputs(&results, &report.warnings)) {
                Ok(paths) => {
                    for p in paths {
                        println!("{}", p.display());
                    }
                    EXIT_OK
                }
                Err(e) => fail(EXIT_PIPELINE, e),
            }
        }
        Command::Eval { logs, maps, mesh, out } => {
            let cfg = match resolve_config(cli.config.as_deref(), None) {
                Ok(c) => c,
                Err(e) => return fail(EXIT_VALIDATION, e),
            };
            match eval_dirs(&logs, &maps, mesh.as_deref(), &cfg.eval) {
                Ok(report) => {
                    let text = serde_json::to_string_pretty(&report).expect("report serializes") + "\n";
                    match emit(out.as_deref(), &text) {
                        Ok(()) => EXIT_OK,
                        Err(e) => fail(EXIT_EVAL, e),
                    }
                }
                Err(e) => fail(EXIT_EVAL, e),
            }
        }
        Command::Synth(args) => {
            let opts = SynthOptions {
                shape: args.shape,
                resolution: args.resolution,
                seed: args.seed,
                intents: args.intents,
                confidences: args.confidence,
                ..SynthOptions::default()
            };
            match synth_scene(&opts).and_then(|scene| write_bundle(&args.out, &scene)) {
                Ok(_) => EXIT_OK,
                Err(e @ Error::InvalidConfig(_)) => fail(EXIT_VALIDATION, e),
                Err(e) => fail(EXIT_PIPELINE, e),
            }
        }
        Command::Config {
            action: ConfigAction::Init { out },
        } => match emit(out.as_deref(), &PipelineConfig::default().to_json()) {
            Ok(()) => EXIT_OK,
            Err(e) => fail(EXIT_PIPELINE, e),
        },
    }
}

/// Parses `args` (including the program name) and runs the command.
/// Returns the process exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_VALIDATION } else { EXIT_OK };
        }
    };
    match cli.threads {
        Some(n) => match rayon::ThreadPoolBuilder::new().num_threads(n).build() {
            Ok(pool) => pool.install(|| execute(cli)),
            Err(e) => fail(EXIT_VALIDATION, e),
        },
        None => execute(cli),
    }
}

pub fn main() -> i32 {
    main_with_args(std::env::args_os())
}

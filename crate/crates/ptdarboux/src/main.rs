use clap::{Args, Parser, Subcommand};
use ptdarboux::config::{
    self, ConfigError, ModelKind, OutputFormat, RunConfig,
};
use ptdarboux::darboux::DarbouxError;
use ptdarboux::pipeline::{self, PipelineError};
use ptdarboux::report::{Check, ReportDocument};
use std::path::PathBuf;
use std::process::ExitCode;

/// Generate exactly solvable non-Hermitian PT-symmetric potentials through
/// higher-order Darboux transformations and verify them numerically.
#[derive(Parser)]
#[command(name = "ptdarboux", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    flags: Flags,
}

#[derive(Args)]
struct Flags {
    /// Model: pt-oscillator or scarf2
    #[arg(long, global = true)]
    model: Option<String>,
    /// Oscillator strength parameter
    #[arg(long, global = true)]
    alpha: Option<f64>,
    /// Imaginary shift of the oscillator coordinate
    #[arg(long, global = true)]
    eps: Option<f64>,
    /// Oscillator quasi-parity: +1 or -1
    #[arg(long, global = true, allow_hyphen_values = true)]
    qp: Option<String>,
    /// Scarf II real well depth
    #[arg(long, global = true)]
    lambda: Option<f64>,
    /// Scarf II imaginary strength
    #[arg(long, global = true)]
    mu: Option<f64>,
    /// Scarf II eigenfunction tower: + or -
    #[arg(long, global = true, allow_hyphen_values = true)]
    tower: Option<String>,
    /// Levels to delete, comma separated (e.g. 1,2)
    #[arg(long, global = true)]
    indices: Option<String>,
    /// Grid half-width (defaults to the model's choice)
    #[arg(long = "grid-l", global = true)]
    grid_l: Option<f64>,
    /// Odd grid point count (defaults to the model's choice)
    #[arg(long = "grid-n", global = true)]
    grid_n: Option<usize>,
    /// Finite-difference stencil order: 2 or 4
    #[arg(long, global = true)]
    stencil: Option<String>,
    /// Spectrum matching tolerance
    #[arg(long = "tol-spectrum", global = true)]
    tol_spectrum: Option<f64>,
    /// Number of levels to display/verify
    #[arg(long, global = true)]
    levels: Option<usize>,
    /// Grid refinement steps for the convergence table
    #[arg(long, global = true)]
    refine: Option<usize>,
    /// Output path: a file for json, a directory for csv
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Output format: json or csv
    #[arg(long, global = true)]
    format: Option<String>,
    /// Config file with key = value lines mirroring the flags
    #[arg(long, global = true)]
    config: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Inspect a solvable model
    Model {
        #[command(subcommand)]
        action: ModelAction,
    },
    /// Build the transformed potential and eigenfunctions
    Transform,
    /// Run the full verification suite
    Verify,
    /// Export sampled potentials and eigenfunctions
    Export,
}

#[derive(Subcommand)]
enum ModelAction {
    /// Print parameters, energies and potential samples
    Show,
}

fn parse_qp(s: &str) -> Result<i32, ConfigError> {
    match s {
        "+1" | "+" => Ok(1),
        "-1" | "-" => Ok(-1),
        other => other.parse().map_err(|_| ConfigError::BadValue {
            key: "qp".into(),
            value: s.into(),
        }),
    }
}

fn resolve_config(flags: &Flags) -> Result<RunConfig, ConfigError> {
    let mut cfg = RunConfig::default();
    if let Some(path) = &flags.config {
        let values = config::load_config_file(path)?;
        cfg.apply_file_values(&values, &[], path)?;
    }
    if let Some(v) = &flags.model {
        cfg.model = ModelKind::parse(v)?;
    }
    if let Some(v) = flags.alpha {
        cfg.alpha = v;
    }
    if let Some(v) = flags.eps {
        cfg.eps = v;
    }
    if let Some(v) = &flags.qp {
        cfg.qp = parse_qp(v)?;
    }
    if let Some(v) = flags.lambda {
        cfg.lambda = v;
    }
    if let Some(v) = flags.mu {
        cfg.mu = v;
    }
    if let Some(v) = &flags.tower {
        cfg.tower = config::parse_tower(v)?;
    }
    if let Some(v) = &flags.indices {
        cfg.indices = config::parse_indices(v)?;
    }
    if let Some(v) = flags.grid_l {
        cfg.grid_l = Some(v);
    }
    if let Some(v) = flags.grid_n {
        cfg.grid_n = Some(v);
    }
    if let Some(v) = &flags.stencil {
        cfg.stencil = config::parse_stencil(v)?;
    }
    if let Some(v) = flags.tol_spectrum {
        cfg.tol_spectrum = v;
    }
    if let Some(v) = flags.levels {
        cfg.levels = v;
    }
    if let Some(v) = flags.refine {
        cfg.refine = v;
    }
    if let Some(v) = &flags.out {
        cfg.out = Some(v.clone());
    }
    if let Some(v) = &flags.format {
        cfg.format = OutputFormat::parse(v)?;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn emit(doc: &ReportDocument, cfg: &RunConfig) -> ExitCode {
    print!("{}", doc.summary());
    if let Some(out) = &cfg.out {
        if let Err(e) = doc.write(out, cfg.format) {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
        println!("wrote {}", out.display());
    }
    if doc.passed() {
        ExitCode::SUCCESS
    } else {
        let first = doc.first_failure().expect("failed document has a failure");
        eprintln!("first failing check: {}", first.name);
        ExitCode::from(1)
    }
}

/// A singular transformation is a structured result, not a crash: report it
/// as a failing check.
fn singular_report(cfg: &RunConfig, err: &DarbouxError) -> ReportDocument {
    let model = cfg
        .build_model()
        .map(|m| m.name().to_string())
        .unwrap_or_else(|_| "unknown".into());
    let grid = cfg.grid_shape().unwrap_or((0.0, 0));
    let mut doc = ReportDocument::new("transform", model, grid, cfg.clone());
    eprintln!("transformation failed: {err}");
    let ratio = match err {
        DarbouxError::SingularTransform { ratio } => *ratio,
        DarbouxError::SingularIntermediate { ratio, .. } => *ratio,
        _ => 0.0,
    };
    doc.push(Check::at_least(
        "transform-regularity",
        ratio,
        ptdarboux::darboux::NODELESS_TOL,
    ));
    doc
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let cfg = match resolve_config(&cli.flags) {
        Ok(cfg) => cfg,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    };
    let result = match &cli.command {
        Command::Model {
            action: ModelAction::Show,
        } => pipeline::run_model_show(&cfg),
        Command::Transform => pipeline::run_transform(&cfg),
        Command::Verify => pipeline::run_verify(&cfg),
        Command::Export => pipeline::run_export(&cfg),
    };
    match result {
        Ok(doc) => emit(&doc, &cfg),
        Err(PipelineError::Darboux(e))
            if matches!(
                e,
                DarbouxError::SingularTransform { .. }
                    | DarbouxError::SingularIntermediate { .. }
                    | DarbouxError::NodeDetected { .. }
            ) =>
        {
            let doc = singular_report(&cfg, &e);
            emit(&doc, &cfg)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}

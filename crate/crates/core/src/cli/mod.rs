//! Batch driver: one subcommand per module, JSON config in, JSON/CSV artifacts out.
//!
//! Exit codes: 0 all criteria pass, 1 a criterion fails, 2 config or schema
//! error, 3 internal stage failure.

mod commands;

use std::ffi::OsString;
use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::error::Error;

pub use commands::{
    CarlemanConfig, CheckConfig, CheckJet, DecomposeConfig, FlowConfig, FlowIsotopy, TargetFunction,
};

pub const THREADS_ENV: &str = "AL_KIT_THREADS";

#[derive(Parser, Debug)]
#[command(
    name = "alkit",
    version,
    about = "Shear words, flow splitting and Carleman approximation on ℂⁿ"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Decompose a polynomial vector field into shear and overshear fields.
    Decompose(Common),
    /// Recover the field of an isotopy and split its flow into a word.
    Flow(Common),
    /// Approximate a function on ℝ by an entire function in C^k.
    Carleman(Common),
    /// Approximate an isotopy of ℝ ⊂ ℂ² by shears with entire profiles.
    Pipeline(Common),
    /// Check ∂̄-flatness of an almost-analytic extension.
    Check(Common),
}

#[derive(Args, Debug)]
struct Common {
    /// JSON config file (optional for `pipeline`, which has a built-in default).
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output directory.
    #[arg(long)]
    out: PathBuf,
    /// Overrides the seed in the config.
    #[arg(long)]
    seed: Option<u64>,
    /// Suppress the summary on stdout.
    #[arg(long)]
    quiet: bool,
}

/// A failed run, classified for the exit code.
#[derive(Debug)]
pub enum Failure {
    Config(String),
    Stage(Error),
}

impl Failure {
    pub fn exit_code(&self) -> i32 {
        match self {
            Failure::Config(_) => 2,
            Failure::Stage(e) if is_infeasible(e) => 1,
            Failure::Stage(_) => 3,
        }
    }
}

fn is_infeasible(e: &Error) -> bool {
    match e {
        Error::DegenerateBasis(_) => true,
        Error::Stage { source, .. } => is_infeasible(source),
        _ => false,
    }
}

impl std::fmt::Display for Failure {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Failure::Config(m) => write!(f, "config error: {m}"),
            Failure::Stage(e) => write!(f, "{e}"),
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Config(m) => Failure::Config(m),
            other => Failure::Stage(other),
        }
    }
}

/// Result of a subcommand: verdict, artifacts and summary lines.
pub struct Outcome {
    pub pass: bool,
    pub seed: Option<u64>,
    pub files: Vec<(String, Vec<u8>)>,
    pub summary: Vec<String>,
}

#[derive(Serialize)]
struct OutputFile {
    file: String,
    sha256: String,
}

#[derive(Serialize)]
struct RunManifest {
    subcommand: String,
    tool_version: String,
    config_digest: String,
    seed: Option<u64>,
    wall_time_s: f64,
    outputs: Vec<OutputFile>,
    pass: bool,
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes)
        .iter()
        .map(|b| format!("{b:02x}"))
        .collect()
}

/// Writes `bytes` to `dir/name` through a temporary file and a rename.
pub fn write_atomic(dir: &Path, name: &str, bytes: &[u8]) -> std::io::Result<()> {
    let tmp = dir.join(format!(".{name}.tmp"));
    {
        let mut f = fs::File::create(&tmp)?;
        f.write_all(bytes)?;
        f.sync_all()?;
    }
    fs::rename(&tmp, dir.join(name))
}

fn configure_threads() -> Result<(), Failure> {
    let Ok(v) = std::env::var(THREADS_ENV) else {
        return Ok(());
    };
    let n: usize = v.trim().parse().ok().filter(|&n| n > 0).ok_or_else(|| {
        Failure::Config(format!(
            "{THREADS_ENV} must be a positive integer, got {v:?}"
        ))
    })?;
    // A pool that already exists (e.g. in tests) keeps its size.
    let _ = rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global();
    Ok(())
}

fn execute(name: &str, c: &Common) -> Result<Outcome, Failure> {
    let bytes = match &c.config {
        Some(p) => Some(fs::read(p).map_err(|e| Failure::Config(format!("{}: {e}", p.display())))?),
        None => None,
    };
    let need =
        |b: Option<Vec<u8>>| b.ok_or_else(|| Failure::Config(format!("`{name}` needs --config")));
    match name {
        "decompose" => commands::decompose(&need(bytes)?, c.seed),
        "flow" => commands::flow(&need(bytes)?, c.seed),
        "carleman" => commands::carleman(&need(bytes)?),
        "pipeline" => commands::pipeline(bytes.as_deref(), c.seed),
        "check" => commands::check(&need(bytes)?),
        _ => unreachable!("subcommands are fixed by the parser"),
    }
}

fn run_command(name: &str, c: &Common) -> i32 {
    let start = Instant::now();
    let outcome = configure_threads().and_then(|_| execute(name, c));
    let outcome = match outcome {
        Ok(o) => o,
        Err(f) => {
            eprintln!("alkit {name}: {f}");
            return f.exit_code();
        }
    };
    let digest = match &c.config {
        Some(p) => fs::read(p).map(|b| sha256_hex(&b)).unwrap_or_default(),
        None => sha256_hex(&commands::default_pipeline_bytes()),
    };
    if let Err(e) = fs::create_dir_all(&c.out) {
        eprintln!("alkit {name}: {}: {e}", c.out.display());
        return 3;
    }
    let mut outputs = Vec::new();
    for (file, bytes) in &outcome.files {
        if let Err(e) = write_atomic(&c.out, file, bytes) {
            eprintln!("alkit {name}: writing {file}: {e}");
            return 3;
        }
        outputs.push(OutputFile {
            file: file.clone(),
            sha256: sha256_hex(bytes),
        });
    }
    let manifest = RunManifest {
        subcommand: name.to_string(),
        tool_version: env!("CARGO_PKG_VERSION").to_string(),
        config_digest: digest,
        seed: outcome.seed,
        wall_time_s: start.elapsed().as_secs_f64(),
        outputs,
        pass: outcome.pass,
    };
    let mut json = serde_json::to_vec_pretty(&manifest).expect("manifest serializes");
    json.push(b'\n');
    if let Err(e) = write_atomic(&c.out, "manifest.json", &json) {
        eprintln!("alkit {name}: writing manifest.json: {e}");
        return 3;
    }
    if !c.quiet {
        for line in &outcome.summary {
            println!("{line}");
        }
        println!("{name}: {}", if outcome.pass { "pass" } else { "fail" });
    }
    if outcome.pass {
        0
    } else {
        1
    }
}

/// Parses `args` (including the program name) and runs the subcommand.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match &cli.command {
        Command::Decompose(c) => run_command("decompose", c),
        Command::Flow(c) => run_command("flow", c),
        Command::Carleman(c) => run_command("carleman", c),
        Command::Pipeline(c) => run_command("pipeline", c),
        Command::Check(c) => run_command("check", c),
    }
}

pub fn main_entry() -> i32 {
    run(std::env::args_os())
}

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use hypokit::{CMatrix, ErrorKind, Tolerances};
use serde_json::{json, Value};

mod commands;

pub const SCHEMA: &str = "hypokit/1";

#[derive(Parser, Debug)]
#[command(name = "hypokit", version, about = "Hypocoercivity and hypocontractivity analysis of linear systems")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Write the report here instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Relative rank cutoff.
    #[arg(long, global = true)]
    tol_rank: Option<f64>,
    /// Relative PSD clamp.
    #[arg(long, global = true)]
    tol_psd: Option<f64>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Certify the system and compute its index and decay constant.
    Analyze {
        path: PathBuf,
        /// Treat the matrix as a discrete-time propagator.
        #[arg(long)]
        discrete: bool,
    },
    /// Fit the short-time decay exponent and constant on a step grid.
    Decay {
        path: PathBuf,
        /// `a:b:geometric` (halving from a down to b) or `a:b:N` (N geometric points).
        #[arg(long)]
        tau_grid: Option<String>,
    },
    /// Check index preservation under the scaled Cayley transform.
    Cayley {
        path: PathBuf,
        #[arg(long, default_values_t = vec![0.5], value_delimiter = ',')]
        tau: Vec<f64>,
        /// Input is the discrete propagator; its continuous preimage is checked.
        #[arg(long)]
        discrete: bool,
    },
    /// Propagator norm curve and discrete markers as CSV.
    Sweep {
        path: PathBuf,
        #[arg(long)]
        tau: f64,
        #[arg(long)]
        k_max: usize,
    },
    /// Hilbert-form minimum, minimizer and inverse entry.
    Hilbert {
        #[arg(long)]
        m: usize,
    },
    /// Maximally coercive or contractive change of basis.
    Transform {
        path: PathBuf,
        #[arg(long)]
        epsilon: Option<f64>,
        #[arg(long)]
        discrete: bool,
    },
    /// Seeded property corpus.
    Verify {
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long, default_value_t = 200)]
        count: u64,
        /// Comma-separated subset of cayley, plateau, peano, hilbert.
        #[arg(long, value_delimiter = ',')]
        only: Vec<String>,
    },
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Analyze { .. } => "analyze",
            Command::Decay { .. } => "decay",
            Command::Cayley { .. } => "cayley",
            Command::Sweep { .. } => "sweep",
            Command::Hilbert { .. } => "hilbert",
            Command::Transform { .. } => "transform",
            Command::Verify { .. } => "verify",
        }
    }
}

/// Failure carried to `main`: an exit status and a message.
#[derive(Debug)]
pub struct Failure {
    pub code: u8,
    pub kind: &'static str,
    pub message: String,
}

impl From<hypokit::Error> for Failure {
    fn from(e: hypokit::Error) -> Self {
        let (code, kind) = match e.kind() {
            ErrorKind::Input => (1, "input"),
            ErrorKind::Precondition => (2, "precondition"),
            ErrorKind::Consistency => (3, "consistency"),
        };
        Failure { code, kind, message: e.to_string() }
    }
}

impl Failure {
    pub fn input(message: impl Into<String>) -> Self {
        Failure { code: 1, kind: "input", message: message.into() }
    }
}

/// What a command produced.
pub enum Output {
    Json(Value),
    /// CSV text and exit status.
    Csv(String, u8),
    /// A JSON report for a run that still has to exit nonzero.
    JsonFailed(Value, u8),
}

pub fn read_matrix(path: &Path) -> Result<CMatrix, Failure> {
    let text = fs::read_to_string(path).map_err(|e| Failure::input(format!("{}: {e}", path.display())))?;
    Ok(CMatrix::from_json(&text)?)
}

/// 17 significant digits, decimal point, no locale.
pub fn num(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.16e}")
    } else {
        x.to_string()
    }
}

fn tolerances(cli: &Cli) -> Result<Tolerances, Failure> {
    let mut tol = Tolerances::default();
    if let Some(v) = cli.tol_rank {
        tol.rank_rel_tol = v;
    }
    if let Some(v) = cli.tol_psd {
        tol.psd_rel_tol = v;
    }
    tol.validate().map_err(|e| Failure::input(e.to_string()))?;
    Ok(tol)
}

fn run(cli: &Cli) -> Result<Output, Failure> {
    let tol = tolerances(cli)?;
    match &cli.command {
        Command::Analyze { path, discrete } => commands::analyze(&read_matrix(path)?, *discrete, &tol),
        Command::Decay { path, tau_grid } => {
            let grid = match tau_grid {
                Some(spec) => commands::parse_grid(spec)?,
                None => hypokit::coercivity::dyadic_grid(3, 12),
            };
            commands::decay(&read_matrix(path)?, &grid, &tol)
        }
        Command::Cayley { path, tau, discrete } => {
            let csv = cli.out.as_ref().is_some_and(|p| p.extension().is_some_and(|e| e == "csv"));
            let id = path.file_stem().map_or_else(String::new, |s| s.to_string_lossy().into_owned());
            commands::cayley(&read_matrix(path)?, tau, *discrete, csv, &id, &tol)
        }
        Command::Sweep { path, tau, k_max } => commands::sweep(&read_matrix(path)?, *tau, *k_max, &tol),
        Command::Hilbert { m } => commands::hilbert(*m),
        Command::Transform { path, epsilon, discrete } => {
            commands::transform(&read_matrix(path)?, *epsilon, *discrete, &tol)
        }
        Command::Verify { seed, count, only } => commands::verify(*seed, *count, only, &tol),
    }
}

fn with_header(command: &str, body: Value, tol: Option<&Tolerances>) -> Value {
    let mut out = json!({ "schema": SCHEMA, "command": command });
    if let Some(t) = tol {
        out["tolerances"] = serde_json::to_value(t).expect("tolerances serialize");
    }
    if let Value::Object(map) = body {
        for (k, v) in map {
            out[k] = v;
        }
    }
    out
}

fn emit(out: Option<&PathBuf>, text: &str) -> std::io::Result<()> {
    match out {
        Some(p) => fs::write(p, text),
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout.write_all(text.as_bytes())?;
            stdout.flush()
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let name = cli.command.name();
    let tol = tolerances(&cli).ok();
    let (text, code) = match run(&cli) {
        Ok(Output::Json(v)) => (serde_json::to_string_pretty(&with_header(name, v, tol.as_ref())).unwrap() + "\n", 0),
        Ok(Output::JsonFailed(v, code)) => {
            (serde_json::to_string_pretty(&with_header(name, v, tol.as_ref())).unwrap() + "\n", code)
        }
        Ok(Output::Csv(s, code)) => (s, code),
        Err(f) => {
            eprintln!("hypokit {name}: {}", f.message);
            let body = json!({ "error": { "kind": f.kind, "message": f.message, "exit_code": f.code } });
            (serde_json::to_string_pretty(&with_header(name, body, tol.as_ref())).unwrap() + "\n", f.code)
        }
    };
    if let Err(e) = emit(cli.out.as_ref(), &text) {
        eprintln!("hypokit {name}: cannot write output: {e}");
        return ExitCode::from(1);
    }
    ExitCode::from(code)
}

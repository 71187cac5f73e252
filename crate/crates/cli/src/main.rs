//! Command-line front end: `conelab <subcommand> -f def.toml`.

use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use conelab_core::definition::{apply_budget_overrides, parse_definition, DefinitionError, SystemDefinition};
use conelab_core::report::{self, exit, exit_code, Report, Run};

/// Environment variable holding `key=value` budget overrides.
const BUDGET_ENV: &str = "CONELAB_BUDGET";

#[derive(Parser)]
#[command(name = "conelab", version, about = "Light cones and directional dynamics of subshift endomorphisms")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Cone profile, slopes, spread and order.
    Analyze(Common),
    /// Spacetime diagram with the cone and edge witnesses.
    Spacetime(Common),
    /// Directional expansiveness probes.
    Probe(Common),
    /// Rectangle entropy and the entropy inequality.
    Entropy(Common),
    /// Property suite; without a definition, runs the builtin corpus.
    Verify(VerifyArgs),
    /// Lists or writes the builtin example definitions.
    Examples {
        /// Directory to write one definition file per example into.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Args)]
struct Common {
    /// Definition file.
    #[arg(short = 'f', long = "file")]
    file: PathBuf,
    #[command(flatten)]
    overrides: Overrides,
}

#[derive(Args)]
struct VerifyArgs {
    #[arg(short = 'f', long = "file")]
    file: Option<PathBuf>,
    #[command(flatten)]
    overrides: Overrides,
}

#[derive(Args)]
struct Overrides {
    #[arg(long)]
    n_max: Option<usize>,
    /// Slope `p/q` to probe; repeatable.
    #[arg(long = "slope", value_parser = parse_slope)]
    slopes: Vec<(i64, i64)>,
    /// Directory for the record stream and diagrams; stdout otherwise.
    #[arg(long)]
    out: Option<PathBuf>,
}

fn parse_slope(s: &str) -> Result<(i64, i64), String> {
    let (p, q) = s.split_once('/').ok_or("expected p/q")?;
    let p: i64 = p.trim().parse().map_err(|_| "bad numerator")?;
    let q: i64 = q.trim().parse().map_err(|_| "bad denominator")?;
    if q < 0 || (p, q) == (0, 0) {
        return Err("denominator must be nonnegative and the slope nonzero".into());
    }
    Ok((p, q))
}

struct Failure {
    code: i32,
    message: String,
}

impl Failure {
    fn new(code: i32, message: impl Into<String>) -> Failure {
        Failure { code, message: message.into() }
    }
}

impl From<conelab_core::Error> for Failure {
    fn from(e: conelab_core::Error) -> Failure {
        Failure::new(exit_code(&e), e.to_string())
    }
}

fn load(path: &Path, overrides: &Overrides) -> Result<SystemDefinition, Failure> {
    let text = fs::read_to_string(path).map_err(|e| Failure::new(exit::IO, format!("{}: {e}", path.display())))?;
    let mut def = parse_definition(&text).map_err(|e| {
        let code = match e {
            DefinitionError::Syntax { .. } => exit::DEFINITION_SYNTAX,
            DefinitionError::Semantic { .. } => exit::DEFINITION_SEMANTIC,
        };
        Failure::new(code, format!("{}: {e}", path.display()))
    })?;
    if let Ok(env) = std::env::var(BUDGET_ENV) {
        apply_budget_overrides(&mut def.analysis, &env).map_err(|e| Failure::new(exit::USAGE, format!("{BUDGET_ENV}: {e}")))?;
    }
    if let Some(n) = overrides.n_max {
        def.analysis.n_max = n;
    }
    if !overrides.slopes.is_empty() {
        def.analysis.slopes = overrides.slopes.clone();
    }
    Ok(def)
}

fn emit(report: &Report, out: Option<&Path>) -> Result<(), Failure> {
    let io = |e: std::io::Error| Failure::new(exit::IO, e.to_string());
    match out {
        Some(dir) => {
            fs::create_dir_all(dir).map_err(io)?;
            fs::write(dir.join("report.jsonl"), report.to_jsonl()).map_err(io)?;
            for (name, contents) in &report.files {
                fs::write(dir.join(name), contents).map_err(io)?;
            }
        }
        None => {
            stdout(&report.to_jsonl())?;
            for (name, _) in &report.files {
                eprintln!("diagram {name} not written; pass --out to keep it");
            }
        }
    }
    eprint!("{}", report.human());
    Ok(())
}

fn run(cli: Cli) -> Result<i32, Failure> {
    let (report, out) = match cli.command {
        Command::Analyze(c) => (report::analyze(&Run::new(load(&c.file, &c.overrides)?))?, c.overrides.out),
        Command::Spacetime(c) => (report::spacetime(&Run::new(load(&c.file, &c.overrides)?))?, c.overrides.out),
        Command::Probe(c) => {
            let def = load(&c.file, &c.overrides)?;
            if def.analysis.slopes.is_empty() {
                return Err(Failure::new(exit::USAGE, "no slopes given; use --slope p/q or [analysis] slopes"));
            }
            (report::probe(&Run::new(def))?, c.overrides.out)
        }
        Command::Entropy(c) => (report::entropy(&Run::new(load(&c.file, &c.overrides)?))?, c.overrides.out),
        Command::Verify(v) => match &v.file {
            Some(f) => (report::verify(&Run::new(load(f, &v.overrides)?))?, v.overrides.out),
            None => {
                let mut def = SystemDefinition::from_builder("full_shift", &[2]);
                if let Ok(env) = std::env::var(BUDGET_ENV) {
                    apply_budget_overrides(&mut def.analysis, &env).map_err(|e| Failure::new(exit::USAGE, e))?;
                }
                let n_max = v.overrides.n_max.unwrap_or(def.analysis.n_max);
                (report::verify_corpus(def.analysis.budget(), n_max)?, v.overrides.out)
            }
        },
        Command::Examples { out } => {
            for (name, text) in report::examples() {
                match &out {
                    Some(dir) => {
                        fs::create_dir_all(dir).map_err(|e| Failure::new(exit::IO, e.to_string()))?;
                        fs::write(dir.join(format!("{name}.toml")), text).map_err(|e| Failure::new(exit::IO, e.to_string()))?;
                    }
                    None => stdout(&format!("# {name}\n{text}\n"))?,
                }
            }
            return Ok(exit::OK);
        }
    };
    emit(&report, out.as_deref())?;
    Ok(report.exit_code())
}

/// Writes to stdout; a closed pipe is not an error.
fn stdout(text: &str) -> Result<(), Failure> {
    match io::stdout().lock().write_all(text.as_bytes()) {
        Err(e) if e.kind() != io::ErrorKind::BrokenPipe => Err(Failure::new(exit::IO, e.to_string())),
        _ => Ok(()),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let code = match run(cli) {
        Ok(code) => code,
        Err(f) => {
            eprintln!("error: {}", f.message);
            f.code
        }
    };
    ExitCode::from(code as u8)
}

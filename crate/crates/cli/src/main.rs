use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};
use stratamon::{Error, ErrorKind};

mod commands;

#[derive(Parser, Debug)]
#[command(name = "stratamon", version, about = "Exact computations on affine semigroups")]
struct Cli {
    /// Output format.
    #[arg(long, value_enum, default_value_t = Format::Json, global = true)]
    format: Format,

    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Pretty,
}

/// Where the monoid (or group) description comes from.
#[derive(Args, Debug)]
#[group(required = true, multiple = false)]
struct Source {
    /// Inline JSON description.
    #[arg(long)]
    inline: Option<String>,
    /// Path to a JSON description.
    #[arg(long)]
    file: Option<PathBuf>,
}

impl Source {
    fn text(&self) -> Result<String, Error> {
        match (&self.inline, &self.file) {
            (Some(s), _) => Ok(s.clone()),
            (None, Some(p)) => {
                std::fs::read_to_string(p).map_err(|e| Error::input(format!("cannot read {}: {e}", p.display())))
            }
            (None, None) => Err(Error::input("no input given")),
        }
    }
}

fn positive_box(s: &str) -> Result<u64, String> {
    match s.parse::<u64>() {
        Ok(0) => Err("box bound must be at least 1".into()),
        Ok(b) => Ok(b),
        Err(e) => Err(e.to_string()),
    }
}

#[derive(Args, Debug)]
struct BoxArg {
    /// Box bound for enumerations that are not provably finite.
    #[arg(long = "box", default_value_t = 40, value_parser = positive_box)]
    bound: u64,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Hilbert basis (atoms).
    Hilbert {
        #[command(flatten)]
        source: Source,
    },
    /// Apéry set with respect to a list of elements.
    Apery {
        #[command(flatten)]
        source: Source,
        /// JSON list of vectors.
        #[arg(long)]
        base: String,
        #[command(flatten)]
        bound: BoxArg,
    },
    /// Extraction grade of y with respect to x.
    Lambda {
        #[command(flatten)]
        source: Source,
        #[arg(long)]
        x: String,
        #[arg(long)]
        y: String,
    },
    /// Extremal, pure and strong flags for every atom, and root closure.
    Classify {
        #[command(flatten)]
        source: Source,
        #[command(flatten)]
        bound: BoxArg,
    },
    /// Coordinates of an element with respect to an independent base.
    Coords {
        #[arg(long)]
        base: String,
        #[arg(long)]
        element: String,
    },
    /// Stratification of the atoms.
    Stratify {
        #[command(flatten)]
        source: Source,
    },
    /// Layered representation of an element.
    Decompose {
        #[command(flatten)]
        source: Source,
        #[arg(long)]
        element: String,
    },
    /// Inequality description of the layered representations.
    Parametrize {
        #[command(flatten)]
        source: Source,
    },
    /// Checks the parametrization against the monoid on a box.
    Verify {
        #[command(flatten)]
        source: Source,
        #[command(flatten)]
        bound: BoxArg,
    },
    /// Block monoid of a subset of a finitely generated abelian group.
    Block {
        #[command(flatten)]
        source: Source,
    },
    /// Brute-force reference computations.
    Oracle {
        #[command(subcommand)]
        query: OracleQuery,
    },
    /// Runs a worked example end to end.
    Reproduce {
        #[arg(value_enum)]
        example: Example,
    },
}

#[derive(Subcommand, Debug)]
enum OracleQuery {
    /// Monoid elements in the box.
    Elements {
        #[command(flatten)]
        source: Source,
        #[command(flatten)]
        bound: BoxArg,
    },
    /// Atoms found by pair sums inside the box.
    Atoms {
        #[command(flatten)]
        source: Source,
        #[command(flatten)]
        bound: BoxArg,
    },
    /// Apéry elements inside the box.
    Apery {
        #[command(flatten)]
        source: Source,
        #[arg(long)]
        base: String,
        #[command(flatten)]
        bound: BoxArg,
    },
    /// Extraction grade by scanning denominators.
    Lambda {
        #[command(flatten)]
        source: Source,
        #[arg(long)]
        x: String,
        #[arg(long)]
        y: String,
        #[arg(long, default_value_t = stratamon::oracle::DEFAULT_MAX_DEN)]
        max_den: u64,
    },
    /// Every layered representation of an element.
    Representations {
        #[command(flatten)]
        source: Source,
        #[arg(long)]
        element: String,
    },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Example {
    ElliottMod7,
    Mod11Counterexample,
}

fn exit_code(kind: ErrorKind) -> u8 {
    match kind {
        ErrorKind::Input => 1,
        ErrorKind::Unsupported => 2,
        ErrorKind::Internal => 3,
    }
}

fn kind_name(kind: ErrorKind) -> &'static str {
    match kind {
        ErrorKind::Input => "input",
        ErrorKind::Unsupported => "unsupported",
        ErrorKind::Internal => "internal",
    }
}

fn fail(kind: ErrorKind, message: String) -> ExitCode {
    let body = json!({ "error": { "kind": kind_name(kind), "message": message } });
    eprintln!("{body}");
    ExitCode::from(exit_code(kind))
}

fn render(value: &Value, format: Format) -> String {
    match format {
        Format::Json => value.to_string(),
        Format::Pretty => {
            let mut out = String::new();
            pretty(value, 0, &mut out);
            out
        }
    }
}

/// Indented JSON that keeps arrays of scalars (vectors) on one line.
fn pretty(value: &Value, depth: usize, out: &mut String) {
    let pad = |d: usize| "  ".repeat(d);
    match value {
        Value::Array(items) if items.iter().all(|v| !v.is_array() && !v.is_object()) => {
            out.push_str(&value.to_string())
        }
        Value::Array(items) => {
            out.push_str("[\n");
            for (i, v) in items.iter().enumerate() {
                out.push_str(&pad(depth + 1));
                pretty(v, depth + 1, out);
                out.push_str(if i + 1 < items.len() { ",\n" } else { "\n" });
            }
            out.push_str(&pad(depth));
            out.push(']');
        }
        Value::Object(map) if map.is_empty() => out.push_str("{}"),
        Value::Object(map) => {
            out.push_str("{\n");
            for (i, (k, v)) in map.iter().enumerate() {
                out.push_str(&format!("{}{}: ", pad(depth + 1), Value::String(k.clone())));
                pretty(v, depth + 1, out);
                out.push_str(if i + 1 < map.len() { ",\n" } else { "\n" });
            }
            out.push_str(&pad(depth));
            out.push('}');
        }
        _ => out.push_str(&value.to_string()),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::new().filter_or("STRATAMON_LOG", "warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind as Clap;
            if matches!(e.kind(), Clap::DisplayHelp | Clap::DisplayVersion) {
                print!("{e}");
                return ExitCode::SUCCESS;
            }
            return fail(ErrorKind::Input, e.to_string().trim().to_string());
        }
    };
    log::debug!("{:?}", cli.command);
    match commands::run(cli.command) {
        Ok(value) => {
            // a closed pipe is not an error worth reporting
            let _ = writeln!(std::io::stdout().lock(), "{}", render(&value, cli.format));
            ExitCode::SUCCESS
        }
        Err(e) => fail(e.kind(), e.to_string()),
    }
}

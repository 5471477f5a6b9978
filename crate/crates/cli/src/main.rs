use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

mod commands;
mod markdown;

use commands::{CliError, Envelope, Status};
use yoneda_core::random::InstanceKind;

#[derive(Parser, Debug)]
#[command(name = "yoneda", version, about = "Exact audits of finite non-symmetric distance spaces")]
struct Cli {
    /// Report format; JSON is canonical and markdown is rendered from it.
    #[arg(long, value_enum, global = true, default_value_t = Format::Json)]
    format: Format,
    /// Write the report here instead of stdout.
    #[arg(long, short, global = true)]
    output: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Markdown,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Kind {
    General,
    Hemimetric,
    Metric,
    Order,
    Composition,
}

impl From<Kind> for InstanceKind {
    fn from(k: Kind) -> Self {
        match k {
            Kind::General => InstanceKind::General,
            Kind::Hemimetric => InstanceKind::Hemimetric,
            Kind::Metric => InstanceKind::Metric,
            Kind::Order => InstanceKind::Order,
            Kind::Composition => InstanceKind::Composition,
        }
    }
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Validate a space, evaluate its derived functions and decide completeness.
    Check { file: PathBuf },
    /// Audit the theorem implications on a space.
    Audit {
        file: PathBuf,
        /// Statement ids, comma separated; all by default.
        #[arg(long, value_delimiter = ',')]
        theorems: Vec<String>,
        /// Symmetric distance `e` for the statements that take one.
        #[arg(long)]
        second_distance: Option<PathBuf>,
        /// Also evaluate conclusions whose hypotheses fail.
        #[arg(long)]
        evaluate_vacuous: bool,
    },
    /// Build and verify a named example.
    Gallery {
        name: String,
        #[arg(long, default_value_t = 50)]
        cutoff: usize,
        /// Shorthand for `--format json`.
        #[arg(long)]
        json: bool,
    },
    /// Audit seeded random spaces.
    Random {
        #[arg(long, default_value_t = 6)]
        n: usize,
        #[arg(long, default_value_t = 1000)]
        count: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, value_enum)]
        kind: Option<Kind>,
        #[arg(long, value_delimiter = ',')]
        theorems: Vec<String>,
        #[arg(long)]
        evaluate_vacuous: bool,
    },
    /// Merge JSON reports from earlier runs.
    Report {
        #[arg(required = true)]
        files: Vec<PathBuf>,
    },
}

fn configure_workers() -> Result<(), CliError> {
    let Ok(raw) = std::env::var("QML_WORKERS") else { return Ok(()) };
    let workers: usize = raw
        .trim()
        .parse()
        .ok()
        .filter(|&w| w > 0)
        .ok_or_else(|| CliError::Parse(format!("QML_WORKERS must be a positive integer, got {raw:?}")))?;
    #[cfg(feature = "parallel")]
    rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build_global()
        .map_err(|e| CliError::Precondition(format!("worker pool: {e}")))?;
    #[cfg(not(feature = "parallel"))]
    let _ = workers;
    Ok(())
}

fn run(cli: Cli) -> Result<(String, Status), CliError> {
    configure_workers()?;
    let mut format = cli.format;
    let (envelope, status) = match cli.command {
        Command::Check { file } => commands::check(&file)?,
        Command::Audit { file, theorems, second_distance, evaluate_vacuous } => {
            commands::audit(&file, &theorems, second_distance.as_deref(), evaluate_vacuous)?
        }
        Command::Gallery { name, cutoff, json } => {
            if json {
                format = Format::Json;
            }
            commands::gallery(&name, cutoff)?
        }
        Command::Random { n, count, seed, kind, theorems, evaluate_vacuous } => {
            commands::random(n, count, seed, kind.map(Into::into), &theorems, evaluate_vacuous)?
        }
        Command::Report { files } => {
            let envelopes = commands::load_reports(&files)?;
            let text = match format {
                Format::Json => commands::to_json(&envelopes)?,
                Format::Markdown => markdown::merged(&envelopes),
            };
            return Ok((text, Status::Ok));
        }
    };
    Ok((render(&envelope, format)?, status))
}

fn render(envelope: &Envelope, format: Format) -> Result<String, CliError> {
    match format {
        Format::Json => commands::to_json(envelope),
        Format::Markdown => Ok(markdown::single(envelope)),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let output = cli.output.clone();
    match run(cli) {
        Ok((text, status)) => {
            let written = match &output {
                Some(path) => std::fs::write(path, &text).map_err(|e| e.to_string()),
                None => std::io::stdout().lock().write_all(text.as_bytes()).map_err(|e| e.to_string()),
            };
            if let Err(e) = written {
                eprintln!("error: writing report: {e}");
                return ExitCode::from(2);
            }
            match &status {
                Status::Failed(reason) | Status::GalleryFailed(reason) => eprintln!("{reason}"),
                Status::NotADistance => eprintln!("precondition failed: the matrix violates the triangle law"),
                Status::Ok => {}
            }
            ExitCode::from(status.code())
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.code())
        }
    }
}

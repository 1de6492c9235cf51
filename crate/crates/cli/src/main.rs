//! `cognate`: featurize word pairs, estimate PMI matrices, train and
//! evaluate cognate classifiers.

mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug)]
pub enum CliError {
    /// Bad arguments or settings; exit code 1.
    Usage(String),
    /// Unreadable or invalid input data, or a failed run; exit code 2.
    Data(String),
}

impl CliError {
    fn code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 1,
            CliError::Data(_) => 2,
        }
    }

    fn message(&self) -> &str {
        match self {
            CliError::Usage(m) | CliError::Data(m) => m,
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "cognate", version, about = "Cognate identification from word lists")]
struct Cli {
    /// Settings file with `[section]` headers and `key = value` lines.
    #[arg(long, global = true, value_name = "FILE")]
    config: Option<PathBuf>,
    /// Random seed (overrides `run.seed`).
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Override a setting, e.g. `--set train.epochs=5`. Repeatable.
    #[arg(long = "set", global = true, value_name = "SECTION.KEY=VALUE")]
    overrides: Vec<String>,
    /// More log output (-v info, -vv debug).
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    verbose: u8,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
struct Io {
    /// Word list in the five-column TSV format.
    #[arg(long, value_name = "TSV")]
    data: PathBuf,
    /// Output directory (created if missing).
    #[arg(long, value_name = "DIR")]
    out: PathBuf,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Mode {
    CrossConcept,
    CrossFamily,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Write similarity features for every within-concept pair.
    Featurize {
        #[command(flatten)]
        io: Io,
        /// Use the four PMI features with this matrix instead.
        #[arg(long, value_name = "FILE")]
        pmi: Option<PathBuf>,
    },
    /// Estimate a PMI matrix from the within-concept pairs.
    PmiTrain {
        #[command(flatten)]
        io: Io,
    },
    /// Train one system and write its model.
    Train {
        #[command(flatten)]
        io: Io,
        /// ORTHO_SVM, PMI_SVM, MANHATTAN, TWO_CHANNEL or SIAMESE_EUCLID.
        #[arg(long)]
        system: Option<String>,
        /// Train on the training side of the configured split only.
        #[arg(long)]
        split: bool,
    },
    /// Score pairs with a trained model and write a report.
    Evaluate {
        #[command(flatten)]
        io: Io,
        /// Directory written by `train`.
        #[arg(long, value_name = "DIR")]
        model: PathBuf,
        /// Evaluate on the test side of the configured split only.
        #[arg(long)]
        split: bool,
    },
    /// Split, train, evaluate and print a results table.
    Pipeline {
        #[command(flatten)]
        io: Io,
        #[arg(long)]
        system: Option<String>,
        #[arg(long, value_enum)]
        mode: Option<Mode>,
        /// Comma-separated families for training (cross-family mode).
        #[arg(long, value_name = "LIST")]
        train_families: Option<String>,
        /// Comma-separated families for testing (cross-family mode).
        #[arg(long, value_name = "LIST")]
        test_families: Option<String>,
    },
}

fn init_logging(verbose: u8) {
    let level = match verbose {
        0 => log::LevelFilter::Warn,
        1 => log::LevelFilter::Info,
        _ => log::LevelFilter::Debug,
    };
    let _ = env_logger::Builder::new()
        .filter_level(level)
        .parse_default_env()
        .format_timestamp(None)
        .try_init();
}

fn settings(cli: &Cli) -> Result<config::Settings, CliError> {
    let mut s = match &cli.config {
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| CliError::Data(format!("cannot read config {}: {e}", path.display())))?;
            config::Settings::parse(&text)?
        }
        None => config::Settings::default(),
    };
    for o in &cli.overrides {
        s.set_pair(o)?;
    }
    if let Some(seed) = cli.seed {
        s.set("run.seed", &seed.to_string())?;
    }
    match &cli.command {
        Command::Train { system: Some(sys), .. } | Command::Pipeline { system: Some(sys), .. } => {
            s.set("run.system", sys)?;
        }
        _ => {}
    }
    if let Command::Pipeline {
        mode,
        train_families,
        test_families,
        ..
    } = &cli.command
    {
        if let Some(mode) = mode {
            let name = match mode {
                Mode::CrossConcept => "cross-concept",
                Mode::CrossFamily => "cross-family",
            };
            s.set("split.mode", name)?;
        }
        if let Some(f) = train_families {
            s.set("split.train_families", f)?;
        }
        if let Some(f) = test_families {
            s.set("split.test_families", f)?;
        }
    }
    Ok(s)
}

fn run(cli: Cli) -> Result<(), CliError> {
    let settings = settings(&cli)?;
    settings.seed()?;
    match cli.command {
        Command::Featurize { io, pmi } => commands::featurize(&settings, &io.data, &io.out, pmi.as_deref()),
        Command::PmiTrain { io } => commands::pmi_train(&settings, &io.data, &io.out),
        Command::Train { io, split, .. } => commands::train(&settings, &io.data, &io.out, split),
        Command::Evaluate { io, model, split } => commands::evaluate(&settings, &io.data, &model, &io.out, split),
        Command::Pipeline { io, .. } => commands::pipeline(&settings, &io.data, &io.out),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    init_logging(cli.verbose);
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {}", e.message());
            ExitCode::from(e.code())
        }
    }
}

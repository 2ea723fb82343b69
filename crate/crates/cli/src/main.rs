use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use wlab_cli::config::RunConfig;
use wlab_cli::{cmd_analyze, cmd_convergence, cmd_fields, cmd_gallery_list, init_threads, CliError};

/// Conformal surface diagnostics in the light-cone model.
#[derive(Parser)]
#[command(name = "wlab", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Analyze one chart and print the JSON report. Exit 1 if any verdict fails.
    Analyze { config: PathBuf },
    /// Rerun the analysis over several grid sizes and fit the residual decay.
    Convergence {
        config: PathBuf,
        #[arg(long, value_delimiter = ',')]
        sizes: Option<Vec<usize>>,
    },
    /// Gallery commands.
    Gallery {
        #[command(subcommand)]
        command: GalleryCommand,
    },
    /// Write per-point fields as CSV.
    Fields {
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Subcommand)]
enum GalleryCommand {
    /// List the gallery surfaces and their parameters.
    List,
}

fn run(cli: Cli) -> Result<i32, CliError> {
    init_threads()?;
    let mut stdout = std::io::stdout().lock();
    match cli.command {
        Command::Analyze { config } => cmd_analyze(&RunConfig::load(&config)?, &mut stdout),
        Command::Convergence { config, sizes } => {
            cmd_convergence(&RunConfig::load(&config)?, sizes.as_deref(), &mut stdout)
        }
        Command::Gallery {
            command: GalleryCommand::List,
        } => cmd_gallery_list(&mut stdout),
        Command::Fields { config, out } => cmd_fields(&RunConfig::load(&config)?, &out),
    }
}

fn main() -> ExitCode {
    let code = match run(Cli::parse()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("wlab: {e}");
            e.exit_code()
        }
    };
    ExitCode::from(code as u8)
}

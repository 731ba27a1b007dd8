use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use dwell_cli::commands::{self, run_command};
use dwell_cli::config::RunConfig;
use dwell_cli::error::CliError;
use dwell_cli::output::write_atomic;
use dwell_cli::plot::{render, CsvData, PlotSpec};

#[derive(Debug, Parser)]
#[command(name = "dwell", version, about = "Wavepacket tunneling in asymmetric quartic double wells")]
struct Cli {
    /// TOML configuration file.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Override one configuration key, e.g. `--set well.d=-0.033`. Repeatable.
    #[arg(long = "set", value_name = "SECTION.KEY=VALUE", global = true)]
    overrides: Vec<String>,

    /// Output directory (overrides `output.directory`).
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    /// Table formats to write (overrides `output.formats`).
    #[arg(long, value_enum, global = true)]
    format: Option<FormatArg>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum FormatArg {
    Csv,
    Json,
    Both,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Spectrum, gaps and stationary points for every `scan.d_values` entry.
    Eigen,
    /// Observable time series for the configured well and packet.
    Evolve,
    /// Maximum right-well probability for every `scan.d_values` entry.
    Scan,
    /// Classical trajectory alongside quantum <x>, <p>.
    Classical,
    /// Line chart of CSV columns as SVG.
    Plot {
        csv: PathBuf,
        #[arg(long)]
        x: String,
        #[arg(long)]
        y: String,
        #[arg(long)]
        y2: Option<String>,
        #[arg(long)]
        hline: Option<f64>,
        #[arg(long)]
        svg: PathBuf,
    },
}

fn load_config(cli: &Cli) -> Result<RunConfig, CliError> {
    let mut overrides = cli.overrides.clone();
    if let Some(out) = &cli.out {
        overrides.push(format!("output.directory={}", toml::Value::String(out.display().to_string())));
    }
    if let Some(format) = cli.format {
        let name = match format {
            FormatArg::Csv => "csv",
            FormatArg::Json => "json",
            FormatArg::Both => "both",
        };
        overrides.push(format!("output.formats={name}"));
    }
    RunConfig::load(cli.config.as_deref(), &overrides)
}

fn run(cli: &Cli) -> Result<(), CliError> {
    let body = match &cli.command {
        Command::Plot { csv, x, y, y2, hline, svg } => {
            let text = std::fs::read_to_string(csv).map_err(|e| CliError::Io(format!("{}: {e}", csv.display())))?;
            let data = CsvData::parse(&text)?;
            let spec = PlotSpec { x: x.clone(), y: y.clone(), y2: y2.clone(), hline: *hline };
            write_atomic(svg, render(&data, &spec)?.as_bytes())?;
            println!("{}", svg.display());
            return Ok(());
        }
        Command::Eigen => commands::eigen,
        Command::Evolve => commands::evolve_series,
        Command::Scan => commands::scan,
        Command::Classical => commands::classical,
    };
    let name = format!("{:?}", cli.command).to_lowercase();
    let config = load_config(cli)?;
    let files = run_command(&name, &config, body)?;
    for f in files {
        println!("{}", config.output.directory.join(f).display());
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("dwell: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

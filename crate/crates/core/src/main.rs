use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Context as _;
use clap::{Args, Parser, Subcommand};
use deepseq::cli::{self, ExperimentConfig};

/// Deep sequence models for monthly cross-sectional return prediction.
///
/// Any config key may be overridden after the subcommand as `--key value`,
/// e.g. `deepseq train --config run.cfg --train.max_epochs 5 --models LSTM,GRU`.
#[derive(Parser)]
#[command(name = "deepseq", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a synthetic panel with a known predictability ceiling.
    Synth(StageArgs),
    /// Fit every configured model over the rolling schedule.
    Train(StageArgs),
    /// Forecast the test years and score out-of-sample accuracy.
    Evaluate(StageArgs),
    /// Decile long-short backtests of the saved forecasts.
    Backtest(StageArgs),
    /// Render the saved tables as text.
    Report(StageArgs),
}

#[derive(Args)]
struct StageArgs {
    /// Flat `key = value` config file.
    #[arg(long, short)]
    config: Option<PathBuf>,
    /// Config overrides as `--key value` or `--key=value`.
    #[arg(
        trailing_var_arg = true,
        allow_hyphen_values = true,
        value_name = "--KEY VALUE"
    )]
    overrides: Vec<String>,
}

impl StageArgs {
    fn load(&self) -> anyhow::Result<ExperimentConfig> {
        let overrides = cli::parse_overrides(&self.overrides)?;
        let cfg = ExperimentConfig::load(self.config.as_deref(), &overrides)?;
        Ok(cfg)
    }
}

fn run(cli: Cli) -> anyhow::Result<()> {
    match cli.command {
        Command::Synth(a) => {
            let cfg = a.load()?;
            let path = cli::synth(&cfg)?;
            println!("panel written to {}", path.display());
        }
        Command::Train(a) => {
            let cfg = a.load()?;
            if let Some(m) = cli::train(&cfg)? {
                println!(
                    "{} fits recorded in {}",
                    m.fits.len(),
                    cfg.output_dir.join("manifest.json").display()
                );
            }
        }
        Command::Evaluate(a) => {
            let cfg = a.load()?;
            if let Some(t) = cli::evaluate(&cfg)? {
                print!("{}", t.to_text());
            }
        }
        Command::Backtest(a) => {
            let cfg = a.load()?;
            for (i, t) in cli::run_backtests(&cfg)?.iter().enumerate() {
                if i > 0 {
                    println!();
                }
                print!("{}", t.to_text());
            }
        }
        Command::Report(a) => {
            let cfg = a.load()?;
            let text = cli::report(&cfg).context("building report")?;
            print!("{text}");
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info"))
        .format_timestamp(None)
        .init();
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err:#}");
            let code = err
                .chain()
                .find_map(|e| e.downcast_ref::<deepseq::Error>())
                .map_or(1, |e| e.exit_code());
            ExitCode::from(code as u8)
        }
    }
}

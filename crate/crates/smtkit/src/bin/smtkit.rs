//! Command-line front end: thin argument handling around the pipeline.

use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use smtkit::pipeline::{
    render_config, run_clean, run_evaluate, run_stats, run_train, run_translate, run_tune,
    side_path, PipelineConfig,
};
use smtkit::{Result, SmtError};

#[derive(Parser)]
#[command(name = "smtkit", about = "Phrase-based statistical machine translation toolkit")]
struct Cli {
    #[command(flatten)]
    common: Common,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// JSON run configuration; defaults apply for missing fields.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Override the configured model directory.
    #[arg(long, global = true)]
    model_dir: Option<PathBuf>,
    /// Override the training corpus prefix.
    #[arg(long, global = true)]
    corpus: Option<PathBuf>,
    /// Override the dev corpus prefix.
    #[arg(long, global = true)]
    dev: Option<PathBuf>,
    /// Override the held-out corpus prefix.
    #[arg(long, global = true)]
    test: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Clean and filter the training corpus into new side files.
    Clean {
        /// Prefix for the cleaned side files.
        #[arg(long)]
        output: PathBuf,
    },
    /// Print token statistics for the training corpus.
    Stats,
    /// Train the full model into the model directory.
    Train,
    /// Tune decoder weights on the dev corpus.
    Tune,
    /// Translate a file of source-language lines.
    Translate {
        /// Input file; defaults to the test prefix's source side.
        #[arg(long)]
        input: Option<PathBuf>,
        /// Output file; stdout when omitted.
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Score a hypothesis file against a reference file.
    Evaluate {
        /// Hypothesis file, one sentence per line.
        #[arg(long)]
        hyp: PathBuf,
        /// Reference file; defaults to the test prefix's target side.
        #[arg(long, name = "ref")]
        reference: Option<PathBuf>,
        /// Also print sentence-length distribution rows.
        #[arg(long)]
        stats: bool,
    },
    /// Print the effective configuration as JSON.
    ShowConfig,
}

fn load_config(common: &Common) -> Result<PipelineConfig> {
    let mut config = match &common.config {
        Some(path) => PipelineConfig::load(path)?,
        None => PipelineConfig::default(),
    };
    if let Some(dir) = &common.model_dir {
        config.model_dir = dir.clone();
    }
    if let Some(prefix) = &common.corpus {
        config.corpus = Some(prefix.clone());
    }
    if let Some(prefix) = &common.dev {
        config.dev = Some(prefix.clone());
    }
    if let Some(prefix) = &common.test {
        config.test = Some(prefix.clone());
    }
    Ok(config)
}

fn test_side(config: &PipelineConfig, lang: &str) -> Result<PathBuf> {
    let prefix = config
        .test
        .as_deref()
        .ok_or_else(|| SmtError::Config("no test corpus configured".to_string()))?;
    Ok(side_path(prefix, lang))
}

fn run(cli: Cli) -> Result<()> {
    let config = load_config(&cli.common)?;
    match cli.command {
        Command::Clean { output } => {
            let (read, kept) = run_clean(&config, &output)?;
            println!("kept {kept} of {read} pairs");
        }
        Command::Stats => print!("{}", run_stats(&config)?),
        Command::Train => {
            let manifest = run_train(&config)?;
            for stage in &manifest.stages {
                println!("stage {} {}", stage.sequence, stage.name);
            }
        }
        Command::Tune => {
            let report = run_tune(&config)?;
            print!("{}", report.render());
        }
        Command::Translate { input, output } => {
            let input = match input {
                Some(path) => path,
                None => test_side(&config, &config.src_lang)?,
            };
            let lines = run_translate(&config, &input)?;
            let mut text = lines.join("\n");
            text.push('\n');
            match output {
                Some(path) => fs::write(path, text)?,
                None => print!("{text}"),
            }
        }
        Command::Evaluate {
            hyp,
            reference,
            stats,
        } => {
            let reference = match reference {
                Some(path) => path,
                None => test_side(&config, &config.tgt_lang)?,
            };
            let report = run_evaluate(&config, &hyp, &reference, stats)?;
            print!("{}", report.text);
        }
        Command::ShowConfig => print!("{}", render_config(&config)),
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(err.exit_code())
        }
    }
}

//! Command-line pipelines over `jamcgan-core`.

pub mod commands;
pub mod config;
pub mod error;

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

pub use config::Settings;
pub use error::CliError;

#[derive(Debug, Parser)]
#[command(name = "jamcgan", version, about = "Jamming-signal synthesis, GAN augmentation and CNN classification")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Synthesise the train/test spectra and write the dataset manifest.
    Generate(Flags),
    /// Turn IQ capture files into a spectrum file.
    Preprocess(Flags),
    /// Train the conditional GAN on a few-shot subset.
    TrainGan(Flags),
    /// Sample synthetic spectra from a trained generator.
    Augment(Flags),
    /// Train the classifier on real plus synthetic spectra.
    TrainCnn(Flags),
    /// Score a classifier checkpoint and write its confusion matrix.
    Evaluate(Flags),
    /// Run the accuracy-versus-JNR grid.
    Sweep(Flags),
    /// Project real and synthetic spectra to two dimensions.
    Project(Flags),
    /// Count FLOPs and parameters of the networks.
    Flops(Flags),
}

/// Every flag maps onto a config key of the same name (dashes become
/// underscores); keys a command does not use are rejected.
#[derive(Debug, Args, Default)]
pub struct Flags {
    /// Flat `key = value` file; flags override its entries.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub seed: Option<String>,
    #[arg(long)]
    pub out: Option<String>,
    #[arg(long)]
    pub jobs: Option<String>,
    #[arg(long)]
    pub shots: Option<String>,
    #[arg(long)]
    pub fraction: Option<String>,
    /// Skip GAN augmentation.
    #[arg(long)]
    pub no_augment: bool,
    /// Comma-separated JNR values in dB.
    #[arg(long)]
    pub jnr: Option<String>,
    #[arg(long)]
    pub data: Option<String>,
    #[arg(long)]
    pub classes: Option<String>,
    #[arg(long)]
    pub train: Option<String>,
    #[arg(long)]
    pub test: Option<String>,
    #[arg(long)]
    pub input: Option<String>,
    #[arg(long)]
    pub epochs: Option<String>,
    #[arg(long)]
    pub generator: Option<String>,
    #[arg(long)]
    pub cnn: Option<String>,
    #[arg(long)]
    pub split: Option<String>,
    #[arg(long)]
    pub fractions: Option<String>,
    #[arg(long)]
    pub seeds: Option<String>,
    /// Any other key, as KEY=VALUE.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    pub set: Vec<String>,
}

impl Flags {
    fn overrides(&self) -> Result<Vec<(String, String)>, CliError> {
        let named = [
            ("seed", &self.seed),
            ("out", &self.out),
            ("jobs", &self.jobs),
            ("shots", &self.shots),
            ("fraction", &self.fraction),
            ("jnr", &self.jnr),
            ("data", &self.data),
            ("classes", &self.classes),
            ("train", &self.train),
            ("test", &self.test),
            ("input", &self.input),
            ("epochs", &self.epochs),
            ("generator", &self.generator),
            ("cnn", &self.cnn),
            ("split", &self.split),
            ("fractions", &self.fractions),
            ("seeds", &self.seeds),
        ];
        let mut out: Vec<(String, String)> =
            named.iter().filter_map(|(k, v)| v.as_ref().map(|v| (k.to_string(), v.clone()))).collect();
        if self.no_augment {
            out.push(("augment".into(), "false".into()));
        }
        for kv in &self.set {
            let (k, v) = kv
                .split_once('=')
                .ok_or_else(|| CliError::Config(format!("--set {kv}: expected KEY=VALUE")))?;
            out.push((k.trim().to_string(), v.trim().to_string()));
        }
        Ok(out)
    }

    pub fn settings(&self) -> Result<Settings, CliError> {
        Settings::load(self.config.as_deref(), self.overrides()?)
    }
}

/// Runs one command and returns its one-line summary.
pub fn run(cli: Cli) -> Result<String, CliError> {
    use commands as c;
    match cli.command {
        Command::Generate(f) => c::generate(f.settings()?),
        Command::Preprocess(f) => c::preprocess(f.settings()?),
        Command::TrainGan(f) => c::train_gan_cmd(f.settings()?),
        Command::Augment(f) => c::augment(f.settings()?),
        Command::TrainCnn(f) => c::train_cnn_cmd(f.settings()?),
        Command::Evaluate(f) => c::evaluate_cmd(f.settings()?),
        Command::Sweep(f) => c::sweep(f.settings()?),
        Command::Project(f) => c::project(f.settings()?),
        Command::Flops(f) => c::flops(f.settings()?),
    }
}

//! `trident` — command-line front end for the radar activity-recognition
//! pipeline: synthetic dataset generation, raw-recording processing, model
//! training, evaluation, cross-validation and gradient verification.

mod commands;

use std::error::Error;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{ArgGroup, Args, Parser, Subcommand, ValueEnum};

use trident_core::harness::{default_decay_every, ExperimentConfig, Representation};

#[derive(Parser)]
#[command(
    name = "trident",
    version,
    about = "FMCW radar activity recognition: simulate scenes, build \
             time-range-Doppler cubes, train and cross-validate classifiers"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Render a synthetic labelled dataset (cubes, spectrograms, manifest)
    Simulate(SimulateArgs),
    /// Convert raw `.raws` recordings into time-range-Doppler cube files
    Process(ProcessArgs),
    /// Train one model on a dataset and save it
    Train(TrainArgs),
    /// Evaluate a saved model on a dataset
    Evaluate(EvaluateArgs),
    /// Leave-one-antenna-out cross-validation with report files
    Crossval(CrossvalArgs),
    /// Verify every layer's analytic gradients against finite differences
    Gradcheck(GradcheckArgs),
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum PresetArg {
    /// 6 activity classes x 10 tests x 4 antennas x 6 crops (1440 records)
    Desk,
    /// 4 activity classes x 5 tests (480 records); the quick benchmark
    Smoke,
    /// 2 classes separated only by range, not Doppler (240 records)
    RangeContrast,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum ReprArg {
    /// Three orthogonal cube projections -> three-branch classifier
    Cube3d,
    /// Doppler spectrograms -> single-branch baseline classifier
    Spectrogram,
}

impl From<ReprArg> for Representation {
    fn from(arg: ReprArg) -> Self {
        match arg {
            ReprArg::Cube3d => Representation::Cube3d,
            ReprArg::Spectrogram => Representation::Spectrogram,
        }
    }
}

#[derive(Args)]
#[command(group(ArgGroup::new("source").required(true).args(["preset", "recipe"])))]
struct SimulateArgs {
    /// Built-in dataset recipe
    #[arg(long, value_enum)]
    preset: Option<PresetArg>,
    /// Dataset recipe file (TOML)
    #[arg(long)]
    recipe: Option<PathBuf>,
    /// Output dataset directory
    #[arg(long)]
    out: PathBuf,
    /// Master seed (overrides the recipe's seed)
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Args)]
struct ProcessArgs {
    /// A `.raws` recording, or a directory scanned for them
    #[arg(long)]
    raw: PathBuf,
    /// Output directory for `.trdc` cube files
    #[arg(long)]
    out: PathBuf,
    /// Subtract each (frame, range-bin) mean over chirps before the
    /// Doppler FFT (suppresses static reflections)
    #[arg(long)]
    clutter_filter: bool,
    /// Split each recording into fixed-length crops of this many frames
    /// instead of writing one full-length cube
    #[arg(long)]
    crop_frames: Option<usize>,
    /// Evenly spaced crops per recording
    #[arg(long, default_value_t = 6, requires = "crop_frames")]
    crops: usize,
}

/// Experiment options shared by `train` and `crossval`: values come from
/// `--config` when given (defaults otherwise), and each flag overrides the
/// corresponding config key.
#[derive(Args)]
struct ConfigOverrides {
    /// Experiment configuration file (TOML)
    #[arg(long)]
    config: Option<PathBuf>,
    /// Dataset directory (required unless --config provides one)
    #[arg(long)]
    dataset: Option<PathBuf>,
    /// Input representation / model kind
    #[arg(long, value_enum)]
    representation: Option<ReprArg>,
    /// Master seed (scene-independent: drives model init and shuffling)
    #[arg(long)]
    seed: Option<u64>,
    /// Epoch budget; also rescales the learning-rate decay interval to 40%
    /// of the budget unless --lr-decay-every is given
    #[arg(long)]
    epochs: Option<usize>,
    /// Initial learning rate
    #[arg(long)]
    lr: Option<f64>,
    #[arg(long)]
    batch_size: Option<usize>,
    /// Epochs between learning-rate decay steps
    #[arg(long)]
    lr_decay_every: Option<usize>,
    /// Stop early once eval-mode accuracy on the training split reaches
    /// this fraction
    #[arg(long)]
    stop_at_train_acc: Option<f64>,
}

impl ConfigOverrides {
    fn resolve(&self) -> Result<ExperimentConfig, Box<dyn Error>> {
        let mut config = match &self.config {
            Some(path) => ExperimentConfig::from_path(path)?,
            None => {
                let dataset = self
                    .dataset
                    .clone()
                    .ok_or("either --config or --dataset is required")?;
                ExperimentConfig::for_dataset(dataset)
            }
        };
        if let Some(dataset) = &self.dataset {
            config.dataset_dir = dataset.clone();
        }
        if let Some(representation) = self.representation {
            config.representation = representation.into();
        }
        if let Some(seed) = self.seed {
            config.seed = seed;
        }
        if let Some(epochs) = self.epochs {
            config.train.epochs = epochs;
            config.train.lr_decay_every = default_decay_every(epochs);
        }
        if let Some(lr) = self.lr {
            config.train.initial_lr = lr;
        }
        if let Some(batch_size) = self.batch_size {
            config.train.batch_size = batch_size;
        }
        if let Some(every) = self.lr_decay_every {
            config.train.lr_decay_every = every;
        }
        if let Some(threshold) = self.stop_at_train_acc {
            config.train.stop_at_train_acc = Some(threshold);
        }
        config.validate()?;
        Ok(config)
    }
}

#[derive(Args)]
struct TrainArgs {
    #[command(flatten)]
    overrides: ConfigOverrides,
    /// Hold out this antenna and train on the rest (mirrors one
    /// cross-validation fold, including its seed derivation); trains on
    /// every record otherwise
    #[arg(long)]
    hold_out: Option<usize>,
    /// Where to save the trained model
    #[arg(long)]
    model_out: PathBuf,
}

#[derive(Args)]
struct EvaluateArgs {
    /// Trained model file (the representation is read from it)
    #[arg(long)]
    model: PathBuf,
    /// Dataset directory
    #[arg(long)]
    dataset: PathBuf,
    /// Evaluate only the records of this antenna
    #[arg(long)]
    antenna: Option<usize>,
}

#[derive(Args)]
struct CrossvalArgs {
    #[command(flatten)]
    overrides: ConfigOverrides,
    /// Report directory (overrides the config's output_dir)
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct GradcheckArgs {
    /// Master seed for the random probes
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Random restarts per layer (the worst error counts)
    #[arg(long, default_value_t = 5)]
    seeds: usize,
}

#[cfg(test)]
mod tests {
    use super::*;
    use clap::CommandFactory;

    #[test]
    fn cli_definition_is_consistent() {
        Cli::command().debug_assert();
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Simulate(args) => commands::simulate(args),
        Command::Process(args) => commands::process(args),
        Command::Train(args) => commands::train(args),
        Command::Evaluate(args) => commands::evaluate(args),
        Command::Crossval(args) => commands::crossval(args),
        Command::Gradcheck(args) => commands::gradcheck(args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(error) => {
            eprintln!("error: {error}");
            let mut source = error.source();
            while let Some(cause) = source {
                eprintln!("  caused by: {cause}");
                source = cause.source();
            }
            ExitCode::FAILURE
        }
    }
}

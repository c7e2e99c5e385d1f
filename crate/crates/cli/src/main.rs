use clap::{Parser, Subcommand};

use chainwatch_cli::commands::{
    cmd_ablate, cmd_detect, cmd_eval, cmd_gen_data, cmd_threshold_search, cmd_train, cmd_update_mlp,
    AblateArgs, DetectArgs, EvalArgs, GenDataArgs, SearchArgs, TrainArgs, UpdateArgs,
};
use chainwatch_cli::exit_code;

/// Anomaly detection for blockchain supply-chain network traffic.
#[derive(Parser)]
#[command(name = "chainwatch", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a seeded synthetic dataset file.
    GenData(GenDataArgs),
    /// Train and calibrate a model on a labeled dataset.
    Train(TrainArgs),
    /// Re-run the threshold search and rewrite τ in the model file.
    ThresholdSearch(SearchArgs),
    /// Evaluate a calibrated model on a labeled dataset.
    Eval(EvalArgs),
    /// Stream rows through a model, one verdict line per input line.
    Detect(DetectArgs),
    /// Retrain only the classifier on newly labeled traffic.
    UpdateMlp(UpdateArgs),
    /// Leave-one-attack-out study with classifier updates.
    Ablate(AblateArgs),
}

fn main() {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::GenData(args) => cmd_gen_data(args),
        Command::Train(args) => cmd_train(args),
        Command::ThresholdSearch(args) => cmd_threshold_search(args),
        Command::Eval(args) => cmd_eval(args),
        Command::Detect(args) => cmd_detect(args),
        Command::UpdateMlp(args) => cmd_update_mlp(args),
        Command::Ablate(args) => cmd_ablate(args),
    };
    if let Err(err) = result {
        eprintln!("error: {err}");
        std::process::exit(exit_code(&err));
    }
}

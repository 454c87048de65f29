use clap::{Parser, Subcommand};
use gfcn_cli::commands::{
    cmd_decompose, cmd_equiv_check, cmd_jordan, cmd_mnist_prepare, cmd_product, cmd_simulate,
    cmd_validate, DecomposeArgs, EquivArgs, JordanArgs, MnistPrepareArgs, ProductArgs,
    SimulateArgs, ValidateArgs,
};
use gfcn_cli::training::{cmd_eval, cmd_train, EvalArgs, TrainArgs};

#[derive(Parser)]
#[command(
    name = "gfcn",
    version,
    about = "Decompose graphs into parallel flows and run flow CNNs over them"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Decompose a graph into parallel flows and write a flow file
    Decompose(DecomposeArgs),
    /// Check a flow file against a graph
    Validate(ValidateArgs),
    /// Train a model and write checkpoint, config, and metrics
    Train(TrainArgs),
    /// Evaluate a trained model directory
    Eval(EvalArgs),
    /// Compile polynomial filters and compare against dense evaluation
    EquivCheck(EquivArgs),
    /// Generate epidemic snapshots as JSON lines
    Simulate(SimulateArgs),
    /// Report the Jordan center of an infected set
    Jordan(JordanArgs),
    /// Write the product of two graphs
    Product(ProductArgs),
    /// Validate MNIST IDX files and write the lattice graph and flows
    MnistPrepare(MnistPrepareArgs),
}

fn main() {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Decompose(args) => cmd_decompose(args),
        Command::Validate(args) => cmd_validate(args),
        Command::Train(args) => cmd_train(args),
        Command::Eval(args) => cmd_eval(args),
        Command::EquivCheck(args) => cmd_equiv_check(args),
        Command::Simulate(args) => cmd_simulate(args),
        Command::Jordan(args) => cmd_jordan(args),
        Command::Product(args) => cmd_product(args),
        Command::MnistPrepare(args) => cmd_mnist_prepare(args),
    };
    if let Err(e) = result {
        eprintln!("error: {e}");
        std::process::exit(e.code);
    }
}

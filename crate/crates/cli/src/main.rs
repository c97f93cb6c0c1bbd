//! `sbn`: build the guessing and matrix games, evaluate them, and write
//! reproducible result tables.

mod commands;
mod output;

use clap::{Parser, Subcommand};

use commands::{AsymmetryArgs, LetsplayArgs, NocountArgs, ReduceArgs, SolveZsArgs};

#[derive(Parser, Debug)]
#[command(name = "sbn", version, about = "Strategic Bayesian network experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Win probability of every constant guess in the one-player counting game.
    Nocount(NocountArgs),
    /// Induced bimatrix of the two-player counting game and the counter's advantage.
    Asymmetry(AsymmetryArgs),
    /// Equilibrium player against restricted opponents over a pool of skew-symmetric games.
    Letsplay(LetsplayArgs),
    /// Extensive-form tree of a network file.
    Reduce(ReduceArgs),
    /// Value and optimal strategies of a zero-sum matrix game.
    SolveZs(SolveZsArgs),
}

fn main() {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Nocount(a) => commands::nocount(a),
        Command::Asymmetry(a) => commands::asymmetry(a),
        Command::Letsplay(a) => commands::letsplay(a),
        Command::Reduce(a) => commands::reduce(a),
        Command::SolveZs(a) => commands::solve_zs(a),
    };
    if let Err(e) = result {
        eprintln!("error: {e}");
        std::process::exit(e.exit_code());
    }
}

//! `qmetric`: command-line front end for qmetric-core.
//!
//! Every command writes one JSON document to stdout and a one-line summary
//! to stderr. Exit codes: 0 when the property holds, 1 when it fails, 2 on
//! usage or input errors.

mod commands;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use qmetric_core::game::InputDist;
use qmetric_core::wstar::GraphAlgebra;

#[derive(Debug, Parser)]
#[command(name = "qmetric", version, about = "Metric isometry games, quantum isometries and W*-quantum metrics")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    #[command(flatten)]
    pub opts: Opts,
}

#[derive(Debug, Args)]
pub struct Opts {
    /// Input file; repeat for commands taking several inputs, in the order
    /// given by the command's help.
    #[arg(long = "in", value_name = "FILE", global = true)]
    pub inputs: Vec<PathBuf>,
    /// Tolerance for floating-point checks.
    #[arg(long, default_value_t = 1e-9, global = true)]
    pub tol: f64,
    #[arg(long, default_value_t = 0, global = true)]
    pub seed: u64,
    #[arg(long, default_value_t = 1000, global = true)]
    pub rounds: usize,
    /// Block dimension for `rep search`.
    #[arg(long, default_value_t = 1, global = true)]
    pub d: usize,
    #[arg(long, value_enum, default_value_t = Format::Json, global = true)]
    pub format: Format,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    #[command(subcommand)]
    Metric(MetricCmd),
    #[command(subcommand)]
    Game(GameCmd),
    #[command(subcommand)]
    Rep(RepCmd),
    #[command(subcommand)]
    Wstar(WstarCmd),
    #[command(subcommand)]
    Qgraph(QgraphCmd),
}

#[derive(Debug, Subcommand)]
pub enum MetricCmd {
    /// --in METRIC: check the metric axioms.
    Validate,
    /// --in X --in Y: all isometries X → Y in lexicographic order.
    Isometries,
    /// --in GRAPH: shortest-path metric of a weighted graph.
    Mcg,
}

#[derive(Debug, Subcommand)]
pub enum GameCmd {
    /// --in X --in Y: rule table of Isom(X, Y) and its synchronicity.
    Rules,
    /// --in X --in Y: a perfect deterministic strategy, if any.
    Solve,
    /// --in X --in Y [--in REP]: play rounds with the deterministic strategy,
    /// or with the correlation of REP when given.
    Simulate {
        #[arg(long, value_enum, default_value_t = Dist::Uniform)]
        dist: Dist,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Dist {
    Uniform,
    ExhaustiveCycle,
}

impl From<Dist> for InputDist {
    fn from(d: Dist) -> Self {
        match d {
            Dist::Uniform => InputDist::Uniform,
            Dist::ExhaustiveCycle => InputDist::ExhaustiveCycle,
        }
    }
}

#[derive(Debug, Subcommand)]
pub enum RepCmd {
    /// --in REP --in X --in Y: magic unitary, game-algebra relations and
    /// intertwining.
    Verify,
    /// --in X --in Y: numerical search for a representation in dimension --d.
    Search {
        #[arg(long, default_value_t = 2000)]
        max_iters: usize,
        #[arg(long, default_value_t = 8)]
        restarts: usize,
    },
    /// --in X --in Y: characteristic-polynomial obstruction.
    Obstruct,
}

#[derive(Debug, Subcommand)]
pub enum WstarCmd {
    /// --in METRIC: the filtration V_t = span{E_xy : d(x,y) ≤ t}.
    FromMetric,
    /// --in GRAPH: the filtration S_k = S_1^k of an unweighted graph.
    FromGraph {
        #[arg(long, value_enum, default_value_t = AlgebraArg::Full)]
        algebra: AlgebraArg,
    },
    /// --in FILTRATION: check the quantum-metric axioms.
    Verify,
    /// --in FILTRATION: recover the metric of an abelian filtration.
    Recover,
    /// --in REP --in V --in W: conjugation invariance; V and W may be
    /// filtration or metric files.
    Invariance,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum AlgebraArg {
    Full,
    Abelian,
}

impl From<AlgebraArg> for GraphAlgebra {
    fn from(a: AlgebraArg) -> Self {
        match a {
            AlgebraArg::Full => GraphAlgebra::Full,
            AlgebraArg::Abelian => GraphAlgebra::Abelian,
        }
    }
}

#[derive(Debug, Subcommand)]
pub enum QgraphCmd {
    /// --in QGRAPH: the three quantum adjacency axioms.
    Verify,
    /// --in QGRAPH: the operator system S = image of P.
    Bimodule,
    /// --in QGRAPH: the filtration V_k = V_1^k of the quantum graph.
    Filtration,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => {
            // --help and --version
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            println!("{}", serde_json::json!({ "error": e.kind().to_string() }));
            eprint!("{e}");
            return ExitCode::from(2);
        }
    };
    let (code, stdout, stderr) = match commands::run(&cli.command, &cli.opts) {
        Ok(out) => (u8::from(!out.holds), out.report, out.summary),
        Err(e) => (2, serde_json::json!({ "error": e.to_string() }).to_string(), format!("error: {e}")),
    };
    println!("{stdout}");
    eprintln!("{stderr}");
    ExitCode::from(code)
}

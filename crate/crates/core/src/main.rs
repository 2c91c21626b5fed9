use std::io::Read;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use privacy_frontier::cli::{self, EnumerateView, NumberMode, Problem};
use privacy_frontier::oracle::{cross_check_with_cap, DEFAULT_ORACLE_CAP};
use privacy_frontier::semichain::{enumerate_extreme_posteriors_with, EnumerateOptions, TwoChainStrategy};
use privacy_frontier::signals::{decompose_into_extremes, is_frontier, random_convex_combination};
use privacy_frontier::Error;

#[derive(Parser)]
#[command(name = "privacy-frontier", version, about = "Extreme posteriors of pairwise privacy constraints")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// List every extreme posterior with the semi-chain that produces it.
    Enumerate {
        /// Problem file (JSON), or `-` for stdin.
        problem: PathBuf,
        #[arg(long, value_enum, default_value_t = TableFormat::Json)]
        format: TableFormat,
        /// Stop at chains with this many levels.
        #[arg(long)]
        max_level: Option<usize>,
        /// Omit posteriors.
        #[arg(long)]
        chains_only: bool,
        /// Print decimals instead of exact fractions.
        #[arg(long)]
        float: bool,
        #[arg(long, value_enum, default_value_t = Strategy::Auto)]
        strategy: Strategy,
    },
    /// Compare the enumeration with a brute-force vertex oracle.
    Verify {
        problem: PathBuf,
        #[arg(long, value_enum, default_value_t = ReportFormat::Text)]
        format: ReportFormat,
        /// Largest state count the oracle accepts.
        #[arg(long, default_value_t = DEFAULT_ORACLE_CAP)]
        oracle_cap: usize,
    },
    /// Write a feasible posterior as a mixture of extreme posteriors.
    Decompose {
        problem: PathBuf,
        /// Comma-separated probabilities, e.g. `1/6,1/3,1/3,1/6`.
        #[arg(long, conflicts_with = "random")]
        posterior: Option<String>,
        /// Decompose a random feasible posterior instead.
        #[arg(long)]
        random: bool,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, value_enum, default_value_t = TableFormat::Json)]
        format: TableFormat,
        #[arg(long)]
        float: bool,
    },
    /// Print the constraint graph, optionally grouped by a semi-chain.
    Graph {
        problem: PathBuf,
        #[arg(long, value_enum, default_value_t = GraphFormat::Dot)]
        format: GraphFormat,
        /// Levels separated by `|`, labels by spaces: `"00 11 | 01 10"`.
        #[arg(long)]
        chain: Option<String>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum TableFormat {
    Json,
    Csv,
}

#[derive(Clone, Copy, ValueEnum)]
enum ReportFormat {
    Text,
    Json,
}

#[derive(Clone, Copy, ValueEnum)]
enum GraphFormat {
    Dot,
    Json,
}

#[derive(Clone, Copy, ValueEnum)]
enum Strategy {
    Auto,
    Trees,
    Scan,
}

impl From<Strategy> for TwoChainStrategy {
    fn from(s: Strategy) -> Self {
        match s {
            Strategy::Auto => TwoChainStrategy::Auto,
            Strategy::Trees => TwoChainStrategy::SpanningTrees,
            Strategy::Scan => TwoChainStrategy::BipartitionScan,
        }
    }
}

enum Failure {
    User(String),
    Internal(String),
    Mismatch,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        if e.is_internal() {
            Failure::Internal(e.to_string())
        } else {
            Failure::User(e.to_string())
        }
    }
}

fn load(path: &PathBuf) -> Result<Problem, Failure> {
    let text = if path.as_os_str() == "-" {
        let mut s = String::new();
        std::io::stdin().read_to_string(&mut s).map_err(|e| Failure::User(format!("stdin: {e}")))?;
        s
    } else {
        std::fs::read_to_string(path).map_err(|e| Failure::User(format!("{}: {e}", path.display())))?
    };
    let problem = cli::parse_problem(&text)?;
    if let Some(eps) = problem.epsilon {
        eprintln!("warning: epsilon = {eps} approximated by t = {}", problem.budget.t());
    }
    if problem.budget.is_degenerate() {
        eprintln!("warning: t = 1, the prior is the only feasible posterior");
    }
    Ok(problem)
}

fn pretty(v: &serde_json::Value) -> String {
    serde_json::to_string_pretty(v).expect("JSON values always serialize")
}

fn numbers(float: bool) -> NumberMode {
    if float {
        NumberMode::Float
    } else {
        NumberMode::Exact
    }
}

fn run(command: Command) -> Result<(), Failure> {
    match command {
        Command::Enumerate { problem, format, max_level, chains_only, float, strategy } => {
            let p = load(&problem)?;
            let options = EnumerateOptions { strategy: strategy.into(), max_level };
            let e = enumerate_extreme_posteriors_with(&p.graph, &p.prior, &p.budget, options)?;
            let view = EnumerateView { chains_only, numbers: numbers(float) };
            match format {
                TableFormat::Json => println!("{}", pretty(&cli::enumeration_json(&p, &e, view))),
                TableFormat::Csv => print!("{}", cli::enumeration_csv(&p, &e, view)),
            }
        }
        Command::Verify { problem, format, oracle_cap } => {
            let p = load(&problem)?;
            let report = cross_check_with_cap(&p.graph, &p.prior, &p.budget, oracle_cap)?;
            let division = cli::division_check(&p)?;
            match format {
                ReportFormat::Text => print!("{}", cli::report_text(&p, &report, division.as_ref())),
                ReportFormat::Json => println!("{}", pretty(&cli::report_json(&p, &report, division.as_ref()))),
            }
            if !report.is_match() || division.is_some_and(|d| !d.agrees) {
                return Err(Failure::Mismatch);
            }
        }
        Command::Decompose { problem, posterior, random, seed, format, float } => {
            let p = load(&problem)?;
            let mu = match (posterior, random) {
                (Some(text), _) => cli::parse_posterior(&text, p.states().len())?,
                (None, true) => {
                    let e = enumerate_extreme_posteriors_with(&p.graph, &p.prior, &p.budget, EnumerateOptions::default())?;
                    let points = e.posteriors();
                    let mut rng = ChaCha8Rng::seed_from_u64(seed);
                    random_convex_combination(&points, points.len().min(4), &mut rng)
                }
                (None, false) => return Err(Failure::User("pass --posterior or --random".into())),
            };
            let signal = match decompose_into_extremes(&mu, &p.graph, &p.prior, &p.budget) {
                Err(Error::NotMember) => {
                    return Err(Failure::User(format!(
                        "posterior is not feasible\n{}",
                        cli::describe_violations(&p, &mu)
                    )))
                }
                other => other?,
            };
            match format {
                TableFormat::Json => {
                    let mut out = cli::signal_json(&mu, &signal, numbers(float));
                    // Only a full signal (barycenter = prior) can be checked against the frontier.
                    if signal.barycenter() == *p.prior.probs() {
                        out["frontier"] = is_frontier(&signal, &p.graph, &p.prior, &p.budget)?.into();
                    }
                    println!("{}", pretty(&out));
                }
                TableFormat::Csv => print!("{}", cli::signal_csv(p.states(), &signal, numbers(float))),
            }
        }
        Command::Graph { problem, format, chain } => {
            let p = load(&problem)?;
            let chain = chain.map(|c| cli::parse_chain(&c, p.states())).transpose()?;
            match format {
                GraphFormat::Dot => print!("{}", cli::graph_dot(&p, chain.as_ref())),
                GraphFormat::Json => println!("{}", pretty(&cli::graph_json(&p, chain.as_ref()))),
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse().command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::User(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
        Err(Failure::Internal(msg)) => {
            eprintln!("internal error: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Mismatch) => ExitCode::from(2),
    }
}

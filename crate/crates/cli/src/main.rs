use banachfit_cli::{
    paint, run_admissible, run_reproduce, run_solve, run_supnorm, Overrides, EXIT_MISMATCH,
    EXIT_OK,
};
use clap::{Args, Parser, Subcommand};
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(
    name = "banachfit",
    version,
    about = "Minimal-norm interpolation with network-induced kernels"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct CommonArgs {
    /// Report destination (overrides the config's `output`).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Search seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Multistart count for the sup-norm search.
    #[arg(long)]
    starts: Option<usize>,
    /// Pattern-search iterations per start.
    #[arg(long)]
    iters: Option<usize>,
    /// Certification tolerance.
    #[arg(long)]
    tol: Option<f64>,
    /// Regularization strength.
    #[arg(long)]
    lambda0: Option<f64>,
    /// Let uncertified sign vectors join the regularization sweep.
    #[arg(long)]
    include_uncertified_signs: bool,
}

impl CommonArgs {
    fn overrides(&self) -> Overrides {
        Overrides {
            out: self.out.clone(),
            seed: self.seed,
            starts: self.starts,
            iters: self.iters,
            tol: self.tol,
            lambda0: self.lambda0,
            include_uncertified_signs: self.include_uncertified_signs,
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Solve the dataset in the config and write a report.
    Solve {
        #[arg(long)]
        config: PathBuf,
        #[command(flatten)]
        common: CommonArgs,
    },
    /// Enumerate admissible sign vectors for the dataset.
    Admissible {
        #[arg(long)]
        config: PathBuf,
        #[command(flatten)]
        common: CommonArgs,
    },
    /// Bracket the sup norm of a combination `coef:index,...` of kernel
    /// sections at the dataset points (1-based indices).
    Supnorm {
        #[arg(long)]
        config: PathBuf,
        combination: String,
        #[command(flatten)]
        common: CommonArgs,
    },
    /// Re-run the built-in reference example and compare every value.
    #[command(name = "reproduce-paper-example")]
    ReproducePaperExample {
        #[command(flatten)]
        common: CommonArgs,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let code = match cli.command {
        Command::Solve { config, common } => match run_solve(&config, &common.overrides()) {
            Ok((report, path)) => {
                for component in &report.components {
                    println!(
                        "component {}: status {}, norm in [{}, {}], decision: {}",
                        component.component,
                        component.status,
                        component.norm_bracket[0],
                        component.norm_bracket[1],
                        component.decision
                    );
                }
                println!("report written to {}", path.display());
                EXIT_OK
            }
            Err(e) => fail(e),
        },
        Command::Admissible { config, common } => {
            match run_admissible(&config, &common.overrides()) {
                Ok((rows, path)) => {
                    let width = rows.iter().map(|r| r.sign.len()).max().unwrap_or(4);
                    for row in &rows {
                        let verdict = match row.verdict.as_str() {
                            "admissible" => paint(&row.verdict, "32"),
                            "inadmissible" => paint(&row.verdict, "31"),
                            _ => paint(&row.verdict, "33"),
                        };
                        println!(
                            "{:width$}  {:<22}  {}",
                            row.sign,
                            verdict,
                            row.detail,
                            width = width
                        );
                    }
                    println!("table written to {}", path.display());
                    EXIT_OK
                }
                Err(e) => fail(e),
            }
        }
        Command::Supnorm {
            config,
            combination,
            common,
        } => match run_supnorm(&config, &combination, &common.overrides()) {
            Ok(outcome) => {
                println!("lower   = {}", outcome.lower);
                println!("upper   = {}", outcome.upper);
                println!(
                    "status  = {}",
                    if outcome.certified {
                        "certified-exact"
                    } else {
                        "bracketed"
                    }
                );
                println!("witness = {:?}", outcome.witness);
                EXIT_OK
            }
            Err(e) => fail(e),
        },
        Command::ReproducePaperExample { common } => {
            let outcome = run_reproduce(&common.overrides());
            for line in &outcome.lines {
                let tag = if line.pass() {
                    paint("PASS", "32")
                } else {
                    paint("FAIL", "31")
                };
                println!(
                    "{tag} {:<34} expected {:<22} got {:<22} tol {}",
                    line.name, line.expected, line.got, line.tol
                );
            }
            let failures = outcome.failures();
            if failures.is_empty() {
                println!("all {} values reproduced", outcome.lines.len());
                EXIT_OK
            } else {
                println!("{} of {} values differ:", failures.len(), outcome.lines.len());
                for line in failures {
                    println!(
                        "  {} expected {} got {} (tol {})",
                        line.name, line.expected, line.got, line.tol
                    );
                }
                EXIT_MISMATCH
            }
        }
    };
    ExitCode::from(code as u8)
}

fn fail(e: banachfit_cli::CliError) -> i32 {
    eprintln!("error: {}", e.message());
    e.exit_code()
}

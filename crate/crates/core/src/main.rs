use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use orbistrat::geodesic::{DispatchConfig, Strategy};
use orbistrat::scenarios::{
    emit_example, example_names, load_example, load_model, run_geodesic, run_stratify, ScenarioError,
    StrategyChoice, EXIT_OPEN_CASE,
};
use orbistrat::strata::OrbifoldModel;

/// Singular strata and closed geodesics of flat orbifolds ℝⁿ/Γ.
#[derive(Debug, Parser)]
#[command(name = "orbistrat", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Load a model and check its invariants.
    Validate {
        /// Model file, or the name of a built-in example.
        model: String,
    },
    /// Stratify the quotient by singular dimension.
    Stratify {
        /// Model file, or the name of a built-in example.
        model: String,
        /// Directory for report.json, polylines.csv and overview.svg.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Also write an SVG overview (two-dimensional models only).
        #[arg(long)]
        svg: bool,
    },
    /// Build and verify a closed geodesic.
    Geodesic {
        /// Model file, or the name of a built-in example.
        model: String,
        /// auto, hyperbolic, sigma1, closed-component, even-isotropy or odd-stratum.
        #[arg(long, default_value = "auto")]
        strategy: StrategyChoice,
        /// Skip a strategy when dispatching (repeatable).
        #[arg(long)]
        disable: Vec<Strategy>,
        /// Longest word searched for a hyperbolic element.
        #[arg(long, default_value_t = 4)]
        word_length: usize,
        /// Directory for report.json.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// The built-in example models.
    Examples {
        #[command(subcommand)]
        action: ExamplesAction,
    },
}

#[derive(Debug, Subcommand)]
enum ExamplesAction {
    /// Print the example names, one per line.
    List,
    /// Print a model file exactly as shipped.
    Emit { name: String },
}

fn resolve(model: &str) -> Result<OrbifoldModel, ScenarioError> {
    let path = Path::new(model);
    if !path.exists() && example_names().any(|n| n == model) {
        return load_example(model);
    }
    load_model(path)
}

fn run(cli: Cli) -> Result<i32, ScenarioError> {
    match cli.command {
        Command::Validate { model } => {
            let m = resolve(&model)?;
            println!(
                "ok: {} (dimension {}, {} generators, {} elements move the box into itself)",
                m.label(),
                m.dimension(),
                m.group().generators().len(),
                m.box_moves().len()
            );
            Ok(0)
        }
        Command::Stratify { model, out, svg } => {
            let m = resolve(&model)?;
            let run = run_stratify(&m, out.as_deref(), svg)?;
            print!("{}", run.report.to_json());
            Ok(0)
        }
        Command::Geodesic {
            model,
            strategy,
            disable,
            word_length,
            out,
        } => {
            let m = resolve(&model)?;
            let config = DispatchConfig {
                disabled: disable,
                hyperbolic_word_length: word_length,
            };
            let run = run_geodesic(&m, strategy, &config, out.as_deref())?;
            print!("{}", run.report.to_json());
            Ok(if run.outcome.strategy == Strategy::OpenCase {
                EXIT_OPEN_CASE
            } else {
                0
            })
        }
        Command::Examples { action } => {
            match action {
                ExamplesAction::List => {
                    for name in example_names() {
                        println!("{name}");
                    }
                }
                ExamplesAction::Emit { name } => print!("{}", emit_example(&name)?),
            }
            Ok(0)
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use corridor_bo::bo::{EiVariant, Termination};
use corridor_bo::Error;
use corridor_bo_cli::config::{Mode, Overrides, RunSpec};
use corridor_bo_cli::report::Report;
use corridor_bo_cli::{exit, exit_code, init_threads, runner, THREADS_ENV};

#[derive(Parser)]
#[command(name = "corridor-bo", version, about = "Tilt and power optimization for ground users and UAV corridors")]
#[command(after_help = format!("Set {THREADS_ENV} to limit the number of worker threads."))]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Run Bayesian optimization and score the best setting on fresh drops.
    Optimize {
        #[command(flatten)]
        common: Common,
        /// Continue from the checkpoint in the output directory.
        #[arg(long)]
        resume: bool,
    },
    /// Score the all-downtilt, full-power network.
    Baseline {
        #[command(flatten)]
        common: Common,
    },
    /// Score a stored best_config.json.
    Eval {
        #[command(flatten)]
        common: Common,
        /// best_config.json to evaluate.
        #[arg(long, value_name = "PATH")]
        from: PathBuf,
    },
    /// Compare the lambda = 0, 0.5, 1 and baseline runs.
    Report {
        /// Run directories containing summary.json.
        #[arg(required = true, value_name = "RUN_DIR")]
        runs: Vec<PathBuf>,
        /// Where to write report.md and report.csv.
        #[arg(long, value_name = "DIR")]
        out: Option<PathBuf>,
    },
}

#[derive(Args)]
struct Common {
    /// TOML config file.
    #[arg(long, value_name = "PATH")]
    config: Option<PathBuf>,
    #[arg(long, value_name = "F")]
    lambda: Option<f64>,
    #[arg(long, value_name = "N")]
    seed: Option<u64>,
    #[arg(long, value_name = "DIR")]
    out: Option<PathBuf>,
    #[arg(long, value_enum)]
    ei_variant: Option<Variant>,
    #[arg(long, value_name = "N")]
    max_iters: Option<usize>,
}

#[derive(Clone, Copy, ValueEnum)]
enum Variant {
    Paper,
    Textbook,
}

impl Common {
    fn spec(&self, mode: Mode) -> Result<RunSpec, Error> {
        let ov = Overrides {
            lambda: self.lambda,
            seed: self.seed,
            output_dir: self.out.clone(),
            ei_variant: self.ei_variant.map(|v| match v {
                Variant::Paper => EiVariant::Paper,
                Variant::Textbook => EiVariant::Textbook,
            }),
            max_iterations: self.max_iters,
        };
        RunSpec::load(mode, self.config.as_deref(), &ov)
    }
}

fn print_means(r: &runner::RunResult) {
    let s = &r.summary;
    println!(
        "mean SINR over {} drops: GUE {:.2} dB, UAV {:.2} dB (objective {:.3}); outputs in {}",
        s.eval_seeds.len(),
        s.mean_sinr_gue_db,
        s.mean_sinr_uav_db,
        s.objective,
        r.output_dir.display()
    );
}

fn run(cli: Cli) -> Result<i32, Error> {
    init_threads()?;
    match cli.cmd {
        Cmd::Optimize { common, resume } => {
            let spec = common.spec(Mode::Optimize)?;
            let r = runner::run_optimize(&spec, resume)?;
            let stats = r.summary.optimization.as_ref().expect("optimize summary has stats");
            println!(
                "{} iterations, best observed {:.3}, {:?}",
                stats.iterations, stats.best_observed, stats.termination
            );
            print_means(&r);
            if stats.termination == Termination::IterationCap {
                eprintln!("stopped at the iteration cap before convergence");
                return Ok(exit::ITERATION_CAP);
            }
        }
        Cmd::Baseline { common } => {
            let spec = common.spec(Mode::Baseline)?;
            print_means(&runner::run_baseline(&spec)?);
        }
        Cmd::Eval { common, from } => {
            let spec = common.spec(Mode::Eval)?;
            print_means(&runner::run_eval(&spec, &from, common.lambda)?);
        }
        Cmd::Report { runs, out } => {
            let rep = Report::collect(&runs)?;
            let dir = out.unwrap_or_else(|| PathBuf::from("."));
            rep.write(&dir)?;
            print!("{}", rep.markdown());
        }
    }
    Ok(exit::OK)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { exit::CONFIG } else { exit::OK };
            let _ = e.print();
            return ExitCode::from(code as u8);
        }
    };
    match run(cli) {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e) as u8)
        }
    }
}

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use zofw::experiment::{self, EstimatorKind, ExperimentConfig, Overrides};
use zofw::Error;

const EXIT_VALIDATION: u8 = 1;
const EXIT_RUNTIME: u8 = 2;
const EXIT_ACCEPTANCE: u8 = 3;

#[derive(Parser)]
#[command(name = "zofw", version, about = "Zeroth-order stochastic Frank-Wolfe experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one experiment from a TOML config.
    Run {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        estimator: Option<EstimatorKind>,
        #[arg(long)]
        m: Option<usize>,
        #[arg(long = "T", value_name = "N")]
        horizon: Option<u64>,
        #[arg(long)]
        trials: Option<u64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Repeat a config over several dimensions and fit the final gap against d.
    Sweep {
        #[arg(long)]
        config: PathBuf,
        #[arg(long, value_delimiter = ',', required = true)]
        dims: Vec<usize>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run the acceptance suite.
    Check,
}

fn fail(code: u8, err: &Error) -> ExitCode {
    eprintln!("error: {err}");
    ExitCode::from(code)
}

fn load(path: &PathBuf, overrides: &Overrides) -> Result<ExperimentConfig, Error> {
    let mut config = ExperimentConfig::load(path)?;
    config.apply(overrides);
    Ok(config)
}

fn run(config: ExperimentConfig) -> ExitCode {
    let prepared = match experiment::prepare(config) {
        Ok(p) => p,
        Err(e) => return fail(EXIT_VALIDATION, &e),
    };
    let outcome = match experiment::execute(&prepared) {
        Ok(o) => o,
        Err(e) => return fail(EXIT_RUNTIME, &e),
    };
    for f in &outcome.fits {
        match &f.fit {
            Ok(r) => println!("{:<16} slope {:+.4} (r2 {:.3})", f.metric, r.slope, r.r_squared),
            Err(e) => println!("{:<16} no fit: {e}", f.metric),
        }
    }
    if let Some(dir) = &outcome.out_dir {
        println!("wrote {}", dir.display());
    }
    for a in &outcome.assertions {
        let verdict = if a.passed { "PASS" } else { "FAIL" };
        println!("{verdict} {} slope in [{}, {}]", a.metric, a.range[0], a.range[1]);
    }
    if outcome.passed() {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(EXIT_ACCEPTANCE)
    }
}

fn sweep(config: ExperimentConfig, dims: &[usize], out: Option<PathBuf>) -> ExitCode {
    let out = out.or_else(|| config.out.clone());
    let mut base = config;
    base.out = out.clone();
    let configs = experiment::dimension_family(&base, dims);
    let prepared = match experiment::prepare_sweep(&configs) {
        Ok(p) => p,
        Err(e) => return fail(EXIT_VALIDATION, &e),
    };
    match experiment::sweep_prepared(&prepared, out.as_deref()) {
        Ok(report) => {
            for (d, g, se) in &report.points {
                println!("d = {d:>5}: final {} {g:.4e} +- {se:.1e}", report.metric);
            }
            match (&report.fit, &report.note) {
                (Some(f), _) => println!("slope vs d {:+.4}", f.slope),
                (None, Some(n)) => println!("{n}"),
                _ => {}
            }
            ExitCode::SUCCESS
        }
        Err(e) => fail(EXIT_RUNTIME, &e),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(EXIT_VALIDATION) } else { ExitCode::SUCCESS };
        }
    };
    match cli.command {
        Command::Run { config, seed, estimator, m, horizon, trials, out } => {
            let overrides = Overrides { seed, estimator, m, horizon, trials, out };
            match load(&config, &overrides) {
                Ok(c) => run(c),
                Err(e) => fail(EXIT_VALIDATION, &e),
            }
        }
        Command::Sweep { config, dims, out } => match load(&config, &Overrides::default()) {
            Ok(c) => sweep(c, &dims, out),
            Err(e) => fail(EXIT_VALIDATION, &e),
        },
        Command::Check => {
            let outcomes = zofw::checks::run_all();
            for o in &outcomes {
                println!("{o}");
            }
            let failed = outcomes.iter().filter(|o| !o.passed).count();
            println!("{} of {} criteria passed", outcomes.len() - failed, outcomes.len());
            if failed == 0 {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(EXIT_ACCEPTANCE)
            }
        }
    }
}

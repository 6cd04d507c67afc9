use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use relrep::harness::{self, HarnessError, RunConfig, EXIT_OK};
use relrep::neuralnet::gradcheck::DEFAULT_TOLERANCE;

#[derive(Parser, Debug)]
#[command(name = "relrep", version, about = "CNN relation extraction benchmarks over representation stacks")]
struct Cli {
    /// JSON run configuration.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Seed for `train` and `gradcheck`.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Comma-separated seed list, overrides the config.
    #[arg(long, global = true, value_delimiter = ',')]
    seeds: Option<Vec<u64>>,
    /// Output directory (for `prep`, the dataset file).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Parallel runs for `bench` (default: available cores).
    #[arg(long, global = true)]
    workers: Option<usize>,
    /// Gradient-check pass threshold.
    #[arg(long, global = true)]
    tolerance: Option<f64>,
    /// Print the fully resolved config and exit.
    #[arg(long, global = true)]
    dump_config: bool,
    /// Suppress progress output on stderr.
    #[arg(long, short, global = true)]
    quiet: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Parse a SemEval corpus file into the JSON dataset format.
    Prep { corpus: PathBuf },
    /// Train one stack with one seed and score it on the test set.
    Train {
        #[arg(long)]
        stack: Option<String>,
    },
    /// Train every stack with every seed and write the reports.
    Bench,
    /// Finite-difference gradient check on a synthetic sample.
    Gradcheck {
        #[arg(long)]
        toy_linear: bool,
    },
    /// Rebuild report CSVs from report.json and print the table.
    Report,
}

fn resolve_config(cli: &Cli, required: bool) -> Result<RunConfig, HarnessError> {
    let mut cfg = match &cli.config {
        Some(path) => RunConfig::load(path)?,
        None if required => return Err(HarnessError::Config("--config is required for this command".into())),
        None => RunConfig::default(),
    };
    if let Some(seeds) = &cli.seeds {
        cfg.seeds = seeds.clone();
    }
    if let Some(out) = &cli.out {
        cfg.out = out.clone();
    }
    if let Some(w) = cli.workers {
        cfg.workers = Some(w);
    }
    Ok(cfg)
}

fn run(cli: &Cli) -> Result<(), HarnessError> {
    let needs_config = matches!(cli.command, Command::Train { .. } | Command::Bench);
    if cli.dump_config {
        println!("{}", resolve_config(cli, needs_config)?.to_pretty_json());
        return Ok(());
    }
    let verbose = !cli.quiet;
    match &cli.command {
        Command::Prep { corpus } => {
            let out = cli.out.clone().ok_or_else(|| HarnessError::Config("prep needs --out <file>".into()))?;
            let (n, k) = harness::cmd_prep(corpus, &out)?;
            println!("{n} sentences, {k} labels -> {}", out.display());
        }
        Command::Train { stack } => {
            let cfg = resolve_config(cli, true)?;
            cfg.validate()?;
            let seed = cli.seed.unwrap_or(cfg.seeds[0]);
            let m = harness::cmd_train(cfg, stack.as_deref(), seed, verbose)?;
            let a = m.test.macro_avg;
            println!("{} seed {}: P {:.4} R {:.4} F1 {:.4}", m.stack, m.seed, a.precision, a.recall, a.f1);
        }
        Command::Bench => {
            let cfg = resolve_config(cli, true)?;
            let out = cfg.out.clone();
            harness::cmd_bench(cfg, verbose)?;
            print!("{}", harness::cmd_report(&out)?);
        }
        Command::Gradcheck { toy_linear } => {
            let tol = cli.tolerance.unwrap_or(DEFAULT_TOLERANCE);
            let seed = cli.seed.unwrap_or(0);
            let report = harness::cmd_gradcheck(seed, tol, *toy_linear)?;
            println!("pass: max relative error {:e} < {tol:e}", report.max_rel_error);
        }
        Command::Report => {
            let cfg = resolve_config(cli, false)?;
            print!("{}", harness::cmd_report(&cfg.out)?);
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::from(EXIT_OK as u8),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use clap::CommandFactory;

    #[test]
    fn cli_is_well_formed() {
        Cli::command().debug_assert();
    }

    #[test]
    fn seeds_parse_as_csv() {
        let cli = Cli::try_parse_from(["relrep", "bench", "--seeds", "1,2,3"]).unwrap();
        assert_eq!(cli.seeds, Some(vec![1, 2, 3]));
    }
}

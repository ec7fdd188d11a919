use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use projdiff::diagnostics::{report_summary, write_report_csv};
use projdiff_cli::analyze::analyze;
use projdiff_cli::checks::{run_all, Level};
use projdiff_cli::config::ExperimentConfig;
use projdiff_cli::genmodel::{generate, SPEC_HELP};
use projdiff_cli::simulate::simulate;
use projdiff_cli::CliError;

const CONFIG_HELP: &str = "\
CONFIGURATION (TOML, one section per concern):

  [prior]
  kind = \"lrgmm\"        # lrgmm | sparse | box | file
  d = 64                # lrgmm: d, r, k, pi = \"uniform\" | [weights], optional seed
  r = 5                 # sparse: d, s    box: d, s, half_width    file: path
  k = 8

  [sensing]
  m = 20                # or matrix = \"a.txt\" (a gen-model matrix file)
  mu = \"auto\"           # 1.9/||A||^2, or a number
  # seed = 3            # one A for all trials; otherwise one per trial

  [[schedule]]          # repeat per schedule
  kind = \"geometric\"    # geometric | linear | cosine | infinite_geometric
  sigma_max = 0.5
  sigma_min = 1e-4      # finite schedules
  horizon = 150         # finite schedules
  # ratio = 0.97        # infinite_geometric

  [run]
  n_iters = 150
  trials = 20           # trial seeds base_seed, base_seed+1, ...
  base_seed = 1         # or seeds = [..]
  output = \"out\"
  denoiser = \"mmse\"     # mmse | projection

The resolved configuration (all seeds explicit) is written next to the traces.

EXIT CODES: 0 ok, 2 configuration error, 3 numeric divergence, 4 check failures.";

#[derive(Parser, Debug)]
#[command(name = "projdiff", version, about = "Projected-diffusion recovery experiments", after_long_help = CONFIG_HELP)]
struct Cli {
    /// Replace the trial seeds by base_seed = N, N+1, ...
    #[arg(long, global = true, value_name = "N")]
    seed_override: Option<u64>,
    /// Worker threads (0: available parallelism)
    #[arg(long, global = true, default_value_t = 0)]
    threads: usize,
    /// Output directory (overrides run.output; check writes its report here)
    #[arg(long, global = true, value_name = "DIR")]
    out: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Run every (trial, schedule) pair of a configuration
    Simulate { config: PathBuf },
    /// Run the invariant-check suite
    Check {
        /// Complete grids and the 20-trial reference experiment
        #[arg(long)]
        full: bool,
    },
    /// Summarize a directory of traces into summary.csv and rates.csv
    Analyze { dir: PathBuf },
    /// Write a model file
    #[command(after_help = SPEC_HELP)]
    GenModel {
        spec: String,
        #[arg(short = 'o', long = "output")]
        output: PathBuf,
    },
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Simulate { config } => {
            let base = config.parent().map(Path::to_path_buf);
            let mut cfg = ExperimentConfig::load(&config)?.resolve(base.as_deref(), cli.seed_override)?;
            if let Some(out) = &cli.out {
                cfg.run.output = out.clone();
            }
            let out = cfg.run.output.clone();
            let manifest = simulate(&cfg, &out, cli.threads)?;
            println!("wrote {} traces to {}", manifest.runs.len(), out.display());
            Ok(())
        }
        Command::Check { full } => {
            let level = if full { Level::Full } else { Level::Fast };
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(cli.threads)
                .build()
                .map_err(|e| CliError::Other(e.to_string()))?;
            let records = pool.install(|| run_all(level));
            print!("{}", report_summary(&records));
            if let Some(dir) = &cli.out {
                std::fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
                let path = dir.join("check_report.csv");
                let file = std::fs::File::create(&path).map_err(|e| CliError::io(&path, e))?;
                write_report_csv(&records, file).map_err(|e| CliError::io(&path, e))?;
            }
            match records.iter().filter(|r| !r.pass).count() {
                0 => Ok(()),
                n => Err(CliError::ChecksFailed(n)),
            }
        }
        Command::Analyze { dir } => {
            let analysis = analyze(&dir)?;
            println!("{:<20} {:>5} {:>12} {:>12} {:>10} {:>8}", "schedule", "runs", "median_mse", "mean_mse", "converged", "burn_in");
            for s in &analysis.summaries {
                println!(
                    "{:<20} {:>5} {:>12.3e} {:>12.3e} {:>10} {:>8.2}",
                    s.kind.name(),
                    s.runs,
                    s.median_final_mse,
                    s.mean_final_mse,
                    s.converged,
                    s.mean_burn_in
                );
            }
            if !analysis.skipped.is_empty() {
                println!("skipped {} file(s)", analysis.skipped.len());
            }
            Ok(())
        }
        Command::GenModel { spec, output } => {
            let model = generate(&spec)?;
            projdiff::write_model(&output, &model).map_err(|e| CliError::Other(e.to_string()))?;
            println!("wrote {} to {}", model.kind(), output.display());
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

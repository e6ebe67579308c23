use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use wscma::runner::{
    gen_source, gen_source_state, run_experiment, sensitivity_sweep, similarity_report, write_experiment,
    write_similarity, write_sweep, ExperimentConfig,
};
use wscma::Error;

#[derive(Parser)]
#[command(name = "wscma", version, about = "Warm-started CMA-ES experiments on synthetic transfer tasks")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run every method on the target task and write trajectories and summaries
    Run(Common),
    /// Similarity and warm-start improvement for each source offset
    Similarity {
        #[command(flatten)]
        common: Common,
        /// Comma-separated source offsets
        #[arg(long)]
        offsets: Option<String>,
        /// Monte-Carlo samples per KL estimate
        #[arg(long)]
        samples: Option<String>,
        /// gaussian or uniform
        #[arg(long)]
        prior: Option<String>,
    },
    /// Repeat the experiment over values of alpha or gamma
    Sweep {
        #[command(flatten)]
        common: Common,
        /// alpha or gamma
        #[arg(long)]
        param: Option<String>,
        /// Comma-separated values
        #[arg(long)]
        values: Option<String>,
    },
    /// Write the source archive and the source CMA-ES distribution
    GenSource(Common),
}

#[derive(Args)]
struct Common {
    /// key=value config file; flags override it
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    problem: Option<String>,
    #[arg(long)]
    offset_source: Option<String>,
    #[arg(long)]
    offset_target: Option<String>,
    /// Method name; repeat the flag or separate with commas
    #[arg(long)]
    method: Vec<String>,
    #[arg(long)]
    budget: Option<String>,
    #[arg(long)]
    reps: Option<String>,
    #[arg(long)]
    seed: Option<String>,
    #[arg(long)]
    gamma: Option<String>,
    #[arg(long)]
    alpha: Option<String>,
    #[arg(long)]
    lambda: Option<String>,
    /// Output directory
    #[arg(long)]
    out: Option<String>,
    /// Worker threads, 0 for all cores
    #[arg(long)]
    jobs: Option<String>,
}

impl Common {
    fn config(&self, extra: &[(&str, &Option<String>)]) -> Result<ExperimentConfig, Error> {
        let mut config = match &self.config {
            Some(path) => ExperimentConfig::load(path)?,
            None => ExperimentConfig::default(),
        };
        let methods = (!self.method.is_empty()).then(|| self.method.join(","));
        let overrides = [
            ("problem", &self.problem),
            ("offset_source", &self.offset_source),
            ("offset_target", &self.offset_target),
            ("methods", &methods),
            ("budget", &self.budget),
            ("reps", &self.reps),
            ("seed", &self.seed),
            ("gamma", &self.gamma),
            ("alpha", &self.alpha),
            ("lambda", &self.lambda),
            ("out", &self.out),
            ("jobs", &self.jobs),
        ];
        for (key, value) in overrides.iter().chain(extra) {
            if let Some(v) = value {
                config.set(key, v).map_err(|e| e.context(&format!("--{}", key.replace('_', "-"))))?;
            }
        }
        config.validate()?;
        Ok(config)
    }
}

enum Outcome {
    Complete,
    Partial,
}

fn execute(command: Command) -> Result<Outcome, Error> {
    match command {
        Command::Run(common) => {
            let config = common.config(&[])?;
            let result = run_experiment(&config)?;
            write_experiment(&result, &config.out)?;
            println!("{:<14} {:>14} {:>14}", "method", "mean_best", "stderr_best");
            for s in result.summaries()? {
                println!("{:<14} {:>14.6e} {:>14.6e}", s.method.as_str(), s.mean_best, s.stderr_best);
            }
            for (m, e) in result.errors() {
                eprintln!("{}: {e}", m.as_str());
            }
            Ok(if result.is_complete() { Outcome::Complete } else { Outcome::Partial })
        }
        Command::Similarity { common, offsets, samples, prior } => {
            let config =
                common.config(&[("offsets", &offsets), ("similarity_samples", &samples), ("prior", &prior)])?;
            let report = similarity_report(&config)?;
            write_similarity(&report, &config.out)?;
            println!("{:<8} {:>12} {:>12} {:>14}", "b_source", "s_hat", "s_stderr", "improvement");
            for r in &report.rows {
                println!(
                    "{:<8} {:>12.5} {:>12.5} {:>14.6e}",
                    r.offset_source,
                    r.similarity.s_hat,
                    r.similarity.standard_error,
                    r.improvement()
                );
            }
            for (b, e) in &report.errors {
                eprintln!("b_source {b}: {e}");
            }
            Ok(if report.is_complete() { Outcome::Complete } else { Outcome::Partial })
        }
        Command::Sweep { common, param, values } => {
            let config = common.config(&[("sweep_param", &param), ("sweep_values", &values)])?;
            let result = sensitivity_sweep(&config)?;
            write_sweep(&result, &config.out)?;
            print!("{}", result.summary_csv()?);
            eprint!("{}", result.errors_csv().lines().skip(1).map(|l| format!("{l}\n")).collect::<String>());
            Ok(if result.is_complete() { Outcome::Complete } else { Outcome::Partial })
        }
        Command::GenSource(common) => {
            let config = common.config(&[])?;
            std::fs::create_dir_all(&config.out)?;
            let archive_path = config.out.join("source_archive.csv");
            gen_source(&config)?.save(&archive_path)?;
            let state_path = config.out.join("source_state.mgd");
            gen_source_state(&config)?.write_to(std::fs::File::create(&state_path)?)?;
            println!("{}\n{}", archive_path.display(), state_path.display());
            Ok(Outcome::Complete)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(cli.command) {
        Ok(Outcome::Complete) => ExitCode::SUCCESS,
        Ok(Outcome::Partial) => ExitCode::from(2),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}

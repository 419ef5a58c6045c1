use std::fs::{self, File};
use std::io::BufWriter;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand};
use swipt_core::channel::{db_to_linear, FarFieldStats};
use swipt_core::geometry::Aperture;
use swipt_core::harness::gain::write_gain_csv;
use swipt_core::harness::validate::run_checks;
use swipt_core::harness::{
    gain_sweep, run_sweep_with_jobs, summarize, write_csv, write_summary, GainAxis, Scenario,
};

#[derive(Parser)]
#[command(name = "swipt", about = "Dual-IRS SWIPT experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Monte Carlo sweep from a config file.
    Run {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        seed: u64,
        /// Overrides the trial count of the config.
        #[arg(long)]
        trials: Option<usize>,
        /// Worker threads; defaults to all cores.
        #[arg(long)]
        jobs: Option<usize>,
        /// Record per-row wall time. Off by default so output is reproducible.
        #[arg(long)]
        timing: bool,
    },
    /// Hybrid-field gain versus panel size along one axis.
    GainSweep {
        #[arg(long, value_parser = parse_axis)]
        axis: GainAxis,
        #[arg(long)]
        max: usize,
        #[arg(long)]
        out: PathBuf,
        /// Element count of the other axis.
        #[arg(long, default_value_t = 10)]
        fixed: usize,
        #[arg(long, default_value_t = 1.0)]
        l_x: f64,
        #[arg(long, default_value_t = 1.0)]
        l_y: f64,
        #[arg(long, default_value_t = 0.2)]
        spacing: f64,
        /// Panel-to-user distance of the Rayleigh hop, m.
        #[arg(long, default_value_t = 45.0)]
        distance: f64,
        #[arg(long, default_value_t = 1.6)]
        path_loss_exponent: f64,
        #[arg(long, default_value_t = -20.0, allow_hyphen_values = true)]
        reference_gain_db: f64,
    },
    /// Runs the built-in oracle checks.
    Validate,
}

fn parse_axis(s: &str) -> std::result::Result<GainAxis, String> {
    s.parse().map_err(|e: swipt_core::SwiptError| e.to_string())
}

fn summary_path(out: &Path) -> PathBuf {
    let mut name = out.as_os_str().to_owned();
    name.push(".summary.csv");
    PathBuf::from(name)
}

fn run(config: &Path, out: &Path, seed: u64, trials: Option<usize>, jobs: Option<usize>, timing: bool) -> Result<()> {
    let text = fs::read_to_string(config).with_context(|| format!("reading {}", config.display()))?;
    let mut scenario = Scenario::from_config(&text)?;
    scenario.master_seed = seed;
    if let Some(t) = trials {
        if t == 0 {
            bail!("--trials must be at least 1");
        }
        scenario.trials = t;
    }
    let jobs = jobs.unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()));
    let rows = run_sweep_with_jobs(&scenario, timing, jobs)?;
    write_csv(&rows, BufWriter::new(File::create(out)?))?;
    let cells = summarize(&rows);
    let side = summary_path(out);
    write_summary(&cells, BufWriter::new(File::create(&side)?))?;
    for c in cells.iter().filter(|c| c.flagged) {
        eprintln!(
            "warning: {} at {} = {} infeasible in {}/{} trials",
            c.scheme,
            c.sweep_variable.as_str(),
            c.sweep_value,
            c.infeasible,
            c.trials
        );
    }
    eprintln!("wrote {} rows to {} and summary to {}", rows.len(), out.display(), side.display());
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Run { config, out, seed, trials, jobs, timing } => run(&config, &out, seed, trials, jobs, timing),
        Command::GainSweep {
            axis,
            max,
            out,
            fixed,
            l_x,
            l_y,
            spacing,
            distance,
            path_loss_exponent,
            reference_gain_db,
        } => (|| {
            if max == 0 {
                bail!("--max must be at least 1");
            }
            let template = Aperture {
                l_x,
                l_y,
                n_x: fixed,
                n_z: fixed,
                spacing,
                element_area: spacing * spacing,
            };
            let stats = FarFieldStats::new(path_loss_exponent, db_to_linear(reference_gain_db), distance)?;
            let values: Vec<usize> = (1..=max).collect();
            let rows = gain_sweep(&template, &stats, axis, &values)?;
            write_gain_csv(&rows, BufWriter::new(File::create(&out)?))?;
            Ok(())
        })(),
        Command::Validate => {
            let checks = run_checks();
            for c in &checks {
                println!("{} {}: {}", if c.passed { "PASS" } else { "FAIL" }, c.name, c.detail);
            }
            if checks.iter().all(|c| c.passed) {
                Ok(())
            } else {
                Err(anyhow::anyhow!("some checks failed"))
            }
        }
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}

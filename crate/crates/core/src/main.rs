use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use cl_saddle::cli::config::{parse_pairs, split_pair};
use cl_saddle::cli::sweep::fit_series;
use cl_saddle::cli::{fit_linear, read_series, run_axis_sweep, write_csv, SweepConfig};
use cl_saddle::Error;

#[derive(Parser)]
#[command(
    name = "cl-saddle",
    version,
    about = "Caldeira-Leggett decoherence from complex saddle points"
)]
struct Args {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a sweep described by a key = value config file and write CSV.
    Run {
        config: PathBuf,
        /// Override a config key (repeatable).
        #[arg(long = "set", value_name = "KEY=VALUE", value_parser = split_pair)]
        set: Vec<(String, String)>,
        /// Worker threads (default: all cores).
        #[arg(long)]
        jobs: Option<usize>,
    },
    /// Refit the rescaled width of an existing CSV.
    Fit {
        csv: PathBuf,
        /// Fit window `lo,hi`.
        #[arg(long, value_parser = parse_window)]
        window: (f64, f64),
        /// axis_value of the series to fit.
        #[arg(long)]
        series: Option<f64>,
    },
}

fn parse_window(s: &str) -> Result<(f64, f64), String> {
    let (a, b) = s.split_once(',').ok_or("expected lo,hi")?;
    let lo = a.trim().parse::<f64>().map_err(|e| e.to_string())?;
    let hi = b.trim().parse::<f64>().map_err(|e| e.to_string())?;
    Ok((lo, hi))
}

fn run(config: PathBuf, set: Vec<(String, String)>, jobs: Option<usize>) -> Result<(), Error> {
    let text = std::fs::read_to_string(&config)
        .map_err(|e| Error::Config(format!("{}: {e}", config.display())))?;
    let mut pairs = parse_pairs(&text)?;
    pairs.extend(set);
    let cfg = SweepConfig::from_pairs(&pairs)?;

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs.unwrap_or(0))
        .build()
        .map_err(|e| Error::Config(format!("thread pool: {e}")))?;
    let rows = pool.install(|| run_axis_sweep(&cfg))?;

    match &cfg.out {
        Some(path) => {
            let file = File::create(path)
                .map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
            let mut w = BufWriter::new(file);
            write_csv(&rows, cfg.axis.name(), &mut w)?;
            w.flush()?;
        }
        None => write_csv(&rows, cfg.axis.name(), io::stdout().lock())?,
    }

    if let Some(window) = cfg.fit_window {
        for (value, fit) in fit_series(&rows, window) {
            match fit {
                Ok(f) => eprintln!(
                    "fit {}={value}: A={:.6} B={:.6} rms={:.3e} n={} window=[{}, {}]",
                    cfg.axis, f.slope, f.intercept, f.rms, f.count, window.0, window.1
                ),
                Err(e) => eprintln!("fit {}={value}: {e}", cfg.axis),
            }
        }
    }
    Ok(())
}

fn fit(csv: PathBuf, window: (f64, f64), series: Option<f64>) -> Result<(), Error> {
    let file = File::open(&csv).map_err(|e| Error::Config(format!("{}: {e}", csv.display())))?;
    let points = read_series(file, series)?;
    let f = fit_linear(&points, window).map_err(|e| Error::Config(e.to_string()))?;
    println!(
        "A={:.12} B={:.12} rms={:.6e} n={}",
        f.slope, f.intercept, f.rms, f.count
    );
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let args = Args::parse();
    let result = match args.command {
        Command::Run { config, set, jobs } => run(config, set, jobs),
        Command::Fit {
            csv,
            window,
            series,
        } => fit(csv, window, series),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.is_numerical() { 3 } else { 2 })
        }
    }
}

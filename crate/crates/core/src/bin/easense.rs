use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use easense::hyperspace::{HyperSpace, ParamKind};
use easense::indices::SensitivityReport;
use easense::metrics::Metric;
use easense::runner::{bins_file, run_experiment, ExperimentConfig, RunOptions, Store};
use easense::sampling::Method;
use easense::util::fmt_f64;

#[derive(Parser)]
#[command(name = "easense", version, about = "Sensitivity analysis of evolutionary-algorithm hyperparameters")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run or resume the experiment described by a TOML or JSON config.
    Run {
        config: PathBuf,
        /// Stop after this many new cells (the store stays resumable).
        #[arg(long)]
        cell_limit: Option<usize>,
    },
    /// Print sensitivity indices from a complete store.
    Report {
        store: PathBuf,
        #[arg(long)]
        metric: Option<Metric>,
        /// Must match the store's sampling method when given.
        #[arg(long)]
        method: Option<Method>,
    },
    /// Write and print the binned score curve of one hyperparameter.
    Bins {
        store: PathBuf,
        #[arg(long)]
        param: String,
        #[arg(long)]
        metric: Option<Metric>,
        #[arg(long)]
        bins: Option<usize>,
        #[arg(long)]
        sigma: Option<f64>,
    },
    /// Write pairwise t-tests and problem clusters.
    Stats { store: PathBuf },
    /// List the built-in hyperparameter spaces.
    Presets,
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}

fn print_report(metric: Metric, r: &SensitivityReport) {
    println!("# {} / {}", r.method, metric);
    println!("{:<20} {:>14} {:>14} {:>8} {:>8} {:>5}", "param", "direct", "interaction", "d_norm", "i_norm", "rank");
    for &i in &r.ranking {
        println!(
            "{:<20} {:>14.6e} {:>14.6e} {:>8.4} {:>8.4} {:>5}",
            r.params[i],
            r.direct[i],
            r.interaction[i],
            r.direct_norm[i],
            r.interaction_norm[i],
            r.ranks()[i]
        );
    }
    if r.dropped > 0 {
        println!("({} trajectories or rows dropped for non-finite outputs)", r.dropped);
    }
}

fn run(cli: Cli) -> easense::Result<()> {
    match cli.command {
        Command::Run { config, cell_limit } => {
            let cfg = ExperimentConfig::load(&config)?;
            let out = run_experiment(&cfg, &RunOptions { cell_limit })?;
            println!(
                "{}: {} cells, {} resumed, {} executed, {} failed runs",
                out.dir.display(),
                out.total_cells,
                out.resumed,
                out.executed,
                out.failed_runs
            );
            match out.analysis {
                None => println!("incomplete; run again to resume"),
                Some(a) => {
                    for (m, r) in &a.reports {
                        print_report(*m, r);
                    }
                    for w in &a.warnings {
                        eprintln!("warning: {w}");
                    }
                }
            }
        }
        Command::Report { store, metric, method } => {
            let store = Store::open(&store)?;
            if let Some(m) = method {
                if m != store.manifest.method {
                    return Err(easense::Error::InvalidInput(format!(
                        "store was sampled with {}, not {m}",
                        store.manifest.method
                    )));
                }
            }
            let metrics = metric.map_or_else(|| store.manifest.metrics.clone(), |m| vec![m]);
            for m in metrics {
                print_report(m, &store.report(m)?);
            }
        }
        Command::Bins { store, param, metric, bins, sigma } => {
            let store = Store::open(&store)?;
            let metric = metric.unwrap_or(store.manifest.metrics[0]);
            let curve = store.bins(&param, metric, bins, sigma)?;
            let text = curve.to_csv_string()?;
            std::fs::write(store.dir.join(bins_file(&param, metric)), &text)?;
            print!("{text}");
        }
        Command::Stats { store } => {
            let store = Store::open(&store)?;
            let a = store.write_all_reports()?;
            for w in &a.warnings {
                eprintln!("warning: {w}");
            }
            println!("wrote {} and {}", store.dir.join("ttests.csv").display(), store.dir.join("clusters.csv").display());
        }
        Command::Presets => {
            for name in HyperSpace::PRESETS {
                let space = HyperSpace::preset(name)?;
                println!("{name} (k = {})", space.k());
                for p in space.params() {
                    let domain = match &p.kind {
                        ParamKind::Continuous { lower, upper } => format!("real [{}, {}]", fmt_f64(*lower), fmt_f64(*upper)),
                        ParamKind::Integer { lower, upper } => format!("integer [{lower}, {upper}]"),
                        ParamKind::Categorical { labels } => format!("one of {}", labels.join(", ")),
                        ParamKind::Boolean => "boolean".to_string(),
                    };
                    println!("  {:<16} {domain}", p.name);
                }
            }
        }
    }
    Ok(())
}

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use log::info;

use gnnpmb::io::{self, RunConfig};
use gnnpmb::metrics::{format_table, MatchConfig};
use gnnpmb::sim::{simulate, write_scenario, SimConfig};
use gnnpmb::Error;

#[derive(Parser)]
#[command(name = "gnnpmb", version, about = "GNN-PMB multi-object tracker")]
struct Cli {
    /// Log progress (RUST_LOG takes precedence).
    #[arg(short, long, global = true)]
    verbose: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Track every scene and class of a detections file.
    Track {
        /// Run configuration (TOML).
        #[arg(short, long)]
        config: Option<PathBuf>,
        /// Detections file; required without --config.
        #[arg(short, long)]
        input: Option<PathBuf>,
        /// Ground truth to evaluate against after tracking.
        #[arg(short, long)]
        ground_truth: Option<PathBuf>,
        #[arg(short, long)]
        output_dir: Option<PathBuf>,
        /// Worker threads; 0 uses every CPU.
        #[arg(short = 'j', long)]
        parallelism: Option<usize>,
        /// Also write one SVG per frame.
        #[arg(long)]
        plot: bool,
    },
    /// Evaluate a results file against ground truth.
    Eval {
        #[arg(short, long)]
        results: PathBuf,
        #[arg(short, long)]
        ground_truth: PathBuf,
        /// Where to write metrics.json and metrics.txt.
        #[arg(short, long)]
        output_dir: Option<PathBuf>,
        #[arg(long, default_value_t = MatchConfig::default().match_distance)]
        match_distance: f64,
        #[arg(long, default_value_t = MatchConfig::default().n_recalls)]
        n_recalls: usize,
    },
    /// Generate a synthetic scenario (detections.json and ground_truth.json).
    Simulate {
        /// Simulator configuration (TOML); defaults otherwise.
        #[arg(short, long)]
        config: Option<PathBuf>,
        #[arg(short, long)]
        seed: Option<u64>,
        #[arg(short, long)]
        frames: Option<u64>,
        #[arg(short, long)]
        output_dir: PathBuf,
    },
    /// Render results (and optionally detections) as BEV SVG frames.
    Plot {
        #[arg(short, long)]
        results: PathBuf,
        #[arg(short, long)]
        detections: Option<PathBuf>,
        /// Frame indices to render; all frames when omitted.
        #[arg(long, value_delimiter = ',')]
        frames: Option<Vec<u64>>,
        #[arg(short, long)]
        output_dir: PathBuf,
    },
}

fn missing(flag: &str) -> Error {
    Error::InvalidParameter(format!("{flag} is required without --config"))
}

fn load_sim_config(path: &Path) -> Result<SimConfig, Error> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::Io {
        path: path.to_path_buf(),
        source: e,
    })?;
    toml::from_str(&text).map_err(|e| Error::Parse {
        path: path.to_path_buf(),
        json_path: String::new(),
        message: e.to_string().trim_end().to_string(),
    })
}

fn run(command: Command) -> Result<(), Error> {
    match command {
        Command::Track {
            config,
            input,
            ground_truth,
            output_dir,
            parallelism,
            plot,
        } => {
            let mut cfg = match &config {
                Some(path) => RunConfig::load(path)?,
                None => RunConfig::new(
                    input.clone().ok_or_else(|| missing("--input"))?,
                    output_dir.clone().ok_or_else(|| missing("--output-dir"))?,
                ),
            };
            if let Some(p) = input {
                cfg.input = p;
            }
            if let Some(p) = output_dir {
                cfg.output_dir = p;
            }
            if let Some(p) = ground_truth {
                cfg.ground_truth = Some(p);
            }
            if let Some(n) = parallelism {
                cfg.parallelism = n;
            }
            cfg.plot |= plot;
            let summary = io::run_tracking(&cfg)?;
            info!("{} streams tracked", summary.streams.len());
            println!("results: {}", summary.results.display());
            if let Some(m) = &summary.metrics {
                let report: gnnpmb::metrics::MetricsReport = io::read_json(m)?;
                print!("{}", format_table(&report));
                println!("metrics: {}", m.display());
            }
        }
        Command::Eval {
            results,
            ground_truth,
            output_dir,
            match_distance,
            n_recalls,
        } => {
            let cfg = MatchConfig {
                match_distance,
                n_recalls,
            };
            let report = io::evaluate(&results, &ground_truth, &cfg)?;
            print!("{}", format_table(&report));
            if let Some(dir) = output_dir {
                let path = io::write_report(&dir, &report)?;
                println!("metrics: {}", path.display());
            }
        }
        Command::Simulate {
            config,
            seed,
            frames,
            output_dir,
        } => {
            let mut cfg = match &config {
                Some(path) => load_sim_config(path)?,
                None => SimConfig::default(),
            };
            if let Some(s) = seed {
                cfg.seed = s;
            }
            if let Some(f) = frames {
                cfg.frames = f;
            }
            let scenario = simulate(&cfg)?;
            write_scenario(&output_dir, &scenario)?;
            println!("scenario: {}", output_dir.display());
        }
        Command::Plot {
            results,
            detections,
            frames,
            output_dir,
        } => {
            let results = io::load_results(&results)?;
            let detections = detections.map(|p| io::load_detections(&p)).transpose()?;
            let written = io::emit_plots(&results, detections.as_deref(), frames.as_deref(), &output_dir)?;
            println!("{} plots written to {}", written.len(), output_dir.display());
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    env_logger::Builder::new()
        .filter_level(if cli.verbose {
            log::LevelFilter::Info
        } else {
            log::LevelFilter::Warn
        })
        .parse_default_env()
        .format_timestamp(None)
        .init();
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            let body = serde_json::json!({ "error": e.to_string(), "kind": e.kind() });
            eprintln!("{body}");
            ExitCode::FAILURE
        }
    }
}

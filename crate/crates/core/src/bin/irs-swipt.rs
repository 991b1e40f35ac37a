use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use irs_swipt::experiments::{self, ExperimentConfig, Figure};
use irs_swipt::Scheme;

#[derive(Parser)]
#[command(name = "irs-swipt", version, about = "Monte Carlo sweeps of IRS-aided SWIPT transmission schemes")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a sweep and write records.csv, allocations.csv, points.csv and summary.json.
    Run {
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        trials: Option<usize>,
        /// Comma-separated subset of hybrid, ps, ts, tdma, tdma_d.
        #[arg(long, value_delimiter = ',')]
        schemes: Option<Vec<Scheme>>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Turn the records of a finished run into fig_<name>.csv (and optionally a PNG).
    Figure {
        #[arg(long)]
        records: PathBuf,
        /// rate_vs_n, rate_vs_dt, rate_vs_e, time_fractions or ps_ratios.
        #[arg(long)]
        figure: Figure,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        png: bool,
    },
    /// Feasibility-only pass over every sweep point.
    Check {
        #[arg(long)]
        config: Option<PathBuf>,
    },
    /// Print the default configuration.
    Config,
}

fn load(config: Option<PathBuf>) -> irs_swipt::Result<ExperimentConfig> {
    match config {
        Some(path) => ExperimentConfig::load(&path),
        None => Ok(ExperimentConfig::default()),
    }
}

fn run(cli: Cli) -> irs_swipt::Result<()> {
    match cli.command {
        Command::Run { config, seed, trials, schemes, out } => {
            let mut cfg = load(config)?;
            cfg.seed = seed.unwrap_or(cfg.seed);
            cfg.trials = trials.unwrap_or(cfg.trials);
            cfg.schemes = schemes.unwrap_or(cfg.schemes);
            cfg.out_dir = out.unwrap_or(cfg.out_dir);
            let result = experiments::run_experiment(&cfg)?;
            println!(
                "{:>5} {:>7} {:>6} {:>10}  {:<8} {:>10} {:>9}",
                "point", "N", "d_T", "E", "scheme", "rate", "feasible"
            );
            for p in &result.summary.points {
                for s in &p.schemes {
                    println!(
                        "{:>5} {:>7} {:>6} {:>10.3e}  {:<8} {:>10.4} {:>9.2}",
                        p.point.point_id,
                        p.point.n_total,
                        p.point.d_t,
                        p.point.eh_target,
                        s.scheme.name(),
                        s.mean_sum_rate,
                        s.feasible_fraction
                    );
                }
            }
            println!("results in {}", cfg.out_dir.display());
        }
        Command::Figure { records, figure, out, png } => {
            let (points, recs) = experiments::read_records(&records)?;
            let rows = experiments::emit_figure_data(&points, &recs, figure);
            let path = experiments::write_figure(&out, figure, &rows)?;
            println!("{}", path.display());
            if png && !rows.is_empty() {
                let png_path = out.join(format!("fig_{}.png", figure.name()));
                experiments::render_png(&png_path, &rows)?;
                println!("{}", png_path.display());
            }
        }
        Command::Check { config } => {
            let cfg = load(config)?;
            println!("{:>5} {:>7} {:>6} {:>10}  {:>8} {:>8}", "point", "N", "d_T", "E", "hybrid", "tdma");
            for f in experiments::check_feasibility(&cfg)? {
                println!(
                    "{:>5} {:>7} {:>6} {:>10.3e}  {:>8.2} {:>8.2}",
                    f.point.point_id, f.point.n_total, f.point.d_t, f.point.eh_target, f.hybrid, f.tdma
                );
            }
        }
        Command::Config => print!("{}", ExperimentConfig::default().to_toml()?),
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    irs_swipt::limit_blas_threads();
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}

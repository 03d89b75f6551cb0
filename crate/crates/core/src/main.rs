use std::fs::File;
use std::io::{self, Write};
use std::path::PathBuf;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand};

use qrc::dimension::{covariance_dimension, reservoir_dimension, DimensionParams};
use qrc::entanglement::negativity_trace_from;
use qrc::fixtures::moebius_strip;
use qrc::harness::aggregate::write_summary;
use qrc::harness::{aggregate, run_sweep, write_outputs, Sidecar, SweepSpec, Table};
use qrc::memory::{run_stm_task, StmTask};
use qrc::reservoir::{uniform_inputs, ReservoirConfig};

#[derive(Parser)]
#[command(name = "qrc", version, about = "Quantum reservoir computing experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a sweep spec and write <name>.csv and <name>.json into the output directory.
    Sweep {
        spec: PathBuf,
        #[arg(short, long)]
        out: PathBuf,
    },
    /// Short-term memory capacity of one reservoir.
    Stm {
        #[command(flatten)]
        reservoir: ReservoirArgs,
        #[arg(long, default_value_t = 50)]
        tau_max: usize,
        #[arg(long, default_value_t = 500)]
        washout: usize,
        #[arg(long, default_value_t = 2000)]
        train: usize,
        #[arg(long, default_value_t = 1000)]
        test: usize,
        #[arg(long, default_value_t = 0)]
        input_seed: u64,
        #[arg(long, default_value_t = 1e-9)]
        ridge_lambda: f64,
        /// Print the full report as JSON.
        #[arg(long)]
        json: bool,
    },
    /// Negativity of every bipartition along a driven trajectory.
    Negativity {
        #[command(flatten)]
        reservoir: ReservoirArgs,
        #[arg(long, default_value_t = 700)]
        steps: usize,
        /// First input step included in the average.
        #[arg(long, default_value_t = 500)]
        from: usize,
        #[arg(long, default_value_t = 0)]
        input_seed: u64,
        /// Write the full trace as CSV.
        #[arg(short, long)]
        out: Option<PathBuf>,
    },
    /// Covariance dimension of a driven trajectory.
    Dimension {
        #[command(flatten)]
        reservoir: ReservoirArgs,
        #[arg(long, default_value_t = 1000)]
        steps: usize,
        #[arg(long, default_value_t = 500)]
        washout: usize,
        #[arg(long, default_value_t = 0)]
        input_seed: u64,
        #[command(flatten)]
        estimator: EstimatorArgs,
    },
    /// Covariance dimension of a Möbius-strip point cloud.
    DemoMoebius {
        #[arg(long, default_value_t = 5000)]
        points: usize,
        #[arg(long, default_value_t = 2.0)]
        radius: f64,
        #[arg(long, default_value_t = 0.5)]
        half_width: f64,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[command(flatten)]
        estimator: EstimatorArgs,
        /// Write the point cloud as CSV.
        #[arg(short, long)]
        out: Option<PathBuf>,
    },
    /// Ensemble mean and sample std of a results CSV.
    Aggregate {
        csv: PathBuf,
        #[arg(long, value_delimiter = ',', default_value = "n_qubits,j0,gamma")]
        group_by: Vec<String>,
        #[arg(short, long)]
        out: Option<PathBuf>,
    },
}

#[derive(Args)]
struct ReservoirArgs {
    #[arg(short = 'n', long, default_value_t = 3)]
    n_qubits: usize,
    #[arg(long, default_value_t = 0.3)]
    j0: f64,
    #[arg(long, default_value_t = 0.0)]
    gamma: f64,
    #[arg(long, default_value_t = ReservoirConfig::default().h)]
    h: f64,
    /// Input interval as h * Δt.
    #[arg(long, default_value_t = 5.0)]
    delta_t: f64,
    #[arg(short = 'v', long, default_value_t = 10)]
    v_multiplex: usize,
    #[arg(long, default_value_t = 0)]
    coupling_seed: u64,
}

impl ReservoirArgs {
    fn config(&self) -> ReservoirConfig {
        ReservoirConfig {
            n_qubits: self.n_qubits,
            h: self.h,
            j0: self.j0,
            delta_t: self.delta_t,
            v_multiplex: self.v_multiplex,
            gamma: self.gamma,
            coupling_seed: self.coupling_seed,
        }
    }
}

#[derive(Args)]
struct EstimatorArgs {
    #[arg(long, default_value_t = 32)]
    k_neighbors: usize,
    #[arg(long, default_value_t = 200)]
    n_anchors: usize,
    #[arg(long, default_value_t = 1e-3)]
    threshold: f64,
}

impl EstimatorArgs {
    fn params(&self) -> DimensionParams {
        DimensionParams {
            k_neighbors: self.k_neighbors,
            n_anchors: self.n_anchors,
            threshold: self.threshold,
        }
    }
}

fn output(path: Option<&PathBuf>) -> Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(File::create(p).with_context(|| format!("creating {}", p.display()))?),
        None => Box::new(io::stdout().lock()),
    })
}

fn main() -> Result<()> {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    match Cli::parse().command {
        Command::Sweep { spec, out } => {
            let spec = SweepSpec::load(&spec)?;
            let rows = run_sweep(&spec)?;
            let files = write_outputs(&out, &spec, &rows)?;
            let car = Sidecar::new(&spec, &rows);
            println!("rows       {}", car.rows);
            println!("failed     {}", car.failed_rows);
            println!("hash       {}", car.determinism_hash);
            println!("csv        {}", files.csv.display());
            println!("sidecar    {}", files.sidecar.display());
        }
        Command::Stm { reservoir, tau_max, washout, train, test, input_seed, ridge_lambda, json } => {
            let task = StmTask { tau_max, washout, train, test, input_seed, ridge_lambda };
            let report = run_stm_task(&reservoir.config(), &task)?;
            if json {
                println!("{}", serde_json::to_string_pretty(&report)?);
            } else {
                for (tau, c) in report.per_delay.iter().enumerate() {
                    println!("{tau:>4} {c:.6}");
                }
                println!("C_STM {:.6}", report.total);
            }
        }
        Command::Negativity { reservoir, steps, from, input_seed, out } => {
            let trace = negativity_trace_from(&reservoir.config(), &uniform_inputs(steps, input_seed), from)?;
            for (bp, series) in trace.bipartitions.iter().zip(&trace.values) {
                let mean = series.iter().sum::<f64>() / series.len().max(1) as f64;
                println!("{:<8} {mean:.6}", bp.label());
            }
            println!("mean     {:.6}", trace.time_average);
            if let Some(path) = out {
                let mut w = csv::Writer::from_writer(output(Some(&path))?);
                let mut header = vec!["time".to_string(), "post_injection".to_string()];
                header.extend(trace.bipartitions.iter().map(|b| b.label()));
                w.write_record(&header)?;
                for t in 0..trace.times.len() {
                    let mut rec = vec![trace.times[t].to_string(), trace.post_injection[t].to_string()];
                    rec.extend(trace.values.iter().map(|s| s[t].to_string()));
                    w.write_record(&rec)?;
                }
                w.flush()?;
            }
        }
        Command::Dimension { reservoir, steps, washout, input_seed, estimator } => {
            let cfg = reservoir.config();
            let est = reservoir_dimension(&cfg, &uniform_inputs(steps, input_seed), washout, &estimator.params())?;
            println!("D_c       {:.4}", est.d_c);
            println!("D_max     {}", est.d_max);
            println!("fraction  {:.4}", est.fraction);
        }
        Command::DemoMoebius { points, radius, half_width, seed, estimator, out } => {
            let cloud = moebius_strip(points, radius, half_width, seed);
            let est = covariance_dimension(&cloud, 3, &estimator.params())?;
            println!("{}", serde_json::to_string_pretty(&serde_json::json!({
                "points": points,
                "radius": radius,
                "half_width": half_width,
                "d_c": est.d_c,
                "d_max": est.d_max,
                "degenerate_anchors": est.degenerate_anchors,
                "params": est.params,
            }))?);
            if let Some(path) = out {
                let mut w = csv::Writer::from_writer(output(Some(&path))?);
                w.write_record(["x", "y", "z"])?;
                for p in &cloud {
                    w.write_record(p.iter().map(f64::to_string))?;
                }
                w.flush()?;
            }
        }
        Command::Aggregate { csv, group_by, out } => {
            let file = File::open(&csv).with_context(|| format!("opening {}", csv.display()))?;
            let table = Table::read(file)?;
            let keys: Vec<&str> = group_by.iter().map(String::as_str).collect();
            let groups = aggregate(&table, &keys)?;
            write_summary(output(out.as_ref())?, &keys, &groups)?;
        }
    }
    Ok(())
}

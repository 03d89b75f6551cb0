//! Runs every `(grid point, realization)` job and collects ordered rows.

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::{Path, PathBuf};
use std::time::Instant;

use rayon::prelude::*;

use crate::dimension::{bloch_vector, covariance_dimension, bloch_dim, DimensionEstimate};
use crate::entanglement::NegativityMeter;
use crate::error::{QrcError, Result};
use crate::harness::results::{write_csv, ResultRow, Sidecar, SOFTWARE_VERSION};
use crate::harness::spec::{Job, SweepSpec};
use crate::memory::{evaluate_stm, StmReport};
use crate::reservoir::{
    uniform_inputs, EventKind, Reservoir, ReservoirConfig, StateHealth, POSITIVITY_TOL,
};

/// Everything measured on one realization.
#[derive(Debug, Clone, Default)]
pub struct Measurement {
    pub mean_negativity: Option<f64>,
    pub dimension: Option<DimensionEstimate>,
    pub stm: Option<StmReport>,
    /// Worst health over every visited state, when audited.
    pub health: Option<StateHealth>,
}

/// Drives one reservoir once and evaluates every enabled measurement on the
/// same trajectory.
pub fn measure(spec: &SweepSpec, cfg: &ReservoirConfig, input_seed: u64) -> Result<Measurement> {
    let m = spec.measurements;
    let a = &spec.analysis;
    let washout = spec.task.washout;
    let inputs = uniform_inputs(spec.run_length(), input_seed);
    let reservoir = Reservoir::new(cfg)?;
    let meter = m.negativity.then(|| NegativityMeter::new(cfg.n_qubits)).transpose()?;

    let neg_window = washout..washout + a.negativity_steps;
    let dim_window = washout..washout + a.dimension_steps;
    let (mut neg_sum, mut neg_count) = (0.0, 0usize);
    let mut points = Vec::new();
    let mut health: Option<StateHealth> = None;

    let records = reservoir.run(&inputs, |ev| {
        if m.audit {
            let h = ev.state.health()?;
            if h.min_eigenvalue < POSITIVITY_TOL {
                return Err(QrcError::PositivityViolation(h.min_eigenvalue));
            }
            health = Some(health.map_or(h, |acc| acc.merge(h)));
        }
        if let Some(meter) = &meter {
            if neg_window.contains(&ev.step) {
                let v = meter.measure(ev.state)?;
                neg_sum += v.iter().sum::<f64>() / v.len() as f64;
                neg_count += 1;
            }
        }
        if m.dimension && dim_window.contains(&ev.step) && matches!(ev.kind, EventKind::SubStep(_)) {
            points.push(bloch_vector(ev.state));
        }
        Ok(())
    })?;

    let dimension = if m.dimension {
        Some(covariance_dimension(&points, bloch_dim(cfg.n_qubits), &a.dimension_params())?)
    } else {
        None
    };
    let stm = if m.stm {
        Some(evaluate_stm(&records, &inputs, cfg, &spec.stm_task(input_seed))?)
    } else {
        None
    };
    Ok(Measurement {
        mean_negativity: meter.map(|_| neg_sum / neg_count as f64),
        dimension,
        stm,
        health,
    })
}

/// Evaluates one job. Errors and panics land in the row's error column.
pub fn run_job(spec: &SweepSpec, job: &Job) -> ResultRow {
    let start = Instant::now();
    let cfg = spec.reservoir_config(job);
    let outcome = catch_unwind(AssertUnwindSafe(|| measure(spec, &cfg, job.input_seed)))
        .unwrap_or_else(|p| {
            let msg = p
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_else(|| "panic".into());
            Err(QrcError::InvalidConfig(format!("panic: {msg}")))
        });
    let mut row = ResultRow {
        n_qubits: job.n_qubits,
        j0: job.j0,
        gamma: job.gamma,
        realization_index: job.realization,
        coupling_seed: job.coupling_seed,
        input_seed: job.input_seed,
        mean_negativity: None,
        d_c: None,
        d_c_fraction: None,
        c_stm: None,
        c_tau: Vec::new(),
        max_trace_error: None,
        max_hermiticity_error: None,
        min_eigenvalue: None,
        runtime_ms: 0,
        software_version: SOFTWARE_VERSION.to_string(),
        error: None,
    };
    match outcome {
        Ok(meas) => {
            row.mean_negativity = meas.mean_negativity;
            if let Some(d) = meas.dimension {
                row.d_c = Some(d.d_c);
                row.d_c_fraction = Some(d.fraction);
            }
            if let Some(s) = meas.stm {
                row.c_stm = Some(s.total);
                row.c_tau = s.per_delay;
            }
            if let Some(h) = meas.health {
                row.max_trace_error = Some(h.trace_error);
                row.max_hermiticity_error = Some(h.hermiticity_error);
                row.min_eigenvalue = Some(h.min_eigenvalue);
            }
        }
        Err(e) => {
            log::warn!(
                "N={} J0={} gamma={} realization {} failed: {e}",
                job.n_qubits, job.j0, job.gamma, job.realization
            );
            row.error = Some(e.to_string());
        }
    }
    row.runtime_ms = start.elapsed().as_millis() as u64;
    row
}

/// Runs the whole sweep on a private thread pool; rows come back in job order.
pub fn run_sweep(spec: &SweepSpec) -> Result<Vec<ResultRow>> {
    spec.validate()?;
    let workers = spec.resolve_workers()?;
    let jobs = spec.jobs();
    log::info!("sweep {}: {} jobs on {workers} workers", spec.name, jobs.len());
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| QrcError::InvalidConfig(e.to_string()))?;
    Ok(pool.install(|| jobs.par_iter().map(|job| run_job(spec, job)).collect()))
}

/// Paths written by [`write_outputs`].
#[derive(Debug, Clone)]
pub struct OutputFiles {
    pub csv: PathBuf,
    pub sidecar: PathBuf,
}

/// Writes `<name>.csv` and `<name>.json` into `dir`.
pub fn write_outputs(dir: &Path, spec: &SweepSpec, rows: &[ResultRow]) -> Result<OutputFiles> {
    let io = |e: std::io::Error| QrcError::InvalidConfig(format!("{}: {e}", dir.display()));
    std::fs::create_dir_all(dir).map_err(io)?;
    let csv = dir.join(format!("{}.csv", spec.name));
    let sidecar = dir.join(format!("{}.json", spec.name));
    write_csv(std::fs::File::create(&csv).map_err(io)?, rows, spec.task.tau_max)?;
    std::fs::write(&sidecar, Sidecar::new(spec, rows).to_json()).map_err(io)?;
    Ok(OutputFiles { csv, sidecar })
}

//! Declarative sweep description, loaded from TOML.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::dimension::DimensionParams;
use crate::error::{QrcError, Result};
use crate::memory::StmTask;
use crate::reservoir::ReservoirConfig;
use crate::seeding::derive_seed;

/// Environment variable that overrides the worker count of a sweep.
pub const WORKERS_ENV: &str = "QRC_WORKERS";

/// Stream tag separating input-sequence seeds from coupling seeds.
const INPUT_STREAM: u64 = 0x1_0000_0000;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSpec {
    pub name: String,
    pub base_seed: u64,
    /// Random Hamiltonians per grid point.
    pub ensemble_size: usize,
    pub grid: Grid,
    /// Reuse realization `r`'s coupling draw and input sequence at every
    /// `(J0, gamma)` point of the same `N`, so curves compare like with like.
    /// When false every grid point draws independently.
    #[serde(default = "yes")]
    pub paired: bool,
    #[serde(default)]
    pub physics: Physics,
    #[serde(default)]
    pub task: TaskParams,
    #[serde(default)]
    pub measurements: Measurements,
    #[serde(default)]
    pub analysis: Analysis,
    /// Worker threads; `None` uses every available core.
    #[serde(default)]
    pub workers: Option<usize>,
}

fn yes() -> bool {
    true
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Grid {
    pub n_qubits: Vec<usize>,
    pub j0: Vec<f64>,
    #[serde(default = "zero_gamma")]
    pub gamma: Vec<f64>,
}

fn zero_gamma() -> Vec<f64> {
    vec![0.0]
}

/// Physical parameters shared by every grid point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Physics {
    pub h: f64,
    pub delta_t: f64,
    pub v_multiplex: usize,
}

impl Default for Physics {
    fn default() -> Self {
        let cfg = ReservoirConfig::default();
        Self {
            h: cfg.h,
            delta_t: cfg.delta_t,
            v_multiplex: cfg.v_multiplex,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TaskParams {
    pub tau_max: usize,
    pub washout: usize,
    pub train: usize,
    pub test: usize,
    pub ridge_lambda: f64,
}

impl Default for TaskParams {
    fn default() -> Self {
        let t = StmTask::default();
        Self {
            tau_max: t.tau_max,
            washout: t.washout,
            train: t.train,
            test: t.test,
            ridge_lambda: t.ridge_lambda,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Measurements {
    pub negativity: bool,
    pub dimension: bool,
    pub stm: bool,
    /// Full eigenvalue check of every visited state.
    pub audit: bool,
}

impl Default for Measurements {
    fn default() -> Self {
        Self {
            negativity: true,
            dimension: true,
            stm: true,
            audit: true,
        }
    }
}

/// Windows, in input steps after the washout, over which negativity and the
/// covariance dimension are evaluated.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Analysis {
    pub negativity_steps: usize,
    pub dimension_steps: usize,
    pub k_neighbors: usize,
    pub n_anchors: usize,
    pub threshold: f64,
}

impl Default for Analysis {
    fn default() -> Self {
        let p = DimensionParams::default();
        Self {
            negativity_steps: 200,
            dimension_steps: 500,
            k_neighbors: p.k_neighbors,
            n_anchors: p.n_anchors,
            threshold: p.threshold,
        }
    }
}

impl Analysis {
    pub fn dimension_params(&self) -> DimensionParams {
        DimensionParams {
            k_neighbors: self.k_neighbors,
            n_anchors: self.n_anchors,
            threshold: self.threshold,
        }
    }
}

/// One `(grid point, realization)` unit of work.
#[derive(Debug, Clone, PartialEq)]
pub struct Job {
    pub n_qubits: usize,
    pub j0_index: usize,
    pub gamma_index: usize,
    pub realization: usize,
    pub j0: f64,
    pub gamma: f64,
    pub coupling_seed: u64,
    pub input_seed: u64,
}

impl SweepSpec {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let spec: Self =
            toml::from_str(text).map_err(|e| QrcError::InvalidConfig(e.to_string()))?;
        spec.validate()?;
        Ok(spec)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| QrcError::InvalidConfig(format!("{}: {e}", path.display())))?;
        Self::from_toml_str(&text)
    }

    pub fn validate(&self) -> Result<()> {
        let fail = |m: &str| Err(QrcError::InvalidConfig(m.to_string()));
        if self.grid.n_qubits.is_empty() || self.grid.j0.is_empty() || self.grid.gamma.is_empty() {
            return fail("every grid axis needs at least one value");
        }
        if self.ensemble_size == 0 {
            return fail("ensemble_size must be at least 1");
        }
        if self.workers == Some(0) {
            return fail("workers must be at least 1");
        }
        let m = &self.measurements;
        if !(m.negativity || m.dimension || m.stm) {
            return fail("no measurement enabled");
        }
        for job in self.jobs() {
            self.reservoir_config(&job).validate()?;
        }
        if m.stm {
            self.stm_task(0).validate()?;
        }
        if m.dimension {
            let points = self.analysis.dimension_steps * self.physics.v_multiplex;
            if points <= self.analysis.k_neighbors {
                return fail("dimension window holds too few points for k_neighbors");
            }
        }
        if m.negativity && self.analysis.negativity_steps == 0 {
            return fail("negativity window is empty");
        }
        Ok(())
    }

    /// Jobs in output order: `N`, then `J0`, then `gamma`, then realization.
    pub fn jobs(&self) -> Vec<Job> {
        let mut out = Vec::new();
        for &n in &self.grid.n_qubits {
            for (ji, &j0) in self.grid.j0.iter().enumerate() {
                for (gi, &gamma) in self.grid.gamma.iter().enumerate() {
                    for r in 0..self.ensemble_size {
                        let keys: Vec<u64> = if self.paired {
                            vec![n as u64, r as u64]
                        } else {
                            vec![n as u64, ji as u64, gi as u64, r as u64]
                        };
                        let mut input_keys = vec![INPUT_STREAM];
                        input_keys.extend(&keys);
                        out.push(Job {
                            n_qubits: n,
                            j0_index: ji,
                            gamma_index: gi,
                            realization: r,
                            j0,
                            gamma,
                            coupling_seed: derive_seed(self.base_seed, &keys),
                            input_seed: derive_seed(self.base_seed, &input_keys),
                        });
                    }
                }
            }
        }
        out
    }

    pub fn reservoir_config(&self, job: &Job) -> ReservoirConfig {
        ReservoirConfig {
            n_qubits: job.n_qubits,
            h: self.physics.h,
            j0: job.j0,
            delta_t: self.physics.delta_t,
            v_multiplex: self.physics.v_multiplex,
            gamma: job.gamma,
            coupling_seed: job.coupling_seed,
        }
    }

    pub fn stm_task(&self, input_seed: u64) -> StmTask {
        StmTask {
            tau_max: self.task.tau_max,
            washout: self.task.washout,
            train: self.task.train,
            test: self.task.test,
            input_seed,
            ridge_lambda: self.task.ridge_lambda,
        }
    }

    /// Inputs driven per realization: the memory task length, or just enough
    /// to cover the analysis windows when the task is off.
    pub fn run_length(&self) -> usize {
        let mut len = self.task.washout;
        if self.measurements.negativity {
            len = len.max(self.task.washout + self.analysis.negativity_steps);
        }
        if self.measurements.dimension {
            len = len.max(self.task.washout + self.analysis.dimension_steps);
        }
        if self.measurements.stm {
            len = len.max(self.task.washout + self.task.train + self.task.test);
        }
        len
    }

    /// Worker count: the environment override, then the spec, then all cores.
    pub fn resolve_workers(&self) -> Result<usize> {
        if let Ok(v) = std::env::var(WORKERS_ENV) {
            return match v.trim().parse::<usize>() {
                Ok(n) if n > 0 => Ok(n),
                _ => Err(QrcError::InvalidConfig(format!("{WORKERS_ENV}={v:?} is not a positive integer"))),
            };
        }
        Ok(self.workers.unwrap_or_else(|| {
            std::thread::available_parallelism().map_or(1, |n| n.get())
        }))
    }
}

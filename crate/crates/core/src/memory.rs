//! Linear readout training and short-term memory capacity.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{QrcError, Result};
use crate::reservoir::{uniform_inputs, ReadoutRecord, Reservoir, ReservoirConfig};

/// Relative singular-value cut used to measure the rank of the feature block.
const RANK_TOL: f64 = 1e-12;

/// Protocol of a delayed-recall benchmark.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StmTask {
    pub tau_max: usize,
    pub washout: usize,
    pub train: usize,
    pub test: usize,
    pub input_seed: u64,
    /// Ridge strength relative to `trace(X^T X) / columns`.
    pub ridge_lambda: f64,
}

impl Default for StmTask {
    fn default() -> Self {
        Self {
            tau_max: 50,
            washout: 500,
            train: 2000,
            test: 1000,
            input_seed: 0,
            ridge_lambda: 1e-9,
        }
    }
}

impl StmTask {
    pub fn validate(&self) -> Result<()> {
        if self.washout < self.tau_max {
            return Err(QrcError::InvalidConfig(format!(
                "washout {} shorter than tau_max {}",
                self.washout, self.tau_max
            )));
        }
        if self.train == 0 || self.test < 2 {
            return Err(QrcError::InvalidConfig("train and test segments too short".into()));
        }
        if !(self.ridge_lambda >= 0.0) {
            return Err(QrcError::InvalidConfig("ridge_lambda must be non-negative".into()));
        }
        Ok(())
    }

    pub fn total_inputs(&self) -> usize {
        self.washout + self.train + self.test
    }

    pub fn inputs(&self) -> Vec<f64> {
        uniform_inputs(self.total_inputs(), self.input_seed)
    }
}

/// Feature rows with a leading bias column, aligned to input steps after washout.
#[derive(Debug, Clone)]
pub struct Dataset {
    pub features: DMatrix<f64>,
    /// Input step of each row.
    pub steps: Vec<usize>,
}

impl Dataset {
    /// Rows for input steps `start..end`.
    pub fn from_records(records: &[ReadoutRecord], start: usize, end: usize) -> Result<Self> {
        if end > records.len() || start >= end {
            return Err(QrcError::InvalidConfig(format!(
                "row range {start}..{end} invalid for {} records",
                records.len()
            )));
        }
        let width = records[start].features.len() + 1;
        let rows = end - start;
        let features = DMatrix::from_fn(rows, width, |r, c| {
            if c == 0 {
                1.0
            } else {
                records[start + r].features[c - 1]
            }
        });
        Ok(Self {
            features,
            steps: (start..end).collect(),
        })
    }

    /// Targets `s_{k - tau}` for every row.
    pub fn targets(&self, inputs: &[f64], tau: usize) -> Result<Vec<f64>> {
        self.steps
            .iter()
            .map(|&k| {
                k.checked_sub(tau)
                    .map(|i| inputs[i])
                    .ok_or_else(|| QrcError::InvalidConfig(format!("delay {tau} underflows step {k}")))
            })
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainedReadout {
    /// Bias weight first, then one weight per feature column.
    pub weights: Vec<f64>,
    pub ridge_lambda: f64,
    pub train_mse: f64,
}

impl TrainedReadout {
    pub fn predict(&self, features: &DMatrix<f64>) -> Vec<f64> {
        (features * DVector::from_column_slice(&self.weights))
            .iter()
            .copied()
            .collect()
    }
}

/// Ridge solver that factors the feature matrix once and reuses it per target.
#[derive(Debug, Clone)]
pub struct RidgeSolver {
    u: DMatrix<f64>,
    singular: DVector<f64>,
    v_t: DMatrix<f64>,
    lambda_eff: f64,
    ridge_lambda: f64,
    features: DMatrix<f64>,
}

impl RidgeSolver {
    /// `features` must have at least as many rows as columns. Fails when the
    /// non-bias columns carry no variation.
    pub fn new(features: &DMatrix<f64>, ridge_lambda: f64) -> Result<Self> {
        let (rows, cols) = features.shape();
        if rows < cols {
            return Err(QrcError::InvalidConfig(format!(
                "{rows} rows cannot determine {cols} weights"
            )));
        }
        if !(ridge_lambda >= 0.0) {
            return Err(QrcError::InvalidConfig("ridge_lambda must be non-negative".into()));
        }
        if cols < 2 || centred_rank(features) < 1 {
            return Err(QrcError::IllConditioned(0));
        }
        let svd = features.clone().svd(true, true);
        let singular = svd.singular_values.clone();
        let scale = singular.iter().map(|s| s * s).sum::<f64>() / cols as f64;
        Ok(Self {
            u: svd.u.expect("requested U"),
            singular,
            v_t: svd.v_t.expect("requested V^T"),
            lambda_eff: ridge_lambda * scale,
            ridge_lambda,
            features: features.clone(),
        })
    }

    /// Absolute ridge strength actually applied.
    pub fn lambda_eff(&self) -> f64 {
        self.lambda_eff
    }

    pub fn solve(&self, targets: &[f64]) -> Result<TrainedReadout> {
        if targets.len() != self.features.nrows() {
            return Err(QrcError::DimensionMismatch {
                expected: self.features.nrows(),
                actual: targets.len(),
            });
        }
        let y = DVector::from_column_slice(targets);
        let projected = self.u.tr_mul(&y);
        let smax = self.singular.max();
        let filtered = DVector::from_iterator(
            self.singular.len(),
            self.singular.iter().zip(projected.iter()).map(|(&s, &p)| {
                if s <= smax * f64::EPSILON {
                    0.0
                } else {
                    p * s / (s * s + self.lambda_eff)
                }
            }),
        );
        let w = self.v_t.tr_mul(&filtered);
        let residual = &self.features * &w - &y;
        let train_mse = residual.norm_squared() / targets.len() as f64;
        let weights: Vec<f64> = w.iter().copied().collect();
        if weights.iter().any(|x| !x.is_finite()) {
            return Err(QrcError::IllConditioned(self.singular.len()));
        }
        Ok(TrainedReadout {
            weights,
            ridge_lambda: self.ridge_lambda,
            train_mse,
        })
    }
}

fn centred_rank(features: &DMatrix<f64>) -> usize {
    let body = features.columns(1, features.ncols() - 1).into_owned();
    let means = body.row_mean();
    let mut centred = body;
    for mut row in centred.row_iter_mut() {
        row -= &means;
    }
    let sv = centred.singular_values();
    let smax = sv.max();
    if smax <= f64::MIN_POSITIVE {
        return 0;
    }
    sv.iter().filter(|&&s| s > smax * RANK_TOL).count()
}

/// Minimizes `|Xw - y|^2 + lambda_eff |w|^2`, bias weight included in the penalty.
pub fn train_readout(
    features: &DMatrix<f64>,
    targets: &[f64],
    ridge_lambda: f64,
) -> Result<TrainedReadout> {
    RidgeSolver::new(features, ridge_lambda)?.solve(targets)
}

/// Squared Pearson correlation of one delay.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DelayCapacity {
    pub value: f64,
    /// Either series was constant; the capacity is reported as 0.
    pub zero_variance: bool,
}

pub fn stm_capacity_tau(y: &[f64], y_hat: &[f64]) -> Result<DelayCapacity> {
    if y.is_empty() || y.len() != y_hat.len() {
        return Err(QrcError::DimensionMismatch {
            expected: y_hat.len(),
            actual: y.len(),
        });
    }
    let n = y.len() as f64;
    let my = y.iter().sum::<f64>() / n;
    let mt = y_hat.iter().sum::<f64>() / n;
    let (mut cov, mut vy, mut vt) = (0.0, 0.0, 0.0);
    for (a, b) in y.iter().zip(y_hat) {
        let (da, db) = (a - my, b - mt);
        cov += da * db;
        vy += da * da;
        vt += db * db;
    }
    if vy <= 0.0 || vt <= 0.0 {
        return Ok(DelayCapacity {
            value: 0.0,
            zero_variance: true,
        });
    }
    Ok(DelayCapacity {
        value: (cov * cov / (vy * vt)).clamp(0.0, 1.0),
        zero_variance: false,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StmReport {
    /// `C^tau` for `tau = 0..=tau_max`.
    pub per_delay: Vec<f64>,
    pub total: f64,
    pub tau_max: usize,
    pub train_mse: Vec<f64>,
    /// Delays whose prediction or target was constant on the test split.
    pub zero_variance_delays: Vec<usize>,
    pub config: ReservoirConfig,
    pub task: StmTask,
}

/// Trains one readout per delay on the train split and scores it on the test split.
pub fn evaluate_stm(
    records: &[ReadoutRecord],
    inputs: &[f64],
    cfg: &ReservoirConfig,
    task: &StmTask,
) -> Result<StmReport> {
    task.validate()?;
    if records.len() < task.total_inputs() || inputs.len() < task.total_inputs() {
        return Err(QrcError::InvalidConfig(format!(
            "need {} inputs, got {}",
            task.total_inputs(),
            records.len().min(inputs.len())
        )));
    }
    let train_end = task.washout + task.train;
    let train = Dataset::from_records(records, task.washout, train_end)?;
    let test = Dataset::from_records(records, train_end, train_end + task.test)?;
    let solver = RidgeSolver::new(&train.features, task.ridge_lambda)?;

    let mut per_delay = Vec::with_capacity(task.tau_max + 1);
    let mut train_mse = Vec::with_capacity(task.tau_max + 1);
    let mut zero_variance_delays = Vec::new();
    for tau in 0..=task.tau_max {
        let readout = solver.solve(&train.targets(inputs, tau)?)?;
        let prediction = readout.predict(&test.features);
        let cap = stm_capacity_tau(&prediction, &test.targets(inputs, tau)?)?;
        if cap.zero_variance {
            zero_variance_delays.push(tau);
        }
        per_delay.push(cap.value);
        train_mse.push(readout.train_mse);
    }
    Ok(StmReport {
        total: per_delay.iter().sum(),
        per_delay,
        tau_max: task.tau_max,
        train_mse,
        zero_variance_delays,
        config: cfg.clone(),
        task: task.clone(),
    })
}

pub fn run_stm_task(cfg: &ReservoirConfig, task: &StmTask) -> Result<StmReport> {
    task.validate()?;
    let inputs = task.inputs();
    let records = Reservoir::new(cfg)?.run(&inputs, |_| Ok(()))?;
    evaluate_stm(&records, &inputs, cfg, task)
}

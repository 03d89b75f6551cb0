//! Generalized Bloch embedding and the covariance dimension of trajectories.
//!
//! The covariance dimension is a local-PCA estimate: for anchors strided
//! evenly through a trajectory, take the `k` nearest neighbours, diagonalize
//! the covariance of that cluster and count the principal variances above a
//! fraction of the largest one. `D_c` is the mean count over anchors.
//!
//! A cluster of `k + 1` points spans at most `k` directions, so `k` caps the
//! resolvable dimension.

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{QrcError, Result};
use crate::reservoir::{DensityMatrix, EventKind, Reservoir, ReservoirConfig};

/// Below this largest local variance a cluster counts as coincident points.
pub const DEGENERATE_VARIANCE: f64 = 1e-24;

/// Number of non-identity Pauli strings on `n` qubits, `4^n - 1`.
pub fn bloch_dim(n_qubits: usize) -> usize {
    (1usize << (2 * n_qubits)) - 1
}

/// `Tr(rho P)` for every non-identity Pauli string `P`.
///
/// Strings are ordered lexicographically over `I < X < Y < Z` with qubit 1 the
/// most significant letter, skipping the all-identity string.
pub fn bloch_vector(state: &DensityMatrix) -> Vec<f64> {
    let n = state.n_qubits();
    let rho = state.matrix();
    let dim = rho.dim();
    let mut out = Vec::with_capacity(bloch_dim(n));
    for alpha in 1..(1usize << (2 * n)) {
        let (mut x, mut yz, mut n_y) = (0usize, 0usize, 0u32);
        for q in 1..=n {
            let bit = 1 << (n - q);
            match (alpha >> (2 * (n - q))) & 3 {
                1 => x |= bit,
                2 => {
                    x |= bit;
                    yz |= bit;
                    n_y += 1;
                }
                3 => yz |= bit,
                _ => {}
            }
        }
        // P|b> = i^{n_y} (-1)^{|b & yz|} |b ^ x>
        let mut acc = Complex64::new(0.0, 0.0);
        for b in 0..dim {
            let term = rho[(b, b ^ x)];
            if (b & yz).count_ones() % 2 == 0 {
                acc += term;
            } else {
                acc -= term;
            }
        }
        let phase = match n_y % 4 {
            0 => Complex64::new(1.0, 0.0),
            1 => Complex64::new(0.0, 1.0),
            2 => Complex64::new(-1.0, 0.0),
            _ => Complex64::new(0.0, -1.0),
        };
        out.push((acc * phase).re);
    }
    out
}

/// Sequence of Bloch vectors with their sampling instants.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BlochTrajectory {
    pub n_qubits: usize,
    pub points: Vec<Vec<f64>>,
    pub sample_times: Vec<f64>,
}

impl BlochTrajectory {
    pub fn new(n_qubits: usize) -> Self {
        Self {
            n_qubits,
            points: Vec::new(),
            sample_times: Vec::new(),
        }
    }

    pub fn push(&mut self, point: Vec<f64>, time: f64) {
        debug_assert_eq!(point.len(), bloch_dim(self.n_qubits));
        self.points.push(point);
        self.sample_times.push(time);
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn max_dim(&self) -> usize {
        bloch_dim(self.n_qubits)
    }
}

pub fn bloch_embed(states: &[DensityMatrix]) -> Result<BlochTrajectory> {
    let n = states.first().map_or(1, DensityMatrix::n_qubits);
    let mut traj = BlochTrajectory::new(n);
    for (i, s) in states.iter().enumerate() {
        if s.n_qubits() != n {
            return Err(QrcError::DimensionMismatch {
                expected: 1 << n,
                actual: s.dim(),
            });
        }
        traj.push(bloch_vector(s), i as f64);
    }
    Ok(traj)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DimensionParams {
    pub k_neighbors: usize,
    pub n_anchors: usize,
    /// Relative cut on local principal variances, in `(0, 1)`.
    pub threshold: f64,
}

impl Default for DimensionParams {
    fn default() -> Self {
        Self {
            k_neighbors: 32,
            n_anchors: 200,
            threshold: 1e-3,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DimensionEstimate {
    pub d_c: f64,
    pub d_max: usize,
    pub fraction: f64,
    pub per_anchor: Vec<usize>,
    /// Anchors whose cluster collapsed to a point (counted as dimension 0).
    pub degenerate_anchors: usize,
    pub params: DimensionParams,
}

/// Local-PCA covariance dimension of a point cloud in `R^d_max`.
pub fn covariance_dimension(
    points: &[Vec<f64>],
    d_max: usize,
    params: &DimensionParams,
) -> Result<DimensionEstimate> {
    let k = params.k_neighbors;
    if !(params.threshold > 0.0 && params.threshold < 1.0) {
        return Err(QrcError::InvalidConfig(format!(
            "threshold {} outside (0, 1)",
            params.threshold
        )));
    }
    if k == 0 || params.n_anchors == 0 {
        return Err(QrcError::InvalidConfig(
            "k_neighbors and n_anchors must be positive".into(),
        ));
    }
    if points.len() < k + 1 {
        return Err(QrcError::TooFewPoints {
            points: points.len(),
            needed: k + 1,
        });
    }
    if let Some(p) = points.iter().find(|p| p.len() != d_max) {
        return Err(QrcError::DimensionMismatch {
            expected: d_max,
            actual: p.len(),
        });
    }

    let n_anchors = params.n_anchors.min(points.len());
    let mut per_anchor = Vec::with_capacity(n_anchors);
    let mut degenerate = 0;
    let mut dists: Vec<(f64, usize)> = Vec::with_capacity(points.len());
    for a in 0..n_anchors {
        let anchor_idx = a * points.len() / n_anchors;
        let anchor = &points[anchor_idx];
        dists.clear();
        dists.extend(points.iter().enumerate().map(|(i, p)| {
            let d: f64 = p.iter().zip(anchor).map(|(x, y)| (x - y) * (x - y)).sum();
            (d, i)
        }));
        // the anchor itself sorts first at distance 0; the cluster is it plus k neighbours
        let cmp = |l: &(f64, usize), r: &(f64, usize)| l.0.total_cmp(&r.0).then(l.1.cmp(&r.1));
        dists.select_nth_unstable_by(k, cmp);
        let cluster: Vec<&Vec<f64>> = dists[..=k].iter().map(|&(_, i)| &points[i]).collect();
        match local_rank(&cluster, params.threshold) {
            Some(r) => per_anchor.push(r),
            None => {
                degenerate += 1;
                per_anchor.push(0);
            }
        }
    }
    let d_c = per_anchor.iter().sum::<usize>() as f64 / per_anchor.len() as f64;
    Ok(DimensionEstimate {
        d_c,
        d_max,
        fraction: d_c / d_max as f64,
        per_anchor,
        degenerate_anchors: degenerate,
        params: *params,
    })
}

/// Number of principal variances above `threshold * largest`, or `None` for a
/// degenerate cluster. Works on the `m x m` Gram matrix of the centred cluster,
/// whose nonzero spectrum equals the covariance spectrum.
fn local_rank(cluster: &[&Vec<f64>], threshold: f64) -> Option<usize> {
    let m = cluster.len();
    let d = cluster[0].len();
    let mut mean = vec![0.0; d];
    for p in cluster {
        for (acc, x) in mean.iter_mut().zip(p.iter()) {
            *acc += x;
        }
    }
    mean.iter_mut().for_each(|x| *x /= m as f64);
    let centred: Vec<Vec<f64>> = cluster
        .iter()
        .map(|p| p.iter().zip(&mean).map(|(x, mu)| x - mu).collect())
        .collect();
    let norm = 1.0 / (m as f64 - 1.0).max(1.0);
    let mut gram = DMatrix::<f64>::zeros(m, m);
    for i in 0..m {
        for j in i..m {
            let g: f64 = centred[i].iter().zip(&centred[j]).map(|(a, b)| a * b).sum::<f64>() * norm;
            gram[(i, j)] = g;
            gram[(j, i)] = g;
        }
    }
    let eig = gram.symmetric_eigenvalues();
    let largest = eig.iter().copied().fold(0.0, f64::max);
    if largest < DEGENERATE_VARIANCE {
        return None;
    }
    Some(eig.iter().filter(|&&l| l > threshold * largest).count())
}

pub fn trajectory_dimension(
    traj: &BlochTrajectory,
    params: &DimensionParams,
) -> Result<DimensionEstimate> {
    covariance_dimension(&traj.points, traj.max_dim(), params)
}

/// Runs the reservoir and estimates `D_c` from the sub-step states of input
/// steps `washout..`.
pub fn reservoir_dimension(
    cfg: &ReservoirConfig,
    inputs: &[f64],
    washout: usize,
    params: &DimensionParams,
) -> Result<DimensionEstimate> {
    let reservoir = Reservoir::new(cfg)?;
    let mut traj = BlochTrajectory::new(cfg.n_qubits);
    reservoir.run(inputs, |ev| {
        if ev.step >= washout && matches!(ev.kind, EventKind::SubStep(_)) {
            traj.push(bloch_vector(ev.state), ev.time);
        }
        Ok(())
    })?;
    trajectory_dimension(&traj, params)
}

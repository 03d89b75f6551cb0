//! Normalized negativity over qubit bipartitions.

use serde::{Deserialize, Serialize};

use crate::error::{QrcError, Result};
use crate::linalg::{hermitian_eigenvalues, partial_transpose_mask, subset_mask};
use crate::reservoir::{DensityMatrix, EventKind, Reservoir, ReservoirConfig};

/// Magnitude below which a negative negativity is treated as roundoff.
pub const CLAMP_EPS: f64 = 1e-12;

/// An unordered split of the register into two nonempty parts.
///
/// `part_a` is the smaller side; on a tie it is the side holding the lowest
/// numbered qubit.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Bipartition {
    pub part_a: Vec<usize>,
    pub part_b: Vec<usize>,
    /// `min(dim H_A, dim H_B)`.
    pub d: usize,
    n_qubits: usize,
    mask_a: usize,
}

impl Bipartition {
    pub fn new(n_qubits: usize, part_a: &[usize]) -> Result<Self> {
        let mask_a = subset_mask(n_qubits, part_a)?;
        let mut a: Vec<usize> = part_a.to_vec();
        a.sort_unstable();
        a.dedup();
        let b: Vec<usize> = (1..=n_qubits).filter(|q| !a.contains(q)).collect();
        let d = 1 << a.len().min(b.len());
        Ok(Self {
            part_a: a,
            part_b: b,
            d,
            n_qubits,
            mask_a,
        })
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    /// Same split with the roles of A and B exchanged.
    pub fn swapped(&self) -> Self {
        Self::new(self.n_qubits, &self.part_b).expect("complement of a valid split")
    }

    pub fn label(&self) -> String {
        let join = |v: &[usize]| v.iter().map(usize::to_string).collect::<String>();
        format!("{}|{}", join(&self.part_a), join(&self.part_b))
    }
}

/// All `2^(n-1) - 1` unordered nontrivial splits: by size of the smaller side,
/// then lexicographically.
pub fn enumerate_bipartitions(n: usize) -> Result<Vec<Bipartition>> {
    if n < 2 {
        return Err(QrcError::InvalidConfig(format!("bipartitions need n >= 2, got {n}")));
    }
    let mut out = Vec::with_capacity((1 << (n - 1)) - 1);
    for size in 1..=n / 2 {
        for combo in combinations(n, size) {
            if 2 * size == n && !combo.contains(&1) {
                continue;
            }
            out.push(Bipartition::new(n, &combo)?);
        }
    }
    Ok(out)
}

fn combinations(n: usize, size: usize) -> Vec<Vec<usize>> {
    fn rec(start: usize, n: usize, size: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == size {
            out.push(cur.clone());
            return;
        }
        for q in start..=n {
            cur.push(q);
            rec(q + 1, n, size, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(1, n, size, &mut Vec::new(), &mut out);
    out
}

/// `(||rho^{T_A}||_1 - 1) / (d - 1)`.
pub fn normalized_negativity(rho: &DensityMatrix, bp: &Bipartition) -> Result<f64> {
    if rho.n_qubits() != bp.n_qubits {
        return Err(QrcError::DimensionMismatch {
            expected: 1 << bp.n_qubits,
            actual: rho.dim(),
        });
    }
    let pt = partial_transpose_mask(rho.matrix(), bp.mask_a);
    let norm: f64 = hermitian_eigenvalues(&pt)?.iter().map(|l| l.abs()).sum();
    let value = (norm - 1.0) / (bp.d as f64 - 1.0);
    if value < 0.0 && value > -CLAMP_EPS {
        return Ok(0.0);
    }
    Ok(value)
}

/// Negativity of every bipartition of a state, in enumeration order.
#[derive(Debug, Clone)]
pub struct NegativityMeter {
    bipartitions: Vec<Bipartition>,
}

impl NegativityMeter {
    pub fn new(n_qubits: usize) -> Result<Self> {
        Ok(Self {
            bipartitions: enumerate_bipartitions(n_qubits)?,
        })
    }

    pub fn bipartitions(&self) -> &[Bipartition] {
        &self.bipartitions
    }

    pub fn measure(&self, rho: &DensityMatrix) -> Result<Vec<f64>> {
        self.bipartitions
            .iter()
            .map(|bp| normalized_negativity(rho, bp))
            .collect()
    }
}

/// Negativity sampled after every injection and every sub-step.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NegativityTrace {
    pub bipartitions: Vec<Bipartition>,
    pub times: Vec<f64>,
    /// Whether each sample is the instant right after an injection.
    pub post_injection: Vec<bool>,
    /// `values[p][t]`: bipartition `p` at sample `t`.
    pub values: Vec<Vec<f64>>,
    pub mean_over_partitions: Vec<f64>,
    /// Uniform mean over all samples and bipartitions.
    pub time_average: f64,
}

impl NegativityTrace {
    fn new(bipartitions: Vec<Bipartition>) -> Self {
        let p = bipartitions.len();
        Self {
            bipartitions,
            times: Vec::new(),
            post_injection: Vec::new(),
            values: vec![Vec::new(); p],
            mean_over_partitions: Vec::new(),
            time_average: 0.0,
        }
    }

    fn push(&mut self, time: f64, injected: bool, sample: &[f64]) {
        self.times.push(time);
        self.post_injection.push(injected);
        for (series, &v) in self.values.iter_mut().zip(sample) {
            series.push(v);
        }
        self.mean_over_partitions
            .push(sample.iter().sum::<f64>() / sample.len() as f64);
    }

    fn finish(&mut self) {
        let n = self.mean_over_partitions.len();
        self.time_average = if n == 0 {
            0.0
        } else {
            self.mean_over_partitions.iter().sum::<f64>() / n as f64
        };
    }

    /// Series of the split whose A side is exactly `part_a`.
    pub fn series(&self, part_a: &[usize]) -> Option<&[f64]> {
        self.bipartitions
            .iter()
            .position(|bp| bp.part_a == part_a)
            .map(|i| self.values[i].as_slice())
    }
}

/// Runs the reservoir and records negativity from input step `from_step` on.
pub fn negativity_trace_from(
    cfg: &ReservoirConfig,
    inputs: &[f64],
    from_step: usize,
) -> Result<NegativityTrace> {
    let reservoir = Reservoir::new(cfg)?;
    let meter = NegativityMeter::new(cfg.n_qubits)?;
    let mut trace = NegativityTrace::new(meter.bipartitions().to_vec());
    reservoir.run(inputs, |ev| {
        if ev.step >= from_step {
            let sample = meter.measure(ev.state)?;
            trace.push(ev.time, ev.kind == EventKind::Injected, &sample);
        }
        Ok(())
    })?;
    trace.finish();
    Ok(trace)
}

pub fn negativity_trace(cfg: &ReservoirConfig, inputs: &[f64]) -> Result<NegativityTrace> {
    negativity_trace_from(cfg, inputs, 0)
}

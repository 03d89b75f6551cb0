//! Transverse-field Ising reservoir and its inject / evolve / dephase / read cycle.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::distributions::{Distribution, Uniform};
use serde::{Deserialize, Serialize};

use crate::dimension::{bloch_vector, BlochTrajectory};
use crate::error::{QrcError, Result};
use crate::linalg::{
    hermitian_eigenvalues, partial_trace, qubit_bit, qubit_count, ComplexMatrix, Propagator,
    HERMITIAN_TOL, MAX_QUBITS,
};
use crate::seeding::{derive_seed, rng_from_seed};

/// Tolerance on `|Tr rho - 1|` for a state to count as normalized.
pub const TRACE_TOL: f64 = 1e-11;
/// Smallest eigenvalue a state may have before the run aborts.
pub const POSITIVITY_TOL: f64 = -1e-9;

const MAX_COUPLING_DRAWS: u32 = 64;

/// Field strength of the shipped presets; places the memory-capacity peak
/// inside the `J0 = 0.1..0.5` grid.
pub const DEFAULT_FIELD: f64 = 4.0;

/// Physical and protocol parameters of one reservoir.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReservoirConfig {
    pub n_qubits: usize,
    /// Single-qubit field; the qubit splitting is `2h`. `j0` and `gamma` are
    /// absolute rates, so only `j0 / h` and `gamma / h` shape the dynamics.
    pub h: f64,
    /// Spectral radius of the coupling matrix.
    pub j0: f64,
    /// Interval between inputs as the dimensionless product `h * Δt`.
    pub delta_t: f64,
    /// Readout samples per input interval.
    pub v_multiplex: usize,
    /// Pure-dephasing rate.
    pub gamma: f64,
    pub coupling_seed: u64,
}

impl Default for ReservoirConfig {
    fn default() -> Self {
        Self {
            n_qubits: 3,
            h: DEFAULT_FIELD,
            j0: 0.3,
            delta_t: 5.0,
            v_multiplex: 10,
            gamma: 0.0,
            coupling_seed: 0,
        }
    }
}

impl ReservoirConfig {
    pub fn validate(&self) -> Result<()> {
        let fail = |msg: String| Err(QrcError::InvalidConfig(msg));
        if !(2..=MAX_QUBITS).contains(&self.n_qubits) {
            return fail(format!("n_qubits = {} outside 2..={MAX_QUBITS}", self.n_qubits));
        }
        if !(self.j0 > 0.0 && self.j0.is_finite()) {
            return fail(format!("j0 = {} must be positive", self.j0));
        }
        if !(self.delta_t > 0.0 && self.delta_t.is_finite()) {
            return fail(format!("delta_t = {} must be positive", self.delta_t));
        }
        if self.v_multiplex == 0 {
            return fail("v_multiplex must be at least 1".into());
        }
        if !(self.gamma >= 0.0 && self.gamma.is_finite()) {
            return fail(format!("gamma = {} must be non-negative", self.gamma));
        }
        if !(self.h > 0.0 && self.h.is_finite()) {
            return fail(format!("h = {} must be positive", self.h));
        }
        Ok(())
    }

    pub fn dim(&self) -> usize {
        1 << self.n_qubits
    }

    /// Physical time between inputs, `delta_t / h`.
    pub fn interval(&self) -> f64 {
        self.delta_t / self.h
    }

    pub fn substep(&self) -> f64 {
        self.interval() / self.v_multiplex as f64
    }

    /// Coherence decay factor applied per qubit per sub-step.
    pub fn dephasing_decay(&self) -> f64 {
        (-2.0 * self.gamma * self.substep()).exp()
    }

    pub fn features_per_input(&self) -> usize {
        self.n_qubits * self.v_multiplex
    }
}

/// Symmetric, zero-diagonal qubit coupling matrix (0-based indices).
#[derive(Debug, Clone, PartialEq)]
pub struct CouplingMatrix {
    n: usize,
    entries: Vec<f64>,
}

impl CouplingMatrix {
    pub fn from_entries(n: usize, entries: Vec<f64>) -> Self {
        assert_eq!(entries.len(), n * n);
        Self { n, entries }
    }

    pub fn zeros(n: usize) -> Self {
        Self::from_entries(n, vec![0.0; n * n])
    }

    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.entries[i * self.n + j]
    }

    pub fn spectral_radius(&self) -> f64 {
        DMatrix::from_row_slice(self.n, self.n, &self.entries)
            .symmetric_eigenvalues()
            .iter()
            .fold(0.0, |m: f64, l| m.max(l.abs()))
    }

    fn scaled(&self, s: f64) -> Self {
        Self {
            n: self.n,
            entries: self.entries.iter().map(|x| x * s).collect(),
        }
    }
}

/// Draws `J_ij` uniformly from `[-1, 1]` (upper triangle, mirrored) and rescales
/// the matrix to spectral radius `j0`.
pub fn sample_coupling(n: usize, j0: f64, seed: u64) -> Result<CouplingMatrix> {
    if n < 2 {
        return Err(QrcError::InvalidConfig(format!("coupling needs n >= 2, got {n}")));
    }
    if !(j0 > 0.0) {
        return Err(QrcError::InvalidConfig(format!("j0 = {j0} must be positive")));
    }
    let dist = Uniform::new_inclusive(-1.0, 1.0);
    for attempt in 0..MAX_COUPLING_DRAWS {
        let stream = if attempt == 0 {
            seed
        } else {
            derive_seed(seed, &[attempt as u64])
        };
        let mut rng = rng_from_seed(stream);
        let mut entries = vec![0.0; n * n];
        for i in 0..n {
            for j in i + 1..n {
                let v = dist.sample(&mut rng);
                entries[i * n + j] = v;
                entries[j * n + i] = v;
            }
        }
        let raw = CouplingMatrix::from_entries(n, entries);
        let radius = raw.spectral_radius();
        if radius >= 1e-12 {
            return Ok(raw.scaled(j0 / radius));
        }
    }
    Err(QrcError::DegenerateDraw(MAX_COUPLING_DRAWS))
}

/// `H = h Σ σz_i + Σ_{i≠j} J_ij σx_i σx_j` in the computational basis.
pub fn build_hamiltonian(cfg: &ReservoirConfig, j: &CouplingMatrix) -> Result<ComplexMatrix> {
    let n = cfg.n_qubits;
    if j.n() != n {
        return Err(QrcError::DimensionMismatch {
            expected: n,
            actual: j.n(),
        });
    }
    let dim = 1usize << n;
    let mut ham = ComplexMatrix::zeros(dim);
    for b in 0..dim {
        let up = (n as i64 - 2 * b.count_ones() as i64) as f64;
        ham[(b, b)] = Complex64::new(cfg.h * up, 0.0);
    }
    for i in 0..n {
        for k in i + 1..n {
            // ordered pairs (i,k) and (k,i) contribute equally
            let weight = j.get(i, k) + j.get(k, i);
            if weight == 0.0 {
                continue;
            }
            let flip = (1 << qubit_bit(n, i + 1)) | (1 << qubit_bit(n, k + 1));
            for b in 0..dim {
                ham[(b, b ^ flip)] += Complex64::new(weight, 0.0);
            }
        }
    }
    Ok(ham)
}

/// A reservoir state: Hermitian, unit trace, positive semidefinite.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix(ComplexMatrix);

/// Worst-case deviations of a state from the density-matrix invariants.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct StateHealth {
    pub trace_error: f64,
    pub hermiticity_error: f64,
    pub min_eigenvalue: f64,
}

impl StateHealth {
    pub fn merge(self, other: Self) -> Self {
        Self {
            trace_error: self.trace_error.max(other.trace_error),
            hermiticity_error: self.hermiticity_error.max(other.hermiticity_error),
            min_eigenvalue: self.min_eigenvalue.min(other.min_eigenvalue),
        }
    }

    pub fn is_valid(&self) -> bool {
        self.trace_error <= TRACE_TOL
            && self.hermiticity_error <= HERMITIAN_TOL
            && self.min_eigenvalue >= POSITIVITY_TOL
    }
}

impl DensityMatrix {
    /// Validates Hermiticity, trace and positivity.
    pub fn new(m: ComplexMatrix) -> Result<Self> {
        qubit_count(m.dim())?;
        let state = Self(m);
        let health = state.health()?;
        if health.hermiticity_error > HERMITIAN_TOL {
            return Err(QrcError::NotHermitian(health.hermiticity_error));
        }
        if health.trace_error > TRACE_TOL {
            return Err(QrcError::TraceViolation(state.trace()));
        }
        if health.min_eigenvalue < POSITIVITY_TOL {
            return Err(QrcError::PositivityViolation(health.min_eigenvalue));
        }
        Ok(state)
    }

    pub fn maximally_mixed(n_qubits: usize) -> Self {
        let dim = 1 << n_qubits;
        Self(ComplexMatrix::identity(dim).scale(Complex64::new(1.0 / dim as f64, 0.0)))
    }

    /// `|psi><psi|` for a normalized state vector.
    pub fn pure(psi: &[Complex64]) -> Result<Self> {
        Self::new(ComplexMatrix::outer(psi))
    }

    /// Computational basis state `|b>` on `n_qubits`.
    pub fn basis(n_qubits: usize, b: usize) -> Self {
        let dim = 1 << n_qubits;
        let mut m = ComplexMatrix::zeros(dim);
        m[(b, b)] = Complex64::new(1.0, 0.0);
        Self(m)
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.0
    }

    pub fn into_matrix(self) -> ComplexMatrix {
        self.0
    }

    pub fn dim(&self) -> usize {
        self.0.dim()
    }

    pub fn n_qubits(&self) -> usize {
        self.0.dim().trailing_zeros() as usize
    }

    pub fn trace(&self) -> f64 {
        self.0.trace().re
    }

    pub fn purity(&self) -> f64 {
        // Tr(rho^2) = sum |rho_ij|^2 for Hermitian rho
        self.0.as_slice().iter().map(|z| z.norm_sqr()).sum()
    }

    /// `<σz>` of 1-based qubit `q`.
    pub fn z_expectation(&self, q: usize) -> f64 {
        let n = self.n_qubits();
        let bit = qubit_bit(n, q);
        (0..self.dim())
            .map(|b| {
                let p = self.0[(b, b)].re;
                if (b >> bit) & 1 == 0 {
                    p
                } else {
                    -p
                }
            })
            .sum()
    }

    /// `<σz>` for qubits `1..=N` in order.
    pub fn z_expectations(&self) -> Vec<f64> {
        (1..=self.n_qubits()).map(|q| self.z_expectation(q)).collect()
    }

    /// Cheap invariants only (trace and Hermiticity); `min_eigenvalue` is left at 0.
    pub fn cheap_health(&self) -> StateHealth {
        StateHealth {
            trace_error: (self.0.trace() - Complex64::new(1.0, 0.0)).norm(),
            hermiticity_error: self.0.hermiticity_error(),
            min_eigenvalue: 0.0,
        }
    }

    /// Full invariant check including the smallest eigenvalue.
    pub fn health(&self) -> Result<StateHealth> {
        let mut h = self.cheap_health();
        if h.hermiticity_error > HERMITIAN_TOL {
            return Err(QrcError::NotHermitian(h.hermiticity_error));
        }
        h.min_eigenvalue = hermitian_eigenvalues(&self.0)?[0];
        Ok(h)
    }
}

/// Input-encoding state `sqrt(1-s)|0> + sqrt(s)|1>`.
pub fn input_state(s: f64) -> Result<[f64; 2]> {
    if !(0.0..=1.0).contains(&s) {
        return Err(QrcError::InputOutOfRange(s));
    }
    Ok([(1.0 - s).sqrt(), s.sqrt()])
}

/// Resets qubit 1 to the input state and keeps the marginal of the rest.
pub fn inject_input(rho: &DensityMatrix, s: f64) -> Result<DensityMatrix> {
    let psi = input_state(s)?;
    let n = rho.n_qubits();
    let rest: Vec<usize> = (2..=n).collect();
    let sigma = partial_trace(rho.matrix(), &rest)?;
    let half = sigma.dim();
    let out = ComplexMatrix::from_fn(2 * half, |r, c| {
        let (a, i) = (r / half, r % half);
        let (b, j) = (c / half, c % half);
        sigma[(i, j)] * (psi[a] * psi[b])
    });
    Ok(DensityMatrix(out))
}

/// One-qubit pure dephasing `p rho + (1-p) Z rho Z` with `2p - 1 = decay`.
pub fn dephase_qubit(rho: &mut ComplexMatrix, q: usize, decay: f64) {
    let n = qubit_count(rho.dim()).expect("register dimension");
    let bit = 1 << qubit_bit(n, q);
    let dim = rho.dim();
    for i in 0..dim {
        for j in 0..dim {
            if (i ^ j) & bit != 0 {
                rho[(i, j)] *= decay;
            }
        }
    }
}

/// Dephases qubits `1..=N` one after another for a single sub-step.
pub fn dephase_step(rho: &DensityMatrix, cfg: &ReservoirConfig) -> DensityMatrix {
    if cfg.gamma == 0.0 {
        return rho.clone();
    }
    let decay = cfg.dephasing_decay();
    let mut m = rho.0.clone();
    for q in 1..=rho.n_qubits() {
        dephase_qubit(&mut m, q, decay);
    }
    DensityMatrix(m)
}

/// `dephase(u rho u^dagger)`.
pub fn evolve_substep(
    rho: &DensityMatrix,
    u_sub: &ComplexMatrix,
    cfg: &ReservoirConfig,
) -> DensityMatrix {
    let evolved = DensityMatrix(rho.0.conjugate_by(u_sub));
    dephase_step(&evolved, cfg)
}

/// Readout of one input step: `N·V` values of `<σz>`, sub-step major, qubit minor.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReadoutRecord {
    pub step_index: usize,
    pub input_value: f64,
    pub features: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EventKind {
    /// Immediately after the input map.
    Injected,
    /// After unitary evolution and dephasing of sub-step `v` (1-based).
    SubStep(usize),
}

/// A state visited during a run, handed to observers.
#[derive(Debug)]
pub struct StateEvent<'a> {
    pub step: usize,
    pub kind: EventKind,
    pub time: f64,
    pub state: &'a DensityMatrix,
}

/// A built reservoir: coupling, Hamiltonian and sub-step propagator.
#[derive(Debug, Clone)]
pub struct Reservoir {
    cfg: ReservoirConfig,
    coupling: CouplingMatrix,
    hamiltonian: ComplexMatrix,
    u_sub: ComplexMatrix,
}

impl Reservoir {
    pub fn new(cfg: &ReservoirConfig) -> Result<Self> {
        cfg.validate()?;
        let coupling = sample_coupling(cfg.n_qubits, cfg.j0, cfg.coupling_seed)?;
        Self::with_coupling(cfg, coupling)
    }

    pub fn with_coupling(cfg: &ReservoirConfig, coupling: CouplingMatrix) -> Result<Self> {
        let hamiltonian = build_hamiltonian(cfg, &coupling)?;
        let u_sub = Propagator::new(&hamiltonian)?.unitary(cfg.substep());
        Ok(Self {
            cfg: cfg.clone(),
            coupling,
            hamiltonian,
            u_sub,
        })
    }

    pub fn config(&self) -> &ReservoirConfig {
        &self.cfg
    }

    pub fn coupling(&self) -> &CouplingMatrix {
        &self.coupling
    }

    pub fn hamiltonian(&self) -> &ComplexMatrix {
        &self.hamiltonian
    }

    pub fn substep_unitary(&self) -> &ComplexMatrix {
        &self.u_sub
    }

    /// Drives the reservoir from `initial` with `inputs`, calling `observer` on
    /// every post-injection and post-sub-step state. An observer error aborts
    /// the run. Trace and Hermiticity are checked at every sub-step.
    pub fn run_from<F>(
        &self,
        initial: DensityMatrix,
        inputs: &[f64],
        mut observer: F,
    ) -> Result<Vec<ReadoutRecord>>
    where
        F: FnMut(&StateEvent<'_>) -> Result<()>,
    {
        if inputs.is_empty() {
            return Err(QrcError::InvalidConfig("input sequence is empty".into()));
        }
        if let Some(&bad) = inputs.iter().find(|s| !(0.0..=1.0).contains(*s)) {
            return Err(QrcError::InputOutOfRange(bad));
        }
        if initial.n_qubits() != self.cfg.n_qubits {
            return Err(QrcError::DimensionMismatch {
                expected: self.cfg.dim(),
                actual: initial.dim(),
            });
        }
        let v = self.cfg.v_multiplex;
        let dt = self.cfg.interval();
        let sub = self.cfg.substep();
        let mut rho = initial;
        let mut records = Vec::with_capacity(inputs.len());
        for (k, &s) in inputs.iter().enumerate() {
            rho = inject_input(&rho, s)?;
            let t0 = k as f64 * dt;
            observer(&StateEvent {
                step: k,
                kind: EventKind::Injected,
                time: t0,
                state: &rho,
            })?;
            let mut features = Vec::with_capacity(self.cfg.features_per_input());
            for sub_idx in 1..=v {
                rho = evolve_substep(&rho, &self.u_sub, &self.cfg);
                let health = rho.cheap_health();
                if health.hermiticity_error > HERMITIAN_TOL {
                    return Err(QrcError::NotHermitian(health.hermiticity_error));
                }
                if health.trace_error > TRACE_TOL {
                    return Err(QrcError::TraceViolation(rho.trace()));
                }
                features.extend(rho.z_expectations());
                observer(&StateEvent {
                    step: k,
                    kind: EventKind::SubStep(sub_idx),
                    time: t0 + sub_idx as f64 * sub,
                    state: &rho,
                })?;
            }
            records.push(ReadoutRecord {
                step_index: k,
                input_value: s,
                features,
            });
        }
        Ok(records)
    }

    /// Runs from the maximally mixed state.
    pub fn run<F>(&self, inputs: &[f64], observer: F) -> Result<Vec<ReadoutRecord>>
    where
        F: FnMut(&StateEvent<'_>) -> Result<()>,
    {
        self.run_from(
            DensityMatrix::maximally_mixed(self.cfg.n_qubits),
            inputs,
            observer,
        )
    }
}

/// Output of [`run_sequence`].
#[derive(Debug, Clone)]
pub struct SequenceOutput {
    pub records: Vec<ReadoutRecord>,
    /// Bloch vectors after every sub-step, when requested.
    pub trajectory: Option<BlochTrajectory>,
}

pub fn run_sequence(
    cfg: &ReservoirConfig,
    inputs: &[f64],
    record_states: bool,
) -> Result<SequenceOutput> {
    let reservoir = Reservoir::new(cfg)?;
    let mut trajectory = record_states.then(|| BlochTrajectory::new(cfg.n_qubits));
    let records = reservoir.run(inputs, |ev| {
        if let (Some(traj), EventKind::SubStep(_)) = (trajectory.as_mut(), ev.kind) {
            traj.push(bloch_vector(ev.state), ev.time);
        }
        Ok(())
    })?;
    Ok(SequenceOutput {
        records,
        trajectory,
    })
}

/// `len` inputs drawn i.i.d. uniform on `[0, 1]`.
pub fn uniform_inputs(len: usize, seed: u64) -> Vec<f64> {
    let mut rng = rng_from_seed(seed);
    let dist = Uniform::new_inclusive(0.0, 1.0);
    (0..len).map(|_| dist.sample(&mut rng)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{kron, pauli_string, Pauli, ZERO};
    use rand::Rng;

    fn random_density(n: usize, seed: u64) -> DensityMatrix {
        let mut rng = rng_from_seed(seed);
        let dim = 1 << n;
        let a = ComplexMatrix::from_fn(dim, |_, _| {
            Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
        });
        let p = a.matmul(&a.adjoint());
        let tr = p.trace();
        DensityMatrix::new(p.scale(tr.inv())).unwrap()
    }

    fn bell_pair() -> ComplexMatrix {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let r = Complex64::new(s, 0.0);
        ComplexMatrix::outer(&[r, ZERO, ZERO, r])
    }

    #[test]
    fn config_validation() {
        assert!(ReservoirConfig::default().validate().is_ok());
        for bad in [
            ReservoirConfig { n_qubits: 1, ..Default::default() },
            ReservoirConfig { n_qubits: 7, ..Default::default() },
            ReservoirConfig { j0: 0.0, ..Default::default() },
            ReservoirConfig { delta_t: -1.0, ..Default::default() },
            ReservoirConfig { v_multiplex: 0, ..Default::default() },
            ReservoirConfig { gamma: -0.1, ..Default::default() },
        ] {
            assert!(bad.validate().is_err(), "{bad:?}");
        }
    }

    #[test]
    fn coupling_two_qubits() {
        let j = sample_coupling(2, 0.7, 3).unwrap();
        assert_eq!(j.get(0, 0), 0.0);
        assert_eq!(j.get(0, 1), j.get(1, 0));
        assert!((j.get(0, 1).abs() - 0.7).abs() < 1e-12);
    }

    #[test]
    fn coupling_is_deterministic() {
        assert_eq!(sample_coupling(4, 0.3, 99).unwrap(), sample_coupling(4, 0.3, 99).unwrap());
        assert_ne!(sample_coupling(4, 0.3, 99).unwrap(), sample_coupling(4, 0.3, 100).unwrap());
    }

    #[test]
    fn coupling_spectral_radius_many_seeds() {
        for seed in 0..100 {
            let j = sample_coupling(4, 0.5, seed).unwrap();
            assert!((j.spectral_radius() - 0.5).abs() < 1e-12);
            for i in 0..4 {
                assert_eq!(j.get(i, i), 0.0);
                for k in 0..4 {
                    assert_eq!(j.get(i, k), j.get(k, i));
                }
            }
        }
    }

    #[test]
    fn hamiltonian_decoupled() {
        let cfg = ReservoirConfig { n_qubits: 2, h: 0.8, ..Default::default() };
        let ham = build_hamiltonian(&cfg, &CouplingMatrix::zeros(2)).unwrap();
        assert_eq!(ham, ComplexMatrix::from_real_diagonal(&[1.6, 0.0, 0.0, -1.6]));
    }

    #[test]
    fn hamiltonian_pure_coupling() {
        let cfg = ReservoirConfig { n_qubits: 2, h: 0.0, ..Default::default() };
        let c = 0.37;
        let j = CouplingMatrix::from_entries(2, vec![0.0, c, c, 0.0]);
        let ham = build_hamiltonian(&cfg, &j).unwrap();
        let xx = pauli_string(2, &[(1, Pauli::X), (2, Pauli::X)]).unwrap();
        assert!(ham.max_abs_diff(&xx.scale(Complex64::new(2.0 * c, 0.0))) < 1e-15);
    }

    #[test]
    fn hamiltonian_matches_term_by_term_sum() {
        let cfg = ReservoirConfig { n_qubits: 3, h: 1.3, ..Default::default() };
        let j = sample_coupling(3, 0.4, 17).unwrap();
        let ham = build_hamiltonian(&cfg, &j).unwrap();
        let mut oracle = ComplexMatrix::zeros(8);
        for i in 1..=3 {
            let z = pauli_string(3, &[(i, Pauli::Z)]).unwrap();
            oracle = &oracle + &z.scale(Complex64::new(cfg.h, 0.0));
            for k in 1..=3 {
                if i != k {
                    let xx = pauli_string(3, &[(i, Pauli::X), (k, Pauli::X)]).unwrap();
                    oracle = &oracle + &xx.scale(Complex64::new(j.get(i - 1, k - 1), 0.0));
                }
            }
        }
        assert!(ham.max_abs_diff(&oracle) < 1e-14);
    }

    #[test]
    fn injection_of_one_on_ground() {
        let rho = DensityMatrix::basis(3, 0);
        let out = inject_input(&rho, 1.0).unwrap();
        assert!(out.matrix().max_abs_diff(DensityMatrix::basis(3, 0b100).matrix()) < 1e-15);
    }

    #[test]
    fn injection_breaks_bell_pair() {
        let rho = DensityMatrix::new(kron(&bell_pair(), random_density(1, 2).matrix())).unwrap();
        let out = inject_input(&rho, 0.3).unwrap();
        let marginal = partial_trace(out.matrix(), &[2]).unwrap();
        let half = ComplexMatrix::identity(2).scale(Complex64::new(0.5, 0.0));
        assert!(marginal.max_abs_diff(&half) < 1e-14);
        assert!((out.trace() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn injection_sets_input_qubit() {
        let rho = random_density(3, 8);
        for s in [0.0, 0.25, 0.5, 0.9, 1.0] {
            let out = inject_input(&rho, s).unwrap();
            assert!((out.z_expectation(1) - (1.0 - 2.0 * s)).abs() < 1e-14);
        }
        assert!(matches!(inject_input(&rho, 1.2), Err(QrcError::InputOutOfRange(_))));
        assert!(matches!(inject_input(&rho, -0.1), Err(QrcError::InputOutOfRange(_))));
    }

    #[test]
    fn dephasing_zero_rate_is_exact_identity() {
        let rho = random_density(3, 1);
        let cfg = ReservoirConfig::default();
        assert_eq!(dephase_step(&rho, &cfg), rho);
    }

    #[test]
    fn dephasing_single_qubit_coherence() {
        let cfg = ReservoirConfig { gamma: 0.2, h: 1.0, ..Default::default() };
        let mut m = ComplexMatrix::identity(2).scale(Complex64::new(0.5, 0.0));
        m[(0, 1)] = Complex64::new(0.3, 0.1);
        m[(1, 0)] = Complex64::new(0.3, -0.1);
        let rho = DensityMatrix::new(m.clone()).unwrap();
        let out = dephase_step(&rho, &cfg);
        let decay = (-2.0 * 0.2 * 5.0 / 10.0f64).exp();
        assert!((out.matrix()[(0, 1)] - m[(0, 1)] * decay).norm() < 1e-15);
        assert_eq!(out.matrix()[(0, 0)], m[(0, 0)]);

        // Kraus form p rho + (1-p) Z rho Z
        let p = (1.0 + decay) / 2.0;
        let z = Pauli::Z.matrix();
        let kraus = &m.scale(Complex64::new(p, 0.0))
            + &z.matmul(&m).matmul(&z).scale(Complex64::new(1.0 - p, 0.0));
        assert!(out.matrix().max_abs_diff(&kraus) < 1e-15);
    }

    #[test]
    fn dephasing_order_independent() {
        let rho = random_density(4, 21);
        let decay = 0.61;
        let mut fwd = rho.matrix().clone();
        let mut rev = rho.matrix().clone();
        for q in 1..=4 {
            dephase_qubit(&mut fwd, q, decay);
            dephase_qubit(&mut rev, 5 - q, decay);
        }
        assert!(fwd.max_abs_diff(&rev) < 1e-13);
    }

    #[test]
    fn substep_identity_and_purity() {
        let cfg = ReservoirConfig::default();
        let rho = random_density(3, 4);
        let same = evolve_substep(&rho, &ComplexMatrix::identity(8), &cfg);
        assert!(same.matrix().max_abs_diff(rho.matrix()) < 1e-15);

        let res = Reservoir::new(&cfg).unwrap();
        let mut pure = DensityMatrix::basis(3, 5);
        for _ in 0..50 {
            pure = evolve_substep(&pure, res.substep_unitary(), &cfg);
        }
        assert!((pure.purity() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn dephasing_never_raises_purity() {
        let cfg = ReservoirConfig { gamma: 0.1, j0: 0.4, coupling_seed: 6, ..Default::default() };
        let res = Reservoir::new(&cfg).unwrap();
        let mut rho = random_density(3, 30);
        let mut last = rho.purity();
        for _ in 0..100 {
            rho = evolve_substep(&rho, res.substep_unitary(), &cfg);
            let p = rho.purity();
            assert!(p <= last + 1e-14);
            last = p;
        }
    }

    #[test]
    fn decoupled_ground_input_stays_up() {
        let cfg = ReservoirConfig::default();
        let res = Reservoir::with_coupling(&cfg, CouplingMatrix::zeros(3)).unwrap();
        let recs = res.run(&[0.0; 5], |_| Ok(())).unwrap();
        for r in &recs {
            for v in 0..cfg.v_multiplex {
                assert!((r.features[v * 3] - 1.0).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn feature_count_is_n_times_v() {
        let cfg = ReservoirConfig::default();
        let out = run_sequence(&cfg, &[0.2, 0.4], false).unwrap();
        assert!(out.records.iter().all(|r| r.features.len() == 30));
        assert!(out.trajectory.is_none());
        let out = run_sequence(&cfg, &[0.2, 0.4], true).unwrap();
        assert_eq!(out.trajectory.unwrap().len(), 20);
    }

    #[test]
    fn first_feature_tracks_input_in_fine_step_limit() {
        // J = 0: qubit 1 precesses about z, so <σz> stays at 1-2s for any substep
        let s = 0.3;
        for v in [1, 10, 1000] {
            let cfg = ReservoirConfig { v_multiplex: v, delta_t: 0.01 * v as f64, ..Default::default() };
            let res = Reservoir::with_coupling(&cfg, CouplingMatrix::zeros(3)).unwrap();
            let recs = res.run(&[s], |_| Ok(())).unwrap();
            assert!((recs[0].features[0] - (1.0 - 2.0 * s)).abs() < 1e-12);
        }
    }

    #[test]
    fn run_rejects_bad_inputs() {
        let cfg = ReservoirConfig::default();
        assert!(matches!(run_sequence(&cfg, &[0.1, 1.5], false), Err(QrcError::InputOutOfRange(_))));
        assert!(run_sequence(&cfg, &[], false).is_err());
    }

    #[test]
    fn run_is_deterministic() {
        let cfg = ReservoirConfig { j0: 0.4, gamma: 0.05, coupling_seed: 77, ..Default::default() };
        let inputs = uniform_inputs(30, 5);
        let a = run_sequence(&cfg, &inputs, false).unwrap().records;
        let b = run_sequence(&cfg, &inputs, false).unwrap().records;
        assert_eq!(a, b);
    }

    #[test]
    fn features_are_bounded() {
        let cfg = ReservoirConfig { j0: 0.5, coupling_seed: 1, ..Default::default() };
        let out = run_sequence(&cfg, &uniform_inputs(40, 2), false).unwrap();
        assert!(out.records.iter().flat_map(|r| &r.features).all(|f| (-1.0..=1.0).contains(f)));
    }

    #[test]
    fn washout_forgets_initial_state() {
        // near-symmetric draws can hold a slow mode for hundreds of inputs, so
        // only contraction and typical convergence are asserted
        let distance = |a: &ReadoutRecord, b: &ReadoutRecord| {
            a.features.iter().zip(&b.features).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
        };
        let mut late = Vec::new();
        for seed in 0..9 {
            let cfg = ReservoirConfig { j0: 0.5, coupling_seed: 1000 + seed, ..Default::default() };
            let res = Reservoir::new(&cfg).unwrap();
            let inputs = uniform_inputs(1000, seed);
            let a = res.run(&inputs, |_| Ok(())).unwrap();
            let b = res.run_from(DensityMatrix::basis(3, 7), &inputs, |_| Ok(())).unwrap();
            let (early, end) = (distance(&a[49], &b[49]), distance(&a[999], &b[999]));
            assert!(end < early, "seed {seed}: {early} -> {end}");
            late.push(distance(&a[499], &b[499]));
        }
        late.sort_by(f64::total_cmp);
        assert!(late[4] < 1e-6, "median distance after washout {}", late[4]);
    }

    #[test]
    fn pipeline_stays_physical() {
        let cfg = ReservoirConfig { j0: 0.5, gamma: 0.1, coupling_seed: 4, ..Default::default() };
        let res = Reservoir::new(&cfg).unwrap();
        let mut worst = StateHealth { min_eigenvalue: f64::INFINITY, ..Default::default() };
        res.run(&uniform_inputs(60, 9), |ev| {
            worst = worst.merge(ev.state.health()?);
            Ok(())
        })
        .unwrap();
        assert!(worst.trace_error < 1e-11);
        assert!(worst.hermiticity_error < 1e-10);
        assert!(worst.min_eigenvalue > -1e-9);
    }

    #[test]
    fn density_matrix_constructor_rejects_invalid() {
        let mut m = ComplexMatrix::identity(4);
        assert!(matches!(DensityMatrix::new(m.clone()), Err(QrcError::TraceViolation(_))));
        m = ComplexMatrix::from_real_diagonal(&[1.5, -0.5]);
        assert!(matches!(DensityMatrix::new(m), Err(QrcError::PositivityViolation(_))));
    }
}

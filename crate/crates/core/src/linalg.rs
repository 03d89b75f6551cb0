//! Dense complex linear algebra for few-qubit operators.
//!
//! All multi-qubit operations share one index convention: qubit 1 is the most
//! significant tensor factor, so a basis index `b` of a `2^N` space reads as
//! the bit string `b1 b2 … bN` with `b1` the highest bit. Qubit `q` therefore
//! lives at bit position `N - q`.

use std::fmt;
use std::ops::{Add, Index, IndexMut, Mul, Sub};

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;

use crate::error::{QrcError, Result};

/// Largest register the dense representation supports.
pub const MAX_QUBITS: usize = 6;

/// Entrywise tolerance for treating a matrix as Hermitian.
pub const HERMITIAN_TOL: f64 = 1e-10;

const EIG_EPS: f64 = 1e-15;
const EIG_MAX_ITER: usize = 10_000;

pub const ZERO: Complex64 = Complex64 { re: 0.0, im: 0.0 };
pub const ONE: Complex64 = Complex64 { re: 1.0, im: 0.0 };
pub const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };

/// Square complex matrix stored row-major.
#[derive(Clone, PartialEq)]
pub struct ComplexMatrix {
    dim: usize,
    data: Vec<Complex64>,
}

impl ComplexMatrix {
    pub fn zeros(dim: usize) -> Self {
        Self {
            dim,
            data: vec![ZERO; dim * dim],
        }
    }

    pub fn identity(dim: usize) -> Self {
        let mut m = Self::zeros(dim);
        for i in 0..dim {
            m[(i, i)] = ONE;
        }
        m
    }

    pub fn from_fn(dim: usize, mut f: impl FnMut(usize, usize) -> Complex64) -> Self {
        let mut data = Vec::with_capacity(dim * dim);
        for i in 0..dim {
            for j in 0..dim {
                data.push(f(i, j));
            }
        }
        Self { dim, data }
    }

    /// Builds a matrix from row-major entries. Panics unless `entries.len()` is a square.
    pub fn from_row_major(entries: Vec<Complex64>) -> Self {
        let dim = (entries.len() as f64).sqrt().round() as usize;
        assert_eq!(dim * dim, entries.len(), "entry count is not a perfect square");
        Self { dim, data: entries }
    }

    pub fn from_real_diagonal(diag: &[f64]) -> Self {
        let mut m = Self::zeros(diag.len());
        for (i, &d) in diag.iter().enumerate() {
            m[(i, i)] = Complex64::new(d, 0.0);
        }
        m
    }

    /// Projector `|psi><psi|`.
    pub fn outer(psi: &[Complex64]) -> Self {
        Self::from_fn(psi.len(), |i, j| psi[i] * psi[j].conj())
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn as_slice(&self) -> &[Complex64] {
        &self.data
    }

    pub fn as_mut_slice(&mut self) -> &mut [Complex64] {
        &mut self.data
    }

    pub fn row(&self, i: usize) -> &[Complex64] {
        &self.data[i * self.dim..(i + 1) * self.dim]
    }

    pub fn adjoint(&self) -> Self {
        Self::from_fn(self.dim, |i, j| self[(j, i)].conj())
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.dim, |i, j| self[(j, i)])
    }

    pub fn scale(&self, s: Complex64) -> Self {
        Self {
            dim: self.dim,
            data: self.data.iter().map(|&z| z * s).collect(),
        }
    }

    pub fn trace(&self) -> Complex64 {
        (0..self.dim).map(|i| self[(i, i)]).sum()
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    /// Largest entrywise modulus of `self - other`.
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        assert_eq!(self.dim, other.dim);
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    /// Largest entrywise modulus of `self - self^dagger`.
    pub fn hermiticity_error(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for i in 0..self.dim {
            for j in i..self.dim {
                worst = worst.max((self[(i, j)] - self[(j, i)].conj()).norm());
            }
        }
        worst
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.hermiticity_error() <= tol
    }

    pub fn all_finite(&self) -> bool {
        self.data.iter().all(|z| z.re.is_finite() && z.im.is_finite())
    }

    pub fn matmul(&self, rhs: &Self) -> Self {
        assert_eq!(self.dim, rhs.dim, "matmul dimension mismatch");
        let n = self.dim;
        let mut out = vec![ZERO; n * n];
        for i in 0..n {
            let out_row = &mut out[i * n..(i + 1) * n];
            for k in 0..n {
                let a = self.data[i * n + k];
                if a == ZERO {
                    continue;
                }
                let rhs_row = &rhs.data[k * n..(k + 1) * n];
                for (o, &b) in out_row.iter_mut().zip(rhs_row) {
                    *o += a * b;
                }
            }
        }
        Self { dim: n, data: out }
    }

    /// `u * self * u^dagger`.
    pub fn conjugate_by(&self, u: &Self) -> Self {
        let n = self.dim;
        let t = u.matmul(self);
        let mut out = vec![ZERO; n * n];
        for i in 0..n {
            let t_row = t.row(i);
            for j in 0..n {
                let u_row = u.row(j);
                let mut acc = ZERO;
                for (a, b) in t_row.iter().zip(u_row) {
                    acc += a * b.conj();
                }
                out[i * n + j] = acc;
            }
        }
        Self { dim: n, data: out }
    }

    fn to_nalgebra(&self) -> DMatrix<Complex64> {
        DMatrix::from_fn(self.dim, self.dim, |i, j| self[(i, j)])
    }

    fn from_nalgebra(m: &DMatrix<Complex64>) -> Self {
        Self::from_fn(m.nrows(), |i, j| m[(i, j)])
    }
}

impl Index<(usize, usize)> for ComplexMatrix {
    type Output = Complex64;

    #[inline]
    fn index(&self, (i, j): (usize, usize)) -> &Complex64 {
        &self.data[i * self.dim + j]
    }
}

impl IndexMut<(usize, usize)> for ComplexMatrix {
    #[inline]
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Complex64 {
        &mut self.data[i * self.dim + j]
    }
}

impl Add for &ComplexMatrix {
    type Output = ComplexMatrix;

    fn add(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        assert_eq!(self.dim, rhs.dim);
        ComplexMatrix {
            dim: self.dim,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| a + b).collect(),
        }
    }
}

impl Sub for &ComplexMatrix {
    type Output = ComplexMatrix;

    fn sub(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        assert_eq!(self.dim, rhs.dim);
        ComplexMatrix {
            dim: self.dim,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| a - b).collect(),
        }
    }
}

impl Mul for &ComplexMatrix {
    type Output = ComplexMatrix;

    fn mul(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        self.matmul(rhs)
    }
}

impl fmt::Debug for ComplexMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "ComplexMatrix({}x{})", self.dim, self.dim)?;
        for i in 0..self.dim {
            let row: Vec<String> = self
                .row(i)
                .iter()
                .map(|z| format!("{:+.4}{:+.4}i", z.re, z.im))
                .collect();
            writeln!(f, "  [{}]", row.join(", "))?;
        }
        Ok(())
    }
}

/// Kronecker product; `a` supplies the more significant index.
pub fn kron(a: &ComplexMatrix, b: &ComplexMatrix) -> ComplexMatrix {
    let (da, db) = (a.dim(), b.dim());
    ComplexMatrix::from_fn(da * db, |r, c| a[(r / db, c / db)] * b[(r % db, c % db)])
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Pauli {
    X,
    Y,
    Z,
}

impl Pauli {
    pub fn matrix(self) -> ComplexMatrix {
        let entries = match self {
            Pauli::X => [ZERO, ONE, ONE, ZERO],
            Pauli::Y => [ZERO, -I, I, ZERO],
            Pauli::Z => [ONE, ZERO, ZERO, -ONE],
        };
        ComplexMatrix::from_row_major(entries.to_vec())
    }
}

/// Number of qubits behind a `2^n`-dimensional operator.
pub fn qubit_count(dim: usize) -> Result<usize> {
    if dim < 2 || !dim.is_power_of_two() {
        return Err(QrcError::DimensionMismatch {
            expected: dim.next_power_of_two().max(2),
            actual: dim,
        });
    }
    Ok(dim.trailing_zeros() as usize)
}

/// Bit position of 1-based qubit `q` in an `n`-qubit basis index.
#[inline]
pub fn qubit_bit(n: usize, q: usize) -> usize {
    n - q
}

/// Bitmask of a nonempty proper subset of the qubits `1..=n`.
pub fn subset_mask(n: usize, qubits: &[usize]) -> Result<usize> {
    let bad = || QrcError::BadSubset {
        subset: qubits.to_vec(),
        n_qubits: n,
    };
    let mut mask = 0usize;
    for &q in qubits {
        if q == 0 || q > n {
            return Err(bad());
        }
        mask |= 1 << qubit_bit(n, q);
    }
    if mask == 0 || mask == (1 << n) - 1 {
        return Err(bad());
    }
    Ok(mask)
}

/// Scatters the low bits of `bits` into the set positions of `mask`.
#[inline]
fn deposit(mut bits: usize, mask: usize) -> usize {
    let mut out = 0;
    let mut m = mask;
    while m != 0 {
        let low = m & m.wrapping_neg();
        if bits & 1 == 1 {
            out |= low;
        }
        bits >>= 1;
        m &= m - 1;
    }
    out
}

/// Tensor product of the given Paulis with identity on every other qubit.
pub fn pauli_string(n: usize, spec: &[(usize, Pauli)]) -> Result<ComplexMatrix> {
    if n == 0 || n > MAX_QUBITS {
        return Err(QrcError::InvalidConfig(format!(
            "qubit count {n} outside 1..={MAX_QUBITS}"
        )));
    }
    let mut factors = vec![None; n];
    for &(q, p) in spec {
        if q == 0 || q > n {
            return Err(QrcError::BadSubset {
                subset: spec.iter().map(|&(q, _)| q).collect(),
                n_qubits: n,
            });
        }
        factors[q - 1] = Some(p);
    }
    let id = ComplexMatrix::identity(2);
    let mut out = ComplexMatrix::identity(1);
    for f in factors {
        let m = f.map(Pauli::matrix).unwrap_or_else(|| id.clone());
        out = kron(&out, &m);
    }
    Ok(out)
}

/// Spectrum of a Hermitian matrix, eigenvalues ascending.
#[derive(Debug, Clone)]
pub struct HermitianEigen {
    pub values: Vec<f64>,
    /// Columns are the eigenvectors, in the order of `values`.
    pub vectors: ComplexMatrix,
}

impl HermitianEigen {
    pub fn reconstruct(&self) -> ComplexMatrix {
        let v = &self.vectors;
        let n = v.dim();
        ComplexMatrix::from_fn(n, |i, j| {
            (0..n)
                .map(|k| v[(i, k)] * self.values[k] * v[(j, k)].conj())
                .sum()
        })
    }
}

fn check_hermitian(m: &ComplexMatrix) -> Result<()> {
    let err = m.hermiticity_error();
    if err > HERMITIAN_TOL || !m.all_finite() {
        return Err(QrcError::NotHermitian(err));
    }
    Ok(())
}

pub fn hermitian_eig(m: &ComplexMatrix) -> Result<HermitianEigen> {
    check_hermitian(m)?;
    let eig = SymmetricEigen::try_new(m.to_nalgebra(), EIG_EPS, EIG_MAX_ITER)
        .ok_or(QrcError::NoConvergence)?;
    let mut order: Vec<usize> = (0..m.dim()).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let values = order.iter().map(|&k| eig.eigenvalues[k]).collect();
    let vecs = ComplexMatrix::from_nalgebra(&eig.eigenvectors);
    let vectors = ComplexMatrix::from_fn(m.dim(), |i, j| vecs[(i, order[j])]);
    Ok(HermitianEigen { values, vectors })
}

/// Eigenvalues only (ascending); skips accumulating eigenvectors.
pub fn hermitian_eigenvalues(m: &ComplexMatrix) -> Result<Vec<f64>> {
    check_hermitian(m)?;
    let mut values: Vec<f64> = m.to_nalgebra().symmetric_eigenvalues().iter().copied().collect();
    values.sort_by(f64::total_cmp);
    Ok(values)
}

/// Time evolution `exp(-i h t)` built from a cached eigendecomposition of `h`.
#[derive(Debug, Clone)]
pub struct Propagator {
    eigen: HermitianEigen,
}

impl Propagator {
    pub fn new(h: &ComplexMatrix) -> Result<Self> {
        Ok(Self {
            eigen: hermitian_eig(h)?,
        })
    }

    pub fn unitary(&self, t: f64) -> ComplexMatrix {
        let v = &self.eigen.vectors;
        let n = v.dim();
        let phases: Vec<Complex64> = self
            .eigen
            .values
            .iter()
            .map(|&l| Complex64::from_polar(1.0, -l * t))
            .collect();
        let u = ComplexMatrix::from_fn(n, |i, j| {
            (0..n)
                .map(|k| v[(i, k)] * phases[k] * v[(j, k)].conj())
                .sum()
        });
        polish_unitary(u, 2)
    }

    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigen.values
    }
}

/// Newton-Schulz steps `U <- U (3I - U^dagger U) / 2` toward the nearest unitary.
///
/// Long runs apply the same sub-step unitary tens of thousands of times, so a
/// trace bias of `Tr(rho (U^dagger U - I))` per step accumulates linearly.
fn polish_unitary(mut u: ComplexMatrix, steps: usize) -> ComplexMatrix {
    let n = u.dim();
    for _ in 0..steps {
        let gram = u.adjoint().matmul(&u);
        let half = Complex64::new(0.5, 0.0);
        let corr = ComplexMatrix::from_fn(n, |i, j| {
            let g = gram[(i, j)] * half;
            if i == j {
                Complex64::new(1.5, 0.0) - g
            } else {
                -g
            }
        });
        u = u.matmul(&corr);
    }
    u
}

pub fn unitary_propagator(h: &ComplexMatrix, t: f64) -> Result<ComplexMatrix> {
    Ok(Propagator::new(h)?.unitary(t))
}

/// Reduced operator on `keep` (qubits listed 1-based, kept in ascending order).
pub fn partial_trace(rho: &ComplexMatrix, keep: &[usize]) -> Result<ComplexMatrix> {
    let n = qubit_count(rho.dim())?;
    let keep_mask = subset_mask(n, keep)?;
    let traced_mask = ((1 << n) - 1) & !keep_mask;
    let kept = keep_mask.count_ones() as usize;
    let traced = n - kept;
    let out_dim = 1 << kept;
    let rows: Vec<usize> = (0..out_dim).map(|r| deposit(r, keep_mask)).collect();
    let envs: Vec<usize> = (0..1 << traced).map(|t| deposit(t, traced_mask)).collect();
    Ok(ComplexMatrix::from_fn(out_dim, |r, c| {
        envs.iter()
            .map(|&e| rho[(rows[r] | e, rows[c] | e)])
            .sum()
    }))
}

/// Partial transpose with respect to the qubits in `part_a`.
pub fn partial_transpose(rho: &ComplexMatrix, part_a: &[usize]) -> Result<ComplexMatrix> {
    let n = qubit_count(rho.dim())?;
    let mask = subset_mask(n, part_a)?;
    Ok(partial_transpose_mask(rho, mask))
}

/// Partial transpose over the qubits whose bits are set in `mask`. No validation.
pub fn partial_transpose_mask(rho: &ComplexMatrix, mask: usize) -> ComplexMatrix {
    ComplexMatrix::from_fn(rho.dim(), |i, j| {
        let i2 = (i & !mask) | (j & mask);
        let j2 = (j & !mask) | (i & mask);
        rho[(i2, j2)]
    })
}

/// Sum of singular values. Hermitian inputs go through the eigenvalue route.
pub fn trace_norm(m: &ComplexMatrix) -> f64 {
    if m.is_hermitian(HERMITIAN_TOL) {
        if let Ok(values) = hermitian_eigenvalues(m) {
            return values.iter().map(|l| l.abs()).sum();
        }
    }
    m.to_nalgebra().singular_values().iter().sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    fn random_hermitian(dim: usize, rng: &mut impl Rng) -> ComplexMatrix {
        let a = ComplexMatrix::from_fn(dim, |_, _| {
            Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
        });
        (&a + &a.adjoint()).scale(c(0.5))
    }

    fn random_density(dim: usize, rng: &mut impl Rng) -> ComplexMatrix {
        let a = ComplexMatrix::from_fn(dim, |_, _| {
            Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
        });
        let p = a.matmul(&a.adjoint());
        let tr = p.trace();
        p.scale(tr.inv())
    }

    fn bell() -> ComplexMatrix {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        ComplexMatrix::outer(&[c(s), ZERO, ZERO, c(s)])
    }

    #[test]
    fn kron_identities() {
        let i2 = ComplexMatrix::identity(2);
        assert_eq!(kron(&i2, &i2), ComplexMatrix::identity(4));
        let zi = kron(&Pauli::Z.matrix(), &i2);
        assert_eq!(zi, ComplexMatrix::from_real_diagonal(&[1.0, 1.0, -1.0, -1.0]));
    }

    #[test]
    fn kron_xx_flips_both_qubits() {
        let xx = kron(&Pauli::X.matrix(), &Pauli::X.matrix());
        let ket00 = [ONE, ZERO, ZERO, ZERO];
        let out: Vec<Complex64> = (0..4)
            .map(|i| (0..4).map(|j| xx[(i, j)] * ket00[j]).sum())
            .collect();
        assert_eq!(out, vec![ZERO, ZERO, ZERO, ONE]);
    }

    #[test]
    fn kron_is_associative() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let a = random_hermitian(2, &mut rng);
        let b = random_hermitian(2, &mut rng);
        let d = random_hermitian(4, &mut rng);
        let left = kron(&kron(&a, &b), &d);
        let right = kron(&a, &kron(&b, &d));
        assert!(left.max_abs_diff(&right) < 1e-14);
    }

    #[test]
    fn pauli_eigenpairs() {
        let z = hermitian_eig(&Pauli::Z.matrix()).unwrap();
        assert_eq!(z.values, vec![-1.0, 1.0]);
        let x = hermitian_eig(&Pauli::X.matrix()).unwrap();
        assert!((x.values[0] + 1.0).abs() < 1e-14 && (x.values[1] - 1.0).abs() < 1e-14);
        let s = std::f64::consts::FRAC_1_SQRT_2;
        // eigenvector of -1 is (|0> - |1>)/sqrt2 up to phase
        let v0 = [x.vectors[(0, 0)], x.vectors[(1, 0)]];
        let overlap = (v0[0] * s - v0[1] * s).norm();
        assert!((overlap - 1.0).abs() < 1e-12);
    }

    #[test]
    fn random_hermitian_reconstructs() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let m = random_hermitian(8, &mut rng);
        let eig = hermitian_eig(&m).unwrap();
        assert!(eig.values.windows(2).all(|w| w[0] <= w[1]));
        let resid = (&eig.reconstruct() - &m).frobenius_norm();
        assert!(resid < 1e-9 * 8.0, "residual {resid}");
        let unitarity = eig.vectors.matmul(&eig.vectors.adjoint());
        assert!(unitarity.max_abs_diff(&ComplexMatrix::identity(8)) < 1e-12);
    }

    #[test]
    fn non_hermitian_rejected() {
        let mut m = ComplexMatrix::zeros(2);
        m[(0, 1)] = ONE;
        assert!(matches!(hermitian_eig(&m), Err(QrcError::NotHermitian(_))));
        assert!(matches!(unitary_propagator(&m, 1.0), Err(QrcError::NotHermitian(_))));
    }

    #[test]
    fn propagator_cases() {
        let u = unitary_propagator(&ComplexMatrix::zeros(4), 3.7).unwrap();
        assert!(u.max_abs_diff(&ComplexMatrix::identity(4)) < 1e-15);

        let t = 0.83;
        let u = unitary_propagator(&Pauli::Z.matrix(), t).unwrap();
        let mut expect = ComplexMatrix::zeros(2);
        expect[(0, 0)] = Complex64::from_polar(1.0, -t);
        expect[(1, 1)] = Complex64::from_polar(1.0, t);
        assert!(u.max_abs_diff(&expect) < 1e-14);

        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let h = random_hermitian(16, &mut rng);
        let u = unitary_propagator(&h, 5.0).unwrap();
        let uu = u.matmul(&u.adjoint());
        assert!(uu.max_abs_diff(&ComplexMatrix::identity(16)) < 1e-10);
    }

    #[test]
    fn propagator_composes() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let h = random_hermitian(8, &mut rng);
        let p = Propagator::new(&h).unwrap();
        let lhs = p.unitary(0.7).matmul(&p.unitary(1.9));
        assert!(lhs.max_abs_diff(&p.unitary(2.6)) < 1e-9);
    }

    #[test]
    fn partial_trace_of_product() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let ra = random_density(2, &mut rng);
        let rb = random_density(4, &mut rng);
        let rho = kron(&ra, &rb);
        assert!(partial_trace(&rho, &[2, 3]).unwrap().max_abs_diff(&rb) < 1e-12);
        assert!(partial_trace(&rho, &[1]).unwrap().max_abs_diff(&ra) < 1e-12);
    }

    #[test]
    fn partial_trace_bell_marginal() {
        // brute-force contraction: (rho_B)_{ij} = sum_a rho_{(a,i),(a,j)}
        let rho = bell();
        let mut oracle = ComplexMatrix::zeros(2);
        for i in 0..2 {
            for j in 0..2 {
                for a in 0..2 {
                    oracle[(i, j)] += rho[(2 * a + i, 2 * a + j)];
                }
            }
        }
        let got = partial_trace(&rho, &[2]).unwrap();
        assert!(got.max_abs_diff(&oracle) < 1e-15);
        assert!(got.max_abs_diff(&ComplexMatrix::identity(2).scale(c(0.5))) < 1e-15);
    }

    #[test]
    fn partial_trace_keeps_trace() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let rho = random_density(16, &mut rng);
        for keep in [&[1][..], &[2, 4], &[1, 2, 3], &[3]] {
            let tr = partial_trace(&rho, keep).unwrap().trace();
            assert!((tr - rho.trace()).norm() < 1e-12);
        }
    }

    #[test]
    fn bad_subsets_rejected() {
        let rho = ComplexMatrix::identity(8);
        for bad in [&[][..], &[1, 2, 3], &[0], &[4]] {
            assert!(matches!(partial_trace(&rho, bad), Err(QrcError::BadSubset { .. })));
            assert!(matches!(partial_transpose(&rho, bad), Err(QrcError::BadSubset { .. })));
        }
        assert!(pauli_string(2, &[(3, Pauli::X)]).is_err());
    }

    #[test]
    fn partial_transpose_bell_spectrum() {
        let pt = partial_transpose(&bell(), &[1]).unwrap();
        let vals = hermitian_eigenvalues(&pt).unwrap();
        let expect = [-0.5, 0.5, 0.5, 0.5];
        for (v, e) in vals.iter().zip(expect) {
            assert!((v - e).abs() < 1e-12);
        }
        assert!((trace_norm(&pt) - 2.0).abs() < 1e-12);
    }

    #[test]
    fn partial_transpose_of_product() {
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        let ra = random_density(2, &mut rng);
        let rb = random_density(4, &mut rng);
        let pt = partial_transpose(&kron(&ra, &rb), &[1]).unwrap();
        assert!(pt.max_abs_diff(&kron(&ra.transpose(), &rb)) < 1e-15);
        let before = hermitian_eigenvalues(&kron(&ra, &rb)).unwrap();
        let after = hermitian_eigenvalues(&pt).unwrap();
        for (a, b) in before.iter().zip(&after) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn trace_norm_cases() {
        assert_eq!(trace_norm(&ComplexMatrix::zeros(4)), 0.0);
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let rho = random_density(8, &mut rng);
        assert!((trace_norm(&rho) - 1.0).abs() < 1e-12);
        // non-Hermitian route: |0><1| has a single singular value 1
        let mut m = ComplexMatrix::zeros(2);
        m[(0, 1)] = ONE;
        assert!((trace_norm(&m) - 1.0).abs() < 1e-14);
    }

    #[test]
    fn pauli_string_cases() {
        assert_eq!(pauli_string(1, &[(1, Pauli::Z)]).unwrap(), Pauli::Z.matrix());
        assert_eq!(pauli_string(3, &[]).unwrap(), ComplexMatrix::identity(8));
        let xx = pauli_string(2, &[(1, Pauli::X), (2, Pauli::X)]).unwrap();
        let anti = ComplexMatrix::from_fn(4, |i, j| if i + j == 3 { ONE } else { ZERO });
        assert_eq!(xx, anti);
        assert_eq!(xx, kron(&Pauli::X.matrix(), &Pauli::X.matrix()));
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #![proptest_config(ProptestConfig::with_cases(64))]

            #[test]
            fn partial_transpose_is_involution(seed in any::<u64>(), mask in 1usize..7) {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                let rho = random_density(8, &mut rng);
                let twice = partial_transpose_mask(&partial_transpose_mask(&rho, mask), mask);
                prop_assert_eq!(twice, rho);
            }

            #[test]
            fn ppt_trace_norm_at_least_one(seed in any::<u64>(), mask in 1usize..15) {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                let rho = random_density(16, &mut rng);
                let pt = partial_transpose_mask(&rho, mask);
                prop_assert!(pt.hermiticity_error() < 1e-15);
                prop_assert!(trace_norm(&pt) >= 1.0 - 1e-12);
            }
        }
    }
}

//! Dense state-vector and density-matrix kernels.
//!
//! Qubit 0 is the most significant bit of a computational-basis index, so a
//! register split into `A` (qubits `0..n_a`) and `B` (qubits `n_a..n_a+n_b`)
//! stores amplitude `⟨i_A j_B|ψ⟩` at index `i * 2^n_b + j`.

mod io;
pub(crate) mod key;
mod metrics;
mod schmidt;
mod spectrum;

pub use io::{DensityFile, StateFile};
pub use key::{canonical_key, StateKey};
pub use metrics::{fidelity, trace_distance};
pub use schmidt::{schmidt_decompose, SchmidtDecomposition};
pub use spectrum::{
    eigendecompose, spectrum_deviation, von_neumann_entropy, Spectrum, DEFAULT_DEGENERACY_TOL, ZERO_EIGENVALUE_TOL,
};

use nalgebra::DMatrix;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};

pub type C64 = num_complex::Complex64;

/// Tolerance on `Σ|a_i|² = 1` accepted by [`PureState::new`].
pub const NORM_TOL: f64 = 1e-12;

/// Tolerance used when validating density matrices.
pub const DENSITY_TOL: f64 = 1e-12;

/// Normalized amplitude vector over `n_qubits` qubits.
#[derive(Clone, Debug, PartialEq)]
pub struct PureState {
    n_qubits: usize,
    amps: Vec<C64>,
}

impl PureState {
    /// Validates dimension and normalization.
    pub fn new(n_qubits: usize, amps: Vec<C64>) -> Result<Self> {
        check_dim(n_qubits, amps.len())?;
        let norm2: f64 = amps.iter().map(|a| a.norm_sqr()).sum();
        if (norm2 - 1.0).abs() > NORM_TOL {
            return Err(Error::NotNormalized(norm2));
        }
        Ok(Self { n_qubits, amps })
    }

    /// Rescales `amps` to unit norm.
    pub fn normalized(n_qubits: usize, mut amps: Vec<C64>) -> Result<Self> {
        check_dim(n_qubits, amps.len())?;
        let norm = amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
        if norm.is_nan() || norm <= 0.0 || !norm.is_finite() {
            return Err(Error::NotNormalized(norm * norm));
        }
        amps.iter_mut().for_each(|a| *a /= norm);
        Ok(Self { n_qubits, amps })
    }

    /// Builds a state without checks; callers guarantee the invariants.
    pub(crate) fn from_raw(n_qubits: usize, amps: Vec<C64>) -> Self {
        debug_assert_eq!(amps.len(), 1 << n_qubits);
        Self { n_qubits, amps }
    }

    /// `|0…0⟩`
    pub fn zero(n_qubits: usize) -> Self {
        Self::basis(n_qubits, 0)
    }

    /// Computational-basis state `|index⟩`.
    pub fn basis(n_qubits: usize, index: usize) -> Self {
        let mut amps = vec![C64::new(0.0, 0.0); 1 << n_qubits];
        amps[index] = C64::new(1.0, 0.0);
        Self { n_qubits, amps }
    }

    /// Gaussian-sampled (Haar-distributed) random state.
    pub fn random<R: Rng + ?Sized>(n_qubits: usize, rng: &mut R) -> Self {
        let amps = (0..1usize << n_qubits)
            .map(|_| C64::new(rng.sample(StandardNormal), rng.sample(StandardNormal)))
            .collect();
        Self::normalized(n_qubits, amps).expect("gaussian vector is nonzero")
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn dim(&self) -> usize {
        self.amps.len()
    }

    pub fn amplitudes(&self) -> &[C64] {
        &self.amps
    }

    pub(crate) fn amplitudes_mut(&mut self) -> &mut [C64] {
        &mut self.amps
    }

    pub fn into_amplitudes(self) -> Vec<C64> {
        self.amps
    }

    /// `⟨self|other⟩`
    pub fn inner(&self, other: &PureState) -> Result<C64> {
        if self.dim() != other.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: other.dim(),
            });
        }
        Ok(inner_raw(&self.amps, &other.amps))
    }

    /// `|self⟩ ⊗ |other⟩`, with `self` on the leading qubits.
    pub fn tensor(&self, other: &PureState) -> PureState {
        let mut amps = Vec::with_capacity(self.dim() * other.dim());
        for a in &self.amps {
            for b in &other.amps {
                amps.push(a * b);
            }
        }
        PureState::from_raw(self.n_qubits + other.n_qubits, amps)
    }

    /// Multiplies every amplitude by `e^{iθ}`.
    pub fn with_global_phase(&self, theta: f64) -> PureState {
        let phase = C64::from_polar(1.0, theta);
        PureState::from_raw(self.n_qubits, self.amps.iter().map(|a| a * phase).collect())
    }

    /// `|ψ⟩⟨ψ|`
    pub fn density(&self) -> DensityMatrix {
        let d = self.dim();
        let m = DMatrix::from_fn(d, d, |i, j| self.amps[i] * self.amps[j].conj());
        DensityMatrix::from_raw(self.n_qubits, m)
    }

    /// Amplitudes viewed as a `2^n_a × 2^n_b` matrix.
    pub(crate) fn as_bipartite_matrix(&self, part: BipartitePartition) -> Result<DMatrix<C64>> {
        part.check(self.n_qubits)?;
        let (da, db) = (part.dim_a(), part.dim_b());
        Ok(DMatrix::from_fn(da, db, |i, j| self.amps[i * db + j]))
    }
}

pub(crate) fn inner_raw(a: &[C64], b: &[C64]) -> C64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

fn check_dim(n_qubits: usize, len: usize) -> Result<()> {
    if n_qubits == 0 || n_qubits > 24 {
        return Err(Error::InvalidParameter(format!(
            "qubit count {n_qubits} outside 1..=24"
        )));
    }
    if len != 1 << n_qubits {
        return Err(Error::DimensionMismatch {
            expected: 1 << n_qubits,
            found: len,
        });
    }
    Ok(())
}

/// Which half of a bipartition to keep or act on.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    A,
    B,
}

impl Side {
    pub fn other(self) -> Side {
        match self {
            Side::A => Side::B,
            Side::B => Side::A,
        }
    }
}

/// Split of a register into leading `A` qubits and trailing `B` qubits.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
pub struct BipartitePartition {
    pub n_a: usize,
    pub n_b: usize,
}

impl BipartitePartition {
    pub fn new(n_a: usize, n_b: usize) -> Result<Self> {
        if n_a == 0 || n_b == 0 {
            return Err(Error::InvalidPartition(format!(
                "both sides need at least one qubit (got {n_a}+{n_b})"
            )));
        }
        Ok(Self { n_a, n_b })
    }

    pub fn n_qubits(&self) -> usize {
        self.n_a + self.n_b
    }

    pub fn dim_a(&self) -> usize {
        1 << self.n_a
    }

    pub fn dim_b(&self) -> usize {
        1 << self.n_b
    }

    pub fn side_qubits(&self, side: Side) -> std::ops::Range<usize> {
        match side {
            Side::A => 0..self.n_a,
            Side::B => self.n_a..self.n_a + self.n_b,
        }
    }

    pub fn side_len(&self, side: Side) -> usize {
        match side {
            Side::A => self.n_a,
            Side::B => self.n_b,
        }
    }

    pub(crate) fn check(&self, n_qubits: usize) -> Result<()> {
        if self.n_qubits() != n_qubits {
            return Err(Error::InvalidPartition(format!(
                "{}+{} split applied to a {}-qubit state",
                self.n_a, self.n_b, n_qubits
            )));
        }
        Ok(())
    }
}

/// Hermitian, positive semidefinite, unit-trace operator.
#[derive(Clone, Debug, PartialEq)]
pub struct DensityMatrix {
    n_qubits: usize,
    m: DMatrix<C64>,
}

impl DensityMatrix {
    /// Validates hermiticity, trace and positivity within [`DENSITY_TOL`].
    pub fn new(n_qubits: usize, m: DMatrix<C64>) -> Result<Self> {
        Self::with_tolerance(n_qubits, m, DENSITY_TOL)
    }

    pub fn with_tolerance(n_qubits: usize, m: DMatrix<C64>, tol: f64) -> Result<Self> {
        if m.nrows() != m.ncols() {
            return Err(Error::InvalidDensityMatrix(format!(
                "matrix is {}x{}",
                m.nrows(),
                m.ncols()
            )));
        }
        check_dim(n_qubits, m.nrows())?;
        let d = m.nrows();
        for i in 0..d {
            for j in i..d {
                let dev = (m[(i, j)] - m[(j, i)].conj()).norm();
                if dev > tol {
                    return Err(Error::InvalidDensityMatrix(format!(
                        "not Hermitian at ({i},{j}), deviation {dev:e}"
                    )));
                }
            }
        }
        let tr = m.trace();
        if (tr.re - 1.0).abs() > tol || tr.im.abs() > tol {
            return Err(Error::InvalidDensityMatrix(format!("trace is {tr}")));
        }
        let rho = Self { n_qubits, m };
        let min = rho.eigenvalues().into_iter().fold(f64::INFINITY, f64::min);
        if min < -tol {
            return Err(Error::InvalidDensityMatrix(format!("negative eigenvalue {min:e}")));
        }
        Ok(rho)
    }

    pub(crate) fn from_raw(n_qubits: usize, m: DMatrix<C64>) -> Self {
        Self { n_qubits, m }
    }

    /// `diag(probs)`; `probs` must sum to one.
    pub fn diagonal(n_qubits: usize, probs: &[f64]) -> Result<Self> {
        check_dim(n_qubits, probs.len())?;
        let m = DMatrix::from_fn(probs.len(), probs.len(), |i, j| {
            if i == j {
                C64::new(probs[i], 0.0)
            } else {
                C64::new(0.0, 0.0)
            }
        });
        Self::new(n_qubits, m)
    }

    /// `I / 2^n`
    pub fn maximally_mixed(n_qubits: usize) -> Self {
        let d = 1usize << n_qubits;
        let m = DMatrix::from_fn(d, d, |i, j| {
            if i == j {
                C64::new(1.0 / d as f64, 0.0)
            } else {
                C64::new(0.0, 0.0)
            }
        });
        Self::from_raw(n_qubits, m)
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn dim(&self) -> usize {
        self.m.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<C64> {
        &self.m
    }

    /// Real eigenvalues, largest first.
    pub fn eigenvalues(&self) -> Vec<f64> {
        let mut e = hermitian_eigenvalues(&self.m);
        e.sort_by(|a, b| b.total_cmp(a));
        e
    }

    /// `U ρ U†` for a unitary `u` of matching dimension.
    pub fn conjugate_by(&self, u: &DMatrix<C64>) -> Result<DensityMatrix> {
        if u.nrows() != self.dim() || u.ncols() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: u.nrows(),
            });
        }
        Ok(Self::from_raw(self.n_qubits, u * &self.m * u.adjoint()))
    }
}

/// Real eigenvalues of a Hermitian matrix.
pub(crate) fn hermitian_eigenvalues(m: &DMatrix<C64>) -> Vec<f64> {
    if m.nrows() == 2 {
        // closed form avoids the iterative solver on the hot path
        let a = m[(0, 0)].re;
        let d = m[(1, 1)].re;
        let b = m[(0, 1)];
        let mean = 0.5 * (a + d);
        let r = (0.25 * (a - d) * (a - d) + b.norm_sqr()).sqrt();
        return vec![mean + r, mean - r];
    }
    nalgebra::SymmetricEigen::new(m.clone())
        .eigenvalues
        .iter()
        .copied()
        .collect()
}

/// Reduced density matrix of `state` on the `keep` side of `part`.
pub fn partial_trace(state: &PureState, part: BipartitePartition, keep: Side) -> Result<DensityMatrix> {
    let m = state.as_bipartite_matrix(part)?;
    let reduced = match keep {
        Side::A => &m * m.adjoint(),
        // (ρ_B)_{jk} = Σ_i ψ_{ij} ψ*_{ik}
        Side::B => m.transpose() * m.map(|z| z.conj()),
    };
    let n = part.side_len(keep);
    Ok(DensityMatrix::from_raw(n, reduced))
}

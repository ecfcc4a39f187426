use serde::{Deserialize, Serialize};

use super::{DensityMatrix, PureState, C64};
use crate::error::{Error, Result};

/// Eigenvalues closer than this are grouped into one degenerate eigenspace.
pub const DEFAULT_DEGENERACY_TOL: f64 = 1e-9;

/// Eigenvalues below this count as zero when computing the Schmidt number.
pub const ZERO_EIGENVALUE_TOL: f64 = 1e-12;

/// Sorted eigenvalues of a density matrix with their degeneracy structure.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Spectrum {
    eigenvalues: Vec<f64>,
    multiplicities: Vec<usize>,
    schmidt_number: usize,
}

impl Spectrum {
    /// Sorts `values` descending, clamps them to `[0, 1]` and groups
    /// neighbours closer than `degeneracy_tol`.
    pub fn from_eigenvalues(values: &[f64], degeneracy_tol: f64) -> Result<Self> {
        if values.is_empty() || !values.len().is_power_of_two() {
            return Err(Error::InvalidParameter(format!(
                "spectrum length {} is not a power of two",
                values.len()
            )));
        }
        let mut eigenvalues: Vec<f64> = values.iter().map(|v| v.clamp(0.0, 1.0)).collect();
        eigenvalues.sort_by(|a, b| b.total_cmp(a));
        let total: f64 = eigenvalues.iter().sum();
        if (total - 1.0).abs() > 1e-10 {
            return Err(Error::InvalidParameter(format!(
                "eigenvalues sum to {total}, expected 1"
            )));
        }
        let mut multiplicities = vec![1usize];
        for w in eigenvalues.windows(2) {
            if w[0] - w[1] < degeneracy_tol {
                *multiplicities.last_mut().unwrap() += 1;
            } else {
                multiplicities.push(1);
            }
        }
        let schmidt_number = eigenvalues.iter().filter(|&&v| v >= ZERO_EIGENVALUE_TOL).count();
        Ok(Self {
            eigenvalues,
            multiplicities,
            schmidt_number,
        })
    }

    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    pub fn multiplicities(&self) -> &[usize] {
        &self.multiplicities
    }

    /// Number of nonzero eigenvalues.
    pub fn schmidt_number(&self) -> usize {
        self.schmidt_number
    }

    pub fn dim(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn n_qubits(&self) -> usize {
        self.dim().trailing_zeros() as usize
    }

    /// True when every eigenvalue lies in one group (the state is `I/d`).
    pub fn is_fully_degenerate(&self) -> bool {
        self.multiplicities.len() == 1
    }

    /// Index ranges of the degenerate groups within [`Self::eigenvalues`].
    pub fn groups(&self) -> Vec<std::ops::Range<usize>> {
        let mut start = 0;
        self.multiplicities
            .iter()
            .map(|&m| {
                let r = start..start + m;
                start += m;
                r
            })
            .collect()
    }

    /// Square roots of the eigenvalues, i.e. real Schmidt coefficients.
    pub fn schmidt_coefficients(&self) -> Vec<f64> {
        self.eigenvalues.iter().map(|v| v.sqrt()).collect()
    }
}

/// Largest deviation between two descending-sorted spectra; the shorter one
/// is padded with zeros.
pub fn spectrum_deviation(a: &[f64], b: &[f64]) -> f64 {
    let n = a.len().max(b.len());
    (0..n)
        .map(|i| (a.get(i).copied().unwrap_or(0.0) - b.get(i).copied().unwrap_or(0.0)).abs())
        .fold(0.0, f64::max)
}

/// Spectrum and an orthonormal eigenbasis, in the same (descending) order.
pub fn eigendecompose(rho: &DensityMatrix, degeneracy_tol: f64) -> Result<(Spectrum, Vec<PureState>)> {
    let eig = nalgebra::SymmetricEigen::new(rho.matrix().clone());
    let mut order: Vec<usize> = (0..rho.dim()).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[j].total_cmp(&eig.eigenvalues[i]));
    let values: Vec<f64> = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let spectrum = Spectrum::from_eigenvalues(&values, degeneracy_tol)?;
    let basis = order
        .iter()
        .map(|&i| {
            let col: Vec<C64> = eig.eigenvectors.column(i).iter().copied().collect();
            PureState::normalized(rho.n_qubits(), col)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok((spectrum, basis))
}

/// Entropy in bits, with `0 log 0 = 0`.
pub fn von_neumann_entropy(rho: &DensityMatrix) -> f64 {
    let s: f64 = rho
        .eigenvalues()
        .into_iter()
        .filter(|&l| l > 0.0)
        .map(|l| -l * l.log2())
        .sum();
    s.clamp(0.0, rho.n_qubits() as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qstate::{partial_trace, BipartitePartition, Side};
    use approx::assert_abs_diff_eq;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn maximally_mixed_qubit_is_one_group() {
        let (s, basis) = eigendecompose(&DensityMatrix::maximally_mixed(1), 1e-9).unwrap();
        assert_eq!(s.eigenvalues(), &[0.5, 0.5]);
        assert_eq!(s.multiplicities(), &[2]);
        assert_eq!(s.schmidt_number(), 2);
        assert_eq!(basis.len(), 2);
    }

    #[test]
    fn nondegenerate_diagonal() {
        let rho = DensityMatrix::diagonal(1, &[0.3, 0.7]).unwrap();
        let (s, _) = eigendecompose(&rho, 1e-9).unwrap();
        assert_abs_diff_eq!(s.eigenvalues()[0], 0.7, epsilon = 1e-15);
        assert_eq!(s.multiplicities(), &[1, 1]);
        assert_eq!(s.schmidt_number(), 2);
    }

    #[test]
    fn splitting_below_tolerance_stays_degenerate() {
        let rho = DensityMatrix::diagonal(1, &[0.5 + 2.5e-10, 0.5 - 2.5e-10]).unwrap();
        let (s, _) = eigendecompose(&rho, 1e-9).unwrap();
        assert_eq!(s.multiplicities(), &[2]);
        let (s, _) = eigendecompose(&rho, 1e-10).unwrap();
        assert_eq!(s.multiplicities(), &[1, 1]);
    }

    #[test]
    fn tiny_eigenvalues_do_not_count_toward_schmidt_number() {
        let s = Spectrum::from_eigenvalues(&[1.0 - 1e-13, 1e-13], 1e-9).unwrap();
        assert_eq!(s.schmidt_number(), 1);
    }

    #[test]
    fn eigendecomposition_reassembles() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let part = BipartitePartition::new(2, 2).unwrap();
        for _ in 0..10 {
            let rho = partial_trace(&PureState::random(4, &mut rng), part, Side::A).unwrap();
            let (s, basis) = eigendecompose(&rho, 1e-9).unwrap();
            let mut back = nalgebra::DMatrix::<C64>::zeros(rho.dim(), rho.dim());
            for (lam, v) in s.eigenvalues().iter().zip(&basis) {
                let col = nalgebra::DVector::from_column_slice(v.amplitudes());
                back += col.clone() * col.adjoint() * C64::new(*lam, 0.0);
            }
            assert!((back - rho.matrix()).norm() < 1e-9);
        }
    }

    #[test]
    fn entropy_values() {
        assert_abs_diff_eq!(von_neumann_entropy(&PureState::zero(2).density()), 0.0, epsilon = 1e-12);
        assert_abs_diff_eq!(
            von_neumann_entropy(&DensityMatrix::maximally_mixed(3)),
            3.0,
            epsilon = 1e-12
        );
        let rho = DensityMatrix::diagonal(2, &[0.5, 0.5, 0.0, 0.0]).unwrap();
        assert_abs_diff_eq!(von_neumann_entropy(&rho), 1.0, epsilon = 1e-12);
    }

    #[test]
    fn deviation_pads_with_zeros() {
        assert_abs_diff_eq!(spectrum_deviation(&[0.6, 0.4], &[0.6, 0.3, 0.1]), 0.1, epsilon = 1e-15);
    }
}

use super::{BipartitePartition, PureState, C64};
use crate::error::{Error, Result};

/// `|ψ⟩ = Σ_i c_i e^{iφ_i} |i_A⟩|i_B⟩` with `c_i ≥ 0` sorted descending.
///
/// Decomposing a state always yields zero phases (they are absorbed into
/// `basis_b`); explicit phases only arise from [`Self::from_coefficients`],
/// where the caller prescribes complex coefficients.
#[derive(Clone, Debug, PartialEq)]
pub struct SchmidtDecomposition {
    pub partition: BipartitePartition,
    pub coefficients: Vec<f64>,
    pub phases: Vec<f64>,
    pub basis_a: Vec<PureState>,
    pub basis_b: Vec<PureState>,
}

impl SchmidtDecomposition {
    /// Complex coefficients on computational-basis Schmidt vectors
    /// `|i⟩_A|i⟩_B`, sorted by descending magnitude.
    pub fn from_coefficients(coeffs: &[C64], partition: BipartitePartition) -> Result<Self> {
        let cap = partition.dim_a().min(partition.dim_b());
        if coeffs.len() > cap {
            return Err(Error::TooManyCoefficients {
                count: coeffs.len(),
                capacity: cap,
            });
        }
        let norm2: f64 = coeffs.iter().map(|c| c.norm_sqr()).sum();
        if (norm2 - 1.0).abs() > 1e-10 {
            return Err(Error::NotNormalized(norm2));
        }
        let mut order: Vec<usize> = (0..coeffs.len()).collect();
        order.sort_by(|&i, &j| coeffs[j].norm().total_cmp(&coeffs[i].norm()));
        Ok(Self {
            partition,
            coefficients: order.iter().map(|&i| coeffs[i].norm()).collect(),
            phases: order.iter().map(|&i| coeffs[i].arg()).collect(),
            basis_a: (0..coeffs.len()).map(|i| PureState::basis(partition.n_a, i)).collect(),
            basis_b: (0..coeffs.len()).map(|i| PureState::basis(partition.n_b, i)).collect(),
        })
    }

    /// `c_i e^{iφ_i}`
    pub fn complex_coefficients(&self) -> Vec<C64> {
        self.coefficients
            .iter()
            .zip(&self.phases)
            .map(|(&c, &p)| C64::from_polar(c, p))
            .collect()
    }

    /// `|c_i|²`, descending.
    pub fn eigenvalues(&self) -> Vec<f64> {
        self.coefficients.iter().map(|c| c * c).collect()
    }

    pub fn schmidt_number(&self) -> usize {
        self.eigenvalues()
            .iter()
            .filter(|&&l| l >= super::ZERO_EIGENVALUE_TOL)
            .count()
    }

    /// `Σ_i c_i e^{iφ_i} |i_A⟩ ⊗ |i_B⟩`
    pub fn reassemble(&self) -> PureState {
        let n = self.partition.n_qubits();
        let mut amps = vec![C64::new(0.0, 0.0); 1 << n];
        for ((c, a), b) in self.complex_coefficients().iter().zip(&self.basis_a).zip(&self.basis_b) {
            for (i, ai) in a.amplitudes().iter().enumerate() {
                for (j, bj) in b.amplitudes().iter().enumerate() {
                    amps[i * b.dim() + j] += c * ai * bj;
                }
            }
        }
        PureState::from_raw(n, amps)
    }
}

/// Schmidt decomposition via the SVD of the `2^n_a × 2^n_b` amplitude matrix.
pub fn schmidt_decompose(state: &PureState, part: BipartitePartition) -> Result<SchmidtDecomposition> {
    let m = state.as_bipartite_matrix(part)?;
    let svd = m.svd(true, true);
    let u = svd.u.expect("requested U");
    let v_t = svd.v_t.expect("requested V^T");
    let k = svd.singular_values.len();
    let mut order: Vec<usize> = (0..k).collect();
    order.sort_by(|&i, &j| svd.singular_values[j].total_cmp(&svd.singular_values[i]));

    let mut coefficients = Vec::with_capacity(k);
    let mut basis_a = Vec::with_capacity(k);
    let mut basis_b = Vec::with_capacity(k);
    for &i in &order {
        coefficients.push(svd.singular_values[i]);
        // ψ_{xy} = Σ_k U_{xk} σ_k (V†)_{ky}, so |k_B⟩ has amplitudes (V†)_{k·}
        let a: Vec<C64> = u.column(i).iter().copied().collect();
        let b: Vec<C64> = v_t.row(i).iter().copied().collect();
        basis_a.push(PureState::normalized(part.n_a, a)?);
        basis_b.push(PureState::normalized(part.n_b, b)?);
    }
    Ok(SchmidtDecomposition {
        partition: part,
        phases: vec![0.0; coefficients.len()],
        coefficients,
        basis_a,
        basis_b,
    })
}

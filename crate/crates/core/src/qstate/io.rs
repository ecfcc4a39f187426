//! JSON file formats for states and density matrices.

use std::path::Path;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use super::{DensityMatrix, PureState, C64};
use crate::error::{Error, Result};

/// `{"n_qubits": n, "amplitudes": [[re, im], ...]}`
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StateFile {
    pub n_qubits: usize,
    pub amplitudes: Vec<[f64; 2]>,
}

/// `{"n_qubits": n, "rows": [[[re, im], ...], ...]}`
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DensityFile {
    pub n_qubits: usize,
    pub rows: Vec<Vec<[f64; 2]>>,
}

impl From<&PureState> for StateFile {
    fn from(s: &PureState) -> Self {
        Self {
            n_qubits: s.n_qubits(),
            amplitudes: s.amplitudes().iter().map(|a| [a.re, a.im]).collect(),
        }
    }
}

impl StateFile {
    /// Inputs are renormalized when within `1e-6` of unit norm, so hand-written
    /// files with rounded amplitudes are accepted.
    pub fn into_state(self) -> Result<PureState> {
        let amps: Vec<C64> = self.amplitudes.iter().map(|&[re, im]| C64::new(re, im)).collect();
        let norm2: f64 = amps.iter().map(|a| a.norm_sqr()).sum();
        if (norm2 - 1.0).abs() > 1e-6 {
            return Err(Error::NotNormalized(norm2));
        }
        PureState::normalized(self.n_qubits, amps)
    }

    pub fn parse(text: &str) -> Result<PureState> {
        serde_json::from_str::<StateFile>(text)?.into_state()
    }

    pub fn read(path: &Path) -> Result<PureState> {
        Self::parse(&std::fs::read_to_string(path)?)
    }

    pub fn to_json(state: &PureState) -> String {
        serde_json::to_string(&StateFile::from(state)).expect("plain data serializes")
    }
}

impl From<&DensityMatrix> for DensityFile {
    fn from(rho: &DensityMatrix) -> Self {
        let m = rho.matrix();
        Self {
            n_qubits: rho.n_qubits(),
            rows: (0..m.nrows())
                .map(|i| (0..m.ncols()).map(|j| [m[(i, j)].re, m[(i, j)].im]).collect())
                .collect(),
        }
    }
}

impl DensityFile {
    pub fn into_density(self) -> Result<DensityMatrix> {
        let d = self.rows.len();
        if self.rows.iter().any(|r| r.len() != d) {
            return Err(Error::InvalidDensityMatrix("rows are not all of equal length".into()));
        }
        let m = DMatrix::from_fn(d, d, |i, j| C64::new(self.rows[i][j][0], self.rows[i][j][1]));
        // hand-written files carry decimal rounding
        DensityMatrix::with_tolerance(self.n_qubits, m, 1e-9)
    }

    pub fn parse(text: &str) -> Result<DensityMatrix> {
        serde_json::from_str::<DensityFile>(text)?.into_density()
    }

    pub fn read(path: &Path) -> Result<DensityMatrix> {
        Self::parse(&std::fs::read_to_string(path)?)
    }

    pub fn to_json(rho: &DensityMatrix) -> String {
        serde_json::to_string(&DensityFile::from(rho)).expect("plain data serializes")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn parses_bell_file() {
        let text =
            r#"{"n_qubits": 2, "amplitudes": [[0.7071067811865476, 0], [0, 0], [0, 0], [0.7071067811865476, 0]]}"#;
        let psi = StateFile::parse(text).unwrap();
        assert_eq!(psi.n_qubits(), 2);
    }

    #[test]
    fn truncated_json_is_a_parse_error() {
        let err = StateFile::parse(r#"{"n_qubits": 2, "amplitudes": [[1, 0], [0"#).unwrap_err();
        assert!(matches!(err, Error::Json(_)));
        assert!(err.to_string().contains("line 1"));
    }

    #[test]
    fn wrong_length_is_rejected() {
        let err = StateFile::parse(r#"{"n_qubits": 2, "amplitudes": [[1, 0], [0, 0]]}"#).unwrap_err();
        assert!(matches!(err, Error::DimensionMismatch { .. }));
    }

    #[test]
    fn density_file_round_trip() {
        let rho = DensityMatrix::diagonal(1, &[0.7, 0.3]).unwrap();
        let back = DensityFile::parse(&DensityFile::to_json(&rho)).unwrap();
        assert_eq!(back, rho);
        assert!(DensityFile::parse(r#"{"n_qubits": 1, "rows": [[[1,0],[0,0]],[[0,0]]]}"#).is_err());
    }

    proptest! {
        #[test]
        fn state_round_trip(seed in any::<u64>(), n in 1usize..5) {
            let psi = PureState::random(n, &mut ChaCha8Rng::seed_from_u64(seed));
            let back = StateFile::parse(&StateFile::to_json(&psi)).unwrap();
            for (a, b) in psi.amplitudes().iter().zip(back.amplitudes()) {
                prop_assert!((a - b).norm() < 1e-15);
            }
        }
    }
}

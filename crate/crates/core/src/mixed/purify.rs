use std::sync::OnceLock;

use nalgebra::DMatrix;
use rayon::prelude::*;

use super::{density_distance, reduce_leading, SpectrumTarget};
use crate::error::{Error, Result};
use crate::gates::GateSet;
use crate::oracle::{Complexity, ComplexityTable, Embedded, NeighborIndex, OracleParams};
use crate::qstate::{hermitian_eigenvalues, DensityMatrix, PureState, Spectrum, C64};

/// Smallest register that purifies a rank-`rank` density matrix.
pub fn ancilla_qubits(rank: usize) -> usize {
    if rank <= 1 {
        0
    } else {
        (usize::BITS - (rank - 1).leading_zeros()) as usize
    }
}

/// Best result of a maximization over an explored table.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct CMax {
    /// Exact only when the table is saturated (or the spectrum pins the
    /// density matrix down uniquely).
    pub value: Complexity,
    /// Largest value seen when the table is not saturated.
    pub lower_bound: Option<u32>,
}

struct ReductionIndex {
    reductions: Vec<DMatrix<C64>>,
    spectra: Vec<Vec<f64>>,
    /// Entries sorted by leading eigenvalue.
    by_leading: Vec<(f64, u32)>,
    tree: NeighborIndex<Embedded>,
}

/// BFS table on `system ⊗ ancilla` from `|0…0⟩`, queried through the
/// reductions onto the leading `n_sys` qubits.
pub struct PurificationTable {
    table: ComplexityTable,
    n_sys: usize,
    index: OnceLock<ReductionIndex>,
    depths: OnceLock<Vec<u32>>,
}

impl PurificationTable {
    pub fn new(n_sys: usize, n_anc: usize, gs: &GateSet, params: OracleParams) -> Result<Self> {
        let table = ComplexityTable::new(PureState::zero(n_sys + n_anc), gs.clone(), params)?;
        Self::from_table(table, n_sys)
    }

    /// Wraps an existing table; its reference must be `|0…0⟩`.
    pub fn from_table(table: ComplexityTable, n_sys: usize) -> Result<Self> {
        if n_sys == 0 || n_sys > table.n_qubits() {
            return Err(Error::InvalidPartition(format!(
                "{n_sys} system qubits in a {}-qubit table",
                table.n_qubits()
            )));
        }
        Ok(Self {
            table,
            n_sys,
            index: OnceLock::new(),
            depths: OnceLock::new(),
        })
    }

    pub fn table(&self) -> &ComplexityTable {
        &self.table
    }

    pub fn n_sys(&self) -> usize {
        self.n_sys
    }

    pub fn n_ancilla(&self) -> usize {
        self.table.n_qubits() - self.n_sys
    }

    /// Builds every level up to the budget.
    pub fn complete(&mut self) {
        let budget = self.table.params().budget;
        if !self.table.is_complete() {
            self.table.grow_to(budget);
            self.index = OnceLock::new();
            self.depths = OnceLock::new();
        }
    }

    fn tolerance(&self) -> f64 {
        self.table.params().density_tolerance()
    }

    /// System reduction of entry `i`.
    pub fn reduction(&self, i: usize) -> DensityMatrix {
        DensityMatrix::from_raw(self.n_sys, self.reduction_index().reductions[i].clone())
    }

    /// Sorted eigenvalues of the system reduction of entry `i`.
    pub fn reduced_spectrum(&self, i: usize) -> &[f64] {
        &self.reduction_index().spectra[i]
    }

    fn reduction_index(&self) -> &ReductionIndex {
        self.index.get_or_init(|| {
            let n_total = self.table.n_qubits();
            let reductions: Vec<DMatrix<C64>> = (0..self.table.len())
                .into_par_iter()
                .map(|i| reduce_leading(self.table.amplitudes(i), self.n_sys, n_total))
                .collect();
            let spectra: Vec<Vec<f64>> = reductions
                .par_iter()
                .map(|m| {
                    let mut e = hermitian_eigenvalues(m);
                    e.sort_by(|a, b| b.total_cmp(a));
                    e
                })
                .collect();
            let mut by_leading: Vec<(f64, u32)> = spectra.iter().enumerate().map(|(i, s)| (s[0], i as u32)).collect();
            by_leading.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
            let points: Vec<Embedded> = reductions.iter().map(Embedded::new).collect();
            ReductionIndex {
                tree: NeighborIndex::new(&points),
                reductions,
                spectra,
                by_leading,
            }
        })
    }

    /// Frobenius radius guaranteed to contain every density matrix within
    /// trace distance `δ`.
    fn search_radius(&self) -> f64 {
        let delta = self.tolerance();
        if self.n_sys == 1 {
            // traceless 2×2 differences have ‖Δ‖_F = √2·TD exactly
            std::f64::consts::SQRT_2 * delta
        } else {
            2.0 * delta
        }
    }

    fn indexed_min(&self, rho: &DMatrix<C64>) -> Option<usize> {
        let idx = self.reduction_index();
        let delta = self.tolerance();
        idx.tree
            .within(&Embedded::new(rho), self.search_radius())
            .into_iter()
            .find(|&j| density_distance(&idx.reductions[j], rho) <= delta)
    }

    /// Purification complexity of every entry's own reduction.
    pub fn entry_complexities(&self) -> &[u32] {
        self.depths.get_or_init(|| {
            let idx = self.reduction_index();
            (0..self.table.len())
                .into_par_iter()
                .map(|i| {
                    let j = self.indexed_min(&idx.reductions[i]).unwrap_or(i);
                    self.table.depth(j)
                })
                .collect()
        })
    }

    /// Minimal depth of a state whose system reduction is within trace
    /// distance `√ε` of `rho`.
    pub fn complexity(&mut self, rho: &DensityMatrix) -> Result<Complexity> {
        if rho.n_qubits() != self.n_sys {
            return Err(Error::DimensionMismatch {
                expected: 1 << self.n_sys,
                found: rho.dim(),
            });
        }
        if self.table.is_complete() {
            return Ok(self.table.complexity_of_hit(self.indexed_min(rho.matrix())));
        }
        let (n_sys, n_total, delta) = (self.n_sys, self.table.n_qubits(), self.tolerance());
        let target = rho.matrix();
        let hit = self
            .table
            .search(|a| density_distance(&reduce_leading(a, n_sys, n_total), target) <= delta);
        if self.table.is_complete() {
            self.index = OnceLock::new();
            self.depths = OnceLock::new();
        }
        Ok(self.table.complexity_of_hit(hit))
    }

    /// Read-only variant of [`Self::complexity`] for complete tables.
    pub fn lookup(&self, rho: &DensityMatrix) -> Result<Complexity> {
        if rho.n_qubits() != self.n_sys {
            return Err(Error::DimensionMismatch {
                expected: 1 << self.n_sys,
                found: rho.dim(),
            });
        }
        if !self.table.is_complete() {
            return Err(Error::InvalidParameter("table is still growing".into()));
        }
        Ok(self.table.complexity_of_hit(self.indexed_min(rho.matrix())))
    }

    /// Entries whose reduction has spectrum `spec` within `tol`, ascending.
    pub fn pool(&self, spec: &Spectrum, tol: f64) -> Vec<usize> {
        let mut out: Vec<usize> = self.pool_iter(spec, tol).collect();
        out.sort_unstable();
        out
    }

    fn pool_iter<'a>(&'a self, spec: &Spectrum, tol: f64) -> impl Iterator<Item = usize> + 'a {
        let idx = self.reduction_index();
        let target = SpectrumTarget::new(spec);
        let lead = target.leading();
        let start = idx.by_leading.partition_point(|&(l, _)| l < lead - tol);
        idx.by_leading[start..]
            .iter()
            .take_while(move |&&(l, _)| l <= lead + tol)
            .map(|&(_, i)| i as usize)
            .filter(move |&i| target.matches(&idx.spectra[i], tol))
    }

    /// Maximum purification complexity over the same-spectrum reductions in
    /// the table, completing it first. `spec` must live on the system
    /// register.
    pub fn c_max(&mut self, spec: &Spectrum) -> Result<CMax> {
        self.check_spectrum(spec)?;
        if spec.is_fully_degenerate() {
            // I/d is the only density matrix with this spectrum
            let value = self.complexity(&DensityMatrix::maximally_mixed(self.n_sys))?;
            return Ok(CMax {
                value,
                lower_bound: None,
            });
        }
        self.complete();
        self.c_max_built(spec)
    }

    /// As [`Self::c_max`] on a table that is already complete.
    pub fn c_max_built(&self, spec: &Spectrum) -> Result<CMax> {
        self.check_spectrum(spec)?;
        if spec.is_fully_degenerate() {
            return Ok(CMax {
                value: self.lookup(&DensityMatrix::maximally_mixed(self.n_sys))?,
                lower_bound: None,
            });
        }
        if !self.table.is_complete() {
            return Err(Error::InvalidParameter("table is still growing".into()));
        }
        let pool: Vec<usize> = self.pool_iter(spec, self.table.params().epsilon).collect();
        let best = match self.depths.get() {
            Some(depths) => pool.iter().map(|&i| depths[i]).max(),
            None => {
                let idx = self.reduction_index();
                pool.par_iter()
                    .map(|&i| self.table.depth(self.indexed_min(&idx.reductions[i]).unwrap_or(i)))
                    .max()
            }
        };
        Ok(if self.table.is_saturated() {
            CMax {
                value: best.map_or(Complexity::Unreachable, Complexity::Exact),
                lower_bound: None,
            }
        } else {
            CMax {
                value: Complexity::ExceedsBudget(self.table.complete_depth()),
                lower_bound: best,
            }
        })
    }

    fn check_spectrum(&self, spec: &Spectrum) -> Result<()> {
        if spec.n_qubits() != self.n_sys {
            return Err(Error::DimensionMismatch {
                expected: 1 << self.n_sys,
                found: spec.dim(),
            });
        }
        Ok(())
    }
}

/// Purification complexity with `⌈log₂ rank⌉` ancilla qubits.
pub fn purification_complexity(rho: &DensityMatrix, gs: &GateSet, params: OracleParams) -> Result<Complexity> {
    let spec = super::spectrum_of(rho)?;
    let mut pt = PurificationTable::new(rho.n_qubits(), ancilla_qubits(spec.schmidt_number()), gs, params)?;
    pt.complexity(rho)
}

/// Largest purification complexity among density matrices with spectrum
/// `spec`, from the saturated purification table.
pub fn c_max_fixed_spectrum(spec: &Spectrum, gs: &GateSet, params: OracleParams) -> Result<CMax> {
    let mut pt = PurificationTable::new(spec.n_qubits(), ancilla_qubits(spec.schmidt_number()), gs, params)?;
    pt.c_max(spec)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ancilla_counts() {
        assert_eq!(ancilla_qubits(1), 0);
        assert_eq!(ancilla_qubits(2), 1);
        assert_eq!(ancilla_qubits(3), 2);
        assert_eq!(ancilla_qubits(4), 2);
        assert_eq!(ancilla_qubits(5), 3);
    }

    #[test]
    fn pure_reference_costs_nothing() {
        let rho = PureState::zero(1).density();
        let c = purification_complexity(&rho, &GateSet::standard(), OracleParams::default()).unwrap();
        assert_eq!(c, Complexity::Exact(0));
    }

    #[test]
    fn maximally_mixed_qubit_costs_two() {
        let rho = DensityMatrix::maximally_mixed(1);
        let c = purification_complexity(&rho, &GateSet::standard(), OracleParams::default()).unwrap();
        assert_eq!(c, Complexity::Exact(2));
        let spec = Spectrum::from_eigenvalues(&[0.5, 0.5], 1e-9).unwrap();
        let m = c_max_fixed_spectrum(&spec, &GateSet::standard(), OracleParams::default()).unwrap();
        assert_eq!(m.value, Complexity::Exact(2));
    }

    #[test]
    fn indexed_and_lazy_queries_agree() {
        let gs = GateSet::standard();
        let params = OracleParams::new(0.045, 0.3, 64);
        let mut lazy = PurificationTable::new(1, 1, &gs, params).unwrap();
        let mut full = PurificationTable::new(1, 1, &gs, params).unwrap();
        full.complete();
        assert!(full.table().is_saturated());
        for i in (0..full.table().len()).step_by(97) {
            let rho = full.reduction(i);
            assert_eq!(lazy.complexity(&rho).unwrap(), full.lookup(&rho).unwrap());
        }
    }
}

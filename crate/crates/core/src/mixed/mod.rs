//! Mixed-state and subsystem complexity measures built on the pure-state
//! oracle.

mod purify;

use std::collections::HashSet;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gates::{gate_count, spectrum_circuit, GateSet};
use crate::oracle::{Complexity, ComplexityDiff, ComplexityTable, Growth, OracleParams};
use crate::qstate::{
    hermitian_eigenvalues, inner_raw, spectrum_deviation, BipartitePartition, DensityMatrix, PureState,
    SchmidtDecomposition, Side, Spectrum, C64, DEFAULT_DEGENERACY_TOL, ZERO_EIGENVALUE_TOL,
};

pub use purify::{ancilla_qubits, c_max_fixed_spectrum, purification_complexity, CMax, PurificationTable};

/// Most label assignments the modified-reference search will try.
pub const MAX_REFERENCE_CANDIDATES: usize = 100_000;

/// Orthonormality tolerance for basis averages.
pub const ORTHONORMAL_TOL: f64 = 1e-10;

/// Reduction of raw amplitudes onto the leading `n_keep` of `n_total` qubits.
pub(crate) fn reduce_leading(amps: &[C64], n_keep: usize, n_total: usize) -> DMatrix<C64> {
    let d = 1usize << n_keep;
    let r = 1usize << (n_total - n_keep);
    DMatrix::from_fn(d, d, |i, j| {
        let (a, b) = (&amps[i * r..(i + 1) * r], &amps[j * r..(j + 1) * r]);
        a.iter().zip(b).map(|(x, y)| x * y.conj()).sum()
    })
}

/// Reduction of raw amplitudes onto one side of `part`.
pub(crate) fn reduce_side(amps: &[C64], part: BipartitePartition, keep: Side) -> DMatrix<C64> {
    match keep {
        Side::A => reduce_leading(amps, part.n_a, part.n_qubits()),
        Side::B => {
            let (da, db) = (part.dim_a(), part.dim_b());
            DMatrix::from_fn(db, db, |i, j| {
                (0..da).map(|k| amps[k * db + i] * amps[k * db + j].conj()).sum()
            })
        }
    }
}

/// Trace distance between two density matrices of equal size.
pub(crate) fn density_distance(a: &DMatrix<C64>, b: &DMatrix<C64>) -> f64 {
    let diff = a - b;
    let sum = if diff.nrows() == 2 {
        let t = 0.5 * (diff[(0, 0)].re + diff[(1, 1)].re);
        let h = 0.5 * (diff[(0, 0)].re - diff[(1, 1)].re);
        let r = (h * h + diff[(0, 1)].norm_sqr()).sqrt();
        (t + r).abs() + (t - r).abs()
    } else {
        hermitian_eigenvalues(&diff).iter().map(|l| l.abs()).sum()
    };
    0.5 * sum
}

/// Spectrum with each degenerate group replaced by its mean, so splitting
/// within a group below the tolerance still matches.
pub(crate) struct SpectrumTarget(Vec<f64>);

impl SpectrumTarget {
    pub(crate) fn new(spec: &Spectrum) -> Self {
        let e = spec.eigenvalues();
        let mut out = vec![0.0; e.len()];
        for g in spec.groups() {
            let mean = e[g.clone()].iter().sum::<f64>() / g.len() as f64;
            out[g].iter_mut().for_each(|x| *x = mean);
        }
        Self(out)
    }

    pub(crate) fn leading(&self) -> f64 {
        self.0[0]
    }

    /// `eigs` sorted descending.
    pub(crate) fn matches(&self, eigs: &[f64], tol: f64) -> bool {
        eigs.len() == self.0.len() && eigs.iter().zip(&self.0).all(|(a, b)| (a - b).abs() <= tol)
    }
}

pub(crate) fn spectrum_of(rho: &DensityMatrix) -> Result<Spectrum> {
    Spectrum::from_eigenvalues(&rho.eigenvalues(), DEFAULT_DEGENERACY_TOL)
}

pub(crate) fn sorted_eigenvalues(m: &DMatrix<C64>) -> Vec<f64> {
    let mut e = hermitian_eigenvalues(m);
    e.sort_by(|a, b| b.total_cmp(a));
    e
}

/// Smallest register split that can hold `rho` on `A` with a purifying `B`.
pub fn report_partition(rho: &DensityMatrix, spec: &Spectrum) -> BipartitePartition {
    BipartitePartition::new(rho.n_qubits(), ancilla_qubits(spec.schmidt_number()).max(1)).expect("both sides non-empty")
}

/// Fewest gates preparing, from `|0…0⟩`, a state whose `A` reduction has
/// spectrum `spec` (within ε).
pub fn spectrum_complexity(
    spec: &Spectrum,
    part: BipartitePartition,
    gs: &GateSet,
    params: OracleParams,
) -> Result<Complexity> {
    let mut table = ComplexityTable::new(PureState::zero(part.n_qubits()), gs.clone(), params)?;
    spectrum_complexity_in(spec, part, &mut table)
}

/// As [`spectrum_complexity`] over an existing table from `|0…0⟩`.
pub fn spectrum_complexity_in(
    spec: &Spectrum,
    part: BipartitePartition,
    table: &mut ComplexityTable,
) -> Result<Complexity> {
    check_spectrum_fits(spec, part, table)?;
    let eps = table.params().epsilon;
    let target = SpectrumTarget::new(spec);
    let hit = table.search(|a| target.matches(&sorted_eigenvalues(&reduce_side(a, part, Side::A)), eps));
    Ok(table.complexity_of_hit(hit))
}

/// As [`spectrum_complexity_in`] over the levels already present.
pub fn spectrum_complexity_built(
    spec: &Spectrum,
    part: BipartitePartition,
    table: &ComplexityTable,
) -> Result<Complexity> {
    check_spectrum_fits(spec, part, table)?;
    let eps = table.params().epsilon;
    let target = SpectrumTarget::new(spec);
    let hit = table.search_built(|a| target.matches(&sorted_eigenvalues(&reduce_side(a, part, Side::A)), eps));
    Ok(table.complexity_of_hit(hit))
}

fn check_spectrum_fits(spec: &Spectrum, part: BipartitePartition, table: &ComplexityTable) -> Result<()> {
    part.check(table.n_qubits())?;
    if spec.n_qubits() != part.n_a {
        return Err(Error::DimensionMismatch {
            expected: part.dim_a(),
            found: spec.dim(),
        });
    }
    if spec.schmidt_number() > part.dim_b() {
        return Err(Error::TooManyCoefficients {
            count: spec.schmidt_number(),
            capacity: part.dim_b(),
        });
    }
    Ok(())
}

/// Real Schmidt coefficients of the nonzero part of `spec`, renormalized.
pub(crate) fn leading_coefficients(spec: &Spectrum) -> Vec<C64> {
    let c: Vec<f64> = spec
        .schmidt_coefficients()
        .into_iter()
        .take(spec.schmidt_number())
        .collect();
    let norm = c.iter().map(|x| x * x).sum::<f64>().sqrt();
    c.into_iter().map(|x| C64::new(x / norm, 0.0)).collect()
}

/// Gate count of the explicit spectrum-loading circuit, an upper bound on
/// [`spectrum_complexity`] up to the ε slack.
pub fn spectrum_circuit_gates(spec: &Spectrum, part: BipartitePartition, gs: &GateSet) -> Result<usize> {
    Ok(gate_count(&spectrum_circuit(&leading_coefficients(spec), part, gs)?))
}

/// Reference state with the prescribed Schmidt coefficients on
/// computational-basis labels, plus the label assignment that produced it.
#[derive(Clone, Debug)]
pub struct ModifiedReference {
    pub state: PureState,
    pub complexity: Complexity,
    pub labels_a: Vec<usize>,
    pub labels_b: Vec<usize>,
}

/// Injective maps `0..k → 0..d` in lexicographic order.
fn injections(k: usize, d: usize) -> Vec<Vec<usize>> {
    fn go(k: usize, d: usize, cur: &mut Vec<usize>, used: &mut [bool], out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for x in 0..d {
            if !used[x] {
                used[x] = true;
                cur.push(x);
                go(k, d, cur, used, out);
                cur.pop();
                used[x] = false;
            }
        }
    }
    let mut out = Vec::new();
    go(k, d, &mut Vec::with_capacity(k), &mut vec![false; d], &mut out);
    out
}

fn injection_count(k: usize, d: usize) -> usize {
    (d - k + 1..=d).fold(1usize, |acc, x| acc.saturating_mul(x))
}

/// Searches every assignment of computational-basis labels to the Schmidt
/// terms of `sd` and keeps the cheapest state from `|0…0⟩`. Ties go to the
/// lexicographically first assignment.
pub fn modified_reference_state(
    sd: &SchmidtDecomposition,
    gs: &GateSet,
    params: OracleParams,
) -> Result<ModifiedReference> {
    let mut table = ComplexityTable::new(PureState::zero(sd.partition.n_qubits()), gs.clone(), params)?;
    modified_reference_in(sd, &mut table)
}

/// As [`modified_reference_state`] over an existing table from `|0…0⟩`,
/// growing it as needed.
pub fn modified_reference_in(sd: &SchmidtDecomposition, table: &mut ComplexityTable) -> Result<ModifiedReference> {
    sd.partition.check(table.n_qubits())?;
    let cands = ReferenceCandidates::new(sd)?;
    let eps = table.params().epsilon;
    let hit = table.search(|a| cands.any_accepts(a, eps));
    Ok(cands.choose(table, hit))
}

/// As [`modified_reference_in`] over the levels already present.
pub fn modified_reference_built(sd: &SchmidtDecomposition, table: &ComplexityTable) -> Result<ModifiedReference> {
    sd.partition.check(table.n_qubits())?;
    let cands = ReferenceCandidates::new(sd)?;
    let eps = table.params().epsilon;
    let hit = table.search_built(|a| cands.any_accepts(a, eps));
    Ok(cands.choose(table, hit))
}

struct ReferenceCandidates {
    part: BipartitePartition,
    maps_a: Vec<Vec<usize>>,
    maps_b: Vec<Vec<usize>>,
    /// Distinct states in enumeration order, with the maps that built them.
    states: Vec<(Vec<C64>, usize, usize)>,
}

impl ReferenceCandidates {
    fn new(sd: &SchmidtDecomposition) -> Result<Self> {
        let part = sd.partition;
        let coeffs: Vec<C64> = sd
            .complex_coefficients()
            .into_iter()
            .filter(|c| c.norm_sqr() >= ZERO_EIGENVALUE_TOL)
            .collect();
        let k = coeffs.len();
        let (da, db) = (part.dim_a(), part.dim_b());
        if k > da.min(db) {
            return Err(Error::TooManyCoefficients {
                count: k,
                capacity: da.min(db),
            });
        }
        let total = injection_count(k, da).saturating_mul(injection_count(k, db));
        if total > MAX_REFERENCE_CANDIDATES {
            return Err(Error::ResourceCap(total));
        }
        let (maps_a, maps_b) = (injections(k, da), injections(k, db));
        let norm = coeffs.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        let mut seen = HashSet::new();
        let mut states = Vec::new();
        for (ia, pa) in maps_a.iter().enumerate() {
            for (ib, pb) in maps_b.iter().enumerate() {
                let mut terms: Vec<(usize, u64, u64)> = (0..k)
                    .map(|i| (pa[i] * db + pb[i], coeffs[i].re.to_bits(), coeffs[i].im.to_bits()))
                    .collect();
                terms.sort_unstable();
                if !seen.insert(terms) {
                    continue;
                }
                let mut amps = vec![C64::new(0.0, 0.0); da * db];
                for i in 0..k {
                    amps[pa[i] * db + pb[i]] = coeffs[i] / norm;
                }
                states.push((amps, ia, ib));
            }
        }
        Ok(Self {
            part,
            maps_a,
            maps_b,
            states,
        })
    }

    fn any_accepts(&self, a: &[C64], eps: f64) -> bool {
        self.states
            .iter()
            .any(|(t, _, _)| inner_raw(a, t).norm_sqr() >= 1.0 - eps)
    }

    /// First candidate matched at the hit's depth; the identity assignment
    /// when nothing matched.
    fn choose(self, table: &ComplexityTable, hit: Option<usize>) -> ModifiedReference {
        let eps = table.params().epsilon;
        let complexity = table.complexity_of_hit(hit);
        let chosen = match hit {
            Some(h) => {
                let level = table.level_range(table.depth(h));
                self.states
                    .iter()
                    .find(|(t, _, _)| {
                        level
                            .clone()
                            .any(|i| inner_raw(table.amplitudes(i), t).norm_sqr() >= 1.0 - eps)
                    })
                    .expect("the hit matches some candidate")
            }
            None => &self.states[0],
        };
        let (amps, ia, ib) = chosen;
        ModifiedReference {
            state: PureState::from_raw(self.part.n_qubits(), amps.clone()),
            complexity,
            labels_a: self.maps_a[*ia].clone(),
            labels_b: self.maps_b[*ib].clone(),
        }
    }
}

/// Fewest gates acting only on `side` that carry the modified reference of
/// `sd_reference` to a state whose `side` reduction is within trace distance
/// `√ε` of `rho_target`.
pub fn basis_complexity(
    rho_target: &DensityMatrix,
    sd_reference: &SchmidtDecomposition,
    side: Side,
    gs: &GateSet,
    params: OracleParams,
) -> Result<Complexity> {
    let mref = modified_reference_state(sd_reference, gs, params)?;
    basis_complexity_from(rho_target, &mref.state, sd_reference.partition, side, gs, params)
}

/// As [`basis_complexity`] from an explicit starting state.
pub fn basis_complexity_from(
    rho_target: &DensityMatrix,
    reference: &PureState,
    part: BipartitePartition,
    side: Side,
    gs: &GateSet,
    params: OracleParams,
) -> Result<Complexity> {
    part.check(reference.n_qubits())?;
    if rho_target.n_qubits() != part.side_len(side) {
        return Err(Error::DimensionMismatch {
            expected: 1 << part.side_len(side),
            found: rho_target.dim(),
        });
    }
    let start = sorted_eigenvalues(&reduce_side(reference.amplitudes(), part, side));
    let target = sorted_eigenvalues(rho_target.matrix());
    let dev = spectrum_deviation(&start, &target);
    if dev > params.epsilon {
        return Err(Error::SpectrumMismatch(dev));
    }
    let support: Vec<usize> = part.side_qubits(side).collect();
    let mut table = ComplexityTable::on_support(reference.clone(), gs.clone(), params, &support)?;
    let delta = params.density_tolerance();
    let goal = rho_target.matrix();
    let hit = table.search(|a| density_distance(&reduce_side(a, part, side), goal) <= delta);
    Ok(table.complexity_of_hit(hit))
}

/// `C_max(spectrum(ρ)) − C(ρ)`; undefined unless both are exact.
pub fn uncomplexity(rho: &DensityMatrix, gs: &GateSet, params: OracleParams) -> Result<ComplexityDiff> {
    let spec = spectrum_of(rho)?;
    let mut pt = PurificationTable::new(rho.n_qubits(), ancilla_qubits(spec.schmidt_number()), gs, params)?;
    let c = pt.complexity(rho)?;
    let m = pt.c_max(&spec)?;
    Ok(m.value.minus(c))
}

/// Per-state complexities of a basis and their mean.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AverageComplexity {
    pub values: Vec<Complexity>,
    /// Present when every value is exact.
    pub mean: Option<f64>,
}

/// Mean state complexity over an orthonormal set, divided by the set's size.
pub fn average_basis_complexity(basis: &[PureState], table: &mut ComplexityTable) -> Result<AverageComplexity> {
    if basis.is_empty() {
        return Err(Error::InvalidParameter("empty basis".into()));
    }
    for (i, a) in basis.iter().enumerate() {
        for b in &basis[i..] {
            let expect = if std::ptr::eq(a, b) { 1.0 } else { 0.0 };
            let ip = a.inner(b)?;
            if (ip - C64::new(expect, 0.0)).norm() > ORTHONORMAL_TOL {
                return Err(Error::InvalidParameter("basis is not orthonormal".into()));
            }
        }
    }
    let values = basis.iter().map(|s| table.complexity(s)).collect::<Result<Vec<_>>>()?;
    let mean = values
        .iter()
        .map(|c| c.value().map(f64::from))
        .sum::<Option<f64>>()
        .map(|s| s / basis.len() as f64);
    Ok(AverageComplexity { values, mean })
}

/// Oracle settings embedded in every report.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReportParameters {
    pub gate_set: String,
    pub gate_set_hash: String,
    pub epsilon: f64,
    pub grid: f64,
    pub budget: u32,
}

impl ReportParameters {
    pub fn new(gs: &GateSet, params: &OracleParams) -> Self {
        Self {
            gate_set: gs.name.clone(),
            gate_set_hash: gs.hash_hex(),
            epsilon: params.epsilon,
            grid: params.grid,
            budget: params.budget,
        }
    }
}

/// Results of checking the report's two inequalities; `None` when a side is
/// not exact.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReportChecks {
    pub purification_le_spectrum_plus_basis: Option<bool>,
    pub purification_le_c_max: Option<bool>,
}

/// Every mixed-state measure of one density matrix.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MixedComplexityReport {
    pub n_qubits: usize,
    pub spectrum: Vec<f64>,
    pub ancilla_qubits: usize,
    pub partition: [usize; 2],
    pub c_purification: Complexity,
    pub c_spectrum: Complexity,
    pub c_basis: Complexity,
    pub c_max_fixed_spectrum: Complexity,
    /// Largest value seen when the purification table is not saturated.
    pub c_max_lower_bound: Option<u32>,
    pub uncomplexity: ComplexityDiff,
    /// Gates in the explicit spectrum-loading circuit.
    pub spectrum_circuit_gates: usize,
    pub checks: ReportChecks,
    /// Some table stopped at the entry cap, so its values are bounds only.
    pub capped: bool,
    pub parameters: ReportParameters,
}

/// Computes every measure for `rho`. Spectrum and basis complexity use the
/// split `rho ⊗ B` with `B` just large enough to purify `rho`.
pub fn mixed_report(rho: &DensityMatrix, gs: &GateSet, params: OracleParams) -> Result<MixedComplexityReport> {
    params.validate()?;
    let spec = spectrum_of(rho)?;
    let n_anc = ancilla_qubits(spec.schmidt_number());
    let mut pt = PurificationTable::new(rho.n_qubits(), n_anc, gs, params)?;
    let c_purification = pt.complexity(rho)?;
    let c_max = pt.c_max(&spec)?;

    let part = report_partition(rho, &spec);
    let mut full = ComplexityTable::new(PureState::zero(part.n_qubits()), gs.clone(), params)?;
    let c_spectrum = spectrum_complexity_in(&spec, part, &mut full)?;
    let sd = SchmidtDecomposition::from_coefficients(&leading_coefficients(&spec), part)?;
    let mref = modified_reference_in(&sd, &mut full)?;
    let c_basis = basis_complexity_from(rho, &mref.state, part, Side::A, gs, params)?;

    let sum = match (c_spectrum, c_basis) {
        (Complexity::Exact(s), Complexity::Exact(b)) => Some(s + b),
        _ => None,
    };
    let checks = ReportChecks {
        purification_le_spectrum_plus_basis: c_purification.value().zip(sum).map(|(c, s)| c <= s),
        purification_le_c_max: c_purification.value().zip(c_max.value.value()).map(|(c, m)| c <= m),
    };
    Ok(MixedComplexityReport {
        n_qubits: rho.n_qubits(),
        spectrum: spec.eigenvalues().to_vec(),
        ancilla_qubits: n_anc,
        partition: [part.n_a, part.n_b],
        c_purification,
        c_spectrum,
        c_basis,
        c_max_fixed_spectrum: c_max.value,
        c_max_lower_bound: c_max.lower_bound,
        uncomplexity: c_max.value.minus(c_purification),
        spectrum_circuit_gates: spectrum_circuit_gates(&spec, part, gs)?,
        checks,
        capped: pt.table().growth() == Growth::Capped || full.growth() == Growth::Capped,
        parameters: ReportParameters::new(gs, &params),
    })
}

use std::collections::BTreeMap;

use rand::seq::SliceRandom;
use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde_json::{json, Value};

use super::{
    check_superadditivity, circuit_basis, random_circuit, ExperimentReport, HarnessConfig, Lab, Record, Verdict,
};
use crate::error::{Error, Result};
use crate::gates::{apply_circuit, bell_pair_circuit, Circuit};
use crate::mixed::{
    basis_complexity_from, leading_coefficients, modified_reference_built, report_partition, sorted_eigenvalues,
    spectrum_complexity_built, spectrum_of, PurificationTable,
};
use crate::oracle::{Complexity, ComplexityTable};
use crate::qstate::{
    eigendecompose, partial_trace, schmidt_decompose, BipartitePartition, DensityMatrix, PureState,
    SchmidtDecomposition, Side, C64, DEFAULT_DEGENERACY_TOL,
};

/// Names accepted by [`run_experiment`].
pub const EXPERIMENTS: [&str; 8] = [
    "case1",
    "case1a",
    "case2",
    "case3",
    "case4",
    "superposition",
    "degeneracy",
    "superadditivity-sweep",
];

pub fn run_experiment(name: &str, cfg: &HarnessConfig) -> Result<ExperimentReport> {
    match name {
        "case1" => case1_unentangled(cfg),
        "case1a" => case1a_low_schmidt(cfg),
        "case2" => case2_maximally_entangled(cfg),
        "case3" => case3_nondegenerate(cfg),
        "case4" => case4_avg_basis_bounds(cfg),
        "superposition" => superposition_property(cfg),
        "degeneracy" => degeneracy_separation(cfg),
        "superadditivity-sweep" => superadditivity_sweep(cfg),
        other => Err(Error::InvalidParameter(format!(
            "unknown experiment `{other}`; expected one of {}",
            EXPERIMENTS.join(", ")
        ))),
    }
}

fn one_one() -> BipartitePartition {
    BipartitePartition::new(1, 1).expect("non-empty sides")
}

fn two_two() -> BipartitePartition {
    BipartitePartition::new(2, 2).expect("non-empty sides")
}

fn exact_sum(cs: &[Complexity]) -> Option<u32> {
    cs.iter().map(|c| c.value()).sum()
}

fn eigen_gap(eigs: &[f64]) -> f64 {
    eigs.windows(2).map(|w| w[0] - w[1]).fold(f64::INFINITY, f64::min)
}

fn circuit_text(circuit: &Circuit) -> String {
    circuit.to_text()
}

/// Uniformly drawn indices into `0..n`, in draw order.
fn draws<R: Rng>(rng: &mut R, n: usize, count: usize) -> Vec<usize> {
    (0..count).map(|_| rng.gen_range(0..n)).collect()
}

/// Product states of two single-qubit tables against the two-qubit table.
pub fn case1_unentangled(cfg: &HarnessConfig) -> Result<ExperimentReport> {
    cfg.install(|| {
        let part = one_one();
        let mut lab = Lab::new(cfg.gate_set.clone(), cfg.params);
        lab.ensure_pure(1)?;
        lab.ensure_bipartite(part)?;
        let (t1, t2) = (lab.pure(1)?, lab.pure(2)?);
        let c_max_a = t1.max_pure_complexity();
        let c_max_ab = t2.max_pure_complexity();

        let pairs: Vec<(usize, usize)> = (0..t1.len()).flat_map(|i| (0..t1.len()).map(move |j| (i, j))).collect();
        let products: Vec<(Record, Complexity)> = pairs
            .par_iter()
            .map(|&(i, j)| -> Result<(Record, Complexity)> {
                let psi = t1.representative(i).tensor(&t1.representative(j));
                let c = t2.lookup(&psi)?;
                let (ca, cb) = (t1.entry_complexity(i), t1.entry_complexity(j));
                let verdict = Verdict::from_check(c.value().map(|c| c <= ca + cb));
                let mut r = Record::new(format!("product-{i:04}-{j:04}"), verdict);
                r.set("c_product", c).set("c_a", ca).set("c_b", cb);
                Ok((r, c))
            })
            .collect::<Result<_>>()?;
        let max_product = products.iter().map(|p| p.1).fold(Complexity::Exact(0), Complexity::max);
        let mut records: Vec<Record> = products.into_iter().map(|p| p.0).collect();

        let mut rng = cfg.rng(1);
        let mut states: Vec<(String, PureState)> = vec![("superadditivity-reference".into(), PureState::zero(2))];
        for (k, (i, j)) in draws(&mut rng, t1.len(), cfg.samples)
            .into_iter()
            .zip(draws(&mut rng, t1.len(), cfg.samples))
            .enumerate()
        {
            let psi = t1.representative(i).tensor(&t1.representative(j));
            states.push((format!("superadditivity-{k:05}"), psi));
        }
        let checks: Vec<Record> = states
            .par_iter()
            .map(|(label, psi)| check_superadditivity(psi, part, &lab, label).map(|r| r.to_record()))
            .collect::<Result<_>>()?;
        records.extend(checks);

        let bound = c_max_a.value().map(|a| 2 * a);
        let mut summary = BTreeMap::new();
        summary.insert("c_max_a".into(), json!(c_max_a));
        summary.insert("c_max_b".into(), json!(c_max_a));
        summary.insert("c_max_ab".into(), json!(c_max_ab));
        summary.insert("max_product_complexity".into(), json!(max_product));
        summary.insert(
            "separation".into(),
            json!(c_max_ab.value().zip(bound).map(|(ab, s)| ab as i64 - s as i64)),
        );
        summary.insert(
            "max_product_le_sum_of_maxima".into(),
            json!(max_product.value().zip(bound).map(|(p, s)| p <= s)),
        );
        Ok(ExperimentReport::new("case1", cfg, records, summary))
    })?
}

/// Low-Schmidt-rank states against the sum of their Schmidt vectors'
/// complexities: rank 1 on 1+1 and rank 2 on 2+2.
pub fn case1a_low_schmidt(cfg: &HarnessConfig) -> Result<ExperimentReport> {
    cfg.install(|| {
        let mut lab = Lab::new(cfg.gate_set.clone(), cfg.params);
        lab.ensure_pure(1)?;
        lab.ensure_pure(2)?;
        let wide = ComplexityTable::build(PureState::zero(4), cfg.gate_set.clone(), cfg.wide_params)?;
        wide.entry_complexities();
        let mut records = Vec::new();
        let mut summary = BTreeMap::new();
        for (tag, part, n_s, table) in [
            ("n2-rank1", one_one(), 1usize, lab.pure(2)?),
            ("n4-rank2", two_two(), 2, &wide),
        ] {
            let rows = low_rank_records(cfg, &lab, table, part, n_s, tag)?;
            summary.insert(format!("{tag}_population"), json!(rows.1));
            records.extend(rows.0);
        }
        Ok(ExperimentReport::new("case1a", cfg, records, summary))
    })?
}

fn schmidt_rank(sd: &SchmidtDecomposition) -> usize {
    sd.coefficients.iter().filter(|c| **c * **c > 1e-9).count()
}

fn low_rank_records(
    cfg: &HarnessConfig,
    lab: &Lab,
    table: &ComplexityTable,
    part: BipartitePartition,
    n_s: usize,
    tag: &str,
) -> Result<(Vec<Record>, usize)> {
    if n_s == 0 || n_s >= part.dim_a() {
        return Err(Error::InvalidParameter(format!(
            "Schmidt number {n_s} must lie in 1..{}",
            part.dim_a()
        )));
    }
    let pool: Vec<usize> = (0..table.len())
        .into_par_iter()
        .filter(|&i| schmidt_decompose(&table.representative(i), part).is_ok_and(|sd| schmidt_rank(&sd) == n_s))
        .collect();
    if pool.is_empty() {
        return Ok((Vec::new(), 0));
    }
    let c_max = table.max_pure_complexity();
    let mut rng = cfg.rng(2 + n_s as u64);
    let picks = draws(&mut rng, pool.len(), cfg.samples);
    let records = picks
        .par_iter()
        .enumerate()
        .map(|(k, &p)| -> Result<Record> {
            let i = pool[p];
            let sd = schmidt_decompose(&table.representative(i), part)?;
            let mut parts = Vec::new();
            for t in 0..n_s {
                parts.push(lab.pure_complexity(&sd.basis_a[t])?);
                parts.push(lab.pure_complexity(&sd.basis_b[t])?);
            }
            let c = Complexity::Exact(table.entry_complexity(i));
            let bound = exact_sum(&parts);
            let verdict = Verdict::from_check(c.value().zip(bound).map(|(c, b)| c <= b));
            let mut r = Record::new(format!("{tag}-{k:05}"), verdict);
            r.set("entry", i)
                .set("c_state", c)
                .set("sum_bound", bound)
                .set("schmidt_parts", &parts);
            // ΔC(Ψ) ≥ C_max − Σ-bound, decided only when C_max is exact
            let delta = c_max.minus(c).value();
            let lower = c_max.value().zip(bound).map(|(m, b)| m as i64 - b as i64);
            r.set("delta", delta)
                .set("delta_lower_bound", lower)
                .set("delta_bound_holds", delta.zip(lower).map(|(d, l)| d >= l));
            Ok(r)
        })
        .collect::<Result<_>>()?;
    Ok((records, pool.len()))
}

/// Bell pairs: uncomplexity of the maximally mixed reductions and the
/// superadditivity verdict, for one and two pairs.
pub fn case2_maximally_entangled(cfg: &HarnessConfig) -> Result<ExperimentReport> {
    cfg.install(|| {
        let mut records = Vec::new();
        for (n_pairs, params) in [(1usize, cfg.params), (2, cfg.wide_params)] {
            let circuit = bell_pair_circuit(n_pairs, &cfg.gate_set)?;
            let psi = apply_circuit(&circuit, &cfg.gate_set, &PureState::zero(2 * n_pairs))?;
            let part = BipartitePartition::new(n_pairs, n_pairs)?;

            // the maximally mixed reduction is found lazily, so the full
            // coarse parameters apply even where the table cannot close
            let mut pt = PurificationTable::new(n_pairs, n_pairs, &cfg.gate_set, cfg.params)?;
            let rho = DensityMatrix::maximally_mixed(n_pairs);
            let c = pt.complexity(&rho)?;
            let m = pt.c_max(&spectrum_of(&rho)?)?;
            let delta = m.value.minus(c);
            let mut r = Record::new(
                format!("pairs-{n_pairs}-uncomplexity"),
                Verdict::from_check(delta.value().map(|d| d == 0)),
            );
            r.set("c_reduction", c)
                .set("c_max", m.value)
                .set("delta", delta)
                .set("bell_witness_gates", circuit.gate_count())
                .set("n", n_pairs)
                .set(
                    "c_reduction_le_witness",
                    c.value().map(|v| v as usize <= circuit.gate_count()),
                );
            records.push(r);

            let mut lab = Lab::new(cfg.gate_set.clone(), params);
            lab.ensure_bipartite(part)?;
            let s = check_superadditivity(&psi, part, &lab, &format!("pairs-{n_pairs}-superadditivity"))?;
            records.push(s.to_record());
        }
        Ok(ExperimentReport::new("case2", cfg, records, BTreeMap::new()))
    })?
}

/// One-sided perturbations of modified references with non-degenerate
/// spectra on 1+1.
pub fn case3_nondegenerate(cfg: &HarnessConfig) -> Result<ExperimentReport> {
    cfg.install(|| {
        let part = one_one();
        let mut lab = Lab::new(cfg.gate_set.clone(), cfg.params);
        lab.ensure_pure(2)?;
        let t2 = lab.pure(2)?;
        let min_gap = 10.0 * DEFAULT_DEGENERACY_TOL;
        let spectra: Vec<Vec<f64>> = (0..t2.len())
            .map(|i| {
                sorted_eigenvalues(
                    partial_trace(&t2.representative(i), part, Side::A)
                        .expect("1+1")
                        .matrix(),
                )
            })
            .filter(|e| e[1] > min_gap && eigen_gap(e) > min_gap)
            .collect();
        if spectra.is_empty() {
            return Err(Error::InvalidParameter("no non-degenerate spectra in the table".into()));
        }
        let mut rng = cfg.rng(5);
        let jobs: Vec<(String, Vec<f64>, Circuit)> =
            std::iter::once(("reference".to_string(), spectra[0].clone(), Circuit::new(2)))
                .chain((0..cfg.samples).map(|k| {
                    let e = spectra[rng.gen_range(0..spectra.len())].clone();
                    let len = rng.gen_range(0..=4);
                    (
                        format!("sample-{k:05}"),
                        e,
                        random_circuit(&cfg.gate_set, 2, &[0], len, &mut rng),
                    )
                }))
                .collect();
        let records: Vec<Record> = jobs
            .par_iter()
            .map(|(label, eigs, u_a)| -> Result<Record> {
                let coeffs: Vec<C64> = eigs.iter().map(|l| C64::new(l.sqrt(), 0.0)).collect();
                let sd = SchmidtDecomposition::from_coefficients(&normalize(coeffs), part)?;
                let mref = modified_reference_built(&sd, t2)?;
                let psi = apply_circuit(u_a, &cfg.gate_set, &mref.state)?;
                let mut rel = ComplexityTable::new(
                    mref.state.clone(),
                    cfg.gate_set.clone(),
                    cfg.params.with_workers(Some(1)),
                )?;
                let c_full = rel.complexity(&psi)?;
                let rho_a = partial_trace(&psi, part, Side::A)?;
                let rho_b = partial_trace(&psi, part, Side::B)?;
                let c_a = basis_complexity_from(
                    &rho_a,
                    &mref.state,
                    part,
                    Side::A,
                    &cfg.gate_set,
                    cfg.params.with_workers(Some(1)),
                )?;
                let c_b = basis_complexity_from(
                    &rho_b,
                    &mref.state,
                    part,
                    Side::B,
                    &cfg.gate_set,
                    cfg.params.with_workers(Some(1)),
                )?;
                let gap = c_full
                    .minus(Complexity::Exact(0))
                    .value()
                    .zip(exact_sum(&[c_a, c_b]))
                    .map(|(f, s)| f - s as i64);
                // concatenating the two one-sided circuits fixes both
                // reductions but not the relative phases of the Schmidt terms
                let mut r = Record::new(label.clone(), Verdict::from_check(gap.map(|g| g <= 0)));
                r.gap = gap;
                r.set("spectrum", eigs)
                    .set("reference_complexity", mref.complexity)
                    .set("c_tilde_full", c_full)
                    .set("c_tilde_a", c_a)
                    .set("c_tilde_b", c_b)
                    .set("one_sided_gates", u_a.gate_count())
                    .set(
                        "within_witness",
                        c_full
                            .value()
                            .zip(c_a.value())
                            .map(|(f, a)| f as usize <= u_a.gate_count() && a as usize <= u_a.gate_count()),
                    );
                if gap.is_some_and(|g| g > 0) {
                    r.witness = Some(circuit_text(u_a));
                }
                Ok(r)
            })
            .collect::<Result<_>>()?;
        let mut hist: BTreeMap<String, usize> = BTreeMap::new();
        for r in &records {
            let key = r.gap.map_or("undecided".to_string(), |g| g.to_string());
            *hist.entry(key).or_default() += 1;
        }
        let mut summary = BTreeMap::new();
        summary.insert("gap_histogram".into(), json!(hist));
        summary.insert("distinct_spectra".into(), json!(spectra.len()));
        Ok(ExperimentReport::new("case3", cfg, records, summary))
    })?
}

fn normalize(v: Vec<C64>) -> Vec<C64> {
    let n = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    v.into_iter().map(|z| z / n).collect()
}

/// Columns of a circuit's unitary, as states.
fn columns(c: &Circuit, cfg: &HarnessConfig) -> Result<Vec<PureState>> {
    circuit_basis(c, &cfg.gate_set)
}

/// `w_k = Σ_l R_{lk} v_l` for the members of one eigenspace.
fn rotate_group(v: &[PureState], group: &[usize], r: &[PureState]) -> Vec<PureState> {
    let n = v[0].n_qubits();
    (0..group.len())
        .map(|k| {
            let mut amps = vec![C64::new(0.0, 0.0); v[0].dim()];
            for (l, &g) in group.iter().enumerate() {
                let coef = r[k].amplitudes()[l];
                for (a, x) in amps.iter_mut().zip(v[g].amplitudes()) {
                    *a += coef * x;
                }
            }
            PureState::normalized(n, amps).expect("unitary image of a basis vector")
        })
        .collect()
}

/// Average-basis-complexity bounds: the basis-change inequality in both
/// directions, its per-eigenspace refinement, and the Schmidt and diagonal
/// basis bounds on 1+1.
pub fn case4_avg_basis_bounds(cfg: &HarnessConfig) -> Result<ExperimentReport> {
    cfg.install(|| {
        let part = one_one();
        let mut lab = Lab::new(cfg.gate_set.clone(), cfg.params);
        lab.ensure_pure(1)?;
        lab.ensure_bipartite(part)?;
        let gs = &cfg.gate_set;
        let mut records = Vec::new();

        // basis pairs; the first is computational against Hadamard
        let mut rng = cfg.rng(7);
        let mut pairs: Vec<(String, Circuit, Circuit)> = Vec::new();
        let mut had = Circuit::new(1);
        had.push_gate("H", &[0])?;
        pairs.push(("avgcomp-n1-hadamard".into(), Circuit::new(1), had));
        for n in [1usize, 2] {
            let support: Vec<usize> = (0..n).collect();
            for k in 0..cfg.samples {
                let (lv, lw) = (rng.gen_range(0..=6), rng.gen_range(0..=6));
                pairs.push((
                    format!("avgcomp-n{n}-{k:05}"),
                    random_circuit(gs, n, &support, lv, &mut rng),
                    random_circuit(gs, n, &support, lw, &mut rng),
                ));
            }
        }
        let avg: Vec<Record> = pairs
            .par_iter()
            .map(|(label, cv, cw)| -> Result<Record> {
                let cs = |c: &Circuit| -> Result<Vec<Complexity>> {
                    columns(c, cfg)?.iter().map(|s| lab.pure_complexity(s)).collect()
                };
                let (v, w) = (cs(cv)?, cs(cw)?);
                let d = v.len() as u32;
                // C_avg(w) ≤ d·C_avg(v) with equal divisors: Σw ≤ d·Σv
                let check = exact_sum(&v)
                    .zip(exact_sum(&w))
                    .map(|(sv, sw)| sw <= d * sv && sv <= d * sw);
                let mut r = Record::new(label.clone(), Verdict::from_check(check));
                r.set("c_v", &v).set("c_w", &w).set("dim", d);
                if check == Some(false) {
                    r.witness = Some(format!("{}---\n{}", circuit_text(cv), circuit_text(cw)));
                }
                Ok(r)
            })
            .collect::<Result<_>>()?;
        records.extend(avg);

        // degenerate spectra: rotate v inside each eigenspace to get w
        let patterns: [(&str, usize, Vec<Vec<usize>>); 4] = [
            ("m2", 1, vec![vec![0, 1]]),
            ("m22", 2, vec![vec![0, 1], vec![2, 3]]),
            ("m4", 2, vec![vec![0, 1, 2, 3]]),
            ("m211", 2, vec![vec![0, 1], vec![2], vec![3]]),
        ];
        let mut jobs = Vec::new();
        for k in 0..cfg.samples.max(50) {
            let (tag, n, groups) = &patterns[k % patterns.len()];
            let support: Vec<usize> = (0..*n).collect();
            let w = random_circuit(gs, *n, &support, rng.gen_range(0..=6), &mut rng);
            let rots: Vec<Circuit> = groups
                .iter()
                .map(|g| {
                    let m = g.len().trailing_zeros() as usize;
                    let sup: Vec<usize> = (0..m).collect();
                    random_circuit(
                        gs,
                        m.max(1),
                        &sup,
                        if m == 0 { 0 } else { rng.gen_range(1..=4) },
                        &mut rng,
                    )
                })
                .collect();
            jobs.push((format!("refine-{tag}-{k:05}"), w, groups.clone(), rots));
        }
        let refine: Vec<Record> = jobs
            .par_iter()
            .map(|(label, wc, groups, rots)| -> Result<Record> {
                let v = columns(wc, cfg)?;
                let mut w = v.clone();
                for (g, rc) in groups.iter().zip(rots) {
                    if g.len() > 1 {
                        for (slot, s) in g.iter().zip(rotate_group(&v, g, &columns(rc, cfg)?)) {
                            w[*slot] = s;
                        }
                    }
                }
                let cv: Vec<Complexity> = v.iter().map(|s| lab.pure_complexity(s)).collect::<Result<_>>()?;
                let cw: Vec<Complexity> = w.iter().map(|s| lab.pure_complexity(s)).collect::<Result<_>>()?;
                // C_avg(v) ≤ (1/d) Σ_k m_k² C_avg(w_k)  ⇔  Σ v ≤ Σ_k m_k Σ_{i∈k} w_i
                let side = |x: &[Complexity], y: &[Complexity]| -> Option<bool> {
                    let lhs = exact_sum(x)?;
                    let rhs: Option<u32> = groups
                        .iter()
                        .map(|g| exact_sum(&g.iter().map(|&i| y[i]).collect::<Vec<_>>()).map(|s| g.len() as u32 * s))
                        .sum();
                    Some(lhs <= rhs?)
                };
                let check = side(&cv, &cw).zip(side(&cw, &cv)).map(|(a, b)| a && b);
                let mut r = Record::new(label.clone(), Verdict::from_check(check));
                let mult: Vec<usize> = groups.iter().map(|g| g.len()).collect();
                r.set("multiplicities", mult).set("c_v", &cv).set("c_w", &cw);
                Ok(r)
            })
            .collect::<Result<_>>()?;
        records.extend(refine);

        // Schmidt and diagonal bases of sampled two-qubit states
        let t2 = lab.pure(2)?;
        let simple: Vec<Complexity> = (0..2)
            .map(|i| lab.pure_complexity(&PureState::basis(1, i)))
            .collect::<Result<_>>()?;
        let picks = draws(&mut rng, t2.len(), cfg.samples);
        let bases: Vec<Record> = picks
            .par_iter()
            .enumerate()
            .flat_map_iter(|(k, &i)| {
                let run = || -> Result<[Record; 2]> {
                    let psi = t2.representative(i);
                    let sd = schmidt_decompose(&psi, part)?;
                    let n_s = schmidt_rank(&sd);
                    let ca: Vec<Complexity> = sd.basis_a[..n_s]
                        .iter()
                        .map(|s| lab.pure_complexity(s))
                        .collect::<Result<_>>()?;
                    let cb: Vec<Complexity> = sd.basis_b[..n_s]
                        .iter()
                        .map(|s| lab.pure_complexity(s))
                        .collect::<Result<_>>()?;
                    let c = Complexity::Exact(t2.entry_complexity(i));
                    // n_S·(C_avg(A) + C_avg(B)) with averages over the n_S vectors
                    let bound = exact_sum(&ca).zip(exact_sum(&cb)).map(|(a, b)| a + b);
                    let mut s = Record::new(
                        format!("schmidt-{k:05}"),
                        Verdict::from_check(c.value().zip(bound).map(|(c, b)| c <= b)),
                    );
                    s.set("entry", i)
                        .set("c_state", c)
                        .set("c_a", &ca)
                        .set("c_b", &cb)
                        .set("schmidt_number", n_s);

                    let rho = partial_trace(&psi, part, Side::A)?;
                    let (spec, vecs) = eigendecompose(&rho, DEFAULT_DEGENERACY_TOL)?;
                    let rank = spec.schmidt_number();
                    let ce: Vec<Complexity> = vecs[..rank]
                        .iter()
                        .map(|s| lab.pure_complexity(s))
                        .collect::<Result<_>>()?;
                    // cost of the |x_i⟩_B states a purification would use
                    let c_simple = simple[..rank]
                        .iter()
                        .map(|c| c.value())
                        .collect::<Option<Vec<_>>>()
                        .map(|v| v.into_iter().max().unwrap_or(0));
                    let (c_rho, _, _) = lab.mixed_delta(&rho)?;
                    let dbound = c_simple.zip(exact_sum(&ce)).map(|(cs, e)| rank as u32 * cs + e);
                    let mut d = Record::new(
                        format!("diagonal-{k:05}"),
                        Verdict::from_check(c_rho.value().zip(dbound).map(|(c, b)| c <= b)),
                    );
                    d.set("entry", i)
                        .set("c_rho", c_rho)
                        .set("c_eigvecs", &ce)
                        .set("c_simple", c_simple)
                        .set("rank", rank);
                    Ok([s, d])
                };
                match run() {
                    Ok(pair) => pair.into_iter().map(Ok).collect::<Vec<_>>(),
                    Err(e) => vec![Err(e)],
                }
            })
            .collect::<Result<_>>()?;
        records.extend(bases);
        Ok(ExperimentReport::new("case4", cfg, records, BTreeMap::new()))
    })?
}

/// Largest purification complexity among exactly degenerate, pure and
/// non-degenerate single-qubit reductions of the two-qubit table.
pub fn degeneracy_separation(cfg: &HarnessConfig) -> Result<ExperimentReport> {
    cfg.install(|| {
        let part = one_one();
        let mut lab = Lab::new(cfg.gate_set.clone(), cfg.params);
        lab.ensure_pure(1)?;
        lab.ensure_bipartite(part)?;
        let t2 = lab.pure(2)?;
        let rows: Vec<(u8, u64, Complexity)> = (0..t2.len())
            .into_par_iter()
            .map(|i| -> Result<(u8, u64, Complexity)> {
                let rho = partial_trace(&t2.representative(i), part, Side::A)?;
                let e = sorted_eigenvalues(rho.matrix());
                let class = if e[1] < 1e-9 {
                    0
                } else if e[0] - e[1] < DEFAULT_DEGENERACY_TOL {
                    1
                } else {
                    2
                };
                let (c, _, _) = lab.mixed_delta(&rho)?;
                Ok((class, (e[0] * 1e9).round() as u64, c))
            })
            .collect::<Result<_>>()?;
        let names = ["pure", "degenerate", "nondegenerate"];
        let mut maxima = [Complexity::Exact(0); 3];
        let mut records = Vec::new();
        for (class, name) in names.iter().enumerate() {
            let members: Vec<&(u8, u64, Complexity)> = rows.iter().filter(|r| r.0 as usize == class).collect();
            let mut distinct: Vec<u64> = members.iter().map(|r| r.1).collect();
            distinct.sort_unstable();
            distinct.dedup();
            maxima[class] = members.iter().map(|r| r.2).fold(Complexity::Exact(0), Complexity::max);
            let mut r = Record::new(format!("group-{name}"), Verdict::Measured);
            r.set("entries", members.len())
                .set("distinct_spectra", distinct.len())
                .set("max_purification", maxima[class]);
            records.push(r);
        }
        let sep = maxima[2].value().zip(maxima[1].value()).map(|(n, d)| n >= d);
        let mut r = Record::new("separation", Verdict::from_check(sep));
        r.set("max_nondegenerate", maxima[2]).set("max_degenerate", maxima[1]);
        records.push(r);
        let witness = bell_pair_circuit(1, &cfg.gate_set)?.gate_count();
        let mut r = Record::new(
            "bell-witness",
            Verdict::from_check(maxima[1].value().map(|d| d as usize <= witness)),
        );
        r.set("max_degenerate", maxima[1]).set("witness_gates", witness);
        records.push(r);
        let pure_max = lab.pure(1)?.max_pure_complexity();
        let mut r = Record::new(
            "pure-group",
            Verdict::from_check(maxima[0].value().zip(pure_max.value()).map(|(g, m)| g <= m)),
        );
        r.set("max_pure_group", maxima[0]).set("single_qubit_c_max", pure_max);
        records.push(r);
        Ok(ExperimentReport::new("degeneracy", cfg, records, BTreeMap::new()))
    })?
}

/// `C(Σ c_i φ_i) ≤ Σ C(φ_i)` for orthogonal pairs and triples drawn from
/// witness circuits of the two-qubit table.
pub fn superposition_property(cfg: &HarnessConfig) -> Result<ExperimentReport> {
    cfg.install(|| {
        let mut lab = Lab::new(cfg.gate_set.clone(), cfg.params);
        lab.ensure_pure(1)?;
        lab.ensure_pure(2)?;
        let t2 = lab.pure(2)?;
        let mut rng = cfg.rng(11);
        let mut jobs: Vec<(String, Circuit, Vec<usize>, Vec<C64>)> = Vec::new();
        for k in 0..cfg.samples {
            let m = 2 + k % 2;
            let mut labels: Vec<usize> = (0..4).collect();
            labels.shuffle(&mut rng);
            labels.truncate(m);
            let coeffs: Vec<C64> = (0..m)
                .map(|_| C64::new(rng.sample(StandardNormal), rng.sample(StandardNormal)))
                .collect();
            let w = t2.witness(rng.gen_range(0..t2.len()));
            jobs.push((format!("set{m}-{k:05}"), w, labels, normalize(coeffs)));
        }
        let mut records: Vec<Record> = jobs
            .par_iter()
            .map(|(label, w, labels, coeffs)| -> Result<Record> {
                let phis: Vec<PureState> = labels
                    .iter()
                    .map(|&b| apply_circuit(w, &cfg.gate_set, &PureState::basis(2, b)))
                    .collect::<Result<_>>()?;
                let mut amps = vec![C64::new(0.0, 0.0); 4];
                for (c, phi) in coeffs.iter().zip(&phis) {
                    for (a, x) in amps.iter_mut().zip(phi.amplitudes()) {
                        *a += c * x;
                    }
                }
                let psi = PureState::normalized(2, amps)?;
                let parts: Vec<Complexity> = phis.iter().map(|p| lab.pure_complexity(p)).collect::<Result<_>>()?;
                let c = lab.pure_complexity(&psi)?;
                let bound = exact_sum(&parts);
                let slack = c.value().zip(bound).map(|(c, b)| b as i64 - c as i64);
                let mut r = Record::new(label.clone(), Verdict::from_check(slack.map(|s| s >= 0)));
                r.gap = slack;
                r.set("c_superposition", c).set("c_parts", &parts).set("labels", labels);
                if slack.is_some_and(|s| s < 0) {
                    r.witness = Some(circuit_text(w));
                }
                Ok(r)
            })
            .collect::<Result<_>>()?;

        let s = std::f64::consts::FRAC_1_SQRT_2;
        let plus = PureState::new(1, vec![C64::new(s, 0.0), C64::new(s, 0.0)])?;
        let parts = [
            lab.pure_complexity(&PureState::basis(1, 0))?,
            lab.pure_complexity(&PureState::basis(1, 1))?,
        ];
        let c = lab.pure_complexity(&plus)?;
        let slack = c.value().zip(exact_sum(&parts)).map(|(c, b)| b as i64 - c as i64);
        let mut r = Record::new("plus", Verdict::from_check(slack.map(|s| s >= 0)));
        r.gap = slack;
        r.set("c_superposition", c).set("c_parts", parts);
        records.push(r);

        let mut hist: BTreeMap<String, usize> = BTreeMap::new();
        for r in &records {
            *hist
                .entry(r.gap.map_or("undecided".into(), |g| g.to_string()))
                .or_default() += 1;
        }
        let mut summary = BTreeMap::new();
        summary.insert("slack_histogram".into(), json!(hist));
        Ok(ExperimentReport::new("superposition", cfg, records, summary))
    })?
}

/// Superadditivity over every entry of the saturated 1+1 table, plus
/// samples from the capped 2+2 table.
pub fn superadditivity_sweep(cfg: &HarnessConfig) -> Result<ExperimentReport> {
    cfg.install(|| {
        let part = one_one();
        let mut lab = Lab::new(cfg.gate_set.clone(), cfg.params);
        lab.ensure_bipartite(part)?;
        let t2 = lab.pure(2)?;
        let mut records: Vec<Record> = (0..t2.len())
            .into_par_iter()
            .map(|i| -> Result<Record> {
                let mut r = check_superadditivity(&t2.representative(i), part, &lab, &format!("n2-entry-{i:06}"))?;
                if r.verdict == Verdict::Violated {
                    r.witness = Some(t2.witness(i).to_text());
                }
                Ok(r.to_record())
            })
            .collect::<Result<_>>()?;

        let wide = two_two();
        let mut wlab = Lab::new(cfg.gate_set.clone(), cfg.wide_params);
        wlab.ensure_bipartite(wide)?;
        let t4 = wlab.pure(4)?;
        let mut rng = cfg.rng(13);
        let picks = draws(&mut rng, t4.len(), cfg.samples);
        let wide_records: Vec<Record> = picks
            .par_iter()
            .enumerate()
            .map(|(k, &i)| -> Result<Record> {
                let mut r = check_superadditivity(&t4.representative(i), wide, &wlab, &format!("n4-sample-{k:05}"))?;
                if r.verdict == Verdict::Violated {
                    r.witness = Some(t4.witness(i).to_text());
                }
                let mut rec = r.to_record();
                rec.set("entry", i);
                Ok(rec)
            })
            .collect::<Result<_>>()?;
        records.extend(wide_records);

        let mut summary: BTreeMap<String, Value> = BTreeMap::new();
        for prefix in ["n2", "n4"] {
            for v in [Verdict::Holds, Verdict::Violated, Verdict::Undecided] {
                let n = records
                    .iter()
                    .filter(|r| r.label.starts_with(prefix) && r.verdict == v)
                    .count();
                summary.insert(format!("{prefix}_{}", v.as_str()), json!(n));
            }
        }
        summary.insert("n2_table_entries".into(), json!(t2.len()));
        summary.insert("n2_growth".into(), json!(t2.growth()));
        summary.insert("n4_growth".into(), json!(t4.growth()));
        summary.insert("n4_table_entries".into(), json!(t4.len()));
        Ok(ExperimentReport::new("superadditivity-sweep", cfg, records, summary))
    })?
}

/// `C(ρ) ≤ C_S(ρ) + C_B(ρ)` over single-qubit density matrices: a few fixed
/// cases and the reductions of sampled two-qubit table entries.
pub fn mixed_bound_corpus(cfg: &HarnessConfig) -> Result<ExperimentReport> {
    cfg.install(|| {
        let part = one_one();
        let mut lab = Lab::new(cfg.gate_set.clone(), cfg.params);
        lab.ensure_bipartite(part)?;
        let t2 = lab.pure(2)?;
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let h = nalgebra::DMatrix::from_row_slice(
            2,
            2,
            &[C64::new(s, 0.0), C64::new(s, 0.0), C64::new(s, 0.0), C64::new(-s, 0.0)],
        );
        let skew = DensityMatrix::diagonal(1, &[0.7, 0.3])?;
        let mut corpus: Vec<(String, DensityMatrix)> = vec![
            ("fixed-pure".into(), PureState::zero(1).density()),
            ("fixed-mixed".into(), DensityMatrix::maximally_mixed(1)),
            ("fixed-skew".into(), skew.clone()),
            ("fixed-skew-rotated".into(), skew.conjugate_by(&h)?),
        ];
        let mut rng = cfg.rng(17);
        for (k, i) in draws(&mut rng, t2.len(), cfg.samples).into_iter().enumerate() {
            corpus.push((
                format!("entry-{k:05}"),
                partial_trace(&t2.representative(i), part, Side::A)?,
            ));
        }
        let params = cfg.params.with_workers(Some(1));
        let records: Vec<Record> = corpus
            .par_iter()
            .map(|(label, rho)| -> Result<Record> {
                let spec = spectrum_of(rho)?;
                let (c, _, _) = lab.mixed_delta(rho)?;
                let split = report_partition(rho, &spec);
                let c_s = spectrum_complexity_built(&spec, split, t2)?;
                let sd = SchmidtDecomposition::from_coefficients(&leading_coefficients(&spec), split)?;
                let mref = modified_reference_built(&sd, t2)?;
                let c_b = basis_complexity_from(rho, &mref.state, split, Side::A, &cfg.gate_set, params)?;
                let sum = exact_sum(&[c_s, c_b]);
                let slack = c.value().zip(sum).map(|(c, s)| s as i64 - c as i64);
                let mut r = Record::new(label.clone(), Verdict::from_check(slack.map(|x| x >= 0)));
                r.gap = slack;
                r.set("spectrum", spec.eigenvalues())
                    .set("c_purification", c)
                    .set("c_spectrum", c_s)
                    .set("c_basis", c_b)
                    .set("reference_complexity", mref.complexity);
                Ok(r)
            })
            .collect::<Result<_>>()?;
        Ok(ExperimentReport::new("mixed-bound", cfg, records, BTreeMap::new()))
    })?
}

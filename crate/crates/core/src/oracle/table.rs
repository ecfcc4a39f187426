use std::collections::HashMap;
use std::hash::{BuildHasherDefault, Hasher};
use std::sync::{Arc, OnceLock};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::index::{NeighborIndex, Ray};
use super::{Complexity, OracleParams};
use crate::error::{Error, Result};
use crate::gates::{Circuit, CompiledOp, GateApplication, GateSet, Operation};
use crate::qstate::key::key_of_amplitudes;
use crate::qstate::{inner_raw, partial_trace, BipartitePartition, PureState, Side, StateKey, C64};

/// Keys are already uniformly mixed hashes, so the map just folds them.
#[derive(Default)]
pub(crate) struct KeyHasher(u64);

impl Hasher for KeyHasher {
    fn finish(&self) -> u64 {
        self.0
    }

    fn write(&mut self, bytes: &[u8]) {
        for &b in bytes {
            self.0 = self.0.rotate_left(8) ^ b as u64;
        }
    }

    fn write_u128(&mut self, v: u128) {
        self.0 = v as u64 ^ (v >> 64) as u64;
    }
}

pub(crate) type KeyMap<V> = HashMap<StateKey, V, BuildHasherDefault<KeyHasher>>;

const ROOT: u32 = u32::MAX;

/// Frontier chunks expanded between two checks against the entry cap.
const BATCH_CHUNKS: usize = 64;

/// Share of the memory available at first use that tables may fill.
const MEMORY_SHARE: u64 = 3;

/// `MemAvailable` from `/proc/meminfo`, read once per process.
fn available_memory() -> Option<u64> {
    static AVAIL: OnceLock<Option<u64>> = OnceLock::new();
    *AVAIL.get_or_init(|| {
        let info = std::fs::read_to_string("/proc/meminfo").ok()?;
        let line = info.lines().find(|l| l.starts_with("MemAvailable:"))?;
        let kb: u64 = line.split_whitespace().nth(1)?.parse().ok()?;
        Some(kb * 1024)
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub(crate) struct Entry {
    pub(crate) key: StateKey,
    pub(crate) depth: u32,
    pub(crate) parent: u32,
    pub(crate) mv: u32,
}

/// How far a table has been explored.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Growth {
    /// Levels remain below the budget that have not been expanded yet.
    Growing,
    /// An expansion produced no new keys: the reachable set is complete.
    Saturated,
    /// Every level up to the budget is present, and more states exist beyond.
    BudgetReached,
    /// The entry cap truncated the last level.
    Capped,
}

/// BFS closure of the reference under a gate set, bucketed by canonical key.
///
/// Entries are stored level by level; within a level they are sorted by key.
/// Each entry keeps the amplitudes actually produced by its witness circuit,
/// so replaying the witness reproduces the representative exactly.
pub struct ComplexityTable {
    reference: PureState,
    gate_set: GateSet,
    params: OracleParams,
    support: Vec<usize>,
    moves: Vec<(GateApplication, CompiledOp)>,
    index: KeyMap<u32>,
    entries: Vec<Entry>,
    amps: Vec<C64>,
    /// `level_ends[d]` is the number of entries of depth ≤ d.
    level_ends: Vec<usize>,
    growth: Growth,
    pool: Option<Arc<rayon::ThreadPool>>,
    eps_depths: OnceLock<Vec<u32>>,
    neighbors: OnceLock<NeighborIndex<Ray>>,
}

impl std::fmt::Debug for ComplexityTable {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("ComplexityTable")
            .field("n_qubits", &self.n_qubits())
            .field("gate_set", &self.gate_set.name)
            .field("params", &self.params)
            .field("entries", &self.entries.len())
            .field("explored_depth", &self.explored_depth())
            .field("growth", &self.growth)
            .finish()
    }
}

/// Every placement of every gate on the `support` qubits: gates in set
/// order, then targets in lexicographic order.
fn all_moves(gs: &GateSet, n: usize, support: &[usize]) -> Result<Vec<(GateApplication, CompiledOp)>> {
    let mut out = Vec::new();
    for g in gs.gates() {
        let target_lists: Vec<Vec<usize>> = match g.arity {
            1 => support.iter().map(|&q| vec![q]).collect(),
            _ => support
                .iter()
                .flat_map(|&a| support.iter().filter(move |&&b| b != a).map(move |&b| vec![a, b]))
                .collect(),
        };
        for targets in target_lists {
            let app = GateApplication {
                label: g.label.clone(),
                targets,
            };
            let op = CompiledOp::resolve(&Operation::Gate(app.clone()), gs, n)?;
            out.push((app, op));
        }
    }
    Ok(out)
}

struct Chunk {
    found: Vec<(StateKey, u32, u32)>,
    amps: Vec<C64>,
}

impl ComplexityTable {
    /// A table holding only the reference; levels are added on demand.
    pub fn new(reference: PureState, gate_set: GateSet, params: OracleParams) -> Result<Self> {
        let all: Vec<usize> = (0..reference.n_qubits()).collect();
        Self::on_support(reference, gate_set, params, &all)
    }

    /// As [`Self::new`], but gates may only act on the `support` qubits.
    pub fn on_support(
        reference: PureState,
        gate_set: GateSet,
        params: OracleParams,
        support: &[usize],
    ) -> Result<Self> {
        params.validate()?;
        let n = reference.n_qubits();
        let mut support = support.to_vec();
        support.sort_unstable();
        support.dedup();
        if support.is_empty() || support.iter().any(|&q| q >= n) {
            return Err(Error::InvalidTargets(format!("support {support:?} on {n} qubits")));
        }
        let moves = all_moves(&gate_set, n, &support)?;
        let pool = match params.workers {
            Some(w) => Some(Arc::new(
                rayon::ThreadPoolBuilder::new()
                    .num_threads(w)
                    .build()
                    .map_err(|e| Error::InvalidParameter(e.to_string()))?,
            )),
            None => None,
        };
        let key = key_of_amplitudes(reference.amplitudes(), params.grid);
        let mut index = KeyMap::default();
        index.insert(key, 0);
        Ok(Self {
            amps: reference.amplitudes().to_vec(),
            reference,
            gate_set,
            params,
            support,
            moves,
            index,
            entries: vec![Entry {
                key,
                depth: 0,
                parent: ROOT,
                mv: ROOT,
            }],
            level_ends: vec![1],
            growth: Growth::Growing,
            pool,
            eps_depths: OnceLock::new(),
            neighbors: OnceLock::new(),
        })
    }

    /// A table explored up to the parameter budget (or closure, or the cap).
    pub fn build(reference: PureState, gate_set: GateSet, params: OracleParams) -> Result<Self> {
        let mut t = Self::new(reference, gate_set, params)?;
        t.grow_to(params.budget);
        Ok(t)
    }

    pub fn reference(&self) -> &PureState {
        &self.reference
    }

    pub fn gate_set(&self) -> &GateSet {
        &self.gate_set
    }

    pub fn params(&self) -> &OracleParams {
        &self.params
    }

    /// Qubits the gates may act on.
    pub fn support(&self) -> &[usize] {
        &self.support
    }

    pub fn n_qubits(&self) -> usize {
        self.reference.n_qubits()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// The configured entry cap, lowered so that the amplitudes, their
    /// growth slack and the bookkeeping fit in a share of available memory.
    pub fn entry_limit(&self) -> usize {
        let per_entry = 2 * self.reference.dim() as u64 * 16 + 96;
        match available_memory() {
            Some(bytes) => self.params.max_entries.min((bytes / MEMORY_SHARE / per_entry) as usize),
            None => self.params.max_entries,
        }
    }

    pub fn growth(&self) -> Growth {
        self.growth
    }

    pub fn is_saturated(&self) -> bool {
        self.growth == Growth::Saturated
    }

    /// True once no further growth is possible.
    pub fn is_complete(&self) -> bool {
        self.growth != Growth::Growing
    }

    /// Deepest level present (possibly partial when capped).
    pub fn explored_depth(&self) -> u32 {
        (self.level_ends.len() - 1) as u32
    }

    /// Deepest level known to be fully present.
    pub fn complete_depth(&self) -> u32 {
        match self.growth {
            Growth::Capped => self.explored_depth().saturating_sub(1),
            _ => self.explored_depth(),
        }
    }

    /// Raw BFS eccentricity: the largest entry depth.
    pub fn max_depth(&self) -> u32 {
        self.entries.last().map_or(0, |e| e.depth)
    }

    pub fn level_range(&self, depth: u32) -> std::ops::Range<usize> {
        let d = depth as usize;
        if d >= self.level_ends.len() {
            return self.entries.len()..self.entries.len();
        }
        let start = if d == 0 { 0 } else { self.level_ends[d - 1] };
        start..self.level_ends[d]
    }

    pub fn depth(&self, i: usize) -> u32 {
        self.entries[i].depth
    }

    pub fn key(&self, i: usize) -> StateKey {
        self.entries[i].key
    }

    pub fn amplitudes(&self, i: usize) -> &[C64] {
        let d = self.reference.dim();
        &self.amps[i * d..(i + 1) * d]
    }

    pub fn representative(&self, i: usize) -> PureState {
        PureState::from_raw(self.n_qubits(), self.amplitudes(i).to_vec())
    }

    /// Index of the entry stored under `key`.
    pub fn find_key(&self, key: StateKey) -> Option<usize> {
        self.index.get(&key).map(|&i| i as usize)
    }

    /// Gate sequence leading from the reference to entry `i`.
    pub fn witness(&self, i: usize) -> Circuit {
        let mut moves = Vec::new();
        let mut cur = i as u32;
        while self.entries[cur as usize].parent != ROOT {
            let e = self.entries[cur as usize];
            moves.push(e.mv);
            cur = e.parent;
        }
        let mut c = Circuit::new(self.n_qubits());
        for &m in moves.iter().rev() {
            let app = &self.moves[m as usize].0;
            c.push_gate(app.label.clone(), &app.targets)
                .expect("moves are valid on the table register");
        }
        c
    }

    pub(crate) fn raw_entries(&self) -> &[Entry] {
        &self.entries
    }

    /// Expands levels until depth `depth` exists, the budget is hit, or the
    /// table closes.
    pub fn grow_to(&mut self, depth: u32) {
        let target = depth.min(self.params.budget);
        while self.growth == Growth::Growing && self.explored_depth() < target {
            self.expand(true);
        }
        if self.growth == Growth::Growing && self.explored_depth() == self.params.budget {
            self.expand(false);
        }
    }

    fn expand(&mut self, insert: bool) {
        let frontier = self.level_range(self.explored_depth());
        let n = self.n_qubits();
        let dim = self.reference.dim();
        let grid = self.params.grid;
        let chunk_len = 256usize;
        let starts: Vec<usize> = frontier.clone().step_by(chunk_len).collect();
        let end = frontier.end;

        let room = self.entry_limit().saturating_sub(self.entries.len());
        let this = &*self;
        let scan = |batch: &[usize]| -> Vec<Chunk> {
            batch
                .par_iter()
                .map(|&s| {
                    let mut local: KeyMap<()> = KeyMap::default();
                    let mut chunk = Chunk {
                        found: Vec::new(),
                        amps: Vec::new(),
                    };
                    let mut buf = vec![C64::new(0.0, 0.0); dim];
                    for p in s..(s + chunk_len).min(end) {
                        let parent = this.amplitudes(p);
                        for (m, (_, op)) in this.moves.iter().enumerate() {
                            buf.copy_from_slice(parent);
                            op.apply(&mut buf, n);
                            let key = key_of_amplitudes(&buf, grid);
                            if this.index.contains_key(&key) || local.insert(key, ()).is_some() {
                                continue;
                            }
                            chunk.found.push((key, p as u32, m as u32));
                            chunk.amps.extend_from_slice(&buf);
                            if !insert {
                                return chunk;
                            }
                        }
                    }
                    chunk
                })
                .collect()
        };

        // Batches run in frontier order whatever the worker count, and the
        // first occurrence in (parent, move) order wins. Scanning stops once
        // the level alone would overflow the cap, which bounds memory.
        let mut level: KeyMap<()> = KeyMap::default();
        let mut fresh: Vec<(StateKey, u32, u32, usize)> = Vec::new();
        let mut fresh_amps: Vec<C64> = Vec::new();
        for batch in starts.chunks(BATCH_CHUNKS) {
            let chunks = match &self.pool {
                Some(pool) => pool.install(|| scan(batch)),
                None => scan(batch),
            };
            for chunk in chunks {
                for (j, &(key, parent, mv)) in chunk.found.iter().enumerate() {
                    if level.insert(key, ()).is_none() {
                        fresh.push((key, parent, mv, fresh_amps.len() / dim));
                        fresh_amps.extend_from_slice(&chunk.amps[j * dim..(j + 1) * dim]);
                    }
                }
            }
            if (!insert && !fresh.is_empty()) || fresh.len() > room {
                break;
            }
        }
        drop(level);
        if fresh.is_empty() {
            self.growth = Growth::Saturated;
            return;
        }
        if !insert {
            self.growth = Growth::BudgetReached;
            return;
        }
        fresh.sort_unstable_by_key(|f| f.0);
        if fresh.len() > room {
            fresh.truncate(room);
            self.growth = Growth::Capped;
            if fresh.is_empty() {
                return;
            }
        }
        let depth = self.explored_depth() + 1;
        self.entries.reserve(fresh.len());
        self.amps.reserve(fresh.len() * dim);
        for (key, parent, mv, k) in fresh {
            self.index.insert(key, self.entries.len() as u32);
            self.entries.push(Entry { key, depth, parent, mv });
            self.amps.extend_from_slice(&fresh_amps[k * dim..(k + 1) * dim]);
        }
        self.level_ends.push(self.entries.len());
        self.eps_depths = OnceLock::new();
        self.neighbors = OnceLock::new();
    }

    /// Rebuilds a table from stored `(key, depth, parent, move)` rows by
    /// replaying each move from its parent.
    pub(crate) fn from_rows(
        reference: PureState,
        gate_set: GateSet,
        params: OracleParams,
        support: &[usize],
        growth: Growth,
        rows: &[(StateKey, u32, Option<u32>, Option<u32>)],
    ) -> Result<Self> {
        let mut t = Self::on_support(reference, gate_set, params, support)?;
        let dim = t.reference.dim();
        let n = t.n_qubits();
        let Some((first, rest)) = rows.split_first() else {
            return Err(Error::Parse {
                line: 2,
                msg: "table has no entries".into(),
            });
        };
        if first.0 != t.entries[0].key || first.1 != 0 {
            return Err(Error::Parse {
                line: 2,
                msg: "first entry is not the reference".into(),
            });
        }
        let mut buf = vec![C64::new(0.0, 0.0); dim];
        for (row, &(key, depth, parent, mv)) in rest.iter().enumerate() {
            let line = row + 3;
            let err = |msg: &str| Error::Parse {
                line,
                msg: msg.to_string(),
            };
            let (Some(parent), Some(mv)) = (parent, mv) else {
                return Err(err("missing parent or move"));
            };
            if parent as usize >= t.entries.len() || mv as usize >= t.moves.len() {
                return Err(err("parent or move out of range"));
            }
            if t.entries[parent as usize].depth + 1 != depth {
                return Err(err("depth is not parent depth + 1"));
            }
            let last_depth = t.entries.last().unwrap().depth;
            if depth < last_depth {
                return Err(err("entries are not in BFS order"));
            }
            buf.copy_from_slice(t.amplitudes(parent as usize));
            t.moves[mv as usize].1.apply(&mut buf, n);
            if key_of_amplitudes(&buf, params.grid) != key {
                return Err(err("replayed witness does not reproduce the stored key"));
            }
            if depth > last_depth {
                t.level_ends.push(t.entries.len());
            }
            t.index.insert(key, t.entries.len() as u32);
            t.entries.push(Entry { key, depth, parent, mv });
            t.amps.extend_from_slice(&buf);
        }
        *t.level_ends.last_mut().unwrap() = t.entries.len();
        t.growth = growth;
        Ok(t)
    }

    fn check_target(&self, target: &PureState) -> Result<()> {
        if target.n_qubits() != self.n_qubits() {
            return Err(Error::DimensionMismatch {
                expected: self.reference.dim(),
                found: target.dim(),
            });
        }
        Ok(())
    }

    fn accepts(&self, i: usize, target: &[C64]) -> bool {
        inner_raw(self.amplitudes(i), target).norm_sqr() >= 1.0 - self.params.epsilon
    }

    /// Marker for "nothing matched in the explored part".
    fn miss(&self) -> Complexity {
        if self.is_saturated() {
            Complexity::Unreachable
        } else {
            Complexity::ExceedsBudget(self.complete_depth())
        }
    }

    /// First entry (lowest depth, then table order) satisfying `accept`,
    /// growing the table level by level as needed.
    pub fn search<F: Fn(&[C64]) -> bool>(&mut self, accept: F) -> Option<usize> {
        let mut d = 0;
        loop {
            self.grow_to(d);
            if d > self.explored_depth() {
                return None;
            }
            let hit = self.level_range(d).find(|&i| accept(self.amplitudes(i)));
            if hit.is_some() {
                return hit;
            }
            if d == self.explored_depth() && self.is_complete() {
                return None;
            }
            d += 1;
        }
    }

    /// As [`Self::search`] but over the levels already present.
    pub fn search_built<F: Fn(&[C64]) -> bool>(&self, accept: F) -> Option<usize> {
        (0..self.entries.len()).find(|&i| accept(self.amplitudes(i)))
    }

    /// Wraps a search hit as a complexity.
    pub fn complexity_of_hit(&self, hit: Option<usize>) -> Complexity {
        match hit {
            Some(i) => Complexity::Exact(self.depth(i)),
            None => self.miss(),
        }
    }

    /// Minimal depth within fidelity `1 − ε` of `target`, growing lazily.
    pub fn complexity(&mut self, target: &PureState) -> Result<Complexity> {
        self.check_target(target)?;
        let eps = self.params.epsilon;
        let t = target.amplitudes();
        let hit = self.search(|a| inner_raw(a, t).norm_sqr() >= 1.0 - eps);
        Ok(self.complexity_of_hit(hit))
    }

    /// Read-only query against the levels already present.
    pub fn lookup(&self, target: &PureState) -> Result<Complexity> {
        self.check_target(target)?;
        let t = target.amplitudes();
        let best = if self.is_complete() {
            self.neighbor_index()
                .within(&Ray::new(t), self.pure_radius())
                .into_iter()
                .find(|&i| self.accepts(i, t))
        } else {
            self.search_built(|a| inner_raw(a, t).norm_sqr() >= 1.0 - self.params.epsilon)
        };
        Ok(self.complexity_of_hit(best))
    }

    fn neighbor_index(&self) -> &NeighborIndex<Ray> {
        self.neighbors.get_or_init(|| {
            let rays: Vec<Ray> = (0..self.len()).map(|i| Ray::new(self.amplitudes(i))).collect();
            NeighborIndex::new(&rays)
        })
    }

    /// Fubini–Study angle corresponding to fidelity `1 − ε`.
    fn pure_radius(&self) -> f64 {
        (1.0 - self.params.epsilon).sqrt().acos()
    }

    /// ε-complexity of every representative: the smallest depth among
    /// entries within fidelity `1 − ε` of it.
    pub fn entry_complexities(&self) -> &[u32] {
        self.eps_depths.get_or_init(|| {
            let idx = self.neighbor_index();
            let run = || -> Vec<u32> {
                (0..self.len())
                    .into_par_iter()
                    .map(|i| {
                        let a = self.amplitudes(i);
                        idx.within(&Ray::new(a), self.pure_radius())
                            .into_iter()
                            .take_while(|&j| j <= i)
                            .find(|&j| self.accepts(j, a))
                            .map_or(self.depth(i), |j| self.depth(j))
                    })
                    .collect()
            };
            match &self.pool {
                Some(pool) => pool.install(run),
                None => run(),
            }
        })
    }

    /// ε-complexity of entry `i`.
    pub fn entry_complexity(&self, i: usize) -> u32 {
        self.entry_complexities()[i]
    }

    /// Largest ε-complexity over the representatives of a saturated table;
    /// the exceeds-budget marker otherwise.
    pub fn max_pure_complexity(&self) -> Complexity {
        if !self.is_saturated() {
            return Complexity::ExceedsBudget(self.complete_depth());
        }
        Complexity::Exact(self.entry_complexities().iter().copied().max().unwrap_or(0))
    }
}

/// Eigenvalues (descending) of the `A` reduction of raw amplitudes.
pub(crate) fn reduced_eigenvalues(amps: &[C64], part: BipartitePartition) -> Vec<f64> {
    let psi = PureState::from_raw(part.n_qubits(), amps.to_vec());
    let rho = partial_trace(&psi, part, Side::A).expect("partition checked by caller");
    rho.eigenvalues()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gates::apply_circuit;
    use crate::qstate::{canonical_key, fidelity};

    fn params(eps: f64, grid: f64, budget: u32) -> OracleParams {
        OracleParams::new(eps, grid, budget)
    }

    #[test]
    fn budget_zero_holds_only_the_reference() {
        let gs = GateSet::from_labels("hx", &["H", "T", "Tdg", "X"]).unwrap();
        let t = ComplexityTable::build(PureState::zero(1), gs, params(1e-4, 1e-3, 0)).unwrap();
        assert_eq!(t.len(), 1);
        assert!(!t.is_saturated());
        assert_eq!(t.growth(), Growth::BudgetReached);
        assert!(t.witness(0).is_empty());
    }

    #[test]
    fn x_only_closes_after_one_level() {
        let gs = GateSet::from_labels("x", &["X"]).unwrap();
        let t = ComplexityTable::build(PureState::zero(1), gs, params(1e-4, 1e-3, 10)).unwrap();
        assert_eq!(t.len(), 2);
        assert!(t.is_saturated());
        assert_eq!(t.depth(1), 1);
        assert_eq!(t.max_pure_complexity(), Complexity::Exact(1));
        assert_eq!(t.find_key(canonical_key(&PureState::basis(1, 1), 1e-3)), Some(1));
    }

    #[test]
    fn h_only_reaches_plus() {
        let gs = GateSet::from_labels("h", &["H"]).unwrap();
        let t = ComplexityTable::build(PureState::zero(1), gs, params(1e-4, 1e-3, 10)).unwrap();
        assert_eq!(t.len(), 2);
        assert_eq!(t.max_pure_complexity(), Complexity::Exact(1));
    }

    #[test]
    fn witnesses_replay_onto_representatives() {
        let gs = GateSet::standard();
        let t = ComplexityTable::build(PureState::zero(2), gs.clone(), params(1e-4, 1e-2, 4)).unwrap();
        for i in 0..t.len() {
            let w = t.witness(i);
            assert_eq!(w.gate_count() as u32, t.depth(i));
            let out = apply_circuit(&w, &gs, t.reference()).unwrap();
            assert!(fidelity(&out, &t.representative(i)).unwrap() >= 1.0 - 1e-12);
        }
    }

    #[test]
    fn lazy_and_full_builds_agree() {
        let gs = GateSet::standard();
        let p = params(1e-4, 1e-2, 3);
        let full = ComplexityTable::build(PureState::zero(2), gs.clone(), p).unwrap();
        let mut lazy = ComplexityTable::new(PureState::zero(2), gs, p).unwrap();
        lazy.grow_to(1);
        assert_eq!(lazy.explored_depth(), 1);
        lazy.grow_to(3);
        assert_eq!(lazy.raw_entries(), full.raw_entries());
        assert_eq!(lazy.growth(), full.growth());
    }

    #[test]
    fn entry_cap_truncates() {
        let gs = GateSet::standard();
        let t = ComplexityTable::build(PureState::zero(2), gs, params(1e-4, 1e-2, 6).with_max_entries(50)).unwrap();
        assert_eq!(t.len(), 50);
        assert_eq!(t.growth(), Growth::Capped);
        assert!(!t.is_saturated());
    }

    #[test]
    fn rejects_coarse_grid() {
        let gs = GateSet::standard();
        assert!(ComplexityTable::new(PureState::zero(1), gs, params(1e-4, 0.1, 3)).is_err());
    }
}

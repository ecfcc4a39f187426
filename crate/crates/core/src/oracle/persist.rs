//! JSON-lines table dump: one header line, then one line per entry in table
//! order. Representatives are not stored; reload replays each move from its
//! parent and checks that the stored key comes back.

use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{ComplexityTable, Growth, OracleParams};
use crate::error::{Error, Result};
use crate::gates::GateSet;
use crate::qstate::{PureState, StateKey, C64};

const FORMAT: &str = "qclab-table";
const VERSION: u32 = 1;

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct Header {
    format: String,
    version: u32,
    gate_set: String,
    gate_set_hash: String,
    epsilon: f64,
    grid: f64,
    budget: u32,
    max_entries: usize,
    growth: Growth,
    n_qubits: usize,
    support: Vec<usize>,
    reference: Vec<[f64; 2]>,
    entries: usize,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct Row {
    key: String,
    depth: u32,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    parent: Option<u32>,
    #[serde(skip_serializing_if = "Option::is_none", default, rename = "move")]
    mv: Option<u32>,
}

impl ComplexityTable {
    pub fn write_jsonl<W: Write>(&self, out: W) -> Result<()> {
        let mut out = BufWriter::new(out);
        let header = Header {
            format: FORMAT.into(),
            version: VERSION,
            gate_set: self.gate_set().name.clone(),
            gate_set_hash: self.gate_set().hash_hex(),
            epsilon: self.params().epsilon,
            grid: self.params().grid,
            budget: self.params().budget,
            max_entries: self.params().max_entries,
            growth: self.growth(),
            n_qubits: self.n_qubits(),
            support: self.support().to_vec(),
            reference: self.reference().amplitudes().iter().map(|z| [z.re, z.im]).collect(),
            entries: self.len(),
        };
        serde_json::to_writer(&mut out, &header)?;
        out.write_all(b"\n")?;
        for e in self.raw_entries() {
            let root = e.depth == 0;
            let row = Row {
                key: e.key.to_string(),
                depth: e.depth,
                parent: (!root).then_some(e.parent),
                mv: (!root).then_some(e.mv),
            };
            serde_json::to_writer(&mut out, &row)?;
            out.write_all(b"\n")?;
        }
        out.flush()?;
        Ok(())
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        self.write_jsonl(std::fs::File::create(path)?)
    }

    /// Reads a dump. `gs` must hash identically to the set the table was
    /// built with.
    pub fn read_jsonl<R: Read>(input: R, gs: &GateSet, workers: Option<usize>) -> Result<Self> {
        let mut lines = BufReader::new(input).lines();
        let parse_err = |line: usize, e: &dyn std::fmt::Display| Error::Parse {
            line,
            msg: e.to_string(),
        };
        let head = lines.next().ok_or_else(|| parse_err(1, &"empty table file"))??;
        let header: Header = serde_json::from_str(&head).map_err(|e| parse_err(1, &e))?;
        if header.format != FORMAT || header.version != VERSION {
            return Err(parse_err(
                1,
                &format!("unsupported format {} v{}", header.format, header.version),
            ));
        }
        let hash = gs.hash_hex();
        if header.gate_set_hash != hash {
            return Err(Error::GateSetMismatch {
                table: header.gate_set_hash,
                query: hash,
            });
        }
        let amps = header.reference.iter().map(|&[re, im]| C64::new(re, im)).collect();
        let reference = PureState::new(header.n_qubits, amps).map_err(|e| parse_err(1, &e))?;
        let params = OracleParams {
            epsilon: header.epsilon,
            grid: header.grid,
            budget: header.budget,
            max_entries: header.max_entries,
            workers,
        };
        let mut rows = Vec::with_capacity(header.entries);
        for (i, line) in lines.enumerate() {
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            let row: Row = serde_json::from_str(&line).map_err(|e| parse_err(i + 2, &e))?;
            let key = u128::from_str_radix(&row.key, 16).map_err(|e| parse_err(i + 2, &e))?;
            rows.push((StateKey::from_u128(key), row.depth, row.parent, row.mv));
        }
        if rows.len() != header.entries {
            return Err(parse_err(
                rows.len() + 2,
                &format!("expected {} entries, found {}", header.entries, rows.len()),
            ));
        }
        ComplexityTable::from_rows(reference, gs.clone(), params, &header.support, header.growth, &rows)
    }

    pub fn load(path: &Path, gs: &GateSet, workers: Option<usize>) -> Result<Self> {
        Self::read_jsonl(std::fs::File::open(path)?, gs, workers)
    }
}

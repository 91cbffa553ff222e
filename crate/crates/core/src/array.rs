//! The array data model: entries, the `(K, L', F, Z, S)` array itself,
//! scheme parameters, and the text/JSON exchange formats.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// A single cell of the array.
///
/// `Star` marks a packet index cached by the column's user. `Coded` marks a
/// packet the column's user still needs; it is delivered in broadcast slot
/// `slot`, transmitted by user `sender`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Entry {
    Star,
    Coded { slot: usize, sender: usize },
}

impl Entry {
    pub fn coded(slot: usize, sender: usize) -> Self {
        Entry::Coded { slot, sender }
    }

    pub fn is_star(&self) -> bool {
        matches!(self, Entry::Star)
    }

    pub fn slot(&self) -> Option<usize> {
        match *self {
            Entry::Star => None,
            Entry::Coded { slot, .. } => Some(slot),
        }
    }

    /// Shift the slot id by `offset`; stars are unchanged.
    pub fn shifted(self, offset: usize) -> Self {
        match self {
            Entry::Star => Entry::Star,
            Entry::Coded { slot, sender } => Entry::Coded {
                slot: slot + offset,
                sender,
            },
        }
    }
}

impl fmt::Display for Entry {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Entry::Star => f.write_str("*"),
            Entry::Coded { slot, sender } => write!(f, "{slot}^{sender}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DpdaError {
    #[error("line {line}: malformed header: {message}")]
    Header { line: usize, message: String },
    #[error("expected {expected} rows, found {found}")]
    RowCount { expected: usize, found: usize },
    #[error("row {row}: expected {expected} columns, found {found}")]
    ColumnCount {
        row: usize,
        expected: usize,
        found: usize,
    },
    #[error("row {row}, column {col}: malformed token {token:?}")]
    BadToken {
        row: usize,
        col: usize,
        token: String,
    },
    #[error("row {row}, column {col}: slot {slot} is not below S={s}")]
    SlotOutOfRange {
        row: usize,
        col: usize,
        slot: usize,
        s: usize,
    },
    #[error("row {row}, column {col}: sender {sender} is not below K={k}")]
    SenderOutOfRange {
        row: usize,
        col: usize,
        sender: usize,
        k: usize,
    },
    #[error(
        "row {row}, column {col}: slot {slot} has sender {sender}, but row {first_row}, \
         column {first_col} gives it sender {first_sender}"
    )]
    ConflictingSender {
        row: usize,
        col: usize,
        slot: usize,
        sender: usize,
        first_row: usize,
        first_col: usize,
        first_sender: usize,
    },
    #[error("dimension {name} must be at least 1")]
    ZeroDimension { name: &'static str },
    #[error("invalid JSON: {0}")]
    Json(String),
}

/// A `(K, L', F, Z, S)` D2D placement delivery array.
///
/// The grid has exactly `L'·F` rows and `K` columns. Every coded entry has
/// `slot < S` and `sender < K`, and each slot has one sender throughout the
/// array. These structural invariants are enforced on construction; the
/// combinatorial conditions C0–C4 are checked by [`crate::validate`].
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Dpda {
    k: usize,
    lp: usize,
    f: usize,
    z: usize,
    s: usize,
    grid: Vec<Entry>,
}

impl Dpda {
    /// Builds an array from a row-major grid.
    pub fn new(
        k: usize,
        lp: usize,
        f: usize,
        z: usize,
        s: usize,
        grid: Vec<Entry>,
    ) -> Result<Self, DpdaError> {
        for (name, v) in [("K", k), ("L'", lp), ("F", f)] {
            if v == 0 {
                return Err(DpdaError::ZeroDimension { name });
            }
        }
        let rows = lp * f;
        if grid.len() != rows * k {
            // Report the first short/long row when the total is off.
            if grid.len().is_multiple_of(k) {
                return Err(DpdaError::RowCount {
                    expected: rows,
                    found: grid.len() / k,
                });
            }
            return Err(DpdaError::ColumnCount {
                row: grid.len() / k,
                expected: k,
                found: grid.len() % k,
            });
        }
        let mut senders: BTreeMap<usize, (usize, usize, usize)> = BTreeMap::new();
        for (idx, entry) in grid.iter().enumerate() {
            let (row, col) = (idx / k, idx % k);
            if let Entry::Coded { slot, sender } = *entry {
                if slot >= s {
                    return Err(DpdaError::SlotOutOfRange { row, col, slot, s });
                }
                if sender >= k {
                    return Err(DpdaError::SenderOutOfRange {
                        row,
                        col,
                        sender,
                        k,
                    });
                }
                match senders.get(&slot) {
                    Some(&(first_sender, first_row, first_col)) if first_sender != sender => {
                        return Err(DpdaError::ConflictingSender {
                            row,
                            col,
                            slot,
                            sender,
                            first_row,
                            first_col,
                            first_sender,
                        });
                    }
                    Some(_) => {}
                    None => {
                        senders.insert(slot, (sender, row, col));
                    }
                }
            }
        }
        Ok(Dpda {
            k,
            lp,
            f,
            z,
            s,
            grid,
        })
    }

    /// Builds an array from nested rows.
    pub fn from_rows(
        k: usize,
        lp: usize,
        f: usize,
        z: usize,
        s: usize,
        rows: Vec<Vec<Entry>>,
    ) -> Result<Self, DpdaError> {
        if rows.len() != lp * f {
            return Err(DpdaError::RowCount {
                expected: lp * f,
                found: rows.len(),
            });
        }
        for (row, r) in rows.iter().enumerate() {
            if r.len() != k {
                return Err(DpdaError::ColumnCount {
                    row,
                    expected: k,
                    found: r.len(),
                });
            }
        }
        Dpda::new(k, lp, f, z, s, rows.into_iter().flatten().collect())
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn lp(&self) -> usize {
        self.lp
    }

    pub fn f(&self) -> usize {
        self.f
    }

    pub fn z(&self) -> usize {
        self.z
    }

    pub fn s(&self) -> usize {
        self.s
    }

    /// Number of rows, `L'·F`.
    pub fn rows(&self) -> usize {
        self.lp * self.f
    }

    pub fn get(&self, row: usize, col: usize) -> Entry {
        self.grid[row * self.k + col]
    }

    pub fn row(&self, row: usize) -> &[Entry] {
        &self.grid[row * self.k..(row + 1) * self.k]
    }

    pub fn grid(&self) -> &[Entry] {
        &self.grid
    }

    /// Iterates `(row, col, entry)` in row-major order.
    pub fn cells(&self) -> impl Iterator<Item = (usize, usize, Entry)> + '_ {
        let k = self.k;
        self.grid
            .iter()
            .enumerate()
            .map(move |(i, e)| (i / k, i % k, *e))
    }

    /// The sender of each slot in `[0, S)`, or `None` for slots that never occur.
    pub fn slot_senders(&self) -> Vec<Option<usize>> {
        let mut out = vec![None; self.s];
        for e in &self.grid {
            if let Entry::Coded { slot, sender } = *e {
                out[slot] = Some(sender);
            }
        }
        out
    }

    /// Returns a copy with the given cell replaced, re-checking structure.
    pub fn with_entry(&self, row: usize, col: usize, entry: Entry) -> Result<Self, DpdaError> {
        let mut grid = self.grid.clone();
        grid[row * self.k + col] = entry;
        Dpda::new(self.k, self.lp, self.f, self.z, self.s, grid)
    }

    /// Returns a copy with different header parameters `Z` and `S`.
    pub fn with_header(&self, z: usize, s: usize) -> Result<Self, DpdaError> {
        Dpda::new(self.k, self.lp, self.f, z, s, self.grid.clone())
    }

    /// Applies a symmetry action.
    ///
    /// Output row `i` is input row `row_perm[i]`, output column `j` is input
    /// column `col_perm[j]`, senders are relabelled through the inverse column
    /// map so that they still name the same user, and slot `s` becomes
    /// `slot_map[s]`.
    ///
    /// # Panics
    /// Panics if any argument is not a permutation of the right length.
    pub fn permuted(&self, row_perm: &[usize], col_perm: &[usize], slot_map: &[usize]) -> Self {
        assert_eq!(row_perm.len(), self.rows());
        assert_eq!(col_perm.len(), self.k);
        assert_eq!(slot_map.len(), self.s);
        let mut col_inv = vec![usize::MAX; self.k];
        for (new, &old) in col_perm.iter().enumerate() {
            col_inv[old] = new;
        }
        assert!(
            col_inv.iter().all(|&c| c != usize::MAX),
            "col_perm is not a permutation"
        );
        let mut grid = Vec::with_capacity(self.grid.len());
        for &r in row_perm {
            for &c in col_perm {
                grid.push(match self.get(r, c) {
                    Entry::Star => Entry::Star,
                    Entry::Coded { slot, sender } => Entry::Coded {
                        slot: slot_map[slot],
                        sender: col_inv[sender],
                    },
                });
            }
        }
        Dpda::new(self.k, self.lp, self.f, self.z, self.s, grid)
            .expect("symmetry action preserves structure")
    }

    /// Serializes to the canonical text format.
    pub fn to_text(&self) -> String {
        let mut out = format!(
            "DPDA K={} L'={} F={} Z={} S={}\n",
            self.k, self.lp, self.f, self.z, self.s
        );
        for r in 0..self.rows() {
            let line: Vec<String> = self.row(r).iter().map(Entry::to_string).collect();
            out.push_str(&line.join(" "));
            out.push('\n');
        }
        out
    }

    /// Parses the text format.
    pub fn parse(text: &str) -> Result<Self, DpdaError> {
        let mut lines = text
            .lines()
            .enumerate()
            .filter(|(_, l)| !l.trim().is_empty());
        let (hline, header) = lines.next().ok_or(DpdaError::Header {
            line: 1,
            message: "empty input".into(),
        })?;
        let [k, lp, f, z, s] = parse_header(header).map_err(|message| DpdaError::Header {
            line: hline + 1,
            message,
        })?;
        if k == 0 || lp == 0 || f == 0 {
            return Err(DpdaError::Header {
                line: hline + 1,
                message: "K, L' and F must be at least 1".into(),
            });
        }
        let mut grid = Vec::with_capacity(lp * f * k);
        let mut nrows = 0;
        for (row, (_, line)) in lines.enumerate() {
            let tokens: Vec<&str> = line.split_whitespace().collect();
            if tokens.len() != k {
                return Err(DpdaError::ColumnCount {
                    row,
                    expected: k,
                    found: tokens.len(),
                });
            }
            for (col, tok) in tokens.into_iter().enumerate() {
                grid.push(parse_token(tok).ok_or_else(|| DpdaError::BadToken {
                    row,
                    col,
                    token: tok.to_string(),
                })?);
            }
            nrows += 1;
        }
        if nrows != lp * f {
            return Err(DpdaError::RowCount {
                expected: lp * f,
                found: nrows,
            });
        }
        Dpda::new(k, lp, f, z, s, grid)
    }

    pub fn to_json_value(&self) -> DpdaJson {
        DpdaJson {
            k: self.k,
            lp: self.lp,
            f: self.f,
            z: self.z,
            s: self.s,
            grid: (0..self.rows())
                .map(|r| self.row(r).iter().map(Entry::to_string).collect())
                .collect(),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(&self.to_json_value()).expect("array JSON is always serializable")
    }

    pub fn from_json(text: &str) -> Result<Self, DpdaError> {
        let raw: DpdaJson =
            serde_json::from_str(text).map_err(|e| DpdaError::Json(e.to_string()))?;
        raw.try_into()
    }

    /// Parses either format, choosing JSON when the input starts with `{`.
    pub fn parse_any(text: &str) -> Result<Self, DpdaError> {
        if text.trim_start().starts_with('{') {
            Dpda::from_json(text)
        } else {
            Dpda::parse(text)
        }
    }
}

impl fmt::Display for Dpda {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_text())
    }
}

/// JSON mirror of the text format.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DpdaJson {
    pub k: usize,
    pub lp: usize,
    pub f: usize,
    pub z: usize,
    pub s: usize,
    pub grid: Vec<Vec<String>>,
}

impl TryFrom<DpdaJson> for Dpda {
    type Error = DpdaError;

    fn try_from(raw: DpdaJson) -> Result<Self, DpdaError> {
        let mut rows = Vec::with_capacity(raw.grid.len());
        for (row, r) in raw.grid.iter().enumerate() {
            let mut out = Vec::with_capacity(r.len());
            for (col, tok) in r.iter().enumerate() {
                out.push(parse_token(tok).ok_or_else(|| DpdaError::BadToken {
                    row,
                    col,
                    token: tok.clone(),
                })?);
            }
            rows.push(out);
        }
        Dpda::from_rows(raw.k, raw.lp, raw.f, raw.z, raw.s, rows)
    }
}

fn parse_header(line: &str) -> Result<[usize; 5], String> {
    let mut parts = line.split_whitespace();
    if parts.next() != Some("DPDA") {
        return Err("expected leading `DPDA`".into());
    }
    let mut out = [0usize; 5];
    for (slot, key) in out.iter_mut().zip(["K", "L'", "F", "Z", "S"]) {
        let part = parts.next().ok_or_else(|| format!("missing {key}="))?;
        let value = part
            .strip_prefix(key)
            .and_then(|p| p.strip_prefix('='))
            .ok_or_else(|| format!("expected {key}=<int>, found {part:?}"))?;
        *slot = value
            .parse()
            .map_err(|_| format!("{key} is not a nonnegative integer: {value:?}"))?;
    }
    if let Some(extra) = parts.next() {
        return Err(format!("unexpected trailing field {extra:?}"));
    }
    Ok(out)
}

fn parse_token(tok: &str) -> Option<Entry> {
    if tok == "*" {
        return Some(Entry::Star);
    }
    let (slot, sender) = tok.split_once('^')?;
    let digits = |s: &str| !s.is_empty() && s.bytes().all(|b| b.is_ascii_digit());
    if !digits(slot) || !digits(sender) {
        return None;
    }
    Some(Entry::Coded {
        slot: slot.parse().ok()?,
        sender: sender.parse().ok()?,
    })
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ParamsError {
    #[error("Z·N = {zn} differs from F·M = {fm}")]
    Coupling { zn: u128, fm: u128 },
    #[error("L' = {lp} must satisfy 1 <= L' <= L = {l}")]
    BlockRange { lp: usize, l: usize },
    #[error("M·K = {mk} is below N = {n}")]
    Infeasible { mk: u128, n: usize },
    #[error("{0} must be at least 1")]
    Zero(&'static str),
}

/// Parameters of an `F`-division `(K, M, N, L, L')` coded caching scheme
/// realized by a `(K, L', F, Z, S)` array.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SchemeParams {
    pub k: usize,
    pub n: usize,
    pub m: usize,
    pub l: usize,
    pub lp: usize,
    pub f: usize,
    pub z: usize,
    pub s: usize,
}

impl SchemeParams {
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        k: usize,
        n: usize,
        m: usize,
        l: usize,
        lp: usize,
        f: usize,
        z: usize,
        s: usize,
    ) -> Result<Self, ParamsError> {
        for (name, v) in [("K", k), ("N", n), ("L", l), ("F", f)] {
            if v == 0 {
                return Err(ParamsError::Zero(name));
            }
        }
        let (zn, fm) = (z as u128 * n as u128, f as u128 * m as u128);
        if zn != fm {
            return Err(ParamsError::Coupling { zn, fm });
        }
        if lp == 0 || lp > l {
            return Err(ParamsError::BlockRange { lp, l });
        }
        let mk = m as u128 * k as u128;
        if mk < n as u128 {
            return Err(ParamsError::Infeasible { mk, n });
        }
        Ok(SchemeParams {
            k,
            n,
            m,
            l,
            lp,
            f,
            z,
            s,
        })
    }
}

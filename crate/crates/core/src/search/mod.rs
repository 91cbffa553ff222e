//! Exhaustive backtracking over single-band arrays.
//!
//! The search first fixes a star pattern (exactly `Z` stars per column), then
//! assigns slots to the coded cells in row-major order. Each coded cell either
//! joins an existing slot it is compatible with (C4) or opens a new one. A
//! slot tracks the columns that are stars in every row it touches; C3 holds
//! iff that set stays non-empty, and the sender is picked from it only when
//! the witness is written out. Slot ids are handed out in order of first
//! appearance, so relabelled copies of one assignment are never visited twice.
//!
//! With symmetry pruning on, only star patterns whose columns and rows are
//! both in non-decreasing lexicographic order are extended. The row-major
//! lexicographically least member of every orbit under row and column
//! permutations has that shape, so no orbit is lost.

mod canon;

use serde::{Serialize, Serializer};
use thiserror::Error;

use crate::array::{Dpda, Entry};

pub use canon::{canonicalize, canonicalize_with_budget, CanonError, DEFAULT_CANON_BUDGET};

pub const DEFAULT_CELLS_LIMIT: usize = 24;
const MAX_K: usize = 64;
const MAX_F: usize = 30;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SearchError {
    #[error("F·K = {cells} cells exceeds the search limit of {limit}")]
    CellsLimit { cells: usize, limit: usize },
    #[error("search needs K >= 2 and 1 <= Z <= F (got K={k}, F={f}, Z={z})")]
    Params { k: usize, f: usize, z: usize },
    #[error("search supports K <= {MAX_K} and F <= {MAX_F} (got K={k}, F={f})")]
    Width { k: usize, f: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SearchOptions {
    pub cells_limit: usize,
    pub symmetry_pruning: bool,
}

impl Default for SearchOptions {
    fn default() -> Self {
        SearchOptions {
            cells_limit: DEFAULT_CELLS_LIMIT,
            symmetry_pruning: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SearchResult {
    pub feasible: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub minimal_s: Option<usize>,
    #[serde(
        serialize_with = "ser_witness",
        skip_serializing_if = "Option::is_none"
    )]
    pub witness: Option<Dpda>,
    pub nodes_explored: u64,
    pub exhausted: bool,
}

fn ser_witness<S: Serializer>(w: &Option<Dpda>, s: S) -> Result<S::Ok, S::Error> {
    match w {
        Some(p) => s.serialize_str(&p.to_text()),
        None => s.serialize_none(),
    }
}

impl SearchResult {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("result is serializable")
    }
}

fn check_params(k: usize, f: usize, z: usize, opts: &SearchOptions) -> Result<(), SearchError> {
    if k < 2 || z == 0 || z > f {
        return Err(SearchError::Params { k, f, z });
    }
    if k > MAX_K || f > MAX_F {
        return Err(SearchError::Width { k, f });
    }
    if f * k > opts.cells_limit {
        return Err(SearchError::CellsLimit {
            cells: f * k,
            limit: opts.cells_limit,
        });
    }
    Ok(())
}

/// Is there a `(K, 1, F, Z, S)` array with exactly `S` slots?
pub fn exists_dpda(
    k: usize,
    f: usize,
    z: usize,
    s: usize,
    opts: &SearchOptions,
) -> Result<SearchResult, SearchError> {
    check_params(k, f, z, opts)?;
    let coded_cells = (f - z) * k;
    if s > coded_cells {
        // Every slot needs at least one cell.
        return Ok(SearchResult {
            feasible: false,
            minimal_s: None,
            witness: None,
            nodes_explored: 0,
            exhausted: true,
        });
    }
    let mut engine = Engine::new(k, f, z, *opts, s + 1, true);
    engine.run();
    let witness = engine.best.map(|(_, slots)| {
        let slots = split_to(slots, s);
        finish_witness(k, f, z, &slots)
    });
    Ok(SearchResult {
        feasible: witness.is_some(),
        minimal_s: witness.as_ref().map(Dpda::s),
        witness,
        nodes_explored: engine.nodes,
        exhausted: !engine.stopped,
    })
}

/// Smallest `S <= s_max` for which a `(K, 1, F, Z, S)` array exists.
pub fn search_min_s(
    k: usize,
    f: usize,
    z: usize,
    s_max: usize,
    opts: &SearchOptions,
) -> Result<SearchResult, SearchError> {
    check_params(k, f, z, opts)?;
    let mut engine = Engine::new(k, f, z, *opts, s_max + 1, false);
    engine.run();
    let witness = engine
        .best
        .map(|(_, slots)| finish_witness(k, f, z, &slots));
    Ok(SearchResult {
        feasible: witness.is_some(),
        minimal_s: witness.as_ref().map(Dpda::s),
        witness,
        nodes_explored: engine.nodes,
        exhausted: true,
    })
}

/// A slot: the columns that may send it and the cells holding it.
#[derive(Debug, Clone)]
struct Slot {
    senders: u64,
    cells: Vec<(usize, usize)>,
}

struct Engine {
    k: usize,
    f: usize,
    opts: SearchOptions,
    /// Column star masks in increasing lexicographic order of their coded
    /// indicator vectors (row 0 most significant).
    masks: Vec<u32>,
    /// Star pattern under construction, one mask per column (bit r = star in row r).
    columns: Vec<u32>,
    /// Star columns of each row for the current pattern.
    row_stars: Vec<u64>,
    /// Solutions must use strictly fewer slots than this.
    bound: usize,
    stop_at_first: bool,
    stopped: bool,
    best: Option<(Vec<u32>, Vec<Slot>)>,
    nodes: u64,
}

impl Engine {
    fn new(
        k: usize,
        f: usize,
        z: usize,
        opts: SearchOptions,
        bound: usize,
        stop_at_first: bool,
    ) -> Self {
        let full = (1u32 << f) - 1;
        let mut masks: Vec<u32> = (0..=full)
            .filter(|m| m.count_ones() as usize == z)
            .collect();
        // Coded indicator of row r sits at bit (F-1-r); sort by that value.
        masks.sort_by_key(|&m| coded_key(m, f));
        Engine {
            k,
            f,
            opts,
            masks,
            columns: Vec::with_capacity(k),
            row_stars: vec![0; f],
            bound,
            stop_at_first,
            stopped: false,
            best: None,
            nodes: 0,
        }
    }

    fn run(&mut self) {
        self.choose_column(0);
    }

    fn is_star(&self, row: usize, col: usize) -> bool {
        self.columns[col] >> row & 1 == 1
    }

    /// Row `r` restricted to the columns chosen so far, as a coded indicator
    /// with column 0 most significant.
    fn row_prefix(&self, row: usize) -> u64 {
        self.columns
            .iter()
            .fold(0u64, |acc, m| acc << 1 | u64::from(m >> row & 1 == 0))
    }

    fn choose_column(&mut self, col: usize) {
        if self.stopped {
            return;
        }
        self.nodes += 1;
        if col == self.k {
            self.assign_pattern();
            return;
        }
        let start = if self.opts.symmetry_pruning && col > 0 {
            let prev = self.columns[col - 1];
            self.masks
                .iter()
                .position(|&m| m == prev)
                .expect("mask listed")
        } else {
            0
        };
        for i in start..self.masks.len() {
            self.columns.push(self.masks[i]);
            let rows_ok = !self.opts.symmetry_pruning
                || (1..self.f).all(|r| self.row_prefix(r - 1) <= self.row_prefix(r));
            if rows_ok {
                self.choose_column(col + 1);
            }
            self.columns.pop();
            if self.stopped {
                return;
            }
        }
    }

    fn assign_pattern(&mut self) {
        for r in 0..self.f {
            self.row_stars[r] = (0..self.k)
                .filter(|&c| self.is_star(r, c))
                .fold(0, |m, c| m | 1 << c);
        }
        // C3: a row with a coded cell needs a star for its sender.
        if self.row_stars.contains(&0) {
            return;
        }
        let cells: Vec<(usize, usize)> = (0..self.f)
            .flat_map(|r| (0..self.k).map(move |c| (r, c)))
            .filter(|&(r, c)| !self.is_star(r, c))
            .collect();
        let mut slots = Vec::new();
        self.assign(&cells, 0, &mut slots);
    }

    fn compatible(&self, slot: &Slot, row: usize, col: usize) -> bool {
        slot.senders & self.row_stars[row] != 0
            && slot
                .cells
                .iter()
                .all(|&(r, c)| r != row && c != col && self.is_star(r, col) && self.is_star(row, c))
    }

    fn assign(&mut self, cells: &[(usize, usize)], idx: usize, slots: &mut Vec<Slot>) {
        if self.stopped {
            return;
        }
        self.nodes += 1;
        if slots.len() >= self.bound {
            return;
        }
        if idx == cells.len() {
            self.bound = slots.len();
            self.best = Some((self.columns.clone(), slots.clone()));
            if self.stop_at_first {
                self.stopped = true;
            }
            return;
        }
        let (row, col) = cells[idx];
        for s in 0..slots.len() {
            if self.compatible(&slots[s], row, col) {
                let senders = slots[s].senders;
                slots[s].senders &= self.row_stars[row];
                slots[s].cells.push((row, col));
                self.assign(cells, idx + 1, slots);
                slots[s].cells.pop();
                slots[s].senders = senders;
                if self.stopped {
                    return;
                }
            }
        }
        if slots.len() + 1 >= self.bound {
            return;
        }
        slots.push(Slot {
            senders: self.row_stars[row],
            cells: vec![(row, col)],
        });
        self.assign(cells, idx + 1, slots);
        slots.pop();
    }
}

fn coded_key(mask: u32, f: usize) -> u32 {
    (0..f).fold(0, |acc, r| acc << 1 | u32::from(mask >> r & 1 == 0))
}

/// Splits multi-cell slots until there are exactly `target` slots. Moving one
/// cell of a slot into a fresh slot with the same sender keeps C3 and C4.
fn split_to(mut slots: Vec<Slot>, target: usize) -> Vec<Slot> {
    while slots.len() < target {
        let i = slots
            .iter()
            .position(|s| s.cells.len() > 1)
            .expect("enough cells to split");
        let cell = slots[i].cells.pop().expect("non-empty");
        slots.push(Slot {
            senders: slots[i].senders,
            cells: vec![cell],
        });
    }
    slots
}

fn finish_witness(k: usize, f: usize, z: usize, slots: &[Slot]) -> Dpda {
    let mut grid = vec![Entry::Star; f * k];
    for (id, slot) in slots.iter().enumerate() {
        for &(r, c) in &slot.cells {
            grid[r * k + c] = Entry::coded(id, slot.senders.trailing_zeros() as usize);
        }
    }
    let raw =
        Dpda::new(k, 1, f, z, slots.len(), grid).expect("search output is structurally sound");
    // Canonical form when it fits the budget; otherwise first-appearance labels.
    canonicalize(&raw).unwrap_or_else(|_| relabel_first_appearance(&raw))
}

/// Renumbers slots in row-major order of first appearance.
pub fn relabel_first_appearance(p: &Dpda) -> Dpda {
    let mut map = vec![usize::MAX; p.s()];
    let mut next = 0;
    for e in p.grid() {
        if let Some(s) = e.slot() {
            if map[s] == usize::MAX {
                map[s] = next;
                next += 1;
            }
        }
    }
    for m in map.iter_mut().filter(|m| **m == usize::MAX) {
        *m = next;
        next += 1;
    }
    let rows: Vec<usize> = (0..p.rows()).collect();
    let cols: Vec<usize> = (0..p.k()).collect();
    p.permuted(&rows, &cols, &map)
}

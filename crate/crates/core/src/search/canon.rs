//! Canonical representative of an array under row, column and slot
//! relabelling.
//!
//! Entries are ordered `Star < Coded`, coded entries by `(slot, sender)`. The
//! canonical form is the member of the orbit whose row-major entry sequence
//! is least in that order. For each column permutation the rows are placed
//! greedily: the next row is the one whose encoding (with unseen slots
//! numbered in order of appearance) is least, branching only on ties.

use thiserror::Error;

use crate::array::{Dpda, Entry};

pub const MAX_CANON_COLUMNS: usize = 8;
pub const DEFAULT_CANON_BUDGET: u64 = 100_000;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CanonError {
    #[error("canonical form supports K <= {max}, got K={k}")]
    TooManyColumns { k: usize, max: usize },
    #[error("canonical form needs L'=1, got L'={0}")]
    Bands(usize),
    #[error("canonical form gave up after {0} nodes")]
    Budget(u64),
}

pub fn canonicalize(p: &Dpda) -> Result<Dpda, CanonError> {
    canonicalize_with_budget(p, DEFAULT_CANON_BUDGET)
}

pub fn canonicalize_with_budget(p: &Dpda, budget: u64) -> Result<Dpda, CanonError> {
    if p.lp() != 1 {
        return Err(CanonError::Bands(p.lp()));
    }
    if p.k() > MAX_CANON_COLUMNS {
        return Err(CanonError::TooManyColumns {
            k: p.k(),
            max: MAX_CANON_COLUMNS,
        });
    }
    let mut state = Canon {
        p,
        col_perm: (0..p.k()).collect(),
        col_inv: (0..p.k()).collect(),
        best: None,
        nodes: 0,
        budget,
    };
    loop {
        for (new, &old) in state.col_perm.iter().enumerate() {
            state.col_inv[old] = new;
        }
        let mut used = vec![false; p.rows()];
        let mut labels = vec![usize::MAX; p.s()];
        let mut out = Vec::with_capacity(p.grid().len());
        state.place(&mut used, &mut labels, 0, &mut out)?;
        if !next_permutation(&mut state.col_perm) {
            break;
        }
    }
    let grid = state.best.expect("at least one ordering completes");
    Ok(Dpda::new(p.k(), 1, p.f(), p.z(), p.s(), grid).expect("relabelling keeps structure"))
}

struct Canon<'a> {
    p: &'a Dpda,
    col_perm: Vec<usize>,
    col_inv: Vec<usize>,
    best: Option<Vec<Entry>>,
    nodes: u64,
    budget: u64,
}

impl Canon<'_> {
    /// Encodes input row `r` under the current column permutation, giving
    /// unseen slots labels `next, next+1, ...` in order of appearance.
    fn encode(&self, r: usize, labels: &[usize], mut next: usize) -> Vec<Entry> {
        let mut fresh: Vec<(usize, usize)> = Vec::new();
        self.col_perm
            .iter()
            .map(|&c| match self.p.get(r, c) {
                Entry::Star => Entry::Star,
                Entry::Coded { slot, sender } => {
                    let label = if labels[slot] != usize::MAX {
                        labels[slot]
                    } else if let Some(&(_, l)) = fresh.iter().find(|(s, _)| *s == slot) {
                        l
                    } else {
                        fresh.push((slot, next));
                        next += 1;
                        next - 1
                    };
                    Entry::coded(label, self.col_inv[sender])
                }
            })
            .collect()
    }

    fn place(
        &mut self,
        used: &mut [bool],
        labels: &mut [usize],
        next: usize,
        out: &mut Vec<Entry>,
    ) -> Result<(), CanonError> {
        self.nodes += 1;
        if self.nodes > self.budget {
            return Err(CanonError::Budget(self.budget));
        }
        let k = self.p.k();
        let depth = out.len() / k;
        if depth == used.len() {
            if self
                .best
                .as_ref()
                .is_none_or(|b| out.as_slice() < b.as_slice())
            {
                self.best = Some(out.clone());
            }
            return Ok(());
        }
        let candidates: Vec<(usize, Vec<Entry>)> = (0..used.len())
            .filter(|&r| !used[r])
            .map(|r| (r, self.encode(r, labels, next)))
            .collect();
        let least = candidates
            .iter()
            .map(|(_, e)| e)
            .min()
            .expect("a row remains")
            .clone();
        for (r, enc) in candidates.iter().filter(|(_, e)| *e == least) {
            // `best` may have improved in a sibling branch.
            if let Some(best) = &self.best {
                let end = (depth + 1) * k;
                let prefix = out.iter().chain(enc.iter());
                if prefix.cmp(best[..end].iter()) == std::cmp::Ordering::Greater {
                    return Ok(());
                }
            }
            let mut assigned = Vec::new();
            let mut after = next;
            for &c in &self.col_perm {
                if let Some(s) = self.p.get(*r, c).slot() {
                    if labels[s] == usize::MAX {
                        labels[s] = after;
                        after += 1;
                        assigned.push(s);
                    }
                }
            }
            used[*r] = true;
            out.extend_from_slice(enc);
            let res = self.place(used, labels, after, out);
            out.truncate(depth * k);
            used[*r] = false;
            for s in assigned {
                labels[s] = usize::MAX;
            }
            res?;
        }
        Ok(())
    }
}

fn next_permutation(v: &mut [usize]) -> bool {
    let n = v.len();
    if n < 2 {
        return false;
    }
    let mut i = n - 1;
    while i > 0 && v[i - 1] >= v[i] {
        i -= 1;
    }
    if i == 0 {
        return false;
    }
    let mut j = n - 1;
    while v[j] <= v[i - 1] {
        j -= 1;
    }
    v.swap(i - 1, j);
    v[i..].reverse();
    true
}

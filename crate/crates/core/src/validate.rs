//! Condition checks C0–C4, the minimal-rate conditions C2'/C5 and the
//! per-user broadcast count law.
//!
//! Every check is verdict-valued: a failing check carries the first violating
//! coordinates in row-major scan order.

use serde::Serialize;

use crate::array::{Dpda, Entry};

/// Coordinates that demonstrate a violated condition.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Witness {
    /// Column `col` has a star in `row` but not in `other_row`, and the two rows
    /// are congruent modulo `F`.
    Period {
        col: usize,
        row: usize,
        other_row: usize,
    },
    /// Column `col` holds `found` stars in its first `F` rows.
    StarCount {
        col: usize,
        found: usize,
        expected: usize,
    },
    /// Slot `slot` never occurs.
    MissingSlot { slot: usize },
    /// The coded entry at (`row`, `col`) has a sender whose column is not a star.
    SenderNotCached {
        row: usize,
        col: usize,
        sender: usize,
    },
    /// Two occurrences of `slot` at the given cells.
    Pair {
        slot: usize,
        first: (usize, usize),
        second: (usize, usize),
    },
    /// `slot` occurs with two different senders.
    Sender {
        slot: usize,
        first: (usize, usize),
        second: (usize, usize),
    },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Verdict {
    pub holds: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness: Option<Witness>,
}

impl Verdict {
    fn pass() -> Self {
        Verdict {
            holds: true,
            witness: None,
        }
    }

    fn fail(w: Witness) -> Self {
        Verdict {
            holds: false,
            witness: Some(w),
        }
    }

    fn from_witness(w: Option<Witness>) -> Self {
        w.map_or_else(Verdict::pass, Verdict::fail)
    }
}

/// Counting data gathered alongside the verdicts.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Diagnostics {
    /// Occurrences of each slot in `[0, S)`.
    pub slot_occurrences: Vec<usize>,
    /// Number of coded entries in each row.
    pub row_coded_counts: Vec<usize>,
    /// Number of stars in each row.
    pub row_star_counts: Vec<usize>,
    /// Number of stars in each column, over all rows.
    pub column_star_counts: Vec<usize>,
    /// Number of distinct slots each user transmits.
    pub broadcast_counts: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ValidationReport {
    pub c0: Verdict,
    pub c1: Verdict,
    pub c2: Verdict,
    pub c3: Verdict,
    pub c4a: Verdict,
    pub c4b: Verdict,
    pub unique_sender: Verdict,
    pub slot_contiguity: Verdict,
    pub diagnostics: Diagnostics,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.verdicts().iter().all(|(_, v)| v.holds)
    }

    /// Named verdicts in report order.
    pub fn verdicts(&self) -> [(&'static str, &Verdict); 8] {
        [
            ("C0", &self.c0),
            ("C1", &self.c1),
            ("C2", &self.c2),
            ("C3", &self.c3),
            ("C4a", &self.c4a),
            ("C4b", &self.c4b),
            ("unique-sender", &self.unique_sender),
            ("slot-contiguity", &self.slot_contiguity),
        ]
    }

    /// Name of the first failing condition, if any.
    pub fn first_failure(&self) -> Option<&'static str> {
        self.verdicts()
            .iter()
            .find(|(_, v)| !v.holds)
            .map(|(name, _)| *name)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report is serializable")
    }
}

pub fn check_c0(p: &Dpda) -> Verdict {
    let f = p.f();
    for col in 0..p.k() {
        for h in 0..f {
            let band_rows = (0..p.lp()).map(|b| b * f + h);
            let mut star_row = None;
            let mut coded_row = None;
            for r in band_rows {
                if p.get(r, col).is_star() {
                    star_row.get_or_insert(r);
                } else {
                    coded_row.get_or_insert(r);
                }
            }
            if let (Some(row), Some(other_row)) = (star_row, coded_row) {
                return Verdict::fail(Witness::Period {
                    col,
                    row,
                    other_row,
                });
            }
        }
    }
    Verdict::pass()
}

pub fn check_c1(p: &Dpda) -> Verdict {
    for col in 0..p.k() {
        let found = (0..p.f()).filter(|&r| p.get(r, col).is_star()).count();
        if found != p.z() {
            return Verdict::fail(Witness::StarCount {
                col,
                found,
                expected: p.z(),
            });
        }
    }
    Verdict::pass()
}

pub fn check_c2(p: &Dpda) -> Verdict {
    let occ = slot_occurrences(p);
    Verdict::from_witness(
        occ.iter()
            .position(|&n| n == 0)
            .map(|slot| Witness::MissingSlot { slot }),
    )
}

pub fn check_c3(p: &Dpda) -> Verdict {
    for (row, col, e) in p.cells() {
        if let Entry::Coded { sender, .. } = e {
            if !p.get(row, sender).is_star() {
                return Verdict::fail(Witness::SenderNotCached { row, col, sender });
            }
        }
    }
    Verdict::pass()
}

/// Occurrence cells of every slot, in row-major order.
fn slot_cells(p: &Dpda) -> Vec<Vec<(usize, usize)>> {
    let mut cells = vec![Vec::new(); p.s()];
    for (row, col, e) in p.cells() {
        if let Some(slot) = e.slot() {
            cells[slot].push((row, col));
        }
    }
    cells
}

fn c4_witnesses(p: &Dpda) -> (Option<Witness>, Option<Witness>) {
    let mut a = None;
    let mut b = None;
    for (slot, cells) in slot_cells(p).iter().enumerate() {
        for (i, &(r1, c1)) in cells.iter().enumerate() {
            for &(r2, c2) in &cells[i + 1..] {
                let pair = Witness::Pair {
                    slot,
                    first: (r1, c1),
                    second: (r2, c2),
                };
                if r1 == r2 || c1 == c2 {
                    a.get_or_insert(pair);
                } else if !(p.get(r1, c2).is_star() && p.get(r2, c1).is_star()) {
                    b.get_or_insert(pair);
                }
            }
        }
    }
    (a, b)
}

/// C4a and C4b combined.
pub fn check_c4(p: &Dpda) -> Verdict {
    let (a, b) = c4_witnesses(p);
    Verdict::from_witness(a.or(b))
}

pub fn check_c4a(p: &Dpda) -> Verdict {
    Verdict::from_witness(c4_witnesses(p).0)
}

pub fn check_c4b(p: &Dpda) -> Verdict {
    Verdict::from_witness(c4_witnesses(p).1)
}

fn check_unique_sender(p: &Dpda) -> Verdict {
    let mut first: Vec<Option<(usize, usize, usize)>> = vec![None; p.s()];
    for (row, col, e) in p.cells() {
        if let Entry::Coded { slot, sender } = e {
            match first[slot] {
                None => first[slot] = Some((sender, row, col)),
                Some((s0, r0, c0)) if s0 != sender => {
                    return Verdict::fail(Witness::Sender {
                        slot,
                        first: (r0, c0),
                        second: (row, col),
                    })
                }
                Some(_) => {}
            }
        }
    }
    Verdict::pass()
}

fn slot_occurrences(p: &Dpda) -> Vec<usize> {
    let mut occ = vec![0; p.s()];
    for e in p.grid() {
        if let Some(s) = e.slot() {
            occ[s] += 1;
        }
    }
    occ
}

/// Number of distinct slots with sender `k`, for each user `k`.
pub fn broadcast_counts(p: &Dpda) -> Vec<usize> {
    let mut m = vec![0; p.k()];
    for sender in p.slot_senders().into_iter().flatten() {
        m[sender] += 1;
    }
    m
}

pub fn diagnostics(p: &Dpda) -> Diagnostics {
    let mut row_coded = vec![0; p.rows()];
    let mut row_star = vec![0; p.rows()];
    let mut col_star = vec![0; p.k()];
    for (row, col, e) in p.cells() {
        if e.is_star() {
            row_star[row] += 1;
            col_star[col] += 1;
        } else {
            row_coded[row] += 1;
        }
    }
    Diagnostics {
        slot_occurrences: slot_occurrences(p),
        row_coded_counts: row_coded,
        row_star_counts: row_star,
        column_star_counts: col_star,
        broadcast_counts: broadcast_counts(p),
    }
}

pub fn validate(p: &Dpda) -> ValidationReport {
    let (a, b) = c4_witnesses(p);
    let c2 = check_c2(p);
    ValidationReport {
        c0: check_c0(p),
        c1: check_c1(p),
        c3: check_c3(p),
        c4a: Verdict::from_witness(a),
        c4b: Verdict::from_witness(b),
        unique_sender: check_unique_sender(p),
        slot_contiguity: c2.clone(),
        c2,
        diagnostics: diagnostics(p),
    }
}

/// Outcome of the minimal-rate test.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct RateOptimality {
    /// Every slot occurs exactly `KZ/F` times.
    pub c2prime: bool,
    /// Every row holds exactly `KZ/F` stars.
    pub c5: bool,
    pub rate_is_minimal: bool,
    /// `S·Z = L'·F·(F−Z)`, the equality form of the rate bound.
    pub rate_identity: bool,
}

/// `KZ/F` when it is an integer.
fn stars_per_row(p: &Dpda) -> Option<usize> {
    let kz = p.k() * p.z();
    kz.is_multiple_of(p.f()).then(|| kz / p.f())
}

pub fn check_rate_optimal(p: &Dpda) -> RateOptimality {
    let d = diagnostics(p);
    let (c2prime, c5) = match stars_per_row(p) {
        Some(t) => (
            d.slot_occurrences.iter().all(|&n| n == t),
            d.row_star_counts.iter().all(|&n| n == t),
        ),
        None => (false, false),
    };
    let rate_identity = p.z() > 0
        && p.z() <= p.f()
        && (p.s() * p.z()) as u128 == (p.lp() * p.f()) as u128 * (p.f() - p.z()) as u128;
    let rate_is_minimal = c2prime && c5;
    debug_assert!(
        !rate_is_minimal || rate_identity,
        "C2' and C5 hold but S·Z != L'·F·(F−Z)"
    );
    RateOptimality {
        c2prime,
        c5,
        rate_is_minimal,
        rate_identity,
    }
}

/// Checks `m_k·K·Z = L'·F·(F−Z)` for every user. `None` when the array is not
/// rate-minimal and the law does not apply.
pub fn check_broadcast_law(p: &Dpda) -> Option<bool> {
    if !check_rate_optimal(p).rate_is_minimal {
        return None;
    }
    let rhs = (p.lp() * p.f() * (p.f() - p.z())) as u128;
    Some(
        broadcast_counts(p)
            .iter()
            .all(|&m| (m * p.k() * p.z()) as u128 == rhs),
    )
}

/// Exact form of the rate lower bound: `S·Z >= L'·F·(F−Z)`.
pub fn satisfies_rate_bound(p: &Dpda) -> bool {
    p.z() <= p.f() && (p.s() * p.z()) as u128 >= (p.lp() * p.f()) as u128 * (p.f() - p.z()) as u128
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p4() -> Dpda {
        Dpda::parse(
            "DPDA K=4 L'=1 F=4 Z=2 S=4\n2^2 * * 1^1\n* 2^2 * 0^0\n3^3 * 1^1 *\n* 3^3 0^0 *\n",
        )
        .unwrap()
    }

    #[test]
    fn p4_all_pass() {
        let r = validate(&p4());
        assert!(r.is_valid(), "{r:?}");
        assert_eq!(r.diagnostics.slot_occurrences, vec![2, 2, 2, 2]);
        assert_eq!(r.diagnostics.broadcast_counts, vec![1, 1, 1, 1]);
        let opt = check_rate_optimal(&p4());
        assert!(opt.rate_is_minimal && opt.rate_identity);
        assert_eq!(check_broadcast_law(&p4()), Some(true));
    }

    #[test]
    fn c1_wrong_header() {
        let p = p4().with_header(3, 4).unwrap();
        assert_eq!(
            check_c1(&p),
            Verdict::fail(Witness::StarCount {
                col: 0,
                found: 2,
                expected: 3
            })
        );
    }

    #[test]
    fn c2_missing_slot() {
        let p = p4().with_header(2, 5).unwrap();
        assert_eq!(
            check_c2(&p),
            Verdict::fail(Witness::MissingSlot { slot: 4 })
        );
        assert!(!validate(&p).slot_contiguity.holds);
    }

    #[test]
    fn c3_sender_without_star() {
        // Move slot 1 to sender 0 in both occurrences; row 0 column 0 is 2^2.
        let grid: Vec<Entry> = p4()
            .grid()
            .iter()
            .map(|&e| match e {
                Entry::Coded { slot: 1, .. } => Entry::coded(1, 0),
                e => e,
            })
            .collect();
        let q = Dpda::new(4, 1, 4, 2, 4, grid).unwrap();
        assert_eq!(
            check_c3(&q),
            Verdict::fail(Witness::SenderNotCached {
                row: 0,
                col: 3,
                sender: 0
            })
        );
    }

    #[test]
    fn c3_vacuous_on_all_stars() {
        let p = Dpda::new(3, 1, 2, 2, 0, vec![Entry::Star; 6]).unwrap();
        assert!(check_c3(&p).holds);
        assert!(validate(&p).is_valid());
    }

    #[test]
    fn c4a_same_row() {
        let p = p4().with_entry(0, 0, Entry::coded(1, 1)).unwrap();
        let r = validate(&p);
        assert_eq!(
            r.c4a.witness,
            Some(Witness::Pair {
                slot: 1,
                first: (0, 0),
                second: (0, 3)
            })
        );
        assert!(!check_c4(&p).holds);
    }

    #[test]
    fn c4b_crossing() {
        // 2x2 crossing with a coded off-diagonal.
        let p = Dpda::parse("DPDA K=3 L'=1 F=2 Z=1 S=2\n0^2 1^2 *\n1^2 0^2 *\n").unwrap();
        let r = validate(&p);
        assert!(r.c4a.holds);
        assert_eq!(
            r.c4b.witness,
            Some(Witness::Pair {
                slot: 0,
                first: (0, 0),
                second: (1, 1)
            })
        );
    }

    #[test]
    fn rate_optimality_needs_integer_kz_over_f() {
        // K=2, F=3, Z=1: KZ/F is not an integer.
        let p = Dpda::parse("DPDA K=2 L'=1 F=3 Z=1 S=4\n* 0^0\n1^1 *\n2^1 3^0\n").unwrap();
        let opt = check_rate_optimal(&p);
        assert!(!opt.c2prime && !opt.c5 && !opt.rate_is_minimal);
        assert_eq!(check_broadcast_law(&p), None);
    }
}

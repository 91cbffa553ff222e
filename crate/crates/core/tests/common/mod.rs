//! Hand transcriptions of the printed arrays, shared by the test targets.
#![allow(dead_code)]

use dpda::{Dpda, Entry};
use rand::seq::SliceRandom;
use rand::Rng;

/// Parses one row of `*` and `s^k` tokens.
pub fn row(text: &str) -> Vec<Entry> {
    text.split_whitespace()
        .map(|tok| {
            if tok == "*" {
                return Entry::Star;
            }
            let (s, k) = tok.split_once('^').expect("token is * or s^k");
            Entry::coded(s.parse().unwrap(), k.parse().unwrap())
        })
        .collect()
}

pub fn array(k: usize, lp: usize, f: usize, z: usize, s: usize, rows: &[&str]) -> Dpda {
    Dpda::from_rows(k, lp, f, z, s, rows.iter().map(|r| row(r)).collect()).unwrap()
}

pub const P4_ROWS: [&str; 4] = ["2^2 * * 1^1", "* 2^2 * 0^0", "3^3 * 1^1 *", "* 3^3 0^0 *"];

pub fn p4() -> Dpda {
    array(4, 1, 4, 2, 4, &P4_ROWS)
}

pub fn p6() -> Dpda {
    array(
        6,
        1,
        12,
        8,
        6,
        &[
            "2^2 * * 1^1 * *",
            "* 2^2 * 0^0 * *",
            "3^3 * 1^1 * * *",
            "* 3^3 0^0 * * *",
            "4^4 * * * * 1^1",
            "* 4^4 * * * 0^0",
            "* * 4^4 * * 3^3",
            "* * * 4^4 * 2^2",
            "5^5 * * * 1^1 *",
            "* 5^5 * * 0^0 *",
            "* * 5^5 * 3^3 *",
            "* * * 5^5 2^2 *",
        ],
    )
}

pub fn p3() -> Dpda {
    array(3, 1, 3, 1, 6, &["* 0^0 1^0", "3^1 * 2^1", "4^2 5^2 *"])
}

pub fn p5() -> Dpda {
    array(
        5,
        1,
        15,
        9,
        10,
        &[
            "* 0^0 1^0 * *",
            "3^1 * 2^1 * *",
            "4^2 5^2 * * *",
            "6^3 * * * 2^1",
            "* 6^3 * * 4^2",
            "* * 6^3 * 0^0",
            "8^4 * * 2^1 *",
            "* 8^4 * 4^2 *",
            "* * 8^4 0^0 *",
            "7^3 * * * 5^2",
            "* 7^3 * * 1^0",
            "* * 7^3 * 3^1",
            "9^4 * * 5^2 *",
            "* 9^4 * 1^0 *",
            "* * 9^4 3^1 *",
        ],
    )
}

/// The two-band array stacking `P4` and its copy shifted by 4.
pub fn q_two_band() -> Dpda {
    array(
        4,
        2,
        4,
        2,
        8,
        &[
            "2^2 * * 1^1",
            "* 2^2 * 0^0",
            "3^3 * 1^1 *",
            "* 3^3 0^0 *",
            "6^2 * * 5^1",
            "* 6^2 * 4^0",
            "7^3 * 5^1 *",
            "* 7^3 4^0 *",
        ],
    )
}

/// The (3,1,6,4,3) array with minimal rate and minimal F.
pub fn k3_f6() -> Dpda {
    array(
        3,
        1,
        6,
        4,
        3,
        &[
            "* * 0^0", "* 0^0 *", "1^1 * *", "* * 1^1", "* 2^2 *", "2^2 * *",
        ],
    )
}

/// The q = 3 grid array. Tokens `bx/yz^k` stand for the super-combination
/// `((b,x),{y,z})` sent by user `k`, mapped to slot
/// `b·9 + x·3 + rank({y,z})` with ranks {0,1}=0, {0,2}=1, {1,2}=2.
pub const GRID3_ROWS: [&str; 9] = [
    "* 00/01^3 00/02^3 * 10/01^0 10/02^0",
    "00/01^3 * 00/12^3 * 11/01^1 11/02^1",
    "00/02^3 00/12^3 * * 12/01^2 12/02^2",
    "* 01/01^4 01/02^4 10/01^0 * 10/12^0",
    "01/01^4 * 01/12^4 11/01^1 * 11/12^1",
    "01/02^4 01/12^4 * 12/01^2 * 12/12^2",
    "* 02/01^5 02/02^5 10/02^0 10/12^0 *",
    "02/01^5 * 02/12^5 11/02^1 11/12^1 *",
    "02/02^5 02/12^5 * 12/02^2 12/12^2 *",
];

pub fn grid3() -> Dpda {
    let pair_rank = |p: &str| match p {
        "01" => 0,
        "02" => 1,
        "12" => 2,
        other => panic!("bad pair {other}"),
    };
    let rows = GRID3_ROWS
        .iter()
        .map(|r| {
            r.split_whitespace()
                .map(|tok| {
                    if tok == "*" {
                        return Entry::Star;
                    }
                    let (comb, k) = tok.split_once('^').unwrap();
                    let (bx, yz) = comb.split_once('/').unwrap();
                    let b = bx[..1].parse::<usize>().unwrap();
                    let x = bx[1..].parse::<usize>().unwrap();
                    Entry::coded(b * 9 + x * 3 + pair_rank(yz), k.parse().unwrap())
                })
                .collect()
        })
        .collect();
    Dpda::from_rows(6, 1, 9, 3, 18, rows).unwrap()
}

/// The JCM array for K = 4, t = 2, rows `(T, j)` with `j` outer. Tokens
/// `U^m` stand for `{U}^(m)`, mapped to slot `3·rank(U) + position of m in U`
/// with ranks {0,1,2}=0, {0,1,3}=1, {0,2,3}=2, {1,2,3}=3.
pub const JCM42_ROWS: [&str; 12] = [
    "* * 012^0 013^0",
    "* 012^0 * 023^0",
    "* 013^0 023^0 *",
    "012^1 * * 123^1",
    "013^1 * 123^1 *",
    "023^2 123^2 * *",
    "* * 012^1 013^1",
    "* 012^2 * 023^2",
    "* 013^3 023^3 *",
    "012^2 * * 123^2",
    "013^3 * 123^3 *",
    "023^3 123^3 * *",
];

pub fn jcm42() -> Dpda {
    let rank = |u: &str| match u {
        "012" => 0,
        "013" => 1,
        "023" => 2,
        "123" => 3,
        other => panic!("bad subset {other}"),
    };
    let rows = JCM42_ROWS
        .iter()
        .map(|r| {
            r.split_whitespace()
                .map(|tok| {
                    if tok == "*" {
                        return Entry::Star;
                    }
                    let (u, m) = tok.split_once('^').unwrap();
                    let pos = u.find(m).unwrap();
                    Entry::coded(3 * rank(u) + pos, m.parse().unwrap())
                })
                .collect()
        })
        .collect();
    Dpda::from_rows(4, 1, 12, 6, 12, rows).unwrap()
}

fn shuffled<R: Rng>(n: usize, rng: &mut R) -> Vec<usize> {
    let mut v: Vec<usize> = (0..n).collect();
    v.shuffle(rng);
    v
}

/// A random element of the symmetry group: one permutation of `[0, F)`
/// applied inside every band, a column permutation (senders follow their
/// columns) and a slot bijection.
pub fn random_action<R: Rng>(p: &Dpda, rng: &mut R) -> Dpda {
    let sigma = shuffled(p.f(), rng);
    let rows: Vec<usize> = (0..p.lp())
        .flat_map(|b| sigma.iter().map(move |&h| b * p.f() + h))
        .collect();
    p.permuted(&rows, &shuffled(p.k(), rng), &shuffled(p.s(), rng))
}

/// A structurally sound array of random shape and content, not necessarily
/// satisfying any condition.
pub fn random_array<R: Rng>(rng: &mut R) -> Dpda {
    let k = rng.gen_range(1..=6);
    let lp = rng.gen_range(1..=3);
    let f = rng.gen_range(1..=5);
    let z = rng.gen_range(0..=f);
    let s = rng.gen_range(0..=12);
    let senders: Vec<usize> = (0..s).map(|_| rng.gen_range(0..k)).collect();
    let grid = (0..lp * f * k)
        .map(|_| {
            if s == 0 || rng.gen_bool(0.4) {
                Entry::Star
            } else {
                let slot = rng.gen_range(0..s);
                Entry::coded(slot, senders[slot])
            }
        })
        .collect();
    Dpda::new(k, lp, f, z, s, grid).unwrap()
}

/// Every constructed or printed array small enough for property checks.
pub fn base_arrays() -> Vec<(String, Dpda)> {
    let mut out = vec![
        ("P3".to_string(), p3()),
        ("P4".to_string(), p4()),
        ("P5".to_string(), p5()),
        ("P6".to_string(), p6()),
        ("grid3".to_string(), grid3()),
        ("jcm42".to_string(), jcm42()),
        ("k3f6".to_string(), k3_f6()),
        ("Q".to_string(), q_two_band()),
    ];
    out.push(("grid2".to_string(), dpda::construct_grid(2).unwrap()));
    out.push(("jcm51".to_string(), dpda::construct_jcm(5, 1).unwrap()));
    out
}

/// Sorted columns in which each slot occurs.
pub fn slot_columns(p: &Dpda) -> Vec<Vec<usize>> {
    let mut cols = vec![Vec::new(); p.s()];
    for (_, c, e) in p.cells() {
        if let Entry::Coded { slot, .. } = e {
            cols[slot].push(c);
        }
    }
    for c in &mut cols {
        c.sort_unstable();
    }
    cols
}

fn all_but(k: usize, excluded: [usize; 2]) -> Vec<usize> {
    (0..k).filter(|c| !excluded.contains(c)).collect()
}

/// Even family: slot `s` is sent by user `s` and occurs in every column
/// except `{s, s+1}` (s even) or `{s−1, s}` (s odd). A coded entry in one of
/// the two newest columns sits in a row that is all stars over `[0, K−2)`
/// except column `s−1` (s odd) or `s+1` (s even).
pub fn even_exclusion(p: &Dpda) -> Result<(), String> {
    let k = p.k();
    for (s, cols) in slot_columns(p).into_iter().enumerate() {
        let excluded = if s % 2 == 0 { [s, s + 1] } else { [s - 1, s] };
        if cols != all_but(k, excluded) {
            return Err(format!("K={k}: slot {s} occurs in columns {cols:?}"));
        }
    }
    for (row, col, e) in p.cells() {
        let Entry::Coded { slot: s, sender } = e else {
            continue;
        };
        if sender != s {
            return Err(format!("K={k}: slot {s} sent by {sender}"));
        }
        if k > 4 && col >= k - 2 {
            let free = if s % 2 == 1 { s - 1 } else { s + 1 };
            if let Some(c) = (0..k - 2).find(|&c| c != free && !p.get(row, c).is_star()) {
                return Err(format!("K={k}: row {row} has a coded entry in column {c}"));
            }
        }
    }
    Ok(())
}

fn odd_excluded(s: usize) -> [usize; 2] {
    match s {
        0 | 5 => [0, 2],
        1 | 2 => [0, 1],
        3 | 4 => [1, 2],
        _ if (s / 2).is_multiple_of(2) => [s / 2 - 1, s / 2],
        _ => [s / 2, s / 2 + 1],
    }
}

fn odd_free(s: usize) -> usize {
    match s {
        2 | 5 => 0,
        1 | 4 => 1,
        0 | 3 => 2,
        _ if (s / 2) % 2 == 1 => s / 2 + 1,
        _ => s / 2 - 1,
    }
}

/// Odd family: slot `s` is sent by user `⌊s/2⌋` and avoids a fixed column
/// pair; a coded entry in one of the two newest columns sits in a row that is
/// all stars over `[0, K−2)` except one column.
pub fn odd_exclusion(p: &Dpda) -> Result<(), String> {
    let k = p.k();
    for (s, cols) in slot_columns(p).into_iter().enumerate() {
        if cols != all_but(k, odd_excluded(s)) {
            return Err(format!("K={k}: slot {s} occurs in columns {cols:?}"));
        }
    }
    for (row, col, e) in p.cells() {
        let Entry::Coded { slot: s, sender } = e else {
            continue;
        };
        if sender != s / 2 {
            return Err(format!("K={k}: slot {s} sent by {sender}"));
        }
        if k > 3 && col >= k - 2 {
            let free = odd_free(s);
            if let Some(c) = (0..k - 2).find(|&c| c != free && !p.get(row, c).is_star()) {
                return Err(format!("K={k}: row {row} has a coded entry in column {c}"));
            }
        }
    }
    Ok(())
}

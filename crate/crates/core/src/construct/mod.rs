//! Deterministic builders for the four array families and the `L'`-lift.
//!
//! * [`construct_jcm`]: the baseline scheme for any `1 <= t < K`.
//! * [`construct_grid`]: `Z/F = 2/K` with `K = 2q`, `F = q²`.
//! * [`construct_even`]: `Z/F = (K−2)/K` with `K = 2q`, `F = K(K−2)/2`.
//! * [`construct_odd`]: `Z/F = (K−2)/K` with `K = 2q+1`, `F = K(K−2)`.

mod subset;

use thiserror::Error;

use crate::array::{Dpda, Entry};

pub use subset::{
    binomial, rank_within, subset_rank, subset_unrank, subsets, unrank_within, SubsetError,
};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ConstructError {
    #[error("{family} construction needs q >= {min}, got {q}")]
    Base {
        family: &'static str,
        q: usize,
        min: usize,
    },
    #[error("JCM construction needs 1 <= t < K, got K={k}, t={t}")]
    Jcm { k: usize, t: usize },
    #[error("lift needs an array with L'=1, got L'={0}")]
    LiftSource(usize),
    #[error("lift needs L' >= 1")]
    LiftTarget,
}

/// Builds the JCM array for `K` users and `t = KM/N`.
///
/// Rows are `(T, j)` for `j` in `[0, t)` (outer) and `t`-subsets `T` in
/// lexicographic order (inner). Entry `(T, j), k` is a star when `k ∈ T`;
/// otherwise it names `U = T ∪ {k}` with a sender `m` taken from `U`.
/// The pair `(U, m)` maps to slot `(t+1)·rank(U) + position of m in U`.
pub fn construct_jcm(k: usize, t: usize) -> Result<Dpda, ConstructError> {
    if t == 0 || t >= k {
        return Err(ConstructError::Jcm { k, t });
    }
    let ts = subsets(k, t);
    let f = t * ts.len();
    let z = t * binomial(k - 1, t - 1);
    let s = (t + 1) * binomial(k, t + 1);
    let mut grid = Vec::with_capacity(f * k);
    for j in 0..t {
        for set in &ts {
            for col in 0..k {
                if set.contains(&col) {
                    grid.push(Entry::Star);
                    continue;
                }
                let mut u = set.clone();
                u.push(col);
                u.sort_unstable();
                let rank_t = rank_within(&u, set).expect("T is a t-subset of U");
                // Users u_0..u_t other than the requester share the t packets.
                let m = if j + rank_t < t { u[j] } else { u[j + 1] };
                let pos = u.iter().position(|&x| x == m).expect("m in U");
                let slot = (t + 1) * subset_rank(k, &u).expect("U is sorted") + pos;
                grid.push(Entry::coded(slot, m));
            }
        }
    }
    Ok(Dpda::new(k, 1, f, z, s, grid).expect("JCM layout is structurally sound"))
}

/// Builds the `q² × 2q` grid array.
///
/// Row `i = (i₁, i₀)` and column `k = (k₁, k₀)` in base `q`. The entry is a
/// star iff `i_{k₁} = k₀`. Otherwise it is the super-combination
/// `((0, i₁), {i₀, k₀})` sent by user `q + i₁` when `k₁ = 0`, or
/// `((1, i₀), {i₁, k₀})` sent by user `i₀` when `k₁ = 1`. The combination
/// `((b, x), {y, z})` becomes slot `b·q·C(q,2) + x·C(q,2) + rank({y, z})`.
pub fn construct_grid(q: usize) -> Result<Dpda, ConstructError> {
    if q < 2 {
        return Err(ConstructError::Base {
            family: "grid",
            q,
            min: 2,
        });
    }
    let pairs = binomial(q, 2);
    let slot = |b: usize, x: usize, y: usize, z: usize| {
        let pair = [y.min(z), y.max(z)];
        b * q * pairs + x * pairs + subset_rank(q, &pair).expect("distinct pair")
    };
    let mut grid = Vec::with_capacity(q * q * 2 * q);
    for i in 0..q * q {
        let (i1, i0) = (i / q, i % q);
        for col in 0..2 * q {
            let (k1, k0) = (col / q, col % q);
            let digit = if k1 == 0 { i0 } else { i1 };
            grid.push(if digit == k0 {
                Entry::Star
            } else if k1 == 0 {
                Entry::coded(slot(0, i1, i0, k0), q + i1)
            } else {
                Entry::coded(slot(1, i0, i1, k0), i0)
            });
        }
    }
    let s = q * q * q - q * q;
    Ok(Dpda::new(2 * q, 1, q * q, q, s, grid).expect("grid layout is structurally sound"))
}

fn c(slot: usize, sender: usize) -> Entry {
    Entry::coded(slot, sender)
}

/// `P₄`, the base of the even recursion.
fn base_p4() -> Vec<Vec<Entry>> {
    use Entry::Star as X;
    vec![
        vec![c(2, 2), X, X, c(1, 1)],
        vec![X, c(2, 2), X, c(0, 0)],
        vec![c(3, 3), X, c(1, 1), X],
        vec![X, c(3, 3), c(0, 0), X],
    ]
}

/// `P₃`, the base of the odd recursion.
fn base_p3() -> Vec<Vec<Entry>> {
    use Entry::Star as X;
    vec![
        vec![X, c(0, 0), c(1, 0)],
        vec![c(3, 1), X, c(2, 1)],
        vec![c(4, 2), c(5, 2), X],
    ]
}

fn identity_block(n: usize, value: Entry, new_cols: [Option<&[Entry]>; 2]) -> Vec<Vec<Entry>> {
    (0..n)
        .map(|r| {
            let mut row: Vec<Entry> = (0..n)
                .map(|c| if c == r { value } else { Entry::Star })
                .collect();
            row.extend(new_cols.iter().map(|v| v.map_or(Entry::Star, |v| v[r])));
            row
        })
        .collect()
}

fn widen(rows: &mut [Vec<Entry>]) {
    for row in rows {
        row.extend([Entry::Star, Entry::Star]);
    }
}

/// Builds `P_{2q}` with parameters `(2q, 1, 2q(q−1), 2(q−1)², 2q)`.
///
/// From `P_n` (n even) the next array stacks `P_n` padded with two star
/// columns, `n^{(n)}·I_n` with `αₙᵀ` in the last column, and
/// `(n+1)^{(n+1)}·I_n` with `αₙᵀ` in column `n`. The boundary vector grows as
/// `α_{n+2} = [αₙ, (n+1)^{(n+1)}, n^{(n)}]`.
pub fn construct_even(q: usize) -> Result<Dpda, ConstructError> {
    if q < 2 {
        return Err(ConstructError::Base {
            family: "even",
            q,
            min: 2,
        });
    }
    let mut rows = base_p4();
    let mut alpha = vec![c(1, 1), c(0, 0), c(3, 3), c(2, 2)];
    let mut n = 4;
    while n < 2 * q {
        widen(&mut rows);
        rows.extend(identity_block(n, c(n, n), [None, Some(&alpha)]));
        rows.extend(identity_block(n, c(n + 1, n + 1), [Some(&alpha), None]));
        alpha.extend([c(n + 1, n + 1), c(n, n)]);
        n += 2;
    }
    let k = 2 * q;
    Ok(
        Dpda::from_rows(k, 1, 2 * q * (q - 1), 2 * (q - 1) * (q - 1), k, rows)
            .expect("even recursion is structurally sound"),
    )
}

/// Builds `P_{2q+1}` with parameters `(2q+1, 1, 4q²−1, (2q−1)², 4q+2)`.
///
/// From `P_n` (n odd) the next array stacks `P_n` padded with two star
/// columns and four identity blocks in the order `(2n)^{(n)}` with `βₙᵀ`
/// right, `(2n+2)^{(n+1)}` with `βₙᵀ` left, `(2n+1)^{(n)}` with `γₙᵀ` right,
/// `(2n+3)^{(n+1)}` with `γₙᵀ` left. The boundary vectors grow as
/// `β_{n+2} = [βₙ, (2n+2)^{(n+1)}, (2n)^{(n)}]` and
/// `γ_{n+2} = [γₙ, (2n+3)^{(n+1)}, (2n+1)^{(n)}]`.
pub fn construct_odd(q: usize) -> Result<Dpda, ConstructError> {
    if q < 1 {
        return Err(ConstructError::Base {
            family: "odd",
            q,
            min: 1,
        });
    }
    let mut rows = base_p3();
    let mut beta = vec![c(2, 1), c(4, 2), c(0, 0)];
    let mut gamma = vec![c(5, 2), c(1, 0), c(3, 1)];
    let mut n = 3;
    while n < 2 * q + 1 {
        widen(&mut rows);
        rows.extend(identity_block(n, c(2 * n, n), [None, Some(&beta)]));
        rows.extend(identity_block(n, c(2 * n + 2, n + 1), [Some(&beta), None]));
        rows.extend(identity_block(n, c(2 * n + 1, n), [None, Some(&gamma)]));
        rows.extend(identity_block(n, c(2 * n + 3, n + 1), [Some(&gamma), None]));
        beta.extend([c(2 * n + 2, n + 1), c(2 * n, n)]);
        gamma.extend([c(2 * n + 3, n + 1), c(2 * n + 1, n)]);
        n += 2;
    }
    let k = 2 * q + 1;
    Ok(Dpda::from_rows(
        k,
        1,
        4 * q * q - 1,
        (2 * q - 1) * (2 * q - 1),
        4 * q + 2,
        rows,
    )
    .expect("odd recursion is structurally sound"))
}

/// Stacks `lp` copies of a single-band array, copy `i` with every slot
/// shifted by `i·S`. The result is a `(K, lp, F, Z, lp·S)` array.
pub fn lift(p: &Dpda, lp: usize) -> Result<Dpda, ConstructError> {
    if p.lp() != 1 {
        return Err(ConstructError::LiftSource(p.lp()));
    }
    if lp == 0 {
        return Err(ConstructError::LiftTarget);
    }
    let grid = (0..lp)
        .flat_map(|band| p.grid().iter().map(move |e| e.shifted(band * p.s())))
        .collect();
    Ok(Dpda::new(p.k(), lp, p.f(), p.z(), lp * p.s(), grid).expect("lift keeps structure"))
}

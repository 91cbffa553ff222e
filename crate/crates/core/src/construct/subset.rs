//! Lexicographic ranking of fixed-size subsets.

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SubsetError {
    #[error("subset is empty")]
    Empty,
    #[error("subset size {g} is not in [1, {n}]")]
    Size { g: usize, n: usize },
    #[error("subset is not strictly increasing at position {index}")]
    Unsorted { index: usize },
    #[error("element at position {index} is not in the ground set")]
    NotInGround { index: usize },
    #[error("rank {rank} is not below C({n}, {g}) = {count}")]
    Rank {
        rank: usize,
        n: usize,
        g: usize,
        count: usize,
    },
}

/// `C(n, k)` by the multiplicative formula; every intermediate division is exact.
///
/// # Panics
/// Panics on overflow of `usize`.
pub fn binomial(n: usize, k: usize) -> usize {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc * (n - i) as u128 / (i + 1) as u128;
    }
    usize::try_from(acc).expect("binomial overflows usize")
}

/// Rank of a sorted `g`-subset of `[0, n)` among all `g`-subsets in
/// lexicographic order, starting from 0.
pub fn subset_rank(n: usize, subset: &[usize]) -> Result<usize, SubsetError> {
    let g = subset.len();
    if g == 0 {
        return Err(SubsetError::Empty);
    }
    if g > n {
        return Err(SubsetError::Size { g, n });
    }
    let mut rank = 0;
    let mut next = 0;
    for (i, &x) in subset.iter().enumerate() {
        if x >= n {
            return Err(SubsetError::NotInGround { index: i });
        }
        if x < next {
            return Err(SubsetError::Unsorted { index: i });
        }
        // Every subset agreeing on the first i elements whose i-th element is
        // v < x comes first.
        for v in next..x {
            rank += binomial(n - 1 - v, g - 1 - i);
        }
        next = x + 1;
    }
    Ok(rank)
}

/// Inverse of [`subset_rank`].
pub fn subset_unrank(n: usize, g: usize, rank: usize) -> Result<Vec<usize>, SubsetError> {
    if g == 0 || g > n {
        return Err(SubsetError::Size { g, n });
    }
    let count = binomial(n, g);
    if rank >= count {
        return Err(SubsetError::Rank { rank, n, g, count });
    }
    let mut out = Vec::with_capacity(g);
    let mut rest = rank;
    let mut v = 0;
    for i in 0..g {
        loop {
            let block = binomial(n - 1 - v, g - 1 - i);
            if rest < block {
                out.push(v);
                v += 1;
                break;
            }
            rest -= block;
            v += 1;
        }
    }
    Ok(out)
}

fn positions<T: Ord>(ground: &[T], subset: &[T]) -> Result<Vec<usize>, SubsetError> {
    subset
        .iter()
        .enumerate()
        .map(|(index, x)| {
            ground
                .binary_search(x)
                .map_err(|_| SubsetError::NotInGround { index })
        })
        .collect()
}

/// Rank of `subset` among the equal-size subsets of the sorted set `ground`.
pub fn rank_within<T: Ord>(ground: &[T], subset: &[T]) -> Result<usize, SubsetError> {
    subset_rank(ground.len(), &positions(ground, subset)?)
}

/// The `g`-subset of the sorted set `ground` with the given rank.
pub fn unrank_within<T: Clone>(ground: &[T], g: usize, rank: usize) -> Result<Vec<T>, SubsetError> {
    Ok(subset_unrank(ground.len(), g, rank)?
        .into_iter()
        .map(|i| ground[i].clone())
        .collect())
}

/// All `g`-subsets of `[0, n)` in lexicographic order.
pub fn subsets(n: usize, g: usize) -> Vec<Vec<usize>> {
    (0..binomial(n, g))
        .map(|r| subset_unrank(n, g, r).expect("rank below count"))
        .collect()
}

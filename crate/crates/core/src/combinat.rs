//! Lexicographic indexing of k-subsets of {0..n-1}.
//!
//! The wedge basis of the k-th exterior power is ordered by this indexing,
//! and every module of the crate shares it.

use crate::error::{Error, Result};

/// Binomial coefficient C(n, k) as f64-exact integer arithmetic in u64.
///
/// Desk scale only (n <= 12 throughout the crate), so no overflow care is
/// needed beyond u64.
pub fn binomial(n: usize, k: usize) -> u64 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u64 = 1;
    for i in 0..k {
        acc = acc * (n - i) as u64 / (i + 1) as u64;
    }
    acc
}

/// A k-subset of {0..n-1} in strictly increasing order, together with its
/// position in the lexicographic enumeration of all such subsets.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SubsetIndex {
    pub elements: Vec<usize>,
    pub rank: usize,
}

fn validate(elements: &[usize], n: usize) -> Result<()> {
    if elements.is_empty() {
        return Err(Error::InvalidInput("empty subset".into()));
    }
    for w in elements.windows(2) {
        if w[0] >= w[1] {
            return Err(Error::InvalidInput(format!(
                "subset elements must be strictly increasing, got {:?}",
                elements
            )));
        }
    }
    if *elements.last().unwrap() >= n {
        return Err(Error::InvalidInput(format!(
            "subset element {} out of range [0, {})",
            elements.last().unwrap(),
            n
        )));
    }
    Ok(())
}

/// Lexicographic rank of a strictly increasing k-subset of {0..n-1}.
pub fn subset_rank(elements: &[usize], n: usize) -> Result<usize> {
    validate(elements, n)?;
    let k = elements.len();
    let mut rank: u64 = 0;
    let mut prev: isize = -1;
    for (j, &c) in elements.iter().enumerate() {
        for t in (prev + 1) as usize..c {
            rank += binomial(n - 1 - t, k - 1 - j);
        }
        prev = c as isize;
    }
    Ok(rank as usize)
}

/// Inverse of [`subset_rank`]: the k-subset at `rank` in lexicographic order.
pub fn subset_unrank(rank: usize, n: usize, k: usize) -> Result<SubsetIndex> {
    if k == 0 || k > n {
        return Err(Error::InvalidInput(format!("k = {} out of range [1, {}]", k, n)));
    }
    let total = binomial(n, k);
    if rank as u64 >= total {
        return Err(Error::InvalidInput(format!(
            "rank {} out of range [0, {})",
            rank, total
        )));
    }
    let mut elements = Vec::with_capacity(k);
    let mut r = rank as u64;
    let mut c = 0usize;
    for j in 0..k {
        loop {
            let block = binomial(n - 1 - c, k - 1 - j);
            if r < block {
                elements.push(c);
                c += 1;
                break;
            }
            r -= block;
            c += 1;
        }
    }
    Ok(SubsetIndex { elements, rank })
}

/// All k-subsets of {0..n-1} in lexicographic order.
pub fn subsets_lex(n: usize, k: usize) -> Vec<Vec<usize>> {
    use itertools::Itertools;
    (0..n).combinations(k).collect()
}

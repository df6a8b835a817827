//! Agreement and rank-correlation statistics.

use alloc::collections::BTreeMap;
use alloc::vec;

use crate::{Error, Result};

fn check_lengths<T>(a: &[T], b: &[T]) -> Result<()> {
    if a.len() != b.len() {
        return Err(Error::InvalidInput(alloc::format!(
            "length mismatch: {} vs {}",
            a.len(),
            b.len()
        )));
    }
    if a.is_empty() {
        return Err(Error::invalid("label lists must not be empty"));
    }
    Ok(())
}

fn is_permutation(ranks: &[usize]) -> bool {
    let mut seen = vec![false; ranks.len()];
    ranks
        .iter()
        .all(|&r| (1..=ranks.len()).contains(&r) && !core::mem::replace(&mut seen[r - 1], true))
}

/// Spearman's rho for two rankings without ties.
///
/// Both inputs must be permutations of `1..=n` with `n >= 2`. Computed as
/// `(n(n²-1) - 6Σd²) / (n(n²-1))` so the result is a single rounded division.
pub fn spearman(rank_a: &[usize], rank_b: &[usize]) -> Result<f64> {
    check_lengths(rank_a, rank_b)?;
    let n = rank_a.len();
    if n < 2 {
        return Err(Error::invalid("spearman needs at least two ranked items"));
    }
    if !is_permutation(rank_a) || !is_permutation(rank_b) {
        return Err(Error::invalid("ranks must be a permutation of 1..=n"));
    }
    let d2: i128 = rank_a
        .iter()
        .zip(rank_b)
        .map(|(&x, &y)| {
            let d = x as i128 - y as i128;
            d * d
        })
        .sum();
    let n = n as i128;
    let denom = n * (n * n - 1);
    Ok((denom - 6 * d2) as f64 / denom as f64)
}

/// Fraction of positions where both annotators gave the same label.
pub fn exact_match_agreement<T: PartialEq>(labels_a: &[T], labels_b: &[T]) -> Result<f64> {
    check_lengths(labels_a, labels_b)?;
    let same = labels_a
        .iter()
        .zip(labels_b)
        .filter(|(a, b)| a == b)
        .count();
    Ok(same as f64 / labels_a.len() as f64)
}

/// Cohen's kappa. When chance agreement is total (`p_e == 1`) kappa is 1
/// for perfect observed agreement and 0 otherwise.
pub fn cohens_kappa<T: Ord>(labels_a: &[T], labels_b: &[T]) -> Result<f64> {
    check_lengths(labels_a, labels_b)?;
    let n = labels_a.len() as f64;
    let p_o = exact_match_agreement(labels_a, labels_b)?;
    let mut marginals: BTreeMap<&T, (usize, usize)> = BTreeMap::new();
    for (a, b) in labels_a.iter().zip(labels_b) {
        marginals.entry(a).or_default().0 += 1;
        marginals.entry(b).or_default().1 += 1;
    }
    let p_e: f64 = marginals
        .values()
        .map(|&(ca, cb)| (ca as f64 / n) * (cb as f64 / n))
        .sum();
    if p_e >= 1.0 {
        return Ok(if p_o >= 1.0 { 1.0 } else { 0.0 });
    }
    Ok((p_o - p_e) / (1.0 - p_e))
}

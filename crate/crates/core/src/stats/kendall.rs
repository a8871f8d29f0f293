use std::cmp::Ordering;

use super::{check_pair, Correlation};
use crate::error::Result;

/// Kendall's tau-b.
///
/// Knight's O(n log n) algorithm: sort by `(x, y)`, count tied pairs in `x`
/// and jointly, then merge-sort by `y` counting exchanges, which are the
/// discordant pairs. With `n0 = n(n-1)/2`:
///
/// `tau_b = (n0 - n1 - n2 + n3 - 2 * swaps) / sqrt((n0 - n1) * (n0 - n2))`
///
/// where `n1`, `n2` count pairs tied in `x` and in `y`, and `n3` pairs tied
/// in both. Returns [`Correlation::Degenerate`] when either input is constant.
pub fn kendall_tau(x: &[f64], y: &[f64]) -> Result<Correlation> {
    check_pair(x, y, 2)?;
    let n = x.len();
    // adding 0.0 folds -0.0 into 0.0 so total ordering agrees with ==
    let mut pairs: Vec<(f64, f64)> = x.iter().zip(y).map(|(a, b)| (a + 0.0, b + 0.0)).collect();
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.total_cmp(&b.1)));

    let n0 = (n as u64) * (n as u64 - 1) / 2;
    let n1 = tied_pairs(&pairs, |a, b| a.0 == b.0);
    let n3 = tied_pairs(&pairs, |a, b| a == b);

    let mut ys: Vec<f64> = pairs.iter().map(|p| p.1).collect();
    let mut scratch = vec![0.0; n];
    let swaps = merge_count(&mut ys, &mut scratch);
    // ys is now sorted, so ties in y are runs
    let n2 = tied_pairs(&ys, |a, b| a == b);

    if n1 == n0 || n2 == n0 {
        return Ok(Correlation::Degenerate);
    }
    let numerator = n0 as f64 - n1 as f64 - n2 as f64 + n3 as f64 - 2.0 * swaps as f64;
    let denominator = ((n0 - n1) as f64).sqrt() * ((n0 - n2) as f64).sqrt();
    Ok(Correlation::Value(
        (numerator / denominator).clamp(-1.0, 1.0),
    ))
}

/// Pairs within runs of consecutive equal elements.
fn tied_pairs<T>(sorted: &[T], eq: impl Fn(&T, &T) -> bool) -> u64 {
    let mut total = 0u64;
    let mut run = 1u64;
    for w in sorted.windows(2) {
        if eq(&w[0], &w[1]) {
            run += 1;
        } else {
            total += run * (run - 1) / 2;
            run = 1;
        }
    }
    total + run * (run - 1) / 2
}

/// Stable merge sort returning the number of strict inversions.
fn merge_count(v: &mut [f64], scratch: &mut [f64]) -> u64 {
    let n = v.len();
    if n < 2 {
        return 0;
    }
    let mid = n / 2;
    let mut swaps = {
        let (left, right) = v.split_at_mut(mid);
        let (sl, sr) = scratch.split_at_mut(mid);
        merge_count(left, sl) + merge_count(right, sr)
    };
    let (mut i, mut j, mut k) = (0, mid, 0);
    while i < mid && j < n {
        if v[j].total_cmp(&v[i]) == Ordering::Less {
            scratch[k] = v[j];
            swaps += (mid - i) as u64;
            j += 1;
        } else {
            scratch[k] = v[i];
            i += 1;
        }
        k += 1;
    }
    scratch[k..k + mid - i].copy_from_slice(&v[i..mid]);
    k += mid - i;
    scratch[k..k + n - j].copy_from_slice(&v[j..n]);
    v.copy_from_slice(&scratch[..n]);
    swaps
}

use std::cmp::Ordering;

use crate::error::{Error, Result};

fn check_inputs(x: &[f64], y: &[f64]) -> Result<()> {
    if x.len() != y.len() {
        return Err(Error::DegenerateInput(format!(
            "length mismatch: {} vs {}",
            x.len(),
            y.len()
        )));
    }
    if x.len() < 2 {
        return Err(Error::DegenerateInput(
            "need at least two observations".into(),
        ));
    }
    if x.iter().chain(y).any(|v| !v.is_finite()) {
        return Err(Error::DegenerateInput("non-finite score".into()));
    }
    Ok(())
}

/// Number of tied pairs, summed over runs of equal adjacent values.
fn tied_pairs<T: PartialEq>(sorted: &[T]) -> u64 {
    let mut total = 0u64;
    let mut run = 1u64;
    for w in sorted.windows(2) {
        if w[0] == w[1] {
            run += 1;
        } else {
            total += run * (run - 1) / 2;
            run = 1;
        }
    }
    total + run * (run - 1) / 2
}

/// Sorts `v` ascending and returns the number of strict inversions.
fn sort_counting_inversions(v: &mut [f64]) -> u64 {
    let mut scratch = v.to_vec();
    merge_count(v, &mut scratch)
}

fn merge_count(v: &mut [f64], scratch: &mut [f64]) -> u64 {
    let n = v.len();
    if n < 2 {
        return 0;
    }
    let mid = n / 2;
    let mut swaps = merge_count(&mut v[..mid], &mut scratch[..mid])
        + merge_count(&mut v[mid..], &mut scratch[mid..]);
    scratch.copy_from_slice(v);
    let (left, right) = scratch.split_at(mid);
    let (mut i, mut j) = (0, 0);
    for slot in v.iter_mut() {
        if j < right.len() && (i == left.len() || right[j] < left[i]) {
            swaps += (left.len() - i) as u64;
            *slot = right[j];
            j += 1;
        } else {
            *slot = left[i];
            i += 1;
        }
    }
    swaps
}

/// Kendall's τ_b with tie correction, in O(n log n).
///
/// `τ_b = (C − D) / sqrt((n0 − n1)(n0 − n2))` where `n0 = n(n−1)/2` and
/// `n1`, `n2` count pairs tied in x and in y.
pub fn kendall_tau_b(x: &[f64], y: &[f64]) -> Result<f64> {
    check_inputs(x, y)?;
    let n = x.len() as u64;
    let mut idx: Vec<usize> = (0..x.len()).collect();
    idx.sort_by(|&a, &b| x[a].total_cmp(&x[b]).then_with(|| y[a].total_cmp(&y[b])));

    let xs: Vec<f64> = idx.iter().map(|&i| x[i]).collect();
    let pairs: Vec<(f64, f64)> = idx.iter().map(|&i| (x[i], y[i])).collect();
    let n0 = n * (n - 1) / 2;
    let n1 = tied_pairs(&xs);
    let n3 = tied_pairs(&pairs);

    let mut ys: Vec<f64> = idx.iter().map(|&i| y[i]).collect();
    let discordant = sort_counting_inversions(&mut ys);
    debug_assert!(ys
        .windows(2)
        .all(|w| w[0].total_cmp(&w[1]) != Ordering::Greater));
    let n2 = tied_pairs(&ys);

    if n0 == n1 {
        return Err(Error::DegenerateInput("all x values tied".into()));
    }
    if n0 == n2 {
        return Err(Error::DegenerateInput("all y values tied".into()));
    }
    let numerator = n0 as i64 - n1 as i64 - n2 as i64 + n3 as i64 - 2 * discordant as i64;
    let denominator = ((n0 - n1) as f64 * (n0 - n2) as f64).sqrt();
    Ok((numerator as f64 / denominator).clamp(-1.0, 1.0))
}

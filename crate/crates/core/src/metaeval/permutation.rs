//! Two-sided permutation tests for τ_b. The human-score vector is permuted
//! while metric scores stay fixed.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::kendall_tau_b;
use crate::error::Result;

/// Inputs up to this length are tested exhaustively over all n! orderings.
pub const EXHAUSTIVE_MAX_N: usize = 7;
pub const DEFAULT_ITERATIONS: usize = 10_000;

/// Monte-Carlo iterations per independently seeded sub-stream.
const CHUNK: usize = 1_000;

/// Slack for comparing |τ| values that are equal up to rounding.
const TIE_EPS: f64 = 1e-12;

fn at_least_as_extreme(tau: f64, observed: f64) -> bool {
    tau.abs() >= observed - TIE_EPS
}

/// p = #{π : |τ_b(x, π(y))| ≥ |τ_b(x, y)|} / n!
pub fn exhaustive_pvalue(x: &[f64], y: &[f64]) -> Result<f64> {
    let observed = kendall_tau_b(x, y)?.abs();
    let n = y.len();
    let mut perm = y.to_vec();
    let mut hits = 0u64;
    let mut total = 0u64;
    // Heap's algorithm, iterative form.
    let mut c = vec![0usize; n];
    let mut visit = |p: &[f64]| -> Result<()> {
        total += 1;
        if at_least_as_extreme(kendall_tau_b(x, p)?, observed) {
            hits += 1;
        }
        Ok(())
    };
    visit(&perm)?;
    let mut i = 1;
    while i < n {
        if c[i] < i {
            if i % 2 == 0 {
                perm.swap(0, i);
            } else {
                perm.swap(c[i], i);
            }
            visit(&perm)?;
            c[i] += 1;
            i = 1;
        } else {
            c[i] = 0;
            i += 1;
        }
    }
    Ok(hits as f64 / total as f64)
}

/// p = (1 + #{extreme shuffles}) / (1 + iterations), with iterations split
/// into fixed-size chunks that each draw from their own ChaCha stream of
/// `seed`. The result does not depend on the thread count.
pub fn monte_carlo_pvalue(x: &[f64], y: &[f64], iterations: usize, seed: u64) -> Result<f64> {
    let observed = kendall_tau_b(x, y)?.abs();
    let chunks = iterations.div_ceil(CHUNK);
    let hits: u64 = (0..chunks)
        .into_par_iter()
        .map(|chunk| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(chunk as u64);
            let todo = CHUNK.min(iterations - chunk * CHUNK);
            let mut perm = y.to_vec();
            let mut hits = 0u64;
            for _ in 0..todo {
                perm.shuffle(&mut rng);
                // permuting y keeps its tie structure, so τ_b stays defined
                let tau = kendall_tau_b(x, &perm).expect("validated above");
                if at_least_as_extreme(tau, observed) {
                    hits += 1;
                }
            }
            hits
        })
        .sum();
    Ok((1 + hits) as f64 / (1 + iterations) as f64)
}

/// Exhaustive for n <= [`EXHAUSTIVE_MAX_N`], Monte-Carlo otherwise.
pub fn permutation_pvalue(x: &[f64], y: &[f64], iterations: usize, seed: u64) -> Result<f64> {
    if x.len() <= EXHAUSTIVE_MAX_N {
        exhaustive_pvalue(x, y)
    } else {
        monte_carlo_pvalue(x, y, iterations.max(1), seed)
    }
}

//! Straightforward reference implementations, written independently of the
//! library code they check.

use std::collections::BTreeMap;

/// Clipped unigram overlap F1 by explicit counting.
pub fn rouge1_f1(candidate: &[&str], reference: &[&str]) -> f64 {
    if candidate.is_empty() || reference.is_empty() {
        return 0.0;
    }
    let mut overlap = 0usize;
    let mut seen: Vec<&str> = Vec::new();
    for &tok in candidate {
        if seen.contains(&tok) {
            continue;
        }
        seen.push(tok);
        let in_cand = candidate.iter().filter(|&&t| t == tok).count();
        let in_ref = reference.iter().filter(|&&t| t == tok).count();
        overlap += in_cand.min(in_ref);
    }
    if overlap == 0 {
        return 0.0;
    }
    let p = overlap as f64 / candidate.len() as f64;
    let r = overlap as f64 / reference.len() as f64;
    2.0 * p * r / (p + r)
}

/// (1/n) Σ 1(s > tau) s
pub fn gated_mean(sims: &[f64], tau: f64) -> f64 {
    if sims.is_empty() {
        return 0.0;
    }
    let mut total = 0.0;
    for &s in sims {
        if s > tau {
            total += s;
        }
    }
    total / sims.len() as f64
}

/// τ_b by enumerating every pair. None when either side is fully tied.
pub fn kendall_tau_b(x: &[f64], y: &[f64]) -> Option<f64> {
    let n = x.len();
    let (mut c, mut d, mut tx, mut ty) = (0i64, 0i64, 0i64, 0i64);
    for i in 0..n {
        for j in i + 1..n {
            let dx = x[i] - x[j];
            let dy = y[i] - y[j];
            if dx == 0.0 && dy == 0.0 {
                continue;
            } else if dx == 0.0 {
                tx += 1;
            } else if dy == 0.0 {
                ty += 1;
            } else if (dx > 0.0) == (dy > 0.0) {
                c += 1;
            } else {
                d += 1;
            }
        }
    }
    let denom = (((c + d + tx) * (c + d + ty)) as f64).sqrt();
    if denom == 0.0 {
        return None;
    }
    Some((c - d) as f64 / denom)
}

/// Krippendorff's α in its pairwise form: observed disagreement over value
/// pairs within units, expected disagreement over all pooled value pairs.
pub fn krippendorff_alpha(rows: &[Vec<Option<f64>>], ordinal: bool) -> Option<f64> {
    let units: Vec<Vec<f64>> = rows
        .iter()
        .map(|r| r.iter().filter_map(|v| *v).collect::<Vec<f64>>())
        .filter(|u| u.len() >= 2)
        .collect();
    if units.is_empty() {
        return None;
    }
    let pooled: Vec<f64> = units.iter().flatten().copied().collect();
    let n = pooled.len() as f64;

    // frequency of each value among pairable ratings, keyed in value order
    let mut freq: BTreeMap<i64, f64> = BTreeMap::new();
    for &v in &pooled {
        *freq.entry((v * 1e6).round() as i64).or_default() += 1.0;
    }
    let delta = |a: f64, b: f64| -> f64 {
        if a == b {
            return 0.0;
        }
        if !ordinal {
            return 1.0;
        }
        let (lo, hi) = if a < b { (a, b) } else { (b, a) };
        let (klo, khi) = ((lo * 1e6).round() as i64, (hi * 1e6).round() as i64);
        let between: f64 = freq.range(klo..=khi).map(|(_, f)| f).sum();
        let v = between - (freq[&klo] + freq[&khi]) / 2.0;
        v * v
    };

    let mut d_o = 0.0;
    for u in &units {
        let m = u.len() as f64;
        let mut s = 0.0;
        for i in 0..u.len() {
            for j in 0..u.len() {
                if i != j {
                    s += delta(u[i], u[j]);
                }
            }
        }
        d_o += s / (m - 1.0);
    }
    d_o /= n;

    let mut d_e = 0.0;
    for i in 0..pooled.len() {
        for j in 0..pooled.len() {
            if i != j {
                d_e += delta(pooled[i], pooled[j]);
            }
        }
    }
    d_e /= n * (n - 1.0);
    if d_e == 0.0 {
        return Some(1.0);
    }
    Some(1.0 - d_o / d_e)
}

/// Fraction of permutations of `y` (all n!, duplicates included) whose
/// |τ_b| against `x` reaches the observed one.
pub fn exhaustive_pvalue(x: &[f64], y: &[f64]) -> Option<f64> {
    let observed = kendall_tau_b(x, y)?.abs();
    let n = y.len();
    let mut idx: Vec<usize> = (0..n).collect();
    let (mut hits, mut total) = (0u64, 0u64);
    permute(&mut idx, 0, &mut |p| {
        let py: Vec<f64> = p.iter().map(|&i| y[i]).collect();
        total += 1;
        if kendall_tau_b(x, &py).unwrap().abs() >= observed - 1e-12 {
            hits += 1;
        }
    });
    Some(hits as f64 / total as f64)
}

fn permute(v: &mut [usize], k: usize, f: &mut dyn FnMut(&[usize])) {
    if k == v.len() {
        f(v);
        return;
    }
    for i in k..v.len() {
        v.swap(k, i);
        permute(v, k + 1, f);
        v.swap(k, i);
    }
}

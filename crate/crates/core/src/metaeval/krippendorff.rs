use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MeasurementLevel {
    Nominal,
    Ordinal,
}

/// Units × raters with missing cells. Values are category codes; under the
/// ordinal level their numeric order is the category order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnnotationTable {
    pub units: Vec<String>,
    pub raters: Vec<String>,
    /// `ratings[u][r]` is rater `r`'s value for unit `u`.
    pub ratings: Vec<Vec<Option<f64>>>,
}

impl AnnotationTable {
    pub fn new(
        units: Vec<String>,
        raters: Vec<String>,
        ratings: Vec<Vec<Option<f64>>>,
    ) -> Result<Self> {
        if raters.len() < 2 {
            return Err(Error::InvalidValue(
                "an annotation table needs at least two raters".into(),
            ));
        }
        if ratings.len() != units.len() {
            return Err(Error::InvalidValue(format!(
                "{} units but {} rating rows",
                units.len(),
                ratings.len()
            )));
        }
        for (u, row) in ratings.iter().enumerate() {
            if row.len() != raters.len() {
                return Err(Error::InvalidValue(format!(
                    "unit {} has {} ratings for {} raters",
                    units[u],
                    row.len(),
                    raters.len()
                )));
            }
            if row.iter().flatten().any(|v| !v.is_finite()) {
                return Err(Error::InvalidValue(format!(
                    "unit {} has a non-finite rating",
                    units[u]
                )));
            }
        }
        Ok(Self {
            units,
            raters,
            ratings,
        })
    }

    /// Builds a table from rows of ratings with generated ids.
    pub fn from_rows(ratings: Vec<Vec<Option<f64>>>) -> Result<Self> {
        let n_raters = ratings.first().map_or(0, Vec::len);
        Self::new(
            (0..ratings.len()).map(|i| format!("u{i}")).collect(),
            (0..n_raters).map(|i| format!("r{i}")).collect(),
            ratings,
        )
    }
}

/// Krippendorff's α from the coincidence matrix. Units with fewer than two
/// ratings are not pairable and are ignored.
pub fn krippendorff_alpha(table: &AnnotationTable, level: MeasurementLevel) -> Result<f64> {
    let pairable: Vec<Vec<f64>> = table
        .ratings
        .iter()
        .map(|row| row.iter().flatten().copied().collect::<Vec<_>>())
        .filter(|vals| vals.len() >= 2)
        .collect();
    if pairable.is_empty() {
        return Err(Error::InsufficientData);
    }

    let mut categories: Vec<f64> = pairable.iter().flatten().copied().collect();
    categories.sort_by(f64::total_cmp);
    categories.dedup();
    let index = |v: f64| {
        categories
            .binary_search_by(|c| c.total_cmp(&v))
            .expect("known value")
    };
    let k = categories.len();

    // o[c][k] = Σ_u (number of c-k pairs in u) / (m_u − 1)
    let mut coincidence = vec![vec![0.0f64; k]; k];
    for vals in &pairable {
        let m = vals.len() as f64;
        let mut counts = vec![0.0f64; k];
        for &v in vals {
            counts[index(v)] += 1.0;
        }
        for c in 0..k {
            if counts[c] == 0.0 {
                continue;
            }
            for d in 0..k {
                let pairs = if c == d {
                    counts[c] * (counts[c] - 1.0)
                } else {
                    counts[c] * counts[d]
                };
                coincidence[c][d] += pairs / (m - 1.0);
            }
        }
    }
    let marginals: Vec<f64> = coincidence.iter().map(|row| row.iter().sum()).collect();
    let n: f64 = marginals.iter().sum();

    let delta = |c: usize, d: usize| -> f64 {
        match level {
            MeasurementLevel::Nominal => {
                if c == d {
                    0.0
                } else {
                    1.0
                }
            }
            MeasurementLevel::Ordinal => {
                let (lo, hi) = if c <= d { (c, d) } else { (d, c) };
                let span: f64 = marginals[lo..=hi].iter().sum();
                let v = span - (marginals[lo] + marginals[hi]) / 2.0;
                v * v
            }
        }
    };

    let mut observed = 0.0;
    let mut expected = 0.0;
    for c in 0..k {
        for d in 0..k {
            let dist = delta(c, d);
            observed += coincidence[c][d] * dist;
            expected += marginals[c] * marginals[d] * dist;
        }
    }
    if expected == 0.0 {
        // a single category overall: no disagreement is possible
        return Ok(1.0);
    }
    Ok(1.0 - (n - 1.0) * observed / expected)
}

use std::collections::{BTreeMap, BTreeSet, HashSet};
use std::fmt;

use serde::{Deserialize, Serialize};

use super::{kendall_tau_b, permutation_pvalue, DEFAULT_ITERATIONS};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Granularity {
    SummaryLevel,
    SystemLevel,
}

impl fmt::Display for Granularity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Granularity::SummaryLevel => "summary",
            Granularity::SystemLevel => "system",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoreRow {
    pub item_id: String,
    pub system_id: String,
    pub metric_score: f64,
    pub human_score: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoreMatrix {
    pub rows: Vec<ScoreRow>,
    pub granularity: Granularity,
}

impl ScoreMatrix {
    pub fn new(rows: Vec<ScoreRow>, granularity: Granularity) -> Result<Self> {
        let mut seen = HashSet::new();
        for r in &rows {
            if !seen.insert((r.item_id.as_str(), r.system_id.as_str())) {
                return Err(Error::InvalidValue(format!(
                    "duplicate score row ({}, {})",
                    r.item_id, r.system_id
                )));
            }
        }
        Ok(Self { rows, granularity })
    }

    pub fn system_count(&self) -> usize {
        self.rows
            .iter()
            .map(|r| r.system_id.as_str())
            .collect::<BTreeSet<_>>()
            .len()
    }

    pub fn metric_scores(&self) -> Vec<f64> {
        self.rows.iter().map(|r| r.metric_score).collect()
    }

    pub fn human_scores(&self) -> Vec<f64> {
        self.rows.iter().map(|r| r.human_score).collect()
    }
}

/// One row per system holding the mean metric and human scores over its
/// items. Rows come out ordered by system id; `item_id` is set to `*`.
pub fn aggregate_system_level(matrix: &ScoreMatrix) -> ScoreMatrix {
    let mut sums: BTreeMap<&str, (f64, f64, usize)> = BTreeMap::new();
    for r in &matrix.rows {
        let e = sums.entry(r.system_id.as_str()).or_insert((0.0, 0.0, 0));
        e.0 += r.metric_score;
        e.1 += r.human_score;
        e.2 += 1;
    }
    let rows = sums
        .into_iter()
        .map(|(system, (m, h, n))| ScoreRow {
            item_id: "*".into(),
            system_id: system.into(),
            metric_score: m / n as f64,
            human_score: h / n as f64,
        })
        .collect();
    ScoreMatrix {
        rows,
        granularity: Granularity::SystemLevel,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GranularityChoice {
    /// System level when a group has at least [`AUTO_SYSTEM_MIN`] systems.
    #[default]
    Auto,
    Summary,
    System,
}

pub const AUTO_SYSTEM_MIN: usize = 3;

impl std::str::FromStr for GranularityChoice {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "auto" => Ok(Self::Auto),
            "summary" => Ok(Self::Summary),
            "system" => Ok(Self::System),
            _ => Err(Error::InvalidConfig {
                field: "granularity",
                reason: format!("expected auto, summary or system, got {s:?}"),
            }),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportConfig {
    pub iterations: usize,
    pub seed: u64,
    pub granularity: GranularityChoice,
}

impl Default for ReportConfig {
    fn default() -> Self {
        Self {
            iterations: DEFAULT_ITERATIONS,
            seed: 0,
            granularity: GranularityChoice::Auto,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CorrelationGroup {
    pub dataset: String,
    pub dimension: String,
    pub measure: String,
    /// Summary-level scores; system-level aggregation happens in the report.
    pub matrix: ScoreMatrix,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorrelationCell {
    pub dataset: String,
    pub dimension: String,
    pub measure: String,
    pub granularity: Granularity,
    pub n: usize,
    pub tau_b: Option<f64>,
    pub p_value: Option<f64>,
    pub stars: String,
    /// Why τ_b could not be computed, when it could not.
    pub unavailable: Option<String>,
}

pub fn significance_stars(p: f64) -> &'static str {
    if p < 0.001 {
        "***"
    } else if p < 0.01 {
        "**"
    } else if p < 0.05 {
        "*"
    } else {
        ""
    }
}

/// Resolves the granularity for a matrix and aggregates if needed.
pub fn at_granularity(matrix: &ScoreMatrix, choice: GranularityChoice) -> ScoreMatrix {
    let system = match choice {
        GranularityChoice::Auto => matrix.system_count() >= AUTO_SYSTEM_MIN,
        GranularityChoice::Summary => false,
        GranularityChoice::System => true,
    };
    if system && matrix.granularity == Granularity::SummaryLevel {
        aggregate_system_level(matrix)
    } else {
        matrix.clone()
    }
}

/// τ_b and its permutation p-value for one matrix, as-is.
pub fn correlate(matrix: &ScoreMatrix, iterations: usize, seed: u64) -> Result<(f64, f64)> {
    let x = matrix.metric_scores();
    let y = matrix.human_scores();
    let tau = kendall_tau_b(&x, &y)?;
    let p = permutation_pvalue(&x, &y, iterations, seed)?;
    Ok((tau, p))
}

/// One cell per group. Degenerate groups yield an unavailable cell instead
/// of failing the whole report.
pub fn correlation_report(groups: &[CorrelationGroup], cfg: &ReportConfig) -> CorrelationReport {
    let cells = groups
        .iter()
        .map(|g| {
            let m = at_granularity(&g.matrix, cfg.granularity);
            let mut cell = CorrelationCell {
                dataset: g.dataset.clone(),
                dimension: g.dimension.clone(),
                measure: g.measure.clone(),
                granularity: m.granularity,
                n: m.rows.len(),
                tau_b: None,
                p_value: None,
                stars: String::new(),
                unavailable: None,
            };
            match correlate(&m, cfg.iterations, cfg.seed) {
                Ok((tau, p)) => {
                    cell.tau_b = Some(tau);
                    cell.p_value = Some(p);
                    cell.stars = significance_stars(p).into();
                }
                Err(e) => cell.unavailable = Some(e.to_string()),
            }
            cell
        })
        .collect();
    CorrelationReport { cells }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorrelationReport {
    pub cells: Vec<CorrelationCell>,
}

impl fmt::Display for CorrelationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(
            f,
            "{:<16} {:<14} {:<8} {:<8} {:>5} {:>10} {:>10}",
            "dataset", "dimension", "measure", "level", "n", "tau_b", "p"
        )?;
        for c in &self.cells {
            match (c.tau_b, c.p_value) {
                (Some(t), Some(p)) => writeln!(
                    f,
                    "{:<16} {:<14} {:<8} {:<8} {:>5} {:>10} {:>10.4}",
                    c.dataset,
                    c.dimension,
                    c.measure,
                    c.granularity.to_string(),
                    c.n,
                    format!("{t:.3}{}", c.stars),
                    p
                )?,
                _ => writeln!(
                    f,
                    "{:<16} {:<14} {:<8} {:<8} {:>5} {:>10} {:>10}  ({})",
                    c.dataset,
                    c.dimension,
                    c.measure,
                    c.granularity.to_string(),
                    c.n,
                    "n/a",
                    "n/a",
                    c.unavailable.as_deref().unwrap_or("unavailable")
                )?,
            }
        }
        Ok(())
    }
}

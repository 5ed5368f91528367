//! Target sets and empirical cumulative distributions of runtimes.

use crate::de::RunLog;
use crate::error::{Error, Result};

pub const TARGET_COUNT: usize = 51;
pub const GRID_POINTS: usize = 61;

/// Error thresholds `10^2, 10^1.8, ..., 10^-8`, descending.
#[derive(Clone, Debug, PartialEq)]
pub struct TargetSet {
    pub f_opt: f64,
    pub deltas: Vec<f64>,
}

impl TargetSet {
    pub fn targets(&self) -> Vec<f64> {
        self.deltas.iter().map(|d| self.f_opt + d).collect()
    }
}

pub fn make_targets(f_opt: f64) -> TargetSet {
    let deltas = (0..TARGET_COUNT as i32)
        .map(|j| {
            // exponent (10 - j) / 5; use the exact integer power when it has one
            let num = 10 - j;
            if num % 5 == 0 {
                10f64.powi(num / 5)
            } else {
                10f64.powf(num as f64 / 5.0)
            }
        })
        .collect();
    TargetSet { f_opt, deltas }
}

/// `points` log-spaced evaluation counts from 1 to `budget` inclusive.
pub fn log_grid(budget: u64, points: usize) -> Vec<f64> {
    let top = budget.max(1) as f64;
    let steps = points.max(2) - 1;
    let mut grid: Vec<f64> = (0..=steps).map(|k| top.powf(k as f64 / steps as f64)).collect();
    grid[0] = 1.0;
    grid[steps] = top;
    grid
}

#[derive(Clone, Debug, PartialEq)]
pub struct EcdfCurve {
    pub grid: Vec<f64>,
    pub proportion: Vec<f64>,
    /// Number of (run, target) pairs the proportions are taken over.
    pub denominator: usize,
}

impl EcdfCurve {
    pub fn final_proportion(&self) -> Option<f64> {
        self.proportion.last().copied()
    }
}

/// Proportion of (log, target) pairs whose target was reached within each
/// grid evaluation count.
pub fn ecdf(logs: &[RunLog], targets: &TargetSet, grid: &[f64]) -> Result<EcdfCurve> {
    let Some(first) = logs.first() else {
        return Err(Error::Domain("ECDF over an empty set of runs".into()));
    };
    if let Some(other) = logs.iter().find(|l| l.meta.n != first.meta.n) {
        return Err(Error::Domain(format!("ECDF mixes dimensions {} and {}", first.meta.n, other.meta.n)));
    }
    if grid.windows(2).any(|w| w[0] > w[1]) {
        return Err(Error::Domain("ECDF grid must be ascending".into()));
    }

    // best-so-far errors are non-increasing, so the first entry at or below
    // a threshold is the hitting time of that target
    let mut hits: Vec<u64> = Vec::new();
    for log in logs {
        for &delta in &targets.deltas {
            if let Some(&(e, _)) = log.trace.iter().find(|&&(_, d)| d <= delta) {
                hits.push(e);
            }
        }
    }
    hits.sort_unstable();

    let denominator = logs.len() * targets.deltas.len();
    let proportion =
        grid.iter().map(|&e| hits.partition_point(|&h| h as f64 <= e) as f64 / denominator as f64).collect();
    Ok(EcdfCurve { grid: grid.to_vec(), proportion, denominator })
}

//! Goodness-of-fit helpers for the uniformity checks.

use std::collections::HashMap;

use serde::Serialize;
use statrs::distribution::{ChiSquared, ContinuousCDF};

use crate::enumerate::{brute_force_walks, Region, Walk};
use crate::error::{Error, Result};
use crate::stepset::StepSet;

/// Pearson statistic of `observed` against equal expected cell counts.
pub fn chi_square(observed: &[u64]) -> f64 {
    let total: u64 = observed.iter().sum();
    if observed.is_empty() || total == 0 {
        return 0.0;
    }
    let e = total as f64 / observed.len() as f64;
    observed.iter().map(|&o| (o as f64 - e).powi(2) / e).sum()
}

/// Quantile of the chi-square distribution with `df` degrees of freedom.
pub fn chi_square_quantile(df: usize, p: f64) -> Result<f64> {
    let d = ChiSquared::new(df as f64).map_err(|e| Error::Numeric(e.to_string()))?;
    Ok(d.inverse_cdf(p))
}

#[derive(Debug, Clone, Serialize)]
pub struct UniformityReport {
    pub cells: usize,
    pub draws: u64,
    pub statistic: f64,
    pub quantile: f64,
    pub level: f64,
    /// Draws that fell outside the enumerated support.
    pub outside: u64,
    pub passed: bool,
}

/// Draws `draws` walks from `draw` and tests them against the uniform
/// distribution on all quadrant walks of length `n` (enumerated by brute
/// force).
pub fn uniformity<F>(s: &StepSet, n: usize, draws: u64, level: f64, mut draw: F) -> Result<UniformityReport>
where
    F: FnMut() -> Result<Walk>,
{
    let walks = brute_force_walks(s, n, Region::Quadrant)?;
    if walks.len() < 2 {
        return Err(Error::Argument(format!("{} walks of length {n}, nothing to test", walks.len())));
    }
    let index: HashMap<Vec<usize>, usize> =
        walks.iter().enumerate().map(|(i, w)| (w.step_indices().to_vec(), i)).collect();
    let mut counts = vec![0u64; walks.len()];
    let mut outside = 0;
    for _ in 0..draws {
        match index.get(draw()?.step_indices()) {
            Some(&i) => counts[i] += 1,
            None => outside += 1,
        }
    }
    let statistic = chi_square(&counts);
    let quantile = chi_square_quantile(walks.len() - 1, level)?;
    Ok(UniformityReport {
        cells: walks.len(),
        draws,
        statistic,
        quantile,
        level,
        outside,
        passed: outside == 0 && statistic < quantile,
    })
}

//! Exact enumeration of quadrant walks: forward count series, the full
//! suffix table used by the recursive sampler, brute-force oracles and
//! empirical growth fits.

mod asymptotics;
mod brute;
mod series;
mod table;
mod walk;

use std::fmt;
use std::str::FromStr;

use num_bigint::BigUint;
use serde::Serialize;

use crate::error::{Error, Result};

pub use asymptotics::{estimate_growth, fit_subexp_exponent, ln_biguint, log_ratio};
pub use brute::{brute_force_walks, Region, BRUTE_FORCE_LIMIT};
pub use series::{quadrant_counts, quadrant_counts_reference};
pub use table::{sample_recursive, sample_recursive_traced, suffix_counts, table_bytes, CountTable, DEFAULT_MEM_BUDGET};
pub use walk::Walk;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum Endpoint {
    #[default]
    Any,
    Origin,
    Diagonal,
}

impl fmt::Display for Endpoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Endpoint::Any => "any",
            Endpoint::Origin => "origin",
            Endpoint::Diagonal => "diagonal",
        })
    }
}

impl FromStr for Endpoint {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "any" => Ok(Endpoint::Any),
            "origin" => Ok(Endpoint::Origin),
            "diagonal" => Ok(Endpoint::Diagonal),
            other => Err(Error::Argument(format!(
                "unknown endpoint `{other}` (expected any, origin or diagonal)"
            ))),
        }
    }
}

impl Endpoint {
    pub fn accepts(self, x: i64, y: i64) -> bool {
        match self {
            Endpoint::Any => true,
            Endpoint::Origin => x == 0 && y == 0,
            Endpoint::Diagonal => x == y,
        }
    }
}

/// Exact counts `values[n]` for `n = 0..=N`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CountSeries {
    pub endpoint: Endpoint,
    pub values: Vec<BigUint>,
}

impl CountSeries {
    pub fn new(endpoint: Endpoint, values: Vec<BigUint>) -> Self {
        CountSeries { endpoint, values }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn n_max(&self) -> usize {
        self.values.len().saturating_sub(1)
    }

    pub fn get(&self, n: usize) -> &BigUint {
        &self.values[n]
    }
}

//! Exact offline optimum and structural checks.

mod assignment;
mod submodular;
mod welfare;

pub use assignment::{exhaustive_opt, optimal_matching, EXHAUSTIVE_CAP};
pub use submodular::{check_submodular, SubmodularCheck, SubmodularConfig, Violation};
pub use welfare::{exhaustive_welfare, welfare_greedy, MatchingSetFunction, WelfareInstance};

use crate::error::{Error, Result};
use crate::matching::WeightKind;
use crate::vector::Vector;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WeightSource {
    InnerProduct,
    Distance,
    Explicit,
}

/// Offline-by-online edge weights, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightMatrix {
    rows: usize,
    cols: usize,
    entries: Vec<f64>,
    source: WeightSource,
}

impl WeightMatrix {
    pub fn new(rows: Vec<Vec<f64>>) -> Result<Self> {
        let cols = rows.first().map_or(0, Vec::len);
        if let Some(r) = rows.iter().find(|r| r.len() != cols) {
            return Err(Error::DimensionMismatch {
                expected: cols,
                found: r.len(),
            });
        }
        let n = rows.len();
        Self::from_entries(n, cols, rows.concat(), WeightSource::Explicit)
    }

    pub fn from_entries(rows: usize, cols: usize, entries: Vec<f64>, source: WeightSource) -> Result<Self> {
        if entries.len() != rows * cols {
            return Err(Error::DimensionMismatch {
                expected: rows * cols,
                found: entries.len(),
            });
        }
        if let Some(k) = entries.iter().position(|w| !(w.is_finite() && *w >= 0.0)) {
            return Err(Error::InvalidWeight {
                row: k / cols.max(1),
                col: k % cols.max(1),
                value: entries[k],
            });
        }
        Ok(WeightMatrix {
            rows,
            cols,
            entries,
            source,
        })
    }

    pub fn from_points(offline: &[Vector], online: &[Vector], kind: WeightKind) -> Result<Self> {
        let mut entries = Vec::with_capacity(offline.len() * online.len());
        for x in offline {
            for y in online {
                if x.dim() != y.dim() {
                    return Err(Error::DimensionMismatch {
                        expected: x.dim(),
                        found: y.dim(),
                    });
                }
                entries.push(kind.weight(x.as_slice(), y.as_slice()));
            }
        }
        let source = match kind {
            WeightKind::InnerProduct => WeightSource::InnerProduct,
            WeightKind::Distance => WeightSource::Distance,
        };
        Self::from_entries(offline.len(), online.len(), entries, source)
    }

    /// Number of offline points.
    pub fn rows(&self) -> usize {
        self.rows
    }

    /// Number of online points.
    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn source(&self) -> WeightSource {
        self.source
    }

    pub fn get(&self, offline: usize, online: usize) -> f64 {
        self.entries[offline * self.cols + online]
    }

    pub fn scaled(&self, factor: f64) -> Result<Self> {
        Self::from_entries(
            self.rows,
            self.cols,
            self.entries.iter().map(|w| w * factor).collect(),
            self.source,
        )
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct OptimalMatching {
    pub value: f64,
    /// Offline partner of each online point.
    pub assignment: Vec<Option<usize>>,
}

impl OptimalMatching {
    fn from_assignment(w: &WeightMatrix, assignment: Vec<Option<usize>>) -> Self {
        let value = assignment
            .iter()
            .enumerate()
            .filter_map(|(j, i)| i.map(|i| w.get(i, j)))
            .sum();
        OptimalMatching { value, assignment }
    }

    pub fn is_injective(&self) -> bool {
        let mut seen = std::collections::HashSet::new();
        self.assignment.iter().flatten().all(|i| seen.insert(*i))
    }
}

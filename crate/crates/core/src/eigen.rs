//! Reference eigenvector oracle for the ranking model.
//!
//! The citation snapshot induces a column-stochastic matrix S: entry (i, j)
//! is 1/f_j when paper j cites paper i in-database, with f_j the in-database
//! reference count of j. Column sums of non-dangling columns are exactly 1,
//! so 1 is an eigenvalue of maximal modulus and the full importance score is
//! the eigenvector of that unit eigenvalue, reachable by power iteration
//! from the all-ones vector e.
//!
//! PaperRank is, by construction, the first iterate S·e of that power
//! method. [`verify_first_step`] checks the identity on any graph, which is
//! what makes this module the oracle for the cheap local index: the two
//! sides are computed by independent code paths (per-paper citer sums vs.
//! sparse column-major multiply).
//!
//! Dangling papers (f_j = 0) keep zero columns; no damping or teleportation
//! term is added. Convergence is therefore only guaranteed when every f_j is
//! positive, and the power method reports rather than hides a miss.

use thiserror::Error;

use crate::graph::{CitationGraph, PaperId, RefCountMode};
use crate::rank::{self, RankError};

/// Componentwise tolerance for the first-step identity check.
pub const FIRST_STEP_TOLERANCE: f64 = 1e-12;

/// Per-column tolerance on |column sum - 1| for non-dangling columns.
pub const COLUMN_SUM_TOLERANCE: f64 = 1e-15;

#[derive(Debug, Error)]
pub enum EigenError {
    #[error("vector length {got} does not match matrix dimension {expected}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error(transparent)]
    Rank(#[from] RankError),
}

/// Sparse column-major form of the citation transition matrix.
///
/// Row/column indices follow the sorted paper-id order of the source graph,
/// so multiplications reduce in a fixed order and results are reproducible.
#[derive(Debug, Clone)]
pub struct StochasticMatrix {
    ids: Vec<PaperId>,
    /// columns[j] lists (row, 1/f_j), sorted by row.
    columns: Vec<Vec<(usize, f64)>>,
    dangling: Vec<usize>,
}

impl StochasticMatrix {
    /// Builds S from the in-database reference counts of `graph`.
    pub fn build(graph: &CitationGraph) -> Self {
        let ids: Vec<PaperId> = graph.paper_ids().cloned().collect();
        let index: std::collections::BTreeMap<&PaperId, usize> =
            ids.iter().enumerate().map(|(i, id)| (id, i)).collect();

        let mut columns = vec![Vec::new(); ids.len()];
        let mut dangling = Vec::new();
        for (j, id) in ids.iter().enumerate() {
            let record = graph.record(id).expect("id from graph");
            let refs = record.references.len();
            if refs == 0 {
                dangling.push(j);
                continue;
            }
            let weight = 1.0 / refs as f64;
            let column: Vec<(usize, f64)> = record
                .references
                .iter()
                .map(|target| (index[target], weight))
                .collect();
            // references are stored sorted, so rows are sorted too
            columns[j] = column;
        }
        StochasticMatrix {
            ids,
            columns,
            dangling,
        }
    }

    pub fn dimension(&self) -> usize {
        self.ids.len()
    }

    pub fn paper_ids(&self) -> &[PaperId] {
        &self.ids
    }

    pub fn index_of(&self, id: &PaperId) -> Option<usize> {
        self.ids.binary_search(id).ok()
    }

    pub fn column(&self, j: usize) -> &[(usize, f64)] {
        &self.columns[j]
    }

    /// Columns with no in-database references, in index order.
    pub fn dangling_columns(&self) -> &[usize] {
        &self.dangling
    }

    pub fn has_dangling_columns(&self) -> bool {
        !self.dangling.is_empty()
    }

    /// All-ones start vector e.
    pub fn ones(&self) -> Vec<f64> {
        vec![1.0; self.dimension()]
    }

    /// One multiplication S·v. Dangling columns contribute nothing.
    pub fn power_step(&self, v: &[f64]) -> Result<Vec<f64>, EigenError> {
        if v.len() != self.dimension() {
            return Err(EigenError::DimensionMismatch {
                expected: self.dimension(),
                got: v.len(),
            });
        }
        let mut out = vec![0.0; self.dimension()];
        for (j, column) in self.columns.iter().enumerate() {
            let vj = v[j];
            if vj == 0.0 {
                continue;
            }
            for (row, weight) in column {
                out[*row] += weight * vj;
            }
        }
        Ok(out)
    }

    /// Power iteration v ← S·v from e until the max-norm step difference
    /// drops below `tolerance` or `max_iterations` is reached. Iterates are
    /// not normalized: column stochasticity already preserves the 1-norm on
    /// graphs without dangling columns.
    pub fn power_method(&self, tolerance: f64, max_iterations: usize) -> RankVector {
        let mut current = self.ones();
        let mut iterations = 0;
        let mut residual = f64::INFINITY;
        while iterations < max_iterations {
            let next = self.power_step(&current).expect("dimension preserved");
            residual = max_abs_difference(&next, &current);
            current = next;
            iterations += 1;
            if residual < tolerance {
                return RankVector {
                    values: current,
                    iterations,
                    residual,
                    converged: true,
                };
            }
        }
        RankVector {
            values: current,
            iterations,
            residual: if self.dimension() == 0 { 0.0 } else { residual },
            converged: self.dimension() == 0,
        }
    }

    /// Largest |column sum - 1| over non-dangling columns, compensated
    /// summation so the check itself does not drown in rounding.
    pub fn column_sum_defect(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for column in &self.columns {
            if column.is_empty() {
                continue;
            }
            let mut sum = KahanSum::default();
            for (_, weight) in column {
                sum.add(*weight);
            }
            worst = worst.max((sum.value() - 1.0).abs());
        }
        worst
    }
}

/// Result of a power-method run.
#[derive(Debug, Clone)]
pub struct RankVector {
    pub values: Vec<f64>,
    pub iterations: usize,
    /// Max-norm difference between the last two iterates.
    pub residual: f64,
    pub converged: bool,
}

/// Outcome of the first-step identity check.
#[derive(Debug, Clone, Copy)]
pub struct FirstStepCheck {
    pub holds: bool,
    pub max_deviation: f64,
}

/// Checks that the per-paper citer sums (in-database mode) coincide with one
/// power step S·e, componentwise within [`FIRST_STEP_TOLERANCE`].
pub fn verify_first_step(graph: &CitationGraph) -> Result<FirstStepCheck, EigenError> {
    let matrix = StochasticMatrix::build(graph);
    let stepped = matrix.power_step(&matrix.ones())?;
    let direct = rank::paperrank_all(graph, RefCountMode::InDatabase)?;

    let mut max_deviation: f64 = 0.0;
    for (j, id) in matrix.paper_ids().iter().enumerate() {
        let deviation = (stepped[j] - direct[id]).abs();
        max_deviation = max_deviation.max(deviation);
    }
    Ok(FirstStepCheck {
        holds: max_deviation <= FIRST_STEP_TOLERANCE,
        max_deviation,
    })
}

fn max_abs_difference(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max)
}

/// Compensated accumulator.
#[derive(Debug, Default, Clone, Copy)]
struct KahanSum {
    sum: f64,
    compensation: f64,
}

impl KahanSum {
    fn add(&mut self, value: f64) {
        let y = value - self.compensation;
        let t = self.sum + y;
        self.compensation = (t - self.sum) - y;
        self.sum = t;
    }

    fn value(&self) -> f64 {
        self.sum
    }
}

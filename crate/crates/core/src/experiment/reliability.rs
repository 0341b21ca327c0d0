//! Out-of-sample evaluation of a fixed solution against scenario batches.

use super::ExperimentError;
use crate::master::DrccProblem;
use crate::uncertainty::ScenarioPool;
use nalgebra::DVector;
use serde::{Deserialize, Serialize};

/// One uncertain row realized at a fixed solution: the constraint
/// `a . xi <= b` to be checked against scenarios.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EvaluableRow {
    pub label: String,
    pub a: Vec<f64>,
    pub b: f64,
}

/// A solved decision together with its realized uncertain rows; the
/// on-disk format consumed by the standalone reliability evaluation.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SolutionRows {
    pub x: Vec<f64>,
    pub objective: f64,
    pub rows: Vec<EvaluableRow>,
}

/// Evaluates every uncertain row of `problem` at `x`.
pub fn realize_rows(problem: &DrccProblem, labels: &[String], x: &DVector<f64>) -> SolutionRows {
    let rows = problem
        .uncertain
        .iter()
        .enumerate()
        .map(|(i, spec)| EvaluableRow {
            label: labels.get(i).cloned().unwrap_or_else(|| format!("row {i}")),
            a: spec.row.a_at(x).iter().copied().collect(),
            b: spec.row.b_at(x),
        })
        .collect();
    SolutionRows {
        x: x.iter().copied().collect(),
        objective: problem.objective.value_at(x),
        rows,
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RowReliability {
    pub label: String,
    /// Violation frequency over all evaluated scenarios.
    pub violation_freq: f64,
    /// Largest per-batch violation frequency.
    pub max_batch_violation_freq: f64,
}

/// Joint and per-row reliability over scenario batches, in percent.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ReliabilityReport {
    pub batches: usize,
    pub batch_size: usize,
    pub min: f64,
    pub avg: f64,
    pub max: f64,
    pub per_batch: Vec<f64>,
    pub per_row: Vec<RowReliability>,
}

/// Fraction of scenarios per batch for which ALL rows hold, plus per-row
/// violation frequencies. Scenarios are consumed in consecutive batches and
/// must cover `batches * batch_size` samples.
pub fn evaluate_reliability(
    rows: &[EvaluableRow],
    scenarios: &ScenarioPool,
    batches: usize,
    batch_size: usize,
) -> Result<ReliabilityReport, ExperimentError> {
    const FEAS_TOL: f64 = 1e-7;
    if batches == 0 || batch_size == 0 {
        return Err(ExperimentError::Evaluation("batches and batch_size must be positive".into()));
    }
    if scenarios.len() < batches * batch_size {
        return Err(ExperimentError::Evaluation(format!(
            "need {} scenarios, pool has {}",
            batches * batch_size,
            scenarios.len()
        )));
    }
    let n = scenarios.dim();
    for row in rows {
        if row.a.len() != n {
            return Err(ExperimentError::Evaluation(format!(
                "row '{}' has dimension {}, scenarios have {}",
                row.label,
                row.a.len(),
                n
            )));
        }
    }

    let mut per_batch = Vec::with_capacity(batches);
    let mut row_violations = vec![0usize; rows.len()];
    let mut row_batch_max = vec![0.0f64; rows.len()];
    for batch in 0..batches {
        let mut joint_ok = 0usize;
        let mut row_batch_violations = vec![0usize; rows.len()];
        for s in 0..batch_size {
            let xi = scenarios.sample(batch * batch_size + s);
            let mut all_ok = true;
            for (r, row) in rows.iter().enumerate() {
                let lhs: f64 = row.a.iter().zip(xi.iter()).map(|(a, x)| a * x).sum();
                if lhs > row.b + FEAS_TOL {
                    all_ok = false;
                    row_violations[r] += 1;
                    row_batch_violations[r] += 1;
                }
            }
            if all_ok {
                joint_ok += 1;
            }
        }
        per_batch.push(100.0 * joint_ok as f64 / batch_size as f64);
        for (r, &v) in row_batch_violations.iter().enumerate() {
            row_batch_max[r] = row_batch_max[r].max(v as f64 / batch_size as f64);
        }
    }

    let total = (batches * batch_size) as f64;
    let per_row = rows
        .iter()
        .enumerate()
        .map(|(r, row)| RowReliability {
            label: row.label.clone(),
            violation_freq: row_violations[r] as f64 / total,
            max_batch_violation_freq: row_batch_max[r],
        })
        .collect();
    let min = per_batch.iter().copied().fold(f64::INFINITY, f64::min);
    let max = per_batch.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let avg = per_batch.iter().sum::<f64>() / batches as f64;
    Ok(ReliabilityReport { batches, batch_size, min, avg, max, per_batch, per_row })
}

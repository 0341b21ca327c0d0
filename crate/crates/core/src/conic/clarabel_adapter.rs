//! Clarabel-backed implementation of the solver adapter.

use super::model::{BlockKind, ConicModel};
use super::{ConicSolution, ConicSolver, SolveStatus, SolverError};
use clarabel::algebra::CscMatrix;
use clarabel::solver::{
    DefaultSettingsBuilder, DefaultSolver, IPSolver, SolverStatus, SupportedConeT,
};

/// Interior-point conic solver with tolerances tight enough that re-separated
/// cuts from a solved master carry violations well below the cut-generation
/// threshold.
#[derive(Debug, Clone)]
pub struct ClarabelSolver {
    pub tol_feas: f64,
    pub tol_gap_abs: f64,
    pub tol_gap_rel: f64,
    pub max_iter: u32,
    pub verbose: bool,
}

impl Default for ClarabelSolver {
    fn default() -> Self {
        Self {
            tol_feas: 1e-9,
            tol_gap_abs: 1e-9,
            tol_gap_rel: 1e-9,
            max_iter: 200,
            verbose: std::env::var_os("DRCC_SOLVER_VERBOSE").is_some(),
        }
    }
}

impl ConicSolver for ClarabelSolver {
    fn solve(&self, model: &ConicModel) -> Result<ConicSolution, SolverError> {
        let mut attempt = self.clone();
        for relax in 0..3 {
            let sol = attempt.solve_once(model)?;
            if sol.status != SolveStatus::NumericalFailure || relax == 2 {
                return Ok(sol);
            }
            // Back off the tolerances once or twice before giving up; the
            // cutting-plane loop re-checks feasibility through separation,
            // so a reduced-accuracy master iterate stays safe.
            attempt.tol_feas *= 100.0;
            attempt.tol_gap_abs *= 100.0;
            attempt.tol_gap_rel *= 100.0;
            log::warn!(
                "conic solve hit a numerical failure; retrying with tol_feas {:.1e}",
                attempt.tol_feas
            );
        }
        unreachable!("loop returns on the final attempt");
    }
}

impl ClarabelSolver {
    fn solve_once(&self, model: &ConicModel) -> Result<ConicSolution, SolverError> {
        let n = model.num_vars;
        let total_rows = model.num_rows();

        // Triplets in block order; cones follow the same order.
        let mut cones: Vec<SupportedConeT<f64>> = Vec::with_capacity(model.blocks.len());
        let mut rows: Vec<usize> = Vec::new();
        let mut cols: Vec<usize> = Vec::new();
        let mut vals: Vec<f64> = Vec::new();
        let mut b = Vec::with_capacity(total_rows);
        let mut row_idx = 0usize;
        for block in &model.blocks {
            match block.kind {
                BlockKind::Eq => cones.push(SupportedConeT::ZeroConeT(block.rows.len())),
                BlockKind::Ineq => {
                    cones.push(SupportedConeT::NonnegativeConeT(block.rows.len()))
                }
                BlockKind::Soc => cones.push(SupportedConeT::SecondOrderConeT(block.rows.len())),
            }
            for r in &block.rows {
                for &(c, v) in &r.coeffs {
                    debug_assert!(c < n);
                    rows.push(row_idx);
                    cols.push(c);
                    vals.push(v);
                }
                b.push(r.rhs);
                row_idx += 1;
            }
        }

        let a = csc_from_triplets(total_rows, n, &rows, &cols, &vals);
        let p = CscMatrix::<f64>::zeros((n, n));
        // Reduced tolerances gate the AlmostSolved status; keep them close
        // to the primary ones so a degraded solve still feeds the
        // cutting-plane loop iterates that are meaningfully feasible.
        let settings = DefaultSettingsBuilder::default()
            .verbose(self.verbose)
            .tol_feas(self.tol_feas)
            .tol_gap_abs(self.tol_gap_abs)
            .tol_gap_rel(self.tol_gap_rel)
            .reduced_tol_feas(self.tol_feas * 100.0)
            .reduced_tol_gap_abs(self.tol_gap_abs * 100.0)
            .reduced_tol_gap_rel(self.tol_gap_rel * 100.0)
            .max_iter(self.max_iter)
            .build()
            .map_err(|e| SolverError::Setup(format!("{e:?}")))?;

        let mut solver = DefaultSolver::new(&p, &model.cost, &a, &b, &cones, settings)
            .map_err(|e| SolverError::Setup(format!("{e:?}")))?;
        solver.solve();

        let status = match solver.solution.status {
            SolverStatus::Solved => SolveStatus::Optimal,
            SolverStatus::AlmostSolved => {
                log::warn!("conic solve finished with reduced accuracy");
                SolveStatus::Optimal
            }
            SolverStatus::PrimalInfeasible | SolverStatus::AlmostPrimalInfeasible => {
                SolveStatus::Infeasible
            }
            SolverStatus::DualInfeasible | SolverStatus::AlmostDualInfeasible => {
                SolveStatus::Unbounded
            }
            other @ (SolverStatus::InsufficientProgress | SolverStatus::MaxIterations) => {
                // Nearly-parallel accumulated cuts can stall the dual while
                // the primal iterate is already feasible and gap-optimal;
                // such iterates are safe to return because the caller
                // verifies them independently.
                let gap = (solver.solution.obj_val - solver.solution.obj_val_dual).abs();
                if solver.solution.r_prim <= 1e-7
                    && gap <= 1e-6 * solver.solution.obj_val.abs().max(1.0)
                {
                    log::warn!(
                        "conic solve stalled ({other:?}) at a primal-feasible iterate \
                         (r_prim {:.1e}, gap {gap:.1e}); accepting",
                        solver.solution.r_prim
                    );
                    SolveStatus::Optimal
                } else {
                    log::warn!("conic solve terminated with status {other:?}");
                    SolveStatus::NumericalFailure
                }
            }
            other => {
                log::warn!("conic solve terminated with status {other:?}");
                SolveStatus::NumericalFailure
            }
        };
        Ok(ConicSolution {
            status,
            x: solver.solution.x.clone(),
            objective: solver.solution.obj_val,
        })
    }
}

/// Builds a column-compressed matrix from unordered triplets (duplicates
/// are summed).
fn csc_from_triplets(
    m: usize,
    n: usize,
    rows: &[usize],
    cols: &[usize],
    vals: &[f64],
) -> CscMatrix<f64> {
    let mut per_col: Vec<Vec<(usize, f64)>> = vec![Vec::new(); n];
    for ((&r, &c), &v) in rows.iter().zip(cols.iter()).zip(vals.iter()) {
        per_col[c].push((r, v));
    }
    let mut colptr = Vec::with_capacity(n + 1);
    let mut rowval = Vec::with_capacity(vals.len());
    let mut nzval = Vec::with_capacity(vals.len());
    colptr.push(0);
    for col in per_col.iter_mut() {
        col.sort_by_key(|(r, _)| *r);
        let mut i = 0;
        while i < col.len() {
            let (r, mut v) = col[i];
            let mut j = i + 1;
            while j < col.len() && col[j].0 == r {
                v += col[j].1;
                j += 1;
            }
            rowval.push(r);
            nzval.push(v);
            i = j;
        }
        colptr.push(rowval.len());
    }
    CscMatrix::new(m, n, colptr, rowval, nzval)
}

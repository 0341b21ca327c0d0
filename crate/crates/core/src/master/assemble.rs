//! Translation of a [`DrccProblem`] plus a cut pool into one conic model.
//!
//! The quadratic objective becomes a second-order cone epigraph
//! (`||(2 S x, t - 1)|| <= t + 1` with `S'S = Q`), so the solver input is a
//! linear objective over zero / nonnegative / second-order cones only. The
//! translation is deterministic: the same problem and pool produce the same
//! model.

use super::problem::{CutPool, DrccProblem};
use super::MasterError;
use crate::ambiguity::{
    cut_d1, cut_d2_at, mode_feasibility_constraints, scaled_covariance_cut, AmbiguityKind,
    ModeFeasibility,
};
use crate::ambiguity::{k_factor, KFactorKind};
use crate::conic::{dense_to_sparse, ConicModel, ModelBuilder};
use crate::linalg::sym_sqrt;

pub fn assemble_master(problem: &DrccProblem, pool: &CutPool) -> Result<ConicModel, MasterError> {
    let l = problem.num_vars;
    let mut mb = ModelBuilder::new(l);

    for (j, c) in problem.objective.linear.iter().enumerate() {
        if *c != 0.0 {
            mb.add_cost(j, *c);
        }
    }
    add_quadratic_epigraph(&mut mb, problem)?;

    for (coeffs, rhs) in &problem.eqs {
        mb.add_eq(dense_to_sparse(coeffs, 0), *rhs);
    }
    for (coeffs, rhs) in &problem.ineqs {
        mb.add_ineq(dense_to_sparse(coeffs, 0), *rhs);
    }

    for (r_idx, spec) in problem.uncertain.iter().enumerate() {
        if let Some(support) = &spec.mode_feasibility {
            match mode_feasibility_constraints(support, &spec.row) {
                ModeFeasibility::Linear { coeffs, rhs } => {
                    mb.add_ineq(dense_to_sparse(&coeffs, 0), rhs);
                }
                ModeFeasibility::BoxLinearized { center, half } => {
                    add_box_feasibility(&mut mb, spec, &center, &half);
                }
                ModeFeasibility::Soc(cut) => mb.add_soc_cut(&cut, 0),
            }
        }

        let uni = &spec.config.unimodality;
        match &spec.config.kind {
            AmbiguityKind::D1 => {
                mb.add_soc_cut(&cut_d1(&spec.moments, uni.epsilon, &spec.row)?, 0);
            }
            AmbiguityKind::D4 => {
                let k = k_factor(KFactorKind::D4, uni)?;
                mb.add_soc_cut(&scaled_covariance_cut(&spec.moments, k, &spec.row)?, 0);
            }
            AmbiguityKind::D5 => {
                let k = k_factor(KFactorKind::D5, uni)?;
                mb.add_soc_cut(&scaled_covariance_cut(&spec.moments, k, &spec.row)?, 0);
            }
            AmbiguityKind::D2 { .. } | AmbiguityKind::D3 { .. } => {
                for (tau, mode) in pool.row(r_idx) {
                    mb.add_soc_cut(&cut_d2_at(&spec.moments, mode, uni, *tau, &spec.row)?, 0);
                }
            }
        }
    }
    Ok(mb.build())
}

fn add_quadratic_epigraph(mb: &mut ModelBuilder, problem: &DrccProblem) -> Result<(), MasterError> {
    let q = &problem.objective.quad;
    if q.amax() == 0.0 {
        return Ok(());
    }
    let s = sym_sqrt(q).ok_or_else(|| {
        MasterError::Invalid("objective quadratic part is not positive semidefinite".into())
    })?;
    let t = mb.add_vars(1);
    mb.add_cost(t, 1.0);
    let mut lhs_rows = Vec::new();
    for i in 0..s.nrows() {
        let coeffs: Vec<(usize, f64)> = s
            .row(i)
            .iter()
            .enumerate()
            .filter(|(_, v)| v.abs() > 1e-14)
            .map(|(j, v)| (j, 2.0 * v))
            .collect();
        if !coeffs.is_empty() {
            lhs_rows.push((coeffs, 0.0));
        }
    }
    lhs_rows.push((vec![(t, 1.0)], -1.0));
    mb.add_soc(vec![(t, 1.0)], 1.0, lhs_rows);
    Ok(())
}

/// Rectangle mode feasibility via auxiliary variables `t >= ±a(x)`:
/// `a(x)'center + t'half <= b(x)`.
fn add_box_feasibility(
    mb: &mut ModelBuilder,
    spec: &super::problem::UncertainSpec,
    center: &nalgebra::DVector<f64>,
    half: &nalgebra::DVector<f64>,
) {
    let row = &spec.row;
    let n = row.uncertainty_dim();
    let t0 = mb.add_vars(n);
    for i in 0..n {
        let a_i: Vec<(usize, f64)> = row
            .a_lin
            .row(i)
            .iter()
            .enumerate()
            .filter(|(_, v)| **v != 0.0)
            .map(|(j, v)| (j, *v))
            .collect();
        // a_i(x) - t_i <= 0
        let mut up = a_i.clone();
        up.push((t0 + i, -1.0));
        mb.add_ineq(up, -row.a_const[i]);
        // -a_i(x) - t_i <= 0
        let mut dn: Vec<(usize, f64)> = a_i.iter().map(|&(j, v)| (j, -v)).collect();
        dn.push((t0 + i, -1.0));
        mb.add_ineq(dn, row.a_const[i]);
    }
    // a(x)'center + t'half - b(x) <= 0
    let x_part = row.a_lin.transpose() * center - &row.b_lin;
    let mut coeffs = dense_to_sparse(&x_part, 0);
    for i in 0..n {
        if half[i] != 0.0 {
            coeffs.push((t0 + i, half[i]));
        }
    }
    mb.add_ineq(coeffs, row.b_const - center.dot(&row.a_const));
}

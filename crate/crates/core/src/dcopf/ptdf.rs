//! Power transfer distribution factors and the reference B-theta flow solve.

use super::network::Network;
use super::DcopfError;
use nalgebra::{DMatrix, DVector};

/// Bus and branch susceptance matrices. The DC equations are homogeneous in
/// the power unit, so MW injections give MW flows directly.
fn susceptance_matrices(network: &Network) -> (DMatrix<f64>, DMatrix<f64>) {
    let n = network.num_buses();
    let m = network.branches.len();
    let mut b_bus = DMatrix::zeros(n, n);
    let mut b_branch = DMatrix::zeros(m, n);
    for (k, br) in network.branches.iter().enumerate() {
        let i = network.bus_index(br.from).expect("validated");
        let j = network.bus_index(br.to).expect("validated");
        let w = 1.0 / br.reactance;
        b_bus[(i, i)] += w;
        b_bus[(j, j)] += w;
        b_bus[(i, j)] -= w;
        b_bus[(j, i)] -= w;
        b_branch[(k, i)] = w;
        b_branch[(k, j)] = -w;
    }
    (b_bus, b_branch)
}

/// PTDF matrix (branches x buses): entry (f, b) is the MW flow on branch f
/// per MW injected at bus b and withdrawn at the slack. The slack column is
/// identically zero.
pub fn compute_ptdf(network: &Network, slack_id: usize) -> Result<DMatrix<f64>, DcopfError> {
    let n = network.num_buses();
    let m = network.branches.len();
    let slack = network
        .bus_index(slack_id)
        .ok_or_else(|| DcopfError::Validation(format!("slack bus {slack_id} not found")))?;
    let (b_bus, b_branch) = susceptance_matrices(network);

    // Reduced system without the slack row/column.
    let keep: Vec<usize> = (0..n).filter(|&i| i != slack).collect();
    let mut b_red = DMatrix::zeros(n - 1, n - 1);
    for (r, &i) in keep.iter().enumerate() {
        for (c, &j) in keep.iter().enumerate() {
            b_red[(r, c)] = b_bus[(i, j)];
        }
    }
    let lu = b_red.lu();
    let mut ptdf = DMatrix::zeros(m, n);
    for (col_red, &bus) in keep.iter().enumerate() {
        let mut e = DVector::zeros(n - 1);
        e[col_red] = 1.0;
        let theta_red = lu.solve(&e).ok_or(DcopfError::SingularSusceptance)?;
        let mut theta = DVector::zeros(n);
        for (r, &i) in keep.iter().enumerate() {
            theta[i] = theta_red[r];
        }
        ptdf.set_column(bus, &(&b_branch * theta));
    }
    Ok(ptdf)
}

/// Direct DC power flow: solves `B theta = P` with the slack angle pinned
/// to zero and returns per-branch MW flows. The injection vector is in bus
/// order and must sum to zero.
pub fn solve_dc_flow(
    network: &Network,
    injections_mw: &DVector<f64>,
    slack_id: usize,
) -> Result<DVector<f64>, DcopfError> {
    let n = network.num_buses();
    if injections_mw.len() != n {
        return Err(DcopfError::DimensionMismatch(format!(
            "injection vector has {} entries for {} buses",
            injections_mw.len(),
            n
        )));
    }
    let slack = network
        .bus_index(slack_id)
        .ok_or_else(|| DcopfError::Validation(format!("slack bus {slack_id} not found")))?;
    let (b_bus, b_branch) = susceptance_matrices(network);
    let keep: Vec<usize> = (0..n).filter(|&i| i != slack).collect();
    let mut b_red = DMatrix::zeros(n - 1, n - 1);
    let mut p_red = DVector::zeros(n - 1);
    for (r, &i) in keep.iter().enumerate() {
        p_red[r] = injections_mw[i];
        for (c, &j) in keep.iter().enumerate() {
            b_red[(r, c)] = b_bus[(i, j)];
        }
    }
    let theta_red = b_red.lu().solve(&p_red).ok_or(DcopfError::SingularSusceptance)?;
    let mut theta = DVector::zeros(n);
    for (r, &i) in keep.iter().enumerate() {
        theta[i] = theta_red[r];
    }
    Ok(&b_branch * theta)
}

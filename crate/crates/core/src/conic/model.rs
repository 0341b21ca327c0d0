//! Model intermediate representation and builder.

use crate::ambiguity::SocCut;
use nalgebra::DVector;

/// One affine row: `coeffs . x` compared against `rhs`. Coefficients are
/// kept sparse as (column, value) pairs.
#[derive(Debug, Clone)]
pub struct AffineRow {
    pub coeffs: Vec<(usize, f64)>,
    pub rhs: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BlockKind {
    /// All rows hold with equality.
    Eq,
    /// All rows hold as `coeffs . x <= rhs`.
    Ineq,
    /// Rows form one second-order cone: row 0 is the cone's scalar side
    /// (`s0 = rhs - coeffs.x` must dominate), remaining rows the vector
    /// side (`s_i = rhs_i - coeffs_i.x` with `s0 >= ||s_1..||`), so a cut
    /// `||L x + l|| <= d.x + e` stores row0 = (-d, e) and rows (-L_i, l_i).
    Soc,
}

#[derive(Debug, Clone)]
pub struct ConeBlock {
    pub kind: BlockKind,
    pub rows: Vec<AffineRow>,
}

/// A conic program: `min cost . x` subject to the blocks.
#[derive(Debug, Clone)]
pub struct ConicModel {
    pub num_vars: usize,
    pub cost: Vec<f64>,
    pub blocks: Vec<ConeBlock>,
}

impl ConicModel {
    pub fn num_soc_blocks(&self) -> usize {
        self.blocks.iter().filter(|b| b.kind == BlockKind::Soc).count()
    }

    pub fn num_rows(&self) -> usize {
        self.blocks.iter().map(|b| b.rows.len()).sum()
    }
}

/// Incremental builder used by the master assembler.
#[derive(Debug, Default)]
pub struct ModelBuilder {
    num_vars: usize,
    cost: Vec<f64>,
    blocks: Vec<ConeBlock>,
}

impl ModelBuilder {
    pub fn new(num_vars: usize) -> Self {
        Self { num_vars, cost: vec![0.0; num_vars], blocks: Vec::new() }
    }

    pub fn num_vars(&self) -> usize {
        self.num_vars
    }

    /// Appends `count` fresh variables and returns the index of the first.
    pub fn add_vars(&mut self, count: usize) -> usize {
        let first = self.num_vars;
        self.num_vars += count;
        self.cost.resize(self.num_vars, 0.0);
        first
    }

    pub fn add_cost(&mut self, var: usize, coeff: f64) {
        self.cost[var] += coeff;
    }

    fn push_simple(&mut self, kind: BlockKind, coeffs: Vec<(usize, f64)>, rhs: f64) {
        // Merge single rows into a trailing block of the same kind so the
        // solver sees one large cone instead of thousands of unit cones.
        if let Some(last) = self.blocks.last_mut() {
            if last.kind == kind {
                last.rows.push(AffineRow { coeffs, rhs });
                return;
            }
        }
        self.blocks.push(ConeBlock { kind, rows: vec![AffineRow { coeffs, rhs }] });
    }

    /// `coeffs . x = rhs`
    pub fn add_eq(&mut self, coeffs: Vec<(usize, f64)>, rhs: f64) {
        self.push_simple(BlockKind::Eq, coeffs, rhs);
    }

    /// `coeffs . x <= rhs`
    pub fn add_ineq(&mut self, coeffs: Vec<(usize, f64)>, rhs: f64) {
        self.push_simple(BlockKind::Ineq, coeffs, rhs);
    }

    /// `||Lx + l|| <= d.x + e` given per-row (coeffs, const) pairs for the
    /// vector side and one (coeffs, const) pair for the scalar side.
    pub fn add_soc(
        &mut self,
        rhs_coeffs: Vec<(usize, f64)>,
        rhs_const: f64,
        lhs_rows: Vec<(Vec<(usize, f64)>, f64)>,
    ) {
        let mut rows = Vec::with_capacity(lhs_rows.len() + 1);
        rows.push(AffineRow {
            coeffs: rhs_coeffs.into_iter().map(|(i, v)| (i, -v)).collect(),
            rhs: rhs_const,
        });
        for (coeffs, c) in lhs_rows {
            rows.push(AffineRow {
                coeffs: coeffs.into_iter().map(|(i, v)| (i, -v)).collect(),
                rhs: c,
            });
        }
        self.blocks.push(ConeBlock { kind: BlockKind::Soc, rows });
    }

    /// Adds a [`SocCut`] whose variable block starts at `x_offset`. A cut
    /// with an identically zero matrix part (the tau0 member of the cut
    /// family) is an ordinary linear constraint `0 <= rhs(x)`; emitting it
    /// as such keeps the cone interiors nonempty for the interior-point
    /// solver.
    pub fn add_soc_cut(&mut self, cut: &SocCut, x_offset: usize) {
        let rhs_coeffs = dense_to_sparse(&cut.rhs_lin, x_offset);
        if cut.lhs_is_zero() {
            let neg: Vec<(usize, f64)> = rhs_coeffs.into_iter().map(|(i, v)| (i, -v)).collect();
            self.add_ineq(neg, cut.rhs_const);
            return;
        }
        let lhs_rows = (0..cut.lhs_lin.nrows())
            .map(|r| {
                let coeffs: Vec<(usize, f64)> = cut
                    .lhs_lin
                    .row(r)
                    .iter()
                    .enumerate()
                    .filter(|(_, v)| **v != 0.0)
                    .map(|(j, v)| (x_offset + j, *v))
                    .collect();
                (coeffs, cut.lhs_const[r])
            })
            .collect();
        self.add_soc(rhs_coeffs, cut.rhs_const, lhs_rows);
    }

    pub fn build(self) -> ConicModel {
        ConicModel { num_vars: self.num_vars, cost: self.cost, blocks: self.blocks }
    }
}

/// Drops explicit zeros while converting a dense coefficient vector.
pub fn dense_to_sparse(v: &DVector<f64>, offset: usize) -> Vec<(usize, f64)> {
    v.iter()
        .enumerate()
        .filter(|(_, c)| **c != 0.0)
        .map(|(i, c)| (offset + i, *c))
        .collect()
}

//! Construction of the chance-constrained DC-OPF.
//!
//! Decision vector layout: `x = [P_G, R_up, R_dn, d_G]`, each block of
//! length N_G. Real-time reserve deployment is `R_G = -d_G * sum(w~)`, the
//! distributed response to the total wind forecast error. Substituting the
//! deployment and the flow equations into the line, generation, and reserve
//! limits yields one uncertain row `a(x)' w~ <= b(x)` per direction.

use super::network::Network;
use super::ptdf::compute_ptdf;
use super::DcopfError;
use crate::ambiguity::{AmbiguityConfig, UncertainRow};
use crate::master::{DrccProblem, QuadObjective, UncertainSpec};
use crate::uncertainty::{ModeSupport, MomentData};
use nalgebra::{DMatrix, DVector};

#[derive(Debug, Clone)]
pub struct OpfOptions {
    /// Reserve capacity price as a multiple of each generator's linear
    /// energy cost.
    pub reserve_cost_factor: f64,
    /// When set, this mode support's feasibility constraints are enforced on
    /// every uncertain row regardless of ambiguity kind, making objective
    /// values comparable across kinds.
    pub uniform_mode_feasibility: Option<ModeSupport>,
}

impl Default for OpfOptions {
    fn default() -> Self {
        Self { reserve_cost_factor: 10.0, uniform_mode_feasibility: None }
    }
}

/// Decoded block view of a solution vector.
#[derive(Debug, Clone)]
pub struct OpfDecision {
    pub p_gen: DVector<f64>,
    pub r_up: DVector<f64>,
    pub r_dn: DVector<f64>,
    pub dist: DVector<f64>,
}

impl OpfDecision {
    pub fn generation_cost(&self, network: &Network) -> f64 {
        network
            .generators
            .iter()
            .zip(self.p_gen.iter())
            .map(|(g, &p)| g.cost_quad * p * p + g.cost_lin * p + g.cost_const)
            .sum()
    }

    pub fn reserve_cost(&self, network: &Network, factor: f64) -> f64 {
        network
            .generators
            .iter()
            .enumerate()
            .map(|(i, g)| factor * g.cost_lin * (self.r_up[i] + self.r_dn[i]))
            .sum()
    }
}

pub fn decode_decision(network: &Network, x: &DVector<f64>) -> OpfDecision {
    let ng = network.num_generators();
    OpfDecision {
        p_gen: x.rows(0, ng).into_owned(),
        r_up: x.rows(ng, ng).into_owned(),
        r_dn: x.rows(2 * ng, ng).into_owned(),
        dist: x.rows(3 * ng, ng).into_owned(),
    }
}

/// The assembled problem plus a human-readable label per uncertain row.
#[derive(Debug, Clone)]
pub struct BuiltOpf {
    pub problem: DrccProblem,
    pub row_labels: Vec<String>,
}

/// Builds the DRCC reserve-scheduling problem for one ambiguity config
/// applied to all uncertain rows.
pub fn build_problem(
    network: &Network,
    moments: &MomentData,
    config: &AmbiguityConfig,
    options: &OpfOptions,
) -> Result<BuiltOpf, DcopfError> {
    network.validate()?;
    let nw = network.num_wind();
    if nw == 0 {
        return Err(DcopfError::Validation(
            "chance-constrained build requires at least one wind plant".into(),
        ));
    }
    if moments.dim() != nw {
        return Err(DcopfError::DimensionMismatch(format!(
            "moments dimension {} vs {} wind plants",
            moments.dim(),
            nw
        )));
    }

    let mut built = deterministic_skeleton(network, options)?;
    let skeleton = &mut built.0;
    let ng = network.num_generators();
    let l = 4 * ng;

    let ptdf = compute_ptdf(network, network.slack_bus)?;
    let gen_cols = gen_incidence_cols(network, &ptdf);
    let wind_cols = wind_incidence_cols(network, &ptdf);
    let fixed_flow = fixed_injection_flow(network, &ptdf);

    let mut rows: Vec<(UncertainRow, String)> = Vec::new();

    // Line limits, both directions, after substituting the reserve response:
    // flow_i(x, w~) = base_i(x) + a_i(x)' w~ with
    //   base_i(x) = sum_g ptdfg[i,g] P_g + fixed_i
    //   a_i(x)_k  = ptdfw[i,k] - sum_g ptdfg[i,g] d_g   (same for every k)
    for (i, br) in network.branches.iter().enumerate() {
        if !br.limit_mw.is_finite() {
            continue;
        }
        for sign in [1.0f64, -1.0] {
            let mut a_lin = DMatrix::zeros(nw, l);
            for k in 0..nw {
                for g in 0..ng {
                    a_lin[(k, 3 * ng + g)] = -sign * gen_cols[(i, g)];
                }
            }
            let a_const = DVector::from_fn(nw, |k, _| sign * wind_cols[(i, k)]);
            let mut b_lin = DVector::zeros(l);
            for g in 0..ng {
                b_lin[g] = -sign * gen_cols[(i, g)];
            }
            let b_const = br.limit_mw - sign * fixed_flow[i];
            let dir = if sign > 0.0 { "fwd" } else { "rev" };
            rows.push((
                UncertainRow::new(a_lin, a_const, b_lin, b_const).expect("consistent dims"),
                format!("line {}-{} {}", br.from, br.to, dir),
            ));
        }
    }

    // Generator limits and reserve capacities. With s = sum(w~):
    //   -d_g s <= Pmax_g - P_g     (upper generation)
    //    d_g s <= P_g - Pmin_g     (lower generation)
    //   -d_g s <= R_up_g           (up reserve)
    //    d_g s <= R_dn_g           (down reserve)
    for (g, gen) in network.generators.iter().enumerate() {
        let mk = |d_sign: f64, b_lin: DVector<f64>, b_const: f64, label: String| {
            let mut a_lin = DMatrix::zeros(nw, l);
            for k in 0..nw {
                a_lin[(k, 3 * ng + g)] = d_sign;
            }
            (
                UncertainRow::new(a_lin, DVector::zeros(nw), b_lin, b_const)
                    .expect("consistent dims"),
                label,
            )
        };
        let mut b_up = DVector::zeros(l);
        b_up[g] = -1.0;
        rows.push(mk(-1.0, b_up, gen.p_max, format!("gen {} upper", gen.bus)));

        let mut b_dn = DVector::zeros(l);
        b_dn[g] = 1.0;
        rows.push(mk(1.0, b_dn, -gen.p_min, format!("gen {} lower", gen.bus)));

        let mut b_rup = DVector::zeros(l);
        b_rup[ng + g] = 1.0;
        rows.push(mk(-1.0, b_rup, 0.0, format!("gen {} reserve-up", gen.bus)));

        let mut b_rdn = DVector::zeros(l);
        b_rdn[2 * ng + g] = 1.0;
        rows.push(mk(1.0, b_rdn, 0.0, format!("gen {} reserve-dn", gen.bus)));
    }

    let mut labels = Vec::with_capacity(rows.len());
    for (row, label) in rows {
        let spec = UncertainSpec::new(row, config.clone(), moments.clone());
        let spec = match &options.uniform_mode_feasibility {
            Some(s) => spec.with_mode_feasibility(Some(s.clone())),
            None => spec,
        };
        skeleton.uncertain.push(spec);
        labels.push(label);
    }

    Ok(BuiltOpf { problem: built.0, row_labels: labels })
}

/// Deterministic DC-OPF over the same variable layout: line limits at
/// w~ = 0, generation bounds, balance, and the distribution-sum row. With
/// reserve prices positive the optimum drives reserves to zero, so the
/// objective equals the plain dispatch cost.
pub fn build_deterministic(
    network: &Network,
    options: &OpfOptions,
) -> Result<DrccProblem, DcopfError> {
    network.validate()?;
    let (mut problem, gen_cols, fixed_flow) = deterministic_skeleton(network, options)?;
    let ng = network.num_generators();
    let l = 4 * ng;
    for (i, br) in network.branches.iter().enumerate() {
        if !br.limit_mw.is_finite() {
            continue;
        }
        for sign in [1.0f64, -1.0] {
            let mut coeffs = DVector::zeros(l);
            for g in 0..ng {
                coeffs[g] = sign * gen_cols[(i, g)];
            }
            problem.ineqs.push((coeffs, br.limit_mw - sign * fixed_flow[i]));
        }
    }
    for (g, gen) in network.generators.iter().enumerate() {
        let mut up = DVector::zeros(l);
        up[g] = 1.0;
        problem.ineqs.push((up, gen.p_max));
        let mut dn = DVector::zeros(l);
        dn[g] = -1.0;
        problem.ineqs.push((dn, -gen.p_min));
    }
    Ok(problem)
}

type Skeleton = (DrccProblem, DMatrix<f64>, DVector<f64>);

/// Objective, power balance, distribution sum, and nonnegativity; shared by
/// the robust and deterministic builds. Also returns the PTDF columns for
/// generators and the fixed-injection flows.
fn deterministic_skeleton(
    network: &Network,
    options: &OpfOptions,
) -> Result<Skeleton, DcopfError> {
    let ng = network.num_generators();
    if ng == 0 {
        return Err(DcopfError::Validation("network has no generators".into()));
    }
    let l = 4 * ng;

    let mut quad = DMatrix::zeros(l, l);
    let mut linear = DVector::zeros(l);
    let mut constant = 0.0;
    for (g, gen) in network.generators.iter().enumerate() {
        quad[(g, g)] = gen.cost_quad;
        linear[g] = gen.cost_lin;
        linear[ng + g] = options.reserve_cost_factor * gen.cost_lin;
        linear[2 * ng + g] = options.reserve_cost_factor * gen.cost_lin;
        constant += gen.cost_const;
    }
    let mut problem = DrccProblem::new(l, QuadObjective { quad, linear, constant });

    // Power balance at forecast: sum(P_G) = total load - total wind.
    let mut balance = DVector::zeros(l);
    for g in 0..ng {
        balance[g] = 1.0;
    }
    problem
        .eqs
        .push((balance, network.total_load() - network.total_wind_forecast()));

    // Distribution vector sums to one.
    let mut dist = DVector::zeros(l);
    for g in 0..ng {
        dist[3 * ng + g] = 1.0;
    }
    problem.eqs.push((dist, 1.0));

    // Nonnegativity of all four blocks.
    for v in 0..l {
        let mut coeffs = DVector::zeros(l);
        coeffs[v] = -1.0;
        problem.ineqs.push((coeffs, 0.0));
    }

    let ptdf = compute_ptdf(network, network.slack_bus)?;
    Ok((problem, gen_incidence_cols(network, &ptdf), fixed_injection_flow(network, &ptdf)))
}

/// PTDF columns mapped onto generators: (branches x N_G).
fn gen_incidence_cols(network: &Network, ptdf: &DMatrix<f64>) -> DMatrix<f64> {
    let m = network.branches.len();
    let ng = network.num_generators();
    DMatrix::from_fn(m, ng, |i, g| {
        let bus = network.bus_index(network.generators[g].bus).expect("validated");
        ptdf[(i, bus)]
    })
}

/// PTDF columns mapped onto wind plants: (branches x N_W).
fn wind_incidence_cols(network: &Network, ptdf: &DMatrix<f64>) -> DMatrix<f64> {
    let m = network.branches.len();
    let nw = network.num_wind();
    DMatrix::from_fn(m, nw, |i, w| {
        let bus = network.bus_index(network.wind[w].bus).expect("validated");
        ptdf[(i, bus)]
    })
}

/// Flows from the fixed injections (wind forecast minus load).
fn fixed_injection_flow(network: &Network, ptdf: &DMatrix<f64>) -> DVector<f64> {
    let n = network.num_buses();
    let mut inj = DVector::zeros(n);
    for w in &network.wind {
        inj[network.bus_index(w.bus).expect("validated")] += w.forecast_mw;
    }
    for (i, b) in network.buses.iter().enumerate() {
        inj[i] -= b.load_mw;
    }
    ptdf * inj
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ambiguity::AmbiguityKind;
    use crate::conic::ClarabelSolver;
    use crate::dcopf::network::{Branch, Bus, Generator, WindPlant};
    use crate::master::{solve_drcc, SolveOptions};
    use crate::uncertainty::UnimodalityConfig;
    use approx::assert_relative_eq;
    use rand::prelude::*;
    use rand_chacha::ChaCha8Rng;

    fn toy_network() -> Network {
        Network {
            base_mva: 100.0,
            buses: vec![
                Bus { id: 1, load_mw: 0.0 },
                Bus { id: 2, load_mw: 80.0 },
                Bus { id: 3, load_mw: 20.0 },
            ],
            branches: vec![
                Branch { from: 1, to: 2, reactance: 0.1, limit_mw: 120.0 },
                Branch { from: 2, to: 3, reactance: 0.1, limit_mw: 60.0 },
                Branch { from: 1, to: 3, reactance: 0.1, limit_mw: 60.0 },
            ],
            generators: vec![
                Generator {
                    bus: 1,
                    p_min: 0.0,
                    p_max: 120.0,
                    cost_quad: 0.02,
                    cost_lin: 2.0,
                    cost_const: 0.0,
                },
                Generator {
                    bus: 3,
                    p_min: 0.0,
                    p_max: 60.0,
                    cost_quad: 0.03,
                    cost_lin: 2.5,
                    cost_const: 0.0,
                },
            ],
            wind: vec![
                WindPlant { bus: 2, forecast_mw: 15.0 },
                WindPlant { bus: 3, forecast_mw: 10.0 },
            ],
            slack_bus: 1,
        }
    }

    fn toy_moments() -> MomentData {
        MomentData::from_mean_cov(
            DVector::zeros(2),
            DMatrix::from_row_slice(2, 2, &[4.0, 0.8, 0.8, 3.0]),
        )
        .unwrap()
    }

    fn d3_config() -> AmbiguityConfig {
        let uni = UnimodalityConfig::new(1.0, 0.05).unwrap();
        let support = ModeSupport::rectangle(
            DVector::from_vec(vec![-1.0, -1.0]),
            DVector::from_vec(vec![0.5, 0.5]),
        )
        .unwrap();
        AmbiguityConfig::new(AmbiguityKind::D3 { support }, uni).unwrap()
    }

    #[test]
    fn rows_are_affine_by_finite_differences() {
        let net = toy_network();
        let built =
            build_problem(&net, &toy_moments(), &d3_config(), &OpfOptions::default()).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        let l = built.problem.num_vars;
        for spec in &built.problem.uncertain {
            let x0 = DVector::from_fn(l, |_, _| rng.random_range(-1.0..1.0));
            let dx = DVector::from_fn(l, |_, _| rng.random_range(-1.0..1.0));
            // Affinity: value at midpoint equals mean of endpoint values.
            let a0 = spec.row.a_at(&x0);
            let a1 = spec.row.a_at(&(&x0 + &dx));
            let am = spec.row.a_at(&(&x0 + &dx * 0.5));
            assert_relative_eq!((a0 + a1) * 0.5, am, epsilon = 1e-10);
            let b0 = spec.row.b_at(&x0);
            let b1 = spec.row.b_at(&(&x0 + &dx));
            let bm = spec.row.b_at(&(&x0 + &dx * 0.5));
            assert_relative_eq!((b0 + b1) * 0.5, bm, epsilon = 1e-10);
        }
    }

    #[test]
    fn single_generator_response_reduces_to_column_difference() {
        // d_G = e_g makes the line-row wind coefficients equal
        // ptdfw[i, k] - ptdfg[i, g] for every wind k.
        let net = toy_network();
        let built =
            build_problem(&net, &toy_moments(), &d3_config(), &OpfOptions::default()).unwrap();
        let ng = net.num_generators();
        let mut x = DVector::zeros(built.problem.num_vars);
        x[3 * ng] = 1.0; // all response on generator 1
        let ptdf = compute_ptdf(&net, 1).unwrap();
        // Row 0 is line 1 forward.
        let a = built.problem.uncertain[0].row.a_at(&x);
        let g_bus = net.bus_index(net.generators[0].bus).unwrap();
        for (k, w) in net.wind.iter().enumerate() {
            let w_bus = net.bus_index(w.bus).unwrap();
            assert_relative_eq!(a[k], ptdf[(0, w_bus)] - ptdf[(0, g_bus)], epsilon = 1e-12);
        }
    }

    #[test]
    fn balance_holds_and_near_zero_covariance_matches_deterministic() {
        let net = toy_network();
        let solver = ClarabelSolver::default();
        let opts = SolveOptions::default();

        // Deterministic reference.
        let det = build_deterministic(&net, &OpfOptions::default()).unwrap();
        let det_report = solve_drcc(&det, &solver, &opts).unwrap();

        // Robust problem with (numerically) vanishing wind covariance and a
        // point mode at the mean.
        let tiny = MomentData::from_mean_cov(
            DVector::zeros(2),
            DMatrix::identity(2, 2) * 1e-8,
        )
        .unwrap();
        let uni = UnimodalityConfig::new(1.0, 0.05).unwrap();
        let config =
            AmbiguityConfig::new(AmbiguityKind::D2 { mode: DVector::zeros(2) }, uni).unwrap();
        let built = build_problem(&net, &tiny, &config, &OpfOptions::default()).unwrap();
        let report = solve_drcc(&built.problem, &solver, &opts).unwrap();

        assert_relative_eq!(
            report.objective_value,
            det_report.objective_value,
            max_relative = 1e-4
        );
        let dec = decode_decision(&net, &report.x_vector());
        // Reserve capacities collapse with the uncertainty.
        assert!(dec.r_up.amax() < 1e-3);
        assert!(dec.r_dn.amax() < 1e-3);
        // Power balance at the forecast.
        let gen_total: f64 = dec.p_gen.iter().sum();
        assert_relative_eq!(
            gen_total,
            net.total_load() - net.total_wind_forecast(),
            epsilon = 1e-6
        );
    }

    #[test]
    fn d3_solve_on_toy_network_converges() {
        let net = toy_network();
        let built =
            build_problem(&net, &toy_moments(), &d3_config(), &OpfOptions::default()).unwrap();
        let report =
            solve_drcc(&built.problem, &ClarabelSolver::default(), &SolveOptions::default())
                .unwrap();
        assert!(report.converged);
        // Duplicate-cut stops may leave a solver-tolerance residual.
        assert!(report.residual_violation <= 1e-8 + 1e-6);
        assert!(report.iterations <= 15);
        let dec = decode_decision(&net, &report.x_vector());
        assert_relative_eq!(dec.dist.iter().sum::<f64>(), 1.0, epsilon = 1e-7);
        // Cost identity.
        let total = dec.generation_cost(&net) + dec.reserve_cost(&net, 10.0);
        assert_relative_eq!(report.objective_value, total, max_relative = 1e-6);
    }

    #[test]
    fn no_wind_is_rejected() {
        let mut net = toy_network();
        net.wind.clear();
        let err = build_problem(&net, &toy_moments(), &d3_config(), &OpfOptions::default());
        assert!(matches!(err, Err(DcopfError::Validation(_))));
    }

    #[test]
    fn moment_dimension_checked() {
        let net = toy_network();
        let bad = MomentData::from_mean_cov(DVector::zeros(3), DMatrix::identity(3, 3)).unwrap();
        let err = build_problem(&net, &bad, &d3_config(), &OpfOptions::default());
        assert!(matches!(err, Err(DcopfError::DimensionMismatch(_))));
    }
}

//! Plain-text case files mirroring the MATPOWER table layout.
//!
//! ```text
//! baseMVA 100
//!
//! bus
//! # bus_i  type  Pd  Qd  Gs  Bs  area  Vm  Va  baseKV  zone  Vmax  Vmin
//! 1  3  0.0  0.0  0  0  1  1.0  0  135  1  1.05  0.95
//! end
//!
//! gen
//! # bus  Pg  Qg  Qmax  Qmin  Vg  mBase  status  Pmax  Pmin
//! ...
//! end
//!
//! branch
//! # fbus  tbus  r  x  b  rateA  rateB  rateC  ratio  angle  status
//! ...
//! end
//!
//! gencost
//! # model  startup  shutdown  n  c(n-1) ... c0
//! ...
//! end
//! ```
//!
//! Only the columns a DC model needs are consumed: bus id/type/Pd, gen
//! bus/status/Pmax/Pmin, branch fbus/tbus/x/rateA/status, and polynomial
//! gencost rows up to degree 2 (one per generator, in order). Extra columns
//! are accepted and ignored so MATPOWER tables can be transcribed as-is.
//! A rateA of 0 means unlimited, as in MATPOWER. Bus type 3 marks the
//! slack; exactly one is required.

use super::network::{Branch, Bus, Generator, Network};
use super::DcopfError;
use std::path::Path;

pub fn parse_case(path: impl AsRef<Path>) -> Result<Network, DcopfError> {
    let text = std::fs::read_to_string(path)?;
    parse_case_str(&text)
}

pub fn parse_case_str(text: &str) -> Result<Network, DcopfError> {
    let mut base_mva = 100.0;
    let mut buses: Vec<Bus> = Vec::new();
    let mut slack: Option<usize> = None;
    let mut gens_raw: Vec<(usize, bool, f64, f64, usize)> = Vec::new(); // bus, on, pmax, pmin, line
    let mut costs: Vec<(f64, f64, f64)> = Vec::new();
    let mut branches: Vec<Branch> = Vec::new();

    let mut section: Option<&str> = None;
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let lineno = lineno + 1;
        let parse_err = |msg: String| DcopfError::Parse { line: lineno, msg };

        match section {
            None => {
                let mut toks = line.split_whitespace();
                match toks.next().unwrap() {
                    "baseMVA" => {
                        base_mva = toks
                            .next()
                            .ok_or_else(|| parse_err("baseMVA needs a value".into()))?
                            .parse()
                            .map_err(|e| parse_err(format!("bad baseMVA: {e}")))?;
                    }
                    s @ ("bus" | "gen" | "branch" | "gencost") => {
                        section = Some(match s {
                            "bus" => "bus",
                            "gen" => "gen",
                            "branch" => "branch",
                            _ => "gencost",
                        });
                    }
                    other => {
                        return Err(parse_err(format!("unknown section or directive '{other}'")))
                    }
                }
            }
            Some(sec) => {
                if line == "end" {
                    section = None;
                    continue;
                }
                let cols: Result<Vec<f64>, _> =
                    line.split_whitespace().map(str::parse::<f64>).collect();
                let cols = cols.map_err(|e| parse_err(format!("bad number: {e}")))?;
                let need = |k: usize| -> Result<(), DcopfError> {
                    if cols.len() < k {
                        Err(DcopfError::Parse {
                            line: lineno,
                            msg: format!("expected at least {k} columns, got {}", cols.len()),
                        })
                    } else {
                        Ok(())
                    }
                };
                match sec {
                    "bus" => {
                        need(3)?;
                        let id = cols[0] as usize;
                        let bus_type = cols[1] as usize;
                        if bus_type == 3 && slack.replace(id).is_some() {
                            return Err(parse_err("multiple slack buses (type 3)".into()));
                        }
                        buses.push(Bus { id, load_mw: cols[2] });
                    }
                    "gen" => {
                        need(10)?;
                        let status = cols[7] != 0.0;
                        gens_raw.push((cols[0] as usize, status, cols[8], cols[9], lineno));
                    }
                    "branch" => {
                        need(6)?;
                        let status = if cols.len() >= 11 { cols[10] != 0.0 } else { true };
                        if !status {
                            continue;
                        }
                        let rate_a = cols[5];
                        branches.push(Branch {
                            from: cols[0] as usize,
                            to: cols[1] as usize,
                            reactance: cols[3],
                            limit_mw: if rate_a > 0.0 { rate_a } else { f64::INFINITY },
                        });
                    }
                    "gencost" => {
                        need(4)?;
                        if cols[0] as usize != 2 {
                            return Err(parse_err(
                                "only polynomial cost model (2) is supported".into(),
                            ));
                        }
                        let n = cols[3] as usize;
                        need(4 + n)?;
                        let (c2, c1, c0) = match n {
                            3 => (cols[4], cols[5], cols[6]),
                            2 => (0.0, cols[4], cols[5]),
                            1 => (0.0, 0.0, cols[4]),
                            _ => {
                                return Err(parse_err(format!(
                                    "polynomial degree {n} not supported (max 3 coefficients)"
                                )))
                            }
                        };
                        costs.push((c2, c1, c0));
                    }
                    _ => unreachable!(),
                }
            }
        }
    }
    if section.is_some() {
        return Err(DcopfError::Parse { line: text.lines().count(), msg: "unterminated section".into() });
    }

    let on_gens: Vec<_> = gens_raw.iter().filter(|g| g.1).collect();
    if !costs.is_empty() && costs.len() != gens_raw.len() {
        return Err(DcopfError::Validation(format!(
            "gencost rows ({}) do not match gen rows ({})",
            costs.len(),
            gens_raw.len()
        )));
    }
    let mut generators = Vec::with_capacity(on_gens.len());
    for (i, (bus, on, pmax, pmin, _line)) in gens_raw.iter().enumerate() {
        if !on {
            continue;
        }
        let (c2, c1, c0) = if costs.is_empty() { (0.0, 1.0, 0.0) } else { costs[i] };
        generators.push(Generator {
            bus: *bus,
            p_min: *pmin,
            p_max: *pmax,
            cost_quad: c2,
            cost_lin: c1,
            cost_const: c0,
        });
    }

    let slack_bus = slack.ok_or_else(|| DcopfError::Validation("no slack bus (type 3)".into()))?;
    let network =
        Network { base_mva, buses, branches, generators, wind: Vec::new(), slack_bus };
    network.validate()?;
    Ok(network)
}

#[cfg(test)]
mod tests {
    use super::*;

    const TWO_BUS: &str = "\
baseMVA 100
bus
1 3 0.0 0 0 0 1 1 0 135 1 1.05 0.95
2 1 40.0 0 0 0 1 1 0 135 1 1.05 0.95
end
gen
1 0 0 50 -50 1 100 1 120 0
end
branch
1 2 0.01 0.1 0 80 0 0 0 0 1
end
gencost
2 0 0 3 0.02 2.0 0
end
";

    #[test]
    fn parses_two_bus_case() {
        let n = parse_case_str(TWO_BUS).unwrap();
        assert_eq!(n.buses.len(), 2);
        assert_eq!(n.branches.len(), 1);
        assert_eq!(n.generators.len(), 1);
        assert_eq!(n.slack_bus, 1);
        assert_eq!(n.generators[0].cost_quad, 0.02);
        assert_eq!(n.branches[0].limit_mw, 80.0);
        assert_eq!(n.total_load(), 40.0);
    }

    #[test]
    fn out_of_service_rows_dropped() {
        let text = TWO_BUS
            .replace("1 2 0.01 0.1 0 80 0 0 0 0 1", "1 2 0.01 0.1 0 80 0 0 0 0 1\n1 2 0.02 0.2 0 80 0 0 0 0 0");
        let n = parse_case_str(&text).unwrap();
        assert_eq!(n.branches.len(), 1);
    }

    #[test]
    fn gen_on_missing_bus_is_validation_error() {
        let text = TWO_BUS.replace("1 0 0 50 -50 1 100 1 120 0", "9 0 0 50 -50 1 100 1 120 0");
        assert!(matches!(parse_case_str(&text), Err(DcopfError::Validation(_))));
    }

    #[test]
    fn parse_errors_carry_line_numbers() {
        let text = TWO_BUS.replace("2 1 40.0", "2 1 forty");
        match parse_case_str(&text) {
            Err(DcopfError::Parse { line, .. }) => assert_eq!(line, 4),
            other => panic!("expected parse error, got {other:?}"),
        }
    }

    #[test]
    fn zero_rate_means_unlimited() {
        let text = TWO_BUS.replace("1 2 0.01 0.1 0 80", "1 2 0.01 0.1 0 0");
        let n = parse_case_str(&text).unwrap();
        assert!(n.branches[0].limit_mw.is_infinite());
    }
}

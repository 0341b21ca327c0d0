//! Network data model.

use super::DcopfError;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq)]
pub struct Bus {
    pub id: usize,
    pub load_mw: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Branch {
    pub from: usize,
    pub to: usize,
    /// Series reactance in p.u. on the system base.
    pub reactance: f64,
    /// Thermal limit in MW; `f64::INFINITY` when unlimited.
    pub limit_mw: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Generator {
    pub bus: usize,
    pub p_min: f64,
    pub p_max: f64,
    /// Quadratic cost coefficient ($/MW^2 h).
    pub cost_quad: f64,
    /// Linear cost coefficient ($/MWh).
    pub cost_lin: f64,
    pub cost_const: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct WindPlant {
    pub bus: usize,
    pub forecast_mw: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Network {
    pub base_mva: f64,
    pub buses: Vec<Bus>,
    pub branches: Vec<Branch>,
    pub generators: Vec<Generator>,
    pub wind: Vec<WindPlant>,
    pub slack_bus: usize,
}

/// Instance modifications applied after parsing.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct CaseOverrides {
    /// Multiplies every bus load.
    #[serde(default)]
    pub load_scale: Option<f64>,
    /// Replaces the MW limit of the branch between the two bus ids
    /// (order-insensitive; applies to every parallel branch).
    #[serde(default)]
    pub line_limits: Vec<LineLimitOverride>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LineLimitOverride {
    pub from: usize,
    pub to: usize,
    pub limit_mw: f64,
}

impl Network {
    /// Position of a bus id in the bus list.
    pub fn bus_index(&self, id: usize) -> Option<usize> {
        self.buses.iter().position(|b| b.id == id)
    }

    pub fn num_buses(&self) -> usize {
        self.buses.len()
    }

    pub fn num_generators(&self) -> usize {
        self.generators.len()
    }

    pub fn num_wind(&self) -> usize {
        self.wind.len()
    }

    pub fn total_load(&self) -> f64 {
        self.buses.iter().map(|b| b.load_mw).sum()
    }

    pub fn total_wind_forecast(&self) -> f64 {
        self.wind.iter().map(|w| w.forecast_mw).sum()
    }

    pub fn validate(&self) -> Result<(), DcopfError> {
        if self.buses.is_empty() {
            return Err(DcopfError::Validation("no buses".into()));
        }
        let mut ids = std::collections::HashSet::new();
        for b in &self.buses {
            if !ids.insert(b.id) {
                return Err(DcopfError::Validation(format!("duplicate bus id {}", b.id)));
            }
        }
        if self.bus_index(self.slack_bus).is_none() {
            return Err(DcopfError::Validation(format!(
                "slack bus {} does not exist",
                self.slack_bus
            )));
        }
        for br in &self.branches {
            if self.bus_index(br.from).is_none() || self.bus_index(br.to).is_none() {
                return Err(DcopfError::Validation(format!(
                    "branch {}-{} references a missing bus",
                    br.from, br.to
                )));
            }
            if br.reactance <= 0.0 || br.reactance.is_nan() {
                return Err(DcopfError::Validation(format!(
                    "branch {}-{} has nonpositive reactance {}",
                    br.from, br.to, br.reactance
                )));
            }
        }
        for g in &self.generators {
            if self.bus_index(g.bus).is_none() {
                return Err(DcopfError::Validation(format!(
                    "generator references missing bus {}",
                    g.bus
                )));
            }
        }
        for w in &self.wind {
            if self.bus_index(w.bus).is_none() {
                return Err(DcopfError::Validation(format!(
                    "wind plant references missing bus {}",
                    w.bus
                )));
            }
        }
        self.check_connected()?;
        Ok(())
    }

    fn check_connected(&self) -> Result<(), DcopfError> {
        let n = self.buses.len();
        let mut adj = vec![Vec::new(); n];
        for br in &self.branches {
            let i = self.bus_index(br.from).unwrap();
            let j = self.bus_index(br.to).unwrap();
            adj[i].push(j);
            adj[j].push(i);
        }
        let mut seen = vec![false; n];
        let mut stack = vec![0usize];
        seen[0] = true;
        while let Some(i) = stack.pop() {
            for &j in &adj[i] {
                if !seen[j] {
                    seen[j] = true;
                    stack.push(j);
                }
            }
        }
        if seen.iter().all(|&s| s) {
            Ok(())
        } else {
            Err(DcopfError::Validation("network graph is not connected".into()))
        }
    }

    pub fn apply_overrides(&mut self, ov: &CaseOverrides) -> Result<(), DcopfError> {
        if let Some(scale) = ov.load_scale {
            for b in &mut self.buses {
                b.load_mw *= scale;
            }
        }
        for o in &ov.line_limits {
            let mut hit = false;
            for br in &mut self.branches {
                if (br.from == o.from && br.to == o.to) || (br.from == o.to && br.to == o.from) {
                    br.limit_mw = o.limit_mw;
                    hit = true;
                }
            }
            if !hit {
                return Err(DcopfError::Validation(format!(
                    "line limit override references missing branch {}-{}",
                    o.from, o.to
                )));
            }
        }
        Ok(())
    }

    pub fn with_wind(mut self, plants: Vec<WindPlant>) -> Result<Self, DcopfError> {
        self.wind = plants;
        self.validate()?;
        Ok(self)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn two_bus() -> Network {
        Network {
            base_mva: 100.0,
            buses: vec![Bus { id: 1, load_mw: 0.0 }, Bus { id: 2, load_mw: 50.0 }],
            branches: vec![Branch { from: 1, to: 2, reactance: 0.1, limit_mw: 100.0 }],
            generators: vec![Generator {
                bus: 1,
                p_min: 0.0,
                p_max: 100.0,
                cost_quad: 0.01,
                cost_lin: 2.0,
                cost_const: 0.0,
            }],
            wind: vec![],
            slack_bus: 2,
        }
    }

    #[test]
    fn overrides_apply() {
        let mut n = two_bus();
        n.apply_overrides(&CaseOverrides {
            load_scale: Some(1.5),
            line_limits: vec![LineLimitOverride { from: 2, to: 1, limit_mw: 30.0 }],
        })
        .unwrap();
        assert_eq!(n.buses[1].load_mw, 75.0);
        assert_eq!(n.branches[0].limit_mw, 30.0);
    }

    #[test]
    fn missing_bus_rejected() {
        let mut n = two_bus();
        n.generators[0].bus = 7;
        assert!(matches!(n.validate(), Err(DcopfError::Validation(_))));
    }

    #[test]
    fn disconnected_rejected() {
        let mut n = two_bus();
        n.buses.push(Bus { id: 3, load_mw: 1.0 });
        assert!(matches!(n.validate(), Err(DcopfError::Validation(_))));
    }
}

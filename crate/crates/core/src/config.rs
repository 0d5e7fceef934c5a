use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Configuration {
    Chiral,
    SymmetricMirror,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum InitialState {
    FullyInverted,
    DickeMinusOne,
}

/// N atoms with waveguide coupling β; B = Nβ.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SystemConfig {
    pub n_atoms: usize,
    pub beta: f64,
    pub scaled_od: f64,
    pub configuration: Configuration,
    pub initial_state: InitialState,
}

impl SystemConfig {
    pub fn new(n_atoms: usize, beta: f64, configuration: Configuration) -> Result<Self> {
        if n_atoms == 0 {
            return Err(Error::Domain("n_atoms must be positive".into()));
        }
        if !(0.0..=1.0).contains(&beta) {
            return Err(Error::Domain(format!("beta = {beta} outside [0, 1]")));
        }
        Ok(Self {
            n_atoms,
            beta,
            scaled_od: n_atoms as f64 * beta,
            configuration,
            initial_state: InitialState::FullyInverted,
        })
    }

    /// Fixes B and derives β = B/N.
    pub fn from_scaled_od(n_atoms: usize, scaled_od: f64, configuration: Configuration) -> Result<Self> {
        if n_atoms == 0 {
            return Err(Error::Domain("n_atoms must be positive".into()));
        }
        let mut cfg = Self::new(n_atoms, scaled_od / n_atoms as f64, configuration)?;
        cfg.scaled_od = scaled_od;
        Ok(cfg)
    }

    pub fn with_initial_state(mut self, s: InitialState) -> Self {
        self.initial_state = s;
        self
    }

    pub fn beta_forward(&self) -> f64 {
        match self.configuration {
            Configuration::Chiral => self.beta,
            Configuration::SymmetricMirror => 0.5 * self.beta,
        }
    }

    pub fn beta_backward(&self) -> f64 {
        match self.configuration {
            Configuration::Chiral => 0.0,
            Configuration::SymmetricMirror => 0.5 * self.beta,
        }
    }
}

/// Output times (units of the single-atom lifetime) and integrator tolerances.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TimeGrid {
    pub t_max: f64,
    pub output_times: Vec<f64>,
    pub rtol: f64,
    pub atol: f64,
}

impl TimeGrid {
    /// `n_steps + 1` equispaced points on [0, t_max].
    pub fn uniform(t_max: f64, n_steps: usize) -> Self {
        let n = n_steps.max(1);
        let output_times = (0..=n).map(|k| t_max * k as f64 / n as f64).collect();
        Self { t_max, output_times, rtol: 1e-10, atol: 1e-13 }
    }

    pub fn from_times(times: Vec<f64>) -> Result<Self> {
        let ok = times.first() == Some(&0.0)
            && times.windows(2).all(|w| w[1] > w[0])
            && times.iter().all(|t| t.is_finite());
        if !ok {
            return Err(Error::Domain("output times must start at 0 and increase strictly".into()));
        }
        Ok(Self { t_max: *times.last().unwrap(), output_times: times, rtol: 1e-10, atol: 1e-13 })
    }

    pub fn with_tolerances(mut self, rtol: f64, atol: f64) -> Self {
        self.rtol = rtol;
        self.atol = atol;
        self
    }
}

/// Named time series produced by every solver.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ObservableTrace {
    pub times: Vec<f64>,
    pub channels: Vec<(String, Vec<f64>)>,
    pub solver: String,
    pub metadata: Vec<(String, String)>,
}

impl ObservableTrace {
    pub fn new(solver: &str, times: Vec<f64>) -> Self {
        Self { times, solver: solver.to_string(), ..Default::default() }
    }

    pub fn push_channel(&mut self, name: &str, values: Vec<f64>) {
        assert_eq!(values.len(), self.times.len(), "channel {name} has wrong length");
        self.channels.retain(|(n, _)| n != name);
        self.channels.push((name.to_string(), values));
    }

    pub fn channel(&self, name: &str) -> Option<&[f64]> {
        self.channels.iter().find(|(n, _)| n == name).map(|(_, v)| v.as_slice())
    }

    pub fn with_meta(mut self, key: &str, value: impl ToString) -> Self {
        self.metadata.push((key.to_string(), value.to_string()));
        self
    }
}

pub mod channels {
    pub const POWER_RIGHT: &str = "power_right";
    pub const POWER_LEFT: &str = "power_left";
    pub const POWER_TOTAL: &str = "power_total";
    pub const GAMMA_NORM: &str = "gamma_norm";
    pub const G2_0T: &str = "g2_0t";
    pub const G2_TT: &str = "g2_tt";
    pub const EXCITATION_MEAN: &str = "excitation_mean";
}

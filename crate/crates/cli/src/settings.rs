//! Run settings: config file values overridden by command-line flags.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use wqed::{Configuration, InitialState};

use crate::args::{Common, ConfigurationArg, Format, InitArg, SolverName};
use crate::exit::usage;

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct FileConfig {
    #[serde(default)]
    system: SystemSection,
    #[serde(default)]
    grid: GridSection,
    #[serde(default)]
    solver: SolverSection,
    #[serde(default)]
    output: OutputSection,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct SystemSection {
    configuration: Option<Configuration>,
    initial_state: Option<InitialState>,
    n_atoms: Option<usize>,
    beta: Option<f64>,
    scaled_od: Option<f64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct GridSection {
    t_max: Option<f64>,
    steps: Option<usize>,
    m: Option<usize>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct SolverSection {
    name: Option<SolverName>,
    k_max: Option<usize>,
    rtol: Option<f64>,
    atol: Option<f64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct OutputSection {
    dir: Option<PathBuf>,
    format: Option<Format>,
}

/// Fully resolved settings, recorded verbatim in the run manifest.
#[derive(Debug, Clone, Serialize)]
pub struct Settings {
    pub configuration: Configuration,
    pub initial_state: InitialState,
    pub solver: SolverName,
    /// None means the thermodynamic limit.
    pub n_atoms: Option<usize>,
    pub beta: Option<f64>,
    pub scaled_od: f64,
    pub t_max: f64,
    pub steps: usize,
    pub grid_m: usize,
    pub k_max: usize,
    pub rtol: f64,
    pub atol: f64,
    pub out_dir: PathBuf,
    pub format: Format,
}

impl Settings {
    pub fn resolve(flags: &Common) -> anyhow::Result<Self> {
        let file = match &flags.config {
            Some(p) => read_file(p)?,
            None => FileConfig::default(),
        };
        let configuration = match flags.configuration {
            Some(ConfigurationArg::Chiral) => Configuration::Chiral,
            Some(ConfigurationArg::SymmetricMirror) => Configuration::SymmetricMirror,
            None => file.system.configuration.unwrap_or(Configuration::Chiral),
        };
        let initial_state = match flags.init {
            Some(InitArg::FullyInverted) => InitialState::FullyInverted,
            Some(InitArg::DickeMinusOne) => InitialState::DickeMinusOne,
            None => file.system.initial_state.unwrap_or(InitialState::FullyInverted),
        };
        let n = flags.n.or(file.system.n_atoms);
        let beta = flags.beta.or(file.system.beta);
        let b = flags.b.or(file.system.scaled_od);
        let (n_atoms, beta, scaled_od) = resolve_size(n, beta, b)?;
        let solver = flags.solver.or(file.solver.name).unwrap_or(SolverName::ClosedForm);
        let s = Self {
            configuration,
            initial_state,
            solver,
            n_atoms,
            beta,
            scaled_od,
            t_max: flags.tmax.or(file.grid.t_max).unwrap_or(5.0),
            steps: flags.steps.or(file.grid.steps).unwrap_or(500),
            grid_m: flags.grid.or(file.grid.m).unwrap_or(wqed::chiral_continuum::DEFAULT_M),
            k_max: flags.kmax.or(file.solver.k_max).unwrap_or(35),
            rtol: file.solver.rtol.unwrap_or(1e-10),
            atol: file.solver.atol.unwrap_or(1e-13),
            out_dir: flags.out.clone().or(file.output.dir).unwrap_or_else(|| PathBuf::from("out")),
            format: flags.format.or(file.output.format).unwrap_or(Format::Csv),
        };
        s.check()?;
        Ok(s)
    }

    fn check(&self) -> anyhow::Result<()> {
        if !(self.t_max > 0.0 && self.t_max.is_finite()) {
            return Err(usage(format!("tmax must be positive, got {}", self.t_max)));
        }
        if self.steps == 0 {
            return Err(usage("steps must be positive"));
        }
        if !(self.scaled_od > 0.0 && self.scaled_od.is_finite()) {
            return Err(usage(format!("B must be positive, got {}", self.scaled_od)));
        }
        Ok(())
    }

    pub fn time_grid(&self) -> wqed::TimeGrid {
        wqed::TimeGrid::uniform(self.t_max, self.steps).with_tolerances(self.rtol, self.atol)
    }

    /// (N, β) or a usage error naming the solver that needs them.
    pub fn finite(&self, what: &str) -> anyhow::Result<(usize, f64)> {
        match (self.n_atoms, self.beta) {
            (Some(n), Some(b)) => Ok((n, b)),
            _ => Err(usage(format!("{what} needs a finite atom number: pass --N (with --B or --beta)"))),
        }
    }
}

fn read_file(p: &Path) -> anyhow::Result<FileConfig> {
    let text = std::fs::read_to_string(p).map_err(|e| usage(format!("cannot read {}: {e}", p.display())))?;
    toml::from_str(&text).map_err(|e| usage(format!("{}: {e}", p.display())))
}

/// Any two of N, β, B fix the third; B alone selects the thermodynamic limit.
fn resolve_size(n: Option<usize>, beta: Option<f64>, b: Option<f64>) -> anyhow::Result<(Option<usize>, Option<f64>, f64)> {
    if n == Some(0) {
        return Err(usage("N must be positive"));
    }
    if let Some(bt) = beta {
        if !(0.0..=1.0).contains(&bt) {
            return Err(usage(format!("beta = {bt} outside [0, 1]")));
        }
    }
    match (n, beta, b) {
        (Some(n), Some(bt), Some(b)) => {
            if ((n as f64 * bt - b) / b).abs() > 1e-12 {
                return Err(usage(format!("N·beta = {} differs from B = {b}", n as f64 * bt)));
            }
            Ok((Some(n), Some(bt), b))
        }
        (Some(n), Some(bt), None) => Ok((Some(n), Some(bt), n as f64 * bt)),
        (Some(n), None, Some(b)) => {
            let bt = b / n as f64;
            if bt > 1.0 {
                return Err(usage(format!("B/N = {bt} exceeds 1")));
            }
            Ok((Some(n), Some(bt), b))
        }
        (None, Some(bt), Some(b)) => {
            let nf = b / bt;
            if (nf - nf.round()).abs() > 1e-9 * nf {
                return Err(usage(format!("B/beta = {nf} is not an integer atom number")));
            }
            Ok((Some(nf.round() as usize), Some(bt), b))
        }
        (None, None, b) => Ok((None, None, b.unwrap_or(10.0))),
        (Some(_), None, None) | (None, Some(_), None) => Err(usage("give two of --N, --beta, --B (or --B alone)")),
    }
}

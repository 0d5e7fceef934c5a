use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(name = "wqed", version, about = "Collective emission of inverted atomic ensembles into a waveguide")]
pub struct Cli {
    #[command(flatten)]
    pub common: Common,
    #[command(subcommand)]
    pub command: Command,
}

/// Flags shared by every subcommand; they override values from `--config`.
#[derive(Debug, Clone, Default, Args)]
pub struct Common {
    /// TOML file with [system], [grid], [solver] and [output] sections
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    pub solver: Option<SolverName>,
    /// chiral or symmetric-mirror
    #[arg(long, global = true, value_enum)]
    pub configuration: Option<ConfigurationArg>,
    /// fully-inverted or dicke-minus-one
    #[arg(long, global = true, value_enum)]
    pub init: Option<InitArg>,
    /// Atom number
    #[arg(long = "N", global = true)]
    pub n: Option<usize>,
    /// Per-atom waveguide coupling
    #[arg(long, global = true)]
    pub beta: Option<f64>,
    /// Optical depth B = Nβ
    #[arg(long = "B", global = true)]
    pub b: Option<f64>,
    #[arg(long, global = true)]
    pub tmax: Option<f64>,
    /// Number of output intervals on [0, tmax]
    #[arg(long, global = true)]
    pub steps: Option<usize>,
    /// Optical-depth grid points M for the continuum solver
    #[arg(long, global = true)]
    pub grid: Option<usize>,
    /// Series cutoff
    #[arg(long, global = true)]
    pub kmax: Option<usize>,
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Power emitted into the waveguide
    Power {
        /// Also evaluate this solver and report the largest relative difference
        #[arg(long, value_enum)]
        diff: Option<SolverName>,
    },
    /// Two-time correlation g²(t1, t)
    G2 {
        #[arg(long, default_value_t = 0.0)]
        t1: f64,
    },
    /// First-order correlation C₁(x,y,t), excitation correction e₁(x,t) and Q(t)
    Fields {
        #[arg(long, value_enum, value_delimiter = ',', default_values_t = [FieldKind::C1, FieldKind::E1])]
        what: Vec<FieldKind>,
        /// Time of the C₁ snapshot (default: the special time where C₁ vanishes)
        #[arg(long)]
        at: Option<f64>,
    },
    /// Total energy emitted into the waveguide
    Energy,
    /// Peak power and energy over a list of B or N values
    Sweep {
        #[arg(long, value_enum, default_value_t = SweepAxis::B)]
        over: SweepAxis,
        #[arg(long, value_delimiter = ',', required = true)]
        values: Vec<f64>,
    },
    /// Acceptance checks
    Verify {
        #[arg(value_enum, default_value_t = LevelArg::Quick)]
        level: LevelArg,
        /// Run a single criterion
        #[arg(long)]
        criterion: Option<u8>,
    },
    /// Regenerate the data for figure 2–7
    Fig {
        #[arg(value_parser = clap::value_parser!(u8).range(2..=7))]
        number: u8,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, serde::Deserialize, serde::Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum SolverName {
    Exact,
    Hierarchy,
    Mf2,
    Continuum,
    ClosedForm,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ConfigurationArg {
    Chiral,
    SymmetricMirror,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum InitArg {
    FullyInverted,
    DickeMinusOne,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, serde::Deserialize, serde::Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum FieldKind {
    C1,
    E1,
    Q,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SweepAxis {
    #[value(name = "B")]
    B,
    #[value(name = "N")]
    N,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum LevelArg {
    Quick,
    Full,
}

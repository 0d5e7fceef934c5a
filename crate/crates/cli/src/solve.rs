//! Solver dispatch shared by the subcommands.

use wqed::chiral_continuum::{self as cc, OpticalGrid};
use wqed::config::channels;
use wqed::sym_moments::{self as sm, DickeSolver};
use wqed::{analytic, exact_me, Configuration, InitialState, SystemConfig};

use crate::args::SolverName;
use crate::exit::usage;
use crate::settings::Settings;

/// Power per direction on the output grid.
#[derive(Debug, Clone)]
pub struct PowerTrace {
    pub t: Vec<f64>,
    pub right: Vec<f64>,
    pub left: Vec<f64>,
    /// Series convergence per sample (always true for non-series solvers).
    pub converged: Vec<bool>,
}

impl PowerTrace {
    pub fn total(&self) -> Vec<f64> {
        self.right.iter().zip(&self.left).map(|(a, b)| a + b).collect()
    }

    /// Γ = P_total/(B e^{−t}).
    pub fn gamma(&self, b: f64) -> Vec<f64> {
        self.total().iter().zip(&self.t).map(|(p, t)| p / (b * (-t).exp())).collect()
    }

    fn split_even(t: Vec<f64>, total: Vec<f64>) -> Self {
        let half: Vec<f64> = total.iter().map(|p| 0.5 * p).collect();
        let n = t.len();
        Self { t, right: half.clone(), left: half, converged: vec![true; n] }
    }
}

pub fn solver_label(s: SolverName) -> &'static str {
    match s {
        SolverName::Exact => "exact",
        SolverName::Hierarchy => "hierarchy",
        SolverName::Mf2 => "mf2",
        SolverName::Continuum => "continuum",
        SolverName::ClosedForm => "closed-form",
    }
}

fn require_symmetric(s: &Settings, solver: SolverName) -> anyhow::Result<()> {
    if s.configuration != Configuration::SymmetricMirror {
        return Err(usage(format!(
            "solver {} describes the symmetric-mirror configuration; pass --configuration symmetric-mirror",
            solver_label(solver)
        )));
    }
    Ok(())
}

fn require_chiral(s: &Settings, solver: SolverName) -> anyhow::Result<()> {
    if s.configuration != Configuration::Chiral {
        return Err(usage(format!("solver {} describes the chiral configuration only", solver_label(solver))));
    }
    Ok(())
}

pub fn power(s: &Settings, solver: SolverName) -> anyhow::Result<PowerTrace> {
    let tg = s.time_grid();
    let t = tg.output_times.clone();
    let b = s.scaled_od;
    let init = s.initial_state;
    match solver {
        SolverName::ClosedForm => match s.configuration {
            Configuration::Chiral => {
                let mut right = Vec::with_capacity(t.len());
                let mut converged = Vec::with_capacity(t.len());
                for &ti in &t {
                    match init {
                        InitialState::FullyInverted => {
                            right.push(analytic::power_chiral(b, ti));
                            converged.push(true);
                        }
                        InitialState::DickeMinusOne => {
                            let v = analytic::power_chiral_dicke(b, ti, s.k_max);
                            right.push(v.value);
                            converged.push(v.converged);
                        }
                    }
                }
                let left = vec![0.0; t.len()];
                Ok(PowerTrace { t, right, left, converged })
            }
            Configuration::SymmetricMirror => {
                let p0 = match init {
                    InitialState::FullyInverted => b,
                    InitialState::DickeMinusOne => 2.0 * b,
                };
                let total = t.iter().map(|&ti| analytic::power_symmetric(b, ti, p0)).collect();
                Ok(PowerTrace::split_even(t, total))
            }
        },
        SolverName::Exact => {
            let (n, beta) = s.finite("the exact solver")?;
            let cfg = SystemConfig::new(n, beta, s.configuration)?.with_initial_state(init);
            let tr = exact_me::observables(&cfg, &tg)?;
            let right = tr.channel(channels::POWER_RIGHT).unwrap().to_vec();
            let left = tr.channel(channels::POWER_LEFT).unwrap().to_vec();
            let converged = vec![true; t.len()];
            Ok(PowerTrace { t, right, left, converged })
        }
        SolverName::Hierarchy => {
            require_symmetric(s, solver)?;
            let (n, beta) = s.finite("the hierarchy solver")?;
            let mom = DickeSolver::new(n, beta)?.evolve(init, &tg)?;
            let total = mom.iter().map(|m| sm::power_from_moments(n, beta, m)).collect();
            Ok(PowerTrace::split_even(t, total))
        }
        SolverName::Mf2 => {
            require_symmetric(s, solver)?;
            let (n, beta) = s.finite("the mf2 solver")?;
            let mom = sm::evolve_mf2(n, beta, sm::mf2_initial(n, init), &tg)?;
            let total = mom.iter().map(|m| sm::power_from_moments(n, beta, m)).collect();
            Ok(PowerTrace::split_even(t, total))
        }
        SolverName::Continuum => {
            require_chiral(s, solver)?;
            let grid = OpticalGrid::new(b, s.grid_m)?;
            let ctg = cc::default_time_grid(s.t_max, s.steps);
            let tr = cc::power_trace(grid, s.beta, init, &ctg)?;
            let right = tr.channel(channels::POWER_RIGHT).unwrap().to_vec();
            let (left, converged) = (vec![0.0; t.len()], vec![true; t.len()]);
            Ok(PowerTrace { t, right, left, converged })
        }
    }
}

/// g²(t1, t) on the output grid: (absolute times, g², converged).
pub fn g2(s: &Settings, solver: SolverName, t1: f64) -> anyhow::Result<(Vec<f64>, Vec<f64>, Vec<bool>)> {
    if !(t1 >= 0.0 && t1.is_finite()) {
        return Err(usage(format!("t1 must be a non-negative time, got {t1}")));
    }
    if s.initial_state != InitialState::FullyInverted {
        return Err(usage("g2 is defined from the fully inverted start"));
    }
    if solver == SolverName::Exact {
        let (n, beta) = s.finite("the exact solver")?;
        let cfg = SystemConfig::new(n, beta, s.configuration)?;
        let tr = exact_me::two_time_g2(&cfg, &s.time_grid(), t1)?;
        let g = tr.channel(channels::G2_0T).unwrap().to_vec();
        let ok = vec![true; g.len()];
        return Ok((tr.times, g, ok));
    }
    if t1 != 0.0 {
        return Err(usage(format!("solver {} provides g²(0, t) only; use --solver exact for t1 > 0", solver_label(solver))));
    }
    let t = s.time_grid().output_times;
    if solver == SolverName::ClosedForm {
        let b = s.scaled_od;
        return Ok(match s.configuration {
            Configuration::SymmetricMirror => {
                let g = t.iter().map(|&ti| analytic::g2_0t_symmetric(ti)).collect();
                let ok = vec![true; t.len()];
                (t, g, ok)
            }
            Configuration::Chiral => {
                let v: Vec<_> = t.iter().map(|&ti| analytic::g2_0t_chiral(b, ti, s.k_max)).collect();
                (t, v.iter().map(|x| x.value).collect(), v.iter().map(|x| x.converged).collect())
            }
        });
    }
    // g²(0,t) = P_ψ(t)/P(t), ψ the state after one emission from full inversion
    let mut psi = s.clone();
    psi.initial_state = InitialState::DickeMinusOne;
    let num = power(&psi, solver)?;
    let den = power(s, solver)?;
    let g = num.total().iter().zip(den.total()).map(|(a, b)| a / b).collect();
    Ok((t, g, vec![true; num.t.len()]))
}

use std::time::Instant;

use anyhow::Context;
use rayon::prelude::*;
use serde_json::{json, Value};
use wqed::chiral_continuum::{self as cc, OpticalGrid};
use wqed::config::channels;
use wqed::special::{peak_rate_time, special_time_tsp};
use wqed::sym_moments::{self as sm, DickeSolver};
use wqed::verify::{self, Level};
use wqed::{analytic, quad, Configuration, Error, InitialState, TimeGrid};

use crate::args::{Command, FieldKind, LevelArg, SolverName, SweepAxis};
use crate::exit::{self, usage};
use crate::output::{write_run, Cell, Table};
use crate::settings::Settings;
use crate::solve::{self, solver_label, PowerTrace};

/// Runs one subcommand and returns the process exit status.
pub fn run(cmd: &Command, s: &Settings) -> anyhow::Result<i32> {
    let started = Instant::now();
    let (name, tables, notes, status) = match cmd {
        Command::Power { diff } => {
            let (t, n) = power(s, *diff)?;
            ("power", vec![t], n, exit::OK)
        }
        Command::G2 { t1 } => ("g2", vec![g2(s, *t1)?], json!({ "t1": t1 }), exit::OK),
        Command::Fields { what, at } => ("fields", fields(s, what, *at)?, Value::Null, exit::OK),
        Command::Energy => ("energy", vec![energy(s)?], Value::Null, exit::OK),
        Command::Sweep { over, values } => ("sweep", vec![sweep(s, *over, values)?], json!({ "values": values }), exit::OK),
        Command::Verify { level, criterion } => {
            let (t, failed) = verify_cmd(*level, *criterion)?;
            let status = if failed > 0 { exit::VERIFY_FAILED } else { exit::OK };
            ("verify", vec![t], json!({ "failed": failed }), status)
        }
        Command::Fig { number } => {
            let name = format!("fig{number}");
            let manifest = write_run(s, &name, &figure(s, *number)?, json!({ "figure": number }), started)?;
            println!("{}", manifest.display());
            return Ok(exit::OK);
        }
    };
    let manifest = write_run(s, name, &tables, notes, started)?;
    println!("{}", manifest.display());
    Ok(status)
}

fn power_table(name: &str, tr: &PowerTrace, b: f64) -> Table {
    let mut t = Table::new(name, &["t", "P_r", "P_l", "P_total", "Gamma_norm"]);
    let (total, gamma) = (tr.total(), tr.gamma(b));
    for k in 0..tr.t.len() {
        t.push(vec![tr.t[k].into(), tr.right[k].into(), tr.left[k].into(), total[k].into(), gamma[k].into()]);
    }
    t
}

fn power(s: &Settings, diff: Option<SolverName>) -> anyhow::Result<(Table, Value)> {
    let tr = solve::power(s, s.solver)?;
    let unconverged = tr.converged.iter().filter(|c| !**c).count();
    if unconverged > 0 {
        eprintln!("warning: series not converged at {unconverged} samples; raise --kmax");
    }
    let mut notes = json!({ "solver": solver_label(s.solver), "unconverged_samples": unconverged });
    if let Some(other) = diff {
        let ref_tr = solve::power(s, other)?;
        let (a, b) = (tr.total(), ref_tr.total());
        let scale = b.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        let worst = a
            .iter()
            .zip(&b)
            .filter(|(_, r)| r.abs() > 1e-12 * scale)
            .map(|(x, r)| ((x - r) / r).abs())
            .fold(0.0, f64::max);
        eprintln!("max relative difference {} vs {}: {worst:.3e}", solver_label(s.solver), solver_label(other));
        notes["diff"] = json!({ "against": solver_label(other), "max_relative": worst });
    }
    Ok((power_table("power", &tr, s.scaled_od), notes))
}

fn g2(s: &Settings, t1: f64) -> anyhow::Result<Table> {
    let (t, g, ok) = solve::g2(s, s.solver, t1)?;
    let mut tab = Table::new("g2", &["t", "g2", "convergence_flag"]);
    for k in 0..t.len() {
        tab.push(vec![t[k].into(), g[k].into(), ok[k].into()]);
    }
    Ok(tab)
}

const FIELD_COLUMNS: [&str; 7] = ["field", "x", "y", "t", "value", "series_kmax", "converged"];

/// Truncation becomes a flagged NaN row; other errors propagate.
fn flagged(r: wqed::Result<f64>) -> anyhow::Result<(f64, bool)> {
    match r {
        Ok(v) => Ok((v, true)),
        Err(Error::Truncation { .. }) => Ok((f64::NAN, false)),
        Err(e) => Err(e.into()),
    }
}

fn fields(s: &Settings, what: &[FieldKind], at: Option<f64>) -> anyhow::Result<Vec<Table>> {
    let b = s.scaled_od;
    let mut out = Vec::new();
    if what.contains(&FieldKind::C1) {
        let t_star = at.unwrap_or_else(special_time_tsp);
        if s.grid_m < 2 {
            return Err(usage("the C1 grid needs at least 2 points per axis"));
        }
        let x: Vec<f64> = (0..s.grid_m).map(|i| b * i as f64 / (s.grid_m - 1) as f64).collect();
        let pts: Vec<(f64, f64)> = x.iter().flat_map(|&a| x.iter().map(move |&c| (a, c))).collect();
        let vals: Vec<(f64, bool)> =
            pts.par_iter().map(|&(a, c)| flagged(analytic::c1_field(a, c, t_star, s.k_max))).collect::<anyhow::Result<_>>()?;
        let mut tab = Table::new("fields_c1", &FIELD_COLUMNS);
        for (&(a, c), &(v, ok)) in pts.iter().zip(&vals) {
            tab.push(vec!["C1".into(), a.into(), c.into(), t_star.into(), v.into(), s.k_max.into(), ok.into()]);
        }
        out.push(tab);
    }
    if what.contains(&FieldKind::E1) {
        let mut tab = Table::new("fields_e1", &FIELD_COLUMNS);
        for k in 1..=5 {
            let x = b * k as f64 / 5.0;
            for &t in &s.time_grid().output_times {
                let v = analytic::e1_correction(x, t, s.k_max);
                tab.push(vec!["e1".into(), x.into(), f64::NAN.into(), t.into(), v.value.into(), s.k_max.into(), v.converged.into()]);
            }
        }
        out.push(tab);
    }
    if what.contains(&FieldKind::Q) {
        let (n, beta) = s.finite("Q(t)")?;
        let tg = s.time_grid();
        let q = |m: &sm::LowMoments| {
            let p = sm::power_from_moments(n, beta, m);
            if p < 1e-14 {
                return f64::NAN;
            }
            (sm::four_g2_from_moments(n, beta, m) / (p * p) - 2.0) / beta
        };
        let mf2 = sm::evolve_mf2(n, beta, sm::mf2_initial(n, InitialState::FullyInverted), &tg)?;
        let mut tab = Table::new("fields_q", &FIELD_COLUMNS);
        let mut push = |label: &str, mom: &[sm::LowMoments]| {
            for (&t, m) in tg.output_times.iter().zip(mom) {
                tab.push(vec![label.into(), f64::NAN.into(), f64::NAN.into(), t.into(), q(m).into(), 0usize.into(), true.into()]);
            }
        };
        push("Q_mf2", &mf2);
        let exact = DickeSolver::new(n, beta)?.evolve(InitialState::FullyInverted, &tg)?;
        push("Q_exact", &exact);
        out.push(tab);
    }
    Ok(out)
}

fn trapezoid(t: &[f64], p: &[f64]) -> f64 {
    t.windows(2).zip(p.windows(2)).map(|(tw, pw)| 0.5 * (tw[1] - tw[0]) * (pw[0] + pw[1])).sum()
}

fn energy(s: &Settings) -> anyhow::Result<Table> {
    let b = s.scaled_od;
    let mut tab = Table::new("energy", &["method", "B", "N", "energy", "enhancement"]);
    let n_cell = |n: Option<usize>| -> Cell { n.map(|v| v as f64).unwrap_or(f64::NAN).into() };
    match s.configuration {
        Configuration::SymmetricMirror => {
            for (label, e) in [
                ("closed-form", analytic::energy_symmetric(b)),
                ("stirling", analytic::energy_symmetric_stirling(b)),
                ("quadrature", analytic::energy_symmetric_quad(b)),
            ] {
                tab.push(vec![label.into(), b.into(), n_cell(None), e.into(), (e / b).into()]);
            }
        }
        Configuration::Chiral => {
            let e = quad::integrate(|t| analytic::power_chiral(b, t), 0.0, 60.0 + 2.0 * b, 0.0, 1e-12).0;
            tab.push(vec!["quadrature".into(), b.into(), n_cell(None), e.into(), (e / b).into()]);
        }
    }
    if s.solver != SolverName::ClosedForm {
        let tr = solve::power(s, s.solver)?;
        let total = tr.total();
        let peak = total.iter().fold(0.0f64, |a, v| a.max(*v));
        if *total.last().unwrap() > 1e-8 * peak {
            eprintln!("warning: power has not decayed by tmax = {}; the energy is truncated", s.t_max);
        }
        let e = trapezoid(&tr.t, &total);
        tab.push(vec![solver_label(s.solver).into(), b.into(), n_cell(s.n_atoms), e.into(), (e / b).into()]);
    }
    Ok(tab)
}

fn worker_pool() -> anyhow::Result<rayon::ThreadPool> {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Ok(v) = std::env::var("WQED_THREADS") {
        let n: usize = v.trim().parse().map_err(|_| usage(format!("WQED_THREADS = {v:?} is not a thread count")))?;
        builder = builder.num_threads(n);
    }
    builder.build().context("starting worker pool")
}

fn sweep(s: &Settings, over: SweepAxis, values: &[f64]) -> anyhow::Result<Table> {
    let points: Vec<Settings> = values
        .iter()
        .map(|&v| {
            let mut p = s.clone();
            match over {
                SweepAxis::B => {
                    if !(v > 0.0) {
                        return Err(usage(format!("B = {v} must be positive")));
                    }
                    p.scaled_od = v;
                    p.beta = p.n_atoms.map(|n| v / n as f64);
                }
                SweepAxis::N => {
                    if v < 1.0 || v.fract() != 0.0 {
                        return Err(usage(format!("N = {v} is not a positive integer")));
                    }
                    p.n_atoms = Some(v as usize);
                    p.beta = Some(p.scaled_od / v);
                }
            }
            if p.beta.is_some_and(|b| b > 1.0) {
                return Err(usage(format!("beta = B/N exceeds 1 at {v}")));
            }
            Ok(p)
        })
        .collect::<anyhow::Result<_>>()?;
    let pool = worker_pool()?;
    let rows: Vec<Vec<Cell>> = pool.install(|| {
        points
            .par_iter()
            .map(|p| {
                let tr = solve::power(p, p.solver)?;
                let total = tr.total();
                let k = (0..total.len()).fold(0, |a, i| if total[i] > total[a] { i } else { a });
                let gmax = tr.gamma(p.scaled_od).into_iter().fold(f64::NEG_INFINITY, f64::max);
                Ok(vec![
                    p.scaled_od.into(),
                    p.n_atoms.map(|n| n as f64).unwrap_or(f64::NAN).into(),
                    p.beta.unwrap_or(f64::NAN).into(),
                    tr.t[k].into(),
                    total[k].into(),
                    gmax.into(),
                    trapezoid(&tr.t, &total).into(),
                ])
            })
            .collect::<anyhow::Result<_>>()
    })?;
    let mut tab = Table::new("sweep", &["B", "N", "beta", "t_peak", "P_peak", "Gamma_max", "energy"]);
    for r in rows {
        tab.push(r);
    }
    Ok(tab)
}

fn verify_cmd(level: LevelArg, criterion: Option<u8>) -> anyhow::Result<(Table, usize)> {
    let reports = match criterion {
        Some(id) if (1..=12).contains(&id) => vec![verify::run_criterion(id)],
        Some(id) => return Err(usage(format!("criterion {id} does not exist (1–12)"))),
        None => verify::run(match level {
            LevelArg::Quick => Level::Quick,
            LevelArg::Full => Level::Full,
        }),
    };
    let mut tab = Table::new("verify", &["id", "name", "passed", "measured", "tolerance", "detail"]);
    for r in &reports {
        println!("{}", r.line());
        tab.push(vec![(r.id as usize).into(), r.name.as_str().into(), r.passed.into(), r.measured.into(), r.tolerance.into(), r.detail.as_str().into()]);
    }
    Ok((tab, reports.iter().filter(|r| !r.passed).count()))
}

fn figure(s: &Settings, number: u8) -> anyhow::Result<Vec<Table>> {
    let steps = s.steps;
    let with = |t_max: f64, b: f64, conf: Configuration, n: Option<usize>| {
        let mut p = s.clone();
        p.t_max = t_max;
        p.scaled_od = b;
        p.configuration = conf;
        p.n_atoms = n;
        p.beta = n.map(|n| b / n as f64);
        p.initial_state = InitialState::FullyInverted;
        p
    };
    let times = |t_max: f64| TimeGrid::uniform(t_max, steps).output_times;
    match number {
        2 => {
            let b = 10.0;
            let mut tab = Table::new("fig2_power", &["curve", "N", "t", "P", "excitation"]);
            for n in [900usize, 30_000, 100_000] {
                let grid = OpticalGrid::new(b, s.grid_m)?;
                let tr = cc::power_trace(grid, Some(b / n as f64), InitialState::FullyInverted, &cc::default_time_grid(3.0, steps))?;
                let (p, e) = (tr.channel(channels::POWER_TOTAL).unwrap(), tr.channel(channels::EXCITATION_MEAN).unwrap());
                for k in 0..tr.times.len() {
                    tab.push(vec!["continuum".into(), n.into(), tr.times[k].into(), p[k].into(), e[k].into()]);
                }
            }
            for (label, terms) in [("series_k7", 8), ("series_k8", 9)] {
                for t in times(3.0) {
                    let p = analytic::power_chiral_series(b, t, terms);
                    tab.push(vec![label.into(), f64::NAN.into(), t.into(), p.into(), f64::NAN.into()]);
                }
            }
            for t in times(3.0) {
                tab.push(vec!["closed-form".into(), f64::NAN.into(), t.into(), analytic::power_chiral(b, t).into(), (-t).exp().into()]);
            }
            Ok(vec![tab])
        }
        3 => {
            let b = 10.0;
            let mut tab = Table::new("fig3_g2", &["configuration", "N", "t", "g2", "converged"]);
            for (conf, label, solver) in
                [(Configuration::Chiral, "chiral", SolverName::Continuum), (Configuration::SymmetricMirror, "symmetric", SolverName::Mf2)]
            {
                for n in [900usize, 10_000, 30_000] {
                    let (t, g, ok) = solve::g2(&with(4.0, b, conf, Some(n)), solver, 0.0)?;
                    for k in 0..t.len() {
                        tab.push(vec![label.into(), n.into(), t[k].into(), g[k].into(), ok[k].into()]);
                    }
                }
                let mut lim = with(4.0, b, conf, None);
                lim.k_max = 35;
                let (t, g, ok) = solve::g2(&lim, SolverName::ClosedForm, 0.0)?;
                for k in 0..t.len() {
                    tab.push(vec![label.into(), f64::INFINITY.into(), t[k].into(), g[k].into(), ok[k].into()]);
                }
            }
            Ok(vec![tab])
        }
        4 => {
            let b = 20.0;
            let mut power = Table::new("fig4_power", &["log2N", "t", "P_total"]);
            let mut enh = Table::new("fig4_enhancement", &["log2N", "energy", "enhancement"]);
            for k in (10..=22).step_by(2) {
                let n = 1usize << k;
                let beta = b / n as f64;
                let fine = TimeGrid::uniform(12.0, 12_000);
                let mom = sm::evolve_mf2(n, beta, sm::mf2_initial(n, InitialState::FullyInverted), &fine)?;
                let p: Vec<f64> = mom.iter().map(|m| sm::power_from_moments(n, beta, m)).collect();
                let stride = (12_000 / steps).max(1);
                for i in (0..p.len()).step_by(stride) {
                    power.push(vec![k.into(), fine.output_times[i].into(), p[i].into()]);
                }
                let e = trapezoid(&fine.output_times, &p);
                enh.push(vec![k.into(), e.into(), (e / b).into()]);
            }
            Ok(vec![power, enh])
        }
        5 => {
            let mut tab = Table::new("fig5_gamma", &["configuration", "B", "t", "Gamma"]);
            for b in [10.0, 20.0, 40.0, 60.0, 80.0, 100.0] {
                for t in times(5.0) {
                    tab.push(vec!["chiral".into(), b.into(), t.into(), analytic::gamma_chiral(b, t).into()]);
                    tab.push(vec!["symmetric".into(), b.into(), t.into(), analytic::gamma_symmetric(b, t).into()]);
                }
            }
            let mut late = Table::new("fig5_late", &["B", "t", "Gamma"]);
            for b in [10.0, 20.0, 40.0] {
                for k in 0..=steps {
                    let t = 2.0 + 8.0 * k as f64 / steps as f64;
                    late.push(vec![b.into(), t.into(), analytic::gamma_chiral(b, t).into()]);
                }
            }
            Ok(vec![tab, late])
        }
        6 => {
            let mut tab = Table::new("fig6_g2", &["B", "kmax", "t", "g2", "converged"]);
            for b in [10.0, 40.0, 120.0, 200.0] {
                for kmax in [35usize, 36] {
                    for t in times(3.0) {
                        let v = analytic::g2_0t_chiral(b, t, kmax);
                        tab.push(vec![b.into(), kmax.into(), t.into(), v.value.into(), v.converged.into()]);
                    }
                }
            }
            Ok(vec![tab])
        }
        7 => {
            let mut tab = Table::new("fig7_e1", &["x", "kmax", "t", "e1", "converged"]);
            for x in [2.0, 4.0, 6.0, 8.0, 10.0] {
                for kmax in [14usize, 15, 16] {
                    for t in times(4.0) {
                        let v = analytic::e1_correction(x, t, kmax);
                        tab.push(vec![x.into(), kmax.into(), t.into(), v.value.into(), v.converged.into()]);
                    }
                }
            }
            let mut snap = Table::new("fig7_c1", &["t", "x", "y", "C1"]);
            let grid = OpticalGrid::new(10.0, 41)?;
            for t in [peak_rate_time(), 1.5 * special_time_tsp()] {
                for i in 0..grid.m {
                    for j in 0..grid.m {
                        let (v, _) = flagged(analytic::c1_field(grid.x(i), grid.x(j), t, 60))?;
                        snap.push(vec![t.into(), grid.x(i).into(), grid.x(j).into(), v.into()]);
                    }
                }
            }
            Ok(vec![tab, snap])
        }
        _ => Err(usage(format!("no figure {number}; choose 2–7"))),
    }
}

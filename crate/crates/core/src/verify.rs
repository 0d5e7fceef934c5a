//! Cross-solver verification suite. Each criterion returns a report with the
//! measured figure of merit, its tolerance and a short breakdown.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::One;
use serde::Serialize;

use crate::analytic;
use crate::chiral_continuum::{self as cc, OpticalGrid};
use crate::coeffs::{c_ij_table, c_n_table, tables};
use crate::config::{channels, Configuration, InitialState, ObservableTrace, SystemConfig, TimeGrid};
use crate::error::Result;
use crate::exact_me;
use crate::oracle;
use crate::special::{bessel_i, bessel_j, h, hyp1f2_half, peak_rate_time, special_time_tsp};
use crate::sym_moments::{self as sm, DickeSolver, LowMoments};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CriterionReport {
    pub id: u8,
    pub name: String,
    pub passed: bool,
    pub measured: f64,
    pub tolerance: f64,
    pub detail: String,
}

impl CriterionReport {
    /// One-line summary, e.g. `criterion  4 PASS  continuum exactness ...`.
    pub fn line(&self) -> String {
        format!(
            "criterion {:>2} {}  {}: measured {:.3e} (tolerance {:.3e}); {}",
            self.id,
            if self.passed { "PASS" } else { "FAIL" },
            self.name,
            self.measured,
            self.tolerance,
            self.detail
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Level {
    /// Criteria 1–6.
    Quick,
    /// All twelve criteria.
    Full,
}

pub const CRITERIA: [(u8, &str); 12] = [
    (1, "coefficient identity"),
    (2, "Bessel identity"),
    (3, "symmetric oracle equivalence"),
    (4, "chiral continuum exactness"),
    (5, "special-time structure"),
    (6, "symmetric closed forms"),
    (7, "thermodynamic approach"),
    (8, "g2 structure"),
    (9, "correlation field"),
    (10, "e1 correction"),
    (11, "asymptotics"),
    (12, "hierarchy ansatz scaling"),
];

pub fn run(level: Level) -> Vec<CriterionReport> {
    let ids: Vec<u8> = match level {
        Level::Quick => (1..=6).collect(),
        Level::Full => (1..=12).collect(),
    };
    ids.into_iter().map(run_criterion).collect()
}

/// Runs one criterion; solver errors become a failed report.
pub fn run_criterion(id: u8) -> CriterionReport {
    let name = CRITERIA.iter().find(|c| c.0 == id).map(|c| c.1).unwrap_or("unknown");
    let res = match id {
        1 => criterion_1(),
        2 => criterion_2(),
        3 => criterion_3(),
        4 => criterion_4(),
        5 => criterion_5(),
        6 => criterion_6(),
        7 => criterion_7(),
        8 => criterion_8(),
        9 => criterion_9(),
        10 => criterion_10(),
        11 => criterion_11(),
        12 => criterion_12(),
        _ => Err(crate::Error::Domain(format!("no criterion {id}"))),
    };
    match res {
        Ok(mut r) => {
            r.id = id;
            r.name = name.to_string();
            r
        }
        Err(e) => CriterionReport {
            id,
            name: name.to_string(),
            passed: false,
            measured: f64::NAN,
            tolerance: f64::NAN,
            detail: format!("error: {e}"),
        },
    }
}

fn report(passed: bool, measured: f64, tolerance: f64, detail: String) -> CriterionReport {
    CriterionReport { id: 0, name: String::new(), passed, measured, tolerance, detail }
}

fn rat(n: i64, d: i64) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

fn max_rel(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| ((x - y) / y).abs()).fold(0.0, f64::max)
}

fn max_abs(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

fn grid(t_max: f64, n: usize) -> TimeGrid {
    TimeGrid::uniform(t_max, n)
}

fn criterion_1() -> Result<CriterionReport> {
    let expected = [rat(1, 1), rat(1, 1), rat(1, 2), rat(5, 36), rat(7, 288), rat(7, 2400), rat(11, 43200), rat(143, 8467200)];
    let c = c_n_table(30);
    let prefix_bad = expected.iter().zip(&c).filter(|(a, b)| a != b).count();
    // 4^n (½)_n / ((1)_n (2)_n n!)
    let mut taylor_bad = 0;
    let mut t = BigRational::one();
    for (n, cn) in c.iter().enumerate() {
        if n > 0 {
            let k = n as i64 - 1;
            t = t * rat(4 * (2 * k + 1), 2 * (k + 1) * (k + 2) * (k + 1));
        }
        if &t != cn {
            taylor_bad += 1;
        }
    }
    let bad = prefix_bad + taylor_bad;
    Ok(report(
        bad == 0,
        bad as f64,
        0.0,
        format!("prefix mismatches {prefix_bad}/8, Taylor mismatches {taylor_bad}/31"),
    ))
}

fn criterion_2() -> Result<CriterionReport> {
    let mut worst_i = 0.0f64;
    let mut worst_j = 0.0f64;
    let mut worst_impl = 0.0f64;
    for k in 0..=800 {
        let z = 0.5 * k as f64;
        let exact = oracle::hyp1f2_half_exact(z);
        let y = z.sqrt();
        let i0 = bessel_i(0, y)?;
        let i1 = bessel_i(1, y)?;
        worst_i = worst_i.max(((i0 * i0 - i1 * i1) - exact).abs() / exact);
        worst_impl = worst_impl.max((hyp1f2_half(z) - exact).abs() / exact);
        let exact_n = oracle::hyp1f2_half_exact(-z);
        let (j0, j1) = (bessel_j(0, y), bessel_j(1, y));
        worst_j = worst_j.max(((j0 * j0 + j1 * j1) - exact_n).abs() / exact_n.abs());
        worst_impl = worst_impl.max((hyp1f2_half(-z) - exact_n).abs() / exact_n.abs());
    }
    let m = worst_i.max(worst_j).max(worst_impl);
    Ok(report(
        m <= 1e-9,
        m,
        1e-9,
        format!("I0²−I1² {worst_i:.2e}, J0²+J1² {worst_j:.2e}, hyp1f2_half {worst_impl:.2e} vs 400-bit Taylor"),
    ))
}

fn criterion_3() -> Result<CriterionReport> {
    let tg = grid(5.0, 100).with_tolerances(1e-11, 1e-14);
    let mut dp = 0.0f64;
    let mut dg = 0.0f64;
    for n in 2..=6 {
        for beta in [0.05, 0.3] {
            let cfg = SystemConfig::new(n, beta, Configuration::SymmetricMirror)?;
            let ex = exact_me::observables(&cfg, &tg)?;
            let g2_ex = exact_me::two_time_g2(&cfg, &tg, 0.0)?;
            let gen = sm::build_hierarchy(n, beta)?;
            let inv = sm::evolve_exact(&gen, &sm::inverted_initial(n), &tg)?;
            let psi = sm::evolve_exact(&gen, &sm::dicke_minus_one_initial(n)?, &tg)?;
            let p: Vec<f64> = inv.iter().map(|m| sm::power_from_moments(n, beta, &m.low())).collect();
            let pp: Vec<f64> = psi.iter().map(|m| sm::power_from_moments(n, beta, &m.low())).collect();
            let g2: Vec<f64> = pp.iter().zip(&p).map(|(a, b)| a / b).collect();
            dp = dp.max(max_abs(ex.channel(channels::POWER_TOTAL).unwrap(), &p));
            dg = dg.max(max_abs(g2_ex.channel(channels::G2_0T).unwrap(), &g2));
        }
    }
    Ok(report(
        dp <= 1e-7 && dg <= 1e-6,
        dp.max(dg),
        1e-7,
        format!("max |ΔP| {dp:.2e} (≤ 1e-7), max |Δg²(0,t)| {dg:.2e} (≤ 1e-6), N = 2..6, β ∈ {{0.05, 0.3}}"),
    ))
}

fn continuum_limit_error(b: f64, m: usize, t_max: f64) -> Result<f64> {
    let g = OpticalGrid::new(b, m)?;
    let tg = cc::default_time_grid(t_max, 60);
    let tr = cc::power_trace(g, None, InitialState::FullyInverted, &tg)?;
    let closed: Vec<f64> = tg.output_times.iter().map(|&t| analytic::power_chiral(b, t)).collect();
    Ok(max_rel(tr.channel(channels::POWER_TOTAL).unwrap(), &closed))
}

fn criterion_4() -> Result<CriterionReport> {
    let e513 = continuum_limit_error(10.0, 513, 3.0)?;
    let e1025 = continuum_limit_error(10.0, 1025, 3.0)?;
    let order = (e513 / e1025).log2();
    Ok(report(
        e513 <= 5e-3 && e1025 <= 1.5e-3 && order >= 1.8,
        e513,
        5e-3,
        format!("M=513 {e513:.2e} (≤ 5e-3), M=1025 {e1025:.2e} (≤ 1.5e-3), observed order {order:.2} (≥ 1.8)"),
    ))
}

fn argmax(v: &[f64]) -> usize {
    v.iter().enumerate().fold((0, f64::NEG_INFINITY), |a, (i, &x)| if x > a.1 { (i, x) } else { a }).0
}

fn criterion_5() -> Result<CriterionReport> {
    let tsp = special_time_tsp();
    let rounds = (tsp * 100.0).round() / 100.0 == 1.59;
    let mut g_dev = 0.0f64;
    let dt = 1e-3;
    let ts: Vec<f64> = (0..=3000).map(|k| k as f64 * dt).collect();
    let mut peak_dev = 0.0f64;
    for b in [10.0, 40.0, 100.0] {
        g_dev = g_dev.max((analytic::gamma_chiral(b, tsp) - 1.0).abs());
        g_dev = g_dev.max((analytic::gamma_symmetric(b, tsp) - 1.0).abs());
        let gc: Vec<f64> = ts.iter().map(|&t| analytic::gamma_chiral(b, t)).collect();
        let gs: Vec<f64> = ts.iter().map(|&t| analytic::gamma_symmetric(b, t)).collect();
        peak_dev = peak_dev.max((ts[argmax(&gc)] - peak_rate_time()).abs());
        peak_dev = peak_dev.max((ts[argmax(&gs)] - peak_rate_time()).abs());
    }
    // the numerical continuum solution must peak there too
    let g = OpticalGrid::new(10.0, 129)?;
    let tg = cc::default_time_grid(1.5, 1500);
    let tr = cc::power_trace(g, None, InitialState::FullyInverted, &tg)?;
    let gn = tr.channel(channels::GAMMA_NORM).unwrap();
    let peak_num = (tg.output_times[argmax(gn)] - peak_rate_time()).abs();
    peak_dev = peak_dev.max(peak_num);
    let passed = rounds && g_dev <= 1e-10 && peak_dev <= dt * (1.0 + 1e-9);
    Ok(report(
        passed,
        g_dev,
        1e-10,
        format!("t_sp = {tsp:.6} (rounds to 1.59: {rounds}), max |Γ(t_sp) − 1| {g_dev:.2e}, max |argmax Γ − ln 2| {peak_dev:.2e} (grid step {dt:.0e})"),
    ))
}

fn criterion_6() -> Result<CriterionReport> {
    let n = 1usize << 20;
    let b = 20.0;
    let beta = b / n as f64;
    let tg = TimeGrid::uniform(12.0, 12000).with_tolerances(1e-10, 1e-13);
    let mom = sm::evolve_mf2(n, beta, sm::mf2_initial(n, InitialState::FullyInverted), &tg)?;
    let p: Vec<f64> = mom.iter().map(|m| sm::power_from_moments(n, beta, m)).collect();
    let mut tr = ObservableTrace::new("mf2", tg.output_times.clone());
    tr.push_channel(channels::POWER_TOTAL, p);
    let e = sm::waveguide_energy(&tr)?;
    let enh = e / b;
    let de = (e / 2600.0 - 1.0).abs();
    let dh = (enh / 130.0 - 1.0).abs();
    let mut dq = 0.0f64;
    for bb in [1.0, 5.0, 20.0, 40.0] {
        dq = dq.max((analytic::energy_symmetric_quad(bb) / analytic::energy_symmetric(bb) - 1.0).abs());
    }
    Ok(report(
        de <= 0.05 && dh <= 0.05 && dq <= 1e-8,
        de.max(dh),
        0.05,
        format!("E_wg {e:.1} (reference ≈ 2600), enhancement {enh:.1} (reference ≈ 130), quadrature vs γ-form {dq:.2e} (≤ 1e-8)"),
    ))
}

/// Max relative deviation of the finite-β continuum P(B,t) from the closed form for t ≤ t_max.
pub fn finite_beta_deviation(b: f64, n_atoms: f64, m: usize, t_max: f64) -> Result<f64> {
    let g = OpticalGrid::new(b, m)?;
    let tg = cc::default_time_grid(t_max, 48);
    let tr = cc::power_trace(g, Some(b / n_atoms), InitialState::FullyInverted, &tg)?;
    let closed: Vec<f64> = tg.output_times.iter().map(|&t| analytic::power_chiral(b, t)).collect();
    Ok(max_rel(tr.channel(channels::POWER_TOTAL).unwrap(), &closed))
}

fn criterion_7() -> Result<CriterionReport> {
    let ns = [900.0, 3e4, 1e5];
    let dev: Vec<f64> = ns.iter().map(|&n| finite_beta_deviation(10.0, n, 257, 1.2)).collect::<Result<_>>()?;
    let decreasing = dev.windows(2).all(|w| w[1] < w[0]);
    Ok(report(
        dev[1] < 0.01 && decreasing,
        dev[1],
        0.01,
        format!(
            "max_(t≤1.2) rel. deviation: N=900 {:.2e}, N=3e4 {:.2e}, N=1e5 {:.2e}; decreasing: {decreasing}",
            dev[0], dev[1], dev[2]
        ),
    ))
}

fn criterion_8() -> Result<CriterionReport> {
    // symmetric limit: P_ψ and P obey the same linear ODE, P_ψ(0) = 2P(0)
    let mut sym_dev = 0.0f64;
    for k in 0..=100 {
        let t = 0.05 * k as f64;
        let r = analytic::power_symmetric(10.0, t, 20.0) / analytic::power_symmetric(10.0, t, 10.0);
        sym_dev = sym_dev.max((r - analytic::g2_0t_symmetric(t)).abs());
    }
    let g00 = (analytic::g2_0t_chiral(10.0, 0.0, 35).value - 2.0).abs();
    let g = OpticalGrid::new(10.0, 257)?;
    let tg = cc::default_time_grid(2.0, 40);
    let pi = cc::power_trace(g, None, InitialState::FullyInverted, &tg)?;
    let pd = cc::power_trace(g, None, InitialState::DickeMinusOne, &tg)?;
    let ratio: Vec<f64> = pd
        .channel(channels::POWER_TOTAL)
        .unwrap()
        .iter()
        .zip(pi.channel(channels::POWER_TOTAL).unwrap())
        .map(|(a, b)| a / b)
        .collect();
    let series: Vec<f64> = tg.output_times.iter().map(|&t| analytic::g2_0t_chiral(10.0, t, 35).value).collect();
    let cont = max_rel(&series, &ratio);
    let mut exact_dev = 0.0f64;
    for n in 2..=6 {
        for conf in [Configuration::Chiral, Configuration::SymmetricMirror] {
            let cfg = SystemConfig::new(n, 0.1, conf)?;
            let tr = exact_me::two_time_g2(&cfg, &TimeGrid::from_times(vec![0.0])?, 0.0)?;
            let v = tr.channel(channels::G2_0T).unwrap()[0];
            exact_dev = exact_dev.max((v - 2.0 * (1.0 - 1.0 / n as f64)).abs());
        }
        let p = sm::power_from_moments(n, 0.1, &sm::inverted_initial(n).low());
        let pp = sm::power_from_moments(n, 0.1, &sm::dicke_minus_one_initial(n)?.low());
        exact_dev = exact_dev.max((pp / p - 2.0 * (1.0 - 1.0 / n as f64)).abs());
    }
    Ok(report(
        sym_dev == 0.0 && g00 <= 1e-8 && cont <= 5e-3 && exact_dev <= 1e-8,
        cont,
        5e-3,
        format!(
            "symmetric g²(0,t) − 2: {sym_dev:.1e}; chiral series g²(0,0) − 2: {g00:.1e}; series vs continuum (t ≤ 2) {cont:.2e}; exact g²(0,0) vs 2(1−1/N): {exact_dev:.1e}"
        ),
    ))
}

fn factorial(n: usize) -> BigInt {
    (1..=n as u64).fold(BigInt::one(), |a, k| a * BigInt::from(k))
}

fn criterion_9() -> Result<CriterionReport> {
    let tp = peak_rate_time();
    let mut edge = 0.0f64;
    for k in 0..=400 {
        let y = 0.1 * k as f64;
        let a = analytic::c1_field(0.0, y, tp, 64)?;
        let b = analytic::c1_edge(y, tp)?;
        edge = edge.max(((a - b) / b).abs());
    }
    let tsp = special_time_tsp();
    let mut at_tsp = 0.0f64;
    for i in 0..=10 {
        for j in 0..=10 {
            at_tsp = at_tsp.max(analytic::c1_field(i as f64, j as f64, tsp, 64)?.abs());
        }
    }
    let c = c_ij_table(30);
    let bad = (0..=30)
        .filter(|&j| c[0][j] != BigRational::new(BigInt::one(), factorial(j) * factorial(j + 1)))
        .count();
    Ok(report(
        edge <= 1e-10 && at_tsp <= 1e-12 && bad == 0,
        edge,
        1e-10,
        format!("edge vs Bessel {edge:.2e}; max |C₁(t_sp)| on [0,10]² {at_tsp:.1e}; c_0j mismatches {bad}/31"),
    ))
}

fn criterion_10() -> Result<CriterionReport> {
    let mut s_dev = 0.0f64;
    for k in 0..=50 {
        let t = 0.1 * k as f64;
        for n in 1..=2 {
            let q = oracle::simpson(&|s: f64| h(s).powi(n as i32), 0.0, t, 1e-14);
            s_dev = s_dev.max((analytic::s_integral(n, t) - q).abs());
        }
    }
    let expected_u = [rat(2, 1), rat(3, 2), rat(5, 9), rat(175, 144)];
    let tab = tables(8);
    let u_bad: Vec<String> = expected_u
        .iter()
        .enumerate()
        .filter(|(i, v)| &tab.u[i + 1] != *v)
        .map(|(i, v)| format!("u_{} = {} (expected {})", i + 1, tab.u[i + 1], v))
        .collect();
    // e(x,t) − e^{−t} against β e₁(x,t), sup-norm relative per depth
    let g = OpticalGrid::new(10.0, 251)?;
    let tg = cc::default_time_grid(2.0, 40);
    let mut e_dev = Vec::new();
    for beta in [1e-4, 5e-5] {
        let mut worst = 0.0f64;
        let xs = [2.0, 4.0, 6.0, 8.0, 10.0];
        let nodes: Vec<usize> = xs.iter().map(|&x| g.node(x)).collect::<Result<_>>()?;
        let mut num = vec![vec![0.0; tg.output_times.len()]; xs.len()];
        cc::evolve_finite_beta_with(g, beta, InitialState::FullyInverted, &tg, |k, t, s| {
            for (q, &i) in nodes.iter().enumerate() {
                num[q][k] = (s.e[i] - (-t).exp()) / beta;
            }
        })?;
        for (q, &x) in xs.iter().enumerate() {
            let e1: Vec<f64> = tg.output_times.iter().map(|&t| analytic::e1_correction(x, t, 30).value).collect();
            let scale = e1.iter().fold(0.0f64, |a, v| a.max(v.abs()));
            worst = worst.max(max_abs(&num[q], &e1) / scale);
        }
        e_dev.push(worst);
    }
    let passed = s_dev <= 1e-10 && u_bad.is_empty() && e_dev.iter().all(|&d| d <= 0.02);
    Ok(report(
        passed,
        e_dev[0],
        0.02,
        format!(
            "S₁,S₂ vs quadrature {s_dev:.1e}; u prefix: {}; e-field vs βe₁ (x ≤ 10, t ≤ 2): β=1e-4 {:.2e}, β=5e-5 {:.2e}",
            if u_bad.is_empty() { "matches".to_string() } else { u_bad.join(", ") },
            e_dev[0],
            e_dev[1]
        ),
    ))
}

fn criterion_11() -> Result<CriterionReport> {
    let up = (analytic::asymptotic_hyp(100.0)? / hyp1f2_half(400.0) - 1.0).abs();
    let down = (analytic::asymptotic_hyp(-100.0)? / hyp1f2_half(-400.0) - 1.0).abs();
    // extrema of the oscillatory part of P(100, t) against 4√(x(t−2)) = kπ
    let x = 100.0;
    let dt = 1e-4;
    let ts: Vec<f64> = (0..=55000).map(|k| 2.3 + k as f64 * dt).collect();
    let osc: Vec<f64> = ts.iter().map(|&t| analytic::oscillation_metric(x * h(t))).collect();
    let mut worst = 0.0f64;
    let mut count = 0;
    for k in 1..ts.len() - 1 {
        let is_ext = (osc[k] > osc[k - 1] && osc[k] >= osc[k + 1]) || (osc[k] < osc[k - 1] && osc[k] <= osc[k + 1]);
        if !is_ext {
            continue;
        }
        let phase = 4.0 * (x * (ts[k] - 2.0)).sqrt();
        let kk = (phase / std::f64::consts::PI).round();
        let t_pred = 2.0 + (kk * std::f64::consts::PI / 4.0).powi(2) / x;
        worst = worst.max((ts[k] - t_pred).abs() / t_pred);
        count += 1;
    }
    let passed = up <= 0.05 && down <= 0.05 && worst <= 0.05 && count >= 5;
    Ok(report(
        passed,
        up.max(down),
        0.05,
        format!("ratio error s=+100 {up:.2e}, s=−100 {down:.2e}; {count} late-time extrema, max relative time offset {worst:.2e}"),
    ))
}

/// Residuals max_t |A_{p,c} − c e^{−pt} A₀₁⁽⁰⁾^c| for (0,1), (1,1), (0,2), with
/// A₀₁⁽⁰⁾ = (β/B) e^{−t}(e^{Bh} − 1), the value consistent with P = P₀e^{−t}e^{Bh}.
pub fn ansatz_residuals(times: &[f64], mom: &[LowMoments], b: f64, beta: f64) -> [f64; 3] {
    let mut r = [0.0f64; 3];
    for (&t, m) in times.iter().zip(mom) {
        let a01 = beta / b * (-t).exp() * ((b * h(t)).exp() - 1.0);
        r[0] = r[0].max((m.a01 - a01).abs());
        r[1] = r[1].max((m.a11 - (-t).exp() * a01).abs());
        r[2] = r[2].max((m.a02 - 2.0 * a01 * a01).abs());
    }
    r
}

fn criterion_12() -> Result<CriterionReport> {
    let b = 10.0;
    let tg = TimeGrid::uniform(3.0, 60).with_tolerances(1e-10, 1e-12);
    let mut res = Vec::new();
    let mut qdiff = Vec::new();
    let mut qscale = Vec::new();
    for n in [1024usize, 2048] {
        let beta = b / n as f64;
        let solver = DickeSolver::new(n, beta)?;
        let exact = solver.evolve(InitialState::FullyInverted, &tg)?;
        res.push(ansatz_residuals(&tg.output_times, &exact, b, beta));
        let mf2 = sm::evolve_mf2(n, beta, sm::mf2_initial(n, InitialState::FullyInverted), &tg)?;
        let qe = sm::symmetric_observables("dicke", n, beta, &tg.output_times, &exact)?;
        let qm = sm::symmetric_observables("mf2", n, beta, &tg.output_times, &mf2)?;
        // Q compared while P is appreciable (t ≤ 2)
        let k2 = tg.output_times.iter().filter(|&&t| t <= 2.0 + 1e-12).count();
        let (qe, qm) = (qe.channel("q").unwrap()[..k2].to_vec(), qm.channel("q").unwrap()[..k2].to_vec());
        qdiff.push(max_abs(&qe, &qm));
        qscale.push(qe.iter().fold(0.0f64, |a, v| a.max(v.abs())));
    }
    let targets = [2.0, 2.0, 3.0];
    let exps: Vec<f64> = (0..3).map(|k| (res[0][k] / res[1][k]).log2()).collect();
    let exp_dev = exps.iter().zip(&targets).map(|(e, t)| (e - t).abs()).fold(0.0, f64::max);
    let q_ok = qdiff[1] >= 0.5 * qdiff[0] && qdiff[1] >= 0.05 * qscale[1];
    Ok(report(
        exp_dev <= 0.3 && q_ok,
        exp_dev,
        0.3,
        format!(
            "fitted exponents (0,1) {:.2} (1,1) {:.2} (0,2) {:.2} vs 2, 2, 3; max_t |Q_MF2 − Q_exact| N=1024 {:.3}, N=2048 {:.3} (max |Q| {:.3})",
            exps[0], exps[1], exps[2], qdiff[0], qdiff[1], qscale[1]
        ),
    ))
}

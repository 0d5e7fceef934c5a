//! Method of lines for the chiral continuum MF2 equations on an optical-depth
//! grid x_m = mΔx, Δx = B/(M−1):
//!
//!   (∂t+1) e(x)   = −2β ∫₀ˣ C̃(x,x′) dx′
//!   (∂t+1) C̃(x,y) = [2e(y)−1] ∫₀ʸ C̃(x,y′) dy′ + (x↔y) + [2E(x,y) − e(min{x,y})]
//!   (∂t+2) E(x,y) = −2β e(x) ∫₀ʸ C̃(x,y′) dy′ + (x↔y)
//!
//! with C̃ = C/β. The strict limit freezes e = e^{−t}, E = e^{−2t}.
//! Inner integrals are cumulative trapezoids along each row; C̃ and E are
//! stored as packed upper triangles.

use rayon::prelude::*;

use crate::config::{channels, InitialState, ObservableTrace, TimeGrid};
use crate::error::{Error, Result};
use crate::ode::{integrate, OdeOptions, OdeSystem};

pub const DEFAULT_M: usize = 257;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OpticalGrid {
    pub b: f64,
    pub m: usize,
}

impl OpticalGrid {
    pub fn new(b: f64, m: usize) -> Result<Self> {
        if m < 33 {
            return Err(Error::Domain(format!("grid needs at least 33 points, got {m}")));
        }
        if !(b > 0.0 && b.is_finite()) {
            return Err(Error::Domain(format!("optical depth must be positive, got {b}")));
        }
        Ok(Self { b, m })
    }

    pub fn dx(&self) -> f64 {
        self.b / (self.m - 1) as f64
    }

    pub fn x(&self, i: usize) -> f64 {
        i as f64 * self.dx()
    }

    /// Node index of x, which must lie on the grid.
    pub fn node(&self, x: f64) -> Result<usize> {
        let r = x / self.dx();
        let i = r.round();
        if (r - i).abs() > 1e-9 || i < 0.0 || i as usize >= self.m {
            return Err(Error::Domain(format!("x = {x} is not a grid node")));
        }
        Ok(i as usize)
    }

    fn packed_len(&self) -> usize {
        self.m * (self.m + 1) / 2
    }
}

/// Symmetric M × M field stored as its upper triangle, row by row.
#[derive(Debug, Clone, PartialEq)]
pub struct Packed {
    m: usize,
    pub data: Vec<f64>,
}

impl Packed {
    pub fn filled(m: usize, v: f64) -> Self {
        Self { m, data: vec![v; m * (m + 1) / 2] }
    }

    /// Samples a symmetric f(i, j) on the upper triangle.
    pub fn from_fn(m: usize, f: impl Fn(usize, usize) -> f64) -> Self {
        let data = (0..m).flat_map(|i| (i..m).map(move |j| (i, j))).map(|(i, j)| f(i, j)).collect();
        Self { m, data }
    }

    pub fn size(&self) -> usize {
        self.m
    }

    #[inline]
    pub fn index(m: usize, i: usize, j: usize) -> usize {
        let (a, b) = if i <= j { (i, j) } else { (j, i) };
        // rows r < a hold m − r entries each
        a * (2 * m + 1 - a) / 2 + (b - a)
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[Self::index(self.m, i, j)]
    }
}

/// Fields (e, C̃, E) on the grid.
#[derive(Debug, Clone, PartialEq)]
pub struct ContinuumState {
    pub grid: OpticalGrid,
    pub e: Vec<f64>,
    pub ctilde: Packed,
    pub big_e: Packed,
}

impl ContinuumState {
    pub fn initial(grid: OpticalGrid, beta: f64, init: InitialState) -> Self {
        let m = grid.m;
        let (e0, c0, ee0) = match init {
            InitialState::FullyInverted => (1.0, 0.0, 1.0),
            InitialState::DickeMinusOne => (1.0 - beta / grid.b, 1.0 / grid.b, 1.0 - 2.0 * beta / grid.b),
        };
        Self { grid, e: vec![e0; m], ctilde: Packed::filled(m, c0), big_e: Packed::filled(m, ee0) }
    }

    /// Strict-limit state at time t: e = e^{−t}, E = e^{−2t}.
    fn from_limit(grid: OpticalGrid, t: f64, c: &[f64]) -> Self {
        let m = grid.m;
        Self {
            grid,
            e: vec![(-t).exp(); m],
            ctilde: Packed { m, data: c.to_vec() },
            big_e: Packed::filled(m, (-2.0 * t).exp()),
        }
    }

    /// R(i, j) = ∫₀^{x_j} C̃(x_i, y) dy by cumulative trapezoid, row-major M × M.
    pub fn row_integrals(&self) -> Vec<f64> {
        let mut r = vec![0.0; self.grid.m * self.grid.m];
        row_integrals_into(&self.ctilde, self.grid.dx(), &mut r);
        r
    }

    /// P(x_m) = ∫₀^{x_m} e + ∬₀^{x_m} C̃ for every node.
    pub fn power_profile(&self) -> Vec<f64> {
        let r = self.row_integrals();
        let m = self.grid.m;
        let dx = self.grid.dx();
        let mut out = vec![0.0; m];
        let mut int_e = 0.0;
        for k in 1..m {
            int_e += 0.5 * dx * (self.e[k - 1] + self.e[k]);
            // D(k) = trapezoid over i ≤ k of R(i, k)
            let mut d = 0.5 * (r[k] + r[k * m + k]);
            for i in 1..k {
                d += r[i * m + k];
            }
            out[k] = int_e + dx * d;
        }
        out
    }

    /// P at the far end x = B.
    pub fn power_end(&self) -> f64 {
        *self.power_profile().last().unwrap()
    }

    /// (Q, g²(t,t)) at node k: Q = 2P² + 2∬(E − e e).
    pub fn q_at(&self, k: usize) -> Result<(f64, f64)> {
        let p = self.power_profile()[k];
        if p < 1e-14 {
            return Err(Error::Normalization(format!("P = {p:e}")));
        }
        let dx = self.grid.dx();
        let w = |i: usize| if i == 0 || i == k { 0.5 } else { 1.0 };
        let mut s = 0.0;
        for i in 0..=k {
            for j in 0..=k {
                s += w(i) * w(j) * (self.big_e.get(i, j) - self.e[i] * self.e[j]);
            }
        }
        let q = 2.0 * p * p + 2.0 * dx * dx * s;
        Ok((q, q / (p * p)))
    }
}

fn row_integrals_into(c: &Packed, dx: f64, r: &mut [f64]) {
    let m = c.m;
    r.par_chunks_mut(m).enumerate().for_each(|(i, row)| {
        let mut acc = 0.0;
        row[0] = 0.0;
        let mut prev = c.get(i, 0);
        for j in 1..m {
            let cur = c.get(i, j);
            acc += 0.5 * dx * (prev + cur);
            row[j] = acc;
            prev = cur;
        }
    });
}

struct LimitSystem {
    grid: OpticalGrid,
    r: Vec<f64>,
}

impl OdeSystem for LimitSystem {
    fn dim(&self) -> usize {
        self.grid.packed_len()
    }

    fn rhs(&mut self, t: f64, y: &[f64], dy: &mut [f64]) {
        let m = self.grid.m;
        let c = Packed { m, data: y.to_vec() };
        row_integrals_into(&c, self.grid.dx(), &mut self.r);
        let e = (-t).exp();
        let coupling = 2.0 * e - 1.0;
        let source = 2.0 * e * e - e;
        let r = &self.r;
        split_rows_mut(dy, m).into_par_iter().for_each(|(i, row)| {
            for (jj, d) in row.iter_mut().enumerate() {
                let j = i + jj;
                *d = -y[Packed::index(m, i, j)] + coupling * (r[i * m + j] + r[j * m + i]) + source;
            }
        });
    }
}

struct FiniteSystem {
    grid: OpticalGrid,
    beta: f64,
    r: Vec<f64>,
}

impl OdeSystem for FiniteSystem {
    fn dim(&self) -> usize {
        self.grid.m + 2 * self.grid.packed_len()
    }

    fn rhs(&mut self, _t: f64, y: &[f64], dy: &mut [f64]) {
        let m = self.grid.m;
        let np = self.grid.packed_len();
        let (e, rest) = y.split_at(m);
        let (cy, ey) = rest.split_at(np);
        let c = Packed { m, data: cy.to_vec() };
        row_integrals_into(&c, self.grid.dx(), &mut self.r);
        let r = &self.r;
        let beta = self.beta;
        let (de, drest) = dy.split_at_mut(m);
        let (dc, dee) = drest.split_at_mut(np);
        for i in 0..m {
            de[i] = -e[i] - 2.0 * beta * r[i * m + i];
        }
        split_rows_mut(dc, m).into_par_iter().zip(split_rows_mut(dee, m).into_par_iter()).for_each(
            |((i, crow), (_, erow))| {
                for jj in 0..crow.len() {
                    let j = i + jj;
                    let k = Packed::index(m, i, j);
                    let (rij, rji) = (r[i * m + j], r[j * m + i]);
                    crow[jj] = -cy[k] + (2.0 * e[j] - 1.0) * rij + (2.0 * e[i] - 1.0) * rji + 2.0 * ey[k] - e[i];
                    erow[jj] = -2.0 * ey[k] - 2.0 * beta * (e[i] * rij + e[j] * rji);
                }
            },
        );
    }
}

/// Splits a packed buffer into its rows (row i holds columns i..M).
fn split_rows_mut(buf: &mut [f64], m: usize) -> Vec<(usize, &mut [f64])> {
    let mut rows = Vec::with_capacity(m);
    let mut rest = buf;
    for i in 0..m {
        let (row, tail) = rest.split_at_mut(m - i);
        rows.push((i, row));
        rest = tail;
    }
    rows
}

fn opts(grid: &TimeGrid) -> OdeOptions {
    OdeOptions::tol(grid.rtol, grid.atol)
}

/// Default tolerances for the continuum solvers.
pub fn default_time_grid(t_max: f64, n_steps: usize) -> TimeGrid {
    TimeGrid::uniform(t_max, n_steps).with_tolerances(1e-8, 1e-12)
}

/// Strict-limit evolution of C̃ with frozen e = e^{−t}, E = e^{−2t}.
pub fn evolve_limit_with<F>(grid: OpticalGrid, init: InitialState, times: &TimeGrid, observe: F) -> Result<()>
where
    F: FnMut(usize, f64, &ContinuumState),
{
    let c0 = match init {
        InitialState::FullyInverted => 0.0,
        InitialState::DickeMinusOne => 1.0 / grid.b,
    };
    evolve_limit_from(grid, &Packed::filled(grid.m, c0), times, observe)
}

/// Strict-limit evolution from an arbitrary initial C̃.
pub fn evolve_limit_from<F>(grid: OpticalGrid, c0: &Packed, times: &TimeGrid, mut observe: F) -> Result<()>
where
    F: FnMut(usize, f64, &ContinuumState),
{
    if c0.m != grid.m {
        return Err(Error::Domain(format!("initial field has M = {}, grid has {}", c0.m, grid.m)));
    }
    let mut y = c0.data.clone();
    let mut sys = LimitSystem { grid, r: vec![0.0; grid.m * grid.m] };
    integrate(&mut sys, times.output_times[0], &mut y, &times.output_times, &opts(times), |k, t, y| {
        observe(k, t, &ContinuumState::from_limit(grid, t, y));
        true
    })?;
    Ok(())
}

pub fn evolve_limit(grid: OpticalGrid, init: InitialState, times: &TimeGrid) -> Result<Vec<ContinuumState>> {
    let mut out = Vec::new();
    evolve_limit_with(grid, init, times, |_, _, s| out.push(s.clone()))?;
    Ok(out)
}

/// Outcome of a finite-β run: first time at which |βC̃| exceeded ½, if any.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct PhysicalityReport {
    pub violation_time: Option<f64>,
    pub max_abs_c: f64,
}

/// Full nonlinear evolution at finite β.
pub fn evolve_finite_beta_with<F>(
    grid: OpticalGrid,
    beta: f64,
    init: InitialState,
    times: &TimeGrid,
    mut observe: F,
) -> Result<PhysicalityReport>
where
    F: FnMut(usize, f64, &ContinuumState),
{
    if beta < 0.0 || beta * (grid.m - 1) as f64 / grid.b > 1.0 + 1e-12 {
        return Err(Error::Domain(format!("grid spacing {} finer than beta = {beta}", grid.dx())));
    }
    let s0 = ContinuumState::initial(grid, beta, init);
    let m = grid.m;
    let np = grid.packed_len();
    let mut y = Vec::with_capacity(m + 2 * np);
    y.extend_from_slice(&s0.e);
    y.extend_from_slice(&s0.ctilde.data);
    y.extend_from_slice(&s0.big_e.data);
    let mut sys = FiniteSystem { grid, beta, r: vec![0.0; m * m] };
    let mut report = PhysicalityReport::default();
    integrate(&mut sys, times.output_times[0], &mut y, &times.output_times, &opts(times), |k, t, y| {
        let state = ContinuumState {
            grid,
            e: y[..m].to_vec(),
            ctilde: Packed { m, data: y[m..m + np].to_vec() },
            big_e: Packed { m, data: y[m + np..].to_vec() },
        };
        let cmax = state.ctilde.data.iter().fold(0.0f64, |a, v| a.max(v.abs()));
        report.max_abs_c = report.max_abs_c.max(cmax);
        if beta * cmax > 0.5 && report.violation_time.is_none() {
            report.violation_time = Some(t);
        }
        observe(k, t, &state);
        true
    })?;
    Ok(report)
}

pub fn evolve_finite_beta(grid: OpticalGrid, beta: f64, init: InitialState, times: &TimeGrid) -> Result<Vec<ContinuumState>> {
    let mut out = Vec::new();
    evolve_finite_beta_with(grid, beta, init, times, |_, _, s| out.push(s.clone()))?;
    Ok(out)
}

/// Γ(B, t) = P(B, t)/(B e^{−t}).
pub fn gamma_norm(power: &[f64], times: &[f64], b: f64) -> Vec<f64> {
    power.iter().zip(times).map(|(p, t)| p / (b * (-t).exp())).collect()
}

/// P(B, t), Γ and g²(t,t) at the end of the medium; `beta = None` runs the strict limit.
pub fn power_trace(grid: OpticalGrid, beta: Option<f64>, init: InitialState, times: &TimeGrid) -> Result<ObservableTrace> {
    let k_end = grid.m - 1;
    let mut p = Vec::with_capacity(times.output_times.len());
    let mut g2 = Vec::with_capacity(times.output_times.len());
    let mut ex = Vec::with_capacity(times.output_times.len());
    let mut err = None;
    let mut obs = |_: usize, _: f64, s: &ContinuumState| {
        p.push(s.power_end());
        match s.q_at(k_end) {
            Ok((_, g)) => g2.push(g),
            Err(e) => {
                err.get_or_insert(e);
                g2.push(f64::NAN);
            }
        }
        ex.push(s.e.iter().sum::<f64>() / s.e.len() as f64);
    };
    let solver = match beta {
        None => {
            evolve_limit_with(grid, init, times, &mut obs)?;
            "continuum_limit"
        }
        Some(b) => {
            evolve_finite_beta_with(grid, b, init, times, &mut obs)?;
            "continuum_finite_beta"
        }
    };
    if let Some(e) = err {
        return Err(e);
    }
    let gamma = gamma_norm(&p, &times.output_times, grid.b);
    let mut tr = ObservableTrace::new(solver, times.output_times.clone())
        .with_meta("B", grid.b)
        .with_meta("M", grid.m)
        .with_meta("beta", beta.map(|b| b.to_string()).unwrap_or_else(|| "0".into()));
    tr.push_channel(channels::POWER_RIGHT, p.clone());
    tr.push_channel(channels::POWER_LEFT, vec![0.0; p.len()]);
    tr.push_channel(channels::POWER_TOTAL, p);
    tr.push_channel(channels::GAMMA_NORM, gamma);
    tr.push_channel(channels::G2_TT, g2);
    tr.push_channel(channels::EXCITATION_MEAN, ex);
    Ok(tr)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn packed_indexing() {
        let m = 5;
        let mut seen = vec![false; m * (m + 1) / 2];
        for i in 0..m {
            for j in i..m {
                let k = Packed::index(m, i, j);
                assert!(!seen[k]);
                seen[k] = true;
                assert_eq!(k, Packed::index(m, j, i));
            }
        }
        assert!(seen.iter().all(|&s| s));
    }

    #[test]
    fn inverted_initial_power() {
        let grid = OpticalGrid::new(10.0, 65).unwrap();
        let s = ContinuumState::initial(grid, 0.01, InitialState::FullyInverted);
        let p = s.power_profile();
        assert_eq!(p[0], 0.0);
        for (k, v) in p.iter().enumerate() {
            assert!((v - grid.x(k)).abs() < 1e-12);
        }
        let (_, g2) = s.q_at(64).unwrap();
        assert!((g2 - 2.0).abs() < 1e-12);
    }

    #[test]
    fn dicke_start_doubles_power() {
        let grid = OpticalGrid::new(10.0, 65).unwrap();
        let s = ContinuumState::initial(grid, 0.0, InitialState::DickeMinusOne);
        assert!((s.power_end() / 10.0 - 2.0).abs() < 1e-12);
    }

    #[test]
    fn grid_guards() {
        assert!(OpticalGrid::new(10.0, 16).is_err());
        let g = OpticalGrid::new(10.0, 41).unwrap();
        assert_eq!(g.node(2.5).unwrap(), 10);
        assert!(g.node(2.51).is_err());
    }
}

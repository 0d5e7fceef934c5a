//! Permutationally symmetric system: the linear moment hierarchy A_{p,c},
//! an equivalent population solver in the collective (j, m) basis, the
//! 3-variable MF2 closure and the symmetric observables.
//!
//! A_{p,c} is the expectation of p excitation operators, c raising and c
//! lowering operators, all on distinct atoms. It obeys
//!   (∂t + p + c)A_{p,c} = −c N_{2c} β A_{p,c} + N_o β (2c A_{p+1,c} − p A_{p−1,c+1})
//!                        + c² β (2A_{p+2,c−1} − A_{p+1,c−1}),
//! with N_i = N − i and o = p + 2c.

use rayon::prelude::*;

use crate::config::{channels, InitialState, ObservableTrace, TimeGrid};
use crate::error::{Error, Result};
use crate::ode::{integrate, integrate_sdirk, OdeOptions, OdeSystem, ShiftedLinear};

pub const MAX_MOMENTS: usize = 5_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct MomentIndex {
    pub p: usize,
    pub c: usize,
}

impl MomentIndex {
    pub fn order(&self) -> usize {
        self.p + 2 * self.c
    }
}

/// Number of admissible (p, c) with p + 2c ≤ N.
pub fn hierarchy_size(n: usize) -> usize {
    (0..=n).map(|o| o / 2 + 1).sum()
}

/// Storage ordered by o = p + 2c, then by p.
#[derive(Debug, Clone)]
struct Layout {
    n: usize,
    offsets: Vec<usize>,
}

impl Layout {
    fn new(n: usize) -> Self {
        let mut offsets = Vec::with_capacity(n + 2);
        let mut acc = 0;
        for o in 0..=n {
            offsets.push(acc);
            acc += o / 2 + 1;
        }
        offsets.push(acc);
        Self { n, offsets }
    }

    fn len(&self) -> usize {
        self.offsets[self.n + 1]
    }

    fn index(&self, p: usize, c: usize) -> Option<usize> {
        let o = p + 2 * c;
        (o <= self.n).then(|| self.offsets[o] + (p - o % 2) / 2)
    }

    fn iter(&self) -> impl Iterator<Item = MomentIndex> + '_ {
        (0..=self.n).flat_map(|o| (o % 2..=o).step_by(2).map(move |p| MomentIndex { p, c: (o - p) / 2 }))
    }
}

/// All A_{p,c} for one N.
#[derive(Debug, Clone)]
pub struct MomentVector {
    layout: Layout,
    pub values: Vec<f64>,
}

impl MomentVector {
    pub fn zeros(n: usize) -> Self {
        let layout = Layout::new(n);
        let values = vec![0.0; layout.len()];
        Self { layout, values }
    }

    pub fn n_atoms(&self) -> usize {
        self.layout.n
    }

    pub fn get(&self, p: usize, c: usize) -> Option<f64> {
        self.layout.index(p, c).map(|i| self.values[i])
    }

    /// A_{p,c}, zero when p + 2c > N.
    pub fn at(&self, p: usize, c: usize) -> f64 {
        self.get(p, c).unwrap_or(0.0)
    }

    pub fn set(&mut self, p: usize, c: usize, v: f64) {
        let i = self.layout.index(p, c).expect("moment index out of range");
        self.values[i] = v;
    }

    pub fn indices(&self) -> impl Iterator<Item = MomentIndex> + '_ {
        self.layout.iter()
    }

    pub fn low(&self) -> LowMoments {
        LowMoments {
            a10: self.at(1, 0),
            a01: self.at(0, 1),
            a20: self.at(2, 0),
            a11: self.at(1, 1),
            a02: self.at(0, 2),
        }
    }
}

/// A_{p,c}(0) = δ_{c,0}.
pub fn inverted_initial(n: usize) -> MomentVector {
    let mut m = MomentVector::zeros(n);
    for p in 0..=n {
        m.set(p, 0, 1.0);
    }
    m
}

/// Moments of |ψ_{N−1}⟩ ∝ Σ_n σ⁻_n |e…e⟩.
pub fn dicke_minus_one_initial(n: usize) -> Result<MomentVector> {
    if n < 2 {
        return Err(Error::Domain("one-photon-removed state needs N >= 2".into()));
    }
    let mut m = MomentVector::zeros(n);
    let nf = n as f64;
    for p in 0..=n {
        m.set(p, 0, (nf - p as f64) / nf);
        if p + 2 <= n {
            m.set(p, 1, 1.0 / nf);
        }
    }
    Ok(m)
}

pub fn initial_moments(n: usize, state: InitialState) -> Result<MomentVector> {
    match state {
        InitialState::FullyInverted => Ok(inverted_initial(n)),
        InitialState::DickeMinusOne => dicke_minus_one_initial(n),
    }
}

/// Sparse generator of the hierarchy: a diagonal and up to four couplings per row.
#[derive(Debug, Clone)]
pub struct Hierarchy {
    layout: Layout,
    pub beta: f64,
    diag: Vec<f64>,
    off: Vec<[(u32, f64); 4]>,
}

pub fn build_hierarchy(n: usize, beta: f64) -> Result<Hierarchy> {
    if n == 0 {
        return Err(Error::Domain("N must be positive".into()));
    }
    let size = hierarchy_size(n);
    if size > MAX_MOMENTS {
        return Err(Error::Capacity(format!("{size} moments exceed the limit of {MAX_MOMENTS}")));
    }
    let layout = Layout::new(n);
    let nf = n as f64;
    let mut diag = Vec::with_capacity(size);
    let mut off = Vec::with_capacity(size);
    for MomentIndex { p, c } in layout.iter() {
        let (pf, cf) = (p as f64, c as f64);
        let no = nf - (p + 2 * c) as f64;
        diag.push(-(pf + cf) - cf * (nf - 2.0 * cf) * beta);
        let mut row = [(0u32, 0.0); 4];
        let mut push = |k: usize, target: Option<usize>, v: f64| {
            if let Some(i) = target {
                if v != 0.0 {
                    row[k] = (i as u32, v);
                }
            }
        };
        push(0, layout.index(p + 1, c), no * beta * 2.0 * cf);
        if p > 0 {
            push(1, layout.index(p - 1, c + 1), -no * beta * pf);
        }
        if c > 0 {
            push(2, layout.index(p + 2, c - 1), cf * cf * beta * 2.0);
            push(3, layout.index(p + 1, c - 1), -cf * cf * beta);
        }
        off.push(row);
    }
    Ok(Hierarchy { layout, beta, diag, off })
}

impl Hierarchy {
    pub fn n_atoms(&self) -> usize {
        self.layout.n
    }

    pub fn len(&self) -> usize {
        self.diag.len()
    }

    pub fn is_empty(&self) -> bool {
        self.diag.is_empty()
    }

    pub fn apply(&self, y: &[f64], dy: &mut [f64]) {
        dy.par_iter_mut().with_min_len(4096).enumerate().for_each(|(i, d)| {
            let mut s = self.diag[i] * y[i];
            for &(j, v) in &self.off[i] {
                s += v * y[j as usize];
            }
            *d = s;
        });
    }

    /// Dense copy of the generator (small N only).
    pub fn to_dense(&self) -> nalgebra::DMatrix<f64> {
        let n = self.len();
        let mut m = nalgebra::DMatrix::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = self.diag[i];
            for &(j, v) in &self.off[i] {
                if v != 0.0 {
                    m[(i, j as usize)] += v;
                }
            }
        }
        m
    }
}

struct HierarchySystem<'a>(&'a Hierarchy);

impl OdeSystem for HierarchySystem<'_> {
    fn dim(&self) -> usize {
        self.0.len()
    }
    fn rhs(&mut self, _t: f64, y: &[f64], dy: &mut [f64]) {
        self.0.apply(y, dy);
    }
}

/// Integrates the hierarchy, calling `observe` at each output time.
///
/// Every physical moment satisfies |A| ≤ 1; a violation means round-off has
/// been amplified by the strongly non-normal generator (this happens for N
/// beyond roughly 150), and is reported instead of returning garbage. Use
/// [`DickeSolver`] for large N.
pub fn evolve_exact_with<F>(gen: &Hierarchy, init: &MomentVector, grid: &TimeGrid, mut observe: F) -> Result<()>
where
    F: FnMut(usize, f64, &MomentVector),
{
    if init.n_atoms() != gen.n_atoms() {
        return Err(Error::Domain("initial moments and generator have different N".into()));
    }
    let mut y = init.values.clone();
    let mut snapshot = init.clone();
    let mut bad = None;
    integrate(
        &mut HierarchySystem(gen),
        grid.output_times[0],
        &mut y,
        &grid.output_times,
        &OdeOptions::tol(grid.rtol, grid.atol),
        |k, t, y| {
            let worst = y.iter().fold(0.0f64, |m, v| m.max(v.abs()));
            if !(worst <= 1.0 + 1e-6) {
                bad = Some((t, worst));
                return false;
            }
            snapshot.values.copy_from_slice(y);
            observe(k, t, &snapshot);
            true
        },
    )?;
    if let Some((t, worst)) = bad {
        return Err(Error::Instability { t, reason: format!("max |A_pc| = {worst:e} > 1") });
    }
    Ok(())
}

pub fn evolve_exact(gen: &Hierarchy, init: &MomentVector, grid: &TimeGrid) -> Result<Vec<MomentVector>> {
    let mut out = Vec::with_capacity(grid.output_times.len());
    evolve_exact_with(gen, init, grid, |_, _, m| out.push(m.clone()))?;
    Ok(out)
}

/// The five low-order moments that determine P and G².
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct LowMoments {
    pub a10: f64,
    pub a01: f64,
    pub a20: f64,
    pub a11: f64,
    pub a02: f64,
}

/// Exact populations in the collective basis |j, m⟩ (summed over the
/// multiplicity of each j). The symmetric-mirror generator is
/// (1 − β) Σ_n D[σ⁻_n] + β D[J⁻], whose permutation-symmetric states stay
/// diagonal in (j, m), so the dynamics reduce to a classical rate equation
/// in which every transition lowers the excitation number by one.
#[derive(Debug, Clone)]
pub struct DickeSolver {
    n: usize,
    beta: f64,
    /// offset of excitation level e; states (k, e) with k = N/2 − j ∈ 0..=min(e, N − e)
    offsets: Vec<usize>,
    out_rate: Vec<f64>,
    /// rates into level e − 1 at k (same j), k + 1 (j − 1), k − 1 (j + 1)
    to_same: Vec<f64>,
    to_down: Vec<f64>,
    to_up: Vec<f64>,
}

impl DickeSolver {
    pub fn new(n: usize, beta: f64) -> Result<Self> {
        if n == 0 {
            return Err(Error::Domain("N must be positive".into()));
        }
        let mut offsets = Vec::with_capacity(n + 2);
        let mut acc = 0;
        for e in 0..=n {
            offsets.push(acc);
            acc += e.min(n - e) + 1;
        }
        offsets.push(acc);
        if acc > 4 * MAX_MOMENTS {
            return Err(Error::Capacity(format!("{acc} collective states")));
        }
        let g = 1.0 - beta;
        let half = 0.5 * n as f64;
        let (mut out_rate, mut to_same, mut to_down, mut to_up) =
            (vec![0.0; acc], vec![0.0; acc], vec![0.0; acc], vec![0.0; acc]);
        for e in 0..=n {
            for k in 0..=e.min(n - e) {
                let i = offsets[e] + k;
                let j = half - k as f64;
                let m = e as f64 - half;
                let s = (j + m) * (j - m + 1.0);
                out_rate[i] = g * e as f64 + beta * s;
                if e == 0 {
                    continue;
                }
                let mut same = beta * s;
                if j > 0.0 {
                    same += g * (half + 1.0) * s / (2.0 * j * (j + 1.0));
                    to_down[i] = g * (half + j + 1.0) * (j + m) * (j + m - 1.0) / (2.0 * j * (2.0 * j + 1.0));
                }
                to_same[i] = same;
                to_up[i] = g * (half - j) * (j - m + 1.0) * (j - m + 2.0) / (2.0 * (j + 1.0) * (2.0 * j + 1.0));
            }
        }
        Ok(Self { n, beta, offsets, out_rate, to_same, to_down, to_up })
    }

    pub fn len(&self) -> usize {
        self.out_rate.len()
    }

    pub fn is_empty(&self) -> bool {
        self.out_rate.is_empty()
    }

    fn width(&self, e: usize) -> usize {
        e.min(self.n - e) + 1
    }

    /// Inflow into (k, e) from level e + 1.
    #[inline]
    fn inflow(&self, x: &[f64], e: usize, k: usize) -> f64 {
        if e == self.n {
            return 0.0;
        }
        let src = self.offsets[e + 1];
        let w = self.width(e + 1);
        let mut s = 0.0;
        if k < w {
            s += self.to_same[src + k] * x[src + k];
        }
        if k >= 1 && k - 1 < w {
            s += self.to_down[src + k - 1] * x[src + k - 1];
        }
        if k + 1 < w {
            s += self.to_up[src + k + 1] * x[src + k + 1];
        }
        s
    }

    pub fn initial(&self, state: InitialState) -> Result<Vec<f64>> {
        let mut p = vec![0.0; self.len()];
        match state {
            InitialState::FullyInverted => p[self.offsets[self.n]] = 1.0,
            InitialState::DickeMinusOne => {
                if self.n < 2 {
                    return Err(Error::Domain("one-photon-removed state needs N >= 2".into()));
                }
                p[self.offsets[self.n - 1]] = 1.0;
            }
        }
        Ok(p)
    }

    /// Low-order moments and the collective averages ⟨J⁺J⁻⟩, ⟨J⁺²J⁻²⟩.
    pub fn moments(&self, pop: &[f64]) -> (LowMoments, f64, f64) {
        let n = self.n as f64;
        let (mut se, mut ss, mut se2, mut s11, mut s02, mut ss2) = (0.0, 0.0, 0.0, 0.0, 0.0, 0.0);
        for e in 0..=self.n {
            let ef = e as f64;
            for k in 0..self.width(e) {
                let w = pop[self.offsets[e] + k];
                if w == 0.0 {
                    continue;
                }
                let kf = k as f64;
                let up = ef - kf;
                let dn = n - kf - ef + 1.0;
                let s = up * dn;
                let s2 = up * (up - 1.0) * dn * (dn + 1.0);
                se += w * ef;
                ss += w * s;
                se2 += w * ef * (ef - 1.0);
                s11 += w * (ef - 1.0) * (s - ef);
                s02 += w * (s2 - 4.0 * (ef - 1.0) * (s - ef) - 2.0 * ef * (ef - 1.0));
                ss2 += w * s2;
            }
        }
        let n1 = n * (n - 1.0);
        let n2 = n1 * (n - 2.0);
        let n3 = n2 * (n - 3.0);
        let low = LowMoments {
            a10: se / n,
            a01: if self.n >= 2 { (ss - se) / n1 } else { 0.0 },
            a20: if self.n >= 2 { se2 / n1 } else { 0.0 },
            a11: if self.n >= 3 { s11 / n2 } else { 0.0 },
            a02: if self.n >= 4 { s02 / n3 } else { 0.0 },
        };
        (low, ss, ss2)
    }

    /// Integrates the populations and reports low-order moments at each output time.
    pub fn evolve(&self, state: InitialState, grid: &TimeGrid) -> Result<Vec<LowMoments>> {
        let mut y = self.initial(state)?;
        let mut out = Vec::with_capacity(grid.output_times.len());
        let opts = OdeOptions { h_init: Some(1e-3 / (1.0 + self.beta * self.n as f64 * self.n as f64)), ..OdeOptions::tol(grid.rtol, grid.atol) };
        integrate_sdirk(self, grid.output_times[0], &mut y, &grid.output_times, &opts, |_, _, y| {
            out.push(self.moments(y).0);
            true
        })?;
        Ok(out)
    }
}

impl ShiftedLinear for DickeSolver {
    fn dim(&self) -> usize {
        self.len()
    }

    fn apply(&self, x: &[f64], out: &mut [f64]) {
        let n = self.n;
        for e in 0..=n {
            let off = self.offsets[e];
            for k in 0..self.width(e) {
                out[off + k] = self.inflow(x, e, k) - self.out_rate[off + k] * x[off + k];
            }
        }
    }

    fn solve_shifted(&self, g: f64, b: &[f64], out: &mut [f64]) {
        for e in (0..=self.n).rev() {
            let off = self.offsets[e];
            for k in 0..self.width(e) {
                let rhs = b[off + k] + g * self.inflow(out, e, k);
                let v = rhs / (1.0 + g * self.out_rate[off + k]);
                // far tails of the wave packet would otherwise go subnormal
                out[off + k] = if v.abs() < 1e-200 { 0.0 } else { v };
            }
        }
    }

    /// Error control on the reported moments. Runge–Kutta steps commute with
    /// the linear map from populations to moments, so these are the errors
    /// of the same scheme applied to the smooth moment hierarchy; individual
    /// level populations vary on a much faster 1/√N scale.
    fn error_norm(&self, est: &[f64], y_old: &[f64], _y_new: &[f64], opts: &OdeOptions) -> f64 {
        let (de, _, _) = self.moments(est);
        let (m, _, _) = self.moments(y_old);
        let b = self.beta.max(1e-300);
        let pairs = [(de.a10, m.a10, 1.0), (de.a20, m.a20, 1.0), (de.a01, m.a01, b), (de.a11, m.a11, b), (de.a02, m.a02, b * b)];
        pairs
            .iter()
            .map(|&(d, v, scale)| d.abs() / (opts.atol * scale + opts.rtol * v.abs().max(scale)))
            .fold(0.0, f64::max)
    }
}

/// MF2 closure: (A10, A01, A20) with A11 ≈ A10·A01.
struct Mf2System {
    n1b: f64,
    n2b: f64,
    beta: f64,
}

impl OdeSystem for Mf2System {
    fn dim(&self) -> usize {
        3
    }

    fn rhs(&mut self, _t: f64, y: &[f64], dy: &mut [f64]) {
        let (a10, a01, a20) = (y[0], y[1], y[2]);
        dy[0] = -a10 - self.n1b * a01;
        dy[1] = -a01 - self.n2b * a01 + 2.0 * self.n2b * a10 * a01 + self.beta * (2.0 * a20 - a10);
        dy[2] = -2.0 * a20 - 2.0 * self.n2b * a10 * a01;
    }
}

/// Initial (e, C, E) = (A10, A01, A20) for a given start.
pub fn mf2_initial(n: usize, state: InitialState) -> (f64, f64, f64) {
    let nf = n as f64;
    match state {
        InitialState::FullyInverted => (1.0, 0.0, 1.0),
        InitialState::DickeMinusOne => (1.0 - 1.0 / nf, 1.0 / nf, 1.0 - 2.0 / nf),
    }
}

/// Integrates the 3-variable MF2 system; closure values are substituted for A11 and A02.
pub fn evolve_mf2(n: usize, beta: f64, init: (f64, f64, f64), grid: &TimeGrid) -> Result<Vec<LowMoments>> {
    let nf = n as f64;
    let mut sys = Mf2System { n1b: (nf - 1.0) * beta, n2b: (nf - 2.0) * beta, beta };
    let mut y = [init.0, init.1, init.2];
    let mut out = Vec::with_capacity(grid.output_times.len());
    // A01 is O(β); scale the absolute tolerance with it
    let opts = OdeOptions::tol(grid.rtol, grid.atol * beta.clamp(1e-12, 1.0));
    integrate(&mut sys, grid.output_times[0], &mut y, &grid.output_times, &opts, |_, _, y| {
        out.push(LowMoments { a10: y[0], a01: y[1], a20: y[2], a11: y[0] * y[1], a02: 2.0 * y[1] * y[1] });
        true
    })?;
    Ok(out)
}

/// P = β(N A10 + N N₁ A01), total over both directions.
pub fn power_from_moments(n: usize, beta: f64, m: &LowMoments) -> f64 {
    let nf = n as f64;
    beta * (nf * m.a10 + nf * (nf - 1.0) * m.a01)
}

/// 4G² = β²(2NN₁A20 + 4NN₁N₂A11 + NN₁N₂N₃A02), i.e. the sum over both directions.
pub fn four_g2_from_moments(n: usize, beta: f64, m: &LowMoments) -> f64 {
    let nf = n as f64;
    let n1 = nf * (nf - 1.0);
    let n2 = n1 * (nf - 2.0);
    let n3 = n2 * (nf - 3.0);
    beta * beta * (2.0 * n1 * m.a20 + 4.0 * n2 * m.a11 + n3 * m.a02)
}

/// Power split equally into both directions, g²(t,t) of one direction and
/// Q = (g²(t,t) − 2)/β.
pub fn symmetric_observables(solver: &str, n: usize, beta: f64, times: &[f64], moments: &[LowMoments]) -> Result<ObservableTrace> {
    let mut pt = Vec::with_capacity(times.len());
    let mut g2 = Vec::with_capacity(times.len());
    for m in moments {
        let p = power_from_moments(n, beta, m);
        if p < 1e-14 {
            return Err(Error::Normalization(format!("P = {p:e}")));
        }
        pt.push(p);
        g2.push(four_g2_from_moments(n, beta, m) / (p * p));
    }
    let half: Vec<f64> = pt.iter().map(|p| 0.5 * p).collect();
    let b = n as f64 * beta;
    let gamma = times.iter().zip(&pt).map(|(t, p)| p / (b * (-t).exp())).collect();
    let q = g2.iter().map(|g| (g - 2.0) / beta).collect();
    let ex = moments.iter().map(|m| m.a10).collect();
    let mut tr = ObservableTrace::new(solver, times.to_vec()).with_meta("n_atoms", n).with_meta("beta", beta);
    tr.push_channel(channels::POWER_RIGHT, half.clone());
    tr.push_channel(channels::POWER_LEFT, half);
    tr.push_channel(channels::POWER_TOTAL, pt);
    tr.push_channel(channels::GAMMA_NORM, gamma);
    tr.push_channel(channels::G2_TT, g2);
    tr.push_channel(channels::EXCITATION_MEAN, ex);
    tr.push_channel("q", q);
    Ok(tr)
}

/// Trapezoidal ∫ P_total dt with a check that the trace has decayed.
pub fn waveguide_energy(trace: &ObservableTrace) -> Result<f64> {
    let p = trace
        .channel(channels::POWER_TOTAL)
        .ok_or_else(|| Error::Domain("trace has no total power channel".into()))?;
    let t = &trace.times;
    let e: f64 = t.windows(2).zip(p.windows(2)).map(|(tw, pw)| 0.5 * (tw[1] - tw[0]) * (pw[0] + pw[1])).sum();
    let peak = p.iter().cloned().fold(0.0, f64::max);
    let last = *p.last().unwrap_or(&0.0);
    // the tail decays at least as fast as e^{−t}
    if last > 1e-6 * e.max(1e-300) || last > 1e-10 * peak {
        return Err(Error::Domain(format!("trace truncated: P(t_end) = {last:e}, integral = {e:e}")));
    }
    Ok(e)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn layout_roundtrip() {
        let l = Layout::new(7);
        assert_eq!(l.len(), hierarchy_size(7));
        for (i, idx) in l.iter().enumerate() {
            assert_eq!(l.index(idx.p, idx.c), Some(i));
        }
        assert_eq!(l.index(8, 0), None);
    }

    #[test]
    fn initial_conditions() {
        let m = inverted_initial(6);
        assert_eq!(m.at(3, 0), 1.0);
        assert_eq!(m.at(1, 2), 0.0);
        assert_eq!(m.at(0, 0), 1.0);
        let d = dicke_minus_one_initial(5).unwrap();
        assert!((d.at(1, 0) - 0.8).abs() < 1e-15);
        assert!((d.at(0, 1) - 0.2).abs() < 1e-15);
        assert_eq!(d.at(3, 1), 0.2);
        assert_eq!(d.at(4, 1), 0.0);
    }

    #[test]
    fn single_atom() {
        let gen = build_hierarchy(1, 0.7).unwrap();
        assert_eq!(gen.len(), 2);
        let grid = TimeGrid::uniform(3.0, 6);
        let traj = evolve_exact(&gen, &inverted_initial(1), &grid).unwrap();
        for (m, t) in traj.iter().zip(&grid.output_times) {
            assert!((m.at(1, 0) - (-t).exp()).abs() < 1e-10);
        }
    }

    #[test]
    fn n2_coefficients() {
        let beta = 0.4;
        let gen = build_hierarchy(2, beta).unwrap();
        let d = gen.to_dense();
        let i01 = gen.layout.index(0, 1).unwrap();
        let i10 = gen.layout.index(1, 0).unwrap();
        let i20 = gen.layout.index(2, 0).unwrap();
        assert_eq!(d[(i01, i01)], -1.0);
        assert!((d[(i01, i20)] - 2.0 * beta).abs() < 1e-15);
        assert!((d[(i01, i10)] + beta).abs() < 1e-15);
    }

    #[test]
    fn beta_zero_uncoupled() {
        let gen = build_hierarchy(5, 0.0).unwrap();
        let grid = TimeGrid::uniform(2.0, 4);
        let traj = evolve_exact(&gen, &inverted_initial(5), &grid).unwrap();
        let last = traj.last().unwrap();
        for idx in last.indices() {
            let want = if idx.c == 0 { (-2.0 * idx.p as f64).exp() } else { 0.0 };
            assert!((last.at(idx.p, idx.c) - want).abs() < 1e-10);
        }
    }

    #[test]
    fn dicke_solver_matches_hierarchy() {
        let (n, beta) = (9, 0.25);
        let grid = TimeGrid::uniform(4.0, 8).with_tolerances(1e-11, 1e-14);
        let gen = build_hierarchy(n, beta).unwrap();
        let h = evolve_exact(&gen, &inverted_initial(n), &grid).unwrap();
        let d = DickeSolver::new(n, beta).unwrap().evolve(InitialState::FullyInverted, &grid).unwrap();
        for (a, b) in h.iter().zip(&d) {
            let a = a.low();
            for (x, y) in [(a.a10, b.a10), (a.a01, b.a01), (a.a20, b.a20), (a.a11, b.a11), (a.a02, b.a02)] {
                assert!((x - y).abs() < 1e-8, "{x} vs {y}");
            }
        }
    }

    #[test]
    fn dicke_population_conserved() {
        let s = DickeSolver::new(12, 0.3).unwrap();
        let mut y = s.initial(InitialState::FullyInverted).unwrap();
        let mut dy = vec![0.0; y.len()];
        s.apply(&y, &mut dy);
        assert!(dy.iter().sum::<f64>().abs() < 1e-12);
        let b = y.clone();
        s.solve_shifted(0.1, &b, &mut y);
        s.apply(&y, &mut dy);
        for i in 0..y.len() {
            assert!((y[i] - 0.1 * dy[i] - b[i]).abs() < 1e-13);
        }
    }

    #[test]
    fn mf2_beta_zero() {
        let grid = TimeGrid::uniform(3.0, 6);
        let tr = evolve_mf2(100, 0.0, (1.0, 0.0, 1.0), &grid).unwrap();
        for (m, t) in tr.iter().zip(&grid.output_times) {
            assert!((m.a10 - (-t).exp()).abs() < 1e-9);
            assert_eq!(m.a01, 0.0);
            assert!((m.a20 - (-2.0 * t).exp()).abs() < 1e-9);
        }
    }

    #[test]
    fn g2_at_zero_inverted() {
        for n in 2..8 {
            let m = inverted_initial(n).low();
            let beta = 0.1;
            let p = power_from_moments(n, beta, &m);
            let g2 = four_g2_from_moments(n, beta, &m) / (p * p);
            assert!((g2 - 2.0 * (1.0 - 1.0 / n as f64)).abs() < 1e-14);
        }
    }
}

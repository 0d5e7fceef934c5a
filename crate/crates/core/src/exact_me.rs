//! Exact Lindblad evolution of N ≤ 8 atoms in the full 2^N product basis.
//!
//! Basis: atom 0 is the most significant bit, bit value 1 = excited.
//! The generator is kept in structured form,
//!     ρ̇ = Kρ + ρK† + Σ_ab M_ab σ⁻_a ρ σ⁺_b,
//! K = −½ Σ n_n − Σ_n Σ_{i<n} r_n* r_i σ⁺_n σ⁻_i − Σ_n Σ_{i>n} l_n* l_i σ⁺_n σ⁻_i,
//! which is the cascaded right/left-mode model plus unit-rate local decay.

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;

use crate::config::{channels, InitialState, ObservableTrace, SystemConfig, TimeGrid};
use crate::error::{Error, Result};
use crate::ode::{integrate, OdeOptions, OdeSystem};

pub const MAX_ATOMS: usize = 8;

type C = Complex64;

/// Dense 2^N × 2^N density matrix, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    pub n_atoms: usize,
    pub dim: usize,
    pub data: Vec<C>,
}

impl DensityMatrix {
    pub fn zeros(n_atoms: usize) -> Self {
        let dim = 1usize << n_atoms;
        Self { n_atoms, dim, data: vec![C::new(0.0, 0.0); dim * dim] }
    }

    /// |ψ⟩⟨ψ| from a state vector (not normalized here).
    pub fn from_pure(n_atoms: usize, psi: &[C]) -> Self {
        let mut rho = Self::zeros(n_atoms);
        for x in 0..rho.dim {
            for y in 0..rho.dim {
                rho.data[x * rho.dim + y] = psi[x] * psi[y].conj();
            }
        }
        rho
    }

    pub fn fully_inverted(n_atoms: usize) -> Self {
        let mut rho = Self::zeros(n_atoms);
        let top = rho.dim - 1;
        rho.data[top * rho.dim + top] = C::new(1.0, 0.0);
        rho
    }

    /// |ψ_{N−1}⟩ ∝ Σ_n σ⁻_n |e…e⟩.
    pub fn dicke_minus_one(n_atoms: usize) -> Self {
        let dim = 1usize << n_atoms;
        let mut psi = vec![C::new(0.0, 0.0); dim];
        let amp = 1.0 / (n_atoms as f64).sqrt();
        for n in 0..n_atoms {
            psi[(dim - 1) & !bit(n_atoms, n)] = C::new(amp, 0.0);
        }
        Self::from_pure(n_atoms, &psi)
    }

    pub fn initial(cfg: &SystemConfig) -> Self {
        match cfg.initial_state {
            InitialState::FullyInverted => Self::fully_inverted(cfg.n_atoms),
            InitialState::DickeMinusOne => Self::dicke_minus_one(cfg.n_atoms),
        }
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> C {
        self.data[x * self.dim + y]
    }

    pub fn trace(&self) -> C {
        (0..self.dim).map(|x| self.get(x, x)).sum()
    }

    pub fn hermiticity_error(&self) -> f64 {
        let mut e: f64 = 0.0;
        for x in 0..self.dim {
            for y in x..self.dim {
                e = e.max((self.get(x, y) - self.get(y, x).conj()).norm());
            }
        }
        e
    }

    pub fn min_eigenvalue(&self) -> f64 {
        let m = DMatrix::from_fn(self.dim, self.dim, |x, y| 0.5 * (self.get(x, y) + self.get(y, x).conj()));
        SymmetricEigen::new(m).eigenvalues.iter().cloned().fold(f64::INFINITY, f64::min)
    }

    /// Hermitian, unit trace (when `normalized`) and PSD within tolerances.
    pub fn check_invariants(&self, normalized: bool) -> Result<()> {
        if self.hermiticity_error() > 1e-10 {
            return Err(Error::Domain("density matrix is not Hermitian".into()));
        }
        if normalized && (self.trace() - 1.0).norm() > 1e-9 {
            return Err(Error::Normalization(format!("trace = {}", self.trace())));
        }
        if self.min_eigenvalue() < -1e-8 {
            return Err(Error::Domain("density matrix has a negative eigenvalue".into()));
        }
        Ok(())
    }

    pub fn excitation(&self, atom: usize) -> f64 {
        let b = bit(self.n_atoms, atom);
        (0..self.dim).filter(|x| x & b != 0).map(|x| self.get(x, x).re).sum()
    }

    pub fn total_excitation(&self) -> f64 {
        (0..self.dim).map(|x| x.count_ones() as f64 * self.get(x, x).re).sum()
    }

    /// ⟨σ⁺_a σ⁻_b⟩.
    pub fn coherence(&self, a: usize, b: usize) -> C {
        if a == b {
            return C::new(self.excitation(a), 0.0);
        }
        let (ba, bb) = (bit(self.n_atoms, a), bit(self.n_atoms, b));
        // Tr(σ⁺_a σ⁻_b ρ) = Σ ρ_{z, x} with z ∋ b, z ∌ a, x = z − b + a
        let mut s = C::new(0.0, 0.0);
        for z in 0..self.dim {
            if z & bb != 0 && z & ba == 0 {
                s += self.get(z, (z & !bb) | ba);
            }
        }
        s
    }

    /// ⟨Π_{k<p} n_k Π σ⁺ (next c atoms) Π σ⁻ (next c atoms)⟩ on atoms 0..p+2c.
    pub fn moment(&self, p: usize, c: usize) -> f64 {
        assert!(p + 2 * c <= self.n_atoms);
        let n = self.n_atoms;
        let pm: usize = (0..p).map(|k| bit(n, k)).sum();
        let rm: usize = (p..p + c).map(|k| bit(n, k)).sum();
        let lm: usize = (p + c..p + 2 * c).map(|k| bit(n, k)).sum();
        let mut s = 0.0;
        for z in 0..self.dim {
            if z & pm == pm && z & lm == lm && z & rm == 0 {
                s += self.get(z, (z & !lm) | rm).re;
            }
        }
        s
    }

    /// Partial trace keeping the listed atoms (in the given order).
    pub fn reduced(&self, keep: &[usize]) -> DensityMatrix {
        let n = self.n_atoms;
        let mut out = DensityMatrix::zeros(keep.len());
        let rest: Vec<usize> = (0..n).filter(|k| !keep.contains(k)).collect();
        let compose = |ks: usize, rs: usize| -> usize {
            let mut x = 0;
            for (pos, &a) in keep.iter().enumerate() {
                if ks & bit(keep.len(), pos) != 0 {
                    x |= bit(n, a);
                }
            }
            for (pos, &a) in rest.iter().enumerate() {
                if rs & (1 << pos) != 0 {
                    x |= bit(n, a);
                }
            }
            x
        };
        for kx in 0..out.dim {
            for ky in 0..out.dim {
                let mut s = C::new(0.0, 0.0);
                for r in 0..(1usize << rest.len()) {
                    s += self.get(compose(kx, r), compose(ky, r));
                }
                out.data[kx * out.dim + ky] = s;
            }
        }
        out
    }

    /// Relabels atoms: atom k of `self` becomes atom perm[k].
    pub fn permuted(&self, perm: &[usize]) -> DensityMatrix {
        let n = self.n_atoms;
        let map = |x: usize| -> usize {
            (0..n).filter(|&k| x & bit(n, k) != 0).map(|k| bit(n, perm[k])).sum()
        };
        let mut out = DensityMatrix::zeros(n);
        for x in 0..self.dim {
            for y in 0..self.dim {
                out.data[map(x) * self.dim + map(y)] = self.get(x, y);
            }
        }
        out
    }
}

#[inline]
fn bit(n_atoms: usize, atom: usize) -> usize {
    1usize << (n_atoms - 1 - atom)
}

/// Coupling amplitudes of each atom to the right (r) and left (l) modes.
#[derive(Debug, Clone, PartialEq)]
pub struct CollectiveMode {
    pub r: Vec<C>,
    pub l: Vec<C>,
}

impl CollectiveMode {
    pub fn from_config(cfg: &SystemConfig) -> Self {
        let n = cfg.n_atoms;
        let r = vec![C::new(cfg.beta_forward().sqrt(), 0.0); n];
        let l = vec![C::new(cfg.beta_backward().sqrt(), 0.0); n];
        Self { r, l }
    }
}

/// Generator of the master equation in structured sparse form.
#[derive(Debug, Clone)]
pub struct Liouvillian {
    pub n_atoms: usize,
    pub dim: usize,
    pub modes: CollectiveMode,
    /// (n, i, κ): K contains κ σ⁺_n σ⁻_i
    hops: Vec<(usize, usize, C)>,
    /// M_ab for σ⁻_a ρ σ⁺_b, row-major N × N
    jumps: Vec<C>,
}

pub fn build_liouvillian(cfg: &SystemConfig) -> Result<Liouvillian> {
    if cfg.beta < 0.0 {
        return Err(Error::Domain("negative beta".into()));
    }
    Liouvillian::from_modes(CollectiveMode::from_config(cfg))
}

impl Liouvillian {
    pub fn from_modes(modes: CollectiveMode) -> Result<Self> {
        let n = modes.r.len();
        if n > MAX_ATOMS {
            return Err(Error::Capacity(format!("exact solver limited to N <= {MAX_ATOMS}, got {n}")));
        }
        if n == 0 || modes.l.len() != n {
            return Err(Error::Domain("mode vectors must have one entry per atom".into()));
        }
        let mut hops = Vec::new();
        let mut jumps = vec![C::new(0.0, 0.0); n * n];
        for a in 0..n {
            jumps[a * n + a] = C::new(1.0, 0.0);
        }
        for nn in 0..n {
            for i in 0..n {
                let amp = if i < nn {
                    modes.r[nn].conj() * modes.r[i]
                } else if i > nn {
                    modes.l[nn].conj() * modes.l[i]
                } else {
                    continue;
                };
                if amp.norm() == 0.0 {
                    continue;
                }
                hops.push((nn, i, -amp));
                jumps[i * n + nn] += amp;
                jumps[nn * n + i] += amp.conj();
            }
        }
        Ok(Self { n_atoms: n, dim: 1 << n, modes, hops, jumps })
    }

    /// K applied from the left: out += K ρ.
    fn add_k_rho(&self, rho: &[C], out: &mut [C]) {
        let d = self.dim;
        let n = self.n_atoms;
        for x in 0..d {
            let diag = -0.5 * x.count_ones() as f64;
            let (row_o, row_r) = (&mut out[x * d..(x + 1) * d], &rho[x * d..(x + 1) * d]);
            for (o, r) in row_o.iter_mut().zip(row_r) {
                *o += r * diag;
            }
        }
        for &(nn, i, kappa) in &self.hops {
            let (bn, bi) = (bit(n, nn), bit(n, i));
            for x in 0..d {
                if x & bn != 0 && x & bi == 0 {
                    let z = (x & !bn) | bi;
                    for y in 0..d {
                        out[x * d + y] += kappa * rho[z * d + y];
                    }
                }
            }
        }
    }

    /// dρ = L[ρ] for Hermitian ρ.
    pub fn apply(&self, rho: &[C], drho: &mut [C]) {
        let d = self.dim;
        let n = self.n_atoms;
        let mut kr = vec![C::new(0.0, 0.0); d * d];
        self.add_k_rho(rho, &mut kr);
        for x in 0..d {
            for y in 0..d {
                drho[x * d + y] = kr[x * d + y] + kr[y * d + x].conj();
            }
        }
        for a in 0..n {
            let ba = bit(n, a);
            for b in 0..n {
                let m = self.jumps[a * n + b];
                if m.norm() == 0.0 {
                    continue;
                }
                let bb = bit(n, b);
                for x in (0..d).filter(|x| x & ba == 0) {
                    let xs = x | ba;
                    for y in (0..d).filter(|y| y & bb == 0) {
                        drho[x * d + y] += m * rho[xs * d + (y | bb)];
                    }
                }
            }
        }
    }

    /// Largest entry of L†(𝟙); zero for a trace-preserving generator.
    pub fn adjoint_identity_residual(&self) -> f64 {
        // L†(𝟙) = K + K† + Σ M_ab σ⁺_b σ⁻_a; ⟨x|·|y⟩ evaluated through Tr(L[|y⟩⟨x|]).
        let d = self.dim;
        let mut worst: f64 = 0.0;
        let mut e = vec![C::new(0.0, 0.0); d * d];
        let mut out = vec![C::new(0.0, 0.0); d * d];
        for x in 0..d {
            for y in 0..d {
                e.iter_mut().for_each(|v| *v = C::new(0.0, 0.0));
                e[y * d + x] = C::new(1.0, 0.0);
                self.apply_general(&e, &mut out);
                let tr: C = (0..d).map(|k| out[k * d + k]).sum();
                worst = worst.max(tr.norm());
            }
        }
        worst
    }

    /// L[X] for arbitrary (non-Hermitian) X.
    fn apply_general(&self, rho: &[C], drho: &mut [C]) {
        let d = self.dim;
        let n = self.n_atoms;
        drho.iter_mut().for_each(|v| *v = C::new(0.0, 0.0));
        self.add_k_rho(rho, drho);
        // ρK†: (ρK†)_{xy} = Σ_z ρ_{xz} conj(K_{yz})
        for y in 0..d {
            let diag = -0.5 * y.count_ones() as f64;
            for x in 0..d {
                drho[x * d + y] += rho[x * d + y] * diag;
            }
        }
        for &(nn, i, kappa) in &self.hops {
            let (bn, bi) = (bit(n, nn), bit(n, i));
            for y in 0..d {
                if y & bn != 0 && y & bi == 0 {
                    let z = (y & !bn) | bi;
                    for x in 0..d {
                        drho[x * d + y] += kappa.conj() * rho[x * d + z];
                    }
                }
            }
        }
        for a in 0..n {
            for b in 0..n {
                let m = self.jumps[a * n + b];
                let (ba, bb) = (bit(n, a), bit(n, b));
                for x in (0..d).filter(|x| x & ba == 0) {
                    for y in (0..d).filter(|y| y & bb == 0) {
                        drho[x * d + y] += m * rho[(x | ba) * d + (y | bb)];
                    }
                }
            }
        }
    }

    /// Right-mode output power P_r = Σ r_i* r_j ⟨σ⁺_i σ⁻_j⟩.
    pub fn power_right(&self, rho: &DensityMatrix) -> f64 {
        mode_power(&self.modes.r, rho)
    }

    pub fn power_left(&self, rho: &DensityMatrix) -> f64 {
        mode_power(&self.modes.l, rho)
    }

    /// a ρ a† with a = Σ_i amp_i σ⁻_i (global phase of the mode is irrelevant).
    pub fn apply_mode(&self, amp: &[C], rho: &DensityMatrix) -> DensityMatrix {
        let n = self.n_atoms;
        let d = self.dim;
        let mut tmp = DensityMatrix::zeros(n);
        // tmp = a ρ
        for (i, &ai) in amp.iter().enumerate() {
            let bi = bit(n, i);
            for x in (0..d).filter(|x| x & bi == 0) {
                for y in 0..d {
                    tmp.data[x * d + y] += ai * rho.data[(x | bi) * d + y];
                }
            }
        }
        let mut out = DensityMatrix::zeros(n);
        // out = tmp a†: (tmp a†)_{xy} = Σ_j conj(a_j) tmp_{x, y|j}
        for (j, &aj) in amp.iter().enumerate() {
            let bj = bit(n, j);
            for x in 0..d {
                for y in (0..d).filter(|y| y & bj == 0) {
                    out.data[x * d + y] += aj.conj() * tmp.data[x * d + (y | bj)];
                }
            }
        }
        out
    }
}

fn mode_power(amp: &[C], rho: &DensityMatrix) -> f64 {
    let mut s = C::new(0.0, 0.0);
    for (i, ai) in amp.iter().enumerate() {
        if ai.norm() == 0.0 {
            continue;
        }
        for (j, aj) in amp.iter().enumerate() {
            s += ai.conj() * aj * rho.coherence(i, j);
        }
    }
    s.re
}

struct MeSystem<'a> {
    l: &'a Liouvillian,
    rho: Vec<C>,
    drho: Vec<C>,
}

impl OdeSystem for MeSystem<'_> {
    fn dim(&self) -> usize {
        2 * self.l.dim * self.l.dim
    }

    fn rhs(&mut self, _t: f64, y: &[f64], dy: &mut [f64]) {
        for (k, v) in self.rho.iter_mut().enumerate() {
            *v = C::new(y[2 * k], y[2 * k + 1]);
        }
        self.l.apply(&self.rho, &mut self.drho);
        for (k, v) in self.drho.iter().enumerate() {
            dy[2 * k] = v.re;
            dy[2 * k + 1] = v.im;
        }
    }
}

/// Integrates ρ through `times`, calling `observe` with each state.
pub fn evolve_with<F>(rho0: &DensityMatrix, l: &Liouvillian, times: &[f64], opts: &OdeOptions, mut observe: F) -> Result<()>
where
    F: FnMut(usize, f64, &DensityMatrix),
{
    if rho0.n_atoms != l.n_atoms {
        return Err(Error::Domain("state and generator sizes differ".into()));
    }
    let mut y: Vec<f64> = rho0.data.iter().flat_map(|c| [c.re, c.im]).collect();
    let mut sys = MeSystem { l, rho: rho0.data.clone(), drho: rho0.data.clone() };
    let mut state = rho0.clone();
    integrate(&mut sys, times[0], &mut y, times, opts, |k, t, y| {
        for (i, v) in state.data.iter_mut().enumerate() {
            *v = C::new(y[2 * i], y[2 * i + 1]);
        }
        observe(k, t, &state);
        true
    })?;
    Ok(())
}

/// Trajectory of ρ at every output time.
pub fn evolve(rho0: &DensityMatrix, l: &Liouvillian, grid: &TimeGrid) -> Result<Vec<DensityMatrix>> {
    let mut out = Vec::with_capacity(grid.output_times.len());
    evolve_with(rho0, l, &grid.output_times, &OdeOptions::tol(grid.rtol, grid.atol), |_, _, r| out.push(r.clone()))?;
    Ok(out)
}

/// (P_r, P_l) for the given state.
pub fn waveguide_power(rho: &DensityMatrix, cfg: &SystemConfig) -> Result<(f64, f64)> {
    let modes = CollectiveMode::from_config(cfg);
    Ok((mode_power(&modes.r, rho), mode_power(&modes.l, rho)))
}

/// Equal-time G² of the right mode: Tr(a a ρ a† a†).
pub fn g2_equal_time_unnormalized(l: &Liouvillian, rho: &DensityMatrix) -> f64 {
    let once = l.apply_mode(&l.modes.r, rho);
    l.apply_mode(&l.modes.r, &once).trace().re
}

/// Power, excitation and equal-time g² along a trajectory from the configured initial state.
pub fn observables(cfg: &SystemConfig, grid: &TimeGrid) -> Result<ObservableTrace> {
    let l = build_liouvillian(cfg)?;
    let rho0 = DensityMatrix::initial(cfg);
    let m = grid.output_times.len();
    let (mut pr, mut pl, mut ex, mut g2) = (vec![0.0; m], vec![0.0; m], vec![0.0; m], vec![0.0; m]);
    evolve_with(&rho0, &l, &grid.output_times, &OdeOptions::tol(grid.rtol, grid.atol), |k, _, rho| {
        pr[k] = l.power_right(rho);
        pl[k] = l.power_left(rho);
        ex[k] = rho.total_excitation() / cfg.n_atoms as f64;
        g2[k] = if pr[k] > 1e-14 { g2_equal_time_unnormalized(&l, rho) / (pr[k] * pr[k]) } else { f64::NAN };
    })?;
    let total: Vec<f64> = pr.iter().zip(&pl).map(|(a, b)| a + b).collect();
    let gamma: Vec<f64> = grid
        .output_times
        .iter()
        .zip(&total)
        .map(|(t, p)| p / (cfg.scaled_od * (-t).exp()))
        .collect();
    let mut tr = ObservableTrace::new("exact_me", grid.output_times.clone())
        .with_meta("n_atoms", cfg.n_atoms)
        .with_meta("beta", cfg.beta)
        .with_meta("rtol", grid.rtol);
    tr.push_channel(channels::POWER_RIGHT, pr);
    tr.push_channel(channels::POWER_LEFT, pl);
    tr.push_channel(channels::POWER_TOTAL, total);
    tr.push_channel(channels::GAMMA_NORM, gamma);
    tr.push_channel(channels::EXCITATION_MEAN, ex);
    tr.push_channel(channels::G2_TT, g2);
    Ok(tr)
}

/// g²(t1, t) for t in `grid` (times are offsets from t1) via the conditional
/// state a ρ(t1) a† evolved forward.
pub fn two_time_g2(cfg: &SystemConfig, grid: &TimeGrid, t1: f64) -> Result<ObservableTrace> {
    let l = build_liouvillian(cfg)?;
    let opts = OdeOptions::tol(grid.rtol, grid.atol);
    let rho0 = DensityMatrix::initial(cfg);
    let mut rho_t1 = rho0.clone();
    if t1 > 0.0 {
        evolve_with(&rho0, &l, &[0.0, t1], &opts, |_, _, r| rho_t1 = r.clone())?;
    }
    let p1 = l.power_right(&rho_t1);
    if p1 < 1e-14 {
        return Err(Error::Normalization(format!("P_r(t1) = {p1:e}")));
    }
    let cond = l.apply_mode(&l.modes.r, &rho_t1);
    let m = grid.output_times.len();
    let mut num = vec![0.0; m];
    evolve_with(&cond, &l, &grid.output_times, &opts, |k, _, r| num[k] = l.power_right(r))?;
    let mut den = vec![0.0; m];
    let shifted: Vec<f64> = grid.output_times.iter().map(|t| t + t1).collect();
    let mut times = vec![0.0];
    times.extend(shifted.iter().filter(|&&t| t > 0.0));
    let offset = times.len() - shifted.len();
    evolve_with(&rho0, &l, &times, &opts, |k, _, r| {
        if k >= offset {
            den[k - offset] = l.power_right(r);
        }
    })?;
    let g2: Vec<f64> = num.iter().zip(&den).map(|(a, b)| a / (p1 * b)).collect();
    let mut tr = ObservableTrace::new("exact_me", shifted).with_meta("t1", t1);
    tr.push_channel(channels::G2_0T, g2);
    Ok(tr)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::Configuration;

    fn opts() -> OdeOptions {
        OdeOptions::tol(1e-11, 1e-13)
    }

    #[test]
    fn single_atom_decay() {
        for conf in [Configuration::Chiral, Configuration::SymmetricMirror] {
            let cfg = SystemConfig::new(1, 0.3, conf).unwrap();
            let l = build_liouvillian(&cfg).unwrap();
            let times = [0.0, 0.5, 1.0, 3.0];
            evolve_with(&DensityMatrix::fully_inverted(1), &l, &times, &opts(), |_, t, r| {
                assert!((r.excitation(0) - (-t).exp()).abs() < 1e-10);
                assert!(r.get(0, 1).norm() < 1e-12);
            })
            .unwrap();
        }
    }

    #[test]
    fn trace_preserving_generator() {
        for conf in [Configuration::Chiral, Configuration::SymmetricMirror] {
            let l = build_liouvillian(&SystemConfig::new(3, 0.4, conf).unwrap()).unwrap();
            assert!(l.adjoint_identity_residual() < 1e-12);
        }
    }

    #[test]
    fn capacity_guard() {
        let cfg = SystemConfig::new(9, 0.1, Configuration::Chiral).unwrap();
        assert!(matches!(build_liouvillian(&cfg), Err(Error::Capacity(_))));
    }

    #[test]
    fn initial_powers() {
        let cfg = SystemConfig::new(1, 0.25, Configuration::Chiral).unwrap();
        assert_eq!(waveguide_power(&DensityMatrix::fully_inverted(1), &cfg).unwrap(), (0.25, 0.0));
        let cfg = SystemConfig::new(2, 0.2, Configuration::SymmetricMirror).unwrap();
        let (r, l) = waveguide_power(&DensityMatrix::fully_inverted(2), &cfg).unwrap();
        assert!((r - 0.2).abs() < 1e-15 && (l - 0.2).abs() < 1e-15);
        let cfg = SystemConfig::new(4, 0.1, Configuration::Chiral).unwrap();
        let (r, _) = waveguide_power(&DensityMatrix::fully_inverted(4), &cfg).unwrap();
        assert!((r - 0.4).abs() < 1e-15);
    }

    #[test]
    fn dicke_state_normalized() {
        let rho = DensityMatrix::dicke_minus_one(4);
        assert!((rho.trace().re - 1.0).abs() < 1e-14);
        assert!((rho.moment(1, 0) - 0.75).abs() < 1e-14);
        assert!((rho.moment(0, 1) - 0.25).abs() < 1e-14);
    }

    #[test]
    fn reduced_and_permuted() {
        let rho = DensityMatrix::dicke_minus_one(3);
        let red = rho.reduced(&[2]);
        assert!((red.get(1, 1).re - 2.0 / 3.0).abs() < 1e-14);
        let p = rho.permuted(&[1, 2, 0]);
        assert!(p.data.iter().zip(&rho.data).all(|(a, b)| (a - b).norm() < 1e-15));
        let mut asym = DensityMatrix::zeros(2);
        asym.data[2 * 4 + 2] = C::new(1.0, 0.0);
        assert_eq!(asym.permuted(&[1, 0]).get(1, 1), C::new(1.0, 0.0));
    }
}

//! Dormand–Prince 5(4) with adaptive step control, written against flat
//! `f64` slices so large method-of-lines and hierarchy states need no
//! intermediate allocation.

use crate::error::{Error, Result};

/// dy/dt = f(t, y). `rhs` takes `&mut self` so systems can keep scratch space.
pub trait OdeSystem {
    fn dim(&self) -> usize;
    fn rhs(&mut self, t: f64, y: &[f64], dy: &mut [f64]);
}

#[derive(Debug, Clone, Copy)]
pub struct OdeOptions {
    pub rtol: f64,
    pub atol: f64,
    pub h_init: Option<f64>,
    pub h_max: f64,
    pub max_steps: usize,
}

impl Default for OdeOptions {
    fn default() -> Self {
        Self { rtol: 1e-10, atol: 1e-13, h_init: None, h_max: f64::INFINITY, max_steps: 5_000_000 }
    }
}

impl OdeOptions {
    pub fn tol(rtol: f64, atol: f64) -> Self {
        Self { rtol, atol, ..Default::default() }
    }
}

#[derive(Debug, Clone, Copy, Default)]
pub struct OdeStats {
    pub accepted: usize,
    pub rejected: usize,
    pub rhs_evals: usize,
}

const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;
const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const B1: f64 = 35.0 / 384.0;
const B3: f64 = 500.0 / 1113.0;
const B4: f64 = 125.0 / 192.0;
const B5: f64 = -2187.0 / 6784.0;
const B6: f64 = 11.0 / 84.0;
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

/// Integrates `y` in place from `t0` through every time in `t_out` (which must be
/// ≥ t0 and increasing). `observe(k, t, y)` is called at each output time;
/// returning `false` stops early.
pub fn integrate<S, F>(
    sys: &mut S,
    t0: f64,
    y: &mut [f64],
    t_out: &[f64],
    opts: &OdeOptions,
    mut observe: F,
) -> Result<OdeStats>
where
    S: OdeSystem + ?Sized,
    F: FnMut(usize, f64, &[f64]) -> bool,
{
    let n = sys.dim();
    assert_eq!(y.len(), n, "state length mismatch");
    let mut stats = OdeStats::default();
    let mut k: Vec<Vec<f64>> = (0..7).map(|_| vec![0.0; n]).collect();
    let mut ytmp = vec![0.0; n];
    let mut ynew = vec![0.0; n];
    let mut t = t0;

    sys.rhs(t, y, &mut k[0]);
    stats.rhs_evals += 1;
    let mut h = opts.h_init.unwrap_or_else(|| initial_step(y, &k[0], opts));
    let mut fac_old: f64 = 1e-4;

    for (idx, &target) in t_out.iter().enumerate() {
        if target < t {
            return Err(Error::Domain(format!("output time {target} precedes t = {t}")));
        }
        while t < target {
            if stats.accepted + stats.rejected >= opts.max_steps {
                return Err(Error::TooManySteps { t });
            }
            let remaining = target - t;
            let mut last = false;
            let mut hs = h.min(opts.h_max);
            if hs >= remaining * (1.0 - 1e-12) {
                hs = remaining;
                last = true;
            }
            if hs < 1e-14 * t.abs().max(1.0) {
                return Err(Error::StepSizeUnderflow { t });
            }

            stage(&mut ytmp, y, hs, &[(A21, &k[0])]);
            sys.rhs(t + C2 * hs, &ytmp, &mut k[1]);
            stage(&mut ytmp, y, hs, &[(A31, &k[0]), (A32, &k[1])]);
            sys.rhs(t + C3 * hs, &ytmp, &mut k[2]);
            stage(&mut ytmp, y, hs, &[(A41, &k[0]), (A42, &k[1]), (A43, &k[2])]);
            sys.rhs(t + C4 * hs, &ytmp, &mut k[3]);
            stage(&mut ytmp, y, hs, &[(A51, &k[0]), (A52, &k[1]), (A53, &k[2]), (A54, &k[3])]);
            sys.rhs(t + C5 * hs, &ytmp, &mut k[4]);
            stage(&mut ytmp, y, hs, &[(A61, &k[0]), (A62, &k[1]), (A63, &k[2]), (A64, &k[3]), (A65, &k[4])]);
            sys.rhs(t + hs, &ytmp, &mut k[5]);
            stage(&mut ynew, y, hs, &[(B1, &k[0]), (B3, &k[2]), (B4, &k[3]), (B5, &k[4]), (B6, &k[5])]);
            let t_new = if last { target } else { t + hs };
            let (head, tail) = k.split_at_mut(6);
            sys.rhs(t_new, &ynew, &mut tail[0]);
            stats.rhs_evals += 6;

            let mut err = 0.0;
            for i in 0..n {
                let e = hs
                    * (E1 * head[0][i] + E3 * head[2][i] + E4 * head[3][i] + E5 * head[4][i] + E6 * head[5][i]
                        + E7 * tail[0][i]);
                let sc = opts.atol + opts.rtol * y[i].abs().max(ynew[i].abs());
                let r = e / sc;
                err += r * r;
            }
            let err = (err / n.max(1) as f64).sqrt();

            if err <= 1.0 {
                // PI controller with beta = 0.04
                let shrink = (err.max(1e-10).powf(0.17) / fac_old.powf(0.04) / 0.9).clamp(0.1, 5.0);
                fac_old = err.max(1e-4);
                y.copy_from_slice(&ynew);
                k.swap(0, 6);
                t = t_new;
                stats.accepted += 1;
                let h_next = hs / shrink;
                h = if last { h.max(h_next) } else { h_next };
            } else {
                stats.rejected += 1;
                let fac = if err.is_finite() { (0.9 * err.powf(-0.2)).clamp(0.1, 1.0) } else { 0.1 };
                h = hs * fac;
            }
        }
        if !observe(idx, t, y) {
            break;
        }
    }
    Ok(stats)
}

fn stage(out: &mut [f64], y: &[f64], h: f64, terms: &[(f64, &Vec<f64>)]) {
    out.copy_from_slice(y);
    for &(a, kv) in terms {
        let ha = h * a;
        for (o, kk) in out.iter_mut().zip(kv.iter()) {
            *o += ha * kk;
        }
    }
}

fn initial_step(y: &[f64], f0: &[f64], opts: &OdeOptions) -> f64 {
    let n = y.len().max(1) as f64;
    let (mut d0, mut d1) = (0.0, 0.0);
    for (yi, fi) in y.iter().zip(f0) {
        let sc = opts.atol + opts.rtol * yi.abs();
        d0 += (yi / sc).powi(2);
        d1 += (fi / sc).powi(2);
    }
    let (d0, d1) = ((d0 / n).sqrt(), (d1 / n).sqrt());
    let h = if d0 < 1e-5 || d1 < 1e-5 { 1e-6 } else { 0.01 * d0 / d1 };
    h.min(0.1)
}

/// Linear autonomous system y′ = A y whose shifted operator I − γA can be
/// inverted directly (e.g. triangular generators).
pub trait ShiftedLinear {
    fn dim(&self) -> usize;
    fn apply(&self, x: &[f64], out: &mut [f64]);
    /// Solves (I − g A) out = b.
    fn solve_shifted(&self, g: f64, b: &[f64], out: &mut [f64]);

    /// Scaled norm of a local error estimate; ≤ 1 accepts the step.
    fn error_norm(&self, est: &[f64], y_old: &[f64], y_new: &[f64], opts: &OdeOptions) -> f64 {
        let mut err: f64 = 0.0;
        for m in 0..est.len() {
            let sc = opts.atol + opts.rtol * y_old[m].abs().max(y_new[m].abs());
            err = err.max(est[m].abs() / sc);
        }
        err
    }
}

// L-stable, stiffly accurate SDIRK of order 4 with embedded order-3 weights
// (Hairer & Wanner, Solving ODEs II, Table IV.6.5).
const SD_G: f64 = 0.25;
const SD_A: [[f64; 4]; 5] = [
    [0.0, 0.0, 0.0, 0.0],
    [0.5, 0.0, 0.0, 0.0],
    [17.0 / 50.0, -1.0 / 25.0, 0.0, 0.0],
    [371.0 / 1360.0, -137.0 / 2720.0, 15.0 / 544.0, 0.0],
    [25.0 / 24.0, -49.0 / 48.0, 125.0 / 16.0, -85.0 / 12.0],
];
const SD_BHAT: [f64; 5] = [59.0 / 48.0, -17.0 / 96.0, 225.0 / 32.0, -85.0 / 12.0, 0.0];

/// Implicit integration of y′ = A y through `t_out`, max-norm error control.
pub fn integrate_sdirk<S, F>(
    sys: &S,
    t0: f64,
    y: &mut [f64],
    t_out: &[f64],
    opts: &OdeOptions,
    mut observe: F,
) -> Result<OdeStats>
where
    S: ShiftedLinear + ?Sized,
    F: FnMut(usize, f64, &[f64]) -> bool,
{
    let n = sys.dim();
    assert_eq!(y.len(), n, "state length mismatch");
    let mut stats = OdeStats::default();
    let mut k: Vec<Vec<f64>> = (0..5).map(|_| vec![0.0; n]).collect();
    let mut rhs = vec![0.0; n];
    let mut z = vec![0.0; n];
    let mut est = vec![0.0; n];
    let mut t = t0;
    let mut h = opts.h_init.unwrap_or(1e-4);

    for (idx, &target) in t_out.iter().enumerate() {
        if target < t {
            return Err(Error::Domain(format!("output time {target} precedes t = {t}")));
        }
        while t < target {
            if stats.accepted + stats.rejected >= opts.max_steps {
                return Err(Error::TooManySteps { t });
            }
            let remaining = target - t;
            let mut hs = h.min(opts.h_max);
            let last = hs >= remaining * (1.0 - 1e-12);
            if last {
                hs = remaining;
            }
            if hs < 1e-14 * t.abs().max(1.0) {
                return Err(Error::StepSizeUnderflow { t });
            }
            for i in 0..5 {
                rhs.copy_from_slice(y);
                for j in 0..i {
                    let a = hs * SD_A[i][j];
                    for (r, kk) in rhs.iter_mut().zip(&k[j]) {
                        *r += a * kk;
                    }
                }
                sys.solve_shifted(hs * SD_G, &rhs, &mut z);
                sys.apply(&z, &mut k[i]);
                stats.rhs_evals += 1;
            }
            // stiffly accurate: the new state is the last stage value z.
            // The embedded difference is filtered through (I − hγA)⁻¹ so stiff
            // components do not inflate the estimate.
            for m in 0..n {
                let mut e = 0.0;
                for i in 0..5 {
                    let b = if i == 4 { SD_G } else { SD_A[4][i] };
                    e += (b - SD_BHAT[i]) * k[i][m];
                }
                rhs[m] = hs * e;
            }
            sys.solve_shifted(hs * SD_G, &rhs, &mut est);
            let err = sys.error_norm(&est, y, &z, opts);
            if err <= 1.0 {
                y.copy_from_slice(&z);
                t = if last { target } else { t + hs };
                stats.accepted += 1;
                let h_next = hs * (0.9 * err.max(1e-10).powf(-0.25)).clamp(0.2, 4.0);
                h = if last { h.max(h_next) } else { h_next };
            } else {
                stats.rejected += 1;
                h = hs * (0.9 * err.powf(-0.25)).clamp(0.1, 0.9);
            }
        }
        if !observe(idx, t, y) {
            break;
        }
    }
    Ok(stats)
}

#[cfg(test)]
mod tests {
    use super::*;

    struct Decay(f64);
    impl OdeSystem for Decay {
        fn dim(&self) -> usize {
            1
        }
        fn rhs(&mut self, _t: f64, y: &[f64], dy: &mut [f64]) {
            dy[0] = -self.0 * y[0];
        }
    }

    struct Oscillator;
    impl OdeSystem for Oscillator {
        fn dim(&self) -> usize {
            2
        }
        fn rhs(&mut self, _t: f64, y: &[f64], dy: &mut [f64]) {
            dy[0] = y[1];
            dy[1] = -y[0];
        }
    }

    #[test]
    fn exponential_decay() {
        let mut y = [1.0];
        let times: Vec<f64> = (0..=10).map(|k| k as f64 * 0.5).collect();
        let mut got = vec![];
        integrate(&mut Decay(1.3), 0.0, &mut y, &times, &OdeOptions::tol(1e-11, 1e-14), |_, t, y| {
            got.push((t, y[0]));
            true
        })
        .unwrap();
        for (t, v) in got {
            assert!((v - (-1.3 * t).exp()).abs() < 1e-10, "t={t}");
        }
    }

    #[test]
    fn hits_output_times_exactly() {
        let mut y = [1.0, 0.0];
        let times = [0.0, 0.1, 1.0 / 3.0, 2.0, 7.0];
        let mut seen = vec![];
        integrate(&mut Oscillator, 0.0, &mut y, &times, &OdeOptions::tol(1e-10, 1e-12), |_, t, y| {
            seen.push(t);
            assert!((y[0] - t.cos()).abs() < 1e-8);
            true
        })
        .unwrap();
        assert_eq!(seen, times);
    }

    #[test]
    fn zero_span_returns_initial() {
        let mut y = [0.7];
        integrate(&mut Decay(1.0), 0.0, &mut y, &[0.0], &OdeOptions::default(), |_, _, _| true).unwrap();
        assert_eq!(y[0], 0.7);
    }

    struct Stiff;
    impl ShiftedLinear for Stiff {
        fn dim(&self) -> usize {
            2
        }
        fn apply(&self, x: &[f64], out: &mut [f64]) {
            out[0] = -1000.0 * x[0];
            out[1] = 1000.0 * x[0] - x[1];
        }
        fn solve_shifted(&self, g: f64, b: &[f64], out: &mut [f64]) {
            out[0] = b[0] / (1.0 + 1000.0 * g);
            out[1] = (b[1] + 1000.0 * g * out[0]) / (1.0 + g);
        }
    }

    #[test]
    fn sdirk_stiff_cascade() {
        let mut y = [1.0, 0.0];
        let times = [0.0, 0.01, 0.5, 2.0];
        let opts = OdeOptions::tol(1e-9, 1e-13);
        let stats = integrate_sdirk(&Stiff, 0.0, &mut y, &times, &opts, |_, t, y| {
            let a = (-1000.0 * t).exp();
            let b = 1000.0 / 999.0 * ((-t).exp() - a);
            assert!((y[0] - a).abs() < 1e-8 && (y[1] - b).abs() < 1e-8, "t={t}: {y:?}");
            true
        })
        .unwrap();
        assert!(stats.accepted < 1500, "{stats:?}");
    }

    #[test]
    fn sdirk_weights_consistent() {
        let sum_b: f64 = SD_A[4].iter().sum::<f64>() + SD_G;
        let sum_bhat: f64 = SD_BHAT.iter().sum();
        assert!((sum_b - 1.0).abs() < 1e-14 && (sum_bhat - 1.0).abs() < 1e-14);
    }

    #[test]
    fn step_budget_reported() {
        let mut y = [1.0];
        let opts = OdeOptions { max_steps: 3, ..OdeOptions::tol(1e-12, 1e-14) };
        let r = integrate(&mut Decay(1.0), 0.0, &mut y, &[0.0, 10.0], &opts, |_, _, _| true);
        assert!(matches!(r, Err(Error::TooManySteps { .. })));
    }
}

//! Thermodynamic-limit closed forms and series.
//!
//! Chiral: P(x,t) = x e^{−t} ₁F₂(½;1,2;4x h(t)), correlation and excitation
//! series from the rational tables in [`crate::coeffs`].
//! Symmetric: P = P₀ e^{−t} e^{B h(t)} and its derived quantities.

use std::f64::consts::PI;

use crate::coeffs::{tables, LogCoeff};
use crate::error::{Error, Result};
use crate::quad;
use crate::special::{bessel_i, bessel_j, h, hyp1f2_half, ln_hyp1f2_half, ln_lower_incomplete_gamma};

/// Successive-cutoff tolerance for series flagged as converged.
pub const SERIES_FLAG_TOL: f64 = 1e-4;

/// A truncated series evaluated at `k_max` and `k_max + 1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SeriesValue {
    pub value: f64,
    pub next: f64,
    pub k_max: usize,
    pub converged: bool,
}

impl SeriesValue {
    fn new(value: f64, next: f64, k_max: usize) -> Self {
        let converged = (value - next).abs() <= SERIES_FLAG_TOL && value.is_finite();
        Self { value, next, k_max, converged }
    }
}

// ---------------------------------------------------------------- chiral

/// x e^{−t} ₁F₂(½;1,2;4xh(t)).
pub fn power_chiral(x: f64, t: f64) -> f64 {
    x * (-t).exp() * hyp1f2_half(4.0 * x * h(t))
}

/// ln P for depths where P overflows.
pub fn ln_power_chiral(x: f64, t: f64) -> f64 {
    x.ln() - t + ln_hyp1f2_half(4.0 * x * h(t))
}

/// x e^{−t} Σ_{n<terms} c_n (xh)^n.
pub fn power_chiral_series(x: f64, t: f64, terms: usize) -> f64 {
    let tab = tables(terms);
    let s = x * h(t);
    let sum: f64 = tab.c_n_f[..terms].iter().enumerate().map(|(n, c)| c.times_pow(s, n)).sum();
    x * (-t).exp() * sum
}

/// Normalized rate Γ = P/(x e^{−t}) = ₁F₂(4xh).
pub fn gamma_chiral(x: f64, t: f64) -> f64 {
    hyp1f2_half(4.0 * x * h(t))
}

/// D(x,t) = ∬₀ˣ C₁ = x e^{−t}[₁F₂ − 1].
pub fn doubly_integrated_correlation(x: f64, t: f64) -> f64 {
    x * (-t).exp() * (hyp1f2_half(4.0 * x * h(t)) - 1.0)
}

fn diag_sums(rows: &[Vec<LogCoeff>], x: f64, y: f64, k_max: usize) -> Vec<f64> {
    (0..=k_max)
        .map(|n| {
            (0..=n)
                .map(|i| {
                    let c = &rows[i][n - i];
                    if c.sign == 0.0 {
                        return 0.0;
                    }
                    let xi = if i == 0 { 1.0 } else { x.powi(i as i32) };
                    let yj = if n == i { 1.0 } else { y.powi((n - i) as i32) };
                    c.value() * xi * yj
                })
                .sum()
        })
        .collect()
}

/// C₁(x,y,t) = e^{−t} Σ c_ij x^i y^j h^{i+j+1}, summed over i + j ≤ k_max.
///
/// Fails with [`Error::Truncation`] unless the last retained diagonal is
/// below 1e-12 of the running sum.
pub fn c1_field(x: f64, y: f64, t: f64, k_max: usize) -> Result<f64> {
    if x < 0.0 || y < 0.0 {
        return Err(Error::Domain(format!("negative depth ({x}, {y})")));
    }
    let tab = tables(k_max);
    let hh = h(t);
    let diag = diag_sums(&tab.c_ij_f, x, y, k_max);
    let terms: Vec<f64> = diag.iter().enumerate().map(|(n, d)| d * hh.powi(n as i32 + 1)).collect();
    let sum: f64 = terms.iter().sum();
    let last = terms[k_max].abs();
    if !(last <= 1e-12 * sum.abs() || last == 0.0) || !sum.is_finite() {
        return Err(Error::Truncation { k_max });
    }
    Ok((-t).exp() * sum)
}

/// C₁(0,y,t) = e^{−t} h I₁(2√s)/√s with s = y h (J₁ for s < 0).
pub fn c1_edge(y: f64, t: f64) -> Result<f64> {
    let hh = h(t);
    let s = y * hh;
    let r = if s.abs() < 1e-12 {
        1.0 + s / 2.0
    } else if s > 0.0 {
        bessel_i(1, 2.0 * s.sqrt())? / s.sqrt()
    } else {
        bessel_j(1, 2.0 * (-s).sqrt()) / (-s).sqrt()
    };
    Ok((-t).exp() * hh * r)
}

fn dicke_series(b: f64, hh: f64, k_max: usize) -> f64 {
    // Σ_n g_n B^{n+1} h^n, the doubly integrated homogeneous correlation
    let tab = tables(k_max);
    tab.g_f[..=k_max].iter().enumerate().map(|(n, g)| b * g.times_pow(b * hh, n)).sum()
}

/// Power after one photon has been detected at t = 0 (start in |ψ_{N−1}⟩).
pub fn power_chiral_dicke(b: f64, t: f64, k_max: usize) -> SeriesValue {
    let base = b * hyp1f2_half(4.0 * b * h(t));
    let hh = h(t);
    let e = (-t).exp();
    let v = e * (base - dicke_series(b, hh, k_max));
    let w = e * (base - dicke_series(b, hh, k_max + 1));
    SeriesValue::new(v, w, k_max)
}

/// g²(0,t) = P_ψ(B,t)/P(B,t), flagged when cutoffs k_max and k_max+1 disagree.
pub fn g2_0t_chiral(b: f64, t: f64, k_max: usize) -> SeriesValue {
    let p = power_chiral(b, t);
    let psi = power_chiral_dicke(b, t, k_max);
    SeriesValue::new(psi.value / p, psi.next / p, k_max)
}

/// S_n(t) = ∫₀ᵗ h(τ)ⁿ dτ.
pub fn s_integral(n: usize, t: f64) -> f64 {
    match n {
        0 => t,
        1 => -(((t - 2.0) * (t - 2.0)) - 4.0 * (-t).exp()) / 2.0,
        2 => -(12.0 * (t - 1.0) * (-t).exp() + (-t * t * t + 6.0 * t * t - 12.0 * t + 6.0) + 6.0 * (-2.0 * t).exp()) / 3.0,
        _ => s_integral_quad(n, t),
    }
}

/// S_n by adaptive quadrature, absolute tolerance 1e-12.
pub fn s_integral_quad(n: usize, t: f64) -> f64 {
    quad::integrate(|s| h(s).powi(n as i32), 0.0, t, 1e-12, 1e-13).0
}

fn e1_sum(x: f64, t: f64, k_max: usize, s: &[f64]) -> f64 {
    let tab = tables(k_max);
    let sum: f64 = (1..=k_max).map(|n| tab.u_f[n].times_pow(x, n) * s[n]).sum();
    -(-t).exp() * sum
}

/// e₁(x,t) = −e^{−t} Σ_{n≥1} u_n xⁿ S_n(t).
pub fn e1_correction(x: f64, t: f64, k_max: usize) -> SeriesValue {
    let s: Vec<f64> = (0..=k_max + 1).map(|n| s_integral(n, t)).collect();
    SeriesValue::new(e1_sum(x, t, k_max, &s), e1_sum(x, t, k_max + 1, &s), k_max)
}

// ---------------------------------------------------------------- asymptotics

/// Minimum |s| = |x h| at which the asymptotic forms are evaluated.
pub const ASYMPTOTIC_GUARD: f64 = 25.0;

/// Large-|s| form of ₁F₂(½;1,2;4s).
pub fn asymptotic_hyp(s: f64) -> Result<f64> {
    if s.abs() < ASYMPTOTIC_GUARD {
        return Err(Error::Domain(format!("|s| = {} below asymptotic guard", s.abs())));
    }
    if s > 0.0 {
        Ok((4.0 * s.sqrt()).exp() / (8.0 * PI * s))
    } else {
        let r = (-s).sqrt();
        Ok((1.0 - (4.0 * r).cos() / (4.0 * r)) / (PI * r))
    }
}

/// x e^{−t} times the asymptotic ₁F₂ at s = x h(t).
pub fn asymptotic_power_chiral(x: f64, t: f64) -> Result<f64> {
    Ok(x * (-t).exp() * asymptotic_hyp(x * h(t))?)
}

/// Late-time composite with h ≈ −(t − 2).
pub fn late_time_power_chiral(x: f64, t: f64) -> Result<f64> {
    let a = x * (t - 2.0);
    if a < ASYMPTOTIC_GUARD {
        return Err(Error::Domain(format!("x(t−2) = {a} below asymptotic guard")));
    }
    let r = a.sqrt();
    Ok(x * (-t).exp() / (PI * r) * (1.0 - (4.0 * r).cos() / (4.0 * r)))
}

/// Oscillatory part (π√−s ₁F₂(4s) − 1)·4√−s, asymptotically −cos(4√−s).
pub fn oscillation_metric(s: f64) -> f64 {
    let r = (-s).sqrt();
    (PI * r * hyp1f2_half(4.0 * s) - 1.0) * 4.0 * r
}

// ---------------------------------------------------------------- symmetric

/// P = P₀ e^{−t} e^{B h(t)}.
pub fn power_symmetric(b: f64, t: f64, p0: f64) -> f64 {
    p0 * (-t + b * h(t)).exp()
}

/// Γ = e^{B h(t)}.
pub fn gamma_symmetric(b: f64, t: f64) -> f64 {
    (b * h(t)).exp()
}

/// Peak normalized rate (e/2)^B, reached at t = ln 2.
pub fn gamma_max_symmetric(b: f64) -> f64 {
    (b * (1.0 - std::f64::consts::LN_2)).exp()
}

/// Time of peak power, ln(2B/(B+1)); `None` for B ≤ 1 (monotone decay).
pub fn peak_time_symmetric(b: f64) -> Option<f64> {
    (b > 1.0).then(|| (2.0 * b / (b + 1.0)).ln())
}

/// Peak total power B((B+1)/(2B))^{B+1} e^{B−1}, both directions, P₀ = B.
pub fn peak_power_symmetric(b: f64) -> f64 {
    if b <= 1.0 {
        return b;
    }
    b * ((b + 1.0) * ((b + 1.0) / (2.0 * b)).ln() + b - 1.0).exp()
}

/// Total waveguide energy e^{2B} γ(B+1, 2B)/(2(2B)^B), P₀ = B.
pub fn energy_symmetric(b: f64) -> f64 {
    if b == 0.0 {
        return 0.0;
    }
    (2.0 * b + ln_lower_incomplete_gamma(b + 1.0, 2.0 * b) - std::f64::consts::LN_2 - b * (2.0 * b).ln()).exp()
}

/// Stirling form √(πB/2)(e/2)^B.
pub fn energy_symmetric_stirling(b: f64) -> f64 {
    (PI * b / 2.0).sqrt() * gamma_max_symmetric(b)
}

/// ∫₀^∞ P dt by adaptive quadrature, as a check of [`energy_symmetric`].
pub fn energy_symmetric_quad(b: f64) -> f64 {
    let t_end = 60.0 + 2.0 * b;
    quad::integrate(|t| power_symmetric(b, t, b), 0.0, t_end, 0.0, 1e-12).0
}

/// Max |(∂_t + B + 1 − 2Be^{−t})P| / max|P| along a sampled trace (central differences).
pub fn ode_check(b: f64, times: &[f64], p: &[f64]) -> f64 {
    assert_eq!(times.len(), p.len());
    let scale = p.iter().fold(0.0f64, |a, v| a.max(v.abs())).max(f64::MIN_POSITIVE);
    let mut worst = 0.0f64;
    for k in 1..times.len().saturating_sub(1) {
        let (t0, t1, t2) = (times[k - 1], times[k], times[k + 1]);
        let (a, c) = (t1 - t0, t2 - t1);
        // non-uniform three-point derivative
        let dp = (-c / (a * (a + c))) * p[k - 1] + ((c - a) / (a * c)) * p[k] + (a / (c * (a + c))) * p[k + 1];
        let r = dp + (b + 1.0 - 2.0 * b * (-t1).exp()) * p[k];
        worst = worst.max(r.abs());
    }
    worst / scale
}

/// g²(0,t) in the symmetric limit: both P and P_ψ obey the same linear ODE.
pub fn g2_0t_symmetric(_t: f64) -> f64 {
    2.0
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::special::{peak_rate_time, special_time_tsp};
    use approx::assert_relative_eq;

    #[test]
    fn chiral_power_trivial() {
        assert_relative_eq!(power_chiral(3.0, 0.0), 3.0, max_relative = 1e-15);
        let tsp = special_time_tsp();
        assert_relative_eq!(power_chiral(7.0, tsp), 7.0 * (-tsp).exp(), max_relative = 1e-12);
    }

    #[test]
    fn truncated_series_error_bound() {
        for &(x, t) in &[(1.0, 0.5), (2.0, 0.4), (3.0, 2.0)] {
            let s = x * h(t);
            if s.abs() > 1.0 {
                continue;
            }
            let exact = power_chiral(x, t);
            let part = power_chiral_series(x, t, 8);
            let bound = tables(8).c_n_f[8].times_pow(s.abs(), 8) * x * (-t).exp();
            assert!((exact - part).abs() <= 1.5 * bound, "x={x} t={t}");
        }
    }

    #[test]
    fn c1_origin_and_edge() {
        let t = 0.8;
        assert_relative_eq!(c1_field(0.0, 0.0, t, 40).unwrap(), (-t).exp() * h(t), max_relative = 1e-14);
        let tp = peak_rate_time();
        for y in [0.5, 5.0, 40.0] {
            let a = c1_field(0.0, y, tp, 64).unwrap();
            let b = c1_edge(y, tp).unwrap();
            assert_relative_eq!(a, b, max_relative = 1e-10);
        }
    }

    #[test]
    fn c1_physicality_scale() {
        let v = c1_field(20.0, 20.0, peak_rate_time(), 64).unwrap();
        assert!(v > 15.0 && v < 25.0, "{v}");
    }

    #[test]
    fn c1_truncation_reported() {
        assert!(matches!(c1_field(40.0, 40.0, 0.6, 5), Err(Error::Truncation { .. })));
    }

    #[test]
    fn g2_series_start() {
        let v = g2_0t_chiral(10.0, 0.0, 35);
        assert!(v.converged);
        assert_relative_eq!(v.value, 2.0, max_relative = 1e-12);
    }

    #[test]
    fn s_closed_forms_match_quadrature() {
        for k in 0..=50 {
            let t = 0.1 * k as f64;
            assert!((s_integral(1, t) - s_integral_quad(1, t)).abs() < 1e-10);
            assert!((s_integral(2, t) - s_integral_quad(2, t)).abs() < 1e-10);
        }
    }

    #[test]
    fn e1_upstream_atom_unaffected() {
        for t in [0.3, 1.0, 2.5] {
            assert_eq!(e1_correction(0.0, t, 16).value, 0.0);
        }
    }

    #[test]
    fn e1_bound_on_beta() {
        // e(10, 1) = e^{−1} + β e₁ ≥ 0 requires β ≲ 0.03
        let e1 = e1_correction(10.0, 1.0, 16).value;
        let beta_max = (-1.0f64).exp() / -e1;
        assert!(beta_max > 0.02 && beta_max < 0.04, "{beta_max}");
    }

    #[test]
    fn asymptotic_regimes() {
        let up = asymptotic_hyp(100.0).unwrap() / hyp1f2_half(400.0);
        let down = asymptotic_hyp(-100.0).unwrap() / hyp1f2_half(-400.0);
        assert!((up - 1.0).abs() < 0.05 && (down - 1.0).abs() < 0.05, "{up} {down}");
        assert!(asymptotic_hyp(10.0).is_err());
        let s = 1e4;
        let resid = ln_hyp1f2_half(4.0 * s) - 4.0 * s.sqrt() + (8.0 * PI * s).ln();
        assert!(resid.abs() < 0.01);
    }

    #[test]
    fn symmetric_closed_forms() {
        assert_relative_eq!(power_symmetric(0.0, 1.3, 2.0), 2.0 * (-1.3f64).exp(), max_relative = 1e-15);
        assert_relative_eq!(peak_time_symmetric(20.0).unwrap(), (40.0f64 / 21.0).ln(), max_relative = 1e-15);
        assert_eq!(gamma_max_symmetric(0.0), 1.0);
        assert_relative_eq!(gamma_max_symmetric(10.0), (std::f64::consts::E / 2.0).powi(10), max_relative = 1e-13);
        assert_relative_eq!(gamma_symmetric(7.0, peak_rate_time()), gamma_max_symmetric(7.0), max_relative = 1e-12);
        assert_relative_eq!(energy_symmetric(1.0), 1.0973, max_relative = 1e-4);
        for b in [1.0, 5.0, 20.0, 40.0] {
            assert_relative_eq!(energy_symmetric(b), energy_symmetric_quad(b), max_relative = 1e-8);
        }
        assert!((energy_symmetric_stirling(40.0) / energy_symmetric(40.0) - 1.0).abs() < 0.03);
    }

    #[test]
    fn symmetric_peak_power_matches_maximization() {
        let b = 20.0;
        let tp = peak_time_symmetric(b).unwrap();
        let pmax = power_symmetric(b, tp, b);
        assert_relative_eq!(pmax, peak_power_symmetric(b), max_relative = 1e-12);
        for k in -5..=5 {
            assert!(power_symmetric(b, tp + 1e-3 * k as f64, b) <= pmax * (1.0 + 1e-15));
        }
    }

    #[test]
    fn ode_residual_small_on_closed_form() {
        let times: Vec<f64> = (0..=400).map(|k| k as f64 * 0.01).collect();
        let p: Vec<f64> = times.iter().map(|&t| power_symmetric(10.0, t, 10.0)).collect();
        assert!(ode_check(10.0, &times, &p) < 1e-2);
    }
}

//! h(t), Bessel I/J of orders 0 and 1, the ₁F₂(½; 1, 2; z) kernel and the
//! lower incomplete gamma function.

use std::f64::consts::{LN_2, PI};

use crate::error::{Error, Result};

/// h(t) = −(2e^{−t} + t − 2).
pub fn h(t: f64) -> f64 {
    -2.0 * (-t).exp_m1() - t
}

pub fn h_prime(t: f64) -> f64 {
    2.0 * (-t).exp() - 1.0
}

/// ln 2, where h′ vanishes.
pub fn peak_rate_time() -> f64 {
    LN_2
}

/// Unique positive root of h, near 1.5936.
pub fn special_time_tsp() -> f64 {
    let (mut lo, mut hi) = (1.0_f64, 2.0_f64);
    while hi - lo > 1e-6 {
        let mid = 0.5 * (lo + hi);
        if h(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let mut t = 0.5 * (lo + hi);
    for _ in 0..50 {
        let dt = h(t) / h_prime(t);
        t -= dt;
        if dt.abs() < 1e-13 {
            break;
        }
    }
    t
}

const SERIES_SWITCH: f64 = 15.0;
const I_OVERFLOW: f64 = 700.0;

fn check_order(order: u32) {
    assert!(order <= 1, "only orders 0 and 1 are implemented");
}

/// Hankel coefficient a_k(ν) = Π_{j=1..k}(4ν² − (2j−1)²) / (k! 8^k).
fn hankel_coeffs(order: u32, n: usize) -> Vec<f64> {
    let mu = 4.0 * (order * order) as f64;
    let mut a = Vec::with_capacity(n);
    a.push(1.0);
    for k in 1..n {
        let odd = (2 * k - 1) as f64;
        let prev = a[k - 1];
        a.push(prev * (mu - odd * odd) / (k as f64 * 8.0));
    }
    a
}

/// Σ (−1)^k a_k / x^k truncated at the smallest term.
fn asymptotic_sum(a: &[f64], x: f64, alternate: bool) -> f64 {
    let mut sum = 0.0;
    let mut prev = f64::INFINITY;
    let mut xp = 1.0;
    for (k, &ak) in a.iter().enumerate() {
        let term = ak / xp;
        if term.abs() > prev {
            break;
        }
        prev = term.abs();
        sum += if alternate && k % 2 == 1 { -term } else { term };
        xp *= x;
        if prev < 1e-17 * sum.abs() {
            break;
        }
    }
    sum
}

fn bessel_i_series(order: u32, x: f64) -> f64 {
    let q = 0.25 * x * x;
    let mut term = if order == 0 { 1.0 } else { 0.5 * x };
    let mut sum = term;
    for k in 1..500 {
        term *= q / (k as f64 * (k as u32 + order) as f64);
        sum += term;
        if term < 1e-17 * sum {
            break;
        }
    }
    sum
}

/// e^{−|x|} I_n(x); finite for all x.
pub fn bessel_i_scaled(order: u32, x: f64) -> f64 {
    check_order(order);
    let ax = x.abs();
    let v = if ax <= SERIES_SWITCH {
        bessel_i_series(order, ax) * (-ax).exp()
    } else {
        let a = hankel_coeffs(order, 2 * ax as usize + 8);
        asymptotic_sum(&a, ax, true) / (2.0 * PI * ax).sqrt()
    };
    if order == 1 && x < 0.0 {
        -v
    } else {
        v
    }
}

/// Modified Bessel function I_n(x), n ∈ {0, 1}.
pub fn bessel_i(order: u32, x: f64) -> Result<f64> {
    check_order(order);
    if !(x.abs() < I_OVERFLOW) {
        return Err(Error::Range(format!("bessel_i argument {x} beyond overflow guard")));
    }
    Ok(bessel_i_scaled(order, x) * x.abs().exp())
}

/// e^{−2x}(I₀(x)² − I₁(x)²) for x ≥ 0, with I₀ − I₁ taken from its own
/// asymptotic series at large x to avoid cancellation.
fn bessel_i_sqdiff_scaled(x: f64) -> f64 {
    if x <= SERIES_SWITCH {
        let i0 = bessel_i_scaled(0, x);
        let i1 = bessel_i_scaled(1, x);
        (i0 - i1) * (i0 + i1)
    } else {
        let n = 2 * x as usize + 8;
        let a0 = hankel_coeffs(0, n);
        let a1 = hankel_coeffs(1, n);
        let diff: Vec<f64> = a0.iter().zip(&a1).map(|(p, q)| p - q).collect();
        let norm = 1.0 / (2.0 * PI * x).sqrt();
        // a_0(0) − a_0(1) = 0, so the difference series starts at 1/x.
        let d = alt_shift(&diff[1..], x);
        let s = asymptotic_sum(&a0, x, true) + asymptotic_sum(&a1, x, true);
        d * norm * s * norm
    }
}

/// Σ_{k≥1} (−1)^k diff_k / x^k with diff indexed from k = 1.
fn alt_shift(diff: &[f64], x: f64) -> f64 {
    let mut sum = 0.0;
    let mut prev = f64::INFINITY;
    let mut xp = x;
    for (i, &dk) in diff.iter().enumerate() {
        let k = i + 1;
        let term = dk / xp;
        if term.abs() > prev {
            break;
        }
        prev = term.abs();
        sum += if k % 2 == 1 { -term } else { term };
        xp *= x;
        if prev < 1e-17 * sum.abs() {
            break;
        }
    }
    sum
}

#[derive(Clone, Copy, Debug)]
struct DoubleDouble {
    hi: f64,
    lo: f64,
}

impl DoubleDouble {
    fn from_f64(x: f64) -> Self {
        Self { hi: x, lo: 0.0 }
    }

    fn two_sum(a: f64, b: f64) -> (f64, f64) {
        let s = a + b;
        let bb = s - a;
        (s, (a - (s - bb)) + (b - bb))
    }

    fn add(self, o: Self) -> Self {
        let (s, e) = Self::two_sum(self.hi, o.hi);
        let e = e + self.lo + o.lo;
        let (hi, lo) = Self::two_sum(s, e);
        Self { hi, lo }
    }

    fn mul(self, o: Self) -> Self {
        let p = self.hi * o.hi;
        let e = self.hi.mul_add(o.hi, -p);
        let e = e + self.hi * o.lo + self.lo * o.hi;
        let (hi, lo) = Self::two_sum(p, e);
        Self { hi, lo }
    }

    fn div_f64(self, d: f64) -> Self {
        let q1 = self.hi / d;
        let p = q1 * d;
        let pe = q1.mul_add(d, -p);
        let r = ((self.hi - p) - pe + self.lo) / d;
        let (hi, lo) = Self::two_sum(q1, r);
        Self { hi, lo }
    }

    fn neg(self) -> Self {
        Self { hi: -self.hi, lo: -self.lo }
    }

    fn to_f64(self) -> f64 {
        self.hi + self.lo
    }
}

fn bessel_j_series(order: u32, x: f64) -> f64 {
    let half = DoubleDouble::from_f64(0.5 * x);
    let q = half.mul(half).neg();
    let mut term = if order == 0 { DoubleDouble::from_f64(1.0) } else { half };
    let mut sum = term;
    for k in 1..200u32 {
        term = term.mul(q).div_f64((k * (k + order)) as f64);
        sum = sum.add(term);
        if term.hi.abs() < 1e-34 * sum.hi.abs().max(1e-300) || term.hi == 0.0 {
            break;
        }
    }
    sum.to_f64()
}

fn bessel_j_asymptotic(order: u32, x: f64) -> f64 {
    let a = hankel_coeffs(order, 2 * x as usize + 8);
    // P = Σ (−1)^k a_{2k}/x^{2k}, Q = Σ (−1)^k a_{2k+1}/x^{2k+1}
    let (mut p, mut q) = (0.0, 0.0);
    let mut prev = f64::INFINITY;
    let mut xp = 1.0;
    for (k, &ak) in a.iter().enumerate() {
        let term = ak / xp;
        if term.abs() > prev {
            break;
        }
        prev = term.abs();
        let sign = if (k / 2) % 2 == 0 { 1.0 } else { -1.0 };
        if k % 2 == 0 {
            p += sign * term;
        } else {
            q += sign * term;
        }
        xp *= x;
        if prev < 1e-18 {
            break;
        }
    }
    let phi = (0.5 * order as f64 + 0.25) * PI;
    let (s, c) = x.sin_cos();
    let cos_chi = c * phi.cos() + s * phi.sin();
    let sin_chi = s * phi.cos() - c * phi.sin();
    (2.0 / (PI * x)).sqrt() * (p * cos_chi - q * sin_chi)
}

/// Bessel function of the first kind J_n(x), n ∈ {0, 1}, x ≥ 0.
pub fn bessel_j(order: u32, x: f64) -> f64 {
    check_order(order);
    assert!(x >= 0.0, "bessel_j requires x >= 0");
    if x <= SERIES_SWITCH {
        bessel_j_series(order, x)
    } else {
        bessel_j_asymptotic(order, x)
    }
}

pub const HYP_TAYLOR_LIMIT: f64 = 25.0;

/// Direct Taylor sum of ₁F₂(½; 1, 2; z); only valid for |z| ≤ 25.
pub fn hyp1f2_half_taylor(z: f64) -> Result<f64> {
    if z.abs() > HYP_TAYLOR_LIMIT {
        return Err(Error::Domain(format!("Taylor mode limited to |z| <= 25, got {z}")));
    }
    let mut term = 1.0;
    let mut sum = 1.0;
    for n in 0..400 {
        let nf = n as f64;
        term *= (nf + 0.5) * z / ((nf + 1.0) * (nf + 1.0) * (nf + 2.0));
        sum += term;
        if term.abs() < 1e-18 * sum.abs() {
            break;
        }
    }
    Ok(sum)
}

/// ₁F₂(½; 1, 2; z) = I₀(√z)² − I₁(√z)² for z ≥ 0 and J₀(√−z)² + J₁(√−z)²
/// for z < 0. Returns +∞ once the value exceeds the f64 range.
pub fn hyp1f2_half(z: f64) -> f64 {
    if z >= 0.0 {
        let x = z.sqrt();
        let scaled = bessel_i_sqdiff_scaled(x);
        let ln = 2.0 * x + scaled.ln();
        if ln > 709.0 {
            f64::INFINITY
        } else {
            scaled * (2.0 * x).exp()
        }
    } else {
        let x = (-z).sqrt();
        let j0 = bessel_j(0, x);
        let j1 = bessel_j(1, x);
        j0 * j0 + j1 * j1
    }
}

/// ln ₁F₂(½; 1, 2; z); finite where the function itself overflows.
pub fn ln_hyp1f2_half(z: f64) -> f64 {
    if z >= 0.0 {
        let x = z.sqrt();
        2.0 * x + bessel_i_sqdiff_scaled(x).ln()
    } else {
        hyp1f2_half(z).ln()
    }
}

const LANCZOS_G: f64 = 7.0;
const LANCZOS: [f64; 9] = [
    0.999_999_999_999_809_9,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_1,
    -176.615_029_162_140_6,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_572e-6,
    1.505_632_735_149_311_6e-7,
];

/// ln Γ(x) for x > 0.
pub fn ln_gamma(x: f64) -> f64 {
    if x < 0.5 {
        return (PI / (PI * x).sin()).ln() - ln_gamma(1.0 - x);
    }
    let x = x - 1.0;
    let mut a = LANCZOS[0];
    for (i, &c) in LANCZOS.iter().enumerate().skip(1) {
        a += c / (x + i as f64);
    }
    let t = x + LANCZOS_G + 0.5;
    0.5 * (2.0 * PI).ln() + (x + 0.5) * t.ln() - t + a.ln()
}

/// ln of the series part: γ(a,x) = x^a e^{−x} Σ x^n/(a(a+1)…(a+n)).
fn ln_gamma_series(a: f64, x: f64) -> f64 {
    let mut term = 1.0 / a;
    let mut sum = term;
    let mut ap = a;
    for _ in 0..10_000 {
        ap += 1.0;
        term *= x / ap;
        sum += term;
        if term < sum * 1e-17 {
            break;
        }
    }
    a * x.ln() - x + sum.ln()
}

/// Regularized upper Q(a,x) by modified Lentz continued fraction.
fn gamma_q_cf(a: f64, x: f64) -> f64 {
    let tiny = 1e-300;
    let mut b = x + 1.0 - a;
    let mut c = 1.0 / tiny;
    let mut d = 1.0 / b;
    let mut f = d;
    for i in 1..10_000 {
        let an = -(i as f64) * (i as f64 - a);
        b += 2.0;
        d = an * d + b;
        if d.abs() < tiny {
            d = tiny;
        }
        c = b + an / c;
        if c.abs() < tiny {
            c = tiny;
        }
        d = 1.0 / d;
        let delta = d * c;
        f *= delta;
        if (delta - 1.0).abs() < 1e-16 {
            break;
        }
    }
    (a * x.ln() - x - ln_gamma(a)).exp() * f
}

/// ln γ(a, x); stays finite for large a where Γ(a) overflows.
pub fn ln_lower_incomplete_gamma(a: f64, x: f64) -> f64 {
    assert!(a > 0.0 && x >= 0.0, "need a > 0 and x >= 0");
    if x == 0.0 {
        return f64::NEG_INFINITY;
    }
    if x < a + 1.0 {
        ln_gamma_series(a, x)
    } else {
        ln_gamma(a) + (-gamma_q_cf(a, x)).ln_1p()
    }
}

/// Lower incomplete gamma γ(a, x) = ∫₀ˣ s^{a−1} e^{−s} ds.
pub fn lower_incomplete_gamma(a: f64, x: f64) -> f64 {
    if x == 0.0 {
        return 0.0;
    }
    ln_lower_incomplete_gamma(a, x).exp()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn h_values() {
        assert_eq!(h(0.0), 0.0);
        assert_relative_eq!(h(LN_2), 1.0 - LN_2, epsilon = 1e-15);
        assert!(h_prime(peak_rate_time()).abs() < 1e-15);
    }

    #[test]
    fn tsp_root() {
        let t = special_time_tsp();
        assert!(h(t).abs() < 1e-12);
        assert_eq!((t * 100.0).round() / 100.0, 1.59);
        assert!((t - 1.5936).abs() < 1e-4);
    }

    #[test]
    fn h_maximum_at_ln2() {
        let hm = h(LN_2);
        for k in 0..=5000 {
            assert!(h(k as f64 * 1e-3) <= hm + 1e-15);
        }
    }

    #[test]
    fn bessel_trivial() {
        assert_eq!(bessel_i(0, 0.0).unwrap(), 1.0);
        assert_eq!(bessel_i(1, 0.0).unwrap(), 0.0);
        assert_eq!(bessel_j(0, 0.0), 1.0);
        assert_eq!(bessel_j(1, 0.0), 0.0);
        assert!(bessel_i(0, 700.0).is_err());
    }

    #[test]
    fn bessel_reference_values() {
        // Abramowitz & Stegun tables.
        assert_relative_eq!(bessel_i(0, 1.0).unwrap(), 1.266_065_877_752_008_4, max_relative = 1e-14);
        assert_relative_eq!(bessel_i(1, 1.0).unwrap(), 0.565_159_103_992_485_0, max_relative = 1e-14);
        assert_relative_eq!(bessel_j(0, 1.0), 0.765_197_686_557_966_6, max_relative = 1e-14);
        assert_relative_eq!(bessel_j(1, 1.0), 0.440_050_585_744_933_5, max_relative = 1e-14);
        assert_relative_eq!(bessel_j(0, 20.0), 0.167_024_664_340_583_1, max_relative = 1e-10);
        assert_relative_eq!(bessel_i(0, 20.0).unwrap(), 4.355_828_255_955_353e7, max_relative = 1e-12);
    }

    #[test]
    fn switch_points_overlap() {
        for &x in &[14.0, 14.5, 15.0, 15.5, 16.0] {
            let i0s = bessel_i_series(0, x) * (-x).exp();
            let i0a = asymptotic_sum(&hankel_coeffs(0, 40), x, true) / (2.0 * PI * x).sqrt();
            assert_relative_eq!(i0s, i0a, max_relative = 1e-10);
            let i1s = bessel_i_series(1, x) * (-x).exp();
            let i1a = asymptotic_sum(&hankel_coeffs(1, 40), x, true) / (2.0 * PI * x).sqrt();
            assert_relative_eq!(i1s, i1a, max_relative = 1e-10);
            for n in 0..2 {
                let js = bessel_j_series(n, x);
                let ja = bessel_j_asymptotic(n, x);
                assert!((js - ja).abs() < 1e-10, "J{n}({x}) {js} vs {ja}");
            }
        }
    }

    #[test]
    fn hyp_identity_small_args() {
        let i0 = bessel_i(0, 2.0).unwrap();
        let i1 = bessel_i(1, 2.0).unwrap();
        assert_relative_eq!(i0 * i0 - i1 * i1, hyp1f2_half(4.0), max_relative = 1e-10);
        let j0 = bessel_j(0, 4.0);
        let j1 = bessel_j(1, 4.0);
        assert_relative_eq!(j0 * j0 + j1 * j1, hyp1f2_half_taylor(-16.0).unwrap(), max_relative = 1e-9);
        assert_eq!(hyp1f2_half(0.0), 1.0);
        assert!(hyp1f2_half_taylor(30.0).is_err());
    }

    #[test]
    fn hyp_large_argument_log() {
        let z = 4.0e5;
        assert!(hyp1f2_half(z).is_infinite());
        let ln = ln_hyp1f2_half(z);
        // leading behaviour e^{2√z}/(2π√z · √z)
        let x = z.sqrt();
        assert_relative_eq!(ln, 2.0 * x - (2.0 * PI * x * x).ln(), max_relative = 1e-5);
    }

    #[test]
    fn incomplete_gamma() {
        for &x in &[0.1, 1.0, 3.0, 10.0] {
            assert_relative_eq!(lower_incomplete_gamma(1.0, x), 1.0 - (-x).exp(), max_relative = 1e-13);
        }
        assert_relative_eq!(lower_incomplete_gamma(2.0, 2.0), 1.0 - 3.0 * (-2.0f64).exp(), max_relative = 1e-13);
        assert_relative_eq!(lower_incomplete_gamma(5.0, 400.0), 24.0, max_relative = 1e-13);
        assert_relative_eq!(ln_gamma(0.5), 0.5 * PI.ln(), max_relative = 1e-14);
        assert_relative_eq!(ln_gamma(101.0), 363.739_375_555_563_5, max_relative = 1e-14);
    }
}

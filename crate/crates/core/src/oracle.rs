//! Reference computations used to check the production paths. Each one uses a
//! different method from the code it checks.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{ToPrimitive, Zero};

/// Fixed-point fraction bits for [`hyp1f2_half_exact`].
const FRAC_BITS: u32 = 400;

/// ₁F₂(½;1,2;z) by direct Taylor summation in 400-bit fixed point.
///
/// The f64 input is taken exactly; the only rounding is the final
/// conversion, so the result is correctly rounded to well below 1e-15
/// for |z| ≤ 10⁴.
pub fn hyp1f2_half_exact(z: f64) -> f64 {
    assert!(z.is_finite());
    let (mant, exp, sign) = num_traits::float::FloatCore::integer_decode(z);
    let m = BigInt::from(mant) * BigInt::from(sign);
    let one = BigInt::from(1u8) << FRAC_BITS;
    let mut term = one.clone();
    let mut sum = one.clone();
    for n in 0u64.. {
        // t_{n+1} = t_n z (2n+1) / (2 (n+1)² (n+2))
        let mut next = &term * &m * BigInt::from(2 * n + 1);
        if exp >= 0 {
            next <<= exp as usize;
        } else {
            next >>= (-exp) as usize;
        }
        next /= BigInt::from(2 * (n + 1) * (n + 1) * (n + 2));
        if next.is_zero() {
            break;
        }
        sum += &next;
        term = next;
    }
    BigRational::new(sum, one).to_f64().unwrap()
}

/// Adaptive Simpson quadrature with Richardson correction.
pub fn simpson<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, tol: f64) -> f64 {
    fn rec<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, fa: f64, fm: f64, fb: f64, whole: f64, tol: f64, depth: u32) -> f64 {
        let m = 0.5 * (a + b);
        let (lm, rm) = (0.5 * (a + m), 0.5 * (m + b));
        let (flm, frm) = (f(lm), f(rm));
        let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
        let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
        let delta = left + right - whole;
        if depth == 0 || delta.abs() <= 15.0 * tol {
            return left + right + delta / 15.0;
        }
        rec(f, a, m, fa, flm, fm, left, tol / 2.0, depth - 1) + rec(f, m, b, fm, frm, fb, right, tol / 2.0, depth - 1)
    }
    let (fa, fb, fm) = (f(a), f(b), f(0.5 * (a + b)));
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    rec(f, a, b, fa, fm, fb, whole, tol, 50)
}

/// Maximum of f on [a, b]: dense scan then golden-section refinement.
pub fn maximize<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> (f64, f64) {
    let n = 2000;
    let step = (b - a) / n as f64;
    let (mut k_best, mut f_best) = (0, f64::NEG_INFINITY);
    for k in 0..=n {
        let v = f(a + k as f64 * step);
        if v > f_best {
            k_best = k;
            f_best = v;
        }
    }
    let mut lo = a + (k_best.max(1) - 1) as f64 * step;
    let mut hi = (a + (k_best + 1) as f64 * step).min(b);
    let g = 0.5 * (5f64.sqrt() - 1.0);
    let mut x1 = hi - g * (hi - lo);
    let mut x2 = lo + g * (hi - lo);
    let (mut f1, mut f2) = (f(x1), f(x2));
    for _ in 0..200 {
        if hi - lo < 1e-14 * (1.0 + hi.abs()) {
            break;
        }
        if f1 < f2 {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + g * (hi - lo);
            f2 = f(x2);
        } else {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - g * (hi - lo);
            f1 = f(x1);
        }
    }
    let x = 0.5 * (lo + hi);
    (x, f(x).max(f_best))
}

/// State vector of |ψ_{N−1}⟩ ∝ Σ_n σ⁻_n |e…e⟩; bit k of an index is atom k, 1 = excited.
pub fn dicke_minus_one_vector(n: usize) -> Vec<f64> {
    let dim = 1usize << n;
    let full = dim - 1;
    let mut v = vec![0.0; dim];
    for k in 0..n {
        v[full & !(1 << k)] = 1.0 / (n as f64).sqrt();
    }
    v
}

/// ⟨v| Π_{k<p} n_k Π_{p≤k<p+c} σ⁺_k Π_{p+c≤k<p+2c} σ⁻_k |v⟩ for a real state vector.
pub fn state_moment(v: &[f64], n: usize, p: usize, c: usize) -> f64 {
    assert!(p + 2 * c <= n && v.len() == 1 << n);
    let mut s = 0.0;
    for (z, &amp) in v.iter().enumerate() {
        if amp == 0.0 {
            continue;
        }
        // apply the lowering operators, then raising, then number operators
        let mut w = z;
        let mut ok = true;
        for k in p + c..p + 2 * c {
            ok &= w & (1 << k) != 0;
            w &= !(1 << k);
        }
        for k in p..p + c {
            ok &= w & (1 << k) == 0;
            w |= 1 << k;
        }
        for k in 0..p {
            ok &= w & (1 << k) != 0;
        }
        if ok {
            s += v[w] * amp;
        }
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_taylor_small_values() {
        assert_eq!(hyp1f2_half_exact(0.0), 1.0);
        // 1 + z/4 + z²/32 + 5z³/2304 + …
        let z = 1e-3;
        assert!((hyp1f2_half_exact(z) - (1.0 + z / 4.0 + z * z / 32.0 + 5.0 * z * z * z / 2304.0)).abs() < 1e-15);
    }

    #[test]
    fn simpson_polynomial() {
        let v = simpson(&|x: f64| x.powi(3) - x, 0.0, 2.0, 1e-12);
        assert!((v - 2.0).abs() < 1e-12);
    }

    #[test]
    fn maximize_parabola() {
        let (x, fx) = maximize(&|x: f64| -(x - 0.3).powi(2) + 1.0, -1.0, 2.0);
        assert!((x - 0.3).abs() < 1e-7 && (fx - 1.0).abs() < 1e-14);
    }

    #[test]
    fn dicke_vector_moments() {
        let n = 5;
        let v = dicke_minus_one_vector(n);
        assert!((state_moment(&v, n, 0, 0) - 1.0).abs() < 1e-15);
        assert!((state_moment(&v, n, 1, 0) - 0.8).abs() < 1e-15);
        assert!((state_moment(&v, n, 0, 1) - 0.2).abs() < 1e-15);
        assert!(state_moment(&v, n, 0, 2).abs() < 1e-15);
    }
}

//! Exact rational coefficient tables for the thermodynamic-limit series.
//!
//! * `c_n`: power series of P(x,t) in (x h)^n.
//! * `c_ij`: first-order correlation C₁ = e^{−t} Σ c_ij x^i y^j h^{i+j+1}.
//! * `d_ij`: homogeneous correlation term for the one-photon-removed start.
//! * `u_n`: first-order excitation correction e₁ = −e^{−t} Σ u_n x^n S_n.

use std::sync::{Arc, Mutex, OnceLock};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

pub const DEFAULT_KMAX: usize = 64;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TableKind {
    Cn,
    Cij,
    Dij,
    Ui,
}

fn q(n: i64) -> BigRational {
    BigRational::from_integer(BigInt::from(n))
}

/// c₀ = 1, c_{n+1} = c_n · 2(2n+1) / ((n+1)²(n+2)).
pub fn c_n_table(k_max: usize) -> Vec<BigRational> {
    let mut c = vec![BigRational::one()];
    for n in 0..k_max as i64 {
        let next = &c[n as usize] * q(2 * (2 * n + 1)) / q((n + 1) * (n + 1) * (n + 2));
        c.push(next);
    }
    c
}

/// Two-index table on i + j ≤ k_max from seed and denominator offset:
/// t_ij = (t_{i,j−1}/j + t_{i−1,j}/i) / (i + j + offset).
fn two_index_table(k_max: usize, seed: i64, offset: i64) -> Vec<Vec<BigRational>> {
    let mut t: Vec<Vec<BigRational>> = (0..=k_max).map(|i| vec![BigRational::zero(); k_max + 1 - i]).collect();
    t[0][0] = q(seed);
    for n in 1..=k_max {
        for i in 0..=n {
            let j = n - i;
            let mut acc = BigRational::zero();
            if j > 0 {
                acc += &t[i][j - 1] / q(j as i64);
            }
            if i > 0 {
                acc += &t[i - 1][j] / q(i as i64);
            }
            t[i][j] = acc / q(n as i64 + offset);
        }
    }
    t
}

pub fn c_ij_table(k_max: usize) -> Vec<Vec<BigRational>> {
    two_index_table(k_max, 1, 1)
}

pub fn d_ij_table(k_max: usize) -> Vec<Vec<BigRational>> {
    two_index_table(k_max, -1, 0)
}

/// u_n = 2 Σ_{i+j=n−1} c_ij/(j+1) for n ≥ 1; u₀ = 0.
pub fn u_table(cij: &[Vec<BigRational>]) -> Vec<BigRational> {
    let k_max = cij.len() - 1;
    let mut u = vec![BigRational::zero()];
    for n in 1..=k_max + 1 {
        let mut acc = BigRational::zero();
        for i in 0..n {
            let j = n - 1 - i;
            acc += &cij[i][j] / q(j as i64 + 1);
        }
        u.push(acc * q(2));
    }
    u
}

/// g_n = Σ_{i+j=n} d_ij / ((i+1)(j+1)), the doubly integrated d-series.
pub fn g_table(dij: &[Vec<BigRational>]) -> Vec<BigRational> {
    (0..dij.len())
        .map(|n| {
            let mut acc = BigRational::zero();
            for i in 0..=n {
                let j = n - i;
                acc += &dij[i][j] / q(((i + 1) * (j + 1)) as i64);
            }
            acc
        })
        .collect()
}

/// Natural log of |r| without overflowing the f64 range.
pub fn ln_abs(r: &BigRational) -> f64 {
    fn ln_big(b: &BigInt) -> f64 {
        let bits = b.bits();
        if bits < 1000 {
            b.abs().to_f64().unwrap().ln()
        } else {
            let shift = bits - 64;
            let top = (b.abs() >> shift as usize).to_f64().unwrap();
            top.ln() + shift as f64 * std::f64::consts::LN_2
        }
    }
    if r.is_zero() {
        return f64::NEG_INFINITY;
    }
    ln_big(r.numer()) - ln_big(r.denom())
}

/// A rational coefficient stored as sign and log-magnitude.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LogCoeff {
    pub sign: f64,
    pub ln_abs: f64,
}

impl LogCoeff {
    pub fn from_rational(r: &BigRational) -> Self {
        let sign = if r.is_zero() { 0.0 } else if r.is_negative() { -1.0 } else { 1.0 };
        Self { sign, ln_abs: ln_abs(r) }
    }

    /// coefficient · z^n, evaluated in log space.
    pub fn times_pow(&self, z: f64, n: usize) -> f64 {
        if self.sign == 0.0 {
            return 0.0;
        }
        if n == 0 {
            return self.sign * self.ln_abs.exp();
        }
        if z == 0.0 {
            return 0.0;
        }
        let s = if z < 0.0 && n % 2 == 1 { -self.sign } else { self.sign };
        s * (self.ln_abs + n as f64 * z.abs().ln()).exp()
    }

    pub fn value(&self) -> f64 {
        self.sign * self.ln_abs.exp()
    }
}

/// All tables at a common truncation, both exact and in float form.
#[derive(Debug)]
pub struct CoefficientTable {
    pub k_max: usize,
    pub c_n: Vec<BigRational>,
    pub c_ij: Vec<Vec<BigRational>>,
    pub d_ij: Vec<Vec<BigRational>>,
    pub u: Vec<BigRational>,
    pub g: Vec<BigRational>,
    pub c_n_f: Vec<LogCoeff>,
    pub c_ij_f: Vec<Vec<LogCoeff>>,
    pub d_ij_f: Vec<Vec<LogCoeff>>,
    pub u_f: Vec<LogCoeff>,
    pub g_f: Vec<LogCoeff>,
}

impl CoefficientTable {
    pub fn build(k_max: usize) -> Self {
        let c_n = c_n_table(k_max + 1);
        let c_ij = c_ij_table(k_max);
        let d_ij = d_ij_table(k_max);
        let u = u_table(&c_ij);
        let g = g_table(&d_ij);
        let conv = |v: &[BigRational]| v.iter().map(LogCoeff::from_rational).collect::<Vec<_>>();
        Self {
            k_max,
            c_n_f: conv(&c_n),
            c_ij_f: c_ij.iter().map(|r| conv(r)).collect(),
            d_ij_f: d_ij.iter().map(|r| conv(r)).collect(),
            u_f: conv(&u),
            g_f: conv(&g),
            c_n,
            c_ij,
            d_ij,
            u,
            g,
        }
    }

    /// Exact entry of a table; for one-index kinds `j` is ignored.
    pub fn get(&self, kind: TableKind, i: usize, j: usize) -> Option<&BigRational> {
        match kind {
            TableKind::Cn => self.c_n.get(i),
            TableKind::Ui => self.u.get(i),
            TableKind::Cij => self.c_ij.get(i).and_then(|r| r.get(j)),
            TableKind::Dij => self.d_ij.get(i).and_then(|r| r.get(j)),
        }
    }
}

static CACHE: OnceLock<Mutex<Option<Arc<CoefficientTable>>>> = OnceLock::new();

/// Shared table with at least `k_max` orders; built once and grown on demand.
pub fn tables(k_max: usize) -> Arc<CoefficientTable> {
    let cell = CACHE.get_or_init(|| Mutex::new(None));
    let mut guard = cell.lock().unwrap_or_else(|e| e.into_inner());
    if let Some(t) = guard.as_ref() {
        if t.k_max >= k_max {
            return Arc::clone(t);
        }
    }
    let t = Arc::new(CoefficientTable::build(k_max.max(DEFAULT_KMAX)));
    *guard = Some(Arc::clone(&t));
    t
}

#[cfg(test)]
mod tests {
    use super::*;

    fn r(n: i64, d: i64) -> BigRational {
        BigRational::new(BigInt::from(n), BigInt::from(d))
    }

    #[test]
    fn c_n_prefix() {
        let c = c_n_table(7);
        let want = [r(1, 1), r(1, 1), r(1, 2), r(5, 36), r(7, 288), r(7, 2400), r(11, 43200), r(143, 8467200)];
        assert_eq!(c, want);
    }

    #[test]
    fn cij_edges_and_symmetry() {
        let t = c_ij_table(12);
        assert_eq!(t[0][0], r(1, 1));
        assert_eq!(t[0][1], r(1, 2));
        assert_eq!(t[1][1], r(1, 3));
        for i in 0..=12 {
            for j in 0..=12 - i {
                assert_eq!(t[i][j], t[j][i]);
            }
        }
    }

    #[test]
    fn dij_seed_and_edges() {
        let t = d_ij_table(10);
        assert_eq!(t[0][0], r(-1, 1));
        assert_eq!(t[0][1], r(-1, 1));
        assert_eq!(t[0][2], r(-1, 4));
        assert_eq!(t[1][1], r(-1, 1));
    }

    #[test]
    fn u_prefix() {
        let u = u_table(&c_ij_table(6));
        assert_eq!(&u[1..5], &[r(2, 1), r(3, 2), r(5, 9), r(35, 288)]);
    }

    #[test]
    fn log_coeff_roundtrip() {
        let c = LogCoeff::from_rational(&r(-7, 288));
        assert!((c.value() + 7.0 / 288.0).abs() < 1e-17);
        assert!((c.times_pow(-2.0, 3) - 8.0 * 7.0 / 288.0).abs() < 1e-15);
    }

    #[test]
    fn cache_grows() {
        let a = tables(10);
        assert!(a.k_max >= DEFAULT_KMAX);
        let b = tables(DEFAULT_KMAX + 4);
        assert!(b.k_max >= DEFAULT_KMAX + 4);
    }
}

//! Closed-form predictions and independent oracles: the series `S`, `T`,
//! `Q_g`, `b_g`, the one-psi generator, and Witten's numbers via DVV.

use std::collections::HashMap;
use std::sync::{LazyLock, RwLock};

use num_bigint::BigInt;
use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::scalar::{rat_int, Rational};
use crate::series::{PowerSeries, RatPoly};

fn factorial(n: u64) -> BigInt {
    (1..=n).fold(BigInt::one(), |acc, k| acc * BigInt::from(k))
}

/// `(2k−1)!!` with `(−1)!! = 1`.
fn odd_df(k: i64) -> Rational {
    let mut acc = BigInt::one();
    let mut m = 2 * k - 1;
    while m > 1 {
        acc *= BigInt::from(m);
        m -= 2;
    }
    Rational::from_integer(acc)
}

/// `S(z) = Σ z^{2k}/(2^{2k}(2k+1)!)` up to `z^order`.
pub fn series_s(order: usize) -> PowerSeries<Rational> {
    let mut v = vec![Rational::zero(); order + 1];
    for k in (0..=order).step_by(2) {
        let den = BigInt::from(2).pow(k as u32) * factorial(k as u64 + 1);
        v[k] = Rational::new(BigInt::one(), den);
    }
    PowerSeries::new(v, order)
}

/// `S(az)` with coefficients polynomial in `a`.
fn series_s_scaled(order: usize) -> PowerSeries<RatPoly> {
    let s = series_s(order);
    PowerSeries::new(
        (0..=order).map(|k| RatPoly::monomial(s.coeff(k), k)).collect(),
        order,
    )
}

/// `T(a,z) = S(z)/S(az)` with coefficients polynomial in `a`.
pub fn series_t_poly(order: usize) -> PowerSeries<RatPoly> {
    series_s(order)
        .map(|c| RatPoly::constant(c.clone()))
        .mul(&series_s_scaled(order).inv())
}

/// `T(a,z)` at a concrete `a`.
pub fn series_t(a: i64, order: usize) -> PowerSeries<Rational> {
    let s = series_s(order);
    let sa = s.rescale(&rat_int(a));
    s.mul(&sa.inv())
}

/// `Q_g(a)`, the `z^{2g}` coefficient of `T(a,z)`.
pub fn q_poly(g: usize) -> RatPoly {
    series_t_poly(2 * g).coeff(2 * g)
}

/// The `z^{2h}` coefficient of `S(az)/S(z) = 1/T(a,z)`.
pub fn q_inverse_poly(h: usize) -> RatPoly {
    let order = 2 * h;
    let s_inv = series_s(order).map(|c| RatPoly::constant(c.clone())).inv();
    series_s_scaled(order).mul(&s_inv).coeff(order)
}

/// `1/S(iz) = 1 + Σ b_g z^{2g}`.
pub fn series_bg(order: usize) -> PowerSeries<Rational> {
    series_s_i(order).inv()
}

/// `S(iz)`, real since only even powers occur.
pub fn series_s_i(order: usize) -> PowerSeries<Rational> {
    let s = series_s(order);
    PowerSeries::new(
        (0..=order)
            .map(|k| {
                let c = s.coeff(k);
                if k % 4 == 2 {
                    -c
                } else {
                    c
                }
            })
            .collect(),
        order,
    )
}

/// Coefficient of `z^{3g}` in `exp(z³/24)`, i.e. `1/(24^g g!)`.
pub fn one_point_witten(g: u32) -> Rational {
    Rational::new(
        BigInt::one(),
        BigInt::from(24).pow(g) * factorial(g as u64),
    )
}

/// Predicted `∫ 2^{-j} P_g^j(a,−a) ψ₁^{3g−1−j}`: the `μ^{2j} z^{3g−1−j}`
/// coefficient of `(1/z)(S(aμz)/S(μz)·e^{z³/24} − 1)`.
pub fn one_psi_pixton(g: u32, j: u32, a: i64) -> Result<Rational> {
    if g == 0 || j > g {
        return Err(Error::OutOfRange(format!("one-psi needs 0 ≤ j ≤ g, g ≥ 1; got g={g}, j={j}")));
    }
    // the μ^{2j} part pairs z^{2j} of the ratio with z^{3(g−j)} of the exponential
    Ok(q_inverse_poly(j as usize).eval_int(a) * one_point_witten(g - j))
}

/// `T^j_g(a)`, predicted `∫ 2^{-j} P_g^j(a,−a,0) ψ₁^{3g−j}`.
pub fn one_psi_three_point(g: u32, j: u32, a: i64) -> Result<Rational> {
    if j > g {
        return Err(Error::OutOfRange(format!("j={j} exceeds g={g}")));
    }
    if g == 0 {
        return Ok(Rational::one());
    }
    one_psi_pixton(g, j, a)
}

/// Predicted `∫ DR_g(a,−a) ψ₁^{2g−1}`: the `μ^{2g}` coefficient of `S(aμ)/S(μ) − 1`.
pub fn bssz(g: u32, a: i64) -> Result<Rational> {
    if g == 0 {
        return Err(Error::OutOfRange("bssz needs g ≥ 1".into()));
    }
    Ok(q_inverse_poly(g as usize).eval_int(a))
}

/// `R^j_g(a) = Σ_h T^{j−h}_{g−h}(a) Q_h(a)` from supplied `T` values, compared
/// with `δ_{j,0}/(24^g g!)`.
pub fn check_rjg(
    g: u32,
    j: u32,
    a: i64,
    t_value: impl Fn(u32, u32) -> Option<Rational>,
) -> Result<bool> {
    Ok(rjg(g, j, a, t_value)? == rjg_expected(g, j))
}

pub fn rjg(g: u32, j: u32, a: i64, t_value: impl Fn(u32, u32) -> Option<Rational>) -> Result<Rational> {
    if j > g {
        return Err(Error::OutOfRange(format!("j={j} exceeds g={g}")));
    }
    let mut r = Rational::zero();
    for h in 0..=j {
        let t = t_value(g - h, j - h)
            .ok_or_else(|| Error::MissingEntry(format!("T^{}_{} at a={}", j - h, g - h, a)))?;
        r += t * q_poly(h as usize).eval_int(a);
    }
    Ok(r)
}

pub fn rjg_expected(g: u32, j: u32) -> Rational {
    if j == 0 {
        one_point_witten(g)
    } else {
        Rational::zero()
    }
}

type DvvKey = (u32, Vec<u32>);

static DVV: LazyLock<RwLock<HashMap<DvvKey, Rational>>> =
    LazyLock::new(|| RwLock::new(HashMap::new()));

/// `⟨τ_{d_1}⋯τ_{d_n}⟩_g` by string, dilaton and the DVV recursion.
pub fn dvv_intersection(g: u32, d: &[u32]) -> Rational {
    let mut d = d.to_vec();
    d.sort_unstable();
    dvv(g, d)
}

fn dvv(g: u32, d: Vec<u32>) -> Rational {
    let n = d.len() as i64;
    let total: i64 = d.iter().map(|&x| x as i64).sum();
    if 2 * g as i64 - 2 + n <= 0 || total != 3 * g as i64 - 3 + n {
        return Rational::zero();
    }
    if let Some(v) = DVV.read().expect("dvv lock").get(&(g, d.clone())) {
        return v.clone();
    }
    let v = dvv_compute(g, &d);
    DVV.write()
        .expect("dvv lock")
        .insert((g, d), v.clone());
    v
}

fn dvv_compute(g: u32, d: &[u32]) -> Rational {
    if g == 0 && d == [0, 0, 0] {
        return Rational::one();
    }
    if g == 1 && d == [1] {
        return rat_int(1) / rat_int(24);
    }
    if d[0] == 0 {
        // string equation
        let rest = &d[1..];
        let mut acc = Rational::zero();
        for i in 0..rest.len() {
            if rest[i] > 0 {
                let mut e = rest.to_vec();
                e[i] -= 1;
                e.sort_unstable();
                acc += dvv(g, e);
            }
        }
        return acc;
    }
    if let Some(pos) = d.iter().position(|&x| x == 1) {
        let mut rest = d.to_vec();
        rest.remove(pos);
        let factor = 2 * g as i64 - 2 + rest.len() as i64;
        return rat_int(factor) * dvv(g, rest);
    }
    // DVV on the largest index τ_{k+1}
    let k = (*d.last().expect("nonempty") - 1) as i64;
    let rest = &d[..d.len() - 1];
    let mut acc = Rational::zero();
    for i in 0..rest.len() {
        let dj = rest[i] as i64;
        let mut e = rest.to_vec();
        e[i] += k as u32;
        e.sort_unstable();
        acc += odd_df(k + dj + 1) / odd_df(dj) * dvv(g, e);
    }
    let half = Rational::new(BigInt::one(), BigInt::from(2));
    for r in 0..k {
        let s = k - 1 - r;
        let w = odd_df(r + 1) * odd_df(s + 1) * &half;
        if g >= 1 {
            let mut e = rest.to_vec();
            e.push(r as u32);
            e.push(s as u32);
            e.sort_unstable();
            acc += &w * dvv(g - 1, e);
        }
        let m = rest.len();
        for mask in 0..(1u64 << m) {
            let (mut left, mut right) = (vec![r as u32], vec![s as u32]);
            for (i, &x) in rest.iter().enumerate() {
                if mask >> i & 1 == 1 {
                    left.push(x);
                } else {
                    right.push(x);
                }
            }
            left.sort_unstable();
            right.sort_unstable();
            for g1 in 0..=g {
                let a = dvv(g1, left.clone());
                if a.is_zero() {
                    continue;
                }
                acc += &w * a * dvv(g - g1, right.clone());
            }
        }
    }
    acc / odd_df(k + 2)
}

/// Polynomial coefficients of `T(a,z)` and `1/T(a,z)` as series in `z`.
pub fn t_inverse_identity(a: i64, order: usize) -> bool {
    let t = series_t(a, order);
    t.mul(&t.inv()) == PowerSeries::one(order)
}

//! Truncated power series in one variable over a small coefficient ring, and
//! univariate rational polynomials used as coefficients.

use std::fmt;

use num_traits::{One, Signed, Zero};

use crate::scalar::{format_rational, Rational, Scalar};

/// The coefficient operations power series need.
pub trait Coeff: Clone + PartialEq + fmt::Debug {
    fn zero() -> Self;
    fn one() -> Self;
    fn is_zero(&self) -> bool;
    fn add(&self, o: &Self) -> Self;
    fn sub(&self, o: &Self) -> Self;
    fn mul(&self, o: &Self) -> Self;
    fn scale(&self, r: &Rational) -> Self;
}

impl Coeff for Rational {
    fn zero() -> Self {
        Zero::zero()
    }
    fn one() -> Self {
        One::one()
    }
    fn is_zero(&self) -> bool {
        Zero::is_zero(self)
    }
    fn add(&self, o: &Self) -> Self {
        self + o
    }
    fn sub(&self, o: &Self) -> Self {
        self - o
    }
    fn mul(&self, o: &Self) -> Self {
        self * o
    }
    fn scale(&self, r: &Rational) -> Self {
        self * r
    }
}

impl Coeff for Scalar {
    fn zero() -> Self {
        Zero::zero()
    }
    fn one() -> Self {
        One::one()
    }
    fn is_zero(&self) -> bool {
        Zero::is_zero(self)
    }
    fn add(&self, o: &Self) -> Self {
        self + o
    }
    fn sub(&self, o: &Self) -> Self {
        self - o
    }
    fn mul(&self, o: &Self) -> Self {
        self * o
    }
    fn scale(&self, r: &Rational) -> Self {
        Scalar::scale(self, r)
    }
}

/// Polynomial in one variable `a` with rational coefficients, lowest degree first.
#[derive(Clone, PartialEq, Eq, Hash, Default)]
pub struct RatPoly {
    coeffs: Vec<Rational>,
}

impl RatPoly {
    pub fn new(mut coeffs: Vec<Rational>) -> Self {
        while coeffs.last().is_some_and(Zero::is_zero) {
            coeffs.pop();
        }
        RatPoly { coeffs }
    }

    pub fn constant(c: Rational) -> Self {
        Self::new(vec![c])
    }

    /// `c·a^k`.
    pub fn monomial(c: Rational, k: usize) -> Self {
        let mut v = vec![<Rational as Zero>::zero(); k + 1];
        v[k] = c;
        Self::new(v)
    }

    pub fn coeffs(&self) -> &[Rational] {
        &self.coeffs
    }

    pub fn coeff(&self, k: usize) -> Rational {
        self.coeffs.get(k).cloned().unwrap_or_else(<Rational as Zero>::zero)
    }

    /// Degree, or `None` for the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn eval(&self, a: &Rational) -> Rational {
        self.coeffs
            .iter()
            .rev()
            .fold(<Rational as Zero>::zero(), |acc, c| acc * a + c)
    }

    pub fn eval_int(&self, a: i64) -> Rational {
        self.eval(&Rational::from_integer(a.into()))
    }

    pub fn is_even(&self) -> bool {
        self.coeffs.iter().skip(1).step_by(2).all(Zero::is_zero)
    }

    /// Lagrange interpolation through `(x_i, y_i)`.
    pub fn interpolate(points: &[(Rational, Rational)]) -> Self {
        let mut acc = RatPoly::default();
        for (i, (xi, yi)) in points.iter().enumerate() {
            let mut basis = RatPoly::constant(<Rational as One>::one());
            let mut denom = <Rational as One>::one();
            for (j, (xj, _)) in points.iter().enumerate() {
                if i != j {
                    basis = Coeff::mul(&basis, &RatPoly::new(vec![-xj.clone(), <Rational as One>::one()]));
                    denom *= xi - xj;
                }
            }
            acc = Coeff::add(&acc, &basis.scale(&(yi / denom)));
        }
        acc
    }
}

impl Coeff for RatPoly {
    fn zero() -> Self {
        RatPoly::default()
    }
    fn one() -> Self {
        RatPoly::constant(<Rational as One>::one())
    }
    fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }
    fn add(&self, o: &Self) -> Self {
        let n = self.coeffs.len().max(o.coeffs.len());
        RatPoly::new((0..n).map(|k| self.coeff(k) + o.coeff(k)).collect())
    }
    fn sub(&self, o: &Self) -> Self {
        let n = self.coeffs.len().max(o.coeffs.len());
        RatPoly::new((0..n).map(|k| self.coeff(k) - o.coeff(k)).collect())
    }
    fn mul(&self, o: &Self) -> Self {
        if self.coeffs.is_empty() || o.coeffs.is_empty() {
            return RatPoly::default();
        }
        let mut v = vec![<Rational as Zero>::zero(); self.coeffs.len() + o.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            for (j, b) in o.coeffs.iter().enumerate() {
                v[i + j] += a * b;
            }
        }
        RatPoly::new(v)
    }
    fn scale(&self, r: &Rational) -> Self {
        RatPoly::new(self.coeffs.iter().map(|c| c * r).collect())
    }
}

impl fmt::Display for RatPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.coeffs.is_empty() {
            return write!(f, "0");
        }
        let mut first = true;
        for (k, c) in self.coeffs.iter().enumerate() {
            if Zero::is_zero(c) {
                continue;
            }
            let sign = if c.is_negative() { "-" } else { "+" };
            if first {
                if c.is_negative() {
                    write!(f, "-")?;
                }
            } else {
                write!(f, " {} ", sign)?;
            }
            first = false;
            let abs = c.abs();
            match k {
                0 => write!(f, "{}", format_rational(&abs))?,
                _ => {
                    if !abs.is_one() {
                        write!(f, "{}*", format_rational(&abs))?;
                    }
                    if k == 1 {
                        write!(f, "a")?;
                    } else {
                        write!(f, "a^{}", k)?;
                    }
                }
            }
        }
        Ok(())
    }
}

impl fmt::Debug for RatPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

/// `Σ_{k ≤ order} c_k z^k`, known up to and including `z^order`.
#[derive(Clone, PartialEq, Debug)]
pub struct PowerSeries<C: Coeff> {
    coeffs: Vec<C>,
    order: usize,
}

impl<C: Coeff> PowerSeries<C> {
    pub fn new(mut coeffs: Vec<C>, order: usize) -> Self {
        coeffs.truncate(order + 1);
        while coeffs.last().is_some_and(C::is_zero) {
            coeffs.pop();
        }
        PowerSeries { coeffs, order }
    }

    pub fn one(order: usize) -> Self {
        Self::new(vec![C::one()], order)
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn coeff(&self, k: usize) -> C {
        assert!(k <= self.order, "coefficient beyond known order");
        self.coeffs.get(k).cloned().unwrap_or_else(C::zero)
    }

    pub fn mul(&self, o: &Self) -> Self {
        let order = self.order.min(o.order);
        let mut v = vec![C::zero(); order + 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            for (j, b) in o.coeffs.iter().enumerate() {
                if i + j > order {
                    break;
                }
                v[i + j] = v[i + j].add(&a.mul(b));
            }
        }
        Self::new(v, order)
    }

    /// Multiplicative inverse; the constant term must be one.
    pub fn inv(&self) -> Self {
        assert!(self.coeff(0) == C::one(), "inversion needs unit constant term");
        let mut v: Vec<C> = vec![C::one()];
        for k in 1..=self.order {
            let mut s = C::zero();
            for i in 1..=k {
                s = s.add(&self.coeff(i).mul(&v[k - i]));
            }
            v.push(C::zero().sub(&s));
        }
        Self::new(v, self.order)
    }

    /// `f(c·z)`.
    pub fn rescale(&self, c: &C) -> Self {
        let mut pow = C::one();
        let mut v = Vec::new();
        for k in 0..=self.order {
            v.push(self.coeff(k).mul(&pow));
            pow = pow.mul(c);
        }
        Self::new(v, self.order)
    }

    pub fn map<D: Coeff>(&self, f: impl Fn(&C) -> D) -> PowerSeries<D> {
        PowerSeries::new((0..=self.order).map(|k| f(&self.coeff(k))).collect(), self.order)
    }
}

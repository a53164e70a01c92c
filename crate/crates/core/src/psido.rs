//! Truncated pseudo-differential operators `Σ a_i ∂x^i` with differential
//! polynomial coefficients.

use std::collections::BTreeMap;

use num_traits::{One, Zero};
use serde_json::json;

use crate::diffpoly::{moyal_cap, moyal_tables, mul_acc, DerivTable, DiffPoly2, Window};
use crate::error::{Error, ParseError, Result};
use crate::scalar::{rat_int, Rational, Scalar};

/// How coefficients multiply inside a composition.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum CoeffProduct {
    Moyal,
    Commutative,
}

/// Orders below `depth_floor` are discarded, as are monomials with
/// `ε`-exponent above `eps_max`, `μ`-exponent above `mu_max`, or more than
/// `dx_max` x-derivatives in total.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Truncation {
    pub depth_floor: i32,
    pub eps_max: i32,
    pub mu_max: u32,
    pub dx_max: Option<u32>,
}

impl Truncation {
    /// `mu_max` defaults to `eps_max`.
    pub fn new(depth_floor: i32, eps_max: i32) -> Self {
        Truncation {
            depth_floor,
            eps_max,
            mu_max: eps_max.max(0) as u32,
            dx_max: None,
        }
    }

    pub fn with_mu_max(self, mu_max: u32) -> Self {
        Truncation { mu_max, ..self }
    }

    /// Default window for flow `n`.
    pub fn for_flow(n: u32) -> Self {
        Self::new(-(2 * n as i32 + 3), 2 * n as i32 + 2)
    }

    /// Two orders deeper and two `ε`/`μ` powers wider.
    pub fn deepened(self) -> Self {
        Truncation {
            depth_floor: self.depth_floor - 2,
            eps_max: self.eps_max + 2,
            mu_max: self.mu_max + 2,
            dx_max: self.dx_max.map(|x| x + 2),
        }
    }

    pub fn is_valid(&self) -> bool {
        self.depth_floor <= 0 && self.eps_max >= 0
    }

    pub fn to_json_value(&self) -> serde_json::Value {
        let mut v = json!({"depth": self.depth_floor, "eps_max": self.eps_max, "mu_max": self.mu_max});
        if let Some(x) = self.dx_max {
            v["dx_max"] = json!(x);
        }
        v
    }

    pub fn from_json_value(v: &serde_json::Value) -> Result<Self, ParseError> {
        let int = |k: &str| {
            v.get(k)
                .and_then(serde_json::Value::as_i64)
                .ok_or_else(|| ParseError::Json(format!("missing integer `{}`", k)))
        };
        let depth = int("depth")? as i32;
        let eps = int("eps_max")? as i32;
        let mut t = Truncation::new(depth, eps);
        if v.get("mu_max").is_some() {
            t.mu_max = int("mu_max")? as u32;
        }
        if v.get("dx_max").is_some() {
            t.dx_max = Some(int("dx_max")? as u32);
        }
        Ok(t)
    }
}

/// Generalized binomial coefficient `i(i−1)⋯(i−k+1)/k!` for any integer `i`.
pub fn binomial(i: i64, k: u32) -> Rational {
    let mut num = Rational::one();
    for t in 0..k as i64 {
        num *= rat_int(i - t);
        num /= rat_int(t + 1);
    }
    num
}

#[derive(Clone, PartialEq, Eq, Debug)]
pub struct PsiDO {
    coeffs: BTreeMap<i32, DiffPoly2>,
    trunc: Truncation,
    product: CoeffProduct,
}

impl PsiDO {
    pub fn zero(trunc: Truncation, product: CoeffProduct) -> Self {
        PsiDO {
            coeffs: BTreeMap::new(),
            trunc,
            product,
        }
    }

    pub fn from_coeffs<I: IntoIterator<Item = (i32, DiffPoly2)>>(
        trunc: Truncation,
        product: CoeffProduct,
        it: I,
    ) -> Self {
        let mut op = Self::zero(trunc, product);
        for (i, a) in it {
            op.add_coeff(i, &a);
        }
        op
    }

    pub fn identity(trunc: Truncation, product: CoeffProduct) -> Self {
        Self::d(0, trunc, product)
    }

    /// `∂x^k`.
    pub fn d(k: i32, trunc: Truncation, product: CoeffProduct) -> Self {
        Self::from_coeffs(trunc, product, [(k, DiffPoly2::one())])
    }

    /// Multiplication operator `f ∂x^0`.
    pub fn mul_op(f: DiffPoly2, trunc: Truncation, product: CoeffProduct) -> Self {
        Self::from_coeffs(trunc, product, [(0, f)])
    }

    pub fn trunc(&self) -> Truncation {
        self.trunc
    }

    pub fn product(&self) -> CoeffProduct {
        self.product
    }

    pub fn top_order(&self) -> Option<i32> {
        self.coeffs.keys().next_back().copied()
    }

    pub fn coeff(&self, i: i32) -> DiffPoly2 {
        self.coeffs.get(&i).cloned().unwrap_or_default()
    }

    pub fn coeffs(&self) -> &BTreeMap<i32, DiffPoly2> {
        &self.coeffs
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    fn window(&self) -> Window {
        Window {
            mu_max: Some(self.trunc.mu_max),
            dx_max: self.trunc.dx_max,
        }
    }

    fn clip(&self, a: &DiffPoly2) -> DiffPoly2 {
        let t = self.trunc;
        self.window().apply(&a.truncate(Some(t.eps_max), None))
    }

    fn add_coeff(&mut self, i: i32, a: &DiffPoly2) {
        if i < self.trunc.depth_floor {
            return;
        }
        let a = self.clip(a);
        let e = self.coeffs.entry(i).or_default();
        e.add_assign(&a);
        if e.is_zero() {
            self.coeffs.remove(&i);
        }
    }

    fn check(&self, o: &PsiDO) -> Result<()> {
        if self.trunc != o.trunc || self.product != o.product {
            return Err(Error::TruncationMismatch);
        }
        Ok(())
    }

    pub fn add(&self, o: &PsiDO) -> Result<PsiDO> {
        self.check(o)?;
        let mut out = self.clone();
        for (i, a) in &o.coeffs {
            out.add_coeff(*i, a);
        }
        Ok(out)
    }

    pub fn sub(&self, o: &PsiDO) -> Result<PsiDO> {
        self.add(&o.scale(&-Scalar::one()))
    }

    pub fn scale(&self, c: &Scalar) -> PsiDO {
        let mut out = Self::zero(self.trunc, self.product);
        for (i, a) in &self.coeffs {
            out.add_coeff(*i, &a.scale(c));
        }
        out
    }

    /// Multiplies every coefficient by `ε^de μ^dm`.
    pub fn shift(&self, de: i32, dm: u32) -> PsiDO {
        let mut out = Self::zero(self.trunc, self.product);
        for (i, a) in &self.coeffs {
            out.add_coeff(*i, &a.shift(de, dm));
        }
        out
    }

    /// Keeps orders `≥ min_order`. A composition of truncated operators is
    /// exact only above `depth_floor` plus the other factor's top order.
    pub fn orders_from(&self, min_order: i32) -> PsiDO {
        PsiDO {
            coeffs: self
                .coeffs
                .range(min_order..)
                .map(|(i, a)| (*i, a.clone()))
                .collect(),
            trunc: self.trunc,
            product: self.product,
        }
    }

    pub fn positive_part(&self) -> PsiDO {
        PsiDO {
            coeffs: self.coeffs.range(0..).map(|(i, a)| (*i, a.clone())).collect(),
            trunc: self.trunc,
            product: self.product,
        }
    }

    /// Accumulates `scale · a ∘' (∂x^k b)` into `out`, where `∘'` is the
    /// coefficient product.
    fn star_shifted(&self, ta: &DerivTable, tb: &DerivTable, k: u32, scale: &Scalar, out: &mut DiffPoly2) {
        let mu = self.trunc.mu_max;
        match self.product {
            CoeffProduct::Moyal => {
                if let Some(cap) = moyal_cap(ta.base(), tb.base(), mu) {
                    moyal_tables(ta, tb, k, cap, self.window(), out, scale);
                }
            }
            CoeffProduct::Commutative => mul_acc(ta.base(), tb.at(k, 0), self.window(), out, scale),
        }
    }

    fn tables(&self) -> BTreeMap<i32, DerivTable> {
        self.coeffs
            .iter()
            .map(|(i, a)| (*i, DerivTable::windowed(a.clone(), self.window())))
            .collect()
    }

    fn prepare(&self, tables: &mut BTreeMap<i32, DerivTable>, x_extra: u32) {
        let mu = self.trunc.mu_max;
        for t in tables.values_mut() {
            let cap = match self.product {
                CoeffProduct::Moyal => mu.saturating_sub(t.base().min_mu().unwrap_or(0)),
                CoeffProduct::Commutative => 0,
            };
            t.ensure(x_extra, cap);
        }
    }

    /// `A ∘ B` using `(a∂^i)∘(b∂^j) = Σ_k C(i,k) (a ∘' ∂x^k b) ∂^{i+j−k}`.
    pub fn compose(&self, o: &PsiDO) -> Result<PsiDO> {
        self.check(o)?;
        let floor = self.trunc.depth_floor;
        let mut ta = self.tables();
        let mut tb = o.tables();
        let (Some(atop), Some(btop)) = (self.top_order(), o.top_order()) else {
            return Ok(Self::zero(self.trunc, self.product));
        };
        let mut kmax = (atop + btop - floor).max(0) as u32;
        if let Some(&lowest) = self.coeffs.keys().next() {
            if lowest >= 0 {
                kmax = kmax.min(atop as u32);
            }
        }
        self.prepare(&mut ta, 0);
        self.prepare(&mut tb, kmax);
        let mut acc: BTreeMap<i32, DiffPoly2> = BTreeMap::new();
        for (i, a) in &ta {
            for (j, b) in &tb {
                for k in 0..=((i + j - floor).max(-1)) {
                    let c = binomial(*i as i64, k as u32);
                    if c.is_zero() {
                        break;
                    }
                    let out = acc.entry(i + j - k).or_default();
                    self.star_shifted(a, b, k as u32, &Scalar::real(c), out);
                }
            }
        }
        Ok(Self::from_coeffs(self.trunc, self.product, acc))
    }

    /// The `∂x^m` coefficient of `A ∘ B` alone.
    pub fn compose_order(&self, o: &PsiDO, m: i32) -> Result<DiffPoly2> {
        self.check(o)?;
        let mut ta = self.tables();
        let mut tb = o.tables();
        let kmax = match (self.top_order(), o.top_order()) {
            (Some(a), Some(b)) => (a + b - m).max(0) as u32,
            _ => return Ok(DiffPoly2::zero()),
        };
        self.prepare(&mut ta, 0);
        self.prepare(&mut tb, kmax);
        let mut out = DiffPoly2::zero();
        for (i, a) in &ta {
            for (j, b) in &tb {
                let k = i + j - m;
                if k < 0 {
                    continue;
                }
                let c = binomial(*i as i64, k as u32);
                if !c.is_zero() {
                    self.star_shifted(a, b, k as u32, &Scalar::real(c), &mut out);
                }
            }
        }
        Ok(self.clip(&out))
    }

    pub fn commutator(&self, o: &PsiDO) -> Result<PsiDO> {
        self.compose(o)?.sub(&o.compose(self)?)
    }

    /// The unique `B = ∂x + Σ_{i<1} b_i ∂x^i` with `B ∘ B = A`, solved from the
    /// top order down.
    pub fn sqrt(&self) -> Result<PsiDO> {
        if self.top_order() != Some(2) || self.coeff(2) != DiffPoly2::one() {
            return Err(Error::NotMonicOrderTwo);
        }
        let floor = self.trunc.depth_floor;
        let mu = self.trunc.mu_max;
        let kx = (2 - floor).max(0) as u32;
        let mut b: BTreeMap<i32, DerivTable> = BTreeMap::new();
        let cap_of = |t: &DerivTable| match self.product {
            CoeffProduct::Moyal => mu.saturating_sub(t.base().min_mu().unwrap_or(0)),
            CoeffProduct::Commutative => 0,
        };
        let mut one = DerivTable::windowed(DiffPoly2::one(), self.window());
        one.ensure(kx, cap_of(&one));
        b.insert(1, one);
        let half = Scalar::from_frac(1, 2);
        for m in (floor + 1..=1).rev() {
            // order-m coefficient of B∘B with b_{m−1} still unknown
            let mut c = DiffPoly2::zero();
            for (i, ti) in &b {
                for (j, tj) in &b {
                    let k = i + j - m;
                    if k < 0 {
                        continue;
                    }
                    let coef = binomial(*i as i64, k as u32);
                    if !coef.is_zero() {
                        self.star_shifted(ti, tj, k as u32, &Scalar::real(coef), &mut c);
                    }
                }
            }
            let next = self.clip(&self.coeff(m).sub(&c).scale(&half));
            if !next.is_zero() {
                let mut t = DerivTable::windowed(next, self.window());
                let cap = cap_of(&t);
                t.ensure(kx, cap);
                b.insert(m - 1, t);
            }
        }
        Ok(Self::from_coeffs(
            self.trunc,
            self.product,
            b.into_iter().map(|(i, t)| (i, t.base().clone())),
        ))
    }

    pub fn to_json_value(&self) -> serde_json::Value {
        let coeffs: serde_json::Map<String, serde_json::Value> = self
            .coeffs
            .iter()
            .map(|(i, a)| (i.to_string(), a.to_json_value()))
            .collect();
        json!({
            "top_order": self.top_order(),
            "coeffs": coeffs,
            "trunc": self.trunc.to_json_value(),
        })
    }

    pub fn from_json_value(v: &serde_json::Value, product: CoeffProduct) -> Result<Self, ParseError> {
        let trunc = Truncation::from_json_value(
            v.get("trunc")
                .ok_or_else(|| ParseError::Json("missing `trunc`".into()))?,
        )?;
        let map = v
            .get("coeffs")
            .and_then(serde_json::Value::as_object)
            .ok_or_else(|| ParseError::Json("missing `coeffs`".into()))?;
        let mut op = Self::zero(trunc, product);
        for (k, c) in map {
            let i: i32 = k
                .parse()
                .map_err(|_| ParseError::Invalid(format!("order `{}`", k)))?;
            op.add_coeff(i, &DiffPoly2::from_json_value(c)?);
        }
        Ok(op)
    }
}

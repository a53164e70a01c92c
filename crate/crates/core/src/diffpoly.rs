//! Graded differential polynomials in `u_{k1,k2} = ∂x^{k1}∂y^{k2}u` over the
//! Gaussian rationals, with formal parameters `ε` and `μ`.
//!
//! Values are stored fully expanded in commutative canonical form. The Moyal
//! product is an operation producing such a form.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, ParseError, Result};
use crate::linalg::{RowOutcome, Rref, SparseRow};
use crate::scalar::{format_rational, parse_rational, rat_int, Rational, Scalar};

/// `ε^eps μ^mu Π u_{k1,k2}`, with `vars` sorted (repeats allowed).
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Monomial2 {
    pub eps: i32,
    pub mu: u32,
    pub vars: Vec<(u32, u32)>,
}

impl Monomial2 {
    pub fn new(eps: i32, mu: u32, mut vars: Vec<(u32, u32)>) -> Self {
        vars.sort_unstable();
        Monomial2 { eps, mu, vars }
    }

    pub fn one() -> Self {
        Monomial2 {
            eps: 0,
            mu: 0,
            vars: Vec::new(),
        }
    }

    /// Number of `u`-factors.
    pub fn arity(&self) -> usize {
        self.vars.len()
    }

    /// `(Σk1 − eps, Σk2 − mu)`.
    pub fn degree(&self) -> (i64, i64) {
        let (s1, s2) = self.derivative_counts();
        (s1 - self.eps as i64, s2 - self.mu as i64)
    }

    /// `(Σk1, Σk2)`.
    pub fn derivative_counts(&self) -> (i64, i64) {
        self.vars.iter().fold((0, 0), |(a, b), &(k1, k2)| {
            (a + k1 as i64, b + k2 as i64)
        })
    }

    pub fn mul(&self, o: &Monomial2) -> Monomial2 {
        let mut vars = Vec::with_capacity(self.vars.len() + o.vars.len());
        let (mut i, mut j) = (0, 0);
        while i < self.vars.len() && j < o.vars.len() {
            if self.vars[i] <= o.vars[j] {
                vars.push(self.vars[i]);
                i += 1;
            } else {
                vars.push(o.vars[j]);
                j += 1;
            }
        }
        vars.extend_from_slice(&self.vars[i..]);
        vars.extend_from_slice(&o.vars[j..]);
        Monomial2 {
            eps: self.eps + o.eps,
            mu: self.mu + o.mu,
            vars,
        }
    }

    /// Variables grouped as `(k1, k2, power)`.
    pub fn powers(&self) -> Vec<(u32, u32, u32)> {
        let mut out: Vec<(u32, u32, u32)> = Vec::new();
        for &(k1, k2) in &self.vars {
            match out.last_mut() {
                Some(last) if last.0 == k1 && last.1 == k2 => last.2 += 1,
                _ => out.push((k1, k2, 1)),
            }
        }
        out
    }
}

/// Where a polynomial lives: exported objects must not carry `ε^{-k}`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum EpsContext {
    Polynomial,
    Laurent,
}

#[derive(Clone, Default, PartialEq, Eq, Hash)]
pub struct DiffPoly2 {
    terms: BTreeMap<Monomial2, Scalar>,
}

fn add_term(map: &mut BTreeMap<Monomial2, Scalar>, m: Monomial2, c: Scalar) {
    if c.is_zero() {
        return;
    }
    use std::collections::btree_map::Entry;
    match map.entry(m) {
        Entry::Vacant(v) => {
            v.insert(c);
        }
        Entry::Occupied(mut o) => {
            *o.get_mut() += &c;
            if o.get().is_zero() {
                o.remove();
            }
        }
    }
}

fn factorial(n: u32) -> Rational {
    (1..=n as i64).fold(Rational::one(), |acc, k| acc * rat_int(k))
}

impl DiffPoly2 {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn one() -> Self {
        Self::constant(Scalar::one())
    }

    pub fn constant(c: Scalar) -> Self {
        Self::term(Monomial2::one(), c)
    }

    pub fn term(m: Monomial2, c: Scalar) -> Self {
        let mut p = Self::zero();
        add_term(&mut p.terms, m, c);
        p
    }

    /// `u_{k1,k2}`.
    pub fn var(k1: u32, k2: u32) -> Self {
        Self::term(Monomial2::new(0, 0, vec![(k1, k2)]), Scalar::one())
    }

    /// `u = u_{0,0}`.
    pub fn u() -> Self {
        Self::var(0, 0)
    }

    pub fn from_terms<I: IntoIterator<Item = (Monomial2, Scalar)>>(it: I) -> Self {
        let mut p = Self::zero();
        for (m, c) in it {
            add_term(&mut p.terms, m, c);
        }
        p
    }

    /// Builds a polynomial and checks it against the ε-context.
    pub fn from_terms_in<I: IntoIterator<Item = (Monomial2, Scalar)>>(
        ctx: EpsContext,
        it: I,
    ) -> Result<Self> {
        let p = Self::from_terms(it);
        p.validate(ctx)?;
        Ok(p)
    }

    pub fn validate(&self, ctx: EpsContext) -> Result<()> {
        if ctx == EpsContext::Polynomial {
            if let Some(m) = self.terms.keys().find(|m| m.eps < 0) {
                return Err(Error::NegativeEpsLeak(format!("{:?}", m)));
            }
        }
        Ok(())
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Monomial2, &Scalar)> {
        self.terms.iter()
    }

    pub fn coeff(&self, m: &Monomial2) -> Scalar {
        self.terms.get(m).cloned().unwrap_or_else(Scalar::zero)
    }

    pub fn is_real(&self) -> bool {
        self.terms.values().all(Scalar::is_real)
    }

    pub fn min_mu(&self) -> Option<u32> {
        self.terms.keys().map(|m| m.mu).min()
    }

    pub fn min_eps(&self) -> Option<i32> {
        self.terms.keys().map(|m| m.eps).min()
    }

    /// The common degree of all monomials, or `None` if they differ or `self = 0`.
    pub fn homogeneous_degree(&self) -> Option<(i64, i64)> {
        let mut it = self.terms.keys().map(Monomial2::degree);
        let d = it.next()?;
        it.all(|e| e == d).then_some(d)
    }

    pub fn add(&self, o: &Self) -> Self {
        let mut out = self.clone();
        out.add_assign(o);
        out
    }

    pub fn add_assign(&mut self, o: &Self) {
        for (m, c) in &o.terms {
            add_term(&mut self.terms, m.clone(), c.clone());
        }
    }

    pub fn sub(&self, o: &Self) -> Self {
        let mut out = self.clone();
        for (m, c) in &o.terms {
            add_term(&mut out.terms, m.clone(), -c);
        }
        out
    }

    pub fn neg(&self) -> Self {
        Self {
            terms: self.terms.iter().map(|(m, c)| (m.clone(), -c)).collect(),
        }
    }

    pub fn scale(&self, c: &Scalar) -> Self {
        if c.is_zero() {
            return Self::zero();
        }
        Self {
            terms: self.terms.iter().map(|(m, v)| (m.clone(), v * c)).collect(),
        }
    }

    /// Multiplies by `ε^de μ^dm`.
    pub fn shift(&self, de: i32, dm: u32) -> Self {
        Self {
            terms: self
                .terms
                .iter()
                .map(|(m, c)| {
                    let mut m = m.clone();
                    m.eps += de;
                    m.mu += dm;
                    (m, c.clone())
                })
                .collect(),
        }
    }

    /// Ordinary commutative product.
    pub fn mul(&self, o: &Self) -> Self {
        let mut out = BTreeMap::new();
        for (ma, ca) in &self.terms {
            for (mb, cb) in &o.terms {
                add_term(&mut out, ma.mul(mb), ca * cb);
            }
        }
        Self { terms: out }
    }

    /// Keeps monomials satisfying `keep`.
    pub fn filter(&self, keep: impl Fn(&Monomial2) -> bool) -> Self {
        Self {
            terms: self
                .terms
                .iter()
                .filter(|(m, _)| keep(m))
                .map(|(m, c)| (m.clone(), c.clone()))
                .collect(),
        }
    }

    /// Drops monomials with `eps > eps_max` or `mu > mu_max`.
    pub fn truncate(&self, eps_max: Option<i32>, mu_max: Option<u32>) -> Self {
        self.filter(|m| eps_max.is_none_or(|e| m.eps <= e) && mu_max.is_none_or(|x| m.mu <= x))
    }

    /// The `μ = 0` specialization.
    pub fn at_mu_zero(&self) -> Self {
        self.filter(|m| m.mu == 0)
    }

    /// Part with `μ`-exponent of the given parity.
    pub fn mu_parity_part(&self, odd: bool) -> Self {
        self.filter(|m| (m.mu % 2 == 1) == odd)
    }

    fn derive(&self, dir: usize) -> Self {
        let mut out = BTreeMap::new();
        for (m, c) in &self.terms {
            for i in 0..m.vars.len() {
                if i > 0 && m.vars[i] == m.vars[i - 1] {
                    continue;
                }
                let mult = m.vars[i..].iter().take_while(|v| **v == m.vars[i]).count();
                let mut vars = m.vars.clone();
                if dir == 0 {
                    vars[i].0 += 1;
                } else {
                    vars[i].1 += 1;
                }
                let nm = Monomial2::new(m.eps, m.mu, vars);
                add_term(&mut out, nm, c.scale(&rat_int(mult as i64)));
            }
        }
        Self { terms: out }
    }

    pub fn dx(&self) -> Self {
        self.derive(0)
    }

    pub fn dy(&self) -> Self {
        self.derive(1)
    }

    /// `∂x^a ∂y^b f`.
    pub fn derivative(&self, a: u32, b: u32) -> Self {
        let mut p = self.clone();
        for _ in 0..a {
            p = p.dx();
        }
        for _ in 0..b {
            p = p.dy();
        }
        p
    }

    /// Moyal product with the summation index capped at `order_cap`.
    pub fn moyal(&self, o: &Self, order_cap: u32) -> Self {
        moyal_impl(self, o, order_cap, None)
    }

    /// Moyal product modulo `μ^{mu_max+1}`. Exact in the quotient ring since
    /// `μ`-exponents are nonnegative and additive.
    pub fn moyal_mod_mu(&self, o: &Self, mu_max: u32) -> Self {
        let (Some(a), Some(b)) = (self.min_mu(), o.min_mu()) else {
            return Self::zero();
        };
        if a + b > mu_max {
            return Self::zero();
        }
        moyal_impl(self, o, mu_max - a - b, Some(mu_max))
    }

    /// Commutative product modulo `μ^{mu_max+1}`.
    pub fn mul_mod_mu(&self, o: &Self, mu_max: u32) -> Self {
        let mut out = BTreeMap::new();
        for (ma, ca) in &self.terms {
            for (mb, cb) in &o.terms {
                if ma.mu + mb.mu <= mu_max {
                    add_term(&mut out, ma.mul(mb), ca * cb);
                }
            }
        }
        Self { terms: out }
    }

    /// Returns `g` without constant monomial such that `dx(g) = self`.
    pub fn x_integrate(&self) -> Result<Self> {
        // dx preserves (eps, mu, number of factors, multiset of k2) and raises Σk1 by one.
        type Block = (i32, u32, Vec<u32>, i64);
        let mut blocks: BTreeMap<Block, Vec<(&Monomial2, &Scalar)>> = BTreeMap::new();
        for (m, c) in &self.terms {
            let k2s: Vec<u32> = {
                let mut v: Vec<u32> = m.vars.iter().map(|v| v.1).collect();
                v.sort_unstable();
                v
            };
            let s1 = m.derivative_counts().0;
            blocks.entry((m.eps, m.mu, k2s, s1)).or_default().push((m, c));
        }
        let mut result = Self::zero();
        for ((eps, mu, k2s, s1), targets) in blocks {
            if k2s.is_empty() || s1 == 0 {
                return Err(Error::NotATotalDerivative(format!("{:?}", targets[0].0)));
            }
            let cands = integration_candidates(eps, mu, &k2s, (s1 - 1) as u32);
            let images: Vec<DiffPoly2> = cands
                .iter()
                .map(|m| Self::term(m.clone(), Scalar::one()).dx())
                .collect();
            let mut rows: BTreeMap<Monomial2, SparseRow> = BTreeMap::new();
            for (ci, img) in images.iter().enumerate() {
                for (m, c) in &img.terms {
                    rows.entry(m.clone()).or_default().add(ci, &c.re);
                }
            }
            let mut sol = vec![Scalar::zero(); cands.len()];
            for part in 0..2 {
                let mut rref = Rref::new();
                let pick = |c: &Scalar| if part == 0 { c.re.clone() } else { c.im.clone() };
                if targets.iter().all(|(_, c)| pick(c).is_zero()) {
                    continue;
                }
                let mut all = rows.clone();
                for (m, c) in &targets {
                    all.entry((*m).clone()).or_default().rhs = pick(c);
                }
                for (m, row) in all {
                    if let RowOutcome::Inconsistent(_) = rref.push(row) {
                        return Err(Error::NotATotalDerivative(format!("{:?}", m)));
                    }
                }
                for (ci, s) in sol.iter_mut().enumerate() {
                    let v = if rref.is_pivot(ci) {
                        rref.value(ci).ok_or_else(|| {
                            Error::NotATotalDerivative("nonunique preimage".into())
                        })?
                    } else {
                        Rational::zero()
                    };
                    if part == 0 {
                        s.re = v;
                    } else {
                        s.im = v;
                    }
                }
            }
            for (m, c) in cands.into_iter().zip(sol) {
                add_term(&mut result.terms, m, c);
            }
        }
        Ok(result)
    }

    pub fn to_json_value(&self) -> serde_json::Value {
        let doc = PolyJson {
            monomials: self
                .terms
                .iter()
                .map(|(m, c)| MonoJson {
                    eps: m.eps,
                    mu: m.mu,
                    coeff: CoeffJson {
                        re: format_rational(&c.re),
                        im: format_rational(&c.im),
                    },
                    vars: m.powers().into_iter().map(|(a, b, p)| [a, b, p]).collect(),
                })
                .collect(),
        };
        serde_json::to_value(doc).expect("serializable")
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(&self.to_json_value()).expect("serializable")
    }

    pub fn from_json_value(v: &serde_json::Value) -> Result<Self, ParseError> {
        let doc: PolyJson =
            serde_json::from_value(v.clone()).map_err(|e| ParseError::Json(e.to_string()))?;
        let mut p = Self::zero();
        for mj in doc.monomials {
            let mut vars = Vec::new();
            for [k1, k2, pw] in mj.vars {
                if pw == 0 {
                    return Err(ParseError::Invalid("zero power".into()));
                }
                vars.extend(std::iter::repeat_n((k1, k2), pw as usize));
            }
            let c = Scalar::new(parse_rational(&mj.coeff.re)?, parse_rational(&mj.coeff.im)?);
            let m = Monomial2::new(mj.eps, mj.mu, vars);
            if p.terms.contains_key(&m) {
                return Err(ParseError::Invalid("duplicate monomial".into()));
            }
            add_term(&mut p.terms, m, c);
        }
        Ok(p)
    }

    pub fn from_json(s: &str) -> Result<Self, ParseError> {
        let v: serde_json::Value =
            serde_json::from_str(s).map_err(|e| ParseError::Json(e.to_string()))?;
        Self::from_json_value(&v)
    }
}

#[derive(Serialize, Deserialize)]
struct CoeffJson {
    re: String,
    im: String,
}

#[derive(Serialize, Deserialize)]
struct MonoJson {
    eps: i32,
    mu: u32,
    coeff: CoeffJson,
    vars: Vec<[u32; 3]>,
}

#[derive(Serialize, Deserialize)]
struct PolyJson {
    monomials: Vec<MonoJson>,
}

/// All monomials with the given `k2` multiset whose `k1` values sum to `s1`.
fn integration_candidates(eps: i32, mu: u32, k2s: &[u32], s1: u32) -> Vec<Monomial2> {
    fn rec(
        k2s: &[u32],
        i: usize,
        left: u32,
        cur: &mut Vec<(u32, u32)>,
        out: &mut BTreeSet<Vec<(u32, u32)>>,
    ) {
        if i + 1 == k2s.len() {
            cur.push((left, k2s[i]));
            let mut v = cur.clone();
            v.sort_unstable();
            out.insert(v);
            cur.pop();
            return;
        }
        for k in 0..=left {
            cur.push((k, k2s[i]));
            rec(k2s, i + 1, left - k, cur, out);
            cur.pop();
        }
    }
    let mut out = BTreeSet::new();
    rec(k2s, 0, s1, &mut Vec::new(), &mut out);
    out.into_iter()
        .map(|vars| Monomial2 { eps, mu, vars })
        .collect()
}

/// Filtration window for products: drops monomials whose `μ`-exponent or
/// total x-derivative count `Σk1` exceeds the given caps. Both quantities are
/// additive under products with nonnegative increments, so the window is a
/// quotient ring.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash)]
pub struct Window {
    pub mu_max: Option<u32>,
    pub dx_max: Option<u32>,
}

impl Window {
    pub fn mu(mu_max: u32) -> Self {
        Window {
            mu_max: Some(mu_max),
            dx_max: None,
        }
    }

    pub fn admits(&self, m: &Monomial2) -> bool {
        self.mu_max.is_none_or(|x| m.mu <= x)
            && self
                .dx_max
                .is_none_or(|x| m.derivative_counts().0 <= x as i64)
    }

    pub fn apply(&self, p: &DiffPoly2) -> DiffPoly2 {
        if self.mu_max.is_none() && self.dx_max.is_none() {
            return p.clone();
        }
        p.filter(|m| self.admits(m))
    }
}

/// Lazily grown table of mixed partial derivatives `∂x^a ∂y^b p`, each
/// entry reduced to a window.
#[derive(Clone, Debug)]
pub struct DerivTable {
    rows: Vec<Vec<DiffPoly2>>,
    window: Window,
}

impl DerivTable {
    pub fn new(p: DiffPoly2) -> Self {
        Self::windowed(p, Window::default())
    }

    pub fn windowed(p: DiffPoly2, window: Window) -> Self {
        DerivTable {
            rows: vec![vec![p]],
            window,
        }
    }

    pub fn base(&self) -> &DiffPoly2 {
        &self.rows[0][0]
    }

    /// Makes `∂x^a ∂y^b` available for `b ≤ cap` and `a + b ≤ cap + x_extra`.
    pub fn ensure(&mut self, x_extra: u32, cap: u32) {
        let amax = (cap + x_extra) as usize;
        while self.rows.len() <= amax {
            let next = self.window.apply(&self.rows.last().expect("row")[0].dx());
            self.rows.push(vec![next]);
        }
        for a in 0..=amax {
            let bmax = ((cap + x_extra) as usize - a).min(cap as usize);
            let row = &mut self.rows[a];
            while row.len() <= bmax {
                let next = row.last().expect("entry").dy();
                row.push(next);
            }
        }
    }

    pub fn at(&self, a: u32, b: u32) -> &DiffPoly2 {
        &self.rows[a as usize][b as usize]
    }
}

/// Accumulates `scale · f * ∂x^shift g` from prepared derivative tables,
/// summation index `≤ cap`, reduced to `window`.
pub fn moyal_tables(
    tf: &DerivTable,
    tg: &DerivTable,
    shift: u32,
    cap: u32,
    window: Window,
    out: &mut DiffPoly2,
    scale: &Scalar,
) {
    let f = tf.base();
    let g = tg.base();
    if f.is_zero() || g.is_zero() {
        return;
    }
    let mu_max = window.mu_max;
    let dx_max = window.dx_max.map(|x| x as i64);
    let fmin = f.min_mu().unwrap_or(0);
    let gmin = g.min_mu().unwrap_or(0);
    let half = Rational::new(1.into(), 2.into());
    for n in 0..=cap {
        if mu_max.is_some_and(|mm| fmin + gmin + n > mm) {
            break;
        }
        let base = Scalar::i_pow(n as i64)
            .scale(&num_traits::pow(half.clone(), n as usize))
            * scale.clone();
        for k1 in 0..=n {
            let k2 = n - k1;
            let a = tf.at(k1, k2);
            let b = tg.at(k2 + shift, k1);
            if a.is_zero() || b.is_zero() {
                continue;
            }
            let mut c = base.scale(&(factorial(k1) * factorial(k2)).recip());
            if k2 % 2 == 1 {
                c = -c;
            }
            let bd: Vec<i64> = b.terms.keys().map(|m| m.derivative_counts().0).collect();
            for (ma, ca) in &a.terms {
                if mu_max.is_some_and(|mm| ma.mu + gmin + n > mm) {
                    continue;
                }
                let ad = ma.derivative_counts().0;
                let cac = ca * &c;
                for ((mb, cb), d) in b.terms.iter().zip(&bd) {
                    if mu_max.is_some_and(|mm| ma.mu + mb.mu + n > mm)
                        || dx_max.is_some_and(|x| ad + d > x)
                    {
                        continue;
                    }
                    let mut m = ma.mul(mb);
                    m.eps += n as i32;
                    m.mu += n;
                    add_term(&mut out.terms, m, &cac * cb);
                }
            }
        }
    }
}

/// Summation cap needed for `f * g` modulo `μ^{mu_max+1}`; `None` if the product vanishes there.
pub fn moyal_cap(f: &DiffPoly2, g: &DiffPoly2, mu_max: u32) -> Option<u32> {
    let a = f.min_mu()?;
    let b = g.min_mu()?;
    mu_max.checked_sub(a + b)
}

/// `out += scale · f · g` reduced to `window` (commutative product).
pub fn mul_acc(f: &DiffPoly2, g: &DiffPoly2, window: Window, out: &mut DiffPoly2, scale: &Scalar) {
    for (ma, ca) in &f.terms {
        let cs = ca * scale;
        for (mb, cb) in &g.terms {
            let m = ma.mul(mb);
            if window.admits(&m) {
                add_term(&mut out.terms, m, &cs * cb);
            }
        }
    }
}

fn moyal_impl(f: &DiffPoly2, g: &DiffPoly2, cap: u32, mu_max: Option<u32>) -> DiffPoly2 {
    let mut tf = DerivTable::new(f.clone());
    let mut tg = DerivTable::new(g.clone());
    tf.ensure(0, cap);
    tg.ensure(0, cap);
    let mut out = DiffPoly2::zero();
    let window = Window {
        mu_max,
        dx_max: None,
    };
    moyal_tables(&tf, &tg, 0, cap, window, &mut out, &Scalar::one());
    out
}

impl fmt::Display for DiffPoly2 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (idx, (m, c)) in self.terms.iter().enumerate() {
            if idx > 0 {
                write!(f, " + ")?;
            }
            if c.is_real() {
                write!(f, "{}", c)?;
            } else {
                write!(f, "({})", c)?;
            }
            if m.eps != 0 {
                write!(f, "*eps^{}", m.eps)?;
            }
            if m.mu != 0 {
                write!(f, "*mu^{}", m.mu)?;
            }
            for (k1, k2, p) in m.powers() {
                write!(f, "*u_{{{},{}}}", k1, k2)?;
                if p > 1 {
                    write!(f, "^{}", p)?;
                }
            }
        }
        Ok(())
    }
}

impl fmt::Debug for DiffPoly2 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::rat;

    fn mono(eps: i32, mu: u32, vars: &[(u32, u32)]) -> Monomial2 {
        Monomial2::new(eps, mu, vars.to_vec())
    }

    fn r(n: i64, d: i64) -> Scalar {
        Scalar::from_frac(n, d)
    }

    #[test]
    fn ring_examples() {
        let u = DiffPoly2::u();
        assert!(u.sub(&u).is_zero());
        assert_eq!(u.mul(&DiffPoly2::one()), u);
        let a = DiffPoly2::var(1, 0).shift(1, 0);
        let b = DiffPoly2::var(0, 1).shift(0, 1);
        let p = a.mul(&b);
        assert_eq!(p, DiffPoly2::term(mono(1, 1, &[(1, 0), (0, 1)]), Scalar::one()));
        assert_eq!(p.homogeneous_degree(), Some((0, 0)));
    }

    #[test]
    fn derivations() {
        let u = DiffPoly2::u();
        assert_eq!(u.dx(), DiffPoly2::var(1, 0));
        assert_eq!(DiffPoly2::var(1, 0).dy(), DiffPoly2::var(1, 1));
        assert_eq!(
            u.mul(&u).dx(),
            DiffPoly2::term(mono(0, 0, &[(0, 0), (1, 0)]), Scalar::from_int(2))
        );
    }

    #[test]
    fn moyal_u_u() {
        let u = DiffPoly2::u();
        let p = u.moyal(&u, 3);
        let expected = DiffPoly2::from_terms([
            (mono(0, 0, &[(0, 0), (0, 0)]), r(1, 1)),
            (mono(2, 2, &[(2, 0), (0, 2)]), r(-1, 4)),
            (mono(2, 2, &[(1, 1), (1, 1)]), r(1, 4)),
        ]);
        assert_eq!(p, expected);
        // n = 4 terms appear at the next cap
        let q = u.moyal(&u, 4).filter(|m| m.mu == 4);
        assert!(!q.is_zero());
    }

    #[test]
    fn moyal_antisymmetric_part() {
        let u = DiffPoly2::u();
        let ux = DiffPoly2::var(1, 0);
        let d = u.moyal(&ux, 2).sub(&ux.moyal(&u, 2));
        let expected = DiffPoly2::from_terms([
            (mono(1, 1, &[(1, 0), (1, 1)]), Scalar::i()),
            (mono(1, 1, &[(0, 1), (2, 0)]), -Scalar::i()),
        ]);
        assert_eq!(d, expected);
    }

    #[test]
    fn moyal_mod_mu_zero_is_product() {
        let f = DiffPoly2::u().add(&DiffPoly2::var(2, 1).shift(1, 0));
        let g = DiffPoly2::var(1, 3).mul(&DiffPoly2::u());
        assert_eq!(f.moyal_mod_mu(&g, 0), f.mul(&g));
    }

    #[test]
    fn x_integrate_examples() {
        assert_eq!(DiffPoly2::var(1, 0).x_integrate().unwrap(), DiffPoly2::u());
        let u = DiffPoly2::u();
        let uu = u.mul(&u);
        assert_eq!(uu.dx().x_integrate().unwrap(), uu);
        assert!(matches!(
            uu.x_integrate(),
            Err(Error::NotATotalDerivative(_))
        ));
        let g = DiffPoly2::from_terms([
            (mono(2, 2, &[(0, 1), (3, 1), (1, 0)]), Scalar::new(rat(1, 3), rat(2, 5))),
            (mono(0, 0, &[(1, 0), (1, 0), (2, 0)]), r(-7, 2)),
        ]);
        assert_eq!(g.dx().x_integrate().unwrap(), g);
    }

    #[test]
    fn json_roundtrip() {
        let p = DiffPoly2::from_terms([
            (mono(2, 2, &[(2, 0), (0, 2)]), Scalar::new(rat(-1, 4), rat(3, 7))),
            (mono(0, 0, &[(0, 0), (0, 0), (1, 0)]), r(5, 1)),
        ]);
        let s = p.to_json();
        assert!(s.contains("\"vars\":[[0,0,2],[1,0,1]]"));
        assert_eq!(DiffPoly2::from_json(&s).unwrap(), p);
    }

    #[test]
    fn eps_context() {
        let p = DiffPoly2::u().shift(-2, 0);
        assert!(p.validate(EpsContext::Laurent).is_ok());
        assert!(matches!(
            p.validate(EpsContext::Polynomial),
            Err(Error::NegativeEpsLeak(_))
        ));
    }
}

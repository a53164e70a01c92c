//! Fourier modes in `y`: `u = Σ_a v^a e^{iay}`, so `u_{k1,k2}` becomes
//! `(ia)^{k2} ∂x^{k1} v^a` on mode `a`.

use std::collections::BTreeMap;
use std::fmt;

use num_traits::{One, Zero};

use crate::diffpoly::DiffPoly2;
use crate::error::{Error, Result};
use crate::predictors::q_poly;
use crate::scalar::{rat_int, Rational, Scalar};

/// `ε^eps μ^mu Π v^a_k`, factors sorted as `(a, k)`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ModeMonomial {
    pub eps: u32,
    pub mu: u32,
    pub factors: Vec<(i64, u32)>,
}

impl ModeMonomial {
    pub fn new(eps: u32, mu: u32, mut factors: Vec<(i64, u32)>) -> Self {
        factors.sort_unstable();
        ModeMonomial { eps, mu, factors }
    }

    pub fn total_mode(&self) -> i64 {
        self.factors.iter().map(|f| f.0).sum()
    }

    fn mul(&self, o: &ModeMonomial) -> ModeMonomial {
        let mut factors = self.factors.clone();
        factors.extend_from_slice(&o.factors);
        ModeMonomial::new(self.eps + o.eps, self.mu + o.mu, factors)
    }
}

/// A Fourier-homogeneous polynomial in the mode variables `v^a_k`.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct ModePoly {
    total_mode: i64,
    terms: BTreeMap<ModeMonomial, Scalar>,
}

impl ModePoly {
    pub fn zero(total_mode: i64) -> Self {
        ModePoly {
            total_mode,
            terms: BTreeMap::new(),
        }
    }

    /// The single variable `v^a_k`.
    pub fn var(a: i64, k: u32) -> Self {
        let mut p = Self::zero(a);
        p.terms.insert(ModeMonomial::new(0, 0, vec![(a, k)]), Scalar::one());
        p
    }

    pub fn total_mode(&self) -> i64 {
        self.total_mode
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

    pub fn iter(&self) -> impl Iterator<Item = (&ModeMonomial, &Scalar)> {
        self.terms.iter()
    }

    pub fn coeff(&self, m: &ModeMonomial) -> Scalar {
        self.terms.get(m).cloned().unwrap_or_default()
    }

    /// Adds `c·m`; the monomial must carry this polynomial's total mode.
    pub fn add_term(&mut self, m: ModeMonomial, c: Scalar) {
        assert_eq!(m.total_mode(), self.total_mode, "mode mismatch");
        if c.is_zero() {
            return;
        }
        let e = self.terms.entry(m.clone()).or_default();
        *e += &c;
        if e.is_zero() {
            self.terms.remove(&m);
        }
    }

    pub fn add(&self, o: &ModePoly) -> ModePoly {
        assert_eq!(self.total_mode, o.total_mode, "mode mismatch");
        let mut out = self.clone();
        for (m, c) in &o.terms {
            out.add_term(m.clone(), c.clone());
        }
        out
    }

    pub fn scale(&self, c: &Scalar) -> ModePoly {
        let mut out = Self::zero(self.total_mode);
        for (m, v) in &self.terms {
            out.add_term(m.clone(), v * c);
        }
        out
    }

    /// Multiplies by `ε^de μ^dm`.
    pub fn shift(&self, de: u32, dm: u32) -> ModePoly {
        ModePoly {
            total_mode: self.total_mode,
            terms: self
                .terms
                .iter()
                .map(|(m, c)| (ModeMonomial::new(m.eps + de, m.mu + dm, m.factors.clone()), c.clone()))
                .collect(),
        }
    }

    pub fn mul(&self, o: &ModePoly) -> ModePoly {
        let mut out = Self::zero(self.total_mode + o.total_mode);
        for (m1, c1) in &self.terms {
            for (m2, c2) in &o.terms {
                out.add_term(m1.mul(m2), c1 * c2);
            }
        }
        out
    }

    pub fn dx(&self) -> ModePoly {
        let mut out = Self::zero(self.total_mode);
        for (m, c) in &self.terms {
            for i in 0..m.factors.len() {
                if i > 0 && m.factors[i - 1] == m.factors[i] {
                    continue;
                }
                let mult = m.factors[i..].iter().take_while(|f| **f == m.factors[i]).count();
                let mut factors = m.factors.clone();
                factors[i].1 += 1;
                out.add_term(
                    ModeMonomial::new(m.eps, m.mu, factors),
                    c.scale(&rat_int(mult as i64)),
                );
            }
        }
        out
    }

    pub fn dx_n(&self, n: u32) -> ModePoly {
        (0..n).fold(self.clone(), |p, _| p.dx())
    }

    /// Keeps monomials with `eps ≤ eps_max` and `mu ≤ mu_max`.
    pub fn truncate(&self, eps_max: u32, mu_max: u32) -> ModePoly {
        ModePoly {
            total_mode: self.total_mode,
            terms: self
                .terms
                .iter()
                .filter(|(m, _)| m.eps <= eps_max && m.mu <= mu_max)
                .map(|(m, c)| (m.clone(), c.clone()))
                .collect(),
        }
    }
}

impl fmt::Display for ModePoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let parts: Vec<String> = self
            .terms
            .iter()
            .map(|(m, c)| {
                let mut s = format!("({})", c);
                if m.eps > 0 {
                    s += &format!("*eps^{}", m.eps);
                }
                if m.mu > 0 {
                    s += &format!("*mu^{}", m.mu);
                }
                for (a, k) in &m.factors {
                    s += &format!("*v^{{{}}}_{}", a, k);
                }
                s
            })
            .collect();
        write!(f, "{}", parts.join(" + "))
    }
}

fn mode_power(a: i64, k: u32) -> Scalar {
    Scalar::i_pow(k as i64) * Scalar::real(rat_int(a).pow(k as i32))
}

/// Substitutes `u_{k1,k2} ↦ (i·a)^{k2} v^a_{k1}`, the `j`-th factor of each
/// monomial (in sorted order) taking mode `modes[j]`.
pub fn mode_expand(f: &DiffPoly2, modes: &[i64]) -> Result<ModePoly> {
    let mut out = ModePoly::zero(modes.iter().sum());
    for (m, c) in f.iter() {
        if m.arity() != modes.len() {
            return Err(Error::ArityMismatch {
                expected: modes.len(),
                found: m.arity(),
            });
        }
        if m.eps < 0 {
            return Err(Error::NegativeEpsLeak(m.eps.to_string()));
        }
        let mut coeff = c.clone();
        let mut factors = Vec::with_capacity(modes.len());
        for (&(k1, k2), &a) in m.vars.iter().zip(modes) {
            coeff = coeff * mode_power(a, k2);
            factors.push((a, k1));
        }
        out.add_term(ModeMonomial::new(m.eps as u32, m.mu, factors), coeff);
    }
    Ok(out)
}

/// Expansion of `f` with `u = Σ_{a ∈ modes} v^a e^{iay}`, grouped by total mode.
pub fn expand_over(f: &DiffPoly2, modes: &[i64]) -> Result<BTreeMap<i64, ModePoly>> {
    let mut by_arity: BTreeMap<usize, Vec<_>> = BTreeMap::new();
    for (m, c) in f.iter() {
        by_arity
            .entry(m.arity())
            .or_default()
            .push((m.clone(), c.clone()));
    }
    let mut out: BTreeMap<i64, ModePoly> = BTreeMap::new();
    for (arity, terms) in by_arity {
        let part = DiffPoly2::from_terms(terms);
        let count = modes.len().pow(arity as u32);
        for idx in 0..count {
            let mut rest = idx;
            let assignment: Vec<i64> = (0..arity)
                .map(|_| {
                    let a = modes[rest % modes.len()];
                    rest /= modes.len();
                    a
                })
                .collect();
            let p = mode_expand(&part, &assignment)?;
            let total = p.total_mode();
            let slot = out.entry(total).or_insert_with(|| ModePoly::zero(total));
            *slot = slot.add(&p);
        }
    }
    out.retain(|_, p| !p.is_zero());
    Ok(out)
}

/// Mode-wise Moyal product: `∂y` acts as `i·(total mode)` on each side.
pub fn mode_moyal(p: &ModePoly, q: &ModePoly, order_cap: u32) -> ModePoly {
    let (alpha, beta) = (p.total_mode(), q.total_mode());
    let mut out = ModePoly::zero(alpha + beta);
    let mut dp = vec![p.clone()];
    let mut dq = vec![q.clone()];
    for _ in 0..order_cap {
        dp.push(dp.last().unwrap().dx());
        dq.push(dq.last().unwrap().dx());
    }
    let mut fact = Rational::one();
    for n in 0..=order_cap {
        if n > 0 {
            fact *= rat_int(n as i64);
        }
        // (iεμ/2)^n/n! · Σ C(n,k1)(−1)^{k2} (iα)^{k2}(iβ)^{k1} ∂^{k1}p ∂^{k2}q
        let pre = Scalar::i_pow(n as i64).scale(&(Rational::one() / (fact.clone() * rat_int(2).pow(n as i32))));
        for k1 in 0..=n {
            let k2 = n - k1;
            let binom = binomial(n, k1);
            let sign = if k2 % 2 == 0 { 1 } else { -1 };
            let c = &pre * &(mode_power(alpha, k2) * mode_power(beta, k1)).scale(&(binom * rat_int(sign)));
            if c.is_zero() {
                continue;
            }
            out = out.add(&dp[k1 as usize].mul(&dq[k2 as usize]).shift(n, n).scale(&c));
        }
    }
    out
}

fn binomial(n: u32, k: u32) -> Rational {
    (0..k).fold(Rational::one(), |acc, i| acc * rat_int((n - i) as i64) / rat_int((i + 1) as i64))
}

/// `T(a, εμ∂x) p = Σ_g Q_g(a)(εμ)^{2g}∂x^{2g} p` for `2g ≤ eps_order`.
pub fn t_transform(a: i64, p: &ModePoly, eps_order: u32) -> ModePoly {
    let mut out = p.clone();
    for g in 1..=eps_order / 2 {
        let q = q_poly(g as usize).eval_int(a);
        if q.is_zero() {
            continue;
        }
        let term = p.dx_n(2 * g).shift(2 * g, 2 * g).scale(&Scalar::real(q));
        out = out.add(&term);
    }
    out
}

/// Mode-sum form of the first flow on mode `a`:
/// `Σ_g (εμ)^{2g}/2^{2g} Σ_{a1+a2=a} Σ_{k1+k2=2g} (−1)^{k1}/(k1!k2!) a1^{k2} a2^{k1} ∂x(∂x^{k1}v^{a1} ∂x^{k2}v^{a2})`.
pub fn first_flow_mode_sum(a: i64, modes: &[i64], g_max: u32) -> ModePoly {
    let mut out = ModePoly::zero(a);
    for &a1 in modes {
        let a2 = a - a1;
        if !modes.contains(&a2) {
            continue;
        }
        for g in 0..=g_max {
            let n = 2 * g;
            for k1 in 0..=n {
                let k2 = n - k1;
                let sign = if k1 % 2 == 0 { 1 } else { -1 };
                let c = rat_int(sign) * rat_int(a1).pow(k2 as i32) * rat_int(a2).pow(k1 as i32)
                    / (factorial(k1) * factorial(k2) * rat_int(2).pow(n as i32));
                if c.is_zero() {
                    continue;
                }
                let prod = ModePoly::var(a1, k1).mul(&ModePoly::var(a2, k2)).dx();
                out = out.add(&prod.shift(n, n).scale(&Scalar::real(c)));
            }
        }
    }
    out
}

fn factorial(n: u32) -> Rational {
    (1..=n as i64).fold(Rational::one(), |acc, k| acc * rat_int(k))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::diffpoly::Monomial2;
    use crate::hierarchy::dispersionless_flow;
    use crate::scalar::rat;

    fn v(a: i64, k: u32, eps: u32, c: Scalar) -> ModePoly {
        let mut p = ModePoly::zero(a);
        p.add_term(ModeMonomial::new(eps, eps, vec![(a, k)]), c);
        p
    }

    #[test]
    fn y_derivative_becomes_mode() {
        let p = mode_expand(&DiffPoly2::var(0, 1), &[3]).unwrap();
        assert_eq!(p, ModePoly::var(3, 0).scale(&Scalar::new(rat(0, 1), rat(3, 1))));
        assert!(matches!(
            mode_expand(&DiffPoly2::var(0, 1), &[1, 2]),
            Err(Error::ArityMismatch { expected: 2, found: 1 })
        ));
    }

    #[test]
    fn t_transform_examples() {
        let p = ModePoly::var(1, 0).add(&ModePoly::var(1, 3));
        assert_eq!(t_transform(1, &p, 6), p);
        let t0 = t_transform(0, &ModePoly::var(0, 0), 2);
        assert_eq!(t0, ModePoly::var(0, 0).add(&v(0, 2, 2, Scalar::from_frac(1, 24))));
        let t2 = t_transform(2, &ModePoly::var(2, 0), 2);
        assert_eq!(t2, ModePoly::var(2, 0).add(&v(2, 2, 2, Scalar::from_frac(-1, 8))));
    }

    #[test]
    fn single_slot_coefficient() {
        let half = dispersionless_flow(1, 2);
        let part = half.filter(|m| m.vars == vec![(0, 2), (2, 0)]);
        for a1 in -3i64..=3 {
            let e = mode_expand(&part, &[a1, 1]).unwrap();
            let m = ModeMonomial::new(2, 2, vec![(a1, 0), (1, 2)]);
            assert_eq!(e.coeff(&m), Scalar::real(rat(a1 * a1, 8)));
        }
    }

    #[test]
    fn first_flow_is_half_the_mode_sum() {
        let modes: Vec<i64> = (-2..=2).collect();
        let p = dispersionless_flow(1, 4).dx();
        let e = expand_over(&p, &modes).unwrap();
        for a in -2..=2 {
            let sum = first_flow_mode_sum(a, &modes, 2);
            let got = e.get(&a).cloned().unwrap_or_else(|| ModePoly::zero(a));
            assert_eq!(got, sum.scale(&Scalar::from_frac(1, 2)), "mode {a}");
        }
    }

    #[test]
    fn star_product_compatibility() {
        let modes = [-1i64, 0, 2];
        let u = DiffPoly2::u();
        let ux = DiffPoly2::var(1, 0);
        let f = u.moyal(&u, 2);
        let samples = [(u.clone(), ux.clone()), (f.clone(), u.clone()), (ux.clone(), f.clone())];
        for (a, b) in samples {
            let lhs = expand_over(&a.moyal(&b, 3), &modes).unwrap();
            let ea = expand_over(&a, &modes).unwrap();
            let eb = expand_over(&b, &modes).unwrap();
            let mut rhs: BTreeMap<i64, ModePoly> = BTreeMap::new();
            for (al, pa) in &ea {
                for (be, pb) in &eb {
                    let prod = mode_moyal(pa, pb, 3);
                    let slot = rhs.entry(al + be).or_insert_with(|| ModePoly::zero(al + be));
                    *slot = slot.add(&prod);
                }
            }
            rhs.retain(|_, p| !p.is_zero());
            assert_eq!(lhs, rhs);
        }
    }

    #[test]
    fn homogeneity_of_expansion() {
        let p = DiffPoly2::term(Monomial2::new(1, 1, vec![(0, 1), (1, 0)]), Scalar::one());
        for (total, poly) in expand_over(&p, &[-1, 1, 3]).unwrap() {
            assert!(poly.iter().all(|(m, _)| m.total_mode() == total));
        }
    }
}

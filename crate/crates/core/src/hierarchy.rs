//! Flows of the noncommutative KdV hierarchy from the Lax operator
//! `L = ∂x² + 2ε⁻²u`.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_traits::One;

use crate::diffpoly::{DerivTable, DiffPoly2, EpsContext, Monomial2};
use crate::error::{Error, Result};
use crate::psido::{CoeffProduct, PsiDO, Truncation};
use crate::scalar::{Rational, Scalar};

pub fn lax_operator(trunc: Truncation) -> PsiDO {
    lax_with(trunc, CoeffProduct::Moyal)
}

fn lax_with(trunc: Truncation, product: CoeffProduct) -> PsiDO {
    PsiDO::from_coeffs(
        trunc,
        product,
        [
            (2, DiffPoly2::one()),
            (0, DiffPoly2::u().shift(-2, 0).scale(&Scalar::from_int(2))),
        ],
    )
}

/// `(2n+1)!!`.
pub fn odd_double_factorial(n: u32) -> BigInt {
    (1..=n as u64).fold(BigInt::one(), |acc, k| acc * BigInt::from(2 * k + 1))
}

/// `P_n` with `∂u/∂t_n = ∂x P_n`, Moyal coefficients.
pub fn flow(n: u32, trunc: Truncation) -> Result<DiffPoly2> {
    flow_with(n, trunc, CoeffProduct::Moyal)
}

/// `P_n` of the classical KdV hierarchy, built with commutative coefficients.
pub fn classical_flow(n: u32, trunc: Truncation) -> Result<DiffPoly2> {
    flow_with(n, trunc, CoeffProduct::Commutative)
}

fn flow_with(n: u32, trunc: Truncation, product: CoeffProduct) -> Result<DiffPoly2> {
    if n == 0 {
        return Err(Error::OutOfRange("flow index must be at least 1".into()));
    }
    // Inside the Lax algebra eps = mu − 2·(number of u-factors), so the ε-window
    // only matters at export. An exported monomial has Σk2 = mu ≤ eps and
    // Σk1 = eps ≤ eps_max, and its x-derivative has one more; both counts only
    // grow under products, so they bound the whole computation.
    // Only (L^{n+1/2})_+ enters the commutator, and L∘X at order o only sees
    // orders o−2..o of X, so after j compositions orders below −2(n−j) are dead.
    let cap = trunc.eps_max.max(0) as u32;
    let floor = -2 * n as i32;
    let inner = Truncation {
        depth_floor: trunc.depth_floor.max(floor),
        mu_max: trunc.mu_max.min(cap),
        dx_max: Some(trunc.dx_max.map_or(cap + 1, |x| x.min(cap + 1))),
        ..trunc
    };
    let l = lax_with(inner, product);
    let mut x = l.sqrt()?;
    for j in 1..=n {
        x = l.compose(&x)?.orders_from(floor + 2 * j as i32);
    }
    let r = x.positive_part().commutator(&l)?;
    if let Some((&order, _)) = r.coeffs().iter().find(|(i, _)| **i != 0) {
        return Err(Error::CommutatorNotOrderZero { order });
    }
    let df = odd_double_factorial(n);
    let c = Rational::new(BigInt::one(), df * 2);
    let rhs = r.coeff(0).shift(2 * n as i32 + 2, 0).scale(&Scalar::real(c));
    let p = rhs.x_integrate()?.truncate(Some(trunc.eps_max), None);
    p.validate(EpsContext::Polynomial)?;
    Ok(p)
}

/// `u^{*(n+1)}/(n+1)!` modulo `μ^{mu_max+1}`.
pub fn dispersionless_flow(n: u32, mu_max: u32) -> DiffPoly2 {
    let u = DiffPoly2::u();
    let mut p = u.clone();
    let mut fact = Rational::one();
    for k in 1..=n {
        p = p.moyal_mod_mu(&u, mu_max);
        fact *= Rational::from_integer(BigInt::from(k + 1));
    }
    p.scale(&Scalar::real(fact.recip()))
}

/// Splits `P_n` by genus `g = (eps − mu)/2`.
pub fn genus_parts(p: &DiffPoly2) -> BTreeMap<i32, DiffPoly2> {
    let mut out: BTreeMap<i32, Vec<(Monomial2, Scalar)>> = BTreeMap::new();
    for (m, c) in p.iter() {
        out.entry((m.eps - m.mu as i32).div_euclid(2))
            .or_default()
            .push((m.clone(), c.clone()));
    }
    out.into_iter()
        .map(|(g, t)| (g, DiffPoly2::from_terms(t)))
        .collect()
}

/// Checks the shape of every `P_{n,g}`: `0 ≤ g ≤ n`, `n+1−g` factors and
/// `Σk1 − mu = 2g` per monomial. Returns the first offending monomial.
pub fn check_genus_shape(n: u32, p: &DiffPoly2) -> std::result::Result<(), Monomial2> {
    for (m, _) in p.iter() {
        let diff = m.eps - m.mu as i32;
        let ok = diff >= 0 && diff % 2 == 0 && {
            let g = diff / 2;
            let (s1, _) = m.derivative_counts();
            g <= n as i32 && m.arity() as i32 == n as i32 + 1 - g && s1 - m.mu as i64 == 2 * g as i64
        };
        if !ok {
            return Err(m.clone());
        }
    }
    Ok(())
}

/// `X_Q(f)` where `X_Q u_{k1,k2} = ∂x^{k1}∂y^{k2} Q`.
pub fn evolutionary_derivative(f: &DiffPoly2, q: &DiffPoly2, eps_max: i32, mu_max: u32) -> DiffPoly2 {
    let mut table = DerivTable::new(q.clone());
    let mut out = DiffPoly2::zero();
    for (m, c) in f.iter() {
        for (idx, &(k1, k2)) in m.vars.iter().enumerate() {
            if idx > 0 && m.vars[idx - 1] == (k1, k2) {
                continue;
            }
            let mult = m.vars[idx..].iter().take_while(|v| **v == (k1, k2)).count();
            let mut rest = m.vars.clone();
            rest.remove(idx);
            let cofactor = DiffPoly2::term(
                Monomial2::new(m.eps, m.mu, rest),
                c.scale(&Rational::from_integer(BigInt::from(mult))),
            );
            table.ensure(k1, k2);
            let d = table.at(k1, k2);
            out.add_assign(&cofactor.mul(d).truncate(Some(eps_max), Some(mu_max)));
        }
    }
    out
}

/// Whether `∂_{t_m}∂_{t_n}u = ∂_{t_n}∂_{t_m}u` holds within the window.
pub fn check_commutativity(m: u32, n: u32, trunc: Truncation) -> Result<bool> {
    let window = |k: u32| Truncation {
        depth_floor: trunc.depth_floor.min(Truncation::for_flow(k).depth_floor),
        ..trunc
    };
    let pm = flow(m, window(m))?;
    let pn = flow(n, window(n))?;
    let (e, mu) = (trunc.eps_max, trunc.mu_max);
    let um = pm.dx();
    let un = pn.dx();
    let lhs = evolutionary_derivative(&un, &um, e, mu);
    let rhs = evolutionary_derivative(&um, &un, e, mu);
    Ok(lhs == rhs)
}

/// Flows `P_1..P_n` with their truncations.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct FlowTable {
    pub flows: BTreeMap<u32, (Truncation, DiffPoly2)>,
}

impl FlowTable {
    /// Computes `P_1..=P_{n_max}`; `eps_max` overrides the default window.
    pub fn compute(n_max: u32, eps_max: Option<i32>) -> Result<Self> {
        let mut flows = BTreeMap::new();
        for n in 1..=n_max {
            let mut t = Truncation::for_flow(n);
            if let Some(e) = eps_max {
                t = Truncation::new(t.depth_floor, e);
            }
            flows.insert(n, (t, flow(n, t)?));
        }
        Ok(FlowTable { flows })
    }

    pub fn get(&self, n: u32) -> Option<&DiffPoly2> {
        self.flows.get(&n).map(|(_, p)| p)
    }

    pub fn to_json_value(&self) -> serde_json::Value {
        serde_json::Value::Array(
            self.flows
                .iter()
                .map(|(n, (t, p))| {
                    serde_json::json!({"n": n, "trunc": t.to_json_value(), "P": p.to_json_value()})
                })
                .collect(),
        )
    }
}

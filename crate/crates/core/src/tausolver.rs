//! Reconstruction of the Pixton-class correlators
//! `⟨τ^{a_1}_{d_1}⋯τ^{a_n}_{d_n}⟩_{g,j} = ∫ 2^{-j}P_g^j(A) Πψ_i^{d_i}` from the
//! string and dilaton equations and the ncKdV flows, by exact linear algebra.
//!
//! The string and dilaton equations are used as rewriting rules: every key is
//! reduced to an affine combination of primary keys, which carry no `τ^0_0` or
//! `τ^0_1` insertion. The flows then give linear equations among primaries.
//! Writing `⟨·⟩` for correlators, mode `a` of the flow for `t^0_m` reads, at
//! `ε^{2G}μ^{2J}` and the coefficient of `t^M/|Aut M|`,
//!
//! ```text
//! Σ_h Q_h(a)⟨τ0 τ^{-a}_0 τ^0_m τ0^{2h} M⟩_{G−h,J−h}
//!   = Σ_{monomials of ∂x P_m} Σ_{M = ⊔ M_s} c Π_s (i b_s)^{k2_s} Σ_h Q_h(b_s)⟨τ0 τ^{-b_s}_0 τ0^{k1_s+2h} M_s⟩
//! ```
//!
//! with `b_s` the total mode of `M_s`.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;

use itertools::Itertools;
use num_traits::{One, Zero};

use crate::diffpoly::DiffPoly2;
use crate::error::{Error, Result};
use crate::hierarchy::FlowTable;
use crate::linalg::{RowOutcome, Rref, SparseRow};
use crate::predictors::q_poly;
use crate::scalar::{format_rational, parse_rational, rat, rat_int, Rational, Scalar};
use crate::series::RatPoly;

/// `(g, j, sorted (a_i, d_i))`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct IntersectionKey {
    pub g: u32,
    pub j: u32,
    pub points: Vec<(i64, u32)>,
}

impl IntersectionKey {
    pub fn new(g: u32, j: u32, mut points: Vec<(i64, u32)>) -> Self {
        points.sort_unstable();
        IntersectionKey { g, j, points }
    }

    pub fn n(&self) -> usize {
        self.points.len()
    }

    pub fn level(&self) -> u32 {
        3 * self.g + self.n() as u32
    }

    pub fn is_stable(&self) -> bool {
        2 * self.g as i64 - 2 + self.n() as i64 > 0
    }

    /// Mode balance, degree `Σd = 3g−3+n−j`, `j ≤ g` and stability.
    pub fn is_valid(&self) -> bool {
        let d: i64 = self.points.iter().map(|p| p.1 as i64).sum();
        self.j <= self.g
            && self.is_stable()
            && self.points.iter().map(|p| p.0).sum::<i64>() == 0
            && d == 3 * self.g as i64 - 3 + self.n() as i64 - self.j as i64
    }

    fn without(&self, idx: usize) -> Vec<(i64, u32)> {
        let mut p = self.points.clone();
        p.remove(idx);
        p
    }

    pub fn modes(&self) -> Vec<i64> {
        self.points.iter().map(|p| p.0).collect()
    }

    pub fn degrees(&self) -> Vec<u32> {
        self.points.iter().map(|p| p.1).collect()
    }
}

impl fmt::Display for IntersectionKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "<")?;
        for (i, (a, d)) in self.points.iter().enumerate() {
            if i > 0 {
                write!(f, " ")?;
            }
            write!(f, "t^{}_{}", a, d)?;
        }
        write!(f, ">_{{g={},j={}}}", self.g, self.j)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum Provenance {
    Seed,
    Solved,
    Checked,
}

impl Provenance {
    pub fn as_str(&self) -> &'static str {
        match self {
            Provenance::Seed => "seed",
            Provenance::Solved => "solved",
            Provenance::Checked => "checked",
        }
    }
}

/// Where an equation came from.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Source {
    Seed,
    String,
    Dilaton,
    Flow(u32),
}

impl fmt::Display for Source {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Source::Seed => write!(f, "seed"),
            Source::String => write!(f, "string"),
            Source::Dilaton => write!(f, "dilaton"),
            Source::Flow(m) => write!(f, "flow {}", m),
        }
    }
}

/// `Σ c·Π⟨K⟩ = 0`.
#[derive(Clone, Debug, PartialEq)]
pub struct Equation {
    pub source: Source,
    pub level: u32,
    pub label: String,
    pub terms: Vec<(Scalar, Vec<IntersectionKey>)>,
}

impl Equation {
    fn new(source: Source, level: u32, label: String) -> Self {
        Equation {
            source,
            level,
            label,
            terms: Vec::new(),
        }
    }

    fn push(&mut self, c: Scalar, keys: Vec<IntersectionKey>) {
        if !c.is_zero() {
            self.terms.push((c, keys));
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct IntersectionTable {
    entries: BTreeMap<IntersectionKey, (Rational, Provenance)>,
}

impl IntersectionTable {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, key: IntersectionKey, value: Rational, prov: Provenance) {
        self.entries.insert(key, (value, prov));
    }

    pub fn get(&self, key: &IntersectionKey) -> Option<&Rational> {
        self.entries.get(key).map(|e| &e.0)
    }

    pub fn provenance(&self, key: &IntersectionKey) -> Option<Provenance> {
        self.entries.get(key).map(|e| e.1)
    }

    pub fn mark_checked(&mut self, key: &IntersectionKey) {
        if let Some(e) = self.entries.get_mut(key) {
            e.1 = Provenance::Checked;
        }
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&IntersectionKey, &Rational, Provenance)> {
        self.entries.iter().map(|(k, (v, p))| (k, v, *p))
    }

    /// Value of any key: zero when invalid, otherwise reduced by string and
    /// dilaton to primary keys looked up in the table.
    pub fn value(&self, key: &IntersectionKey) -> Option<Rational> {
        let red = reduce(key);
        let mut acc = red.constant.clone();
        for (k, c) in &red.primaries {
            acc += c * self.get(k)?;
        }
        Some(acc)
    }

    pub fn to_json_value(&self) -> serde_json::Value {
        serde_json::Value::Array(
            self.entries
                .iter()
                .map(|(k, (v, p))| {
                    serde_json::json!({
                        "g": k.g,
                        "j": k.j,
                        "A": k.modes(),
                        "D": k.degrees(),
                        "value": format_rational(v),
                        "provenance": p.as_str(),
                    })
                })
                .collect(),
        )
    }

    pub fn from_json_value(v: &serde_json::Value) -> Result<Self> {
        let bad = |s: &str| Error::Parse(crate::error::ParseError::Invalid(s.into()));
        let arr = v.as_array().ok_or_else(|| bad("table must be an array"))?;
        let mut t = IntersectionTable::new();
        for e in arr {
            let g = e["g"].as_u64().ok_or_else(|| bad("g"))? as u32;
            let j = e["j"].as_u64().ok_or_else(|| bad("j"))? as u32;
            let a: Vec<i64> = serde_json::from_value(e["A"].clone()).map_err(|_| bad("A"))?;
            let d: Vec<u32> = serde_json::from_value(e["D"].clone()).map_err(|_| bad("D"))?;
            if a.len() != d.len() {
                return Err(bad("A and D differ in length"));
            }
            let value = parse_rational(e["value"].as_str().ok_or_else(|| bad("value"))?)?;
            let prov = match e["provenance"].as_str() {
                Some("seed") => Provenance::Seed,
                Some("solved") => Provenance::Solved,
                Some("checked") => Provenance::Checked,
                _ => return Err(bad("provenance")),
            };
            t.insert(IntersectionKey::new(g, j, a.into_iter().zip(d).collect()), value, prov);
        }
        Ok(t)
    }
}

/// A key rewritten as `constant + Σ c·⟨primary⟩`.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Reduced {
    pub constant: Rational,
    pub primaries: BTreeMap<IntersectionKey, Rational>,
}

impl Reduced {
    fn constant(c: Rational) -> Self {
        Reduced {
            constant: c,
            primaries: BTreeMap::new(),
        }
    }

    fn add_scaled(&mut self, o: &Reduced, c: &Rational) {
        self.constant += &o.constant * c;
        for (k, v) in &o.primaries {
            let e = self.primaries.entry(k.clone()).or_insert_with(Rational::zero);
            *e += v * c;
            if e.is_zero() {
                self.primaries.remove(k);
            }
        }
    }
}

/// Whether the solver treats `key` as an unknown rather than rewriting it.
pub fn is_primary(key: &IntersectionKey) -> bool {
    if !key.is_valid() || (key.g == 0 && key.n() == 3) {
        return false;
    }
    if key.g == 1 && key.n() == 1 && key.points[0] == (0, 0) {
        return true;
    }
    !key.points.iter().any(|&p| p == (0, 0) || p == (0, 1))
}

thread_local! {
    static REDUCE_MEMO: std::cell::RefCell<HashMap<IntersectionKey, Reduced>> =
        std::cell::RefCell::new(HashMap::new());
}

/// Rewrites `key` by the string and dilaton equations. Invalid keys are zero;
/// genus-zero three-point keys are one; `⟨τ^0_1⟩_{1,0} = 1/24`.
pub fn reduce(key: &IntersectionKey) -> Reduced {
    if let Some(r) = REDUCE_MEMO.with(|m| m.borrow().get(key).cloned()) {
        return r;
    }
    let r = reduce_uncached(key);
    REDUCE_MEMO.with(|m| m.borrow_mut().insert(key.clone(), r.clone()));
    r
}

fn reduce_uncached(key: &IntersectionKey) -> Reduced {
    if !key.is_valid() {
        return Reduced::default();
    }
    if key.g == 0 && key.n() == 3 {
        return Reduced::constant(Rational::one());
    }
    if key.g == 1 && key.j == 0 && key.points == [(0, 1)] {
        return Reduced::constant(rat(1, 24));
    }
    if is_primary(key) {
        let mut r = Reduced::default();
        r.primaries.insert(key.clone(), Rational::one());
        return r;
    }
    let mut out = Reduced::default();
    if let Some(idx) = key.points.iter().position(|&p| p == (0, 0)) {
        let rest = key.without(idx);
        for i in 0..rest.len() {
            if rest[i].1 == 0 || (i > 0 && rest[i - 1] == rest[i]) {
                continue;
            }
            let mult = rest[i..].iter().take_while(|p| **p == rest[i]).count();
            let mut pts = rest.clone();
            pts[i].1 -= 1;
            out.add_scaled(&reduce(&IntersectionKey::new(key.g, key.j, pts)), &rat_int(mult as i64));
        }
        return out;
    }
    let idx = key.points.iter().position(|&p| p == (0, 1)).expect("non-primary key");
    let factor = 2 * key.g as i64 - 3 + key.n() as i64;
    out.add_scaled(
        &reduce(&IntersectionKey::new(key.g, key.j, key.without(idx))),
        &rat_int(factor),
    );
    out
}

/// Resource bounds for [`solve`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SolverConfig {
    pub g_max: u32,
    pub n_max: usize,
    pub mode_bound: i64,
    pub m_max: u32,
}

impl SolverConfig {
    pub fn new(g_max: u32, n_max: usize, mode_bound: i64, m_max: u32) -> Self {
        SolverConfig {
            g_max,
            n_max,
            mode_bound,
            m_max,
        }
    }

    pub fn in_universe(&self, key: &IntersectionKey) -> bool {
        key.g <= self.g_max
            && key.n() <= self.n_max
            && key.points.iter().all(|p| p.0.abs() <= self.mode_bound)
    }
}

/// Every primary key of the universe.
pub fn universe(cfg: &SolverConfig) -> Vec<IntersectionKey> {
    let mut out = BTreeSet::new();
    let modes: Vec<i64> = (-cfg.mode_bound..=cfg.mode_bound).collect();
    for g in 0..=cfg.g_max {
        for j in 0..=g {
            for n in 1..=cfg.n_max {
                let total = 3 * g as i64 - 3 + n as i64 - j as i64;
                if total < 0 {
                    continue;
                }
                for a in (0..n).map(|_| modes.iter().copied()).multi_cartesian_product() {
                    if a.iter().sum::<i64>() != 0 {
                        continue;
                    }
                    for d in compositions(total as u32, n) {
                        let k = IntersectionKey::new(g, j, a.iter().copied().zip(d).collect());
                        if is_primary(&k) {
                            out.insert(k);
                        }
                    }
                }
            }
        }
    }
    out.into_iter().collect()
}

fn compositions(total: u32, parts: usize) -> Vec<Vec<u32>> {
    if parts == 0 {
        return if total == 0 { vec![vec![]] } else { vec![] };
    }
    (0..=total)
        .flat_map(|first| {
            compositions(total - first, parts - 1).into_iter().map(move |mut rest| {
                rest.insert(0, first);
                rest
            })
        })
        .collect()
}

/// The genus-zero three-point entries with all `d = 0`, valued one.
pub fn seed(table: &mut IntersectionTable, mode_bound: i64) {
    for a in -mode_bound..=mode_bound {
        for b in a..=mode_bound {
            let c = -a - b;
            if c < b || c.abs() > mode_bound {
                continue;
            }
            table.insert(
                IntersectionKey::new(0, 0, vec![(a, 0), (b, 0), (c, 0)]),
                Rational::one(),
                Provenance::Seed,
            );
        }
    }
}

fn keys_at_level(cfg: &SolverConfig, level: u32, extra: usize) -> Vec<IntersectionKey> {
    let capped = SolverConfig {
        n_max: cfg.n_max + extra,
        ..*cfg
    };
    let mut out = BTreeSet::new();
    let modes: Vec<i64> = (-cfg.mode_bound..=cfg.mode_bound).collect();
    for g in 0..=cfg.g_max {
        let n = level as i64 - 3 * g as i64;
        if n < 1 || n as usize > capped.n_max {
            continue;
        }
        let n = n as usize;
        for j in 0..=g {
            let total = 3 * g as i64 - 3 + n as i64 - j as i64;
            if total < 0 {
                continue;
            }
            for a in (0..n).map(|_| modes.iter().copied()).multi_cartesian_product() {
                if a.iter().sum::<i64>() != 0 {
                    continue;
                }
                for d in compositions(total as u32, n) {
                    let k = IntersectionKey::new(g, j, a.iter().copied().zip(d).collect());
                    if k.is_valid() {
                        out.insert(k);
                    }
                }
            }
        }
    }
    out.into_iter().collect()
}

/// String equations for keys at `level` with a `τ^0_0` insertion and at most
/// one point beyond the universe bound.
pub fn string_relations(cfg: &SolverConfig, level: u32) -> Vec<Equation> {
    let mut out = Vec::new();
    for key in keys_at_level(cfg, level, 1) {
        let Some(idx) = key.points.iter().position(|&p| p == (0, 0)) else {
            continue;
        };
        if (key.g == 0 && key.n() == 3) || (key.g == 1 && key.n() == 1) {
            continue;
        }
        let mut eq = Equation::new(Source::String, level, key.to_string());
        eq.push(Scalar::one(), vec![key.clone()]);
        let rest = key.without(idx);
        for i in 0..rest.len() {
            if rest[i].1 > 0 {
                let mut pts = rest.clone();
                pts[i].1 -= 1;
                eq.push(-Scalar::one(), vec![IntersectionKey::new(key.g, key.j, pts)]);
            }
        }
        out.push(eq);
    }
    out
}

/// Dilaton equations for keys at `level` with a `τ^0_1` insertion.
pub fn dilaton_relations(cfg: &SolverConfig, level: u32) -> Vec<Equation> {
    let mut out = Vec::new();
    for key in keys_at_level(cfg, level, 1) {
        let Some(idx) = key.points.iter().position(|&p| p == (0, 1)) else {
            continue;
        };
        let mut eq = Equation::new(Source::Dilaton, level, key.to_string());
        eq.push(Scalar::one(), vec![key.clone()]);
        if key.g == 1 && key.n() == 1 {
            eq.push(Scalar::from_frac(-1, 24), vec![]);
        } else {
            let factor = 2 * key.g as i64 - 3 + key.n() as i64;
            eq.push(
                Scalar::from_int(-factor),
                vec![IntersectionKey::new(key.g, key.j, key.without(idx))],
            );
        }
        out.push(eq);
    }
    out
}

fn q_values(h_max: u32) -> Vec<RatPoly> {
    (0..=h_max as usize).map(q_poly).collect()
}

/// `⟨τ0 τ^{-b}_0 τ0^{k} M⟩` at total `(g, j)` after the `T`-transform:
/// `Σ_h Q_h(b)⟨τ0 τ^{-b}_0 τ0^{k+2h} M⟩_{g−h,j−h}`.
fn u_coefficient(q: &[RatPoly], b: i64, k: u32, m: &[(i64, u32)], g: u32, j: u32) -> Vec<(Rational, IntersectionKey)> {
    let mut out = Vec::new();
    for h in 0..=j {
        let qh = q[h as usize].eval_int(b);
        if qh.is_zero() {
            continue;
        }
        let mut pts = m.to_vec();
        pts.push((0, 0));
        pts.push((-b, 0));
        pts.extend(std::iter::repeat((0, 0)).take((k + 2 * h) as usize));
        let key = IntersectionKey::new(g - h, j - h, pts);
        if key.is_valid() {
            out.push((qh, key));
        }
    }
    out
}

/// Flow equations for `t^0_m` whose left-hand key sits at `level`.
pub fn flow_relations(cfg: &SolverConfig, flows: &FlowTable, m: u32, level: u32) -> Result<Vec<Equation>> {
    let p = flows
        .get(m)
        .ok_or_else(|| Error::MissingEntry(format!("flow {m}")))?;
    let dp = p.dx();
    let q = q_values(cfg.g_max);
    let pairs: Vec<(i64, u32)> = (-cfg.mode_bound..=cfg.mode_bound)
        .flat_map(|a| (0..=3 * cfg.g_max + cfg.n_max as u32).map(move |d| (a, d)))
        .collect();
    let mut out = Vec::new();
    for size in 0..=cfg.n_max {
        for g_top in 0..=cfg.g_max {
            if 3 * g_top + size as u32 + 3 != level {
                continue;
            }
            for mset in pairs.iter().copied().combinations_with_replacement(size) {
                let a: i64 = mset.iter().map(|p| p.0).sum();
                if a.abs() > cfg.mode_bound {
                    continue;
                }
                let dsum: i64 = mset.iter().map(|p| p.1 as i64).sum();
                let j_top = 3 * g_top as i64 + size as i64 - m as i64 - dsum;
                if j_top < 0 || j_top > g_top as i64 {
                    continue;
                }
                if let Some(eq) = flow_equation(&dp, &q, m, &mset, a, g_top, j_top as u32, level) {
                    out.push(eq);
                }
            }
        }
    }
    Ok(out)
}

#[allow(clippy::too_many_arguments)]
fn flow_equation(
    dp: &DiffPoly2,
    q: &[RatPoly],
    m: u32,
    mset: &[(i64, u32)],
    a: i64,
    g_top: u32,
    j_top: u32,
    level: u32,
) -> Option<Equation> {
    let label = format!(
        "t^0_{} mode {} M={:?} eps^{} mu^{}",
        m,
        a,
        mset,
        2 * g_top,
        2 * j_top
    );
    let mut eq = Equation::new(Source::Flow(m), level, label);
    let mut with_m = mset.to_vec();
    with_m.push((0, m));
    for (c, key) in u_coefficient(q, a, 0, &with_m, g_top, j_top) {
        eq.push(Scalar::real(c), vec![key]);
    }
    for (mono, c) in dp.iter() {
        let (e, f) = (mono.eps, mono.mu as i32);
        if e < 0 || e > 2 * g_top as i32 || f > 2 * j_top as i32 || (e - f) % 2 != 0 || e % 2 != 0 {
            continue;
        }
        let g_rest = (2 * g_top as i32 - e) / 2;
        let j_rest = (2 * j_top as i32 - f) / 2;
        let slots = &mono.vars;
        let p = slots.len();
        // every function from the points of M to the factors of the monomial
        let slot_ids: Vec<Vec<usize>> = vec![(0..p).collect(); mset.len()];
        for assign in product(&slot_ids) {
            let mut parts: Vec<Vec<(i64, u32)>> = vec![Vec::new(); p];
            for (pos, &s) in assign.iter().enumerate() {
                parts[s].push(mset[pos]);
            }
            let mut coeff = -c.clone();
            let mut options: Vec<Vec<(u32, u32, Vec<(Rational, IntersectionKey)>)>> = Vec::new();
            let mut dead = false;
            for (s, &(k1, k2)) in slots.iter().enumerate() {
                let b: i64 = parts[s].iter().map(|x| x.0).sum();
                coeff = coeff * Scalar::i_pow(k2 as i64) * Scalar::real(rat_int(b).pow(k2 as i32));
                let dim = parts[s].iter().map(|x| x.1 as i64).sum::<i64>() + 1
                    - k1 as i64
                    - parts[s].len() as i64;
                let mut opts = Vec::new();
                for gs in 0..=g_rest.max(0) as u32 {
                    let js = 3 * gs as i64 - dim;
                    if js < 0 || js > gs as i64 || js > j_rest as i64 {
                        continue;
                    }
                    let terms = u_coefficient(q, b, k1, &parts[s], gs, js as u32);
                    if !terms.is_empty() {
                        opts.push((gs, js as u32, terms));
                    }
                }
                if opts.is_empty() {
                    dead = true;
                    break;
                }
                options.push(opts);
            }
            if dead || coeff.is_zero() {
                continue;
            }
            for choice in product(&options) {
                let gsum: i32 = choice.iter().map(|o| o.0 as i32).sum();
                let jsum: i32 = choice.iter().map(|o| o.1 as i32).sum();
                if gsum != g_rest || jsum != j_rest {
                    continue;
                }
                let pick_lists: Vec<_> = choice.iter().map(|o| o.2.clone()).collect();
                for picks in product(&pick_lists) {
                    let mut cc = coeff.clone();
                    let mut keys = Vec::with_capacity(picks.len());
                    for (qc, k) in picks {
                        cc = cc.scale(&qc);
                        keys.push(k.clone());
                    }
                    eq.push(cc, keys);
                }
            }
        }
    }
    if eq.terms.is_empty() {
        None
    } else {
        Some(eq)
    }
}

/// Cartesian product of `lists`; one empty tuple when `lists` is empty.
fn product<T: Clone>(lists: &[Vec<T>]) -> Vec<Vec<T>> {
    lists.iter().fold(vec![Vec::new()], |acc, list| {
        acc.into_iter()
            .flat_map(|prefix| {
                list.iter().map(move |x| {
                    let mut v = prefix.clone();
                    v.push(x.clone());
                    v
                })
            })
            .collect()
    })
}

/// Per-level solver statistics.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct LevelReport {
    pub level: u32,
    pub unknowns: usize,
    pub equations: usize,
    pub rank: usize,
    pub redundant_consistent: usize,
    pub inconsistent: usize,
    pub determined: usize,
    pub undetermined: usize,
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct ConsistencyReport {
    pub levels: Vec<LevelReport>,
    /// Equations that never became linear or referred outside the universe.
    pub unused_equations: usize,
    pub undetermined: Vec<IntersectionKey>,
}

impl ConsistencyReport {
    pub fn inconsistent(&self) -> usize {
        self.levels.iter().map(|l| l.inconsistent).sum()
    }

    pub fn redundant(&self) -> usize {
        self.levels.iter().map(|l| l.redundant_consistent).sum()
    }

    pub fn to_json_value(&self) -> serde_json::Value {
        serde_json::json!({
            "levels": self.levels.iter().map(|l| serde_json::json!({
                "level": l.level,
                "unknowns": l.unknowns,
                "equations": l.equations,
                "rank": l.rank,
                "redundant_consistent": l.redundant_consistent,
                "inconsistent": l.inconsistent,
                "determined": l.determined,
                "undetermined": l.undetermined,
            })).collect::<Vec<_>>(),
            "unused_equations": self.unused_equations,
            "undetermined": self.undetermined.iter().map(|k| serde_json::json!({
                "g": k.g, "j": k.j, "A": k.modes(), "D": k.degrees(),
            })).collect::<Vec<_>>(),
        })
    }
}

/// `constant + Σ c·x_col`.
#[derive(Clone, Debug, Default)]
struct Affine {
    constant: Rational,
    linear: BTreeMap<usize, Rational>,
}

impl Affine {
    fn is_constant(&self) -> bool {
        self.linear.is_empty()
    }

    fn scale(&self, c: &Rational) -> Affine {
        Affine {
            constant: &self.constant * c,
            linear: self.linear.iter().map(|(k, v)| (*k, v * c)).collect(),
        }
    }
}

struct State {
    cfg: SolverConfig,
    cols: HashMap<IntersectionKey, usize>,
    keys: Vec<IntersectionKey>,
    known: HashMap<IntersectionKey, Rational>,
    rref: Rref,
}

impl State {
    fn column(&mut self, key: &IntersectionKey) -> usize {
        if let Some(&c) = self.cols.get(key) {
            return c;
        }
        let c = self.keys.len();
        self.keys.push(key.clone());
        self.cols.insert(key.clone(), c);
        c
    }

    /// `None` when a needed primary lies outside the universe.
    fn eval(&mut self, key: &IntersectionKey) -> Option<Affine> {
        let red = reduce(key);
        let mut out = Affine {
            constant: red.constant.clone(),
            linear: BTreeMap::new(),
        };
        for (k, c) in &red.primaries {
            if let Some(v) = self.known.get(k) {
                out.constant += c * v;
            } else if self.cfg.in_universe(k) {
                let col = self.column(k);
                *out.linear.entry(col).or_insert_with(Rational::zero) += c;
            } else {
                return None;
            }
        }
        out.linear.retain(|_, v| !v.is_zero());
        Some(out)
    }

    /// Real and imaginary rows, or `None` if the equation is not linear yet.
    fn linearize(&mut self, eq: &Equation) -> Option<[SparseRow; 2]> {
        let mut rows = [SparseRow::new(), SparseRow::new()];
        for (c, keys) in &eq.terms {
            let mut lin: Option<Affine> = None;
            let mut constant = Rational::one();
            for k in keys {
                let a = self.eval(k)?;
                if a.is_constant() {
                    constant *= &a.constant;
                } else if lin.is_some() {
                    return None;
                } else {
                    lin = Some(a);
                }
                if constant.is_zero() {
                    break;
                }
            }
            if constant.is_zero() {
                continue;
            }
            let affine = match lin {
                Some(a) => a.scale(&constant),
                None => Affine {
                    constant,
                    linear: BTreeMap::new(),
                },
            };
            for (row, part) in rows.iter_mut().zip([&c.re, &c.im]) {
                if part.is_zero() {
                    continue;
                }
                for (col, v) in &affine.linear {
                    row.add(*col, &(v * part));
                }
                row.rhs -= &affine.constant * part;
            }
        }
        Some(rows)
    }

    fn harvest(&mut self) -> usize {
        let mut found = 0;
        for (col, key) in self.keys.iter().enumerate() {
            if self.known.contains_key(key) {
                continue;
            }
            if let Some(v) = self.rref.value(col) {
                self.known.insert(key.clone(), v);
                found += 1;
            }
        }
        found
    }
}

/// Solves level by level in increasing `3g+n` (ties by `g` inside a level's
/// equation list). Aborts on any inconsistent equation.
pub fn solve(cfg: SolverConfig, flows: &FlowTable) -> Result<(IntersectionTable, ConsistencyReport)> {
    if cfg.g_max == 0 && cfg.n_max < 3 || cfg.mode_bound < 0 || cfg.m_max == 0 {
        return Err(Error::OutOfRange("solver bounds must be positive".into()));
    }
    let mut st = State {
        cfg,
        cols: HashMap::new(),
        keys: Vec::new(),
        known: HashMap::new(),
        rref: Rref::new(),
    };
    let all = universe(&cfg);
    for k in &all {
        st.column(k);
    }
    let top = 3 * cfg.g_max + cfg.n_max as u32 + 3;
    let mut report = ConsistencyReport::default();
    let mut pending: Vec<Equation> = Vec::new();
    for level in 1..=top {
        let mut eqs = string_relations(&cfg, level);
        eqs.extend(dilaton_relations(&cfg, level));
        for m in 1..=cfg.m_max {
            eqs.extend(flow_relations(&cfg, flows, m, level)?);
        }
        let mut lr = LevelReport {
            level,
            unknowns: all.iter().filter(|k| k.level() == level).count(),
            ..Default::default()
        };
        let rank0 = st.rref.rank();
        let mut queue = std::mem::take(&mut pending);
        queue.extend(eqs);
        loop {
            let mut progress = false;
            let mut next = Vec::new();
            for eq in queue {
                match st.linearize(&eq) {
                    None => next.push(eq),
                    Some(rows) => {
                        lr.equations += 1;
                        for row in rows {
                            match st.rref.push(row) {
                                RowOutcome::Pivot(_) => {}
                                RowOutcome::Redundant => lr.redundant_consistent += 1,
                                RowOutcome::Inconsistent(_) => {
                                    return Err(Error::InconsistentSystem {
                                        level,
                                        equations: vec![format!("{}: {}", eq.source, eq.label)],
                                    });
                                }
                            }
                        }
                    }
                }
            }
            if st.harvest() > 0 {
                progress = true;
            }
            queue = next;
            if !progress || queue.is_empty() {
                break;
            }
        }
        pending = queue;
        lr.rank = st.rref.rank() - rank0;
        report.levels.push(lr);
    }
    report.unused_equations = pending.len();
    let mut table = IntersectionTable::new();
    seed(&mut table, cfg.mode_bound);
    for k in &all {
        match st.known.get(k) {
            Some(v) => table.insert(k.clone(), v.clone(), Provenance::Solved),
            None => report.undetermined.push(k.clone()),
        }
    }
    for lr in report.levels.iter_mut() {
        let at: Vec<_> = all.iter().filter(|k| k.level() == lr.level).collect();
        lr.determined = at.iter().filter(|k| st.known.contains_key(**k)).count();
        lr.undetermined = at.len() - lr.determined;
    }
    Ok((table, report))
}

/// Fits `value(g, j, a·pattern, D)` as a polynomial of degree `≤ 2j` in `a`
/// through all but the last sample, then checks the last sample.
pub fn polynomial_fit(
    table: &IntersectionTable,
    g: u32,
    j: u32,
    pattern: &[i64],
    d: &[u32],
    samples: &[i64],
) -> Result<RatPoly> {
    if pattern.len() != d.len() {
        return Err(Error::ArityMismatch {
            expected: pattern.len(),
            found: d.len(),
        });
    }
    let need = 2 * j as usize + 2;
    if samples.len() < need {
        return Err(Error::OutOfRange(format!(
            "degree {} fit needs {} samples plus one check",
            2 * j,
            need - 1
        )));
    }
    let lookup = |a: i64| -> Result<Rational> {
        let key = IntersectionKey::new(g, j, pattern.iter().map(|&p| p * a).zip(d.iter().copied()).collect());
        table
            .value(&key)
            .ok_or_else(|| Error::MissingEntry(key.to_string()))
    };
    let (check, fit) = samples.split_last().expect("nonempty");
    let pts = fit
        .iter()
        .map(|&a| Ok((rat_int(a), lookup(a)?)))
        .collect::<Result<Vec<_>>>()?;
    let poly = RatPoly::interpolate(&pts);
    let found = lookup(*check)?;
    let expected = poly.eval_int(*check);
    if found != expected || poly.degree().unwrap_or(0) > 2 * j as usize {
        return Err(Error::FitValidationFailed {
            at: *check,
            expected: format_rational(&expected),
            found: format_rational(&found),
        });
    }
    Ok(poly)
}

/// Flows `P_1..P_{m_max}` at the precision the solver needs.
pub fn solver_flows(cfg: &SolverConfig) -> Result<FlowTable> {
    FlowTable::compute(cfg.m_max, Some(2 * cfg.g_max as i32))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::predictors::{bssz, dvv_intersection};

    fn key(g: u32, j: u32, p: &[(i64, u32)]) -> IntersectionKey {
        IntersectionKey::new(g, j, p.to_vec())
    }

    #[test]
    fn validity() {
        assert!(key(0, 0, &[(0, 0), (1, 0), (-1, 0)]).is_valid());
        assert!(!key(0, 1, &[(0, 0), (1, 0), (-1, 0)]).is_valid());
        assert!(!key(0, 0, &[(1, 0), (1, 0), (-1, 0)]).is_valid());
        assert!(key(1, 1, &[(0, 0)]).is_valid());
    }

    #[test]
    fn string_and_dilaton_rewriting() {
        assert_eq!(reduce(&key(0, 0, &[(0, 1), (0, 0), (0, 0), (0, 0)])).constant, rat_int(1));
        assert_eq!(reduce(&key(0, 0, &[(0, 1), (0, 1), (1, 0), (-1, 0), (0, 0)])).constant, rat_int(2));
        assert!(reduce(&key(0, 0, &[(0, 0), (0, 1), (1, 0), (-1, 0), (0, 0)])).constant.is_zero());
        assert_eq!(reduce(&key(1, 0, &[(0, 1)])).constant, rat(1, 24));
        let r = reduce(&key(1, 0, &[(0, 1), (0, 1)]));
        assert_eq!(r.constant, rat(1, 24));
        assert!(reduce(&key(1, 1, &[(0, 0)])).primaries.contains_key(&key(1, 1, &[(0, 0)])));
    }

    #[test]
    fn seed_contains_anchors() {
        let mut t = IntersectionTable::new();
        seed(&mut t, 2);
        assert_eq!(t.get(&key(0, 0, &[(0, 0), (0, 0), (0, 0)])), Some(&rat_int(1)));
        assert_eq!(t.get(&key(0, 0, &[(1, 0), (-1, 0), (0, 0)])), Some(&rat_int(1)));
    }

    #[test]
    fn small_solve_is_consistent_and_matches_oracles() {
        let cfg = SolverConfig::new(1, 2, 2, 1);
        let flows = solver_flows(&cfg).unwrap();
        let (table, report) = solve(cfg, &flows).unwrap();
        assert_eq!(report.inconsistent(), 0);
        for (k, v, _) in table.iter() {
            if k.j == 0 {
                assert_eq!(*v, dvv_intersection(k.g, &k.degrees()), "{k}");
            }
        }
        for a in 0..=2 {
            let k = key(1, 1, &[(a, 1), (-a, 0)]);
            assert_eq!(table.value(&k), Some(bssz(1, a).unwrap()), "{k}");
        }
        assert_eq!(table.value(&key(1, 1, &[(0, 0)])), Some(rat(-1, 24)));
    }

    #[test]
    fn fit_recovers_dr_one() {
        let cfg = SolverConfig::new(1, 2, 3, 1);
        let flows = solver_flows(&cfg).unwrap();
        let (table, _) = solve(cfg, &flows).unwrap();
        let p = polynomial_fit(&table, 1, 1, &[1, -1], &[1, 0], &[0, 1, 2, 3]).unwrap();
        assert_eq!(p, RatPoly::new(vec![rat(-1, 24), rat_int(0), rat(1, 24)]));
    }

    #[test]
    fn table_json_roundtrip() {
        let mut t = IntersectionTable::new();
        seed(&mut t, 1);
        t.insert(key(1, 1, &[(1, 1), (-1, 0)]), rat(0, 1), Provenance::Solved);
        let back = IntersectionTable::from_json_value(&t.to_json_value()).unwrap();
        assert_eq!(back, t);
    }
}

//! Verification suites, one per acceptance criterion plus the closed-form
//! predictor identities.

use std::io::Write;

use clap::ValueEnum;
use num_traits::Zero;
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

use nckdv::hierarchy::{
    check_commutativity, check_genus_shape, classical_flow, dispersionless_flow, flow, genus_parts,
};
use nckdv::predictors::{
    bssz, check_rjg, dvv_intersection, one_point_witten, one_psi_pixton, q_inverse_poly, q_poly,
    series_bg, series_s, series_s_i, t_inverse_identity,
};
use nckdv::scalar::{format_rational, rat, rat_int};
use nckdv::series::RatPoly;
use nckdv::stablegraphs::{enumerate, weighting_count};
use nckdv::tausolver::{polynomial_fit, solve, solver_flows, IntersectionKey, SolverConfig};
use nckdv::{DiffPoly2, Monomial2, Rational, Scalar, Truncation};

type Res<T> = Result<T, Box<dyn std::error::Error>>;

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Suite {
    /// Flows 1 and 2 against their closed forms.
    Flows,
    /// Classical flows and the μ = 0 projection.
    Classical,
    /// Genus decomposition and commutativity.
    Genus,
    /// S, Q_g and b_g series.
    Series,
    /// One-psi generator.
    Onepsi,
    /// Correlator solver at desk scale.
    Solver,
    /// Stable graphs and weightings.
    Graphs,
    Bssz,
    Dvv,
    Rjg,
    All,
}

struct Report<'a, W: Write> {
    out: &'a mut W,
    ok: bool,
}

impl<W: Write> Report<'_, W> {
    fn check(&mut self, name: &str, pass: bool, detail: impl AsRef<str>) -> std::io::Result<()> {
        self.ok &= pass;
        writeln!(
            self.out,
            "{} {}: {}",
            if pass { "PASS" } else { "FAIL" },
            name,
            detail.as_ref()
        )
    }
}

fn term(eps: i32, mu: u32, vars: &[(u32, u32)], c: Rational) -> DiffPoly2 {
    DiffPoly2::term(Monomial2::new(eps, mu, vars.to_vec()), Scalar::real(c))
}

/// `(u*u*u)/6 + ε²/24(u*u_xx + u_x*u_x + u_xx*u) + ε⁴/240 u_xxxx` within `eps ≤ eps_max`.
fn second_flow_closed_form(eps_max: i32) -> DiffPoly2 {
    let cap = eps_max.max(0) as u32;
    let st = |a: &DiffPoly2, b: &DiffPoly2| a.moyal(b, cap).truncate(Some(eps_max), None);
    let u = DiffPoly2::u();
    let (u1, u2) = (DiffPoly2::var(1, 0), DiffPoly2::var(2, 0));
    let cubic = st(&st(&u, &u), &u).scale(&Scalar::from_frac(1, 6));
    let mid = st(&u, &u2).add(&st(&u1, &u1)).add(&st(&u2, &u));
    let mid = mid.shift(2, 0).scale(&Scalar::from_frac(1, 24)).truncate(Some(eps_max), None);
    cubic.add(&mid).add(&term(4, 0, &[(4, 0)], rat(1, 240)))
}

fn first_flow_closed_form(eps_max: i32) -> DiffPoly2 {
    let u = DiffPoly2::u();
    u.moyal(&u, eps_max.max(0) as u32)
        .truncate(Some(eps_max), None)
        .scale(&Scalar::from_frac(1, 2))
        .add(&term(2, 0, &[(2, 0)], rat(1, 12)))
}

fn suite_flows<W: Write>(r: &mut Report<W>) -> Res<()> {
    for (n, closed) in [(1, first_flow_closed_form as fn(i32) -> DiffPoly2), (2, second_flow_closed_form)] {
        let t = Truncation::for_flow(n);
        let p = flow(n, t)?;
        r.check(
            &format!("flow {n} equals its closed form"),
            p == closed(t.eps_max),
            format!("{} terms, eps_max {}", p.len(), t.eps_max),
        )?;
        r.check(&format!("flow {n} is real"), p.is_real(), "")?;
        r.check(
            &format!("flow {n} has degree (0,0)"),
            p.homogeneous_degree() == Some((0, 0)),
            format!("{:?}", p.homogeneous_degree()),
        )?;
    }
    Ok(())
}

fn suite_classical<W: Write>(r: &mut Report<W>) -> Res<()> {
    let expected = term(0, 0, &[(0, 0); 3], rat(1, 6))
        .add(&term(2, 0, &[(0, 0), (2, 0)], rat(1, 12)))
        .add(&term(2, 0, &[(1, 0), (1, 0)], rat(1, 24)))
        .add(&term(4, 0, &[(4, 0)], rat(1, 240)));
    let c2 = classical_flow(2, Truncation::for_flow(2))?;
    r.check("classical flow 2", c2 == expected, c2.to_string())?;
    for n in 1..=4 {
        let t = Truncation::for_flow(n);
        let moyal = flow(n, t.with_mu_max(0))?;
        let classical = classical_flow(n, t)?;
        r.check(
            &format!("flow {n} at mu=0 equals classical flow {n}"),
            moyal == classical,
            format!("{} terms", classical.len()),
        )?;
    }
    Ok(())
}

fn suite_genus<W: Write>(r: &mut Report<W>) -> Res<()> {
    for n in 1..=4 {
        let t = Truncation::for_flow(n);
        let p = flow(n, t)?;
        let parts = genus_parts(&p);
        let p0 = parts.get(&0).cloned().unwrap_or_default();
        let disp = dispersionless_flow(n, t.eps_max as u32);
        r.check(&format!("P_{{{n},0}} is the dispersionless flow"), p0 == disp, format!("{} terms", p0.len()))?;
        let shape = check_genus_shape(n, &p);
        r.check(
            &format!("P_{n} genus shape"),
            shape.is_ok(),
            match shape {
                Ok(()) => format!("{} terms in genera {:?}", p.len(), parts.keys().collect::<Vec<_>>()),
                Err(m) => format!("offending monomial {:?}", m),
            },
        )?;
        r.check(&format!("P_{n} is real"), p.is_real(), "")?;
    }
    let window = Truncation::new(-9, 8);
    for (m, n) in [(1, 2), (1, 3), (2, 3)] {
        let ok = check_commutativity(m, n, window)?;
        r.check(&format!("flows {m} and {n} commute"), ok, "eps_max 8, mu_max 8")?;
    }
    Ok(())
}

fn suite_series<W: Write>(r: &mut Report<W>) -> Res<()> {
    let s = series_s(20);
    let want = [rat_int(1), rat(1, 24), rat(1, 1920)];
    let got: Vec<Rational> = (0..3).map(|k| s.coeff(2 * k)).collect();
    r.check("S coefficients", got == want, got.iter().map(format_rational).collect::<Vec<_>>().join(", "))?;
    let q1 = RatPoly::new(vec![rat(1, 24), rat_int(0), rat(-1, 24)]);
    let q2 = RatPoly::new(vec![rat(3, 5760), rat_int(0), rat(-10, 5760), rat_int(0), rat(7, 5760)]);
    r.check("Q_1(a)", q_poly(1) == q1, q_poly(1).to_string())?;
    r.check("Q_2(a)", q_poly(2) == q2, q_poly(2).to_string())?;
    let prod = series_bg(20).mul(&series_s_i(20));
    r.check("b-series times S(iz) is 1 to order 20", prod == nckdv::series::PowerSeries::one(20), "")?;
    let inv_ok = s.mul(&s.inv()) == nckdv::series::PowerSeries::one(20);
    r.check("S times 1/S is 1 to order 20", inv_ok, "")?;
    let t_ok = (0..=5).all(|a| t_inverse_identity(a, 20));
    r.check("T(a,z)/T(a,z) is 1 for a in 0..5", t_ok, "")?;
    Ok(())
}

fn suite_onepsi<W: Write>(r: &mut Report<W>) -> Res<()> {
    let t1 = one_psi_pixton(1, 0, 0)?;
    r.check("<tau_1>_1 from the mu=0 generator", t1 == rat(1, 24), format_rational(&t1))?;
    let t4 = one_psi_pixton(2, 0, 0)?;
    r.check("<tau_4>_2 from the mu=0 generator", t4 == rat(1, 1152), format_rational(&t4))?;
    r.check(
        "mu=0 generator agrees with DVV",
        (1..=4).all(|g| one_point_witten(g) == dvv_intersection(g, &[3 * g - 2])),
        "g = 1..4",
    )?;
    for a in 0..=3 {
        let v = one_psi_pixton(2, 1, a)?;
        let want = rat(a * a - 1, 576);
        r.check(&format!("(g=2, j=1) coefficient at a={a}"), v == want, format_rational(&v))?;
    }
    for g in 1..=4u32 {
        for j in 0..=g {
            let pts: Vec<_> = (0..=2 * j as i64 + 2)
                .map(|a| Ok((rat_int(a), one_psi_pixton(g, j, a)?)))
                .collect::<nckdv::Result<_>>()?;
            let p = RatPoly::interpolate(&pts);
            let check = 2 * j as i64 + 3;
            let ok = p.is_even()
                && p.degree().unwrap_or(0) <= 2 * j as usize
                && p.eval_int(check) == one_psi_pixton(g, j, check)?;
            r.check(&format!("one-psi (g={g}, j={j}) is an even polynomial of degree <= 2j"), ok, p.to_string())?;
        }
    }
    Ok(())
}

fn suite_bssz<W: Write>(r: &mut Report<W>) -> Res<()> {
    for a in 0..=4 {
        let v = bssz(1, a)?;
        r.check(&format!("bssz(1, {a})"), v == rat(a * a - 1, 24), format_rational(&v))?;
    }
    r.check("bssz(g, 1) = 0", (1..=6).all(|g| bssz(g, 1).map(|v| v.is_zero()).unwrap_or(false)), "g = 1..6")?;
    let inv_s = series_s(12).inv();
    let a0 = (1..=6).all(|g| bssz(g, 0).ok() == Some(inv_s.coeff(2 * g as usize)));
    r.check("bssz(g, 0) is the coefficient of 1/S", a0, "g = 1..6")?;
    r.check("bssz(g, a) = Qtilde_g(a)", (1..=4).all(|g| (0..=3).all(|a| bssz(g, a).ok() == Some(q_inverse_poly(g as usize).eval_int(a)))), "")?;
    Ok(())
}

fn suite_dvv<W: Write>(r: &mut Report<W>, seed: u64) -> Res<()> {
    let anchors = [
        (0, vec![0, 0, 0], rat_int(1)),
        (1, vec![1], rat(1, 24)),
        (2, vec![4], rat(1, 1152)),
        (2, vec![2, 3], rat(29, 5760)),
        (0, vec![1, 1, 0, 0, 0], rat_int(2)),
    ];
    for (g, d, v) in anchors {
        let got = dvv_intersection(g, &d);
        r.check(&format!("<tau {:?}>_{}", d, g), got == v, format_rational(&got))?;
    }
    let mut rng = StdRng::seed_from_u64(seed);
    let mut fails = 0;
    let trials = 40;
    for _ in 0..trials {
        let g = rng.gen_range(0..=3u32);
        let n = rng.gen_range(1..=4usize);
        let total = 3 * g as i64 - 3 + n as i64 + 1;
        if total < 0 || 2 * g as i64 - 2 + n as i64 <= 0 {
            continue;
        }
        // random composition of `total` into n parts
        let mut d = vec![0u32; n];
        for _ in 0..total {
            d[rng.gen_range(0..n)] += 1;
        }
        let mut with0 = d.clone();
        with0.push(0);
        let lhs = dvv_intersection(g, &with0);
        let mut rhs = Rational::zero();
        for i in 0..n {
            if d[i] > 0 {
                let mut e = d.clone();
                e[i] -= 1;
                rhs += dvv_intersection(g, &e);
            }
        }
        if lhs != rhs {
            fails += 1;
        }
    }
    r.check("string identity on random inputs", fails == 0, format!("seed {seed}, {trials} trials"))?;
    Ok(())
}

fn suite_rjg<W: Write>(r: &mut Report<W>) -> Res<()> {
    for g in 0..=3 {
        for j in 0..=g {
            let ok = (0..=3).all(|a| {
                check_rjg(g, j, a, |gg, jj| nckdv::predictors::one_psi_three_point(gg, jj, a).ok()).unwrap_or(false)
            });
            r.check(&format!("R^{j}_{g} from the closed form"), ok, "a = 0..3")?;
        }
    }
    Ok(())
}

fn suite_solver<W: Write>(r: &mut Report<W>) -> Res<()> {
    let cfg = SolverConfig::new(2, 3, 3, 3);
    let flows = solver_flows(&cfg)?;
    let (table, report) = solve(cfg, &flows)?;
    r.check(
        "no inconsistent equations",
        report.inconsistent() == 0,
        format!("{} redundant rows consistent", report.redundant()),
    )?;
    let mut bad = Vec::new();
    let mut count = 0;
    for (k, v, _) in table.iter() {
        if k.j == 0 {
            count += 1;
            if *v != dvv_intersection(k.g, &k.degrees()) {
                bad.push(k.to_string());
            }
        }
    }
    r.check("j=0 entries equal DVV", bad.is_empty(), format!("{count} entries {}", bad.join(" ")))?;
    let mut onepsi_ok = true;
    for g in 1..=2u32 {
        for j in 0..=g {
            for a in 0..=3i64 {
                let k = IntersectionKey::new(g, j, vec![(a, 3 * g - 1 - j), (-a, 0)]);
                onepsi_ok &= table.value(&k) == Some(one_psi_pixton(g, j, a)?);
            }
        }
    }
    r.check("(g,2) one-psi entries equal the generator", onepsi_ok, "g <= 2, a <= 3")?;
    let mut bssz_ok = true;
    for g in 1..=2u32 {
        for a in 0..=3i64 {
            let k = IntersectionKey::new(g, g, vec![(a, 2 * g - 1), (-a, 0)]);
            bssz_ok &= table.value(&k) == Some(bssz(g, a)?);
        }
    }
    r.check("bssz values at j=g, n=2", bssz_ok, "g <= 2, a <= 3")?;
    let mut rjg_ok = true;
    for g in 0..=2u32 {
        for j in 0..=g {
            for a in 0..=3i64 {
                let t = |gg: u32, jj: u32| {
                    table.value(&IntersectionKey::new(gg, jj, vec![(a, 3 * gg - jj), (-a, 0), (0, 0)]))
                };
                rjg_ok &= check_rjg(g, j, a, t).unwrap_or(false);
            }
        }
    }
    r.check("R^j_g from solved (g,3) entries", rjg_ok, "g <= 2, j <= g, a <= 3")?;
    let mut odd_ok = true;
    let mut fits = 0;
    for g in 1..=2u32 {
        for j in 0..=g {
            if 2 * j as i64 + 1 > 3 {
                continue;
            }
            for (pattern, d) in [
                (vec![1, -1], vec![3 * g - 1 - j, 0]),
                (vec![1, -1, 0], vec![3 * g - j, 0, 0]),
            ] {
                let samples: Vec<i64> = (0..=2 * j as i64 + 1).collect();
                let p = polynomial_fit(&table, g, j, &pattern, &d, &samples)?;
                fits += 1;
                odd_ok &= p.is_even();
            }
        }
    }
    r.check("fitted polynomials are even in a", odd_ok, format!("{fits} fits"))?;
    r.check(
        "undetermined keys reported",
        true,
        format!("{} undetermined of {} solved", report.undetermined.len(), table.len()),
    )?;
    Ok(())
}

fn suite_graphs<W: Write>(r: &mut Report<W>) -> Res<()> {
    let mut ok = true;
    let mut checked = 0;
    for g in 0..=2u32 {
        for n in 0..=2usize {
            if 2 * g as i64 - 2 + n as i64 <= 0 {
                continue;
            }
            let weights: Vec<Vec<i64>> = match n {
                0 => vec![vec![]],
                1 => vec![vec![0]],
                _ => (-2..=2).map(|a| vec![a, -a]).collect(),
            };
            for gr in enumerate(g, n)? {
                for a in &weights {
                    for rr in [1u32, 2, 3, 5] {
                        checked += 1;
                        ok &= weighting_count(&gr, a, rr)? == (rr as u64).pow(gr.h1() as u32);
                    }
                }
            }
        }
    }
    r.check("|W_{Gamma,r}| = r^h1", ok, format!("{checked} cases"))?;
    let c = enumerate(1, 1)?.len();
    r.check("|G_{1,1}| = 2", c == 2, c.to_string())?;
    Ok(())
}

/// Runs `suite`, writing one line per check; `Ok(true)` iff all pass.
pub fn run<W: Write>(suite: Suite, seed: u64, out: &mut W) -> Res<bool> {
    let mut r = Report { out, ok: true };
    let all = suite == Suite::All;
    if all || suite == Suite::Flows {
        suite_flows(&mut r)?;
    }
    if all || suite == Suite::Classical {
        suite_classical(&mut r)?;
    }
    if all || suite == Suite::Genus {
        suite_genus(&mut r)?;
    }
    if all || suite == Suite::Series {
        suite_series(&mut r)?;
    }
    if all || suite == Suite::Onepsi {
        suite_onepsi(&mut r)?;
    }
    if all || suite == Suite::Bssz {
        suite_bssz(&mut r)?;
    }
    if all || suite == Suite::Dvv {
        suite_dvv(&mut r, seed)?;
    }
    if all || suite == Suite::Rjg {
        suite_rjg(&mut r)?;
    }
    if all || suite == Suite::Solver {
        suite_solver(&mut r)?;
    }
    if all || suite == Suite::Graphs {
        suite_graphs(&mut r)?;
    }
    Ok(r.ok)
}

use num_traits::Zero;
use proptest::prelude::*;

use nckdv::predictors::{dvv_intersection, one_psi_pixton, q_poly, t_inverse_identity};
use nckdv::scalar::{format_rational, parse_rational, rat};
use nckdv::stablegraphs::{aut_order, enumerate, weighting_count};
use nckdv::psido::CoeffProduct;
use nckdv::{DiffPoly2, Monomial2, PsiDO, Rational, Scalar, Truncation};

fn poly() -> impl Strategy<Value = DiffPoly2> {
    let var = (0u32..3, 0u32..3);
    let mono = prop::collection::vec(var, 1..3);
    prop::collection::vec((mono, -3i64..=3, 1i64..4), 1..4).prop_map(|terms| {
        DiffPoly2::from_terms(
            terms
                .into_iter()
                .map(|(v, n, d)| (Monomial2::new(0, 0, v), Scalar::from_frac(n, d))),
        )
    })
}

fn linear() -> impl Strategy<Value = DiffPoly2> {
    prop::collection::vec(((0u32..3, 0u32..2), -3i64..=3), 1..3).prop_map(|terms| {
        DiffPoly2::from_terms(terms.into_iter().map(|(v, c)| (Monomial2::new(0, 0, vec![v]), Scalar::from_int(c))))
    })
}

fn monomial() -> impl Strategy<Value = DiffPoly2> {
    (prop::collection::vec((0u32..3, 0u32..3), 1..3), 0i32..2, 0u32..2, -3i64..=3)
        .prop_filter("nonzero", |t| t.3 != 0)
        .prop_map(|(v, e, m, c)| DiffPoly2::term(Monomial2::new(2 * e, 2 * m, v), Scalar::from_int(c)))
}

fn operator(t: Truncation) -> impl Strategy<Value = PsiDO> {
    prop::collection::vec((-1i32..=2, linear()), 1..3)
        .prop_map(move |cs| PsiDO::from_coeffs(t, CoeffProduct::Moyal, cs))
}

fn cut(p: DiffPoly2, e: i32) -> DiffPoly2 {
    p.truncate(Some(e), None)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn moyal_is_associative(f in poly(), g in poly(), h in poly()) {
        let e = 3;
        let lhs = cut(cut(f.moyal(&g, 3), e).moyal(&h, 3), e);
        let rhs = cut(f.moyal(&cut(g.moyal(&h, 3), e), 3), e);
        prop_assert_eq!(lhs, rhs);
    }

    #[test]
    fn derivations_obey_leibniz(f in poly(), g in poly()) {
        let e = 3;
        let star = |a: &DiffPoly2, b: &DiffPoly2| cut(a.moyal(b, 3), e);
        prop_assert_eq!(star(&f, &g).dx(), star(&f.dx(), &g).add(&star(&f, &g.dx())));
        prop_assert_eq!(star(&f, &g).dy(), star(&f.dy(), &g).add(&star(&f, &g.dy())));
    }

    #[test]
    fn symmetrized_star_is_real(f in poly(), g in poly()) {
        let s = cut(f.moyal(&g, 4).add(&g.moyal(&f, 4)), 4);
        prop_assert!(s.is_real());
        prop_assert_eq!(s.at_mu_zero(), f.mul(&g).scale(&Scalar::from_int(2)));
    }

    #[test]
    fn star_is_graded(f in monomial(), g in monomial()) {
        let (a, b) = (f.homogeneous_degree().unwrap(), g.homogeneous_degree().unwrap());
        let p = f.moyal(&g, 4);
        prop_assume!(!p.is_zero());
        prop_assert_eq!(p.homogeneous_degree(), Some((a.0 + b.0, a.1 + b.1)));
    }

    #[test]
    fn star_parity_parts(f in poly(), g in poly()) {
        let fg = f.moyal(&g, 5);
        let gf = g.moyal(&f, 5);
        let half = Scalar::from_frac(1, 2);
        let odd = fg.mu_parity_part(true);
        let even = fg.mu_parity_part(false);
        prop_assert_eq!(&odd, &fg.sub(&gf).scale(&half));
        prop_assert_eq!(&even, &fg.add(&gf).scale(&half));
        prop_assert_eq!(odd.add(&even), fg);
    }

    #[test]
    fn partial_derivatives_commute(f in poly()) {
        prop_assert_eq!(f.dx().dy(), f.dy().dx());
        prop_assert_eq!(f.mul(&f).dx(), f.dx().mul(&f).scale(&Scalar::from_int(2)));
    }

    #[test]
    fn sqrt_squares_back(a0 in linear(), am1 in linear()) {
        let t = Truncation::new(-4, 2);
        let a = PsiDO::from_coeffs(t, CoeffProduct::Moyal, [(2, DiffPoly2::one()), (0, a0), (-1, am1)]);
        let r = a.sqrt().unwrap();
        prop_assert_eq!(r.compose(&r).unwrap().orders_from(-3), a.orders_from(-3));
    }

    #[test]
    fn x_integrate_inverts_dx(f in poly()) {
        prop_assert_eq!(f.dx().x_integrate().unwrap(), f);
    }

    #[test]
    fn diffpoly_json_roundtrip(f in poly(), g in poly()) {
        let p = cut(f.moyal(&g, 2), 2);
        prop_assert_eq!(DiffPoly2::from_json(&p.to_json()).unwrap(), p);
    }

    #[test]
    fn rational_format_roundtrip(n in -10_000i64..10_000, d in 1i64..10_000) {
        let r = rat(n, d);
        prop_assert_eq!(parse_rational(&format_rational(&r)).unwrap(), r);
    }

    #[test]
    fn dvv_string_and_dilaton(g in 0u32..4, d in prop::collection::vec(0u32..6, 1..5)) {
        let n = d.len() as u32;
        prop_assume!(2 * g + n > 2);
        let with = |x: u32| { let mut v = d.clone(); v.push(x); v };
        let mut rhs = Rational::zero();
        for i in 0..d.len() {
            if d[i] > 0 {
                let mut e = d.clone();
                e[i] -= 1;
                rhs += dvv_intersection(g, &e);
            }
        }
        prop_assert_eq!(dvv_intersection(g, &with(0)), rhs);
        let factor = rat(2 * g as i64 - 2 + n as i64, 1);
        prop_assert_eq!(dvv_intersection(g, &with(1)), factor * dvv_intersection(g, &d));
    }

    #[test]
    fn t_series_inverts(a in -6i64..=6) {
        prop_assert!(t_inverse_identity(a, 12));
    }

    #[test]
    fn one_psi_is_even_in_a(g in 1u32..4, j in 0u32..4, a in 0i64..6) {
        prop_assume!(j <= g);
        prop_assert_eq!(one_psi_pixton(g, j, a).unwrap(), one_psi_pixton(g, j, -a).unwrap());
    }

    #[test]
    fn weightings_count_r_to_h1(g in 1u32..3, a in -4i64..=4, r in 1u32..8) {
        for gr in enumerate(g, 2).unwrap() {
            prop_assert_eq!(weighting_count(&gr, &[a, -a], r).unwrap(), (r as u64).pow(gr.h1() as u32));
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn compose_is_associative(
        a in operator(Truncation::new(-5, 2)),
        b in operator(Truncation::new(-5, 2)),
        c in operator(Truncation::new(-5, 2)),
    ) {
        let lhs = a.compose(&b).unwrap().compose(&c).unwrap().orders_from(1);
        let rhs = a.compose(&b.compose(&c).unwrap()).unwrap().orders_from(1);
        prop_assert_eq!(lhs, rhs);
    }
}

#[test]
fn q_polys_are_even_and_vanish_at_one() {
    for g in 0..8 {
        let q = q_poly(g);
        assert!(q.is_even());
        assert_eq!(q.eval_int(1), rat(if g == 0 { 1 } else { 0 }, 1));
    }
}

#[test]
fn automorphisms_are_relabelling_invariant() {
    for (g, n) in [(1, 1), (1, 2), (2, 0), (2, 1), (0, 4)] {
        for gr in enumerate(g, n).unwrap() {
            assert_eq!(gr.canonical(), gr);
            let v = gr.num_vertices();
            let rev: Vec<usize> = (0..v).rev().collect();
            let moved = nckdv::stablegraphs::StableGraph::new(
                (0..v).map(|k| gr.genera[v - 1 - k]).collect(),
                gr.legs.iter().map(|&x| rev[x]).collect(),
                gr.edges.iter().map(|&(a, b)| (rev[a], rev[b])).collect(),
            );
            assert_eq!(aut_order(&moved), aut_order(&gr));
            assert_eq!(moved.canonical(), gr);
        }
    }
}

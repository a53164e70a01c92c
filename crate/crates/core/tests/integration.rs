use std::collections::BTreeMap;

use nckdv::fourier::{expand_over, mode_moyal, ModePoly};
use nckdv::hierarchy::flow;
use nckdv::tausolver::{solve, solver_flows, SolverConfig};
use nckdv::{DiffPoly2, Truncation};

#[test]
fn flows_are_stable_under_deepening() {
    for n in 1..=2 {
        let t = Truncation::for_flow(n);
        let deep = flow(n, t.deepened()).unwrap().truncate(Some(t.eps_max), Some(t.mu_max));
        assert_eq!(deep, flow(n, t).unwrap(), "flow {n}");
    }
}

#[test]
fn mode_expansion_respects_star_products_of_flows() {
    let modes = [-1i64, 1, 2];
    let cap = 4;
    let p1 = flow(1, Truncation::for_flow(1)).unwrap();
    let p2 = flow(2, Truncation::for_flow(2)).unwrap().truncate(Some(2), None);
    let pieces = [DiffPoly2::u(), DiffPoly2::var(1, 0), p1.truncate(Some(cap as i32), None), p2];
    for a in &pieces {
        for b in &pieces[..3] {
            let lhs = expand_over(&a.moyal(b, cap).truncate(Some(cap as i32), None), &modes).unwrap();
            let ea = expand_over(a, &modes).unwrap();
            let eb = expand_over(b, &modes).unwrap();
            let mut rhs: BTreeMap<i64, ModePoly> = BTreeMap::new();
            for (al, pa) in &ea {
                for (be, pb) in &eb {
                    let prod = mode_moyal(pa, pb, cap).truncate(cap, cap);
                    let slot = rhs.entry(al + be).or_insert_with(|| ModePoly::zero(al + be));
                    *slot = slot.add(&prod);
                }
            }
            rhs.retain(|_, p| !p.is_zero());
            assert_eq!(lhs, rhs);
        }
    }
}

#[test]
fn solved_entries_survive_a_larger_mode_bound() {
    let small = SolverConfig::new(1, 2, 1, 1);
    let large = SolverConfig::new(1, 2, 2, 1);
    let (t1, r1) = solve(small, &solver_flows(&small).unwrap()).unwrap();
    let (t2, r2) = solve(large, &solver_flows(&large).unwrap()).unwrap();
    assert_eq!(r1.inconsistent() + r2.inconsistent(), 0);
    assert!(t1.len() < t2.len());
    for (k, v, _) in t1.iter() {
        assert_eq!(t2.value(k).as_ref(), Some(v), "{k}");
    }
}

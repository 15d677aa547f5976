//! Solver output against plain enumeration on small random CSPs.

use constraint_games::csp::{Cmp, Constraint, Csp, Domain, OptGoal, Propagation, VarId};
use proptest::prelude::*;

const N: usize = 4;

fn domains() -> Vec<Domain> {
    // v0..v2 integers, v3 boolean
    vec![Domain::range(-2, 3), Domain::from_values([0, 1, 3, 4]).unwrap(), Domain::range(0, 4), Domain::range(0, 1)]
}

fn arb_cmp() -> impl Strategy<Value = Cmp> {
    prop_oneof![Just(Cmp::Eq), Just(Cmp::Le), Just(Cmp::Ge)]
}

fn arb_constraint() -> impl Strategy<Value = Constraint> {
    let v = || (0usize..3).prop_map(VarId);
    prop_oneof![
        (prop::collection::vec((-3i64..=3, 0usize..N), 1..4), arb_cmp(), -4i64..=6).prop_map(|(t, op, rhs)| {
            Constraint::Linear { terms: t.into_iter().map(|(a, v)| (a, VarId(v))).collect(), op, rhs }
        }),
        Just(Constraint::AllDifferent(vec![VarId(0), VarId(1), VarId(2)])),
        (v(), v(), -2i64..=2, 0i64..=1).prop_map(|(z, x, k1, k2)| Constraint::AbsOffset { z, x, k1, k2 }),
        (v(), v(), v()).prop_map(|(y, a, b)| Constraint::MinOf { y, xs: vec![a, b] }),
        (v(), -1i64..=4).prop_map(|(x, k)| Constraint::ReifEqConst { b: VarId(3), x, k }),
        (v(), v()).prop_map(|(x, y)| Constraint::ImplyEqVars { b: VarId(3), x, y }),
        prop::collection::vec(prop::collection::vec(-1i64..=4, 2), 0..8)
            .prop_map(|tuples| Constraint::Table { vars: vec![VarId(0), VarId(2)], tuples }),
    ]
}

fn all_assignments(doms: &[Domain]) -> Vec<Vec<i64>> {
    let mut out = vec![Vec::new()];
    for d in doms {
        out = out.into_iter().flat_map(|p: Vec<i64>| d.iter().map(move |v| [p.clone(), vec![v]].concat())).collect();
    }
    out
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn solutions_match_enumeration(cs in prop::collection::vec(arb_constraint(), 1..4)) {
        let csp = Csp::new(domains(), cs).unwrap();
        let brute: Vec<Vec<i64>> = all_assignments(&domains()).into_iter().filter(|a| csp.is_solution(a)).collect();
        let mut found: Vec<Vec<i64>> = csp.solve_all(domains()).collect();
        found.sort();
        prop_assert_eq!(&found, &brute);
        prop_assert_eq!(csp.is_satisfiable(domains()), !brute.is_empty());
        if let Propagation::Fixpoint(d) = csp.propagate(domains()) {
            // propagation never drops a solution value
            for a in &brute {
                prop_assert!(a.iter().zip(&d).all(|(v, d)| d.contains(*v)));
            }
        } else {
            prop_assert!(brute.is_empty());
        }
    }

    #[test]
    fn optimal_solutions_match_enumeration(cs in prop::collection::vec(arb_constraint(), 1..3), obj in 0usize..3, max in any::<bool>()) {
        let csp = Csp::new(domains(), cs).unwrap();
        let goal = if max { OptGoal::max(VarId(obj)) } else { OptGoal::min(VarId(obj)) };
        let sols: Vec<Vec<i64>> = all_assignments(&domains()).into_iter().filter(|a| csp.is_solution(a)).collect();
        let best = sols.iter().map(|a| goal.score(a[obj])).max();
        let brute: Vec<Vec<i64>> = sols.into_iter().filter(|a| Some(goal.score(a[obj])) == best).collect();
        let mut found: Vec<Vec<i64>> = csp.solve_optimal_all(domains(), goal).collect();
        found.sort();
        prop_assert_eq!(found, brute);
        let order: Vec<VarId> = (0..N).map(VarId).collect();
        prop_assert_eq!(csp.optimum(domains(), order, goal).map(|v| goal.score(v)), best);
    }
}

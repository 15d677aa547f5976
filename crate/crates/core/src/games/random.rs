//! Seeded random games for cross-checking the solvers against the oracles.
//!
//! Draws mix satisfaction and optimization goals, existential witnesses,
//! hard constraints, players owning two variables, and players whose goal
//! can never be satisfied.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::csp::{Cmp, Constraint, Domain, OptGoal, VarId};
use crate::game::{DeviationScope, Game, GameBuilder, PlayerId};
use crate::Value;

#[derive(Debug, Clone, Copy)]
pub struct RandomParams {
    pub min_players: usize,
    pub max_players: usize,
    /// Upper bound on the number of strategy profiles.
    pub max_profiles: u64,
    pub p_optimization: f64,
    pub p_hard: f64,
    pub p_two_vars: f64,
    pub p_unsat_player: f64,
    pub p_goal_only: f64,
}

impl Default for RandomParams {
    fn default() -> Self {
        RandomParams {
            min_players: 2,
            max_players: 4,
            max_profiles: 10_000,
            p_optimization: 0.55,
            p_hard: 0.35,
            p_two_vars: 0.25,
            p_unsat_player: 0.08,
            p_goal_only: 0.2,
        }
    }
}

pub fn random_game(seed: u64) -> Game {
    random_game_with(seed, &RandomParams::default())
}

pub fn random_game_with(seed: u64, params: &RandomParams) -> Game {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = rng.gen_range(params.min_players..=params.max_players);
    let arity: Vec<usize> = (0..n).map(|_| if rng.gen_bool(params.p_two_vars) { 2 } else { 1 }).collect();
    let total: usize = arity.iter().sum();
    let mut sizes: Vec<u64> = (0..total).map(|_| rng.gen_range(2..=6)).collect();
    while sizes.iter().product::<u64>() > params.max_profiles {
        let k = (0..total).max_by_key(|&k| (sizes[k], k)).expect("some variable");
        sizes[k] -= 1;
    }

    let mut b = GameBuilder::new(format!("random-{seed}"));
    let mut vars: Vec<Vec<VarId>> = Vec::new();
    let mut all = Vec::new();
    let mut k = 0;
    for (i, &a) in arity.iter().enumerate() {
        let p = b.player(format!("P{}", i + 1));
        let mut own = Vec::new();
        for j in 0..a {
            let d = random_domain(&mut rng, sizes[k]);
            k += 1;
            let v = b.controlled(p, format!("x{}_{}", i + 1, j + 1), d.clone());
            own.push(v);
            all.push((v, d));
        }
        vars.push(own);
    }
    let domain_of = |v: VarId| all.iter().find(|(w, _)| *w == v).map(|(_, d)| d.clone()).expect("declared");

    for i in 0..n {
        let p = PlayerId(i);
        let scope = pick_scope(&mut rng, &vars, i);
        if rng.gen_bool(params.p_unsat_player) {
            let v = vars[i][0];
            let hi = domain_of(v).hi();
            b.goal(p, Constraint::Linear { terms: vec![(1, v)], op: Cmp::Ge, rhs: hi + 1 });
            continue;
        }
        let doms: Vec<Domain> = scope.iter().map(|&v| domain_of(v)).collect();
        if rng.gen_bool(params.p_optimization) {
            let u = b.existential(format!("u{}", i + 1), Domain::range(0, 9));
            if rng.gen_bool(0.7) {
                // payoff table, with holes where the goal fails
                let mut tuples = Vec::new();
                for t in cross(&doms) {
                    if rng.gen_bool(0.85) {
                        let mut row = t;
                        row.push(rng.gen_range(0..=9));
                        tuples.push(row);
                    }
                }
                let mut tv = scope.clone();
                tv.push(u);
                b.goal(p, Constraint::Table { vars: tv, tuples });
            } else {
                // u = sum + slack with a free witness
                let mut terms: Vec<(Value, VarId)> = scope.iter().map(|&v| (rng.gen_range(-2..=2), v)).collect();
                let e = b.existential(format!("w{}", i + 1), Domain::range(0, 2));
                terms.push((1, e));
                terms.push((-1, u));
                let rhs = rng.gen_range(-3..=3);
                b.goal(p, Constraint::Linear { terms, op: Cmp::Eq, rhs });
            }
            let goal = if rng.gen_bool(0.5) { OptGoal::max(u) } else { OptGoal::min(u) };
            b.optimize(p, goal);
        } else {
            match rng.gen_range(0..3) {
                0 => {
                    let tuples = cross(&doms).into_iter().filter(|_| rng.gen_bool(0.4)).collect();
                    b.goal(p, Constraint::Table { vars: scope.clone(), tuples });
                }
                1 => {
                    let terms: Vec<(Value, VarId)> = scope.iter().map(|&v| (rng.gen_range(-3..=3), v)).collect();
                    let op = *[Cmp::Le, Cmp::Ge, Cmp::Eq].choose(&mut rng).expect("non-empty");
                    let rhs = rng.gen_range(-4..=4);
                    b.goal(p, Constraint::Linear { terms, op, rhs });
                }
                _ => {
                    let e = b.existential(format!("w{}", i + 1), Domain::range(0, 3));
                    let mut terms: Vec<(Value, VarId)> = scope.iter().map(|&v| (rng.gen_range(-2..=2), v)).collect();
                    terms.push((1, e));
                    b.goal(p, Constraint::Linear { terms, op: Cmp::Eq, rhs: rng.gen_range(-2..=4) });
                    if scope.len() >= 2 && rng.gen_bool(0.5) {
                        b.goal(p, Constraint::AllDifferent(scope[..2].to_vec()));
                    }
                }
            }
        }
    }

    if rng.gen_bool(params.p_hard) {
        let flat: Vec<VarId> = vars.iter().flatten().copied().collect();
        let mut pick = flat.clone();
        pick.shuffle(&mut rng);
        pick.truncate(rng.gen_range(2..=flat.len().min(3)));
        pick.sort();
        match rng.gen_range(0..3) {
            0 => {
                b.hard(Constraint::AllDifferent(pick));
            }
            1 => {
                let h = b.existential("slack", Domain::range(0, 2));
                let mut terms: Vec<(Value, VarId)> = pick.iter().map(|&v| (1, v)).collect();
                terms.push((-1, h));
                let mid: Value = pick.iter().map(|&v| (domain_of(v).lo() + domain_of(v).hi()) / 2).sum();
                b.hard(Constraint::Linear { terms, op: Cmp::Le, rhs: mid });
            }
            _ => {
                let doms: Vec<Domain> = pick.iter().map(|&v| domain_of(v)).collect();
                let tuples = cross(&doms).into_iter().filter(|_| rng.gen_bool(0.7)).collect();
                b.hard(Constraint::Table { vars: pick, tuples });
            }
        }
    }
    if rng.gen_bool(params.p_goal_only) {
        b.deviation_scope(DeviationScope::GoalOnly);
    }
    b.build().expect("generator produces well-formed games")
}

fn random_domain(rng: &mut ChaCha8Rng, size: u64) -> Domain {
    let lo = rng.gen_range(-2..=2);
    if size >= 3 && rng.gen_bool(0.2) {
        // same size, with a hole
        let mut vals: Vec<Value> = (lo..lo + size as Value + 1).collect();
        let gap = rng.gen_range(1..vals.len() - 1);
        vals.remove(gap);
        Domain::from_values(vals).expect("non-empty")
    } else {
        Domain::range(lo, lo + size as Value - 1)
    }
}

/// Own variables plus up to two of the others'.
fn pick_scope(rng: &mut ChaCha8Rng, vars: &[Vec<VarId>], i: usize) -> Vec<VarId> {
    let mut scope = vars[i].clone();
    let mut others: Vec<VarId> =
        vars.iter().enumerate().filter(|&(j, _)| j != i).flat_map(|(_, v)| v.iter().copied()).collect();
    others.shuffle(rng);
    let extra = rng.gen_range(1..=2.min(others.len()));
    scope.extend(others.into_iter().take(extra));
    scope.truncate(3);
    scope.sort();
    scope
}

fn cross(doms: &[Domain]) -> Vec<Vec<Value>> {
    let mut out = vec![Vec::new()];
    for d in doms {
        out = out
            .into_iter()
            .flat_map(|prefix| {
                d.iter().map(move |v| {
                    let mut t = prefix.clone();
                    t.push(v);
                    t
                })
            })
            .collect();
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn deterministic_and_bounded() {
        for seed in 0..40 {
            let a = random_game(seed);
            let b = random_game(seed);
            assert_eq!(format!("{a:?}"), format!("{b:?}"));
            assert!(a.profile_count() <= 10_000);
            assert!((2..=4).contains(&a.num_players()));
        }
    }

    #[test]
    fn mixture_covers_features() {
        let games: Vec<Game> = (0..200).map(random_game).collect();
        assert!(games.iter().any(|g| g.has_hard_constraints()));
        assert!(games.iter().any(|g| g.is_optimization()));
        assert!(games.iter().any(|g| !g.is_optimization()));
        assert!(games.iter().any(|g| g.players().iter().any(|p| p.vars.len() == 2)));
        assert!(games.iter().any(|g| g.scope() == DeviationScope::GoalOnly));
    }
}

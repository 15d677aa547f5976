//! Generate and test: every profile is checked for hard-constraint
//! feasibility and then for a beneficial deviation, player by player.

use std::time::Instant;

use crate::game::{Game, PlayerId, SolveResult, SolveStats, StrategyProfile};

#[derive(Debug, Clone, Copy, Default)]
pub struct Enum1Options {
    pub deadline: Option<Instant>,
    pub stop_after_first: bool,
}

/// All pure Nash equilibria of `game`, in lexicographic order.
pub fn enum1(game: &Game) -> SolveResult {
    enum1_with(game, Enum1Options::default())
}

pub fn enum1_with(game: &Game, opts: Enum1Options) -> SolveResult {
    let n = game.num_players();
    let sizes: Vec<u64> = (0..n).map(|i| game.space(PlayerId(i)).size()).collect();
    let mut idx = vec![0u64; n];
    let mut values = vec![0; game.controlled().len()];
    for i in 0..n {
        game.space(PlayerId(i)).decode_into(0, &mut values[game.profile_range(PlayerId(i))]);
    }
    let mut stats = SolveStats::default();
    let mut pne = Vec::new();
    let mut timed_out = false;
    loop {
        // clock reads are not free; every 256 candidates is plenty
        if stats.candidates & 0xff == 0 && opts.deadline.is_some_and(|d| Instant::now() >= d) {
            timed_out = true;
            break;
        }
        stats.candidates += 1;
        if is_nash_counted(game, &values, &mut stats) {
            pne.push(StrategyProfile(values.clone()));
            stats.pne_found += 1;
            if opts.stop_after_first {
                break;
            }
        }
        // odometer, last player fastest
        let mut i = n;
        loop {
            if i == 0 {
                return SolveResult { pne, stats, timed_out };
            }
            i -= 1;
            idx[i] += 1;
            if idx[i] < sizes[i] {
                break;
            }
            idx[i] = 0;
        }
        for j in i..n {
            game.space(PlayerId(j)).decode_into(idx[j], &mut values[game.profile_range(PlayerId(j))]);
        }
    }
    SolveResult { pne, stats, timed_out }
}

/// Nash test with early exit; each player examined costs one deviation call.
fn is_nash_counted(game: &Game, s: &[crate::Value], stats: &mut SolveStats) -> bool {
    if !game.check_hard_values(s) {
        return false;
    }
    for i in 0..game.num_players() {
        stats.deviation_calls += 1;
        if game.has_deviation_values(s, PlayerId(i)) {
            return false;
        }
    }
    true
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::csp::{Cmp, Constraint, Domain, OptGoal};
    use crate::game::GameBuilder;

    #[test]
    fn coordination_game() {
        // both want to match; two equilibria
        let mut b = GameBuilder::new("match");
        let p = b.player("p");
        let q = b.player("q");
        let x = b.controlled(p, "x", Domain::range(0, 1));
        let y = b.controlled(q, "y", Domain::range(0, 1));
        let eq = Constraint::Linear { terms: vec![(1, x), (-1, y)], op: Cmp::Eq, rhs: 0 };
        b.goal(p, eq.clone());
        b.goal(q, eq);
        let g = b.build().unwrap();
        let r = enum1(&g);
        assert_eq!(r.pne, vec![StrategyProfile(vec![0, 0]), StrategyProfile(vec![1, 1])]);
        assert_eq!(r.stats.candidates, 4);
        assert!(!r.timed_out);
    }

    #[test]
    fn candidates_cover_space_even_when_hard_fails() {
        let mut b = GameBuilder::new("void");
        let p = b.player("p");
        let x = b.controlled(p, "x", Domain::range(0, 4));
        b.hard(Constraint::Linear { terms: vec![(1, x)], op: Cmp::Ge, rhs: 10 });
        let r = enum1(&b.build().unwrap());
        assert!(r.pne.is_empty());
        assert_eq!(r.stats.candidates, 5);
        assert_eq!(r.stats.deviation_calls, 0);
    }

    #[test]
    fn single_player_max() {
        let mut b = GameBuilder::new("max");
        let p = b.player("p");
        let x = b.controlled(p, "x", Domain::range(1, 6));
        b.optimize(p, OptGoal::max(x));
        let r = enum1_with(&b.build().unwrap(), Enum1Options { stop_after_first: true, ..Default::default() });
        assert_eq!(r.pne, vec![StrategyProfile(vec![6])]);
    }
}

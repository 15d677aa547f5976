//! Reference solvers over the dense normal form, and `.nfg` export.
//!
//! Expansion evaluates every player's goal at every profile, so all of this
//! is exponential in the number of players and meant for small games.

use std::collections::BTreeSet;
use std::fmt::Write as _;
use std::io::Write as _;
use std::path::Path;

use rayon::prelude::*;

use crate::error::OracleError;
use crate::game::{Eval, Game, PlayerId, StrategyProfile};
use crate::Value;

/// Default cap on the number of profiles (cells) of an expansion.
pub const DEFAULT_CELL_CAP: u128 = 1_000_000;

/// One player's outcome at one profile, oriented so larger is better.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Payoff {
    /// Goal unsatisfiable: never an improvement for anybody.
    NoPreference,
    /// Goal satisfied; the sign-normalized objective value, or 0 for a
    /// plain satisfaction goal.
    Score(Value),
}

/// Dense normal form. Cells are numbered with the first player's strategy
/// index varying fastest.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PayoffTensor {
    pub title: String,
    pub players: Vec<String>,
    pub sizes: Vec<u64>,
    /// Hard-constraint feasibility per cell.
    pub valid: Vec<bool>,
    /// `payoffs[i][cell]`.
    pub payoffs: Vec<Vec<Payoff>>,
    /// Whether each player has an optimization condition.
    pub optimizing: Vec<bool>,
}

impl PayoffTensor {
    pub fn num_cells(&self) -> usize {
        self.valid.len()
    }

    /// Cell number of a strategy-index tuple.
    pub fn cell(&self, idx: &[u64]) -> usize {
        let mut c = 0u64;
        for (k, &s) in idx.iter().enumerate().rev() {
            c = c * self.sizes[k] + s;
        }
        c as usize
    }

    /// Strategy-index tuple of a cell number.
    pub fn indices(&self, mut cell: usize) -> Vec<u64> {
        self.sizes
            .iter()
            .map(|&n| {
                let s = cell as u64 % n;
                cell /= n as usize;
                s
            })
            .collect()
    }

    fn stride(&self, i: usize) -> usize {
        self.sizes[..i].iter().product::<u64>() as usize
    }
}

fn cell_count(game: &Game) -> u128 {
    (0..game.num_players()).map(|i| game.space(PlayerId(i)).size() as u128).product()
}

fn check_cap(game: &Game, cap: u128) -> Result<(), OracleError> {
    let required = cell_count(game);
    if required > cap {
        return Err(OracleError::TooLarge { required, cap });
    }
    Ok(())
}

pub fn expand(game: &Game) -> Result<PayoffTensor, OracleError> {
    expand_capped(game, DEFAULT_CELL_CAP)
}

/// Evaluates every cell, in parallel; the result does not depend on the
/// thread count.
pub fn expand_capped(game: &Game, cap: u128) -> Result<PayoffTensor, OracleError> {
    check_cap(game, cap)?;
    let n = game.num_players();
    let sizes: Vec<u64> = (0..n).map(|i| game.space(PlayerId(i)).size()).collect();
    let cells = cell_count(game) as usize;
    let shell = PayoffTensor {
        title: game.title().to_string(),
        players: game.players().iter().map(|p| p.name.clone()).collect(),
        sizes,
        valid: Vec::new(),
        payoffs: Vec::new(),
        optimizing: game.players().iter().map(|p| p.opt.is_some()).collect(),
    };
    let rows: Vec<(bool, Vec<Payoff>)> = (0..cells)
        .into_par_iter()
        .map(|c| {
            let s = game.profile_from_indices(&shell.indices(c));
            let valid = game.check_hard(&s);
            let pay = (0..n)
                .map(|i| {
                    let p = &game.players()[i];
                    match game.evaluate(&s, PlayerId(i)) {
                        Eval::Unsat => Payoff::NoPreference,
                        Eval::Sat(None) => Payoff::Score(0),
                        Eval::Sat(Some(v)) => Payoff::Score(p.opt.expect("valued goal").score(v)),
                    }
                })
                .collect();
            (valid, pay)
        })
        .collect();
    let mut t = shell;
    t.valid = rows.iter().map(|r| r.0).collect();
    t.payoffs = (0..n).map(|i| rows.iter().map(|r| r.1[i]).collect()).collect();
    Ok(t)
}

/// Valid cells where no player strictly gains by a unilateral change, in
/// lexicographic profile order.
pub fn brute_force_pne(t: &PayoffTensor) -> Vec<Vec<u64>> {
    let n = t.sizes.len();
    let mut out = BTreeSet::new();
    'cells: for c in 0..t.num_cells() {
        if !t.valid[c] {
            continue;
        }
        let idx = t.indices(c);
        #[allow(clippy::needless_range_loop)]
        for i in 0..n {
            let stride = t.stride(i);
            let base = c - idx[i] as usize * stride;
            let here = t.payoffs[i][c];
            for alt in 0..t.sizes[i] as usize {
                if t.payoffs[i][base + alt * stride] > here {
                    continue 'cells;
                }
            }
        }
        out.insert(idx);
    }
    out.into_iter().collect()
}

/// Equilibria as profiles, through [`expand`] and [`brute_force_pne`].
pub fn brute_force_profiles(game: &Game) -> Result<Vec<StrategyProfile>, OracleError> {
    let t = expand(game)?;
    Ok(brute_force_pne(&t).iter().map(|idx| game.profile_from_indices(idx)).collect())
}

/// Per-player Nash relations: the profiles where the player plays a best
/// response to the others, or has no satisfiable option at all.
pub fn nash_relations(game: &Game) -> Result<Vec<BTreeSet<Vec<u64>>>, OracleError> {
    check_cap(game, DEFAULT_CELL_CAP)?;
    let n = game.num_players();
    let sizes: Vec<u64> = (0..n).map(|i| game.space(PlayerId(i)).size()).collect();
    Ok((0..n)
        .map(|i| {
            let contexts: Vec<Vec<u64>> = odometer(&sizes, Some(i)).collect();
            let parts: Vec<Vec<Vec<u64>>> = contexts
                .par_iter()
                .map(|ctx| {
                    let s = game.profile_from_indices(ctx);
                    let br = game.best_response_indices(&s.0, PlayerId(i));
                    let own: Vec<u64> = if br.is_empty() { (0..sizes[i]).collect() } else { br };
                    own.into_iter()
                        .map(|v| {
                            let mut t = ctx.clone();
                            t[i] = v;
                            t
                        })
                        .collect()
                })
                .collect();
            parts.into_iter().flatten().collect()
        })
        .collect())
}

/// Equilibria as solutions of the per-player Nash relations, intersected
/// and filtered by the hard constraints.
pub fn ggs_pne(game: &Game) -> Result<Vec<StrategyProfile>, OracleError> {
    let rels = nash_relations(game)?;
    let mut it = rels.into_iter();
    let mut common = it.next().unwrap_or_default();
    for r in it {
        common = common.intersection(&r).cloned().collect();
    }
    Ok(common.into_iter().map(|idx| game.profile_from_indices(&idx)).filter(|s| game.check_hard(s)).collect())
}

/// All index tuples over `sizes`, last position fastest; with `fixed`, that
/// position stays at 0.
fn odometer(sizes: &[u64], fixed: Option<usize>) -> impl Iterator<Item = Vec<u64>> + '_ {
    let mut cur = Some(vec![0u64; sizes.len()]);
    std::iter::from_fn(move || {
        let out = cur.clone()?;
        let mut next = out.clone();
        let mut k = sizes.len();
        cur = loop {
            if k == 0 {
                break None;
            }
            k -= 1;
            if Some(k) == fixed {
                continue;
            }
            next[k] += 1;
            if next[k] < sizes[k] {
                break Some(next);
            }
            next[k] = 0;
        };
        Some(out)
    })
}

/// Gambit payoff-format text for a tensor without hard constraints.
///
/// Satisfaction goals pay 1 or 0. Objective values are written
/// maximization-oriented; an unsatisfied goal is written one below the
/// player's smallest satisfied payoff so that it never attracts a deviation.
pub fn export_nfg(t: &PayoffTensor) -> Result<String, OracleError> {
    if t.valid.iter().any(|v| !v) {
        return Err(OracleError::HardConstraintsUnsupported);
    }
    let floors: Vec<Value> = t
        .payoffs
        .iter()
        .map(|col| {
            col.iter()
                .filter_map(|p| match p {
                    Payoff::Score(v) => Some(*v),
                    Payoff::NoPreference => None,
                })
                .min()
                .map_or(0, |m| m - 1)
        })
        .collect();
    let mut out = String::new();
    write!(out, "NFG 1 R {} {{", quote(&t.title)).unwrap();
    for p in &t.players {
        write!(out, " {}", quote(p)).unwrap();
    }
    out.push_str(" } {");
    for s in &t.sizes {
        write!(out, " {s}").unwrap();
    }
    out.push_str(" }\n\n");
    let mut first = true;
    for c in 0..t.num_cells() {
        for (i, col) in t.payoffs.iter().enumerate() {
            let v = match (col[c], t.optimizing[i]) {
                (Payoff::Score(_), false) => 1,
                (Payoff::NoPreference, false) => 0,
                (Payoff::Score(v), true) => v,
                (Payoff::NoPreference, true) => floors[i],
            };
            if !first {
                out.push(' ');
            }
            first = false;
            write!(out, "{v}").unwrap();
        }
    }
    out.push('\n');
    Ok(out)
}

/// Expands `game` and writes its `.nfg` file to `path`. Games with hard
/// constraints are refused before any expansion.
pub fn write_nfg(game: &Game, path: &Path, cap: u128) -> Result<(), OracleError> {
    if game.has_hard_constraints() {
        return Err(OracleError::HardConstraintsUnsupported);
    }
    let text = export_nfg(&expand_capped(game, cap)?)?;
    let mut f = std::fs::File::create(path)?;
    f.write_all(text.as_bytes())?;
    Ok(())
}

fn quote(s: &str) -> String {
    format!("\"{}\"", s.replace('\\', "\\\\").replace('"', "\\\""))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tensor(sizes: Vec<u64>, pay: Vec<Vec<Value>>) -> PayoffTensor {
        let cells = sizes.iter().product::<u64>() as usize;
        PayoffTensor {
            title: "t".into(),
            players: (0..sizes.len()).map(|i| format!("P{}", i + 1)).collect(),
            sizes,
            valid: vec![true; cells],
            payoffs: pay.into_iter().map(|c| c.into_iter().map(Payoff::Score).collect()).collect(),
            optimizing: vec![true; 2],
        }
    }

    #[test]
    fn cell_numbering_first_player_fastest() {
        let t = tensor(vec![2, 3], vec![vec![0; 6], vec![0; 6]]);
        assert_eq!(t.cell(&[1, 0]), 1);
        assert_eq!(t.cell(&[0, 1]), 2);
        assert_eq!(t.indices(5), vec![1, 2]);
    }

    #[test]
    fn constant_tensor_all_equilibria() {
        let t = tensor(vec![2, 2], vec![vec![3; 4], vec![3; 4]]);
        assert_eq!(brute_force_pne(&t).len(), 4);
    }

    #[test]
    fn prisoners_dilemma() {
        // cooperate = 0, defect = 1
        let t = tensor(vec![2, 2], vec![vec![-1, 0, -3, -2], vec![-1, -3, 0, -2]]);
        assert_eq!(brute_force_pne(&t), vec![vec![1, 1]]);
    }

    #[test]
    fn single_player_argmax() {
        let mut t = tensor(vec![4], vec![vec![1, 5, 2, 5]]);
        t.optimizing = vec![true];
        assert_eq!(brute_force_pne(&t), vec![vec![1], vec![3]]);
    }

    #[test]
    fn no_preference_never_attracts() {
        let mut t = tensor(vec![2], vec![vec![0, 0]]);
        t.optimizing = vec![true];
        t.payoffs[0][1] = Payoff::NoPreference;
        assert_eq!(brute_force_pne(&t), vec![vec![0]]);
        t.payoffs[0][0] = Payoff::NoPreference;
        assert_eq!(brute_force_pne(&t), vec![vec![0], vec![1]]);
    }

    #[test]
    fn trivial_nfg() {
        let mut t = tensor(vec![1], vec![vec![7]]);
        t.optimizing = vec![true];
        t.title = "one".into();
        assert_eq!(export_nfg(&t).unwrap(), "NFG 1 R \"one\" { \"P1\" } { 1 }\n\n7\n");
    }

    #[test]
    fn invalid_cells_refused() {
        let mut t = tensor(vec![2], vec![vec![1, 2]]);
        t.valid[0] = false;
        assert_eq!(export_nfg(&t), Err(OracleError::HardConstraintsUnsupported));
    }

    #[test]
    fn odometer_skips_fixed() {
        let all: Vec<_> = odometer(&[2, 3], Some(1)).collect();
        assert_eq!(all, vec![vec![0, 0], vec![1, 0]]);
        assert_eq!(odometer(&[2, 2], None).count(), 4);
    }
}

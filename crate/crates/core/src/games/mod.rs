//! Builders for the benchmark families, a seeded random generator, and the
//! textual game format.

mod format;
pub mod random;

pub use format::{parse_game, serialize_game};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::csp::{Cmp, Constraint, Domain, OptGoal, VarId};
use crate::error::GameError;
use crate::game::{Game, GameBuilder, PlayerId};
use crate::Value;

fn invalid(msg: impl Into<String>) -> GameError {
    GameError::InvalidParameter(msg.into())
}

fn lin(terms: Vec<(Value, VarId)>, op: Cmp, rhs: Value) -> Constraint {
    Constraint::Linear { terms, op, rhs }
}

fn gcd(a: Value, b: Value) -> Value {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

/// Two-player satisfaction game from a payoff matrix of 0/1 pairs: a player
/// is satisfied exactly where its payoff is 1. Row strategies are
/// `1..=rows`, column strategies `1..=cols`.
pub fn build_bimatrix(title: &str, row: &str, col: &str, payoffs: &[Vec<(u8, u8)>]) -> Result<Game, GameError> {
    let rows = payoffs.len();
    let cols = payoffs.first().map_or(0, Vec::len);
    if rows == 0 || cols == 0 || payoffs.iter().any(|r| r.len() != cols) {
        return Err(invalid("payoff matrix must be rectangular and non-empty"));
    }
    let mut b = GameBuilder::new(title);
    let px = b.player(row);
    let py = b.player(col);
    let x = b.controlled(px, row.to_lowercase(), Domain::range(1, rows as Value));
    let y = b.controlled(py, col.to_lowercase(), Domain::range(1, cols as Value));
    for (p, pick) in [(px, 0usize), (py, 1usize)] {
        let mut tuples = Vec::new();
        for (r, line) in payoffs.iter().enumerate() {
            for (c, &(a, bb)) in line.iter().enumerate() {
                if [a, bb][pick] == 1 {
                    tuples.push(vec![r as Value + 1, c as Value + 1]);
                }
            }
        }
        b.goal(p, Constraint::Table { vars: vec![x, y], tuples });
    }
    b.build()
}

/// The 3x3 game used to illustrate the solver: rows a, b, c are 1, 2, 3.
pub fn worked_example() -> Game {
    let m = vec![vec![(0, 1), (1, 0), (1, 0)], vec![(0, 1), (0, 0), (1, 0)], vec![(1, 0), (1, 1), (0, 0)]];
    build_bimatrix("worked example", "X", "Y", &m).expect("well-formed matrix")
}

/// Guess 2/3 of the average. Guesses range over `1..=m`; the target is
/// `floor(2 * sum / (3 * n))`; the players closest to it share a prize of
/// `lcm(1..=n)` equally. Payoff is `(m + 1) * share - distance`: the prize
/// decides, closeness only breaks ties between equal shares. Everybody
/// maximizes.
pub fn build_gtta(n: usize, m: Value) -> Result<Game, GameError> {
    if n < 2 || m < 2 {
        return Err(invalid("GTTA needs n >= 2 and m >= 2"));
    }
    let nn = n as Value;
    let prize = (1..=nn).fold(1, |acc, k| acc / gcd(acc, k) * k);
    let mut b = GameBuilder::new(format!("GTTA.{n}.{m}"));
    let players: Vec<PlayerId> = (1..=n).map(|i| b.player(format!("P{i}"))).collect();
    let g: Vec<VarId> =
        players.iter().enumerate().map(|(i, &p)| b.controlled(p, format!("g{}", i + 1), Domain::range(1, m))).collect();
    let target = b.existential("target", Domain::range(0, m));
    let diff: Vec<VarId> = (1..=n).map(|i| b.existential(format!("diff{i}"), Domain::range(-m, m))).collect();
    let dist: Vec<VarId> = (1..=n).map(|i| b.existential(format!("dist{i}"), Domain::range(0, m))).collect();
    let mind = b.existential("mindist", Domain::range(0, m));
    let win: Vec<VarId> = (1..=n).map(|i| b.existential(format!("win{i}"), Domain::range(0, 1))).collect();
    let winners = b.existential("winners", Domain::range(1, nn));
    let share: Vec<VarId> = (1..=n).map(|i| b.existential(format!("share{i}"), Domain::range(0, prize))).collect();
    let pay: Vec<VarId> =
        (1..=n).map(|i| b.existential(format!("pay{i}"), Domain::range(-m, (m + 1) * prize))).collect();

    let mut defs = Vec::new();
    // 3n * target <= 2 * sum <= 3n * target + 3n - 1
    let mut t1: Vec<(Value, VarId)> = g.iter().map(|&v| (-2, v)).collect();
    t1.push((3 * nn, target));
    defs.push(lin(t1, Cmp::Le, 0));
    let mut t2: Vec<(Value, VarId)> = g.iter().map(|&v| (2, v)).collect();
    t2.push((-3 * nn, target));
    defs.push(lin(t2, Cmp::Le, 3 * nn - 1));
    for j in 0..n {
        defs.push(lin(vec![(1, diff[j]), (-1, g[j]), (1, target)], Cmp::Eq, 0));
        defs.push(Constraint::AbsOffset { z: dist[j], x: diff[j], k1: 0, k2: 0 });
    }
    defs.push(Constraint::MinOf { y: mind, xs: dist.clone() });
    for j in 0..n {
        // win = 1 exactly when dist = mindist
        defs.push(Constraint::ImplyEqVars { b: win[j], x: dist[j], y: mind });
        defs.push(lin(vec![(1, dist[j]), (-1, mind), (m + 1, win[j])], Cmp::Ge, 1));
    }
    let mut count: Vec<(Value, VarId)> = win.iter().map(|&w| (1, w)).collect();
    count.push((-1, winners));
    defs.push(lin(count, Cmp::Eq, 0));
    for (i, &p) in players.iter().enumerate() {
        for c in &defs {
            b.goal(p, c.clone());
        }
        let mut tuples = Vec::new();
        for k in 1..=nn {
            tuples.push(vec![0, k, 0]);
            tuples.push(vec![1, k, prize / k]);
        }
        b.goal(p, Constraint::Table { vars: vec![win[i], winners, share[i]], tuples });
        b.goal(p, lin(vec![(1, pay[i]), (-(m + 1), share[i]), (1, dist[i])], Cmp::Eq, 0));
        b.optimize(p, OptGoal::max(pay[i]));
    }
    b.build()
}

/// Minimum effort: `payoff_i = a * min(e) - b * e_i` over efforts `1..=m`.
pub fn build_meg(n: usize, m: Value, a: Value, bb: Value) -> Result<Game, GameError> {
    if n < 2 || m < 2 {
        return Err(invalid("MEG needs n >= 2 and m >= 2"));
    }
    if !(a > bb && bb >= 1) {
        return Err(invalid("MEG needs a > b >= 1"));
    }
    let mut b = GameBuilder::new(format!("MEG.{n}.{m}"));
    let players: Vec<PlayerId> = (1..=n).map(|i| b.player(format!("P{i}"))).collect();
    let e: Vec<VarId> =
        players.iter().enumerate().map(|(i, &p)| b.controlled(p, format!("e{}", i + 1), Domain::range(1, m))).collect();
    let low = b.existential("low", Domain::range(1, m));
    for (i, &p) in players.iter().enumerate() {
        let pay = b.existential(format!("pay{}", i + 1), Domain::range(a - bb * m, a * m - bb));
        b.goal(p, Constraint::MinOf { y: low, xs: e.clone() });
        b.goal(p, lin(vec![(1, pay), (-a, low), (bb, e[i])], Cmp::Eq, 0));
        b.optimize(p, OptGoal::max(pay));
    }
    b.build()
}

/// Traveller's dilemma with `m` claim values `2..=m+1`. Against the lowest
/// other claim `L`: claiming below `L` pays the claim plus `r`, above pays
/// `L - r`, equal pays the claim.
pub fn build_td(n: usize, m: Value, r: Value) -> Result<Game, GameError> {
    if n < 2 || m < 2 {
        return Err(invalid("TD needs n >= 2 and m >= 2"));
    }
    if r < 2 {
        return Err(invalid("TD needs r >= 2"));
    }
    let hi = m + 1;
    let big = m + 1;
    let mut b = GameBuilder::new(format!("TD.{n}.{m}"));
    let players: Vec<PlayerId> = (1..=n).map(|i| b.player(format!("P{i}"))).collect();
    let c: Vec<VarId> = players
        .iter()
        .enumerate()
        .map(|(i, &p)| b.controlled(p, format!("c{}", i + 1), Domain::range(2, hi)))
        .collect();
    for (i, &p) in players.iter().enumerate() {
        let k = i + 1;
        let low = b.existential(format!("low{k}"), Domain::range(2, hi));
        let both = b.existential(format!("both{k}"), Domain::range(2, hi));
        let lt = b.existential(format!("under{k}"), Domain::range(0, 1));
        let gt = b.existential(format!("over{k}"), Domain::range(0, 1));
        let pay = b.existential(format!("pay{k}"), Domain::range(2 - r, hi + r));
        let others: Vec<VarId> = c.iter().enumerate().filter(|&(j, _)| j != i).map(|(_, &v)| v).collect();
        let own = c[i];
        b.goal(p, Constraint::MinOf { y: low, xs: others });
        b.goal(p, Constraint::MinOf { y: both, xs: vec![own, low] });
        // under = 1 iff own < low
        b.goal(p, lin(vec![(1, own), (-1, low), (big, lt)], Cmp::Le, big - 1));
        b.goal(p, lin(vec![(-1, own), (1, low), (-big, lt)], Cmp::Le, 0));
        // over = 1 iff own > low
        b.goal(p, lin(vec![(-1, own), (1, low), (big, gt)], Cmp::Le, big - 1));
        b.goal(p, lin(vec![(1, own), (-1, low), (-big, gt)], Cmp::Le, 0));
        b.goal(p, lin(vec![(1, pay), (-1, both), (-r, lt), (r, gt)], Cmp::Eq, 0));
        b.optimize(p, OptGoal::max(pay));
    }
    b.build()
}

/// Singleton congestion game: `n` players each pick one of `m` facilities;
/// each facility pays according to a seeded table strictly decreasing in
/// its load.
pub fn build_cg(n: usize, m: Value, seed: u64) -> Result<Game, GameError> {
    if n < 2 || m < 2 {
        return Err(invalid("CG needs n >= 2 and m >= 2"));
    }
    let nn = n as Value;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    // pay[f][load - 1]
    let tables: Vec<Vec<Value>> = (0..m)
        .map(|_| {
            let mut v = rng.gen_range(10 * nn..=20 * nn);
            (0..n)
                .map(|_| {
                    let cur = v;
                    v -= rng.gen_range(1..=9);
                    cur
                })
                .collect()
        })
        .collect();
    let top = tables.iter().flatten().copied().max().unwrap_or(0);
    let bottom = tables.iter().flatten().copied().min().unwrap_or(0);
    let mut b = GameBuilder::new(format!("CG.{n}.{m}"));
    let players: Vec<PlayerId> = (1..=n).map(|i| b.player(format!("P{i}"))).collect();
    let x: Vec<VarId> =
        players.iter().enumerate().map(|(i, &p)| b.controlled(p, format!("x{}", i + 1), Domain::range(1, m))).collect();
    let mut same = vec![vec![None; n]; n];
    #[allow(clippy::needless_range_loop)] // fills both triangles
    for i in 0..n {
        for j in i + 1..n {
            let s = b.existential(format!("same{}_{}", i + 1, j + 1), Domain::range(0, 1));
            same[i][j] = Some(s);
            same[j][i] = Some(s);
        }
    }
    let eq_table: Vec<Vec<Value>> =
        (1..=m).flat_map(|a| (1..=m).map(move |c| vec![a, c, Value::from(a == c)])).collect();
    let mut pay_table = Vec::new();
    for (f, t) in tables.iter().enumerate() {
        for (l, &v) in t.iter().enumerate() {
            pay_table.push(vec![f as Value + 1, l as Value + 1, v]);
        }
    }
    for (i, &p) in players.iter().enumerate() {
        let load = b.existential(format!("load{}", i + 1), Domain::range(1, nn));
        let pay = b.existential(format!("pay{}", i + 1), Domain::range(bottom, top));
        let mut sum = vec![(1, load)];
        for j in 0..n {
            if j != i {
                let s = same[i][j].expect("pair variable");
                b.goal(p, Constraint::Table { vars: vec![x[i], x[j], s], tuples: eq_table.clone() });
                sum.push((-1, s));
            }
        }
        b.goal(p, lin(sum, Cmp::Eq, 1));
        b.goal(p, Constraint::Table { vars: vec![x[i], load, pay], tuples: pay_table.clone() });
        b.optimize(p, OptGoal::max(pay));
    }
    b.build()
}

/// Largest street length accepted by [`build_location_gv`]; its payoff
/// tables grow with the square of it.
pub const LGGV_MAX_M: Value = 400;

/// Two sellers at fixed positions choose prices `1..=m`; each of the `m`
/// customers buys from the seller minimizing price plus distance, ties to
/// the first seller; payoff is price times customers. Sellers default to
/// the two street ends and customers to one per position `1..=m`; with a
/// seed, customer positions are drawn uniformly instead.
pub fn build_location_gv(m: Value, positions: Option<(Value, Value)>, seed: Option<u64>) -> Result<Game, GameError> {
    if !(2..=LGGV_MAX_M).contains(&m) {
        return Err(invalid(format!("LG(GV) needs 2 <= m <= {LGGV_MAX_M}")));
    }
    let (q1, q2) = positions.unwrap_or((1, m));
    if !(1..=m).contains(&q1) || !(1..=m).contains(&q2) {
        return Err(invalid("seller positions must lie in 1..=m"));
    }
    let customers: Vec<Value> = match seed {
        None => (1..=m).collect(),
        Some(s) => {
            let mut rng = ChaCha8Rng::seed_from_u64(s);
            (0..m).map(|_| rng.gen_range(1..=m)).collect()
        }
    };
    let mut b = GameBuilder::new(format!("LGGV.2.{m}"));
    let s1 = b.player("P1");
    let s2 = b.player("P2");
    let p1 = b.controlled(s1, "price1", Domain::range(1, m));
    let p2 = b.controlled(s2, "price2", Domain::range(1, m));
    let big = 2 * m + 1;
    let mut defs = Vec::new();
    let mut buys = Vec::new();
    for (k, &c) in customers.iter().enumerate() {
        let to1 = b.existential(format!("buys1_{}", k + 1), Domain::range(0, 1));
        buys.push(to1);
        // to1 = 1 iff p1 - p2 <= gap
        let gap = (c - q2).abs() - (c - q1).abs();
        defs.push(lin(vec![(1, p1), (-1, p2), (big, to1)], Cmp::Le, gap + big));
        defs.push(lin(vec![(-1, p1), (1, p2), (-big, to1)], Cmp::Le, -gap - 1));
    }
    let n1 = b.existential("count1", Domain::range(0, m));
    let n2 = b.existential("count2", Domain::range(0, m));
    let mut sum: Vec<(Value, VarId)> = buys.iter().map(|&v| (1, v)).collect();
    sum.push((-1, n1));
    defs.push(lin(sum, Cmp::Eq, 0));
    defs.push(lin(vec![(1, n1), (1, n2)], Cmp::Eq, m));
    let revenue: Vec<Vec<Value>> = (1..=m).flat_map(|p| (0..=m).map(move |k| vec![p, k, p * k])).collect();
    for (p, price, count, name) in [(s1, p1, n1, "pay1"), (s2, p2, n2, "pay2")] {
        let pay = b.existential(name, Domain::range(0, m * m));
        for c in &defs {
            b.goal(p, c.clone());
        }
        b.goal(p, Constraint::Table { vars: vec![price, count, pay], tuples: revenue.clone() });
        b.optimize(p, OptGoal::max(pay));
    }
    b.build()
}

/// Location game with hard constraints: `n` vendors pick distinct spots
/// `1..=m` on a street with one customer per spot; each customer buys at the
/// lowest distance plus price. Vendor `i` maximizes `price_i` times its
/// customers.
pub fn build_location_hc(n: usize, m: Value, prices: &[Value]) -> Result<Game, GameError> {
    if n < 1 || m < 1 {
        return Err(invalid("LG(HC) needs n >= 1 and m >= 1"));
    }
    if prices.len() != n || prices.iter().any(|&p| p < 0) {
        return Err(invalid("LG(HC) needs one non-negative price per vendor"));
    }
    if n as Value > m {
        return Err(invalid("LG(HC) needs n <= m, otherwise the vendors cannot be placed"));
    }
    let pmax = prices.iter().copied().max().unwrap_or(0);
    let mut b = GameBuilder::new(format!("LGHC.{n}.{m}"));
    let players: Vec<PlayerId> = (1..=n).map(|i| b.player(format!("P{i}"))).collect();
    let l: Vec<VarId> =
        players.iter().enumerate().map(|(i, &p)| b.controlled(p, format!("l{}", i + 1), Domain::range(1, m))).collect();
    b.hard(Constraint::AllDifferent(l.clone()));
    let mut choice = vec![Vec::new(); n];
    for c in 1..=m {
        let cost: Vec<VarId> =
            (0..n).map(|i| b.existential(format!("cost{}_{c}", i + 1), Domain::range(0, m - 1 + pmax))).collect();
        let min = b.existential(format!("min{c}"), Domain::range(0, m - 1 + pmax));
        for i in 0..n {
            b.hard(Constraint::AbsOffset { z: cost[i], x: l[i], k1: c, k2: prices[i] });
        }
        b.hard(Constraint::MinOf { y: min, xs: cost.clone() });
        let mut pick = Vec::new();
        for i in 0..n {
            let ch = b.existential(format!("choice{}_{c}", i + 1), Domain::range(0, 1));
            b.hard(Constraint::ImplyEqVars { b: ch, x: min, y: cost[i] });
            choice[i].push(ch);
            pick.push((1, ch));
        }
        b.hard(Constraint::WeightedBoolSum { terms: pick, op: Cmp::Eq, rhs: 1 });
    }
    for (i, &p) in players.iter().enumerate() {
        let benefit = b.existential(format!("benefit{}", i + 1), Domain::range(0, prices[i] * m));
        let mut terms: Vec<(Value, VarId)> = choice[i].iter().map(|&ch| (prices[i], ch)).collect();
        terms.push((-1, benefit));
        b.goal(p, lin(terms, Cmp::Eq, 0));
        b.optimize(p, OptGoal::max(benefit));
    }
    b.build()
}

/// Cloud resource allocation: client `i` places each task `k` (demand
/// `demands[i][k]`) on one of the machines; machine `j` has capacity
/// `caps[j]` and charges `unit_costs[j]` per unit. Clients minimize cost.
pub fn build_crag(caps: &[Value], unit_costs: &[Value], demands: &[Vec<Value>]) -> Result<Game, GameError> {
    let m = caps.len();
    if m == 0 || unit_costs.len() != m {
        return Err(invalid("CRAG needs one unit cost per machine and at least one machine"));
    }
    if demands.is_empty() || demands.iter().any(Vec::is_empty) {
        return Err(invalid("CRAG needs at least one client, each with at least one task"));
    }
    if caps.iter().chain(unit_costs).chain(demands.iter().flatten()).any(|&v| v < 0) {
        return Err(invalid("CRAG parameters must be non-negative"));
    }
    let total: Value = demands.iter().flatten().sum();
    if total > caps.iter().sum::<Value>() {
        return Err(invalid("CRAG total demand exceeds total capacity"));
    }
    let mut b = GameBuilder::new(format!("CRAG.{}.{m}", demands.len()));
    let mut load: Vec<Vec<(Value, VarId)>> = vec![Vec::new(); m];
    let mut clients = Vec::new();
    for (i, tasks) in demands.iter().enumerate() {
        let p = b.player(format!("C{}", i + 1));
        let mut bill = Vec::new();
        for (k, &d) in tasks.iter().enumerate() {
            let r = b.controlled(p, format!("r{}_{}", i + 1, k + 1), Domain::range(1, m as Value));
            for j in 0..m {
                let ch = b.existential(format!("choice{}_{}_{}", i + 1, j + 1, k + 1), Domain::range(0, 1));
                b.hard(Constraint::ReifEqConst { b: ch, x: r, k: j as Value + 1 });
                load[j].push((d, ch));
                bill.push((d * unit_costs[j], ch));
            }
        }
        clients.push((p, bill));
    }
    for (j, terms) in load.into_iter().enumerate() {
        b.hard(Constraint::WeightedBoolSum { terms, op: Cmp::Le, rhs: caps[j] });
    }
    let umax = unit_costs.iter().copied().max().unwrap_or(0);
    for (i, (p, mut bill)) in clients.into_iter().enumerate() {
        let top: Value = demands[i].iter().sum::<Value>() * umax;
        let cost = b.existential(format!("cost{}", i + 1), Domain::range(0, top));
        bill.push((-1, cost));
        b.goal(p, lin(bill, Cmp::Eq, 0));
        b.optimize(p, OptGoal::min(cost));
    }
    b.build()
}

/// A family name with its parameters, as accepted on the command line.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum GameId {
    Worked,
    Gtta { n: usize, m: Value },
    Meg { n: usize, m: Value, a: Value, b: Value },
    Td { n: usize, m: Value, r: Value },
    Cg { n: usize, m: Value, seed: u64 },
    LgGv { m: Value, seed: Option<u64> },
    LgHc { n: usize, m: Value, price: Value },
    Crag { clients: usize, machines: usize, seed: u64 },
    Random { seed: u64 },
}

impl GameId {
    /// Parses ids such as `GTTA.3.100`, `MEG.3.100`, `TD.3.99`, `CG.4.3`,
    /// `CG.4.3.s7`, `LGGV.2.20`, `LGHC.3.5`, `CRAG.2.2.s1`, `RANDOM.s42`
    /// and `WORKED`. Optional trailing fields: `a`/`b` for MEG, `r` for TD,
    /// the price for LGHC, and `sN` for seeds.
    pub fn parse(s: &str) -> Result<GameId, GameError> {
        let parts: Vec<&str> = s.split('.').collect();
        let bad = || invalid(format!("unknown game id `{s}`"));
        let num = |k: usize| -> Result<Value, GameError> { parts.get(k).ok_or_else(bad)?.parse().map_err(|_| bad()) };
        let seed = |k: usize| -> Result<Option<u64>, GameError> {
            match parts.get(k) {
                None => Ok(None),
                Some(p) => p.strip_prefix('s').and_then(|d| d.parse().ok()).map(Some).ok_or_else(bad),
            }
        };
        let arity = |lo: usize, hi: usize| if (lo..=hi).contains(&parts.len()) { Ok(()) } else { Err(bad()) };
        let family = parts[0].to_ascii_uppercase();
        let id = match family.as_str() {
            "WORKED" => {
                arity(1, 1)?;
                GameId::Worked
            }
            "GTTA" => {
                arity(3, 3)?;
                GameId::Gtta { n: num(1)? as usize, m: num(2)? }
            }
            "MEG" => {
                arity(3, 5)?;
                let a = if parts.len() > 3 { num(3)? } else { 2 };
                let b = if parts.len() > 4 { num(4)? } else { 1 };
                GameId::Meg { n: num(1)? as usize, m: num(2)?, a, b }
            }
            "TD" => {
                arity(3, 4)?;
                let r = if parts.len() > 3 { num(3)? } else { 2 };
                GameId::Td { n: num(1)? as usize, m: num(2)?, r }
            }
            "CG" => {
                arity(3, 4)?;
                GameId::Cg { n: num(1)? as usize, m: num(2)?, seed: seed(3)?.unwrap_or(0) }
            }
            "LGGV" => {
                arity(3, 4)?;
                if num(1)? != 2 {
                    return Err(invalid("LGGV has exactly 2 players"));
                }
                GameId::LgGv { m: num(2)?, seed: seed(3)? }
            }
            "LGHC" => {
                arity(3, 4)?;
                let price = if parts.len() > 3 { num(3)? } else { 1 };
                GameId::LgHc { n: num(1)? as usize, m: num(2)?, price }
            }
            "CRAG" => {
                arity(3, 4)?;
                GameId::Crag { clients: num(1)? as usize, machines: num(2)? as usize, seed: seed(3)?.unwrap_or(0) }
            }
            "RANDOM" => {
                arity(2, 2)?;
                GameId::Random { seed: seed(1)?.ok_or_else(bad)? }
            }
            _ => return Err(bad()),
        };
        if [num(1).ok(), num(2).ok()].iter().flatten().any(|&v| v < 0) {
            return Err(bad());
        }
        Ok(id)
    }

    /// Same family with its random seed replaced; unseeded families are
    /// returned unchanged.
    pub fn with_seed(&self, s: u64) -> GameId {
        let mut id = self.clone();
        match &mut id {
            GameId::Cg { seed, .. } | GameId::Crag { seed, .. } | GameId::Random { seed } => *seed = s,
            GameId::LgGv { seed, .. } => *seed = Some(s),
            _ => {}
        }
        id
    }

    pub fn build(&self) -> Result<Game, GameError> {
        match *self {
            GameId::Worked => Ok(worked_example()),
            GameId::Gtta { n, m } => build_gtta(n, m),
            GameId::Meg { n, m, a, b } => build_meg(n, m, a, b),
            GameId::Td { n, m, r } => build_td(n, m, r),
            GameId::Cg { n, m, seed } => build_cg(n, m, seed),
            GameId::LgGv { m, seed } => build_location_gv(m, None, seed),
            GameId::LgHc { n, m, price } => build_location_hc(n, m, &vec![price; n]),
            GameId::Crag { clients, machines, seed } => {
                let (caps, costs, demands) = random_crag(clients, machines, seed)?;
                build_crag(&caps, &costs, &demands)
            }
            GameId::Random { seed } => Ok(random::random_game(seed)),
        }
    }
}

impl std::fmt::Display for GameId {
    /// Canonical id; parses back to the same value.
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match *self {
            GameId::Worked => write!(f, "WORKED"),
            GameId::Gtta { n, m } => write!(f, "GTTA.{n}.{m}"),
            GameId::Meg { n, m, a: 2, b: 1 } => write!(f, "MEG.{n}.{m}"),
            GameId::Meg { n, m, a, b } => write!(f, "MEG.{n}.{m}.{a}.{b}"),
            GameId::Td { n, m, r: 2 } => write!(f, "TD.{n}.{m}"),
            GameId::Td { n, m, r } => write!(f, "TD.{n}.{m}.{r}"),
            GameId::Cg { n, m, seed } => write!(f, "CG.{n}.{m}.s{seed}"),
            GameId::LgGv { m, seed: None } => write!(f, "LGGV.2.{m}"),
            GameId::LgGv { m, seed: Some(s) } => write!(f, "LGGV.2.{m}.s{s}"),
            GameId::LgHc { n, m, price: 1 } => write!(f, "LGHC.{n}.{m}"),
            GameId::LgHc { n, m, price } => write!(f, "LGHC.{n}.{m}.{price}"),
            GameId::Crag { clients, machines, seed } => write!(f, "CRAG.{clients}.{machines}.s{seed}"),
            GameId::Random { seed } => write!(f, "RANDOM.s{seed}"),
        }
    }
}

/// Machine capacities, unit costs, and per-client task demands.
pub type CragInstance = (Vec<Value>, Vec<Value>, Vec<Vec<Value>>);

/// Seeded CRAG parameters: two tasks per client, demands 1..=3, unit
/// costs 1..=5, and capacities that fit the total demand with some slack.
pub fn random_crag(clients: usize, machines: usize, seed: u64) -> Result<CragInstance, GameError> {
    if clients == 0 || machines == 0 {
        return Err(invalid("CRAG needs at least one client and one machine"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let demands: Vec<Vec<Value>> = (0..clients).map(|_| (0..2).map(|_| rng.gen_range(1..=3)).collect()).collect();
    let total: Value = demands.iter().flatten().sum();
    let costs: Vec<Value> = (0..machines).map(|_| rng.gen_range(1..=5)).collect();
    let share = (total + machines as Value - 1) / machines as Value;
    let caps: Vec<Value> = (0..machines).map(|_| share + rng.gen_range(0..=2)).collect();
    Ok((caps, costs, demands))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::game::{Eval, StrategyProfile};

    #[test]
    fn worked_example_payoffs() {
        let g = worked_example();
        let s = |x, y| StrategyProfile(vec![x, y]);
        assert!(!g.is_winning(&s(1, 1), PlayerId(0)));
        assert!(g.is_winning(&s(1, 1), PlayerId(1)));
        assert!(g.is_nash(&s(3, 2)));
        assert!(!g.is_nash(&s(1, 1)));
    }

    #[test]
    fn gtta_payoff_split() {
        let g = build_gtta(3, 10).unwrap();
        // target floor(2*6/9) = 1; all tie at distance 1, share 6/3
        assert_eq!(g.evaluate(&StrategyProfile(vec![2, 2, 2]), PlayerId(0)), Eval::Sat(Some(11 * 2 - 1)));
        // sum 12, target 2: players 1 and 2 tie at distance 1
        assert_eq!(g.evaluate(&StrategyProfile(vec![1, 1, 10]), PlayerId(0)), Eval::Sat(Some(11 * 3 - 1)));
        assert_eq!(g.evaluate(&StrategyProfile(vec![1, 1, 10]), PlayerId(2)), Eval::Sat(Some(-8)));
    }

    #[test]
    fn meg_payoff() {
        let g = build_meg(3, 10, 2, 1).unwrap();
        assert_eq!(g.evaluate(&StrategyProfile(vec![3, 5, 7]), PlayerId(2)), Eval::Sat(Some(-1)));
    }

    #[test]
    fn td_payoff() {
        let g = build_td(2, 10, 2).unwrap();
        let s = StrategyProfile(vec![4, 7]);
        assert_eq!(g.evaluate(&s, PlayerId(0)), Eval::Sat(Some(6)));
        assert_eq!(g.evaluate(&s, PlayerId(1)), Eval::Sat(Some(2)));
        assert_eq!(g.evaluate(&StrategyProfile(vec![5, 5]), PlayerId(1)), Eval::Sat(Some(5)));
    }

    #[test]
    fn lghc_hard_constraints() {
        let g = build_location_hc(2, 3, &[1, 1]).unwrap();
        assert!(!g.check_hard(&StrategyProfile(vec![2, 2])));
        assert!(g.check_hard(&StrategyProfile(vec![1, 3])));
        assert!(build_location_hc(4, 3, &[1; 4]).is_err());
    }

    #[test]
    fn crag_capacity() {
        let g = build_crag(&[2, 5], &[1, 5], &[vec![2], vec![2]]).unwrap();
        assert!(!g.check_hard(&StrategyProfile(vec![1, 1])));
        assert!(g.check_hard(&StrategyProfile(vec![1, 2])));
        assert_eq!(g.evaluate(&StrategyProfile(vec![1, 2]), PlayerId(1)), Eval::Sat(Some(10)));
        assert!(build_crag(&[1], &[1], &[vec![3]]).is_err());
    }

    #[test]
    fn lggv_tie_goes_to_first() {
        let g = build_location_gv(4, None, None).unwrap();
        // equal prices: customers 1, 2 to seller 1 and 3, 4 to seller 2
        assert_eq!(g.evaluate(&StrategyProfile(vec![2, 2]), PlayerId(0)), Eval::Sat(Some(4)));
        assert_eq!(g.evaluate(&StrategyProfile(vec![2, 2]), PlayerId(1)), Eval::Sat(Some(4)));
        // prices 2 and 1: c + 1 <= 5 - c for c <= 2
        assert_eq!(g.evaluate(&StrategyProfile(vec![2, 1]), PlayerId(0)), Eval::Sat(Some(4)));
        assert_eq!(g.evaluate(&StrategyProfile(vec![2, 1]), PlayerId(1)), Eval::Sat(Some(2)));
    }

    #[test]
    fn ids_parse() {
        assert_eq!(GameId::parse("GTTA.3.100").unwrap(), GameId::Gtta { n: 3, m: 100 });
        assert_eq!(GameId::parse("meg.3.100").unwrap(), GameId::Meg { n: 3, m: 100, a: 2, b: 1 });
        assert_eq!(GameId::parse("TD.3.99.3").unwrap(), GameId::Td { n: 3, m: 99, r: 3 });
        assert_eq!(GameId::parse("CG.4.3.s7").unwrap(), GameId::Cg { n: 4, m: 3, seed: 7 });
        assert_eq!(GameId::parse("RANDOM.s5").unwrap(), GameId::Random { seed: 5 });
        assert!(GameId::parse("GTTA.3").is_err());
        assert!(GameId::parse("NOPE.1.2").is_err());
        assert!(GameId::parse("LGGV.3.10").is_err());
        assert_eq!(GameId::parse("CG.4.3").unwrap().with_seed(9), GameId::Cg { n: 4, m: 3, seed: 9 });
        assert_eq!(GameId::Worked.with_seed(9), GameId::Worked);
        for id in [
            "WORKED",
            "GTTA.3.100",
            "MEG.3.10.5.2",
            "TD.2.9.3",
            "CG.4.3.s7",
            "LGGV.2.20.s1",
            "LGHC.3.5.2",
            "CRAG.2.2.s0",
            "RANDOM.s3",
        ] {
            let parsed = GameId::parse(id).unwrap();
            assert_eq!(parsed.to_string(), id);
            assert_eq!(GameId::parse(&parsed.to_string()).unwrap(), parsed);
        }
    }

    #[test]
    fn builders_reject_bad_parameters() {
        assert!(build_gtta(1, 10).is_err());
        assert!(build_meg(3, 10, 1, 1).is_err());
        assert!(build_td(3, 10, 1).is_err());
        assert!(build_location_gv(LGGV_MAX_M + 1, None, None).is_err());
    }

    #[test]
    fn builders_are_deterministic() {
        let a = build_cg(3, 3, 9).unwrap();
        let b = build_cg(3, 3, 9).unwrap();
        assert_eq!(format!("{a:?}"), format!("{b:?}"));
    }
}

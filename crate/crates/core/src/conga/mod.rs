//! Tree search over players in declaration order with hard-constraint
//! propagation at each node, reverse-order Nash checks against per-player
//! best-response tables, and never-best-response backjumping.
//!
//! Strategies are handled as indices into each player's initial strategy
//! space, so a profile is a `Vec<u64>` of `n` indices and a table context
//! drops the owner's entry.

mod table;

pub use table::{BestResponses, BrTable, Inserted};

use std::collections::BTreeSet;
use std::time::Instant;

use rayon::prelude::*;

use crate::csp::{Domain, Propagator, VarId};
use crate::game::{Game, PlayerId, SolveResult, SolveStats};

#[derive(Debug, Clone, Copy)]
pub struct CongaOptions {
    pub deadline: Option<Instant>,
    pub stop_after_first: bool,
    /// Consult the tables before computing a deviation. When off, every
    /// check runs the solver; results are still recorded for the counters
    /// and the end-of-table sweep.
    pub tables: bool,
    /// Backjump once a level's counter runs out.
    pub counters: bool,
    /// Entry cap per player table; `None` for unbounded.
    pub table_cap: Option<usize>,
}

impl Default for CongaOptions {
    fn default() -> Self {
        CongaOptions { deadline: None, stop_after_first: false, tables: true, counters: true, table_cap: None }
    }
}

/// Where a Nash check got its best-response set from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CheckSource {
    Table,
    Solver,
}

/// Instrumentation hooks. Every method defaults to doing nothing.
pub trait Monitor {
    /// A complete profile passed the hard constraints and enters the Nash
    /// check. `resubmitted` marks end-of-table submissions.
    fn candidate(&mut self, _t: &[u64], _resubmitted: bool) {}
    /// Player `player`'s best responses against `t` were obtained.
    fn check(&mut self, _player: usize, _t: &[u64], _source: CheckSource, _d: &BestResponses) {}
    /// A table hit for `player` returned an entry stored while the first
    /// player was at `stored_under`; `current` is its value now.
    fn table_hit(&mut self, _player: usize, _stored_under: u64, _current: u64) {}
    /// Level `level` ran out of contexts: strategies `skipped` were never
    /// enumerated below `prefix`, and `submitted` were re-checked instead.
    fn backjump(&mut self, _level: usize, _prefix: &[u64], _skipped: &[u64], _submitted: &[Vec<u64>]) {}
    fn pne(&mut self, _t: &[u64]) {}
}

/// Monitor that ignores everything.
pub struct NoMonitor;

impl Monitor for NoMonitor {}

/// All pure Nash equilibria of `game`, in lexicographic order.
pub fn conga(game: &Game) -> SolveResult {
    conga_with(game, CongaOptions::default(), &mut NoMonitor)
}

pub fn conga_with(game: &Game, opts: CongaOptions, monitor: &mut dyn Monitor) -> SolveResult {
    let mut run = Run::new(game, opts, monitor, None);
    run.start();
    run.finish()
}

/// Splits the search on the first player's strategies and solves the
/// branches on the rayon pool. The first level never backjumps here since
/// no branch sees the others' contexts; deeper levels are unaffected, their
/// tables being reset per branch anyway. Output is merged in branch order.
pub fn conga_parallel(game: &Game, opts: CongaOptions) -> SolveResult {
    let space = game.space(PlayerId(0));
    let branches: Vec<u64> = (0..space.size()).collect();
    let parts: Vec<SolveResult> = branches
        .par_iter()
        .map(|&s| {
            let mut monitor = NoMonitor;
            let mut run = Run::new(game, opts, &mut monitor, Some(s));
            run.start();
            run.finish()
        })
        .collect();
    let mut out = SolveResult { pne: Vec::new(), stats: SolveStats::default(), timed_out: false };
    for p in parts {
        out.pne.extend(p.pne);
        out.stats.candidates += p.stats.candidates;
        out.stats.deviation_calls += p.stats.deviation_calls;
        out.timed_out |= p.timed_out;
    }
    if opts.stop_after_first {
        out.pne.truncate(1);
    }
    out.stats.pne_found = out.pne.len() as u64;
    out
}

struct Level {
    table: BrTable,
    /// Contexts still unseen before the level is certified; signed since
    /// end-of-table sweeps can push it below zero.
    cnt: i64,
    /// Set when the table lost an entry; the level then never backjumps.
    poisoned: bool,
}

struct Run<'g, 'm> {
    game: &'g Game,
    opts: CongaOptions,
    monitor: &'m mut dyn Monitor,
    n: usize,
    sizes: Vec<u64>,
    levels: Vec<Level>,
    /// Strategy index per player along the current branch.
    path: Vec<u64>,
    nash: BTreeSet<Vec<u64>>,
    stats: SolveStats,
    prop: Propagator,
    only_first: Option<u64>,
    ticks: u32,
    halted: bool,
    timed_out: bool,
}

impl<'g, 'm> Run<'g, 'm> {
    fn new(game: &'g Game, opts: CongaOptions, monitor: &'m mut dyn Monitor, only_first: Option<u64>) -> Self {
        let n = game.num_players();
        let sizes: Vec<u64> = (0..n).map(|i| game.space(PlayerId(i)).size()).collect();
        let levels = (0..n)
            .map(|i| Level { table: BrTable::new(n - 1, opts.table_cap, i == 0), cnt: 0, poisoned: false })
            .collect();
        Run {
            game,
            opts,
            monitor,
            n,
            sizes,
            levels,
            path: vec![0; n],
            nash: BTreeSet::new(),
            stats: SolveStats::default(),
            prop: Propagator::default(),
            only_first,
            ticks: 0,
            halted: false,
            timed_out: false,
        }
    }

    fn start(&mut self) {
        let doms = self.game.initial_domains().to_vec();
        self.enumerate(doms, 0, None);
    }

    fn finish(self) -> SolveResult {
        let pne: Vec<_> = self.nash.iter().map(|t| self.game.profile_from_indices(t)).collect();
        let mut stats = self.stats;
        stats.pne_found = pne.len() as u64;
        SolveResult { pne, stats, timed_out: self.timed_out }
    }

    fn tick(&mut self) -> bool {
        if self.halted {
            return true;
        }
        self.ticks = self.ticks.wrapping_add(1);
        if self.ticks & 0x3f == 0 && self.opts.deadline.is_some_and(|d| Instant::now() >= d) {
            self.halted = true;
            self.timed_out = true;
        }
        self.halted
    }

    fn enumerate(&mut self, mut a: Vec<Domain>, i: usize, seeds: Option<&[VarId]>) {
        if self.tick() {
            return;
        }
        let game = self.game;
        if game.has_hard_constraints() && self.prop.run(game.hard_csp(), &mut a, seeds).is_err() {
            return;
        }
        if i == self.n {
            if game.check_hard_doms(a) {
                let t = self.path.clone();
                self.submit(&t, false);
            }
            return;
        }
        let level = &mut self.levels[i];
        level.table.reset();
        level.cnt = self.sizes[i + 1..].iter().fold(1i64, |acc, &s| acc.saturating_mul(s.min(i64::MAX as u64) as i64));
        level.poisoned = false;

        let player = PlayerId(i);
        let vars = game.space(player).vars().to_vec();
        let mut strategies = remaining_strategies(game, &a, i);
        if let (0, Some(s)) = (i, self.only_first) {
            strategies.retain(|&x| x == s);
        }
        let mut values = vec![0; vars.len()];
        for (k, &s) in strategies.iter().enumerate() {
            let mut b = a.clone();
            game.space(player).decode_into(s, &mut values);
            for (v, &x) in vars.iter().zip(&values) {
                b[v.0] = Domain::singleton(x);
            }
            self.path[i] = s;
            self.enumerate(b, i + 1, Some(&vars));
            if self.halted {
                return;
            }
            let level = &self.levels[i];
            if self.opts.counters && !level.poisoned && level.cnt <= 0 {
                self.end_of_table(i, &strategies[k + 1..]);
                break;
            }
        }
    }

    /// Re-checks every stored best response of level `i` that lies in the
    /// part of the subgame that will not be enumerated.
    fn end_of_table(&mut self, i: usize, unexplored: &[u64]) {
        let mut tuples = BTreeSet::new();
        let prefix = &self.path[..i];
        self.levels[i].table.for_each(|ctx, d| {
            if &ctx[..i] != prefix {
                return;
            }
            for v in d.filter(unexplored) {
                let mut t = Vec::with_capacity(ctx.len() + 1);
                t.extend_from_slice(&ctx[..i]);
                t.push(v);
                t.extend_from_slice(&ctx[i..]);
                tuples.insert(t);
            }
        });
        let prefix = prefix.to_vec();
        let mut submitted = Vec::new();
        for t in tuples {
            if self.tick() {
                return;
            }
            let values = self.game.profile_from_indices(&t);
            if self.game.check_hard_values(&values.0) {
                self.submit(&t, true);
                submitted.push(t);
            }
        }
        self.monitor.backjump(i, &prefix, unexplored, &submitted);
    }

    fn submit(&mut self, t: &[u64], resubmitted: bool) {
        self.stats.candidates += 1;
        self.monitor.candidate(t, resubmitted);
        for i in (0..self.n).rev() {
            if !self.best_responses(t, i).contains(t[i]) {
                return;
            }
        }
        if self.nash.insert(t.to_vec()) {
            self.monitor.pne(t);
            if self.opts.stop_after_first {
                self.halted = true;
            }
        }
    }

    fn best_responses(&mut self, t: &[u64], i: usize) -> BestResponses {
        let ctx: Vec<u64> = t[..i].iter().chain(&t[i + 1..]).copied().collect();
        if self.opts.tables {
            if let Some((d, under)) = self.levels[i].table.get_tagged(&ctx) {
                let d = d.clone();
                self.monitor.table_hit(i, under, self.path[0]);
                self.monitor.check(i, t, CheckSource::Table, &d);
                return d;
            }
        }
        let values = self.game.profile_from_indices(t);
        self.stats.deviation_calls += 1;
        let found = self.game.best_response_indices(&values.0, PlayerId(i));
        let d = if found.is_empty() { BestResponses::All } else { BestResponses::Set(found) };
        self.monitor.check(i, t, CheckSource::Solver, &d);
        let level = &mut self.levels[i];
        // tag entries with the first player's current strategy
        match level.table.insert_tagged(&ctx, d.clone(), self.path[0]) {
            Inserted::Fresh => level.cnt -= 1,
            Inserted::Existing => {}
            Inserted::Evicted | Inserted::Dropped => {
                level.cnt -= 1;
                level.poisoned = true;
            }
        }
        d
    }
}

/// Ascending strategy indices of player `i` whose values all lie in `a`.
fn remaining_strategies(game: &Game, a: &[Domain], i: usize) -> Vec<u64> {
    let space = game.space(PlayerId(i));
    let per_var: Vec<Vec<crate::Value>> = space.vars().iter().map(|v| a[v.0].values()).collect();
    let mut out = Vec::new();
    let mut pos = vec![0usize; per_var.len()];
    let mut values = vec![0; per_var.len()];
    if per_var.iter().any(|vs| vs.is_empty()) {
        return out;
    }
    loop {
        for (k, vs) in per_var.iter().enumerate() {
            values[k] = vs[pos[k]];
        }
        out.push(space.encode(&values).expect("active domains stay within the initial ones"));
        let mut k = per_var.len();
        loop {
            if k == 0 {
                return out;
            }
            k -= 1;
            pos[k] += 1;
            if pos[k] < per_var[k].len() {
                break;
            }
            pos[k] = 0;
        }
    }
}

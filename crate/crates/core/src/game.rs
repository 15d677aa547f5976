//! Constraint games: players controlling disjoint variable sets, existential
//! witness variables, per-player goal CSPs with optional optimization
//! conditions, and shared hard constraints.
//!
//! All predicates here (winning, beneficial deviation, best responses, Nash)
//! are decided by running the constraint engine with the relevant variables
//! fixed; both exhaustive solvers are built on top of them.

use std::collections::HashSet;
use std::fmt;

use crate::csp::{Bound, Constraint, Csp, Domain, OptGoal, Search, VarId};
use crate::error::GameError;
use crate::Value;

/// Dense player index, `0..n` in declaration order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct PlayerId(pub usize);

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Owner {
    Player(PlayerId),
    Existential,
}

#[derive(Debug, Clone)]
pub struct VarDecl {
    pub name: String,
    pub domain: Domain,
    pub owner: Owner,
}

#[derive(Debug, Clone)]
pub struct Player {
    pub name: String,
    pub vars: Vec<VarId>,
    pub goal: Vec<Constraint>,
    pub opt: Option<OptGoal>,
}

/// Which constraints a player's deviations are evaluated against.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum DeviationScope {
    /// The goal together with the hard constraints: a deviation must itself
    /// be a feasible profile, and existential variables defined by hard
    /// constraints keep their meaning inside the goal.
    #[default]
    WithHard,
    /// The goal alone; hard constraints only filter equilibrium candidates.
    GoalOnly,
}

/// Value of one player's goal at a profile.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Eval {
    /// The goal has no witness.
    Unsat,
    /// The goal holds; carries the best objective value over witnesses for
    /// optimization games.
    Sat(Option<Value>),
}

/// Assignment of every controlled variable, players' variables concatenated
/// in player order.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct StrategyProfile(pub Vec<Value>);

/// Assignment of one player's variables.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct PlayerStrategy(pub Vec<Value>);

/// Counters reported by the solvers.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct SolveStats {
    /// Full profiles submitted to Nash checking.
    pub candidates: u64,
    /// Goal-solver invocations (table hits excluded).
    pub deviation_calls: u64,
    pub pne_found: u64,
}

/// Output of one solver run.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SolveResult {
    /// Equilibria found, in lexicographic profile order.
    pub pne: Vec<StrategyProfile>,
    pub stats: SolveStats,
    /// Set when the run stopped at its deadline; `pne` is then partial.
    pub timed_out: bool,
}

/// Cartesian product of one player's variable domains, indexed in
/// lexicographic order (first variable most significant).
#[derive(Debug, Clone)]
pub struct StrategySpace {
    vars: Vec<VarId>,
    values: Vec<Vec<Value>>,
    size: u64,
}

impl StrategySpace {
    fn new(vars: Vec<VarId>, domains: &[Domain]) -> Self {
        let values: Vec<Vec<Value>> = vars.iter().map(|v| domains[v.0].values()).collect();
        let size = values.iter().fold(1u64, |acc, vs| acc.saturating_mul(vs.len() as u64));
        StrategySpace { vars, values, size }
    }

    pub fn vars(&self) -> &[VarId] {
        &self.vars
    }

    pub fn size(&self) -> u64 {
        self.size
    }

    pub fn arity(&self) -> usize {
        self.vars.len()
    }

    /// Writes the values of strategy `index` into `out`.
    pub fn decode_into(&self, mut index: u64, out: &mut [Value]) {
        for k in (0..self.vars.len()).rev() {
            let n = self.values[k].len() as u64;
            out[k] = self.values[k][(index % n) as usize];
            index /= n;
        }
    }

    pub fn decode(&self, index: u64) -> PlayerStrategy {
        let mut out = vec![0; self.vars.len()];
        self.decode_into(index, &mut out);
        PlayerStrategy(out)
    }

    pub fn encode(&self, values: &[Value]) -> Option<u64> {
        if values.len() != self.vars.len() {
            return None;
        }
        let mut index = 0u64;
        for (k, v) in values.iter().enumerate() {
            let pos = self.values[k].binary_search(v).ok()?;
            index = index * self.values[k].len() as u64 + pos as u64;
        }
        Some(index)
    }

    /// Strategy index of the assignment found in fixed `doms`.
    pub(crate) fn encode_doms(&self, doms: &[Domain]) -> u64 {
        let mut index = 0u64;
        for (k, v) in self.vars.iter().enumerate() {
            let pos = self.values[k].binary_search(&doms[v.0].lo()).expect("value within initial domain");
            index = index * self.values[k].len() as u64 + pos as u64;
        }
        index
    }
}

/// Incremental construction of a [`Game`].
#[derive(Debug, Clone, Default)]
pub struct GameBuilder {
    title: String,
    vars: Vec<VarDecl>,
    players: Vec<Player>,
    hard: Vec<Constraint>,
    scope: DeviationScope,
}

impl GameBuilder {
    pub fn new(title: impl Into<String>) -> Self {
        GameBuilder { title: title.into(), ..Default::default() }
    }

    pub fn player(&mut self, name: impl Into<String>) -> PlayerId {
        self.players.push(Player { name: name.into(), vars: Vec::new(), goal: Vec::new(), opt: None });
        PlayerId(self.players.len() - 1)
    }

    pub fn controlled(&mut self, player: PlayerId, name: impl Into<String>, domain: Domain) -> VarId {
        let id = VarId(self.vars.len());
        self.vars.push(VarDecl { name: name.into(), domain, owner: Owner::Player(player) });
        self.players[player.0].vars.push(id);
        id
    }

    pub fn existential(&mut self, name: impl Into<String>, domain: Domain) -> VarId {
        let id = VarId(self.vars.len());
        self.vars.push(VarDecl { name: name.into(), domain, owner: Owner::Existential });
        id
    }

    pub fn goal(&mut self, player: PlayerId, c: Constraint) -> &mut Self {
        self.players[player.0].goal.push(c);
        self
    }

    pub fn hard(&mut self, c: Constraint) -> &mut Self {
        self.hard.push(c);
        self
    }

    pub fn optimize(&mut self, player: PlayerId, goal: OptGoal) -> &mut Self {
        self.players[player.0].opt = Some(goal);
        self
    }

    pub fn deviation_scope(&mut self, scope: DeviationScope) -> &mut Self {
        self.scope = scope;
        self
    }

    pub fn build(self) -> Result<Game, GameError> {
        Game::from_parts(self.title, self.vars, self.players, self.hard, self.scope)
    }
}

/// Per-player solver setup.
#[derive(Clone)]
struct PlayerModel {
    /// Goal, plus hard constraints under [`DeviationScope::WithHard`].
    csp: Csp,
    /// Existential variables the model mentions, plus the objective.
    witnesses: Vec<VarId>,
    /// Own variables followed by `witnesses`.
    deviation_order: Vec<VarId>,
}

/// An immutable constraint game.
#[derive(Clone)]
pub struct Game {
    title: String,
    vars: Vec<VarDecl>,
    players: Vec<Player>,
    hard: Vec<Constraint>,
    scope: DeviationScope,
    domains: Vec<Domain>,
    controlled: Vec<VarId>,
    offsets: Vec<usize>,
    spaces: Vec<StrategySpace>,
    hard_csp: Csp,
    hard_witnesses: Vec<VarId>,
    models: Vec<PlayerModel>,
}

impl Game {
    /// Assembles and validates a game from its parts.
    pub fn from_parts(
        title: String,
        vars: Vec<VarDecl>,
        players: Vec<Player>,
        hard: Vec<Constraint>,
        scope: DeviationScope,
    ) -> Result<Game, GameError> {
        if players.is_empty() {
            return Err(GameError::NoPlayers);
        }
        let mut names = HashSet::new();
        for name in vars.iter().map(|v| &v.name).chain(players.iter().map(|p| &p.name)) {
            if !names.insert(name.as_str()) {
                return Err(GameError::DuplicateName(name.clone()));
            }
        }
        let mut owner_seen = vec![false; vars.len()];
        for (pi, p) in players.iter().enumerate() {
            if p.vars.is_empty() {
                return Err(GameError::NoControlledVariables(p.name.clone()));
            }
            for &v in &p.vars {
                if v.0 >= vars.len() {
                    return Err(crate::error::CspError::UnknownVariable { var: v.0, constraint: 0 }.into());
                }
                if owner_seen[v.0] || vars[v.0].owner != Owner::Player(PlayerId(pi)) {
                    return Err(GameError::OverlappingVariables(vars[v.0].name.clone()));
                }
                owner_seen[v.0] = true;
            }
        }
        for (v, decl) in vars.iter().enumerate() {
            if matches!(decl.owner, Owner::Player(_)) && !owner_seen[v] {
                return Err(GameError::OverlappingVariables(decl.name.clone()));
            }
        }
        for p in &players {
            if let Some(opt) = p.opt {
                let ok = opt.objective.0 < vars.len()
                    && (p.vars.contains(&opt.objective) || vars[opt.objective.0].owner == Owner::Existential);
                if !ok {
                    return Err(GameError::ForeignObjective { player: p.name.clone() });
                }
            }
        }

        let domains: Vec<Domain> = vars.iter().map(|v| v.domain.clone()).collect();
        let is_existential = |v: &VarId| vars[v.0].owner == Owner::Existential;
        let hard_csp = Csp::new(domains.clone(), hard.clone())?;
        let hard_witnesses: Vec<VarId> = hard_csp.constrained_vars().iter().copied().filter(is_existential).collect();

        let mut models = Vec::with_capacity(players.len());
        for p in &players {
            let mut cons = p.goal.clone();
            if scope == DeviationScope::WithHard {
                cons.extend(hard.iter().cloned());
            }
            let csp = Csp::new(domains.clone(), cons)?;
            let mut witnesses: Vec<VarId> = csp.constrained_vars().iter().copied().filter(is_existential).collect();
            if let Some(opt) = p.opt {
                if is_existential(&opt.objective) && !witnesses.contains(&opt.objective) {
                    witnesses.push(opt.objective);
                    witnesses.sort();
                }
            }
            let deviation_order = p.vars.iter().chain(&witnesses).copied().collect();
            models.push(PlayerModel { csp, witnesses, deviation_order });
        }

        let controlled: Vec<VarId> = players.iter().flat_map(|p| p.vars.iter().copied()).collect();
        let mut offsets = Vec::with_capacity(players.len() + 1);
        let mut acc = 0;
        for p in &players {
            offsets.push(acc);
            acc += p.vars.len();
        }
        offsets.push(acc);
        let spaces = players.iter().map(|p| StrategySpace::new(p.vars.clone(), &domains)).collect();

        Ok(Game {
            title,
            vars,
            players,
            hard,
            scope,
            domains,
            controlled,
            offsets,
            spaces,
            hard_csp,
            hard_witnesses,
            models,
        })
    }

    pub fn title(&self) -> &str {
        &self.title
    }

    pub fn num_players(&self) -> usize {
        self.players.len()
    }

    pub fn players(&self) -> &[Player] {
        &self.players
    }

    pub fn player(&self, i: PlayerId) -> &Player {
        &self.players[i.0]
    }

    pub fn vars(&self) -> &[VarDecl] {
        &self.vars
    }

    pub fn var_name(&self, v: VarId) -> &str {
        &self.vars[v.0].name
    }

    pub fn hard(&self) -> &[Constraint] {
        &self.hard
    }

    pub fn has_hard_constraints(&self) -> bool {
        !self.hard.is_empty()
    }

    pub fn scope(&self) -> DeviationScope {
        self.scope
    }

    /// True when some player has an optimization condition.
    pub fn is_optimization(&self) -> bool {
        self.players.iter().any(|p| p.opt.is_some())
    }

    /// Controlled variables in profile order.
    pub fn controlled(&self) -> &[VarId] {
        &self.controlled
    }

    pub fn initial_domains(&self) -> &[Domain] {
        &self.domains
    }

    pub fn space(&self, i: PlayerId) -> &StrategySpace {
        &self.spaces[i.0]
    }

    /// Positions of player `i`'s values within a profile.
    pub fn profile_range(&self, i: PlayerId) -> std::ops::Range<usize> {
        self.offsets[i.0]..self.offsets[i.0 + 1]
    }

    /// Number of strategy profiles, saturating.
    pub fn profile_count(&self) -> u64 {
        self.spaces.iter().fold(1u64, |acc, s| acc.saturating_mul(s.size()))
    }

    pub(crate) fn hard_csp(&self) -> &Csp {
        &self.hard_csp
    }

    /// Checks that `s` is a total profile within the initial domains.
    pub fn validate_profile(&self, s: &StrategyProfile) -> Result<(), GameError> {
        if s.0.len() != self.controlled.len() {
            return Err(GameError::ProfileArity { expected: self.controlled.len(), found: s.0.len() });
        }
        for (&v, &val) in self.controlled.iter().zip(&s.0) {
            if !self.domains[v.0].contains(val) {
                return Err(GameError::ValueOutOfDomain { var: self.vars[v.0].name.clone(), value: val });
            }
        }
        Ok(())
    }

    /// Profile assembled from one strategy index per player.
    pub fn profile_from_indices(&self, idx: &[u64]) -> StrategyProfile {
        let mut out = vec![0; self.controlled.len()];
        for (i, &k) in idx.iter().enumerate() {
            let r = self.profile_range(PlayerId(i));
            self.spaces[i].decode_into(k, &mut out[r]);
        }
        StrategyProfile(out)
    }

    /// Strategy index per player; `None` if a value is outside its domain.
    pub fn indices_of(&self, s: &StrategyProfile) -> Option<Vec<u64>> {
        (0..self.players.len()).map(|i| self.spaces[i].encode(&s.0[self.profile_range(PlayerId(i))])).collect()
    }

    /// Initial domains with the controlled variables fixed to `s`, except
    /// those of `free` when given.
    fn fixed_domains(&self, s: &[Value], free: Option<PlayerId>) -> Vec<Domain> {
        let mut doms = self.domains.clone();
        let skip = free.map(|p| self.profile_range(p)).unwrap_or(0..0);
        for (k, (&v, &val)) in self.controlled.iter().zip(s).enumerate() {
            if !skip.contains(&k) {
                doms[v.0] = Domain::singleton(val);
            }
        }
        doms
    }

    /// Hard constraints satisfiable with the controlled variables fixed to
    /// `s` (existential variables witnessed).
    pub fn check_hard(&self, s: &StrategyProfile) -> bool {
        self.check_hard_values(&s.0)
    }

    pub(crate) fn check_hard_values(&self, s: &[Value]) -> bool {
        if self.hard.is_empty() {
            return true;
        }
        let doms = self.fixed_domains(s, None);
        Search::new(&self.hard_csp, doms, self.hard_witnesses.clone()).next_solution().is_some()
    }

    /// Hard-constraint check from domains where the controlled variables are
    /// already fixed.
    pub(crate) fn check_hard_doms(&self, doms: Vec<Domain>) -> bool {
        self.hard.is_empty() || Search::new(&self.hard_csp, doms, self.hard_witnesses.clone()).next_solution().is_some()
    }

    /// `s` satisfies player `i`'s goal.
    pub fn is_winning(&self, s: &StrategyProfile, i: PlayerId) -> bool {
        matches!(self.evaluate_values(&s.0, i), Eval::Sat(_))
    }

    pub fn evaluate(&self, s: &StrategyProfile, i: PlayerId) -> Eval {
        self.evaluate_values(&s.0, i)
    }

    pub(crate) fn evaluate_values(&self, s: &[Value], i: PlayerId) -> Eval {
        let m = &self.models[i.0];
        let doms = self.fixed_domains(s, None);
        match self.players[i.0].opt {
            None => {
                let sat = Search::new(&m.csp, doms, m.witnesses.clone()).next_solution().is_some();
                if sat {
                    Eval::Sat(None)
                } else {
                    Eval::Unsat
                }
            }
            Some(goal) => {
                let mut order = m.witnesses.clone();
                if !order.contains(&goal.objective) {
                    order.push(goal.objective);
                }
                match m.csp.optimum(doms, order, goal) {
                    Some(v) => Eval::Sat(Some(v)),
                    None => Eval::Unsat,
                }
            }
        }
    }

    /// True iff `better` is strictly preferred to `worse` by player `i`.
    fn prefers(&self, i: PlayerId, better: Eval, worse: Eval) -> bool {
        match (better, worse) {
            (Eval::Unsat, _) => false,
            (Eval::Sat(_), Eval::Unsat) => true,
            (Eval::Sat(a), Eval::Sat(b)) => match (self.players[i.0].opt, a, b) {
                (Some(goal), Some(a), Some(b)) => goal.score(a) > goal.score(b),
                _ => false,
            },
        }
    }

    /// Whether switching from `s` to `s_alt` is a beneficial deviation for
    /// player `i`. The two profiles must agree outside `i`'s variables.
    pub fn better_than(&self, s_alt: &StrategyProfile, s: &StrategyProfile, i: PlayerId) -> Result<bool, GameError> {
        self.validate_profile(s)?;
        self.validate_profile(s_alt)?;
        let own = self.profile_range(i);
        let unilateral = s.0.iter().zip(&s_alt.0).enumerate().all(|(k, (a, b))| own.contains(&k) || a == b);
        if !unilateral {
            return Err(GameError::NotUnilateral(self.players[i.0].name.clone()));
        }
        Ok(self.prefers(i, self.evaluate(s_alt, i), self.evaluate(s, i)))
    }

    /// All strategies of player `i` that are optimal (or satisfying, without
    /// an optimization condition) against the rest of `s`. Empty when no
    /// strategy satisfies the goal.
    pub fn best_responses(&self, s: &StrategyProfile, i: PlayerId) -> Vec<PlayerStrategy> {
        let space = &self.spaces[i.0];
        self.best_response_indices(&s.0, i).into_iter().map(|k| space.decode(k)).collect()
    }

    /// Ascending strategy indices of player `i`'s best responses.
    pub(crate) fn best_response_indices(&self, s: &[Value], i: PlayerId) -> Vec<u64> {
        let m = &self.models[i.0];
        let doms = self.fixed_domains(s, Some(i));
        let own = self.players[i.0].vars.len();
        let mut order = m.deviation_order.clone();
        let mut search = match self.players[i.0].opt {
            None => Search::new(&m.csp, doms, order),
            Some(goal) => {
                if !order.contains(&goal.objective) {
                    order.push(goal.objective);
                }
                let Some(best) = m.csp.optimum(doms.clone(), order.clone(), goal) else {
                    return Vec::new();
                };
                let mut search = Search::new(&m.csp, doms, order);
                search.set_bound(Bound::Exactly(goal.objective, best));
                search
            }
        };
        let space = &self.spaces[i.0];
        let mut out = Vec::new();
        while let Some(sol) = search.next_solution() {
            out.push(space.encode_doms(sol));
            search.backtrack_to(own);
        }
        out
    }

    /// Whether player `i` has a beneficial deviation from `s`.
    pub fn has_beneficial_deviation(&self, s: &StrategyProfile, i: PlayerId) -> bool {
        self.has_deviation_values(&s.0, i)
    }

    pub(crate) fn has_deviation_values(&self, s: &[Value], i: PlayerId) -> bool {
        let m = &self.models[i.0];
        let current = self.evaluate_values(s, i);
        let mut order = m.deviation_order.clone();
        let mut search = match (current, self.players[i.0].opt) {
            (Eval::Sat(_), None) => return false,
            (Eval::Sat(Some(v)), Some(goal)) => {
                if !order.contains(&goal.objective) {
                    order.push(goal.objective);
                }
                let mut search = Search::new(&m.csp, self.fixed_domains(s, Some(i)), order);
                search.set_bound(goal.better_than(v));
                search
            }
            (Eval::Sat(None), Some(_)) => unreachable!("optimization goals always report a value"),
            (Eval::Unsat, _) => Search::new(&m.csp, self.fixed_domains(s, Some(i)), order),
        };
        search.next_solution().is_some()
    }

    /// Pure Nash equilibrium test: hard constraints hold and no player has a
    /// beneficial deviation.
    pub fn is_nash(&self, s: &StrategyProfile) -> bool {
        self.check_hard(s) && (0..self.players.len()).all(|i| !self.has_beneficial_deviation(s, PlayerId(i)))
    }

    /// Human-readable rendering of a profile, e.g. `(x=3, y=1)`.
    pub fn format_profile(&self, s: &StrategyProfile) -> String {
        let parts: Vec<String> =
            self.controlled.iter().zip(&s.0).map(|(&v, val)| format!("{}={}", self.vars[v.0].name, val)).collect();
        format!("({})", parts.join(", "))
    }
}

impl fmt::Debug for Game {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Game")
            .field("title", &self.title)
            .field("players", &self.players)
            .field("vars", &self.vars)
            .field("hard", &self.hard)
            .field("scope", &self.scope)
            .finish()
    }
}

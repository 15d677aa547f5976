//! Finite-domain constraint engine: domains, a small propagator vocabulary,
//! depth-first enumeration of all solutions, and all-optimal-solutions search.

mod constraint;
mod domain;
mod search;

use std::collections::VecDeque;
use std::fmt;

pub use constraint::{Cmp, Constraint, Term};
pub use domain::{Domain, DomainIter, Wipeout, MAX_SPAN};
pub use search::{Bound, Search, Solutions};

use crate::error::CspError;
use crate::Value;

/// Dense variable identifier.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct VarId(pub usize);

impl fmt::Debug for VarId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "v{}", self.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Direction {
    Min,
    Max,
}

/// `min(objective)` or `max(objective)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct OptGoal {
    pub direction: Direction,
    pub objective: VarId,
}

impl OptGoal {
    pub fn min(objective: VarId) -> Self {
        OptGoal { direction: Direction::Min, objective }
    }

    pub fn max(objective: VarId) -> Self {
        OptGoal { direction: Direction::Max, objective }
    }

    /// Objective value mapped so that larger is always better.
    #[inline]
    pub fn score(&self, v: Value) -> Value {
        match self.direction {
            Direction::Max => v,
            Direction::Min => -v,
        }
    }

    /// Bound admitting only values strictly better than `v`.
    pub fn better_than(&self, v: Value) -> Bound {
        match self.direction {
            Direction::Max => Bound::AtLeast(self.objective, v + 1),
            Direction::Min => Bound::AtMost(self.objective, v - 1),
        }
    }
}

/// Outcome of running all propagators to a fixpoint.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Propagation {
    Fixpoint(Vec<Domain>),
    Wipeout,
}

/// A set of constraints over a dense variable space with initial domains.
#[derive(Clone)]
pub struct Csp {
    domains: Vec<Domain>,
    constraints: Vec<Constraint>,
    watches: Vec<Vec<usize>>,
    constrained: Vec<VarId>,
}

impl Csp {
    /// Validates scopes, table arities and boolean domains.
    pub fn new(domains: Vec<Domain>, constraints: Vec<Constraint>) -> Result<Csp, CspError> {
        let n = domains.len();
        let mut watches = vec![Vec::new(); n];
        for (ci, c) in constraints.iter().enumerate() {
            let scope = c.scope();
            for &v in &scope {
                if v.0 >= n {
                    return Err(CspError::UnknownVariable { var: v.0, constraint: ci });
                }
                if watches[v.0].last() != Some(&ci) {
                    watches[v.0].push(ci);
                }
            }
            for b in c.boolean_vars() {
                let d = &domains[b.0];
                if d.lo() < 0 || d.hi() > 1 {
                    return Err(CspError::NotBoolean { var: b.0, constraint: ci });
                }
            }
            if let Constraint::Table { vars, tuples } = c {
                if let Some(t) = tuples.iter().find(|t| t.len() != vars.len()) {
                    return Err(CspError::TableArity { constraint: ci, expected: vars.len(), found: t.len() });
                }
            }
        }
        let constrained = (0..n).filter(|&v| !watches[v].is_empty()).map(VarId).collect();
        Ok(Csp { domains, constraints, watches, constrained })
    }

    pub fn num_vars(&self) -> usize {
        self.domains.len()
    }

    pub fn domains(&self) -> &[Domain] {
        &self.domains
    }

    pub fn constraints(&self) -> &[Constraint] {
        &self.constraints
    }

    /// Variables occurring in at least one constraint, ascending.
    pub fn constrained_vars(&self) -> &[VarId] {
        &self.constrained
    }

    pub fn all_vars(&self) -> Vec<VarId> {
        (0..self.domains.len()).map(VarId).collect()
    }

    /// True when every constraint holds on the total assignment.
    pub fn is_solution(&self, assignment: &[Value]) -> bool {
        self.constraints.iter().all(|c| c.is_satisfied(|v| assignment[v.0]))
    }

    /// Runs every propagator to a fixpoint over `doms`.
    pub fn propagate(&self, mut doms: Vec<Domain>) -> Propagation {
        match Propagator::default().run(self, &mut doms, None) {
            Ok(()) => Propagation::Fixpoint(doms),
            Err(Wipeout) => Propagation::Wipeout,
        }
    }

    /// Lazily enumerates every solution within `doms`, lexicographically in
    /// declaration order, as total assignments.
    pub fn solve_all(&self, doms: Vec<Domain>) -> Solutions<'_> {
        Solutions::new(Search::new(self, doms, self.all_vars()))
    }

    /// Every solution whose objective reaches the optimum over the solutions
    /// within `doms`. Empty iff unsatisfiable.
    pub fn solve_optimal_all(&self, doms: Vec<Domain>, goal: OptGoal) -> Solutions<'_> {
        let order = self.all_vars();
        let best = self.optimum(doms.clone(), order.clone(), goal);
        let mut search = Search::new(self, doms, order);
        match best {
            Some(v) => search.set_bound(Bound::Exactly(goal.objective, v)),
            None => search.exhaust(),
        }
        Solutions::new(search)
    }

    pub fn is_satisfiable(&self, doms: Vec<Domain>) -> bool {
        Search::new(self, doms, self.constrained.clone()).next_solution().is_some()
    }

    /// Branch and bound over `order`, which must contain the objective.
    /// Returns the optimal objective value, or `None` if unsatisfiable.
    pub fn optimum(&self, doms: Vec<Domain>, order: Vec<VarId>, goal: OptGoal) -> Option<Value> {
        debug_assert!(order.contains(&goal.objective));
        let mut search = Search::new(self, doms, order);
        let mut best = None;
        while let Some(sol) = search.next_solution() {
            let v = sol[goal.objective.0].lo();
            best = Some(v);
            search.set_bound(goal.better_than(v));
        }
        best
    }
}

impl fmt::Debug for Csp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Csp").field("domains", &self.domains).field("constraints", &self.constraints).finish()
    }
}

/// Reusable propagation queue.
#[derive(Default)]
pub(crate) struct Propagator {
    queue: VecDeque<usize>,
    queued: Vec<bool>,
    changed: Vec<VarId>,
}

impl Propagator {
    /// Propagates to a fixpoint. With `seeds`, only constraints watching
    /// those variables start in the queue; otherwise all of them do.
    pub(crate) fn run(&mut self, csp: &Csp, doms: &mut [Domain], seeds: Option<&[VarId]>) -> Result<(), Wipeout> {
        self.queued.clear();
        self.queued.resize(csp.constraints.len(), false);
        self.queue.clear();
        match seeds {
            None => {
                self.queue.extend(0..csp.constraints.len());
                self.queued.iter_mut().for_each(|q| *q = true);
            }
            Some(vars) => {
                for v in vars {
                    for &ci in &csp.watches[v.0] {
                        if !self.queued[ci] {
                            self.queued[ci] = true;
                            self.queue.push_back(ci);
                        }
                    }
                }
            }
        }
        while let Some(ci) = self.queue.pop_front() {
            self.queued[ci] = false;
            self.changed.clear();
            csp.constraints[ci].propagate(doms, &mut self.changed)?;
            for v in &self.changed {
                for &cj in &csp.watches[v.0] {
                    if cj != ci && !self.queued[cj] {
                        self.queued[cj] = true;
                        self.queue.push_back(cj);
                    }
                }
            }
        }
        Ok(())
    }
}

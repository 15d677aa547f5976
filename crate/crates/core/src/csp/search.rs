use super::{Csp, Domain, Propagator, VarId};
use crate::Value;

/// Restriction on one variable applied to every node created after it is set.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Bound {
    AtLeast(VarId, Value),
    AtMost(VarId, Value),
    Exactly(VarId, Value),
}

impl Bound {
    fn var(self) -> VarId {
        match self {
            Bound::AtLeast(v, _) | Bound::AtMost(v, _) | Bound::Exactly(v, _) => v,
        }
    }

    fn apply(self, doms: &mut [Domain]) -> bool {
        let r = match self {
            Bound::AtLeast(v, x) => doms[v.0].set_min(x),
            Bound::AtMost(v, x) => doms[v.0].set_max(x),
            Bound::Exactly(v, x) => doms[v.0].assign(x),
        };
        r.is_ok()
    }
}

struct Node {
    doms: Vec<Domain>,
    depth: usize,
    cursor: Value,
}

enum State {
    Fresh(Vec<Domain>),
    Running,
    Done,
}

/// Depth-first search with static variable order and ascending values.
///
/// Every node is a propagated copy of its parent's domains with one more
/// variable fixed. Variables outside `order` are never branched on.
pub struct Search<'c> {
    csp: &'c Csp,
    order: Vec<VarId>,
    stack: Vec<Node>,
    prop: Propagator,
    bound: Option<Bound>,
    state: State,
    current: Vec<Domain>,
    nodes: u64,
}

impl<'c> Search<'c> {
    pub fn new(csp: &'c Csp, doms: Vec<Domain>, order: Vec<VarId>) -> Self {
        assert_eq!(doms.len(), csp.num_vars(), "domains must cover every variable");
        Search {
            csp,
            order,
            stack: Vec::new(),
            prop: Propagator::default(),
            bound: None,
            state: State::Fresh(doms),
            current: Vec::new(),
            nodes: 0,
        }
    }

    /// Replaces the active bound. Nodes already on the stack are filtered
    /// lazily when their children are created.
    pub fn set_bound(&mut self, bound: Bound) {
        self.bound = Some(bound);
    }

    /// Makes the search produce no further solutions.
    pub fn exhaust(&mut self) {
        self.stack.clear();
        self.state = State::Done;
    }

    /// Discards open nodes at `depth` and below, so the next solution differs
    /// from the last one on some of the first `depth` variables of the order.
    pub fn backtrack_to(&mut self, depth: usize) {
        while self.stack.last().is_some_and(|n| n.depth >= depth) {
            self.stack.pop();
        }
    }

    /// Number of search nodes created so far.
    pub fn nodes(&self) -> u64 {
        self.nodes
    }

    fn seeds(&self, var: Option<VarId>) -> Vec<VarId> {
        var.into_iter().chain(self.bound.map(Bound::var)).collect()
    }

    /// Advances to the next solution; the returned domains are all fixed on
    /// the branching variables.
    pub fn next_solution(&mut self) -> Option<&[Domain]> {
        match std::mem::replace(&mut self.state, State::Running) {
            State::Done => {
                self.state = State::Done;
                return None;
            }
            State::Fresh(mut doms) => {
                self.nodes += 1;
                let ok =
                    self.bound.is_none_or(|b| b.apply(&mut doms)) && self.prop.run(self.csp, &mut doms, None).is_ok();
                if !ok {
                    self.state = State::Done;
                    return None;
                }
                if self.order.is_empty() {
                    self.state = State::Done;
                    self.current = doms;
                    return Some(&self.current);
                }
                self.stack.push(Node { doms, depth: 0, cursor: Value::MIN });
            }
            State::Running => {}
        }
        loop {
            let Some(top) = self.stack.last_mut() else {
                self.state = State::Done;
                return None;
            };
            let var = self.order[top.depth];
            let Some(v) = top.doms[var.0].next_from(top.cursor) else {
                self.stack.pop();
                continue;
            };
            top.cursor = v.saturating_add(1);
            let depth = top.depth;
            let mut child = if top.doms[var.0].next_from(top.cursor).is_none() {
                // last child: reuse the parent's domains
                self.stack.pop().unwrap().doms
            } else {
                top.doms.clone()
            };
            self.nodes += 1;
            let fixed_now = child[var.0].assign(v).expect("value taken from the domain");
            if let Some(b) = self.bound {
                if !b.apply(&mut child) {
                    continue;
                }
            }
            let seeds = self.seeds(fixed_now.then_some(var));
            if !seeds.is_empty() && self.prop.run(self.csp, &mut child, Some(&seeds)).is_err() {
                continue;
            }
            if depth + 1 == self.order.len() {
                self.current = child;
                return Some(&self.current);
            }
            self.stack.push(Node { doms: child, depth: depth + 1, cursor: Value::MIN });
        }
    }
}

/// Iterator over total assignments produced by a [`Search`] over all variables.
pub struct Solutions<'c> {
    search: Search<'c>,
}

impl<'c> Solutions<'c> {
    pub(crate) fn new(search: Search<'c>) -> Self {
        Solutions { search }
    }
}

impl Iterator for Solutions<'_> {
    type Item = Vec<Value>;

    fn next(&mut self) -> Option<Vec<Value>> {
        self.search.next_solution().map(|doms| doms.iter().map(Domain::lo).collect())
    }
}

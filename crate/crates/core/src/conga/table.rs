//! Best-response tables: one trie per player, keyed on the strategy indices
//! of every other player in player order, so lookups and inserts walk
//! exactly `n - 1` levels whatever the number of stored entries.

use std::collections::{BTreeMap, VecDeque};

/// Recorded best responses of one player for one context.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum BestResponses {
    /// The goal is unsatisfiable in this context: no preference, any
    /// strategy may take part in an equilibrium.
    All,
    /// Ascending strategy indices.
    Set(Vec<u64>),
}

impl BestResponses {
    pub fn contains(&self, s: u64) -> bool {
        match self {
            BestResponses::All => true,
            BestResponses::Set(v) => v.binary_search(&s).is_ok(),
        }
    }

    /// Members of `candidates` (ascending) that are best responses.
    pub fn filter<'a>(&'a self, candidates: &'a [u64]) -> impl Iterator<Item = u64> + 'a {
        candidates.iter().copied().filter(move |&s| self.contains(s))
    }
}

#[derive(Debug)]
enum Node {
    Inner(BTreeMap<u64, Node>),
    /// Responses plus a caller-chosen tag recorded at insertion.
    Leaf(BestResponses, u64),
}

/// What an insertion did to the table.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Inserted {
    /// A new context was stored.
    Fresh,
    /// The context was already present; nothing changed.
    Existing,
    /// Stored, but the oldest context was evicted to make room.
    Evicted,
    /// Not stored because the table is full.
    Dropped,
}

#[derive(Debug)]
pub struct BrTable {
    depth: usize,
    root: Node,
    len: usize,
    cap: Option<usize>,
    evict_oldest: bool,
    order: VecDeque<Vec<u64>>,
}

impl BrTable {
    /// Table for contexts of `depth` strategy indices. With a `cap`, a full
    /// table either evicts its oldest entry or refuses new ones.
    pub fn new(depth: usize, cap: Option<usize>, evict_oldest: bool) -> Self {
        BrTable { depth, root: Node::Inner(BTreeMap::new()), len: 0, cap, evict_oldest, order: VecDeque::new() }
    }

    // depth 0 only happens with one player; its single context lives under key 0
    fn key<'a>(&self, ctx: &'a [u64]) -> &'a [u64] {
        if self.depth == 0 {
            &[0]
        } else {
            ctx
        }
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn reset(&mut self) {
        self.root = Node::Inner(BTreeMap::new());
        self.len = 0;
        self.order.clear();
    }

    pub fn get(&self, ctx: &[u64]) -> Option<&BestResponses> {
        self.get_tagged(ctx).map(|(d, _)| d)
    }

    pub fn get_tagged(&self, ctx: &[u64]) -> Option<(&BestResponses, u64)> {
        debug_assert_eq!(ctx.len(), self.depth);
        let mut node = &self.root;
        for k in self.key(ctx) {
            match node {
                Node::Inner(m) => node = m.get(k)?,
                Node::Leaf(..) => unreachable!("leaf above full depth"),
            }
        }
        match node {
            Node::Leaf(d, tag) => Some((d, *tag)),
            Node::Inner(_) => None,
        }
    }

    pub fn insert(&mut self, ctx: &[u64], d: BestResponses) -> Inserted {
        self.insert_tagged(ctx, d, 0)
    }

    pub fn insert_tagged(&mut self, ctx: &[u64], d: BestResponses, tag: u64) -> Inserted {
        debug_assert_eq!(ctx.len(), self.depth);
        if self.get(ctx).is_some() {
            return Inserted::Existing;
        }
        let mut outcome = Inserted::Fresh;
        if self.cap.is_some_and(|c| self.len >= c) {
            if !self.evict_oldest || self.order.is_empty() {
                return Inserted::Dropped;
            }
            let old = self.order.pop_front().expect("non-empty");
            self.remove(&old);
            outcome = Inserted::Evicted;
        }
        let key = self.key(ctx).to_vec();
        let mut node = &mut self.root;
        for (pos, k) in key.iter().enumerate() {
            let Node::Inner(m) = node else { unreachable!("leaf above full depth") };
            let last = pos + 1 == key.len();
            node = m.entry(*k).or_insert_with(|| {
                if last {
                    Node::Leaf(BestResponses::All, 0)
                } else {
                    Node::Inner(BTreeMap::new())
                }
            });
        }
        *node = Node::Leaf(d, tag);
        self.len += 1;
        if self.cap.is_some() {
            self.order.push_back(ctx.to_vec());
        }
        outcome
    }

    fn remove(&mut self, ctx: &[u64]) {
        fn rec(node: &mut Node, key: &[u64]) -> bool {
            let Node::Inner(m) = node else { return false };
            let Some((k, rest)) = key.split_first() else { return false };
            if rest.is_empty() {
                return m.remove(k).is_some();
            }
            let Some(child) = m.get_mut(k) else { return false };
            let r = rec(child, rest);
            if matches!(child, Node::Inner(cm) if cm.is_empty()) {
                m.remove(k);
            }
            r
        }
        let key = self.key(ctx).to_vec();
        if rec(&mut self.root, &key) {
            self.len -= 1;
        }
    }

    /// Visits every stored context in trie (lexicographic) order.
    pub fn for_each(&self, mut f: impl FnMut(&[u64], &BestResponses)) {
        fn rec(node: &Node, path: &mut Vec<u64>, f: &mut dyn FnMut(&[u64], &BestResponses)) {
            match node {
                Node::Leaf(d, _) => f(path, d),
                Node::Inner(m) => {
                    for (k, child) in m {
                        path.push(*k);
                        rec(child, path, f);
                        path.pop();
                    }
                }
            }
        }
        if self.depth == 0 {
            if let Some(d) = self.get(&[]) {
                f(&[], d);
            }
            return;
        }
        rec(&self.root, &mut Vec::with_capacity(self.depth), &mut f);
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn set(v: &[u64]) -> BestResponses {
        BestResponses::Set(v.to_vec())
    }

    #[test]
    fn insert_then_search() {
        let mut t = BrTable::new(2, None, false);
        assert_eq!(t.get(&[1, 3]), None);
        assert_eq!(t.insert(&[1, 3], set(&[0, 2])), Inserted::Fresh);
        assert_eq!(t.get(&[1, 3]), Some(&set(&[0, 2])));
        assert_eq!(t.get(&[1, 2]), None);
        assert_eq!(t.get(&[3, 1]), None);
        assert_eq!(t.insert(&[1, 3], set(&[1])), Inserted::Existing);
        assert_eq!(t.get(&[1, 3]), Some(&set(&[0, 2])));
        t.insert_tagged(&[0, 0], BestResponses::All, 7);
        assert_eq!(t.get_tagged(&[0, 0]), Some((&BestResponses::All, 7)));
    }

    #[test]
    fn reset_empties() {
        let mut t = BrTable::new(1, None, false);
        t.insert(&[4], BestResponses::All);
        t.reset();
        assert!(t.is_empty());
        assert_eq!(t.get(&[4]), None);
    }

    #[test]
    fn zero_depth_single_context() {
        let mut t = BrTable::new(0, None, false);
        assert_eq!(t.get(&[]), None);
        t.insert(&[], set(&[2]));
        assert_eq!(t.get(&[]), Some(&set(&[2])));
        let mut seen = 0;
        t.for_each(|c, d| {
            assert!(c.is_empty());
            assert_eq!(d, &set(&[2]));
            seen += 1;
        });
        assert_eq!(seen, 1);
    }

    #[test]
    fn trie_order_iteration() {
        let mut t = BrTable::new(2, None, false);
        for ctx in [[2, 0], [0, 5], [0, 1], [1, 1]] {
            t.insert(&ctx, BestResponses::All);
        }
        let mut out = Vec::new();
        t.for_each(|c, _| out.push(c.to_vec()));
        assert_eq!(out, vec![vec![0, 1], vec![0, 5], vec![1, 1], vec![2, 0]]);
    }

    #[test]
    fn capped_tables() {
        let mut drop = BrTable::new(1, Some(2), false);
        assert_eq!(drop.insert(&[0], BestResponses::All), Inserted::Fresh);
        assert_eq!(drop.insert(&[1], BestResponses::All), Inserted::Fresh);
        assert_eq!(drop.insert(&[2], BestResponses::All), Inserted::Dropped);
        assert_eq!(drop.len(), 2);

        let mut fifo = BrTable::new(2, Some(2), true);
        fifo.insert(&[0, 0], BestResponses::All);
        fifo.insert(&[0, 1], BestResponses::All);
        assert_eq!(fifo.insert(&[1, 0], BestResponses::All), Inserted::Evicted);
        assert_eq!(fifo.get(&[0, 0]), None);
        assert!(fifo.get(&[0, 1]).is_some());
        assert!(fifo.get(&[1, 0]).is_some());
        assert_eq!(fifo.len(), 2);
    }

    #[test]
    fn filter_keeps_members() {
        let d = set(&[1, 4, 6]);
        assert_eq!(d.filter(&[2, 4, 5, 6]).collect::<Vec<_>>(), vec![4, 6]);
        assert_eq!(BestResponses::All.filter(&[7, 9]).collect::<Vec<_>>(), vec![7, 9]);
    }
}

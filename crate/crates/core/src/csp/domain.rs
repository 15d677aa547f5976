use std::fmt;

use crate::Value;

/// Signals that a domain lost its last value.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Wipeout;

/// Widest span (hi - lo + 1) a domain with holes may cover.
pub const MAX_SPAN: i64 = 1 << 24;

/// Finite ordered set of integers.
///
/// Stored as an interval `[lo, hi]` plus an optional bitmap once a value
/// strictly inside the interval has been removed. A value is a member iff it
/// lies within the bounds and (when present) its bit is set. `size` is kept
/// exact so cardinality queries are O(1).
#[derive(Clone, PartialEq, Eq)]
pub struct Domain {
    lo: Value,
    hi: Value,
    size: u64,
    bits: Option<Box<Bits>>,
}

#[derive(Clone, PartialEq, Eq)]
struct Bits {
    base: Value,
    words: Vec<u64>,
}

impl Bits {
    fn full(lo: Value, hi: Value) -> Self {
        let span = (hi - lo + 1) as usize;
        let mut words = vec![u64::MAX; span.div_ceil(64)];
        let tail = span % 64;
        if tail != 0 {
            *words.last_mut().unwrap() = (1u64 << tail) - 1;
        }
        Bits { base: lo, words }
    }

    #[inline]
    fn get(&self, v: Value) -> bool {
        let off = (v - self.base) as usize;
        self.words[off / 64] >> (off % 64) & 1 == 1
    }

    #[inline]
    fn clear(&mut self, v: Value) {
        let off = (v - self.base) as usize;
        self.words[off / 64] &= !(1u64 << (off % 64));
    }

    /// Smallest set value in `[from, to]`.
    fn next_set(&self, from: Value, to: Value) -> Option<Value> {
        if from > to {
            return None;
        }
        let start = (from - self.base) as usize;
        let end = (to - self.base) as usize;
        let mut w = start / 64;
        let mut word = self.words[w] & (u64::MAX << (start % 64));
        loop {
            if word != 0 {
                let off = w * 64 + word.trailing_zeros() as usize;
                return (off <= end).then_some(self.base + off as Value);
            }
            w += 1;
            if w * 64 > end {
                return None;
            }
            word = self.words[w];
        }
    }

    /// Largest set value in `[from, to]`.
    fn prev_set(&self, from: Value, to: Value) -> Option<Value> {
        if from > to {
            return None;
        }
        let start = (from - self.base) as usize;
        let end = (to - self.base) as usize;
        let mut w = end / 64;
        let shift = 63 - (end % 64);
        let mut word = (self.words[w] << shift) >> shift;
        loop {
            if word != 0 {
                let off = w * 64 + 63 - word.leading_zeros() as usize;
                return (off >= start).then_some(self.base + off as Value);
            }
            if w == 0 || (w - 1) * 64 + 63 < start {
                return None;
            }
            w -= 1;
            word = self.words[w];
        }
    }

    /// Number of set values in `[from, to]`.
    fn count(&self, from: Value, to: Value) -> u64 {
        if from > to {
            return 0;
        }
        let start = (from - self.base) as usize;
        let end = (to - self.base) as usize;
        let (ws, we) = (start / 64, end / 64);
        let mut total = 0u64;
        for w in ws..=we {
            let mut word = self.words[w];
            if w == ws {
                word &= u64::MAX << (start % 64);
            }
            if w == we {
                let shift = 63 - (end % 64);
                word = (word << shift) >> shift;
            }
            total += word.count_ones() as u64;
        }
        total
    }
}

impl Domain {
    /// The interval `[lo, hi]`. Panics if `lo > hi`.
    pub fn range(lo: Value, hi: Value) -> Self {
        assert!(lo <= hi, "empty range {lo}..={hi}");
        Domain { lo, hi, size: (hi - lo) as u64 + 1, bits: None }
    }

    pub fn singleton(v: Value) -> Self {
        Domain::range(v, v)
    }

    /// Builds a domain from arbitrary values; `None` when `values` is empty.
    /// Panics if the values span more than [`MAX_SPAN`].
    pub fn from_values<I: IntoIterator<Item = Value>>(values: I) -> Option<Self> {
        let mut vals: Vec<Value> = values.into_iter().collect();
        vals.sort_unstable();
        vals.dedup();
        let (&lo, &hi) = (vals.first()?, vals.last()?);
        if vals.len() as i64 == hi - lo + 1 {
            return Some(Domain::range(lo, hi));
        }
        assert!(hi - lo < MAX_SPAN, "domain span {lo}..={hi} too wide");
        let span = (hi - lo + 1) as usize;
        let mut words = vec![0u64; span.div_ceil(64)];
        for v in &vals {
            let off = (v - lo) as usize;
            words[off / 64] |= 1 << (off % 64);
        }
        Some(Domain { lo, hi, size: vals.len() as u64, bits: Some(Box::new(Bits { base: lo, words })) })
    }

    #[inline]
    pub fn lo(&self) -> Value {
        self.lo
    }

    #[inline]
    pub fn hi(&self) -> Value {
        self.hi
    }

    #[inline]
    pub fn size(&self) -> u64 {
        self.size
    }

    #[inline]
    pub fn is_fixed(&self) -> bool {
        self.size == 1
    }

    /// The value of a fixed domain.
    #[inline]
    pub fn value(&self) -> Option<Value> {
        self.is_fixed().then_some(self.lo)
    }

    /// True when the domain has no holes.
    pub fn is_interval(&self) -> bool {
        self.size == (self.hi - self.lo) as u64 + 1
    }

    #[inline]
    pub fn contains(&self, v: Value) -> bool {
        v >= self.lo && v <= self.hi && self.bits.as_ref().is_none_or(|b| b.get(v))
    }

    /// Smallest member `>= v`.
    pub fn next_from(&self, v: Value) -> Option<Value> {
        let from = v.max(self.lo);
        if from > self.hi {
            return None;
        }
        match &self.bits {
            None => Some(from),
            Some(b) => b.next_set(from, self.hi),
        }
    }

    /// Largest member `<= v`.
    pub fn prev_from(&self, v: Value) -> Option<Value> {
        let to = v.min(self.hi);
        if to < self.lo {
            return None;
        }
        match &self.bits {
            None => Some(to),
            Some(b) => b.prev_set(self.lo, to),
        }
    }

    pub fn iter(&self) -> DomainIter<'_> {
        DomainIter { dom: self, next: Some(self.lo) }
    }

    pub fn values(&self) -> Vec<Value> {
        self.iter().collect()
    }

    /// Position of `v` in ascending order, if present.
    pub fn index_of(&self, v: Value) -> Option<usize> {
        if !self.contains(v) {
            return None;
        }
        Some(match &self.bits {
            None => (v - self.lo) as usize,
            Some(b) => b.count(self.lo, v) as usize - 1,
        })
    }

    fn count_in(&self, from: Value, to: Value) -> u64 {
        let (from, to) = (from.max(self.lo), to.min(self.hi));
        if from > to {
            return 0;
        }
        match &self.bits {
            None => (to - from) as u64 + 1,
            Some(b) => b.count(from, to),
        }
    }

    /// Removes every value `< v`. Returns whether anything changed.
    pub fn set_min(&mut self, v: Value) -> Result<bool, Wipeout> {
        if v <= self.lo {
            return Ok(false);
        }
        let new_lo = self.next_from(v).ok_or(Wipeout)?;
        self.size -= self.count_in(self.lo, new_lo - 1);
        self.lo = new_lo;
        Ok(true)
    }

    /// Removes every value `> v`. Returns whether anything changed.
    pub fn set_max(&mut self, v: Value) -> Result<bool, Wipeout> {
        if v >= self.hi {
            return Ok(false);
        }
        let new_hi = self.prev_from(v).ok_or(Wipeout)?;
        self.size -= self.count_in(new_hi + 1, self.hi);
        self.hi = new_hi;
        Ok(true)
    }

    /// Reduces the domain to `{v}`.
    pub fn assign(&mut self, v: Value) -> Result<bool, Wipeout> {
        if !self.contains(v) {
            return Err(Wipeout);
        }
        if self.is_fixed() {
            return Ok(false);
        }
        self.lo = v;
        self.hi = v;
        self.size = 1;
        self.bits = None;
        Ok(true)
    }

    pub fn remove(&mut self, v: Value) -> Result<bool, Wipeout> {
        if !self.contains(v) {
            return Ok(false);
        }
        if self.size == 1 {
            return Err(Wipeout);
        }
        if v == self.lo {
            return self.set_min(v + 1);
        }
        if v == self.hi {
            return self.set_max(v - 1);
        }
        let (lo, hi) = (self.lo, self.hi);
        self.bits.get_or_insert_with(|| Box::new(Bits::full(lo, hi))).clear(v);
        self.size -= 1;
        Ok(true)
    }

    /// Removes every value in `[a, b]`.
    pub fn remove_range(&mut self, a: Value, b: Value) -> Result<bool, Wipeout> {
        let (a, b) = (a.max(self.lo), b.min(self.hi));
        if a > b {
            return Ok(false);
        }
        if a == self.lo {
            return self.set_min(b + 1);
        }
        if b == self.hi {
            return self.set_max(a - 1);
        }
        let removed = self.count_in(a, b);
        if removed == 0 {
            return Ok(false);
        }
        let (lo, hi) = (self.lo, self.hi);
        let bits = self.bits.get_or_insert_with(|| Box::new(Bits::full(lo, hi)));
        for v in a..=b {
            bits.clear(v);
        }
        self.size -= removed;
        Ok(true)
    }

    /// Keeps only values satisfying `keep`.
    pub fn retain<F: FnMut(Value) -> bool>(&mut self, mut keep: F) -> Result<bool, Wipeout> {
        let doomed: Vec<Value> = self.iter().filter(|&v| !keep(v)).collect();
        if doomed.is_empty() {
            return Ok(false);
        }
        if doomed.len() as u64 == self.size {
            return Err(Wipeout);
        }
        for v in doomed {
            self.remove(v)?;
        }
        Ok(true)
    }

    /// Intersects with `other`.
    pub fn intersect(&mut self, other: &Domain) -> Result<bool, Wipeout> {
        let mut changed = self.set_min(other.lo)?;
        changed |= self.set_max(other.hi)?;
        if other.bits.is_some() || self.bits.is_some() {
            changed |= self.retain(|v| other.contains(v))?;
        }
        Ok(changed)
    }

    /// True when the two domains share at least one value.
    pub fn meets(&self, other: &Domain) -> bool {
        let (small, big) = if self.size <= other.size { (self, other) } else { (other, self) };
        if small.is_interval() && big.is_interval() {
            return small.lo.max(big.lo) <= small.hi.min(big.hi);
        }
        small.iter().any(|v| big.contains(v))
    }
}

pub struct DomainIter<'a> {
    dom: &'a Domain,
    next: Option<Value>,
}

impl Iterator for DomainIter<'_> {
    type Item = Value;

    fn next(&mut self) -> Option<Value> {
        let v = self.dom.next_from(self.next?)?;
        self.next = v.checked_add(1);
        Some(v)
    }
}

impl fmt::Debug for Domain {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_interval() {
            write!(f, "{}..={}", self.lo, self.hi)
        } else {
            f.debug_set().entries(self.iter()).finish()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::collections::BTreeSet;

    #[test]
    fn holes_and_bounds() {
        let mut d = Domain::range(1, 10);
        assert!(d.remove(5).unwrap());
        assert_eq!(d.size(), 9);
        assert!(!d.contains(5));
        d.set_min(4).unwrap();
        assert_eq!(d.lo(), 4);
        assert_eq!(d.size(), 6);
        d.set_max(5).unwrap();
        assert_eq!(d.values(), vec![4]);
        assert_eq!(d.remove(4), Err(Wipeout));
    }

    #[test]
    fn bounds_skip_holes() {
        let mut d = Domain::from_values([1, 2, 70, 130]).unwrap();
        d.set_min(3).unwrap();
        assert_eq!(d.lo(), 70);
        d.set_max(129).unwrap();
        assert_eq!(d.value(), Some(70));
        assert_eq!(Domain::from_values([1, 2, 70]).unwrap().set_min(71), Err(Wipeout));
    }

    #[test]
    fn index_of_counts_members() {
        let d = Domain::from_values([3, 8, 9, 200]).unwrap();
        assert_eq!(d.index_of(3), Some(0));
        assert_eq!(d.index_of(200), Some(3));
        assert_eq!(d.index_of(4), None);
    }

    #[test]
    fn remove_range_inside() {
        let mut d = Domain::range(0, 100);
        d.remove_range(10, 90).unwrap();
        assert_eq!(d.size(), 20);
        assert_eq!(d.next_from(10), Some(91));
        assert_eq!(d.prev_from(90), Some(9));
    }

    #[derive(Debug, Clone)]
    enum Op {
        Min(i64),
        Max(i64),
        Remove(i64),
        RemoveRange(i64, i64),
    }

    fn op() -> impl Strategy<Value = Op> {
        prop_oneof![
            (-5i64..140).prop_map(Op::Min),
            (-5i64..140).prop_map(Op::Max),
            (-5i64..140).prop_map(Op::Remove),
            (-5i64..140, 0i64..20).prop_map(|(a, w)| Op::RemoveRange(a, a + w)),
        ]
    }

    proptest! {
        // The bitmap-backed domain must behave exactly like a plain ordered set.
        #[test]
        fn behaves_like_btreeset(init in proptest::collection::btree_set(0i64..130, 1..60),
                                 ops in proptest::collection::vec(op(), 0..30)) {
            let mut d = Domain::from_values(init.iter().copied()).unwrap();
            let mut model: BTreeSet<i64> = init;
            for op in ops {
                let mut next = model.clone();
                match op {
                    Op::Min(v) => next.retain(|&x| x >= v),
                    Op::Max(v) => next.retain(|&x| x <= v),
                    Op::Remove(v) => { next.remove(&v); }
                    Op::RemoveRange(a, b) => next.retain(|&x| x < a || x > b),
                }
                let res = match op {
                    Op::Min(v) => d.set_min(v),
                    Op::Max(v) => d.set_max(v),
                    Op::Remove(v) => d.remove(v),
                    Op::RemoveRange(a, b) => d.remove_range(a, b),
                };
                if next.is_empty() {
                    prop_assert_eq!(res, Err(Wipeout));
                    break;
                }
                prop_assert_eq!(res, Ok(next != model));
                model = next;
                prop_assert_eq!(d.values(), model.iter().copied().collect::<Vec<_>>());
                prop_assert_eq!(d.size(), model.len() as u64);
                prop_assert_eq!(d.lo(), *model.first().unwrap());
                prop_assert_eq!(d.hi(), *model.last().unwrap());
            }
        }
    }
}

use std::fmt;

use super::domain::{Domain, Wipeout};
use super::VarId;
use crate::Value;

/// Relational operator of linear constraints.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Cmp {
    Eq,
    Le,
    Ge,
}

impl Cmp {
    pub fn holds(self, lhs: i128, rhs: i128) -> bool {
        match self {
            Cmp::Eq => lhs == rhs,
            Cmp::Le => lhs <= rhs,
            Cmp::Ge => lhs >= rhs,
        }
    }

    pub fn symbol(self) -> &'static str {
        match self {
            Cmp::Eq => "=",
            Cmp::Le => "<=",
            Cmp::Ge => ">=",
        }
    }
}

/// One `coef * var` term.
pub type Term = (Value, VarId);

/// The constraint vocabulary understood by the propagation engine.
#[derive(Clone, PartialEq, Eq)]
pub enum Constraint {
    /// `sum(coef * var) op rhs`
    Linear { terms: Vec<Term>, op: Cmp, rhs: Value },
    /// Pairwise distinct values.
    AllDifferent(Vec<VarId>),
    /// `z = |x - k1| + k2`
    AbsOffset { z: VarId, x: VarId, k1: Value, k2: Value },
    /// `y = min(xs)`
    MinOf { y: VarId, xs: Vec<VarId> },
    /// `b = 1 <-> x = k`, with `b` boolean.
    ReifEqConst { b: VarId, x: VarId, k: Value },
    /// `b = 1 -> x = y`, with `b` boolean.
    ImplyEqVars { b: VarId, x: VarId, y: VarId },
    /// `sum(w * b) op rhs` over boolean variables.
    WeightedBoolSum { terms: Vec<Term>, op: Cmp, rhs: Value },
    /// Extensional constraint: the scope must take one of the listed tuples.
    Table { vars: Vec<VarId>, tuples: Vec<Vec<Value>> },
}

impl Constraint {
    /// Variables the constraint mentions, in order, possibly with repeats.
    pub fn scope(&self) -> Vec<VarId> {
        match self {
            Constraint::Linear { terms, .. } | Constraint::WeightedBoolSum { terms, .. } => {
                terms.iter().map(|&(_, v)| v).collect()
            }
            Constraint::AllDifferent(vs) => vs.clone(),
            Constraint::AbsOffset { z, x, .. } => vec![*z, *x],
            Constraint::MinOf { y, xs } => std::iter::once(*y).chain(xs.iter().copied()).collect(),
            Constraint::ReifEqConst { b, x, .. } => vec![*b, *x],
            Constraint::ImplyEqVars { b, x, y } => vec![*b, *x, *y],
            Constraint::Table { vars, .. } => vars.clone(),
        }
    }

    /// Variables that must be 0/1.
    pub fn boolean_vars(&self) -> Vec<VarId> {
        match self {
            Constraint::WeightedBoolSum { terms, .. } => terms.iter().map(|&(_, v)| v).collect(),
            Constraint::ReifEqConst { b, .. } | Constraint::ImplyEqVars { b, .. } => vec![*b],
            _ => Vec::new(),
        }
    }

    pub fn kind_name(&self) -> &'static str {
        match self {
            Constraint::Linear { .. } => "linear",
            Constraint::AllDifferent(_) => "alldifferent",
            Constraint::AbsOffset { .. } => "absoffset",
            Constraint::MinOf { .. } => "minof",
            Constraint::ReifEqConst { .. } => "reif",
            Constraint::ImplyEqVars { .. } => "imply",
            Constraint::WeightedBoolSum { .. } => "boolsum",
            Constraint::Table { .. } => "table",
        }
    }

    /// Evaluates the constraint on a total assignment indexed by variable.
    pub fn is_satisfied(&self, value: impl Fn(VarId) -> Value) -> bool {
        match self {
            Constraint::Linear { terms, op, rhs } | Constraint::WeightedBoolSum { terms, op, rhs } => {
                let lhs: i128 = terms.iter().map(|&(a, v)| a as i128 * value(v) as i128).sum();
                op.holds(lhs, *rhs as i128)
            }
            Constraint::AllDifferent(vs) => {
                let mut vals: Vec<Value> = vs.iter().map(|&v| value(v)).collect();
                vals.sort_unstable();
                vals.windows(2).all(|w| w[0] != w[1])
            }
            Constraint::AbsOffset { z, x, k1, k2 } => value(*z) == (value(*x) - k1).abs() + k2,
            Constraint::MinOf { y, xs } => xs.iter().map(|&v| value(v)).min() == Some(value(*y)),
            Constraint::ReifEqConst { b, x, k } => {
                let bv = value(*b);
                (bv == 0 || bv == 1) && ((bv == 1) == (value(*x) == *k))
            }
            Constraint::ImplyEqVars { b, x, y } => {
                let bv = value(*b);
                bv == 0 || (bv == 1 && value(*x) == value(*y))
            }
            Constraint::Table { vars, tuples } => {
                let row: Vec<Value> = vars.iter().map(|&v| value(v)).collect();
                tuples.contains(&row)
            }
        }
    }

    /// Filters `doms`, reporting every touched variable to `changed`.
    pub(crate) fn propagate(&self, doms: &mut [Domain], changed: &mut Vec<VarId>) -> Result<(), Wipeout> {
        let mut store = Store { doms, changed };
        match self {
            Constraint::Linear { terms, op, rhs } | Constraint::WeightedBoolSum { terms, op, rhs } => {
                linear(&mut store, terms, *op, *rhs)
            }
            Constraint::AllDifferent(vs) => all_different(&mut store, vs),
            Constraint::AbsOffset { z, x, k1, k2 } => abs_offset(&mut store, *z, *x, *k1, *k2),
            Constraint::MinOf { y, xs } => min_of(&mut store, *y, xs),
            Constraint::ReifEqConst { b, x, k } => reif_eq_const(&mut store, *b, *x, *k),
            Constraint::ImplyEqVars { b, x, y } => imply_eq_vars(&mut store, *b, *x, *y),
            Constraint::Table { vars, tuples } => table(&mut store, vars, tuples),
        }
    }
}

impl fmt::Debug for Constraint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fn terms_str(terms: &[Term]) -> String {
            terms.iter().map(|(a, v)| format!("{a}*{v:?}")).collect::<Vec<_>>().join(" + ")
        }
        match self {
            Constraint::Linear { terms, op, rhs } => {
                write!(f, "linear {} {} {}", terms_str(terms), op.symbol(), rhs)
            }
            Constraint::WeightedBoolSum { terms, op, rhs } => {
                write!(f, "boolsum {} {} {}", terms_str(terms), op.symbol(), rhs)
            }
            Constraint::AllDifferent(vs) => write!(f, "alldifferent{vs:?}"),
            Constraint::AbsOffset { z, x, k1, k2 } => write!(f, "{z:?} = |{x:?} - {k1}| + {k2}"),
            Constraint::MinOf { y, xs } => write!(f, "{y:?} = min{xs:?}"),
            Constraint::ReifEqConst { b, x, k } => write!(f, "{b:?} <-> {x:?} = {k}"),
            Constraint::ImplyEqVars { b, x, y } => write!(f, "{b:?} -> {x:?} = {y:?}"),
            Constraint::Table { vars, tuples } => write!(f, "table{vars:?} ({} tuples)", tuples.len()),
        }
    }
}

/// Domain store view that records modified variables.
struct Store<'a> {
    doms: &'a mut [Domain],
    changed: &'a mut Vec<VarId>,
}

impl Store<'_> {
    #[inline]
    fn dom(&self, v: VarId) -> &Domain {
        &self.doms[v.0]
    }

    #[inline]
    fn note(&mut self, v: VarId, changed: bool) -> bool {
        if changed {
            self.changed.push(v);
        }
        changed
    }

    fn set_min(&mut self, v: VarId, x: Value) -> Result<bool, Wipeout> {
        let c = self.doms[v.0].set_min(x)?;
        Ok(self.note(v, c))
    }

    fn set_max(&mut self, v: VarId, x: Value) -> Result<bool, Wipeout> {
        let c = self.doms[v.0].set_max(x)?;
        Ok(self.note(v, c))
    }

    fn assign(&mut self, v: VarId, x: Value) -> Result<bool, Wipeout> {
        let c = self.doms[v.0].assign(x)?;
        Ok(self.note(v, c))
    }

    fn remove(&mut self, v: VarId, x: Value) -> Result<bool, Wipeout> {
        let c = self.doms[v.0].remove(x)?;
        Ok(self.note(v, c))
    }

    fn remove_range(&mut self, v: VarId, a: Value, b: Value) -> Result<bool, Wipeout> {
        let c = self.doms[v.0].remove_range(a, b)?;
        Ok(self.note(v, c))
    }

    fn retain(&mut self, v: VarId, keep: impl FnMut(Value) -> bool) -> Result<bool, Wipeout> {
        let c = self.doms[v.0].retain(keep)?;
        Ok(self.note(v, c))
    }

    fn intersect(&mut self, v: VarId, other: &Domain) -> Result<bool, Wipeout> {
        let c = self.doms[v.0].intersect(other)?;
        Ok(self.note(v, c))
    }
}

fn clamp_i64(x: i128) -> Value {
    x.clamp(Value::MIN as i128, Value::MAX as i128) as Value
}

fn floor_div(a: i128, b: i128) -> i128 {
    let q = a / b;
    if (a % b != 0) && ((a < 0) != (b < 0)) {
        q - 1
    } else {
        q
    }
}

fn ceil_div(a: i128, b: i128) -> i128 {
    -floor_div(-a, b)
}

/// Bounds consistency for `sum(a * x) <= rhs`.
fn linear_le(store: &mut Store, terms: &[Term], rhs: i128) -> Result<bool, Wipeout> {
    let term_min = |s: &Store, a: Value, v: VarId| -> i128 {
        let d = s.dom(v);
        if a >= 0 {
            a as i128 * d.lo() as i128
        } else {
            a as i128 * d.hi() as i128
        }
    };
    let mut any = false;
    loop {
        let total: i128 = terms.iter().map(|&(a, v)| term_min(store, a, v)).sum();
        let slack = rhs - total;
        if slack < 0 {
            return Err(Wipeout);
        }
        let mut changed = false;
        for &(a, v) in terms {
            if a == 0 {
                continue;
            }
            let limit = slack + term_min(store, a, v);
            let a = a as i128;
            changed |= if a > 0 {
                store.set_max(v, clamp_i64(floor_div(limit, a)))?
            } else {
                store.set_min(v, clamp_i64(ceil_div(limit, a)))?
            };
        }
        if !changed {
            return Ok(any);
        }
        any = true;
    }
}

fn linear(store: &mut Store, terms: &[Term], op: Cmp, rhs: Value) -> Result<(), Wipeout> {
    let neg: Vec<Term>;
    match op {
        Cmp::Le => {
            linear_le(store, terms, rhs as i128)?;
        }
        Cmp::Ge => {
            neg = terms.iter().map(|&(a, v)| (-a, v)).collect();
            linear_le(store, &neg, -(rhs as i128))?;
        }
        Cmp::Eq => {
            neg = terms.iter().map(|&(a, v)| (-a, v)).collect();
            loop {
                let a = linear_le(store, terms, rhs as i128)?;
                let b = linear_le(store, &neg, -(rhs as i128))?;
                if !a && !b {
                    break;
                }
            }
        }
    }
    Ok(())
}

/// Value elimination for fixed variables plus Hall-interval reasoning on bounds.
fn all_different(store: &mut Store, vars: &[VarId]) -> Result<(), Wipeout> {
    loop {
        let mut changed = false;
        for (i, &v) in vars.iter().enumerate() {
            if let Some(val) = store.dom(v).value() {
                for (j, &w) in vars.iter().enumerate() {
                    if i != j {
                        if w == v {
                            return Err(Wipeout);
                        }
                        changed |= store.remove(w, val)?;
                    }
                }
            }
        }
        changed |= hall_intervals(store, vars)?;
        if !changed {
            return Ok(());
        }
    }
}

fn hall_intervals(store: &mut Store, vars: &[VarId]) -> Result<bool, Wipeout> {
    let bounds: Vec<(Value, Value)> = vars.iter().map(|&v| (store.dom(v).lo(), store.dom(v).hi())).collect();
    let mut los: Vec<Value> = bounds.iter().map(|b| b.0).collect();
    let mut his: Vec<Value> = bounds.iter().map(|b| b.1).collect();
    los.sort_unstable();
    los.dedup();
    his.sort_unstable();
    his.dedup();
    let mut changed = false;
    for &a in &los {
        for &b in his.iter().filter(|&&b| b >= a) {
            let inside = bounds.iter().filter(|&&(l, h)| l >= a && h <= b).count() as i128;
            let width = (b - a) as i128 + 1;
            if inside > width {
                return Err(Wipeout);
            }
            if inside == width {
                for (k, &v) in vars.iter().enumerate() {
                    let (l, h) = bounds[k];
                    if !(l >= a && h <= b) {
                        changed |= store.remove_range(v, a, b)?;
                    }
                }
            }
        }
    }
    Ok(changed)
}

/// Bounds reasoning for `z = |x - k1| + k2`.
fn abs_offset(store: &mut Store, z: VarId, x: VarId, k1: Value, k2: Value) -> Result<(), Wipeout> {
    loop {
        let mut changed = false;
        let (xl, xh) = (store.dom(x).lo(), store.dom(x).hi());
        let (dl, dh) = if xl >= k1 {
            (xl - k1, xh - k1)
        } else if xh <= k1 {
            (k1 - xh, k1 - xl)
        } else {
            (0, (k1 - xl).max(xh - k1))
        };
        changed |= store.set_min(z, dl + k2)?;
        changed |= store.set_max(z, dh + k2)?;

        let (zl, zh) = (store.dom(z).lo(), store.dom(z).hi());
        let dmax = zh - k2;
        if dmax < 0 {
            return Err(Wipeout);
        }
        changed |= store.set_min(x, k1 - dmax)?;
        changed |= store.set_max(x, k1 + dmax)?;
        let dmin = zl - k2;
        if dmin > 0 {
            changed |= store.remove_range(x, k1 - dmin + 1, k1 + dmin - 1)?;
        }
        if let Some(xv) = store.dom(x).value() {
            changed |= store.assign(z, (xv - k1).abs() + k2)?;
        }
        if !changed {
            return Ok(());
        }
    }
}

/// Bounds reasoning for `y = min(xs)`.
fn min_of(store: &mut Store, y: VarId, xs: &[VarId]) -> Result<(), Wipeout> {
    if xs.is_empty() {
        return Err(Wipeout);
    }
    loop {
        let mut changed = false;
        let lo = xs.iter().map(|&v| store.dom(v).lo()).min().unwrap();
        let hi = xs.iter().map(|&v| store.dom(v).hi()).min().unwrap();
        changed |= store.set_min(y, lo)?;
        changed |= store.set_max(y, hi)?;
        let (yl, yh) = (store.dom(y).lo(), store.dom(y).hi());
        for &v in xs {
            changed |= store.set_min(v, yl)?;
        }
        let mut candidates = xs.iter().filter(|&&v| store.dom(v).lo() <= yh);
        match (candidates.next(), candidates.next()) {
            (None, _) => return Err(Wipeout),
            (Some(&only), None) => {
                changed |= store.set_max(only, yh)?;
                let d = store.dom(only).clone();
                changed |= store.intersect(y, &d)?;
            }
            _ => {}
        }
        if !changed {
            return Ok(());
        }
    }
}

fn make_boolean(store: &mut Store, b: VarId) -> Result<(), Wipeout> {
    store.set_min(b, 0)?;
    store.set_max(b, 1)?;
    Ok(())
}

fn reif_eq_const(store: &mut Store, b: VarId, x: VarId, k: Value) -> Result<(), Wipeout> {
    make_boolean(store, b)?;
    match store.dom(b).value() {
        Some(1) => {
            store.assign(x, k)?;
        }
        Some(_) => {
            store.remove(x, k)?;
        }
        None => {
            if !store.dom(x).contains(k) {
                store.assign(b, 0)?;
            } else if store.dom(x).is_fixed() {
                store.assign(b, 1)?;
            }
        }
    }
    Ok(())
}

fn imply_eq_vars(store: &mut Store, b: VarId, x: VarId, y: VarId) -> Result<(), Wipeout> {
    make_boolean(store, b)?;
    match store.dom(b).value() {
        Some(1) => loop {
            let dy = store.dom(y).clone();
            let c1 = store.intersect(x, &dy)?;
            let dx = store.dom(x).clone();
            let c2 = store.intersect(y, &dx)?;
            if !c1 && !c2 {
                return Ok(());
            }
        },
        Some(_) => Ok(()),
        None => {
            if !store.dom(x).meets(store.dom(y)) {
                store.assign(b, 0)?;
            }
            Ok(())
        }
    }
}

/// Generalized arc consistency by scanning the tuple list.
fn table(store: &mut Store, vars: &[VarId], tuples: &[Vec<Value>]) -> Result<(), Wipeout> {
    let mut supports: Vec<Vec<Value>> = vec![Vec::new(); vars.len()];
    let mut any = false;
    for t in tuples {
        if vars.iter().zip(t).all(|(&v, &val)| store.dom(v).contains(val)) {
            any = true;
            for (s, &val) in supports.iter_mut().zip(t) {
                s.push(val);
            }
        }
    }
    if !any {
        return Err(Wipeout);
    }
    for (s, &v) in supports.iter_mut().zip(vars) {
        s.sort_unstable();
        s.dedup();
        if s.len() as u64 == store.dom(v).size() {
            continue;
        }
        let (lo, hi) = (s[0], s[s.len() - 1]);
        store.set_min(v, lo)?;
        store.set_max(v, hi)?;
        store.retain(v, |val| s.binary_search(&val).is_ok())?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn run(c: &Constraint, doms: &mut [Domain]) -> Result<(), Wipeout> {
        let mut changed = Vec::new();
        c.propagate(doms, &mut changed)
    }

    #[test]
    fn linear_bounds() {
        // x + y = 3, x in 0..=5, y in 2..=2
        let c = Constraint::Linear { terms: vec![(1, VarId(0)), (1, VarId(1))], op: Cmp::Eq, rhs: 3 };
        let mut doms = vec![Domain::range(0, 5), Domain::singleton(2)];
        run(&c, &mut doms).unwrap();
        assert_eq!(doms[0].value(), Some(1));
    }

    #[test]
    fn linear_negative_coefficients_round_correctly() {
        // -3x <= -7  ->  x >= 3 (ceil(7/3))
        let c = Constraint::Linear { terms: vec![(-3, VarId(0))], op: Cmp::Le, rhs: -7 };
        let mut doms = vec![Domain::range(-10, 10)];
        run(&c, &mut doms).unwrap();
        assert_eq!(doms[0].lo(), 3);
        // 2x >= -5 -> x >= -2
        let c = Constraint::Linear { terms: vec![(2, VarId(0))], op: Cmp::Ge, rhs: -5 };
        let mut doms = vec![Domain::range(-10, 10)];
        run(&c, &mut doms).unwrap();
        assert_eq!(doms[0].lo(), -2);
    }

    #[test]
    fn all_different_hall_interval() {
        let c = Constraint::AllDifferent(vec![VarId(0), VarId(1), VarId(2)]);
        let mut doms = vec![Domain::range(1, 2), Domain::range(1, 2), Domain::range(1, 3)];
        run(&c, &mut doms).unwrap();
        assert_eq!(doms[2].value(), Some(3));
        let mut doms = vec![Domain::singleton(1), Domain::singleton(1)];
        assert_eq!(run(&Constraint::AllDifferent(vec![VarId(0), VarId(1)]), &mut doms), Err(Wipeout));
    }

    #[test]
    fn abs_offset_excludes_middle() {
        // z = |x - 5| + 1 with z >= 3 -> x not in 4..=6
        let c = Constraint::AbsOffset { z: VarId(0), x: VarId(1), k1: 5, k2: 1 };
        let mut doms = vec![Domain::range(3, 100), Domain::range(0, 10)];
        run(&c, &mut doms).unwrap();
        assert_eq!(doms[1].values(), vec![0, 1, 2, 3, 7, 8, 9, 10]);
        assert_eq!((doms[0].lo(), doms[0].hi()), (3, 6));
    }

    #[test]
    fn min_of_single_candidate() {
        // y = min(a, b), a in 5..=9, b in 1..=9, y <= 3 -> b <= 3
        let c = Constraint::MinOf { y: VarId(0), xs: vec![VarId(1), VarId(2)] };
        let mut doms = vec![Domain::range(0, 3), Domain::range(5, 9), Domain::range(1, 9)];
        run(&c, &mut doms).unwrap();
        assert_eq!((doms[2].lo(), doms[2].hi()), (1, 3));
        assert_eq!((doms[0].lo(), doms[0].hi()), (1, 3));
    }

    #[test]
    fn reif_and_imply() {
        let c = Constraint::ReifEqConst { b: VarId(0), x: VarId(1), k: 4 };
        let mut doms = vec![Domain::range(0, 1), Domain::from_values([1, 2, 5]).unwrap()];
        run(&c, &mut doms).unwrap();
        assert_eq!(doms[0].value(), Some(0));

        let c = Constraint::ImplyEqVars { b: VarId(0), x: VarId(1), y: VarId(2) };
        let mut doms = vec![Domain::range(0, 1), Domain::range(1, 3), Domain::range(5, 6)];
        run(&c, &mut doms).unwrap();
        assert_eq!(doms[0].value(), Some(0));
        let mut doms = vec![Domain::singleton(1), Domain::range(1, 5), Domain::range(4, 9)];
        run(&c, &mut doms).unwrap();
        assert_eq!(doms[1].values(), vec![4, 5]);
        assert_eq!(doms[2].values(), vec![4, 5]);
    }

    #[test]
    fn table_supports() {
        let c = Constraint::Table { vars: vec![VarId(0), VarId(1)], tuples: vec![vec![1, 2], vec![3, 4], vec![5, 9]] };
        let mut doms = vec![Domain::range(1, 4), Domain::range(0, 9)];
        run(&c, &mut doms).unwrap();
        assert_eq!(doms[0].values(), vec![1, 3]);
        assert_eq!(doms[1].values(), vec![2, 4]);
    }
}

//! Textual game files. The grammar is documented in `docs/game-format.md`;
//! [`serialize_game`] writes files that [`parse_game`] reads back.

use std::collections::HashMap;
use std::fmt::Write as _;

use crate::csp::{Cmp, Constraint, Direction, Domain, OptGoal, VarId};
use crate::error::ParseError;
use crate::game::{DeviationScope, Game, GameBuilder, Owner, PlayerId};
use crate::Value;

#[derive(Debug, Clone, PartialEq, Eq)]
enum Tok {
    Ident(String),
    Int(Value),
    Str(String),
    Sym(&'static str),
}

#[derive(Debug, Clone)]
struct Token {
    tok: Tok,
    line: usize,
    column: usize,
}

// longest first so that `<->` wins over `<=` and `..` over `.`
const SYMBOLS: [&str; 16] = ["<->", "..", "<=", ">=", "->", ";", ":", ",", "(", ")", "{", "}", "=", "|", "+", "-"];

fn lex(src: &str) -> Result<Vec<Token>, ParseError> {
    let mut out = Vec::new();
    for (ln, line) in src.lines().enumerate() {
        let chars: Vec<char> = line.chars().collect();
        let mut i = 0;
        while i < chars.len() {
            let c = chars[i];
            let (line, column) = (ln + 1, i + 1);
            let err = |m: String| ParseError { line, column, message: m };
            if c == '#' {
                break;
            }
            if c.is_whitespace() {
                i += 1;
                continue;
            }
            let tok = if c.is_ascii_alphabetic() || c == '_' {
                let start = i;
                while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_') {
                    i += 1;
                }
                Tok::Ident(chars[start..i].iter().collect())
            } else if c.is_ascii_digit() {
                let start = i;
                while i < chars.len() && chars[i].is_ascii_digit() {
                    i += 1;
                }
                let text: String = chars[start..i].iter().collect();
                Tok::Int(text.parse().map_err(|_| err(format!("integer `{text}` out of range")))?)
            } else if c == '"' {
                i += 1;
                let mut s = String::new();
                loop {
                    match chars.get(i) {
                        None => return Err(err("unterminated string".into())),
                        Some('"') => break,
                        Some('\\') => {
                            s.push(*chars.get(i + 1).ok_or_else(|| err("unterminated string".into()))?);
                            i += 2;
                        }
                        Some(&ch) => {
                            s.push(ch);
                            i += 1;
                        }
                    }
                }
                i += 1;
                Tok::Str(s)
            } else if c == '*' {
                i += 1;
                Tok::Sym("*")
            } else {
                let rest: String = chars[i..].iter().take(3).collect();
                let sym = SYMBOLS
                    .iter()
                    .find(|s| rest.starts_with(**s))
                    .ok_or_else(|| err(format!("unexpected character `{c}`")))?;
                i += sym.len();
                Tok::Sym(sym)
            };
            out.push(Token { tok, line, column });
        }
    }
    Ok(out)
}

struct Parser {
    toks: Vec<Token>,
    pos: usize,
    b: GameBuilder,
    names: HashMap<String, VarId>,
    domains: Vec<Domain>,
    players: HashMap<String, PlayerId>,
    title_seen: bool,
}

type PResult<T> = Result<T, ParseError>;

/// Terms moved to the left, the operator, and the constant on the right.
type Relation = (Vec<(Value, VarId)>, Cmp, Value);

impl Parser {
    fn err_at(&self, pos: usize, message: impl Into<String>) -> ParseError {
        let (line, column) = match self.toks.get(pos).or(self.toks.last()) {
            Some(t) => (t.line, t.column),
            None => (1, 1),
        };
        ParseError { line, column, message: message.into() }
    }

    fn err(&self, message: impl Into<String>) -> ParseError {
        self.err_at(self.pos, message)
    }

    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|t| &t.tok)
    }

    fn next(&mut self) -> PResult<Tok> {
        let t = self.toks.get(self.pos).map(|t| t.tok.clone()).ok_or_else(|| self.err("unexpected end of file"))?;
        self.pos += 1;
        Ok(t)
    }

    fn eat(&mut self, sym: &str) -> bool {
        if matches!(self.peek(), Some(Tok::Sym(s)) if *s == sym) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expect(&mut self, sym: &str) -> PResult<()> {
        if self.eat(sym) {
            Ok(())
        } else {
            Err(self.err(format!("expected `{sym}`")))
        }
    }

    fn ident(&mut self) -> PResult<String> {
        match self.next()? {
            Tok::Ident(s) => Ok(s),
            _ => Err(self.err_at(self.pos - 1, "expected a name")),
        }
    }

    fn keyword(&mut self, kw: &str) -> PResult<()> {
        match self.next()? {
            Tok::Ident(s) if s == kw => Ok(()),
            _ => Err(self.err_at(self.pos - 1, format!("expected `{kw}`"))),
        }
    }

    fn int(&mut self) -> PResult<Value> {
        let neg = self.eat("-");
        match self.next()? {
            Tok::Int(v) => Ok(if neg { -v } else { v }),
            _ => Err(self.err_at(self.pos - 1, "expected an integer")),
        }
    }

    fn var(&mut self) -> PResult<VarId> {
        let at = self.pos;
        let name = self.ident()?;
        self.names.get(&name).copied().ok_or_else(|| self.err_at(at, format!("unknown variable `{name}`")))
    }

    fn player_ref(&mut self) -> PResult<PlayerId> {
        let at = self.pos;
        let name = self.ident()?;
        self.players.get(&name).copied().ok_or_else(|| self.err_at(at, format!("unknown player `{name}`")))
    }

    fn domain(&mut self) -> PResult<Domain> {
        let at = self.pos;
        if self.eat("{") {
            let mut vals = vec![self.int()?];
            while self.eat(",") {
                vals.push(self.int()?);
            }
            self.expect("}")?;
            return Domain::from_values(vals).ok_or_else(|| self.err_at(at, "empty domain"));
        }
        let lo = self.int()?;
        self.expect("..")?;
        let hi = self.int()?;
        if lo > hi {
            return Err(self.err_at(at, "empty domain"));
        }
        if (hi as i128 - lo as i128) >= crate::csp::MAX_SPAN as i128 {
            return Err(self.err_at(at, "domain too large"));
        }
        Ok(Domain::range(lo, hi))
    }

    fn declare(&mut self, at: usize, name: &str, dom: Domain, owner: Option<PlayerId>) -> PResult<VarId> {
        if self.names.contains_key(name) || self.players.contains_key(name) {
            return Err(self.err_at(at, format!("duplicate name `{name}`")));
        }
        let v = match owner {
            Some(p) => self.b.controlled(p, name, dom.clone()),
            None => self.b.existential(name, dom.clone()),
        };
        self.names.insert(name.to_string(), v);
        self.domains.push(dom);
        Ok(v)
    }

    /// `[-] [int *] name | [-] int`, joined by `+` and `-`.
    fn linear_expr(&mut self) -> PResult<(Vec<(Value, VarId)>, Value)> {
        let mut terms = Vec::new();
        let mut constant = 0;
        let mut sign = if self.eat("-") { -1 } else { 1 };
        loop {
            match self.peek() {
                Some(Tok::Int(_)) => {
                    let k = self.int()?;
                    if self.eat("*") {
                        terms.push((sign * k, self.var()?));
                    } else {
                        constant += sign * k;
                    }
                }
                Some(Tok::Ident(_)) => terms.push((sign, self.var()?)),
                _ => return Err(self.err("expected a term")),
            }
            if self.eat("+") {
                sign = 1;
            } else if self.eat("-") {
                sign = -1;
            } else {
                break;
            }
        }
        Ok((terms, constant))
    }

    fn cmp(&mut self) -> PResult<Cmp> {
        match self.next()? {
            Tok::Sym("=") => Ok(Cmp::Eq),
            Tok::Sym("<=") => Ok(Cmp::Le),
            Tok::Sym(">=") => Ok(Cmp::Ge),
            _ => Err(self.err_at(self.pos - 1, "expected `=`, `<=` or `>=`")),
        }
    }

    fn relation(&mut self) -> PResult<Relation> {
        let (mut l, lc) = self.linear_expr()?;
        let op = self.cmp()?;
        let (r, rc) = self.linear_expr()?;
        l.extend(r.into_iter().map(|(a, v)| (-a, v)));
        // merge repeated variables, keep first-seen order
        let mut merged: Vec<(Value, VarId)> = Vec::new();
        for (a, v) in l {
            match merged.iter_mut().find(|(_, w)| *w == v) {
                Some(t) => t.0 += a,
                None => merged.push((a, v)),
            }
        }
        merged.retain(|t| t.0 != 0);
        Ok((merged, op, rc - lc))
    }

    fn var_list(&mut self) -> PResult<Vec<VarId>> {
        self.expect("(")?;
        let mut vs = vec![self.var()?];
        while self.eat(",") {
            vs.push(self.var()?);
        }
        self.expect(")")?;
        Ok(vs)
    }

    fn constraint(&mut self) -> PResult<Constraint> {
        let at = self.pos;
        let kind = self.ident()?;
        let c = match kind.as_str() {
            "linear" => {
                let (terms, op, rhs) = self.relation()?;
                Constraint::Linear { terms, op, rhs }
            }
            "boolsum" => {
                let (terms, op, rhs) = self.relation()?;
                Constraint::WeightedBoolSum { terms, op, rhs }
            }
            "alldifferent" => Constraint::AllDifferent(self.var_list()?),
            "absoffset" => {
                // z = |x - k1| + k2
                let z = self.var()?;
                self.expect("=")?;
                self.expect("|")?;
                let x = self.var()?;
                let k1 = if self.eat("-") {
                    self.int()?
                } else if self.eat("+") {
                    -self.int()?
                } else {
                    0
                };
                self.expect("|")?;
                let k2 = if self.eat("+") {
                    self.int()?
                } else if self.eat("-") {
                    -self.int()?
                } else {
                    0
                };
                Constraint::AbsOffset { z, x, k1, k2 }
            }
            "minof" => {
                let y = self.var()?;
                self.expect("=")?;
                self.keyword("min")?;
                Constraint::MinOf { y, xs: self.var_list()? }
            }
            "reif" => {
                let b = self.var()?;
                self.expect("<->")?;
                let x = self.var()?;
                self.expect("=")?;
                Constraint::ReifEqConst { b, x, k: self.int()? }
            }
            "imply" => {
                let b = self.var()?;
                self.expect("->")?;
                let x = self.var()?;
                self.expect("=")?;
                Constraint::ImplyEqVars { b, x, y: self.var()? }
            }
            "table" => {
                let vars = self.var_list()?;
                self.expect("{")?;
                let mut tuples = Vec::new();
                while !self.eat("}") {
                    let tat = self.pos;
                    self.expect("(")?;
                    let mut t = vec![self.int()?];
                    while self.eat(",") {
                        t.push(self.int()?);
                    }
                    self.expect(")")?;
                    if t.len() != vars.len() {
                        return Err(self.err_at(tat, format!("tuple has {} values, expected {}", t.len(), vars.len())));
                    }
                    tuples.push(t);
                }
                Constraint::Table { vars, tuples }
            }
            other => return Err(self.err_at(at, format!("unknown constraint kind `{other}`"))),
        };
        for v in c.boolean_vars() {
            let d = &self.domains[v.0];
            if d.lo() < 0 || d.hi() > 1 {
                return Err(self.err_at(at, format!("`{kind}` needs boolean variables")));
            }
        }
        Ok(c)
    }

    fn statement(&mut self) -> PResult<()> {
        let at = self.pos;
        let kw = self.ident()?;
        match kw.as_str() {
            "game" => {
                if self.title_seen {
                    return Err(self.err_at(at, "duplicate `game` statement"));
                }
                self.title_seen = true;
                match self.next()? {
                    Tok::Str(s) => {
                        self.b = GameBuilder::new(s);
                    }
                    _ => return Err(self.err_at(self.pos - 1, "expected a quoted title")),
                }
                if !self.names.is_empty() || !self.players.is_empty() {
                    return Err(self.err_at(at, "`game` must come first"));
                }
            }
            "deviations" => {
                let scope = match self.ident()?.as_str() {
                    "with" => {
                        self.expect("-")?;
                        self.keyword("hard")?;
                        DeviationScope::WithHard
                    }
                    "goal" => {
                        self.expect("-")?;
                        self.keyword("only")?;
                        DeviationScope::GoalOnly
                    }
                    _ => return Err(self.err_at(self.pos - 1, "expected `with-hard` or `goal-only`")),
                };
                self.b.deviation_scope(scope);
            }
            "player" => {
                let pat = self.pos;
                let name = self.ident()?;
                if self.players.contains_key(&name) || self.names.contains_key(&name) {
                    return Err(self.err_at(pat, format!("duplicate name `{name}`")));
                }
                let p = self.b.player(&name);
                self.players.insert(name, p);
                self.keyword("controls")?;
                loop {
                    let vat = self.pos;
                    let v = self.ident()?;
                    self.keyword("in")?;
                    let d = self.domain()?;
                    self.declare(vat, &v, d, Some(p))?;
                    if !self.eat(",") {
                        break;
                    }
                }
            }
            "exists" => loop {
                let vat = self.pos;
                let v = self.ident()?;
                self.keyword("in")?;
                let d = self.domain()?;
                self.declare(vat, &v, d, None)?;
                if !self.eat(",") {
                    break;
                }
            },
            "goal" => {
                let p = self.player_ref()?;
                self.expect(":")?;
                let c = self.constraint()?;
                self.b.goal(p, c);
            }
            "hard" => {
                self.expect(":")?;
                let c = self.constraint()?;
                self.b.hard(c);
            }
            "maximize" | "minimize" => {
                let p = self.player_ref()?;
                self.expect(":")?;
                let v = self.var()?;
                self.b.optimize(p, if kw == "maximize" { OptGoal::max(v) } else { OptGoal::min(v) });
            }
            other => return Err(self.err_at(at, format!("unknown statement `{other}`"))),
        }
        self.expect(";")
    }
}

/// Reads a game file. Names must be declared before use.
pub fn parse_game(src: &str) -> Result<Game, ParseError> {
    let toks = lex(src)?;
    let mut p = Parser {
        toks,
        pos: 0,
        b: GameBuilder::new("untitled"),
        names: HashMap::new(),
        domains: Vec::new(),
        players: HashMap::new(),
        title_seen: false,
    };
    while p.pos < p.toks.len() {
        p.statement()?;
    }
    let end = p.toks.last().map_or((1, 1), |t| (t.line, t.column));
    p.b.build().map_err(|e| ParseError { line: end.0, column: end.1, message: e.to_string() })
}

fn write_domain(out: &mut String, d: &Domain) {
    if d.is_interval() {
        write!(out, "{}..{}", d.lo(), d.hi()).unwrap();
    } else {
        let vals: Vec<String> = d.iter().map(|v| v.to_string()).collect();
        write!(out, "{{{}}}", vals.join(", ")).unwrap();
    }
}

fn write_terms(out: &mut String, g: &Game, terms: &[(Value, VarId)]) {
    if terms.is_empty() {
        out.push('0');
    }
    for (k, &(a, v)) in terms.iter().enumerate() {
        let name = g.var_name(v);
        match (k, a < 0) {
            (0, false) => write!(out, "{a}*{name}").unwrap(),
            (0, true) => write!(out, "-{}*{name}", -a).unwrap(),
            (_, false) => write!(out, " + {a}*{name}").unwrap(),
            (_, true) => write!(out, " - {}*{name}", -a).unwrap(),
        }
    }
}

fn write_constraint(out: &mut String, g: &Game, c: &Constraint) {
    let n = |v: &VarId| g.var_name(*v).to_string();
    let list = |vs: &[VarId]| vs.iter().map(n).collect::<Vec<_>>().join(", ");
    match c {
        Constraint::Linear { terms, op, rhs } | Constraint::WeightedBoolSum { terms, op, rhs } => {
            out.push_str(if matches!(c, Constraint::Linear { .. }) { "linear " } else { "boolsum " });
            write_terms(out, g, terms);
            write!(out, " {} {rhs}", op.symbol()).unwrap();
        }
        Constraint::AllDifferent(vs) => write!(out, "alldifferent({})", list(vs)).unwrap(),
        Constraint::AbsOffset { z, x, k1, k2 } => {
            write!(out, "absoffset {} = |{} - {k1}| + {k2}", n(z), n(x)).unwrap();
        }
        Constraint::MinOf { y, xs } => write!(out, "minof {} = min({})", n(y), list(xs)).unwrap(),
        Constraint::ReifEqConst { b, x, k } => write!(out, "reif {} <-> {} = {k}", n(b), n(x)).unwrap(),
        Constraint::ImplyEqVars { b, x, y } => write!(out, "imply {} -> {} = {}", n(b), n(x), n(y)).unwrap(),
        Constraint::Table { vars, tuples } => {
            write!(out, "table ({}) {{", list(vars)).unwrap();
            for t in tuples {
                let vals: Vec<String> = t.iter().map(|v| v.to_string()).collect();
                write!(out, " ({})", vals.join(", ")).unwrap();
            }
            out.push_str(" }");
        }
    }
}

/// Writes `game` in the textual format. Negative constants are written as
/// `- -k` in absolute offsets; the parser accepts that form.
pub fn serialize_game(game: &Game) -> String {
    let mut out = String::new();
    writeln!(out, "game \"{}\";", game.title().replace('\\', "\\\\").replace('"', "\\\"")).unwrap();
    if game.scope() == DeviationScope::GoalOnly {
        out.push_str("deviations goal-only;\n");
    }
    for p in game.players() {
        write!(out, "player {} controls ", p.name).unwrap();
        for (k, v) in p.vars.iter().enumerate() {
            if k > 0 {
                out.push_str(", ");
            }
            write!(out, "{} in ", game.var_name(*v)).unwrap();
            write_domain(&mut out, &game.vars()[v.0].domain);
        }
        out.push_str(";\n");
    }
    for decl in game.vars().iter().filter(|d| d.owner == Owner::Existential) {
        write!(out, "exists {} in ", decl.name).unwrap();
        write_domain(&mut out, &decl.domain);
        out.push_str(";\n");
    }
    for c in game.hard() {
        out.push_str("hard : ");
        write_constraint(&mut out, game, c);
        out.push_str(";\n");
    }
    for p in game.players() {
        for c in &p.goal {
            write!(out, "goal {} : ", p.name).unwrap();
            write_constraint(&mut out, game, c);
            out.push_str(";\n");
        }
        if let Some(opt) = p.opt {
            let kw = match opt.direction {
                Direction::Max => "maximize",
                Direction::Min => "minimize",
            };
            writeln!(out, "{kw} {} : {};", p.name, game.var_name(opt.objective)).unwrap();
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::game::StrategyProfile;

    const WORKED: &str = r#"
game "matrix";
player X controls x in 1..3;
player Y controls y in 1..3;
# payoff 1 cells for each player
goal X : table (x, y) { (1,2) (1,3) (2,3) (3,1) (3,2) };
goal Y : table (x, y) { (1,1) (2,1) (3,2) };
"#;

    #[test]
    fn parses_matrix_game() {
        let g = parse_game(WORKED).unwrap();
        assert_eq!(g.title(), "matrix");
        assert!(g.is_nash(&StrategyProfile(vec![3, 2])));
        assert!(!g.is_nash(&StrategyProfile(vec![1, 1])));
    }

    #[test]
    fn every_constraint_kind_round_trips() {
        let src = r#"
game "kinds";
deviations goal-only;
player A controls a in -2..3, a2 in {1, 4, 6};
player B controls b in 0..1;
exists z in 0..9, m in -5..5, r in 0..1;
hard : alldifferent(a, a2);
goal A : linear 2*a - 3*a2 + 1 <= b + 4;
goal A : absoffset z = |a - -1| + 2;
goal A : minof m = min(a, a2);
maximize A : z;
goal B : reif r <-> a = 3;
goal B : imply b -> b = r;
goal B : boolsum 2*b + 1*r >= 1;
minimize B : b;
"#;
        let g = parse_game(src).unwrap();
        let text = serialize_game(&g);
        let again = parse_game(&text).unwrap();
        assert_eq!(serialize_game(&again), text);
        assert_eq!(format!("{:?}", again), format!("{:?}", g));
    }

    #[test]
    fn errors_carry_positions() {
        let e = parse_game("game \"t\";\nplayer P controls x in 1..2;\ngoal P : linear y <= 1;\n").unwrap_err();
        assert_eq!((e.line, e.column), (3, 17));
        assert!(e.message.contains("unknown variable"));

        let e = parse_game("player P controls x in 1..2;\nplayer Q controls x in 1..2;\n").unwrap_err();
        assert_eq!(e.line, 2);
        assert!(e.message.contains("duplicate"));

        let e = parse_game("player P controls x in 3..2;").unwrap_err();
        assert!(e.message.contains("empty domain"));

        let e = parse_game("player P controls x in 1..2;\ngoal P : table (x) { (1, 2) };").unwrap_err();
        assert!(e.message.contains("tuple has 2 values"));

        let e = parse_game("player P controls x in 1..2\n").unwrap_err();
        assert!(e.message.contains("end of file") || e.message.contains("`;`"));

        assert!(parse_game("").unwrap_err().message.contains("player"));
    }

    #[test]
    fn non_boolean_reif_rejected() {
        let e = parse_game("player P controls x in 1..3, b in 0..2;\ngoal P : reif b <-> x = 1;").unwrap_err();
        assert!(e.message.contains("boolean"));
    }
}

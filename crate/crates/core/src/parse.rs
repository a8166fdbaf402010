//! The `.kmod` model format and the property syntax.
//!
//! A `.kmod` file is line oriented; `#` starts a comment:
//!
//! ```text
//! var state : stop | go
//! var color : red | green | yellow
//! state s1 : state=stop, color=red
//! init s1
//! trans s1 -> s2
//! label s1 : halted
//! ```
//!
//! Every state assigns every declared variable; `_` stands for ⊥.
//! Declarations may appear in any order.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::{self, Write};

use thiserror::Error;

use crate::model::{KripkeModel, State, StateId, Value, VariableDecl, UNDEFINED_TOKEN};
use crate::predicate::{Predicate, Property};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("{line}:{column}: {message}")]
pub struct ParseError {
    pub line: usize,
    pub column: usize,
    pub message: String,
}

impl ParseError {
    fn new(line: usize, column: usize, message: impl Into<String>) -> Self {
        ParseError {
            line,
            column,
            message: message.into(),
        }
    }
}

fn is_ident_char(c: char) -> bool {
    c.is_ascii_alphanumeric() || c == '_'
}

/// Cursor over one line, tracking 1-based columns.
struct Line<'a> {
    text: &'a str,
    pos: usize,
    line: usize,
}

impl<'a> Line<'a> {
    fn new(text: &'a str, line: usize) -> Self {
        Line { text, pos: 0, line }
    }

    fn column(&self) -> usize {
        self.text[..self.pos].chars().count() + 1
    }

    fn err(&self, message: impl Into<String>) -> ParseError {
        ParseError::new(self.line, self.column(), message)
    }

    fn skip_ws(&mut self) {
        let rest = &self.text[self.pos..];
        self.pos += rest.len() - rest.trim_start().len();
    }

    fn at_end(&mut self) -> bool {
        self.skip_ws();
        self.pos == self.text.len()
    }

    fn peek(&mut self) -> Option<char> {
        self.skip_ws();
        self.text[self.pos..].chars().next()
    }

    fn eat(&mut self, token: &str) -> bool {
        self.skip_ws();
        if self.text[self.pos..].starts_with(token) {
            self.pos += token.len();
            true
        } else {
            false
        }
    }

    fn expect(&mut self, token: &str) -> Result<(), ParseError> {
        if self.eat(token) {
            Ok(())
        } else {
            Err(self.err(format!("expected '{token}'")))
        }
    }

    /// Returns the identifier and its column.
    fn ident(&mut self, what: &str) -> Result<(&'a str, usize), ParseError> {
        self.skip_ws();
        let col = self.column();
        let rest = &self.text[self.pos..];
        let len = rest.find(|c: char| !is_ident_char(c)).unwrap_or(rest.len());
        if len == 0 {
            return Err(self.err(format!("expected {what}")));
        }
        self.pos += len;
        Ok((&rest[..len], col))
    }

    fn finish(&mut self) -> Result<(), ParseError> {
        if self.at_end() {
            Ok(())
        } else {
            Err(self.err("unexpected trailing input"))
        }
    }
}

type Spanned<T> = (T, usize, usize);
// `name=value` with both sides located
type Binding<'a> = (Spanned<&'a str>, Spanned<&'a str>);

#[derive(Default)]
struct RawModel<'a> {
    vars: Vec<(Spanned<&'a str>, Vec<Spanned<&'a str>>)>,
    states: Vec<(Spanned<&'a str>, Vec<Binding<'a>>)>,
    inits: Vec<Spanned<&'a str>>,
    trans: Vec<(Spanned<&'a str>, Spanned<&'a str>)>,
    labels: Vec<(Spanned<&'a str>, Vec<&'a str>)>,
}

/// Parses a `.kmod` document. The result always passes
/// [`KripkeModel::validate`].
pub fn parse_model(text: &str) -> Result<KripkeModel, ParseError> {
    let raw = parse_lines(text)?;
    build_model(raw)
}

fn parse_lines(text: &str) -> Result<RawModel<'_>, ParseError> {
    let mut raw = RawModel::default();
    for (n, full) in text.lines().enumerate() {
        let lineno = n + 1;
        let body = full.split('#').next().unwrap_or("").trim_end_matches('\r');
        let mut l = Line::new(body, lineno);
        if l.at_end() {
            continue;
        }
        let (kw, _) = l.ident("a declaration")?;
        match kw {
            "var" => {
                let (name, c) = l.ident("variable name")?;
                l.expect(":")?;
                let mut domain = Vec::new();
                loop {
                    let (v, vc) = l.ident("domain value")?;
                    domain.push((v, lineno, vc));
                    if !l.eat("|") {
                        break;
                    }
                }
                l.finish()?;
                raw.vars.push(((name, lineno, c), domain));
            }
            "state" => {
                let (id, c) = l.ident("state id")?;
                l.expect(":")?;
                let mut assignment = Vec::new();
                if !l.at_end() {
                    loop {
                        let (var, vc) = l.ident("variable name")?;
                        l.expect("=")?;
                        let (val, valc) = l.ident("value")?;
                        assignment.push(((var, lineno, vc), (val, lineno, valc)));
                        if !l.eat(",") {
                            break;
                        }
                    }
                }
                l.finish()?;
                raw.states.push(((id, lineno, c), assignment));
            }
            "init" => {
                let (id, c) = l.ident("state id")?;
                l.finish()?;
                raw.inits.push((id, lineno, c));
            }
            "trans" => {
                let (from, fc) = l.ident("state id")?;
                l.expect("->")?;
                let (to, tc) = l.ident("state id")?;
                l.finish()?;
                raw.trans.push(((from, lineno, fc), (to, lineno, tc)));
            }
            "label" => {
                let (id, c) = l.ident("state id")?;
                l.expect(":")?;
                let mut props = Vec::new();
                if !l.at_end() {
                    loop {
                        props.push(l.ident("proposition")?.0);
                        if !l.eat(",") {
                            break;
                        }
                    }
                }
                l.finish()?;
                raw.labels.push(((id, lineno, c), props));
            }
            other => {
                return Err(ParseError::new(lineno, 1 + body.len() - body.trim_start().len(), format!("unknown declaration '{other}'")));
            }
        }
    }
    Ok(raw)
}

fn build_model(raw: RawModel<'_>) -> Result<KripkeModel, ParseError> {
    if raw.vars.is_empty() {
        let (line, column) = raw
            .states
            .first()
            .map(|((_, l, c), _)| (*l, *c))
            .unwrap_or((1, 1));
        return Err(ParseError::new(line, column, "no variables declared"));
    }
    let mut variables: Vec<VariableDecl> = Vec::new();
    for ((name, l, c), domain) in &raw.vars {
        if variables.iter().any(|v| v.name == *name) {
            return Err(ParseError::new(*l, *c, format!("duplicate variable {name}")));
        }
        let mut values: Vec<String> = Vec::new();
        for (v, vl, vc) in domain {
            if *v == UNDEFINED_TOKEN {
                return Err(ParseError::new(*vl, *vc, format!("'{UNDEFINED_TOKEN}' is reserved for the undefined value")));
            }
            if values.iter().any(|x| x == v) {
                return Err(ParseError::new(*vl, *vc, format!("duplicate value {v} in domain of {name}")));
            }
            values.push((*v).to_owned());
        }
        variables.push(VariableDecl::new(*name, values));
    }

    let mut states = Vec::new();
    let mut ids = BTreeSet::new();
    for ((id, l, c), assignment) in &raw.states {
        if !ids.insert(*id) {
            return Err(ParseError::new(*l, *c, format!("duplicate state {id}")));
        }
        let mut values: Vec<Option<Value>> = vec![None; variables.len()];
        for ((var, vl, vc), (val, al, ac)) in assignment {
            let k = variables
                .iter()
                .position(|d| d.name == *var)
                .ok_or_else(|| ParseError::new(*vl, *vc, format!("unknown variable {var}")))?;
            if values[k].is_some() {
                return Err(ParseError::new(*vl, *vc, format!("variable {var} assigned twice")));
            }
            let v = variables[k]
                .value_of(val)
                .ok_or_else(|| ParseError::new(*al, *ac, format!("value {val} not in domain of {var}")))?;
            values[k] = Some(v);
        }
        let mut full = Vec::with_capacity(values.len());
        for (k, v) in values.into_iter().enumerate() {
            match v {
                Some(v) => full.push(v),
                None => {
                    return Err(ParseError::new(*l, *c, format!("state {id} does not assign {}", variables[k].name)));
                }
            }
        }
        states.push(State::new(*id, full));
    }

    let known = |(id, l, c): &Spanned<&str>| -> Result<StateId, ParseError> {
        if ids.contains(id) {
            Ok(StateId::from(*id))
        } else {
            Err(ParseError::new(*l, *c, format!("unknown state {id}")))
        }
    };

    // Report reference errors in source order.
    let mut refs: Vec<&Spanned<&str>> = raw
        .inits
        .iter()
        .chain(raw.trans.iter().flat_map(|(a, b)| [a, b]))
        .chain(raw.labels.iter().map(|(s, _)| s))
        .collect();
    refs.sort_by_key(|(_, l, c)| (*l, *c));
    for r in refs {
        known(r)?;
    }

    let initial = raw.inits.iter().map(|(id, _, _)| StateId::from(*id)).collect();
    let transitions = raw
        .trans
        .iter()
        .map(|((a, _, _), (b, _, _))| (StateId::from(*a), StateId::from(*b)))
        .collect();
    let mut labels: BTreeMap<StateId, BTreeSet<String>> = BTreeMap::new();
    for ((id, _, _), props) in &raw.labels {
        labels
            .entry(StateId::from(*id))
            .or_default()
            .extend(props.iter().map(|p| (*p).to_owned()));
    }
    Ok(KripkeModel::new(variables, states, initial, transitions, labels))
}

/// Pretty-prints a model in `.kmod` syntax.
pub fn render_model(model: &KripkeModel) -> String {
    let mut out = String::new();
    for v in model.variables() {
        let _ = writeln!(out, "var {} : {}", v.name, v.domain.join(" | "));
    }
    for (i, s) in model.states().iter().enumerate() {
        let _ = writeln!(out, "state {} : {}", s.id, model.render_assignment(i));
    }
    for id in model.initial() {
        let _ = writeln!(out, "init {id}");
    }
    for (a, b) in model.transitions() {
        let _ = writeln!(out, "trans {a} -> {b}");
    }
    for (id, props) in model.labels() {
        let props: Vec<&str> = props.iter().map(String::as_str).collect();
        let _ = writeln!(out, "label {id} : {}", props.join(", "));
    }
    out
}

/// Temporal operators that are recognised but not supported.
const OTHER_OPERATORS: &[&str] = &["A", "E", "F", "G", "X", "U", "AF", "AX", "EF", "EG", "EX", "FG", "GG", "AU", "EU", "AR", "ER"];

/// Parses `AG <pred>` or `GF <pred>`.
pub fn parse_property(text: &str) -> Result<Property, ParseError> {
    let text = text.trim_end_matches(['\r', '\n']);
    let mut l = Line::new(text, 1);
    if l.at_end() {
        return Err(l.err("empty property"));
    }
    let start = l.pos;
    let (op, col) = l.ident("temporal operator")?;
    let build: fn(Predicate) -> Property = match op {
        "AG" => Property::Globally,
        "GF" => Property::InfinitelyOften,
        _ if OTHER_OPERATORS.contains(&op) => {
            return Err(ParseError::new(1, col, "unsupported temporal operator"));
        }
        _ => {
            l.pos = start;
            return Err(l.err("expected temporal operator AG or GF"));
        }
    };
    let p = parse_or(&mut l)?;
    l.finish()?;
    Ok(build(p))
}

/// Parses a bare predicate (no temporal operator).
pub fn parse_predicate(text: &str) -> Result<Predicate, ParseError> {
    let mut l = Line::new(text.trim_end_matches(['\r', '\n']), 1);
    let p = parse_or(&mut l)?;
    l.finish()?;
    Ok(p)
}

fn parse_or(l: &mut Line<'_>) -> Result<Predicate, ParseError> {
    let mut lhs = parse_and(l)?;
    while l.eat("|") {
        lhs = lhs.or(parse_and(l)?);
    }
    Ok(lhs)
}

fn parse_and(l: &mut Line<'_>) -> Result<Predicate, ParseError> {
    let mut lhs = parse_unary(l)?;
    while l.eat("&") {
        lhs = lhs.and(parse_unary(l)?);
    }
    Ok(lhs)
}

fn parse_unary(l: &mut Line<'_>) -> Result<Predicate, ParseError> {
    match l.peek() {
        Some('!') => {
            l.eat("!");
            Ok(parse_unary(l)?.not())
        }
        Some('(') => {
            l.eat("(");
            let p = parse_or(l)?;
            l.expect(")")?;
            Ok(p)
        }
        _ => {
            let (name, _) = l.ident("atom")?;
            if l.eat("=") {
                let (value, _) = l.ident("value")?;
                if value == UNDEFINED_TOKEN {
                    Ok(Predicate::undefined(name))
                } else {
                    Ok(Predicate::eq(name, value))
                }
            } else {
                Ok(Predicate::prop(name))
            }
        }
    }
}

/// Wraps a model so that `{}` prints it in `.kmod` syntax.
pub struct Kmod<'a>(pub &'a KripkeModel);

impl fmt::Display for Kmod<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&render_model(self.0))
    }
}

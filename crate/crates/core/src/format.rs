//! Text formats for networks and findings.
//!
//! # Network documents
//!
//! ```text
//! # comments run to the end of the line
//! network "cancer"
//!
//! variable "Breast Cancer" {
//!   role = target
//!   states = ["yes", "no"]
//!   parents = ["Gender", "Age"]
//!   cpt = [
//!     [0, 1],        # Gender=male,   Age=below30
//!     [0.01, 0.99],  # Gender=male,   Age=above30
//!     [0.2, 0.8],    # Gender=female, Age=below30
//!     [0.5, 0.5],    # Gender=female, Age=above30
//!   ]
//! }
//! ```
//!
//! Rows follow the parent list with the first parent varying slowest. Names
//! are double-quoted strings (`\"`, `\\`, `\n`, `\t`, `\r` escapes); state
//! names and roles may also be bare identifiers. Parents may refer to
//! variables declared later in the document.
//!
//! [`serialize_network`] writes the canonical form: declaration order, all
//! names quoted, one CPT row per line, probabilities rounded to 12
//! significant digits.
//!
//! # Findings
//!
//! `VAR=STATE` pairs separated by commas or newlines, e.g.
//! `Palpation=yes, Diabetes=yes`. Names are trimmed and may contain spaces.

use std::fmt::Write as _;

use crate::error::{Error, ParseError, Result};
use crate::evidence::Evidence;
use crate::network::{validate_network, Cpt, Network, Role, Variable, Violation};

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Ident(String),
    Str(String),
    Num(f64),
    LBrace,
    RBrace,
    LBracket,
    RBracket,
    Comma,
    Equals,
}

impl Tok {
    fn describe(&self) -> String {
        match self {
            Tok::Ident(s) => format!("identifier `{s}`"),
            Tok::Str(s) => format!("string \"{s}\""),
            Tok::Num(x) => format!("number {x}"),
            Tok::LBrace => "`{`".into(),
            Tok::RBrace => "`}`".into(),
            Tok::LBracket => "`[`".into(),
            Tok::RBracket => "`]`".into(),
            Tok::Comma => "`,`".into(),
            Tok::Equals => "`=`".into(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
struct Pos {
    line: usize,
    column: usize,
}

fn err(pos: Pos, variable: Option<&str>, message: impl Into<String>) -> ParseError {
    ParseError {
        line: pos.line,
        column: pos.column,
        variable: variable.map(str::to_string),
        message: message.into(),
    }
}

fn tokenize(text: &str) -> std::result::Result<Vec<(Tok, Pos)>, ParseError> {
    let mut out = Vec::new();
    let mut chars = text.chars().peekable();
    let (mut line, mut column) = (1usize, 1usize);

    macro_rules! bump {
        () => {{
            let c = chars.next();
            if c == Some('\n') {
                line += 1;
                column = 1;
            } else if c.is_some() {
                column += 1;
            }
            c
        }};
    }

    while let Some(&c) = chars.peek() {
        let pos = Pos { line, column };
        match c {
            c if c.is_whitespace() => {
                bump!();
            }
            '#' => {
                while let Some(&c) = chars.peek() {
                    if c == '\n' {
                        break;
                    }
                    bump!();
                }
            }
            '{' | '}' | '[' | ']' | ',' | '=' => {
                bump!();
                out.push((
                    match c {
                        '{' => Tok::LBrace,
                        '}' => Tok::RBrace,
                        '[' => Tok::LBracket,
                        ']' => Tok::RBracket,
                        ',' => Tok::Comma,
                        _ => Tok::Equals,
                    },
                    pos,
                ));
            }
            '"' => {
                bump!();
                let mut s = String::new();
                loop {
                    match bump!() {
                        None | Some('\n') => return Err(err(pos, None, "unterminated string")),
                        Some('"') => break,
                        Some('\\') => match bump!() {
                            Some('"') => s.push('"'),
                            Some('\\') => s.push('\\'),
                            Some('n') => s.push('\n'),
                            Some('t') => s.push('\t'),
                            Some('r') => s.push('\r'),
                            Some(other) => {
                                return Err(err(
                                    Pos { line, column: column - 1 },
                                    None,
                                    format!("unknown escape `\\{other}`"),
                                ))
                            }
                            None => return Err(err(pos, None, "unterminated string")),
                        },
                        Some(ch) => s.push(ch),
                    }
                }
                out.push((Tok::Str(s), pos));
            }
            c if c.is_ascii_digit() || c == '-' || c == '+' || c == '.' => {
                let mut s = String::new();
                while let Some(&c) = chars.peek() {
                    if c.is_ascii_digit() || matches!(c, '.' | 'e' | 'E' | '+' | '-') {
                        s.push(c);
                        bump!();
                    } else {
                        break;
                    }
                }
                let x: f64 = s
                    .parse()
                    .map_err(|_| err(pos, None, format!("malformed number `{s}`")))?;
                out.push((Tok::Num(x), pos));
            }
            c if c.is_alphabetic() || c == '_' => {
                let mut s = String::new();
                while let Some(&c) = chars.peek() {
                    if c.is_alphanumeric() || c == '_' || c == '-' {
                        s.push(c);
                        bump!();
                    } else {
                        break;
                    }
                }
                out.push((Tok::Ident(s), pos));
            }
            other => return Err(err(pos, None, format!("unexpected character `{other}`"))),
        }
    }
    Ok(out)
}

#[derive(Debug, Clone)]
enum Value {
    Text(String, Pos),
    Num(f64, Pos),
    List(Vec<Value>, Pos),
}

impl Value {
    fn pos(&self) -> Pos {
        match self {
            Value::Text(_, p) | Value::Num(_, p) | Value::List(_, p) => *p,
        }
    }
}

/// One `variable` block before name resolution.
#[derive(Debug, Clone)]
struct RawVariable {
    name: String,
    pos: Pos,
    role: Option<Role>,
    states: Option<Vec<String>>,
    parents: Vec<(String, Pos)>,
    cpt: Option<(Vec<Vec<f64>>, Pos)>,
}

struct Parser {
    toks: Vec<(Tok, Pos)>,
    at: usize,
    end: Pos,
}

/// Nesting limit for lists; deeper documents are rejected, not recursed.
const MAX_DEPTH: usize = 8;

impl Parser {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.at).map(|(t, _)| t)
    }

    fn pos(&self) -> Pos {
        self.toks.get(self.at).map_or(self.end, |(_, p)| *p)
    }

    fn next(&mut self, ctx: Option<&str>, what: &str) -> std::result::Result<(Tok, Pos), ParseError> {
        match self.toks.get(self.at) {
            Some(t) => {
                self.at += 1;
                Ok(t.clone())
            }
            None => Err(err(self.end, ctx, format!("unexpected end of document, expected {what}"))),
        }
    }

    fn expect(&mut self, tok: Tok, ctx: Option<&str>) -> std::result::Result<Pos, ParseError> {
        let what = tok.describe();
        let (t, pos) = self.next(ctx, &what)?;
        if t == tok {
            Ok(pos)
        } else {
            Err(err(pos, ctx, format!("expected {what}, found {}", t.describe())))
        }
    }

    fn string(&mut self, ctx: Option<&str>, what: &str) -> std::result::Result<(String, Pos), ParseError> {
        match self.next(ctx, what)? {
            (Tok::Str(s), pos) => Ok((s, pos)),
            (t, pos) => Err(err(pos, ctx, format!("expected {what}, found {}", t.describe()))),
        }
    }

    fn value(&mut self, ctx: &str, depth: usize) -> std::result::Result<Value, ParseError> {
        let (t, pos) = self.next(Some(ctx), "a value")?;
        match t {
            Tok::Str(s) | Tok::Ident(s) => Ok(Value::Text(s, pos)),
            Tok::Num(x) => Ok(Value::Num(x, pos)),
            Tok::LBracket => {
                if depth >= MAX_DEPTH {
                    return Err(err(pos, Some(ctx), "lists nested too deeply"));
                }
                let mut items = Vec::new();
                loop {
                    if self.peek() == Some(&Tok::RBracket) {
                        self.at += 1;
                        break;
                    }
                    items.push(self.value(ctx, depth + 1)?);
                    match self.next(Some(ctx), "`,` or `]`")? {
                        (Tok::Comma, _) => {}
                        (Tok::RBracket, _) => break,
                        (t, p) => {
                            return Err(err(p, Some(ctx), format!("expected `,` or `]`, found {}", t.describe())))
                        }
                    }
                }
                Ok(Value::List(items, pos))
            }
            other => Err(err(pos, Some(ctx), format!("expected a value, found {}", other.describe()))),
        }
    }

    fn variable(&mut self) -> std::result::Result<RawVariable, ParseError> {
        let (name, pos) = self.string(None, "a quoted variable name")?;
        let ctx = Some(name.as_str());
        self.expect(Tok::LBrace, ctx)?;
        let mut raw = RawVariable {
            name: name.clone(),
            pos,
            role: None,
            states: None,
            parents: Vec::new(),
            cpt: None,
        };
        let mut seen: Vec<String> = Vec::new();
        loop {
            let (t, fpos) = self.next(ctx, "a field or `}`")?;
            let field = match t {
                Tok::RBrace => break,
                Tok::Ident(f) => f,
                other => {
                    return Err(err(fpos, ctx, format!("expected a field name, found {}", other.describe())))
                }
            };
            if seen.contains(&field) {
                return Err(err(fpos, ctx, format!("field `{field}` given twice")));
            }
            seen.push(field.clone());
            self.expect(Tok::Equals, ctx)?;
            let value = self.value(&name, 0)?;
            match field.as_str() {
                "role" => match value {
                    Value::Text(s, p) => {
                        raw.role = Some(s.parse().map_err(|m: String| err(p, ctx, m))?);
                    }
                    v => return Err(err(v.pos(), ctx, "role must be target, evidence or other")),
                },
                "states" => raw.states = Some(text_list(value, ctx, "states")?.into_iter().map(|(s, _)| s).collect()),
                "parents" => raw.parents = text_list(value, ctx, "parents")?,
                "cpt" => raw.cpt = Some((number_rows(value, ctx)?, fpos)),
                other => return Err(err(fpos, ctx, format!("unknown field `{other}`"))),
            }
        }
        if raw.role.is_none() {
            return Err(err(pos, ctx, "missing field `role`"));
        }
        if raw.states.is_none() {
            return Err(err(pos, ctx, "missing field `states`"));
        }
        if raw.cpt.is_none() {
            return Err(err(pos, ctx, "missing field `cpt`"));
        }
        Ok(raw)
    }
}

fn text_list(value: Value, ctx: Option<&str>, field: &str) -> std::result::Result<Vec<(String, Pos)>, ParseError> {
    match value {
        Value::List(items, _) => items
            .into_iter()
            .map(|v| match v {
                Value::Text(s, p) => Ok((s, p)),
                v => Err(err(v.pos(), ctx, format!("`{field}` entries must be names"))),
            })
            .collect(),
        v => Err(err(v.pos(), ctx, format!("`{field}` must be a list"))),
    }
}

fn number_rows(value: Value, ctx: Option<&str>) -> std::result::Result<Vec<Vec<f64>>, ParseError> {
    let rows = match value {
        Value::List(rows, _) => rows,
        v => return Err(err(v.pos(), ctx, "`cpt` must be a list of rows")),
    };
    rows.into_iter()
        .map(|row| match row {
            Value::List(xs, _) => xs
                .into_iter()
                .map(|x| match x {
                    Value::Num(x, _) => Ok(x),
                    v => Err(err(v.pos(), ctx, "CPT entries must be numbers")),
                })
                .collect(),
            v => Err(err(v.pos(), ctx, "each CPT row must be a list of numbers")),
        })
        .collect()
}

fn parse_raw(text: &str) -> std::result::Result<(String, Vec<RawVariable>), ParseError> {
    let toks = tokenize(text)?;
    let end = Pos {
        line: text.lines().count().max(1),
        column: text.lines().last().map_or(1, |l| l.chars().count() + 1),
    };
    let mut p = Parser { toks, at: 0, end };
    if p.toks.is_empty() {
        return Err(err(end, None, "empty document, expected `network \"<name>\"`"));
    }
    match p.next(None, "`network`")? {
        (Tok::Ident(k), _) if k == "network" => {}
        (t, pos) => return Err(err(pos, None, format!("expected `network`, found {}", t.describe()))),
    }
    let (name, _) = p.string(None, "a quoted network name")?;
    let mut vars = Vec::new();
    while p.peek().is_some() {
        let pos = p.pos();
        match p.next(None, "`variable`")? {
            (Tok::Ident(k), _) if k == "variable" => vars.push(p.variable()?),
            (t, _) => return Err(err(pos, None, format!("expected `variable`, found {}", t.describe()))),
        }
    }
    Ok((name, vars))
}

/// Parses a document into a network, resolving names but leaving numeric
/// and acyclicity checks to [`validate_network`].
pub fn parse_network_unvalidated(text: &str) -> std::result::Result<Network, ParseError> {
    let (name, raws) = parse_raw(text)?;
    for (i, r) in raws.iter().enumerate() {
        if raws[..i].iter().any(|o| o.name == r.name) {
            return Err(err(r.pos, Some(&r.name), "variable declared twice"));
        }
    }
    let lookup = |n: &str| raws.iter().position(|r| r.name == n);
    let mut variables = Vec::with_capacity(raws.len());
    let mut cpts = Vec::with_capacity(raws.len());
    for (i, r) in raws.iter().enumerate() {
        let parents = r
            .parents
            .iter()
            .map(|(p, pos)| {
                lookup(p).ok_or_else(|| err(*pos, Some(&r.name), format!("unknown parent \"{p}\"")))
            })
            .collect::<std::result::Result<Vec<_>, _>>()?;
        variables.push(Variable {
            name: r.name.clone(),
            states: r.states.clone().unwrap_or_default(),
            role: r.role.unwrap_or(Role::Other),
        });
        cpts.push(Cpt {
            child: i,
            parents,
            rows: r.cpt.as_ref().map(|(rows, _)| rows.clone()).unwrap_or_default(),
        });
    }
    Ok(Network::from_parts(name, variables, cpts))
}

/// Options for [`parse_network_with`].
#[derive(Debug, Clone, Copy, Default)]
pub struct ParseOptions {
    /// Divide every CPT row by its sum before validation.
    pub renormalize: bool,
}

/// Parses and validates a network document.
pub fn parse_network(text: &str) -> Result<Network> {
    parse_network_with(text, ParseOptions::default())
}

pub fn parse_network_with(text: &str, options: ParseOptions) -> Result<Network> {
    let mut net = parse_network_unvalidated(text)?;
    if options.renormalize {
        net = net.renormalized();
    }
    let report = validate_network(&net);
    match report.violations.first() {
        None => Ok(net),
        Some(first) => {
            // Point at the block of the first offending variable.
            let (name, raws) = parse_raw(text)?;
            debug_assert_eq!(name, net.name());
            let located = first
                .variable()
                .and_then(|v| raws.iter().find(|r| r.name == v))
                .map(|r| {
                    let pos = match first {
                        Violation::RowCount { .. }
                        | Violation::RowLength { .. }
                        | Violation::BadEntry { .. }
                        | Violation::RowSum { .. } => r.cpt.as_ref().map_or(r.pos, |(_, p)| *p),
                        _ => r.pos,
                    };
                    (pos, r.name.clone())
                });
            let (pos, var) = match located {
                Some((p, v)) => (p, Some(v)),
                None => (Pos { line: 1, column: 1 }, None),
            };
            let mut message = first.to_string();
            if report.len() > 1 {
                let _ = write!(message, " (and {} more problem(s))", report.len() - 1);
            }
            Err(Error::Parse(err(pos, var.as_deref(), message)))
        }
    }
}

fn quote(s: &str) -> String {
    let mut out = String::with_capacity(s.len() + 2);
    out.push('"');
    for c in s.chars() {
        match c {
            '"' => out.push_str("\\\""),
            '\\' => out.push_str("\\\\"),
            '\n' => out.push_str("\\n"),
            '\t' => out.push_str("\\t"),
            '\r' => out.push_str("\\r"),
            c => out.push(c),
        }
    }
    out.push('"');
    out
}

/// Shortest decimal for `x` rounded to 12 significant digits.
pub fn format_probability(x: f64) -> String {
    if x == 0.0 {
        return "0".into();
    }
    let rounded: f64 = format!("{x:.11e}").parse().unwrap_or(x);
    format!("{rounded}")
}

/// Canonical document for `net`.
pub fn serialize_network(net: &Network) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "network {}", quote(net.name()));
    for (i, var) in net.variables().iter().enumerate() {
        let cpt = net.cpt(i);
        let names = |ids: &mut dyn Iterator<Item = String>| ids.collect::<Vec<_>>().join(", ");
        let _ = writeln!(out, "\nvariable {} {{", quote(&var.name));
        let _ = writeln!(out, "  role = {}", var.role);
        let _ = writeln!(out, "  states = [{}]", names(&mut var.states.iter().map(|s| quote(s))));
        let _ = writeln!(
            out,
            "  parents = [{}]",
            names(&mut cpt.parents.iter().map(|&p| quote(&net.variable(p).name)))
        );
        let _ = writeln!(out, "  cpt = [");
        for row in &cpt.rows {
            let _ = writeln!(out, "    [{}],", names(&mut row.iter().map(|&x| format_probability(x))));
        }
        let _ = writeln!(out, "  ]\n}}");
    }
    out
}

/// Parses `VAR=STATE` pairs and validates them against `net`.
pub fn parse_findings(text: &str, net: &Network) -> Result<Evidence> {
    let mut ev = Evidence::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("");
        let mut column = 1;
        for item in line.split(',') {
            let here = Pos { line: lineno + 1, column };
            column += item.chars().count() + 1;
            if item.trim().is_empty() {
                continue;
            }
            let (var, state) = item
                .split_once('=')
                .ok_or_else(|| err(here, None, format!("expected VAR=STATE, found `{}`", item.trim())))?;
            let (var, state) = (var.trim(), state.trim());
            if var.is_empty() {
                return Err(err(here, None, "missing variable name before `=`").into());
            }
            if state.is_empty() {
                return Err(err(here, Some(var), "missing state after `=`").into());
            }
            let id = net.find_or_err(var)?;
            if net.variable(id).state_index(state).is_none() {
                return Err(Error::UnknownState {
                    variable: var.to_string(),
                    state: state.to_string(),
                });
            }
            if ev.insert(var, state).is_some() {
                return Err(Error::DuplicateFinding(var.to_string()));
            }
        }
    }
    Ok(ev)
}

#[cfg(test)]
mod tests {
    use super::*;

    const SMALL: &str = r#"
network "small"
variable "A" {
  role = target
  states = [a0, "a 1"]
  cpt = [[0.25, 0.75]]
}
variable "B" {
  role = evidence
  states = ["y", "n"]
  parents = ["A"]
  cpt = [
    [1, 0],
    [0.5, 0.5],
  ]
}
"#;

    #[test]
    fn parses_small_document() {
        let net = parse_network(SMALL).unwrap();
        assert_eq!(net.name(), "small");
        assert_eq!(net.variable(0).states, vec!["a0", "a 1"]);
        assert_eq!(net.parents(1), &[0]);
        assert_eq!(net.cpt(1).rows[1], vec![0.5, 0.5]);
    }

    #[test]
    fn serialization_is_stable() {
        let net = parse_network(SMALL).unwrap();
        let text = serialize_network(&net);
        assert_eq!(parse_network(&text).unwrap(), net);
        assert_eq!(serialize_network(&parse_network(&text).unwrap()), text);
    }

    #[test]
    fn empty_document_is_a_syntax_error() {
        assert!(matches!(parse_network(""), Err(Error::Parse(_))));
        assert!(matches!(parse_network("  # only a comment\n"), Err(Error::Parse(_))));
    }

    #[test]
    fn unknown_parent_is_named() {
        let text = SMALL.replace(r#"parents = ["A"]"#, r#"parents = ["Agee"]"#);
        let e = parse_network(&text).unwrap_err();
        let msg = e.to_string();
        assert!(msg.contains("Agee"), "{msg}");
        assert!(msg.contains("\"B\""), "{msg}");
    }

    #[test]
    fn numeric_problems_point_at_the_cpt() {
        let text = SMALL.replace("[0.5, 0.5]", "[0.5, 0.6]");
        match parse_network(&text) {
            Err(Error::Parse(p)) => {
                assert_eq!(p.variable.as_deref(), Some("B"));
                assert_eq!(p.line, 12);
                assert!(p.message.contains("sums to"));
            }
            other => panic!("unexpected {other:?}"),
        }
        let net = parse_network_with(&text, ParseOptions { renormalize: true }).unwrap();
        assert!((net.cpt(1).rows[1][0] - 0.5 / 1.1).abs() < 1e-12);
    }

    #[test]
    fn syntax_errors_carry_positions() {
        let e = parse_raw("network \"x\"\nvariable \"A\" {\n  role == target\n}").unwrap_err();
        assert_eq!((e.line, e.column), (3, 9));
        assert_eq!(e.variable.as_deref(), Some("A"));
        let e = parse_raw("network \"x\"\nvariable \"A\" {\n  role = target\n  colour = red\n").unwrap_err();
        assert!(e.message.contains("colour"));
        assert!(tokenize("network \"x").is_err());
        assert!(tokenize("\"\\q\"").is_err());
        assert!(tokenize("1.2.3").is_err());
    }

    #[test]
    fn missing_fields_are_reported() {
        let e = parse_raw("network \"x\" variable \"A\" { role = other cpt = [[1]] }").unwrap_err();
        assert!(e.message.contains("states"));
    }

    #[test]
    fn deep_nesting_is_rejected() {
        let deep = format!("network \"x\" variable \"A\" {{ cpt = {} }}", "[".repeat(100));
        assert!(parse_raw(&deep).is_err());
    }

    #[test]
    fn probability_formatting() {
        assert_eq!(format_probability(0.95), "0.95");
        assert_eq!(format_probability(1.0), "1");
        assert_eq!(format_probability(0.0), "0");
        assert_eq!(format_probability(1.0 / 3.0), "0.333333333333");
        assert_eq!(format_probability(2.0 / 3.0), "0.666666666667");
        assert_eq!(format_probability(1e-20), "0.00000000000000000001");
    }

    #[test]
    fn findings_examples() {
        let net = parse_network(SMALL).unwrap();
        let ev = parse_findings("B=y, A = a 1 # comment", &net).unwrap();
        assert_eq!(ev.get("A"), Some("a 1"));
        assert_eq!(ev.get("B"), Some("y"));
        assert!(matches!(parse_findings("B=maybe", &net), Err(Error::UnknownState { .. })));
        assert!(matches!(parse_findings("B=y, B=n", &net), Err(Error::DuplicateFinding(_))));
        assert!(matches!(parse_findings("C=y", &net), Err(Error::UnknownVariable(_))));
        match parse_findings("B=y\n  A", &net) {
            Err(Error::Parse(p)) => assert_eq!(p.line, 2),
            other => panic!("unexpected {other:?}"),
        }
        assert!(parse_findings("\n\n", &net).unwrap().is_empty());
    }
}

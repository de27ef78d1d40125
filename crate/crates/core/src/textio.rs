//! Text format for profiles, and DOT export.
//!
//! ```text
//! # endless passing
//! n0: A choose 2 -> a_stop, n1;
//! n1: B choose 2 -> b_stop, n0;
//! a_stop: leaf(A:1, B:0);
//! b_stop: leaf(A:0, B:1);
//! root = n0;
//! ```
//!
//! Names may be referenced before they are declared, which is how cycles
//! are written. Utilities are integers, decimals (`0.5`) or fractions
//! (`7/3`), all read exactly. Names and agents that are not plain
//! identifiers can be double-quoted.

use std::collections::{HashMap, VecDeque};
use std::fmt::{self, Write as _};

use thiserror::Error;

use crate::profile::{Agent, Choice, Node, NodeId, Profile, ProfileBuilder, UtilityAssignment};
use crate::utility::Utility;

/// A parse failure at a 1-based line. `name` is the offending node or
/// agent name, when there is one.
#[derive(Debug, Clone, Error, PartialEq, Eq)]
#[error("line {line}: {message}")]
pub struct ParseError {
    pub line: usize,
    pub name: Option<String>,
    pub message: String,
}

impl ParseError {
    fn new(line: usize, message: impl Into<String>) -> Self {
        ParseError { line, name: None, message: message.into() }
    }

    fn named(line: usize, name: &str, message: impl Into<String>) -> Self {
        ParseError { line, name: Some(name.to_string()), message: message.into() }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Text,
    Dot,
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Tok {
    Word(String),
    Quoted(String),
    Num(String),
    Punct(char),
    Arrow,
}

impl fmt::Display for Tok {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Tok::Word(s) | Tok::Num(s) => write!(f, "`{s}`"),
            Tok::Quoted(s) => write!(f, "\"{s}\""),
            Tok::Punct(c) => write!(f, "`{c}`"),
            Tok::Arrow => f.write_str("`->`"),
        }
    }
}

fn is_ident_start(c: char) -> bool {
    c.is_alphabetic() || c == '_'
}

fn is_ident_char(c: char) -> bool {
    c.is_alphanumeric() || c == '_' || c == '\''
}

fn lex(text: &str) -> Result<Vec<(Tok, usize)>, ParseError> {
    let mut out = vec![];
    let mut line = 1;
    let mut it = text.chars().peekable();
    while let Some(c) = it.next() {
        match c {
            '\n' => line += 1,
            c if c.is_whitespace() => {}
            '#' => {
                while it.peek().is_some_and(|&d| d != '\n') {
                    it.next();
                }
            }
            '"' => {
                let start = line;
                let mut s = String::new();
                loop {
                    match it.next() {
                        None => return Err(ParseError::new(start, "unterminated quoted name")),
                        Some('"') => break,
                        Some('\\') => match it.next() {
                            Some(e @ ('"' | '\\')) => s.push(e),
                            _ => return Err(ParseError::new(line, "bad escape in quoted name")),
                        },
                        Some('\n') => return Err(ParseError::new(start, "newline in quoted name")),
                        Some(d) => s.push(d),
                    }
                }
                out.push((Tok::Quoted(s), start));
            }
            '-' if it.peek() == Some(&'>') => {
                it.next();
                out.push((Tok::Arrow, line));
            }
            ':' | ';' | ',' | '(' | ')' | '=' => out.push((Tok::Punct(c), line)),
            c if c.is_ascii_digit() || c == '-' || c == '+' => {
                let mut s = String::from(c);
                while let Some(&d) = it.peek() {
                    if d.is_ascii_digit() || d == '.' || d == '/' {
                        s.push(d);
                        it.next();
                    } else {
                        break;
                    }
                }
                out.push((Tok::Num(s), line));
            }
            c if is_ident_start(c) => {
                let mut s = String::from(c);
                while let Some(&d) = it.peek() {
                    if is_ident_char(d) {
                        s.push(d);
                        it.next();
                    } else {
                        break;
                    }
                }
                out.push((Tok::Word(s), line));
            }
            other => return Err(ParseError::new(line, format!("unexpected character `{other}`"))),
        }
    }
    Ok(out)
}

struct Cursor {
    toks: Vec<(Tok, usize)>,
    pos: usize,
    last_line: usize,
}

impl Cursor {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|(t, _)| t)
    }

    fn peek2(&self) -> Option<&Tok> {
        self.toks.get(self.pos + 1).map(|(t, _)| t)
    }

    fn line(&self) -> usize {
        self.toks.get(self.pos).map_or(self.last_line, |(_, l)| *l)
    }

    fn next(&mut self, what: &str) -> Result<(Tok, usize), ParseError> {
        match self.toks.get(self.pos) {
            Some(t) => {
                self.pos += 1;
                Ok(t.clone())
            }
            None => Err(ParseError::new(self.last_line, format!("unexpected end of input, expected {what}"))),
        }
    }

    fn expect(&mut self, p: char) -> Result<(), ParseError> {
        let (t, line) = self.next(&format!("`{p}`"))?;
        if t == Tok::Punct(p) {
            Ok(())
        } else {
            Err(ParseError::new(line, format!("expected `{p}`, found {t}")))
        }
    }

    fn name(&mut self, what: &str) -> Result<(String, usize), ParseError> {
        match self.next(what)? {
            (Tok::Word(s) | Tok::Quoted(s), line) => Ok((s, line)),
            (t, line) => Err(ParseError::new(line, format!("expected {what}, found {t}"))),
        }
    }
}

enum Decl {
    Leaf(Vec<(String, Utility)>),
    Internal { owner: String, choice: Choice, refs: [(String, usize); 2] },
}

/// Parses a profile document.
pub fn parse_profile(text: &str) -> Result<Profile, ParseError> {
    let toks = lex(text)?;
    let last_line = text.lines().count().max(1);
    let mut cur = Cursor { toks, pos: 0, last_line };
    let mut decls: Vec<(String, usize, Decl)> = vec![];
    let mut index: HashMap<String, usize> = HashMap::new();
    let mut root: Option<(String, usize)> = None;

    while cur.peek().is_some() {
        let is_root = matches!(cur.peek(), Some(Tok::Word(w)) if w == "root") && cur.peek2() == Some(&Tok::Punct('='));
        if is_root {
            let line = cur.line();
            cur.pos += 2;
            let (name, _) = cur.name("root node name")?;
            cur.expect(';')?;
            if root.is_some() {
                return Err(ParseError::named(line, &name, "more than one root line"));
            }
            root = Some((name, line));
            continue;
        }
        let (name, line) = cur.name("node name")?;
        cur.expect(':')?;
        let is_leaf = matches!(cur.peek(), Some(Tok::Word(w)) if w == "leaf") && cur.peek2() == Some(&Tok::Punct('('));
        let decl = if is_leaf {
            cur.pos += 2;
            let mut entries: Vec<(String, Utility)> = vec![];
            loop {
                let (agent, aline) = cur.name("agent name")?;
                cur.expect(':')?;
                let (t, qline) = cur.next("utility")?;
                let Tok::Num(lit) = t else {
                    return Err(ParseError::new(qline, format!("expected a utility, found {t}")));
                };
                let q: Utility = lit
                    .parse()
                    .map_err(|_| ParseError::new(qline, format!("malformed utility `{lit}`")))?;
                if entries.iter().any(|(a, _)| *a == agent) {
                    return Err(ParseError::named(aline, &agent, format!("agent `{agent}` appears twice in one leaf")));
                }
                entries.push((agent, q));
                let (t, l) = cur.next("`,` or `)`")?;
                match t {
                    Tok::Punct(',') => {}
                    Tok::Punct(')') => break,
                    t => return Err(ParseError::new(l, format!("expected `,` or `)`, found {t}"))),
                }
            }
            Decl::Leaf(entries)
        } else {
            let (owner, _) = cur.name("owner agent")?;
            let (kw, kl) = cur.next("`choose`")?;
            if kw != Tok::Word("choose".into()) {
                return Err(ParseError::new(kl, format!("expected `choose`, found {kw}")));
            }
            let (c, cl) = cur.next("choice 1 or 2")?;
            let choice = match &c {
                Tok::Num(n) if n == "1" => Choice::One,
                Tok::Num(n) if n == "2" => Choice::Two,
                t => return Err(ParseError::new(cl, format!("choice must be 1 or 2, found {t}"))),
            };
            let (arrow, al) = cur.next("`->`")?;
            if arrow != Tok::Arrow {
                return Err(ParseError::new(al, format!("expected `->`, found {arrow}")));
            }
            let r1 = cur.name("child name")?;
            cur.expect(',')?;
            let r2 = cur.name("child name")?;
            Decl::Internal { owner, choice, refs: [r1, r2] }
        };
        cur.expect(';')?;
        if index.contains_key(&name) {
            return Err(ParseError::named(line, &name, format!("node `{name}` declared twice")));
        }
        index.insert(name.clone(), decls.len());
        decls.push((name, line, decl));
    }

    let (root_name, root_line) = root.ok_or_else(|| ParseError::new(last_line, "missing `root = NAME;` line"))?;
    let resolve = |name: &str, line: usize| -> Result<NodeId, ParseError> {
        index
            .get(name)
            .map(|&i| NodeId(i as u32))
            .ok_or_else(|| ParseError::named(line, name, format!("undefined node `{name}`")))
    };
    let root_id = resolve(&root_name, root_line)?;
    let mut agents: HashMap<String, Agent> = HashMap::new();
    let mut agent = |label: &str, line: usize| -> Result<Agent, ParseError> {
        if let Some(a) = agents.get(label) {
            return Ok(a.clone());
        }
        let a = Agent::new(label).map_err(|e| ParseError::named(line, label, e.to_string()))?;
        agents.insert(label.to_string(), a.clone());
        Ok(a)
    };
    let mut b = ProfileBuilder::new();
    let ids: Vec<NodeId> = decls.iter().map(|_| b.reserve()).collect();
    for (i, (_, line, decl)) in decls.iter().enumerate() {
        let node = match decl {
            Decl::Leaf(entries) => {
                let mut u = UtilityAssignment::new();
                for (a, q) in entries {
                    u.insert(agent(a, *line)?, q.clone());
                }
                Node::Leaf(u)
            }
            Decl::Internal { owner, choice, refs } => Node::Internal {
                owner: agent(owner, *line)?,
                choice: *choice,
                children: [resolve(&refs[0].0, refs[0].1)?, resolve(&refs[1].0, refs[1].1)?],
            },
        };
        b.define(ids[i], node);
    }
    b.build(root_id).map_err(|e| ParseError::named(root_line, &root_name, e.to_string()))
}

fn is_plain_ident(s: &str) -> bool {
    let mut cs = s.chars();
    cs.next().is_some_and(is_ident_start) && cs.all(is_ident_char) && s != "root" && s != "leaf" && s != "choose"
}

fn quote(s: &str) -> String {
    if is_plain_ident(s) {
        s.to_string()
    } else {
        format!("\"{}\"", s.replace('\\', "\\\\").replace('"', "\\\""))
    }
}

/// Reachable nodes in breadth-first order from the root.
fn bfs(s: &Profile) -> (Vec<NodeId>, HashMap<NodeId, usize>) {
    let mut order = vec![];
    let mut seen = HashMap::new();
    let mut q = VecDeque::from([s.root()]);
    seen.insert(s.root(), 0);
    while let Some(id) = q.pop_front() {
        order.push(id);
        for &c in s.node(id).children() {
            if !seen.contains_key(&c) {
                seen.insert(c, seen.len());
                q.push_back(c);
            }
        }
    }
    (order, seen)
}

pub fn serialize_profile(s: &Profile, format: Format) -> String {
    match format {
        Format::Text => to_text(s),
        Format::Dot => to_dot(s),
    }
}

fn to_text(s: &Profile) -> String {
    let (order, num) = bfs(s);
    let mut out = String::new();
    for id in order {
        let _ = write!(out, "n{}: ", num[&id]);
        match s.node(id) {
            Node::Leaf(u) => {
                let parts: Vec<String> = u.iter().map(|(a, q)| format!("{}:{q}", quote(a.label()))).collect();
                let _ = writeln!(out, "leaf({});", parts.join(", "));
            }
            Node::Internal { owner, choice, children } => {
                let _ = writeln!(
                    out,
                    "{} choose {} -> n{}, n{};",
                    quote(owner.label()),
                    choice.number(),
                    num[&children[0]],
                    num[&children[1]]
                );
            }
        }
    }
    out.push_str("root = n0;\n");
    out
}

fn dot_escape(s: &str) -> String {
    s.replace('\\', "\\\\").replace('"', "\\\"")
}

/// Chosen edges are drawn as double lines.
fn to_dot(s: &Profile) -> String {
    let (order, num) = bfs(s);
    let mut out = String::from("digraph profile {\n  node [fontname=\"Helvetica\"];\n");
    for &id in &order {
        let n = num[&id];
        match s.node(id) {
            Node::Leaf(u) => {
                let label: Vec<String> = u.iter().map(|(a, q)| format!("{}:{q}", dot_escape(a.label()))).collect();
                let _ = writeln!(out, "  n{n} [shape=box, label=\"{}\"];", label.join("\\n"));
            }
            Node::Internal { owner, .. } => {
                let _ = writeln!(out, "  n{n} [shape=circle, label=\"{}\"];", dot_escape(owner.label()));
            }
        }
    }
    for &id in &order {
        if let Node::Internal { choice, children, .. } = s.node(id) {
            for (k, c) in children.iter().enumerate() {
                let style = if k == choice.index() {
                    ", color=\"black:invis:black\", penwidth=1.5"
                } else {
                    ", style=dashed"
                };
                let _ = writeln!(out, "  n{} -> n{} [label=\"{}\"{style}];", num[&id], num[c], k + 1);
            }
        }
    }
    out.push_str("}\n");
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::engine;
    use crate::families::{s_alpha_profile, s_box2};
    use crate::profile::same_game;

    const S_BOX2: &str = "
        # endless passing
        n0: A choose 2 -> a_stop, n1;
        n1: B choose 2 -> b_stop, n0;
        a_stop: leaf(A:1, B:0);
        b_stop: leaf(A:0, B:1);
        root = n0;
    ";

    #[test]
    fn parses_cycles() {
        let p = parse_profile(S_BOX2).unwrap();
        assert!(engine::divergent(&p));
        assert!(p.same_profile(&s_box2()));
    }

    #[test]
    fn s_alpha_outcome() {
        let text = "root = top;
            top: A choose 2 -> l1, nb;
            nb: B choose 1 -> l2, l3;
            l1: leaf(A:1, B:0.5);
            l2: leaf(A:2, B:1);
            l3: leaf(A:0, B:5);";
        let p = parse_profile(text).unwrap();
        let u = p.utility_assignment().unwrap();
        assert_eq!(u.to_string(), "(A:2, B:1)");
        assert!(p.same_profile(&s_alpha_profile()));
    }

    #[test]
    fn errors_are_located() {
        let e = parse_profile("root = x;").unwrap_err();
        assert_eq!(e.name.as_deref(), Some("x"));
        assert_eq!(e.line, 1);
        let e = parse_profile("a: leaf(A:1);\na: leaf(A:2);\nroot = a;").unwrap_err();
        assert_eq!((e.line, e.name.as_deref()), (2, Some("a")));
        let e = parse_profile("a: leaf(A:1);").unwrap_err();
        assert!(e.message.contains("root"));
        let e = parse_profile("a: A choose 1 -> b, c;\nb: leaf(A:1);\nroot = a;").unwrap_err();
        assert_eq!((e.line, e.name.as_deref()), (1, Some("c")));
        let e = parse_profile("a: leaf(A:1/0);\nroot = a;").unwrap_err();
        assert_eq!(e.line, 1);
        let e = parse_profile("a: A choose 3 -> a, a;\nroot = a;").unwrap_err();
        assert!(e.message.contains("1 or 2"));
        let e = parse_profile("a: leaf(A:1, B:1);\nb: leaf(A:1);\nn: A choose 1 -> a, b;\nroot = n;").unwrap_err();
        assert_eq!(e.line, 4);
    }

    #[test]
    fn round_trip_and_quoting() {
        let text = "n: \"the \\\"boss\\\"\" choose 1 -> l, l;\nl: leaf(\"the \\\"boss\\\"\":-7/3, root:0);\nroot = n;";
        let p = parse_profile(text).unwrap();
        let back = parse_profile(&serialize_profile(&p, Format::Text)).unwrap();
        assert!(same_game(&p, &back) && p.same_profile(&back));
    }

    #[test]
    fn leaf_profile_is_one_line() {
        let p = parse_profile("x: leaf(A:3);\nroot = x;").unwrap();
        assert_eq!(serialize_profile(&p, Format::Text), "n0: leaf(A:3);\nroot = n0;\n");
    }

    #[test]
    fn dot_marks_chosen_edges() {
        let dot = serialize_profile(&s_box2(), Format::Dot);
        assert_eq!(dot.matches("shape=circle").count(), 2);
        assert_eq!(dot.matches("shape=box").count(), 2);
        let double: Vec<&str> = dot.lines().filter(|l| l.contains("black:invis:black")).collect();
        assert_eq!(double.len(), 2);
        assert!(double.iter().all(|l| l.contains("label=\"2\"")));
    }
}

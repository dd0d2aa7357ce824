//! Line-oriented parser for `.ta` model files.
//!
//! A file declares one network: a `system` name, shared `channel`s and
//! `var`s, one or more `automaton` blocks (each with `clock`, `init`,
//! `inv`, and `edge` lines), and trailing `query` lines. `#` starts a
//! comment anywhere on a line. Locations are introduced implicitly by the
//! first line that mentions them; channels, variables, and clocks must be
//! declared before use. Query predicates may reference any automaton, so
//! they are resolved after the whole file has been read.

use crate::model::{
    self, Automaton, ClockDecl, Cmp, Edge, GuardAtom, Network, Predicate, Query, QueryKind, Sync,
    Update, VarDecl,
};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("{0}")]
pub struct ParseError(pub String);

fn fail<T>(line: usize, msg: impl Into<String>) -> Result<T, ParseError> {
    Err(ParseError(format!("line {line}: {}", msg.into())))
}

fn ident_ok(s: &str) -> bool {
    let mut chars = s.chars();
    matches!(chars.next(), Some(c) if c.is_ascii_alphabetic() || c == '_')
        && chars.all(|c| c.is_ascii_alphanumeric() || c == '_')
}

fn parse_cmp(line: usize, tok: &str) -> Result<Cmp, ParseError> {
    match tok {
        "<=" => Ok(Cmp::Le),
        ">=" => Ok(Cmp::Ge),
        "==" => Ok(Cmp::Eq),
        "<" | ">" => fail(line, format!("strict comparison `{tok}` is not supported; use <= or >=")),
        "!=" => fail(line, "`!=` is not supported; negate an `==` atom instead"),
        other => fail(line, format!("expected a comparison (<=, >=, ==), found `{other}`")),
    }
}

fn parse_int(line: usize, tok: &str, what: &str) -> Result<i64, ParseError> {
    tok.parse::<i64>()
        .map_err(|_| ParseError(format!("line {line}: {what} `{tok}` is not an integer")))
}

/// An automaton while its block is still open: locations intern in first
/// mention order, invariants stay raw until the block closes.
struct AutomatonBuilder {
    name: String,
    clocks: Vec<ClockDecl>,
    locations: Vec<String>,
    init: Option<usize>,
    raw_invariants: Vec<(usize, usize, i64)>,
    edges: Vec<Edge>,
    decl_line: usize,
}

impl AutomatonBuilder {
    fn new(name: String, decl_line: usize) -> Self {
        Self {
            name,
            clocks: Vec::new(),
            locations: Vec::new(),
            init: None,
            raw_invariants: Vec::new(),
            edges: Vec::new(),
            decl_line,
        }
    }

    fn location(&mut self, name: &str) -> usize {
        match self.locations.iter().position(|l| l == name) {
            Some(i) => i,
            None => {
                self.locations.push(name.to_string());
                self.locations.len() - 1
            }
        }
    }

    fn clock(&self, name: &str) -> Option<usize> {
        self.clocks.iter().position(|c| c.name == name)
    }

    fn finish(self) -> Result<Automaton, ParseError> {
        let Some(init) = self.init else {
            return fail(
                self.decl_line,
                format!("automaton `{}` never declares an `init` location", self.name),
            );
        };
        let mut invariants = vec![Vec::new(); self.locations.len()];
        for (loc, clock, bound) in self.raw_invariants {
            invariants[loc].push((clock, bound));
        }
        Ok(Automaton {
            name: self.name,
            clocks: self.clocks,
            locations: self.locations,
            init,
            invariants,
            edges: self.edges,
        })
    }
}

struct NetworkBuilder {
    name: Option<String>,
    channels: Vec<String>,
    vars: Vec<VarDecl>,
    automata: Vec<Automaton>,
    current: Option<AutomatonBuilder>,
    // (line, query name, remainder) — predicates resolve after the file ends.
    pending_queries: Vec<(usize, String, String)>,
}

pub fn parse_network(src: &str) -> Result<Network, ParseError> {
    let mut b = NetworkBuilder {
        name: None,
        channels: Vec::new(),
        vars: Vec::new(),
        automata: Vec::new(),
        current: None,
        pending_queries: Vec::new(),
    };

    for (idx, raw) in src.lines().enumerate() {
        let line = idx + 1;
        let text = raw.split('#').next().unwrap_or("").trim();
        if text.is_empty() {
            continue;
        }
        let tokens: Vec<&str> = text.split_whitespace().collect();
        let keyword = tokens[0];
        let rest = &tokens[1..];
        if b.name.is_none() && keyword != "system" {
            return fail(line, "the file must start with a `system NAME` line");
        }
        match keyword {
            "system" => {
                if b.name.is_some() {
                    return fail(line, "`system` may only appear once");
                }
                let [name] = rest else {
                    return fail(line, "usage: system NAME");
                };
                b.name = Some(name.to_string());
            }
            "channel" => {
                let [name] = rest else {
                    return fail(line, "usage: channel NAME");
                };
                if !ident_ok(name) {
                    return fail(line, format!("`{name}` is not a valid channel name"));
                }
                b.channels.push(name.to_string());
            }
            "var" => {
                let [name, min, max, kw, init] = rest else {
                    return fail(line, "usage: var NAME MIN MAX init VALUE");
                };
                if !ident_ok(name) {
                    return fail(line, format!("`{name}` is not a valid variable name"));
                }
                if *kw != "init" {
                    return fail(line, "usage: var NAME MIN MAX init VALUE");
                }
                b.vars.push(VarDecl {
                    name: name.to_string(),
                    min: parse_int(line, min, "minimum")?,
                    max: parse_int(line, max, "maximum")?,
                    init: parse_int(line, init, "initial value")?,
                });
            }
            "automaton" => {
                let [name] = rest else {
                    return fail(line, "usage: automaton NAME");
                };
                if !ident_ok(name) {
                    return fail(line, format!("`{name}` is not a valid automaton name"));
                }
                if let Some(done) = b.current.take() {
                    b.automata.push(done.finish()?);
                }
                b.current = Some(AutomatonBuilder::new(name.to_string(), line));
            }
            "clock" => {
                let auto = b.current.as_mut().ok_or_else(|| {
                    ParseError(format!("line {line}: `clock` outside an automaton block"))
                })?;
                let [name, ceiling] = rest else {
                    return fail(line, "usage: clock NAME CEILING");
                };
                if !ident_ok(name) {
                    return fail(line, format!("`{name}` is not a valid clock name"));
                }
                auto.clocks.push(ClockDecl {
                    name: name.to_string(),
                    ceiling: parse_int(line, ceiling, "ceiling")?,
                });
            }
            "init" => {
                let auto = b.current.as_mut().ok_or_else(|| {
                    ParseError(format!("line {line}: `init` outside an automaton block"))
                })?;
                let [loc] = rest else {
                    return fail(line, "usage: init LOCATION");
                };
                if auto.init.is_some() {
                    return fail(line, format!("automaton `{}` already has an init", auto.name));
                }
                let loc = auto.location(loc);
                auto.init = Some(loc);
            }
            "inv" => {
                let auto = b.current.as_mut().ok_or_else(|| {
                    ParseError(format!("line {line}: `inv` outside an automaton block"))
                })?;
                let [loc, clock, cmp, bound] = rest else {
                    return fail(line, "usage: inv LOCATION CLOCK <= BOUND");
                };
                if *cmp != "<=" {
                    return fail(line, "location invariants must be upper bounds (`clock <= c`)");
                }
                let Some(clock) = auto.clock(clock) else {
                    return fail(line, format!("unknown clock `{clock}` in automaton `{}`", auto.name));
                };
                let bound = parse_int(line, bound, "invariant bound")?;
                let loc = auto.location(loc);
                auto.raw_invariants.push((loc, clock, bound));
            }
            "edge" => {
                let channels = &b.channels;
                let vars = &b.vars;
                let auto = b.current.as_mut().ok_or_else(|| {
                    ParseError(format!("line {line}: `edge` outside an automaton block"))
                })?;
                let edge = parse_edge(line, rest, auto, channels, vars)?;
                auto.edges.push(edge);
            }
            "query" => {
                if rest.len() < 2 {
                    return fail(line, "usage: query NAME deadlock_free|safety PRED|reachable PRED");
                }
                let name = rest[0].to_string();
                let remainder = rest[1..].join(" ");
                b.pending_queries.push((line, name, remainder));
            }
            other => {
                return fail(line, format!("unknown directive `{other}`"));
            }
        }
    }

    if let Some(done) = b.current.take() {
        b.automata.push(done.finish()?);
    }
    let Some(name) = b.name else {
        return fail(1, "empty file; expected a `system NAME` line");
    };

    let mut net = Network {
        name,
        channels: b.channels,
        vars: b.vars,
        automata: b.automata,
        queries: Vec::new(),
    };

    for (line, name, remainder) in b.pending_queries {
        let mut words = remainder.splitn(2, ' ');
        let kind_word = words.next().unwrap_or("");
        let predicate_src = words.next().unwrap_or("").trim();
        let kind = match kind_word {
            "deadlock_free" => {
                if !predicate_src.is_empty() {
                    return fail(line, "`deadlock_free` takes no predicate");
                }
                QueryKind::DeadlockFree
            }
            "safety" => QueryKind::Safety(parse_predicate_in(line, predicate_src, &net)?),
            "reachable" => QueryKind::Reachable(parse_predicate_in(line, predicate_src, &net)?),
            other => {
                return fail(
                    line,
                    format!("unknown query kind `{other}`; expected deadlock_free, safety, or reachable"),
                );
            }
        };
        net.queries.push(Query { name, kind });
    }

    model::validate(&net).map_err(|e| ParseError(e.0))?;
    Ok(net)
}

fn parse_edge(
    line: usize,
    rest: &[&str],
    auto: &mut AutomatonBuilder,
    channels: &[String],
    vars: &[VarDecl],
) -> Result<Edge, ParseError> {
    if rest.len() < 2 {
        return fail(line, "usage: edge FROM TO [guard ...] [sync CHAN!|CHAN?] [do ...]");
    }
    let from = auto.location(rest[0]);
    let to = auto.location(rest[1]);

    // Split the remaining tokens into the guard / sync / do sections, which
    // must appear in that order when present.
    let mut sections: Vec<(&str, Vec<&str>)> = Vec::new();
    for &tok in &rest[2..] {
        match tok {
            "guard" | "sync" | "do" => sections.push((tok, Vec::new())),
            _ => match sections.last_mut() {
                Some((_, body)) => body.push(tok),
                None => return fail(line, format!("unexpected `{tok}`; expected guard, sync, or do")),
            },
        }
    }
    let order = ["guard", "sync", "do"];
    let mut last = 0;
    for (kw, _) in &sections {
        let pos = order.iter().position(|o| o == kw).unwrap();
        if pos < last {
            return fail(line, "edge sections must appear in guard, sync, do order");
        }
        if pos == last && sections.iter().filter(|(k, _)| k == kw).count() > 1 {
            return fail(line, format!("duplicate `{kw}` section"));
        }
        last = pos;
    }

    let mut guards = Vec::new();
    let mut sync = Sync::None;
    let mut updates = Vec::new();

    for (kw, body) in sections {
        match kw {
            "guard" => {
                let joined = body.join(" ");
                if joined.is_empty() {
                    return fail(line, "`guard` needs at least one atom");
                }
                for atom in joined.split("&&") {
                    let parts: Vec<&str> = atom.split_whitespace().collect();
                    let [name, cmp, value] = parts[..] else {
                        return fail(line, format!("cannot read guard atom `{}`", atom.trim()));
                    };
                    let cmp = parse_cmp(line, cmp)?;
                    let value = parse_int(line, value, "guard constant")?;
                    if let Some(clock) = auto.clock(name) {
                        guards.push(GuardAtom::Clock { clock, cmp, bound: value });
                    } else if let Some(var) = vars.iter().position(|v| v.name == name) {
                        guards.push(GuardAtom::Var { var, cmp, value });
                    } else {
                        return fail(line, format!("`{name}` is neither a clock here nor a variable"));
                    }
                }
            }
            "sync" => {
                let [tok] = body[..] else {
                    return fail(line, "usage: sync CHANNEL! or sync CHANNEL?");
                };
                let (name, send) = if let Some(n) = tok.strip_suffix('!') {
                    (n, true)
                } else if let Some(n) = tok.strip_suffix('?') {
                    (n, false)
                } else {
                    return fail(line, "a sync must end in `!` (send) or `?` (receive)");
                };
                let Some(c) = channels.iter().position(|c| c == name) else {
                    return fail(line, format!("undeclared channel `{name}`"));
                };
                sync = if send { Sync::Send(c) } else { Sync::Recv(c) };
            }
            "do" => {
                let joined = body.join(" ");
                if joined.is_empty() {
                    return fail(line, "`do` needs at least one assignment");
                }
                for asn in joined.split(',') {
                    let parts: Vec<&str> = asn.split_whitespace().collect();
                    let [name, ":=", value] = parts[..] else {
                        return fail(line, format!("cannot read assignment `{}`", asn.trim()));
                    };
                    let value = parse_int(line, value, "assigned value")?;
                    if let Some(clock) = auto.clock(name) {
                        if value != 0 {
                            return fail(line, format!("clock `{name}` can only be reset to 0"));
                        }
                        updates.push(Update::ResetClock { clock });
                    } else if let Some(var) = vars.iter().position(|v| v.name == name) {
                        updates.push(Update::SetVar { var, value });
                    } else {
                        return fail(line, format!("`{name}` is neither a clock here nor a variable"));
                    }
                }
            }
            _ => unreachable!(),
        }
    }

    Ok(Edge { from, to, guards, sync, updates })
}

// ---------------------------------------------------------------------------
// Predicate expressions
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, PartialEq, Eq)]
enum Tok {
    LParen,
    RParen,
    Not,
    And,
    Or,
    Implies,
    At,
    Cmp(Cmp),
    Ident(String),
    Int(i64),
}

fn lex_predicate(line: usize, src: &str) -> Result<Vec<Tok>, ParseError> {
    let mut out = Vec::new();
    let chars: Vec<char> = src.chars().collect();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        match c {
            ' ' | '\t' => i += 1,
            '(' => {
                out.push(Tok::LParen);
                i += 1;
            }
            ')' => {
                out.push(Tok::RParen);
                i += 1;
            }
            '@' => {
                out.push(Tok::At);
                i += 1;
            }
            '!' => {
                if chars.get(i + 1) == Some(&'=') {
                    return fail(line, "`!=` is not supported; write `!(x == c)` instead");
                }
                out.push(Tok::Not);
                i += 1;
            }
            '&' => {
                if chars.get(i + 1) != Some(&'&') {
                    return fail(line, "single `&`; conjunction is `&&`");
                }
                out.push(Tok::And);
                i += 2;
            }
            '|' => {
                if chars.get(i + 1) != Some(&'|') {
                    return fail(line, "single `|`; disjunction is `||`");
                }
                out.push(Tok::Or);
                i += 2;
            }
            '=' => match chars.get(i + 1) {
                Some('>') => {
                    out.push(Tok::Implies);
                    i += 2;
                }
                Some('=') => {
                    out.push(Tok::Cmp(Cmp::Eq));
                    i += 2;
                }
                _ => return fail(line, "lone `=`; did you mean `==` or `=>`?"),
            },
            '<' => {
                if chars.get(i + 1) == Some(&'=') {
                    out.push(Tok::Cmp(Cmp::Le));
                    i += 2;
                } else {
                    return fail(line, "strict comparison `<` is not supported; use <=");
                }
            }
            '>' => {
                if chars.get(i + 1) == Some(&'=') {
                    out.push(Tok::Cmp(Cmp::Ge));
                    i += 2;
                } else {
                    return fail(line, "strict comparison `>` is not supported; use >=");
                }
            }
            c if c.is_ascii_digit() || c == '-' => {
                let start = i;
                i += 1;
                while i < chars.len() && chars[i].is_ascii_digit() {
                    i += 1;
                }
                let text: String = chars[start..i].iter().collect();
                out.push(Tok::Int(parse_int(line, &text, "constant")?));
            }
            c if c.is_ascii_alphabetic() || c == '_' => {
                let start = i;
                while i < chars.len()
                    && (chars[i].is_ascii_alphanumeric() || chars[i] == '_' || chars[i] == '.')
                {
                    i += 1;
                }
                let text: String = chars[start..i].iter().collect();
                out.push(Tok::Ident(text));
            }
            other => return fail(line, format!("unexpected character `{other}` in predicate")),
        }
    }
    if out.is_empty() {
        return fail(line, "this query kind needs a predicate");
    }
    Ok(out)
}

struct PredParser<'a> {
    line: usize,
    toks: Vec<Tok>,
    pos: usize,
    net: &'a Network,
}

impl<'a> PredParser<'a> {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos)
    }

    fn eat(&mut self) -> Option<Tok> {
        let t = self.toks.get(self.pos).cloned();
        if t.is_some() {
            self.pos += 1;
        }
        t
    }

    // Lowest precedence; `=>` associates to the right.
    fn implies(&mut self) -> Result<Predicate, ParseError> {
        let left = self.or()?;
        if self.peek() == Some(&Tok::Implies) {
            self.eat();
            let right = self.implies()?;
            return Ok(Predicate::Implies(Box::new(left), Box::new(right)));
        }
        Ok(left)
    }

    fn or(&mut self) -> Result<Predicate, ParseError> {
        let mut left = self.and()?;
        while self.peek() == Some(&Tok::Or) {
            self.eat();
            let right = self.and()?;
            left = Predicate::Or(Box::new(left), Box::new(right));
        }
        Ok(left)
    }

    fn and(&mut self) -> Result<Predicate, ParseError> {
        let mut left = self.unary()?;
        while self.peek() == Some(&Tok::And) {
            self.eat();
            let right = self.unary()?;
            left = Predicate::And(Box::new(left), Box::new(right));
        }
        Ok(left)
    }

    fn unary(&mut self) -> Result<Predicate, ParseError> {
        if self.peek() == Some(&Tok::Not) {
            self.eat();
            return Ok(Predicate::Not(Box::new(self.unary()?)));
        }
        self.primary()
    }

    fn primary(&mut self) -> Result<Predicate, ParseError> {
        match self.eat() {
            Some(Tok::LParen) => {
                let inner = self.implies()?;
                if self.eat() != Some(Tok::RParen) {
                    return fail(self.line, "missing `)`");
                }
                Ok(inner)
            }
            Some(Tok::Ident(name)) => self.atom(name),
            Some(other) => fail(self.line, format!("unexpected token {other:?} in predicate")),
            None => fail(self.line, "predicate ends unexpectedly"),
        }
    }

    fn atom(&mut self, name: String) -> Result<Predicate, ParseError> {
        if self.peek() == Some(&Tok::At) {
            self.eat();
            let Some(Tok::Ident(loc)) = self.eat() else {
                return fail(self.line, "`@` must be followed by a location name");
            };
            let Some(ai) = self.net.automaton_index(&name) else {
                return fail(self.line, format!("unknown automaton `{name}`"));
            };
            let Some(li) = self.net.automata[ai].location_index(&loc) else {
                return fail(self.line, format!("automaton `{name}` has no location `{loc}`"));
            };
            return Ok(Predicate::AtLoc { automaton: ai, location: li });
        }
        let Some(Tok::Cmp(cmp)) = self.eat() else {
            return fail(self.line, format!("`{name}` must be followed by `@ Loc` or a comparison"));
        };
        let Some(Tok::Int(value)) = self.eat() else {
            return fail(self.line, "a comparison needs an integer constant on the right");
        };
        if let Some((auto_name, clock_name)) = name.split_once('.') {
            let Some(ai) = self.net.automaton_index(auto_name) else {
                return fail(self.line, format!("unknown automaton `{auto_name}`"));
            };
            let Some(ci) = self.net.automata[ai].clock_index(clock_name) else {
                return fail(
                    self.line,
                    format!("automaton `{auto_name}` has no clock `{clock_name}`"),
                );
            };
            return Ok(Predicate::Clock { automaton: ai, clock: ci, cmp, value });
        }
        let Some(vi) = self.net.var_index(&name) else {
            return fail(self.line, format!("unknown variable `{name}`"));
        };
        Ok(Predicate::Var { var: vi, cmp, value })
    }
}

fn parse_predicate_in(line: usize, src: &str, net: &Network) -> Result<Predicate, ParseError> {
    let toks = lex_predicate(line, src)?;
    let mut p = PredParser { line, toks, pos: 0, net };
    let pred = p.implies()?;
    if p.pos != p.toks.len() {
        return fail(line, "trailing tokens after predicate");
    }
    Ok(pred)
}

#[cfg(test)]
mod tests {
    use super::*;

    const TINY: &str = "\
# a sender and receiver with one shared flag
system tiny
channel go
var flag 0 1 init 0

automaton left
clock x 2
init Start
inv Start x <= 2
edge Start Done guard x >= 1 sync go! do x := 0, flag := 1

automaton right
init Wait
edge Wait Got sync go?

query can-finish reachable left @ Done && flag == 1
query never-two safety flag <= 1
query alive deadlock_free
";

    #[test]
    fn parses_a_small_system() {
        let net = parse_network(TINY).expect("parse");
        assert_eq!(net.name, "tiny");
        assert_eq!(net.channels, vec!["go".to_string()]);
        assert_eq!(net.automata.len(), 2);
        let left = &net.automata[0];
        assert_eq!(left.locations, vec!["Start".to_string(), "Done".to_string()]);
        assert_eq!(left.init, 0);
        assert_eq!(left.invariants[0], vec![(0, 2)]);
        assert_eq!(left.edges[0].sync, Sync::Send(0));
        assert_eq!(
            left.edges[0].updates,
            vec![Update::ResetClock { clock: 0 }, Update::SetVar { var: 0, value: 1 }]
        );
        assert_eq!(net.queries.len(), 3);
        assert_eq!(net.queries[2].kind, QueryKind::DeadlockFree);
    }

    #[test]
    fn reports_the_offending_line_number() {
        let bad = TINY.replace("guard x >= 1", "guard x > 1");
        let err = parse_network(&bad).unwrap_err();
        assert!(err.0.starts_with("line 10:"), "got: {}", err.0);
        assert!(err.0.contains("strict comparison"), "got: {}", err.0);
    }

    #[test]
    fn rejects_unknown_names_in_predicates() {
        let bad = TINY.replace("left @ Done", "middle @ Done");
        let err = parse_network(&bad).unwrap_err();
        assert!(err.0.contains("unknown automaton `middle`"), "got: {}", err.0);
    }

    #[test]
    fn rejects_clock_resets_to_nonzero() {
        let bad = TINY.replace("do x := 0,", "do x := 2,");
        let err = parse_network(&bad).unwrap_err();
        assert!(err.0.contains("can only be reset to 0"), "got: {}", err.0);
    }

    #[test]
    fn implication_binds_weakest_and_to_the_right() {
        let net = parse_network(TINY).expect("parse");
        let pred =
            parse_predicate_in(1, "flag == 0 => flag == 1 => left @ Start || left @ Done", &net)
                .expect("predicate");
        // a => (b => (c || d))
        let Predicate::Implies(_, right) = pred else { panic!("outer implies") };
        let Predicate::Implies(_, inner) = *right else { panic!("nested implies") };
        assert!(matches!(*inner, Predicate::Or(_, _)));
    }

    #[test]
    fn negation_binds_tighter_than_conjunction() {
        let net = parse_network(TINY).expect("parse");
        let pred = parse_predicate_in(1, "!flag == 1 && left @ Start", &net).expect("predicate");
        let Predicate::And(lhs, _) = pred else { panic!("expected conjunction at top") };
        assert!(matches!(*lhs, Predicate::Not(_)));
    }

    #[test]
    fn validation_runs_after_parsing() {
        // `go` loses its receiver, which only structural validation notices.
        let bad = TINY.replace("edge Wait Got sync go?", "edge Wait Got");
        let err = parse_network(&bad).unwrap_err();
        assert!(err.0.contains("channel `go`"), "got: {}", err.0);
    }

    #[test]
    fn query_clock_constants_must_respect_the_ceiling() {
        let bad = format!("{TINY}query too-far reachable left.x >= 9\n");
        let err = parse_network(&bad).unwrap_err();
        assert!(err.0.contains("above its ceiling"), "got: {}", err.0);
    }

    #[test]
    fn missing_system_line_is_caught_first() {
        let err = parse_network("channel go\n").unwrap_err();
        assert!(err.0.contains("must start with a `system NAME`"), "got: {}", err.0);
    }
}

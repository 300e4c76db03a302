//! The rule-file format.
//!
//! ```text
//! % facts, rules, queries and named derivation scripts
//! p(a). r(b).
//! r1: p(X) -> q(X,Y,Z).
//! ?q1: q(X,Y,Z).
//! @derivation d1: r1, r1[X=a], r2.
//! ```
//!
//! Identifiers starting with an uppercase letter are variables, all others
//! are constants or predicates. Head-only variables are existential. A
//! derivation step names a rule and optionally pins some body variables; the
//! first matching trigger (in trigger order) is applied.

use std::collections::BTreeMap;
use std::fmt;

use thiserror::Error;

use crate::chase::{triggers, Derivation};
use crate::error::Error;
use crate::model::{Atom, BooleanQuery, Instance, KnowledgeBase, NullGen, Rule, Substitution, Term};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, PartialOrd, Ord)]
pub struct Pos {
    pub line: usize,
    pub col: usize,
}

impl fmt::Display for Pos {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.line, self.col)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum ParseError {
    #[error("{pos}: syntax error: {message}")]
    Syntax { pos: Pos, message: String },
    #[error("{pos}: predicate {name} has arity {found}, earlier arity {expected}")]
    ArityMismatch {
        pos: Pos,
        name: String,
        expected: usize,
        found: usize,
    },
    #[error("{pos}: rule {rule} has an empty body")]
    EmptyBody { pos: Pos, rule: String },
    #[error("{pos}: rule {rule} has an empty head")]
    EmptyHead { pos: Pos, rule: String },
    #[error("{pos}: {message}")]
    Invalid { pos: Pos, message: String },
}

/// One step of a derivation script.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ScriptStep {
    pub rule: String,
    pub bindings: Vec<(Term, Term)>,
}

/// A named derivation written as a sequence of rule applications.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DerivationScript {
    pub name: String,
    pub steps: Vec<ScriptStep>,
}

impl DerivationScript {
    /// Replays the script from the knowledge base's database.
    pub fn resolve(&self, kb: &KnowledgeBase) -> Result<Derivation, Error> {
        let db = kb.database();
        let mut d = Derivation::new(db.clone());
        let mut nulls = NullGen::after(db);
        for (n, step) in self.steps.iter().enumerate() {
            let idx = kb
                .rule_index(&step.rule)
                .ok_or_else(|| Error::UnknownRule(step.rule.clone()))?;
            let rule = &kb.rules()[idx];
            let body_vars = rule.body_variables();
            let mut seed = Substitution::new();
            for (v, t) in &step.bindings {
                if !body_vars.contains(v) {
                    return Err(Error::InvalidDerivation {
                        step: n + 1,
                        reason: format!("{v} is not a body variable of {}", rule.id()),
                    });
                }
                seed.bind(v.clone(), t.clone())?;
            }
            let hom = triggers(d.final_instance(), rule)
                .into_iter()
                .find(|h| seed.is_restriction_of(h))
                .ok_or_else(|| Error::InvalidDerivation {
                    step: n + 1,
                    reason: format!("no trigger of {} matches {seed}", rule.id()),
                })?;
            d.apply(kb.rules(), idx, &hom, &mut nulls)?;
        }
        Ok(d)
    }
}

impl fmt::Display for DerivationScript {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "@derivation {}:", self.name)?;
        for (i, s) in self.steps.iter().enumerate() {
            f.write_str(if i == 0 { " " } else { ", " })?;
            f.write_str(&s.rule)?;
            if !s.bindings.is_empty() {
                f.write_str("[")?;
                for (k, (v, t)) in s.bindings.iter().enumerate() {
                    if k > 0 {
                        f.write_str(",")?;
                    }
                    write!(f, "{v}={t}")?;
                }
                f.write_str("]")?;
            }
        }
        f.write_str(".")
    }
}

/// A parsed rule file.
#[derive(Clone, Debug, Default)]
pub struct RuleDocument {
    pub facts: Vec<Atom>,
    pub rules: Vec<Rule>,
    pub queries: Vec<BooleanQuery>,
    pub derivations: Vec<DerivationScript>,
    /// Start position of every statement, by kind and index.
    pub positions: BTreeMap<(Kind, usize), Pos>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum Kind {
    Fact,
    Rule,
    Query,
    Derivation,
}

impl PartialEq for RuleDocument {
    fn eq(&self, other: &Self) -> bool {
        self.facts == other.facts
            && self.rules == other.rules
            && self.queries == other.queries
            && self.derivations == other.derivations
    }
}

impl RuleDocument {
    pub fn database(&self) -> Instance {
        Instance::from_atoms(self.facts.iter().cloned()).expect("facts are ground")
    }

    pub fn knowledge_base(&self) -> Result<KnowledgeBase, Error> {
        KnowledgeBase::new(self.database(), self.rules.clone())
    }

    pub fn query(&self, name: &str) -> Option<&BooleanQuery> {
        self.queries.iter().find(|q| q.name == name)
    }

    pub fn derivation(&self, name: &str) -> Option<&DerivationScript> {
        self.derivations.iter().find(|d| d.name == name)
    }
}

impl fmt::Display for RuleDocument {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let sections: [Vec<String>; 4] = [
            self.facts.iter().map(|a| format!("{a}.")).collect(),
            self.rules.iter().map(ToString::to_string).collect(),
            self.queries.iter().map(ToString::to_string).collect(),
            self.derivations.iter().map(ToString::to_string).collect(),
        ];
        let mut first = true;
        for lines in sections.iter().filter(|s| !s.is_empty()) {
            if !first {
                writeln!(f)?;
            }
            first = false;
            for l in lines {
                writeln!(f, "{l}")?;
            }
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
enum Tok {
    Ident(String),
    Null(u64),
    LParen,
    RParen,
    LBracket,
    RBracket,
    Comma,
    Dot,
    Colon,
    Arrow,
    Question,
    At,
    Eq,
}

impl fmt::Display for Tok {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Tok::Ident(s) => write!(f, "`{s}`"),
            Tok::Null(k) => write!(f, "`_:n{k}`"),
            Tok::LParen => f.write_str("`(`"),
            Tok::RParen => f.write_str("`)`"),
            Tok::LBracket => f.write_str("`[`"),
            Tok::RBracket => f.write_str("`]`"),
            Tok::Comma => f.write_str("`,`"),
            Tok::Dot => f.write_str("`.`"),
            Tok::Colon => f.write_str("`:`"),
            Tok::Arrow => f.write_str("`->`"),
            Tok::Question => f.write_str("`?`"),
            Tok::At => f.write_str("`@`"),
            Tok::Eq => f.write_str("`=`"),
        }
    }
}

fn syntax(pos: Pos, message: impl Into<String>) -> ParseError {
    ParseError::Syntax {
        pos,
        message: message.into(),
    }
}

fn lex(text: &str) -> Result<Vec<(Tok, Pos)>, ParseError> {
    let mut out = Vec::new();
    let chars: Vec<char> = text.chars().collect();
    let (mut i, mut line, mut col) = (0, 1, 1);
    while i < chars.len() {
        let c = chars[i];
        let pos = Pos { line, col };
        let mut adv = 1;
        match c {
            '\n' => {
                line += 1;
                col = 0;
            }
            c if c.is_whitespace() => {}
            '%' => {
                while i + adv < chars.len() && chars[i + adv] != '\n' {
                    adv += 1;
                }
            }
            '(' => out.push((Tok::LParen, pos)),
            ')' => out.push((Tok::RParen, pos)),
            '[' => out.push((Tok::LBracket, pos)),
            ']' => out.push((Tok::RBracket, pos)),
            ',' => out.push((Tok::Comma, pos)),
            '.' => out.push((Tok::Dot, pos)),
            ':' => out.push((Tok::Colon, pos)),
            '?' => out.push((Tok::Question, pos)),
            '@' => out.push((Tok::At, pos)),
            '=' => out.push((Tok::Eq, pos)),
            '-' if chars.get(i + 1) == Some(&'>') => {
                out.push((Tok::Arrow, pos));
                adv = 2;
            }
            '_' if chars.get(i + 1) == Some(&':') && chars.get(i + 2) == Some(&'n') => {
                let start = i + 3;
                let mut end = start;
                while end < chars.len() && chars[end].is_ascii_digit() {
                    end += 1;
                }
                let digits: String = chars[start..end].iter().collect();
                let k = digits
                    .parse::<u64>()
                    .map_err(|_| syntax(pos, "malformed null, expected `_:n<number>`"))?;
                out.push((Tok::Null(k), pos));
                adv = end - i;
            }
            c if c.is_alphanumeric() => {
                let mut end = i;
                while end < chars.len() && (chars[end].is_alphanumeric() || chars[end] == '_') {
                    end += 1;
                }
                out.push((Tok::Ident(chars[i..end].iter().collect()), pos));
                adv = end - i;
            }
            c => return Err(syntax(pos, format!("unexpected character `{c}`"))),
        }
        i += adv;
        col += adv;
    }
    Ok(out)
}

fn is_variable_name(s: &str) -> bool {
    s.chars().next().is_some_and(char::is_uppercase)
}

struct Parser {
    toks: Vec<(Tok, Pos)>,
    i: usize,
    end: Pos,
    arities: BTreeMap<String, usize>,
}

impl Parser {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.i).map(|(t, _)| t)
    }

    fn peek_at(&self, k: usize) -> Option<&Tok> {
        self.toks.get(self.i + k).map(|(t, _)| t)
    }

    fn pos(&self) -> Pos {
        self.toks.get(self.i).map_or(self.end, |(_, p)| *p)
    }

    fn bump(&mut self) -> Option<Tok> {
        let t = self.toks.get(self.i).map(|(t, _)| t.clone());
        self.i += 1;
        t
    }

    fn expect(&mut self, want: Tok) -> Result<(), ParseError> {
        let pos = self.pos();
        match self.bump() {
            Some(t) if t == want => Ok(()),
            Some(t) => Err(syntax(pos, format!("expected {want}, found {t}"))),
            None => Err(syntax(pos, format!("expected {want}, found end of input"))),
        }
    }

    fn ident(&mut self, what: &str) -> Result<String, ParseError> {
        let pos = self.pos();
        match self.bump() {
            Some(Tok::Ident(s)) => Ok(s),
            Some(t) => Err(syntax(pos, format!("expected {what}, found {t}"))),
            None => Err(syntax(pos, format!("expected {what}, found end of input"))),
        }
    }

    fn term(&mut self) -> Result<Term, ParseError> {
        let pos = self.pos();
        match self.bump() {
            Some(Tok::Ident(s)) if is_variable_name(&s) => Ok(Term::var(&s)),
            Some(Tok::Ident(s)) => Ok(Term::constant(&s)),
            Some(Tok::Null(k)) => Ok(Term::null(k)),
            Some(t) => Err(syntax(pos, format!("expected a term, found {t}"))),
            None => Err(syntax(pos, "expected a term, found end of input")),
        }
    }

    fn atom(&mut self) -> Result<(Atom, Pos), ParseError> {
        let pos = self.pos();
        let name = self.ident("a predicate")?;
        if is_variable_name(&name) {
            return Err(syntax(pos, format!("predicate `{name}` must not start uppercase")));
        }
        let mut args = Vec::new();
        if self.peek() == Some(&Tok::LParen) {
            self.bump();
            loop {
                args.push(self.term()?);
                match self.peek() {
                    Some(Tok::Comma) => {
                        self.bump();
                    }
                    _ => break,
                }
            }
            self.expect(Tok::RParen)?;
        }
        match self.arities.get(&name) {
            Some(&n) if n != args.len() => {
                return Err(ParseError::ArityMismatch {
                    pos,
                    name,
                    expected: n,
                    found: args.len(),
                })
            }
            Some(_) => {}
            None => {
                self.arities.insert(name.clone(), args.len());
            }
        }
        Ok((Atom::new(&name, args), pos))
    }

    /// A possibly empty comma-separated atom list, stopping before `stop`.
    fn atoms(&mut self, stop: &Tok) -> Result<Vec<(Atom, Pos)>, ParseError> {
        let mut out = Vec::new();
        if self.peek() == Some(stop) {
            return Ok(out);
        }
        loop {
            out.push(self.atom()?);
            if self.peek() == Some(&Tok::Comma) {
                self.bump();
            } else {
                return Ok(out);
            }
        }
    }
}

fn reject_nulls(atoms: &[(Atom, Pos)]) -> Result<(), ParseError> {
    match atoms.iter().find(|(a, _)| a.has_nulls()) {
        Some((a, pos)) => Err(syntax(*pos, format!("nulls are not allowed in {a}"))),
        None => Ok(()),
    }
}

/// Parses a rule file.
pub fn parse_document(text: &str) -> Result<RuleDocument, ParseError> {
    let toks = lex(text)?;
    let end = Pos {
        line: text.lines().count().max(1),
        col: text.lines().last().map_or(1, |l| l.chars().count() + 1),
    };
    let mut p = Parser {
        toks,
        i: 0,
        end,
        arities: BTreeMap::new(),
    };
    let mut doc = RuleDocument::default();
    while p.peek().is_some() {
        let start = p.pos();
        match (p.peek(), p.peek_at(1)) {
            (Some(Tok::Question), _) => {
                p.bump();
                let name = p.ident("a query name")?;
                p.expect(Tok::Colon)?;
                let atoms = p.atoms(&Tok::Dot)?;
                p.expect(Tok::Dot)?;
                reject_nulls(&atoms)?;
                if doc.query(&name).is_some() {
                    return Err(ParseError::Invalid {
                        pos: start,
                        message: format!("duplicate query {name}"),
                    });
                }
                let q = BooleanQuery::new(&name, atoms.into_iter().map(|(a, _)| a).collect())
                    .map_err(|e| ParseError::Invalid {
                        pos: start,
                        message: e.to_string(),
                    })?;
                doc.positions.insert((Kind::Query, doc.queries.len()), start);
                doc.queries.push(q);
            }
            (Some(Tok::At), _) => {
                p.bump();
                let kw = p.ident("`derivation`")?;
                if kw != "derivation" {
                    return Err(syntax(start, format!("unknown directive @{kw}")));
                }
                let name = p.ident("a derivation name")?;
                p.expect(Tok::Colon)?;
                let mut steps = Vec::new();
                while p.peek() != Some(&Tok::Dot) {
                    if !steps.is_empty() {
                        p.expect(Tok::Comma)?;
                    }
                    let rule = p.ident("a rule name")?;
                    let mut bindings = Vec::new();
                    if p.peek() == Some(&Tok::LBracket) {
                        p.bump();
                        loop {
                            let vpos = p.pos();
                            let v = p.term()?;
                            if !v.is_variable() {
                                return Err(syntax(vpos, "expected a variable"));
                            }
                            p.expect(Tok::Eq)?;
                            let tpos = p.pos();
                            let t = p.term()?;
                            if t.is_variable() {
                                return Err(syntax(tpos, "expected a constant or null"));
                            }
                            bindings.push((v, t));
                            if p.peek() == Some(&Tok::Comma) {
                                p.bump();
                            } else {
                                break;
                            }
                        }
                        p.expect(Tok::RBracket)?;
                    }
                    steps.push(ScriptStep { rule, bindings });
                }
                p.expect(Tok::Dot)?;
                if doc.derivation(&name).is_some() {
                    return Err(ParseError::Invalid {
                        pos: start,
                        message: format!("duplicate derivation {name}"),
                    });
                }
                doc.positions
                    .insert((Kind::Derivation, doc.derivations.len()), start);
                doc.derivations.push(DerivationScript { name, steps });
            }
            (Some(Tok::Ident(_)), Some(Tok::Colon)) => {
                let name = p.ident("a rule name")?;
                p.bump();
                let body = p.atoms(&Tok::Arrow)?;
                p.expect(Tok::Arrow)?;
                let head = p.atoms(&Tok::Dot)?;
                p.expect(Tok::Dot)?;
                reject_nulls(&body)?;
                reject_nulls(&head)?;
                if body.is_empty() {
                    return Err(ParseError::EmptyBody {
                        pos: start,
                        rule: name,
                    });
                }
                if head.is_empty() {
                    return Err(ParseError::EmptyHead {
                        pos: start,
                        rule: name,
                    });
                }
                if doc.rules.iter().any(|r| r.id() == name) {
                    return Err(ParseError::Invalid {
                        pos: start,
                        message: format!("duplicate rule {name}"),
                    });
                }
                let rule = Rule::new(
                    &name,
                    body.into_iter().map(|(a, _)| a).collect(),
                    head.into_iter().map(|(a, _)| a).collect(),
                )
                .map_err(|e| ParseError::Invalid {
                    pos: start,
                    message: e.to_string(),
                })?;
                doc.positions.insert((Kind::Rule, doc.rules.len()), start);
                doc.rules.push(rule);
            }
            (Some(Tok::Ident(_)), _) => {
                let (atom, pos) = p.atom()?;
                p.expect(Tok::Dot)?;
                if atom.args.iter().any(|t| !t.is_constant()) {
                    return Err(syntax(pos, format!("fact {atom} must be ground")));
                }
                if !doc.facts.contains(&atom) {
                    doc.positions.insert((Kind::Fact, doc.facts.len()), start);
                    doc.facts.push(atom);
                }
            }
            (Some(t), _) => {
                let msg = format!("expected a statement, found {t}");
                return Err(syntax(start, msg));
            }
            (None, _) => unreachable!(),
        }
    }
    Ok(doc)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_rule_with_existentials() {
        let doc = parse_document("r1: p(X) -> q(X,Y,Z).").unwrap();
        let r = &doc.rules[0];
        assert_eq!(r.id(), "r1");
        assert_eq!(r.frontier().len(), 1);
        assert_eq!(r.existentials(), &[Term::var("Y"), Term::var("Z")]);
    }

    #[test]
    fn parses_facts() {
        let doc = parse_document("p(a). r(b). % the database\n").unwrap();
        assert_eq!(doc.facts.len(), 2);
        assert_eq!(doc.database().len(), 2);
    }

    #[test]
    fn empty_sides() {
        assert!(matches!(
            parse_document("r: p(X) -> ."),
            Err(ParseError::EmptyHead { .. })
        ));
        assert!(matches!(
            parse_document("r: -> p(a)."),
            Err(ParseError::EmptyBody { .. })
        ));
    }

    #[test]
    fn arity_mismatch_is_located() {
        let err = parse_document("p(a).\nr: p(X,Y) -> q(X).").unwrap_err();
        match err {
            ParseError::ArityMismatch { pos, .. } => assert_eq!(pos, Pos { line: 2, col: 4 }),
            e => panic!("unexpected {e}"),
        }
    }

    #[test]
    fn syntax_error_position() {
        let err = parse_document("p(a).\n  q(b)").unwrap_err();
        match err {
            ParseError::Syntax { pos, .. } => assert_eq!(pos.line, 2),
            e => panic!("unexpected {e}"),
        }
        assert!(matches!(
            parse_document("p(X)."),
            Err(ParseError::Syntax { .. })
        ));
        assert!(matches!(
            parse_document("p(a) $"),
            Err(ParseError::Syntax { .. })
        ));
    }

    #[test]
    fn round_trip() {
        let text = "p(a). r(b).\nr1: p(X) -> q(X,Y,Z).\nr4: q(X,Y,Z), s(W,U,V) -> t(X,Y,W,U,O).\n\
                    ?q1: q(X,Y,Z).\n@derivation d: r1, r1[X=a].\n@derivation e: .\n";
        let doc = parse_document(text).unwrap();
        let printed = doc.to_string();
        let again = parse_document(&printed).unwrap();
        assert_eq!(doc, again);
        assert_eq!(printed, again.to_string());
    }

    #[test]
    fn scripts_resolve_to_first_matching_trigger() {
        let doc = parse_document(
            "p(a). p(b).\nr1: p(X) -> q(X,Y).\n@derivation d: r1, r1[X=b], r1[X=a].",
        )
        .unwrap();
        let kb = doc.knowledge_base().unwrap();
        let d = doc.derivations[0].resolve(&kb).unwrap();
        assert_eq!(d.len(), 3);
        let x = Term::var("X");
        assert_eq!(d.step(1).trigger.hom.get(&x), Some(&Term::constant("a")));
        assert_eq!(d.step(2).trigger.hom.get(&x), Some(&Term::constant("b")));
        d.validate(kb.rules()).unwrap();

        let bad = parse_document("p(a).\nr1: p(X) -> q(X,Y).\n@derivation d: r1[X=c].").unwrap();
        let kb = bad.knowledge_base().unwrap();
        assert!(bad.derivations[0].resolve(&kb).is_err());
    }
}

//! Rule text format.
//!
//! ```text
//! rule    := term (("and" | "or") term)*
//! term    := "exists" "(" clause ")"
//!          | "count" "(" clause ")" "==" INT
//!          | "forall" "(" clause "->" clause ")"
//!          | "exists2" "(" "A" ":" clause "," REL "," "B" ":" clause ")"
//! clause  := [ IDENT "=" IDENT ("&" IDENT "=" IDENT)* ]
//! ```
//! `#` starts a comment running to the end of the line.

use super::{Clause, Literal, RuleError, RuleSpec};
use crate::scene::Relation;

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Ident(String),
    Int(usize),
    LParen,
    RParen,
    Eq,
    EqEq,
    Amp,
    Arrow,
    Comma,
    Colon,
    End,
}

impl Tok {
    fn describe(&self) -> String {
        match self {
            Tok::Ident(s) => format!("`{s}`"),
            Tok::Int(n) => format!("`{n}`"),
            Tok::LParen => "`(`".into(),
            Tok::RParen => "`)`".into(),
            Tok::Eq => "`=`".into(),
            Tok::EqEq => "`==`".into(),
            Tok::Amp => "`&`".into(),
            Tok::Arrow => "`->`".into(),
            Tok::Comma => "`,`".into(),
            Tok::Colon => "`:`".into(),
            Tok::End => "end of input".into(),
        }
    }
}

fn err(position: usize, message: impl Into<String>) -> RuleError {
    RuleError::Parse { position, message: message.into() }
}

fn lex(src: &str) -> Result<Vec<(usize, Tok)>, RuleError> {
    let bytes = src.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i];
        let start = i;
        match c {
            b' ' | b'\t' | b'\r' | b'\n' => {
                i += 1;
                continue;
            }
            b'#' => {
                while i < bytes.len() && bytes[i] != b'\n' {
                    i += 1;
                }
                continue;
            }
            b'(' => out.push((start, Tok::LParen)),
            b')' => out.push((start, Tok::RParen)),
            b'&' => out.push((start, Tok::Amp)),
            b',' => out.push((start, Tok::Comma)),
            b':' => out.push((start, Tok::Colon)),
            b'=' => {
                if bytes.get(i + 1) == Some(&b'=') {
                    i += 1;
                    out.push((start, Tok::EqEq));
                } else {
                    out.push((start, Tok::Eq));
                }
            }
            b'-' if bytes.get(i + 1) == Some(&b'>') => {
                i += 1;
                out.push((start, Tok::Arrow));
            }
            b'0'..=b'9' => {
                while i + 1 < bytes.len() && bytes[i + 1].is_ascii_digit() {
                    i += 1;
                }
                let n = src[start..=i].parse().map_err(|_| err(start, "integer out of range"))?;
                out.push((start, Tok::Int(n)));
            }
            c if c.is_ascii_alphabetic() || c == b'_' => {
                while i + 1 < bytes.len() && (bytes[i + 1].is_ascii_alphanumeric() || bytes[i + 1] == b'_') {
                    i += 1;
                }
                out.push((start, Tok::Ident(src[start..=i].to_string())));
            }
            _ => {
                let ch = src[start..].chars().next().unwrap_or('?');
                return Err(err(start, format!("unexpected character `{ch}`")));
            }
        }
        i += 1;
    }
    out.push((src.len(), Tok::End));
    Ok(out)
}

struct Parser {
    toks: Vec<(usize, Tok)>,
    at: usize,
}

enum Term {
    Exists(Clause),
    Other(RuleSpec),
}

impl Parser {
    fn peek(&self) -> &Tok {
        &self.toks[self.at].1
    }

    fn pos(&self) -> usize {
        self.toks[self.at].0
    }

    fn bump(&mut self) -> Tok {
        let t = self.toks[self.at].1.clone();
        if self.at + 1 < self.toks.len() {
            self.at += 1;
        }
        t
    }

    fn expect(&mut self, want: Tok) -> Result<(), RuleError> {
        if *self.peek() == want {
            self.bump();
            Ok(())
        } else {
            Err(err(self.pos(), format!("expected {}, found {}", want.describe(), self.peek().describe())))
        }
    }

    fn ident(&mut self, what: &str) -> Result<String, RuleError> {
        match self.peek().clone() {
            Tok::Ident(s) => {
                self.bump();
                Ok(s)
            }
            t => Err(err(self.pos(), format!("expected {what}, found {}", t.describe()))),
        }
    }

    fn keyword(&mut self, kw: &str) -> Result<(), RuleError> {
        let pos = self.pos();
        let got = self.ident(&format!("`{kw}`"))?;
        if got == kw {
            Ok(())
        } else {
            Err(err(pos, format!("expected `{kw}`, found `{got}`")))
        }
    }

    fn clause(&mut self) -> Result<Clause, RuleError> {
        let mut lits = Vec::new();
        if !matches!(self.peek(), Tok::Ident(_)) {
            return Ok(Clause(lits));
        }
        loop {
            let concept = self.ident("a concept name")?;
            self.expect(Tok::Eq)?;
            let value = self.ident("a value name")?;
            lits.push(Literal { concept, value });
            if *self.peek() == Tok::Amp {
                self.bump();
            } else {
                return Ok(Clause(lits));
            }
        }
    }

    fn term(&mut self) -> Result<Term, RuleError> {
        let pos = self.pos();
        let head = self.ident("`exists`, `count`, `forall` or `exists2`")?;
        self.expect(Tok::LParen)?;
        let term = match head.as_str() {
            "exists" => Term::Exists(self.clause()?),
            "count" => {
                let clause = self.clause()?;
                self.expect(Tok::RParen)?;
                self.expect(Tok::EqEq)?;
                return match self.bump() {
                    Tok::Int(count) => Ok(Term::Other(RuleSpec::Cardinality { clause, count })),
                    t => Err(err(self.toks[self.at - 1].0, format!("expected a count, found {}", t.describe()))),
                };
            }
            "forall" => {
                let antecedent = self.clause()?;
                self.expect(Tok::Arrow)?;
                let consequent = self.clause()?;
                Term::Other(RuleSpec::Universal { antecedent, consequent })
            }
            "exists2" => {
                self.keyword("A")?;
                self.expect(Tok::Colon)?;
                let a = self.clause()?;
                self.expect(Tok::Comma)?;
                let rpos = self.pos();
                let rel = self.ident("a relation name")?;
                let relation =
                    Relation::from_name(&rel).ok_or_else(|| err(rpos, format!("unknown relation `{rel}`")))?;
                self.expect(Tok::Comma)?;
                self.keyword("B")?;
                self.expect(Tok::Colon)?;
                let b = self.clause()?;
                Term::Other(RuleSpec::Relational { a, relation, b })
            }
            other => return Err(err(pos, format!("unknown quantifier `{other}`"))),
        };
        self.expect(Tok::RParen)?;
        Ok(term)
    }
}

pub fn parse_rule(src: &str) -> Result<RuleSpec, RuleError> {
    let mut p = Parser { toks: lex(src)?, at: 0 };
    let first = p.term()?;
    let mut clauses = Vec::new();
    let mut op: Option<String> = None;
    let single = match first {
        Term::Exists(c) => {
            clauses.push(c);
            None
        }
        Term::Other(rule) => Some(rule),
    };
    while let Tok::Ident(word) = p.peek().clone() {
        let pos = p.pos();
        if word != "and" && word != "or" {
            return Err(err(pos, format!("expected `and`, `or` or end of input, found `{word}`")));
        }
        if single.is_some() {
            return Err(err(pos, "only exists(...) terms can be combined with `and`/`or`"));
        }
        match &op {
            Some(o) if *o != word => return Err(err(pos, "cannot mix `and` and `or` in one rule")),
            _ => op = Some(word),
        }
        p.bump();
        let tpos = p.pos();
        match p.term()? {
            Term::Exists(c) => clauses.push(c),
            Term::Other(_) => return Err(err(tpos, "only exists(...) terms can be combined with `and`/`or`")),
        }
    }
    if *p.peek() != Tok::End {
        return Err(err(p.pos(), format!("expected end of input, found {}", p.peek().describe())));
    }
    if let Some(rule) = single {
        return Ok(rule);
    }
    Ok(match op.as_deref() {
        None => RuleSpec::Existential { clause: clauses.pop().expect("one clause") },
        Some("and") => RuleSpec::Conjunctive { clauses },
        _ => RuleSpec::Disjunctive { clauses },
    })
}

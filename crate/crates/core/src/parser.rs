//! Textual knowledge-base format.
//!
//! ```text
//! kb        := (directive | statement | comment)*
//! directive := "mode" ("plain" | "alctp" | "tcl") "."
//! statement := [prob "::"] left "<=" concept "." | assertion "."
//! left      := concept | "T(" concept ")"
//! assertion := ident ":" left | "(" ident "," ident ")" ":" ident
//! ```
//!
//! Concepts use `Top`, `Bot`, `~C`, `C & D`, `C | D`, `some R. C` and
//! `all R. C`, with `~` binding tighter than `&`, and `&` tighter than `|`.
//! Binary operators associate to the right. `#` starts a line comment.

use crate::concept::{Concept, LeftConcept, Name};
use crate::error::{Error, ParseError, Result};
use crate::kb::{Assertion, Dialect, Inclusion, KnowledgeBase, Query};
use crate::probability::Probability;

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Ident(String),
    Number(String),
    LParen,
    RParen,
    Comma,
    Colon,
    DoubleColon,
    Dot,
    Subsumed,
    Tilde,
    Amp,
    Bar,
    Eof,
}

impl Tok {
    fn lexeme(&self) -> String {
        match self {
            Tok::Ident(s) | Tok::Number(s) => format!("`{s}`"),
            Tok::LParen => "`(`".into(),
            Tok::RParen => "`)`".into(),
            Tok::Comma => "`,`".into(),
            Tok::Colon => "`:`".into(),
            Tok::DoubleColon => "`::`".into(),
            Tok::Dot => "`.`".into(),
            Tok::Subsumed => "`<=`".into(),
            Tok::Tilde => "`~`".into(),
            Tok::Amp => "`&`".into(),
            Tok::Bar => "`|`".into(),
            Tok::Eof => "end of input".into(),
        }
    }
}

#[derive(Clone, Debug)]
struct Token {
    tok: Tok,
    line: usize,
    column: usize,
}

fn lex(text: &str) -> std::result::Result<Vec<Token>, ParseError> {
    let mut out = Vec::new();
    let chars: Vec<char> = text.chars().collect();
    let (mut i, mut line, mut col) = (0usize, 1usize, 1usize);
    while i < chars.len() {
        let c = chars[i];
        let (start_line, start_col) = (line, col);
        let mut push = |tok: Tok, len: usize, i: &mut usize, col: &mut usize| {
            out.push(Token { tok, line: start_line, column: start_col });
            *i += len;
            *col += len;
        };
        match c {
            '\n' => {
                i += 1;
                line += 1;
                col = 1;
            }
            c if c.is_whitespace() => {
                i += 1;
                col += 1;
            }
            '#' => {
                while i < chars.len() && chars[i] != '\n' {
                    i += 1;
                }
            }
            '(' => push(Tok::LParen, 1, &mut i, &mut col),
            ')' => push(Tok::RParen, 1, &mut i, &mut col),
            ',' => push(Tok::Comma, 1, &mut i, &mut col),
            '.' => push(Tok::Dot, 1, &mut i, &mut col),
            '~' => push(Tok::Tilde, 1, &mut i, &mut col),
            '&' => push(Tok::Amp, 1, &mut i, &mut col),
            '|' => push(Tok::Bar, 1, &mut i, &mut col),
            ':' if chars.get(i + 1) == Some(&':') => push(Tok::DoubleColon, 2, &mut i, &mut col),
            ':' => push(Tok::Colon, 1, &mut i, &mut col),
            '<' if chars.get(i + 1) == Some(&'=') => push(Tok::Subsumed, 2, &mut i, &mut col),
            c if c.is_ascii_digit() => {
                let mut j = i;
                while j < chars.len() && chars[j].is_ascii_digit() {
                    j += 1;
                }
                // A dot directly followed by a digit continues the number.
                if j + 1 < chars.len() && chars[j] == '.' && chars[j + 1].is_ascii_digit() {
                    j += 1;
                    while j < chars.len() && chars[j].is_ascii_digit() {
                        j += 1;
                    }
                } else if j + 1 < chars.len() && chars[j] == '/' && chars[j + 1].is_ascii_digit() {
                    j += 1;
                    while j < chars.len() && chars[j].is_ascii_digit() {
                        j += 1;
                    }
                }
                let s: String = chars[i..j].iter().collect();
                push(Tok::Number(s), j - i, &mut i, &mut col);
            }
            c if c.is_alphabetic() || c == '_' => {
                let mut j = i;
                while j < chars.len() && (chars[j].is_alphanumeric() || chars[j] == '_') {
                    j += 1;
                }
                let s: String = chars[i..j].iter().collect();
                push(Tok::Ident(s), j - i, &mut i, &mut col);
            }
            other => {
                return Err(ParseError {
                    line,
                    column: col,
                    expected: "a token".into(),
                    found: format!("`{other}`"),
                })
            }
        }
    }
    out.push(Token { tok: Tok::Eof, line, column: col });
    Ok(out)
}

const KEYWORDS: [&str; 4] = ["Top", "Bot", "some", "all"];

struct Parser {
    toks: Vec<Token>,
    pos: usize,
}

impl Parser {
    fn new(text: &str) -> std::result::Result<Self, ParseError> {
        Ok(Parser { toks: lex(text)?, pos: 0 })
    }

    fn peek(&self) -> &Tok {
        &self.toks[self.pos].tok
    }

    fn peek_at(&self, k: usize) -> &Tok {
        let idx = (self.pos + k).min(self.toks.len() - 1);
        &self.toks[idx].tok
    }

    fn here(&self) -> &Token {
        &self.toks[self.pos]
    }

    fn bump(&mut self) -> Token {
        let t = self.toks[self.pos].clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn error(&self, expected: &str) -> ParseError {
        let t = self.here();
        ParseError {
            line: t.line,
            column: t.column,
            expected: expected.into(),
            found: t.tok.lexeme(),
        }
    }

    fn expect(&mut self, tok: Tok, expected: &str) -> std::result::Result<Token, ParseError> {
        if *self.peek() == tok {
            Ok(self.bump())
        } else {
            Err(self.error(expected))
        }
    }

    fn ident(&mut self, expected: &str) -> std::result::Result<Name, ParseError> {
        match self.peek() {
            Tok::Ident(s) if !KEYWORDS.contains(&s.as_str()) => {
                let n = Name::new(s);
                self.bump();
                Ok(n)
            }
            _ => Err(self.error(expected)),
        }
    }

    fn concept(&mut self) -> std::result::Result<Concept, ParseError> {
        let left = self.conjunction()?;
        if *self.peek() == Tok::Bar {
            self.bump();
            let right = self.concept()?;
            return Ok(Concept::or(left, right));
        }
        Ok(left)
    }

    fn conjunction(&mut self) -> std::result::Result<Concept, ParseError> {
        let left = self.unary()?;
        if *self.peek() == Tok::Amp {
            self.bump();
            let right = self.conjunction()?;
            return Ok(Concept::and(left, right));
        }
        Ok(left)
    }

    fn unary(&mut self) -> std::result::Result<Concept, ParseError> {
        match self.peek().clone() {
            Tok::Tilde => {
                self.bump();
                Ok(Concept::not(self.unary()?))
            }
            Tok::LParen => {
                self.bump();
                let c = self.concept()?;
                self.expect(Tok::RParen, "`)`")?;
                Ok(c)
            }
            Tok::Ident(s) => match s.as_str() {
                "Top" => {
                    self.bump();
                    Ok(Concept::Top)
                }
                "Bot" => {
                    self.bump();
                    Ok(Concept::Bottom)
                }
                "some" | "all" => {
                    self.bump();
                    let role = self.ident("a role name")?;
                    self.expect(Tok::Dot, "`.` after the role name")?;
                    let filler = Box::new(self.unary()?);
                    Ok(if s == "some" {
                        Concept::Exists(role, filler)
                    } else {
                        Concept::Forall(role, filler)
                    })
                }
                "T" if *self.peek_at(1) == Tok::LParen => {
                    Err(self.error("a concept (typicality is only allowed outermost on the left)"))
                }
                _ => {
                    self.bump();
                    Ok(Concept::Atom(Name::new(&s)))
                }
            },
            _ => Err(self.error("a concept")),
        }
    }

    fn left(&mut self) -> std::result::Result<LeftConcept, ParseError> {
        if matches!(self.peek(), Tok::Ident(s) if s == "T") && *self.peek_at(1) == Tok::LParen {
            self.bump();
            self.bump();
            let c = self.concept()?;
            self.expect(Tok::RParen, "`)` closing T(")?;
            Ok(LeftConcept::Typical(c))
        } else {
            Ok(LeftConcept::Plain(self.concept()?))
        }
    }

    fn starts_role_assertion(&self) -> bool {
        *self.peek() == Tok::LParen
            && matches!(self.peek_at(1), Tok::Ident(_))
            && *self.peek_at(2) == Tok::Comma
    }

    fn starts_concept_assertion(&self) -> bool {
        matches!(self.peek(), Tok::Ident(_)) && *self.peek_at(1) == Tok::Colon
    }

    fn role_assertion(&mut self) -> std::result::Result<Assertion, ParseError> {
        self.expect(Tok::LParen, "`(`")?;
        let subject = self.ident("an individual name")?;
        self.expect(Tok::Comma, "`,`")?;
        let object = self.ident("an individual name")?;
        self.expect(Tok::RParen, "`)`")?;
        self.expect(Tok::Colon, "`:`")?;
        let role = self.ident("a role name")?;
        Ok(Assertion::Role { role, subject, object })
    }

    fn concept_assertion(&mut self) -> std::result::Result<Assertion, ParseError> {
        let individual = self.ident("an individual name")?;
        self.expect(Tok::Colon, "`:`")?;
        let left = self.left()?;
        Ok(Assertion::Concept { left, individual })
    }
}

enum Statement {
    Mode(Dialect, usize, usize),
    Inclusion(Inclusion, usize, usize),
    Assertion(Assertion),
}

fn statement(p: &mut Parser) -> std::result::Result<Statement, ParseError> {
    let start = p.here().clone();
    if matches!(p.peek(), Tok::Ident(s) if s == "mode")
        && matches!(p.peek_at(1), Tok::Ident(_))
        && *p.peek_at(2) == Tok::Dot
    {
        p.bump();
        let at = p.here().clone();
        let dialect = match p.bump().tok {
            Tok::Ident(s) if s == "plain" => Dialect::Plain,
            Tok::Ident(s) if s == "alctp" => Dialect::AlcTp,
            Tok::Ident(s) if s == "tcl" => Dialect::Tcl,
            other => {
                return Err(ParseError {
                    line: at.line,
                    column: at.column,
                    expected: "`plain`, `alctp` or `tcl`".into(),
                    found: other.lexeme(),
                })
            }
        };
        p.expect(Tok::Dot, "`.`")?;
        return Ok(Statement::Mode(dialect, start.line, start.column));
    }
    if p.starts_role_assertion() {
        let a = p.role_assertion()?;
        p.expect(Tok::Dot, "`.` ending the statement")?;
        return Ok(Statement::Assertion(a));
    }
    if p.starts_concept_assertion() {
        let a = p.concept_assertion()?;
        p.expect(Tok::Dot, "`.` ending the statement")?;
        return Ok(Statement::Assertion(a));
    }
    let probability = if let Tok::Number(n) = p.peek().clone() {
        let num_tok = p.bump();
        let prob = Probability::parse(&n).ok_or_else(|| ParseError {
            line: num_tok.line,
            column: num_tok.column,
            expected: "a probability".into(),
            found: format!("`{n}`"),
        })?;
        p.expect(Tok::DoubleColon, "`::` after the probability")?;
        Some(prob)
    } else {
        None
    };
    let left = p.left()?;
    p.expect(Tok::Subsumed, "`<=`")?;
    let right = p.concept()?;
    p.expect(Tok::Dot, "`.` ending the statement")?;
    Ok(Statement::Inclusion(Inclusion { left, right, probability }, start.line, start.column))
}

/// Parses a knowledge base. The dialect comes from a `mode` directive, or is
/// `alctp` when probabilities appear without one, and `plain` otherwise.
pub fn parse_kb(text: &str) -> Result<KnowledgeBase> {
    let mut p = Parser::new(text)?;
    let mut dialect: Option<(Dialect, usize, usize)> = None;
    let mut inclusions = Vec::new();
    let mut abox = Vec::new();
    while *p.peek() != Tok::Eof {
        match statement(&mut p)? {
            Statement::Mode(d, line, column) => match dialect {
                Some((prev, ..)) if prev != d => {
                    return Err(Error::Dialect {
                        line,
                        column,
                        message: format!("conflicting mode `{d}` after `{prev}`"),
                    })
                }
                _ => dialect = Some((d, line, column)),
            },
            Statement::Inclusion(inc, line, column) => inclusions.push((inc, line, column)),
            Statement::Assertion(a) => abox.push(a),
        }
    }
    let any_probability = inclusions.iter().any(|(i, ..)| i.probability.is_some());
    let dialect = match dialect {
        Some((d, ..)) => d,
        None if any_probability => Dialect::AlcTp,
        None => Dialect::Plain,
    };
    for (inc, line, column) in &inclusions {
        dialect_check(dialect, inc, *line, *column)?;
    }
    let inclusions = inclusions.into_iter().map(|(i, ..)| i).collect();
    KnowledgeBase::from_parts(dialect, inclusions, abox)
}

fn dialect_check(dialect: Dialect, inc: &Inclusion, line: usize, column: usize) -> Result<()> {
    let err = |message: String| Err(Error::Dialect { line, column, message });
    match (&inc.probability, inc.left.is_typical()) {
        (Some(_), false) => err("probabilities are only allowed on typicality inclusions".into()),
        (Some(p), true) => match dialect.probability_range() {
            None => err(format!("probability {p} is not allowed in the plain dialect")),
            Some((lo, hi)) if !p.in_open_interval(&lo, &hi) => err(format!(
                "probability {p} is outside ({lo}, {hi}) required by the {dialect} dialect"
            )),
            Some(_) => Ok(()),
        },
        (None, true) if dialect == Dialect::Tcl => {
            err("typicality inclusions need a probability in the tcl dialect".into())
        }
        (None, _) => Ok(()),
    }
}

/// Parses a single query; a trailing `.` is optional.
pub fn parse_query(text: &str) -> Result<Query> {
    let mut p = Parser::new(text)?;
    let q = if p.starts_role_assertion() {
        Query::Assertion(p.role_assertion()?)
    } else if p.starts_concept_assertion() {
        Query::Assertion(p.concept_assertion()?)
    } else {
        let left = p.left()?;
        p.expect(Tok::Subsumed, "`<=`")?;
        let right = p.concept()?;
        Query::Inclusion { left, right }
    };
    if *p.peek() == Tok::Dot {
        p.bump();
    }
    if *p.peek() != Tok::Eof {
        return Err(p.error("end of query").into());
    }
    Ok(q)
}

/// Parses a bare concept, e.g. for command-line flags.
pub fn parse_concept(text: &str) -> Result<Concept> {
    let mut p = Parser::new(text)?;
    let c = p.concept()?;
    if *p.peek() != Tok::Eof {
        return Err(p.error("end of concept").into());
    }
    Ok(c)
}

/// Emits the KB in the textual format, one statement per line: the mode
/// directive (omitted for `plain`), strict inclusions, typicality inclusions
/// in their stored order, then assertions.
pub fn serialize_kb(kb: &KnowledgeBase) -> String {
    let mut out = String::new();
    if kb.dialect() != Dialect::Plain {
        out.push_str(&format!("mode {}.\n", kb.dialect()));
    }
    for inc in kb.inclusions() {
        out.push_str(&format!("{inc}.\n"));
    }
    for a in kb.abox() {
        out.push_str(&format!("{a}.\n"));
    }
    out
}

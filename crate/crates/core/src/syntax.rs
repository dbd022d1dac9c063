//! Concrete ASCII syntax.
//!
//! ```text
//! term    := choice
//! choice  := par ( "[]" choice )?
//! par     := handler ( "||" "{" events? "}" par )?
//! handler := seq ( "/>" handler )?
//! seq     := pair ( ";" seq )?
//! pair    := primary ( "%" pair )?
//! primary := event | keyword | "(" term ")" | "[[" term "]]"
//! ```
//!
//! `%` and the keywords `skipp`, `throww`, `yieldd` build compensable terms;
//! `[[ ]]` turns a compensable term into a standard one. `;`, `[]` and `||`
//! work on either sort as long as both operands agree.

use std::collections::BTreeSet;
use std::fmt::{self, Write as _};

use thiserror::Error;

use crate::operational::State;
use crate::terms::{
    desugar_keyword, CompensableTerm, Event, Keyword, StandardTerm, SyncSet, Term, RESERVED_NAMES,
};
use crate::trace::{Trace, TracePair};

const KEYWORDS: [&str; 6] = ["skip", "throw", "yield", "skipp", "throww", "yieldd"];

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ParseError {
    #[error("syntax error at {line}:{column}: {message}")]
    Syntax {
        offset: usize,
        line: usize,
        column: usize,
        message: String,
    },
    #[error("sort error at {line}:{column}: `{operator}` {message}")]
    Sort {
        offset: usize,
        line: usize,
        column: usize,
        operator: &'static str,
        message: String,
    },
}

impl ParseError {
    pub fn offset(&self) -> usize {
        match self {
            ParseError::Syntax { offset, .. } | ParseError::Sort { offset, .. } => *offset,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Tok {
    Ident(String),
    LParen,
    RParen,
    BlockOpen,
    BlockClose,
    Choice,
    Par,
    LBrace,
    RBrace,
    Comma,
    Handler,
    Semi,
    Percent,
    Eof,
}

impl fmt::Display for Tok {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Tok::Ident(name) => return write!(f, "`{name}`"),
            Tok::LParen => "`(`",
            Tok::RParen => "`)`",
            Tok::BlockOpen => "`[[`",
            Tok::BlockClose => "`]]`",
            Tok::Choice => "`[]`",
            Tok::Par => "`||`",
            Tok::LBrace => "`{`",
            Tok::RBrace => "`}`",
            Tok::Comma => "`,`",
            Tok::Handler => "`/>`",
            Tok::Semi => "`;`",
            Tok::Percent => "`%`",
            Tok::Eof => "end of input",
        };
        f.write_str(s)
    }
}

struct Parser<'s> {
    src: &'s str,
    toks: Vec<(Tok, usize)>,
    pos: usize,
}

pub fn parse(src: &str) -> Result<Term, ParseError> {
    let toks = lex(src)?;
    let mut parser = Parser { src, toks, pos: 0 };
    let term = parser.choice()?;
    match parser.peek() {
        Tok::Eof => Ok(term),
        tok => Err(parser.syntax_here(format!("unexpected {tok}"))),
    }
}

pub fn parse_standard(src: &str) -> Result<StandardTerm, ParseError> {
    match parse(src)? {
        Term::Standard(p) => Ok(p),
        Term::Compensable(_) => Err(sort_error(
            src,
            0,
            "term",
            "is compensable; a standard term is required",
        )),
    }
}

pub fn parse_compensable(src: &str) -> Result<CompensableTerm, ParseError> {
    match parse(src)? {
        Term::Compensable(pp) => Ok(pp),
        Term::Standard(_) => Err(sort_error(
            src,
            0,
            "term",
            "is standard; a compensable term is required",
        )),
    }
}

fn line_col(src: &str, offset: usize) -> (usize, usize) {
    let before = &src[..offset.min(src.len())];
    let line = before.matches('\n').count() + 1;
    let column = before
        .rfind('\n')
        .map_or(before.len(), |nl| before.len() - nl - 1)
        + 1;
    (line, column)
}

fn syntax_error(src: &str, offset: usize, message: String) -> ParseError {
    let (line, column) = line_col(src, offset);
    ParseError::Syntax {
        offset,
        line,
        column,
        message,
    }
}

fn sort_error(src: &str, offset: usize, operator: &'static str, message: &str) -> ParseError {
    let (line, column) = line_col(src, offset);
    ParseError::Sort {
        offset,
        line,
        column,
        operator,
        message: message.to_string(),
    }
}

fn lex(src: &str) -> Result<Vec<(Tok, usize)>, ParseError> {
    let bytes = src.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i];
        if c.is_ascii_whitespace() {
            i += 1;
            continue;
        }
        let two = bytes.get(i..i + 2);
        let (tok, len) = match (c, two) {
            (_, Some(b"[[")) => (Tok::BlockOpen, 2),
            (_, Some(b"]]")) => (Tok::BlockClose, 2),
            (_, Some(b"[]")) => (Tok::Choice, 2),
            (_, Some(b"||")) => (Tok::Par, 2),
            (_, Some(b"/>")) => (Tok::Handler, 2),
            (b'(', _) => (Tok::LParen, 1),
            (b')', _) => (Tok::RParen, 1),
            (b'{', _) => (Tok::LBrace, 1),
            (b'}', _) => (Tok::RBrace, 1),
            (b',', _) => (Tok::Comma, 1),
            (b';', _) => (Tok::Semi, 1),
            (b'%', _) => (Tok::Percent, 1),
            (b'a'..=b'z', _) => {
                let len = bytes[i..]
                    .iter()
                    .take_while(|b| b.is_ascii_alphanumeric() || **b == b'_' || **b == b'.')
                    .count();
                (Tok::Ident(src[i..i + len].to_string()), len)
            }
            _ => {
                let ch = src[i..].chars().next().unwrap_or('?');
                return Err(syntax_error(src, i, format!("unexpected character `{ch}`")));
            }
        };
        out.push((tok, i));
        i += len;
    }
    out.push((Tok::Eof, src.len()));
    Ok(out)
}

impl Parser<'_> {
    fn peek(&self) -> &Tok {
        &self.toks[self.pos].0
    }

    fn offset(&self) -> usize {
        self.toks[self.pos].1
    }

    fn bump(&mut self) -> (Tok, usize) {
        let tok = self.toks[self.pos].clone();
        if tok.0 != Tok::Eof {
            self.pos += 1;
        }
        tok
    }

    fn syntax_here(&self, message: String) -> ParseError {
        syntax_error(self.src, self.offset(), message)
    }

    fn expect(&mut self, want: Tok) -> Result<(), ParseError> {
        if *self.peek() == want {
            self.bump();
            Ok(())
        } else {
            Err(self.syntax_here(format!("expected {want}, found {}", self.peek())))
        }
    }

    fn choice(&mut self) -> Result<Term, ParseError> {
        let left = self.par()?;
        if *self.peek() != Tok::Choice {
            return Ok(left);
        }
        let (_, at) = self.bump();
        let right = self.choice()?;
        match (left, right) {
            (Term::Standard(p), Term::Standard(q)) => Ok(StandardTerm::choice(p, q).into()),
            (Term::Compensable(p), Term::Compensable(q)) => {
                Ok(CompensableTerm::choice(p, q).into())
            }
            _ => Err(sort_error(
                self.src,
                at,
                "[]",
                "joins a standard and a compensable operand",
            )),
        }
    }

    fn par(&mut self) -> Result<Term, ParseError> {
        let left = self.handler()?;
        if *self.peek() != Tok::Par {
            return Ok(left);
        }
        let (_, at) = self.bump();
        let x = self.sync_set()?;
        let right = self.par()?;
        match (left, right) {
            (Term::Standard(p), Term::Standard(q)) => Ok(StandardTerm::par(x, p, q).into()),
            (Term::Compensable(p), Term::Compensable(q)) => {
                Ok(CompensableTerm::par(x, p, q).into())
            }
            _ => Err(sort_error(
                self.src,
                at,
                "||",
                "joins a standard and a compensable operand",
            )),
        }
    }

    fn sync_set(&mut self) -> Result<SyncSet, ParseError> {
        self.expect(Tok::LBrace)?;
        let mut members = Vec::new();
        if *self.peek() != Tok::RBrace {
            loop {
                members.push(self.event()?);
                if *self.peek() == Tok::Comma {
                    self.bump();
                } else {
                    break;
                }
            }
        }
        self.expect(Tok::RBrace)?;
        Ok(members.into_iter().collect())
    }

    fn event(&mut self) -> Result<Event, ParseError> {
        match self.bump() {
            (Tok::Ident(name), at) => {
                if KEYWORDS.contains(&name.as_str()) || RESERVED_NAMES.contains(&name.as_str()) {
                    return Err(syntax_error(self.src, at, format!("`{name}` is reserved")));
                }
                Event::new(&name).map_err(|e| syntax_error(self.src, at, e.to_string()))
            }
            (tok, at) => Err(syntax_error(
                self.src,
                at,
                format!("expected an event, found {tok}"),
            )),
        }
    }

    fn handler(&mut self) -> Result<Term, ParseError> {
        let left = self.seq()?;
        if *self.peek() != Tok::Handler {
            return Ok(left);
        }
        let (_, at) = self.bump();
        let right = self.handler()?;
        match (left, right) {
            (Term::Standard(p), Term::Standard(q)) => Ok(StandardTerm::handler(p, q).into()),
            _ => Err(sort_error(
                self.src,
                at,
                "/>",
                "needs two standard operands",
            )),
        }
    }

    fn seq(&mut self) -> Result<Term, ParseError> {
        let left = self.pair()?;
        if *self.peek() != Tok::Semi {
            return Ok(left);
        }
        let (_, at) = self.bump();
        let right = self.seq()?;
        match (left, right) {
            (Term::Standard(p), Term::Standard(q)) => Ok(StandardTerm::seq(p, q).into()),
            (Term::Compensable(p), Term::Compensable(q)) => Ok(CompensableTerm::seq(p, q).into()),
            _ => Err(sort_error(
                self.src,
                at,
                ";",
                "joins a standard and a compensable operand",
            )),
        }
    }

    fn pair(&mut self) -> Result<Term, ParseError> {
        let left = self.primary()?;
        if *self.peek() != Tok::Percent {
            return Ok(left);
        }
        let (_, at) = self.bump();
        let right = self.pair()?;
        match (left, right) {
            (Term::Standard(p), Term::Standard(q)) => Ok(CompensableTerm::pair(p, q).into()),
            _ => Err(sort_error(self.src, at, "%", "needs two standard operands")),
        }
    }

    fn primary(&mut self) -> Result<Term, ParseError> {
        let (tok, at) = self.bump();
        match tok {
            Tok::Ident(name) => Ok(match name.as_str() {
                "skip" => StandardTerm::Skip.into(),
                "throw" => StandardTerm::Throw.into(),
                "yield" => StandardTerm::Yield.into(),
                "skipp" => desugar_keyword(Keyword::Skipp).into(),
                "throww" => desugar_keyword(Keyword::Throww).into(),
                "yieldd" => desugar_keyword(Keyword::Yieldd).into(),
                _ => {
                    self.pos -= 1;
                    StandardTerm::Atom(self.event()?).into()
                }
            }),
            Tok::LParen => {
                let inner = self.choice()?;
                self.expect(Tok::RParen)?;
                Ok(inner)
            }
            Tok::BlockOpen => {
                let inner = self.choice()?;
                self.expect(Tok::BlockClose)?;
                match inner {
                    Term::Compensable(pp) => Ok(StandardTerm::block(pp).into()),
                    Term::Standard(_) => Err(sort_error(
                        self.src,
                        at,
                        "[[ ]]",
                        "needs a compensable body",
                    )),
                }
            }
            tok => Err(syntax_error(
                self.src,
                at,
                format!("expected a term, found {tok}"),
            )),
        }
    }
}

/// Fully parenthesised rendering; [`parse`] inverts it.
pub struct Pretty<'t>(pub &'t Term);

impl fmt::Display for Pretty<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.0 {
            Term::Standard(p) => write_standard(f, p),
            Term::Compensable(pp) => write_compensable(f, pp),
        }
    }
}

pub fn pretty(term: &Term) -> String {
    Pretty(term).to_string()
}

pub fn pretty_standard(term: &StandardTerm) -> String {
    let mut out = String::new();
    write_standard(&mut out, term).expect("writing to a String");
    out
}

pub fn pretty_compensable(term: &CompensableTerm) -> String {
    let mut out = String::new();
    write_compensable(&mut out, term).expect("writing to a String");
    out
}

fn write_set(f: &mut impl fmt::Write, x: &SyncSet) -> fmt::Result {
    f.write_str("||{")?;
    for (i, e) in x.iter().enumerate() {
        if i > 0 {
            f.write_char(',')?;
        }
        write!(f, "{e}")?;
    }
    f.write_char('}')
}

fn write_standard(f: &mut impl fmt::Write, term: &StandardTerm) -> fmt::Result {
    use StandardTerm::*;
    let binary = |f: &mut dyn fmt::Write, p: &StandardTerm, op: &str, q: &StandardTerm| {
        let mut buf = String::new();
        write_standard(&mut buf, p)?;
        write!(buf, " {op} ")?;
        write_standard(&mut buf, q)?;
        write!(f, "({buf})")
    };
    match term {
        Atom(e) => write!(f, "{e}"),
        Skip => f.write_str("skip"),
        Throw => f.write_str("throw"),
        Yield => f.write_str("yield"),
        Null => f.write_str("0"),
        Seq(p, q) => binary(f, p, ";", q),
        Choice(p, q) => binary(f, p, "[]", q),
        IntHandler(p, q) => binary(f, p, "/>", q),
        SyncPar(x, p, q) => {
            let mut op = String::new();
            write_set(&mut op, x)?;
            binary(f, p, &op, q)
        }
        Block(pp) => {
            f.write_str("[[ ")?;
            write_compensable(f, pp)?;
            f.write_str(" ]]")
        }
    }
}

fn write_compensable(f: &mut impl fmt::Write, term: &CompensableTerm) -> fmt::Result {
    use CompensableTerm::*;
    let binary = |f: &mut dyn fmt::Write, p: &CompensableTerm, op: &str, q: &CompensableTerm| {
        let mut buf = String::new();
        write_compensable(&mut buf, p)?;
        write!(buf, " {op} ")?;
        write_compensable(&mut buf, q)?;
        write!(f, "({buf})")
    };
    match term {
        Null => f.write_str("0"),
        Pair(p, q) => {
            let mut buf = String::new();
            write_standard(&mut buf, p)?;
            buf.push_str(" % ");
            write_standard(&mut buf, q)?;
            write!(f, "({buf})")
        }
        Seq(pp, qq) => binary(f, pp, ";", qq),
        Choice(pp, qq) => binary(f, pp, "[]", qq),
        SyncPar(x, pp, qq) => {
            let mut op = String::new();
            write_set(&mut op, x)?;
            binary(f, pp, &op, qq)
        }
    }
}

pub fn pretty_state(state: &State) -> String {
    match state {
        State::Standard(p) => pretty_standard(p),
        State::Compensable(pp) => pretty_compensable(pp),
    }
}

pub fn render_trace(t: &Trace) -> String {
    t.to_string()
}

pub fn render_pair(tt: &TracePair) -> String {
    tt.to_string()
}

/// One rendered item per line, sorted lexicographically.
pub fn render_set<'a, T: fmt::Display + 'a>(items: impl IntoIterator<Item = &'a T>) -> String {
    let sorted: BTreeSet<String> = items.into_iter().map(|t| t.to_string()).collect();
    let mut out = String::new();
    for line in sorted {
        out.push_str(&line);
        out.push('\n');
    }
    out
}

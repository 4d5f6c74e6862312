//! Concrete syntax: parsing and printing.
//!
//! ```text
//! formula := 'true' | 'false' | IDENT | '~' formula
//!          | '[' program ']' formula | '<' program '>' formula
//!          | 'cap' '(' IDENT ',' program ')'
//!          | formula ('&' | '|' | '->') formula | '(' formula ')'
//! program := IDENT | '?' '(' formula ')' | '(' formula '=>' formula ')'
//!          | program ';' program | program '+' program | program '*'
//!          | 'omega' | '(' program ')'
//! ```
//!
//! Binding strength: `*` > `;` > `+` for programs and `~` > `&` > `|` > `->`
//! for formulas; the binary operators associate to the right. `#` starts a
//! comment that runs to the end of the line.
//!
//! Conjunction, disjunction, implication and diamonds are surface sugar: the
//! parser immediately encodes them with negation, boxes and tests
//! (`a & b` = `~[?(a)]~b`, `a | b` = `[?(~a)]b`, `a -> b` = `[?(a)]b`,
//! `<A>f` = `~[A]~f`), and the printer reverses those encodings.

use std::fmt::Write as _;

use thiserror::Error;

use crate::syntax::{self, FId, FView, PId, PView};

#[derive(Error, Debug, Clone, PartialEq, Eq)]
pub enum ParseError {
    #[error("line {line}, column {col}: unexpected character {ch:?}")]
    UnexpectedChar { line: u32, col: u32, ch: char },
    #[error("line {line}, column {col}: expected {expected}, found {found}")]
    UnexpectedToken {
        line: u32,
        col: u32,
        expected: String,
        found: String,
    },
    #[error("unexpected end of input: expected {expected}")]
    UnexpectedEof { expected: String },
    #[error("line {line}, column {col}: trailing input after formula: {found}")]
    TrailingInput { line: u32, col: u32, found: String },
}

#[derive(Clone, PartialEq, Eq, Debug)]
enum Tok {
    Ident(String),
    True,
    False,
    Cap,
    Omega,
    Tilde,
    LBracket,
    RBracket,
    LAngle,
    RAngle,
    LParen,
    RParen,
    Amp,
    Pipe,
    Arrow,    // ->
    FatArrow, // =>
    Semi,
    Plus,
    Star,
    Question,
    Comma,
}

impl Tok {
    fn describe(&self) -> String {
        match self {
            Tok::Ident(s) => format!("identifier {s:?}"),
            Tok::True => "'true'".into(),
            Tok::False => "'false'".into(),
            Tok::Cap => "'cap'".into(),
            Tok::Omega => "'omega'".into(),
            Tok::Tilde => "'~'".into(),
            Tok::LBracket => "'['".into(),
            Tok::RBracket => "']'".into(),
            Tok::LAngle => "'<'".into(),
            Tok::RAngle => "'>'".into(),
            Tok::LParen => "'('".into(),
            Tok::RParen => "')'".into(),
            Tok::Amp => "'&'".into(),
            Tok::Pipe => "'|'".into(),
            Tok::Arrow => "'->'".into(),
            Tok::FatArrow => "'=>'".into(),
            Tok::Semi => "';'".into(),
            Tok::Plus => "'+'".into(),
            Tok::Star => "'*'".into(),
            Tok::Question => "'?'".into(),
            Tok::Comma => "','".into(),
        }
    }
}

struct Lexed {
    tok: Tok,
    line: u32,
    col: u32,
}

fn lex(input: &str, start_line: u32) -> Result<Vec<Lexed>, ParseError> {
    let mut out = Vec::new();
    let mut line = start_line;
    let mut col = 1u32;
    let mut chars = input.chars().peekable();
    while let Some(&c) = chars.peek() {
        let (tline, tcol) = (line, col);
        let mut bump = |chars: &mut std::iter::Peekable<std::str::Chars>| {
            let c = chars.next().unwrap();
            if c == '\n' {
                line += 1;
                col = 1;
            } else {
                col += 1;
            }
            c
        };
        match c {
            '#' => {
                while let Some(&c) = chars.peek() {
                    if c == '\n' {
                        break;
                    }
                    bump(&mut chars);
                }
            }
            c if c.is_whitespace() => {
                bump(&mut chars);
            }
            c if c.is_ascii_alphabetic() || c == '_' => {
                let mut word = String::new();
                while let Some(&c) = chars.peek() {
                    if c.is_ascii_alphanumeric() || c == '_' {
                        word.push(bump(&mut chars));
                    } else {
                        break;
                    }
                }
                let tok = match word.as_str() {
                    "true" => Tok::True,
                    "false" => Tok::False,
                    "cap" => Tok::Cap,
                    "omega" => Tok::Omega,
                    _ => Tok::Ident(word),
                };
                out.push(Lexed {
                    tok,
                    line: tline,
                    col: tcol,
                });
            }
            _ => {
                let c = bump(&mut chars);
                let tok = match c {
                    '~' => Tok::Tilde,
                    '[' => Tok::LBracket,
                    ']' => Tok::RBracket,
                    '<' => Tok::LAngle,
                    '>' => Tok::RAngle,
                    '(' => Tok::LParen,
                    ')' => Tok::RParen,
                    '&' => Tok::Amp,
                    '|' => Tok::Pipe,
                    ';' => Tok::Semi,
                    '+' => Tok::Plus,
                    '*' => Tok::Star,
                    '?' => Tok::Question,
                    ',' => Tok::Comma,
                    '-' => {
                        if chars.peek() == Some(&'>') {
                            bump(&mut chars);
                            Tok::Arrow
                        } else {
                            return Err(ParseError::UnexpectedChar {
                                line: tline,
                                col: tcol,
                                ch: '-',
                            });
                        }
                    }
                    '=' => {
                        if chars.peek() == Some(&'>') {
                            bump(&mut chars);
                            Tok::FatArrow
                        } else {
                            return Err(ParseError::UnexpectedChar {
                                line: tline,
                                col: tcol,
                                ch: '=',
                            });
                        }
                    }
                    other => {
                        return Err(ParseError::UnexpectedChar {
                            line: tline,
                            col: tcol,
                            ch: other,
                        })
                    }
                };
                out.push(Lexed {
                    tok,
                    line: tline,
                    col: tcol,
                });
            }
        }
    }
    Ok(out)
}

struct Parser {
    toks: Vec<Lexed>,
    pos: usize,
}

impl Parser {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|l| &l.tok)
    }

    fn next(&mut self, expected: &str) -> Result<Tok, ParseError> {
        match self.toks.get(self.pos) {
            Some(l) => {
                self.pos += 1;
                Ok(l.tok.clone())
            }
            None => Err(ParseError::UnexpectedEof {
                expected: expected.to_owned(),
            }),
        }
    }

    fn expect(&mut self, want: Tok) -> Result<(), ParseError> {
        match self.toks.get(self.pos) {
            Some(l) if l.tok == want => {
                self.pos += 1;
                Ok(())
            }
            Some(l) => Err(ParseError::UnexpectedToken {
                line: l.line,
                col: l.col,
                expected: want.describe(),
                found: l.tok.describe(),
            }),
            None => Err(ParseError::UnexpectedEof {
                expected: want.describe(),
            }),
        }
    }

    fn eat(&mut self, want: &Tok) -> bool {
        if self.peek() == Some(want) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn err_here(&self, expected: &str) -> ParseError {
        match self.toks.get(self.pos) {
            Some(l) => ParseError::UnexpectedToken {
                line: l.line,
                col: l.col,
                expected: expected.to_owned(),
                found: l.tok.describe(),
            },
            None => ParseError::UnexpectedEof {
                expected: expected.to_owned(),
            },
        }
    }

    // formulas -------------------------------------------------------------

    fn formula(&mut self) -> Result<FId, ParseError> {
        self.implies_level()
    }

    fn implies_level(&mut self) -> Result<FId, ParseError> {
        let lhs = self.or_level()?;
        if self.eat(&Tok::Arrow) {
            let rhs = self.implies_level()?;
            Ok(syntax::implies(lhs, rhs))
        } else {
            Ok(lhs)
        }
    }

    fn or_level(&mut self) -> Result<FId, ParseError> {
        let lhs = self.and_level()?;
        if self.eat(&Tok::Pipe) {
            let rhs = self.or_level()?;
            Ok(syntax::disj(lhs, rhs))
        } else {
            Ok(lhs)
        }
    }

    fn and_level(&mut self) -> Result<FId, ParseError> {
        let lhs = self.unary_level()?;
        if self.eat(&Tok::Amp) {
            let rhs = self.and_level()?;
            Ok(syntax::conj(lhs, rhs))
        } else {
            Ok(lhs)
        }
    }

    fn unary_level(&mut self) -> Result<FId, ParseError> {
        match self.peek() {
            Some(Tok::Tilde) => {
                self.pos += 1;
                let f = self.unary_level()?;
                Ok(syntax::not(f))
            }
            Some(Tok::LBracket) => {
                self.pos += 1;
                let p = self.program()?;
                self.expect(Tok::RBracket)?;
                let f = self.unary_level()?;
                Ok(syntax::boxf(p, f))
            }
            Some(Tok::LAngle) => {
                self.pos += 1;
                let p = self.program()?;
                self.expect(Tok::RAngle)?;
                let f = self.unary_level()?;
                Ok(syntax::diamond(p, f))
            }
            _ => self.atom_level(),
        }
    }

    fn atom_level(&mut self) -> Result<FId, ParseError> {
        match self.next("a formula")? {
            Tok::True => Ok(syntax::tt()),
            Tok::False => Ok(syntax::ff()),
            Tok::Ident(name) => Ok(syntax::atom(&name)),
            Tok::Cap => {
                self.expect(Tok::LParen)?;
                let agent = match self.next("an agent name")? {
                    Tok::Ident(name) => syntax::sym(&name),
                    _ => {
                        self.pos -= 1;
                        return Err(self.err_here("an agent name"));
                    }
                };
                self.expect(Tok::Comma)?;
                let p = self.program()?;
                self.expect(Tok::RParen)?;
                Ok(syntax::cap(agent, p))
            }
            Tok::LParen => {
                let f = self.formula()?;
                self.expect(Tok::RParen)?;
                Ok(f)
            }
            _ => {
                self.pos -= 1;
                Err(self.err_here("a formula"))
            }
        }
    }

    // programs ---------------------------------------------------------------

    fn program(&mut self) -> Result<PId, ParseError> {
        self.choice_level()
    }

    fn choice_level(&mut self) -> Result<PId, ParseError> {
        let lhs = self.seq_level()?;
        if self.eat(&Tok::Plus) {
            let rhs = self.choice_level()?;
            Ok(syntax::choice(lhs, rhs))
        } else {
            Ok(lhs)
        }
    }

    fn seq_level(&mut self) -> Result<PId, ParseError> {
        let lhs = self.star_level()?;
        if self.eat(&Tok::Semi) {
            let rhs = self.seq_level()?;
            Ok(syntax::seq(lhs, rhs))
        } else {
            Ok(lhs)
        }
    }

    fn star_level(&mut self) -> Result<PId, ParseError> {
        let mut p = self.prim_program()?;
        while self.eat(&Tok::Star) {
            p = syntax::star(p);
        }
        Ok(p)
    }

    fn prim_program(&mut self) -> Result<PId, ParseError> {
        match self.next("a program")? {
            Tok::Ident(name) => Ok(syntax::aprog(&name)),
            Tok::Omega => Ok(syntax::omega()),
            Tok::Question => {
                self.expect(Tok::LParen)?;
                let f = self.formula()?;
                self.expect(Tok::RParen)?;
                Ok(syntax::test(f))
            }
            Tok::LParen => {
                // Either '(formula => formula)' or a parenthesised program.
                // Try the precondition-effect reading first; rewind on failure.
                let mark = self.pos;
                let as_arrow = (|| -> Result<Option<PId>, ParseError> {
                    let pre = match self.formula() {
                        Ok(f) => f,
                        Err(_) => return Ok(None),
                    };
                    if !self.eat(&Tok::FatArrow) {
                        return Ok(None);
                    }
                    let post = self.formula()?;
                    self.expect(Tok::RParen)?;
                    Ok(Some(syntax::arrow(pre, post)))
                })();
                match as_arrow {
                    Ok(Some(p)) => Ok(p),
                    Ok(None) => {
                        self.pos = mark;
                        let p = self.program()?;
                        self.expect(Tok::RParen)?;
                        Ok(p)
                    }
                    Err(e) => Err(e),
                }
            }
            _ => {
                self.pos -= 1;
                Err(self.err_here("a program"))
            }
        }
    }
}

/// Parse a single formula from a string.
pub fn parse(input: &str) -> Result<FId, ParseError> {
    parse_at_line(input, 1)
}

fn parse_at_line(input: &str, start_line: u32) -> Result<FId, ParseError> {
    let toks = lex(input, start_line)?;
    let mut p = Parser { toks, pos: 0 };
    let f = p.formula()?;
    if let Some(l) = p.toks.get(p.pos) {
        return Err(ParseError::TrailingInput {
            line: l.line,
            col: l.col,
            found: l.tok.describe(),
        });
    }
    Ok(f)
}

/// Parse a multi-line problem: one formula per line, blank lines and `#`
/// comments ignored. The returned formulas are to be taken conjointly.
pub fn parse_lines(input: &str) -> Result<Vec<FId>, ParseError> {
    let mut out = Vec::new();
    for (idx, line) in input.lines().enumerate() {
        let body = match line.find('#') {
            Some(i) => &line[..i],
            None => line,
        };
        if body.trim().is_empty() {
            continue;
        }
        out.push(parse_at_line(body, idx as u32 + 1)?);
    }
    Ok(out)
}

// Printing -------------------------------------------------------------------

// Formula binding levels: -> is 1, | is 2, & is 3, unary is 4, atoms are 5.
// Binary connectives associate right, so the left operand prints one level up.

fn needs(level: u8, min: u8) -> bool {
    level < min
}

fn fmt_f(f: FId, min: u8, out: &mut String) {
    use FView::*;
    // Sugared encodings are recognised before the raw constructors so that
    // printed output reads the way users write it.
    if let Not(inner) = syntax::fview(f) {
        if let Box(p, nb) = syntax::fview(inner) {
            if let (PView::Test(aa), Not(b)) = (syntax::pview(p), syntax::fview(nb)) {
                // ~[?(a)]~b  =  a & b
                let wrap = needs(3, min);
                if wrap {
                    out.push('(');
                }
                fmt_f(aa, 4, out);
                out.push_str(" & ");
                fmt_f(b, 3, out);
                if wrap {
                    out.push(')');
                }
                return;
            }
            if let Not(b) = syntax::fview(nb) {
                // ~[A]~b  =  <A>b
                let wrap = needs(4, min);
                if wrap {
                    out.push('(');
                }
                out.push('<');
                fmt_p(p, 1, out);
                out.push('>');
                fmt_f(b, 4, out);
                if wrap {
                    out.push(')');
                }
                return;
            }
        }
    }
    if let Box(p, b) = syntax::fview(f) {
        if let PView::Test(t) = syntax::pview(p) {
            if let Not(aa) = syntax::fview(t) {
                // [?(~a)]b  =  a | b
                let wrap = needs(2, min);
                if wrap {
                    out.push('(');
                }
                fmt_f(aa, 3, out);
                out.push_str(" | ");
                fmt_f(b, 2, out);
                if wrap {
                    out.push(')');
                }
                return;
            }
            // [?(a)]b  =  a -> b
            let wrap = needs(1, min);
            if wrap {
                out.push('(');
            }
            fmt_f(t, 2, out);
            out.push_str(" -> ");
            fmt_f(b, 1, out);
            if wrap {
                out.push(')');
            }
            return;
        }
    }
    match syntax::fview(f) {
        True => out.push_str("true"),
        False => out.push_str("false"),
        Atom(s) => out.push_str(&syntax::sym_name(s)),
        Not(g) => {
            let wrap = needs(4, min);
            if wrap {
                out.push('(');
            }
            out.push('~');
            fmt_f(g, 4, out);
            if wrap {
                out.push(')');
            }
        }
        Box(p, g) => {
            let wrap = needs(4, min);
            if wrap {
                out.push('(');
            }
            out.push('[');
            fmt_p(p, 1, out);
            out.push(']');
            fmt_f(g, 4, out);
            if wrap {
                out.push(')');
            }
        }
        Cap(agent, p) => {
            let _ = write!(out, "cap({}, ", syntax::sym_name(agent));
            fmt_p(p, 1, out);
            out.push(')');
        }
    }
}

// Program binding levels: + is 1, ; is 2, * is 3, primitives are 4.

fn fmt_p(p: PId, min: u8, out: &mut String) {
    use PView::*;
    if syntax::is_omega(p) {
        out.push_str("omega");
        return;
    }
    match syntax::pview(p) {
        Atomic(s) => out.push_str(&syntax::sym_name(s)),
        Test(f) => {
            out.push_str("?(");
            fmt_f(f, 1, out);
            out.push(')');
        }
        Arrow(a, b) => {
            out.push('(');
            fmt_f(a, 1, out);
            out.push_str(" => ");
            fmt_f(b, 1, out);
            out.push(')');
        }
        Seq(a, b) => {
            let wrap = needs(2, min);
            if wrap {
                out.push('(');
            }
            fmt_p(a, 3, out);
            out.push_str("; ");
            fmt_p(b, 2, out);
            if wrap {
                out.push(')');
            }
        }
        Choice(a, b) => {
            let wrap = needs(1, min);
            if wrap {
                out.push('(');
            }
            fmt_p(a, 2, out);
            out.push_str(" + ");
            fmt_p(b, 1, out);
            if wrap {
                out.push(')');
            }
        }
        Star(a) => {
            fmt_p(a, 4, out);
            out.push('*');
        }
    }
}

/// Render a formula in the concrete syntax. `parse(&print_f(f))` yields `f`
/// back for every formula built from parseable identifiers.
pub fn print_f(f: FId) -> String {
    let mut s = String::new();
    fmt_f(f, 1, &mut s);
    s
}

/// Render a program in the concrete syntax.
pub fn print_p(p: PId) -> String {
    let mut s = String::new();
    fmt_p(p, 1, &mut s);
    s
}

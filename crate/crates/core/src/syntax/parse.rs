use std::fmt;
use std::sync::Arc;

use thiserror::Error;

use super::{Location, Name, Term};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("{line}:{col}: {kind}")]
pub struct ParseError {
    pub line: usize,
    pub col: usize,
    pub kind: ParseErrorKind,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ParseErrorKind {
    #[error("unexpected character `{0}`")]
    UnexpectedChar(char),
    #[error("unknown escape `\\{0}`")]
    UnknownEscape(char),
    #[error("unbalanced `{0}`")]
    Unbalanced(char),
    #[error("expected {expected}, found {found}")]
    Unexpected { expected: &'static str, found: String },
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Tok {
    Ident(String),
    Wild,
    Lt,
    Gt,
    Dot,
    LBrack,
    RBrack,
    LParen,
    RParen,
    Semi,
    Star,
    Eof,
}

impl fmt::Display for Tok {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Tok::Ident(s) => write!(f, "`{s}`"),
            Tok::Wild => f.write_str("`_`"),
            Tok::Lt => f.write_str("`<`"),
            Tok::Gt => f.write_str("`>`"),
            Tok::Dot => f.write_str("`.`"),
            Tok::LBrack => f.write_str("`[`"),
            Tok::RBrack => f.write_str("`]`"),
            Tok::LParen => f.write_str("`(`"),
            Tok::RParen => f.write_str("`)`"),
            Tok::Semi => f.write_str("`;`"),
            Tok::Star => f.write_str("`*`"),
            Tok::Eof => f.write_str("end of input"),
        }
    }
}

#[derive(Debug, Clone)]
struct Spanned {
    tok: Tok,
    line: usize,
    col: usize,
}

fn lex(text: &str) -> Result<Vec<Spanned>, ParseError> {
    let mut out = Vec::new();
    let mut chars = text.chars().peekable();
    let (mut line, mut col) = (1, 1);
    let err = |line, col, kind| ParseError { line, col, kind };
    while let Some(c) = chars.next() {
        let (l0, c0) = (line, col);
        if c == '\n' {
            line += 1;
            col = 1;
            continue;
        }
        col += 1;
        let tok = match c {
            c if c.is_whitespace() => continue,
            '#' => {
                while chars.peek().is_some_and(|&c| c != '\n') {
                    chars.next();
                }
                continue;
            }
            '\\' => {
                let e = chars.peek().copied().unwrap_or(' ');
                return Err(err(l0, c0, ParseErrorKind::UnknownEscape(e)));
            }
            '<' => Tok::Lt,
            '>' => Tok::Gt,
            '.' => Tok::Dot,
            '[' => Tok::LBrack,
            ']' => Tok::RBrack,
            '(' => Tok::LParen,
            ')' => Tok::RParen,
            ';' => Tok::Semi,
            '*' => Tok::Star,
            '_' => Tok::Wild,
            'a'..='z' => {
                let mut s = String::from(c);
                while let Some(&d) = chars.peek() {
                    if d.is_ascii_alphanumeric() || d == '_' {
                        s.push(d);
                        chars.next();
                        col += 1;
                    } else {
                        break;
                    }
                }
                Tok::Ident(s)
            }
            other => return Err(err(l0, c0, ParseErrorKind::UnexpectedChar(other))),
        };
        out.push(Spanned { tok, line: l0, col: c0 });
    }
    out.push(Spanned { tok: Tok::Eof, line, col });
    Ok(out)
}

struct Parser {
    toks: Vec<Spanned>,
    pos: usize,
    wildcards: usize,
    open: Vec<(char, usize, usize)>,
}

impl Parser {
    fn peek(&self) -> &Tok {
        &self.toks[self.pos].tok
    }

    fn peek2(&self) -> &Tok {
        &self.toks[(self.pos + 1).min(self.toks.len() - 1)].tok
    }

    fn bump(&mut self) -> Spanned {
        let t = self.toks[self.pos].clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn fail(&self, expected: &'static str) -> ParseError {
        let here = &self.toks[self.pos];
        if here.tok == Tok::Eof {
            if let Some(&(c, line, col)) = self.open.last() {
                return ParseError { line, col, kind: ParseErrorKind::Unbalanced(c) };
            }
        }
        let kind = match here.tok {
            Tok::RBrack => ParseErrorKind::Unbalanced(']'),
            Tok::RParen => ParseErrorKind::Unbalanced(')'),
            _ => ParseErrorKind::Unexpected { expected, found: here.tok.to_string() },
        };
        ParseError { line: here.line, col: here.col, kind }
    }

    fn expect(&mut self, tok: Tok, what: &'static str) -> Result<(), ParseError> {
        if *self.peek() == tok {
            self.bump();
            Ok(())
        } else {
            Err(self.fail(what))
        }
    }

    fn term(&mut self) -> Result<Term, ParseError> {
        let left = self.prefix()?;
        if *self.peek() == Tok::Semi {
            self.bump();
            let right = self.term()?;
            Ok(Term::seq(left, right))
        } else {
            Ok(left)
        }
    }

    fn prefix(&mut self) -> Result<Term, ParseError> {
        match self.peek().clone() {
            Tok::Lt => self.pop(Location::lam()),
            Tok::Ident(a) if *self.peek2() == Tok::Lt => {
                self.bump();
                self.pop(Location::new(&a))
            }
            Tok::LBrack => {
                let open = self.bump();
                self.open.push(('[', open.line, open.col));
                let arg = self.term()?;
                self.expect(Tok::RBrack, "`]`")?;
                self.open.pop();
                let loc = match self.peek().clone() {
                    Tok::Ident(a) => {
                        self.bump();
                        Location::new(&a)
                    }
                    _ => Location::lam(),
                };
                self.expect(Tok::Dot, "`.` after a push")?;
                let body = self.prefix()?;
                Ok(Term::push(arg, loc, body))
            }
            _ => self.atom(),
        }
    }

    fn pop(&mut self, loc: Location) -> Result<Term, ParseError> {
        self.expect(Tok::Lt, "`<`")?;
        let binder = match self.peek().clone() {
            Tok::Ident(x) => {
                self.bump();
                Name::from(x)
            }
            Tok::Wild => {
                self.bump();
                self.wildcards += 1;
                Name::from(format!("_{}", self.wildcards))
            }
            _ => return Err(self.fail("a binder")),
        };
        self.expect(Tok::Gt, "`>`")?;
        self.expect(Tok::Dot, "`.` after a pop")?;
        let body = self.prefix()?;
        Ok(Term::Pop(loc, binder, Arc::new(body)))
    }

    fn atom(&mut self) -> Result<Term, ParseError> {
        match self.peek().clone() {
            Tok::Star => {
                self.bump();
                Ok(Term::Skip)
            }
            Tok::Ident(x) => {
                self.bump();
                Ok(Term::var(x.as_str()))
            }
            Tok::LParen => {
                let open = self.bump();
                self.open.push(('(', open.line, open.col));
                let t = self.term()?;
                self.expect(Tok::RParen, "`)`")?;
                self.open.pop();
                Ok(t)
            }
            _ => Err(self.fail("a term")),
        }
    }
}

/// Parse the concrete syntax. `;` binds loosest and associates to the right;
/// the body of a pop or push extends over a single prefix.
pub fn parse(text: &str) -> Result<Term, ParseError> {
    let toks = lex(text)?;
    let mut p = Parser { toks, pos: 0, wildcards: 0, open: Vec::new() };
    let t = p.term()?;
    if *p.peek() != Tok::Eof {
        return Err(p.fail("`;` or end of input"));
    }
    Ok(t)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn l(s: &str) -> Location {
        Location::new(s)
    }

    #[test]
    fn elaborates_default_locations() {
        let t = parse("[*].<x>.x").unwrap();
        let want = Term::push(Term::Skip, l("lam"), Term::pop(l("lam"), "x", Term::var("x")));
        assert!(t.syntactic_eq(&want));
    }

    #[test]
    fn located_prefixes() {
        let t = parse("a<x>.[x]a.m").unwrap();
        let want = Term::pop(l("a"), "x", Term::push(Term::var("x"), l("a"), Term::var("m")));
        assert!(t.syntactic_eq(&want));
    }

    #[test]
    fn seq_is_right_associative_and_loosest() {
        let t = parse("*;*;*").unwrap();
        assert!(t.syntactic_eq(&Term::seq(Term::Skip, Term::seq(Term::Skip, Term::Skip))));
        let t = parse("<x>.a ; b").unwrap();
        let want = Term::seq(Term::pop(l("lam"), "x", Term::var("a")), Term::var("b"));
        assert!(t.syntactic_eq(&want));
        let t = parse("<x>.(a ; b)").unwrap();
        assert!(matches!(t, Term::Pop(..)));
    }

    #[test]
    fn comments_and_whitespace() {
        let t = parse("# a comment\n [ * ]\n  . * # trailing").unwrap();
        assert_eq!(t, parse("[*].*").unwrap());
    }

    #[test]
    fn wildcards_are_fresh() {
        let t = parse("a<_>.<_>.*").unwrap();
        match t {
            Term::Pop(_, x, body) => match &*body {
                Term::Pop(_, y, _) => {
                    assert!(x.is_wildcard() && y.is_wildcard());
                    assert_ne!(&x, y);
                }
                _ => panic!(),
            },
            _ => panic!(),
        }
    }

    #[test]
    fn errors_carry_positions() {
        let e = parse("*;\n  ?").unwrap_err();
        assert_eq!((e.line, e.col), (2, 3));
        assert_eq!(e.kind, ParseErrorKind::UnexpectedChar('?'));
        let e = parse("[*").unwrap_err();
        assert_eq!(e.kind, ParseErrorKind::Unbalanced('['));
        assert_eq!((e.line, e.col), (1, 1));
        let e = parse("[*].(*").unwrap_err();
        assert_eq!((e.kind, e.col), (ParseErrorKind::Unbalanced('('), 5));
        let e = parse("*)").unwrap_err();
        assert_eq!(e.kind, ParseErrorKind::Unbalanced(')'));
        let e = parse("\\x").unwrap_err();
        assert_eq!(e.kind, ParseErrorKind::UnknownEscape('x'));
        assert!(parse("").is_err());
        assert!(parse("<x>x").is_err());
    }
}

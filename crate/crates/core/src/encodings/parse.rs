use thiserror::Error;

use crate::syntax::{Location, Name};

use super::{LambdaTerm, StoreTerm, StoreValue};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("at offset {offset}: {message}")]
pub struct EncodingParseError {
    pub offset: usize,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Tok {
    Ident(String),
    Lambda,
    Dot,
    LParen,
    RParen,
    Bind,
    Eof,
}

struct Parser {
    toks: Vec<(usize, Tok)>,
    pos: usize,
}

const KEYWORDS: [&str; 3] = ["ret", "get", "set"];

impl Parser {
    fn new(src: &str) -> Result<Parser, EncodingParseError> {
        let mut toks = Vec::new();
        let mut it = src.char_indices().peekable();
        while let Some((off, c)) = it.next() {
            let tok = match c {
                c if c.is_whitespace() => continue,
                '\\' | 'λ' => Tok::Lambda,
                '.' => Tok::Dot,
                '(' => Tok::LParen,
                ')' => Tok::RParen,
                '>' if src[off..].starts_with(">>=") => {
                    it.next();
                    it.next();
                    Tok::Bind
                }
                c if c.is_ascii_alphabetic() || c == '_' => {
                    let mut end = off + c.len_utf8();
                    while let Some(&(i, d)) = it.peek() {
                        if d.is_ascii_alphanumeric() || d == '_' || d == '\'' {
                            end = i + d.len_utf8();
                            it.next();
                        } else {
                            break;
                        }
                    }
                    Tok::Ident(src[off..end].to_string())
                }
                c => return Err(EncodingParseError { offset: off, message: format!("unexpected character `{c}`") }),
            };
            toks.push((off, tok));
        }
        toks.push((src.len(), Tok::Eof));
        Ok(Parser { toks, pos: 0 })
    }

    fn peek(&self) -> &Tok {
        &self.toks[self.pos].1
    }

    fn error<T>(&self, message: impl Into<String>) -> Result<T, EncodingParseError> {
        Err(EncodingParseError { offset: self.toks[self.pos].0, message: message.into() })
    }

    fn expect(&mut self, t: Tok, what: &str) -> Result<(), EncodingParseError> {
        if *self.peek() == t {
            self.pos += 1;
            Ok(())
        } else {
            self.error(format!("expected {what}"))
        }
    }

    fn ident(&mut self, keywords_ok: bool) -> Result<String, EncodingParseError> {
        match self.peek().clone() {
            Tok::Ident(s) if keywords_ok || !KEYWORDS.contains(&s.as_str()) => {
                self.pos += 1;
                Ok(s)
            }
            _ => self.error("expected a name"),
        }
    }

    fn finish(&self) -> Result<(), EncodingParseError> {
        match self.peek() {
            Tok::Eof => Ok(()),
            _ => self.error("trailing input"),
        }
    }

    fn lambda(&mut self) -> Result<LambdaTerm, EncodingParseError> {
        if *self.peek() == Tok::Lambda {
            self.pos += 1;
            let mut xs = vec![self.ident(true)?];
            while let Tok::Ident(_) = self.peek() {
                xs.push(self.ident(true)?);
            }
            self.expect(Tok::Dot, "`.`")?;
            let body = self.lambda()?;
            return Ok(xs.iter().rev().fold(body, |b, x| LambdaTerm::lam(x, b)));
        }
        let mut t = self.lambda_atom()?;
        loop {
            match self.peek() {
                Tok::Ident(_) | Tok::LParen => t = LambdaTerm::app(t, self.lambda_atom()?),
                Tok::Lambda => return Ok(LambdaTerm::app(t, self.lambda()?)),
                _ => return Ok(t),
            }
        }
    }

    fn lambda_atom(&mut self) -> Result<LambdaTerm, EncodingParseError> {
        match self.peek() {
            Tok::LParen => {
                self.pos += 1;
                let t = self.lambda()?;
                self.expect(Tok::RParen, "`)`")?;
                Ok(t)
            }
            Tok::Ident(_) => Ok(LambdaTerm::var(&self.ident(true)?)),
            _ => self.error("expected a term"),
        }
    }

    fn comp(&mut self) -> Result<StoreTerm, EncodingParseError> {
        let mut m = self.comp_base()?;
        while *self.peek() == Tok::Bind {
            self.pos += 1;
            m = StoreTerm::Bind(Box::new(m), self.value()?);
        }
        Ok(m)
    }

    fn comp_base(&mut self) -> Result<StoreTerm, EncodingParseError> {
        match self.peek().clone() {
            Tok::LParen => {
                self.pos += 1;
                let m = self.comp()?;
                self.expect(Tok::RParen, "`)`")?;
                Ok(m)
            }
            Tok::Ident(k) if k == "ret" => {
                self.pos += 1;
                Ok(StoreTerm::Ret(self.value()?))
            }
            Tok::Ident(k) if k == "get" => {
                self.pos += 1;
                let a = Location::new(&self.ident(false)?);
                match self.value()? {
                    StoreValue::Lam(x, m) => Ok(StoreTerm::Get(a, x, m)),
                    StoreValue::Var(_) => self.error("get expects an abstraction"),
                }
            }
            Tok::Ident(k) if k == "set" => {
                self.pos += 1;
                let a = Location::new(&self.ident(false)?);
                let v = self.value()?;
                Ok(StoreTerm::Set(a, v, Box::new(self.comp()?)))
            }
            _ => self.error("expected `ret`, `get`, `set` or `(`"),
        }
    }

    fn value(&mut self) -> Result<StoreValue, EncodingParseError> {
        match self.peek() {
            Tok::Lambda => {
                self.pos += 1;
                let x = Name::new(&self.ident(false)?);
                self.expect(Tok::Dot, "`.`")?;
                Ok(StoreValue::Lam(x, Box::new(self.comp()?)))
            }
            Tok::LParen => {
                self.pos += 1;
                let v = self.value()?;
                self.expect(Tok::RParen, "`)`")?;
                Ok(v)
            }
            _ => Ok(StoreValue::Var(Name::new(&self.ident(false)?))),
        }
    }
}

/// `\x. M`, application by juxtaposition, parentheses.
pub fn parse_lambda(src: &str) -> Result<LambdaTerm, EncodingParseError> {
    let mut p = Parser::new(src)?;
    let t = p.lambda()?;
    p.finish()?;
    Ok(t)
}

/// `ret V`, `M >>= V`, `get a (\x. M)`, `set a V M`.
pub fn parse_store(src: &str) -> Result<StoreTerm, EncodingParseError> {
    let mut p = Parser::new(src)?;
    let t = p.comp()?;
    p.finish()?;
    Ok(t)
}

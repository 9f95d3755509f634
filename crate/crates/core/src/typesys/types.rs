use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::str::FromStr;

use thiserror::Error;

use crate::syntax::Location;

/// `input ⇒ output`. Both sides are stored in stack order (top last).
#[derive(Clone)]
pub struct CompType {
    pub input: MemoryType,
    pub output: MemoryType,
}

/// A multiset of computation types.
#[derive(Clone, Default)]
pub struct CollectionType(pub Vec<CompType>);

/// Collections bottom to top.
#[derive(Clone, Default)]
pub struct VectorType(pub Vec<CollectionType>);

/// A vector per location; empty vectors are never stored.
#[derive(Clone, Default)]
pub struct MemoryType(BTreeMap<Location, VectorType>);

impl CompType {
    pub fn new(input: MemoryType, output: MemoryType) -> CompType {
        CompType { input, output }
    }

    /// `ε ⇒ ε`.
    pub fn unit() -> CompType {
        CompType::new(MemoryType::new(), MemoryType::new())
    }

    pub fn canonical(&self) -> CompType {
        CompType::new(self.input.canonical(), self.output.canonical())
    }
}

impl CollectionType {
    pub fn empty() -> CollectionType {
        CollectionType(Vec::new())
    }

    pub fn single(t: CompType) -> CollectionType {
        CollectionType(vec![t])
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = &CompType> {
        self.0.iter()
    }

    /// Multiset union.
    pub fn sum(&self, other: &CollectionType) -> CollectionType {
        CollectionType(self.0.iter().chain(other.0.iter()).cloned().collect())
    }

    /// Elements sorted by their printed form, recursively.
    pub fn canonical(&self) -> CollectionType {
        let mut elems: Vec<(String, CompType)> = self.0.iter().map(|t| (t.to_string(), t.canonical())).collect();
        elems.sort_by(|a, b| a.0.cmp(&b.0));
        CollectionType(elems.into_iter().map(|(_, t)| t).collect())
    }

    /// Whether `other` is a sub-multiset; returns the remainder.
    pub fn minus(&self, other: &CollectionType) -> Option<CollectionType> {
        let mut counts: HashMap<String, usize> = HashMap::new();
        for t in &other.0 {
            *counts.entry(t.to_string()).or_default() += 1;
        }
        let mut rest = Vec::new();
        for t in &self.0 {
            match counts.get_mut(&t.to_string()) {
                Some(n) if *n > 0 => *n -= 1,
                _ => rest.push(t.clone()),
            }
        }
        counts.values().all(|n| *n == 0).then_some(CollectionType(rest))
    }
}

impl FromIterator<CompType> for CollectionType {
    fn from_iter<I: IntoIterator<Item = CompType>>(iter: I) -> CollectionType {
        CollectionType(iter.into_iter().collect())
    }
}

impl VectorType {
    pub fn canonical(&self) -> VectorType {
        VectorType(self.0.iter().map(CollectionType::canonical).collect())
    }
}

impl MemoryType {
    pub fn new() -> MemoryType {
        MemoryType::default()
    }

    /// `[]^f`: `f(a)` empty collections at each location `a`.
    pub fn empties(f: &BTreeMap<Location, usize>) -> MemoryType {
        MemoryType(
            f.iter()
                .filter(|(_, n)| **n > 0)
                .map(|(a, n)| (a.clone(), VectorType(vec![CollectionType::empty(); *n])))
                .collect(),
        )
    }

    pub fn push(&mut self, loc: Location, c: CollectionType) {
        self.0.entry(loc).or_default().0.push(c);
    }

    pub fn pop(&mut self, loc: &Location) -> Option<CollectionType> {
        let v = self.0.get_mut(loc)?;
        let c = v.0.pop();
        if v.0.is_empty() {
            self.0.remove(loc);
        }
        c
    }

    pub fn top(&self, loc: &Location) -> Option<&CollectionType> {
        self.0.get(loc).and_then(|v| v.0.last())
    }

    pub fn with_pushed(&self, loc: Location, c: CollectionType) -> MemoryType {
        let mut m = self.clone();
        m.push(loc, c);
        m
    }

    pub fn vector(&self, loc: &Location) -> &[CollectionType] {
        self.0.get(loc).map(|v| v.0.as_slice()).unwrap_or(&[])
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn locations(&self) -> impl Iterator<Item = &Location> {
        self.0.keys()
    }

    pub fn dims(&self) -> BTreeMap<Location, usize> {
        self.0.iter().map(|(a, v)| (a.clone(), v.0.len())).collect()
    }

    /// Whether every collection is empty, i.e. the type is `[]^f`.
    pub fn is_empties(&self) -> bool {
        self.0.values().all(|v| v.0.iter().all(CollectionType::is_empty))
    }

    pub fn canonical(&self) -> MemoryType {
        MemoryType(self.0.iter().map(|(a, v)| (a.clone(), v.canonical())).collect())
    }

    fn render(&self, reversed: bool) -> String {
        let coll = |v: &VectorType| -> Vec<String> {
            let mut items: Vec<String> = v.0.iter().map(CollectionType::to_string).collect();
            if reversed {
                items.reverse();
            }
            items
        };
        let mut parts = Vec::new();
        if let Some(v) = self.0.get(&Location::lam()) {
            parts.extend(coll(v));
        }
        for (a, v) in &self.0 {
            if !a.is_default() {
                parts.push(format!("{a}({})", coll(v).join(" ")));
            }
        }
        parts.join(" ")
    }

    /// As written on the left of `=>`: each vector in pop order.
    pub fn render_input(&self) -> String {
        self.render(true)
    }
}

macro_rules! eq_by_display {
    ($($t:ty),*) => {$(
        impl PartialEq for $t {
            fn eq(&self, other: &Self) -> bool {
                self.to_string() == other.to_string()
            }
        }
        impl Eq for $t {}
        impl fmt::Debug for $t {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                write!(f, "`{self}`")
            }
        }
    )*};
}

eq_by_display!(CompType, CollectionType, VectorType, MemoryType);

impl fmt::Display for CompType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let l = self.input.render_input();
        let r = self.output.to_string();
        match (l.is_empty(), r.is_empty()) {
            (true, true) => f.write_str("=>"),
            (true, false) => write!(f, "=> {r}"),
            (false, true) => write!(f, "{l} =>"),
            (false, false) => write!(f, "{l} => {r}"),
        }
    }
}

impl fmt::Display for CollectionType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut items: Vec<String> = self.0.iter().map(CompType::to_string).collect();
        items.sort();
        write!(f, "[{}]", items.join(", "))
    }
}

impl fmt::Display for VectorType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let items: Vec<String> = self.0.iter().map(CollectionType::to_string).collect();
        f.write_str(&items.join(" "))
    }
}

impl fmt::Display for MemoryType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.render(false))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("type syntax at offset {offset}: {message}")]
pub struct TypeParseError {
    pub offset: usize,
    pub message: String,
}

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    LBrack,
    RBrack,
    LParen,
    RParen,
    Comma,
    Arrow,
    Ident(String),
    Eof,
}

struct TypeParser {
    toks: Vec<(usize, Tok)>,
    pos: usize,
}

impl TypeParser {
    fn new(s: &str) -> Result<TypeParser, TypeParseError> {
        let mut toks = Vec::new();
        let cs: Vec<(usize, char)> = s.char_indices().collect();
        let mut i = 0;
        while i < cs.len() {
            let (off, c) = cs[i];
            i += 1;
            let tok = match c {
                c if c.is_whitespace() || c == 'ε' => continue,
                '[' => Tok::LBrack,
                ']' => Tok::RBrack,
                '(' => Tok::LParen,
                ')' => Tok::RParen,
                ',' => Tok::Comma,
                '⇒' => Tok::Arrow,
                '=' if cs.get(i).map(|p| p.1) == Some('>') => {
                    i += 1;
                    Tok::Arrow
                }
                'a'..='z' => {
                    let mut id = String::from(c);
                    while let Some(&(_, d)) = cs.get(i) {
                        if d.is_ascii_alphanumeric() || d == '_' {
                            id.push(d);
                            i += 1;
                        } else {
                            break;
                        }
                    }
                    Tok::Ident(id)
                }
                other => return Err(TypeParseError { offset: off, message: format!("unexpected `{other}`") }),
            };
            toks.push((off, tok));
        }
        toks.push((s.len(), Tok::Eof));
        Ok(TypeParser { toks, pos: 0 })
    }

    fn peek(&self) -> &Tok {
        &self.toks[self.pos].1
    }

    fn err<T>(&self, message: &str) -> Result<T, TypeParseError> {
        Err(TypeParseError { offset: self.toks[self.pos].0, message: message.to_string() })
    }

    fn eat(&mut self, t: Tok, what: &str) -> Result<(), TypeParseError> {
        if *self.peek() == t {
            self.pos += 1;
            Ok(())
        } else {
            self.err(&format!("expected {what}"))
        }
    }

    fn comp(&mut self) -> Result<CompType, TypeParseError> {
        let input = self.memory(true)?;
        self.eat(Tok::Arrow, "`=>`")?;
        let output = self.memory(false)?;
        Ok(CompType { input, output })
    }

    fn collection(&mut self) -> Result<CollectionType, TypeParseError> {
        self.eat(Tok::LBrack, "`[`")?;
        let mut items = Vec::new();
        if *self.peek() != Tok::RBrack {
            loop {
                items.push(self.comp()?);
                if *self.peek() == Tok::Comma {
                    self.pos += 1;
                } else {
                    break;
                }
            }
        }
        self.eat(Tok::RBrack, "`]`")?;
        Ok(CollectionType(items))
    }

    fn memory(&mut self, reversed: bool) -> Result<MemoryType, TypeParseError> {
        let mut per: BTreeMap<Location, Vec<CollectionType>> = BTreeMap::new();
        loop {
            match self.peek().clone() {
                Tok::LBrack => {
                    let c = self.collection()?;
                    per.entry(Location::lam()).or_default().push(c);
                }
                Tok::Ident(a) => {
                    self.pos += 1;
                    self.eat(Tok::LParen, "`(` after a location")?;
                    let loc = Location::new(&a);
                    while *self.peek() == Tok::LBrack {
                        let c = self.collection()?;
                        per.entry(loc.clone()).or_default().push(c);
                    }
                    self.eat(Tok::RParen, "`)`")?;
                }
                _ => break,
            }
        }
        let mut m = MemoryType::new();
        for (a, mut v) in per {
            if reversed {
                v.reverse();
            }
            for c in v {
                m.push(a.clone(), c);
            }
        }
        Ok(m)
    }

    fn finish<T>(&self, v: T) -> Result<T, TypeParseError> {
        if *self.peek() == Tok::Eof {
            Ok(v)
        } else {
            self.err("trailing input")
        }
    }
}

impl FromStr for CompType {
    type Err = TypeParseError;

    fn from_str(s: &str) -> Result<CompType, TypeParseError> {
        let mut p = TypeParser::new(s)?;
        let t = p.comp()?;
        p.finish(t)
    }
}

impl FromStr for CollectionType {
    type Err = TypeParseError;

    fn from_str(s: &str) -> Result<CollectionType, TypeParseError> {
        let mut p = TypeParser::new(s)?;
        let t = p.collection()?;
        p.finish(t)
    }
}

/// Parses a memory type written in stack order (as on the right of `=>`).
impl FromStr for MemoryType {
    type Err = TypeParseError;

    fn from_str(s: &str) -> Result<MemoryType, TypeParseError> {
        let mut p = TypeParser::new(s)?;
        let t = p.memory(false)?;
        p.finish(t)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ct(s: &str) -> CompType {
        s.parse().unwrap()
    }

    #[test]
    fn printing_of_basic_types() {
        assert_eq!(CompType::unit().to_string(), "=>");
        let mut out = MemoryType::new();
        out.push(Location::lam(), CollectionType::single(CompType::unit()));
        assert_eq!(CompType::new(MemoryType::new(), out).to_string(), "=> [=>]");
    }

    #[test]
    fn left_vectors_print_in_pop_order() {
        let mut input = MemoryType::new();
        input.push(Location::new("a"), CollectionType::empty());
        input.push(Location::new("a"), CollectionType::single(CompType::unit()));
        let t = CompType::new(input.clone(), input);
        assert_eq!(t.to_string(), "a([=>] []) => a([] [=>])");
        assert_eq!(ct(&t.to_string()), t);
        let back = ct("a([=>] []) => a([] [=>])");
        assert_eq!(back.input.top(&Location::new("a")).unwrap().len(), 1);
    }

    #[test]
    fn canonical_order_and_multiplicity() {
        let a = ct("=> [=>]");
        let b = CompType::unit();
        let c1 = CollectionType(vec![a.clone(), b.clone()]);
        let c2 = CollectionType(vec![b.clone(), a.clone()]);
        assert_eq!(c1, c2);
        assert_eq!(c1.canonical().0[0], b);
        assert_eq!(c1.canonical().canonical().to_string(), c1.canonical().to_string());
        let twice = CollectionType(vec![b.clone(), b.clone()]);
        assert_ne!(twice, CollectionType::single(b.clone()));
        assert_eq!(CollectionType::single(b.clone()).sum(&CollectionType::single(b.clone())), twice);
        assert!(CollectionType::empty().canonical().is_empty());
    }

    #[test]
    fn multiset_difference() {
        let u = CompType::unit();
        let big = CollectionType(vec![u.clone(), ct("=> [=>]"), u.clone()]);
        let rest = big.minus(&CollectionType::single(u.clone())).unwrap();
        assert_eq!(rest, CollectionType(vec![u.clone(), ct("=> [=>]")]));
        assert!(CollectionType::single(u.clone()).minus(&big).is_none());
    }

    #[test]
    fn parse_round_trips() {
        for s in ["=>", "=> [=>]", "=> [=>, => [=>]]", "[] a([=>]) => b([] [])", "[[] => a([])] =>"] {
            assert_eq!(ct(s).to_string(), s);
        }
        assert_eq!(ct("ε ⇒ [ε⇒ε]"), ct("=> [=>]"));
        assert!("[=>".parse::<CollectionType>().is_err());
        assert!("=> =>".parse::<CompType>().is_err());
        let m: MemoryType = "[] a([=>])".parse().unwrap();
        assert_eq!(m.to_string(), "[] a([=>])");
    }
}

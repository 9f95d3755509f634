use std::collections::BTreeMap;
use std::fmt;

use crate::syntax::Name;

use super::types::CollectionType;

/// Variables to collection types; absent variables have `[]`.
#[derive(Clone, Default)]
pub struct TypingContext(BTreeMap<Name, CollectionType>);

impl TypingContext {
    pub fn new() -> TypingContext {
        TypingContext::default()
    }

    pub fn single(x: Name, c: CollectionType) -> TypingContext {
        let mut g = TypingContext::new();
        g.add(x, c);
        g
    }

    pub fn get(&self, x: &Name) -> CollectionType {
        self.0.get(x).cloned().unwrap_or_default()
    }

    /// Adds `c` to the collection already assigned to `x`.
    pub fn add(&mut self, x: Name, c: CollectionType) {
        if c.is_empty() {
            return;
        }
        let entry = self.0.entry(x).or_default();
        *entry = entry.sum(&c);
    }

    /// Splits off the assignment to `x`.
    pub fn without(&self, x: &Name) -> (CollectionType, TypingContext) {
        let mut rest = self.clone();
        let c = rest.0.remove(x).unwrap_or_default();
        (c, rest)
    }

    pub fn sum(&self, other: &TypingContext) -> TypingContext {
        let mut g = self.clone();
        for (x, c) in &other.0 {
            g.add(x.clone(), c.clone());
        }
        g
    }

    /// `self - other` when `other` is pointwise contained in `self`.
    pub fn minus(&self, other: &TypingContext) -> Option<TypingContext> {
        let mut g = TypingContext::new();
        for (x, c) in &self.0 {
            g.add(x.clone(), c.minus(&other.get(x))?);
        }
        other.0.keys().all(|x| self.0.contains_key(x)).then_some(g)
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Name, &CollectionType)> {
        self.0.iter()
    }

    pub fn rename(&self, f: impl Fn(&Name) -> Name) -> TypingContext {
        let mut g = TypingContext::new();
        for (x, c) in &self.0 {
            g.add(f(x), c.clone());
        }
        g
    }
}

pub fn context_sum(g: &TypingContext, d: &TypingContext) -> TypingContext {
    g.sum(d)
}

impl PartialEq for TypingContext {
    fn eq(&self, other: &TypingContext) -> bool {
        self.to_string() == other.to_string()
    }
}

impl Eq for TypingContext {}

impl fmt::Display for TypingContext {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let items: Vec<String> = self.0.iter().map(|(x, c)| format!("{x}:{c}")).collect();
        f.write_str(&items.join(", "))
    }
}

impl fmt::Debug for TypingContext {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{{self}}}")
    }
}

impl FromIterator<(Name, CollectionType)> for TypingContext {
    fn from_iter<I: IntoIterator<Item = (Name, CollectionType)>>(iter: I) -> TypingContext {
        let mut g = TypingContext::new();
        for (x, c) in iter {
            g.add(x, c);
        }
        g
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::typesys::CompType;

    fn tau() -> CollectionType {
        CollectionType::single(CompType::unit())
    }

    #[test]
    fn sums() {
        let e = TypingContext::new();
        assert_eq!(context_sum(&e, &e), e);
        let x = TypingContext::single(Name::new("x"), tau());
        let xx = context_sum(&x, &x);
        assert_eq!(xx.get(&Name::new("x")).len(), 2);
        assert_eq!(xx.to_string(), "x:[=>, =>]");
        let y = TypingContext::single(Name::new("y"), tau());
        assert_eq!(context_sum(&x, &y).to_string(), "x:[=>], y:[=>]");
        assert_eq!(context_sum(&x, &y), context_sum(&y, &x));
    }

    #[test]
    fn empty_entries_vanish() {
        let g = TypingContext::single(Name::new("x"), CollectionType::empty());
        assert!(g.is_empty());
        let x = TypingContext::single(Name::new("x"), tau());
        assert_eq!(x.minus(&x), Some(TypingContext::new()));
        assert_eq!(TypingContext::new().minus(&x), None);
    }
}

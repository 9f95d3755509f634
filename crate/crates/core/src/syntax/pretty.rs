use std::fmt;

use super::{Location, Name, Term};

#[derive(Clone, Copy, PartialEq)]
enum Slot {
    Top,
    SeqLeft,
    Body,
}

fn loc_prefix(f: &mut fmt::Formatter<'_>, a: &Location) -> fmt::Result {
    if a.is_default() {
        Ok(())
    } else {
        write!(f, "{a}")
    }
}

fn binder(f: &mut fmt::Formatter<'_>, x: &Name) -> fmt::Result {
    if x.is_wildcard() {
        f.write_str("_")
    } else {
        write!(f, "{x}")
    }
}

fn write_term(f: &mut fmt::Formatter<'_>, t: &Term, slot: Slot) -> fmt::Result {
    match t {
        Term::Var(x) => write!(f, "{x}"),
        Term::Skip => f.write_str("*"),
        Term::Pop(a, x, m) => {
            loc_prefix(f, a)?;
            f.write_str("<")?;
            binder(f, x)?;
            f.write_str(">.")?;
            write_term(f, m, Slot::Body)
        }
        Term::Push(n, a, m) => {
            f.write_str("[")?;
            write_term(f, n, Slot::Top)?;
            f.write_str("]")?;
            loc_prefix(f, a)?;
            f.write_str(".")?;
            write_term(f, m, Slot::Body)
        }
        Term::Seq(n, m) => {
            let paren = slot != Slot::Top;
            if paren {
                f.write_str("(")?;
            }
            write_term(f, n, Slot::SeqLeft)?;
            f.write_str(";")?;
            write_term(f, m, Slot::Top)?;
            if paren {
                f.write_str(")")?;
            }
            Ok(())
        }
    }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_term(f, self, Slot::Top)
    }
}

use crate::syntax::Term;

fn spine_w(t: &Term, full: bool) -> bool {
    match t {
        Term::Pop(_, _, m) => spine_w(m, full),
        _ => spine_v(t, full),
    }
}

fn spine_v(t: &Term, full: bool) -> bool {
    let mut cur = t;
    loop {
        match cur {
            Term::Push(n, _, v) => {
                if full && !spine_w(n, true) {
                    return false;
                }
                cur = v;
            }
            Term::Seq(x, w) => return matches!(**x, Term::Var(_)) && spine_w(w, full),
            Term::Var(_) | Term::Skip => return true,
            Term::Pop(..) => return false,
        }
    }
}

/// Membership in the spine normal forms: pops, then pushes with arbitrary
/// arguments, ending in `*`, `x`, or `x;W`.
pub fn is_spine_normal(t: &Term) -> bool {
    spine_w(t, false)
}

/// Membership in the normal forms: as spine normal, with normal arguments.
pub fn is_normal(t: &Term) -> bool {
    spine_w(t, true)
}

/// Sum of `|M|` over subterms `M;N`, and of `|M|` over subterms `[N]a.M`.
pub fn non_beta_measure(t: &Term) -> (usize, usize) {
    let (mut seqs, mut pushes) = (0, 0);
    let mut todo = vec![t];
    while let Some(t) = todo.pop() {
        match t {
            Term::Var(_) | Term::Skip => {}
            Term::Pop(_, _, m) => todo.push(m),
            Term::Push(n, _, m) => {
                pushes += m.size();
                todo.push(n);
                todo.push(m);
            }
            Term::Seq(m, n) => {
                seqs += m.size();
                todo.push(m);
                todo.push(n);
            }
        }
    }
    (seqs, pushes)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::syntax::parse;

    fn t(s: &str) -> Term {
        parse(s).unwrap()
    }

    #[test]
    fn spine_normal_forms() {
        assert!(is_spine_normal(&t("a<x>.x")));
        assert!(is_spine_normal(&t("[[*].<x>.x]a.x")));
        assert!(!is_spine_normal(&t("*;x")));
        assert!(!is_spine_normal(&t("[*].<x>.x")));
        assert!(is_spine_normal(&t("<x>.[x].(x;<y>.y)")));
    }

    #[test]
    fn normal_forms() {
        assert!(is_normal(&t("[*].x")));
        assert!(!is_normal(&t("[[*].<y>.y]a.x")));
        assert!(is_normal(&t("x;<y>.y")));
    }

    #[test]
    fn measures() {
        assert_eq!(non_beta_measure(&t("*")), (0, 0));
        assert_eq!(non_beta_measure(&t("*;*")), (1, 0));
        assert_eq!(non_beta_measure(&t("[*]b.a<x>.*")), (0, 2));
    }
}

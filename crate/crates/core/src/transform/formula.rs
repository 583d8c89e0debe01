use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use crate::lang::{Expr, Sort};

/// Separators that derive a name from a program variable: `x#2` (SSA
/// version), `x'3` (fresh variable introduced by sp), `x@in` / `x@out`
/// (canonical region variables). Source identifiers never contain them.
const NAME_SEPARATORS: [char; 3] = ['#', '\'', '@'];

/// The program variable a derived name stands for.
pub fn base_name(name: &str) -> &str {
    match name.find(NAME_SEPARATORS) {
        Some(i) => &name[..i],
        None => name,
    }
}

/// Canonical name of a variable's value on entry to the fault region.
pub fn entry_var(var: &str) -> String {
    format!("{var}@in")
}

/// Canonical name of a region output's synthesized value.
pub fn output_var(var: &str) -> String {
    format!("{var}@out")
}

pub fn is_output_var(name: &str) -> bool {
    name.ends_with("@out")
}

/// Sorts of program variables; derived names share their base's sort. Names
/// with no recorded sort are words.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct SortEnv(BTreeMap<String, Sort>);

impl SortEnv {
    pub fn new() -> SortEnv {
        SortEnv::default()
    }

    pub fn insert(&mut self, var: impl Into<String>, sort: Sort) {
        self.0.insert(var.into(), sort);
    }

    pub fn sort(&self, name: &str) -> Sort {
        self.0.get(base_name(name)).copied().unwrap_or(Sort::Word)
    }

    /// Number of bits a variable occupies at `width`.
    pub fn bits(&self, name: &str, width: u32) -> u32 {
        match self.sort(name) {
            Sort::Bool => 1,
            Sort::Word => width,
        }
    }
}

impl From<BTreeMap<String, Sort>> for SortEnv {
    fn from(m: BTreeMap<String, Sort>) -> SortEnv {
        SortEnv(m)
    }
}

/// First-order formula over fixed-width bit-vector atoms.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Formula {
    Const(bool),
    /// A Boolean-sorted expression.
    Atom(Expr),
    Not(Box<Formula>),
    And(Vec<Formula>),
    Or(Vec<Formula>),
    Implies(Box<Formula>, Box<Formula>),
    Iff(Box<Formula>, Box<Formula>),
    Exists(String, Box<Formula>),
}

impl Formula {
    pub fn atom(e: Expr) -> Formula {
        match e {
            Expr::Bool(b) => Formula::Const(b),
            e => Formula::Atom(e),
        }
    }

    #[allow(clippy::should_implement_trait)]
    pub fn not(f: Formula) -> Formula {
        Formula::Not(Box::new(f))
    }

    pub fn and(fs: impl IntoIterator<Item = Formula>) -> Formula {
        Formula::And(fs.into_iter().collect())
    }

    pub fn or(fs: impl IntoIterator<Item = Formula>) -> Formula {
        Formula::Or(fs.into_iter().collect())
    }

    pub fn implies(a: Formula, b: Formula) -> Formula {
        Formula::Implies(Box::new(a), Box::new(b))
    }

    pub fn iff(a: Formula, b: Formula) -> Formula {
        Formula::Iff(Box::new(a), Box::new(b))
    }

    pub fn exists(v: impl Into<String>, f: Formula) -> Formula {
        Formula::Exists(v.into(), Box::new(f))
    }

    pub fn forall(v: impl Into<String>, f: Formula) -> Formula {
        Formula::not(Formula::exists(v, Formula::not(f)))
    }

    /// Every variable name occurring in the formula, bound or free.
    pub fn vars(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.walk_names(&mut |n| {
            out.insert(n.to_string());
        });
        out
    }

    fn walk_names<'a>(&'a self, f: &mut impl FnMut(&'a str)) {
        match self {
            Formula::Const(_) => {}
            Formula::Atom(e) => e.visit_vars(f),
            Formula::Not(g) => g.walk_names(f),
            Formula::And(gs) | Formula::Or(gs) => gs.iter().for_each(|g| g.walk_names(f)),
            Formula::Implies(a, b) | Formula::Iff(a, b) => {
                a.walk_names(f);
                b.walk_names(f);
            }
            Formula::Exists(v, g) => {
                f(v);
                g.walk_names(f);
            }
        }
    }

    pub fn free_vars(&self) -> BTreeSet<String> {
        fn go(f: &Formula, bound: &mut Vec<String>, out: &mut BTreeSet<String>) {
            match f {
                Formula::Const(_) => {}
                Formula::Atom(e) => e.visit_vars(&mut |v| {
                    if !bound.iter().any(|b| b == v) {
                        out.insert(v.to_string());
                    }
                }),
                Formula::Not(g) => go(g, bound, out),
                Formula::And(gs) | Formula::Or(gs) => gs.iter().for_each(|g| go(g, bound, out)),
                Formula::Implies(a, b) | Formula::Iff(a, b) => {
                    go(a, bound, out);
                    go(b, bound, out);
                }
                Formula::Exists(v, g) => {
                    bound.push(v.clone());
                    go(g, bound, out);
                    bound.pop();
                }
            }
        }
        let mut out = BTreeSet::new();
        go(self, &mut Vec::new(), &mut out);
        out
    }

    /// `self[name/with]`, rewriting free occurrences only.
    pub fn substitute(&self, name: &str, with: &Expr) -> Formula {
        match self {
            Formula::Const(_) => self.clone(),
            Formula::Atom(e) => Formula::Atom(e.substitute(name, with)),
            Formula::Not(g) => Formula::not(g.substitute(name, with)),
            Formula::And(gs) => Formula::And(gs.iter().map(|g| g.substitute(name, with)).collect()),
            Formula::Or(gs) => Formula::Or(gs.iter().map(|g| g.substitute(name, with)).collect()),
            Formula::Implies(a, b) => Formula::implies(a.substitute(name, with), b.substitute(name, with)),
            Formula::Iff(a, b) => Formula::iff(a.substitute(name, with), b.substitute(name, with)),
            Formula::Exists(v, _) if v == name => self.clone(),
            Formula::Exists(v, g) => Formula::exists(v.clone(), g.substitute(name, with)),
        }
    }

    /// Renames free variables through `map`.
    pub fn rename_free(&self, map: &BTreeMap<String, String>) -> Formula {
        fn go(f: &Formula, map: &BTreeMap<String, String>, bound: &mut Vec<String>) -> Formula {
            match f {
                Formula::Const(_) => f.clone(),
                Formula::Atom(e) => Formula::Atom(e.rename(&|v| {
                    if bound.iter().any(|b| b == v) {
                        None
                    } else {
                        map.get(v).cloned()
                    }
                })),
                Formula::Not(g) => Formula::not(go(g, map, bound)),
                Formula::And(gs) => Formula::And(gs.iter().map(|g| go(g, map, bound)).collect()),
                Formula::Or(gs) => Formula::Or(gs.iter().map(|g| go(g, map, bound)).collect()),
                Formula::Implies(a, b) => Formula::implies(go(a, map, bound), go(b, map, bound)),
                Formula::Iff(a, b) => Formula::iff(go(a, map, bound), go(b, map, bound)),
                Formula::Exists(v, g) => {
                    bound.push(v.clone());
                    let inner = go(g, map, bound);
                    bound.pop();
                    Formula::exists(v.clone(), inner)
                }
            }
        }
        go(self, map, &mut Vec::new())
    }

    pub fn quantifier_count(&self) -> usize {
        match self {
            Formula::Const(_) | Formula::Atom(_) => 0,
            Formula::Not(g) => g.quantifier_count(),
            Formula::And(gs) | Formula::Or(gs) => gs.iter().map(Formula::quantifier_count).sum(),
            Formula::Implies(a, b) | Formula::Iff(a, b) => a.quantifier_count() + b.quantifier_count(),
            Formula::Exists(_, g) => 1 + g.quantifier_count(),
        }
    }

    /// Direct recursive evaluation; quantifiers range over the whole domain
    /// of the bound variable's sort. Used as an oracle for the BDD engine.
    pub fn eval(&self, width: u32, sorts: &SortEnv, env: &BTreeMap<String, u64>) -> bool {
        match self {
            Formula::Const(b) => *b,
            Formula::Atom(e) => e.eval(width, &|v| *env.get(v).unwrap_or_else(|| panic!("unbound `{v}`"))) != 0,
            Formula::Not(g) => !g.eval(width, sorts, env),
            Formula::And(gs) => gs.iter().all(|g| g.eval(width, sorts, env)),
            Formula::Or(gs) => gs.iter().any(|g| g.eval(width, sorts, env)),
            Formula::Implies(a, b) => !a.eval(width, sorts, env) || b.eval(width, sorts, env),
            Formula::Iff(a, b) => a.eval(width, sorts, env) == b.eval(width, sorts, env),
            Formula::Exists(v, g) => {
                let mut inner = env.clone();
                (0..1u64 << sorts.bits(v, width)).any(|val| {
                    inner.insert(v.clone(), val);
                    g.eval(width, sorts, &inner)
                })
            }
        }
    }

    fn fmt_prec(&self, f: &mut fmt::Formatter<'_>, prec: u8) -> fmt::Result {
        // 0: top, 1: operand of -> / <->, 2: operand of || , 3: operand of &&, 4: unary
        let (mine, body): (u8, Box<dyn Fn(&mut fmt::Formatter<'_>) -> fmt::Result + '_>) = match self {
            Formula::Const(b) => (5, Box::new(move |f| write!(f, "{b}"))),
            Formula::Atom(e) => match e {
                Expr::Var(_) | Expr::Lit(_) | Expr::Bool(_) => (5, Box::new(move |f| write!(f, "{e}"))),
                _ => (4, Box::new(move |f| write!(f, "{e}"))),
            },
            Formula::Not(g) => (4, Box::new(move |f| {
                f.write_str("!")?;
                g.fmt_prec(f, 5)
            })),
            Formula::And(gs) | Formula::Or(gs) if gs.len() == 1 => return gs[0].fmt_prec(f, prec),
            Formula::And(gs) | Formula::Or(gs) if gs.is_empty() => {
                let b = matches!(self, Formula::And(_));
                (5, Box::new(move |f| write!(f, "{b}")))
            }
            Formula::And(gs) => (3, Box::new(move |f| join(f, gs, " && ", 4))),
            Formula::Or(gs) => (2, Box::new(move |f| join(f, gs, " || ", 3))),
            Formula::Implies(a, b) => (1, Box::new(move |f| {
                a.fmt_prec(f, 2)?;
                f.write_str(" -> ")?;
                b.fmt_prec(f, 1)
            })),
            Formula::Iff(a, b) => (1, Box::new(move |f| {
                a.fmt_prec(f, 2)?;
                f.write_str(" <-> ")?;
                b.fmt_prec(f, 2)
            })),
            Formula::Exists(v, g) => (0, Box::new(move |f| {
                write!(f, "exists {v}. ")?;
                g.fmt_prec(f, 0)
            })),
        };
        if mine < prec {
            f.write_str("(")?;
            body(f)?;
            f.write_str(")")
        } else {
            body(f)
        }
    }
}

fn join(f: &mut fmt::Formatter<'_>, gs: &[Formula], sep: &str, prec: u8) -> fmt::Result {
    for (i, g) in gs.iter().enumerate() {
        if i > 0 {
            f.write_str(sep)?;
        }
        g.fmt_prec(f, prec)?;
    }
    Ok(())
}

/// Prints in source-expression syntax, with `exists v.` for quantifiers.
impl fmt::Display for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.fmt_prec(f, 0)
    }
}

impl From<Expr> for Formula {
    fn from(e: Expr) -> Formula {
        Formula::atom(e)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lang::parse_expr;

    fn atom(s: &str) -> Formula {
        Formula::atom(parse_expr(s).unwrap())
    }

    #[test]
    fn base_names() {
        assert_eq!(base_name("most#3"), "most");
        assert_eq!(base_name("x'1"), "x");
        assert_eq!(base_name("least@out"), "least");
        assert_eq!(base_name("plain"), "plain");
    }

    #[test]
    fn substitution_respects_binders() {
        let f = Formula::and([atom("x == y"), Formula::exists("x", atom("x < y"))]);
        let g = f.substitute("x", &parse_expr("z + 1").unwrap());
        assert_eq!(g.to_string(), "z + 1 == y && (exists x. x < y)");
        assert_eq!(g.free_vars(), ["y", "z"].iter().map(|s| s.to_string()).collect());
    }

    #[test]
    fn eval_quantifiers() {
        let sorts = SortEnv::new();
        let f = Formula::exists("y", atom("y == x + 1"));
        let env = BTreeMap::from([("x".to_string(), 3)]);
        assert!(f.eval(2, &sorts, &env));
        let g = Formula::forall("y", atom("y == x"));
        assert!(!g.eval(2, &sorts, &env));
    }

    #[test]
    fn printing() {
        let f = Formula::implies(Formula::not(atom("x < 2")), atom("x == 2"));
        assert_eq!(f.to_string(), "!(x < 2) -> x == 2");
        let g = Formula::exists("x'1", Formula::and([atom("x == x'1 + 1"), atom("x'1 == 1")]));
        assert_eq!(g.to_string(), "exists x'1. x == x'1 + 1 && x'1 == 1");
    }
}

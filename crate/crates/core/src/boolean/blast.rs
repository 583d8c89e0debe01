use std::collections::BTreeSet;

use super::aig::{Aig, Lit, Quant};
use crate::lang::{word_mask, BinOp, Expr, Sort, UnOp};
use crate::transform::{base_name, Formula, SortEnv};

/// Translates well-sorted expressions into AIG literals. Words are vectors
/// of literals, least significant bit first.
pub struct Blaster<'a> {
    aig: &'a mut Aig,
    width: u32,
    sorts: &'a SortEnv,
}

impl<'a> Blaster<'a> {
    pub fn new(aig: &'a mut Aig, width: u32, sorts: &'a SortEnv) -> Blaster<'a> {
        Blaster { aig, width, sorts }
    }

    fn is_bool(&self, e: &Expr) -> bool {
        match e {
            Expr::Bool(_) => true,
            Expr::Lit(_) => false,
            Expr::Var(v) => self.sorts.sort(v) == Sort::Bool,
            Expr::Unary(op, _) => *op == UnOp::Not,
            Expr::Binary(op, ..) => op.is_comparison() || matches!(op, BinOp::And | BinOp::Or),
        }
    }

    fn constant(&self, c: u64) -> Vec<Lit> {
        (0..self.width).map(|i| if c >> i & 1 == 1 { Lit::TRUE } else { Lit::FALSE }).collect()
    }

    pub fn word(&mut self, e: &Expr) -> Vec<Lit> {
        match e {
            Expr::Lit(c) => self.constant(*c),
            Expr::Var(v) => (0..self.width).map(|i| self.aig.input(v, i)).collect(),
            Expr::Bool(_) => panic!("boolean `{e}` used as a word"),
            Expr::Unary(op, a) => {
                let a = self.word(a);
                match op {
                    UnOp::BitNot => a.into_iter().map(|l| !l).collect(),
                    UnOp::Neg => {
                        let zero = self.constant(0);
                        self.sub(&zero, &a)
                    }
                    UnOp::Not => panic!("boolean `{e}` used as a word"),
                }
            }
            Expr::Binary(op, l, r) => {
                if let (BinOp::Shl | BinOp::Shr, Expr::Lit(k)) = (op, r.as_ref()) {
                    let a = self.word(l);
                    return self.shift_const(&a, k & word_mask(self.width), *op == BinOp::Shl);
                }
                let a = self.word(l);
                let b = self.word(r);
                match op {
                    BinOp::Add => self.add(&a, &b, Lit::FALSE),
                    BinOp::Sub => self.sub(&a, &b),
                    BinOp::BitAnd => self.zip(&a, &b, Aig::and),
                    BinOp::BitOr => self.zip(&a, &b, Aig::or),
                    BinOp::BitXor => self.zip(&a, &b, Aig::xor),
                    BinOp::Shl => self.barrel(&a, &b, true),
                    BinOp::Shr => self.barrel(&a, &b, false),
                    _ => panic!("boolean `{e}` used as a word"),
                }
            }
        }
    }

    pub fn boolean(&mut self, e: &Expr) -> Lit {
        match e {
            Expr::Bool(b) => {
                if *b {
                    Lit::TRUE
                } else {
                    Lit::FALSE
                }
            }
            Expr::Var(v) if self.sorts.sort(v) == Sort::Bool => self.aig.input(v, 0),
            Expr::Unary(UnOp::Not, a) => !self.boolean(a),
            Expr::Binary(BinOp::And, l, r) => {
                let (a, b) = (self.boolean(l), self.boolean(r));
                self.aig.and(a, b)
            }
            Expr::Binary(BinOp::Or, l, r) => {
                let (a, b) = (self.boolean(l), self.boolean(r));
                self.aig.or(a, b)
            }
            Expr::Binary(op @ (BinOp::Eq | BinOp::Ne), l, r) if self.is_bool(l) => {
                let (a, b) = (self.boolean(l), self.boolean(r));
                let x = self.aig.xnor(a, b);
                if *op == BinOp::Eq {
                    x
                } else {
                    !x
                }
            }
            Expr::Binary(op, l, r) if op.is_comparison() => {
                let a = self.word(l);
                let b = self.word(r);
                match op {
                    BinOp::Eq => self.eq(&a, &b),
                    BinOp::Ne => !self.eq(&a, &b),
                    BinOp::Lt => self.ult(&a, &b),
                    BinOp::Gt => self.ult(&b, &a),
                    BinOp::Le => !self.ult(&b, &a),
                    BinOp::Ge => !self.ult(&a, &b),
                    _ => unreachable!(),
                }
            }
            _ => panic!("word `{e}` used as a boolean"),
        }
    }

    fn zip(&mut self, a: &[Lit], b: &[Lit], f: fn(&mut Aig, Lit, Lit) -> Lit) -> Vec<Lit> {
        a.iter().zip(b).map(|(&x, &y)| f(self.aig, x, y)).collect()
    }

    fn add(&mut self, a: &[Lit], b: &[Lit], carry_in: Lit) -> Vec<Lit> {
        let mut carry = carry_in;
        let mut out = Vec::with_capacity(a.len());
        for (&x, &y) in a.iter().zip(b) {
            let p = self.aig.xor(x, y);
            out.push(self.aig.xor(p, carry));
            let g = self.aig.and(x, y);
            let t = self.aig.and(p, carry);
            carry = self.aig.or(g, t);
        }
        out
    }

    fn sub(&mut self, a: &[Lit], b: &[Lit]) -> Vec<Lit> {
        let nb: Vec<Lit> = b.iter().map(|&l| !l).collect();
        self.add(a, &nb, Lit::TRUE)
    }

    fn shift_const(&mut self, a: &[Lit], k: u64, left: bool) -> Vec<Lit> {
        let w = a.len();
        (0..w)
            .map(|i| {
                let src = if left { (i as u64).checked_sub(k) } else { Some(i as u64 + k) };
                match src {
                    Some(s) if s < w as u64 => a[s as usize],
                    _ => Lit::FALSE,
                }
            })
            .collect()
    }

    /// Logarithmic shifter; amounts of `width` or more yield zero.
    fn barrel(&mut self, a: &[Lit], amount: &[Lit], left: bool) -> Vec<Lit> {
        let w = a.len() as u64;
        let mut cur = a.to_vec();
        let mut overflow = Lit::FALSE;
        for (j, &s) in amount.iter().enumerate() {
            let step = 1u64.checked_shl(j as u32).unwrap_or(u64::MAX);
            if step >= w {
                overflow = self.aig.or(overflow, s);
                continue;
            }
            let shifted = self.shift_const(&cur, step, left);
            cur = cur.iter().zip(&shifted).map(|(&keep, &sh)| self.aig.mux(s, sh, keep)).collect();
        }
        cur.into_iter().map(|l| self.aig.and(l, !overflow)).collect()
    }

    fn eq(&mut self, a: &[Lit], b: &[Lit]) -> Lit {
        let bits: Vec<Lit> = a.iter().zip(b).map(|(&x, &y)| self.aig.xnor(x, y)).collect();
        self.aig.and_all(bits)
    }

    /// Unsigned `a < b`, scanning from the least significant bit.
    fn ult(&mut self, a: &[Lit], b: &[Lit]) -> Lit {
        let mut lt = Lit::FALSE;
        for (&x, &y) in a.iter().zip(b) {
            let here = self.aig.and(!x, y);
            let same = self.aig.xnor(x, y);
            let keep = self.aig.and(same, lt);
            lt = self.aig.or(here, keep);
        }
        lt
    }

    /// Literal of a quantifier-free formula.
    pub fn formula(&mut self, f: &Formula) -> Lit {
        match f {
            Formula::Const(b) => {
                if *b {
                    Lit::TRUE
                } else {
                    Lit::FALSE
                }
            }
            Formula::Atom(e) => self.boolean(e),
            Formula::Not(g) => !self.formula(g),
            Formula::And(gs) => {
                let ls: Vec<Lit> = gs.iter().map(|g| self.formula(g)).collect();
                self.aig.and_all(ls)
            }
            Formula::Or(gs) => {
                let ls: Vec<Lit> = gs.iter().map(|g| self.formula(g)).collect();
                self.aig.or_all(ls)
            }
            Formula::Implies(a, b) => {
                let (a, b) = (self.formula(a), self.formula(b));
                self.aig.or(!a, b)
            }
            Formula::Iff(a, b) => {
                let (a, b) = (self.formula(a), self.formula(b));
                self.aig.xnor(a, b)
            }
            Formula::Exists(..) => panic!("quantifier inside a matrix"),
        }
    }
}

/// Expands every `<->` with a quantified side into two implications.
fn expand_quantified_iff(f: &Formula) -> Formula {
    match f {
        Formula::Const(_) | Formula::Atom(_) => f.clone(),
        Formula::Not(g) => Formula::not(expand_quantified_iff(g)),
        Formula::And(gs) => Formula::And(gs.iter().map(expand_quantified_iff).collect()),
        Formula::Or(gs) => Formula::Or(gs.iter().map(expand_quantified_iff).collect()),
        Formula::Implies(a, b) => Formula::implies(expand_quantified_iff(a), expand_quantified_iff(b)),
        Formula::Iff(a, b) => {
            let (a, b) = (expand_quantified_iff(a), expand_quantified_iff(b));
            if a.quantifier_count() + b.quantifier_count() == 0 {
                Formula::iff(a, b)
            } else {
                Formula::and([Formula::implies(a.clone(), b.clone()), Formula::implies(b, a)])
            }
        }
        Formula::Exists(v, g) => Formula::exists(v.clone(), expand_quantified_iff(g)),
    }
}

/// Alpha-renames binders so that no name is bound twice or both bound and free.
pub fn distinct_binders(f: &Formula) -> Formula {
    fn go(f: &Formula, used: &mut BTreeSet<String>, all: &mut BTreeSet<String>) -> Formula {
        match f {
            Formula::Const(_) | Formula::Atom(_) => f.clone(),
            Formula::Not(g) => Formula::not(go(g, used, all)),
            Formula::And(gs) => Formula::And(gs.iter().map(|g| go(g, used, all)).collect()),
            Formula::Or(gs) => Formula::Or(gs.iter().map(|g| go(g, used, all)).collect()),
            Formula::Implies(a, b) => {
                let a = go(a, used, all);
                Formula::implies(a, go(b, used, all))
            }
            Formula::Iff(a, b) => {
                let a = go(a, used, all);
                Formula::iff(a, go(b, used, all))
            }
            Formula::Exists(v, g) => {
                if used.insert(v.clone()) {
                    Formula::exists(v.clone(), go(g, used, all))
                } else {
                    let base = base_name(v).to_string();
                    let fresh = (1..)
                        .map(|n| format!("{base}'{n}"))
                        .find(|c| !all.contains(c))
                        .expect("unbounded supply of names");
                    all.insert(fresh.clone());
                    used.insert(fresh.clone());
                    let body = g.substitute(v, &Expr::var(fresh.clone()));
                    Formula::exists(fresh, go(&body, used, all))
                }
            }
        }
    }
    let mut used = f.free_vars();
    let mut all = f.vars();
    go(f, &mut used, &mut all)
}

/// Prenex normal form of a formula with distinct binders.
pub fn prenex(f: &Formula) -> (Vec<(Quant, String)>, Formula) {
    fn flip(q: Vec<(Quant, String)>) -> Vec<(Quant, String)> {
        q.into_iter().map(|(k, v)| (k.flip(), v)).collect()
    }
    match f {
        Formula::Const(_) | Formula::Atom(_) | Formula::Iff(..) => (Vec::new(), f.clone()),
        Formula::Not(g) => {
            let (q, m) = prenex(g);
            (flip(q), Formula::not(m))
        }
        Formula::And(gs) | Formula::Or(gs) => {
            let mut prefix = Vec::new();
            let mut ms = Vec::new();
            for g in gs {
                let (q, m) = prenex(g);
                prefix.extend(q);
                ms.push(m);
            }
            let m = if matches!(f, Formula::And(_)) { Formula::And(ms) } else { Formula::Or(ms) };
            (prefix, m)
        }
        Formula::Implies(a, b) => {
            let (qa, ma) = prenex(a);
            let (qb, mb) = prenex(b);
            let mut prefix = flip(qa);
            prefix.extend(qb);
            (prefix, Formula::implies(ma, mb))
        }
        Formula::Exists(v, g) => {
            let (q, m) = prenex(g);
            let mut prefix = vec![(Quant::Exists, v.clone())];
            prefix.extend(q);
            (prefix, m)
        }
    }
}

/// Bit-blasts a formula into an AIG with one output and a quantifier prefix.
pub fn bitblast(f: &Formula, width: u32, sorts: &SortEnv) -> Aig {
    let f = distinct_binders(&expand_quantified_iff(f));
    let (prefix, matrix) = prenex(&f);
    let mut aig = Aig::new();
    let out = Blaster::new(&mut aig, width, sorts).formula(&matrix);
    aig.outputs.push(("phi".to_string(), out));
    aig.prefix = prefix;
    aig
}

#[cfg(test)]
mod tests {
    use std::collections::BTreeMap;

    use super::*;
    use crate::boolean::BddStore;
    use crate::lang::parse_expr;
    use proptest::prelude::*;

    fn atom(s: &str) -> Formula {
        Formula::atom(parse_expr(s).unwrap())
    }

    fn word_expr() -> impl Strategy<Value = String> {
        prop_oneof![
            Just("x".to_string()),
            Just("y".to_string()),
            (0u64..20).prop_map(|v| v.to_string()),
        ]
        .prop_recursive(3, 10, 2, |inner| {
            prop_oneof![
                (inner.clone(), prop::sample::select(vec!["+", "-", "&", "|", "^", "<<", ">>"]), inner.clone())
                    .prop_map(|(l, op, r)| format!("({l} {op} {r})")),
                inner.clone().prop_map(|e| format!("~{e}")),
                inner.prop_map(|e| format!("-{e}")),
            ]
        })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(96))]

        #[test]
        fn words_match_evaluation(e in word_expr(), width in 1u32..=4) {
            let e = parse_expr(&e).unwrap();
            let e = e.rename(&|_| None);
            let sorts = SortEnv::new();
            let mut aig = Aig::new();
            let bits = Blaster::new(&mut aig, width, &sorts).word(&e);
            for x in 0..1u64 << width {
                for y in 0..1u64 << width {
                    let env = |v: &str| if v == "x" { x } else { y };
                    let want = e.eval(width, &env) & word_mask(width);
                    let got = bits.iter().enumerate().fold(0u64, |acc, (i, &l)| {
                        let b = aig.eval(l, &|v, bit| env(v) >> bit & 1 == 1);
                        acc | (b as u64) << i
                    });
                    prop_assert_eq!(got, want);
                }
            }
        }

        #[test]
        fn comparisons_match_evaluation(l in word_expr(), r in word_expr(), op in prop::sample::select(vec!["<", "<=", "==", "!=", ">", ">="])) {
            let width = 3;
            let e = parse_expr(&format!("{l} {op} {r}")).unwrap();
            let sorts = SortEnv::new();
            let mut aig = Aig::new();
            let lit = Blaster::new(&mut aig, width, &sorts).boolean(&e);
            for x in 0..8u64 {
                for y in 0..8u64 {
                    let env = |v: &str| if v == "x" { x } else { y };
                    let want = e.eval(width, &env) != 0;
                    prop_assert_eq!(aig.eval(lit, &|v, bit| env(v) >> bit & 1 == 1), want);
                }
            }
        }
    }

    #[test]
    fn shift_by_width_or_more_is_zero() {
        let sorts = SortEnv::new();
        let mut aig = Aig::new();
        let e = parse_expr("x << y").unwrap();
        let bits = Blaster::new(&mut aig, 3, &sorts).word(&e);
        for y in 3..8u64 {
            for &b in &bits {
                assert!(!aig.eval(b, &|v, bit| if v == "x" { true } else { y >> bit & 1 == 1 }));
            }
        }
    }

    fn quantified() -> Vec<Formula> {
        let ex = |v: &str, f| Formula::exists(v, f);
        vec![
            ex("y", atom("y == x + 1")),
            Formula::not(ex("y", atom("y + y == x"))),
            Formula::implies(ex("y", atom("y < x")), ex("y", atom("y + 1 == x"))),
            Formula::iff(ex("y", atom("y < x")), atom("x != 0")),
            Formula::iff(ex("y", atom("y + y == x")), ex("z", atom("(x & 1) == (z & 0)"))),
            Formula::and([ex("y", atom("x == y")), Formula::forall("y", atom("y <= x"))]),
            Formula::or([Formula::forall("y", Formula::exists("z", atom("z - y == x"))), atom("x == 3")]),
        ]
    }

    #[test]
    fn prenex_route_agrees_with_direct_route_and_oracle() {
        let sorts = SortEnv::new();
        for width in [2, 3] {
            for f in quantified() {
                let mut store = BddStore::new(width, sorts.clone());
                let direct = store.formula(&f).unwrap();
                let aig = bitblast(&f, width, &sorts);
                let via_prefix = store.to_bdd(&aig).unwrap();
                assert_eq!(direct, via_prefix, "{f}");
                for x in 0..1u64 << width {
                    let env = BTreeMap::from([("x".to_string(), x)]);
                    let want = f.eval(width, &sorts, &env);
                    assert_eq!(store.eval(direct, &|_, bit| x >> bit & 1 == 1), want, "{f} at x={x}");
                }
            }
        }
    }

    #[test]
    fn repeated_binders_are_renamed() {
        let f = Formula::and([Formula::exists("y", atom("y == x")), Formula::exists("y", atom("y < x"))]);
        let g = distinct_binders(&f);
        assert_eq!(g.to_string(), "(exists y. y == x) && (exists y'1. y'1 < x)");
        let (prefix, _) = prenex(&g);
        assert_eq!(prefix, vec![(Quant::Exists, "y".to_string()), (Quant::Exists, "y'1".to_string())]);
    }
}

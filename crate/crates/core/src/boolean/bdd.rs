use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt::Write;

use super::aig::{Aig, AigNode, Lit, Quant};
use super::blast::Blaster;
use crate::transform::{base_name, is_output_var, Formula, SortEnv};

pub const DEFAULT_NODE_LIMIT: usize = 1_000_000;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum BddError {
    #[error("BDD node limit of {0} exceeded")]
    NodeLimit(usize),
    #[error("too many BDD variables")]
    TooManyVariables,
}

/// Handle to a node of a [`BddStore`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Bdd(u32);

impl Bdd {
    pub const FALSE: Bdd = Bdd(0);
    pub const TRUE: Bdd = Bdd(1);

    pub fn is_const(self) -> bool {
        self.0 < 2
    }
}

#[derive(Debug, Clone, Copy)]
struct Node {
    level: u32,
    low: Bdd,
    high: Bdd,
}

const TERMINAL_LEVEL: u32 = u32::MAX;
const ZONE_SHIFT: u32 = 30;
const BIT_SHIFT: u32 = 24;
const BASE_SHIFT: u32 = 12;
const FIELD: u32 = 1 << 12;

/// Variable order: names ending in `@out` come after everything else; within
/// a zone, bits are interleaved least significant first; within a bit,
/// program variables follow declaration order and their derived names
/// (SSA versions, fresh and canonical names) follow first use.
#[derive(Debug, Clone, Default)]
struct VarOrder {
    base_index: HashMap<String, u32>,
    bases: u32,
    slots: HashMap<String, (u32, u32)>,
    names: HashMap<(u32, u32), String>,
    instances: HashMap<u32, u32>,
}

impl VarOrder {
    fn declare(&mut self, base: &str) -> Result<u32, BddError> {
        if let Some(&b) = self.base_index.get(base) {
            return Ok(b);
        }
        if self.bases >= FIELD {
            return Err(BddError::TooManyVariables);
        }
        let b = self.bases;
        self.bases += 1;
        self.base_index.insert(base.to_string(), b);
        Ok(b)
    }

    fn slot(&mut self, name: &str) -> Result<(u32, u32), BddError> {
        if let Some(&s) = self.slots.get(name) {
            return Ok(s);
        }
        let b = self.declare(base_name(name))?;
        let inst = self.instances.entry(b).or_insert(0);
        if *inst >= FIELD {
            return Err(BddError::TooManyVariables);
        }
        let s = (b, *inst);
        *inst += 1;
        self.slots.insert(name.to_string(), s);
        self.names.insert(s, name.to_string());
        Ok(s)
    }

    fn level(&mut self, name: &str, bit: u32) -> Result<u32, BddError> {
        let (b, i) = self.slot(name)?;
        let zone = is_output_var(name) as u32;
        Ok(zone << ZONE_SHIFT | bit << BIT_SHIFT | b << BASE_SHIFT | i)
    }

    fn decode(&self, level: u32) -> (&str, u32) {
        let bit = (level >> BIT_SHIFT) & 0x3f;
        let b = (level >> BASE_SHIFT) & (FIELD - 1);
        let i = level & (FIELD - 1);
        (&self.names[&(b, i)], bit)
    }
}

/// Reduced ordered BDDs sharing one unique table.
#[derive(Debug, Clone)]
pub struct BddStore {
    nodes: Vec<Node>,
    unique: HashMap<(u32, Bdd, Bdd), Bdd>,
    ite_cache: HashMap<(Bdd, Bdd, Bdd), Bdd>,
    node_limit: usize,
    order: VarOrder,
    width: u32,
    sorts: SortEnv,
}

impl BddStore {
    pub fn new(width: u32, sorts: SortEnv) -> BddStore {
        let terminal = |b| Node { level: TERMINAL_LEVEL, low: b, high: b };
        BddStore {
            nodes: vec![terminal(Bdd::FALSE), terminal(Bdd::TRUE)],
            unique: HashMap::new(),
            ite_cache: HashMap::new(),
            node_limit: DEFAULT_NODE_LIMIT,
            order: VarOrder::default(),
            width,
            sorts,
        }
    }

    pub fn with_node_limit(mut self, limit: usize) -> BddStore {
        self.node_limit = limit;
        self
    }

    /// Fixes the relative order of program variables before any BDD is built.
    pub fn declare<'a>(&mut self, vars: impl IntoIterator<Item = &'a str>) -> Result<(), BddError> {
        for v in vars {
            self.order.declare(base_name(v))?;
        }
        Ok(())
    }

    pub fn width(&self) -> u32 {
        self.width
    }

    pub fn sorts(&self) -> &SortEnv {
        &self.sorts
    }

    /// Bits occupied by a variable.
    pub fn bits(&self, name: &str) -> u32 {
        self.sorts.bits(name, self.width)
    }

    /// Total nodes allocated, terminals included.
    pub fn allocated(&self) -> usize {
        self.nodes.len()
    }

    pub fn level(&mut self, name: &str, bit: u32) -> Result<u32, BddError> {
        self.order.level(name, bit)
    }

    pub fn levels(&mut self, name: &str) -> Result<Vec<u32>, BddError> {
        (0..self.bits(name)).map(|b| self.level(name, b)).collect()
    }

    /// Variable name and bit index of a level.
    pub fn decode(&self, level: u32) -> (&str, u32) {
        self.order.decode(level)
    }

    fn mk(&mut self, level: u32, low: Bdd, high: Bdd) -> Result<Bdd, BddError> {
        if low == high {
            return Ok(low);
        }
        if let Some(&b) = self.unique.get(&(level, low, high)) {
            return Ok(b);
        }
        if self.nodes.len() >= self.node_limit {
            return Err(BddError::NodeLimit(self.node_limit));
        }
        let b = Bdd(self.nodes.len() as u32);
        self.nodes.push(Node { level, low, high });
        self.unique.insert((level, low, high), b);
        Ok(b)
    }

    pub fn var(&mut self, name: &str, bit: u32) -> Result<Bdd, BddError> {
        let l = self.level(name, bit)?;
        self.mk(l, Bdd::FALSE, Bdd::TRUE)
    }

    pub fn top_level(&self, f: Bdd) -> u32 {
        self.nodes[f.0 as usize].level
    }

    pub fn low(&self, f: Bdd) -> Bdd {
        self.nodes[f.0 as usize].low
    }

    pub fn high(&self, f: Bdd) -> Bdd {
        self.nodes[f.0 as usize].high
    }

    fn cofactors(&self, f: Bdd, level: u32) -> (Bdd, Bdd) {
        let n = self.nodes[f.0 as usize];
        if n.level == level {
            (n.low, n.high)
        } else {
            (f, f)
        }
    }

    pub fn ite(&mut self, f: Bdd, g: Bdd, h: Bdd) -> Result<Bdd, BddError> {
        if f == Bdd::TRUE || g == h {
            return Ok(g);
        }
        if f == Bdd::FALSE {
            return Ok(h);
        }
        if g == Bdd::TRUE && h == Bdd::FALSE {
            return Ok(f);
        }
        if let Some(&r) = self.ite_cache.get(&(f, g, h)) {
            return Ok(r);
        }
        let top = self.top_level(f).min(self.top_level(g)).min(self.top_level(h));
        let (f0, f1) = self.cofactors(f, top);
        let (g0, g1) = self.cofactors(g, top);
        let (h0, h1) = self.cofactors(h, top);
        let t = self.ite(f1, g1, h1)?;
        let e = self.ite(f0, g0, h0)?;
        let r = self.mk(top, e, t)?;
        self.ite_cache.insert((f, g, h), r);
        Ok(r)
    }

    pub fn not(&mut self, f: Bdd) -> Result<Bdd, BddError> {
        self.ite(f, Bdd::FALSE, Bdd::TRUE)
    }

    pub fn and(&mut self, f: Bdd, g: Bdd) -> Result<Bdd, BddError> {
        self.ite(f, g, Bdd::FALSE)
    }

    pub fn or(&mut self, f: Bdd, g: Bdd) -> Result<Bdd, BddError> {
        self.ite(f, Bdd::TRUE, g)
    }

    pub fn xor(&mut self, f: Bdd, g: Bdd) -> Result<Bdd, BddError> {
        let ng = self.not(g)?;
        self.ite(f, ng, g)
    }

    pub fn implies(&mut self, f: Bdd, g: Bdd) -> Result<Bdd, BddError> {
        self.ite(f, g, Bdd::TRUE)
    }

    pub fn iff(&mut self, f: Bdd, g: Bdd) -> Result<Bdd, BddError> {
        let ng = self.not(g)?;
        self.ite(f, g, ng)
    }

    /// Existentially quantifies the given levels.
    pub fn exists(&mut self, f: Bdd, levels: &BTreeSet<u32>) -> Result<Bdd, BddError> {
        let Some(&last) = levels.last() else { return Ok(f) };
        let mut memo = HashMap::new();
        self.exists_rec(f, levels, last, &mut memo)
    }

    fn exists_rec(
        &mut self,
        f: Bdd,
        levels: &BTreeSet<u32>,
        last: u32,
        memo: &mut HashMap<Bdd, Bdd>,
    ) -> Result<Bdd, BddError> {
        let n = self.nodes[f.0 as usize];
        if f.is_const() || n.level > last {
            return Ok(f);
        }
        if let Some(&r) = memo.get(&f) {
            return Ok(r);
        }
        let lo = self.exists_rec(n.low, levels, last, memo)?;
        let r = if levels.contains(&n.level) && lo == Bdd::TRUE {
            Bdd::TRUE
        } else {
            let hi = self.exists_rec(n.high, levels, last, memo)?;
            if levels.contains(&n.level) {
                self.or(lo, hi)?
            } else {
                self.mk(n.level, lo, hi)?
            }
        };
        memo.insert(f, r);
        Ok(r)
    }

    pub fn forall(&mut self, f: Bdd, levels: &BTreeSet<u32>) -> Result<Bdd, BddError> {
        let nf = self.not(f)?;
        let e = self.exists(nf, levels)?;
        self.not(e)
    }

    fn var_levels<'a>(&mut self, names: impl IntoIterator<Item = &'a str>) -> Result<BTreeSet<u32>, BddError> {
        let mut set = BTreeSet::new();
        for n in names {
            set.extend(self.levels(n)?);
        }
        Ok(set)
    }

    pub fn exists_vars<'a>(&mut self, f: Bdd, names: impl IntoIterator<Item = &'a str>) -> Result<Bdd, BddError> {
        let levels = self.var_levels(names)?;
        self.exists(f, &levels)
    }

    pub fn forall_vars<'a>(&mut self, f: Bdd, names: impl IntoIterator<Item = &'a str>) -> Result<Bdd, BddError> {
        let levels = self.var_levels(names)?;
        self.forall(f, &levels)
    }

    /// `f` with the variable at `level` fixed to `value`.
    pub fn cofactor(&mut self, f: Bdd, level: u32, value: bool) -> Result<Bdd, BddError> {
        let mut memo = HashMap::new();
        self.cofactor_rec(f, level, value, &mut memo)
    }

    fn cofactor_rec(&mut self, f: Bdd, level: u32, value: bool, memo: &mut HashMap<Bdd, Bdd>) -> Result<Bdd, BddError> {
        let n = self.nodes[f.0 as usize];
        if f.is_const() || n.level > level {
            return Ok(f);
        }
        if n.level == level {
            return Ok(if value { n.high } else { n.low });
        }
        if let Some(&r) = memo.get(&f) {
            return Ok(r);
        }
        let lo = self.cofactor_rec(n.low, level, value, memo)?;
        let hi = self.cofactor_rec(n.high, level, value, memo)?;
        let r = self.mk(n.level, lo, hi)?;
        memo.insert(f, r);
        Ok(r)
    }

    /// `f[level := g]`.
    pub fn compose(&mut self, f: Bdd, level: u32, g: Bdd) -> Result<Bdd, BddError> {
        let hi = self.cofactor(f, level, true)?;
        let lo = self.cofactor(f, level, false)?;
        self.ite(g, hi, lo)
    }

    /// A function that agrees with `f` wherever `care` holds, chosen to be
    /// small: branches that `care` rules out are skipped and variables that
    /// only `care` depends on are quantified away.
    pub fn restrict(&mut self, f: Bdd, care: Bdd) -> Result<Bdd, BddError> {
        let mut memo = HashMap::new();
        self.restrict_rec(f, care, &mut memo)
    }

    fn restrict_rec(&mut self, f: Bdd, c: Bdd, memo: &mut HashMap<(Bdd, Bdd), Bdd>) -> Result<Bdd, BddError> {
        if c == Bdd::FALSE || c == Bdd::TRUE || f.is_const() {
            return Ok(f);
        }
        if f == c {
            return Ok(Bdd::TRUE);
        }
        if let Some(&r) = memo.get(&(f, c)) {
            return Ok(r);
        }
        let (fl, cl) = (self.top_level(f), self.top_level(c));
        let r = if cl < fl {
            let c = self.or(self.low(c), self.high(c))?;
            self.restrict_rec(f, c, memo)?
        } else {
            let (f0, f1) = self.cofactors(f, fl);
            let (c0, c1) = self.cofactors(c, fl);
            if c0 == Bdd::FALSE {
                self.restrict_rec(f1, c1, memo)?
            } else if c1 == Bdd::FALSE {
                self.restrict_rec(f0, c0, memo)?
            } else {
                let lo = self.restrict_rec(f0, c0, memo)?;
                let hi = self.restrict_rec(f1, c1, memo)?;
                self.mk(fl, lo, hi)?
            }
        };
        memo.insert((f, c), r);
        Ok(r)
    }

    pub fn is_valid(&self, f: Bdd) -> bool {
        f == Bdd::TRUE
    }

    pub fn is_sat(&self, f: Bdd) -> bool {
        f != Bdd::FALSE
    }

    /// The least satisfying assignment in variable order, reading every
    /// variable not on the returned path as 0. `None` when unsatisfiable.
    pub fn any_sat(&self, f: Bdd) -> Option<BTreeMap<u32, bool>> {
        if f == Bdd::FALSE {
            return None;
        }
        let mut out = BTreeMap::new();
        let mut cur = f;
        while !cur.is_const() {
            let n = self.nodes[cur.0 as usize];
            if n.low != Bdd::FALSE {
                out.insert(n.level, false);
                cur = n.low;
            } else {
                out.insert(n.level, true);
                cur = n.high;
            }
        }
        Some(out)
    }

    /// Word values of `names` in [`Self::any_sat`]'s assignment.
    pub fn sat_values(&mut self, f: Bdd, names: &[String]) -> Result<Option<BTreeMap<String, u64>>, BddError> {
        let Some(assignment) = self.any_sat(f) else { return Ok(None) };
        let mut out = BTreeMap::new();
        for n in names {
            let mut v = 0u64;
            for (bit, l) in self.levels(n)?.into_iter().enumerate() {
                if assignment.get(&l) == Some(&true) {
                    v |= 1 << bit;
                }
            }
            out.insert(n.clone(), v);
        }
        Ok(Some(out))
    }

    /// Evaluates `f` under a bit assignment.
    pub fn eval(&self, f: Bdd, bit: &impl Fn(&str, u32) -> bool) -> bool {
        let mut cur = f;
        while !cur.is_const() {
            let n = self.nodes[cur.0 as usize];
            let (name, b) = self.decode(n.level);
            cur = if bit(name, b) { n.high } else { n.low };
        }
        cur == Bdd::TRUE
    }

    /// Non-terminal nodes reachable from `f`.
    pub fn node_count(&self, f: Bdd) -> usize {
        self.reachable(f).len()
    }

    fn reachable(&self, f: Bdd) -> Vec<Bdd> {
        let mut seen = BTreeSet::new();
        let mut stack = vec![f];
        while let Some(b) = stack.pop() {
            if b.is_const() || !seen.insert(b) {
                continue;
            }
            stack.push(self.low(b));
            stack.push(self.high(b));
        }
        seen.into_iter().collect()
    }

    /// The variables `f` depends on, as levels.
    pub fn support(&self, f: Bdd) -> BTreeSet<u32> {
        self.reachable(f).into_iter().map(|b| self.top_level(b)).collect()
    }

    pub fn to_dot(&self, f: Bdd) -> String {
        let mut out = String::from("digraph bdd {\n  n0 [shape=box,label=\"0\"];\n  n1 [shape=box,label=\"1\"];\n");
        for b in self.reachable(f) {
            let n = self.nodes[b.0 as usize];
            let (name, bit) = self.decode(n.level);
            let _ = writeln!(out, "  n{} [label=\"{name}[{bit}]\"];", b.0);
            let _ = writeln!(out, "  n{} -> n{} [style=dashed];", b.0, n.low.0);
            let _ = writeln!(out, "  n{} -> n{};", b.0, n.high.0);
        }
        let _ = writeln!(out, "  root -> n{};\n}}", f.0);
        out
    }

    /// Converts an AIG literal, memoizing per node in `memo`.
    pub fn from_aig(&mut self, aig: &Aig, lit: Lit, memo: &mut HashMap<u32, Bdd>) -> Result<Bdd, BddError> {
        // iterative post-order keeps deep adders off the call stack
        let mut stack = vec![(lit.node(), false)];
        while let Some((n, expanded)) = stack.pop() {
            if memo.contains_key(&n) {
                continue;
            }
            match aig.node(n) {
                AigNode::Const => {
                    memo.insert(n, Bdd::FALSE);
                }
                AigNode::Input { var, bit } => {
                    let (var, bit) = (var.clone(), *bit);
                    let b = self.var(&var, bit)?;
                    memo.insert(n, b);
                }
                AigNode::And(a, b) => {
                    let (a, b) = (*a, *b);
                    if expanded {
                        let fa = self.lit_of(memo, a)?;
                        let fb = self.lit_of(memo, b)?;
                        let r = self.and(fa, fb)?;
                        memo.insert(n, r);
                    } else {
                        stack.push((n, true));
                        stack.push((a.node(), false));
                        stack.push((b.node(), false));
                    }
                }
            }
        }
        self.lit_of(memo, lit)
    }

    fn lit_of(&mut self, memo: &HashMap<u32, Bdd>, l: Lit) -> Result<Bdd, BddError> {
        let b = memo[&l.node()];
        if l.is_complemented() {
            self.not(b)
        } else {
            Ok(b)
        }
    }

    /// BDD of a prenex AIG: the first output under its quantifier prefix,
    /// quantifying innermost first.
    pub fn to_bdd(&mut self, aig: &Aig) -> Result<Bdd, BddError> {
        let lit = aig.outputs.first().map_or(Lit::TRUE, |o| o.1);
        let mut f = self.from_aig(aig, lit, &mut HashMap::new())?;
        for (q, v) in aig.prefix.iter().rev() {
            f = match q {
                Quant::Exists => self.exists_vars(f, [v.as_str()])?,
                Quant::Forall => self.forall_vars(f, [v.as_str()])?,
            };
        }
        Ok(f)
    }

    /// BDD of a formula by structural recursion, quantifying each
    /// existential where it occurs.
    pub fn formula(&mut self, f: &Formula) -> Result<Bdd, BddError> {
        match f {
            Formula::Const(b) => Ok(if *b { Bdd::TRUE } else { Bdd::FALSE }),
            Formula::Atom(e) => {
                let mut aig = Aig::new();
                let lit = Blaster::new(&mut aig, self.width, &self.sorts).boolean(e);
                self.from_aig(&aig, lit, &mut HashMap::new())
            }
            Formula::Not(g) => {
                let g = self.formula(g)?;
                self.not(g)
            }
            Formula::And(gs) => {
                let mut acc = Bdd::TRUE;
                for g in gs {
                    let b = self.formula(g)?;
                    acc = self.and(acc, b)?;
                    if acc == Bdd::FALSE {
                        break;
                    }
                }
                Ok(acc)
            }
            Formula::Or(gs) => {
                let mut acc = Bdd::FALSE;
                for g in gs {
                    let b = self.formula(g)?;
                    acc = self.or(acc, b)?;
                    if acc == Bdd::TRUE {
                        break;
                    }
                }
                Ok(acc)
            }
            Formula::Implies(a, b) => {
                let a = self.formula(a)?;
                if a == Bdd::FALSE {
                    return Ok(Bdd::TRUE);
                }
                let b = self.formula(b)?;
                self.implies(a, b)
            }
            Formula::Iff(a, b) => {
                let a = self.formula(a)?;
                let b = self.formula(b)?;
                self.iff(a, b)
            }
            Formula::Exists(v, g) => {
                let g = self.formula(g)?;
                self.exists_vars(g, [v.as_str()])
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lang::{parse_expr, Sort};

    fn store() -> BddStore {
        BddStore::new(2, SortEnv::new())
    }

    #[test]
    fn canonical_forms() {
        let mut s = store();
        let a = s.var("a", 0).unwrap();
        let b = s.var("b", 0).unwrap();
        let ab = s.and(a, b).unwrap();
        let ba = s.and(b, a).unwrap();
        assert_eq!(ab, ba);
        let na = s.not(a).unwrap();
        assert_eq!(s.or(a, na).unwrap(), Bdd::TRUE);
        let nab = s.not(ab).unwrap();
        let nb = s.not(b).unwrap();
        assert_eq!(nab, s.or(na, nb).unwrap());
    }

    #[test]
    fn variable_order() {
        let mut s = store();
        s.declare(["b", "a"]).unwrap();
        let a0 = s.level("a#0", 0).unwrap();
        let b0 = s.level("b#3", 0).unwrap();
        let a1 = s.level("a#0", 1).unwrap();
        let y0 = s.level("a@out", 0).unwrap();
        let a_in = s.level("a@in", 0).unwrap();
        assert!(b0 < a0 && a0 < a_in && a_in < a1 && a1 < y0);
        assert_eq!(s.decode(a1), ("a#0", 1));
    }

    #[test]
    fn quantifiers_and_composition() {
        let mut s = store();
        let a = s.var("a", 0).unwrap();
        let b = s.var("b", 0).unwrap();
        let f = s.xor(a, b).unwrap();
        let la: BTreeSet<u32> = [s.level("a", 0).unwrap()].into();
        assert_eq!(s.exists(f, &la).unwrap(), Bdd::TRUE);
        assert_eq!(s.forall(f, &la).unwrap(), Bdd::FALSE);
        let lb = s.level("b", 0).unwrap();
        assert_eq!(s.compose(f, lb, a).unwrap(), Bdd::FALSE);
        let na = s.not(a).unwrap();
        assert_eq!(s.cofactor(f, lb, false).unwrap(), a);
        assert_eq!(s.cofactor(f, lb, true).unwrap(), na);
    }

    #[test]
    fn restrict_agrees_on_care_set() {
        let mut s = store();
        let a = s.var("a", 0).unwrap();
        let b = s.var("b", 0).unwrap();
        let c = s.var("c", 0).unwrap();
        // (a & b) | (!a & c), cared for only where a holds
        let na = s.not(a).unwrap();
        let ab = s.and(a, b).unwrap();
        let nac = s.and(na, c).unwrap();
        let f = s.or(ab, nac).unwrap();
        assert_eq!(s.restrict(f, a).unwrap(), b);
        assert_eq!(s.restrict(f, Bdd::TRUE).unwrap(), f);
        assert_eq!(s.restrict(f, f).unwrap(), Bdd::TRUE);
        // care set over a variable f ignores
        let bc = s.xor(b, c).unwrap();
        let g = s.restrict(a, bc).unwrap();
        assert_eq!(g, a);
    }

    #[test]
    fn any_sat_prefers_zero() {
        let mut s = store();
        s.declare(["x", "y"]).unwrap();
        let f = s.formula(&Formula::atom(parse_expr("x + y == 3").unwrap())).unwrap();
        let v = s.sat_values(f, &["x".into(), "y".into()]).unwrap().unwrap();
        assert_eq!((v["x"], v["y"]), (0, 3));
        assert_eq!(s.sat_values(Bdd::FALSE, &["x".into()]).unwrap(), None);
    }

    #[test]
    fn node_limit_is_reported() {
        let mut s = BddStore::new(8, SortEnv::new()).with_node_limit(20);
        let r = s.formula(&Formula::atom(parse_expr("x + y == z + w").unwrap()));
        assert_eq!(r, Err(BddError::NodeLimit(20)));
    }

    #[test]
    fn bool_vars_have_one_bit() {
        let mut sorts = SortEnv::new();
        sorts.insert("t", Sort::Bool);
        let mut s = BddStore::new(4, sorts);
        assert_eq!(s.levels("t#2").unwrap().len(), 1);
        assert_eq!(s.levels("x").unwrap().len(), 4);
        let f = s.formula(&Formula::atom(parse_expr("t == (x < 3)").unwrap())).unwrap();
        let g = s.exists_vars(f, ["t"]).unwrap();
        assert_eq!(g, Bdd::TRUE);
    }

    #[test]
    fn dot_output_names_variables() {
        let mut s = store();
        let f = s.formula(&Formula::atom(parse_expr("x == 1").unwrap())).unwrap();
        let dot = s.to_dot(f);
        assert!(dot.contains("x[0]") && dot.contains("x[1]"));
    }
}

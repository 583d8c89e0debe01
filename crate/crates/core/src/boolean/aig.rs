use std::collections::HashMap;
use std::fmt::Write;
use std::ops::Not;

/// AIG literal: `node << 1 | complemented`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Lit(u32);

impl Lit {
    pub const FALSE: Lit = Lit(0);
    pub const TRUE: Lit = Lit(1);

    pub fn new(node: u32, complemented: bool) -> Lit {
        Lit(node << 1 | complemented as u32)
    }

    pub fn node(self) -> u32 {
        self.0 >> 1
    }

    pub fn is_complemented(self) -> bool {
        self.0 & 1 == 1
    }

    pub fn is_const(self) -> bool {
        self.node() == 0
    }

    pub fn raw(self) -> u32 {
        self.0
    }
}

impl Not for Lit {
    type Output = Lit;

    fn not(self) -> Lit {
        Lit(self.0 ^ 1)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Quant {
    Exists,
    Forall,
}

impl Quant {
    pub fn flip(self) -> Quant {
        match self {
            Quant::Exists => Quant::Forall,
            Quant::Forall => Quant::Exists,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum AigNode {
    Const,
    Input { var: String, bit: u32 },
    And(Lit, Lit),
}

/// Structurally hashed and-inverter graph. Node 0 is constant false.
#[derive(Debug, Clone)]
pub struct Aig {
    nodes: Vec<AigNode>,
    strash: HashMap<(Lit, Lit), u32>,
    inputs: HashMap<(String, u32), u32>,
    pub outputs: Vec<(String, Lit)>,
    /// Quantifier prefix, outermost first, over whole variables.
    pub prefix: Vec<(Quant, String)>,
}

impl Default for Aig {
    fn default() -> Aig {
        Aig::new()
    }
}

impl Aig {
    pub fn new() -> Aig {
        Aig {
            nodes: vec![AigNode::Const],
            strash: HashMap::new(),
            inputs: HashMap::new(),
            outputs: Vec::new(),
            prefix: Vec::new(),
        }
    }

    pub fn nodes(&self) -> &[AigNode] {
        &self.nodes
    }

    pub fn node(&self, id: u32) -> &AigNode {
        &self.nodes[id as usize]
    }

    pub fn input(&mut self, var: &str, bit: u32) -> Lit {
        if let Some(&id) = self.inputs.get(&(var.to_string(), bit)) {
            return Lit::new(id, false);
        }
        let id = self.nodes.len() as u32;
        self.nodes.push(AigNode::Input { var: var.to_string(), bit });
        self.inputs.insert((var.to_string(), bit), id);
        Lit::new(id, false)
    }

    pub fn and(&mut self, a: Lit, b: Lit) -> Lit {
        if a == Lit::FALSE || b == Lit::FALSE || a == !b {
            return Lit::FALSE;
        }
        if a == Lit::TRUE || a == b {
            return b;
        }
        if b == Lit::TRUE {
            return a;
        }
        let key = if a < b { (a, b) } else { (b, a) };
        if let Some(&id) = self.strash.get(&key) {
            return Lit::new(id, false);
        }
        let id = self.nodes.len() as u32;
        self.nodes.push(AigNode::And(key.0, key.1));
        self.strash.insert(key, id);
        Lit::new(id, false)
    }

    pub fn or(&mut self, a: Lit, b: Lit) -> Lit {
        !self.and(!a, !b)
    }

    pub fn xor(&mut self, a: Lit, b: Lit) -> Lit {
        let l = self.and(a, !b);
        let r = self.and(!a, b);
        self.or(l, r)
    }

    pub fn xnor(&mut self, a: Lit, b: Lit) -> Lit {
        !self.xor(a, b)
    }

    /// `s ? t : e`
    pub fn mux(&mut self, s: Lit, t: Lit, e: Lit) -> Lit {
        if t == e {
            return t;
        }
        let l = self.and(s, t);
        let r = self.and(!s, e);
        self.or(l, r)
    }

    pub fn and_all(&mut self, lits: impl IntoIterator<Item = Lit>) -> Lit {
        lits.into_iter().fold(Lit::TRUE, |acc, l| self.and(acc, l))
    }

    pub fn or_all(&mut self, lits: impl IntoIterator<Item = Lit>) -> Lit {
        lits.into_iter().fold(Lit::FALSE, |acc, l| self.or(acc, l))
    }

    /// Ids of the AND nodes in the cone of `roots`, ascending.
    pub fn cone(&self, roots: impl IntoIterator<Item = Lit>) -> Vec<u32> {
        let mut seen = vec![false; self.nodes.len()];
        let mut stack: Vec<u32> = roots.into_iter().map(Lit::node).collect();
        while let Some(n) = stack.pop() {
            if std::mem::replace(&mut seen[n as usize], true) {
                continue;
            }
            if let AigNode::And(a, b) = self.nodes[n as usize] {
                stack.push(a.node());
                stack.push(b.node());
            }
        }
        (0..self.nodes.len() as u32)
            .filter(|&n| seen[n as usize] && matches!(self.nodes[n as usize], AigNode::And(..)))
            .collect()
    }

    /// AND gates reachable from the outputs.
    pub fn and_count(&self) -> usize {
        self.cone(self.outputs.iter().map(|o| o.1)).len()
    }

    /// Evaluates a literal under an input assignment.
    pub fn eval(&self, lit: Lit, input: &impl Fn(&str, u32) -> bool) -> bool {
        let mut memo: HashMap<u32, bool> = HashMap::new();
        self.eval_memo(lit, input, &mut memo)
    }

    fn eval_memo(&self, lit: Lit, input: &impl Fn(&str, u32) -> bool, memo: &mut HashMap<u32, bool>) -> bool {
        let n = lit.node();
        let v = match memo.get(&n) {
            Some(&v) => v,
            None => {
                let v = match &self.nodes[n as usize] {
                    AigNode::Const => false,
                    AigNode::Input { var, bit } => input(var, *bit),
                    AigNode::And(a, b) => {
                        let (a, b) = (*a, *b);
                        self.eval_memo(a, input, memo) && self.eval_memo(b, input, memo)
                    }
                };
                memo.insert(n, v);
                v
            }
        };
        v ^ lit.is_complemented()
    }

    /// ASCII AIGER dump of the cone of the outputs, with a symbol table.
    pub fn to_aag(&self) -> String {
        let roots: Vec<Lit> = self.outputs.iter().map(|o| o.1).collect();
        let ands = self.cone(roots.iter().copied());
        let input_ids: Vec<u32> = (0..self.nodes.len() as u32)
            .filter(|&n| matches!(self.nodes[n as usize], AigNode::Input { .. }))
            .collect();
        let mut index: HashMap<u32, u32> = HashMap::new();
        for (i, &n) in input_ids.iter().chain(&ands).enumerate() {
            index.insert(n, i as u32 + 1);
        }
        let map = |l: Lit| -> u32 {
            if l.is_const() {
                l.raw()
            } else {
                index[&l.node()] << 1 | l.is_complemented() as u32
            }
        };
        let mut out = String::new();
        let _ = writeln!(
            out,
            "aag {} {} 0 {} {}",
            input_ids.len() + ands.len(),
            input_ids.len(),
            roots.len(),
            ands.len()
        );
        for &n in &input_ids {
            let _ = writeln!(out, "{}", index[&n] << 1);
        }
        for &r in &roots {
            let _ = writeln!(out, "{}", map(r));
        }
        for &n in &ands {
            if let AigNode::And(a, b) = self.nodes[n as usize] {
                let (x, y) = (map(a), map(b));
                let _ = writeln!(out, "{} {} {}", index[&n] << 1, x.max(y), x.min(y));
            }
        }
        for (i, &n) in input_ids.iter().enumerate() {
            if let AigNode::Input { var, bit } = &self.nodes[n as usize] {
                let _ = writeln!(out, "i{i} {var}[{bit}]");
            }
        }
        for (i, (name, _)) in self.outputs.iter().enumerate() {
            let _ = writeln!(out, "o{i} {name}");
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn structural_hashing_and_folding() {
        let mut g = Aig::new();
        let a = g.input("a", 0);
        let b = g.input("b", 0);
        let x = g.and(a, b);
        assert_eq!(g.and(b, a), x);
        assert_eq!(g.and(a, !a), Lit::FALSE);
        assert_eq!(g.and(a, Lit::TRUE), a);
        assert_eq!(g.and(a, a), a);
        assert_eq!(g.nodes().len(), 4);
    }

    #[test]
    fn xor_truth_table() {
        let mut g = Aig::new();
        let a = g.input("a", 0);
        let b = g.input("b", 0);
        let x = g.xor(a, b);
        for va in [false, true] {
            for vb in [false, true] {
                let v = g.eval(x, &|n, _| if n == "a" { va } else { vb });
                assert_eq!(v, va ^ vb);
            }
        }
    }

    #[test]
    fn aag_dump() {
        let mut g = Aig::new();
        let a = g.input("a", 0);
        let b = g.input("b", 1);
        let x = g.and(a, !b);
        g.outputs.push(("y".into(), !x));
        assert_eq!(g.and_count(), 1);
        assert_eq!(g.to_aag(), "aag 3 2 0 1 1\n2\n4\n7\n6 5 2\ni0 a[0]\ni1 b[1]\no0 y\n");
    }
}

//! Lowering synthesized netlists to statements and splicing them into the
//! fault region.

use std::collections::{BTreeMap, BTreeSet};

use crate::boolean::{AigNode, Lit};
use crate::lang::{
    is_reserved, renumber, BinOp, Expr, FaultRegion, Program, RegionError, Sort, Stmt, StmtKind,
};
use crate::synth::RepairNetlist;
use crate::transform::{base_name, SortEnv};

struct Namer<'a> {
    taken: &'a BTreeSet<String>,
    issued: BTreeSet<String>,
}

impl Namer<'_> {
    fn fresh(&mut self, stem: String) -> String {
        let mut name = stem;
        while self.taken.contains(&name) || self.issued.contains(&name) || is_reserved(&name) {
            name.push('_');
        }
        self.issued.insert(name.clone());
        name
    }
}

enum Shape {
    Const(u64),
    Copy(String),
    Complement(String),
    Bits,
}

/// Lowers a netlist to straight-line statements: input-bit extraction, one
/// statement per AND gate, then one assignment per output. Bit variables
/// hold 0 or 1. Outputs that are a constant, a copy or a complement of an
/// input word are assigned directly. `taken` holds names the statements
/// must not introduce.
pub fn netlist_to_stmts(n: &RepairNetlist, sorts: &SortEnv, width: u32, taken: &BTreeSet<String>) -> Vec<Stmt> {
    let aig = &n.aig;
    let input_of = |l: Lit| match aig.node(l.node()) {
        AigNode::Input { var, bit } => Some((base_name(var).to_string(), *bit)),
        _ => None,
    };
    let outputs: Vec<(String, &[Lit])> =
        n.outputs.iter().map(|(name, bits)| (base_name(name).to_string(), bits.as_slice())).collect();

    // outputs that can be written without gates; reading a variable already
    // overwritten by an earlier output is not allowed
    let mut shapes = Vec::new();
    let mut assigned: BTreeSet<&str> = BTreeSet::new();
    for (v, bits) in &outputs {
        let shape = if bits.iter().all(|l| l.is_const()) {
            Shape::Const(bits.iter().enumerate().map(|(j, l)| (*l == Lit::TRUE) as u64 * (1 << j)).sum())
        } else if sorts.sort(v) == Sort::Word {
            let srcs: Vec<_> = bits.iter().map(|&l| (input_of(l), l.is_complemented())).collect();
            let same = |neg: bool| -> Option<String> {
                let first = srcs[0].0.as_ref()?.0.clone();
                let ok = srcs
                    .iter()
                    .enumerate()
                    .all(|(j, (s, c))| *c == neg && s.as_ref() == Some(&(first.clone(), j as u32)));
                (ok && !assigned.contains(first.as_str())).then_some(first)
            };
            match (same(false), same(true)) {
                (Some(u), _) => Shape::Copy(u),
                (_, Some(u)) => Shape::Complement(u),
                _ => Shape::Bits,
            }
        } else {
            Shape::Bits
        };
        shapes.push(shape);
        assigned.insert(v);
    }

    let roots: Vec<Lit> = outputs
        .iter()
        .zip(&shapes)
        .filter(|(_, s)| matches!(s, Shape::Bits))
        .flat_map(|((_, bits), _)| bits.iter().copied())
        .collect();
    let gates = aig.cone(roots.iter().copied());
    let mut used_inputs: BTreeSet<u32> = BTreeSet::new();
    for &g in &gates {
        if let AigNode::And(a, b) = aig.node(g) {
            for l in [*a, *b] {
                if input_of(l).is_some() {
                    used_inputs.insert(l.node());
                }
            }
        }
    }
    for &l in &roots {
        if input_of(l).is_some() {
            used_inputs.insert(l.node());
        }
    }

    let mut namer = Namer { taken, issued: BTreeSet::new() };
    let mut names: BTreeMap<u32, String> = BTreeMap::new();
    let mut stmts = Vec::new();
    for &id in &used_inputs {
        let AigNode::Input { var, bit } = aig.node(id) else { unreachable!() };
        let u = base_name(var);
        let name = namer.fresh(format!("{u}_{bit}"));
        let word = Expr::var(u);
        let e = if width == 1 {
            word
        } else if *bit == 0 {
            Expr::binary(BinOp::BitAnd, word, Expr::Lit(1))
        } else {
            let shifted = Expr::binary(BinOp::Shr, word, Expr::Lit(*bit as u64));
            Expr::binary(BinOp::BitAnd, shifted, Expr::Lit(1))
        };
        stmts.push(Stmt::assign(0, name.clone(), e));
        names.insert(id, name);
    }
    let operand = |names: &BTreeMap<u32, String>, l: Lit| -> Expr {
        if l.is_const() {
            return Expr::Lit(l.is_complemented() as u64);
        }
        let v = Expr::var(names[&l.node()].clone());
        if l.is_complemented() {
            Expr::binary(BinOp::Sub, Expr::Lit(1), v)
        } else {
            v
        }
    };
    for (k, &g) in gates.iter().enumerate() {
        let AigNode::And(a, b) = aig.node(g) else { unreachable!() };
        let e = Expr::binary(BinOp::BitAnd, operand(&names, *a), operand(&names, *b));
        let name = namer.fresh(format!("o{k}"));
        stmts.push(Stmt::assign(0, name.clone(), e));
        names.insert(g, name);
    }

    for ((v, bits), shape) in outputs.iter().zip(&shapes) {
        let bool_out = sorts.sort(v) == Sort::Bool;
        let e = match shape {
            Shape::Const(c) if bool_out => Expr::Bool(*c == 1),
            Shape::Const(c) => Expr::Lit(*c),
            Shape::Copy(u) => Expr::var(u.clone()),
            Shape::Complement(u) => Expr::unary(crate::lang::UnOp::BitNot, Expr::var(u.clone())),
            Shape::Bits if bool_out => Expr::eq(operand(&names, bits[0]), Expr::Lit(1)),
            Shape::Bits => {
                let mut constant = 0u64;
                let mut terms = Vec::new();
                for (j, &l) in bits.iter().enumerate() {
                    if l == Lit::TRUE {
                        constant |= 1 << j;
                    } else if l != Lit::FALSE {
                        let t = operand(&names, l);
                        terms.push(if j == 0 { t } else { Expr::binary(BinOp::Shl, t, Expr::Lit(j as u64)) });
                    }
                }
                if constant != 0 || terms.is_empty() {
                    terms.push(Expr::Lit(constant));
                }
                terms.into_iter().reduce(|acc, t| Expr::binary(BinOp::BitOr, acc, t)).expect("non-empty")
            }
        };
        stmts.push(Stmt::assign(0, v.clone(), e));
    }
    stmts
}

/// Replaces the region's statements, renumbers and re-checks the program.
/// The returned region spans the new statements and keeps the outputs.
pub fn apply_repair(p: &Program, region: &FaultRegion, stmts: Vec<Stmt>) -> Result<(Program, FaultRegion), RegionError> {
    fn splice(block: &mut Vec<Stmt>, region: &FaultRegion, stmts: &mut Option<Vec<Stmt>>) -> bool {
        if let Some(first) = block.iter().position(|s| s.line == region.start) {
            let last = block.iter().rposition(|s| s.line == region.end).unwrap_or(first);
            block.splice(first..=last, stmts.take().unwrap_or_default());
            return true;
        }
        block.iter_mut().any(|s| match &mut s.kind {
            StmtKind::If(_, t, e) => splice(t, region, stmts) || splice(e, region, stmts),
            StmtKind::While(_, b) => splice(b, region, stmts),
            _ => false,
        })
    }
    let len = stmts.len();
    let mut body = p.body.clone();
    if !splice(&mut body, region, &mut Some(stmts)) {
        return Err(RegionError::NoSuchLine(region.start));
    }
    renumber(&mut body);
    let params = p.inputs().map(|v| v.name.clone()).collect();
    let q = Program::build(p.name.clone(), params, p.pre.clone(), p.post.clone(), body, p.width)?;
    let r = FaultRegion { start: region.start, end: region.start + len - 1, outputs: region.outputs.clone() };
    Ok((q, r))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::boolean::Aig;
    use crate::lang::{emit, parse, parse_expr, preprocess_guards, MINMAX};
    use proptest::prelude::*;

    fn run(stmts: &[Stmt], width: u32, env: &mut BTreeMap<String, u64>) {
        for s in stmts {
            let StmtKind::Assign(v, e) = &s.kind else { panic!("not straight-line") };
            let val = e.eval(width, &|n| env[n]);
            env.insert(v.clone(), val);
        }
    }

    fn identity(var: &str, out: &str, width: u32) -> RepairNetlist {
        let mut aig = Aig::new();
        let bits: Vec<Lit> = (0..width).map(|b| aig.input(&format!("{var}@in"), b)).collect();
        RepairNetlist { aig, inputs: vec![format!("{var}@in")], outputs: vec![(format!("{out}@out"), bits)] }
    }

    #[test]
    fn identity_folds_to_copy() {
        let stmts = netlist_to_stmts(&identity("input2", "most", 2), &SortEnv::new(), 2, &BTreeSet::new());
        assert_eq!(stmts.len(), 1);
        assert_eq!(stmts[0].kind, StmtKind::Assign("most".into(), Expr::var("input2")));
    }

    #[test]
    fn constant_output() {
        let aig = Aig::new();
        let n = RepairNetlist { aig, inputs: vec![], outputs: vec![("v@out".into(), vec![Lit::TRUE, Lit::FALSE])] };
        let stmts = netlist_to_stmts(&n, &SortEnv::new(), 2, &BTreeSet::new());
        assert_eq!(stmts.len(), 1);
        assert_eq!(stmts[0].kind, StmtKind::Assign("v".into(), Expr::Lit(1)));
    }

    #[test]
    fn single_gate() {
        let mut aig = Aig::new();
        let a = aig.input("a@in", 0);
        let b = aig.input("b@in", 1);
        let g = aig.and(a, !b);
        let n = RepairNetlist { aig, inputs: vec![], outputs: vec![("v@out".into(), vec![g, Lit::FALSE])] };
        let stmts = netlist_to_stmts(&n, &SortEnv::new(), 2, &BTreeSet::new());
        let text: Vec<String> = stmts.iter().map(|s| match &s.kind {
            StmtKind::Assign(v, e) => format!("{v} = {e};"),
            _ => unreachable!(),
        }).collect();
        assert_eq!(text, ["a_0 = a & 1;", "b_1 = b >> 1 & 1;", "o0 = a_0 & 1 - b_1;", "v = o0;"]);
        assert_eq!(text.iter().filter(|t| t.contains(" & ") && t.starts_with('o')).count(), 1);
    }

    #[test]
    fn fresh_names_avoid_program_variables() {
        let mut aig = Aig::new();
        let a = aig.input("a@in", 0);
        let b = aig.input("a@in", 1);
        let g = aig.and(a, b);
        let n = RepairNetlist { aig, inputs: vec![], outputs: vec![("v@out".into(), vec![g, a])] };
        let taken: BTreeSet<String> = ["a_0".to_string(), "o0".to_string()].into();
        let stmts = netlist_to_stmts(&n, &SortEnv::new(), 2, &taken);
        for s in &stmts {
            let StmtKind::Assign(v, _) = &s.kind else { unreachable!() };
            assert!(!taken.contains(v), "{v}");
        }
    }

    #[test]
    fn copy_is_not_folded_after_source_is_overwritten() {
        // swap: a' = b, b' = a
        let mut aig = Aig::new();
        let a: Vec<Lit> = (0..2).map(|i| aig.input("a@in", i)).collect();
        let b: Vec<Lit> = (0..2).map(|i| aig.input("b@in", i)).collect();
        let n = RepairNetlist { aig, inputs: vec![], outputs: vec![("a@out".into(), b), ("b@out".into(), a)] };
        let stmts = netlist_to_stmts(&n, &SortEnv::new(), 2, &BTreeSet::new());
        for x in 0..4 {
            for y in 0..4 {
                let mut env = BTreeMap::from([("a".to_string(), x), ("b".to_string(), y)]);
                run(&stmts, 2, &mut env);
                assert_eq!((env["a"], env["b"]), (y, x));
            }
        }
    }

    #[test]
    fn line_four_identity_restores_minmax() {
        let good = parse(MINMAX, 2).unwrap();
        let bad_src = MINMAX.replace("most = input2;", "most = input1;");
        let bad = parse(&bad_src, 2).unwrap();
        let (bad, region) = preprocess_guards(&bad, 4, 4).unwrap();
        let stmts = netlist_to_stmts(&identity("input2", "most", 2), &SortEnv::from(bad.sorts()), 2, &BTreeSet::new());
        let (fixed, r) = apply_repair(&bad, &region, stmts).unwrap();
        assert_eq!(fixed, good);
        assert_eq!(r, region);
        assert_eq!(parse(&emit(&fixed), 2).unwrap(), fixed);
    }

    #[test]
    fn replacing_with_own_statements_is_identity_and_keeps_branches() {
        let p = parse(MINMAX, 2).unwrap();
        let (q, r) = preprocess_guards(&p, 4, 4).unwrap();
        let (q2, r2) = apply_repair(&q, &r, vec![Stmt::assign(0, "most", parse_expr("input2").unwrap())]).unwrap();
        assert_eq!((q2, r2), (q, r.clone()));
        // growing the region shifts later lines but keeps the branch structure
        let grown = vec![
            Stmt::assign(0, "o0", parse_expr("input2 & 1").unwrap()),
            Stmt::assign(0, "most", parse_expr("input2").unwrap()),
        ];
        let (q3, r3) = apply_repair(&p, &r, grown).unwrap();
        assert_eq!((r3.start, r3.end), (4, 5));
        assert_eq!(q3.statement_count(), 11);
        assert!(matches!(q3.stmt_at(3).unwrap().kind, StmtKind::If(_, ref t, _) if t.len() == 2));
        assert!(matches!(q3.stmt_at(6).unwrap().kind, StmtKind::If(..)));
    }

    #[test]
    fn bool_output_compares_with_one() {
        let mut aig = Aig::new();
        let a = aig.input("x@in", 0);
        let b = aig.input("x@in", 1);
        let g = aig.and(!a, !b);
        let n = RepairNetlist { aig, inputs: vec![], outputs: vec![("t@out".into(), vec![g])] };
        let mut sorts = SortEnv::new();
        sorts.insert("t", Sort::Bool);
        let stmts = netlist_to_stmts(&n, &sorts, 2, &BTreeSet::new());
        let StmtKind::Assign(_, e) = &stmts.last().unwrap().kind else { unreachable!() };
        assert_eq!(e.to_string(), "o0 == 1");
    }

    // random netlists over two 2..3-bit inputs
    fn netlist_strategy() -> impl Strategy<Value = (u32, Vec<(usize, bool, usize, bool)>, Vec<Vec<(usize, bool)>>)> {
        (2u32..=3).prop_flat_map(|w| {
            (
                Just(w),
                prop::collection::vec((0usize..64, any::<bool>(), 0usize..64, any::<bool>()), 0..8),
                prop::collection::vec(prop::collection::vec((0usize..64, any::<bool>()), w as usize), 1..3),
            )
        })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(128))]

        #[test]
        fn emitted_statements_compute_the_netlist((w, gates, outs) in netlist_strategy()) {
            let mut aig = Aig::new();
            let mut pool: Vec<Lit> = vec![Lit::FALSE];
            for v in ["a@in", "b@in"] {
                for b in 0..w {
                    pool.push(aig.input(v, b));
                }
            }
            for (i, ni, j, nj) in gates {
                let x = pool[i % pool.len()];
                let y = pool[j % pool.len()];
                let g = aig.and(if ni { !x } else { x }, if nj { !y } else { y });
                pool.push(g);
            }
            let names = ["a@out", "b@out", "c@out"];
            let outputs: Vec<(String, Vec<Lit>)> = outs
                .iter()
                .enumerate()
                .map(|(k, bits)| {
                    let lits = bits.iter().map(|&(i, n)| { let l = pool[i % pool.len()]; if n { !l } else { l } }).collect();
                    (names[k].to_string(), lits)
                })
                .collect();
            let n = RepairNetlist { aig, inputs: vec!["a@in".into(), "b@in".into()], outputs };
            let taken: BTreeSet<String> = ["a", "b", "c"].iter().map(|s| s.to_string()).collect();
            let stmts = netlist_to_stmts(&n, &SortEnv::new(), w, &taken);
            for x in 0..1u64 << w {
                for y in 0..1u64 << w {
                    let inputs = BTreeMap::from([("a@in".to_string(), x), ("b@in".to_string(), y)]);
                    let want = n.eval(&inputs);
                    let mut env = BTreeMap::from([("a".to_string(), x), ("b".to_string(), y), ("c".to_string(), 0)]);
                    run(&stmts, w, &mut env);
                    for (name, value) in &want {
                        prop_assert_eq!(env[base_name(name)], *value, "{}", name);
                    }
                }
            }
        }
    }
}

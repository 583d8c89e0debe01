//! Boolean functional synthesis: decide `forall x. exists y. phi` and extract
//! a circuit computing witnesses for `y` from `x`.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use crate::boolean::{Aig, Bdd, BddError, BddStore, Lit, DEFAULT_NODE_LIMIT};
use crate::transform::{Formula, SortEnv};

#[derive(Debug, Clone)]
pub struct SynthesisProblem {
    /// Specification over `inputs` and `outputs`.
    pub phi: Formula,
    pub inputs: Vec<String>,
    pub outputs: Vec<String>,
    pub width: u32,
    pub sorts: SortEnv,
    pub node_limit: usize,
}

impl SynthesisProblem {
    pub fn new(phi: Formula, inputs: Vec<String>, outputs: Vec<String>, width: u32, sorts: SortEnv) -> Self {
        SynthesisProblem { phi, inputs, outputs, width, sorts, node_limit: DEFAULT_NODE_LIMIT }
    }

    fn store(&self) -> Result<BddStore, SynthError> {
        let unknown: Vec<String> = self
            .phi
            .free_vars()
            .into_iter()
            .filter(|v| !self.inputs.contains(v) && !self.outputs.contains(v))
            .collect();
        if !unknown.is_empty() {
            return Err(SynthError::UnknownVariables(unknown));
        }
        let mut store = BddStore::new(self.width, self.sorts.clone()).with_node_limit(self.node_limit);
        store.declare(self.inputs.iter().chain(&self.outputs).map(String::as_str))?;
        Ok(store)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum SynthError {
    #[error(transparent)]
    Bdd(#[from] BddError),
    #[error("specification mentions variables that are neither inputs nor outputs: {0:?}")]
    UnknownVariables(Vec<String>),
    #[error("extracted functions do not satisfy the specification")]
    PostCheck,
}

/// Circuit computing each output word from the input words.
#[derive(Debug, Clone)]
pub struct RepairNetlist {
    pub aig: Aig,
    pub inputs: Vec<String>,
    /// Output name and its bits, least significant first.
    pub outputs: Vec<(String, Vec<Lit>)>,
}

impl RepairNetlist {
    pub fn gate_count(&self) -> usize {
        self.aig.and_count()
    }

    pub fn eval(&self, inputs: &BTreeMap<String, u64>) -> BTreeMap<String, u64> {
        let bit = |v: &str, b: u32| inputs.get(v).is_some_and(|x| x >> b & 1 == 1);
        self.outputs
            .iter()
            .map(|(name, bits)| {
                let value = bits
                    .iter()
                    .enumerate()
                    .fold(0u64, |acc, (i, &l)| acc | (self.aig.eval(l, &bit) as u64) << i);
                (name.clone(), value)
            })
            .collect()
    }
}

#[derive(Debug, Clone)]
pub enum SynthOutcome {
    Realizable(RepairNetlist),
    /// An input valuation for which no output satisfies the specification.
    Unrealizable { witness: BTreeMap<String, u64> },
}

pub fn count_gates(n: &RepairNetlist) -> usize {
    n.gate_count()
}

pub fn is_realizable(problem: &SynthesisProblem) -> Result<bool, SynthError> {
    let mut store = problem.store()?;
    let r = store.formula(&problem.phi)?;
    let outs = store.exists_vars(r, problem.outputs.iter().map(String::as_str))?;
    Ok(store.forall_vars(outs, problem.inputs.iter().map(String::as_str))? == Bdd::TRUE)
}

pub fn extract(problem: &SynthesisProblem) -> Result<SynthOutcome, SynthError> {
    let mut store = problem.store()?;
    let r = store.formula(&problem.phi)?;
    let domain = store.exists_vars(r, problem.outputs.iter().map(String::as_str))?;
    if domain != Bdd::TRUE {
        let bad = store.not(domain)?;
        let witness = store.sat_values(bad, &problem.inputs)?.expect("non-valid domain has a counterexample");
        return Ok(SynthOutcome::Unrealizable { witness });
    }

    let mut y_levels = BTreeSet::new();
    for y in &problem.outputs {
        y_levels.extend(store.levels(y)?);
    }
    let y_levels: Vec<u32> = y_levels.into_iter().collect();
    let mut funcs: HashMap<u32, Bdd> = HashMap::new();
    let mut cur = r;
    for (i, &l) in y_levels.iter().enumerate() {
        let later: BTreeSet<u32> = y_levels[i + 1..].iter().copied().collect();
        let ri = store.exists(cur, &later)?;
        let hi = store.cofactor(ri, l, true)?;
        let lo = store.cofactor(ri, l, false)?;
        // the bit is forced only where exactly one value works
        let care = store.xor(hi, lo)?;
        let f = store.restrict(hi, care)?;
        cur = store.compose(cur, l, f)?;
        funcs.insert(l, f);
    }

    let mut check = r;
    for &l in &y_levels {
        check = store.compose(check, l, funcs[&l])?;
    }
    if check != Bdd::TRUE {
        return Err(SynthError::PostCheck);
    }

    let mut aig = Aig::new();
    let mut memo = HashMap::new();
    let mut outputs = Vec::new();
    for y in &problem.outputs {
        let mut bits = Vec::new();
        for (b, l) in store.levels(y)?.into_iter().enumerate() {
            let lit = to_aig(&store, &mut aig, funcs[&l], &mut memo);
            aig.outputs.push((format!("{y}[{b}]"), lit));
            bits.push(lit);
        }
        outputs.push((y.clone(), bits));
    }
    Ok(SynthOutcome::Realizable(RepairNetlist { aig, inputs: problem.inputs.clone(), outputs }))
}

/// Graphviz rendering of the specification's BDD.
pub fn relation_dot(problem: &SynthesisProblem) -> Result<String, SynthError> {
    let mut store = problem.store()?;
    let r = store.formula(&problem.phi)?;
    Ok(store.to_dot(r))
}

/// Multiplexer expansion of a BDD into the AIG.
fn to_aig(store: &BddStore, aig: &mut Aig, f: Bdd, memo: &mut HashMap<Bdd, Lit>) -> Lit {
    if f == Bdd::FALSE {
        return Lit::FALSE;
    }
    if f == Bdd::TRUE {
        return Lit::TRUE;
    }
    if let Some(&l) = memo.get(&f) {
        return l;
    }
    let (name, bit) = store.decode(store.top_level(f));
    let s = aig.input(name, bit);
    let hi = to_aig(store, aig, store.high(f), memo);
    let lo = to_aig(store, aig, store.low(f), memo);
    let lit = if hi == Lit::TRUE {
        aig.or(s, lo)
    } else if lo == Lit::FALSE {
        aig.and(s, hi)
    } else if hi == Lit::FALSE {
        aig.and(!s, lo)
    } else if lo == Lit::TRUE {
        aig.or(!s, hi)
    } else {
        aig.mux(s, hi, lo)
    };
    memo.insert(f, lit);
    lit
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lang::{parse_expr, Sort};
    use proptest::prelude::*;

    fn atom(s: &str) -> Formula {
        Formula::atom(parse_expr(s).unwrap())
    }

    fn problem(phi: &str, inputs: &[&str], outputs: &[&str], width: u32) -> SynthesisProblem {
        SynthesisProblem::new(
            atom(phi),
            inputs.iter().map(|s| s.to_string()).collect(),
            outputs.iter().map(|s| s.to_string()).collect(),
            width,
            SortEnv::new(),
        )
    }

    #[test]
    fn identity_needs_no_gates() {
        let p = problem("y@out == x@in", &["x@in"], &["y@out"], 2);
        let SynthOutcome::Realizable(n) = extract(&p).unwrap() else { panic!() };
        assert_eq!(n.gate_count(), 0);
        for x in 0..4 {
            assert_eq!(n.eval(&BTreeMap::from([("x@in".into(), x)]))["y@out"], x);
        }
    }

    #[test]
    fn maximum_of_two_words() {
        let p = problem(
            "y@out >= a@in && y@out >= b@in && (y@out == a@in || y@out == b@in)",
            &["a@in", "b@in"],
            &["y@out"],
            3,
        );
        assert!(is_realizable(&p).unwrap());
        let SynthOutcome::Realizable(n) = extract(&p).unwrap() else { panic!() };
        for a in 0..8 {
            for b in 0..8 {
                let out = n.eval(&BTreeMap::from([("a@in".into(), a), ("b@in".into(), b)]));
                assert_eq!(out["y@out"], a.max(b));
            }
        }
    }

    #[test]
    fn dont_cares_keep_circuits_small() {
        // y is free whenever x is odd; only even x force y == x
        let p = problem("(x@in & 1) == 1 || y@out == x@in", &["x@in"], &["y@out"], 3);
        let SynthOutcome::Realizable(n) = extract(&p).unwrap() else { panic!() };
        assert_eq!(n.gate_count(), 0);
        for x in (0..8).step_by(2) {
            assert_eq!(n.eval(&BTreeMap::from([("x@in".into(), x)]))["y@out"], x);
        }
    }

    #[test]
    fn unrealizable_has_witness() {
        let p = problem("y@out + y@out == x@in", &["x@in"], &["y@out"], 2);
        assert!(!is_realizable(&p).unwrap());
        let SynthOutcome::Unrealizable { witness } = extract(&p).unwrap() else { panic!() };
        assert_eq!(witness["x@in"], 1);
    }

    #[test]
    fn bool_outputs() {
        let mut p = problem("t@out == (x@in < 2)", &["x@in"], &["t@out"], 2);
        p.sorts.insert("t", Sort::Bool);
        let SynthOutcome::Realizable(n) = extract(&p).unwrap() else { panic!() };
        assert_eq!(n.outputs[0].1.len(), 1);
        for x in 0..4 {
            assert_eq!(n.eval(&BTreeMap::from([("x@in".into(), x)]))["t@out"], (x < 2) as u64);
        }
    }

    #[test]
    fn stray_variables_are_rejected() {
        let p = problem("y@out == z", &["x@in"], &["y@out"], 2);
        assert_eq!(extract(&p).unwrap_err(), SynthError::UnknownVariables(vec!["z".into()]));
    }

    #[test]
    fn node_limit_surfaces() {
        let mut p = problem("y@out == a@in + b@in + c@in", &["a@in", "b@in", "c@in"], &["y@out"], 8);
        p.node_limit = 50;
        assert!(matches!(extract(&p), Err(SynthError::Bdd(BddError::NodeLimit(50)))));
    }

    fn spec_strategy() -> impl Strategy<Value = Formula> {
        let word = prop_oneof![
            Just("x@in".to_string()),
            Just("y@out".to_string()),
            (0u64..4).prop_map(|v| v.to_string()),
        ]
        .prop_recursive(2, 6, 2, |inner| {
            (inner.clone(), prop::sample::select(vec!["+", "-", "&", "|", "^"]), inner)
                .prop_map(|(l, op, r)| format!("({l} {op} {r})"))
        });
        let atom_s = (word.clone(), prop::sample::select(vec!["<", "<=", "==", "!="]), word)
            .prop_map(|(l, op, r)| atom(&format!("{l} {op} {r}")));
        atom_s.prop_recursive(2, 8, 3, |inner| {
            prop_oneof![
                prop::collection::vec(inner.clone(), 1..3).prop_map(Formula::And),
                prop::collection::vec(inner.clone(), 1..3).prop_map(Formula::Or),
                inner.prop_map(Formula::not),
            ]
        })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(128))]

        // Realizability matches enumeration, and every extracted function
        // meets the specification on all inputs.
        #[test]
        fn extraction_is_sound_and_complete(phi in spec_strategy(), width in 1u32..=3) {
            let sorts = SortEnv::new();
            let p = SynthesisProblem::new(phi.clone(), vec!["x@in".into()], vec!["y@out".into()], width, sorts.clone());
            let sat = |x: u64, y: u64| {
                phi.eval(width, &sorts, &BTreeMap::from([("x@in".to_string(), x), ("y@out".to_string(), y)]))
            };
            let n = 1u64 << width;
            let oracle = (0..n).all(|x| (0..n).any(|y| sat(x, y)));
            prop_assert_eq!(is_realizable(&p).unwrap(), oracle);
            match extract(&p).unwrap() {
                SynthOutcome::Realizable(net) => {
                    prop_assert!(oracle);
                    for x in 0..n {
                        let y = net.eval(&BTreeMap::from([("x@in".to_string(), x)]))["y@out"];
                        prop_assert!(sat(x, y));
                    }
                }
                SynthOutcome::Unrealizable { witness } => {
                    prop_assert!(!oracle);
                    let x = witness["x@in"];
                    prop_assert!((0..n).all(|y| !sat(x, y)));
                }
            }
        }
    }
}

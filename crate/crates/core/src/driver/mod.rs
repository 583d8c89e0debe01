//! The repair loop: model checking, counterexample accumulation, synthesis
//! of the fault region and re-checking of the candidate, plus the
//! concrete interpreter and the fault-seeding benchmark.

mod bench;
mod interp;

use std::collections::{BTreeMap, BTreeSet};
use std::time::Instant;

use serde::Serialize;

pub use bench::{bench, format_table, seed_faults, BenchReport, BenchRow, FaultKind, Mutant};
pub use interp::{
    all_inputs, execute, find_violation, interpret, verify_exhaustive, ConcreteState, Execution, InputSpaceTooLarge,
    MAX_EXHAUSTIVE_BITS,
};

use crate::boolean::{BddError, BddStore, DEFAULT_NODE_LIMIT};
use crate::lang::{emit, emit_block, preprocess_guards, FaultRegion, Program, RegionError, Sort, Stmt, StmtKind};
use crate::paths::{enumerate_paths, path_for_bits, split_at_region, GuardBits, Path, PathError, PathStmt, DEFAULT_UNROLL};
use crate::repair::{apply_repair, netlist_to_stmts};
use crate::synth::{extract, RepairNetlist, SynthError, SynthOutcome, SynthesisProblem};
use crate::transform::{
    at_versions, base_name, entry_var, feasible_in, holds_in, output_var, sp, sp_seq, wp, wp_seq, Formula, SortEnv,
};

pub const DEFAULT_MAX_ITERS: usize = 64;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RepairConfig {
    pub unroll: usize,
    pub max_iters: usize,
    pub node_limit: usize,
}

impl Default for RepairConfig {
    fn default() -> Self {
        RepairConfig { unroll: DEFAULT_UNROLL, max_iters: DEFAULT_MAX_ITERS, node_limit: DEFAULT_NODE_LIMIT }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Outcome {
    Repaired,
    Unrealizable,
    RegionNotOnPath,
    BoundExceeded,
    ResourceLimit,
}

impl Outcome {
    pub fn exit_code(self) -> i32 {
        match self {
            Outcome::Repaired => 0,
            Outcome::Unrealizable => 2,
            Outcome::RegionNotOnPath => 3,
            Outcome::BoundExceeded => 4,
            Outcome::ResourceLimit => 5,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct IterationRecord {
    /// Guard bits of the counterexample path.
    pub path: String,
    /// AND gates of the candidate; absent when synthesis failed.
    pub gates: Option<usize>,
    pub realizable: bool,
    pub millis: u64,
}

/// Artifacts of the last synthesis step, for dumps.
#[derive(Debug, Clone, Default)]
pub struct Artifacts {
    pub problem: Option<SynthesisProblem>,
    pub netlist: Option<RepairNetlist>,
}

#[derive(Debug, Clone, Serialize)]
pub struct RunReport {
    pub outcome: Outcome,
    pub iterations: Vec<IterationRecord>,
    pub total_millis: u64,
    /// Final program text (the repaired program on success).
    pub program: String,
    /// Region-entry values for which no output satisfies all collected paths.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness: Option<BTreeMap<String, u64>>,
    /// The counterexample that ended the run without a synthesis step.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub failing_path: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub detail: Option<String>,
    #[serde(skip)]
    pub repaired: Option<Program>,
    #[serde(skip)]
    pub artifacts: Artifacts,
}

impl RunReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum DriverError {
    #[error(transparent)]
    Region(#[from] RegionError),
    #[error("line {0}: assert statements are not supported; state the property in the postcondition")]
    AssertUnsupported(usize),
    #[error("{0} lies inside a loop body")]
    RegionInLoop(FaultRegion),
    #[error(transparent)]
    Path(PathError),
    #[error("counterexample {0} was already corrected")]
    RepeatedCounterexample(GuardBits),
    #[error("repair broke previously corrected path {0}")]
    Monotonicity(GuardBits),
    #[error("no fixed point after {0} iterations")]
    MaxIterations(usize),
    #[error("synthesis failed: {0}")]
    Synthesis(SynthError),
    #[error(transparent)]
    InputSpace(#[from] InputSpaceTooLarge),
}

/// Result of checking every path of a program.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum CheckResult {
    Verified,
    /// The first complete path, in enumeration order, violating the contract.
    Counterexample(Path),
    /// All complete paths hold but this feasible one was cut at the unroll
    /// bound.
    BoundExceeded(Path),
}

fn new_store(p: &Program, node_limit: usize) -> Result<BddStore, BddError> {
    let mut store = BddStore::new(p.width, SortEnv::from(p.sorts())).with_node_limit(node_limit);
    store.declare(p.vars.iter().map(|v| v.name.as_str()))?;
    Ok(store)
}

pub fn model_check(
    p: &Program,
    unroll: usize,
    region: Option<&FaultRegion>,
    node_limit: usize,
) -> Result<CheckResult, BddError> {
    let mut store = new_store(p, node_limit)?;
    let pre = Formula::atom(p.pre.clone());
    let post = Formula::atom(p.post.clone());
    let mut truncated = None;
    for pi in enumerate_paths(p, unroll, region) {
        if pi.bound_exceeded {
            if truncated.is_none() && feasible_in(&mut store, &pre, &pi)? {
                truncated = Some(pi);
            }
            continue;
        }
        if !holds_in(&mut store, &pre, &pi, &post)? {
            return Ok(CheckResult::Counterexample(pi));
        }
    }
    Ok(truncated.map_or(CheckResult::Verified, CheckResult::BoundExceeded))
}

/// A counterexample split around the fault region.
#[derive(Debug, Clone)]
pub struct Counterexample {
    pub guard_bits: GuardBits,
    pub prefix: Path,
    pub region: Vec<PathStmt>,
    pub suffix: Path,
}

impl Counterexample {
    pub fn new(pi: &Path) -> Result<Counterexample, PathError> {
        let (prefix, region, suffix) = split_at_region(pi)?;
        Ok(Counterexample { guard_bits: pi.guard_bits.clone(), prefix, region, suffix })
    }
}

/// Collected counterexamples, in insertion order, unique by guard bits.
#[derive(Debug, Clone, Default)]
pub struct CounterexampleSet {
    items: Vec<Counterexample>,
}

impl CounterexampleSet {
    pub fn new() -> Self {
        Self::default()
    }

    /// Adds a counterexample; `false` if its guard bits are already present.
    pub fn insert(&mut self, c: Counterexample) -> bool {
        if self.contains(&c.guard_bits) {
            return false;
        }
        self.items.push(c);
        true
    }

    pub fn contains(&self, bits: &GuardBits) -> bool {
        self.items.iter().any(|c| &c.guard_bits == bits)
    }

    pub fn iter(&self) -> impl Iterator<Item = &Counterexample> {
        self.items.iter()
    }

    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }
}

/// Variables and sorts the synthesis specification ranges over.
#[derive(Debug, Clone)]
pub struct RegionSignature {
    /// Program variables in declaration order.
    pub vars: Vec<String>,
    /// Variables assigned by the region.
    pub outputs: Vec<String>,
    pub sorts: SortEnv,
    pub width: u32,
}

impl RegionSignature {
    pub fn new(p: &Program, region: &FaultRegion) -> RegionSignature {
        RegionSignature {
            vars: p.vars.iter().map(|v| v.name.clone()).collect(),
            outputs: region.outputs.clone(),
            sorts: SortEnv::from(p.sorts()),
            width: p.width,
        }
    }
}

/// One conjunct `sp(pre, prefix) -> wp(post, suffix)` per counterexample,
/// over `v@in` (value at region entry) and `v@out` (region output). Boolean
/// entry values cannot feed a word-level repair and are quantified
/// universally.
pub fn build_phi(set: &CounterexampleSet, pre: &Formula, post: &Formula, sig: &RegionSignature) -> SynthesisProblem {
    let mut conjuncts = Vec::new();
    for c in set.iter() {
        let before = sp_seq(&at_versions(pre, &c.prefix.entry_map), &c.prefix.stmts);
        let to_entry: BTreeMap<String, String> =
            c.prefix.ssa_map.iter().map(|(v, &k)| (crate::paths::ssa_name(v, k), entry_var(v))).collect();
        let after = wp_seq(&at_versions(post, &c.suffix.ssa_map), &c.suffix.stmts);
        let to_region: BTreeMap<String, String> = c
            .suffix
            .entry_map
            .iter()
            .map(|(v, &k)| {
                let canon = if sig.outputs.contains(v) { output_var(v) } else { entry_var(v) };
                (crate::paths::ssa_name(v, k), canon)
            })
            .collect();
        conjuncts.push(Formula::implies(before.rename_free(&to_entry), after.rename_free(&to_region)));
    }
    let mut phi = Formula::And(conjuncts);
    let free = phi.free_vars();
    let known = |n: &String| sig.vars.iter().any(|v| *n == entry_var(v) || *n == output_var(v));
    assert!(free.iter().all(known), "specification leaks path-local names: {free:?}");

    let mut inputs = Vec::new();
    for v in &sig.vars {
        let x = entry_var(v);
        if !free.contains(&x) {
            continue;
        }
        match sig.sorts.sort(v) {
            Sort::Word => inputs.push(x),
            Sort::Bool => phi = Formula::forall(x, phi),
        }
    }
    let outputs = sig.outputs.iter().map(|v| output_var(v)).collect();
    SynthesisProblem::new(phi, inputs, outputs, sig.width, sig.sorts.clone())
}

fn region_in_loop(block: &[Stmt], line: usize, in_loop: bool) -> bool {
    block.iter().any(|s| {
        (s.line == line && in_loop)
            || match &s.kind {
                StmtKind::If(_, t, e) => region_in_loop(t, line, in_loop) || region_in_loop(e, line, in_loop),
                StmtKind::While(_, b) => region_in_loop(b, line, true),
                _ => false,
            }
    })
}

fn find_assert(block: &[Stmt]) -> Option<usize> {
    block.iter().find_map(|s| match &s.kind {
        StmtKind::Assert(_) => Some(s.line),
        StmtKind::If(_, t, e) => find_assert(t).or_else(|| find_assert(e)),
        StmtKind::While(_, b) => find_assert(b),
        _ => None,
    })
}

/// Progress notifications of a repair run.
pub enum TraceEvent<'a> {
    Counterexample { iteration: usize, path: &'a Path },
    Specification { conjunct: &'a Formula },
    Candidate { stmts: &'a [Stmt], gates: usize },
    Unrealizable { witness: &'a BTreeMap<String, u64> },
}

pub fn pbrepair(p: &Program, start: usize, end: usize, config: RepairConfig) -> Result<RunReport, DriverError> {
    pbrepair_traced(p, start, end, config, &mut |_| {})
}

pub fn pbrepair_traced(
    p: &Program,
    start: usize,
    end: usize,
    config: RepairConfig,
    trace: &mut dyn FnMut(TraceEvent<'_>),
) -> Result<RunReport, DriverError> {
    let clock = Instant::now();
    if let Some(line) = find_assert(&p.body) {
        return Err(DriverError::AssertUnsupported(line));
    }
    let (original, region0) = preprocess_guards(p, start, end)?;
    if region_in_loop(&original.body, region0.start, false) {
        return Err(DriverError::RegionInLoop(region0));
    }
    let sig = RegionSignature::new(&original, &region0);
    let pre = Formula::atom(original.pre.clone());
    let post = Formula::atom(original.post.clone());
    let mut taken: BTreeSet<String> = sig.vars.iter().cloned().collect();
    taken.extend(p.vars.iter().map(|v| v.name.clone()));

    let mut report = RunReport {
        outcome: Outcome::Repaired,
        iterations: Vec::new(),
        total_millis: 0,
        program: emit(p),
        witness: None,
        failing_path: None,
        detail: None,
        repaired: None,
        artifacts: Artifacts::default(),
    };
    let finish = |mut report: RunReport, outcome: Outcome| {
        report.outcome = outcome;
        report.total_millis = clock.elapsed().as_millis() as u64;
        Ok(report)
    };
    let resource = |mut report: RunReport, e: BddError| {
        report.detail = Some(e.to_string());
        finish(report, Outcome::ResourceLimit)
    };

    let mut cur = original.clone();
    let mut region = region0.clone();
    let mut set = CounterexampleSet::new();
    loop {
        let step = Instant::now();
        let pi = match model_check(&cur, config.unroll, Some(&region), config.node_limit) {
            Ok(CheckResult::Verified) => {
                if !set.is_empty() {
                    report.program = emit(&cur);
                    report.repaired = Some(cur);
                } else {
                    report.repaired = Some(p.clone());
                }
                return finish(report, Outcome::Repaired);
            }
            Ok(CheckResult::BoundExceeded(pi)) => {
                report.failing_path = Some(pi.guard_bits.to_string());
                return finish(report, Outcome::BoundExceeded);
            }
            Ok(CheckResult::Counterexample(pi)) => pi,
            Err(e) => return resource(report, e),
        };
        if set.len() >= config.max_iters {
            return Err(DriverError::MaxIterations(config.max_iters));
        }
        trace(TraceEvent::Counterexample { iteration: set.len() + 1, path: &pi });
        let cex = match Counterexample::new(&pi) {
            Ok(c) => c,
            Err(PathError::RegionNotOnPath(bits)) => {
                report.failing_path = Some(bits.to_string());
                return finish(report, Outcome::RegionNotOnPath);
            }
            Err(e) => return Err(DriverError::Path(e)),
        };
        if !set.insert(cex) {
            return Err(DriverError::RepeatedCounterexample(pi.guard_bits.clone()));
        }

        let problem = build_phi(&set, &pre, &post, &sig);
        if let Formula::And(cs) = &problem.phi {
            if let Some(c) = cs.last() {
                trace(TraceEvent::Specification { conjunct: c });
            }
        }
        let problem = SynthesisProblem { node_limit: config.node_limit, ..problem };
        let outcome = match extract(&problem) {
            Ok(o) => o,
            Err(SynthError::Bdd(e)) => return resource(report, e),
            Err(e) => return Err(DriverError::Synthesis(e)),
        };
        report.artifacts.problem = Some(problem);
        match outcome {
            SynthOutcome::Unrealizable { witness } => {
                report.iterations.push(IterationRecord {
                    path: pi.guard_bits.to_string(),
                    gates: None,
                    realizable: false,
                    millis: step.elapsed().as_millis() as u64,
                });
                let witness: BTreeMap<String, u64> =
                    witness.into_iter().map(|(k, v)| (base_name(&k).to_string(), v)).collect();
                trace(TraceEvent::Unrealizable { witness: &witness });
                report.witness = Some(witness);
                report.program = emit(&cur);
                return finish(report, Outcome::Unrealizable);
            }
            SynthOutcome::Realizable(net) => {
                let gates = net.gate_count();
                let stmts = netlist_to_stmts(&net, &sig.sorts, cur.width, &taken);
                trace(TraceEvent::Candidate { stmts: &stmts, gates });
                let (next, next_region) = apply_repair(&cur, &region, stmts)?;
                cur = next;
                region = next_region;
                report.artifacts.netlist = Some(net);
                report.iterations.push(IterationRecord {
                    path: pi.guard_bits.to_string(),
                    gates: Some(gates),
                    realizable: true,
                    millis: step.elapsed().as_millis() as u64,
                });
                match check_monotone(&cur, &region, &set, config) {
                    Ok(None) => {}
                    Ok(Some(bits)) => return Err(DriverError::Monotonicity(bits)),
                    Err(e) => return resource(report, e),
                }
            }
        }
    }
}

/// Re-checks every collected path on the candidate; returns the first that
/// fails.
pub fn check_monotone(
    p: &Program,
    region: &FaultRegion,
    set: &CounterexampleSet,
    config: RepairConfig,
) -> Result<Option<GuardBits>, BddError> {
    let mut store = new_store(p, config.node_limit)?;
    let pre = Formula::atom(p.pre.clone());
    let post = Formula::atom(p.post.clone());
    for c in set.iter() {
        let ok = match path_for_bits(p, config.unroll, Some(region), &c.guard_bits) {
            Some(pi) => holds_in(&mut store, &pre, &pi, &post)?,
            None => false,
        };
        if !ok {
            return Ok(Some(c.guard_bits.clone()));
        }
    }
    Ok(None)
}

/// A path with the strongest postcondition of `pre` before and after every
/// statement on the left and the weakest precondition of `post` on the right.
pub fn annotated_listing(pi: &Path, pre: &Formula, post: &Formula) -> String {
    let mut sps = vec![at_versions(pre, &pi.entry_map)];
    for s in &pi.stmts {
        let next = sp(sps.last().expect("seeded"), s);
        sps.push(next);
    }
    let mut wps = vec![at_versions(post, &pi.ssa_map)];
    for s in pi.stmts.iter().rev() {
        let next = wp(wps.last().expect("seeded"), s);
        wps.push(next);
    }
    wps.reverse();
    let mut out = String::new();
    for (i, s) in pi.stmts.iter().enumerate() {
        out.push_str(&format!("      {{{}}}  |  {{{}}}\n", sps[i], wps[i]));
        let mark = match &pi.region_span {
            Some(r) if r.contains(&i) => "*",
            _ => " ",
        };
        out.push_str(&format!("{mark}{:>3}. {s}\n", s.line()));
    }
    out.push_str(&format!("      {{{}}}  |  {{{}}}\n", sps[pi.stmts.len()], wps[pi.stmts.len()]));
    out
}

/// Renders statements as source lines, for traces.
pub fn render_stmts(stmts: &[Stmt]) -> String {
    let mut out = String::new();
    emit_block(&mut out, stmts, 1);
    out
}

use std::fmt::Write;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;
use std::time::Instant;

use serde::Serialize;

use super::{pbrepair, verify_exhaustive, Outcome, RepairConfig};
use crate::lang::{BinOp, Expr, Program, Stmt, StmtKind};
use crate::paths::enumerate_paths;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum FaultKind {
    Assignment,
    Condition,
}

#[derive(Debug, Clone)]
pub struct Mutant {
    pub line: usize,
    pub kind: FaultKind,
    /// The mutated statement, or its header for branches and loops.
    pub description: String,
    pub program: Program,
}

/// Visits every variable occurrence in pre-order, letting `f` replace it.
fn map_nth_var(e: &Expr, target: usize, seen: &mut usize, with: &str) -> Expr {
    match e {
        Expr::Var(v) => {
            let hit = *seen == target;
            *seen += 1;
            Expr::Var(if hit { with.to_string() } else { v.clone() })
        }
        Expr::Lit(_) | Expr::Bool(_) => e.clone(),
        Expr::Unary(op, a) => Expr::unary(*op, map_nth_var(a, target, seen, with)),
        Expr::Binary(op, l, r) => {
            let l = map_nth_var(l, target, seen, with);
            Expr::binary(*op, l, map_nth_var(r, target, seen, with))
        }
    }
}

fn var_occurrences(e: &Expr) -> Vec<String> {
    let mut out = Vec::new();
    e.visit_vars(&mut |v| out.push(v.to_string()));
    out
}

fn comparison_count(e: &Expr) -> usize {
    match e {
        Expr::Binary(op, l, r) => op.is_comparison() as usize + comparison_count(l) + comparison_count(r),
        Expr::Unary(_, a) => comparison_count(a),
        _ => 0,
    }
}

fn flip_nth_comparison(e: &Expr, target: usize, seen: &mut usize, to: BinOp) -> Expr {
    match e {
        Expr::Binary(op, l, r) => {
            let mut op = *op;
            if op.is_comparison() {
                if *seen == target {
                    op = to;
                }
                *seen += 1;
            }
            let l = flip_nth_comparison(l, target, seen, to);
            Expr::binary(op, l, flip_nth_comparison(r, target, seen, to))
        }
        Expr::Unary(op, a) => Expr::unary(*op, flip_nth_comparison(a, target, seen, to)),
        _ => e.clone(),
    }
}

fn nth_comparison(e: &Expr, target: usize, seen: &mut usize) -> Option<BinOp> {
    match e {
        Expr::Binary(op, l, r) => {
            if op.is_comparison() {
                if *seen == target {
                    return Some(*op);
                }
                *seen += 1;
            }
            nth_comparison(l, target, seen).or_else(|| nth_comparison(r, target, seen))
        }
        Expr::Unary(_, a) => nth_comparison(a, target, seen),
        _ => None,
    }
}

fn flips(op: BinOp) -> &'static [BinOp] {
    use BinOp::*;
    match op {
        Lt => &[Le, Gt],
        Le => &[Lt, Ge],
        Gt => &[Ge, Lt],
        Ge => &[Gt, Le],
        Eq => &[Ne],
        Ne => &[Eq],
        _ => &[],
    }
}

fn replace_stmt(block: &[Stmt], line: usize, kind: &StmtKind) -> Vec<Stmt> {
    block
        .iter()
        .map(|s| {
            if s.line == line {
                return Stmt::new(line, kind.clone());
            }
            let k = match &s.kind {
                StmtKind::If(c, t, e) => StmtKind::If(c.clone(), replace_stmt(t, line, kind), replace_stmt(e, line, kind)),
                StmtKind::While(c, b) => StmtKind::While(c.clone(), replace_stmt(b, line, kind)),
                k => k.clone(),
            };
            Stmt::new(s.line, k)
        })
        .collect()
}

fn describe(kind: &StmtKind) -> String {
    match kind {
        StmtKind::Assign(v, e) => format!("{v} = {e};"),
        StmtKind::If(c, ..) => format!("if ({c})"),
        StmtKind::While(c, _) => format!("while ({c})"),
        StmtKind::Assume(c) => format!("assume({c});"),
        StmtKind::Assert(c) => format!("assert({c});"),
    }
}

/// Mutants of `p` that fail exhaustive verification, in line order: each
/// variable read by an assignment swapped for every other variable of the
/// same sort, and each comparison in a guard flipped.
pub fn seed_faults(p: &Program, unroll: usize) -> Vec<Mutant> {
    let mut out = Vec::new();
    for line in 1..=p.statement_count() {
        let stmt = p.stmt_at(line).expect("line exists");
        let candidates: Vec<(FaultKind, StmtKind)> = match &stmt.kind {
            StmtKind::Assign(v, e) => {
                let occ = var_occurrences(e);
                let mut ks = Vec::new();
                for (i, u) in occ.iter().enumerate() {
                    let sort = p.sort_of(u);
                    for w in p.vars.iter().filter(|w| &w.name != u && Some(w.sort) == sort) {
                        let e2 = map_nth_var(e, i, &mut 0, &w.name);
                        ks.push((FaultKind::Assignment, StmtKind::Assign(v.clone(), e2)));
                    }
                }
                ks
            }
            StmtKind::If(c, ..) | StmtKind::While(c, _) => {
                let mut ks = Vec::new();
                for i in 0..comparison_count(c) {
                    let op = nth_comparison(c, i, &mut 0).expect("counted");
                    for &to in flips(op) {
                        let c2 = flip_nth_comparison(c, i, &mut 0, to);
                        let k = match &stmt.kind {
                            StmtKind::If(_, t, e) => StmtKind::If(c2, t.clone(), e.clone()),
                            StmtKind::While(_, b) => StmtKind::While(c2, b.clone()),
                            _ => unreachable!(),
                        };
                        ks.push((FaultKind::Condition, k));
                    }
                }
                ks
            }
            _ => Vec::new(),
        };
        for (kind, k) in candidates {
            let body = replace_stmt(&p.body, line, &k);
            let params = p.inputs().map(|v| v.name.clone()).collect();
            let Ok(q) = Program::build(p.name.clone(), params, p.pre.clone(), p.post.clone(), body, p.width) else {
                continue;
            };
            // locals must keep their sorts for the mutant to stay comparable
            if q.vars.iter().any(|v| p.sort_of(&v.name).is_some_and(|s| s != v.sort)) {
                continue;
            }
            if verify_exhaustive(&q, unroll) == Ok(false) {
                out.push(Mutant { line, kind, description: describe(&k), program: q });
            }
        }
    }
    out
}

#[derive(Debug, Clone, Serialize)]
pub struct BenchRow {
    pub line: usize,
    pub kind: FaultKind,
    pub mutation: String,
    pub outcome: Option<Outcome>,
    /// Driver failure, including a broken monotonicity check.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
    pub iterations: usize,
    /// Guard bits of each counterexample with the candidate's gate count.
    pub paths: Vec<String>,
    /// The repaired program passes exhaustive verification.
    pub verified: bool,
    /// Iterations did not exceed the number of complete paths.
    pub within_bound: bool,
    pub millis: u64,
}

#[derive(Debug, Clone, Serialize)]
pub struct BenchReport {
    pub program: String,
    pub rows: Vec<BenchRow>,
    pub total_millis: u64,
}

impl BenchReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    /// The report with every timing field zeroed.
    pub fn without_timing(&self) -> BenchReport {
        let mut r = self.clone();
        r.total_millis = 0;
        for row in &mut r.rows {
            row.millis = 0;
        }
        r
    }
}

fn run_mutant(m: &Mutant, config: RepairConfig) -> BenchRow {
    let clock = Instant::now();
    let limit = enumerate_paths(&m.program, config.unroll, None).filter(|pi| !pi.bound_exceeded).count();
    let mut row = BenchRow {
        line: m.line,
        kind: m.kind,
        mutation: m.description.clone(),
        outcome: None,
        error: None,
        iterations: 0,
        paths: Vec::new(),
        verified: false,
        within_bound: false,
        millis: 0,
    };
    match pbrepair(&m.program, m.line, m.line, config) {
        Ok(r) => {
            row.outcome = Some(r.outcome);
            row.iterations = r.iterations.len();
            row.paths = r
                .iterations
                .iter()
                .map(|i| match i.gates {
                    Some(g) => format!("{}[{g}]", i.path),
                    None => format!("{}[-]", i.path),
                })
                .collect();
            row.within_bound = row.iterations <= limit;
            row.verified = r.repaired.as_ref().is_some_and(|q| verify_exhaustive(q, config.unroll) == Ok(true));
        }
        Err(e) => row.error = Some(e.to_string()),
    }
    row.millis = clock.elapsed().as_millis() as u64;
    row
}

/// Repairs seeded faults with the region set to the mutated line. Runs in
/// parallel; rows come back in mutant order. Unless `all` is set only the
/// first mutant of each line is used.
pub fn bench(p: &Program, config: RepairConfig, all: bool) -> BenchReport {
    let clock = Instant::now();
    let mut mutants = seed_faults(p, config.unroll);
    if !all {
        let mut seen = std::collections::BTreeSet::new();
        mutants.retain(|m| seen.insert(m.line));
    }
    let next = AtomicUsize::new(0);
    let rows: Mutex<Vec<Option<BenchRow>>> = Mutex::new(vec![None; mutants.len()]);
    let workers = std::thread::available_parallelism().map_or(1, |n| n.get()).min(mutants.len().max(1));
    std::thread::scope(|s| {
        for _ in 0..workers {
            s.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::Relaxed);
                let Some(m) = mutants.get(i) else { break };
                let row = run_mutant(m, config);
                rows.lock().expect("no worker panicked")[i] = Some(row);
            });
        }
    });
    let rows = rows.into_inner().expect("no worker panicked").into_iter().map(|r| r.expect("every mutant ran")).collect();
    BenchReport { program: p.name.clone(), rows, total_millis: clock.elapsed().as_millis() as u64 }
}

pub fn format_table(r: &BenchReport) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "{:>4} | {:<10} | {:>10} | {:<48} | {:>8}", "Line", "Type", "Iterations", "Paths[gates]", "Time [ms]");
    let _ = writeln!(out, "{}", "-".repeat(92));
    for row in &r.rows {
        let kind = match row.kind {
            FaultKind::Assignment => "Assignment",
            FaultKind::Condition => "Condition",
        };
        let status = match (&row.outcome, &row.error) {
            (_, Some(e)) => format!("error: {e}"),
            (Some(Outcome::Repaired), _) => row.paths.join(" "),
            (Some(o), _) => format!("{o:?} {}", row.paths.join(" ")),
            (None, None) => String::new(),
        };
        let _ = writeln!(out, "{:>4} | {:<10} | {:>10} | {:<48} | {:>8}", row.line, kind, row.iterations, status, row.millis);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lang::{parse, MINMAX};

    #[test]
    fn minmax_mutants_cover_every_line() {
        let p = parse(MINMAX, 2).unwrap();
        let ms = seed_faults(&p, 8);
        let lines: std::collections::BTreeSet<usize> = ms.iter().map(|m| m.line).collect();
        assert_eq!(lines, (1..=10).collect());
        let line4 = ms.iter().find(|m| m.line == 4).unwrap();
        assert_eq!(line4.description, "most = input1;");
        assert_eq!(line4.kind, FaultKind::Assignment);
        let line3 = ms.iter().find(|m| m.line == 3).unwrap();
        assert_eq!(line3.kind, FaultKind::Condition);
        // `<` to `<=` in the first guard is equivalent and dropped
        assert_eq!(line3.description, "if (most > input2)");
    }

    #[test]
    fn equivalent_mutants_are_dropped() {
        let p = parse("prog e(a)\npre: true\nb = a;\nc = b;\npost: c == a\n", 2).unwrap();
        // c = a keeps the program correct
        let ms = seed_faults(&p, 8);
        assert!(ms.iter().all(|m| m.description != "c = a;"));
    }
}

//! Control-flow paths: loop unrolling, enumeration in guard-bit order, SSA
//! renaming and decomposition around the fault region.

use std::collections::BTreeMap;
use std::fmt;
use std::ops::Range;

use crate::lang::{Expr, FaultRegion, Program, Stmt, StmtKind};

/// Default number of times a loop body may be taken on one path.
pub const DEFAULT_UNROLL: usize = 8;

/// SSA name of version `version` of program variable `var`.
pub fn ssa_name(var: &str, version: u32) -> String {
    format!("{var}#{version}")
}

/// A path statement over program variables, before SSA renaming.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum RawStmt {
    Assume { cond: Expr, line: usize },
    Assign { var: String, expr: Expr, line: usize },
}

/// A side-effect free path statement in SSA form.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum PathStmt {
    Assume { cond: Expr, line: usize },
    /// Defines `var#version`; the previous value of `var` is `var#(version-1)`.
    Assign { var: String, version: u32, expr: Expr, line: usize },
}

impl PathStmt {
    pub fn line(&self) -> usize {
        match self {
            PathStmt::Assume { line, .. } | PathStmt::Assign { line, .. } => *line,
        }
    }

    pub fn target(&self) -> Option<String> {
        match self {
            PathStmt::Assign { var, version, .. } => Some(ssa_name(var, *version)),
            PathStmt::Assume { .. } => None,
        }
    }
}

impl fmt::Display for PathStmt {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PathStmt::Assume { cond, .. } => write!(f, "assume({cond});"),
            PathStmt::Assign { var, version, expr, .. } => write!(f, "{} = {expr};", ssa_name(var, *version)),
        }
    }
}

/// Branch decisions along a path, in program order; `true` = guard held.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct GuardBits(pub Vec<bool>);

impl fmt::Display for GuardBits {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for &b in &self.0 {
            f.write_str(if b { "1" } else { "0" })?;
        }
        Ok(())
    }
}

impl std::str::FromStr for GuardBits {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        s.chars()
            .map(|c| match c {
                '0' => Ok(false),
                '1' => Ok(true),
                _ => Err(format!("invalid guard bit `{c}`")),
            })
            .collect::<Result<_, _>>()
            .map(GuardBits)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Path {
    pub stmts: Vec<PathStmt>,
    pub guard_bits: GuardBits,
    /// Index range of the fault region's statements, when the path traverses it.
    pub region_span: Option<Range<usize>>,
    /// Version of every variable when the path starts.
    pub entry_map: BTreeMap<String, u32>,
    /// Version of every variable when the path ends.
    pub ssa_map: BTreeMap<String, u32>,
    /// The path stopped at a loop head whose guard still held at the unroll bound.
    pub bound_exceeded: bool,
}

impl Path {
    pub fn entry_name(&self, var: &str) -> String {
        ssa_name(var, self.entry_map.get(var).copied().unwrap_or(0))
    }

    pub fn final_name(&self, var: &str) -> String {
        ssa_name(var, self.ssa_map.get(var).copied().unwrap_or(0))
    }
}

impl fmt::Display for Path {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, s) in self.stmts.iter().enumerate() {
            let mark = match &self.region_span {
                Some(r) if r.contains(&i) => "*",
                _ => " ",
            };
            writeln!(f, "{mark}{:>3}. {s}", s.line())?;
        }
        Ok(())
    }
}

/// SSA-renames a raw statement sequence. Every variable in `vars` starts at
/// version 0; each assignment bumps the assigned variable's version by one.
pub fn to_ssa(raw: &[RawStmt], vars: &[String]) -> Path {
    let entry: BTreeMap<String, u32> = vars.iter().map(|v| (v.clone(), 0)).collect();
    let (stmts, ssa_map) = rename_from(raw, entry.clone());
    Path {
        stmts,
        guard_bits: GuardBits::default(),
        region_span: None,
        entry_map: entry,
        ssa_map,
        bound_exceeded: false,
    }
}

fn rename_from(raw: &[RawStmt], mut versions: BTreeMap<String, u32>) -> (Vec<PathStmt>, BTreeMap<String, u32>) {
    let mut out = Vec::with_capacity(raw.len());
    for s in raw {
        let current = |versions: &BTreeMap<String, u32>, e: &Expr| {
            e.rename(&|v| Some(ssa_name(v, versions.get(v).copied().unwrap_or(0))))
        };
        match s {
            RawStmt::Assume { cond, line } => {
                out.push(PathStmt::Assume { cond: current(&versions, cond), line: *line })
            }
            RawStmt::Assign { var, expr, line } => {
                let expr = current(&versions, expr);
                let version = versions.get(var).copied().unwrap_or(0) + 1;
                versions.insert(var.clone(), version);
                out.push(PathStmt::Assign { var: var.clone(), version, expr, line: *line });
            }
        }
    }
    (out, versions)
}

#[derive(Debug, Clone, Copy)]
enum Work<'a> {
    Stmt(&'a Stmt),
    /// Loop head reached after `taken` iterations of the body.
    Loop(&'a Stmt, usize),
    /// End of a path cut off at the unroll bound.
    Truncated,
}

#[derive(Debug, Clone)]
struct State<'a> {
    // stack: last element runs next
    cont: Vec<Work<'a>>,
    raw: Vec<RawStmt>,
    bits: Vec<bool>,
}

/// Lazy depth-first path generator. Paths come out in lexicographic order of
/// their guard bits, false before true.
#[derive(Debug)]
pub struct PathIter<'a> {
    stack: Vec<State<'a>>,
    bound: usize,
    vars: Vec<String>,
    region: Option<FaultRegion>,
}

/// Enumerates every entry-to-exit path of `p` taking each loop body at most
/// `unroll_bound` times. A loop whose guard still holds at the bound yields a
/// truncated path with `bound_exceeded` set. `assert` statements are treated
/// as assumptions; the repair driver rejects them before enumeration.
pub fn enumerate_paths<'a>(p: &'a Program, unroll_bound: usize, region: Option<&FaultRegion>) -> PathIter<'a> {
    let cont = p.body.iter().rev().map(Work::Stmt).collect();
    PathIter {
        stack: vec![State { cont, raw: Vec::new(), bits: Vec::new() }],
        bound: unroll_bound,
        vars: p.vars.iter().map(|v| v.name.clone()).collect(),
        region: region.cloned(),
    }
}

/// The path of `p` taking exactly the branch decisions in `bits`.
pub fn path_for_bits(p: &Program, unroll_bound: usize, region: Option<&FaultRegion>, bits: &GuardBits) -> Option<Path> {
    enumerate_paths(p, unroll_bound, region).find(|path| &path.guard_bits == bits)
}

impl PathIter<'_> {
    fn finish(&self, st: State<'_>, bound_exceeded: bool) -> Path {
        let mut path = to_ssa(&st.raw, &self.vars);
        path.guard_bits = GuardBits(st.bits);
        path.bound_exceeded = bound_exceeded;
        if let Some(region) = &self.region {
            let hits: Vec<usize> = path
                .stmts
                .iter()
                .enumerate()
                .filter(|(_, s)| matches!(s, PathStmt::Assign { line, .. } if region.contains(*line)))
                .map(|(i, _)| i)
                .collect();
            if let (Some(&lo), Some(&hi)) = (hits.first(), hits.last()) {
                path.region_span = Some(lo..hi + 1);
            }
        }
        path
    }
}

impl Iterator for PathIter<'_> {
    type Item = Path;

    fn next(&mut self) -> Option<Path> {
        let mut st = self.stack.pop()?;
        loop {
            let Some(work) = st.cont.pop() else {
                return Some(self.finish(st, false));
            };
            match work {
                Work::Truncated => return Some(self.finish(st, true)),
                Work::Stmt(s) => match &s.kind {
                    StmtKind::Assign(v, e) => st.raw.push(RawStmt::Assign { var: v.clone(), expr: e.clone(), line: s.line }),
                    StmtKind::Assume(c) | StmtKind::Assert(c) => {
                        st.raw.push(RawStmt::Assume { cond: c.clone(), line: s.line })
                    }
                    StmtKind::If(c, then, els) => {
                        let mut taken = st.clone();
                        taken.bits.push(true);
                        taken.raw.push(RawStmt::Assume { cond: c.clone(), line: s.line });
                        taken.cont.extend(then.iter().rev().map(Work::Stmt));
                        self.stack.push(taken);

                        st.bits.push(false);
                        st.raw.push(RawStmt::Assume { cond: Expr::not(c.clone()), line: s.line });
                        st.cont.extend(els.iter().rev().map(Work::Stmt));
                    }
                    StmtKind::While(..) => st.cont.push(Work::Loop(s, 0)),
                },
                Work::Loop(s, taken_count) => {
                    let StmtKind::While(c, body) = &s.kind else { unreachable!("loop work on non-loop") };
                    let mut taken = st.clone();
                    taken.bits.push(true);
                    taken.raw.push(RawStmt::Assume { cond: c.clone(), line: s.line });
                    if taken_count < self.bound {
                        taken.cont.push(Work::Loop(s, taken_count + 1));
                        taken.cont.extend(body.iter().rev().map(Work::Stmt));
                        self.stack.push(taken);
                    } else {
                        taken.cont = vec![Work::Truncated];
                        self.stack.push(taken);
                    }
                    st.bits.push(false);
                    st.raw.push(RawStmt::Assume { cond: Expr::not(c.clone()), line: s.line });
                }
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum PathError {
    #[error("path {0} does not traverse the fault region")]
    RegionNotOnPath(GuardBits),
    #[error("path {0} traverses the fault region more than once")]
    RegionRepeated(GuardBits),
}

fn versions_after(entry: &BTreeMap<String, u32>, stmts: &[PathStmt]) -> BTreeMap<String, u32> {
    let mut map = entry.clone();
    for s in stmts {
        if let PathStmt::Assign { var, version, .. } = s {
            map.insert(var.clone(), *version);
        }
    }
    map
}

/// Splits a path into the part before the fault region, the region's own
/// assignments and the part after it.
pub fn split_at_region(pi: &Path) -> Result<(Path, Vec<PathStmt>, Path), PathError> {
    let span = pi
        .region_span
        .clone()
        .ok_or_else(|| PathError::RegionNotOnPath(pi.guard_bits.clone()))?;
    let region = pi.stmts[span.clone()].to_vec();
    // a region is a run of sibling assignments; anything else inside the span
    // means it was entered twice (loop body)
    let lines: Vec<usize> = region.iter().map(PathStmt::line).collect();
    let contiguous = region.iter().all(|s| matches!(s, PathStmt::Assign { .. }))
        && lines.windows(2).all(|w| w[0] < w[1]);
    if !contiguous {
        return Err(PathError::RegionRepeated(pi.guard_bits.clone()));
    }

    let at_entry = versions_after(&pi.entry_map, &pi.stmts[..span.start]);
    let at_exit = versions_after(&at_entry, &region);
    let prefix = Path {
        stmts: pi.stmts[..span.start].to_vec(),
        guard_bits: pi.guard_bits.clone(),
        region_span: None,
        entry_map: pi.entry_map.clone(),
        ssa_map: at_entry,
        bound_exceeded: false,
    };
    let suffix = Path {
        stmts: pi.stmts[span.end..].to_vec(),
        guard_bits: pi.guard_bits.clone(),
        region_span: None,
        entry_map: at_exit,
        ssa_map: pi.ssa_map.clone(),
        bound_exceeded: pi.bound_exceeded,
    };
    Ok((prefix, region, suffix))
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;
    use crate::lang::{parse, parse_expr, preprocess_guards, region_of, MINMAX};

    pub(crate) const COUNT: &str = "prog count(x)\npre: x == 0\nwhile (x < 2) {\nx = x + 1;\n}\npost: x == 2\n";

    fn e(s: &str) -> Expr {
        parse_expr(s).unwrap()
    }

    fn bits(s: &str) -> GuardBits {
        s.parse().unwrap()
    }

    #[test]
    fn loop_path_of_length_five() {
        let p = parse(COUNT, 2).unwrap();
        let paths: Vec<Path> = enumerate_paths(&p, 2, None).collect();
        let labels: Vec<String> = paths.iter().map(|p| p.guard_bits.to_string()).collect();
        assert_eq!(labels, ["0", "10", "110", "111"]);
        assert!(paths[3].bound_exceeded);
        assert!(!paths[2].bound_exceeded);
        let text: Vec<String> = paths[2].stmts.iter().map(|s| s.to_string()).collect();
        assert_eq!(
            text,
            [
                "assume(x#0 < 2);",
                "x#1 = x#0 + 1;",
                "assume(x#1 < 2);",
                "x#2 = x#1 + 1;",
                "assume(!(x#2 < 2));",
            ]
        );
        assert_eq!(paths[2].ssa_map["x"], 2);
    }

    #[test]
    fn straight_line_has_one_path() {
        let p = parse("prog s(a)\npre: true\nb = a + 1;\na = b;\npost: true\n", 2).unwrap();
        for bound in [0, 3] {
            let paths: Vec<Path> = enumerate_paths(&p, bound, None).collect();
            assert_eq!(paths.len(), 1);
            assert!(paths[0].guard_bits.0.is_empty());
        }
    }

    #[test]
    fn minmax_has_sixteen_ordered_paths() {
        let p = parse(MINMAX, 2).unwrap();
        let labels: Vec<String> = enumerate_paths(&p, DEFAULT_UNROLL, None).map(|p| p.guard_bits.to_string()).collect();
        let expected: Vec<String> = (0..16).map(|i| format!("{i:04b}")).collect();
        assert_eq!(labels, expected);
    }

    #[test]
    fn ssa_renaming() {
        let raw = vec![
            RawStmt::Assign { var: "x".into(), expr: e("x + 1"), line: 1 },
            RawStmt::Assign { var: "x".into(), expr: e("x + 1"), line: 2 },
        ];
        let path = to_ssa(&raw, &["x".to_string()]);
        let text: Vec<String> = path.stmts.iter().map(|s| s.to_string()).collect();
        assert_eq!(text, ["x#1 = x#0 + 1;", "x#2 = x#1 + 1;"]);
        assert_eq!(path.ssa_map["x"], 2);

        let raw = vec![RawStmt::Assume { cond: e("x < y"), line: 1 }];
        let path = to_ssa(&raw, &["x".to_string(), "y".to_string()]);
        assert_eq!(path.stmts[0].to_string(), "assume(x#0 < y#0);");
        assert!(path.ssa_map.values().all(|&v| v == 0));
    }

    #[test]
    fn split_minmax_path_around_line_four() {
        let p = parse(MINMAX, 2).unwrap();
        let region = region_of(&p, 4, 4);
        let path = path_for_bits(&p, DEFAULT_UNROLL, Some(&region), &bits("1000")).unwrap();
        let (prefix, body, suffix) = split_at_region(&path).unwrap();
        assert_eq!(prefix.stmts.last().unwrap().to_string(), "assume(most#1 < input2#0);");
        assert_eq!(body.len(), 1);
        assert_eq!(body[0].to_string(), "most#2 = input2#0;");
        assert_eq!(suffix.stmts[0].line(), 5);
        assert_eq!(suffix.stmts[0].to_string(), "assume(!(most#2 < input3#0));");
        assert_eq!(prefix.ssa_map["most"], 1);
        assert_eq!(suffix.entry_map["most"], 2);

        let mut joined = prefix.stmts.clone();
        joined.extend(body);
        joined.extend(suffix.stmts);
        assert_eq!(joined, path.stmts);
    }

    #[test]
    fn region_at_first_statement_gives_empty_prefix() {
        let p = parse(MINMAX, 2).unwrap();
        let region = region_of(&p, 1, 1);
        let path = enumerate_paths(&p, DEFAULT_UNROLL, Some(&region)).next().unwrap();
        let (prefix, body, _) = split_at_region(&path).unwrap();
        assert!(prefix.stmts.is_empty());
        assert_eq!(body[0].to_string(), "most#1 = input1#0;");
    }

    #[test]
    fn region_not_on_path() {
        let p = parse(MINMAX, 2).unwrap();
        let region = region_of(&p, 4, 4);
        let path = path_for_bits(&p, DEFAULT_UNROLL, Some(&region), &bits("0110")).unwrap();
        assert_eq!(split_at_region(&path), Err(PathError::RegionNotOnPath(bits("0110"))));
    }

    #[test]
    fn region_inside_loop_repeats() {
        let p = parse(COUNT, 2).unwrap();
        let region = region_of(&p, 2, 2);
        let path = path_for_bits(&p, 2, Some(&region), &bits("110")).unwrap();
        assert!(matches!(split_at_region(&path), Err(PathError::RegionRepeated(_))));
        let once = path_for_bits(&p, 2, Some(&region), &bits("10")).unwrap();
        assert!(split_at_region(&once).is_ok());
    }

    #[test]
    fn guard_temporary_region_is_on_every_path() {
        let p = parse(MINMAX, 2).unwrap();
        let (q, region) = preprocess_guards(&p, 3, 3).unwrap();
        for path in enumerate_paths(&q, DEFAULT_UNROLL, Some(&region)) {
            assert!(split_at_region(&path).is_ok(), "{}", path.guard_bits);
        }
    }
}

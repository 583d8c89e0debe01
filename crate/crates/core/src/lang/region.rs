use std::fmt;

use super::ast::{renumber, Expr, Program, Stmt, StmtKind};
use super::parse::CheckError;

/// A block of consecutive assignments, addressed by statement line, whose
/// right-hand sides are re-synthesized.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FaultRegion {
    pub start: usize,
    pub end: usize,
    /// Variables assigned by the region, in order of first assignment.
    pub outputs: Vec<String>,
}

impl FaultRegion {
    pub fn contains(&self, line: usize) -> bool {
        (self.start..=self.end).contains(&line)
    }

    pub fn len(&self) -> usize {
        self.end + 1 - self.start
    }

    pub fn is_empty(&self) -> bool {
        self.end < self.start
    }
}

impl fmt::Display for FaultRegion {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.start == self.end {
            write!(f, "line {}", self.start)
        } else {
            write!(f, "lines {}..{}", self.start, self.end)
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum RegionError {
    #[error("region {start}..{end} is empty or inverted")]
    Inverted { start: usize, end: usize },
    #[error("line {0} does not exist")]
    NoSuchLine(usize),
    #[error("region {start}..{end} partially overlaps a block")]
    BlockBoundary { start: usize, end: usize },
    #[error("line {0}: loop guards cannot be part of a fault region")]
    LoopGuard(usize),
    #[error("line {0}: only assignments and branch guards can be part of a fault region")]
    NotAssignable(usize),
    #[error("rewritten program is ill-formed: {0}")]
    Check(#[from] CheckError),
}

/// Locates the block holding `line` as a direct child.
fn sibling_block_mut(block: &mut Vec<Stmt>, line: usize) -> Option<&mut Vec<Stmt>> {
    if block.iter().any(|s| s.line == line) {
        return Some(block);
    }
    for s in block.iter_mut() {
        let found = match &mut s.kind {
            StmtKind::If(_, t, e) => {
                if contains_line(t, line) {
                    sibling_block_mut(t, line)
                } else {
                    sibling_block_mut(e, line)
                }
            }
            StmtKind::While(_, b) => sibling_block_mut(b, line),
            _ => None,
        };
        if found.is_some() {
            return found;
        }
    }
    None
}

fn contains_line(block: &[Stmt], line: usize) -> bool {
    block.iter().any(|s| {
        s.line == line
            || match &s.kind {
                StmtKind::If(_, t, e) => contains_line(t, line) || contains_line(e, line),
                StmtKind::While(_, b) => contains_line(b, line),
                _ => false,
            }
    })
}

fn fresh_temp(p: &Program) -> String {
    (0..)
        .map(|k| format!("t{k}"))
        .find(|n| p.var(n).is_none())
        .expect("unbounded supply of names")
}

/// Rewrites branch guards inside the region into `t = c; if (t) ...` so that
/// the region consists of assignments only, and returns the retargeted region.
/// Lines are in the numbering of the returned program.
pub fn preprocess_guards(p: &Program, start: usize, end: usize) -> Result<(Program, FaultRegion), RegionError> {
    if start == 0 || end < start {
        return Err(RegionError::Inverted { start, end });
    }
    let count = p.statement_count();
    for l in [start, end] {
        if l > count {
            return Err(RegionError::NoSuchLine(l));
        }
    }

    let mut body = p.body.clone();
    let block = sibling_block_mut(&mut body, start).ok_or(RegionError::NoSuchLine(start))?;
    let first = block.iter().position(|s| s.line == start).expect("start is a sibling");
    let mut last = first;
    while last + 1 < block.len() && block[last + 1].line <= end {
        last += 1;
    }
    // Every line of the region must be a direct child of this block.
    if block[last].line != end || end - start != last - first {
        return Err(RegionError::BlockBoundary { start, end });
    }

    let mut rewritten = Vec::new();
    for i in first..=last {
        let s = &block[i];
        match &s.kind {
            StmtKind::Assign(..) => rewritten.push(s.clone()),
            StmtKind::If(c, t, e) => {
                // the guard temporary must be the last assignment of the region
                if i != last {
                    return Err(RegionError::BlockBoundary { start, end });
                }
                let temp = fresh_temp(p);
                rewritten.push(Stmt::assign(0, temp.clone(), c.clone()));
                rewritten.push(Stmt::new(0, StmtKind::If(Expr::Var(temp), t.clone(), e.clone())));
            }
            StmtKind::While(..) => return Err(RegionError::LoopGuard(s.line)),
            StmtKind::Assume(_) | StmtKind::Assert(_) => return Err(RegionError::NotAssignable(s.line)),
        }
    }
    let assigns = rewritten.iter().filter(|s| matches!(s.kind, StmtKind::Assign(..))).count();
    if assigns == 0 {
        return Err(RegionError::NotAssignable(start));
    }
    let new_end = start + assigns - 1;
    block.splice(first..=last, rewritten);
    renumber(&mut body);

    let params = p.inputs().map(|v| v.name.clone()).collect();
    let q = Program::build(p.name.clone(), params, p.pre.clone(), p.post.clone(), body, p.width)?;
    let region = region_of(&q, start, new_end);
    Ok((q, region))
}

/// Builds the region descriptor for a run of sibling assignments.
pub fn region_of(p: &Program, start: usize, end: usize) -> FaultRegion {
    let mut outputs: Vec<String> = Vec::new();
    for l in start..=end {
        if let Some(Stmt { kind: StmtKind::Assign(v, _), .. }) = p.stmt_at(l) {
            if !outputs.contains(v) {
                outputs.push(v.clone());
            }
        }
    }
    FaultRegion { start, end, outputs }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lang::{emit, parse, MINMAX};

    fn minmax() -> Program {
        parse(MINMAX, 2).unwrap()
    }

    #[test]
    fn guard_region_is_rewritten() {
        let (q, r) = preprocess_guards(&minmax(), 3, 3).unwrap();
        assert_eq!(r, FaultRegion { start: 3, end: 3, outputs: vec!["t0".into()] });
        assert_eq!(
            q.stmt_at(3).unwrap().kind,
            StmtKind::Assign("t0".into(), parse_e("most < input2"))
        );
        assert!(matches!(&q.stmt_at(4).unwrap().kind, StmtKind::If(Expr::Var(t), ..) if t == "t0"));
        assert_eq!(q.statement_count(), 11);
        assert_eq!(q.sort_of("t0"), Some(crate::lang::Sort::Bool));
        assert!(emit(&q).contains("t0 = most < input2;\nif (t0) {"));
    }

    #[test]
    fn assignment_region_is_unchanged() {
        let p = minmax();
        let (q, r) = preprocess_guards(&p, 4, 4).unwrap();
        assert_eq!(q, p);
        assert_eq!(r.outputs, vec!["most".to_string()]);
    }

    #[test]
    fn assignment_then_guard_at_same_level() {
        let (q, r) = preprocess_guards(&minmax(), 2, 3).unwrap();
        assert_eq!((r.start, r.end), (2, 3));
        assert_eq!(r.outputs, vec!["least".to_string(), "t0".to_string()]);
        assert_eq!(q.stmt_at(3).unwrap().kind, StmtKind::Assign("t0".into(), parse_e("most < input2")));
    }

    #[test]
    fn region_crossing_block_boundary_is_rejected() {
        // line 4 sits inside the branch of line 3, line 5 is at top level
        assert_eq!(
            preprocess_guards(&minmax(), 4, 5),
            Err(RegionError::BlockBoundary { start: 4, end: 5 })
        );
        assert!(matches!(preprocess_guards(&minmax(), 3, 4), Err(RegionError::BlockBoundary { .. })));
        assert!(matches!(preprocess_guards(&minmax(), 1, 11), Err(RegionError::NoSuchLine(11))));
    }

    #[test]
    fn loop_guards_and_assumes_rejected() {
        let p = parse("prog l(x)\npre: true\nassume(x < 2);\nwhile (x < 2) {\nx = x + 1;\n}\npost: true\n", 2).unwrap();
        assert_eq!(preprocess_guards(&p, 2, 2), Err(RegionError::LoopGuard(2)));
        assert_eq!(preprocess_guards(&p, 1, 1), Err(RegionError::NotAssignable(1)));
        assert!(preprocess_guards(&p, 3, 3).is_ok());
    }

    #[test]
    fn idempotent() {
        for (s, e) in [(1, 1), (2, 3), (3, 3), (4, 4), (9, 9), (1, 2)] {
            let (q, r) = preprocess_guards(&minmax(), s, e).unwrap();
            let (q2, r2) = preprocess_guards(&q, r.start, r.end).unwrap();
            assert_eq!((q2, r2), (q, r));
        }
    }

    fn parse_e(s: &str) -> Expr {
        crate::lang::parse_expr(s).unwrap()
    }
}

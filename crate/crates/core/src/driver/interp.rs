use std::collections::BTreeMap;

use crate::lang::{Program, Stmt, StmtKind};

/// A valuation of program variables.
pub type ConcreteState = BTreeMap<String, u64>;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Execution {
    Done(ConcreteState),
    /// An `assume` did not hold; the execution is filtered out.
    AssumeFailed,
    AssertFailed,
    /// A loop was still running after `unroll_bound` iterations.
    BoundHit,
}

/// Largest number of input bits [`verify_exhaustive`] enumerates.
pub const MAX_EXHAUSTIVE_BITS: u32 = 24;

/// Big-step execution. Inputs missing from `input` and all locals start at 0.
pub fn execute(p: &Program, input: &ConcreteState, unroll_bound: usize) -> Execution {
    let mut state: ConcreteState = p.vars.iter().map(|v| (v.name.clone(), 0)).collect();
    for (k, v) in input {
        state.insert(k.clone(), *v);
    }
    match exec_block(p, &p.body, &mut state, unroll_bound) {
        Ok(()) => Execution::Done(state),
        Err(e) => e,
    }
}

fn exec_block(p: &Program, block: &[Stmt], st: &mut ConcreteState, bound: usize) -> Result<(), Execution> {
    let eval = |st: &ConcreteState, e: &crate::lang::Expr| e.eval(p.width, &|v| st[v]);
    for s in block {
        match &s.kind {
            StmtKind::Assign(v, e) => {
                let x = eval(st, e);
                st.insert(v.clone(), x);
            }
            StmtKind::Assume(c) => {
                if eval(st, c) == 0 {
                    return Err(Execution::AssumeFailed);
                }
            }
            StmtKind::Assert(c) => {
                if eval(st, c) == 0 {
                    return Err(Execution::AssertFailed);
                }
            }
            StmtKind::If(c, t, e) => {
                let branch = if eval(st, c) != 0 { t } else { e };
                exec_block(p, branch, st, bound)?;
            }
            StmtKind::While(c, b) => {
                let mut taken = 0;
                while eval(st, c) != 0 {
                    if taken == bound {
                        return Err(Execution::BoundHit);
                    }
                    exec_block(p, b, st, bound)?;
                    taken += 1;
                }
            }
        }
    }
    Ok(())
}

/// The final state, or `None` when an assume fails or the bound is hit.
pub fn interpret(p: &Program, input: &ConcreteState, unroll_bound: usize) -> Option<ConcreteState> {
    match execute(p, input, unroll_bound) {
        Execution::Done(s) => Some(s),
        _ => None,
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("{0} input bits exceed the exhaustive limit of {MAX_EXHAUSTIVE_BITS}")]
pub struct InputSpaceTooLarge(pub u32);

/// All input valuations of a program, first input varying slowest.
pub fn all_inputs(p: &Program) -> Result<Vec<ConcreteState>, InputSpaceTooLarge> {
    let names: Vec<&str> = p.inputs().map(|v| v.name.as_str()).collect();
    let bits = names.len() as u32 * p.width;
    if bits > MAX_EXHAUSTIVE_BITS {
        return Err(InputSpaceTooLarge(bits));
    }
    let mask = crate::lang::word_mask(p.width);
    Ok((0..1u64 << bits)
        .map(|code| {
            names
                .iter()
                .rev()
                .enumerate()
                .map(|(i, n)| (n.to_string(), code >> (i as u32 * p.width) & mask))
                .collect()
        })
        .collect())
}

/// A state on which the program violates its contract.
pub fn find_violation(p: &Program, unroll_bound: usize) -> Result<Option<ConcreteState>, InputSpaceTooLarge> {
    for input in all_inputs(p)? {
        if p.pre.eval(p.width, &|v| input[v]) == 0 {
            continue;
        }
        let ok = match execute(p, &input, unroll_bound) {
            Execution::Done(s) => p.post.eval(p.width, &|v| s[v]) != 0,
            Execution::AssumeFailed => true,
            Execution::AssertFailed | Execution::BoundHit => false,
        };
        if !ok {
            return Ok(Some(input));
        }
    }
    Ok(None)
}

/// Whether every input satisfying the precondition terminates within the
/// bound in a state satisfying the postcondition.
pub fn verify_exhaustive(p: &Program, unroll_bound: usize) -> Result<bool, InputSpaceTooLarge> {
    Ok(find_violation(p, unroll_bound)?.is_none())
}

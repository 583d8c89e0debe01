//! Formulas and the weakest-precondition / strongest-postcondition
//! transformers over SSA paths.

mod formula;

use std::collections::{BTreeMap, BTreeSet};

pub use formula::{base_name, entry_var, is_output_var, output_var, Formula, SortEnv};

use crate::boolean::{BddError, BddStore};
use crate::lang::Expr;
use crate::paths::{ssa_name, Path, PathStmt};

/// `wp(phi, s)`.
pub fn wp(phi: &Formula, s: &PathStmt) -> Formula {
    match s {
        PathStmt::Assume { cond, .. } => Formula::implies(Formula::atom(cond.clone()), phi.clone()),
        PathStmt::Assign { var, version, expr, .. } => phi.substitute(&ssa_name(var, *version), expr),
    }
}

/// `sp(phi, s)`. An assignment to `v#k` quantifies away `v#(k-1)` so the
/// result only speaks about live versions.
pub fn sp(phi: &Formula, s: &PathStmt) -> Formula {
    match s {
        PathStmt::Assume { cond, .. } => Formula::and([Formula::atom(cond.clone()), phi.clone()]),
        PathStmt::Assign { var, version, expr, .. } => {
            let new = ssa_name(var, *version);
            let old = ssa_name(var, version.saturating_sub(1));
            let fresh = fresh_name(var, phi, expr);
            let fv = Expr::var(fresh.clone());
            let def = Expr::eq(Expr::var(new), expr.substitute(&old, &fv));
            Formula::exists(fresh, Formula::and([Formula::Atom(def), phi.substitute(&old, &fv)]))
        }
    }
}

/// `var'n` for the smallest `n >= 1` not already used in `phi` or `expr`.
fn fresh_name(var: &str, phi: &Formula, expr: &Expr) -> String {
    let taken = phi.vars();
    (1..)
        .map(|n| format!("{var}'{n}"))
        .find(|c| !taken.contains(c) && !expr.mentions(c))
        .expect("unbounded supply of names")
}

pub fn wp_seq(phi: &Formula, stmts: &[PathStmt]) -> Formula {
    stmts.iter().rev().fold(phi.clone(), |acc, s| wp(&acc, s))
}

pub fn sp_seq(phi: &Formula, stmts: &[PathStmt]) -> Formula {
    stmts.iter().fold(phi.clone(), |acc, s| sp(&acc, s))
}

/// Renames program variables to the SSA versions recorded in `versions`.
pub fn at_versions(f: &Formula, versions: &BTreeMap<String, u32>) -> Formula {
    let map = versions.iter().map(|(v, &k)| (v.clone(), ssa_name(v, k))).collect();
    f.rename_free(&map)
}

/// Decides whether every execution of `pi` starting in `phi` ends in `psi`.
/// Program variables in `phi` refer to the path's entry versions and those
/// in `psi` to its final versions; SSA names pass through unchanged.
pub fn holds(phi: &Formula, pi: &Path, psi: &Formula, width: u32, sorts: &SortEnv) -> Result<bool, BddError> {
    let mut store = BddStore::new(width, sorts.clone());
    holds_in(&mut store, phi, pi, psi)
}

/// `sp_seq` that also projects away every SSA version as soon as no later
/// statement reads it, unless `keep` names it. For any `psi` whose free
/// variables lie in `keep`, `result -> psi` is valid exactly when
/// `sp_seq(phi, stmts) -> psi` is, and the intermediate BDDs stay small.
pub fn sp_seq_projected(phi: &Formula, stmts: &[PathStmt], keep: &BTreeSet<String>) -> Formula {
    let mut last_read = BTreeMap::new();
    for (i, s) in stmts.iter().enumerate() {
        let e = match s {
            PathStmt::Assume { cond, .. } => cond,
            PathStmt::Assign { expr, .. } => expr,
        };
        e.visit_vars(&mut |v| {
            last_read.insert(v.to_string(), i + 1);
        });
    }
    let project = |f: Formula, done: usize| {
        let dead: Vec<String> = f
            .free_vars()
            .into_iter()
            .filter(|v| !keep.contains(v) && last_read.get(v).is_none_or(|&j| j <= done))
            .collect();
        dead.into_iter().fold(f, |acc, v| Formula::exists(v, acc))
    };
    let mut acc = project(phi.clone(), 0);
    for (i, s) in stmts.iter().enumerate() {
        acc = project(sp(&acc, s), i + 1);
    }
    acc
}

pub fn holds_in(store: &mut BddStore, phi: &Formula, pi: &Path, psi: &Formula) -> Result<bool, BddError> {
    let psi = at_versions(psi, &pi.ssa_map);
    let post = sp_seq_projected(&at_versions(phi, &pi.entry_map), &pi.stmts, &psi.free_vars());
    let b = store.formula(&Formula::implies(post, psi))?;
    Ok(store.is_valid(b))
}

/// Whether some execution starting in `phi` follows `pi` to its end.
pub fn feasible_in(store: &mut BddStore, phi: &Formula, pi: &Path) -> Result<bool, BddError> {
    let post = sp_seq_projected(&at_versions(phi, &pi.entry_map), &pi.stmts, &BTreeSet::new());
    let b = store.formula(&post)?;
    Ok(store.is_sat(b))
}

use std::collections::BTreeMap;
use std::fmt;

/// Sort of an expression or variable. Words are unsigned bit-vectors of the
/// program's global width.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Sort {
    Bool,
    Word,
}

impl fmt::Display for Sort {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Sort::Bool => f.write_str("bool"),
            Sort::Word => f.write_str("word"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum UnOp {
    /// `!`, Boolean negation.
    Not,
    /// `~`, bitwise complement.
    BitNot,
    /// `-`, two's complement negation.
    Neg,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BinOp {
    Add,
    Sub,
    BitAnd,
    BitOr,
    BitXor,
    Shl,
    Shr,
    Lt,
    Le,
    Eq,
    Ne,
    Gt,
    Ge,
    And,
    Or,
}

impl UnOp {
    pub fn symbol(self) -> &'static str {
        match self {
            UnOp::Not => "!",
            UnOp::BitNot => "~",
            UnOp::Neg => "-",
        }
    }
}

impl BinOp {
    pub fn symbol(self) -> &'static str {
        match self {
            BinOp::Add => "+",
            BinOp::Sub => "-",
            BinOp::BitAnd => "&",
            BinOp::BitOr => "|",
            BinOp::BitXor => "^",
            BinOp::Shl => "<<",
            BinOp::Shr => ">>",
            BinOp::Lt => "<",
            BinOp::Le => "<=",
            BinOp::Eq => "==",
            BinOp::Ne => "!=",
            BinOp::Gt => ">",
            BinOp::Ge => ">=",
            BinOp::And => "&&",
            BinOp::Or => "||",
        }
    }

    /// Binding strength, C-like. Higher binds tighter.
    pub fn precedence(self) -> u8 {
        match self {
            BinOp::Or => 1,
            BinOp::And => 2,
            BinOp::BitOr => 3,
            BinOp::BitXor => 4,
            BinOp::BitAnd => 5,
            BinOp::Eq | BinOp::Ne => 6,
            BinOp::Lt | BinOp::Le | BinOp::Gt | BinOp::Ge => 7,
            BinOp::Shl | BinOp::Shr => 8,
            BinOp::Add | BinOp::Sub => 9,
        }
    }

    pub fn is_comparison(self) -> bool {
        matches!(
            self,
            BinOp::Lt | BinOp::Le | BinOp::Eq | BinOp::Ne | BinOp::Gt | BinOp::Ge
        )
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Expr {
    Lit(u64),
    Bool(bool),
    Var(String),
    Unary(UnOp, Box<Expr>),
    Binary(BinOp, Box<Expr>, Box<Expr>),
}

impl Expr {
    pub fn var(name: impl Into<String>) -> Expr {
        Expr::Var(name.into())
    }

    pub fn unary(op: UnOp, e: Expr) -> Expr {
        Expr::Unary(op, Box::new(e))
    }

    pub fn binary(op: BinOp, l: Expr, r: Expr) -> Expr {
        Expr::Binary(op, Box::new(l), Box::new(r))
    }

    pub fn not(e: Expr) -> Expr {
        Expr::unary(UnOp::Not, e)
    }

    pub fn eq(l: Expr, r: Expr) -> Expr {
        Expr::binary(BinOp::Eq, l, r)
    }

    /// Calls `f` on every variable occurrence, left to right.
    pub fn visit_vars<'a>(&'a self, f: &mut impl FnMut(&'a str)) {
        match self {
            Expr::Lit(_) | Expr::Bool(_) => {}
            Expr::Var(v) => f(v),
            Expr::Unary(_, e) => e.visit_vars(f),
            Expr::Binary(_, l, r) => {
                l.visit_vars(f);
                r.visit_vars(f);
            }
        }
    }

    pub fn mentions(&self, name: &str) -> bool {
        let mut found = false;
        self.visit_vars(&mut |v| found |= v == name);
        found
    }

    /// Replaces every occurrence of variable `name` with `with`.
    pub fn substitute(&self, name: &str, with: &Expr) -> Expr {
        match self {
            Expr::Var(v) if v == name => with.clone(),
            Expr::Lit(_) | Expr::Bool(_) | Expr::Var(_) => self.clone(),
            Expr::Unary(op, e) => Expr::unary(*op, e.substitute(name, with)),
            Expr::Binary(op, l, r) => {
                Expr::binary(*op, l.substitute(name, with), r.substitute(name, with))
            }
        }
    }

    /// Renames variables through `f`; names mapped to `None` are kept.
    pub fn rename(&self, f: &impl Fn(&str) -> Option<String>) -> Expr {
        match self {
            Expr::Var(v) => Expr::Var(f(v).unwrap_or_else(|| v.clone())),
            Expr::Lit(_) | Expr::Bool(_) => self.clone(),
            Expr::Unary(op, e) => Expr::unary(*op, e.rename(f)),
            Expr::Binary(op, l, r) => Expr::binary(*op, l.rename(f), r.rename(f)),
        }
    }

    /// Computes the sort of the expression, rejecting mixed-sort operands.
    pub fn sort(&self, env: &impl Fn(&str) -> Option<Sort>) -> Result<Sort, SortError> {
        match self {
            Expr::Lit(_) => Ok(Sort::Word),
            Expr::Bool(_) => Ok(Sort::Bool),
            Expr::Var(v) => env(v).ok_or_else(|| SortError::Undeclared(v.clone())),
            Expr::Unary(op, e) => {
                let s = e.sort(env)?;
                let want = if *op == UnOp::Not { Sort::Bool } else { Sort::Word };
                if s != want {
                    return Err(SortError::Operand { op: op.symbol(), want, found: s });
                }
                Ok(want)
            }
            Expr::Binary(op, l, r) => {
                let ls = l.sort(env)?;
                let rs = r.sort(env)?;
                match op {
                    BinOp::And | BinOp::Or => {
                        for s in [ls, rs] {
                            if s != Sort::Bool {
                                return Err(SortError::Operand {
                                    op: op.symbol(),
                                    want: Sort::Bool,
                                    found: s,
                                });
                            }
                        }
                        Ok(Sort::Bool)
                    }
                    BinOp::Eq | BinOp::Ne => {
                        if ls != rs {
                            return Err(SortError::Mismatch { op: op.symbol(), left: ls, right: rs });
                        }
                        Ok(Sort::Bool)
                    }
                    _ => {
                        for s in [ls, rs] {
                            if s != Sort::Word {
                                return Err(SortError::Operand {
                                    op: op.symbol(),
                                    want: Sort::Word,
                                    found: s,
                                });
                            }
                        }
                        Ok(if op.is_comparison() { Sort::Bool } else { Sort::Word })
                    }
                }
            }
        }
    }

    /// Concrete evaluation at `width`. Booleans are 0/1.
    pub fn eval(&self, width: u32, env: &impl Fn(&str) -> u64) -> u64 {
        let mask = word_mask(width);
        match self {
            Expr::Lit(v) => v & mask,
            Expr::Bool(b) => *b as u64,
            Expr::Var(v) => env(v),
            Expr::Unary(op, e) => {
                let v = e.eval(width, env);
                match op {
                    UnOp::Not => (v == 0) as u64,
                    UnOp::BitNot => !v & mask,
                    UnOp::Neg => v.wrapping_neg() & mask,
                }
            }
            Expr::Binary(op, l, r) => {
                let a = l.eval(width, env);
                let b = r.eval(width, env);
                match op {
                    BinOp::Add => a.wrapping_add(b) & mask,
                    BinOp::Sub => a.wrapping_sub(b) & mask,
                    BinOp::BitAnd => a & b,
                    BinOp::BitOr => a | b,
                    BinOp::BitXor => a ^ b,
                    BinOp::Shl => {
                        if b >= width as u64 {
                            0
                        } else {
                            (a << b) & mask
                        }
                    }
                    BinOp::Shr => {
                        if b >= width as u64 {
                            0
                        } else {
                            a >> b
                        }
                    }
                    BinOp::Lt => (a < b) as u64,
                    BinOp::Le => (a <= b) as u64,
                    BinOp::Eq => (a == b) as u64,
                    BinOp::Ne => (a != b) as u64,
                    BinOp::Gt => (a > b) as u64,
                    BinOp::Ge => (a >= b) as u64,
                    BinOp::And => (a != 0 && b != 0) as u64,
                    BinOp::Or => (a != 0 || b != 0) as u64,
                }
            }
        }
    }

    fn fmt_prec(&self, f: &mut fmt::Formatter<'_>, min_prec: u8) -> fmt::Result {
        match self {
            Expr::Lit(v) => write!(f, "{v}"),
            Expr::Bool(b) => write!(f, "{b}"),
            Expr::Var(v) => f.write_str(v),
            Expr::Unary(op, e) => {
                f.write_str(op.symbol())?;
                e.fmt_prec(f, UNARY_PREC)
            }
            Expr::Binary(op, l, r) => {
                let p = op.precedence();
                let paren = p < min_prec;
                if paren {
                    f.write_str("(")?;
                }
                l.fmt_prec(f, p)?;
                write!(f, " {} ", op.symbol())?;
                // left-associative: equal precedence on the right needs parens
                r.fmt_prec(f, p + 1)?;
                if paren {
                    f.write_str(")")?;
                }
                Ok(())
            }
        }
    }
}

pub(crate) const UNARY_PREC: u8 = 10;

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.fmt_prec(f, 0)
    }
}

pub fn word_mask(width: u32) -> u64 {
    if width >= 64 {
        u64::MAX
    } else {
        (1u64 << width) - 1
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum SortError {
    #[error("undeclared variable `{0}`")]
    Undeclared(String),
    #[error("operator `{op}` expects {want} operands, found {found}")]
    Operand { op: &'static str, want: Sort, found: Sort },
    #[error("operator `{op}` compares {left} with {right}")]
    Mismatch { op: &'static str, left: Sort, right: Sort },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum StmtKind {
    Assign(String, Expr),
    Assume(Expr),
    Assert(Expr),
    If(Expr, Vec<Stmt>, Vec<Stmt>),
    While(Expr, Vec<Stmt>),
}

/// A statement tagged with its line: the 1-based position of the statement
/// in a pre-order walk of the program body.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Stmt {
    pub line: usize,
    pub kind: StmtKind,
}

impl Stmt {
    pub fn new(line: usize, kind: StmtKind) -> Stmt {
        Stmt { line, kind }
    }

    pub fn assign(line: usize, var: impl Into<String>, e: Expr) -> Stmt {
        Stmt::new(line, StmtKind::Assign(var.into(), e))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum VarKind {
    /// Header parameter; its entry value is constrained only by the precondition.
    Input,
    /// Assigned in the body before any read.
    Local,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VarDecl {
    pub name: String,
    pub sort: Sort,
    pub kind: VarKind,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Program {
    pub name: String,
    /// Inputs first (header order), then locals in order of first assignment.
    pub vars: Vec<VarDecl>,
    pub pre: Expr,
    pub post: Expr,
    pub body: Vec<Stmt>,
    pub width: u32,
}

impl Program {
    pub fn inputs(&self) -> impl Iterator<Item = &VarDecl> {
        self.vars.iter().filter(|v| v.kind == VarKind::Input)
    }

    pub fn var(&self, name: &str) -> Option<&VarDecl> {
        self.vars.iter().find(|v| v.name == name)
    }

    pub fn sort_of(&self, name: &str) -> Option<Sort> {
        self.var(name).map(|v| v.sort)
    }

    /// Sorts of all declared variables, keyed by name.
    pub fn sorts(&self) -> BTreeMap<String, Sort> {
        self.vars.iter().map(|v| (v.name.clone(), v.sort)).collect()
    }

    /// Number of statements, counting compound statements once each.
    pub fn statement_count(&self) -> usize {
        fn count(block: &[Stmt]) -> usize {
            block
                .iter()
                .map(|s| {
                    1 + match &s.kind {
                        StmtKind::If(_, t, e) => count(t) + count(e),
                        StmtKind::While(_, b) => count(b),
                        _ => 0,
                    }
                })
                .sum()
        }
        count(&self.body)
    }

    /// Looks up a statement by line.
    pub fn stmt_at(&self, line: usize) -> Option<&Stmt> {
        fn find(block: &[Stmt], line: usize) -> Option<&Stmt> {
            for s in block {
                if s.line == line {
                    return Some(s);
                }
                let inner = match &s.kind {
                    StmtKind::If(_, t, e) => find(t, line).or_else(|| find(e, line)),
                    StmtKind::While(_, b) => find(b, line),
                    _ => None,
                };
                if inner.is_some() {
                    return inner;
                }
            }
            None
        }
        find(&self.body, line)
    }

    pub fn contains_assert(&self) -> bool {
        fn any(block: &[Stmt]) -> bool {
            block.iter().any(|s| match &s.kind {
                StmtKind::Assert(_) => true,
                StmtKind::If(_, t, e) => any(t) || any(e),
                StmtKind::While(_, b) => any(b),
                _ => false,
            })
        }
        any(&self.body)
    }
}

/// Reassigns lines in pre-order starting at 1.
pub fn renumber(body: &mut [Stmt]) {
    fn walk(block: &mut [Stmt], next: &mut usize) {
        for s in block {
            s.line = *next;
            *next += 1;
            match &mut s.kind {
                StmtKind::If(_, t, e) => {
                    walk(t, next);
                    walk(e, next);
                }
                StmtKind::While(_, b) => walk(b, next),
                _ => {}
            }
        }
    }
    let mut next = 1;
    walk(body, &mut next);
}

#[cfg(test)]
mod tests {
    use super::*;

    fn env(name: &str) -> Option<Sort> {
        match name {
            "b" => Some(Sort::Bool),
            "x" | "y" => Some(Sort::Word),
            _ => None,
        }
    }

    #[test]
    fn sorts_do_not_mix() {
        let e = Expr::binary(BinOp::Add, Expr::var("x"), Expr::var("b"));
        assert!(matches!(e.sort(&env), Err(SortError::Operand { .. })));
        let e = Expr::binary(BinOp::Eq, Expr::var("x"), Expr::var("b"));
        assert!(matches!(e.sort(&env), Err(SortError::Mismatch { .. })));
        let e = Expr::binary(BinOp::And, Expr::var("b"), Expr::binary(BinOp::Lt, Expr::var("x"), Expr::Lit(1)));
        assert_eq!(e.sort(&env), Ok(Sort::Bool));
        assert_eq!(Expr::var("z").sort(&env), Err(SortError::Undeclared("z".into())));
    }

    #[test]
    fn unsigned_modular_eval() {
        let env = |n: &str| if n == "x" { 3 } else { 1 };
        let add = Expr::binary(BinOp::Add, Expr::var("x"), Expr::var("y"));
        assert_eq!(add.eval(2, &env), 0);
        let neg = Expr::unary(UnOp::Neg, Expr::var("y"));
        assert_eq!(neg.eval(2, &env), 3);
        let shl = Expr::binary(BinOp::Shl, Expr::var("x"), Expr::Lit(2));
        assert_eq!(shl.eval(2, &env), 0);
        let shr = Expr::binary(BinOp::Shr, Expr::var("x"), Expr::var("y"));
        assert_eq!(shr.eval(2, &env), 1);
        let lt = Expr::binary(BinOp::Lt, Expr::var("y"), Expr::var("x"));
        assert_eq!(lt.eval(2, &env), 1);
    }

    #[test]
    fn display_parenthesizes_minimally() {
        let e = Expr::binary(
            BinOp::Sub,
            Expr::var("a"),
            Expr::binary(BinOp::Sub, Expr::var("b"), Expr::var("c")),
        );
        assert_eq!(e.to_string(), "a - (b - c)");
        let e = Expr::not(Expr::binary(BinOp::Lt, Expr::var("x"), Expr::Lit(2)));
        assert_eq!(e.to_string(), "!(x < 2)");
    }
}

//! Lexer, recursive-descent parser and static checks for the source language.
//!
//! Newlines are insignificant; by convention each statement sits on its own
//! line. Statement lines are pre-order ordinals, so `if (c) {` counts as one
//! line and `}` / `else` do not.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use super::ast::{word_mask, BinOp, Expr, Program, Sort, SortError, Stmt, StmtKind, UnOp, VarDecl, VarKind};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ParseError {
    #[error("{line}:{col}: syntax error: {msg}")]
    Syntax { line: usize, col: usize, msg: String },
    #[error(transparent)]
    Check(#[from] CheckError),
    #[error("width must be between 1 and 32, got {0}")]
    Width(u32),
}

/// Where a static-check error was found.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Location {
    Pre,
    Post,
    Stmt(usize),
}

impl fmt::Display for Location {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Location::Pre => f.write_str("precondition"),
            Location::Post => f.write_str("postcondition"),
            Location::Stmt(l) => write!(f, "line {l}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum CheckError {
    #[error("{at}: {err}")]
    Sort { at: Location, err: SortError },
    #[error("{at}: expected a {want} condition, found {found}")]
    Condition { at: Location, want: Sort, found: Sort },
    #[error("{at}: literal {value} does not fit in {width} bits")]
    LiteralRange { at: Location, value: u64, width: u32 },
    #[error("{at}: `{name}` may be read before it is assigned")]
    Unassigned { at: Location, name: String },
    #[error("{at}: precondition may only mention inputs, found `{name}`")]
    PreMentionsLocal { at: Location, name: String },
    #[error("{at}: `{name}` is assigned a {found} but was declared {want}")]
    AssignSort { at: Location, name: String, want: Sort, found: Sort },
    #[error("duplicate parameter `{0}`")]
    DuplicateParam(String),
    #[error("`{0}` is a reserved word")]
    Reserved(String),
}

const KEYWORDS: &[&str] = &[
    "prog", "pre", "post", "if", "else", "while", "assume", "assert", "true", "false",
];

pub fn is_reserved(name: &str) -> bool {
    KEYWORDS.contains(&name)
}

/// Parses and checks a program at the given word width.
pub fn parse(source: &str, width: u32) -> Result<Program, ParseError> {
    if !(1..=32).contains(&width) {
        return Err(ParseError::Width(width));
    }
    let tokens = lex(source, false)?;
    let mut p = Parser { tokens, pos: 0, next_line: 1 };
    let (name, params, pre, body, post) = p.program()?;
    Ok(Program::build(name, params, pre, post, body, width)?)
}

/// Parses a standalone expression (no sort checks). Besides source
/// identifiers it accepts derived names such as `x#2`, `x'1` and `x@in`.
pub fn parse_expr(source: &str) -> Result<Expr, ParseError> {
    let tokens = lex(source, true)?;
    let mut p = Parser { tokens, pos: 0, next_line: 1 };
    let e = p.expr(0)?;
    p.expect_eof()?;
    Ok(e)
}

impl Program {
    /// Assembles a program from parts, inferring local declarations and
    /// running the sort, literal-range and definite-assignment checks.
    pub fn build(
        name: String,
        params: Vec<String>,
        pre: Expr,
        post: Expr,
        body: Vec<Stmt>,
        width: u32,
    ) -> Result<Program, CheckError> {
        let mut vars = Vec::new();
        let mut seen = BTreeSet::new();
        for p in &params {
            if is_reserved(p) {
                return Err(CheckError::Reserved(p.clone()));
            }
            if !seen.insert(p.clone()) {
                return Err(CheckError::DuplicateParam(p.clone()));
            }
            vars.push(VarDecl { name: p.clone(), sort: Sort::Word, kind: VarKind::Input });
        }
        let mut checker = Checker { width, vars, index: BTreeMap::new() };
        for (i, v) in checker.vars.iter().enumerate() {
            checker.index.insert(v.name.clone(), i);
        }

        let inputs: BTreeSet<String> = params.iter().cloned().collect();
        checker.cond(&pre, Location::Pre, &inputs)?;
        let mut pre_vars = Vec::new();
        pre.visit_vars(&mut |v| pre_vars.push(v.to_string()));
        if let Some(v) = pre_vars.into_iter().find(|v| !inputs.contains(v)) {
            return Err(CheckError::PreMentionsLocal { at: Location::Pre, name: v });
        }

        let defined = checker.block(&body, inputs)?;
        checker.cond(&post, Location::Post, &defined)?;

        Ok(Program { name, vars: checker.vars, pre, post, body, width })
    }

    /// Re-runs the static checks on an already constructed program.
    pub fn check(&self) -> Result<(), CheckError> {
        let params = self.inputs().map(|v| v.name.clone()).collect();
        let rebuilt = Program::build(
            self.name.clone(),
            params,
            self.pre.clone(),
            self.post.clone(),
            self.body.clone(),
            self.width,
        )?;
        debug_assert_eq!(rebuilt.vars.len(), self.vars.len());
        Ok(())
    }
}

struct Checker {
    width: u32,
    vars: Vec<VarDecl>,
    index: BTreeMap<String, usize>,
}

impl Checker {
    fn sort_of(&self, name: &str) -> Option<Sort> {
        self.index.get(name).map(|&i| self.vars[i].sort)
    }

    fn expr(&self, e: &Expr, at: Location, defined: &BTreeSet<String>) -> Result<Sort, CheckError> {
        let mut err = None;
        let limit = word_mask(self.width);
        check_literals(e, &mut |v| {
            if v > limit && err.is_none() {
                err = Some(CheckError::LiteralRange { at, value: v, width: self.width });
            }
        });
        if let Some(err) = err {
            return Err(err);
        }
        let mut unassigned = None;
        e.visit_vars(&mut |v| {
            if unassigned.is_none() && self.sort_of(v).is_some() && !defined.contains(v) {
                unassigned = Some(v.to_string());
            }
        });
        let sort = e
            .sort(&|v| self.sort_of(v))
            .map_err(|err| CheckError::Sort { at, err })?;
        if let Some(name) = unassigned {
            return Err(CheckError::Unassigned { at, name });
        }
        Ok(sort)
    }

    fn cond(&self, e: &Expr, at: Location, defined: &BTreeSet<String>) -> Result<(), CheckError> {
        match self.expr(e, at, defined)? {
            Sort::Bool => Ok(()),
            found => Err(CheckError::Condition { at, want: Sort::Bool, found }),
        }
    }

    fn block(&mut self, block: &[Stmt], mut defined: BTreeSet<String>) -> Result<BTreeSet<String>, CheckError> {
        for s in block {
            let at = Location::Stmt(s.line);
            match &s.kind {
                StmtKind::Assign(v, e) => {
                    if is_reserved(v) {
                        return Err(CheckError::Reserved(v.clone()));
                    }
                    let sort = self.expr(e, at, &defined)?;
                    match self.sort_of(v) {
                        Some(want) if want != sort => {
                            return Err(CheckError::AssignSort { at, name: v.clone(), want, found: sort })
                        }
                        Some(_) => {}
                        None => {
                            self.index.insert(v.clone(), self.vars.len());
                            self.vars.push(VarDecl { name: v.clone(), sort, kind: VarKind::Local });
                        }
                    }
                    defined.insert(v.clone());
                }
                StmtKind::Assume(c) | StmtKind::Assert(c) => self.cond(c, at, &defined)?,
                StmtKind::If(c, t, e) => {
                    self.cond(c, at, &defined)?;
                    let dt = self.block(t, defined.clone())?;
                    let de = self.block(e, defined.clone())?;
                    defined = dt.intersection(&de).cloned().collect();
                }
                StmtKind::While(c, b) => {
                    self.cond(c, at, &defined)?;
                    self.block(b, defined.clone())?;
                }
            }
        }
        Ok(defined)
    }
}

fn check_literals(e: &Expr, f: &mut impl FnMut(u64)) {
    match e {
        Expr::Lit(v) => f(*v),
        Expr::Bool(_) | Expr::Var(_) => {}
        Expr::Unary(_, e) => check_literals(e, f),
        Expr::Binary(_, l, r) => {
            check_literals(l, f);
            check_literals(r, f);
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Tok {
    Ident(String),
    Num(u64),
    Sym(&'static str),
    Eof,
}

#[derive(Debug, Clone)]
struct Token {
    tok: Tok,
    line: usize,
    col: usize,
}

// Longest symbols first.
const SYMBOLS: &[&str] = &[
    "<<", ">>", "<=", ">=", "==", "!=", "&&", "||", "(", ")", "{", "}", ";", ",", ":", "=", "+",
    "-", "&", "|", "^", "~", "!", "<", ">",
];

fn lex(src: &str, derived_names: bool) -> Result<Vec<Token>, ParseError> {
    let mut out = Vec::new();
    for (lineno, text) in src.lines().enumerate() {
        let line = lineno + 1;
        let bytes = text.as_bytes();
        let mut i = 0;
        'outer: while i < bytes.len() {
            let c = bytes[i];
            let col = i + 1;
            if c == b'#' {
                break;
            }
            if c.is_ascii_whitespace() {
                i += 1;
                continue;
            }
            if c.is_ascii_alphabetic() || c == b'_' {
                let start = i;
                while i < bytes.len() && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_') {
                    i += 1;
                }
                if derived_names
                    && i + 1 < bytes.len()
                    && matches!(bytes[i], b'#' | b'\'' | b'@')
                    && bytes[i + 1].is_ascii_alphanumeric()
                {
                    i += 1;
                    while i < bytes.len() && bytes[i].is_ascii_alphanumeric() {
                        i += 1;
                    }
                }
                out.push(Token { tok: Tok::Ident(text[start..i].to_string()), line, col });
                continue;
            }
            if c.is_ascii_digit() {
                let start = i;
                while i < bytes.len() && bytes[i].is_ascii_digit() {
                    i += 1;
                }
                let value = text[start..i].parse::<u64>().map_err(|_| ParseError::Syntax {
                    line,
                    col,
                    msg: format!("integer literal `{}` is too large", &text[start..i]),
                })?;
                out.push(Token { tok: Tok::Num(value), line, col });
                continue;
            }
            for sym in SYMBOLS {
                if text[i..].starts_with(sym) {
                    out.push(Token { tok: Tok::Sym(sym), line, col });
                    i += sym.len();
                    continue 'outer;
                }
            }
            return Err(ParseError::Syntax {
                line,
                col,
                msg: format!("unexpected character `{}`", text[i..].chars().next().unwrap_or('?')),
            });
        }
    }
    let line = src.lines().count().max(1);
    out.push(Token { tok: Tok::Eof, line, col: 1 });
    Ok(out)
}

struct Parser {
    tokens: Vec<Token>,
    pos: usize,
    next_line: usize,
}

type RawProgram = (String, Vec<String>, Expr, Vec<Stmt>, Expr);

impl Parser {
    fn peek(&self) -> &Token {
        &self.tokens[self.pos]
    }

    fn bump(&mut self) -> Token {
        let t = self.tokens[self.pos].clone();
        if self.pos + 1 < self.tokens.len() {
            self.pos += 1;
        }
        t
    }

    fn error<T>(&self, msg: impl Into<String>) -> Result<T, ParseError> {
        let t = self.peek();
        let found = match &t.tok {
            Tok::Ident(s) => format!("`{s}`"),
            Tok::Num(n) => format!("`{n}`"),
            Tok::Sym(s) => format!("`{s}`"),
            Tok::Eof => "end of input".to_string(),
        };
        Err(ParseError::Syntax { line: t.line, col: t.col, msg: format!("{}, found {found}", msg.into()) })
    }

    fn is_sym(&self, s: &str) -> bool {
        matches!(&self.peek().tok, Tok::Sym(x) if *x == s)
    }

    fn is_kw(&self, kw: &str) -> bool {
        matches!(&self.peek().tok, Tok::Ident(x) if x == kw)
    }

    fn expect_sym(&mut self, s: &str) -> Result<(), ParseError> {
        if self.is_sym(s) {
            self.bump();
            Ok(())
        } else {
            self.error(format!("expected `{s}`"))
        }
    }

    fn expect_kw(&mut self, kw: &str) -> Result<(), ParseError> {
        if self.is_kw(kw) {
            self.bump();
            Ok(())
        } else {
            self.error(format!("expected `{kw}`"))
        }
    }

    fn expect_eof(&mut self) -> Result<(), ParseError> {
        if matches!(self.peek().tok, Tok::Eof) {
            Ok(())
        } else {
            self.error("expected end of input")
        }
    }

    fn ident(&mut self) -> Result<String, ParseError> {
        match &self.peek().tok {
            Tok::Ident(s) if !is_reserved(s) => {
                let s = s.clone();
                self.bump();
                Ok(s)
            }
            _ => self.error("expected identifier"),
        }
    }

    fn program(&mut self) -> Result<RawProgram, ParseError> {
        self.expect_kw("prog")?;
        let name = self.ident()?;
        self.expect_sym("(")?;
        let mut params = Vec::new();
        if !self.is_sym(")") {
            params.push(self.ident()?);
            while self.is_sym(",") {
                self.bump();
                params.push(self.ident()?);
            }
        }
        self.expect_sym(")")?;
        self.expect_kw("pre")?;
        self.expect_sym(":")?;
        let pre = self.expr(0)?;
        let mut body = Vec::new();
        while !self.is_kw("post") {
            if matches!(self.peek().tok, Tok::Eof) {
                return self.error("expected `post:`");
            }
            body.push(self.stmt()?);
        }
        self.bump();
        self.expect_sym(":")?;
        let post = self.expr(0)?;
        self.expect_eof()?;
        Ok((name, params, pre, body, post))
    }

    fn block(&mut self) -> Result<Vec<Stmt>, ParseError> {
        self.expect_sym("{")?;
        let mut out = Vec::new();
        while !self.is_sym("}") {
            if matches!(self.peek().tok, Tok::Eof) {
                return self.error("expected `}`");
            }
            out.push(self.stmt()?);
        }
        self.bump();
        Ok(out)
    }

    fn paren_expr(&mut self) -> Result<Expr, ParseError> {
        self.expect_sym("(")?;
        let e = self.expr(0)?;
        self.expect_sym(")")?;
        Ok(e)
    }

    fn stmt(&mut self) -> Result<Stmt, ParseError> {
        let line = self.next_line;
        self.next_line += 1;
        let kind = if self.is_kw("if") {
            self.bump();
            let c = self.paren_expr()?;
            let then = self.block()?;
            let els = if self.is_kw("else") {
                self.bump();
                self.block()?
            } else {
                Vec::new()
            };
            StmtKind::If(c, then, els)
        } else if self.is_kw("while") {
            self.bump();
            let c = self.paren_expr()?;
            StmtKind::While(c, self.block()?)
        } else if self.is_kw("assume") || self.is_kw("assert") {
            let assume = self.is_kw("assume");
            self.bump();
            let c = self.paren_expr()?;
            self.expect_sym(";")?;
            if assume {
                StmtKind::Assume(c)
            } else {
                StmtKind::Assert(c)
            }
        } else {
            let v = self.ident()?;
            self.expect_sym("=")?;
            let e = self.expr(0)?;
            self.expect_sym(";")?;
            StmtKind::Assign(v, e)
        };
        Ok(Stmt::new(line, kind))
    }

    fn binop(&self) -> Option<BinOp> {
        let Tok::Sym(s) = self.peek().tok else { return None };
        Some(match s {
            "+" => BinOp::Add,
            "-" => BinOp::Sub,
            "&" => BinOp::BitAnd,
            "|" => BinOp::BitOr,
            "^" => BinOp::BitXor,
            "<<" => BinOp::Shl,
            ">>" => BinOp::Shr,
            "<" => BinOp::Lt,
            "<=" => BinOp::Le,
            "==" => BinOp::Eq,
            "!=" => BinOp::Ne,
            ">" => BinOp::Gt,
            ">=" => BinOp::Ge,
            "&&" => BinOp::And,
            "||" => BinOp::Or,
            _ => return None,
        })
    }

    fn expr(&mut self, min_prec: u8) -> Result<Expr, ParseError> {
        let mut lhs = self.unary()?;
        while let Some(op) = self.binop() {
            let p = op.precedence();
            if p < min_prec {
                break;
            }
            self.bump();
            let rhs = self.expr(p + 1)?;
            lhs = Expr::binary(op, lhs, rhs);
        }
        Ok(lhs)
    }

    fn unary(&mut self) -> Result<Expr, ParseError> {
        let op = match self.peek().tok {
            Tok::Sym("!") => Some(UnOp::Not),
            Tok::Sym("~") => Some(UnOp::BitNot),
            Tok::Sym("-") => Some(UnOp::Neg),
            _ => None,
        };
        if let Some(op) = op {
            self.bump();
            return Ok(Expr::unary(op, self.unary()?));
        }
        match self.peek().tok.clone() {
            Tok::Num(n) => {
                self.bump();
                Ok(Expr::Lit(n))
            }
            Tok::Ident(s) if s == "true" || s == "false" => {
                self.bump();
                Ok(Expr::Bool(s == "true"))
            }
            Tok::Ident(_) => Ok(Expr::Var(self.ident()?)),
            Tok::Sym("(") => self.paren_expr(),
            _ => self.error("expected expression"),
        }
    }
}

//! Front end for the source language: parsing, static checks, printing and
//! fault-region preprocessing.

mod ast;
mod emit;
mod parse;
mod region;

pub use ast::{renumber, word_mask, BinOp, Expr, Program, Sort, SortError, Stmt, StmtKind, UnOp, VarDecl, VarKind};
pub use emit::{emit, emit_block};
pub use parse::{is_reserved, parse, parse_expr, CheckError, Location, ParseError};
pub use region::{preprocess_guards, region_of, FaultRegion, RegionError};

/// Source of the `minmax` benchmark program.
pub const MINMAX: &str = include_str!("../../programs/minmax.prog");

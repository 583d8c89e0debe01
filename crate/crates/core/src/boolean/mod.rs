//! Bit-level reasoning: and-inverter graphs, bit-blasting and BDDs.

mod aig;
mod bdd;
mod blast;

pub use aig::{Aig, AigNode, Lit, Quant};
pub use bdd::{Bdd, BddError, BddStore, DEFAULT_NODE_LIMIT};
pub use blast::{bitblast, distinct_binders, prenex, Blaster};

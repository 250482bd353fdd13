//! Dynamical Lie algebra closures over Pauli strings.
//!
//! Algebra elements are real combinations in the i·Pauli basis: a stored
//! coefficient `c` on word `P` represents `c·(iP)`. The closure dimension
//! upper-bounds the maximal DQFIM rank of any circuit built from the same
//! generators.

mod closure;
mod pauli;

pub use closure::{check_rank_bound, lie_closure, OperatorSpan};
pub use pauli::{pauli_commutator, PauliLetter, PauliSum, PauliWord};

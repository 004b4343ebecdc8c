//! Verbal closures and retracts of finitely generated subgroups of free
//! groups.
//!
//! A finitely generated subgroup of a free group of finite rank is verbally
//! closed exactly when it is a retract. This crate decides that property,
//! computes the verbal closure (the smallest retract containing a subgroup)
//! and checks the supporting facts: the primitivity criterion for cyclic
//! subgroups, bounded equation solving over subgroups, conjugator
//! extraction, and commutator width in free nilpotent groups.

pub mod abelian;
pub mod audit;
pub mod cli;
pub mod closure;
pub mod equations;
pub mod error;
pub mod nilpotent;
pub mod stallings;
pub mod words;

pub use error::{Error, Result};
pub use stallings::{Basis, SubgroupGraph};
pub use words::{Alphabet, Letter, Substitution, Word};

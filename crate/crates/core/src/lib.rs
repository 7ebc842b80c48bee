//! Artin conductor and minimal-discriminant valuation of hyperelliptic curves
//! `y² = f(x)` over `F_p((t))`, computed through Newton–Puiseux expansions of
//! the roots of `f` and the replacement-polynomial induction.

pub mod corpus;
pub mod error;
pub mod field;
pub mod induct;
pub mod laws;
pub mod newton;
pub mod puiseux;
pub mod tree;

pub use error::{Error, Result};

// `!(x > y)` is used on purpose throughout: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bounds;
pub mod codes;
pub mod error;
pub mod hermite;
pub mod orthopoly;
pub mod par;
pub mod potentials;
pub mod quadrature;
pub mod roots;

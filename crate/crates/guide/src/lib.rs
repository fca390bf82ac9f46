//! The book's chapters and the README as doc modules, so `cargo test`
//! compiles and runs every snippet in them. Nothing here is meant to be used
//! as a library.

#[doc = include_str!("../../../book/src/introduction.md")]
pub mod introduction {}

#[doc = include_str!("../../../book/src/paulis.md")]
pub mod chapter1 {}

#[doc = include_str!("../../../book/src/codes.md")]
pub mod chapter2 {}

#[doc = include_str!("../../../book/src/bp.md")]
pub mod chapter3 {}

#[doc = include_str!("../../../book/src/osd.md")]
pub mod chapter4 {}

#[doc = include_str!("../../../book/src/reduction.md")]
pub mod chapter5 {}

#[doc = include_str!("../../../book/src/simulation.md")]
pub mod chapter6 {}

#[doc = include_str!("../../../book/src/cli.md")]
pub mod chapter7 {}

#[doc = include_str!("../../../README.md")]
pub mod readme {}

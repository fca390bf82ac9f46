pub mod bp;
pub mod codes;
pub mod error;
pub mod gf2;
pub mod osd;
pub mod reduction;
pub mod selftest;
pub mod sim;
pub mod symplectic;

pub use error::{Error, Result};

#![no_std]
extern crate alloc;

pub mod error;
pub mod geometry;
pub mod lift;
pub mod lp;
pub mod morin;
pub mod rational;
pub mod simplicial;

pub use error::{Error, Result};
pub use rational::Rational;

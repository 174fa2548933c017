//! Sheaf and cosheaf convolutions of persistence modules.
//!
//! Modules over finite grids in `Z^n` and finite preorders are handled with
//! exact linear algebra over a prime field. One-parameter interval modules
//! also have a closed-form calculus over the rationals.

pub mod cli;
pub mod convolve;
pub mod distance;
pub mod error;
pub mod exactalg;
pub mod interval;
pub mod pmodule;
pub mod poset;
pub mod random;
pub mod stability;

pub use error::{Error, Result};

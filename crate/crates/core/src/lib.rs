//! Abelian sandpile models on Z^d.

pub mod avalanche;
pub mod bench;
pub mod circuit;
pub mod cell;
pub mod config;
pub mod dynamics;
pub mod error;
pub mod gen;
pub mod io;
pub mod lattice;
pub mod model;
pub mod parallel1d;
pub mod prediction;
pub mod render;
pub mod selftest;
pub mod simulation;

pub use cell::Cell;
pub use config::{Configuration, Odometer};
pub use dynamics::{parallel_step, sequential_step, stabilize, stabilize_with, Options, Policy, Stabilization};
pub use error::{Error, Result};
pub use model::{Family, SandpileModel};

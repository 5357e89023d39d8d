//! Discretized Orlicz-Kantorovich lattices over bundles of finite measure
//! fibers, with positive contractions and Besicovich-weighted ergodic averages.

pub mod bundle;
pub mod cli;
pub mod config;
pub mod ergodic;
pub mod error;
pub mod io;
pub mod measure;
pub mod nfunction;
pub mod operators;
pub mod oracles;
pub mod orlicz;
pub mod seed;
pub mod suite;
pub mod weights;

pub use error::{Error, Result};

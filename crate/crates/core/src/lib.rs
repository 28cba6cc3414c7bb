//! Exact-diagonalization simulator for a quantum Otto engine whose working
//! medium is a disordered spin chain tuned between thermal (level-repelling)
//! and many-body-localized (Poissonian) regimes, plus closed-form estimates of
//! its work, heat, efficiency and speed limits.

pub mod analytics;
pub mod basis;
pub mod beta;
pub mod cli;
pub mod competitors;
pub mod cycle;
pub mod ensemble;
pub mod error;
pub mod spectra;
pub mod stats;

pub use error::{Error, Result};

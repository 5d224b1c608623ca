//! Exact renormalized invariants of 3-manifolds from non-semisimple
//! factorizable ribbon Hopf algebras, with bichrome graph diagrams.

pub mod algebra;
pub mod battery;
pub mod cli;
pub mod coend;
pub mod completion;
pub mod corpus;
pub mod backends;
pub mod diagrams;
pub mod eval;
pub mod error;
pub mod hopf;
pub mod repcat;
pub mod sparse;
pub mod topology;

pub use error::{Error, Result};

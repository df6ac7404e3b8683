//! Simulation of protected gates on neutral atoms encoded in a
//! decoherence-free subspace.

pub mod atoms;
pub mod effective;
pub mod engine;
pub mod error;
pub mod experiment;
pub mod gates;
pub mod noise;
pub mod numkit;
pub mod optimizer;
pub mod units;

pub use atoms::{Alphas, DecayConfig, Level, LevelSet, Register};
pub use engine::{PulseSegment, Schedule};
pub use error::{Error, Result};
pub use experiment::{ExperimentConfig, GateName};
pub use gates::{GateRecipe, ProtectedParams, Provenance};
pub use noise::{OUConfig, OUPath};
pub use numkit::{ComplexMatrix, C64};

#![no_std]
extern crate alloc;

mod error;
pub mod coefficients;
pub mod eig;
pub mod errortypes;
pub mod matrix;
pub mod mp;
pub mod pauli;
pub mod schedule;
pub mod simulator;

pub use error::{Error, Result};
pub use errortypes::{Classification, ErrorVector, Moos, MoosPreset};
pub use matrix::CMatrix;
pub use mp::{MathCtx, MpComplex, MpReal, Precision};
pub use schedule::{NuddSpec, Timeline};
pub use simulator::{BathSpec, ModelHamiltonian, Propagator, RunResult};

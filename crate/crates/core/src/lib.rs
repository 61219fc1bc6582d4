pub mod batch;
pub mod cli;
pub mod error;
pub mod feasibility;
pub mod format;
pub mod hvmodel;
pub mod nogo;
pub mod opcore;
pub mod quantum;
pub mod report;
pub mod rng;

pub use error::{Error, Result};
pub use opcore::{CMat, Tolerances};

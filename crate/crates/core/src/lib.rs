pub mod cli;
pub mod error;
pub mod experiments;
pub mod iterative;
pub mod network;
pub mod numerics;
pub mod oracle;
pub mod scaled;
pub mod symmetric;
pub mod zero_forcing;

pub use error::{Error, Result};

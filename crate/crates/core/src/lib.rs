pub mod cli;
pub mod error;
pub mod fixtures;
pub mod generator;
pub mod home_cluster;
pub mod io;
pub mod lucency;
pub mod net;
pub mod semantics;
pub mod structural;
pub mod suite;

pub use error::{Error, Result};

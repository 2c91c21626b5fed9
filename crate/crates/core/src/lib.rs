pub mod cli;
pub mod diffpriv;
pub mod error;
pub mod feasible;
pub mod graph;
pub mod linalg;
pub mod oracle;
pub mod rational;
pub mod semichain;
pub mod signals;

pub use error::{Error, Result};

pub mod cli;
pub mod error;
pub mod gates;
pub mod harness;
pub mod mixed;
pub mod oracle;
pub mod qstate;

pub use error::{Error, Result};

pub mod classify;
pub mod error;
pub mod filtration;
pub mod json;
pub mod measure;
pub mod metric;
pub mod oracle;
pub mod par;
pub mod rational;
pub mod set_algebra;
pub mod svg;
pub mod witness;

pub use error::{Error, Result};
pub use rational::{ExtendedRational, Q};

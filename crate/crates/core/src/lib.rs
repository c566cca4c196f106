pub mod config;
pub mod corpus;
pub mod detect;
pub mod error;
pub mod genclient;
mod hash;
pub mod lm;
pub mod pipeline;
pub mod stats;
pub mod stylometrics;
pub mod synth;
pub mod textproc;

pub use error::{Error, Result};

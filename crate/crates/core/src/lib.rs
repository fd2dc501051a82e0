pub mod baselines;
pub mod calibrate;
pub mod detect;
pub mod edits;
pub mod error;
pub mod gof;
pub mod harness;
pub mod irwin_hall;
pub mod prng;
pub mod schemes;
pub mod special;
pub mod textsim;

pub use error::{Error, Result};

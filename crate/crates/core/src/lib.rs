pub mod bnb;
pub mod cli;
pub mod clock;
pub mod config;
pub mod datagen;
pub mod eval;
pub mod error;
pub mod features;
pub mod instance;
pub mod lp;
pub mod model;
pub mod select;

pub use error::{Error, Result};

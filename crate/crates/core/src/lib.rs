pub mod airy;
pub mod channel;
pub mod contour;
pub mod corrector;
pub mod data;
mod dd;
pub mod error;
pub mod evans;
pub mod experiments;
pub mod field;
pub mod free;
pub mod gain;
pub mod quad;
pub mod resolvent;
pub mod scaled;
pub mod weights;

pub use error::{Error, Result};
pub use num_complex::Complex64 as C64;
pub use scaled::LogC;

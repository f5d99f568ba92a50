pub mod bits;
pub mod brackets;
pub mod entropy_sum;
pub mod error;
pub mod format;
pub mod info;
pub mod pipeline;
pub mod reference;
pub mod report;
pub mod scheme;
pub mod separator;
pub mod stretcher;

pub use bits::BitVector;
pub use error::{Error, Result};

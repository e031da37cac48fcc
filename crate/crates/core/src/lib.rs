pub mod assembly;
pub mod contact;
pub mod ddr;
pub mod error;
pub mod linalg;
pub mod mesh;
pub mod poly;

pub mod verification;

pub use error::{Error, Result};

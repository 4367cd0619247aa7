pub mod area;
pub mod error;
pub mod jacobi;
pub mod measure;
pub mod par;
pub mod poisson;
pub mod quadrature;
pub mod special;
pub mod upsilon;
pub mod verify;

pub use error::{Error, Result};

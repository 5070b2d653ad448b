pub mod algebra;
pub mod domains;
pub mod error;
pub mod green;
pub mod higher;
pub mod kernels;
pub mod linalg;
pub mod optimize;
pub mod output;
pub mod pspace;
pub mod solver;
pub mod verify;

pub use error::{Error, Result};

pub mod cli;
pub mod dilate;
pub mod error;
pub mod family;
pub mod graph;
pub mod io;
pub mod linalg;
pub mod staralg;
pub mod suite;
pub mod verify;
pub mod wold;

pub use error::{Error, Result};

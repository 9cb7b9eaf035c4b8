//! Finite unit norm tight frames: eigensteps, lifting of eigenstep paths to
//! frame paths, explicit frame motions and structural checks.

pub mod eigensteps;
pub mod error;
pub mod frames;
pub mod lifting;
pub mod motions;
pub mod numerics;
pub mod random;

pub use eigensteps::EigenstepsTable;
pub use error::{Error, Result};
pub use frames::{Frame, FramePath, FrameSample};
pub use numerics::{CMat, CVec, Field, Matrix, Tolerances, C64};

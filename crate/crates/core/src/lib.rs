//! Hypocoercivity and hypocontractivity analysis of finite-dimensional
//! linear systems `ẋ = −B x` and `x_{k+1} = B x_k`.

pub mod asymptotics;
pub mod cayley;
pub mod coercivity;
pub mod contractivity;
pub mod corpus;
pub mod error;
pub mod hilbert;
pub mod linalg;
pub mod transform;
pub mod verify;

pub use error::{Error, ErrorKind, Result};
pub use linalg::{CMatrix, Tolerances, C64};

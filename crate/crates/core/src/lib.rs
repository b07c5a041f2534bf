//! Dense tensor calculus: contractive and partition-outer products, operator
//! algebra on even-order tensors, matrix-derivative tensors, tensor ODE
//! solvers and partial Tucker model reduction.

pub mod algebra;
pub mod calculus;
pub mod error;
pub mod fixtures;
pub mod io;
pub mod linalg;
pub mod ode;
pub mod oracle;
pub mod products;
pub mod reduction;
pub mod stability;
pub mod tensor;
pub mod tucker;
pub mod verify;

pub use error::{Error, Result};
pub use products::{ModePairing, ModePartition, Side};
pub use tensor::DenseTensor;

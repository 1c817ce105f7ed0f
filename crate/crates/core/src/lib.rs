//! Pseudorandom quantum ensembles: Pauli and Clifford algebra, Haar moment operators,
//! random-circuit and expander convergence, concentration bounds and Clifford learning.

pub mod chains;
pub mod clifford;
pub mod concentration;
pub mod error;
pub mod haar_moments;
pub mod learning;
pub mod linalg;
pub mod pauli;
pub mod perm;
pub mod random_circuit;
pub mod seed;
pub mod tpe;

pub use error::{Error, Result};

//! Workbench for hybrid quantum-classical 3SAT solving with small devices.

pub mod amplify;
pub mod circuit;
pub mod cnf;
pub mod cover;
pub mod error;
pub mod gen;
pub mod hybrid;
pub mod lambert;
pub mod pbs;
pub mod resource;

pub use cnf::{Assignment, Clause, Formula, Literal, VariableSet};
pub use error::{Error, Result};

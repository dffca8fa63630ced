//! Generalized Markoff maps on the Farey tree and numerical McShane-type
//! identities with explicit tail bounds.

pub mod error;
pub mod farey;
pub mod functions;
pub mod identity;
pub mod markoff;
pub mod summation;

pub use error::{Error, Result};
pub use farey::{DirectedEdge, FareyFraction, SubtreeSpec, TreeEdge, Triangle};
pub use functions::{CylinderValue, Kernels, ModulusParams};
pub use identity::{BQReport, Classification, SumReport};
pub use markoff::{Budget, FanModel, InvariantMapSpec, MuMarkoffMap};

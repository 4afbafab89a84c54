//! Numerical potential theory on metric measure graphs and on hyperbolic space.
//!
//! The crate computes discrete p-modulus and relative p-capacity, classifies
//! graphs as p-parabolic or p-hyperbolic, reweights Gromov hyperbolic graphs
//! into bounded uniform spaces, evaluates explicit Dirichlet functions that are
//! not Newtonian-plus-constant, and runs polar quadrature experiments on ℍⁿ.

pub mod capacity;
pub mod error;
pub mod generators;
pub mod hyperbolic;
pub mod linalg;
pub mod mmspace;
pub mod modulus;
pub mod report;
pub mod uniformize;
pub mod witness;

pub use error::{Error, Result};
pub use mmspace::{MetricMeasureGraph, VertexSet};

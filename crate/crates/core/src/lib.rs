//! Asymptotic limits `A_T = lim T*ⁿTⁿ` of Hilbert-space contractions:
//! dense and orbit-shift operators, constructions with prescribed limits,
//! and the admissibility test for positive contractions.
//!
//! Everything numeric is generic over [`scalar::Real`] (`f32` or `f64`);
//! the aliases below fix `f64`.

pub mod admissibility;
pub mod asymptotics;
pub mod constructions;
pub mod expr;
pub mod fixtures;
pub mod linalg;
pub mod operators;
pub mod random;
pub mod scalar;
pub mod verify;

pub type Matrix = linalg::ComplexMatrix<f64>;
pub type Contraction = operators::DenseContraction<f64>;
pub type Shift = operators::OrbitShift<f64>;
pub type Complex = scalar::Cx<f64>;

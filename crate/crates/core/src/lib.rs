//! Numerical laboratory for one-sided Muckenhoupt weights, one-sided
//! integral operators, interpolation-parameter algebra and Riesz–Kolmogorov
//! compactness diagnostics on the real line.

pub mod compactness;
pub mod extrapolation;
pub mod numerics;
pub mod operators;
pub mod weights;

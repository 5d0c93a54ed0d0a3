//! Calculus of κ-homogeneous polynomial phases.

mod calculus;
mod critical;
mod poly;

pub use calculus::{
    curvature_disjunction, dilate, euler_residual, euler_residual_exact, evaluate_jet, hessian_curve_check,
    hessian_polynomial, homogeneous_radius, polar_decompose, second_derivative_identity_residual,
    second_derivative_identity_residual_exact, Jet, Polar,
};
pub use critical::{
    critical_directions, damping_factor, factor_at_direction, factor_at_point, factor_residual, global_order, height,
    order_at, order_at_exact, CriticalDirection, DampingEval, DampingMode, DampingSpec, Factorization, Frame, Height,
    Order,
};
pub use poly::{check_homogeneity, weighted_degree, MixedHomPoly, PolyJson, Scalar, Weights};

//! Damped oscillatory integrals over κ-homogeneous surfaces: a dyadic
//! production path and a uniform-grid oracle.

mod batch;
mod cutoff;
mod dyadic;
mod fourier;
mod gauss;
mod oracle;
mod panel;
mod surface;

pub use batch::{run_batch, BatchRequest, BATCH_COLUMNS};
pub use cutoff::{
    bump_profile, partition_of_unity_error, partition_piece, partition_sum, smooth_step, CutoffKind, CutoffSpec,
};
pub use dyadic::{
    oscillatory_integral, oscillatory_integral_with, rescaling_check, OscResult, Path, RescalingCheck, ATOL, MAX_LEVEL,
    MAX_PIECES,
};
pub use fourier::{
    fourier_gradient_finite_difference, fourier_surface_measure, fourier_surface_measure_gradient,
    nonstationary_decay_probe, ProbeOptions, ProbePoint,
};
pub use gauss::{gauss_legendre, GL_POINTS};
pub use oracle::{quadrature_oracle, suggested_level};
pub use panel::QuadParams;
pub use surface::{Amplitude, DampingJson, Moment, Phase, SurfaceJson, SurfaceSpec};

//! Exact one-dimensional Green's functions for the point interaction
//! `-α δ(x) + β δ′(x)` placed on a smooth background potential with
//! position-dependent mass, plus the tools used to check them: scattering
//! amplitudes, wave-packet synthesis and a mollified brute-force oracle.

pub mod dressing;
pub mod error;
pub mod green0;
pub mod homogeneous;
pub mod ode;
pub mod profile;
pub mod quadrature;
pub mod regularization;
pub mod scattering;
pub mod wavepacket;

pub use dressing::{
    assemble_general, dress_delta, dress_delta_prime, dressed_boundary,
    limit_derivative_boundary, DressedGreen, Provenance, SingularParams, Surrogate,
};
pub use error::{Error, Result};
pub use green0::{g0, BoundaryData, G0Evaluator, GreenKernel};
pub use homogeneous::{
    reduced_constant, solve_homogeneous, wronskian, HomogeneousPair, HomogeneousSolution,
    ProblemSpec, Side,
};
pub use profile::{
    effective_coefficient, Frequency, MassProfile, PotentialShape, PotentialSpec, Table,
};
pub use regularization::{
    build_regularized_potential, epsilon_scan, epsilon_scan_with, transfer_matrix_scatter, MollifierShape,
    RegularizationSpec, RegularizedCoupling, ScanResult,
};
pub use scattering::{transmission_from_green, AsymptoticChannel, ScatteringResult};
pub use wavepacket::{
    calibrate_propagator, propagate_wavepacket, Calibration, SynthesisOptions, WavePacket,
};

pub use num_complex::Complex64;

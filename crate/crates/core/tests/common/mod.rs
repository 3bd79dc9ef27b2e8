#![allow(dead_code)]

use deltaprime_core::{Frequency, G0Evaluator, MassProfile, PotentialSpec, ProblemSpec};

pub const ETA: f64 = 1e-6;

pub fn free(eta: f64) -> ProblemSpec {
    ProblemSpec::new(
        MassProfile::constant(1.0).unwrap(),
        PotentialSpec::free(),
        Frequency::new(0.5, eta).unwrap(),
    )
}

pub fn harmonic(omega: f64, eta: f64) -> ProblemSpec {
    ProblemSpec::new(
        MassProfile::constant(1.0).unwrap(),
        PotentialSpec::harmonic(1.0, 8.0).unwrap(),
        Frequency::new(omega, eta).unwrap(),
    )
}

pub fn linear_field() -> ProblemSpec {
    ProblemSpec::new(
        MassProfile::constant(1.0).unwrap(),
        PotentialSpec::linear_field(0.1, 5.0).unwrap(),
        Frequency::new(1.0, ETA).unwrap(),
    )
}

pub fn variable_mass() -> ProblemSpec {
    ProblemSpec::new(
        MassProfile::smooth_step(1.0, 2.0, -1.0, 1.0).unwrap(),
        PotentialSpec::free(),
        Frequency::new(0.5, ETA).unwrap(),
    )
}

/// The four backgrounds used throughout, by name.
pub fn backgrounds() -> Vec<(&'static str, ProblemSpec)> {
    vec![
        ("free", free(ETA)),
        ("harmonic", harmonic(0.25, ETA)),
        ("linear-field", linear_field()),
        ("variable-mass", variable_mass()),
    ]
}

pub fn build(p: &ProblemSpec) -> G0Evaluator {
    G0Evaluator::build(p).unwrap()
}

pub fn grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    (0..n).map(|j| lo + (hi - lo) * j as f64 / (n - 1) as f64).collect()
}
